// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! FP8 checked against a table built from the bit layout alone, plus a
//! brute-force nearest-value search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taco_core::{Fp8Code, Fp8Format, Fp8Variant};

struct Layout {
    exp_bits: u32,
    man_bits: u32,
    bias: i32,
    ieee_specials: bool,
}

const E4M3: Layout = Layout {
    exp_bits: 4,
    man_bits: 3,
    bias: 7,
    ieee_specials: false,
};
const E5M2: Layout = Layout {
    exp_bits: 5,
    man_bits: 2,
    bias: 15,
    ieee_specials: true,
};

fn layout(v: Fp8Variant) -> &'static Layout {
    match v {
        Fp8Variant::E4M3 => &E4M3,
        Fp8Variant::E5M2 => &E5M2,
    }
}

/// `None` marks NaN.
fn reference_value(l: &Layout, code: u8) -> Option<f64> {
    let sign = if code >> 7 == 1 { -1.0 } else { 1.0 };
    let e = ((code >> l.man_bits) as u32) & ((1 << l.exp_bits) - 1);
    let m = (code as u32) & ((1 << l.man_bits) - 1);
    let top = (1 << l.exp_bits) - 1;
    if l.ieee_specials && e == top {
        return if m == 0 { Some(sign * f64::INFINITY) } else { None };
    }
    if !l.ieee_specials && e == top && m == (1 << l.man_bits) - 1 {
        return None;
    }
    let frac = m as f64 / (1 << l.man_bits) as f64;
    let mag = if e == 0 {
        frac * 2f64.powi(1 - l.bias)
    } else {
        (1.0 + frac) * 2f64.powi(e as i32 - l.bias)
    };
    Some(sign * mag)
}

/// Finite non-negative codes in increasing order of value.
fn finite_magnitudes(l: &Layout) -> Vec<(u8, f64)> {
    let mut v: Vec<(u8, f64)> = (0u8..0x80)
        .filter_map(|c| reference_value(l, c).filter(|x| x.is_finite()).map(|x| (c, x)))
        .collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    v
}

fn brute_force(table: &[(u8, f64)], x: f32) -> u8 {
    let sign = if x.is_sign_negative() { 0x80 } else { 0 };
    let a = x.abs() as f64;
    let (mut best, mut best_d) = (table[0].0, f64::INFINITY);
    for &(code, v) in table {
        let d = (v - a).abs();
        if d < best_d || (d == best_d && code & 1 == 0) {
            best = code;
            best_d = d;
        }
    }
    sign | best
}

#[test]
fn decode_table_matches_bit_layout() {
    for variant in [Fp8Variant::E4M3, Fp8Variant::E5M2] {
        let fmt = variant.format();
        for code in 0..=255u8 {
            let got = fmt.decode(Fp8Code(code));
            match reference_value(layout(variant), code) {
                None => assert!(got.is_nan(), "{variant:?} {code:#04x}"),
                Some(v) => assert_eq!(got as f64, v, "{variant:?} {code:#04x}"),
            }
        }
    }
}

#[test]
fn every_finite_code_round_trips() {
    for variant in [Fp8Variant::E4M3, Fp8Variant::E5M2] {
        let fmt = variant.format();
        for code in 0..=255u8 {
            let v = fmt.decode(Fp8Code(code));
            if v.is_finite() {
                assert_eq!(fmt.encode(v), Fp8Code(code), "{variant:?} {code:#04x}");
            }
        }
    }
    assert_eq!(Fp8Format::E5M2.encode(f32::INFINITY), Fp8Code(0x7B));
    assert_eq!(
        Fp8Format::E5M2.encode_with(f32::NEG_INFINITY, taco_core::Overflow::NonSaturating),
        Fp8Code(0xFC)
    );
    assert!(Fp8Format::E4M3.decode(Fp8Format::E4M3.encode(f32::NAN)).is_nan());
}

#[test]
fn random_values_encode_to_nearest() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF8);
    for variant in [Fp8Variant::E4M3, Fp8Variant::E5M2] {
        let fmt = variant.format();
        let table = finite_magnitudes(layout(variant));
        let (lo, hi) = match variant {
            Fp8Variant::E4M3 => (-13, 10),
            Fp8Variant::E5M2 => (-20, 17),
        };
        for _ in 0..1_000_000 {
            let e = rng.random_range(lo..=hi);
            let x = rng.random_range(1.0f32..2.0) * 2f32.powi(e) * if rng.random() { 1.0 } else { -1.0 };
            assert_eq!(fmt.encode(x).0, brute_force(&table, x), "{variant:?} x={x:e}");
        }
    }
}

#[test]
fn midpoints_round_to_even() {
    for variant in [Fp8Variant::E4M3, Fp8Variant::E5M2] {
        let fmt = variant.format();
        let table = finite_magnitudes(layout(variant));
        for w in table.windows(2) {
            let mid = ((w[0].1 + w[1].1) / 2.0) as f32;
            assert_eq!(mid as f64, (w[0].1 + w[1].1) / 2.0, "midpoint must be exact in f32");
            let even = if w[0].0 & 1 == 0 { w[0].0 } else { w[1].0 };
            for x in [mid, -mid] {
                let sign = if x < 0.0 { 0x80 } else { 0 };
                assert_eq!(fmt.encode(x).0, sign | even, "{variant:?} tie at {x:e}");
            }
            assert_eq!(fmt.encode(mid.next_down()).0, w[0].0);
            assert_eq!(fmt.encode(mid.next_up()).0, w[1].0);
        }
    }
}

#[test]
fn encode_is_monotone() {
    for fmt in [Fp8Format::E4M3, Fp8Format::E5M2] {
        let mut prev = f32::NEG_INFINITY;
        let mut x = -2.0 * fmt.q_max;
        while x <= 2.0 * fmt.q_max {
            let y = fmt.decode(fmt.encode(x));
            assert!(y >= prev, "decode(encode) not monotone at {x}");
            prev = y;
            x += fmt.q_max / 5000.0;
        }
    }
}

#[test]
fn relative_error_bound_in_normal_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for fmt in [Fp8Format::E4M3, Fp8Format::E5M2] {
        let bound = 2f64.powi(-(fmt.mantissa_bits as i32) - 1);
        for _ in 0..100_000 {
            let x = rng.random_range(fmt.min_normal()..fmt.q_max);
            let y = fmt.decode(fmt.encode(x));
            assert!(((y - x).abs() as f64) <= bound * x as f64, "{x} -> {y}");
            assert!((y - x).abs() <= fmt.ulp(x) / 2.0);
        }
    }
}
