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

//! Software emulation of the 8-bit floating point formats E4M3 and E5M2.
//!
//! - E4M3: sign, 4-bit exponent (bias 7), 3-bit mantissa. No infinities; the
//!   single NaN pattern is `S.1111.111`, so the largest finite value is 448.
//! - E5M2: sign, 5-bit exponent (bias 15), 2-bit mantissa. IEEE-like, with
//!   infinities at `S.11111.00` and NaNs above them; largest finite 57344.
//!
//! Both formats have full subnormal support. Decoding goes through a 256-entry
//! table built from the bit layout; encoding rounds to nearest with ties to
//! even and saturates by default.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fp8Variant {
    #[default]
    E4M3,
    E5M2,
}

impl Fp8Variant {
    pub fn format(self) -> Fp8Format {
        Fp8Format::of(self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Fp8Variant::E4M3 => "e4m3",
            Fp8Variant::E5M2 => "e5m2",
        }
    }
}

impl std::str::FromStr for Fp8Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "e4m3" => Ok(Fp8Variant::E4M3),
            "e5m2" => Ok(Fp8Variant::E5M2),
            other => Err(format!("unknown fp8 format `{other}` (expected e4m3 or e5m2)")),
        }
    }
}

/// What happens to magnitudes that round above the largest finite value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overflow {
    /// Clamp to `±q_max`.
    #[default]
    Saturate,
    /// E5M2 produces `±inf`, E4M3 (which has no infinity) produces NaN.
    NonSaturating,
}

/// One encoded FP8 value. Every byte is a valid code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Fp8Code(pub u8);

impl Fp8Code {
    pub const ZERO: Fp8Code = Fp8Code(0);

    pub fn bits(self) -> u8 {
        self.0
    }
}

/// Format descriptor with the layout constants of one FP8 variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fp8Format {
    pub variant: Fp8Variant,
    pub exponent_bits: u32,
    pub mantissa_bits: u32,
    pub bias: i32,
    /// Largest finite magnitude.
    pub q_max: f32,
    pub has_infinity: bool,
}

static E4M3_TABLE: LazyLock<[f32; 256]> = LazyLock::new(|| build_table(&Fp8Format::E4M3));
static E5M2_TABLE: LazyLock<[f32; 256]> = LazyLock::new(|| build_table(&Fp8Format::E5M2));

fn build_table(fmt: &Fp8Format) -> [f32; 256] {
    let mut table = [0f32; 256];
    for (code, slot) in table.iter_mut().enumerate() {
        *slot = fmt.decode_bits(code as u8);
    }
    table
}

impl Fp8Format {
    pub const E4M3: Fp8Format = Fp8Format {
        variant: Fp8Variant::E4M3,
        exponent_bits: 4,
        mantissa_bits: 3,
        bias: 7,
        q_max: 448.0,
        has_infinity: false,
    };

    pub const E5M2: Fp8Format = Fp8Format {
        variant: Fp8Variant::E5M2,
        exponent_bits: 5,
        mantissa_bits: 2,
        bias: 15,
        q_max: 57344.0,
        has_infinity: true,
    };

    pub const fn of(variant: Fp8Variant) -> Fp8Format {
        match variant {
            Fp8Variant::E4M3 => Self::E4M3,
            Fp8Variant::E5M2 => Self::E5M2,
        }
    }

    /// Magnitude bits (sign stripped) of the largest finite code.
    pub const fn max_finite_magnitude_bits(&self) -> u8 {
        match self.variant {
            Fp8Variant::E4M3 => 0x7E,
            Fp8Variant::E5M2 => 0x7B,
        }
    }

    /// Canonical (positive) NaN code.
    pub const fn nan_code(&self) -> Fp8Code {
        match self.variant {
            Fp8Variant::E4M3 => Fp8Code(0x7F),
            Fp8Variant::E5M2 => Fp8Code(0x7E),
        }
    }

    pub const fn infinity_code(&self) -> Option<Fp8Code> {
        match self.variant {
            Fp8Variant::E4M3 => None,
            Fp8Variant::E5M2 => Some(Fp8Code(0x7C)),
        }
    }

    /// Smallest positive normal value, `2^(1 - bias)`.
    pub fn min_normal(&self) -> f32 {
        (2f64).powi(1 - self.bias) as f32
    }

    /// Smallest positive subnormal value, `2^(1 - bias - m)`.
    pub fn min_subnormal(&self) -> f32 {
        (2f64).powi(1 - self.bias - self.mantissa_bits as i32) as f32
    }

    /// The 256-entry decode table, indexed by code.
    pub fn decode_table(&self) -> &'static [f32; 256] {
        match self.variant {
            Fp8Variant::E4M3 => &E4M3_TABLE,
            Fp8Variant::E5M2 => &E5M2_TABLE,
        }
    }

    #[inline]
    pub fn decode(&self, code: Fp8Code) -> f32 {
        self.decode_table()[code.0 as usize]
    }

    pub fn is_finite_code(&self, code: Fp8Code) -> bool {
        (code.0 & 0x7F) <= self.max_finite_magnitude_bits()
    }

    /// Round-to-nearest-even encode with saturation.
    #[inline]
    pub fn encode(&self, x: f32) -> Fp8Code {
        self.encode_with(x, Overflow::Saturate)
    }

    pub fn encode_with(&self, x: f32, overflow: Overflow) -> Fp8Code {
        if x.is_nan() {
            return self.nan_code();
        }
        let sign = if x.is_sign_negative() { 0x80u8 } else { 0 };
        let a = x.abs() as f64;
        let m = self.mantissa_bits as i32;
        let max_mag = self.max_finite_magnitude_bits() as u32;

        let mag = if a.is_infinite() {
            max_mag + 1
        } else if a < self.min_normal() as f64 {
            // Subnormal grid has spacing 2^(1 - bias - m). A result of 2^m
            // lands exactly on the smallest normal code.
            (a * (2f64).powi(m - (1 - self.bias))).round_ties_even() as u32
        } else {
            let mut e = ((a.to_bits() >> 52) & 0x7ff) as i32 - 1023;
            let mut k = (a * (2f64).powi(m - e)).round_ties_even() as u32;
            if k == 1 << (m + 1) {
                e += 1;
                k = 1 << m;
            }
            let biased = e + self.bias;
            if biased > (1 << self.exponent_bits) - 1 {
                max_mag + 1
            } else {
                ((biased as u32) << m) | (k - (1 << m))
            }
        };

        if mag > max_mag {
            return match overflow {
                Overflow::Saturate => Fp8Code(sign | max_mag as u8),
                Overflow::NonSaturating => match self.infinity_code() {
                    Some(inf) => Fp8Code(sign | inf.0),
                    None => Fp8Code(sign | self.nan_code().0),
                },
            };
        }
        Fp8Code(sign | mag as u8)
    }

    /// Spacing of representable values at `|x|`: `2^(floor(log2|x|) - m)`.
    ///
    /// Zero and subnormal-range inputs return the subnormal spacing.
    pub fn ulp(&self, x: f32) -> f32 {
        let a = x.abs();
        let m = self.mantissa_bits as i32;
        if a < self.min_normal() {
            return self.min_subnormal();
        }
        let e = ((a.to_bits() >> 23) & 0xff) as i32 - 127;
        (2f64).powi(e - m) as f32
    }

    fn decode_bits(&self, code: u8) -> f32 {
        let m = self.mantissa_bits;
        let exp_mask = (1u32 << self.exponent_bits) - 1;
        let mant_mask = (1u32 << m) - 1;
        let negative = code & 0x80 != 0;
        let exp = (code as u32 >> m) & exp_mask;
        let mant = code as u32 & mant_mask;

        let magnitude = if exp == exp_mask && self.has_infinity {
            if mant == 0 {
                f64::INFINITY
            } else {
                f64::NAN
            }
        } else if exp == exp_mask && mant == mant_mask {
            f64::NAN
        } else if exp == 0 {
            mant as f64 * (2f64).powi(1 - self.bias - m as i32)
        } else {
            (1.0 + mant as f64 / (1u32 << m) as f64) * (2f64).powi(exp as i32 - self.bias)
        };
        let v = magnitude as f32;
        if negative {
            -v
        } else {
            v
        }
    }
}

pub fn fp8_encode(x: f32, fmt: &Fp8Format) -> Fp8Code {
    fmt.encode(x)
}

pub fn fp8_decode(code: Fp8Code, fmt: &Fp8Format) -> f32 {
    fmt.decode(code)
}

pub fn fp8_ulp(x: f32, fmt: &Fp8Format) -> f32 {
    fmt.ulp(x)
}
