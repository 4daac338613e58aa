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

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use taco_core::{fwht_inverse, fwht_orthonormal};

/// Sylvester entry `H[i][j] = (-1)^popcount(i & j)`.
fn sylvester(i: usize, j: usize) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn dense_transform(v: &[f32]) -> Vec<f64> {
    let n = v.len();
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| norm * (0..n).map(|j| sylvester(i, j) * v[j] as f64).sum::<f64>())
        .collect()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    (0..n).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn matches_dense_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for b in [1, 2, 4, 8, 16, 32, 64] {
        for _ in 0..20 {
            let v = random_vec(&mut rng, b);
            let fast = fwht_orthonormal(&v).unwrap();
            let slow = dense_transform(&v);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((*f as f64 - s).abs() <= 1e-5, "B={b}: {f} vs {s}");
            }
        }
    }
}

#[test]
fn involution_and_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for b in [32, 64, 128, 256, 512] {
        for _ in 0..100 {
            let v = random_vec(&mut rng, b);
            let z = fwht_orthonormal(&v).unwrap();
            let back = fwht_inverse(&z).unwrap();
            let nv = norm(v.iter().map(|&x| x as f64));
            let nz = norm(z.iter().map(|&x| x as f64));
            let diff = norm(v.iter().zip(&back).map(|(&a, &b)| a as f64 - b as f64));
            assert!((nz - nv).abs() <= 1e-6 * nv, "B={b}: energy {nz} vs {nv}");
            assert!(diff <= 1e-6 * nv, "B={b}: involution residue {}", diff / nv);
        }
    }
}

#[test]
fn linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b) = (random_vec(&mut rng, 256), random_vec(&mut rng, 256));
    let sum: Vec<f32> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + y).collect();
    let (ha, hb, hs) = (
        fwht_orthonormal(&a).unwrap(),
        fwht_orthonormal(&b).unwrap(),
        fwht_orthonormal(&sum).unwrap(),
    );
    for i in 0..256 {
        assert!((hs[i] - (2.0 * ha[i] + hb[i])).abs() <= 1e-5);
    }
}

#[test]
fn unit_vectors_spread_evenly() {
    for b in [4usize, 64, 1024] {
        let mut e = vec![0f32; b];
        e[b / 2 + 1] = 1.0;
        let z = fwht_orthonormal(&e).unwrap();
        let expected = 1.0 / (b as f32).sqrt();
        assert!(z.iter().all(|v| (v.abs() - expected).abs() < 1e-6));
    }
}
