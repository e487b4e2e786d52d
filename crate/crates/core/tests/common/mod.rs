// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.


//! Helpers shared by the integration tests.

#![allow(dead_code)]

use diagsum::CorrelationMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(m: usize, seed: u64) -> CorrelationMatrix {
    CorrelationMatrix::random(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (b.norm() + 1e-30)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of `f` over `[a, b]` by composite Gauss-Legendre.
pub fn integrate<F: FnMut(f64) -> Complex64>(a: f64, b: f64, panels: usize, mut f: F) -> Complex64 {
    let rule = gauss_legendre(12);
    let w = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * w;
        for &(x, wt) in &rule {
            acc += f(lo + 0.5 * w * (x + 1.0)) * (0.5 * w * wt);
        }
    }
    acc
}
