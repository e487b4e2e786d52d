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

//! 2x2 complex matrices for the two-level system.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [Complex64; 4]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([ZERO; 4]);
    pub const IDENTITY: Mat2 = Mat2([ONE, ZERO, ZERO, ONE]);
    pub const SIGMA_X: Mat2 = Mat2([ZERO, ONE, ONE, ZERO]);
    pub const SIGMA_Z: Mat2 = Mat2([ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([a, b, c, d])
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0[2 * r + c]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0] + self.0[3]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2(self.0.map(|x| x * s))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `sigma_z * self`, without a full product.
    pub fn z_left(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a, b, -c, -d])
    }

    /// `self * sigma_z`.
    pub fn z_right(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a, -b, c, -d])
    }

    /// `exp(-i x H)` for a real traceless `H = hz sigma_z + hx sigma_x`.
    pub fn exp_minus_i(hz: f64, hx: f64, x: f64) -> Self {
        let norm = (hz * hz + hx * hx).sqrt();
        if norm == 0.0 {
            return Mat2::IDENTITY;
        }
        let (s, c) = (x * norm).sin_cos();
        let f = -I * (s / norm);
        Mat2([
            Complex64::new(c, 0.0) + f * hz,
            f * hx,
            f * hx,
            Complex64::new(c, 0.0) - f * hz,
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2(self.0.map(|x| x * s))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut out = self.0;
        for (x, y) in out.iter_mut().zip(o.0) {
            *x += y;
        }
        Mat2(out)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2(self.0.map(|x| -x))
    }
}
