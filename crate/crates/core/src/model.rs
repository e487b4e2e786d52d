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

//! Spin-boson model: parameters, Ohmic bath modes, the two-point bath
//! correlation on the folded contour, and bare system propagators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;
use crate::system::Mat2;

/// Physical parameters of the spin-boson model. Field names match the
/// configuration keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBosonParams {
    /// Kondo parameter.
    pub xi: f64,
    /// Inverse temperature.
    pub beta: f64,
    pub omega_c: f64,
    pub omega_max: f64,
    /// Energy difference of the two levels.
    pub epsilon: f64,
    /// Spin-flip frequency.
    pub delta: f64,
    /// Number of bath modes.
    #[serde(rename = "L")]
    pub l: usize,
}

impl SpinBosonParams {
    /// Strong-coupling, low-temperature case.
    pub fn case1() -> Self {
        SpinBosonParams {
            xi: 0.4,
            beta: 5.0,
            omega_c: 2.5,
            omega_max: 4.0,
            epsilon: 1.0,
            delta: 1.0,
            l: 400,
        }
    }

    /// Weak-coupling, high-temperature case.
    pub fn case2() -> Self {
        SpinBosonParams {
            xi: 0.1,
            beta: 0.2,
            omega_c: 1.0,
            omega_max: 4.0,
            epsilon: 1.0,
            delta: 1.0,
            l: 400,
        }
    }

    /// Case 1 with the bath switched off.
    pub fn uncoupled() -> Self {
        SpinBosonParams {
            xi: 0.0,
            ..Self::case1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.xi,
            self.beta,
            self.omega_c,
            self.omega_max,
            self.epsilon,
            self.delta,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("model parameters must be finite"));
        }
        for (name, v) in [
            ("beta", self.beta),
            ("omega_c", self.omega_c),
            ("omega_max", self.omega_max),
        ] {
            if v <= 0.0 {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if self.xi < 0.0 {
            return Err(Error::validation(format!("xi must be nonnegative, got {}", self.xi)));
        }
        if self.l == 0 {
            return Err(Error::validation("L must be at least 1"));
        }
        Ok(())
    }
}

/// Discretized bath: coupling `c[l]` and frequency `omega[l]` per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Modes {
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
}

pub fn mode_discretization(p: &SpinBosonParams) -> Modes {
    let n = p.l as f64;
    let span = -(-p.omega_max / p.omega_c).exp_m1();
    let scale = (p.xi * p.omega_c / n * span).sqrt();
    let omega: Vec<f64> = (1..=p.l)
        .map(|l| {
            if l == p.l {
                p.omega_max
            } else {
                -p.omega_c * (-(l as f64 / n) * span).ln_1p()
            }
        })
        .collect();
    let c = omega.iter().map(|w| w * scale).collect();
    Modes { c, omega }
}

/// `coth(x)` for `x > 0`.
pub fn coth(x: f64) -> f64 {
    if x < 1e-6 {
        1.0 / x + x / 3.0
    } else {
        1.0 + 2.0 / (2.0 * x).exp_m1()
    }
}

/// Time difference between two sorted contour points for a fold at `t`.
pub fn contour_delta_tau(tau1: f64, tau2: f64, t: f64) -> Result<f64> {
    if tau1 > tau2 {
        return Err(Error::Ordering(tau1, tau2));
    }
    Ok(delta_tau(tau1, tau2, t))
}

#[inline]
fn delta_tau(tau1: f64, tau2: f64, t: f64) -> f64 {
    if tau2 < t {
        tau2 - tau1
    } else if t <= tau1 {
        tau1 - tau2
    } else {
        2.0 * t - tau1 - tau2
    }
}

// Cubic Hermite table of the correlation as a function of |dtau|, with
// exact derivatives at the nodes.
#[derive(Debug, Clone)]
struct HermiteTable {
    step: f64,
    value: Vec<Complex64>,
    slope: Vec<Complex64>,
}

const TABLE_STEP: f64 = 1.0 / 1024.0;
const TABLE_RANGE: f64 = 12.0;

/// The model with its mode table and correlation table.
#[derive(Debug, Clone)]
pub struct SpinBoson {
    params: SpinBosonParams,
    omega: Vec<f64>,
    // c_l^2 / (2 omega_l) and that times coth(beta omega_l / 2).
    amp: Vec<f64>,
    amp_coth: Vec<f64>,
    table: Option<HermiteTable>,
}

impl SpinBoson {
    pub fn new(params: SpinBosonParams) -> Result<Self> {
        params.validate()?;
        let modes = mode_discretization(&params);
        let amp: Vec<f64> = modes
            .c
            .iter()
            .zip(&modes.omega)
            .map(|(c, w)| c * c / (2.0 * w))
            .collect();
        let amp_coth = amp
            .iter()
            .zip(&modes.omega)
            .map(|(a, w)| a * coth(params.beta * w / 2.0))
            .collect();
        let mut model = SpinBoson {
            params,
            omega: modes.omega,
            amp,
            amp_coth,
            table: None,
        };
        if params.xi > 0.0 {
            model.table = Some(model.build_table());
        }
        Ok(model)
    }

    pub fn params(&self) -> &SpinBosonParams {
        &self.params
    }

    pub fn is_coupled(&self) -> bool {
        self.params.xi > 0.0
    }

    fn build_table(&self) -> HermiteTable {
        let n = (TABLE_RANGE / TABLE_STEP).ceil() as usize + 1;
        let mut value = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for k in 0..n {
            let x = k as f64 * TABLE_STEP;
            let (mut v, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for l in 0..self.omega.len() {
                let w = self.omega[l];
                let (s, c) = (w * x).sin_cos();
                v += Complex64::new(self.amp_coth[l] * c, -self.amp[l] * s);
                d += Complex64::new(-self.amp_coth[l] * w * s, -self.amp[l] * w * c);
            }
            value.push(v);
            slope.push(d);
        }
        HermiteTable {
            step: TABLE_STEP,
            value,
            slope,
        }
    }

    /// Mode sum at time difference `dtau`, evaluated term by term.
    pub fn correlation_exact(&self, dtau: f64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for l in 0..self.omega.len() {
            let (s, c) = (self.omega[l] * dtau).sin_cos();
            v += Complex64::new(self.amp_coth[l] * c, -self.amp[l] * s);
        }
        v
    }

    /// Mode sum at time difference `dtau`, interpolated from the table.
    pub fn correlation_at(&self, dtau: f64) -> Complex64 {
        let Some(tab) = &self.table else {
            return Complex64::new(0.0, 0.0);
        };
        let x = dtau.abs();
        let u = x / tab.step;
        let k = u as usize;
        if k + 1 >= tab.value.len() {
            return self.correlation_exact(dtau);
        }
        let s = u - k as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = tab.value[k] * h00
            + tab.slope[k] * (h10 * tab.step)
            + tab.value[k + 1] * h01
            + tab.slope[k + 1] * (h11 * tab.step);
        if dtau < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    /// Two-point bath correlation `B(tau1, tau2)` for `tau1 <= tau2` on the
    /// contour folded at `t`.
    pub fn bath_correlation(&self, tau1: f64, tau2: f64, t: f64) -> Result<Complex64> {
        Ok(self.correlation_exact(contour_delta_tau(tau1, tau2, t)?))
    }

    /// Symmetrized correlation matrix over sorted contour times.
    pub fn correlation_matrix(&self, times: &[f64], t: f64) -> Result<CorrelationMatrix> {
        check_sorted(times)?;
        Ok(self.correlation_matrix_sorted(times, t))
    }

    pub(crate) fn correlation_matrix_sorted(&self, times: &[f64], t: f64) -> CorrelationMatrix {
        CorrelationMatrix::from_upper(times.len(), |i, j| {
            self.correlation_at(delta_tau(times[i], times[j], t))
        })
    }

    /// `exp(-i x H_s)` with `H_s = epsilon sigma_z + delta sigma_x`.
    pub fn evolve(&self, x: f64) -> Mat2 {
        Mat2::exp_minus_i(self.params.epsilon, self.params.delta, x)
    }

    pub fn hamiltonian(&self) -> Mat2 {
        Mat2::SIGMA_Z * Complex64::new(self.params.epsilon, 0.0)
            + Mat2::SIGMA_X * Complex64::new(self.params.delta, 0.0)
    }

    /// Bare propagator from `s_i` to `s_f` on the contour folded at `t`.
    pub fn bare_system_propagator(&self, s_i: f64, s_f: f64, t: f64) -> Result<Mat2> {
        if s_i > s_f {
            return Err(Error::Ordering(s_i, s_f));
        }
        Ok(self.bare(s_i, s_f, t))
    }

    #[inline]
    pub(crate) fn bare(&self, s_i: f64, s_f: f64, t: f64) -> Mat2 {
        if s_f < t {
            self.evolve(s_f - s_i)
        } else if t <= s_i {
            self.evolve(s_i - s_f)
        } else {
            (self.evolve(t - s_f) * Mat2::SIGMA_Z) * self.evolve(t - s_i)
        }
    }

    /// `(1 + cos(2 |h| t))`-type closed form of the uncoupled observable
    /// `<sigma_z(t)>` for the initial state `|0><0|`.
    pub fn uncoupled_observable(&self, t: f64) -> f64 {
        let (e, d) = (self.params.epsilon, self.params.delta);
        let n2 = e * e + d * d;
        if n2 == 0.0 {
            return 1.0;
        }
        (e * e + d * d * (2.0 * n2.sqrt() * t).cos()) / n2
    }
}

pub(crate) fn check_sorted(times: &[f64]) -> Result<()> {
    for w in times.windows(2) {
        if w[0] > w[1] {
            return Err(Error::Ordering(w[0], w[1]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_end_at_cutoff_and_increase() {
        let p = SpinBosonParams::case1();
        let m = mode_discretization(&p);
        assert_eq!(m.omega.len(), 400);
        assert!((m.omega[399] - p.omega_max).abs() < 1e-12);
        let direct = -p.omega_c * (1.0 - (1.0 - (-p.omega_max / p.omega_c).exp())).ln();
        assert!((direct - p.omega_max).abs() < 1e-12);
        assert!(m.omega.windows(2).all(|w| w[0] < w[1] && w[0] > 0.0));
        let zero = mode_discretization(&SpinBosonParams::uncoupled());
        assert!(zero.c.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn single_mode_formula() {
        let p = SpinBosonParams {
            l: 1,
            ..SpinBosonParams::case1()
        };
        let m = mode_discretization(&p);
        let span = 1.0 - (-1.6f64).exp();
        assert!((m.omega[0] - 4.0).abs() < 1e-12);
        assert!((m.c[0] - 4.0 * (0.4 * 2.5 * span).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn delta_tau_cases() {
        assert!((contour_delta_tau(0.2, 0.5, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert!((contour_delta_tau(1.2, 1.5, 1.0).unwrap() + 0.3).abs() < 1e-15);
        assert!((contour_delta_tau(0.8, 1.5, 1.0).unwrap() + 0.3).abs() < 1e-15);
        assert!(matches!(
            contour_delta_tau(0.5, 0.2, 1.0),
            Err(Error::Ordering(..))
        ));
    }

    #[test]
    fn correlation_at_zero_is_real_and_positive() {
        let m = SpinBoson::new(SpinBosonParams::case1()).unwrap();
        let b = m.bath_correlation(0.3, 0.3, 1.0).unwrap();
        assert_eq!(b.im, 0.0);
        assert!(b.re > 0.0);
        let sum: f64 = (0..400).map(|l| m.amp_coth[l]).sum();
        assert!((b.re - sum).abs() < 1e-12);
    }

    #[test]
    fn correlation_decays() {
        let m = SpinBoson::new(SpinBosonParams::case1()).unwrap();
        let b0 = m.correlation_exact(0.0).norm();
        assert!(m.correlation_exact(5.0).norm() < b0 / 5.0);
    }

    #[test]
    fn table_matches_mode_sum() {
        for p in [SpinBosonParams::case1(), SpinBosonParams::case2()] {
            let m = SpinBoson::new(p).unwrap();
            let scale = m.correlation_exact(0.0).norm();
            let mut x = -11.0;
            while x < 13.0 {
                let d = (m.correlation_at(x) - m.correlation_exact(x)).norm();
                assert!(d < 1e-12 * scale, "x = {x}: {d}");
                x += 0.01237;
            }
        }
    }

    #[test]
    fn uncoupled_correlation_vanishes() {
        let m = SpinBoson::new(SpinBosonParams::uncoupled()).unwrap();
        assert_eq!(m.bath_correlation(0.1, 1.7, 1.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(m.correlation_at(0.4), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn propagators() {
        let m = SpinBoson::new(SpinBosonParams::case1()).unwrap();
        let t = 1.0;
        assert!((m.bare(0.4, 0.4, t) - Mat2::IDENTITY).max_abs() < 1e-15);
        let ab = m.bare(0.1, 0.5, t);
        let bc = m.bare(0.5, 0.9, t);
        assert!((bc * ab - m.bare(0.1, 0.9, t)).max_abs() < 1e-14);
        let ab = m.bare(1.1, 1.4, t);
        let bc = m.bare(1.4, 1.9, t);
        assert!((bc * ab - m.bare(1.1, 1.9, t)).max_abs() < 1e-14);
        for (a, b) in [(0.1, 0.6), (1.2, 1.8)] {
            assert!((m.bare(a, b, t).det().norm() - 1.0).abs() < 1e-12);
        }
        // Across the fold the propagator factors through sigma_z.
        let (a, b) = (0.8, 1.3);
        let across = m.bare(a, b, t);
        let split = m.bare(t, b, t) * Mat2::SIGMA_Z * m.evolve(t - a);
        assert!((across - split).max_abs() < 1e-14);
        assert!(m.bare_system_propagator(0.5, 0.2, t).is_err());
    }

    #[test]
    fn closed_form_observable() {
        let m = SpinBoson::new(SpinBosonParams::uncoupled()).unwrap();
        for t in [0.0, 0.3, 1.0, 2.5] {
            let g = m.bare(0.0, 2.0 * t, t);
            let expect = (1.0 + (2.0 * 2f64.sqrt() * t).cos()) / 2.0;
            assert!((g.get(0, 0) - Complex64::new(expect, 0.0)).norm() < 1e-14);
            assert!((m.uncoupled_observable(t) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SpinBosonParams::case1();
        p.beta = 0.0;
        assert!(SpinBoson::new(p).is_err());
        p = SpinBosonParams::case1();
        p.l = 0;
        assert!(SpinBoson::new(p).is_err());
        p = SpinBosonParams::case1();
        p.xi = -0.1;
        assert!(SpinBoson::new(p).is_err());
    }

    #[test]
    fn coth_branches() {
        assert!((coth(1e-7) - 1e7).abs() / 1e7 < 1e-12);
        assert!((coth(2.0) - 2.0f64.cosh() / 2.0f64.sinh()).abs() < 1e-15);
        assert_eq!(coth(800.0), 1.0);
    }
}
