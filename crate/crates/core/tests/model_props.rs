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


use diagsum::model::{contour_delta_tau, mode_discretization};
use diagsum::system::Mat2;
use diagsum::{SpinBoson, SpinBosonParams};
use proptest::prelude::*;
use std::sync::OnceLock;

fn case1() -> &'static SpinBoson {
    static M: OnceLock<SpinBoson> = OnceLock::new();
    M.get_or_init(|| SpinBoson::new(SpinBosonParams::case1()).unwrap())
}

fn close(a: Mat2, b: Mat2, tol: f64) -> bool {
    (a - b).max_abs() <= tol
}

#[test]
fn modes_are_increasing_and_end_at_cutoff() {
    for p in [SpinBosonParams::case1(), SpinBosonParams::case2()] {
        let modes = mode_discretization(&p);
        assert_eq!(modes.omega.len(), p.l);
        assert!(modes.omega.windows(2).all(|w| w[0] < w[1]));
        assert!(modes.omega[0] > 0.0);
        assert_eq!(*modes.omega.last().unwrap(), p.omega_max);
    }
}

#[test]
fn correlation_is_hermitian_in_time() {
    let m = case1();
    for k in 0..50 {
        let x = 0.13 * k as f64;
        assert!((m.correlation_exact(-x) - m.correlation_exact(x).conj()).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn table_matches_mode_sum(x in -5.0f64..5.0) {
        let m = case1();
        let exact = m.correlation_exact(x);
        prop_assert!((m.correlation_at(x) - exact).norm() <= 1e-9 * (1.0 + exact.norm()));
    }

    #[test]
    fn contour_difference_sign(t in 0.1f64..3.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let (s1, s2) = (2.0 * t * a, 2.0 * t * b);
        let d = contour_delta_tau(s1, s2, t).unwrap();
        if s2 < t {
            prop_assert!(d >= 0.0);
        } else if s1 >= t {
            prop_assert!(d <= 0.0);
        }
        prop_assert!(d.abs() <= 2.0 * t);
        prop_assert!(contour_delta_tau(s2 + 1e-3, s1, t).is_err());
    }

    #[test]
    fn bare_propagator_composes(t in 0.1f64..2.0, u in 0.0f64..1.0, v in 0.0f64..1.0, w in 0.0f64..1.0) {
        let mut s = [u, v, w].map(|x| 2.0 * t * x);
        s.sort_by(f64::total_cmp);
        let m = case1();
        let g = |a, b| m.bare_system_propagator(a, b, t).unwrap();
        prop_assert!(close(g(s[0], s[2]), g(s[1], s[2]) * g(s[0], s[1]), 1e-12));
    }

    #[test]
    fn bare_propagator_is_unitary(t in 0.1f64..2.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let g = case1().bare_system_propagator(2.0 * t * a, 2.0 * t * b, t).unwrap();
        prop_assert!(close(g.adjoint() * g, Mat2::IDENTITY, 1e-12));
    }
}

#[test]
fn full_contour_reproduces_closed_form() {
    let m = SpinBoson::new(SpinBosonParams::uncoupled()).unwrap();
    for k in 0..=20 {
        let t = 0.1 * k as f64;
        let g = m.bare_system_propagator(0.0, 2.0 * t, t).unwrap();
        assert!((g.get(0, 0).re - m.uncoupled_observable(t)).abs() < 1e-12);
        assert!(g.get(0, 0).im.abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_parameters() {
    let bad = [
        SpinBosonParams { beta: 0.0, ..SpinBosonParams::case1() },
        SpinBosonParams { xi: -0.1, ..SpinBosonParams::case1() },
        SpinBosonParams { l: 0, ..SpinBosonParams::case1() },
        SpinBosonParams { omega_c: f64::NAN, ..SpinBosonParams::case1() },
    ];
    for p in bad {
        assert!(SpinBoson::new(p).is_err());
    }
}
