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


mod common;

use common::integrate;
use diagsum::dyson::{dqmc_observable, dyson_integrand};
use diagsum::sampling::OrderDistribution;
use diagsum::{Execution, SpinBoson, SpinBosonParams};
use num_complex::Complex64;

/// Second-order term by quadrature over `0 < s1 < s2 < 2t`, split at the fold.
fn second_order(model: &SpinBoson, t: f64) -> Complex64 {
    let f = |s1: f64, s2: f64| dyson_integrand(model, &[s1, s2], t).unwrap();
    let tri = |lo: f64, hi: f64| integrate(lo, hi, 8, |s2| integrate(lo, s2, 8, |s1| f(s1, s2)));
    let square = integrate(t, 2.0 * t, 8, |s2| integrate(0.0, t, 8, |s1| f(s1, s2)));
    tri(0.0, t) + square + tri(t, 2.0 * t)
}

#[test]
fn fixed_order_matches_quadrature() {
    let model = SpinBoson::new(SpinBosonParams::case1()).unwrap();
    let t = 1.0;
    let leading = dyson_integrand(&model, &[], t).unwrap();
    let sampler = OrderDistribution::truncated(1).unwrap();
    let est = dqmc_observable(&model, t, 1_000_000, &sampler, 11, Execution::default()).unwrap();
    let mc = est.mean - leading;
    let quad = second_order(&model, t);
    let err = (mc - quad).norm() / quad.norm();
    assert!(err <= 0.02, "mc {mc} vs quadrature {quad}: {err:e}");
}

#[test]
fn exact_and_poisson_orders_agree() {
    let model = SpinBoson::new(SpinBosonParams::case1()).unwrap();
    let t = 0.8;
    let n = 200_000;
    let exact = OrderDistribution::exact(&model, t, 8).unwrap();
    let poisson = OrderDistribution::poisson(0.2, t, 8).unwrap();
    let a = dqmc_observable(&model, t, n, &exact, 3, Execution::default()).unwrap();
    let b = dqmc_observable(&model, t, n, &poisson, 4, Execution::default()).unwrap();
    let sigma = (a.stderr_re.powi(2) + b.stderr_re.powi(2)).sqrt();
    assert!((a.mean.re - b.mean.re).abs() <= 3.0 * sigma, "{a:?} vs {b:?}");
    for e in [a, b] {
        assert!(e.mean.im.abs() <= 4.0 * e.stderr_im.max(1e-12), "{e:?}");
    }
}

#[test]
fn uncoupled_is_exact() {
    let model = SpinBoson::new(SpinBosonParams::uncoupled()).unwrap();
    let sampler = OrderDistribution::truncated(3).unwrap();
    for k in 0..=10 {
        let t = 0.25 * k as f64;
        let e = dqmc_observable(&model, t, 10, &sampler, 0, Execution::default()).unwrap();
        assert!((e.mean.re - model.uncoupled_observable(t)).abs() <= 1e-12);
        assert_eq!(e.stderr_re, 0.0);
    }
}

#[test]
fn starts_at_one() {
    let model = SpinBoson::new(SpinBosonParams::case1()).unwrap();
    let sampler = OrderDistribution::poisson(0.2, 1.0, 13).unwrap();
    let e = dqmc_observable(&model, 0.0, 1000, &sampler, 0, Execution::default()).unwrap();
    assert_eq!(e.mean, Complex64::new(1.0, 0.0));
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let model = SpinBoson::new(SpinBosonParams::case2()).unwrap();
    let sampler = OrderDistribution::poisson(0.2, 0.7, 13).unwrap();
    let a = dqmc_observable(&model, 0.7, 5000, &sampler, 9, Execution::Sequential).unwrap();
    let b = dqmc_observable(&model, 0.7, 5000, &sampler, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejects_bad_input() {
    let model = SpinBoson::new(SpinBosonParams::case1()).unwrap();
    let sampler = OrderDistribution::truncated(1).unwrap();
    assert!(dqmc_observable(&model, -1.0, 10, &sampler, 0, Execution::Sequential).is_err());
    assert!(dqmc_observable(&model, 1.0, 0, &sampler, 0, Execution::Sequential).is_err());
    assert!(dyson_integrand(&model, &[0.5, 0.1], 1.0).is_err());
    assert!(dyson_integrand(&model, &[0.5, 2.5], 1.0).is_err());
}
