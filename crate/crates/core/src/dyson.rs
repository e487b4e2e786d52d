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

//! Bare diagrammatic Monte Carlo for `<sigma_z(t)>` from the Dyson series.
//!
//! Each sample draws an even order `m`, `m` sorted uniform times on the
//! contour `[0, 2t]`, and weighs the system propagator product and the bath
//! influence functional by the inverse sampling density.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hafnian::ExclusionWorkspace;
use crate::model::{check_sorted, SpinBoson};
use crate::parallel::{map_with, Execution};
use crate::sampling::{sorted_uniform, stream_rng, OrderDistribution, Welford, BATCH_SIZE};
use crate::system::Mat2;

const DQMC_DOMAIN: u64 = 0x6471_6d63;

/// One weighted Monte Carlo sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DysonSample {
    pub m: usize,
    pub times: Vec<f64>,
    /// Number of times strictly before the fold.
    pub sign_count: usize,
    pub weight: Complex64,
}

/// `i^m`.
pub fn i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Bare propagator product `G(s_m, 2t) W ... W G(0, s_1)` with `W = sigma_z`.
pub fn bare_product(model: &SpinBoson, times: &[f64], t: f64) -> Mat2 {
    let mut prev = 0.0;
    let mut acc = Mat2::IDENTITY;
    for &s in times {
        acc = (model.bare(prev, s, t) * acc).z_left();
        prev = s;
    }
    model.bare(prev, 2.0 * t, t) * acc
}

/// The Dyson integrand `i^m (-1)^#{s < t} tr(rho U) L_b` at sorted times.
pub fn dyson_integrand(model: &SpinBoson, times: &[f64], t: f64) -> Result<Complex64> {
    check_sorted(times)?;
    if let (Some(&a), Some(&b)) = (times.first(), times.last()) {
        if a < 0.0 || b > 2.0 * t {
            return Err(Error::validation(format!(
                "contour times must lie in [0, {}]",
                2.0 * t
            )));
        }
    }
    integrand(model, times, t, &mut ExclusionWorkspace::new())
}

fn integrand(model: &SpinBoson, times: &[f64], t: f64, ws: &mut ExclusionWorkspace) -> Result<Complex64> {
    let m = times.len();
    if m % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let system = bare_product(model, times, t).get(0, 0);
    if m == 0 {
        return Ok(system);
    }
    if !model.is_coupled() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lb = ws.hafnian(&model.correlation_matrix_sorted(times, t))?;
    let below = times.iter().filter(|&&s| s < t).count();
    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
    Ok(i_pow(m) * sign * system * lb)
}

/// Mean and componentwise standard error of one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub n_samples: u64,
}

fn log_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Draws one sample for observation time `t`.
pub fn draw_sample<R: rand::Rng + ?Sized>(
    model: &SpinBoson,
    t: f64,
    sampler: &OrderDistribution,
    rng: &mut R,
) -> Result<DysonSample> {
    let mut times = Vec::new();
    let mut ws = ExclusionWorkspace::new();
    let (m, weight) = weighted_sample(model, t, sampler, rng, &mut times, &mut ws)?;
    Ok(DysonSample {
        m,
        sign_count: times.iter().filter(|&&s| s < t).count(),
        times,
        weight,
    })
}

fn weighted_sample<R: rand::Rng + ?Sized>(
    model: &SpinBoson,
    t: f64,
    sampler: &OrderDistribution,
    rng: &mut R,
    times: &mut Vec<f64>,
    ws: &mut ExclusionWorkspace,
) -> Result<(usize, Complex64)> {
    let m = sampler.sample(rng);
    sorted_uniform(rng, m, 0.0, 2.0 * t, times);
    let volume = (m as f64 * (2.0 * t).ln() - log_factorial(m)).exp();
    let w = integrand(model, times, t, ws)? * (volume / sampler.mass(m));
    Ok((m, w))
}

/// Estimates `<sigma_z(t)>` from `n_samples` draws. The order-zero term is
/// added exactly and carries no variance.
pub fn dqmc_observable(
    model: &SpinBoson,
    t: f64,
    n_samples: u64,
    sampler: &OrderDistribution,
    seed: u64,
    exec: Execution,
) -> Result<Estimate> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::validation(format!("observation time must be nonnegative, got {t}")));
    }
    if n_samples == 0 {
        return Err(Error::validation("the sample count must be positive"));
    }
    let leading = integrand(model, &[], t, &mut ExclusionWorkspace::new())?;
    if t == 0.0 || !model.is_coupled() {
        return Ok(Estimate {
            mean: leading,
            stderr_re: 0.0,
            stderr_im: 0.0,
            n_samples,
        });
    }
    let batches = n_samples.div_ceil(BATCH_SIZE as u64) as usize;
    let domain = DQMC_DOMAIN ^ t.to_bits();
    let parts = map_with(
        exec,
        batches,
        || (Vec::new(), ExclusionWorkspace::new()),
        |(times, ws), b| -> Result<Welford> {
            let mut rng = stream_rng(seed, domain, b as u64);
            let start = b as u64 * BATCH_SIZE as u64;
            let count = (n_samples - start).min(BATCH_SIZE as u64);
            let mut acc = Welford::default();
            for _ in 0..count {
                let (_, w) = weighted_sample(model, t, sampler, &mut rng, times, ws)?;
                acc.push(w);
            }
            Ok(acc)
        },
    );
    let mut total = Welford::default();
    for p in parts {
        total = total.merge(&p?);
    }
    let (se_re, se_im) = total.stderr();
    Ok(Estimate {
        mean: leading + total.mean(),
        stderr_re: se_re,
        stderr_im: se_im,
        n_samples,
    })
}
