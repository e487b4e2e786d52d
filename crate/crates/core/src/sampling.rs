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

//! Expansion-order distributions, reproducible random streams, and running
//! statistics.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hafnian::{ExclusionWorkspace, HAFNIAN_CAP};
use crate::model::SpinBoson;

/// Default Poisson order constant and truncation.
pub const DEFAULT_B_CONST: f64 = 0.2;
pub const DEFAULT_M_MAX: usize = 13;

/// Sample count per parallel batch. Fixed so that the partition of the
/// sample index space, and hence the output, does not depend on threads.
pub const BATCH_SIZE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OrderKind {
    /// Proportional to the size of the order-`m` term on an even stencil.
    Exact,
    /// `m / 2 - 1 ~ Poisson(2 B t^2)`, truncated at `M_max`.
    Poisson { b_const: f64 },
    /// Uniform over the orders up to a fixed truncation.
    Truncated,
}

/// Probability of each even order `m = 2, 4, ..., 2 M_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderDistribution {
    kind: OrderKind,
    m_max: usize,
    // masses[k] is the probability of m = 2(k + 1).
    masses: Vec<f64>,
    poisson: Option<Poisson<f64>>,
    table: WeightedIndex<f64>,
}

fn normalized(raw: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Degenerate(
            "all order weights vanish; use the Poisson order distribution instead".into(),
        ));
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// `lambda^k / k!` for `k = 0..n`, scaled by the largest term.
fn poisson_shape(lambda: f64, n: usize) -> Vec<f64> {
    let logs: Vec<f64> = (0..n)
        .map(|k| {
            let lf: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
            if lambda == 0.0 {
                if k == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                k as f64 * lambda.ln() - lf
            }
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|l| (l - top).exp()).collect()
}

impl OrderDistribution {
    fn from_masses(kind: OrderKind, masses: Vec<f64>, poisson: Option<Poisson<f64>>) -> Result<Self> {
        let table = WeightedIndex::new(&masses)
            .map_err(|e| Error::Degenerate(format!("order masses: {e}")))?;
        Ok(OrderDistribution {
            kind,
            m_max: masses.len(),
            masses,
            poisson,
            table,
        })
    }

    /// Truncated Poisson law of `m / 2 - 1` with rate `lambda`.
    pub fn poisson_rate(lambda: f64, b_const: f64, m_max: usize) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::validation("M_max must be at least 1"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::validation(format!("invalid Poisson rate {lambda}")));
        }
        let masses = normalized(poisson_shape(lambda, m_max))?;
        let poisson = if lambda > 0.0 {
            Some(Poisson::new(lambda).map_err(|e| Error::validation(e.to_string()))?)
        } else {
            None
        };
        Self::from_masses(OrderKind::Poisson { b_const }, masses, poisson)
    }

    /// `m / 2 - 1 ~ Poisson(2 B t^2)` truncated at `M_max`.
    pub fn poisson(b_const: f64, t: f64, m_max: usize) -> Result<Self> {
        if !(b_const > 0.0) {
            return Err(Error::validation(format!("B must be positive, got {b_const}")));
        }
        Self::poisson_rate(2.0 * b_const * t * t, b_const, m_max)
    }

    /// Uniform over `m = 2, ..., 2 M_bar`.
    pub fn truncated(m_bar: usize) -> Result<Self> {
        if m_bar == 0 {
            return Err(Error::validation("the truncation order must be at least 1"));
        }
        Self::from_masses(OrderKind::Truncated, vec![1.0 / m_bar as f64; m_bar], None)
    }

    /// Masses proportional to `(2t)^(2M) / (2M)! |L_b(tau, 2 tau, ..., 2M tau)|`
    /// with `tau = 2t / (2M + 1)`.
    pub fn exact(model: &SpinBoson, t: f64, m_max: usize) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::validation("M_max must be at least 1"));
        }
        if 2 * m_max > HAFNIAN_CAP {
            return Err(Error::Capacity {
                what: "exact order distribution",
                m: 2 * m_max,
                cap: HAFNIAN_CAP,
                detail: String::new(),
            });
        }
        if !(t > 0.0) {
            return Err(Error::validation("the exact order distribution needs t > 0"));
        }
        let mut ws = ExclusionWorkspace::new();
        let mut raw = Vec::with_capacity(m_max);
        let mut log_fact = 0.0;
        for big_m in 1..=m_max {
            let m = 2 * big_m;
            log_fact += ((m - 1) as f64).ln() + (m as f64).ln();
            let tau = 2.0 * t / (m + 1) as f64;
            let times: Vec<f64> = (1..=m).map(|k| k as f64 * tau).collect();
            let lb = ws.hafnian(&model.correlation_matrix_sorted(&times, t))?;
            raw.push((m as f64 * (2.0 * t).ln() - log_fact).exp() * lb.norm());
        }
        Self::from_masses(OrderKind::Exact, normalized(raw)?, None)
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Probability of order `m`.
    pub fn mass(&self, m: usize) -> f64 {
        if m < 2 || m % 2 == 1 || m / 2 > self.m_max {
            0.0
        } else {
            self.masses[m / 2 - 1]
        }
    }

    /// Draws an even order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match (&self.kind, &self.poisson) {
            (OrderKind::Poisson { .. }, Some(p)) => poisson_draw(rng, p, self.m_max),
            (OrderKind::Poisson { .. }, None) => 2,
            _ => 2 * (self.table.sample(rng) + 1),
        }
    }
}

fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, p: &Poisson<f64>, m_max: usize) -> usize {
    loop {
        let k = p.sample(rng);
        if k < m_max as f64 {
            return 2 * (k as usize + 1);
        }
    }
}

/// One order draw `m = 2(K + 1)`, `K ~ Poisson(2 B t^2)`, redrawn while
/// `m > 2 M_max`.
pub fn poisson_order_sample<R: Rng + ?Sized>(rng: &mut R, b_const: f64, t: f64, m_max: usize) -> usize {
    let lambda = 2.0 * b_const * t * t;
    if lambda <= 0.0 || m_max <= 1 {
        return 2;
    }
    let p = Poisson::new(lambda).expect("positive finite rate");
    poisson_draw(rng, &p, m_max)
}

/// Deterministic generator for one batch of one estimate.
pub fn stream_rng(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut z = seed ^ domain.rotate_left(17) ^ 0x9e37_79b9_7f4a_7c15;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(z);
    rng.set_stream(stream);
    rng
}

/// `n` uniform points on `[a, b]`, sorted ascending.
pub fn sorted_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize, a: f64, b: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..n).map(|_| a + (b - a) * rng.random::<f64>()));
    out.sort_by(f64::total_cmp);
}

/// Running mean and variance of complex samples, real and imaginary parts
/// tracked separately.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    mean: Complex64,
    m2_re: f64,
    m2_im: f64,
}

impl Welford {
    pub fn push(&mut self, x: Complex64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        let d2 = x - self.mean;
        self.m2_re += d.re * d2.re;
        self.m2_im += d.im * d2.im;
    }

    /// Pooled statistics of two disjoint sample sets.
    pub fn merge(&self, o: &Welford) -> Welford {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        let cross = self.n as f64 * w;
        Welford {
            n,
            mean: self.mean + d * w,
            m2_re: self.m2_re + o.m2_re + d.re * d.re * cross,
            m2_im: self.m2_im + o.m2_im + d.im * d.im * cross,
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    /// Standard error of the mean, `(re, im)`.
    pub fn stderr(&self) -> (f64, f64) {
        if self.n < 2 {
            return (0.0, 0.0);
        }
        let n = self.n as f64;
        (
            (self.m2_re / (n - 1.0) / n).sqrt(),
            (self.m2_im / (n - 1.0) / n).sqrt(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpinBosonParams;

    #[test]
    fn masses_sum_to_one() {
        let d = OrderDistribution::poisson(0.2, 2.5, 13).unwrap();
        assert!((d.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.mass(3), 0.0);
        assert_eq!(d.mass(28), 0.0);
        let lam: f64 = 2.5;
        let ratio = d.mass(4) / d.mass(2);
        assert!((ratio - lam).abs() < 1e-12);
        let t = OrderDistribution::truncated(4).unwrap();
        assert_eq!(t.mass(8), 0.25);
    }

    #[test]
    fn single_order() {
        let mut rng = stream_rng(1, 2, 3);
        assert_eq!(poisson_order_sample(&mut rng, 0.2, 2.5, 1), 2);
        let d = OrderDistribution::poisson(0.2, 2.5, 1).unwrap();
        assert_eq!(d.masses(), &[1.0]);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), 2);
        }
        let model = SpinBoson::new(SpinBosonParams::case1()).unwrap();
        assert_eq!(OrderDistribution::exact(&model, 1.0, 1).unwrap().masses(), &[1.0]);
    }

    #[test]
    fn exact_needs_coupling() {
        let model = SpinBoson::new(SpinBosonParams::uncoupled()).unwrap();
        assert!(matches!(
            OrderDistribution::exact(&model, 1.0, 4),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn poisson_mean() {
        let mut rng = stream_rng(7, 0, 0);
        let n = 200_000;
        let s: f64 = (0..n)
            .map(|_| (poisson_order_sample(&mut rng, 0.2, 2.5, 1000) / 2 - 1) as f64)
            .sum();
        let mean = s / n as f64;
        assert!((mean - 2.5).abs() < 3.0 * (2.5f64 / n as f64).sqrt() + 1e-3);
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let mut rng = stream_rng(3, 0, 0);
        let xs: Vec<Complex64> = (0..1000)
            .map(|_| Complex64::new(rng.random::<f64>(), rng.random::<f64>() * 3.0))
            .collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert!((m.mean() - all.mean()).norm() < 1e-14);
        assert!((m.stderr().0 - all.stderr().0).abs() < 1e-14);
        assert!((m.stderr().1 - all.stderr().1).abs() < 1e-14);
    }

    #[test]
    fn streams_differ_and_replay() {
        let a: u64 = stream_rng(1, 5, 0).random();
        let b: u64 = stream_rng(1, 5, 1).random();
        let c: u64 = stream_rng(1, 5, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
