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

//! Wall-clock comparison of the direct and inclusion-exclusion engines.

use std::hint::black_box;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hafnian::ExclusionWorkspace;
use crate::linked::rounded_box_with;
use crate::matrix::CorrelationMatrix;
use crate::pairings::DiagramTable;
use crate::parallel::Execution;
use crate::series::PROVENANCE;

/// Largest orders timed with the direct engine by default.
pub const DIRECT_HAFNIAN_CAP: usize = 16;
pub const DIRECT_LINKED_CAP: usize = 18;

/// Minimum time per trial; fast calls are repeated until it is reached.
const MIN_TRIAL: Duration = Duration::from_millis(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchKind {
    Hafnian,
    Linked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub orders: Vec<usize>,
    pub trials: usize,
    pub direct_cap: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl BenchOptions {
    pub fn new(kind: BenchKind, orders: Vec<usize>, trials: usize) -> Self {
        BenchOptions {
            orders,
            trials,
            direct_cap: match kind {
                BenchKind::Hafnian => DIRECT_HAFNIAN_CAP,
                BenchKind::Linked => DIRECT_LINKED_CAP,
            },
            seed: 2023,
            exec: Execution::Sequential,
        }
    }
}

/// Per-call seconds of every trial, and their median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub samples: Vec<f64>,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: usize,
    pub direct: Option<Timing>,
    /// Why the direct engine was not timed.
    pub direct_skipped: Option<String>,
    pub ie: Timing,
    /// Largest relative difference between the engines' values.
    pub agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub kind: BenchKind,
    pub trials: usize,
    pub rows: Vec<BenchRow>,
    /// `T(m + 2) / T(m)` of the inclusion-exclusion engine.
    pub ie_ratios: Vec<(usize, f64)>,
    /// Smallest order at which inclusion-exclusion beats the direct engine.
    pub crossover: Option<usize>,
    /// Least-squares slope of `ln T` against `m / 2` for the
    /// inclusion-exclusion engine.
    pub ie_log_slope: Option<f64>,
    pub provenance: String,
    pub threads: usize,
}

impl BenchReport {
    pub fn median(&self, m: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.m == m).map(|r| r.ie.median)
    }

    pub fn ratio(&self, from: usize, to: usize) -> Option<f64> {
        Some(self.median(to)? / self.median(from)?)
    }

    /// Log-slope refit over rows with `m >= m_min`.
    pub fn log_slope_from(&self, m_min: usize) -> Option<f64> {
        log_slope(
            self.rows
                .iter()
                .filter(|r| r.m >= m_min)
                .map(|r| (r.m as f64 / 2.0, r.ie.median.ln())),
        )
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn log_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Per-call seconds of one trial: `f` is repeated until `MIN_TRIAL` has passed.
fn trial<F: FnMut() -> Complex64>(mut f: F) -> f64 {
    let mut calls = 0u32;
    let start = Instant::now();
    loop {
        black_box(f());
        calls += 1;
        if start.elapsed() >= MIN_TRIAL {
            break;
        }
    }
    start.elapsed().as_secs_f64() / calls as f64
}

fn timing(samples: Vec<f64>) -> Timing {
    let mut sorted = samples.clone();
    Timing {
        median: median(&mut sorted),
        samples,
    }
}

struct Case {
    m: usize,
    b: CorrelationMatrix,
    ws: ExclusionWorkspace,
    table: Option<DiagramTable>,
    ie: Vec<f64>,
    direct: Vec<f64>,
    agreement: Option<f64>,
}

impl Case {
    fn eval_ie(&mut self, kind: BenchKind, exec: Execution) -> Complex64 {
        match kind {
            BenchKind::Hafnian => self.ws.hafnian(&self.b).expect("validated order"),
            BenchKind::Linked => rounded_box_with(&self.b, exec).expect("validated order"),
        }
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (b.norm() + 1e-300)
}

/// Times both engines over the requested orders on one random matrix per
/// order, shared by the two engines.
pub fn run_bench(kind: BenchKind, opts: &BenchOptions) -> Result<BenchReport> {
    if opts.trials < 5 {
        return Err(Error::validation("at least five trials are required"));
    }
    let mut orders = opts.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let min_m = if kind == BenchKind::Linked { 4 } else { 2 };
    if let Some(&bad) = orders.iter().find(|&&m| m % 2 == 1 || m < min_m) {
        return Err(Error::InvalidOrder {
            m: bad,
            reason: "benchmarks need even orders",
        });
    }
    let mut cases = Vec::with_capacity(orders.len());
    for &m in &orders {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (m as u64) << 32);
        let b = CorrelationMatrix::random(m, &mut rng);
        let table = if m > opts.direct_cap {
            None
        } else {
            Some(match kind {
                BenchKind::Hafnian => DiagramTable::all(m, opts.direct_cap)?,
                BenchKind::Linked => DiagramTable::linked(m, opts.direct_cap)?,
            })
        };
        let mut case = Case {
            m,
            b,
            ws: ExclusionWorkspace::new(),
            table,
            ie: Vec::with_capacity(opts.trials),
            direct: Vec::with_capacity(opts.trials),
            agreement: None,
        };
        // Warm-up call, which also sizes the subset tables.
        let ie_value = case.eval_ie(kind, opts.exec);
        case.agreement = case.table.as_ref().map(|t| rel(ie_value, t.evaluate(&case.b)));
        cases.push(case);
    }
    // Trials run round-robin over the orders, so a slow spell of the machine
    // is spread over all of them rather than landing on one.
    for _ in 0..opts.trials {
        for case in cases.iter_mut() {
            let t = trial(|| case.eval_ie(kind, opts.exec));
            case.ie.push(t);
            if let Some(table) = &case.table {
                let b = &case.b;
                case.direct.push(trial(|| table.evaluate(b)));
            }
        }
    }
    let rows: Vec<BenchRow> = cases
        .into_iter()
        .map(|c| BenchRow {
            m: c.m,
            direct: c.table.as_ref().map(|_| timing(c.direct)),
            direct_skipped: c
                .table
                .is_none()
                .then(|| format!("over the direct-engine cap of {}", opts.direct_cap)),
            ie: timing(c.ie),
            agreement: c.agreement,
        })
        .collect();
    let ie_ratios = rows
        .windows(2)
        .filter(|w| w[1].m == w[0].m + 2)
        .map(|w| (w[0].m, w[1].ie.median / w[0].ie.median))
        .collect();
    let crossover = rows
        .iter()
        .find(|r| r.direct.as_ref().is_some_and(|d| r.ie.median < d.median))
        .map(|r| r.m);
    let fit_from = if kind == BenchKind::Linked { 14 } else { 2 };
    let ie_log_slope = log_slope(
        rows.iter()
            .filter(|r| r.m >= fit_from)
            .map(|r| (r.m as f64 / 2.0, r.ie.median.ln())),
    );
    Ok(BenchReport {
        kind,
        trials: opts.trials,
        rows,
        ie_ratios,
        crossover,
        ie_log_slope,
        provenance: PROVENANCE.to_string(),
        threads: if opts.exec.is_parallel() {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            1
        },
    })
}

pub fn bench_hafnian(orders: Vec<usize>, trials: usize) -> Result<BenchReport> {
    run_bench(BenchKind::Hafnian, &BenchOptions::new(BenchKind::Hafnian, orders, trials))
}

pub fn bench_linked(orders: Vec<usize>, trials: usize) -> Result<BenchReport> {
    run_bench(BenchKind::Linked, &BenchOptions::new(BenchKind::Linked, orders, trials))
}
