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

//! Inchworm solver for the full propagator `G(s_i, s_f)` on the folded
//! contour.
//!
//! The grid has `n_t + 1` nodes on the forward leg (`0, h, ..., t`) and as
//! many on the backward leg (`t, t + h, ..., 2t`). The two nodes at time `t`
//! are kept apart: `t-` ends the forward leg and `t+` starts the backward
//! one, and `G(a, t+) = sigma_z G(a, t-)`, `G(t-, b) = G(t+, b) sigma_z`.
//! Rows are filled from the last node down. Along each row `s_f` advances
//! by Heun's method, with the series part of the right-hand side estimated
//! by Monte Carlo over linked diagrams.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dyson::{i_pow, Estimate};
use crate::error::{Error, Result};
use crate::hafnian::HAFNIAN_CAP;
use crate::linked::rounded_box_with;
use crate::model::{check_sorted, SpinBoson};
use crate::parallel::{map_with, Execution};
use crate::sampling::{sorted_uniform, stream_rng, OrderDistribution, Welford};
use crate::system::Mat2;

const INCHWORM_DOMAIN: u64 = 0x696e_6368;

/// Order sampling for the series right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InchwormOrders {
    /// `m / 2 - 1 ~ Poisson(2 B (l / 2)^2)` for an interval of length `l`,
    /// truncated at `M_max`.
    Poisson { b_const: f64, m_max: usize },
    /// Uniform over `m = 2, ..., 2 M_bar`.
    Truncated { m_bar: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InchwormConfig {
    pub h: f64,
    /// Monte Carlo samples per right-hand-side evaluation.
    pub n_rhs: usize,
    pub orders: InchwormOrders,
}

/// Node on the grid. `coord` is the node index, or a fractional index for
/// points between nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    coord: f64,
    time: f64,
}

/// Full propagator values on the node grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorTable {
    t_obs: f64,
    h: f64,
    n_t: usize,
    g: Vec<Mat2>,
    filled: Vec<bool>,
}

impl PropagatorTable {
    fn new(t_obs: f64, h: f64, n_t: usize) -> Self {
        let k = 2 * n_t + 2;
        let mut table = PropagatorTable {
            t_obs,
            h,
            n_t,
            g: vec![Mat2::ZERO; k * k],
            filled: vec![false; k * k],
        };
        for i in 0..k {
            table.set(i, i, Mat2::IDENTITY);
        }
        table
    }

    pub fn t_obs(&self) -> f64 {
        self.t_obs
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index of the `t-` node; `t+` is the next one.
    pub fn fold_index(&self) -> usize {
        self.n_t
    }

    pub fn nodes(&self) -> usize {
        2 * self.n_t + 2
    }

    pub fn is_lower(&self, k: usize) -> bool {
        k <= self.n_t
    }

    pub fn node_time(&self, k: usize) -> f64 {
        let n = self.n_t;
        if k == n || k == n + 1 {
            self.t_obs
        } else if k == 2 * n + 1 {
            2.0 * self.t_obs
        } else if k < n {
            k as f64 * self.h
        } else {
            (k - 1) as f64 * self.h
        }
    }

    /// `G(a, b)` for nodes `a <= b`, once computed.
    pub fn get(&self, a: usize, b: usize) -> Option<Mat2> {
        let i = a * self.nodes() + b;
        (a <= b && b < self.nodes() && self.filled[i]).then(|| self.g[i])
    }

    fn at(&self, a: usize, b: usize) -> Result<Mat2> {
        self.get(a, b)
            .ok_or_else(|| Error::Sequencing(format!("G({a}, {b}) read before it was computed")))
    }

    fn set(&mut self, a: usize, b: usize, v: Mat2) {
        let i = a * self.nodes() + b;
        self.g[i] = v;
        self.filled[i] = true;
    }

    fn point(&self, s: f64) -> Point {
        let n = self.n_t as f64;
        let coord = if s < self.t_obs {
            (s / self.h).min(n)
        } else {
            (n + 1.0 + (s - self.t_obs) / self.h).min(2.0 * n + 1.0)
        };
        Point { coord, time: s }
    }

    fn node(&self, k: usize) -> Point {
        Point {
            coord: k as f64,
            time: self.node_time(k),
        }
    }

    fn leg(&self, coord: f64) -> (usize, usize) {
        if coord <= self.n_t as f64 {
            (0, self.n_t)
        } else {
            (self.n_t + 1, 2 * self.n_t + 1)
        }
    }

    fn row_cell(&self, c: f64) -> (usize, f64) {
        let (lo, hi) = self.leg(c);
        let a0 = (c.floor() as usize).clamp(lo, hi.saturating_sub(1).max(lo));
        (a0, c - a0 as f64)
    }

    fn col_cell(&self, c: f64) -> (usize, f64) {
        let (lo, hi) = self.leg(c);
        let b0 = (c.ceil() as usize).saturating_sub(1).clamp(lo, hi.saturating_sub(1).max(lo));
        (b0, c - b0 as f64)
    }

    /// Interpolated `G(x, y)` for `x <= y`: bilinear inside a cell of the
    /// triangle, linear on the three corners of a diagonal cell.
    fn interp(&self, x: Point, y: Point) -> Result<Mat2> {
        // Coincident points, up to rounding in the time-to-index map.
        if y.coord <= x.coord {
            return Ok(Mat2::IDENTITY);
        }
        let (a0, fu) = self.row_cell(x.coord);
        let (b0, fv) = self.col_cell(y.coord);
        if a0 < b0 {
            let mut acc = Mat2::ZERO;
            for (da, wa) in [(0, 1.0 - fu), (1, fu)] {
                for (db, wb) in [(0, 1.0 - fv), (1, fv)] {
                    let w = wa * wb;
                    if w != 0.0 {
                        acc += self.at(a0 + da, b0 + db)? * w;
                    }
                }
            }
            Ok(acc)
        } else if a0 == b0 && fu <= fv {
            let w = fv - fu;
            Ok(Mat2::IDENTITY * (1.0 - w) + self.at(a0, a0 + 1)? * w)
        } else {
            Err(Error::Sequencing(format!(
                "no grid cell for G at coordinates ({}, {})",
                x.coord, y.coord
            )))
        }
    }

    /// `G(s_{m-1}, s_f) W ... W G(s_i, s_1)` with `W = sigma_z`, over sorted
    /// contour times `s_i, s_1, ..., s_{m-1}, s_f`.
    pub fn full_propagator_functional(&self, points: &[f64]) -> Result<Mat2> {
        check_sorted(points)?;
        let pts: Vec<Point> = points.iter().map(|&s| self.point(s)).collect();
        self.functional(&pts)
    }

    fn functional(&self, pts: &[Point]) -> Result<Mat2> {
        let Some((first, rest)) = pts.split_first() else {
            return Err(Error::validation("the propagator functional needs two endpoints"));
        };
        let mut prev = *first;
        let mut acc = Mat2::IDENTITY;
        for (k, &p) in rest.iter().enumerate() {
            acc = self.interp(prev, p)? * acc;
            if k + 1 < rest.len() {
                acc = acc.z_left();
            }
            prev = p;
        }
        Ok(acc)
    }

    /// `tr(rho G(0, 2t))`.
    pub fn observable(&self) -> Complex64 {
        self.g[self.nodes() - 1].get(0, 0)
    }
}

/// Number of grid steps in `t_obs`, which must be a multiple of `h`.
pub fn fold_steps(t_obs: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::validation(format!("time step must be positive, got {h}")));
    }
    if !(t_obs >= 0.0) || !t_obs.is_finite() {
        return Err(Error::validation(format!("observation time must be nonnegative, got {t_obs}")));
    }
    let n = (t_obs / h).round();
    if (t_obs / h - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::validation(format!(
            "observation time {t_obs} is not a multiple of the step {h}"
        )));
    }
    Ok(n as usize)
}

/// Counters collected while solving.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InchwormDiagnostics {
    pub rhs_evaluations: u64,
    pub samples: u64,
    pub max_order: usize,
}

struct Solver<'a> {
    model: &'a SpinBoson,
    cfg: InchwormConfig,
    table: PropagatorTable,
    // Order distribution per interval length, in grid steps.
    orders: Vec<OrderDistribution>,
    times: Vec<f64>,
    pts: Vec<Point>,
    diag: InchwormDiagnostics,
}

fn order_table(cfg: &InchwormConfig, n_t: usize) -> Result<Vec<OrderDistribution>> {
    match cfg.orders {
        InchwormOrders::Poisson { b_const, m_max } => {
            check_m_max(m_max)?;
            if !(b_const > 0.0) {
                return Err(Error::validation(format!("B must be positive, got {b_const}")));
            }
            (0..=2 * n_t)
                .map(|steps| {
                    let half = steps as f64 * cfg.h / 2.0;
                    OrderDistribution::poisson_rate(2.0 * b_const * half * half, b_const, m_max)
                })
                .collect()
        }
        InchwormOrders::Truncated { m_bar } => {
            check_m_max(m_bar)?;
            Ok(vec![OrderDistribution::truncated(m_bar)?; 2 * n_t + 1])
        }
    }
}

fn check_m_max(m_max: usize) -> Result<()> {
    if m_max == 0 || 2 * m_max > HAFNIAN_CAP {
        return Err(Error::Capacity {
            what: "inchworm order truncation",
            m: 2 * m_max,
            cap: HAFNIAN_CAP,
            detail: String::new(),
        });
    }
    Ok(())
}

fn log_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

impl Solver<'_> {
    /// `dG(a, s_f)/ds_f` at node `b`, using whatever `G(a, b)` is stored.
    fn rhs<R: Rng + ?Sized>(&mut self, a: usize, b: usize, rng: &mut R) -> Result<Mat2> {
        self.diag.rhs_evaluations += 1;
        let table = &self.table;
        let lower_f = table.is_lower(b);
        let sgn = if lower_f { -1.0 } else { 1.0 };
        let g = table.at(a, b)?;
        let drift = (self.model.hamiltonian() * g) * Complex64::new(0.0, sgn);
        if !self.model.is_coupled() || self.cfg.n_rhs == 0 {
            return Ok(drift);
        }
        let (si, sf) = (table.node(a), table.node(b));
        let len = sf.time - si.time;
        let steps = (len / self.cfg.h).round() as usize;
        let dist = &self.orders[steps.min(self.orders.len() - 1)];
        let t = table.t_obs;
        let mut acc = Mat2::ZERO;
        for _ in 0..self.cfg.n_rhs {
            let m = dist.sample(rng);
            self.diag.samples += 1;
            self.diag.max_order = self.diag.max_order.max(m);
            sorted_uniform(rng, m - 1, si.time, sf.time, &mut self.times);
            self.pts.clear();
            self.pts.push(si);
            self.pts.extend(self.times.iter().map(|&s| {
                let mut p = table.point(s);
                p.coord = p.coord.clamp(si.coord, sf.coord);
                p
            }));
            self.pts.push(sf);
            let u = table.functional(&self.pts)?;
            let below = self.times.iter().filter(|&&s| s < t).count() + usize::from(lower_f);
            self.times.push(sf.time);
            let lc = rounded_box_with(
                &self.model.correlation_matrix_sorted(&self.times, t),
                Execution::Sequential,
            )?;
            let volume = ((m - 1) as f64 * len.ln() - log_factorial(m - 1)).exp();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            let w = i_pow(m) * (sign * volume / dist.mass(m)) * lc;
            acc += u.z_left() * w;
        }
        Ok(drift + acc * (1.0 / self.cfg.n_rhs as f64))
    }

    fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let k = self.table.nodes();
        let n = self.table.n_t;
        let h = self.cfg.h;
        for a in (0..k).rev() {
            if a == n {
                for b in (n + 1)..k {
                    let v = self.table.at(n + 1, b)?.z_right();
                    self.table.set(n, b, v);
                }
                continue;
            }
            for b in (a + 1)..k {
                if b == n + 1 {
                    let v = self.table.at(a, n)?.z_left();
                    self.table.set(a, b, v);
                    continue;
                }
                let g0 = self.table.at(a, b - 1)?;
                let f0 = self.rhs(a, b - 1, rng)?;
                self.table.set(a, b, g0 + f0 * h);
                let f1 = self.rhs(a, b, rng)?;
                self.table.set(a, b, g0 + (f0 + f1) * (h / 2.0));
            }
        }
        Ok(())
    }
}

/// `dG(s_i, s_f)/ds_f` at the nodes `a < b` of a filled table, with the
/// series part estimated from `cfg.n_rhs` samples.
pub fn inchworm_rhs<R: Rng + ?Sized>(
    model: &SpinBoson,
    table: &PropagatorTable,
    a: usize,
    b: usize,
    cfg: &InchwormConfig,
    rng: &mut R,
) -> Result<Mat2> {
    if cfg.h != table.h {
        return Err(Error::validation("configuration step differs from the table step"));
    }
    if a >= b || b >= table.nodes() {
        return Err(Error::Ordering(a as f64, b as f64));
    }
    let mut solver = Solver {
        model,
        cfg: *cfg,
        table: table.clone(),
        orders: order_table(cfg, table.n_t)?,
        times: Vec::new(),
        pts: Vec::new(),
        diag: InchwormDiagnostics::default(),
    };
    solver.rhs(a, b, rng)
}

/// Result of one inchworm solve.
#[derive(Debug, Clone)]
pub struct InchwormSolution {
    pub table: PropagatorTable,
    pub observable: Complex64,
    pub diagnostics: InchwormDiagnostics,
}

/// Solves for `G` on `[0, 2 t_obs]` with one random stream.
pub fn solve_inchworm<R: Rng + ?Sized>(
    model: &SpinBoson,
    t_obs: f64,
    cfg: &InchwormConfig,
    rng: &mut R,
) -> Result<InchwormSolution> {
    let n_t = fold_steps(t_obs, cfg.h)?;
    let mut solver = Solver {
        model,
        cfg: *cfg,
        table: PropagatorTable::new(t_obs, cfg.h, n_t),
        orders: order_table(cfg, n_t)?,
        times: Vec::new(),
        pts: Vec::new(),
        diag: InchwormDiagnostics::default(),
    };
    solver.run(rng)?;
    let observable = solver.table.observable();
    Ok(InchwormSolution {
        table: solver.table,
        observable,
        diagnostics: solver.diag,
    })
}

/// Mean over `replicas` independent solves, with the standard error taken
/// from their spread.
pub fn inchworm_observable(
    model: &SpinBoson,
    t_obs: f64,
    cfg: &InchwormConfig,
    replicas: usize,
    seed: u64,
    exec: Execution,
) -> Result<Estimate> {
    if replicas == 0 {
        return Err(Error::validation("at least one replica is required"));
    }
    let deterministic = !model.is_coupled() || t_obs == 0.0;
    let runs = if deterministic { 1 } else { replicas };
    let domain = INCHWORM_DOMAIN ^ t_obs.to_bits();
    let parts = map_with(exec, runs, || (), |_, r| {
        let mut rng = stream_rng(seed, domain, r as u64);
        solve_inchworm(model, t_obs, cfg, &mut rng).map(|s| s.observable)
    });
    let mut acc = Welford::default();
    for p in parts {
        acc.push(p?);
    }
    let (se_re, se_im) = acc.stderr();
    let runs_per_solve = if deterministic { 0 } else { cfg.n_rhs as u64 };
    Ok(Estimate {
        mean: acc.mean(),
        stderr_re: se_re,
        stderr_im: se_im,
        n_samples: runs_per_solve * replicas as u64 * rhs_evaluations(fold_steps(t_obs, cfg.h)?),
    })
}

/// Right-hand-side evaluations of one solve with `n_t` steps to the fold.
pub fn rhs_evaluations(n_t: usize) -> u64 {
    let n = n_t as u64;
    // Both legs contribute n(n+1)/2 steps within themselves; each of the n
    // forward rows below the fold also crosses to the n backward steps.
    2 * (n * (n + 1) + n * n)
}
