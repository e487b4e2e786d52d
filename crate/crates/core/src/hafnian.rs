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

//! Hafnian evaluation by inclusion-exclusion over exclusion subsets.
//!
//! For a subset `S` of excluded points, `Q(S)` is half the sum of all
//! entries of `B` whose row and column both avoid `S`. The hafnian is
//! `sum_S (-1)^|S| Q(S)^(m/2) / (m/2)!`. Each `Q(S ∪ {i})` is obtained from
//! `Q(S)` with one subtraction of the row remainder `R^(i)_S`, which itself
//! is built one subtraction at a time, so the whole table costs `O(2^m)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;

/// Largest order accepted by the subset-table kernels.
pub const HAFNIAN_CAP: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `z^n` by repeated squaring.
pub fn powi(mut z: Complex64, mut n: u32) -> Complex64 {
    let mut acc = ONE;
    while n > 0 {
        if n & 1 == 1 {
            acc *= z;
        }
        n >>= 1;
        if n > 0 {
            z *= z;
        }
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Number of subtractions performed while filling the subset tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub q_updates: u64,
    pub r_updates: u64,
}

/// Reusable subset tables. `q` holds one entry per subset of `{0..m-1}`;
/// `r` is scratch for the row remainders of the point currently added and
/// holds one entry per subset of the points below it.
#[derive(Debug, Default)]
pub struct ExclusionWorkspace {
    q: Vec<Complex64>,
    r: Vec<Complex64>,
    cap: usize,
    last_ops: OpCounts,
}

// Neumaier summation, componentwise.
#[derive(Default)]
struct Compensated {
    sum: Complex64,
    c: Complex64,
}

impl Compensated {
    #[inline(always)]
    fn add(&mut self, x: Complex64) {
        let (re, cre) = two_sum(self.sum.re, x.re);
        let (im, cim) = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(re, im);
        self.c += Complex64::new(cre, cim);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.c
    }
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    (s, e)
}

/// `(-1)^|S|` for a subset bitmask.
pub fn subset_sign(mask: u64) -> f64 {
    if mask.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_order(m: usize, cap: usize) -> Result<()> {
    if m % 2 == 1 {
        return Err(Error::InvalidOrder {
            m,
            reason: "the hafnian of an odd-order matrix is not defined",
        });
    }
    if m > cap {
        return Err(capacity(m, cap));
    }
    Ok(())
}

fn capacity(m: usize, cap: usize) -> Error {
    let values: u128 = 1u128 << (m + 1);
    Error::Capacity {
        what: "inclusion-exclusion subset tables",
        m,
        cap,
        detail: format!(
            "; needs 2^{} = {} complex values ({:.1} GiB)",
            m + 1,
            values,
            values as f64 * 16.0 / (1u64 << 30) as f64
        ),
    }
}

fn resize(buf: &mut Vec<Complex64>, len: usize, m: usize, cap: usize) -> Result<()> {
    if buf.len() < len {
        buf.try_reserve_exact(len - buf.len())
            .map_err(|_| capacity(m, cap))?;
        buf.resize(len, ZERO);
    }
    Ok(())
}

impl ExclusionWorkspace {
    pub fn new() -> Self {
        ExclusionWorkspace {
            cap: HAFNIAN_CAP,
            ..Default::default()
        }
    }

    pub fn with_cap(cap: usize) -> Self {
        ExclusionWorkspace {
            cap: cap.min(HAFNIAN_CAP),
            ..Default::default()
        }
    }

    /// Subtraction counts of the most recent evaluation.
    pub fn last_ops(&self) -> OpCounts {
        self.last_ops
    }

    /// Hafnian of `b`.
    pub fn hafnian(&mut self, b: &CorrelationMatrix) -> Result<Complex64> {
        let m = b.dim();
        check_order(m, self.cap)?;
        if m == 0 {
            self.last_ops = OpCounts::default();
            return Ok(ONE);
        }
        let full = 1usize << m;
        resize(&mut self.q, full, m, self.cap)?;
        resize(&mut self.r, full / 2, m, self.cap)?;
        let q = &mut self.q[..full];
        let r = &mut self.r[..full / 2];
        let mut ops = OpCounts::default();

        let data = b.as_slice();
        let half = (m / 2) as u32;
        // Entries are final once written, so the signed power sum is
        // accumulated in the same pass.
        let mut acc = Compensated::default();
        q[0] = data.iter().sum::<Complex64>() * 0.5;
        acc.add(powi(q[0], half));
        for i in 0..m {
            let row = &data[i * m..(i + 1) * m];
            let idx = 1usize << i;
            r[0] = row.iter().sum();
            for (kn, &bik) in row.iter().enumerate().take(i) {
                let j = 1usize << kn;
                let (lo, hi) = r.split_at_mut(j);
                for (dst, &src) in hi[..j].iter_mut().zip(lo.iter()) {
                    *dst = src - bik;
                }
                ops.r_updates += j as u64;
            }
            let (lo, hi) = q.split_at_mut(idx);
            for (s, ((dst, &src), &ri)) in hi[..idx].iter_mut().zip(lo.iter()).zip(r.iter()).enumerate() {
                let v = src - ri;
                *dst = v;
                let p = powi(v, half);
                acc.add(if s.count_ones() % 2 == 1 { p } else { -p });
            }
            ops.q_updates += idx as u64;
        }
        self.last_ops = ops;

        Ok(acc.value() / factorial(m / 2))
    }

    /// Hafnian of `b` with the entries between neighbouring points removed.
    pub fn rectangular_box(&mut self, b: &CorrelationMatrix) -> Result<Complex64> {
        check_order(b.dim(), self.cap)?;
        self.hafnian(&b.without_adjacent())
    }
}

/// Hafnian of a symmetric zero-diagonal matrix, equal to the sum over all
/// pairings of the paired entries.
pub fn hafnian_ie(b: &CorrelationMatrix) -> Result<Complex64> {
    ExclusionWorkspace::new().hafnian(b)
}

/// Pairing sum that excludes arcs between neighbouring points.
pub fn rectangular_box_ie(b: &CorrelationMatrix) -> Result<Complex64> {
    ExclusionWorkspace::new().rectangular_box(b)
}

/// Order in which the subset tables are filled: ascending bitmasks, so each
/// subset follows the subset obtained by dropping its highest element.
pub fn subset_iteration_order(m: usize) -> Result<Vec<u64>> {
    if m > HAFNIAN_CAP {
        return Err(capacity(m, HAFNIAN_CAP));
    }
    Ok((0..1u64 << m).collect())
}

/// The subset that precedes `mask` in the update chain.
pub fn subset_parent(mask: u64) -> Option<u64> {
    if mask == 0 {
        None
    } else {
        Some(mask & !(1u64 << (63 - mask.leading_zeros())))
    }
}
