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

//! Symmetric two-point correlation matrices.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Symmetric `m x m` complex matrix with zero diagonal, stored row-major.
///
/// Entry `(i, j)` (0-based) holds the symmetrized correlation between the
/// `i`-th and `j`-th points of a sorted time sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    m: usize,
    data: Vec<Complex64>,
}

impl CorrelationMatrix {
    /// The zero matrix of dimension `m`.
    pub fn zeros(m: usize) -> Self {
        CorrelationMatrix {
            m,
            data: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    /// Builds the matrix from its strict upper triangle: `f(i, j)` is called
    /// once for every `i < j`.
    pub fn from_upper<F>(m: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in (i + 1)..m {
                let v = f(i, j);
                out.data[i * m + j] = v;
                out.data[j * m + i] = v;
            }
        }
        out
    }

    /// Wraps a row-major buffer after checking symmetry and the zero diagonal.
    pub fn from_row_major(m: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != m * m {
            return Err(Error::validation(format!(
                "expected {} entries for a {m}x{m} matrix, got {}",
                m * m,
                data.len()
            )));
        }
        for i in 0..m {
            if data[i * m + i] != Complex64::new(0.0, 0.0) {
                return Err(Error::validation(format!("diagonal entry ({i},{i}) is nonzero")));
            }
            for j in (i + 1)..m {
                if data[i * m + j] != data[j * m + i] {
                    return Err(Error::validation(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(CorrelationMatrix { m, data })
    }

    /// Random symmetric matrix with entries drawn uniformly from the unit disc.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self::from_upper(m, |_, _| {
            let r = rng.random::<f64>().sqrt();
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            Complex64::from_polar(r, phi)
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.m + j]
    }

    /// Sets `(i, j)` and `(j, i)`. Diagonal writes are rejected.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i != j, "diagonal of a correlation matrix is fixed at zero");
        self.data[i * self.m + j] = v;
        self.data[j * self.m + i] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Copy with every entry multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        CorrelationMatrix {
            m: self.m,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    /// Copy with the sub- and superdiagonal set to zero, i.e. pairs of
    /// neighbouring points removed.
    pub fn without_adjacent(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.m.saturating_sub(1) {
            out.set(i, i + 1, Complex64::new(0.0, 0.0));
        }
        out
    }

    /// Principal submatrix on the given (0-based) indices, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        let mut data = Vec::with_capacity(n * n);
        for &a in idx {
            for &b in idx {
                data.push(self.get(a, b));
            }
        }
        CorrelationMatrix { m: n, data }
    }

    /// Simultaneous row/column permutation: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.m);
        self.submatrix(perm)
    }
}
