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

//! Brute-force pairing enumeration and direct diagram sums.
//!
//! Everything here is deliberately the slow, obviously correct route: each
//! pairing is materialized and its product evaluated on its own. The fast
//! kernels in [`crate::hafnian`] and [`crate::linked`] are tested against it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;

/// Largest order the enumerating oracle accepts by default (15!! pairings).
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// A perfect matching of the points `1..=m`, stored as 1-based `(j, k)` pairs
/// with `j < k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Checks the matching invariants (every index in `1..=m` used exactly
    /// once, `j < k` inside every pair).
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let m = 2 * pairs.len();
        let mut seen = vec![false; m + 1];
        for &(j, k) in &pairs {
            if j >= k {
                return Err(Error::validation(format!("pair ({j},{k}) is not ordered")));
            }
            for x in [j, k] {
                if x == 0 || x > m || seen[x] {
                    return Err(Error::validation(format!(
                        "index {x} is out of range or repeated in a pairing of {m} points"
                    )));
                }
                seen[x] = true;
            }
        }
        Ok(Pairing { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn order(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Product of the matrix entries selected by this pairing.
    pub fn weight(&self, b: &CorrelationMatrix) -> Complex64 {
        self.pairs
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &(j, k)| acc * b.get(j - 1, k - 1))
    }
}

/// `(2n - 1)!!`, the number of pairings of `2n` points, for `m = 2n`.
pub fn pairing_count(m: usize) -> u128 {
    (1..m).step_by(2).map(|x| x as u128).product()
}

/// Iterator over all pairings of `m` points in lexicographic order of the
/// smallest free index: the lowest unpaired point is matched with each
/// remaining point in ascending order.
#[derive(Debug, Clone)]
pub struct Pairings {
    m: usize,
    // Mixed-radix counter: digit `l` picks the partner of the lowest free
    // point among the `m - 2l - 1` candidates left at depth `l`.
    digits: Vec<usize>,
    done: bool,
}

impl Pairings {
    fn decode(&self) -> Pairing {
        let mut free: Vec<usize> = (1..=self.m).collect();
        let mut pairs = Vec::with_capacity(self.m / 2);
        for &d in &self.digits {
            let first = free.remove(0);
            let partner = free.remove(d);
            pairs.push((first, partner));
        }
        Pairing { pairs }
    }

    fn advance(&mut self) {
        for l in (0..self.digits.len()).rev() {
            let radix = self.m - 2 * l - 1;
            self.digits[l] += 1;
            if self.digits[l] < radix {
                return;
            }
            self.digits[l] = 0;
        }
        self.done = true;
    }
}

impl Iterator for Pairings {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.done {
            return None;
        }
        let out = self.decode();
        self.advance();
        Some(out)
    }
}

/// Two pairs are linked when their arcs interleave. Nested and disjoint arcs
/// are not linked. Each pair must satisfy `first <= second`.
pub fn pairs_linked<T: PartialOrd>(p1: (T, T), p2: (T, T)) -> bool {
    let (s1, s2) = p1;
    let (t1, t2) = p2;
    (s1 <= t1 && t1 <= s2 && s2 <= t2) || (t1 <= s1 && s1 <= t2 && t2 <= s2)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when the two sets were distinct.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// A pairing is linked when the interleaving graph on its pairs is connected.
pub fn is_linked(q: &Pairing) -> bool {
    let pairs = q.pairs();
    let n = pairs.len();
    if n <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(n);
    let mut components = n;
    for a in 0..n {
        for b in (a + 1)..n {
            if pairs_linked(pairs[a], pairs[b]) && uf.union(a, b) {
                components -= 1;
                if components == 1 {
                    return true;
                }
            }
        }
    }
    false
}

/// Enumerating oracle with a configurable order cap.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub cap: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl Oracle {
    pub fn with_cap(cap: usize) -> Self {
        Oracle { cap }
    }

    fn check(&self, m: usize) -> Result<()> {
        if m % 2 == 1 {
            return Err(Error::InvalidOrder {
                m,
                reason: "pairings need an even number of points",
            });
        }
        if m > self.cap {
            return Err(Error::Capacity {
                what: "pairing enumeration",
                m,
                cap: self.cap,
                detail: format!("; {} pairings", pairing_count(m)),
            });
        }
        Ok(())
    }

    pub fn enumerate_pairings(&self, m: usize) -> Result<Pairings> {
        if m == 0 {
            return Err(Error::InvalidOrder {
                m,
                reason: "enumeration needs at least two points",
            });
        }
        self.check(m)?;
        Ok(Pairings {
            m,
            digits: vec![0; m / 2],
            done: false,
        })
    }

    fn sum_filtered<F>(&self, b: &CorrelationMatrix, mut keep: F) -> Result<Complex64>
    where
        F: FnMut(&Pairing) -> bool,
    {
        let m = b.dim();
        self.check(m)?;
        if m == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok(self
            .enumerate_pairings(m)?
            .filter(|q| keep(q))
            .map(|q| q.weight(b))
            .sum())
    }

    /// Sum over all pairings of the product of paired entries (the hafnian).
    /// Odd orders give zero and the empty sequence gives one.
    pub fn direct_influence(&self, b: &CorrelationMatrix) -> Result<Complex64> {
        if b.dim() % 2 == 1 {
            self.check(b.dim() - 1)?;
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.sum_filtered(b, |_| true)
    }

    /// Sum restricted to linked pairings.
    pub fn direct_linked_sum(&self, b: &CorrelationMatrix) -> Result<Complex64> {
        if b.dim() < 2 {
            return Err(Error::InvalidOrder {
                m: b.dim(),
                reason: "linked sums need at least two points",
            });
        }
        self.sum_filtered(b, is_linked)
    }

    /// Sum over pairings that contain no pair of neighbouring points.
    pub fn direct_rectangular_sum(&self, b: &CorrelationMatrix) -> Result<Complex64> {
        self.sum_filtered(b, |q| q.pairs().iter().all(|&(j, k)| k - j > 1))
    }

    /// Signed sum over all ways of cutting the sequence into consecutive
    /// blocks of even length at least four, each block contributing its
    /// linked sum and a factor of -1.
    pub fn direct_dotted_sum(&self, b: &CorrelationMatrix) -> Result<Complex64> {
        let m = b.dim();
        if m < 4 || m % 2 == 1 {
            return Err(Error::InvalidOrder {
                m,
                reason: "dotted sums need an even number of at least four points",
            });
        }
        self.check(m)?;
        let mut total = Complex64::new(0.0, 0.0);
        let mut blocks = Vec::new();
        self.compositions(m, 0, &mut blocks, &mut |blocks| {
            let mut term = Complex64::new(1.0, 0.0);
            for &(start, len) in blocks {
                let idx: Vec<usize> = (start..start + len).collect();
                term *= -self.direct_linked_sum(&b.submatrix(&idx))?;
            }
            total += term;
            Ok(())
        })?;
        Ok(total)
    }

    fn compositions(
        &self,
        m: usize,
        start: usize,
        blocks: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&[(usize, usize)]) -> Result<()>,
    ) -> Result<()> {
        if start == m {
            return visit(blocks);
        }
        let mut len = 4;
        while start + len <= m {
            blocks.push((start, len));
            self.compositions(m, start + len, blocks, visit)?;
            blocks.pop();
            len += 2;
        }
        Ok(())
    }
}

pub fn enumerate_pairings(m: usize) -> Result<Pairings> {
    Oracle::default().enumerate_pairings(m)
}

pub fn direct_influence(b: &CorrelationMatrix) -> Result<Complex64> {
    Oracle::default().direct_influence(b)
}

pub fn direct_linked_sum(b: &CorrelationMatrix) -> Result<Complex64> {
    Oracle::default().direct_linked_sum(b)
}

pub fn direct_rectangular_sum(b: &CorrelationMatrix) -> Result<Complex64> {
    Oracle::default().direct_rectangular_sum(b)
}

pub fn direct_dotted_sum(b: &CorrelationMatrix) -> Result<Complex64> {
    Oracle::default().direct_dotted_sum(b)
}

/// Number of linked pairings of `m` points, by enumeration.
pub fn linked_count(m: usize) -> Result<u64> {
    Ok(enumerate_pairings(m)?.filter(is_linked).count() as u64)
}

/// Pairings stored as a flat index table so that timing a direct sum does
/// not include generating the diagrams.
#[derive(Debug, Clone)]
pub struct DiagramTable {
    m: usize,
    indices: Vec<u8>,
}

impl DiagramTable {
    fn build(m: usize, cap: usize, linked_only: bool) -> Result<Self> {
        let oracle = Oracle::with_cap(cap);
        let mut indices = Vec::new();
        if m == 0 {
            return Ok(DiagramTable { m, indices });
        }
        for q in oracle.enumerate_pairings(m)? {
            if linked_only && !is_linked(&q) {
                continue;
            }
            for &(j, k) in q.pairs() {
                indices.push((j - 1) as u8);
                indices.push((k - 1) as u8);
            }
        }
        Ok(DiagramTable { m, indices })
    }

    pub fn all(m: usize, cap: usize) -> Result<Self> {
        Self::build(m, cap, false)
    }

    pub fn linked(m: usize, cap: usize) -> Result<Self> {
        Self::build(m, cap, true)
    }

    pub fn len(&self) -> usize {
        if self.m == 0 {
            1
        } else {
            self.indices.len() / self.m
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn evaluate(&self, b: &CorrelationMatrix) -> Complex64 {
        assert_eq!(b.dim(), self.m);
        if self.m == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let mut total = Complex64::new(0.0, 0.0);
        for diagram in self.indices.chunks_exact(self.m) {
            let mut prod = Complex64::new(1.0, 0.0);
            for pair in diagram.chunks_exact(2) {
                prod *= b.get(pair[0] as usize, pair[1] as usize);
            }
            total += prod;
        }
        total
    }
}

/// Triangular table of dotted-box placement counts `a(p, q)`.
///
/// `a(p, q)` counts placements of pairwise non-adjacent segments, each of
/// even length at least four, over the points `1..p-1` (the last point `p`
/// is never covered) with `q` points covered in total.
#[derive(Debug, Clone)]
pub struct CountTable {
    p_max: usize,
    a: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn p_max(&self) -> usize {
        self.p_max
    }

    /// `a(p, q)`; zero for odd `q` or `q > p`.
    pub fn get(&self, p: usize, q: usize) -> u64 {
        if p > self.p_max {
            panic!("count table filled only up to p = {}", self.p_max);
        }
        self.a[p].get(q).copied().unwrap_or(0)
    }
}

/// Fills `a(p, q)` for `0 <= q <= p <= p_max` from the recurrence
/// `a(p,2k) = a(p-1,2k) + sum_{j=2}^{k-2} a(p-2j-1, 2k-2j) + 1` for
/// `2 <= k <= (p-1)/2`, with `a(p,0) = 1`, `a(p,2) = 0` and zero outside the
/// admissible range.
pub fn fill_count_table(p_max: usize) -> CountTable {
    let mut a: Vec<Vec<u64>> = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let mut row = vec![0u64; p + 1];
        row[0] = 1;
        let mut q = 4;
        while q < p {
            let k = q / 2;
            let mut v = a[p - 1].get(q).copied().unwrap_or(0) + 1;
            for j in 2..=k.saturating_sub(2) {
                v += a[p - 2 * j - 1].get(q - 2 * j).copied().unwrap_or(0);
            }
            row[q] = v;
            q += 2;
        }
        a.push(row);
    }
    CountTable { p_max, a }
}

/// `a(p, 2k)` from the recurrence. Negative arguments are a domain error.
pub fn count_dotted_configurations(p: i64, two_k: i64) -> Result<u64> {
    if p < 0 || two_k < 0 {
        return Err(Error::Domain(format!(
            "placement counts need nonnegative arguments, got a({p}, {two_k})"
        )));
    }
    if two_k > p {
        return Ok(0);
    }
    Ok(fill_count_table(p as usize).get(p as usize, two_k as usize))
}

/// `a(p, 2k)` by direct enumeration: every subset of `1..p-1` whose maximal
/// runs all have even length at least four is one placement.
pub fn count_dotted_brute_force(p: usize, two_k: usize) -> u64 {
    if p == 0 {
        return u64::from(two_k == 0);
    }
    let n = p - 1;
    assert!(n < 32, "brute-force placement count limited to p <= 32");
    let mut count = 0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != two_k {
            continue;
        }
        let mut ok = true;
        let mut run = 0;
        for i in 0..=n {
            if i < n && mask & (1 << i) != 0 {
                run += 1;
            } else {
                if run > 0 && (run < 4 || run % 2 == 1) {
                    ok = false;
                    break;
                }
                run = 0;
            }
        }
        if ok {
            count += 1;
        }
    }
    count
}
