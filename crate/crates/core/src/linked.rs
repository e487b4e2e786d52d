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

//! Linked-diagram sums by rectangular and dotted boxes.
//!
//! A sum over linked pairings of a window (the rounded box) equals the sum,
//! over placements of non-adjacent dotted boxes that avoid the last point,
//! of the product of dotted boxes times the rectangular box of the points
//! left over. A dotted box over a window is the signed sum over all cuts of
//! the window into rounded boxes, and it obeys a linear recursion in terms
//! of shorter windows. Filling rounded and dotted values for every window
//! from short to long gives the full linked sum without recursion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hafnian::{ExclusionWorkspace, HAFNIAN_CAP};
use crate::matrix::CorrelationMatrix;
use crate::pairings::fill_count_table;
use crate::parallel::{map_with, Execution};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dotted windows of one placement, as 0-based half-open `(start, end)`
/// ranges, plus the points not covered by any window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxPlacement {
    pub dotted_windows: Vec<(usize, usize)>,
    pub rest: Vec<usize>,
}

impl BoxPlacement {
    pub fn covered(&self) -> usize {
        self.dotted_windows.iter().map(|&(i, j)| j - i).sum()
    }

    /// The rectangular box of two neighbouring points is zero, so such a
    /// placement never contributes.
    pub fn vanishes(&self) -> bool {
        self.rest.len() == 2 && self.rest[1] == self.rest[0] + 1
    }
}

/// Window lists for every admissible placement over `n` points, the last of
/// which is never covered. The empty placement comes first, then placements
/// ordered by the start of their first window and then by its length.
fn placement_windows(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn sweep(
        from: usize,
        limit: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        for start in from..limit {
            let mut end = start + 4;
            while end <= limit {
                current.push((start, end));
                out.push(current.clone());
                sweep(end + 1, limit, current, out);
                current.pop();
                end += 2;
            }
        }
    }
    let mut out = vec![Vec::new()];
    if n >= 1 {
        sweep(0, n - 1, &mut Vec::new(), &mut out);
    }
    out
}

/// All admissible placements over `m` points.
pub fn enumerate_box_placements(m: usize) -> Result<Vec<BoxPlacement>> {
    if m < 4 || m % 2 == 1 {
        return Err(Error::InvalidOrder {
            m,
            reason: "placements need an even number of at least four points",
        });
    }
    Ok(placement_windows(m)
        .into_iter()
        .map(|w| {
            let mut covered = vec![false; m];
            for &(i, j) in &w {
                covered[i..j].iter_mut().for_each(|c| *c = true);
            }
            BoxPlacement {
                rest: (0..m).filter(|&x| !covered[x]).collect(),
                dotted_windows: w,
            }
        })
        .collect())
}

/// Rounded and dotted values for every even window of length at least four
/// inside the first `span` points.
#[derive(Debug, Clone)]
pub struct SegmentCache {
    span: usize,
    // Indexed by `(len / 2 - 2, start)`.
    rounded: Vec<Vec<Complex64>>,
    dotted: Vec<Vec<Complex64>>,
}

impl SegmentCache {
    pub fn span(&self) -> usize {
        self.span
    }

    fn lookup(table: &[Vec<Complex64>], k: usize, len: usize, what: &str) -> Result<Complex64> {
        if len < 4 || len % 2 == 1 {
            return Err(Error::Sequencing(format!("no {what} box of length {len}")));
        }
        table
            .get(len / 2 - 2)
            .and_then(|row| row.get(k))
            .copied()
            .ok_or_else(|| Error::Sequencing(format!("{what} box ({k}, {len}) not yet computed")))
    }

    pub fn rounded(&self, k: usize, len: usize) -> Result<Complex64> {
        Self::lookup(&self.rounded, k, len, "rounded")
    }

    pub fn dotted(&self, k: usize, len: usize) -> Result<Complex64> {
        Self::lookup(&self.dotted, k, len, "dotted")
    }

    /// Fills the cache for windows inside `0..span` of `b`.
    pub fn build(b: &CorrelationMatrix, span: usize, exec: Execution) -> Result<Self> {
        assert!(span <= b.dim());
        let bstar = b.without_adjacent();
        let mut cache = SegmentCache {
            span,
            rounded: Vec::new(),
            dotted: Vec::new(),
        };
        let mut len = 4;
        while len <= span {
            let starts = span - len + 1;
            let rounded: Vec<Complex64> = if len == 4 {
                (0..starts)
                    .map(|k| b.get(k, k + 2) * b.get(k + 1, k + 3))
                    .collect()
            } else {
                let windows = placement_windows(len);
                let cache_ref = &cache;
                map_with(exec, starts, ExclusionWorkspace::new, |ws, k| {
                    expand(cache_ref, &bstar, k, len, &windows, ws)
                })
                .into_iter()
                .collect::<Result<_>>()?
            };
            cache.rounded.push(rounded);
            let dotted = (0..starts)
                .map(|k| dotted_box(&cache, k, len))
                .collect::<Result<Vec<_>>>()?;
            cache.dotted.push(dotted);
            len += 2;
        }
        Ok(cache)
    }
}

/// Dotted box over the window `k..k+len` from the recursion
/// `d(w) = -c(w) - sum_j d(first 2j points) c(remaining points)`.
pub fn dotted_box(cache: &SegmentCache, k: usize, len: usize) -> Result<Complex64> {
    let mut v = -cache.rounded(k, len)?;
    let mut j = 4;
    while j + 4 <= len {
        v -= cache.dotted(k, j)? * cache.rounded(k + j, len - j)?;
        j += 2;
    }
    Ok(v)
}

/// Rounded box of the window `k..k+len` as the sum over placements, each
/// given relative to the window start.
fn expand(
    cache: &SegmentCache,
    bstar: &CorrelationMatrix,
    k: usize,
    len: usize,
    placements: &[Vec<(usize, usize)>],
    ws: &mut ExclusionWorkspace,
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut covered = vec![false; len];
    let mut rest = Vec::with_capacity(len);
    for windows in placements {
        let mut prod = ONE;
        covered.iter_mut().for_each(|c| *c = false);
        for &(i, j) in windows {
            prod *= cache.dotted(k + i, j - i)?;
            covered[i..j].iter_mut().for_each(|c| *c = true);
        }
        rest.clear();
        rest.extend((0..len).filter(|&x| !covered[x]).map(|x| k + x));
        total += prod * ws.hafnian(&bstar.submatrix(&rest))?;
    }
    Ok(total)
}

/// Sum over linked pairings of `b`.
pub fn rounded_box(b: &CorrelationMatrix) -> Result<Complex64> {
    rounded_box_with(b, Execution::default())
}

pub fn rounded_box_with(b: &CorrelationMatrix, exec: Execution) -> Result<Complex64> {
    let m = b.dim();
    if m < 2 || m % 2 == 1 {
        return Err(Error::InvalidOrder {
            m,
            reason: "linked sums need an even number of at least two points",
        });
    }
    if m > HAFNIAN_CAP {
        return Err(Error::Capacity {
            what: "rectangular box",
            m,
            cap: HAFNIAN_CAP,
            detail: String::new(),
        });
    }
    if m == 2 {
        return Ok(b.get(0, 1));
    }
    let cache = SegmentCache::build(b, m - 1, exec)?;
    let bstar = b.without_adjacent();
    let placements = placement_windows(m);
    // The final sum is split over placements in fixed chunks and reduced in
    // chunk order.
    let chunk = placements.len().div_ceil(64).max(1);
    let parts: Vec<&[Vec<(usize, usize)>]> = placements.chunks(chunk).collect();
    let sums = map_with(exec, parts.len(), ExclusionWorkspace::new, |ws, c| {
        expand(&cache, &bstar, 0, m, parts[c], ws)
    });
    let mut total = Complex64::new(0.0, 0.0);
    for s in sums {
        total += s?;
    }
    Ok(total)
}

/// Number of placements over `m` points covering `q` points, and how many of
/// those have a non-vanishing rectangular remainder.
pub fn placement_counts(m: usize, q: usize) -> Result<(u64, u64)> {
    let mut all = 0;
    let mut live = 0;
    for p in enumerate_box_placements(m)? {
        if p.covered() == q {
            all += 1;
            if !p.vanishes() {
                live += 1;
            }
        }
    }
    debug_assert_eq!(all, fill_count_table(m).get(m, q));
    Ok((all, live))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairings::{direct_dotted_sum, direct_linked_sum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / (b.norm() + 1e-30)
    }

    #[test]
    fn small_orders() {
        let b = CorrelationMatrix::from_upper(4, |i, j| Complex64::new(1.0 + i as f64, j as f64));
        assert_eq!(rounded_box(&b).unwrap(), b.get(0, 2) * b.get(1, 3));
        let two = CorrelationMatrix::from_upper(2, |_, _| Complex64::new(0.2, 0.4));
        assert_eq!(rounded_box(&two).unwrap(), Complex64::new(0.2, 0.4));
        assert!(rounded_box(&CorrelationMatrix::zeros(5)).is_err());
    }

    #[test]
    fn matches_oracle_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in (4..=10).step_by(2) {
            for _ in 0..5 {
                let b = CorrelationMatrix::random(m, &mut rng);
                let fast = rounded_box(&b).unwrap();
                let slow = direct_linked_sum(&b).unwrap();
                assert!(rel(fast, slow) < 1e-10, "m = {m}");
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = CorrelationMatrix::random(14, &mut rng);
        assert_eq!(
            rounded_box_with(&b, Execution::Sequential).unwrap(),
            rounded_box_with(&b, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn four_point_cache_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = CorrelationMatrix::random(9, &mut rng);
        let cache = SegmentCache::build(&b, 9, Execution::Sequential).unwrap();
        for k in 0..6 {
            let r = b.get(k, k + 2) * b.get(k + 1, k + 3);
            assert_eq!(cache.rounded(k, 4).unwrap(), r);
            assert_eq!(cache.dotted(k, 4).unwrap(), -r);
        }
        let lo = cache.rounded(0, 4).unwrap();
        let hi = cache.rounded(4, 4).unwrap();
        let d8 = cache.dotted(0, 8).unwrap();
        assert!(rel(d8, lo * hi - cache.rounded(0, 8).unwrap()) < 1e-14);
        assert!(matches!(cache.rounded(0, 10), Err(Error::Sequencing(_))));
        assert!(matches!(cache.dotted(0, 2), Err(Error::Sequencing(_))));
    }

    #[test]
    fn dotted_recursion_matches_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b = CorrelationMatrix::random(10, &mut rng);
        let cache = SegmentCache::build(&b, 10, Execution::Sequential).unwrap();
        let d = cache.dotted(0, 10).unwrap();
        assert!(rel(d, direct_dotted_sum(&b).unwrap()) < 1e-12);
    }

    #[test]
    fn placement_orders_and_counts() {
        let p4 = enumerate_box_placements(4).unwrap();
        assert_eq!(p4.len(), 1);
        assert!(p4[0].dotted_windows.is_empty());
        assert_eq!(p4[0].rest, vec![0, 1, 2, 3]);

        let p10 = enumerate_box_placements(10).unwrap();
        assert!(p10[0].dotted_windows.is_empty());
        let firsts: Vec<(usize, usize)> = p10[1..]
            .iter()
            .map(|p| p.dotted_windows[0])
            .collect();
        let mut sorted = firsts.clone();
        sorted.sort();
        assert_eq!(firsts, sorted);
        for m in (4..=14).step_by(2) {
            let t = fill_count_table(m);
            for q in 0..=m {
                let n = enumerate_box_placements(m)
                    .unwrap()
                    .iter()
                    .filter(|p| p.covered() == q)
                    .count() as u64;
                assert_eq!(n, t.get(m, q), "m = {m}, q = {q}");
            }
        }
        assert_eq!(placement_counts(10, 8).unwrap(), (3, 2));
    }

    #[test]
    fn placements_respect_gap_and_last_point() {
        for m in (4..=14).step_by(2) {
            for p in enumerate_box_placements(m).unwrap() {
                assert!(p.dotted_windows.len() <= m / 5);
                assert!(p.rest.contains(&(m - 1)));
                for w in p.dotted_windows.windows(2) {
                    assert!(w[1].0 > w[0].1);
                }
                for &(i, j) in &p.dotted_windows {
                    assert!((j - i) >= 4 && (j - i) % 2 == 0);
                }
            }
        }
    }
}
