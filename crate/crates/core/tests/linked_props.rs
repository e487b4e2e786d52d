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

use common::{random_matrix, rel};
use diagsum::linked::{enumerate_box_placements, rounded_box, SegmentCache};
use diagsum::pairings::{
    count_dotted_brute_force, direct_dotted_sum, direct_linked_sum, enumerate_pairings,
    fill_count_table, is_linked,
};
use diagsum::Execution;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn agrees_with_enumeration(k in 2usize..=6, seed in any::<u64>()) {
        let b = random_matrix(2 * k, seed);
        prop_assert!(rel(rounded_box(&b).unwrap(), direct_linked_sum(&b).unwrap()) <= 1e-10);
    }

    #[test]
    fn homogeneous_of_degree_half_m(k in 2usize..=6, seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let b = random_matrix(2 * k, seed);
        let c = Complex64::new(re, im);
        let lhs = rounded_box(&b.scaled(c)).unwrap();
        let rhs = c.powu(k as u32) * rounded_box(&b).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (rhs.norm() + 1e-12));
    }

    #[test]
    fn dotted_recursion_holds_on_every_window(span in 4usize..=12, seed in any::<u64>()) {
        let b = random_matrix(span, seed);
        let cache = SegmentCache::build(&b, span, Execution::Sequential).unwrap();
        let mut len = 4;
        while len <= span {
            for k in 0..=(span - len) {
                // Rebuild the rounded value from the dotted side of the recursion.
                let mut c = -cache.dotted(k, len).unwrap();
                let mut j = 4;
                while j + 4 <= len {
                    c -= cache.dotted(k, j).unwrap() * cache.rounded(k + j, len - j).unwrap();
                    j += 2;
                }
                let r = cache.rounded(k, len).unwrap();
                prop_assert!((c - r).norm() <= 1e-12 * (r.norm() + 1e-12));
            }
            len += 2;
        }
    }

    #[test]
    fn partition_identity(k in 1usize..=6, seed in any::<u64>()) {
        let b = random_matrix(2 * k, seed);
        let (mut linked, mut rest) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for q in enumerate_pairings(2 * k).unwrap() {
            if is_linked(&q) { linked += q.weight(&b) } else { rest += q.weight(&b) }
        }
        let total = diagsum::pairings::direct_influence(&b).unwrap();
        prop_assert!((linked + rest - total).norm() <= 1e-12 * (1.0 + total.norm()));
        prop_assert!((linked - direct_linked_sum(&b).unwrap()).norm() == 0.0);
    }
}

#[test]
fn hundred_matrices_per_order() {
    for m in (4..=12).step_by(2) {
        for k in 0..100 {
            let b = random_matrix(m, 5000 * m as u64 + k);
            let e = rel(rounded_box(&b).unwrap(), direct_linked_sum(&b).unwrap());
            assert!(e <= 1e-10, "m = {m}, matrix {k}: {e:e}");
        }
    }
}

#[test]
fn dotted_matches_partition_definition() {
    for m in (4..=12).step_by(2) {
        for seed in 0..10 {
            let b = random_matrix(m, 31 * seed + m as u64);
            let cache = SegmentCache::build(&b, m, Execution::Sequential).unwrap();
            let e = rel(cache.dotted(0, m).unwrap(), direct_dotted_sum(&b).unwrap());
            assert!(e <= 1e-12, "m = {m}: {e:e}");
        }
    }
}

#[test]
fn placement_counts_match_recurrence() {
    for m in (4..=14).step_by(2) {
        let table = fill_count_table(m);
        let placements = enumerate_box_placements(m).unwrap();
        for q in (0..=m).step_by(2) {
            let n = placements.iter().filter(|p| p.covered() == q).count() as u64;
            assert_eq!(n, table.get(m, q));
            assert_eq!(n, count_dotted_brute_force(m, q));
        }
    }
}
