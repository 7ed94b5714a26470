//! The endpoint-class iteration extending exact models to gaps `g = 2*p1 + 2`.
//!
//! At that span the only complication is a span-`2*p1` sub-constellation,
//! which occurs exactly when a driving term begins or ends with a 2: that end
//! gap's interior fusion then lands in the same image as the far boundary
//! fusion. Tracking the four endpoint classes a = X..X, b = X..2, c = 2..X,
//! d = 2..2 through the single step to stage `p1` gives exact counts, after
//! which the general dynamics apply. Per length-`j` term the step yields:
//!
//! * class a: `p1 - j - 1` intact images and `j - 1` shortened to `j - 1`;
//! * classes b, c: `p1 - j` intact and `j - 2` shortened;
//! * class d: `p1 - j + 1` intact and `j - 3` shortened.
//!
//! Only merged counts are needed at stage `p1`; the class membership of the
//! shortened terms never enters because the general model takes over from
//! `p2` onward. The recurrence is applied directly rather than materializing
//! the block matrices.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::census::SubpopCensus;
use crate::popmodel::{self, PopulationVector, Scalar, StepMode};
use crate::primes::{self, require_successor};
use crate::{Error, Result};

fn class_bounds(class: char, p1: u64) -> (u32, u64) {
    // (minimum length, maximum length) for a nonzero count to be consistent
    // with gap 2*p1 + 2; the maximum also keeps every survival coefficient
    // nonnegative.
    match class {
        'a' => (1, p1 - 1),
        'b' | 'c' => (2, p1),
        'd' => (3, p1 + 1),
        _ => unreachable!(),
    }
}

fn check_classes(sp: &SubpopCensus, p1: u64) -> Result<()> {
    for class in ['a', 'b', 'c', 'd'] {
        let (min_j, max_j) = class_bounds(class, p1);
        for (&j, count) in sp.class(class) {
            if count.is_zero() {
                continue;
            }
            if j < min_j || j as u64 > max_j {
                return Err(Error::InvalidClassCensus {
                    class,
                    j,
                    count: count.to_string(),
                    gap: sp.gap,
                    p1,
                });
            }
        }
    }
    Ok(())
}

/// One exact step of the four-class iteration: counts of driving terms for
/// `gap = 2*p1 + 2` at stage `p1`, merged across classes.
pub fn subpop_step(sp: &SubpopCensus, p1: u64) -> Result<BTreeMap<u32, BigUint>> {
    require_successor(sp.prime, p1)?;
    if sp.gap != 2 * p1 + 2 {
        return Err(Error::SubpopGapMismatch {
            gap: sp.gap,
            p1,
            expected: 2 * p1 + 2,
        });
    }
    let p2 = primes::next_prime(p1);
    if sp.gap >= 2 * p2 {
        // Unreachable for gap = 2*p1 + 2 since p2 >= p1 + 2, but the
        // threshold is what licenses the general model afterwards.
        return Err(Error::BeyondModelThreshold {
            gap: sp.gap,
            p0: sp.prime,
            p1,
            max_gap: 2 * p1 + 2,
        });
    }
    check_classes(sp, p1)?;

    let mut out: BTreeMap<u32, BigUint> = BTreeMap::new();
    let mut add = |j: u32, n: BigUint| {
        if !n.is_zero() {
            *out.entry(j).or_default() += n;
        }
    };
    // (class, intact multiplier offset, shortened multiplier offset): a
    // length-j term leaves (p1 - j + intact_off) intact images and
    // (j + short_off) images shortened to length j - 1.
    let rules: [(char, i64, i64); 4] = [('a', -1, -1), ('b', 0, -2), ('c', 0, -2), ('d', 1, -3)];
    for (class, intact_off, short_off) in rules {
        for (&j, count) in sp.class(class) {
            if count.is_zero() {
                continue;
            }
            let intact = (p1 as i64 - j as i64 + intact_off) as u64;
            add(j, count * intact);
            let shortened = j as i64 + short_off;
            if shortened > 0 && j >= 2 {
                add(j - 1, count * shortened as u64);
            }
        }
    }
    Ok(out)
}

/// Runs the class step at `p1`, normalizes by `n2_at_p1` (the gap-2
/// population of `G(p1#)`, equal to `(p1 - 2)` times the previous stage's),
/// then applies general steps through `target_prime`.
pub fn chain_from_subpop<S: Scalar>(
    sp: &SubpopCensus,
    p1: u64,
    n2_at_p1: &BigUint,
    target_prime: u64,
) -> Result<PopulationVector<S>> {
    if n2_at_p1.is_zero() {
        return Err(Error::ZeroGapTwoCount);
    }
    if target_prime < p1 {
        return Err(Error::TargetBelowFirstStage {
            target: target_prime,
            first: p1,
        });
    }
    if !primes::is_prime(target_prime) {
        return Err(Error::NotPrime(target_prime));
    }
    let counts = subpop_step(sp, p1)?;
    let max_j = counts.keys().max().copied().unwrap_or(0);
    let dense: Vec<BigUint> = (1..=max_j)
        .map(|j| counts.get(&j).cloned().unwrap_or_default())
        .collect();
    let mut w = PopulationVector {
        gap: sp.gap,
        stage_prime: p1,
        entries: dense
            .iter()
            .map(|n| S::from_count_ratio(n, n2_at_p1))
            .collect(),
        surrogate: false,
    };
    while w.stage_prime < target_prime {
        let next = primes::next_prime(w.stage_prime);
        w = popmodel::step(&w, next, StepMode::General)?;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{census_gap, census_subpop};
    use crate::cycle::{build_to, MemoryBudget};
    use crate::popmodel::counts::general_step;
    use crate::popmodel::Exact;

    const B: &MemoryBudget = &MemoryBudget::UNLIMITED;

    #[test]
    fn step_reproduces_the_census_at_the_next_stage() {
        // Gap 16 = 2*7 + 2 from the 5# census.
        let g5 = build_to(5, B).unwrap();
        let sp = census_subpop(&g5, 16).unwrap();
        let predicted = subpop_step(&sp, 7).unwrap();
        let g7 = build_to(7, B).unwrap();
        let observed = census_gap(&g7, 16, None).unwrap();
        assert_eq!(predicted, observed.counts);

        // Gap 24 = 2*11 + 2 from the 7# census.
        let sp = census_subpop(&g7, 24).unwrap();
        let predicted = subpop_step(&sp, 11).unwrap();
        let g11 = build_to(11, B).unwrap();
        let observed = census_gap(&g11, 24, None).unwrap();
        assert_eq!(predicted, observed.counts);
    }

    #[test]
    fn class_blind_recurrence_disagrees_when_end_twos_exist() {
        let g7 = build_to(7, B).unwrap();
        let sp = census_subpop(&g7, 24).unwrap();
        assert!(
            !sp.b.is_empty() || !sp.c.is_empty() || !sp.d.is_empty(),
            "gap 24 must have terms ending in a 2 for the control to bite"
        );
        let merged: Vec<BigUint> = {
            let m = sp.merged();
            let max_j = *m.keys().max().unwrap();
            (1..=max_j).map(|j| m.get(&j).cloned().unwrap_or_default()).collect()
        };
        let blind = general_step(&merged, 11).unwrap();
        let classed = subpop_step(&sp, 11).unwrap();
        let blind_map: BTreeMap<u32, BigUint> = blind
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.is_zero())
            .map(|(i, n)| (i as u32 + 1, n.clone()))
            .collect();
        assert_ne!(blind_map, classed, "ignoring the classes must not work");
    }

    #[test]
    fn empty_classes_contribute_nothing() {
        let sp = SubpopCensus {
            prime: 7,
            gap: 24,
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            c: BTreeMap::new(),
            d: BTreeMap::from([(3, BigUint::from(5u32))]),
        };
        let out = subpop_step(&sp, 11).unwrap();
        // j = 3 in class d: p1 - j + 1 = 9 intact, j - 3 = 0 shortened.
        assert_eq!(out, BTreeMap::from([(3, BigUint::from(45u32))]));
    }

    #[test]
    fn preconditions_are_enforced() {
        let g7 = build_to(7, B).unwrap();
        let sp = census_subpop(&g7, 22).unwrap();
        assert!(matches!(
            subpop_step(&sp, 11),
            Err(Error::SubpopGapMismatch { gap: 22, p1: 11, expected: 24 })
        ));
        let sp24 = census_subpop(&g7, 24).unwrap();
        assert!(matches!(
            subpop_step(&sp24, 13),
            Err(Error::NotSuccessorPrime { .. })
        ));

        let bad = SubpopCensus {
            prime: 7,
            gap: 24,
            a: BTreeMap::new(),
            b: BTreeMap::from([(1, BigUint::from(1u32))]),
            c: BTreeMap::new(),
            d: BTreeMap::new(),
        };
        assert!(matches!(
            subpop_step(&bad, 11),
            Err(Error::InvalidClassCensus { class: 'b', j: 1, .. })
        ));
    }

    #[test]
    fn chain_matches_direct_censuses() {
        let g7 = build_to(7, B).unwrap();
        let sp = census_subpop(&g7, 24).unwrap();
        let n2_7 = census_gap(&g7, 2, None).unwrap().count(1);
        let n2_11 = &n2_7 * 9u32;

        // Target p1 itself: just the normalized class step.
        let at_11 = chain_from_subpop::<Exact>(&sp, 11, &n2_11, 11).unwrap();
        let stepped = subpop_step(&sp, 11).unwrap();
        let max_j = *stepped.keys().max().unwrap();
        for j in 1..=max_j {
            let n = stepped.get(&j).cloned().unwrap_or_default();
            assert_eq!(
                at_11.entries[(j - 1) as usize],
                Exact::from_count_ratio(&n, &n2_11)
            );
        }

        // Through stage 13 against a genuine census.
        let w13 = chain_from_subpop::<Exact>(&sp, 11, &n2_11, 13).unwrap();
        let g13 = build_to(13, B).unwrap();
        let observed = census_gap(&g13, 24, None).unwrap();
        let n2_13 = &n2_11 * 11u32;
        for (i, entry) in w13.entries.iter().enumerate() {
            let n = observed.count(i as u32 + 1);
            assert_eq!(*entry, Exact::from_count_ratio(&n, &n2_13), "j = {}", i + 1);
        }
    }

    #[test]
    fn b_and_c_classes_contribute_symmetrically() {
        let g7 = build_to(7, B).unwrap();
        let sp = census_subpop(&g7, 24).unwrap();
        assert_eq!(sp.class_total('b'), sp.class_total('c'));
        // Swapping b and c leaves the merged step unchanged.
        let swapped = SubpopCensus {
            prime: sp.prime,
            gap: sp.gap,
            a: sp.a.clone(),
            b: sp.c.clone(),
            c: sp.b.clone(),
            d: sp.d.clone(),
        };
        assert_eq!(subpop_step(&sp, 11).unwrap(), subpop_step(&swapped, 11).unwrap());
    }
}
