//! Cross-module checks: the matrix dynamics, the count recurrences, and the
//! closed form all have to tell the same story as genuine censuses.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use gapcycles::census::{census_gap, census_subpop};
use gapcycles::cycle::{build_to, MemoryBudget};
use gapcycles::popmodel::{
    self, back_step, coefficients, evaluate_closed_form, normalize, step, Exact, PopulationVector,
    Scalar, StepMode,
};
use gapcycles::subpop::chain_from_subpop;

const B: &MemoryBudget = &MemoryBudget::UNLIMITED;

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn special_gap_matrix_route_matches_censuses() {
    // Gap 22 = 2*11 from G(7#): special step at 11, general to 13, compared
    // against real censuses via the rational route.
    let g7 = build_to(7, B).unwrap();
    let census = census_gap(&g7, 22, None).unwrap();
    let mut n2 = census_gap(&g7, 2, None).unwrap().count(1);
    let w0 = normalize::<Exact>(&census, &n2).unwrap();

    let mut w = step(&w0, 11, StepMode::Special).unwrap();
    for p in [11u64, 13] {
        if w.stage_prime != p {
            w = step(&w, p, StepMode::General).unwrap();
        }
        n2 *= p - 2;
        let cycle = build_to(p, B).unwrap();
        let observed = census_gap(&cycle, 22, None).unwrap();
        for (i, entry) in w.entries.iter().enumerate() {
            let n = observed.count(i as u32 + 1);
            assert_eq!(*entry, Exact::from_count_ratio(&n, &n2), "stage {p} j {}", i + 1);
        }
    }
}

#[test]
fn closed_form_at_19_equals_the_censused_population() {
    // Gap 22 from the 7# census: the closed form evaluated at 19 must equal
    // w_{22,1}(19#) taken directly from a brute-force census of G(19#).
    let g7 = build_to(7, B).unwrap();
    let census = census_gap(&g7, 22, None).unwrap();
    let mut n2 = census_gap(&g7, 2, None).unwrap().count(1);
    let w0 = normalize::<Exact>(&census, &n2).unwrap();
    let model = coefficients(&w0, StepMode::Special, 11).unwrap();

    let g19 = build_to(19, B).unwrap();
    let observed = census_gap(&g19, 22, None).unwrap();
    for p in [11u64, 13, 17, 19] {
        n2 *= p - 2;
    }
    let want = Exact::from_count_ratio(&observed.count(1), &n2);
    assert_eq!(evaluate_closed_form(&model, 19).unwrap(), want);
}

#[test]
fn surrogate_aligns_special_with_general_starting_points() {
    let g7 = build_to(7, B).unwrap();
    let census = census_gap(&g7, 22, None).unwrap();
    let n2 = census_gap(&g7, 2, None).unwrap().count(1);
    let w0 = normalize::<Exact>(&census, &n2).unwrap();

    let stepped = step(&w0, 11, StepMode::Special).unwrap();
    let surrogate = back_step(&stepped, 11).unwrap();
    // One surrogate, two routes forward: both land on the censused stage.
    let via_surrogate = step(&surrogate, 11, StepMode::General).unwrap();
    assert_eq!(via_surrogate.entries, stepped.entries);
    assert_ne!(surrogate.entries, w0.entries);

    // The closed form built from the same starting point replays both.
    let model = coefficients(&w0, StepMode::Special, 11).unwrap();
    assert_eq!(
        evaluate_closed_form(&model, 11).unwrap(),
        stepped.top()
    );
}

#[test]
fn subpop_chain_matches_census_through_19() {
    let g7 = build_to(7, B).unwrap();
    let classes = census_subpop(&g7, 24).unwrap();
    let n2_7 = census_gap(&g7, 2, None).unwrap().count(1);
    let n2_11 = &n2_7 * 9u32;

    let mut n2 = n2_11.clone();
    for target in [11u64, 13, 17, 19] {
        let w = chain_from_subpop::<Exact>(&classes, 11, &n2_11, target).unwrap();
        let cycle = build_to(target, B).unwrap();
        let observed = census_gap(&cycle, 24, None).unwrap();
        for (i, entry) in w.entries.iter().enumerate() {
            let n = observed.count(i as u32 + 1);
            assert_eq!(*entry, Exact::from_count_ratio(&n, &n2), "stage {target} j {}", i + 1);
        }
        n2 *= gapcycles::primes::next_prime(target) - 2;
    }
}

#[test]
fn closed_form_replays_iteration_at_dimension_32() {
    // Synthetic starting populations at stage 37 with J = 32 (the largest
    // dimension the conservation sweep cares about), gap 80 < 2*41.
    let entries: Vec<Exact> = (1..=32)
        .map(|j: i64| ratio(j * j + 1, 2 * j + 3))
        .collect();
    let w0 = PopulationVector {
        gap: 80,
        stage_prime: 37,
        entries,
        surrogate: false,
    };
    let model = coefficients(&w0, StepMode::General, 41).unwrap();
    let stages = popmodel::iterate_to(&w0, StepMode::General, 97).unwrap();
    for stage in &stages {
        assert_eq!(
            evaluate_closed_form(&model, stage.stage_prime).unwrap(),
            stage.top(),
            "stage {}",
            stage.stage_prime
        );
    }

    // Float mode tracks the exact iteration to 1e-12 relative through 97.
    let float_w0 = PopulationVector {
        gap: 80,
        stage_prime: 37,
        entries: w0.entries.iter().map(|r| r.approx_f64()).collect(),
        surrogate: false,
    };
    let float_stages = popmodel::iterate_to(&float_w0, StepMode::General, 97).unwrap();
    for (e, f) in stages.iter().zip(&float_stages) {
        for (ev, fv) in e.entries.iter().zip(&f.entries) {
            let want = ev.approx_f64();
            assert!(
                ((fv - want) / want).abs() < 1e-12,
                "stage {}: {fv} vs {want}",
                e.stage_prime
            );
        }
    }
}

#[test]
fn count_and_rational_routes_coincide_for_every_applicable_gap() {
    // From 7#, every even gap below 22 admits the general model; both the
    // integer-count recurrence and the rational matrix produce the same
    // populations at 11# and 13#.
    let g7 = build_to(7, B).unwrap();
    let g13 = build_to(13, B).unwrap();
    let n2_7 = census_gap(&g7, 2, None).unwrap().count(1);
    for gap in (2u64..22).step_by(2) {
        let census = census_gap(&g7, gap, None).unwrap();
        let mut counts = census.dense_counts();
        let w0 = normalize::<Exact>(&census, &n2_7).unwrap();
        let stages = popmodel::iterate_to(&w0, StepMode::General, 13).unwrap();
        let mut n2 = n2_7.clone();
        for stage in &stages {
            counts = popmodel::counts::general_step(&counts, stage.stage_prime).unwrap();
            n2 *= stage.stage_prime - 2;
            for (i, n) in counts.iter().enumerate() {
                assert_eq!(stage.entries[i], Exact::from_count_ratio(n, &n2));
            }
        }
        // And both agree with the real census at 13#.
        let observed = census_gap(&g13, gap, None).unwrap();
        let trimmed: Vec<BigUint> = observed.dense_counts();
        let mut padded = counts.clone();
        while padded.len() > trimmed.len() {
            assert_eq!(padded.pop(), Some(BigUint::ZERO));
        }
        assert_eq!(padded, trimmed, "gap {gap}");
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn rational() -> impl Strategy<Value = BigRational> {
        (0i64..1000, 1i64..1000).prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn closed_form_equals_iteration_on_random_vectors(
            entries in proptest::collection::vec(rational(), 1..=9),
            target_idx in 0usize..8,
        ) {
            // Start at stage 7 with gap 20 (< 2*11, general throughout).
            let w0 = PopulationVector {
                gap: 20,
                stage_prime: 7,
                entries,
                surrogate: false,
            };
            let targets = [11u64, 13, 17, 19, 23, 29, 31, 37];
            let target = targets[target_idx];
            let model = coefficients(&w0, StepMode::General, 11).unwrap();
            let stages = popmodel::iterate_to(&w0, StepMode::General, target).unwrap();
            let last = stages.last().unwrap();
            prop_assert_eq!(
                evaluate_closed_form(&model, target).unwrap(),
                last.top()
            );
            // Component sums are conserved along the whole general chain.
            prop_assert_eq!(last.component_sum(), w0.component_sum());
        }
    }
}
