//! Censuses of driving terms: contiguous cyclic runs of gaps summing to a
//! target gap `g`, counted by run length, and classified by their end gaps.
//!
//! Windows are counted cyclically — a run wrapping past the end of the gap
//! sequence counts exactly once, owned by its start index — so counts are
//! invariant under rotation of the cycle. Counts are reported as unbounded
//! integers; per-chunk accumulation uses `u64`, which cannot overflow because
//! no length class can exceed the cycle length.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::cycle::{GapCycle, Gaps};
use crate::{Error, Result};

/// Counts `n_{g,j}` of span-`g` driving terms by length `j` in one cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DrivingTermCensus {
    /// Stage prime of the censused cycle.
    pub prime: u64,
    /// The target gap `g`.
    pub gap: u64,
    /// `j -> n_{g,j}`; zero counts are omitted.
    pub counts: BTreeMap<u32, BigUint>,
    /// Largest `j` with a nonzero count; 0 when no driving terms exist.
    pub max_length: u32,
    /// Set when a `max_len` bound cut the scan short of some window.
    pub truncated_at: Option<u32>,
}

impl DrivingTermCensus {
    pub fn count(&self, j: u32) -> BigUint {
        self.counts.get(&j).cloned().unwrap_or_default()
    }

    /// Dense counts for `j = 1 ..= max_length`.
    pub fn dense_counts(&self) -> Vec<BigUint> {
        (1..=self.max_length).map(|j| self.count(j)).collect()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }
}

/// Driving terms of one gap split into the four endpoint classes:
/// `a` neither end is a 2, `b` ends with a 2, `c` begins with a 2,
/// `d` begins and ends with a 2. Length-1 terms count under `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubpopCensus {
    pub prime: u64,
    pub gap: u64,
    pub a: BTreeMap<u32, BigUint>,
    pub b: BTreeMap<u32, BigUint>,
    pub c: BTreeMap<u32, BigUint>,
    pub d: BTreeMap<u32, BigUint>,
}

impl SubpopCensus {
    pub fn class(&self, class: char) -> &BTreeMap<u32, BigUint> {
        match class {
            'a' => &self.a,
            'b' => &self.b,
            'c' => &self.c,
            'd' => &self.d,
            _ => panic!("class must be one of a, b, c, d"),
        }
    }

    pub fn class_total(&self, class: char) -> BigUint {
        self.class(class).values().sum()
    }

    /// Class-blind counts: `a[j] + b[j] + c[j] + d[j]`.
    pub fn merged(&self) -> BTreeMap<u32, BigUint> {
        let mut out: BTreeMap<u32, BigUint> = BTreeMap::new();
        for map in [&self.a, &self.b, &self.c, &self.d] {
            for (&j, n) in map {
                *out.entry(j).or_default() += n;
            }
        }
        out
    }
}

fn check_gap(cycle: &GapCycle, gap: u64) -> Result<()> {
    if !gap.is_multiple_of(2) {
        return Err(Error::OddGap(gap));
    }
    if gap > cycle.span_u64() {
        return Err(Error::GapExceedsSpan {
            gap,
            span: cycle.span_u64() as u128,
        });
    }
    Ok(())
}

fn start_ranges(n: usize, parallel: bool) -> Vec<(usize, usize)> {
    let n_chunks = if parallel {
        #[cfg(feature = "parallel")]
        {
            (rayon::current_num_threads() * 4).clamp(1, (n / (1 << 14)).max(1))
        }
        #[cfg(not(feature = "parallel"))]
        {
            1
        }
    } else {
        1
    };
    let step = n.div_ceil(n_chunks);
    (0..n_chunks)
        .map(|k| (k * step, ((k + 1) * step).min(n)))
        .filter(|(a, b)| a < b)
        .collect()
}

/// Two-pointer scan for one target gap over starts `[lo, hi)`.
/// Returns counts indexed by `j - 1` plus a truncation flag.
fn scan_target<T: Copy + Into<u64>>(
    gaps: &[T],
    target: u64,
    cap: usize,
    lo: usize,
    hi: usize,
) -> (Vec<u64>, bool) {
    let n = gaps.len();
    let mut counts = vec![0u64; cap];
    let mut truncated = false;
    let mut end = lo;
    let mut sum: u64 = 0;
    for start in lo..hi {
        while sum < target && end - start < cap {
            sum += gaps[end % n].into();
            end += 1;
        }
        if sum == target {
            counts[end - start - 1] += 1;
        } else if sum < target {
            truncated = true;
        }
        sum -= gaps[start % n].into();
    }
    (counts, truncated)
}

/// Single-pass scan accumulating every even target up to `max_gap` at once.
/// `counts[(g/2 - 1) * jdim + (j - 1)]` counts length-`j` terms for gap `g`.
fn scan_upto<T: Copy + Into<u64>>(
    gaps: &[T],
    max_gap: u64,
    jdim: usize,
    lo: usize,
    hi: usize,
) -> Vec<u64> {
    let n = gaps.len();
    let mut counts = vec![0u64; (max_gap as usize / 2) * jdim];
    for start in lo..hi {
        let mut sum = 0u64;
        let mut k = start;
        while sum < max_gap {
            sum += gaps[k % n].into();
            k += 1;
            if sum <= max_gap {
                debug_assert_eq!(sum % 2, 0);
                let j = k - start;
                counts[(sum as usize / 2 - 1) * jdim + (j - 1)] += 1;
            }
        }
    }
    counts
}

/// Endpoint-class scan for one target gap: rows a, b, c, d by `j - 1`.
fn scan_classes<T: Copy + Into<u64>>(
    gaps: &[T],
    target: u64,
    cap: usize,
    lo: usize,
    hi: usize,
) -> [Vec<u64>; 4] {
    let n = gaps.len();
    let mut out = [
        vec![0u64; cap],
        vec![0u64; cap],
        vec![0u64; cap],
        vec![0u64; cap],
    ];
    let mut end = lo;
    let mut sum: u64 = 0;
    for start in lo..hi {
        while sum < target && end - start < cap {
            sum += gaps[end % n].into();
            end += 1;
        }
        if sum == target {
            let j = end - start;
            let class = if j == 1 {
                0
            } else {
                let first: u64 = gaps[start % n].into();
                let last: u64 = gaps[(end - 1) % n].into();
                match (first == 2, last == 2) {
                    (false, false) => 0,
                    (false, true) => 1,
                    (true, false) => 2,
                    (true, true) => 3,
                }
            };
            out[class][j - 1] += 1;
        }
        sum -= gaps[start % n].into();
    }
    out
}

fn run_chunked<F>(n: usize, parallel: bool, scan: F) -> Vec<Vec<u64>>
where
    F: Fn(usize, usize) -> Vec<u64> + Sync,
{
    let ranges = start_ranges(n, parallel);
    #[cfg(feature = "parallel")]
    {
        if parallel && ranges.len() > 1 {
            use rayon::prelude::*;
            return ranges.par_iter().map(|&(lo, hi)| scan(lo, hi)).collect();
        }
    }
    ranges.iter().map(|&(lo, hi)| scan(lo, hi)).collect()
}

fn merge_dense(parts: Vec<Vec<u64>>) -> Vec<BigUint> {
    let len = parts.first().map_or(0, Vec::len);
    let mut out = vec![BigUint::ZERO; len];
    for part in parts {
        for (i, v) in part.into_iter().enumerate() {
            if v != 0 {
                out[i] += v;
            }
        }
    }
    out
}

fn to_map(dense: &[BigUint]) -> (BTreeMap<u32, BigUint>, u32) {
    let mut map = BTreeMap::new();
    let mut max_len = 0u32;
    for (i, v) in dense.iter().enumerate() {
        if *v != BigUint::ZERO {
            let j = i as u32 + 1;
            map.insert(j, v.clone());
            max_len = j;
        }
    }
    (map, max_len)
}

fn census_gap_impl(
    cycle: &GapCycle,
    gap: u64,
    max_len: Option<u32>,
    parallel: bool,
) -> Result<DrivingTermCensus> {
    check_gap(cycle, gap)?;
    let n = cycle.len();
    let natural_cap = ((gap / 2) as usize).min(n).max(1);
    let cap = match max_len {
        Some(m) => (m as usize).min(natural_cap).max(1),
        None => natural_cap,
    };
    let parts: Vec<(Vec<u64>, bool)> = {
        let scan = |lo: usize, hi: usize| match cycle.gaps() {
            Gaps::Narrow(v) => scan_target(v, gap, cap, lo, hi),
            Gaps::Wide(v) => scan_target(v, gap, cap, lo, hi),
        };
        let ranges = start_ranges(n, parallel);
        #[cfg(feature = "parallel")]
        {
            if parallel && ranges.len() > 1 {
                use rayon::prelude::*;
                ranges.par_iter().map(|&(lo, hi)| scan(lo, hi)).collect()
            } else {
                ranges.iter().map(|&(lo, hi)| scan(lo, hi)).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            ranges.iter().map(|&(lo, hi)| scan(lo, hi)).collect()
        }
    };
    let truncated = parts.iter().any(|(_, t)| *t);
    let dense = merge_dense(parts.into_iter().map(|(c, _)| c).collect());
    let (counts, max_length) = to_map(&dense);
    Ok(DrivingTermCensus {
        prime: cycle.prime(),
        gap,
        counts,
        max_length,
        truncated_at: if truncated { max_len } else { None },
    })
}

/// Counts the driving terms for `gap` by length. With `max_len` the scan is
/// bounded and the result records the truncation.
pub fn census_gap(cycle: &GapCycle, gap: u64, max_len: Option<u32>) -> Result<DrivingTermCensus> {
    census_gap_impl(cycle, gap, max_len, true)
}

/// Sequential fallback of [`census_gap`].
pub fn census_gap_seq(
    cycle: &GapCycle,
    gap: u64,
    max_len: Option<u32>,
) -> Result<DrivingTermCensus> {
    census_gap_impl(cycle, gap, max_len, false)
}

fn census_all_impl(
    cycle: &GapCycle,
    max_gap: u64,
    parallel: bool,
) -> Result<BTreeMap<u64, DrivingTermCensus>> {
    if max_gap < 2 {
        return Err(Error::GapExceedsSpan {
            gap: max_gap,
            span: cycle.span_u64() as u128,
        });
    }
    check_gap(cycle, max_gap)?;
    let n = cycle.len();
    let jdim = ((max_gap / 2) as usize).min(n).max(1);
    let parts = run_chunked(n, parallel, |lo, hi| match cycle.gaps() {
        Gaps::Narrow(v) => scan_upto(v, max_gap, jdim, lo, hi),
        Gaps::Wide(v) => scan_upto(v, max_gap, jdim, lo, hi),
    });
    let dense = merge_dense(parts);
    let mut out = BTreeMap::new();
    for g2 in 1..=(max_gap / 2) as usize {
        let row = &dense[(g2 - 1) * jdim..g2 * jdim];
        let (counts, max_length) = to_map(row);
        out.insert(
            2 * g2 as u64,
            DrivingTermCensus {
                prime: cycle.prime(),
                gap: 2 * g2 as u64,
                counts,
                max_length,
                truncated_at: None,
            },
        );
    }
    Ok(out)
}

/// One linear scan accumulating the censuses of every even gap up to
/// `max_gap` simultaneously; identical to per-gap [`census_gap`] calls.
pub fn census_all(cycle: &GapCycle, max_gap: u64) -> Result<BTreeMap<u64, DrivingTermCensus>> {
    census_all_impl(cycle, max_gap, true)
}

/// Sequential fallback of [`census_all`].
pub fn census_all_seq(cycle: &GapCycle, max_gap: u64) -> Result<BTreeMap<u64, DrivingTermCensus>> {
    census_all_impl(cycle, max_gap, false)
}

/// Classifies every span-`gap` driving term into the four endpoint classes.
pub fn census_subpop(cycle: &GapCycle, gap: u64) -> Result<SubpopCensus> {
    check_gap(cycle, gap)?;
    if gap < 6 {
        return Err(Error::GapTooSmallForClasses { gap });
    }
    let n = cycle.len();
    let cap = ((gap / 2) as usize).min(n).max(1);
    let parts = run_chunked(n, true, |lo, hi| {
        let rows = match cycle.gaps() {
            Gaps::Narrow(v) => scan_classes(v, gap, cap, lo, hi),
            Gaps::Wide(v) => scan_classes(v, gap, cap, lo, hi),
        };
        rows.into_iter().flatten().collect::<Vec<u64>>()
    });
    let dense = merge_dense(parts);
    let maps: Vec<BTreeMap<u32, BigUint>> = (0..4)
        .map(|c| to_map(&dense[c * cap..(c + 1) * cap]).0)
        .collect();
    let [a, b, c, d]: [BTreeMap<u32, BigUint>; 4] = maps.try_into().unwrap();
    let census = SubpopCensus {
        prime: cycle.prime(),
        gap,
        a,
        b,
        c,
        d,
    };
    debug_assert_eq!(census.class_total('b'), census.class_total('c'));
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::{build_to, MemoryBudget};

    const B: &MemoryBudget = &MemoryBudget::UNLIMITED;

    /// Brute-force oracle: for each start in `[lo, hi)`, accumulate forward
    /// and record every window summing exactly to the target.
    fn naive_census_range(gaps: &[u16], target: u64, lo: usize, hi: usize) -> BTreeMap<u32, u64> {
        let n = gaps.len();
        let mut out = BTreeMap::new();
        for start in lo..hi {
            let mut sum = 0u64;
            for j in 1..=n {
                sum += gaps[(start + j - 1) % n] as u64;
                if sum == target {
                    *out.entry(j as u32).or_insert(0) += 1;
                }
                if sum >= target {
                    break;
                }
            }
        }
        out
    }

    fn naive_census(gaps: &[u16], target: u64) -> BTreeMap<u32, u64> {
        naive_census_range(gaps, target, 0, gaps.len())
    }

    fn as_u64_map(census: &DrivingTermCensus) -> BTreeMap<u32, u64> {
        census
            .counts
            .iter()
            .map(|(&j, n)| (j, u64::try_from(n).unwrap()))
            .collect()
    }

    #[test]
    fn g5_censuses_match_enumeration() {
        let g5 = build_to(5, B).unwrap();
        // G(5#) = 6 4 2 4 2 4 6 2; every window enumerated by hand and by
        // the oracle.
        let c2 = census_gap(&g5, 2, None).unwrap();
        assert_eq!(as_u64_map(&c2), BTreeMap::from([(1, 3)]));
        let c4 = census_gap(&g5, 4, None).unwrap();
        assert_eq!(as_u64_map(&c4), BTreeMap::from([(1, 3)]));
        let c6 = census_gap(&g5, 6, None).unwrap();
        assert_eq!(as_u64_map(&c6), BTreeMap::from([(1, 2), (2, 4)]));
        let c8 = census_gap(&g5, 8, None).unwrap();
        assert_eq!(as_u64_map(&c8), BTreeMap::from([(2, 2), (3, 1)]));
        assert_eq!(c8.max_length, 3);

        for gap in [2u64, 4, 6, 8, 10, 12, 14] {
            let got = as_u64_map(&census_gap(&g5, gap, None).unwrap());
            let want = naive_census(&g5.iter_gaps().collect::<Vec<_>>(), gap);
            assert_eq!(got, want, "gap {gap}");
        }
    }

    #[test]
    fn census_all_agrees_with_per_gap_calls() {
        let g7 = build_to(7, B).unwrap();
        let all = census_all(&g7, 26).unwrap();
        for gap in (2u64..=26).step_by(2) {
            let single = census_gap(&g7, gap, None).unwrap();
            assert_eq!(all[&gap], single, "gap {gap}");
        }
    }

    #[test]
    fn gap2_counts_match_the_product_identity() {
        let mut cycle = build_to(5, B).unwrap();
        let mut expected = BigUint::from(3u32); // (3-2)(5-2)
        assert_eq!(census_gap(&cycle, 2, None).unwrap().count(1), expected);
        for p in [7u64, 11, 13] {
            cycle = crate::cycle::recurse(&cycle, p, B).unwrap();
            expected *= p - 2;
            let census = census_gap(&cycle, 2, None).unwrap();
            assert_eq!(census.count(1), expected, "n_2(({p})#)");
            assert_eq!(census.counts.len(), 1, "gap 2 has only length-1 terms");
        }
        // n_2(7#) = 15 twins among the coprimes of 210.
        let g7 = build_to(7, B).unwrap();
        assert_eq!(census_gap(&g7, 2, None).unwrap().count(1), BigUint::from(15u32));
    }

    #[test]
    fn bounded_scan_records_truncation() {
        let g5 = build_to(5, B).unwrap();
        let c = census_gap(&g5, 8, Some(2)).unwrap();
        assert_eq!(as_u64_map(&c), BTreeMap::from([(2, 2)]));
        assert_eq!(c.truncated_at, Some(2));
        let full = census_gap(&g5, 8, Some(10)).unwrap();
        assert_eq!(full.truncated_at, None);
    }

    #[test]
    fn rejects_odd_and_oversized_gaps() {
        let g5 = build_to(5, B).unwrap();
        assert!(matches!(census_gap(&g5, 7, None), Err(Error::OddGap(7))));
        assert!(matches!(
            census_gap(&g5, 32, None),
            Err(Error::GapExceedsSpan { gap: 32, .. })
        ));
        assert!(matches!(
            census_subpop(&g5, 4),
            Err(Error::GapTooSmallForClasses { gap: 4 })
        ));
    }

    #[test]
    fn subpop_classes_partition_the_census() {
        let g5 = build_to(5, B).unwrap();
        let sp = census_subpop(&g5, 6).unwrap();
        // (6) singles are class a; (4,2) ends with a 2; (2,4) begins with one.
        assert_eq!(sp.a, BTreeMap::from([(1, BigUint::from(2u32))]));
        assert_eq!(sp.b, BTreeMap::from([(2, BigUint::from(2u32))]));
        assert_eq!(sp.c, BTreeMap::from([(2, BigUint::from(2u32))]));
        assert!(sp.d.is_empty());

        let g7 = build_to(7, B).unwrap();
        for gap in [6u64, 10, 16, 22, 24] {
            let sp = census_subpop(&g7, gap).unwrap();
            let plain = census_gap(&g7, gap, None).unwrap();
            assert_eq!(sp.merged(), plain.counts, "partition for gap {gap}");
            assert_eq!(sp.class_total('b'), sp.class_total('c'));
            // A 2...2 term needs at least both end gaps plus interior span.
            for j in sp.d.keys() {
                assert!(*j >= 3);
            }
        }
    }

    #[test]
    fn wrapping_windows_count_exactly_once() {
        let g5 = build_to(5, B).unwrap();
        // The pair (2, 6) wrapping from index 7 to 0 is the only wrapped
        // window of span 8; hand count above already includes it.
        let c8 = census_gap(&g5, 8, None).unwrap();
        assert_eq!(c8.total(), BigUint::from(3u32));
        // Rotation invariance: counts are identical on a rotated copy.
        let rotated: Vec<u16> = {
            let v: Vec<u16> = g5.iter_gaps().collect();
            let mut r = v[3..].to_vec();
            r.extend_from_slice(&v[..3]);
            r
        };
        assert_eq!(naive_census(&rotated, 8), as_u64_map(&c8));
    }

    #[test]
    fn chunked_scans_merge_exactly() {
        let g13 = build_to(13, B).unwrap();
        let gaps: Vec<u16> = g13.iter_gaps().collect();
        for gap in [6u64, 22, 30] {
            let cap = (gap / 2) as usize;
            let (full, _) = scan_target(&gaps, gap, cap, 0, gaps.len());
            // Misaligned chunks, merged by addition.
            let mut merged = vec![0u64; cap];
            let mut lo = 0;
            while lo < gaps.len() {
                let hi = (lo + 911).min(gaps.len());
                let (part, _) = scan_target(&gaps, gap, cap, lo, hi);
                for (i, v) in part.iter().enumerate() {
                    merged[i] += v;
                }
                lo = hi;
            }
            assert_eq!(merged, full, "gap {gap}");
        }
    }

    #[test]
    fn sequential_and_parallel_scans_agree() {
        let g11 = build_to(11, B).unwrap();
        for gap in [2u64, 14, 22, 26] {
            assert_eq!(
                census_gap(&g11, gap, None).unwrap(),
                census_gap_seq(&g11, gap, None).unwrap()
            );
        }
        assert_eq!(
            census_all(&g11, 30).unwrap(),
            census_all_seq(&g11, 30).unwrap()
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn gap_sequences() -> impl Strategy<Value = Vec<u16>> {
            // Even gaps >= 2 so windows behave like real cycles.
            proptest::collection::vec((1u16..=6).prop_map(|g| 2 * g), 4..64)
        }

        proptest! {
            #[test]
            fn scan_matches_naive_on_synthetic_sequences(
                gaps in gap_sequences(),
                target in (1u64..=20).prop_map(|g| 2 * g),
            ) {
                let cap = ((target / 2) as usize).min(gaps.len()).max(1);
                let (dense, _) = scan_target(&gaps, target, cap, 0, gaps.len());
                let mut got = BTreeMap::new();
                for (i, v) in dense.iter().enumerate() {
                    if *v > 0 {
                        got.insert(i as u32 + 1, *v);
                    }
                }
                prop_assert_eq!(got, naive_census(&gaps, target));
            }

            #[test]
            fn census_all_matches_single_scans_on_g7_windows(
                lo in 0usize..40,
                width in 8usize..48,
            ) {
                let g7 = build_to(7, B).unwrap();
                let gaps: Vec<u16> = g7.iter_gaps().collect();
                let hi = (lo + width).min(gaps.len());
                let jdim = 8usize;
                let max_gap = 16u64;
                let multi = scan_upto(&gaps, max_gap, jdim, lo, hi);
                for g2 in 1..=(max_gap / 2) as usize {
                    let (single, _) =
                        scan_target(&gaps, 2 * g2 as u64, jdim.min(g2.max(1)), lo, hi);
                    for (j, &v) in single.iter().enumerate() {
                        prop_assert_eq!(multi[(g2 - 1) * jdim + j], v);
                    }
                }
            }

            #[test]
            fn scan_matches_naive_on_random_windows_of_g11(
                lo in 0usize..479,
                width in 1usize..160,
                target in (1u64..=15).prop_map(|g| 2 * g),
            ) {
                use std::sync::OnceLock;
                static G11: OnceLock<Vec<u16>> = OnceLock::new();
                let gaps = G11.get_or_init(|| {
                    build_to(11, B).unwrap().iter_gaps().collect()
                });
                let hi = (lo + width).min(gaps.len());
                let cap = ((target / 2) as usize).max(1);
                let (dense, _) = scan_target(gaps, target, cap, lo, hi);
                let mut got = BTreeMap::new();
                for (i, v) in dense.iter().enumerate() {
                    if *v > 0 {
                        got.insert(i as u32 + 1, *v);
                    }
                }
                prop_assert_eq!(got, naive_census_range(gaps, target, lo, hi));
            }
        }
    }
}
