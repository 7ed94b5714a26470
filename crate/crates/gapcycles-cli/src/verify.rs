//! Verification campaigns: predict exact driving-term counts from a starting
//! census with the stage dynamics, then compare against genuine censuses of
//! recursion-built cycles, gap by gap and stage by stage.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use gapcycles::census::{census_gap, census_subpop, DrivingTermCensus, SubpopCensus};
use gapcycles::cycle::{self, MemoryBudget};
use gapcycles::popmodel::counts as count_model;
use gapcycles::primes;
use gapcycles::report::ReportMeta;
use gapcycles::subpop;
use gapcycles::{Error, Result};

/// Pass threshold for float-mode verification, recorded in every report.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GapMode {
    General,
    Special,
    Subpop,
}

impl GapMode {
    pub fn label(&self) -> &'static str {
        match self {
            GapMode::General => "general",
            GapMode::Special => "special",
            GapMode::Subpop => "subpop-2p1+2",
        }
    }
}

/// Selects the model for a gap from the starting stage: general below
/// `2*p1`, the special step at exactly `2*p1`, the endpoint-class step at
/// `2*p1 + 2`, nothing beyond.
pub fn mode_for(gap: u64, p0: u64) -> Result<GapMode> {
    if !gap.is_multiple_of(2) {
        return Err(Error::OddGap(gap));
    }
    let p1 = primes::next_prime(p0);
    if gap >= 2 && gap < 2 * p1 {
        Ok(GapMode::General)
    } else if gap == 2 * p1 {
        Ok(GapMode::Special)
    } else {
        let p2 = primes::next_prime(p1);
        if gap == 2 * p1 + 2 && gap < 2 * p2 {
            Ok(GapMode::Subpop)
        } else {
            Err(Error::BeyondModelThreshold {
                gap,
                p0,
                p1,
                max_gap: 2 * p1 + 2,
            })
        }
    }
}

/// Starting data for one gap at stage `p0`.
#[derive(Clone, Debug)]
pub struct InitialConditions {
    pub census: DrivingTermCensus,
    /// Endpoint classes, required for [`GapMode::Subpop`].
    pub classes: Option<SubpopCensus>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageCheck {
    pub stage_prime: u64,
    /// Predicted counts by length, `j = 1, 2, ...`.
    pub predicted: Vec<String>,
    pub observed: Vec<String>,
    /// Exact mode: whether every residual is exactly zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_zero: Option<bool>,
    /// Float mode: worst relative error across lengths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_error: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCheck {
    pub gap: u64,
    pub mode: String,
    pub stages: Vec<StageCheck>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub meta: ReportMeta,
    pub p0: u64,
    pub target: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub float_tolerance: Option<f64>,
    pub checks: Vec<GapCheck>,
    pub all_pass: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("gap,mode,stage_prime,residual,pass\n");
        for check in &self.checks {
            for stage in &check.stages {
                let residual = match (stage.residual_zero, stage.max_rel_error) {
                    (Some(true), _) => "0".to_string(),
                    (Some(false), _) => "nonzero".to_string(),
                    (None, Some(e)) => format!("{e:e}"),
                    (None, None) => String::new(),
                };
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    check.gap, check.mode, stage.stage_prime, residual, stage.pass
                ));
            }
        }
        out
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "gap {:>3} [{}]: {}",
                    c.gap,
                    c.mode,
                    if c.pass { "PASS" } else { "FAIL" }
                )
            })
            .collect()
    }
}

fn trimmed(dense: &[BigUint]) -> BTreeMap<u32, BigUint> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, n)| **n != BigUint::ZERO)
        .map(|(i, n)| (i as u32 + 1, n.clone()))
        .collect()
}

fn dense_of(map: &BTreeMap<u32, BigUint>) -> Vec<BigUint> {
    let max_j = map.keys().max().copied().unwrap_or(0);
    (1..=max_j)
        .map(|j| map.get(&j).cloned().unwrap_or_default())
        .collect()
}

fn general_step_f64(counts: &[f64], p: u64) -> Vec<f64> {
    (0..counts.len())
        .map(|i| {
            let j = (i + 1) as f64;
            let mut n = counts[i] * (p as f64 - j - 1.0);
            if i + 1 < counts.len() {
                n += counts[i + 1] * j;
            }
            n
        })
        .collect()
}

fn special_step_f64(counts: &[f64], p: u64) -> Vec<f64> {
    (0..counts.len())
        .map(|i| {
            let j = (i + 1) as f64;
            let mut n = counts[i] * (p as f64 - j);
            if i + 1 < counts.len() {
                n += counts[i + 1] * j;
            }
            n
        })
        .collect()
}

// Class-step counts stay exact integers below 2^53, so rounding the exact
// step is identical to running it in f64.
fn subpop_step_f64(sp: &SubpopCensus, p1: u64) -> Result<Vec<f64>> {
    let exact = subpop::subpop_step(sp, p1)?;
    Ok(dense_of(&exact)
        .iter()
        .map(|n| n.to_f64().unwrap_or(f64::NAN))
        .collect())
}

/// Verifies one gap: steps the initial conditions through every stage in
/// `observed` (ascending primes) and compares counts.
pub fn verify_gap(
    mode: GapMode,
    initial: &InitialConditions,
    observed: &[(u64, BTreeMap<u32, BigUint>)],
    exact: bool,
) -> Result<GapCheck> {
    let gap = initial.census.gap;
    let mut stages = Vec::new();
    let mut pass = true;

    if exact {
        let mut counts = initial.census.dense_counts();
        for (k, (stage, observed_map)) in observed.iter().enumerate() {
            let first = k == 0;
            counts = match (mode, first) {
                (GapMode::General, _) | (GapMode::Special, false) | (GapMode::Subpop, false) => {
                    count_model::general_step(&counts, *stage)?
                }
                (GapMode::Special, true) => count_model::special_step(&counts, *stage)?,
                (GapMode::Subpop, true) => {
                    let classes = initial
                        .classes
                        .as_ref()
                        .expect("subpop mode requires endpoint classes");
                    dense_of(&subpop::subpop_step(classes, *stage)?)
                }
            };
            let predicted_map = trimmed(&counts);
            let ok = predicted_map == *observed_map;
            pass &= ok;
            stages.push(StageCheck {
                stage_prime: *stage,
                predicted: counts.iter().map(|n| n.to_string()).collect(),
                observed: dense_of(observed_map)
                    .iter()
                    .map(|n| n.to_string())
                    .collect(),
                residual_zero: Some(ok),
                max_rel_error: None,
                pass: ok,
            });
        }
    } else {
        let mut counts: Vec<f64> = initial
            .census
            .dense_counts()
            .iter()
            .map(|n| n.to_f64().unwrap_or(f64::NAN))
            .collect();
        for (k, (stage, observed_map)) in observed.iter().enumerate() {
            let first = k == 0;
            counts = match (mode, first) {
                (GapMode::General, _) | (GapMode::Special, false) | (GapMode::Subpop, false) => {
                    general_step_f64(&counts, *stage)
                }
                (GapMode::Special, true) => special_step_f64(&counts, *stage),
                (GapMode::Subpop, true) => {
                    let classes = initial
                        .classes
                        .as_ref()
                        .expect("subpop mode requires endpoint classes");
                    subpop_step_f64(classes, *stage)?
                }
            };
            let observed_dense = dense_of(observed_map);
            let mut max_rel = 0.0f64;
            for (i, want) in observed_dense.iter().enumerate() {
                let want = want.to_f64().unwrap_or(f64::NAN);
                let got = counts.get(i).copied().unwrap_or(0.0);
                let rel = if want == 0.0 {
                    if got == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    ((got - want) / want).abs()
                };
                max_rel = max_rel.max(rel);
            }
            for extra in counts.iter().skip(observed_dense.len()) {
                if *extra != 0.0 {
                    max_rel = f64::INFINITY;
                }
            }
            let ok = max_rel <= FLOAT_TOLERANCE;
            pass &= ok;
            stages.push(StageCheck {
                stage_prime: *stage,
                predicted: counts.iter().map(|n| format!("{n}")).collect(),
                observed: observed_dense.iter().map(|n| n.to_string()).collect(),
                residual_zero: None,
                max_rel_error: Some(max_rel),
                pass: ok,
            });
        }
    }

    Ok(GapCheck {
        gap,
        mode: mode.label().to_string(),
        stages,
        pass,
    })
}

/// Builds the chain from `p0` to `target`, censuses every requested gap at
/// every stage, and verifies the model predictions against them.
pub fn run_verification(
    p0: u64,
    target: u64,
    gaps: &[u64],
    exact: bool,
    budget: &MemoryBudget,
    tool_version: &str,
) -> Result<VerificationReport> {
    if !primes::is_prime(p0) || p0 < 5 {
        return Err(Error::NotPrime(p0));
    }
    if !primes::is_prime(target) {
        return Err(Error::NotPrime(target));
    }
    let p1 = primes::next_prime(p0);
    if target < p1 {
        return Err(Error::TargetBelowFirstStage { target, first: p1 });
    }

    let mut modes = Vec::with_capacity(gaps.len());
    for &gap in gaps {
        modes.push(mode_for(gap, p0)?);
    }

    let mut cycle = cycle::build_to(p0, budget)?;
    let mut initials = Vec::with_capacity(gaps.len());
    for (&gap, mode) in gaps.iter().zip(&modes) {
        let census = census_gap(&cycle, gap, None)?;
        let classes = match mode {
            GapMode::Subpop => Some(census_subpop(&cycle, gap)?),
            _ => None,
        };
        initials.push(InitialConditions { census, classes });
    }

    let mut observed: Vec<Vec<(u64, BTreeMap<u32, BigUint>)>> = vec![Vec::new(); gaps.len()];
    while cycle.prime() < target {
        let next = primes::next_prime(cycle.prime());
        cycle = cycle::recurse(&cycle, next, budget)?;
        for (i, &gap) in gaps.iter().enumerate() {
            let census = census_gap(&cycle, gap, None)?;
            observed[i].push((next, census.counts));
        }
    }

    let mut checks = Vec::with_capacity(gaps.len());
    let mut all_pass = true;
    for (i, initial) in initials.iter().enumerate() {
        let check = verify_gap(modes[i], initial, &observed[i], exact)?;
        all_pass &= check.pass;
        checks.push(check);
    }

    Ok(VerificationReport {
        meta: ReportMeta::new(tool_version, exact),
        p0,
        target,
        float_tolerance: if exact { None } else { Some(FLOAT_TOLERANCE) },
        checks,
        all_pass,
    })
}

/// Every even gap the models cover from `p0`: up to and including
/// `2*p1 + 2`.
pub fn applicable_gaps(p0: u64) -> Vec<u64> {
    let p1 = primes::next_prime(p0);
    (1..=p1 + 1).map(|h| 2 * h).collect()
}
