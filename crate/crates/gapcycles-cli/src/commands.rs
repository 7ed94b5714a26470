//! Implementations behind the CLI subcommands.

use std::path::Path;

use num_bigint::BigUint;

use gapcycles::census::{census_all, census_gap, census_subpop};
use gapcycles::cycle::{self, MemoryBudget};
use gapcycles::cycle_io::{self, LoadOptions};
use gapcycles::popmodel::{
    self, coefficients, normalize, Exact, ModelCoefficients, PopulationVector, Scalar, StepMode,
};
use gapcycles::report::{
    census_rows, coefficient_entries, population_entries, subpop_rows, CensusReport, ModelReport,
    ReportMeta, StageValues,
};
use gapcycles::{primes, subpop, Error};

use crate::table82;
use crate::verify::{self, GapMode};
use crate::{fixture, CliError};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug)]
pub struct GlobalOpts {
    pub format: OutputFormat,
    pub exact: bool,
    pub budget: MemoryBudget,
    pub precision: usize,
}

fn meta(opts: &GlobalOpts) -> ReportMeta {
    ReportMeta::new(TOOL_VERSION, opts.exact)
}

/// `build`: recursion chain from the seed, written to the cache format.
pub fn cmd_build(
    prime: u64,
    out: &Path,
    trace: bool,
    opts: &GlobalOpts,
) -> Result<i32, CliError> {
    let cycle = if trace {
        if !primes::is_prime(prime) || prime < 3 {
            return Err(Error::NotPrime(prime).into());
        }
        let mut cycle = cycle::seed_cycle();
        while cycle.prime() < prime {
            let next = primes::next_prime(cycle.prime());
            let (built, trace) = cycle::recurse_with_trace(&cycle, next, &opts.budget)?;
            let min_sep = trace
                .windows(2)
                .map(|w| w[1].absolute_offset - w[0].absolute_offset)
                .min()
                .unwrap_or(0);
            eprintln!(
                "stage {next}: {} fusions, min separation {min_sep} (>= 2*{next})",
                trace.len()
            );
            cycle = built;
        }
        cycle
    } else {
        cycle::build_to(prime, &opts.budget)?
    };
    cycle_io::save_cycle(&cycle, out)?;
    eprintln!(
        "wrote G({prime}#): {} gaps, span {}, to {}",
        cycle.len(),
        cycle.span(),
        out.display()
    );
    Ok(0)
}

/// `sieve-check`: recursion-built cycle against the direct sieve, bit exact.
pub fn cmd_sieve_check(prime: u64, opts: &GlobalOpts) -> Result<i32, CliError> {
    let recursed = cycle::build_to(prime, &opts.budget)?;
    let sieved = cycle::direct_sieve(prime, &opts.budget)?;
    if recursed == sieved {
        println!(
            "sieve-check {prime}: PASS ({} gaps, span {})",
            recursed.len(),
            recursed.span()
        );
        Ok(0)
    } else {
        println!("sieve-check {prime}: FAIL (recursion and direct sieve differ)");
        Ok(1)
    }
}

/// `census`: driving-term counts from a cached cycle file.
#[allow(clippy::too_many_arguments)]
pub fn cmd_census(
    path: &Path,
    gap: Option<u64>,
    max_gap: Option<u64>,
    subpop_classes: bool,
    skip_sum_above: Option<u64>,
    opts: &GlobalOpts,
) -> Result<i32, CliError> {
    let cycle = cycle_io::load_cycle_with(
        path,
        &LoadOptions {
            skip_sum_check_above: skip_sum_above,
        },
    )?;
    let mut rows = Vec::new();
    match (gap, max_gap) {
        (Some(g), None) => {
            if subpop_classes {
                match census_subpop(&cycle, g) {
                    Ok(sp) => rows.extend(subpop_rows(&sp)),
                    Err(Error::GapExceedsSpan { gap, span }) => {
                        eprintln!("note: gap {gap} exceeds the cycle span {span}; empty census");
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                match census_gap(&cycle, g, None) {
                    Ok(census) => rows.extend(census_rows(&census)),
                    Err(Error::GapExceedsSpan { gap, span }) => {
                        eprintln!("note: gap {gap} exceeds the cycle span {span}; empty census");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        (None, Some(mg)) => {
            if subpop_classes {
                return Err(CliError::Usage(
                    "--subpop needs a single --gap, not --max-gap".into(),
                ));
            }
            match census_all(&cycle, mg) {
                Ok(censuses) => {
                    for census in censuses.values() {
                        rows.extend(census_rows(census));
                    }
                }
                Err(Error::GapExceedsSpan { gap, span }) => {
                    eprintln!("note: max gap {gap} exceeds the cycle span {span}; empty census");
                }
                Err(e) => return Err(e.into()),
            }
        }
        _ => {
            return Err(CliError::Usage(
                "census needs exactly one of --gap or --max-gap".into(),
            ));
        }
    }
    let report = CensusReport { meta: meta(opts), rows };
    match opts.format {
        OutputFormat::Csv => print!("{}", report.to_csv()),
        OutputFormat::Json => println!("{}", report.to_json()),
    }
    Ok(0)
}

struct ModelInputs {
    census: gapcycles::census::DrivingTermCensus,
    classes: Option<gapcycles::census::SubpopCensus>,
    n2: BigUint,
}

fn model_inputs(p0: u64, gap: u64, mode: GapMode, use_fixture: bool, budget: &MemoryBudget) -> Result<ModelInputs, CliError> {
    if use_fixture {
        if p0 != 37 || gap != 82 {
            return Err(CliError::Usage(
                "--fixture ships the g=82 census of G(37#); use --p0 37 --gap 82".into(),
            ));
        }
        return Ok(ModelInputs {
            census: table82::fixture_census(),
            classes: None,
            n2: fixture::n2_37(),
        });
    }
    let cycle = cycle::build_to(p0, budget)?;
    let census = census_gap(&cycle, gap, None)?;
    let classes = match mode {
        GapMode::Subpop => Some(census_subpop(&cycle, gap)?),
        _ => None,
    };
    let n2 = census_gap(&cycle, 2, None)?.count(1);
    Ok(ModelInputs { census, classes, n2 })
}

type StagesAndModel<S> = (Vec<PopulationVector<S>>, Option<ModelCoefficients<S>>);

fn model_stages<S: Scalar>(
    inputs: &ModelInputs,
    mode: GapMode,
    p1: u64,
    target: u64,
) -> Result<StagesAndModel<S>, CliError> {
    match mode {
        GapMode::General | GapMode::Special => {
            let step_mode = if mode == GapMode::General {
                StepMode::General
            } else {
                StepMode::Special
            };
            let w0 = normalize::<S>(&inputs.census, &inputs.n2)?;
            let stages = popmodel::iterate_to(&w0, step_mode, target)?;
            let model = if w0.dim() > 0 {
                let model = coefficients(&w0, step_mode, p1)?;
                if S::EXACT {
                    // The closed form must replay the iteration, exactly.
                    for stage in &stages {
                        debug_assert_eq!(
                            popmodel::evaluate_closed_form(&model, stage.stage_prime)?,
                            stage.top()
                        );
                    }
                }
                Some(model)
            } else {
                None
            };
            Ok((stages, model))
        }
        GapMode::Subpop => {
            let classes = inputs.classes.as_ref().expect("subpop inputs carry classes");
            let n2_p1 = &inputs.n2 * (p1 - 2);
            let mut w = subpop::chain_from_subpop::<S>(classes, p1, &n2_p1, p1)?;
            let mut stages = vec![w.clone()];
            while w.stage_prime < target {
                let next = primes::next_prime(w.stage_prime);
                w = popmodel::step(&w, next, StepMode::General)?;
                stages.push(w.clone());
            }
            let model = if w.dim() > 0 {
                let p2 = primes::next_prime(p1);
                Some(coefficients(&stages[0], StepMode::General, p2)?)
            } else {
                None
            };
            Ok((stages, model))
        }
    }
}

/// `model`: per-stage population vectors and closed-form coefficients.
pub fn cmd_model(
    p0: u64,
    gap: u64,
    target: u64,
    use_fixture: bool,
    opts: &GlobalOpts,
) -> Result<i32, CliError> {
    if !primes::is_prime(p0) || p0 < 5 {
        return Err(Error::NotPrime(p0).into());
    }
    if !primes::is_prime(target) {
        return Err(Error::NotPrime(target).into());
    }
    let mode = verify::mode_for(gap, p0)?;
    let p1 = primes::next_prime(p0);
    if target < p1 {
        return Err(Error::TargetBelowFirstStage {
            target,
            first: p1,
        }
        .into());
    }
    let inputs = model_inputs(p0, gap, mode, use_fixture, &opts.budget)?;

    let report = if opts.exact {
        let (stages, model) = model_stages::<Exact>(&inputs, mode, p1, target)?;
        ModelReport {
            meta: meta(opts),
            gap,
            start_prime: p0,
            first_step_mode: mode.label().to_string(),
            sign_convention: popmodel::SIGN_CONVENTION,
            stages: stages
                .iter()
                .map(|w| StageValues {
                    stage_prime: w.stage_prime,
                    surrogate: w.surrogate,
                    values: population_entries(w, opts.precision, gapcycles::report::exact_identity),
                })
                .collect(),
            coefficients: model
                .map(|m| coefficient_entries(&m, opts.precision, gapcycles::report::exact_identity))
                .unwrap_or_default(),
        }
    } else {
        let (stages, model) = model_stages::<f64>(&inputs, mode, p1, target)?;
        ModelReport {
            meta: meta(opts),
            gap,
            start_prime: p0,
            first_step_mode: mode.label().to_string(),
            sign_convention: popmodel::SIGN_CONVENTION,
            stages: stages
                .iter()
                .map(|w| StageValues {
                    stage_prime: w.stage_prime,
                    surrogate: w.surrogate,
                    values: population_entries(w, opts.precision, gapcycles::report::float_none),
                })
                .collect(),
            coefficients: model
                .map(|m| coefficient_entries(&m, opts.precision, gapcycles::report::float_none))
                .unwrap_or_default(),
        }
    };

    match opts.format {
        OutputFormat::Csv => print!("{}", report.to_csv()),
        OutputFormat::Json => println!("{}", report.to_json()),
    }
    Ok(0)
}

/// `verify`: model predictions against censuses of built cycles.
pub fn cmd_verify(
    p0: u64,
    target: u64,
    gaps: &[u64],
    all_applicable: bool,
    opts: &GlobalOpts,
) -> Result<i32, CliError> {
    let gaps: Vec<u64> = if all_applicable {
        verify::applicable_gaps(p0)
    } else if gaps.is_empty() {
        return Err(CliError::Usage(
            "verify needs --gaps g1,g2,... or --all-applicable".into(),
        ));
    } else {
        gaps.to_vec()
    };
    let report =
        verify::run_verification(p0, target, &gaps, opts.exact, &opts.budget, TOOL_VERSION)?;
    match opts.format {
        OutputFormat::Csv => print!("{}", report.to_csv()),
        OutputFormat::Json => println!("{}", report.to_json()),
    }
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    Ok(if report.all_pass { 0 } else { 1 })
}

/// `table82`: the bundled g = 82 regression.
pub fn cmd_table82(opts: &GlobalOpts) -> Result<i32, CliError> {
    let report = table82::run()?;
    match opts.format {
        OutputFormat::Json => println!("{}", report.to_json()),
        OutputFormat::Csv => {
            for line in report.lines() {
                println!("{line}");
            }
        }
    }
    Ok(if report.pass { 0 } else { 1 })
}
