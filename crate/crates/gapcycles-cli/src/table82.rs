//! Regression of the whole g = 82 pipeline against the bundled reference
//! dataset: normalize the fixture counts, take the special step at 41,
//! back-solve the surrogate starting point, and extract the closed-form
//! coefficients, comparing every column at its recorded precision.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use gapcycles::census::DrivingTermCensus;
use gapcycles::popmodel::{
    self, back_step, coefficients, evaluate_closed_form, normalize, step, Exact, Scalar, StepMode,
};
use gapcycles::Result;

use crate::fixture;

#[derive(Clone, Debug, Serialize)]
pub struct ColumnResult {
    pub column: String,
    pub entries: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactCheck {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table82Report {
    pub columns: Vec<ColumnResult>,
    pub exact_checks: Vec<ExactCheck>,
    pub pass: bool,
}

impl Table82Report {
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for col in &self.columns {
            out.push(format!(
                "column {:<12} {:>2} entries: {}",
                col.column,
                col.entries,
                if col.pass { "PASS" } else { "FAIL" }
            ));
            for f in &col.failures {
                out.push(format!("  mismatch: {f}"));
            }
        }
        for check in &self.exact_checks {
            out.push(format!(
                "exact {:<32} {}",
                check.name,
                if check.pass { "PASS" } else { "FAIL" }
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// The fixture counts as a census of `G(37#)` for gap 82.
pub fn fixture_census() -> DrivingTermCensus {
    let counts: BTreeMap<u32, BigUint> = fixture::counts_82()
        .into_iter()
        .enumerate()
        .filter(|(_, n)| *n != BigUint::ZERO)
        .map(|(i, n)| (i as u32 + 1, n))
        .collect();
    DrivingTermCensus {
        prime: 37,
        gap: 82,
        counts,
        max_length: 19,
        truncated_at: None,
    }
}

fn compare_column(
    name: &str,
    computed: &[Exact],
    printed: &[f64],
    format: fixture::PrintedAs,
) -> ColumnResult {
    let mut failures = Vec::new();
    for (i, (c, &p)) in computed.iter().zip(printed).enumerate() {
        let c = c.approx_f64();
        if !fixture::within_tolerance(c, p, format) {
            failures.push(format!("j={}: computed {c:e}, reference {p:e}", i + 1));
        }
    }
    ColumnResult {
        column: name.to_string(),
        entries: printed.len(),
        pass: failures.is_empty(),
        failures,
    }
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Runs the full regression. Everything derives from the fixture counts; no
/// cycle is built.
pub fn run() -> Result<Table82Report> {
    let census = fixture_census();
    let n2 = fixture::n2_37();

    let w37 = normalize::<Exact>(&census, &n2)?;
    let w41 = step(&w37, 41, StepMode::Special)?;
    let what37 = back_step(&w41, 41)?;
    let model = coefficients(&w37, StepMode::Special, 41)?;
    let l = model.table_values();

    let columns = vec![
        compare_column("w82(37#)", &w37.entries, &fixture::W82_37, fixture::W82_37_FORMAT),
        compare_column("w82(41#)", &w41.entries, &fixture::W82_41, fixture::W82_41_FORMAT),
        compare_column(
            "w-hat82(37#)",
            &what37.entries,
            &fixture::WHAT82_37,
            fixture::WHAT82_37_FORMAT,
        ),
        compare_column("l82", &l, &fixture::L82, fixture::L82_FORMAT),
    ];

    let forty_over_39 = ratio(40, 39);
    let mut exact_checks = vec![
        ExactCheck {
            name: "sum w82(37#) == 1".into(),
            pass: w37.component_sum() == ratio(1, 1),
        },
        ExactCheck {
            name: "sum w82(41#) == 40/39".into(),
            pass: w41.component_sum() == forty_over_39,
        },
        ExactCheck {
            name: "sum w-hat82(37#) == 40/39".into(),
            pass: what37.component_sum() == forty_over_39,
        },
        ExactCheck {
            name: "l1 == 40/39".into(),
            pass: model.alphas[0] == forty_over_39,
        },
        ExactCheck {
            name: "w-hat82(37#) != w82(37#)".into(),
            pass: what37.entries != w37.entries,
        },
        ExactCheck {
            name: "forward step of surrogate == special step".into(),
            pass: {
                let forward = step(&what37, 41, StepMode::General)?;
                forward.entries == w41.entries
            },
        },
        ExactCheck {
            name: "closed form at 41 == stepped top entry".into(),
            pass: evaluate_closed_form(&model, 41)? == w41.top(),
        },
        ExactCheck {
            name: "alternating signs across l82".into(),
            pass: l.iter().all(|v| v.is_positive()),
        },
    ];

    // The closed form trails the exact iteration stage by stage.
    let mut w = w41.clone();
    let mut closed_ok = true;
    for q in [43u64, 47, 53, 59] {
        w = popmodel::step(&w, q, StepMode::General)?;
        closed_ok &= evaluate_closed_form(&model, q)? == w.top();
    }
    exact_checks.push(ExactCheck {
        name: "closed form == iteration through 59".into(),
        pass: closed_ok,
    });

    let pass = columns.iter().all(|c| c.pass) && exact_checks.iter().all(|c| c.pass);
    Ok(Table82Report {
        columns,
        exact_checks,
        pass,
    })
}
