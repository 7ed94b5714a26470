//! Report shapes shared by the command-line harness: census tables and model
//! dumps, in CSV and JSON, with values carried both as decimal strings at a
//! configurable precision and as exact numerator/denominator strings.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::census::{DrivingTermCensus, SubpopCensus};
use crate::popmodel::{ModelCoefficients, PopulationVector, Scalar};

/// Conventions and provenance stamped on every report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportMeta {
    pub tool_version: String,
    pub arithmetic: String,
    pub anchor: &'static str,
    pub counting: &'static str,
}

impl ReportMeta {
    pub fn new(tool_version: &str, exact: bool) -> Self {
        ReportMeta {
            tool_version: tool_version.to_string(),
            arithmetic: if exact { "exact-rational" } else { "float64" }.to_string(),
            anchor: crate::ANCHOR_CONVENTION,
            counting: crate::COUNTING_CONVENTION,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusRow {
    pub stage_prime: u64,
    pub gap: u64,
    pub length: u32,
    pub count: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<char>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub meta: ReportMeta,
    pub rows: Vec<CensusRow>,
}

pub fn census_rows(census: &DrivingTermCensus) -> Vec<CensusRow> {
    census
        .counts
        .iter()
        .map(|(&j, n)| CensusRow {
            stage_prime: census.prime,
            gap: census.gap,
            length: j,
            count: n.to_string(),
            class: None,
        })
        .collect()
}

pub fn subpop_rows(sp: &SubpopCensus) -> Vec<CensusRow> {
    let mut rows = Vec::new();
    for class in ['a', 'b', 'c', 'd'] {
        for (&j, n) in sp.class(class) {
            rows.push(CensusRow {
                stage_prime: sp.prime,
                gap: sp.gap,
                length: j,
                count: n.to_string(),
                class: Some(class),
            });
        }
    }
    rows
}

impl CensusReport {
    pub fn to_csv(&self) -> String {
        let classed = self.rows.iter().any(|r| r.class.is_some());
        let mut out = String::from(if classed {
            "stage_prime,gap,length,count,class\n"
        } else {
            "stage_prime,gap,length,count\n"
        });
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}",
                r.stage_prime, r.gap, r.length, r.count
            ));
            if classed {
                out.push(',');
                out.push(r.class.unwrap_or('-'));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// One value of a population vector or coefficient list.
#[derive(Clone, Debug, Serialize)]
pub struct ValueEntry {
    pub j: u32,
    pub decimal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageValues {
    pub stage_prime: u64,
    pub surrogate: bool,
    pub values: Vec<ValueEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub meta: ReportMeta,
    pub gap: u64,
    pub start_prime: u64,
    pub first_step_mode: String,
    pub sign_convention: &'static str,
    pub stages: Vec<StageValues>,
    pub coefficients: Vec<ValueEntry>,
}

impl ModelReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Flattened form with columns `stage, j, value`; coefficient rows carry
    /// the literal stage `coefficient`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,j,value\n");
        for stage in &self.stages {
            for v in &stage.values {
                out.push_str(&format!("{},{},{}\n", stage.stage_prime, v.j, v.decimal));
            }
        }
        for v in &self.coefficients {
            out.push_str(&format!("coefficient,{},{}\n", v.j, v.decimal));
        }
        out
    }
}

/// Formats an exact rational with `precision` significant digits, in plain
/// decimal when the exponent is moderate and scientific notation otherwise.
pub fn rational_decimal(r: &BigRational, precision: usize) -> String {
    let precision = precision.max(1);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let num = r.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = r.denom().abs().to_biguint().expect("abs is nonnegative");

    // Exponent estimate from digit counts, corrected after rounding.
    let mut exp = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = BigUint::from(10u32);
    let mantissa = loop {
        // mantissa = round(num * 10^(precision - 1 - exp) / den)
        let shift = precision as i64 - 1 - exp;
        let (n, d) = if shift >= 0 {
            (&num * ten.pow(shift as u32), den.clone())
        } else {
            (num.clone(), &den * ten.pow((-shift) as u32))
        };
        let q: BigUint = (&n + (&d >> 1)) / &d;
        let lo = ten.pow(precision as u32 - 1);
        let hi = ten.pow(precision as u32);
        if q < lo {
            exp -= 1;
        } else if q >= hi {
            exp += 1;
        } else {
            break q;
        }
    };

    // Trim trailing zeros of the mantissa but keep at least one digit.
    let mut digits = mantissa.to_string();
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
    }

    let sign = if negative { "-" } else { "" };
    if exp >= -4 && exp < precision as i64 {
        // Plain decimal.
        if exp >= 0 {
            let e = exp as usize;
            if digits.len() > e + 1 {
                format!("{sign}{}.{}", &digits[..=e], &digits[e + 1..])
            } else {
                format!("{sign}{}{}", digits, "0".repeat(e + 1 - digits.len()))
            }
        } else {
            format!("{sign}0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        }
    } else {
        let rest = &digits[1..];
        if rest.is_empty() {
            format!("{sign}{}e{}", &digits[..1], exp)
        } else {
            format!("{sign}{}.{}e{}", &digits[..1], rest, exp)
        }
    }
}

/// Value entries for one population vector.
pub fn population_entries<S: Scalar>(
    w: &PopulationVector<S>,
    precision: usize,
    exact_of: impl Fn(&S) -> Option<BigRational>,
) -> Vec<ValueEntry> {
    w.entries
        .iter()
        .enumerate()
        .map(|(i, v)| value_entry(i as u32 + 1, v, precision, &exact_of))
        .collect()
}

/// Value entries for the alternating-sign coefficient presentation.
pub fn coefficient_entries<S: Scalar>(
    model: &ModelCoefficients<S>,
    precision: usize,
    exact_of: impl Fn(&S) -> Option<BigRational>,
) -> Vec<ValueEntry> {
    model
        .table_values()
        .iter()
        .enumerate()
        .map(|(i, v)| value_entry(i as u32 + 1, v, precision, &exact_of))
        .collect()
}

fn value_entry<S: Scalar>(
    j: u32,
    v: &S,
    precision: usize,
    exact_of: &impl Fn(&S) -> Option<BigRational>,
) -> ValueEntry {
    match exact_of(v) {
        Some(r) => ValueEntry {
            j,
            decimal: rational_decimal(&r, precision),
            numerator: Some(r.numer().to_string()),
            denominator: Some(r.denom().to_string()),
        },
        None => ValueEntry {
            j,
            decimal: format!("{}", v.approx_f64()),
            numerator: None,
            denominator: None,
        },
    }
}

/// Helper for [`population_entries`] in exact mode.
pub fn exact_identity(r: &BigRational) -> Option<BigRational> {
    Some(r.clone())
}

/// Helper for [`population_entries`] in float mode.
pub fn float_none(_: &f64) -> Option<BigRational> {
    None
}
