//! Exact dynamics of relative driving-term populations across sieve stages.
//!
//! One stage of the sieve advances the relative populations
//! `w_g = (w_{g,1}, ..., w_{g,J})` by an upper-bidiagonal matrix. For gaps
//! `g < 2p` the general matrix `M_J(p)` applies, with diagonal
//! `(p-j-1)/(p-2)` and superdiagonal `j/(p-2)`. For the single step where
//! `g = 2*p1`, both boundary fusions of a driving term land in the same image,
//! so one fewer image is lost; the special matrix has diagonal `(p-j)/(p-2)`
//! instead. After that step the general dynamics take over.
//!
//! In count form the same dynamics read
//! `n_j <- (p-j-1)*n_j + j*n_{j+1}` (general) and
//! `n_j <- (p-j)*n_j + j*n_{j+1}` (special step), exact over the integers;
//! see [`counts`].
//!
//! The whole matrix family shares a `p`-independent eigenbasis: the
//! eigenvector for the eigenvalue at index `m` has components
//! `v_j = (-1)^(j-1) * C(m-1, j-1)`. This follows from the bidiagonal
//! structure — the eigenvalue equation reduces to
//! `j * C(m-1, j) = (m-j) * C(m-1, j-1)`, which is the binomial absorption
//! identity — and is verified by tests. Expanding a starting vector in that
//! basis turns the iteration into the closed form
//!
//! ```text
//! w_{g,1}(p_k#) = l_1 - l_2 * prod (q-3)/(q-2) + l_3 * prod (q-4)/(q-2) - ...
//! ```
//!
//! with products over primes `q` from the first stepped stage through `p_k`.
//!
//! Reference arithmetic is exact big-rational; an `f64` mode is provided for
//! speed and always cross-checked against the exact mode in tests.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::census::DrivingTermCensus;
use crate::primes::{self, is_prime, require_successor};
use crate::{Error, Result};

/// Arithmetic the dynamics run in: exact big rationals or `f64`.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    const EXACT: bool;
    fn from_ratio(num: i64, den: u64) -> Self;
    fn from_count_ratio(num: &BigUint, den: &BigUint) -> Self;
    fn approx_f64(&self) -> f64;
}

/// Exact reference arithmetic.
pub type Exact = BigRational;

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_count_ratio(num: &BigUint, den: &BigUint) -> Self {
        BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_count_ratio(num: &BigUint, den: &BigUint) -> Self {
        num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN)
    }

    fn approx_f64(&self) -> f64 {
        *self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    General,
    Special,
    InverseGeneral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    General,
    Special,
}

/// Relative populations `w_{g,j}` at one sieve stage.
///
/// `surrogate` marks pre-images produced by [`back_step`]: model-equivalent
/// starting points that are not actual censuses (they may carry negative
/// entries).
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationVector<S> {
    pub gap: u64,
    pub stage_prime: u64,
    pub entries: Vec<S>,
    pub surrogate: bool,
}

impl<S: Scalar> PopulationVector<S> {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn component_sum(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, v| acc + v.clone())
    }

    /// Top entry `w_{g,1}`, the relative population of the gap itself.
    pub fn top(&self) -> S {
        self.entries.first().cloned().unwrap_or_else(S::zero)
    }
}

/// One of the banded system matrices, stored dense (dimensions stay small).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMatrix<S> {
    pub kind: MatrixKind,
    pub prime: u64,
    pub dim: usize,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> SystemMatrix<S> {
    /// Entry at 1-indexed `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.rows[row - 1][col - 1]
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.rows[row - 1]
    }

    pub fn column_sum(&self, col: usize) -> S {
        self.rows
            .iter()
            .fold(S::zero(), |acc, r| acc + r[col - 1].clone())
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.dim);
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &SystemMatrix<S>) -> Vec<Vec<S>> {
        assert_eq!(self.dim, other.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        (0..self.dim).fold(S::zero(), |acc, k| {
                            acc + self.rows[i][k].clone() * other.rows[k][j].clone()
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

fn diag_general<S: Scalar>(p: u64, j: usize) -> S {
    S::from_ratio(p as i64 - j as i64 - 1, p - 2)
}

fn diag_special<S: Scalar>(p: u64, j: usize) -> S {
    S::from_ratio(p as i64 - j as i64, p - 2)
}

fn superdiag<S: Scalar>(p: u64, j: usize) -> S {
    S::from_ratio(j as i64, p - 2)
}

/// Builds `M_J(p)`, the special first-step matrix, or the exact inverse of
/// `M_J(p)`.
pub fn build_matrix<S: Scalar>(kind: MatrixKind, prime: u64, dim: usize) -> Result<SystemMatrix<S>> {
    if !is_prime(prime) || prime < 5 {
        return Err(Error::NotPrime(prime));
    }
    assert!(dim >= 1, "matrix dimension must be at least 1");
    match kind {
        MatrixKind::General | MatrixKind::InverseGeneral => {
            if prime < dim as u64 + 2 {
                return Err(Error::DimensionTooLarge {
                    prime,
                    j: (prime - 1) as usize,
                });
            }
        }
        MatrixKind::Special => {
            if prime < dim as u64 {
                return Err(Error::DimensionTooLarge {
                    prime,
                    j: prime as usize,
                });
            }
        }
    }

    let bidiagonal = |diag: fn(u64, usize) -> S| -> Vec<Vec<S>> {
        (1..=dim)
            .map(|i| {
                (1..=dim)
                    .map(|j| {
                        if i == j {
                            diag(prime, j)
                        } else if j == i + 1 {
                            superdiag(prime, i)
                        } else {
                            S::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    };

    let rows = match kind {
        MatrixKind::General => bidiagonal(diag_general::<S>),
        MatrixKind::Special => bidiagonal(diag_special::<S>),
        MatrixKind::InverseGeneral => {
            // Solve M X = I column by column, bottom up.
            let mut cols: Vec<Vec<S>> = Vec::with_capacity(dim);
            for c in 0..dim {
                let mut x = vec![S::zero(); dim];
                for i in (0..dim).rev() {
                    let rhs = if i == c { S::one() } else { S::zero() };
                    let above = if i + 1 < dim {
                        superdiag::<S>(prime, i + 1) * x[i + 1].clone()
                    } else {
                        S::zero()
                    };
                    x[i] = (rhs - above) / diag_general::<S>(prime, i + 1);
                }
                cols.push(x);
            }
            (0..dim)
                .map(|i| (0..dim).map(|j| cols[j][i].clone()).collect())
                .collect()
        }
    };

    Ok(SystemMatrix {
        kind,
        prime,
        dim,
        rows,
    })
}

/// Normalizes census counts by the gap-2 population of the same stage.
pub fn normalize<S: Scalar>(
    census: &DrivingTermCensus,
    n2: &BigUint,
) -> Result<PopulationVector<S>> {
    if n2.is_zero() {
        return Err(Error::ZeroGapTwoCount);
    }
    let entries = census
        .dense_counts()
        .iter()
        .map(|n| S::from_count_ratio(n, n2))
        .collect();
    Ok(PopulationVector {
        gap: census.gap,
        stage_prime: census.prime,
        entries,
        surrogate: false,
    })
}

fn check_step_mode(gap: u64, next_prime: u64, mode: StepMode, surrogate: bool) -> Result<()> {
    match mode {
        StepMode::General => {
            // A surrogate pre-image exists precisely so the general matrix
            // applies at this threshold; census vectors must take the
            // special step.
            if gap == 2 * next_prime && !surrogate {
                return Err(Error::RequiresSpecialStep { gap, next_prime });
            }
            if gap > 2 * next_prime {
                return Err(Error::BeyondModelThreshold {
                    gap,
                    p0: primes::prev_prime(next_prime).unwrap_or(0),
                    p1: next_prime,
                    max_gap: 2 * next_prime + 2,
                });
            }
        }
        StepMode::Special => {
            if gap != 2 * next_prime {
                return Err(Error::SpecialStepGapMismatch {
                    gap,
                    next_prime,
                    expected: 2 * next_prime,
                });
            }
            if surrogate {
                return Err(Error::SpecialStepOnSurrogate);
            }
        }
    }
    Ok(())
}

/// Advances the populations one stage: `M_J(next) * w` in general mode, the
/// special matrix in special mode (only for the first step where
/// `gap = 2 * next_prime`).
pub fn step<S: Scalar>(
    w: &PopulationVector<S>,
    next_prime: u64,
    mode: StepMode,
) -> Result<PopulationVector<S>> {
    require_successor(w.stage_prime, next_prime)?;
    check_step_mode(w.gap, next_prime, mode, w.surrogate)?;
    if w.entries.is_empty() {
        return Ok(PopulationVector {
            gap: w.gap,
            stage_prime: next_prime,
            entries: Vec::new(),
            surrogate: false,
        });
    }
    let kind = match mode {
        StepMode::General => MatrixKind::General,
        StepMode::Special => MatrixKind::Special,
    };
    let matrix = build_matrix::<S>(kind, next_prime, w.entries.len())?;
    Ok(PopulationVector {
        gap: w.gap,
        stage_prime: next_prime,
        entries: matrix.mul_vec(&w.entries),
        surrogate: false,
    })
}

/// Exact pre-image under the general matrix: solves `M_J(prime) * x = w`.
/// The result is flagged as a surrogate starting point at the previous stage.
pub fn back_step<S: Scalar>(w: &PopulationVector<S>, prime: u64) -> Result<PopulationVector<S>> {
    if prime != w.stage_prime {
        return Err(Error::BackStepStageMismatch {
            prime,
            stage: w.stage_prime,
        });
    }
    let dim = w.entries.len();
    if prime < dim as u64 + 2 {
        return Err(Error::DimensionTooLarge {
            prime,
            j: (prime - 1) as usize,
        });
    }
    let mut x = vec![S::zero(); dim];
    for i in (0..dim).rev() {
        let above = if i + 1 < dim {
            superdiag::<S>(prime, i + 1) * x[i + 1].clone()
        } else {
            S::zero()
        };
        x[i] = (w.entries[i].clone() - above) / diag_general::<S>(prime, i + 1);
    }
    Ok(PopulationVector {
        gap: w.gap,
        stage_prime: primes::prev_prime(prime).expect("prime >= 5 has a predecessor"),
        entries: x,
        surrogate: true,
    })
}

/// Coefficients of the closed-form population model for one gap.
///
/// `alphas` are the signed expansion coefficients in the shared eigenbasis;
/// [`ModelCoefficients::table_values`] applies the alternating-sign
/// presentation `l_m = (-1)^(m-1) * alpha_m` used when displaying them.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelCoefficients<S> {
    pub gap: u64,
    /// First stepped stage; closed-form products run from here.
    pub base_prime: u64,
    pub alphas: Vec<S>,
}

/// How the stored coefficients enter the closed form.
pub const SIGN_CONVENTION: &str =
    "w_g1(p#) = l1 - l2*prod((q-3)/(q-2)) + l3*prod((q-4)/(q-2)) - ..., primes q in [base, p]";

impl<S: Scalar> ModelCoefficients<S> {
    /// Alternating-sign presentation `l_m`.
    pub fn table_values(&self) -> Vec<S> {
        self.alphas
            .iter()
            .enumerate()
            .map(|(i, a)| if i % 2 == 0 { a.clone() } else { -a.clone() })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Component `v_j` of the shared eigenvector for eigenvalue index `m`
/// (both 1-indexed): `(-1)^(j-1) * C(m-1, j-1)`.
pub fn eigenvector_component<S: Scalar>(m: usize, j: usize) -> S {
    if j > m {
        return S::zero();
    }
    let c = binomial(m - 1, j - 1);
    let v = S::from_count_ratio(&c, &BigUint::one());
    if (j - 1).is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// Expands the model's effective starting vector in the shared eigenbasis.
///
/// The effective starting vector is `w_start` itself in general mode, and the
/// surrogate pre-image `M^-1(first_prime) * M_special(first_prime) * w_start`
/// in special mode, so that in both cases
/// `w_g(p_k#) = sum_m alpha_m * prod_{q in [first_prime, p_k]} (q-m-1)/(q-2) * v^(m)`.
pub fn coefficients<S: Scalar>(
    w_start: &PopulationVector<S>,
    first_step_mode: StepMode,
    first_prime: u64,
) -> Result<ModelCoefficients<S>> {
    require_successor(w_start.stage_prime, first_prime)?;
    check_step_mode(w_start.gap, first_prime, first_step_mode, w_start.surrogate)?;
    let effective = match first_step_mode {
        StepMode::General => w_start.entries.clone(),
        StepMode::Special => {
            let stepped = step(w_start, first_prime, StepMode::Special)?;
            back_step(&stepped, first_prime)?.entries
        }
    };

    // Back-substitution on the upper-triangular eigenvector matrix
    // V[j][m] = (-1)^(j-1) C(m-1, j-1); diagonal entries are +-1.
    let dim = effective.len();
    let mut alphas = vec![S::zero(); dim];
    for m in (1..=dim).rev() {
        let mut rhs = effective[m - 1].clone();
        for k in (m + 1)..=dim {
            rhs = rhs - eigenvector_component::<S>(k, m) * alphas[k - 1].clone();
        }
        alphas[m - 1] = rhs / eigenvector_component::<S>(m, m);
    }
    Ok(ModelCoefficients {
        gap: w_start.gap,
        base_prime: first_prime,
        alphas,
    })
}

/// Evaluates the closed form for `w_{g,1}(target#)` by the alternating
/// product formula; equal to the iterated-matrix top entry, exactly so in
/// rational mode.
pub fn evaluate_closed_form<S: Scalar>(
    model: &ModelCoefficients<S>,
    target_prime: u64,
) -> Result<S> {
    if !is_prime(target_prime) {
        return Err(Error::NotPrime(target_prime));
    }
    if target_prime < model.base_prime {
        return Err(Error::TargetBelowFirstStage {
            target: target_prime,
            first: model.base_prime,
        });
    }
    let mut products: Vec<S> = vec![S::one(); model.alphas.len()];
    for q in primes::primes_between(model.base_prime, target_prime) {
        for (m, prod) in products.iter_mut().enumerate() {
            let factor = S::from_ratio(q as i64 - (m as i64 + 1) - 1, q - 2);
            *prod = prod.clone() * factor;
        }
    }
    Ok(model
        .alphas
        .iter()
        .zip(&products)
        .fold(S::zero(), |acc, (a, p)| acc + a.clone() * p.clone()))
}

/// Applies the first step in the given mode, then general steps through
/// `target_prime`; returns the vector at every visited stage, first step
/// first.
pub fn iterate_to<S: Scalar>(
    w_start: &PopulationVector<S>,
    first_step_mode: StepMode,
    target_prime: u64,
) -> Result<Vec<PopulationVector<S>>> {
    let first_prime = primes::next_prime(w_start.stage_prime);
    if target_prime < first_prime {
        return Err(Error::TargetBelowFirstStage {
            target: target_prime,
            first: first_prime,
        });
    }
    if !is_prime(target_prime) {
        return Err(Error::NotPrime(target_prime));
    }
    let mut stages = Vec::new();
    let mut w = step(w_start, first_prime, first_step_mode)?;
    stages.push(w.clone());
    while w.stage_prime < target_prime {
        let next = primes::next_prime(w.stage_prime);
        w = step(&w, next, StepMode::General)?;
        stages.push(w.clone());
    }
    Ok(stages)
}

/// The same dynamics in exact integer-count form.
pub mod counts {
    use super::*;

    /// `n_j <- (p-j-1)*n_j + j*n_{j+1}` for a general stage at `p`.
    pub fn general_step(counts: &[BigUint], p: u64) -> Result<Vec<BigUint>> {
        let dim = counts.len() as u64;
        if dim > 0 && p < dim + 2 {
            return Err(Error::DimensionTooLarge {
                prime: p,
                j: (p - 1) as usize,
            });
        }
        Ok(step_with(counts, |j| p - j - 1))
    }

    /// `n_j <- (p-j)*n_j + j*n_{j+1}` for the special step where the gap is
    /// `2p`.
    pub fn special_step(counts: &[BigUint], p: u64) -> Result<Vec<BigUint>> {
        let dim = counts.len() as u64;
        if dim > 0 && p < dim {
            return Err(Error::DimensionTooLarge {
                prime: p,
                j: p as usize,
            });
        }
        Ok(step_with(counts, |j| p - j))
    }

    fn step_with(counts: &[BigUint], survive: impl Fn(u64) -> u64) -> Vec<BigUint> {
        (0..counts.len())
            .map(|i| {
                let j = i as u64 + 1;
                let mut n = &counts[i] * survive(j);
                if i + 1 < counts.len() {
                    n += &counts[i + 1] * j;
                }
                n
            })
            .collect()
    }
}
