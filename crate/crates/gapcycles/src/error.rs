use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by cycle construction, censuses and the population models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{found} is not the successor prime of {current}; expected {expected}")]
    NotSuccessorPrime {
        current: u64,
        found: u64,
        expected: u64,
    },

    #[error(
        "cycle for {prime} needs {required_gaps} gaps (about {required_bytes} bytes of \
         working memory), exceeding the {budget_bytes} byte budget"
    )]
    MemoryBudget {
        prime: u64,
        required_gaps: u128,
        required_bytes: u128,
        budget_bytes: u64,
    },

    #[error("gap {0} is odd; only even gaps occur in a cycle of gaps")]
    OddGap(u64),

    #[error("gap {gap} exceeds the cycle span {span}")]
    GapExceedsSpan { gap: u64, span: u128 },

    #[error("gap {gap} needs classification by end gaps; that is only meaningful for gaps >= 6")]
    GapTooSmallForClasses { gap: u64 },

    #[error(
        "gap {gap} equals 2*{next_prime}; the general step does not apply at this stage, \
         use the special step instead"
    )]
    RequiresSpecialStep { gap: u64, next_prime: u64 },

    #[error(
        "special step at {next_prime} applies only to gap 2*{next_prime} = {expected}, got gap {gap}"
    )]
    SpecialStepGapMismatch {
        gap: u64,
        next_prime: u64,
        expected: u64,
    },

    #[error("special step applies to census populations, not to a surrogate starting point")]
    SpecialStepOnSurrogate,

    #[error(
        "gap {gap} is beyond the modeling threshold at starting stage {p0}: the exact models \
         cover even gaps up to 2*{p1}+2 = {max_gap}"
    )]
    BeyondModelThreshold {
        gap: u64,
        p0: u64,
        p1: u64,
        max_gap: u64,
    },

    #[error(
        "endpoint-class step for gap {gap} requires gap = 2*{p1}+2 = {expected} at stage {p1}"
    )]
    SubpopGapMismatch { gap: u64, p1: u64, expected: u64 },

    #[error(
        "matrix dimension {j} is too large for prime {prime}: diagonal entry ({j},{j}) = \
         ({prime}-{j}-1)/({prime}-2) would be nonpositive"
    )]
    DimensionTooLarge { prime: u64, j: usize },

    #[error("cannot normalize by a zero gap-2 population")]
    ZeroGapTwoCount,

    #[error("population vector for gap {gap} has dimension {have}, expected {want}")]
    DimensionMismatch { gap: u64, have: usize, want: usize },

    #[error("target prime {target} is below the first model stage {first}")]
    TargetBelowFirstStage { target: u64, first: u64 },

    #[error("back step takes the matrix prime {prime} of the step that produced the vector, \
             which is at stage {stage}")]
    BackStepStageMismatch { prime: u64, stage: u64 },

    #[error(
        "class census is inconsistent: class {class} has {count} terms of length {j}, \
         impossible for gap {gap} at stage {p1}"
    )]
    InvalidClassCensus {
        class: char,
        j: u32,
        count: String,
        gap: u64,
        p1: u64,
    },

    #[error("invalid cycle for prime {prime}: {what} is {found}, expected {expected}")]
    InvalidCycle {
        prime: u64,
        what: &'static str,
        found: String,
        expected: String,
    },

    #[error(transparent)]
    CycleFile(#[from] CycleFileError),
}

/// Failures while reading or writing the binary cycle cache format.
#[derive(Debug, Error)]
pub enum CycleFileError {
    #[error("bad magic: expected \"GAPC\", found {found:02x?}")]
    MagicMismatch { found: [u8; 4] },

    #[error("unsupported cycle file version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported gap width {0} (only 1 and 2 byte gaps exist)")]
    UnsupportedWidth(u8),

    #[error("file truncated: needed {needed} more bytes")]
    Truncated { needed: u64 },

    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
