//! Cycles of gaps at the stages of Eratosthenes sieve, and exact models for
//! the populations of gaps and their driving terms across those stages.
//!
//! At the stage of the sieve that has removed multiples of every prime up to
//! `p`, the surviving residues form a cycle of gaps `G(p#)` of length `phi(p#)`
//! and span `p#`. The crate provides:
//!
//! * [`cycle`] — construction of `G(p#)` by the concatenate-and-fuse recursion,
//!   with a direct sieve as an independent ground-truth oracle, plus a binary
//!   cache format;
//! * [`census`] — counts of driving terms (runs of consecutive gaps summing to
//!   a target gap `g`) by length, and their classification by end gaps;
//! * [`popmodel`] — the banded transition matrices advancing relative
//!   populations one stage, exact in big-rational arithmetic, with the special
//!   first step for `g = 2*p1`, surrogate starting points, and the closed-form
//!   coefficient expansion;
//! * [`subpop`] — the four-way endpoint-class iteration that extends exact
//!   modeling to `g = 2*p1 + 2`;
//! * [`report`] — CSV/JSON report shapes shared by the command-line harness.
//!
//! The data-parallel paths (cycle construction, sieving, census scans) run on
//! rayon when the default `parallel` feature is enabled; every operation also
//! has an always-compiled sequential implementation.

pub mod census;
pub mod cycle;
pub mod cycle_io;
mod error;
pub mod popmodel;
pub mod primes;
pub mod report;
pub mod subpop;

pub use error::{CycleFileError, Error, Result};

/// Gap positions are anchored at residue 1: the first gap of `G(p#)` spans
/// from 1 to the next integer coprime to `p#`.
pub const ANCHOR_CONVENTION: &str = "residue-1";
/// Driving terms are counted cyclically: windows wrapping past the end of the
/// gap sequence count exactly once, owned by their start index.
pub const COUNTING_CONVENTION: &str = "cyclic";

/// Sizes the global worker pool. Returns `false` when the pool was already
/// initialized or the crate was built without the `parallel` feature.
pub fn configure_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}
