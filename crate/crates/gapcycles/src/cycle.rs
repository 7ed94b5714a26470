//! Cycles of gaps `G(p#)` and the two independent ways to build them.
//!
//! The recursion from `G(p_k#)` to `G(p_{k+1}#)` concatenates `p_{k+1}` copies
//! of the gap sequence and then fuses one pair of adjacent gaps for each
//! element `c` of the old cycle: with the cycle anchored at residue 1, the
//! element `p_{k+1} * c` of the widened lattice is struck, which merges the
//! two gaps meeting at running-sum coordinate `p_{k+1} * c - 1`. There are
//! exactly `phi(p_k#)` fusions, spaced at least `2 * p_{k+1}` apart, so no two
//! fusions ever touch the same or adjacent gap pairs.
//!
//! [`direct_sieve`] builds the same cycle from scratch by marking multiples of
//! every prime up to `p` and reading off the differences between survivors in
//! `(1, p# + 1]`. The two constructions must agree bit for bit; that equality
//! is the ground truth the rest of the crate is tested against.
//!
//! Construction partitions the concatenated index range into contiguous
//! chunks. Fusion coordinates are computed per chunk from the running-sum
//! arithmetic alone, so chunks are independent; a fused pair straddling a
//! chunk boundary is emitted as a carry that the join step folds into the
//! previous chunk exactly once.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::primes::{self, is_prime, require_successor};
use crate::{Error, Result};

/// Working-memory ceiling for cycle construction.
///
/// The default of 1 GiB admits every cycle through `G(23#)` (about 36.5M
/// gaps) and refuses `G(29#)` and beyond; raise it explicitly for stress
/// runs.
#[derive(Clone, Copy, Debug)]
pub struct MemoryBudget {
    pub max_bytes: u64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget {
            max_bytes: 1 << 30,
        }
    }
}

impl MemoryBudget {
    pub const UNLIMITED: MemoryBudget = MemoryBudget {
        max_bytes: u64::MAX,
    };

    fn admit(&self, prime: u64, required_gaps: u128, required_bytes: u128) -> Result<()> {
        if required_bytes > self.max_bytes as u128 {
            return Err(Error::MemoryBudget {
                prime,
                required_gaps,
                required_bytes,
                budget_bytes: self.max_bytes,
            });
        }
        Ok(())
    }
}

/// Gap storage: one byte per gap, widened to two if a gap of 256 or more ever
/// appears. No constructible stage gets near that bound (the max gap of
/// `G(29#)` is still well under 100), but the promotion path is kept honest.
#[derive(Clone, PartialEq, Eq)]
pub enum Gaps {
    Narrow(Vec<u8>),
    Wide(Vec<u16>),
}

impl Gaps {
    pub fn len(&self) -> usize {
        match self {
            Gaps::Narrow(v) => v.len(),
            Gaps::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Storage width in bytes (1 or 2).
    pub fn width(&self) -> u8 {
        match self {
            Gaps::Narrow(_) => 1,
            Gaps::Wide(_) => 2,
        }
    }

    pub fn get(&self, i: usize) -> u16 {
        match self {
            Gaps::Narrow(v) => v[i] as u16,
            Gaps::Wide(v) => v[i],
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = u16> + '_> {
        match self {
            Gaps::Narrow(v) => Box::new(v.iter().map(|&g| g as u16)),
            Gaps::Wide(v) => Box::new(v.iter().copied()),
        }
    }
}

/// One fusion event in a recursion step, in pre-fusion coordinates.
///
/// `absolute_offset` is the running-sum coordinate of the fusion point
/// measured from the anchor; `copy_index` is the concatenated copy whose span
/// interval contains that point; `position_in_copy` is the index of the left
/// gap of the fused pair within its own copy (which is the preceding copy
/// exactly when the fusion point falls on a copy boundary).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FusionTrace {
    pub copy_index: u64,
    pub position_in_copy: u64,
    pub absolute_offset: u64,
}

/// The cycle of gaps `G(p#)`: differences between consecutive integers
/// coprime to `p#`, anchored at residue 1.
#[derive(Clone, PartialEq, Eq)]
pub struct GapCycle {
    prime: u64,
    span: u64,
    gaps: Gaps,
}

impl std::fmt::Debug for GapCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GapCycle")
            .field("prime", &self.prime)
            .field("span", &self.span)
            .field("len", &self.gaps.len())
            .finish()
    }
}

impl GapCycle {
    /// Stage prime `p`.
    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Number of gaps, `phi(p#)`.
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Span of the cycle, `p#`, as an unbounded integer.
    pub fn span(&self) -> BigUint {
        BigUint::from(self.span)
    }

    pub(crate) fn span_u64(&self) -> u64 {
        self.span
    }

    pub fn gaps(&self) -> &Gaps {
        &self.gaps
    }

    pub fn gap(&self, i: usize) -> u16 {
        self.gaps.get(i)
    }

    pub fn iter_gaps(&self) -> impl Iterator<Item = u16> + '_ {
        self.gaps.iter()
    }

    pub fn max_gap(&self) -> u16 {
        self.gaps.iter().max().unwrap_or(0)
    }

    /// Assembles a cycle from raw parts, enforcing the span and length
    /// invariants. Used by the cache loader.
    pub(crate) fn from_parts(prime: u64, gaps: Gaps) -> Result<GapCycle> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        let span_big = primes::primorial(prime);
        let span = u64::try_from(&span_big).map_err(|_| Error::MemoryBudget {
            prime,
            required_gaps: 0,
            required_bytes: u128::MAX,
            budget_bytes: u64::MAX,
        })?;
        let cycle = GapCycle { prime, span, gaps };
        cycle.check_length()?;
        Ok(cycle)
    }

    fn check_length(&self) -> Result<()> {
        let phi = primes::phi_primorial(self.prime);
        if BigUint::from(self.gaps.len()) != phi {
            return Err(Error::InvalidCycle {
                prime: self.prime,
                what: "length",
                found: self.gaps.len().to_string(),
                expected: phi.to_string(),
            });
        }
        Ok(())
    }

    /// Full invariant check: length equals `phi(p#)`, gap sum equals `p#`,
    /// every gap is even and at least 2, and the cycle is symmetric (the gap
    /// sequence without its final closing gap reads the same both ways).
    pub fn validate(&self) -> Result<()> {
        self.check_length()?;
        let sum = match &self.gaps {
            Gaps::Narrow(v) => chunked_sum(v, |&g| g as u64),
            Gaps::Wide(v) => chunked_sum(v, |&g| g as u64),
        };
        if sum != self.span_big_expected() {
            return Err(Error::InvalidCycle {
                prime: self.prime,
                what: "gap sum",
                found: sum.to_string(),
                expected: self.span_big_expected().to_string(),
            });
        }
        if let Some(bad) = self.gaps.iter().find(|&g| g < 2 || g % 2 != 0) {
            return Err(Error::InvalidCycle {
                prime: self.prime,
                what: "gap value",
                found: bad.to_string(),
                expected: "an even gap >= 2".to_string(),
            });
        }
        if !self.is_symmetric() {
            return Err(Error::InvalidCycle {
                prime: self.prime,
                what: "symmetry",
                found: "asymmetric".to_string(),
                expected: "gaps[0..len-1] palindromic".to_string(),
            });
        }
        Ok(())
    }

    fn span_big_expected(&self) -> BigUint {
        primes::primorial(self.prime)
    }

    /// The cycle is symmetric about its closing gap: `gaps[0..len-1]` read
    /// forward equals the same range read backward.
    pub fn is_symmetric(&self) -> bool {
        let n = self.gaps.len();
        if n < 2 {
            return true;
        }
        let head = n - 1;
        (0..head / 2).all(|i| self.gaps.get(i) == self.gaps.get(head - 1 - i))
    }
}

fn chunked_sum<T: Sync, F: Fn(&T) -> u64 + Sync>(v: &[T], f: F) -> BigUint {
    // Per-chunk u64 subtotals cannot overflow (chunk len * max gap << 2^64);
    // the grand total is accumulated unbounded.
    let mut total = BigUint::zero();
    for chunk in v.chunks(1 << 22) {
        let sub: u64 = chunk.iter().map(&f).sum();
        total += sub;
    }
    total
}

/// The base cycle `G(3#)`: gaps (4, 2) between 1, 5, 7 — the integers coprime
/// to 6 anchored at 1.
pub fn seed_cycle() -> GapCycle {
    GapCycle {
        prime: 3,
        span: 6,
        gaps: Gaps::Narrow(vec![4, 2]),
    }
}

// ---------------------------------------------------------------------------
// Recursion
// ---------------------------------------------------------------------------

trait GapElem: Copy + Eq + Send + Sync + 'static {
    fn as_u16(self) -> u16;
    fn of_u16(v: u16) -> Option<Self>;
}

impl GapElem for u8 {
    fn as_u16(self) -> u16 {
        self as u16
    }
    fn of_u16(v: u16) -> Option<Self> {
        u8::try_from(v).ok()
    }
}

impl GapElem for u16 {
    fn as_u16(self) -> u16 {
        self
    }
    fn of_u16(v: u16) -> Option<Self> {
        Some(v)
    }
}

/// Raised when a merged gap no longer fits the current storage width.
struct Promote;

struct ChunkOut<T> {
    /// Value to add to the final gap of the preceding chunk, when the first
    /// index of this chunk is a fused gap.
    carry: Option<u16>,
    gaps: Vec<T>,
    fusions: u64,
    traces: Vec<FusionTrace>,
}

/// Emits the fused gap run for concatenated indices `[i0, i1)`.
fn emit_chunk<T: GapElem>(
    old: &[T],
    prefix: &[u64],
    p: u64,
    span: u64,
    i0: u64,
    i1: u64,
    trace: bool,
) -> std::result::Result<ChunkOut<T>, Promote> {
    let len = old.len() as u64;
    let offset_of = |i: u64| -> u64 { (i / len) * span + prefix[(i % len) as usize] };
    let off0 = offset_of(i0);
    let off1 = offset_of(i1);

    // Fusion offsets are p*c - 1 for each element c = 1 + prefix[r'] of the
    // old cycle; restrict to those landing in [off0, off1).
    let c_lo = (off0 + p) / p;
    let c_hi = off1 / p;
    let mut src = prefix[..old.len()].partition_point(|&v| 1 + v < c_lo);

    let mut out: Vec<T> = Vec::with_capacity((i1 - i0) as usize);
    let mut carry = None;
    let mut fusions = 0u64;
    let mut traces = Vec::new();
    let mut cursor = i0;

    let copy_run = |out: &mut Vec<T>, from: u64, to: u64| {
        let mut at = from;
        while at < to {
            let base = (at % len) as usize;
            let run = ((to - at).min(len - base as u64)) as usize;
            out.extend_from_slice(&old[base..base + run]);
            at += run as u64;
        }
    };

    while src < old.len() {
        let c = 1 + prefix[src];
        if c > c_hi {
            break;
        }
        let f = p * c - 1;
        let m = f / span;
        let rem = f % span;
        let r = prefix[..old.len()]
            .binary_search(&rem)
            .expect("fusion offset must land on a running-sum coordinate");
        let pos = m * len + r as u64;
        debug_assert!(pos >= i0 && pos < i1);

        copy_run(&mut out, cursor, pos);
        let removed = old[r].as_u16();
        match out.last_mut() {
            Some(last) => {
                let merged = last.as_u16().checked_add(removed).ok_or(Promote)?;
                *last = T::of_u16(merged).ok_or(Promote)?;
            }
            None => {
                debug_assert!(carry.is_none(), "at most one boundary fusion per chunk");
                carry = Some(removed);
            }
        }
        if trace {
            traces.push(FusionTrace {
                copy_index: m,
                position_in_copy: (pos - 1) % len,
                absolute_offset: f,
            });
        }
        fusions += 1;
        cursor = pos + 1;
        src += 1;
    }
    copy_run(&mut out, cursor, i1);

    Ok(ChunkOut {
        carry,
        gaps: out,
        fusions,
        traces,
    })
}

fn chunk_ranges(total: u64, parallel: bool) -> Vec<(u64, u64)> {
    let n_chunks = if parallel {
        #[cfg(feature = "parallel")]
        {
            let per_thread = 4u64;
            let target = rayon::current_num_threads() as u64 * per_thread;
            target.clamp(1, (total / (1 << 16)).max(1))
        }
        #[cfg(not(feature = "parallel"))]
        {
            1
        }
    } else {
        1
    };
    let step = total.div_ceil(n_chunks);
    (0..n_chunks)
        .map(|k| (k * step, ((k + 1) * step).min(total)))
        .filter(|(a, b)| a < b)
        .collect()
}

fn recurse_typed<T: GapElem>(
    old: &[T],
    p: u64,
    span: u64,
    trace: bool,
    parallel: bool,
) -> std::result::Result<(Vec<T>, Vec<FusionTrace>), Promote> {
    let len = old.len() as u64;
    let mut prefix = Vec::with_capacity(old.len() + 1);
    let mut acc = 0u64;
    prefix.push(0);
    for g in old {
        acc += g.as_u16() as u64;
        prefix.push(acc);
    }
    debug_assert_eq!(acc, span);

    let ranges = chunk_ranges(p * len, parallel);
    let chunks: Vec<ChunkOut<T>> = {
        #[cfg(feature = "parallel")]
        {
            if parallel && ranges.len() > 1 {
                use rayon::prelude::*;
                ranges
                    .par_iter()
                    .map(|&(i0, i1)| emit_chunk(old, &prefix, p, span, i0, i1, trace))
                    .collect::<std::result::Result<Vec<_>, _>>()?
            } else {
                ranges
                    .iter()
                    .map(|&(i0, i1)| emit_chunk(old, &prefix, p, span, i0, i1, trace))
                    .collect::<std::result::Result<Vec<_>, _>>()?
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            ranges
                .iter()
                .map(|&(i0, i1)| emit_chunk(old, &prefix, p, span, i0, i1, trace))
                .collect::<std::result::Result<Vec<_>, _>>()?
        }
    };

    let fusions: u64 = chunks.iter().map(|c| c.fusions).sum();
    assert_eq!(fusions, len, "one fusion per element of the old cycle");

    let new_len = (p - 1) * len;
    let mut gaps: Vec<T> = Vec::with_capacity(new_len as usize);
    let mut traces = Vec::with_capacity(if trace { old.len() } else { 0 });
    for chunk in chunks {
        if let Some(add) = chunk.carry {
            let last = gaps
                .last_mut()
                .expect("a boundary fusion cannot open the first chunk");
            let merged = last.as_u16().checked_add(add).ok_or(Promote)?;
            *last = T::of_u16(merged).ok_or(Promote)?;
        }
        gaps.extend_from_slice(&chunk.gaps);
        traces.extend_from_slice(&chunk.traces);
    }
    assert_eq!(gaps.len() as u64, new_len);
    Ok((gaps, traces))
}

fn recurse_impl(
    cycle: &GapCycle,
    next_prime: u64,
    trace: bool,
    budget: &MemoryBudget,
    parallel: bool,
) -> Result<(GapCycle, Vec<FusionTrace>)> {
    require_successor(cycle.prime, next_prime)?;
    let old_len = cycle.len() as u128;
    let new_len = (next_prime as u128 - 1) * old_len;
    let width = cycle.gaps.width() as u128;
    // Output + per-chunk buffers + running-sum table (+ traces when asked).
    let mut required = 2 * new_len * width + 8 * (old_len + 1);
    if trace {
        required += 24 * old_len;
    }
    budget.admit(next_prime, new_len, required)?;
    let span = cycle
        .span
        .checked_mul(next_prime)
        .ok_or(Error::MemoryBudget {
            prime: next_prime,
            required_gaps: new_len,
            required_bytes: u128::MAX,
            budget_bytes: budget.max_bytes,
        })?;

    let built = match &cycle.gaps {
        Gaps::Narrow(v) => match recurse_typed(v, next_prime, cycle.span, trace, parallel) {
            Ok((gaps, traces)) => (Gaps::Narrow(gaps), traces),
            Err(Promote) => {
                let wide: Vec<u16> = v.iter().map(|&g| g as u16).collect();
                let (gaps, traces) = recurse_typed(&wide, next_prime, cycle.span, trace, parallel)
                    .unwrap_or_else(|_| unreachable!("gaps cannot exceed u16 at any buildable stage"));
                (Gaps::Wide(gaps), traces)
            }
        },
        Gaps::Wide(v) => {
            let (gaps, traces) = recurse_typed(v, next_prime, cycle.span, trace, parallel)
                .unwrap_or_else(|_| unreachable!("gaps cannot exceed u16 at any buildable stage"));
            (Gaps::Wide(gaps), traces)
        }
    };

    Ok((
        GapCycle {
            prime: next_prime,
            span,
            gaps: built.0,
        },
        built.1,
    ))
}

/// Advances `G(p_k#)` to `G(p_{k+1}#)`.
pub fn recurse(cycle: &GapCycle, next_prime: u64, budget: &MemoryBudget) -> Result<GapCycle> {
    recurse_impl(cycle, next_prime, false, budget, true).map(|(c, _)| c)
}

/// Sequential fallback of [`recurse`], independent of the thread pool.
pub fn recurse_seq(cycle: &GapCycle, next_prime: u64, budget: &MemoryBudget) -> Result<GapCycle> {
    recurse_impl(cycle, next_prime, false, budget, false).map(|(c, _)| c)
}

/// [`recurse`] with the full fusion trace, one entry per element of the old
/// cycle, ascending by absolute offset.
pub fn recurse_with_trace(
    cycle: &GapCycle,
    next_prime: u64,
    budget: &MemoryBudget,
) -> Result<(GapCycle, Vec<FusionTrace>)> {
    recurse_impl(cycle, next_prime, true, budget, true)
}

/// Chains [`recurse`] from the seed up to `G(prime#)`.
pub fn build_to(prime: u64, budget: &MemoryBudget) -> Result<GapCycle> {
    if !is_prime(prime) || prime < 3 {
        return Err(Error::NotPrime(prime));
    }
    let mut cycle = seed_cycle();
    while cycle.prime() < prime {
        let next = primes::next_prime(cycle.prime());
        cycle = recurse(&cycle, next, budget)?;
    }
    Ok(cycle)
}

// ---------------------------------------------------------------------------
// Direct sieve oracle
// ---------------------------------------------------------------------------

struct SieveSegment {
    first: Option<u64>,
    last: u64,
    gaps: Vec<u8>,
    oversize: Vec<(usize, u64)>,
}

/// Marks composites and reads gaps for odd numbers `2*lo_idx+1 ..` covering
/// indices `[lo_idx, hi_idx)`; odd index `i` represents the number `2i + 1`.
fn sieve_segment(lo_idx: u64, hi_idx: u64, sieve_primes: &[u64]) -> SieveSegment {
    let n = (hi_idx - lo_idx) as usize;
    let mut marked = vec![0u64; n.div_ceil(64)];
    for &q in sieve_primes {
        let lo_num = 2 * lo_idx + 1;
        let mut mult = lo_num.div_ceil(q).max(1);
        if mult % 2 == 0 {
            mult += 1;
        }
        let mut idx = (q * mult - 1) / 2;
        while idx < hi_idx {
            let local = (idx - lo_idx) as usize;
            marked[local / 64] |= 1 << (local % 64);
            idx += q;
        }
    }

    let mut first = None;
    let mut last = 0u64;
    let mut gaps: Vec<u8> = Vec::new();
    let mut oversize = Vec::new();
    for (w, &word) in marked.iter().enumerate() {
        let mut free = !word;
        if w == marked.len() - 1 && !n.is_multiple_of(64) {
            free &= (1u64 << (n % 64)) - 1;
        }
        while free != 0 {
            let bit = free.trailing_zeros() as u64;
            free &= free - 1;
            let number = 2 * (lo_idx + w as u64 * 64 + bit) + 1;
            match first {
                None => first = Some(number),
                Some(_) => {
                    let gap = number - last;
                    match u8::try_from(gap) {
                        Ok(g) => gaps.push(g),
                        Err(_) => {
                            oversize.push((gaps.len(), gap));
                            gaps.push(0);
                        }
                    }
                }
            }
            last = number;
        }
    }
    SieveSegment {
        first,
        last,
        gaps,
        oversize,
    }
}

fn direct_sieve_impl(prime: u64, budget: &MemoryBudget, parallel: bool) -> Result<GapCycle> {
    if !is_prime(prime) || prime < 3 {
        return Err(Error::NotPrime(prime));
    }
    let span_big = primes::primorial(prime);
    let phi_big = primes::phi_primorial(prime);
    let span = u64::try_from(&span_big).map_err(|_| Error::MemoryBudget {
        prime,
        required_gaps: 0,
        required_bytes: u128::MAX,
        budget_bytes: budget.max_bytes,
    })?;
    let phi = u128::try_from(&phi_big).unwrap_or(u128::MAX);
    // Bit array over odds plus the gap output (and its transient copy).
    let required = (span as u128 + 2) / 16 + 2 * phi;
    budget.admit(prime, phi, required)?;

    let sieve_primes = primes::primes_between(3, prime);
    // Odd index i <-> number 2i + 1; cover (0, span + 1], i.e. indices
    // [0, span/2 + 1).
    let total_idx = span / 2 + 1;
    let seg_len: u64 = 1 << 21;
    let bounds: Vec<(u64, u64)> = (0..total_idx.div_ceil(seg_len))
        .map(|k| (k * seg_len, ((k + 1) * seg_len).min(total_idx)))
        .collect();

    let segments: Vec<SieveSegment> = {
        #[cfg(feature = "parallel")]
        {
            if parallel && bounds.len() > 1 {
                use rayon::prelude::*;
                bounds
                    .par_iter()
                    .map(|&(lo, hi)| sieve_segment(lo, hi, &sieve_primes))
                    .collect()
            } else {
                bounds
                    .iter()
                    .map(|&(lo, hi)| sieve_segment(lo, hi, &sieve_primes))
                    .collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = parallel;
            bounds
                .iter()
                .map(|&(lo, hi)| sieve_segment(lo, hi, &sieve_primes))
                .collect()
        }
    };

    let mut narrow: Vec<u8> = Vec::with_capacity(phi.min(usize::MAX as u128) as usize);
    let mut wide: Option<Vec<u16>> = None;
    let mut prev_last: Option<u64> = None;
    let push_gap = |narrow: &mut Vec<u8>, wide: &mut Option<Vec<u16>>, gap: u64| {
        let g16 = u16::try_from(gap).expect("gaps cannot exceed u16 at any buildable stage");
        match wide {
            Some(w) => w.push(g16),
            None => match u8::try_from(gap) {
                Ok(g) => narrow.push(g),
                Err(_) => {
                    let mut w: Vec<u16> = narrow.iter().map(|&g| g as u16).collect();
                    w.push(g16);
                    narrow.clear();
                    *wide = Some(w);
                }
            },
        }
    };
    for seg in &segments {
        let Some(first) = seg.first else { continue };
        if let Some(prev) = prev_last {
            push_gap(&mut narrow, &mut wide, first - prev);
        } else {
            debug_assert_eq!(first, 1, "residue 1 anchors the cycle");
        }
        if seg.oversize.is_empty() {
            match &mut wide {
                Some(w) => w.extend(seg.gaps.iter().map(|&g| g as u16)),
                None => narrow.extend_from_slice(&seg.gaps),
            }
        } else {
            let mut over = seg.oversize.iter().peekable();
            for (i, &g) in seg.gaps.iter().enumerate() {
                let gap = match over.peek() {
                    Some(&&(oi, og)) if oi == i => {
                        over.next();
                        og
                    }
                    _ => g as u64,
                };
                push_gap(&mut narrow, &mut wide, gap);
            }
        }
        prev_last = Some(seg.last);
    }
    debug_assert_eq!(prev_last, Some(span + 1));

    let gaps = match wide {
        Some(w) => Gaps::Wide(w),
        None => Gaps::Narrow(narrow),
    };
    let cycle = GapCycle { prime, span, gaps };
    cycle.check_length()?;
    Ok(cycle)
}

/// Ground-truth construction of `G(p#)`: enumerate the integers in
/// `(1, p# + 1]` coprime to `p#` and emit consecutive differences, anchored
/// at 1. Must agree bit for bit with the recursion.
pub fn direct_sieve(prime: u64, budget: &MemoryBudget) -> Result<GapCycle> {
    direct_sieve_impl(prime, budget, true)
}

/// Sequential fallback of [`direct_sieve`].
pub fn direct_sieve_seq(prime: u64, budget: &MemoryBudget) -> Result<GapCycle> {
    direct_sieve_impl(prime, budget, false)
}

// ---------------------------------------------------------------------------
// Rotation equivalence
// ---------------------------------------------------------------------------

/// Finds `k` such that `b` equals `a` rotated left by `k`, if any.
///
/// Anchored equality is the primary comparison everywhere; this helper exists
/// so tests stay meaningful under a different anchor convention.
pub fn rotation_offset(a: &GapCycle, b: &GapCycle) -> Option<usize> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    if n == 0 {
        return Some(0);
    }
    let pat: Vec<u16> = b.iter_gaps().collect();
    let txt: Vec<u16> = a.iter_gaps().collect();

    // KMP over the pattern, scanning the doubled text.
    let mut fail = vec![0u32; n];
    let mut k = 0usize;
    for i in 1..n {
        while k > 0 && pat[i] != pat[k] {
            k = fail[k - 1] as usize;
        }
        if pat[i] == pat[k] {
            k += 1;
        }
        fail[i] = k as u32;
    }
    let mut m = 0usize;
    for i in 0..2 * n - 1 {
        let t = txt[i % n];
        while m > 0 && t != pat[m] {
            m = fail[m - 1] as usize;
        }
        if t == pat[m] {
            m += 1;
        }
        if m == n {
            return Some((i + 1 - n) % n);
        }
    }
    None
}
