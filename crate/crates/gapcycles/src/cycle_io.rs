//! Binary cache format for cycles of gaps.
//!
//! Layout (little-endian): magic `"GAPC"`, format version `u16 = 1`, prime
//! `u64`, gap width in bytes `u8` (1 or 2), gap count `u64`, the gap array,
//! then a CRC-32 (IEEE) of the gap array bytes. Span and `phi` are recomputed
//! on load, never stored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::BigUint;

use crate::cycle::{GapCycle, Gaps};
use crate::error::CycleFileError;
use crate::primes;
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"GAPC";
const VERSION: u16 = 1;

/// Controls how much of the load-time validation runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Skip the full gap-sum check for cycles with more gaps than this.
    /// `None` always verifies the sum.
    pub skip_sum_check_above: Option<u64>,
}

pub fn save_cycle(cycle: &GapCycle, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(CycleFileError::Io)?;
    let mut w = BufWriter::new(file);
    let mut write =
        |buf: &[u8]| -> Result<()> { w.write_all(buf).map_err(|e| CycleFileError::Io(e).into()) };
    write(&MAGIC)?;
    write(&VERSION.to_le_bytes())?;
    write(&cycle.prime().to_le_bytes())?;
    write(&[cycle.gaps().width()])?;
    write(&(cycle.len() as u64).to_le_bytes())?;

    let mut crc = crc32fast::Hasher::new();
    match cycle.gaps() {
        Gaps::Narrow(v) => {
            crc.update(v);
            write(v)?;
        }
        Gaps::Wide(v) => {
            for chunk in v.chunks(1 << 20) {
                let bytes: Vec<u8> = chunk.iter().flat_map(|g| g.to_le_bytes()).collect();
                crc.update(&bytes);
                write(&bytes)?;
            }
        }
    }
    write(&crc.finalize().to_le_bytes())?;
    w.flush().map_err(CycleFileError::Io)?;
    Ok(())
}

pub fn load_cycle(path: &Path) -> Result<GapCycle> {
    load_cycle_with(path, &LoadOptions::default())
}

pub fn load_cycle_with(path: &Path, opts: &LoadOptions) -> Result<GapCycle> {
    let file = File::open(path).map_err(CycleFileError::Io)?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, 4)?;
    if magic != MAGIC {
        return Err(CycleFileError::MagicMismatch { found: magic }.into());
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(CycleFileError::UnsupportedVersion(version).into());
    }
    let prime = u64::from_le_bytes(read_array(&mut r)?);
    let width = read_array::<1>(&mut r)?[0];
    let count = u64::from_le_bytes(read_array(&mut r)?);
    let count_usize = usize::try_from(count).map_err(|_| CycleFileError::Truncated {
        needed: count,
    })?;

    let byte_len = count_usize
        .checked_mul(width as usize)
        .ok_or(CycleFileError::Truncated { needed: count })?;
    let mut raw = vec![0u8; byte_len];
    read_exact(&mut r, &mut raw, byte_len as u64)?;

    let stored = u32::from_le_bytes(read_array(&mut r)?);
    let computed = crc32fast::hash(&raw);
    if stored != computed {
        return Err(CycleFileError::ChecksumMismatch { stored, computed }.into());
    }

    let gaps = match width {
        1 => Gaps::Narrow(raw),
        2 => Gaps::Wide(
            raw.chunks_exact(2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]))
                .collect(),
        ),
        other => return Err(CycleFileError::UnsupportedWidth(other).into()),
    };

    let cycle = GapCycle::from_parts(prime, gaps)?;

    let check_sum = match opts.skip_sum_check_above {
        Some(limit) => count <= limit,
        None => true,
    };
    if check_sum {
        // u64 partial sums folded into an unbounded total before any
        // overflow risk.
        let mut total = BigUint::ZERO;
        let mut acc: u64 = 0;
        for g in cycle.iter_gaps() {
            if acc > u64::MAX - u64::from(u16::MAX) {
                total += acc;
                acc = 0;
            }
            acc += u64::from(g);
        }
        total += acc;
        let expected = primes::primorial(prime);
        if total != expected {
            return Err(Error::InvalidCycle {
                prime,
                what: "gap sum",
                found: total.to_string(),
                expected: expected.to_string(),
            });
        }
    }
    Ok(cycle)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], needed: u64) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            CycleFileError::Truncated { needed }.into()
        } else {
            Error::CycleFile(CycleFileError::Io(e))
        }
    })
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    read_exact(r, &mut buf, N as u64)?;
    Ok(buf)
}
