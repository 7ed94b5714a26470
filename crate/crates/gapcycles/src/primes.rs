//! Small prime utilities: deterministic primality for `u64`, successor and
//! predecessor primes, primorials and the totient of a primorial.
//!
//! Primorials and totients are computed over unbounded integers; spans beyond
//! `u64` are representable even though such cycles cannot be materialized.

use num_bigint::BigUint;
use num_traits::One;

use crate::{Error, Result};

/// Deterministic Miller-Rabin for the full `u64` range.
///
/// The base set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to be
/// exact for all integers below 3.3 * 10^24.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Least prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    loop {
        if is_prime(c) {
            return c;
        }
        c += 1;
    }
}

/// Greatest prime strictly less than `n`, if any.
pub fn prev_prime(n: u64) -> Option<u64> {
    let mut c = n.checked_sub(1)?;
    while c >= 2 {
        if is_prime(c) {
            return Some(c);
        }
        c -= 1;
    }
    None
}

/// Validates that `found` is the successor prime of `current`.
pub fn require_successor(current: u64, found: u64) -> Result<()> {
    if !is_prime(found) {
        return Err(Error::NotPrime(found));
    }
    let expected = next_prime(current);
    if found != expected {
        return Err(Error::NotSuccessorPrime {
            current,
            found,
            expected,
        });
    }
    Ok(())
}

/// All primes `q` with `lo <= q <= hi`, ascending.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = if lo <= 2 { 2 } else { lo };
    if q == 2 {
        out.push(2);
        q = 3;
    }
    if q % 2 == 0 {
        q += 1;
    }
    while q <= hi {
        if is_prime(q) {
            out.push(q);
        }
        q += 2;
    }
    out
}

/// The primorial `p#`: product of all primes up to and including `p`.
pub fn primorial(p: u64) -> BigUint {
    primes_between(2, p)
        .into_iter()
        .fold(BigUint::one(), |acc, q| acc * q)
}

/// `phi(p#)`: the number of gaps in the cycle `G(p#)`, equal to the product
/// of `q - 1` over all primes `q <= p`.
pub fn phi_primorial(p: u64) -> BigUint {
    primes_between(2, p)
        .into_iter()
        .fold(BigUint::one(), |acc, q| acc * (q - 1))
}
