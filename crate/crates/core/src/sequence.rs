//! Fixed rank reference sets: an equispaced grid in one dimension, Halton
//! low-discrepancy points otherwise.

use crate::error::{Error, Result};

/// A fixed set of reference points in the unit cube, in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    /// Dimension of every point.
    pub dim: usize,
    /// The points, each with `dim` coordinates in [0, 1].
    pub points: Vec<Vec<f64>>,
    /// Radical-inverse bases, one per dimension (empty when `dim == 1`).
    pub bases: Vec<u64>,
}

/// Base-`base` radical inverse of `index`: the base-`base` digits of the
/// index mirrored about the radix point.
///
/// The mirrored digit string is built as an exact integer numerator over
/// `base^digits`, so the only rounding is the final division. This keeps
/// large indices drift-free.
pub fn radical_inverse(index: u64, base: u64) -> Result<f64> {
    if index == 0 || base < 2 {
        return Err(Error::DegenerateRadicalInverse { index, base });
    }
    let mut remaining = index as u128;
    let base = base as u128;
    let mut numerator: u128 = 0;
    let mut denominator: u128 = 1;
    while remaining > 0 {
        numerator = numerator * base + remaining % base;
        denominator *= base;
        remaining /= base;
    }
    Ok(numerator as f64 / denominator as f64)
}

/// First `count` points of the rank reference set in dimension `dim`.
///
/// Dimension 1 is the grid `{i/count : 1 <= i <= count}`. Higher dimensions
/// use the Halton sequence with the first `dim` primes as bases, indexed
/// from 1 so the origin never appears. No scrambling, no leapfrogging: the
/// set only depends on `(count, dim)`.
pub fn reference_set(count: usize, dim: usize) -> Result<ReferenceSet> {
    if count == 0 || dim == 0 {
        return Err(Error::EmptyReferenceSet { count, dim });
    }
    if dim == 1 {
        let denom = count as f64;
        let points = (1..=count).map(|i| vec![i as f64 / denom]).collect();
        return Ok(ReferenceSet {
            dim,
            points,
            bases: Vec::new(),
        });
    }
    let bases = first_primes(dim);
    let mut points = Vec::with_capacity(count);
    for index in 1..=count as u64 {
        let point = bases
            .iter()
            .map(|&base| radical_inverse(index, base))
            .collect::<Result<Vec<f64>>>()?;
        points.push(point);
    }
    Ok(ReferenceSet { dim, points, bases })
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate: u64 = 2;
    while primes.len() < count {
        let is_prime = primes
            .iter()
            .take_while(|&&p| p * p <= candidate)
            .all(|&p| candidate % p != 0);
        if is_prime {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}
