// SPDX-License-Identifier: Apache-2.0

//! Public-matrix generators.
//!
//! Classic Blom uses a Vandermonde matrix whose column `i` is
//! `(1, n_i, n_i^2, ...)`. The modified scheme uses the leading rows of a
//! Sylvester Hadamard matrix with `-1` written as `q - 1`. Sylvester entries
//! have a closed form, `(-1)^popcount(r & c)` for zero-based `r, c`, so a node
//! can synthesize any peer's column without storing the matrix.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::field::{FieldMatrix, Prime};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VandermondeSpec {
    /// Number of rows (powers `0..m`).
    pub m: usize,
    pub q: Prime,
    /// Distinct nonzero evaluation points, one per column.
    pub points: Vec<u64>,
}

impl VandermondeSpec {
    /// Points `1, 2, ..., n`.
    pub fn consecutive(n: usize, m: usize, q: Prime) -> Self {
        VandermondeSpec {
            m,
            q,
            points: (1..=n as u64).collect(),
        }
    }
}

/// `m x N` matrix with entry `(r, c) = points[c]^r` (zero-based).
pub fn vandermonde(spec: &VandermondeSpec) -> Result<FieldMatrix> {
    let q = spec.q;
    let n = spec.points.len();
    if n as u64 > q.get() - 1 {
        return Err(Error::InvalidParameter(format!(
            "{n} distinct nonzero points do not exist mod {q}"
        )));
    }
    let mut seen = HashSet::with_capacity(n);
    for &x in &spec.points {
        if x == 0 || x >= q.get() {
            return Err(Error::InvalidParameter(format!(
                "evaluation point {x} is not a nonzero residue mod {q}"
            )));
        }
        if !seen.insert(x) {
            return Err(Error::DuplicatePoint(x));
        }
    }

    let mut out = FieldMatrix::zeros(spec.m, n);
    for (c, &x) in spec.points.iter().enumerate() {
        let mut power = 1 % q.get();
        for r in 0..spec.m {
            out.set(r, c, power);
            power = q.mul(power, x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HadamardSpec {
    /// Sylvester order, a power of two.
    pub order: usize,
    /// Leading rows kept as the public matrix.
    pub m: usize,
    pub q: Prime,
}

impl HadamardSpec {
    /// Smallest Sylvester order that gives every node of an `n`-node network
    /// its own column.
    pub fn for_network(n: usize, m: usize, q: Prime) -> Self {
        HadamardSpec {
            order: hadamard_order_for(n),
            m,
            q,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.order.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.order));
        }
        if self.m > self.order {
            return Err(Error::InvalidParameter(format!(
                "cannot keep {} rows of a Hadamard matrix of order {}",
                self.m, self.order
            )));
        }
        Ok(())
    }

    /// The leading `m` rows restricted to the first `n` columns.
    pub fn public_matrix(&self, n: usize) -> Result<FieldMatrix> {
        self.validate()?;
        if n > self.order {
            return Err(Error::ColumnOutOfRange {
                col: n,
                order: self.order,
            });
        }
        let mut out = FieldMatrix::zeros(self.m, n);
        for c in 0..n {
            for r in 0..self.m {
                out.set(r, c, sylvester_entry(r, c, self.q));
            }
        }
        Ok(out)
    }
}

pub fn hadamard_order_for(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

#[inline]
fn sylvester_entry(r: usize, c: usize, q: Prime) -> u64 {
    if (r & c).count_ones().is_multiple_of(2) {
        1 % q.get()
    } else {
        q.get() - 1
    }
}

/// The full `order x order` non-binary Sylvester Hadamard matrix.
pub fn nonbinary_hadamard(spec: &HadamardSpec) -> Result<FieldMatrix> {
    HadamardSpec { m: spec.order, ..*spec }.public_matrix(spec.order)
}

/// Rows `1..=m` of column `col` (one-based) of the non-binary Hadamard matrix
/// of the given order, computed without building the matrix.
pub fn hadamard_column(order: usize, col: usize, m: usize, q: Prime) -> Result<Vec<u64>> {
    HadamardSpec { order, m, q }.validate()?;
    if col == 0 || col > order {
        return Err(Error::ColumnOutOfRange { col, order });
    }
    Ok((0..m).map(|r| sylvester_entry(r, col - 1, q)).collect())
}
