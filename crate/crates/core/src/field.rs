// SPDX-License-Identifier: Apache-2.0

//! Arithmetic over a prime field GF(q).
//!
//! Elements are plain `u64` values holding the least nonnegative residue.
//! Every operation reduces eagerly, so any matrix produced here has all of
//! its entries in `[0, q)`. Dot products accumulate in `u128` before the
//! final reduction, which keeps `(q-1)^2 * len` exact for any `q < 2^32`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic trial division up to `sqrt(n)`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// A validated prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::ModulusTooSmall(q));
        }
        if q > u32::MAX as u64 {
            return Err(Error::InvalidParameter(format!(
                "modulus q={q} exceeds the supported 32-bit range"
            )));
        }
        if !is_prime(q) {
            return Err(Error::CompositeModulus(q));
        }
        Ok(Prime(q))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        x % self.0
    }

    /// Maps a signed integer to its least nonnegative residue.
    pub fn reduce_signed(self, x: i64) -> u64 {
        x.rem_euclid(self.0 as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.0
    }

    pub fn pow(self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.0;
        let mut b = base % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self, a: u64) -> Result<u64> {
        let a = a % self.0;
        if a == 0 {
            return Err(Error::NotInvertible { value: a, q: self.0 });
        }
        let (mut r0, mut r1) = (self.0 as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_signed(t0))
    }

    /// Bits needed to hold one element, i.e. `ceil(log2 q)`.
    pub fn element_bits(self) -> u32 {
        64 - (self.0 - 1).leading_zeros()
    }

    /// Reduces an unreduced dot product.
    #[inline]
    pub fn reduce_wide(self, x: u128) -> u64 {
        (x % self.0 as u128) as u64
    }

    pub fn dot(self, a: &[u64], b: &[u64]) -> Result<u64> {
        Ok(self.reduce_wide(dot_unreduced(a, b)?))
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Prime::new(q)
    }
}

impl From<Prime> for u64 {
    fn from(q: Prime) -> u64 {
        q.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Integer dot product before any modular reduction.
pub fn dot_unreduced(a: &[u64], b: &[u64]) -> Result<u128> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "dot product of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x as u128 * y as u128).sum())
}

/// Dense row-major matrix over GF(q).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl FieldMatrix {
    /// Builds a matrix from row-major entries, reducing each one mod `q`.
    pub fn new(rows: usize, cols: usize, entries: Vec<u64>, q: Prime) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let entries = entries.into_iter().map(|x| q.reduce(x)).collect();
        Ok(FieldMatrix { rows, cols, entries })
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R], q: Prime) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    r.len()
                )));
            }
            entries.extend(r.iter().map(|&x| q.reduce(x)));
        }
        Ok(FieldMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        FieldMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Zero-based access.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, c: usize, value: u64) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    /// Zero-based position of the first entry with `M[r][c] != M[c][r]`.
    pub fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if self.rows != self.cols {
            return Some((0, 0));
        }
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                if self.get(r, c) != self.get(c, r) {
                    return Some((r, c));
                }
            }
        }
        None
    }

    /// Matrix product with the row/column dot products accumulated exactly
    /// and reduced once.
    pub fn mul(&self, rhs: &FieldMatrix, q: Prime) -> Result<FieldMatrix> {
        let raw = self.mul_unreduced(rhs)?;
        Ok(FieldMatrix {
            rows: self.rows,
            cols: rhs.cols,
            entries: raw.into_iter().map(|x| q.reduce_wide(x)).collect(),
        })
    }

    /// Integer product of the residues, row-major, with no reduction.
    pub fn mul_unreduced(&self, rhs: &FieldMatrix) -> Result<Vec<u128>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![0u128; self.rows * rhs.cols];
        for r in 0..self.rows {
            let lhs_row = self.row(r);
            let acc = &mut out[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in lhs_row.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(rhs.row(k)) {
                    *slot += a as u128 * b as u128;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &FieldMatrix, q: Prime) -> Result<FieldMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(FieldMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| q.add(a, b))
                .collect(),
        })
    }

    /// Sub-matrix made of the given zero-based columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> FieldMatrix {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out.entries[r * cols.len() + k] = self.get(r, c);
            }
        }
        out
    }
}

/// One reduced row together with how it was assembled from the input rows.
#[derive(Debug, Clone)]
struct ReducedRow {
    values: Vec<u64>,
    combination: Vec<u64>,
}

/// Reduced row echelon form of a matrix, tracking for every reduced row the
/// linear combination of original rows that produced it.
///
/// Pivoting takes the first row with a nonzero entry in the current column.
#[derive(Debug, Clone)]
pub struct RowBasis {
    q: Prime,
    width: usize,
    source_rows: usize,
    pivots: Vec<usize>,
    basis: Vec<ReducedRow>,
    dependencies: Vec<Vec<u64>>,
}

impl RowBasis {
    pub fn new(m: &FieldMatrix, q: Prime) -> Self {
        let n = m.rows();
        let mut work: Vec<ReducedRow> = (0..n)
            .map(|r| {
                let mut combination = vec![0; n];
                combination[r] = 1;
                ReducedRow {
                    values: m.row(r).to_vec(),
                    combination,
                }
            })
            .collect();

        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..m.cols() {
            if rank == n {
                break;
            }
            let Some(found) = (rank..n).find(|&r| work[r].values[col] != 0) else {
                continue;
            };
            work.swap(rank, found);
            let scale = q.inv(work[rank].values[col]).expect("pivot is nonzero");
            scale_row(&mut work[rank], scale, q);
            let pivot_row = work[rank].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r == rank {
                    continue;
                }
                let factor = row.values[col];
                if factor != 0 {
                    subtract_scaled(row, &pivot_row, factor, q);
                }
            }
            pivots.push(col);
            rank += 1;
        }

        let dependencies = work.split_off(rank).into_iter().map(|r| r.combination).collect();
        RowBasis {
            q,
            width: m.cols(),
            source_rows: n,
            pivots,
            basis: work,
            dependencies,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Zero-based pivot columns in increasing order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Combinations of the input rows that sum to zero, one per rank deficit.
    pub fn dependencies(&self) -> &[Vec<u64>] {
        &self.dependencies
    }

    /// Expresses `target` as a combination of the input rows, if possible.
    pub fn express(&self, target: &[u64]) -> Result<Option<Vec<u64>>> {
        if target.len() != self.width {
            return Err(Error::DimensionMismatch(format!(
                "target of length {} against {} columns",
                target.len(),
                self.width
            )));
        }
        let q = self.q;
        let mut residual: Vec<u64> = target.iter().map(|&x| q.reduce(x)).collect();
        let mut combination = vec![0u64; self.source_rows];
        for (row, &pivot) in self.basis.iter().zip(&self.pivots) {
            let c = residual[pivot];
            if c == 0 {
                continue;
            }
            for (x, &v) in residual.iter_mut().zip(&row.values) {
                *x = q.sub(*x, q.mul(c, v));
            }
            for (x, &v) in combination.iter_mut().zip(&row.combination) {
                *x = q.add(*x, q.mul(c, v));
            }
        }
        Ok(residual.iter().all(|&x| x == 0).then_some(combination))
    }
}

fn scale_row(row: &mut ReducedRow, s: u64, q: Prime) {
    for x in row.values.iter_mut().chain(row.combination.iter_mut()) {
        *x = q.mul(*x, s);
    }
}

fn subtract_scaled(row: &mut ReducedRow, pivot: &ReducedRow, factor: u64, q: Prime) {
    for (x, &p) in row.values.iter_mut().zip(&pivot.values) {
        *x = q.sub(*x, q.mul(factor, p));
    }
    for (x, &p) in row.combination.iter_mut().zip(&pivot.combination) {
        *x = q.sub(*x, q.mul(factor, p));
    }
}

/// Row rank over GF(q).
pub fn rank(m: &FieldMatrix, q: Prime) -> usize {
    RowBasis::new(m, q).rank()
}

/// Returns coefficients `c` with `sum_k c[k] * constraints[k] == target`, or
/// `None` when the target lies outside the row space.
pub fn in_row_space(constraints: &FieldMatrix, target: &[u64], q: Prime) -> Result<Option<Vec<u64>>> {
    if target.len() != constraints.cols() {
        return Err(Error::DimensionMismatch(format!(
            "target of length {} against {} columns",
            target.len(),
            constraints.cols()
        )));
    }
    RowBasis::new(constraints, q).express(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn combine(rows: &FieldMatrix, coeffs: &[u64], q: Prime) -> Vec<u64> {
        let mut acc = vec![0; rows.cols()];
        for (k, &c) in coeffs.iter().enumerate() {
            for (a, &v) in acc.iter_mut().zip(rows.row(k)) {
                *a = q.add(*a, q.mul(c, v));
            }
        }
        acc
    }

    #[test]
    fn primality() {
        assert!(is_prime(31));
        assert!(!is_prime(1));
        assert!(is_prime(751));
        assert!(is_prime(1181));
        assert!(!is_prime(0));
        assert!(is_prime(2));
        assert!(!is_prime(10));
        assert!(!is_prime(961));
        let sieve_oracle = |n: u64| n >= 2 && (2..n).all(|d| !n.is_multiple_of(d));
        for n in 0..2000 {
            assert_eq!(is_prime(n), sieve_oracle(n), "n={n}");
        }
    }

    #[test]
    fn prime_rejects_composites() {
        assert_eq!(Prime::new(8), Err(Error::CompositeModulus(8)));
        assert_eq!(Prime::new(1), Err(Error::ModulusTooSmall(1)));
    }

    #[test]
    fn inverse_examples() {
        let q = p(31);
        assert_eq!(q.inv(1).unwrap(), 1);
        assert_eq!(q.inv(30).unwrap(), 30);
        let brute = (1..31).find(|b| 2 * b % 31 == 1).unwrap();
        assert_eq!(brute, 16);
        assert_eq!(q.inv(2).unwrap(), 16);
        assert!(matches!(q.inv(0), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn inverse_exhaustive() {
        for q in [2u64, 3, 5, 31, 751, 1009, 10007] {
            let f = p(q);
            for a in 1..q {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "a={a} q={q}");
            }
        }
    }

    #[test]
    fn element_bits() {
        assert_eq!(p(31).element_bits(), 5);
        assert_eq!(p(2).element_bits(), 1);
        assert_eq!(p(3).element_bits(), 2);
        assert_eq!(p(751).element_bits(), 10);
    }

    #[test]
    fn mul_small() {
        let q = p(31);
        let a = FieldMatrix::from_rows(&[[3u64]], q).unwrap();
        let b = FieldMatrix::from_rows(&[[4u64]], q).unwrap();
        assert_eq!(a.mul(&b, q).unwrap().get(0, 0), 12);

        let m = FieldMatrix::from_rows(&[[1u64, 2, 3], [4, 5, 6]], q).unwrap();
        assert_eq!(FieldMatrix::identity(2).mul(&m, q).unwrap(), m);
        assert!(m.mul(&m, q).is_err());
    }

    #[test]
    fn rank_examples() {
        let q = p(31);
        assert_eq!(rank(&FieldMatrix::identity(6), q), 6);
        assert_eq!(rank(&FieldMatrix::zeros(3, 3), q), 0);
        assert_eq!(rank(&FieldMatrix::zeros(0, 4), q), 0);
    }

    #[test]
    fn row_space_examples() {
        let q = p(5);
        let basis = FieldMatrix::from_rows(&[[1u64, 0], [0, 1]], q).unwrap();
        assert_eq!(in_row_space(&basis, &[3, 4], q).unwrap(), Some(vec![3, 4]));
        assert_eq!(in_row_space(&basis, &[0, 0], q).unwrap(), Some(vec![0, 0]));

        let empty = FieldMatrix::zeros(0, 2);
        assert_eq!(in_row_space(&empty, &[1, 0], q).unwrap(), None);
        assert_eq!(in_row_space(&empty, &[0, 0], q).unwrap(), Some(vec![]));
        assert!(in_row_space(&basis, &[1, 2, 3], q).is_err());
    }

    #[test]
    fn dependencies_sum_to_zero() {
        let q = p(7);
        let m = FieldMatrix::from_rows(&[[1u64, 2, 3], [2, 4, 6], [0, 1, 1], [1, 3, 4]], q).unwrap();
        let b = RowBasis::new(&m, q);
        assert_eq!(b.rank(), 2);
        assert_eq!(b.dependencies().len(), 2);
        for dep in b.dependencies() {
            assert!(combine(&m, dep, q).iter().all(|&x| x == 0));
            assert!(dep.iter().any(|&x| x != 0));
        }
    }

    fn matrix_strategy(q: u64, max_rows: usize, max_cols: usize) -> impl Strategy<Value = FieldMatrix> {
        (0..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..q, r * c)
                .prop_map(move |e| FieldMatrix::new(r, c, e, Prime::new(q).unwrap()).unwrap())
        })
    }

    fn square_triple(q: u64) -> impl Strategy<Value = (FieldMatrix, FieldMatrix, FieldMatrix)> {
        (1usize..5, 1usize..5, 1usize..5, 1usize..5).prop_flat_map(move |(a, b, c, d)| {
            let pq = Prime::new(q).unwrap();
            (
                proptest::collection::vec(0..q, a * b).prop_map(move |e| FieldMatrix::new(a, b, e, pq).unwrap()),
                proptest::collection::vec(0..q, b * c).prop_map(move |e| FieldMatrix::new(b, c, e, pq).unwrap()),
                proptest::collection::vec(0..q, c * d).prop_map(move |e| FieldMatrix::new(c, d, e, pq).unwrap()),
            )
        })
    }

    proptest! {
        #[test]
        fn mul_is_associative((a, b, c) in square_triple(31)) {
            let q = p(31);
            let left = a.mul(&b, q).unwrap().mul(&c, q).unwrap();
            let right = a.mul(&b.mul(&c, q).unwrap(), q).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn mul_distributes((a, b, _c) in square_triple(13), seed in any::<u64>()) {
            let q = p(13);
            let b2 = FieldMatrix::new(
                b.rows(),
                b.cols(),
                b.entries().iter().enumerate().map(|(k, &x)| x ^ (seed >> (k % 60)) & 7).collect(),
                q,
            ).unwrap();
            let lhs = a.mul(&b.add(&b2, q).unwrap(), q).unwrap();
            let rhs = a.mul(&b, q).unwrap().add(&a.mul(&b2, q).unwrap(), q).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rank_equals_transpose_rank(q in prop::sample::select(vec![3u64, 5, 31]), seed in any::<u64>()) {
            let pq = p(q);
            let rows = (seed % 6) as usize;
            let cols = 1 + (seed / 7 % 6) as usize;
            let mut x = seed;
            let entries: Vec<u64> = (0..rows * cols).map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (x >> 33) % q
            }).collect();
            let m = FieldMatrix::new(rows, cols, entries, pq).unwrap();
            prop_assert_eq!(rank(&m, pq), rank(&m.transpose(), pq));
        }

        #[test]
        fn row_space_matches_enumeration(
            q in prop::sample::select(vec![2u64, 3, 5]),
            m in matrix_strategy(5, 3, 3),
            target_seed in any::<u64>(),
        ) {
            let pq = p(q);
            let m = FieldMatrix::new(m.rows(), m.cols(), m.entries().to_vec(), pq).unwrap();
            let target: Vec<u64> = (0..m.cols()).map(|k| (target_seed >> (8 * k)) % q).collect();

            // enumerate every coefficient vector
            let mut reachable = false;
            let total = q.pow(m.rows() as u32);
            for code in 0..total {
                let mut c = code;
                let coeffs: Vec<u64> = (0..m.rows()).map(|_| { let d = c % q; c /= q; d }).collect();
                if combine(&m, &coeffs, pq) == target {
                    reachable = true;
                    break;
                }
            }

            let found = in_row_space(&m, &target, pq).unwrap();
            prop_assert_eq!(found.is_some(), reachable);
            if let Some(coeffs) = found {
                prop_assert_eq!(combine(&m, &coeffs, pq), target);
            }
        }
    }
}
