// SPDX-License-Identifier: Apache-2.0

//! Collusion analysis.
//!
//! The attacker knows the public matrix and the private rows of every
//! compromised node. Row `c` of `A` equals `P_c^T S`, so each compromised node
//! gives `m` linear equations in the `m(m+1)/2` free entries of the symmetric
//! secret. A key `K_ij = P_i^T S P_j` is a linear form in the same unknowns and
//! is fixed by the equations exactly when that form lies in the row space of
//! the coefficient matrix.
//!
//! Unknown `(a, b)` with `a <= b` sits at position
//! `a*m - a(a-1)/2 + (b-a)`, i.e. the upper triangle in row-major order.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldMatrix, Prime, RowBasis};
use crate::rng::SecretRng;
use crate::scheme::{Network, NodeShare, SecretMatrix, Variant};

/// Largest search space `brute_force_key_values` will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Random compromise sets tried per coalition size when not exhaustive.
pub const SAMPLES_PER_SIZE: usize = 256;

pub fn unknown_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Zero-based position of unknown `S[a][b]`; order of `a`, `b` is irrelevant.
pub fn unknown_index(a: usize, b: usize, m: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * m - a * a.saturating_sub(1) / 2 + (b - a)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub m: usize,
    pub unknown_count: usize,
    /// One row of coefficients per equation.
    pub rows: FieldMatrix,
    pub rhs: Vec<u64>,
}

impl ConstraintSystem {
    /// True when `secret` satisfies every equation.
    pub fn is_satisfied_by(&self, secret: &SecretMatrix, q: Prime) -> bool {
        let x = flatten_secret(secret);
        (0..self.rows.rows()).all(|r| q.dot(self.rows.row(r), &x).expect("widths agree") == self.rhs[r])
    }
}

/// Upper triangle of a symmetric secret in unknown order.
pub fn flatten_secret(secret: &SecretMatrix) -> Vec<u64> {
    let s = secret.matrix();
    let m = secret.dim();
    let mut x = Vec::with_capacity(unknown_count(m));
    for a in 0..m {
        for b in a..m {
            x.push(s.get(a, b));
        }
    }
    x
}

/// Equations on the secret implied by the given compromised shares.
pub fn constraint_system(public: &FieldMatrix, shares: &[&NodeShare], q: Prime) -> Result<ConstraintSystem> {
    let m = public.rows();
    let u = unknown_count(m);
    let mut seen = HashSet::new();
    let mut coeffs = Vec::with_capacity(shares.len() * m * u);
    let mut rhs = Vec::with_capacity(shares.len() * m);
    for share in shares {
        if share.index == 0 || share.index > public.cols() {
            return Err(Error::NodeOutOfRange {
                id: share.index,
                n: public.cols(),
            });
        }
        if !seen.insert(share.index) {
            return Err(Error::DuplicateNode(share.index));
        }
        if share.private_row.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "share {} has {} entries, expected m={m}",
                share.index,
                share.private_row.len()
            )));
        }
        let column = public.column(share.index - 1);
        // A_c[b] = sum_a P[a][c] * S[a][b]
        for b in 0..m {
            let mut row = vec![0u64; u];
            for (a, &p) in column.iter().enumerate() {
                let k = unknown_index(a, b, m);
                row[k] = q.add(row[k], p);
            }
            coeffs.extend(row);
            rhs.push(q.reduce(share.private_row[b]));
        }
    }
    Ok(ConstraintSystem {
        m,
        unknown_count: u,
        rows: FieldMatrix::new(rhs.len(), u, coeffs, q)?,
        rhs,
    })
}

/// `K_ij` written as a linear form in the unknowns of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFunctional {
    pub coefficients: Vec<u64>,
}

impl KeyFunctional {
    pub fn evaluate(&self, secret: &SecretMatrix, q: Prime) -> Result<u64> {
        q.dot(&self.coefficients, &flatten_secret(secret))
    }
}

pub fn key_functional(public: &FieldMatrix, i: usize, j: usize, q: Prime) -> Result<KeyFunctional> {
    let n = public.cols();
    for id in [i, j] {
        if id == 0 || id > n {
            return Err(Error::NodeOutOfRange { id, n });
        }
    }
    let m = public.rows();
    let pi = public.column(i - 1);
    let pj = public.column(j - 1);
    let mut coefficients = vec![0u64; unknown_count(m)];
    for (a, &x) in pi.iter().enumerate() {
        for (b, &y) in pj.iter().enumerate() {
            let k = unknown_index(a, b, m);
            coefficients[k] = q.add(coefficients[k], q.mul(x, y));
        }
    }
    Ok(KeyFunctional { coefficients })
}

/// Row-reduced attacker knowledge, reusable across many target keys.
#[derive(Debug, Clone)]
pub struct CollusionView {
    q: Prime,
    basis: RowBasis,
    rhs: Vec<u64>,
}

impl CollusionView {
    /// Fails with [`Error::InconsistentSystem`] when no symmetric secret
    /// satisfies the equations.
    pub fn new(system: &ConstraintSystem, q: Prime) -> Result<Self> {
        let basis = RowBasis::new(&system.rows, q);
        for dep in basis.dependencies() {
            if q.dot(dep, &system.rhs)? != 0 {
                return Err(Error::InconsistentSystem);
            }
        }
        Ok(CollusionView {
            q,
            basis,
            rhs: system.rhs.clone(),
        })
    }

    /// Rank of the attacker's equations.
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// The key value when it is fixed by the equations.
    pub fn determine(&self, functional: &KeyFunctional) -> Result<Option<u64>> {
        match self.basis.express(&functional.coefficients)? {
            Some(comb) => Ok(Some(self.q.dot(&comb, &self.rhs)?)),
            None => Ok(None),
        }
    }
}

/// `Some(value)` iff the functional lies in the row space of the system.
pub fn is_key_determined(system: &ConstraintSystem, functional: &KeyFunctional, q: Prime) -> Result<Option<u64>> {
    if functional.coefficients.len() != system.unknown_count {
        return Err(Error::DimensionMismatch(format!(
            "functional over {} unknowns against a system over {}",
            functional.coefficients.len(),
            system.unknown_count
        )));
    }
    CollusionView::new(system, q)?.determine(functional)
}

/// Every value the key takes across all symmetric secrets consistent with
/// the system, by direct enumeration of `q^(m(m+1)/2)` candidates.
pub fn brute_force_key_values(
    system: &ConstraintSystem,
    functional: &KeyFunctional,
    q: Prime,
) -> Result<BTreeSet<u64>> {
    Ok(brute_force_key_values_many(system, std::slice::from_ref(functional), q)?.remove(0))
}

/// As [`brute_force_key_values`] for several functionals in a single pass.
pub fn brute_force_key_values_many(
    system: &ConstraintSystem,
    functionals: &[KeyFunctional],
    q: Prime,
) -> Result<Vec<BTreeSet<u64>>> {
    let u = system.unknown_count;
    if functionals.iter().any(|f| f.coefficients.len() != u) {
        return Err(Error::DimensionMismatch(
            "functional width differs from unknown count".into(),
        ));
    }
    let total = (q.get() as u128).checked_pow(u as u32).unwrap_or(u128::MAX);
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::EnumerationTooLarge(total));
    }

    let mut values = vec![BTreeSet::new(); functionals.len()];
    let mut x = vec![0u64; u];
    loop {
        let consistent =
            (0..system.rows.rows()).all(|r| q.dot(system.rows.row(r), &x).expect("widths agree") == system.rhs[r]);
        if consistent {
            for (f, set) in functionals.iter().zip(values.iter_mut()) {
                set.insert(q.dot(&f.coefficients, &x)?);
            }
        }
        // odometer
        let mut k = 0;
        loop {
            if k == u {
                return Ok(values);
            }
            x[k] += 1;
            if x[k] < q.get() {
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

/// The first coalition found that pins down a key between two honest nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub c: usize,
    pub subset: Vec<usize>,
    pub pair: (usize, usize),
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub exhaustive: bool,
    pub subsets_examined: u64,
    /// `None` when no coalition (of any size leaving two honest nodes) works.
    pub witness: Option<Witness>,
}

impl ThresholdReport {
    pub fn threshold(&self) -> Option<usize> {
        self.witness.as_ref().map(|w| w.c)
    }
}

/// All `(i, j)` with `i < j`, one-based, with their key functionals.
fn pair_functionals(public: &FieldMatrix, q: Prime) -> Result<Vec<((usize, usize), KeyFunctional)>> {
    let n = public.cols();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(((i, j), key_functional(public, i, j, q)?));
        }
    }
    Ok(out)
}

fn first_determined_pair(
    network: &Network,
    subset: &[usize],
    pairs: &[((usize, usize), KeyFunctional)],
) -> Result<Option<((usize, usize), u64)>> {
    let q = network.q();
    let shares: Vec<&NodeShare> = subset.iter().map(|&c| network.share(c)).collect::<Result<_>>()?;
    let view = CollusionView::new(&constraint_system(network.public_matrix(), &shares, q)?, q)?;
    for ((i, j), f) in pairs {
        if subset.contains(i) || subset.contains(j) {
            continue;
        }
        if let Some(v) = view.determine(f)? {
            return Ok(Some(((*i, *j), v)));
        }
    }
    Ok(None)
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic
/// order; returns false after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for later in pos + 1..k {
                idx[later] = idx[later - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Smallest coalition size that determines some key between two
/// uncompromised nodes.
///
/// Sizes are tried in ascending order and subsets lexicographically; the
/// first witness wins. The exhaustive search is exact but visits up to
/// `2^N` subsets, so it is meant for `N <= 16`. Otherwise at most
/// [`SAMPLES_PER_SIZE`] random coalitions per size are drawn, seeded from
/// the network seed, and the result is only an upper bound.
pub fn resilience_threshold(network: &Network, exhaustive: bool) -> Result<ThresholdReport> {
    let n = network.n();
    let pairs = pair_functionals(network.public_matrix(), network.q())?;
    let mut examined = 0u64;

    for c in 1..=n.saturating_sub(2) {
        let full = exhaustive || binomial(n, c) <= SAMPLES_PER_SIZE as u128;
        let subsets: Box<dyn Iterator<Item = Vec<usize>>> = if full {
            let mut idx: Vec<usize> = (0..c).collect();
            let mut done = false;
            Box::new(std::iter::from_fn(move || {
                if done {
                    return None;
                }
                let current = idx.iter().map(|x| x + 1).collect();
                done = !next_combination(&mut idx, n);
                Some(current)
            }))
        } else {
            Box::new(sample_subsets(n, c, network.params().seed ^ (c as u64).rotate_left(32)).into_iter())
        };

        for subset in subsets {
            examined += 1;
            if let Some((pair, value)) = first_determined_pair(network, &subset, &pairs)? {
                return Ok(ThresholdReport {
                    exhaustive,
                    subsets_examined: examined,
                    witness: Some(Witness { c, subset, pair, value }),
                });
            }
        }
    }
    Ok(ThresholdReport {
        exhaustive,
        subsets_examined: examined,
        witness: None,
    })
}

/// Distinct random `c`-subsets of `1..=n`, each sorted, in lexicographic order.
fn sample_subsets(n: usize, c: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = SecretRng::from_seed_u64(seed);
    let mut picked = BTreeSet::new();
    let mut attempts = 0;
    while picked.len() < SAMPLES_PER_SIZE && attempts < SAMPLES_PER_SIZE * 8 {
        attempts += 1;
        let mut pool: Vec<usize> = (1..=n).collect();
        for k in 0..c {
            let r = k + rng.uniform_below((n - k) as u64) as usize;
            pool.swap(k, r);
        }
        let mut subset = pool[..c].to_vec();
        subset.sort_unstable();
        picked.insert(subset);
    }
    picked.into_iter().collect()
}

/// For a fixed coalition, the key value of every pair `(i, j)` that the
/// coalition determines, `None` elsewhere. Zero-based rows and columns stand
/// for nodes `1..=N`.
pub fn determination_matrix(network: &Network, compromised: &[usize]) -> Result<Vec<Vec<Option<u64>>>> {
    let q = network.q();
    let public = network.public_matrix();
    let shares: Vec<&NodeShare> = compromised.iter().map(|&c| network.share(c)).collect::<Result<_>>()?;
    let view = CollusionView::new(&constraint_system(public, &shares, q)?, q)?;
    let n = network.n();
    let mut out = vec![vec![None; n]; n];
    for i in 1..=n {
        for j in i..=n {
            let v = view.determine(&key_functional(public, i, j, q)?)?;
            out[i - 1][j - 1] = v;
            out[j - 1][i - 1] = v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairFinding {
    pub i: usize,
    pub j: usize,
    pub determined: bool,
    pub value: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdFinding {
    /// Minimum coalition size, `null` when no attack is possible.
    pub c: Option<usize>,
    pub witness_subset: Option<Vec<usize>>,
    pub witness_pair: Option<(usize, usize)>,
    pub determined_value: Option<u64>,
    pub exhaustive: bool,
    pub subsets_examined: u64,
}

impl From<&ThresholdReport> for ThresholdFinding {
    fn from(r: &ThresholdReport) -> Self {
        ThresholdFinding {
            c: r.threshold(),
            witness_subset: r.witness.as_ref().map(|w| w.subset.clone()),
            witness_pair: r.witness.as_ref().map(|w| w.pair),
            determined_value: r.witness.as_ref().map(|w| w.value),
            exhaustive: r.exhaustive,
            subsets_examined: r.subsets_examined,
        }
    }
}

/// Serializable summary of an attack on one network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackReport {
    pub variant: Variant,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub q: u64,
    pub compromised: Vec<usize>,
    /// Rank of the coalition's equations out of `m(m+1)/2` unknowns.
    pub constraint_rank: usize,
    pub unknown_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairFinding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdFinding>,
    pub determination: Vec<Vec<Option<u64>>>,
}

pub fn attack_report(
    network: &Network,
    compromised: &[usize],
    pair: Option<(usize, usize)>,
    threshold: Option<bool>,
) -> Result<AttackReport> {
    let q = network.q();
    let public = network.public_matrix();
    let shares: Vec<&NodeShare> = compromised.iter().map(|&c| network.share(c)).collect::<Result<_>>()?;
    let system = constraint_system(public, &shares, q)?;
    let view = CollusionView::new(&system, q)?;
    let pair = pair
        .map(|(i, j)| -> Result<PairFinding> {
            let value = view.determine(&key_functional(public, i, j, q)?)?;
            Ok(PairFinding {
                i,
                j,
                determined: value.is_some(),
                value,
            })
        })
        .transpose()?;
    let threshold = threshold
        .map(|exhaustive| resilience_threshold(network, exhaustive))
        .transpose()?;
    Ok(AttackReport {
        variant: network.params().variant,
        n: network.n(),
        m: network.m(),
        q: q.get(),
        compromised: compromised.to_vec(),
        constraint_rank: view.rank(),
        unknown_count: system.unknown_count,
        pair,
        threshold: threshold.as_ref().map(ThresholdFinding::from),
        determination: determination_matrix(network, compromised)?,
    })
}
