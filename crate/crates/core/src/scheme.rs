// SPDX-License-Identifier: Apache-2.0

//! Central authority and node roles.
//!
//! The authority picks a public `m x N` matrix `P` and a secret symmetric
//! `m x m` matrix `S`, computes `A = (S P)^T`, and hands row `i` of `A` to
//! node `i`. Nodes `i` and `j` then agree on
//! `K_ij = A_i . P_j = P_i^T S P_j = K_ji`.
//!
//! For the Hadamard variant a node never stores `P`: the peer column is
//! synthesized from its index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldMatrix, Prime};
use crate::matrices::{hadamard_column, hadamard_order_for, vandermonde, HadamardSpec, VandermondeSpec};
use crate::rng::SecretRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ClassicVandermonde,
    ModifiedHadamard,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::ClassicVandermonde, Variant::ModifiedHadamard];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::ClassicVandermonde => "classic-vandermonde",
            Variant::ModifiedHadamard => "modified-hadamard",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic-vandermonde" | "classic" => Ok(Variant::ClassicVandermonde),
            "modified-hadamard" | "modified" => Ok(Variant::ModifiedHadamard),
            other => Err(Error::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

/// How a nominal security parameter `t` becomes a public-matrix row count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowMapping {
    /// `m = t`, the convention of the worked 8-node example.
    #[default]
    ExampleCompatible,
    /// `m = t + 1`, Blom's original `(t+1) x N` construction.
    BlomStrict,
}

impl RowMapping {
    pub fn rows_for(self, t: usize) -> usize {
        match self {
            RowMapping::ExampleCompatible => t,
            RowMapping::BlomStrict => t + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    pub variant: Variant,
    /// Network size `N`.
    pub n: usize,
    /// Public-matrix rows.
    pub m: usize,
    pub q: Prime,
    pub seed: u64,
}

impl SchemeParams {
    pub fn new(variant: Variant, n: usize, m: usize, q: u64, seed: u64) -> Result<Self> {
        let params = SchemeParams {
            variant,
            n,
            m,
            q: Prime::new(q)?,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("network size N must be at least 1".into()));
        }
        if self.q.get() <= self.n as u64 {
            return Err(Error::PrimeTooSmall {
                q: self.q.get(),
                n: self.n,
            });
        }
        if self.m == 0 || self.m > self.n {
            return Err(Error::InvalidParameter(format!(
                "row count m={} must lie in 1..={}",
                self.m, self.n
            )));
        }
        Ok(())
    }

    /// Nominal collusion bound `m - 1`.
    pub fn security_level(&self) -> usize {
        self.m - 1
    }

    pub fn hadamard_order(&self) -> usize {
        hadamard_order_for(self.n)
    }

    /// Bits in one pairwise key.
    pub fn key_bits(&self) -> u32 {
        self.q.element_bits()
    }
}

/// Symmetric `m x m` secret held by the authority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretMatrix(FieldMatrix);

impl SecretMatrix {
    pub fn new(matrix: FieldMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch(format!(
                "secret matrix is {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if let Some((row, col)) = matrix.first_asymmetry() {
            return Err(Error::NotSymmetric {
                row: row + 1,
                col: col + 1,
            });
        }
        Ok(SecretMatrix(matrix))
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

/// Fills the upper triangle row by row (`(a, b)` with `a <= b`) from the
/// seeded generator and mirrors it.
pub fn generate_secret(m: usize, q: Prime, seed: u64) -> SecretMatrix {
    let mut rng = SecretRng::from_seed_u64(seed);
    let mut s = FieldMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let x = rng.uniform_below(q.get());
            s.set(a, b, x);
            s.set(b, a, x);
        }
    }
    SecretMatrix(s)
}

/// `A = (S P)^T`, one row per node.
pub fn compute_private_rows(secret: &SecretMatrix, public: &FieldMatrix, q: Prime) -> Result<FieldMatrix> {
    Ok(secret.matrix().mul(public, q)?.transpose())
}

pub fn public_matrix(params: &SchemeParams) -> Result<FieldMatrix> {
    match params.variant {
        Variant::ClassicVandermonde => vandermonde(&VandermondeSpec::consecutive(params.n, params.m, params.q)),
        Variant::ModifiedHadamard => HadamardSpec::for_network(params.n, params.m, params.q).public_matrix(params.n),
    }
}

/// What node `index` keeps in memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeShare {
    pub index: usize,
    #[serde(rename = "row")]
    pub private_row: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairwiseKey {
    pub i: usize,
    pub j: usize,
    pub value: u64,
}

/// Dot product of a node's private row with a peer's public column.
pub fn derive_key(share: &NodeShare, peer_column: &[u64], q: Prime) -> Result<u64> {
    if share.private_row.len() != peer_column.len() {
        return Err(Error::DimensionMismatch(format!(
            "private row of length {} against peer column of length {}",
            share.private_row.len(),
            peer_column.len()
        )));
    }
    q.dot(&share.private_row, peer_column)
}

/// A provisioned network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    params: SchemeParams,
    public_matrix: FieldMatrix,
    shares: Vec<NodeShare>,
    secret: Option<SecretMatrix>,
}

pub fn provision(params: &SchemeParams) -> Result<Network> {
    params.validate()?;
    let secret = generate_secret(params.m, params.q, params.seed);
    provision_with_secret(params, secret)
}

/// Provisions with a caller-supplied secret instead of a seeded one.
pub fn provision_with_secret(params: &SchemeParams, secret: SecretMatrix) -> Result<Network> {
    params.validate()?;
    if secret.dim() != params.m {
        return Err(Error::DimensionMismatch(format!(
            "secret is {0}x{0} but m={1}",
            secret.dim(),
            params.m
        )));
    }
    let public = public_matrix(params)?;
    let a = compute_private_rows(&secret, &public, params.q)?;
    let shares = (0..params.n)
        .map(|r| NodeShare {
            index: r + 1,
            private_row: a.row(r).to_vec(),
        })
        .collect();
    Ok(Network {
        params: *params,
        public_matrix: public,
        shares,
        secret: Some(secret),
    })
}

impl Network {
    /// Rebuilds a network from its parts, checking every structural invariant
    /// and, when the secret is present, that `A = (S P)^T`.
    pub fn from_parts(
        params: SchemeParams,
        public_matrix: FieldMatrix,
        shares: Vec<NodeShare>,
        secret: Option<SecretMatrix>,
    ) -> Result<Self> {
        params.validate()?;
        if public_matrix.rows() != params.m || public_matrix.cols() != params.n {
            return Err(Error::DimensionMismatch(format!(
                "public matrix is {}x{}, expected {}x{}",
                public_matrix.rows(),
                public_matrix.cols(),
                params.m,
                params.n
            )));
        }
        if shares.len() != params.n {
            return Err(Error::Document(format!("{} shares for N={}", shares.len(), params.n)));
        }
        for (k, share) in shares.iter().enumerate() {
            if share.index != k + 1 {
                return Err(Error::Document(format!(
                    "share {} carries index {}",
                    k + 1,
                    share.index
                )));
            }
            if share.private_row.len() != params.m {
                return Err(Error::DimensionMismatch(format!(
                    "share {} has {} entries, expected m={}",
                    share.index,
                    share.private_row.len(),
                    params.m
                )));
            }
            if share.private_row.iter().any(|&x| x >= params.q.get()) {
                return Err(Error::Document(format!(
                    "share {} holds unreduced entries",
                    share.index
                )));
            }
        }
        if let Some(secret) = &secret {
            if secret.dim() != params.m {
                return Err(Error::DimensionMismatch(format!("secret is not {0}x{0}", params.m)));
            }
            let a = compute_private_rows(secret, &public_matrix, params.q)?;
            if let Some(share) = shares.iter().find(|s| a.row(s.index - 1) != s.private_row.as_slice()) {
                return Err(Error::ShareMismatch { index: share.index });
            }
        }
        Ok(Network {
            params,
            public_matrix,
            shares,
            secret,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn q(&self) -> Prime {
        self.params.q
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn public_matrix(&self) -> &FieldMatrix {
        &self.public_matrix
    }

    pub fn shares(&self) -> &[NodeShare] {
        &self.shares
    }

    pub fn secret(&self) -> Option<&SecretMatrix> {
        self.secret.as_ref()
    }

    /// Drops the secret, leaving what a deployed network actually holds.
    pub fn redact(mut self) -> Self {
        self.secret = None;
        self
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id == 0 || id > self.params.n {
            return Err(Error::NodeOutOfRange { id, n: self.params.n });
        }
        Ok(())
    }

    pub fn share(&self, id: usize) -> Result<&NodeShare> {
        self.check_id(id)?;
        Ok(&self.shares[id - 1])
    }

    /// The public column a node needs for peer `id`. Hadamard columns are
    /// synthesized from the index alone.
    pub fn peer_column(&self, id: usize) -> Result<Vec<u64>> {
        self.check_id(id)?;
        match self.params.variant {
            Variant::ClassicVandermonde => Ok(self.public_matrix.column(id - 1)),
            Variant::ModifiedHadamard => {
                hadamard_column(self.params.hadamard_order(), id, self.params.m, self.params.q)
            }
        }
    }

    /// Both nodes derive the key independently; the results must agree.
    pub fn establish(&self, i: usize, j: usize) -> Result<PairwiseKey> {
        let q = self.params.q;
        let forward = derive_key(self.share(i)?, &self.peer_column(j)?, q)?;
        let backward = derive_key(self.share(j)?, &self.peer_column(i)?, q)?;
        if forward != backward {
            return Err(Error::AsymmetricKey {
                i,
                j,
                forward,
                backward,
            });
        }
        Ok(PairwiseKey { i, j, value: forward })
    }

    /// `A`, the `N x m` matrix of private rows.
    pub fn private_rows(&self) -> FieldMatrix {
        let rows: Vec<&[u64]> = self.shares.iter().map(|s| s.private_row.as_slice()).collect();
        FieldMatrix::from_rows(&rows, self.params.q).expect("shares are validated rectangular")
    }

    /// `K = A P`.
    pub fn full_key_matrix(&self) -> FieldMatrix {
        self.private_rows()
            .mul(&self.public_matrix, self.params.q)
            .expect("A is N x m and P is m x N")
    }
}

/// The 6x6 secret of the 8-node worked example over GF(31).
pub const EXAMPLE_SECRET: [[u64; 6]; 6] = [
    [3, 11, 15, 28, 7, 5],
    [11, 30, 4, 1, 2, 8],
    [15, 4, 6, 14, 18, 21],
    [28, 1, 14, 17, 25, 6],
    [7, 2, 18, 25, 27, 9],
    [5, 8, 21, 6, 9, 8],
];

/// The worked example: modified-hadamard, N=8, m=6, q=31, with the
/// hand-picked secret above. The seed is recorded as 0 and plays no role.
pub fn example_network() -> Network {
    let params = SchemeParams::new(Variant::ModifiedHadamard, 8, 6, 31, 0).expect("valid example parameters");
    let secret = SecretMatrix::new(FieldMatrix::from_rows(&EXAMPLE_SECRET, params.q).expect("6x6"))
        .expect("example secret is symmetric");
    provision_with_secret(&params, secret).expect("example provisions")
}
