// SPDX-License-Identifier: Apache-2.0

//! JSON documents for networks and reports.
//!
//! A network document carries `variant`, `N`, `m`, `q`, `seed`, the
//! `public_matrix` (classic variant only, since Hadamard columns are
//! regenerated from the parameters), `shares` as `{index, row}` objects and,
//! unless redacted, the `secret`. Matrices are arrays of rows.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldMatrix, Prime};
use crate::scheme::{public_matrix, Network, NodeShare, SchemeParams, SecretMatrix, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub variant: Variant,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub q: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_matrix: Option<Vec<Vec<u64>>>,
    pub shares: Vec<NodeShare>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<Vec<Vec<u64>>>,
}

impl From<&Network> for NetworkDocument {
    fn from(net: &Network) -> Self {
        let p = net.params();
        NetworkDocument {
            variant: p.variant,
            n: p.n,
            m: p.m,
            q: p.q.get(),
            seed: p.seed,
            public_matrix: match p.variant {
                Variant::ClassicVandermonde => Some(net.public_matrix().to_rows()),
                Variant::ModifiedHadamard => None,
            },
            shares: net.shares().to_vec(),
            secret: net.secret().map(|s| s.matrix().to_rows()),
        }
    }
}

fn matrix_from_rows(
    rows: &[Vec<u64>],
    expect_rows: usize,
    expect_cols: usize,
    q: Prime,
    what: &str,
) -> Result<FieldMatrix> {
    if rows.len() != expect_rows || rows.iter().any(|r| r.len() != expect_cols) {
        return Err(Error::Document(format!("{what} must be {expect_rows}x{expect_cols}")));
    }
    if rows.iter().flatten().any(|&x| x >= q.get()) {
        return Err(Error::Document(format!("{what} holds entries outside [0, {q})")));
    }
    if expect_rows == 0 {
        return Ok(FieldMatrix::zeros(0, expect_cols));
    }
    FieldMatrix::from_rows(rows, q)
}

impl TryFrom<NetworkDocument> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDocument) -> Result<Self> {
        let params = SchemeParams::new(doc.variant, doc.n, doc.m, doc.q, doc.seed)?;
        let public = match (params.variant, &doc.public_matrix) {
            (Variant::ClassicVandermonde, Some(rows)) => {
                matrix_from_rows(rows, params.m, params.n, params.q, "public_matrix")?
            }
            (Variant::ClassicVandermonde, None) => {
                return Err(Error::Document(
                    "classic-vandermonde network lacks public_matrix".into(),
                ))
            }
            (Variant::ModifiedHadamard, Some(_)) => {
                return Err(Error::Document(
                    "modified-hadamard network must not carry public_matrix".into(),
                ))
            }
            (Variant::ModifiedHadamard, None) => public_matrix(&params)?,
        };
        let secret = doc
            .secret
            .as_deref()
            .map(|rows| matrix_from_rows(rows, params.m, params.m, params.q, "secret").and_then(SecretMatrix::new))
            .transpose()?;
        Network::from_parts(params, public, doc.shares, secret)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn network_to_json(net: &Network) -> Result<String> {
    to_json(&NetworkDocument::from(net))
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let doc: NetworkDocument = serde_json::from_str(text)?;
    Network::try_from(doc)
}

pub fn read_network(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    network_from_json(&text)
}
