// SPDX-License-Identifier: Apache-2.0

//! Unique-key sweeps and per-node cost accounting.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::scheme::{provision, Network, RowMapping, SchemeParams, Variant};

/// Number of distinct values among `K_ij` over unordered pairs `i < j`.
pub fn unique_key_count(network: &Network) -> usize {
    let k = network.full_key_matrix();
    let n = k.rows();
    let mut seen = HashSet::new();
    for i in 0..n {
        for j in i + 1..n {
            seen.insert(k.get(i, j));
        }
    }
    seen.len()
}

/// `N/2 + 1` with integer halving, so odd `N` rounds down before adding one.
pub fn recommended_t(n: usize) -> usize {
    n / 2 + 1
}

/// One provisioned network in a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRecord {
    pub t: usize,
    pub m: usize,
    pub q: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub unique_keys: usize,
}

/// Mean over seeds for one value of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub t: usize,
    pub m: usize,
    pub mean_unique_keys: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// The `t` at which the mean count rises the most relative to the
    /// previous point. Earliest wins ties.
    pub fn largest_jump(&self) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for w in self.points.windows(2) {
            let rise = w[1].mean_unique_keys - w[0].mean_unique_keys;
            if best.is_none_or(|(b, _)| rise > b) {
                best = Some((rise, w[1].t));
            }
        }
        best.map(|(_, t)| t)
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_unique_keys).collect()
    }

    /// Per-seed table, a blank line, then the aggregate table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,m,q,N,seed,unique_keys\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.t, r.m, r.q, r.n, r.seed, r.unique_keys);
        }
        out.push_str("\nt,mean_unique_keys\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:.3}", p.t, p.mean_unique_keys);
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:>4} {:>4} {:>12}\n", "t", "m", "mean_unique");
        for p in &self.points {
            let _ = writeln!(out, "{:>4} {:>4} {:>12.3}", p.t, p.m, p.mean_unique_keys);
        }
        out
    }
}

/// Provisions a modified-hadamard network for every `(t, seed)` and counts
/// unique keys. Output is ordered by `t` then by seed regardless of how the
/// work is scheduled.
pub fn sweep_t(n: usize, q: Prime, t_values: &[usize], seeds: &[u64], mapping: RowMapping) -> Result<Sweep> {
    if q.get() <= n as u64 {
        return Err(Error::PrimeTooSmall { q: q.get(), n });
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one seed".into()));
    }
    for &t in t_values {
        if t == 0 || t > n {
            return Err(Error::InvalidParameter(format!("t={t} outside 1..={n}")));
        }
        let m = mapping.rows_for(t);
        if m > n {
            return Err(Error::InvalidParameter(format!(
                "t={t} maps to m={m} rows, more than N={n}"
            )));
        }
    }

    let jobs: Vec<(usize, u64)> = t_values
        .iter()
        .flat_map(|&t| seeds.iter().map(move |&s| (t, s)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(t, seed)| {
            let m = mapping.rows_for(t);
            let params = SchemeParams {
                variant: Variant::ModifiedHadamard,
                n,
                m,
                q,
                seed,
            };
            let net = provision(&params)?;
            Ok(SweepRecord {
                t,
                m,
                q: q.get(),
                n,
                seed,
                unique_keys: unique_key_count(&net),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let points = records
        .chunks(seeds.len())
        .map(|chunk| SweepPoint {
            t: chunk[0].t,
            m: chunk[0].m,
            mean_unique_keys: chunk.iter().map(|r| r.unique_keys as f64).sum::<f64>() / chunk.len() as f64,
        })
        .collect();
    Ok(Sweep { records, points })
}

/// Storage and per-key work for one variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostRecord {
    pub variant: Variant,
    pub stored_field_elements_per_node: usize,
    pub stored_bits_per_node: u64,
    /// Multiplications by arbitrary field elements.
    pub mults_per_key: usize,
    /// Multiplications by `1` or `q-1`, i.e. copy or negate.
    pub sign_ops_per_key: usize,
    pub adds_per_key: usize,
    /// Parity evaluations needed to synthesize the peer column.
    pub column_synthesis_ops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub m: usize,
    pub q: u64,
    pub element_bits: u32,
    pub records: Vec<CostRecord>,
}

impl CostReport {
    pub fn record(&self, variant: Variant) -> Option<&CostRecord> {
        self.records.iter().find(|r| r.variant == variant)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<20} {:>9} {:>6} {:>6} {:>9} {:>5} {:>10}\n",
            "variant", "elements", "bits", "mults", "sign_ops", "adds", "synthesis"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:<20} {:>9} {:>6} {:>6} {:>9} {:>5} {:>10}",
                r.variant.as_str(),
                r.stored_field_elements_per_node,
                r.stored_bits_per_node,
                r.mults_per_key,
                r.sign_ops_per_key,
                r.adds_per_key,
                r.column_synthesis_ops
            );
        }
        out
    }
}

pub fn cost_model(variant: Variant, m: usize, q: Prime) -> CostRecord {
    let adds = m.saturating_sub(1);
    let (elements, mults, sign_ops, synthesis) = match variant {
        // private row plus own public column
        Variant::ClassicVandermonde => (2 * m, m, 0, 0),
        Variant::ModifiedHadamard => (m, 0, m, m),
    };
    CostRecord {
        variant,
        stored_field_elements_per_node: elements,
        stored_bits_per_node: elements as u64 * q.element_bits() as u64,
        mults_per_key: mults,
        sign_ops_per_key: sign_ops,
        adds_per_key: adds,
        column_synthesis_ops: synthesis,
    }
}

pub fn cost_report(m: usize, q: Prime, variants: &[Variant]) -> CostReport {
    CostReport {
        m,
        q: q.get(),
        element_bits: q.element_bits(),
        records: variants.iter().map(|&v| cost_model(v, m, q)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldMatrix;
    use crate::scheme::{example_network, provision_with_secret, SecretMatrix};

    fn p(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    #[test]
    fn example_unique_keys() {
        // count straight off the printed key matrix
        let printed: [[u64; 8]; 8] = [
            [5, 0, 8, 26, 25, 0, 28, 26],
            [0, 25, 7, 18, 4, 19, 11, 12],
            [8, 7, 29, 20, 29, 9, 19, 22],
            [26, 18, 20, 22, 0, 17, 25, 21],
            [25, 4, 29, 0, 9, 18, 13, 14],
            [0, 19, 9, 17, 18, 19, 27, 17],
            [28, 11, 19, 25, 13, 27, 4, 10],
            [26, 12, 22, 21, 14, 17, 10, 26],
        ];
        let mut distinct: Vec<u64> = (0..8).flat_map(|i| (i + 1..8).map(move |j| printed[i][j])).collect();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(distinct.len(), 21);
        assert_eq!(unique_key_count(&example_network()), 21);
    }

    #[test]
    fn degenerate_counts() {
        let params = SchemeParams::new(Variant::ModifiedHadamard, 6, 3, 7, 0).unwrap();
        let zero = SecretMatrix::new(FieldMatrix::zeros(3, 3)).unwrap();
        assert_eq!(unique_key_count(&provision_with_secret(&params, zero).unwrap()), 1);

        let params = SchemeParams::new(Variant::ClassicVandermonde, 2, 1, 5, 4).unwrap();
        assert_eq!(unique_key_count(&provision(&params).unwrap()), 1);
    }

    #[test]
    fn recommended() {
        assert_eq!(recommended_t(32), 17);
        assert_eq!(recommended_t(64), 33);
        assert_eq!(recommended_t(2), 2);
        assert_eq!(recommended_t(9), 5);
    }

    #[test]
    fn cost_examples() {
        let q = p(31);
        let classic = cost_model(Variant::ClassicVandermonde, 6, q);
        assert_eq!(classic.stored_field_elements_per_node, 12);
        assert_eq!(classic.stored_bits_per_node, 60);
        assert_eq!((classic.mults_per_key, classic.adds_per_key), (6, 5));

        let modified = cost_model(Variant::ModifiedHadamard, 6, q);
        assert_eq!(modified.stored_field_elements_per_node, 6);
        assert_eq!(modified.stored_bits_per_node, 30);
        assert_eq!(
            (modified.mults_per_key, modified.sign_ops_per_key, modified.adds_per_key),
            (0, 6, 5)
        );
    }

    #[test]
    fn sweep_validation() {
        let q = p(31);
        assert!(sweep_t(8, q, &[0], &[1], RowMapping::default()).is_err());
        assert!(sweep_t(8, q, &[9], &[1], RowMapping::default()).is_err());
        assert!(sweep_t(8, q, &[8], &[1], RowMapping::BlomStrict).is_err());
        assert!(sweep_t(8, q, &[2], &[], RowMapping::default()).is_err());
        assert_eq!(
            sweep_t(31, q, &[2], &[1], RowMapping::default()),
            Err(Error::PrimeTooSmall { q: 31, n: 31 })
        );
    }

    #[test]
    fn sweep_shape_and_csv() {
        let sweep = sweep_t(
            8,
            p(31),
            &(1..=8).collect::<Vec<_>>(),
            &[0, 1, 2],
            RowMapping::default(),
        )
        .unwrap();
        assert_eq!(sweep.records.len(), 24);
        assert_eq!(sweep.points.len(), 8);
        let csv = sweep.to_csv();
        let mut sections = csv.split("\n\n");
        let raw = sections.next().unwrap();
        assert_eq!(raw.lines().count(), 25);
        assert!(raw.starts_with("t,m,q,N,seed,unique_keys\n1,1,31,8,0,"));
        let agg = sections.next().unwrap();
        assert_eq!(agg.lines().next(), Some("t,mean_unique_keys"));
        assert_eq!(agg.lines().count(), 9);
    }
}
