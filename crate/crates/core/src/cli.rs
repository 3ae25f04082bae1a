// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::document::{network_to_json, read_network, to_json};
use crate::error::{Error, Result};
use crate::field::{FieldMatrix, Prime};
use crate::metrics::{cost_report, sweep_t};
use crate::resilience::{attack_report, AttackReport};
use crate::scheme::{example_network, provision, Network, RowMapping, SchemeParams, Variant};

#[derive(Debug, Parser)]
#[command(name = "blomkit", version, about = "Blom-style pairwise key predistribution toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantChoice {
    ClassicVandermonde,
    ModifiedHadamard,
    Both,
}

/// Exactly one of `--t` or `--m`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Rows {
    /// Nominal security parameter, mapped to rows by --blom-strict
    #[arg(long)]
    pub t: Option<usize>,
    /// Public-matrix row count
    #[arg(long)]
    pub m: Option<usize>,
}

impl Rows {
    fn resolve(&self, blom_strict: bool) -> usize {
        let mapping = if blom_strict {
            RowMapping::BlomStrict
        } else {
            RowMapping::ExampleCompatible
        };
        match (self.t, self.m) {
            (Some(t), _) => mapping.rows_for(t),
            (None, Some(m)) => m,
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Provision a network and write its document
    Provision {
        #[arg(long, value_parser = parse_variant, default_value = "modified-hadamard")]
        variant: Variant,
        /// Network size
        #[arg(long = "N", visible_alias = "n")]
        n: usize,
        #[command(flatten)]
        rows: Rows,
        /// Map --t to m = t + 1 instead of m = t
        #[arg(long)]
        blom_strict: bool,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Leave the secret matrix out of the document
        #[arg(long)]
        redact: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the bundled 8-node worked example
    Example {
        #[arg(long)]
        redact: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Derive the key between nodes i and j
    Establish {
        #[arg(long)]
        network: PathBuf,
        #[arg(short = 'i')]
        i: usize,
        #[arg(short = 'j')]
        j: usize,
    },
    /// Print the full key matrix K = A P
    Keymatrix {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Analyze what a coalition of compromised nodes learns
    Attack {
        #[arg(long)]
        network: PathBuf,
        /// Comma-separated compromised node ids
        #[arg(long, value_delimiter = ',')]
        compromise: Vec<usize>,
        /// Target pair "i,j"
        #[arg(long, conflicts_with = "threshold", value_parser = parse_pair)]
        pair: Option<(usize, usize)>,
        /// Search for the smallest successful coalition
        #[arg(long)]
        threshold: bool,
        /// Sample coalitions instead of enumerating them (default for N > 16)
        #[arg(long, requires = "threshold")]
        sampled: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Unique-key counts across a range of t
    Sweep {
        #[arg(long = "N", visible_alias = "n")]
        n: usize,
        #[arg(long)]
        q: u64,
        /// Inclusive range "lo:hi"
        #[arg(long, value_parser = parse_range)]
        t_range: (usize, usize),
        /// Number of seeds per t
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// First seed; seeds run consecutively from here
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        blom_strict: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-node storage and per-key work
    Cost {
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantChoice,
        #[command(flatten)]
        rows: Rows,
        #[arg(long)]
        blom_strict: bool,
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'i,j', got '{s}'"))?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad node id '{a}'"))?,
        b.trim().parse().map_err(|_| format!("bad node id '{b}'"))?,
    ))
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected 'lo:hi', got '{s}'"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad bound '{a}'"))?;
    let hi: usize = b.trim().parse().map_err(|_| format!("bad bound '{b}'"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn render_matrix(k: &FieldMatrix, format: Format, q: Prime) -> Result<String> {
    #[derive(Serialize)]
    struct KeyMatrixDoc {
        #[serde(rename = "N")]
        n: usize,
        q: u64,
        keys: Vec<Vec<u64>>,
    }
    Ok(match format {
        Format::Json => to_json(&KeyMatrixDoc {
            n: k.rows(),
            q: q.get(),
            keys: k.to_rows(),
        })?,
        Format::Csv => k
            .to_rows()
            .iter()
            .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n")
            .collect(),
        Format::Table => {
            let width = q.get().saturating_sub(1).to_string().len();
            k.to_rows()
                .iter()
                .map(|r| r.iter().map(|x| format!("{x:>width$}")).collect::<Vec<_>>().join(" ") + "\n")
                .collect()
        }
    })
}

fn render_attack(report: &AttackReport, format: Format) -> Result<String> {
    if format != Format::Table {
        return to_json(report);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} N={} m={} q={} compromised={:?}",
        report.variant, report.n, report.m, report.q, report.compromised
    );
    let _ = writeln!(
        out,
        "constraint rank {}/{}",
        report.constraint_rank, report.unknown_count
    );
    if let Some(p) = &report.pair {
        match p.value {
            Some(v) => _ = writeln!(out, "pair ({},{}) determined: {v}", p.i, p.j),
            None => _ = writeln!(out, "pair ({},{}) undetermined", p.i, p.j),
        }
    }
    if let Some(t) = &report.threshold {
        match (t.c, &t.witness_subset, t.witness_pair, t.determined_value) {
            (Some(c), Some(s), Some((i, j)), Some(v)) => {
                _ = writeln!(out, "threshold {c}: coalition {s:?} determines K({i},{j}) = {v}")
            }
            _ => _ = writeln!(out, "threshold: no attack possible"),
        }
        let _ = writeln!(
            out,
            "search: {} subsets, {}",
            t.subsets_examined,
            if t.exhaustive { "exhaustive" } else { "sampled" }
        );
    }
    for row in &report.determination {
        let cells: Vec<String> = row
            .iter()
            .map(|v| v.map_or_else(|| ".".to_string(), |x| x.to_string()))
            .collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    Ok(out)
}

fn load(path: &Path) -> Result<Network> {
    read_network(path)
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Provision {
            variant,
            n,
            rows,
            blom_strict,
            q,
            seed,
            redact,
            output,
        } => {
            let params = SchemeParams::new(variant, n, rows.resolve(blom_strict), q, seed)?;
            let mut net = provision(&params)?;
            if redact {
                net = net.redact();
            }
            emit(&network_to_json(&net)?, output.as_deref(), stdout)
        }
        Command::Example { redact, output } => {
            let mut net = example_network();
            if redact {
                net = net.redact();
            }
            emit(&network_to_json(&net)?, output.as_deref(), stdout)
        }
        Command::Establish { network, i, j } => {
            let key = load(&network)?.establish(i, j)?;
            emit(&format!("{}\n", key.value), None, stdout)
        }
        Command::Keymatrix {
            network,
            format,
            output,
        } => {
            let net = load(&network)?;
            emit(
                &render_matrix(&net.full_key_matrix(), format, net.q())?,
                output.as_deref(),
                stdout,
            )
        }
        Command::Attack {
            network,
            compromise,
            pair,
            threshold,
            sampled,
            format,
            output,
        } => {
            let net = load(&network)?;
            let exhaustive = threshold.then_some(!sampled && net.n() <= 16);
            let report = attack_report(&net, &compromise, pair, exhaustive)?;
            emit(&render_attack(&report, format)?, output.as_deref(), stdout)
        }
        Command::Sweep {
            n,
            q,
            t_range,
            seeds,
            seed,
            blom_strict,
            format,
            output,
        } => {
            let q = Prime::new(q)?;
            let mapping = if blom_strict {
                RowMapping::BlomStrict
            } else {
                RowMapping::ExampleCompatible
            };
            let t_values: Vec<usize> = (t_range.0..=t_range.1).collect();
            let seed_values: Vec<u64> = (seed..seed.saturating_add(seeds)).collect();
            let sweep = sweep_t(n, q, &t_values, &seed_values, mapping)?;
            let text = match format {
                Format::Csv => sweep.to_csv(),
                Format::Table => sweep.to_table(),
                Format::Json => to_json(&sweep)?,
            };
            emit(&text, output.as_deref(), stdout)
        }
        Command::Cost {
            variant,
            rows,
            blom_strict,
            q,
            format,
            output,
        } => {
            let q = Prime::new(q)?;
            let m = rows.resolve(blom_strict);
            if m == 0 {
                return Err(Error::InvalidParameter("row count m must be at least 1".into()));
            }
            let variants: &[Variant] = match variant {
                VariantChoice::ClassicVandermonde => &[Variant::ClassicVandermonde],
                VariantChoice::ModifiedHadamard => &[Variant::ModifiedHadamard],
                VariantChoice::Both => &Variant::ALL,
            };
            let report = cost_report(m, q, variants);
            let text = match format {
                Format::Table => report.to_table(),
                Format::Json | Format::Csv => to_json(&report)?,
            };
            emit(&text, output.as_deref(), stdout)
        }
    }
}

/// Parses `args` and runs; returns the process exit status. Errors go to
/// `stderr` as one `error: ...` line.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "error: {msg}");
            return 2;
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
