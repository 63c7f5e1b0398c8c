//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, corrupt input), 2 usage or
//! parameter error, 3 a verification check failed.

pub mod sharefile;
pub mod simulate;
pub mod stripe;

mod commands;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::CodeParams;
use crate::gf::Field;
use crate::par::Execution;
use crate::repair::{HelperChoice, RepairPlan};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;

/// Bad flags or parameters.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// A check the command was asked to perform came out false.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct VerificationFailure(pub String);

pub(crate) fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

/// Map an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<VerificationFailure>() {
            return EXIT_VERIFICATION;
        }
    }
    EXIT_RUNTIME
}

#[derive(Debug, Parser)]
#[command(
    name = "mbcr",
    version,
    about = "Exact cooperative regenerating codes at the minimum-bandwidth point"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Process stripes and checks on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

impl Cli {
    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print alpha, beta1, beta2, B, gamma and storage overhead.
    Params(ParamsArgs),
    /// Split a file into stripes and write one share file per node.
    Encode(EncodeArgs),
    /// Rebuild the original file from k share files.
    Reconstruct(ReconstructArgs),
    /// Regenerate failed nodes' share files from survivors.
    Repair(RepairArgs),
    /// Check the node subspace identities and the cut-set bound.
    Verify(VerifyArgs),
    /// Evaluate the cut-set bound over all compositions of k.
    Bound(BoundArgs),
    /// Run repeated random fail-repair stages.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct CodeArgs {
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(short = 'k')]
    pub k: usize,
    #[arg(short = 'd')]
    pub d: usize,
    #[arg(short = 'r')]
    pub r: usize,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct FieldArgs {
    /// Prime field GF(q) instead of GF(2^8).
    #[arg(short = 'q', value_name = "PRIME", conflicts_with = "gf256")]
    pub q: Option<u32>,
    /// GF(2^8) (the default).
    #[arg(long)]
    pub gf256: bool,
}

impl FieldArgs {
    pub fn field(&self) -> anyhow::Result<Field> {
        match self.q {
            Some(q) => Field::prime(q).map_err(usage),
            None => Ok(Field::gf256()),
        }
    }
}

pub(crate) fn code_params(code: &CodeArgs, field: Field) -> anyhow::Result<CodeParams> {
    CodeParams::new(code.n, code.k, code.d, code.r, field).map_err(usage)
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub field: FieldArgs,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub field: FieldArgs,
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(required = true)]
    pub shares: Vec<PathBuf>,
    /// Output file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    /// Survivor share files.
    #[arg(required = true)]
    pub shares: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub failed: Vec<usize>,
    /// Seed for helper selection; ignored with --helpers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit helpers, e.g. `1:3+4+5;2:3+4+5`.
    #[arg(long)]
    pub helpers: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of seeded repair plans to check.
    #[arg(long, default_value_t = 3)]
    pub plans: usize,
    /// Zero one generator of node 1 before checking (negative control).
    #[arg(long)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub code: CodeArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 20)]
    pub stages: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub stripes: usize,
}

/// Parse `1:3+4+5;2:3+4+6`.
pub fn parse_helpers(spec: &str) -> anyhow::Result<BTreeMap<usize, Vec<usize>>> {
    let mut map = BTreeMap::new();
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (node, list) = entry.split_once(':').ok_or_else(|| {
            usage(format!(
                "helper entry `{entry}` is not of the form id:h1+h2+..."
            ))
        })?;
        let node: usize = node
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad node id `{node}`")))?;
        let helpers = list
            .split('+')
            .map(|h| {
                h.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("bad helper id `{h}`")))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        if map.insert(node, helpers).is_some() {
            return Err(usage(format!("node {node} listed twice in --helpers")));
        }
    }
    Ok(map)
}

/// `count` repair plans, each with a random failed set and seeded helpers.
pub fn seeded_plans(params: &CodeParams, count: usize, seed: u64) -> Vec<RepairPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<usize> = (1..=params.n()).collect();
    (0..count)
        .map(|_| {
            let mut failed: Vec<usize> =
                ids.choose_multiple(&mut rng, params.r()).copied().collect();
            failed.sort_unstable();
            RepairPlan::new(params, &failed, HelperChoice::Seeded(rng.gen()))
                .expect("valid params admit any r-subset")
        })
        .collect()
}

pub fn run(cli: &Cli, out: &mut impl Write) -> anyhow::Result<()> {
    let exec = cli.execution();
    match &cli.command {
        Command::Params(a) => commands::params(a, out),
        Command::Encode(a) => commands::encode(a, exec, out),
        Command::Reconstruct(a) => commands::reconstruct(a, exec, out),
        Command::Repair(a) => commands::repair(a, exec, out),
        Command::Verify(a) => commands::verify(a, exec, out),
        Command::Bound(a) => commands::bound(a, out),
        Command::Simulate(a) => commands::simulate(a, exec, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (anyhow::Result<()>, String) {
        let cli = Cli::try_parse_from(std::iter::once("mbcr").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let res = run(&cli, &mut buf);
        (res, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn helpers_parse() {
        let m = parse_helpers("1:3+4+5;2:3+4+6").unwrap();
        assert_eq!(m[&1], vec![3, 4, 5]);
        assert_eq!(m[&2], vec![3, 4, 6]);
        assert_eq!(exit_code(&parse_helpers("1-3").unwrap_err()), EXIT_USAGE);
        assert!(parse_helpers("1:3;1:4").is_err());
        assert!(parse_helpers("1:x").is_err());
    }

    #[test]
    fn params_command() {
        let (res, text) = run_args(&["params", "-n", "5", "-k", "2", "-d", "3", "-r", "2"]);
        res.unwrap();
        assert!(text.contains("B        12"), "{text}");
        assert!(text.contains("alpha    7"));
        assert!(text.contains("gamma    7"));
        let (res, text) = run_args(&["params", "-n", "10", "-k", "3", "-d", "5", "-r", "3"]);
        res.unwrap();
        assert!(
            text.contains("B        30") && text.contains("alpha    12"),
            "{text}"
        );
        let (res, _) = run_args(&["params", "-n", "4", "-k", "3", "-d", "2", "-r", "2"]);
        let err = res.unwrap_err();
        assert_eq!(exit_code(&err), EXIT_USAGE);
        assert!(err.to_string().contains("k = d"));
    }

    #[test]
    fn field_flags_conflict() {
        let r = Cli::try_parse_from([
            "mbcr", "params", "-n", "3", "-k", "1", "-d", "1", "-r", "1", "-q", "7", "--gf256",
        ]);
        assert!(r.is_err());
        let (res, _) = run_args(&[
            "params", "-n", "3", "-k", "1", "-d", "1", "-r", "1", "-q", "8",
        ]);
        assert_eq!(exit_code(&res.unwrap_err()), EXIT_USAGE);
    }

    #[test]
    fn verify_and_fault_injection() {
        let (res, text) = run_args(&[
            "verify", "-n", "5", "-k", "2", "-d", "3", "-r", "2", "-q", "7",
        ]);
        res.unwrap();
        assert!(!text.contains(" FAIL"), "{text}");
        assert!(text.contains("CHECK bound.cutset_equality n=5,k=2,d=3,r=2 PASS"));
        let (res, text) = run_args(&[
            "verify",
            "-n",
            "5",
            "-k",
            "2",
            "-d",
            "3",
            "-r",
            "2",
            "-q",
            "7",
            "--inject-fault",
        ]);
        assert_eq!(exit_code(&res.unwrap_err()), EXIT_VERIFICATION);
        assert!(text.contains(" FAIL"));
    }

    #[test]
    fn bound_and_simulate() {
        let (res, text) = run_args(&["bound", "-n", "5", "-k", "2", "-d", "3", "-r", "2"]);
        res.unwrap();
        assert!(text.contains("(1,1)") && text.contains("(2)"), "{text}");
        let (res, text) = run_args(&[
            "simulate", "-n", "5", "-k", "2", "-d", "3", "-r", "2", "--stages", "20", "--seed", "7",
        ]);
        res.unwrap();
        assert!(
            text.contains("cumulative 280 symbols/stripe, expected 280"),
            "{text}"
        );
    }

    #[test]
    fn seeded_plans_are_reproducible() {
        let p = CodeParams::new(6, 2, 3, 2, Field::prime(7).unwrap()).unwrap();
        assert_eq!(seeded_plans(&p, 3, 5), seeded_plans(&p, 3, 5));
        assert!(seeded_plans(&p, 3, 5)
            .iter()
            .all(|pl| pl.failed().len() == 2));
    }
}
