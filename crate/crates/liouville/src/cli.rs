//! Command-line front door. One subcommand per capability: building and
//! verifying co-Følner certificates, searching the combinatorial
//! objectives, evaluating one candidate, and simulating induced walks.
//!
//! Artifacts are JSON (or CSV for search sweeps) with exact rationals as
//! `p/q` strings, written deterministically: the same configuration and
//! seed produce byte-identical files for any `--workers` value. Exit codes:
//! 0 on success, 1 when a certificate fails verification (the artifact is
//! still written), 2 for usage errors.

use crate::action::{CoFolnerCertificate, PointSet, Semantics};
use crate::cofolner::{build_cofolner, BuildParams};
use crate::combsearch::{
    anneal_search, exhaustive_search, AnnealParams, Candidate, IntersectMode, Objective,
    SearchResult, DEFAULT_BUDGET,
};
use crate::dyadic::Dyadic;
use crate::ratio::Ratio;
use crate::walks::{lazy_f, lazy_fr, lazy_unit_translation, simulate};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LIOUVILLE_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "liouville",
    version,
    about = "Exact co-Følner certificates, combinatorial objectives, and induced walks \
             for Thompson's groups acting on dyadic rationals"
)]
pub struct Cli {
    /// Cap on worker threads (default: all cores). Results never depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Artifact file path (default: a per-subcommand name under $LIOUVILLE_OUT_DIR or `.`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format; `csv` selects sweep mode and applies to `search` only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build a co-Følner certificate for all n-subsets of a support.
    BuildCofolner(BuildCofolnerArgs),
    /// Re-verify a certificate artifact from its own contents.
    VerifyCofolner(VerifyCofolnerArgs),
    /// Search for high-ratio candidates, exhaustively or by annealing.
    Search(SearchArgs),
    /// Evaluate one objective on one explicit candidate.
    EvalObjective(EvalObjectiveArgs),
    /// Simulate the induced walk and dump endpoint counts.
    SimulateWalk(SimulateWalkArgs),
}

#[derive(clap::Args)]
struct BuildCofolnerArgs {
    /// Support points, comma-separated dyadics (e.g. `0,1/2^1,2`).
    #[arg(long)]
    support: String,
    /// Subset size the certificate covers (1 or 2).
    #[arg(long, default_value_t = 2)]
    n: u8,
    /// Verification target as `p/q`.
    #[arg(long)]
    epsilon: String,
    /// Multiplicative box side.
    #[arg(long = "L", default_value_t = 8)]
    side: u64,
    /// Shift count; derived from the box and target when omitted.
    #[arg(long = "N")]
    shifts: Option<u64>,
    /// Gap multipliers, comma-separated (default: all ones).
    #[arg(long)]
    r: Option<String>,
}

#[derive(clap::Args)]
struct VerifyCofolnerArgs {
    /// Certificate JSON produced by build-cofolner.
    #[arg(long)]
    certificate: PathBuf,
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Objective: `pair3`, `general(n)`, `chain(d)`, or `sequence`.
    #[arg(long, value_parser = parse_objective)]
    objective: Objective,
    /// Coordinate bound: entries range over 1..=B.
    #[arg(long = "B")]
    bound: u64,
    /// Maximum number of rows (sequence length for `sequence`).
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
    method: MethodArg,
    /// Proposal count per annealing chain.
    #[arg(long, default_value_t = 20_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Count each key only when one row witnesses every term.
    #[arg(long)]
    matched_rows: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Anneal,
}

#[derive(clap::Args)]
struct EvalObjectiveArgs {
    /// Objective: `pair3`, `general(n)`, `chain(d)`, or `sequence`.
    #[arg(long, value_parser = parse_objective)]
    objective: Objective,
    /// Rows, semicolon-separated (e.g. `2,2,9;9,2,2`).
    #[arg(long, conflicts_with = "sequence")]
    rows: Option<String>,
    /// One integer sequence, comma-separated.
    #[arg(long)]
    sequence: Option<String>,
    /// Count each key only when one row witnesses every term.
    #[arg(long)]
    matched_rows: bool,
}

#[derive(clap::Args)]
struct SimulateWalkArgs {
    /// Start point set, comma-separated dyadics.
    #[arg(long)]
    support: String,
    /// Walk length.
    #[arg(long, default_value_t = 64)]
    steps: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MeasureArg::LazyT)]
    measure: MeasureArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    /// ½ identity, ¼ each unit translation.
    LazyT,
    /// ½ identity, ⅛ each standard generator of F and inverse.
    LazyF,
    /// Generators of F plus unit translations, laziness ½.
    LazyFr,
}

/// Parses arguments from the process environment and runs. This is the
/// whole binary; `main` just forwards the exit code.
pub fn run() -> ExitCode {
    let cli = Cli::parse(); // usage errors exit 2 here
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        // Ignore the error when a pool already exists (tests, repeated calls).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    if cli.format == Format::Csv && !matches!(cli.command, Command::Search(_)) {
        bail!("--format csv applies to the search subcommand only");
    }
    match cli.command {
        Command::BuildCofolner(args) => build_cmd(args, cli.out),
        Command::VerifyCofolner(args) => verify_cmd(args, cli.out),
        Command::Search(args) => search_cmd(args, cli.out, cli.format),
        Command::EvalObjective(args) => eval_cmd(args, cli.out),
        Command::SimulateWalk(args) => walk_cmd(args, cli.out),
    }
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    Objective::from_str(s).map_err(|e| e.to_string())
}

fn parse_support(text: &str) -> Result<PointSet> {
    let points = text
        .split(',')
        .map(|tok| Dyadic::from_str(tok.trim()).with_context(|| format!("bad point `{tok}`")))
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(points).context("invalid support")
}

fn parse_u64_list(text: &str, what: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .with_context(|| format!("bad {what} `{tok}`"))
        })
        .collect()
}

fn artifact_path(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
        dir.join(default_name)
    })
}

fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_string(value)?;
    json.push('\n');
    write_artifact(path, &json)
}

fn build_cmd(args: BuildCofolnerArgs, out: Option<PathBuf>) -> Result<ExitCode> {
    let support = parse_support(&args.support)?;
    let epsilon: Ratio = args.epsilon.parse().context("bad --epsilon")?;
    if epsilon <= Ratio::zero() {
        bail!("--epsilon must be positive");
    }
    let multipliers = args
        .r
        .as_deref()
        .map(|r| parse_u64_list(r, "multiplier"))
        .transpose()?;
    let params = BuildParams {
        side: args.side,
        shifts: args.shifts,
        multipliers,
        ..BuildParams::default()
    };
    let cert = build_cofolner(&support, args.n, &epsilon, &params)?;
    let path = artifact_path(out, "certificate.json");
    write_json(&path, &cert)?;
    println!(
        "certificate: {} ({} elements, {} sets)",
        path.display(),
        cert.e.len(),
        cert.f.len()
    );
    println!(
        "achieved {} against target {}: verified={}",
        cert.achieved, epsilon, cert.verified
    );
    Ok(if cert.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Verdict artifact for `verify-cofolner`. Carries only the recomputation,
/// never the input path, so the bytes depend on the certificate alone.
#[derive(Serialize)]
struct VerifyReport {
    claimed: Ratio,
    recomputed: Ratio,
    target: Ratio,
    consistent: bool,
    verified: bool,
}

fn verify_cmd(args: VerifyCofolnerArgs, out: Option<PathBuf>) -> Result<ExitCode> {
    let raw = std::fs::read_to_string(&args.certificate)
        .with_context(|| format!("reading {}", args.certificate.display()))?;
    let cert: CoFolnerCertificate = serde_json::from_str(&raw).context("invalid certificate")?;
    if cert.e.is_empty() {
        bail!("certificate has an empty element family");
    }
    let achieved = cert.recompute_achieved(Semantics::Multiset)?;
    let consistent = achieved == cert.achieved;
    let verified = achieved <= cert.epsilon_target;
    let report = VerifyReport {
        claimed: cert.achieved.clone(),
        recomputed: achieved.clone(),
        target: cert.epsilon_target.clone(),
        consistent,
        verified,
    };
    let path = artifact_path(out, "verification.json");
    write_json(&path, &report)?;
    println!(
        "recomputed achieved {} against target {}: verified={} stored-achieved-consistent={}",
        achieved, cert.epsilon_target, verified, consistent
    );
    Ok(if verified && consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn mode_of(matched_rows: bool) -> IntersectMode {
    if matched_rows {
        IntersectMode::MatchedRows
    } else {
        IntersectMode::Weak
    }
}

fn run_search(args: &SearchArgs, b: u64, k: usize) -> Result<SearchResult> {
    let mode = mode_of(args.matched_rows);
    let result = match args.method {
        MethodArg::Exhaustive => exhaustive_search(&args.objective, b, k, mode, DEFAULT_BUDGET)?,
        MethodArg::Anneal => {
            let params = AnnealParams {
                steps: args.steps,
                seed: args.seed,
                ..AnnealParams::default()
            };
            anneal_search(&args.objective, b, k, mode, &params)?
        }
    };
    Ok(result)
}

fn search_cmd(args: SearchArgs, out: Option<PathBuf>, format: Format) -> Result<ExitCode> {
    match format {
        Format::Json => {
            let result = run_search(&args, args.bound, args.k)?;
            let path = artifact_path(out, "search.json");
            write_json(&path, &result)?;
            println!(
                "best ratio {} for {} within B={} k={} ({})",
                result.best_ratio,
                result.objective,
                args.bound,
                args.k,
                args.method.to_possible_value().unwrap().get_name()
            );
            println!("search result: {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Format::Csv => {
            // Sweep every (B, k) cell up to the given bounds.
            let k_min = match args.objective {
                Objective::Sequence => 3,
                _ => 1,
            };
            if args.k < k_min {
                bail!("--k must be at least {k_min} for this objective");
            }
            let mut csv = String::from("B,k,best_ratio\n");
            for b in 1..=args.bound {
                for k in k_min..=args.k {
                    let cell = run_search(&args, b, k)?;
                    csv.push_str(&format!("{},{},{}\n", b, k, cell.best_ratio));
                }
            }
            let path = artifact_path(out, "search.csv");
            write_artifact(&path, &csv)?;
            println!(
                "sweep over B=1..={} k={}..={}: {}",
                args.bound,
                k_min,
                args.k,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct EvalReport {
    objective: String,
    mode: IntersectMode,
    ratio: Ratio,
    candidate: Candidate,
}

fn eval_cmd(args: EvalObjectiveArgs, out: Option<PathBuf>) -> Result<ExitCode> {
    let candidate = match (&args.rows, &args.sequence) {
        (Some(rows), None) => Candidate::Rows(
            rows.split(';')
                .map(|row| parse_u64_list(row, "coordinate"))
                .collect::<Result<Vec<_>>>()?,
        ),
        (None, Some(seq)) => Candidate::Sequence(parse_u64_list(seq, "entry")?),
        _ => bail!("pass exactly one of --rows or --sequence"),
    };
    let mode = mode_of(args.matched_rows);
    let ratio = args.objective.evaluate(&candidate, mode)?;
    let report = EvalReport {
        objective: args.objective.to_string(),
        mode,
        ratio: ratio.clone(),
        candidate,
    };
    let path = artifact_path(out, "eval.json");
    write_json(&path, &report)?;
    println!("{} evaluates to {}", args.objective, ratio);
    println!("evaluation: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn walk_cmd(args: SimulateWalkArgs, out: Option<PathBuf>) -> Result<ExitCode> {
    let start = parse_support(&args.support)?;
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mu = match args.measure {
        MeasureArg::LazyT => lazy_unit_translation(),
        MeasureArg::LazyF => lazy_f(),
        MeasureArg::LazyFr => lazy_fr(),
    };
    let mut dist = simulate(&mu, &start, args.steps, args.trials, args.seed);
    dist.measure = args
        .measure
        .to_possible_value()
        .unwrap()
        .get_name()
        .to_string();
    let path = artifact_path(out, "walk.json");
    write_json(&path, &dist)?;
    println!(
        "{} trials of {} steps from {{{}}}: {} distinct endpoints",
        args.trials,
        args.steps,
        start.to_text(),
        dist.counts().distinct()
    );
    println!("distribution: {}", path.display());
    Ok(ExitCode::SUCCESS)
}
