//! Command line driver.
//!
//! Exit codes for `solve`: 10 when the program is coherent, 20 when it
//! is incoherent, 1 on any error. `from-qbf --check` exits 2 when the
//! translation and the direct QBF evaluation disagree. The remaining
//! commands use 0 for success and 1 for failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qasp::ast::{Program, QuantifiedProgram, Quantifier};
use qasp::eval::{coherent, quantified_answer_sets, Verdict};
use qasp::ground::ground;
use qasp::parser::{parse_aspq_named, parse_program_text_named, parse_qbf_file};
use qasp::qbf::{eval_qbf, qbf_to_aspq};

#[derive(Parser)]
#[command(name = "qasp", about = "Solver for answer set programs with quantifiers", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide coherence of a quantified program.
    Solve(SolveArgs),
    /// Translate a prenex QBF (QDIMACS or DNF dialect) into a quantified program.
    FromQbf(FromQbfArgs),
    /// Print the grounding of each block of a quantified program.
    Ground { file: PathBuf },
    /// Run the randomized cross-check battery.
    Selftest(SelftestArgs),
    /// Generate a benchmark instance with its expected verdict.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// The program; further files contribute facts to the first block.
    files: Vec<PathBuf>,
    /// Enumerate quantified answer sets (all of them when N is 0).
    #[arg(long, value_name = "N", num_args = 0..=1, default_missing_value = "0")]
    models: Option<usize>,
    /// Report the decisive model chain.
    #[arg(long)]
    trace: bool,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FromQbfArgs {
    file: PathBuf,
    /// Also evaluate both sides and verify they agree.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cases per sweep; the default is 200 for the engine sweeps and
    /// 500 for the translation sweep.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    /// One of: minmax-clique, pebbling, vc-dimension.
    problem: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    size: u8,
    /// Write the instance here, with the verdict in FILE.expected;
    /// otherwise print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct JsonLevel {
    branches: u64,
}

#[derive(Serialize)]
struct JsonStats {
    levels: Vec<JsonLevel>,
    time_ms: u64,
}

#[derive(Serialize)]
struct JsonTraceStep {
    quantifier: String,
    model: Vec<String>,
}

#[derive(Serialize)]
struct JsonOutput {
    coherent: bool,
    models: Vec<Vec<String>>,
    stats: JsonStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<JsonTraceStep>>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::FromQbf(args) => cmd_from_qbf(args),
        Command::Ground { file } => cmd_ground(&file),
        Command::Selftest(args) => cmd_selftest(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_program(files: &[PathBuf]) -> Result<QuantifiedProgram, String> {
    let Some((first, rest)) = files.split_first() else {
        return Err("no input file".to_string());
    };
    let text = read(first)?;
    let mut qp =
        parse_aspq_named(&text, &first.display().to_string()).map_err(|e| e.to_string())?;
    for path in rest {
        let text = read(path)?;
        let extra = parse_program_text_named(&text, &path.display().to_string())
            .map_err(|e| e.to_string())?;
        qp.blocks[0].1 = qp.blocks[0].1.union(&extra);
    }
    Ok(qp)
}

fn quantifier_name(q: Quantifier) -> &'static str {
    match q {
        Quantifier::Exists => "exists",
        Quantifier::Forall => "forall",
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, String> {
    let qp = load_program(&args.files)?;
    let verdict: Verdict = coherent(&qp).map_err(|e| e.to_string())?;
    let models: Vec<Vec<String>> = match args.models {
        Some(n) if verdict.coherent && qp.is_existential() => {
            let limit = if n == 0 { None } else { Some(n) };
            quantified_answer_sets(&qp, limit)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|m| m.atoms.iter().map(|a| a.to_string()).collect())
                .collect()
        }
        Some(_) if !qp.is_existential() => {
            return Err("quantified answer sets defined only for existential programs".to_string());
        }
        _ => Vec::new(),
    };

    if args.json {
        let out = JsonOutput {
            coherent: verdict.coherent,
            models,
            stats: JsonStats {
                levels: verdict
                    .stats
                    .levels
                    .iter()
                    .map(|l| JsonLevel { branches: l.branches })
                    .collect(),
                time_ms: verdict.stats.time_ms as u64,
            },
            trace: args.trace.then(|| {
                verdict
                    .trace
                    .iter()
                    .map(|s| JsonTraceStep {
                        quantifier: quantifier_name(s.quantifier).to_string(),
                        model: s.model.atoms.iter().map(|a| a.to_string()).collect(),
                    })
                    .collect()
            }),
        };
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("{}", if verdict.coherent { "COHERENT" } else { "INCOHERENT" });
        for m in &models {
            println!("{{{}}}", m.join(","));
        }
        if args.trace {
            for s in &verdict.trace {
                println!("trace: {} {}", quantifier_name(s.quantifier), s.model);
            }
        }
    }
    Ok(ExitCode::from(if verdict.coherent { 10 } else { 20 }))
}

fn cmd_from_qbf(args: FromQbfArgs) -> Result<ExitCode, String> {
    let text = read(&args.file)?;
    let qbf = parse_qbf_file(&text).map_err(|e| e.to_string())?;
    let qp = qbf_to_aspq(&qbf).map_err(|e| e.to_string())?;
    print!("{qp}");
    if args.check {
        let direct = eval_qbf(&qbf).map_err(|e| e.to_string())?;
        let translated = coherent(&qp).map_err(|e| e.to_string())?.coherent;
        if direct != translated {
            eprintln!(
                "check failed: direct evaluation says {direct}, translation says {translated}"
            );
            return Ok(ExitCode::from(2));
        }
        eprintln!("check passed: both sides say {direct}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ground(file: &PathBuf) -> Result<ExitCode, String> {
    let text = read(file)?;
    let qp = parse_aspq_named(&text, &file.display().to_string()).map_err(|e| e.to_string())?;
    for (q, p) in &qp.blocks {
        println!("%@{}", quantifier_name(*q));
        let g = ground(p).map_err(|e| e.to_string())?;
        print!("{}", Program::new(g.rules));
    }
    println!("%@constraint");
    let g = ground(&qp.constraint).map_err(|e| e.to_string())?;
    print!("{}", Program::new(g.rules));
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: SelftestArgs) -> Result<ExitCode, String> {
    let mut ok = true;
    for report in qasp::selftest::run_all(args.seed, args.count) {
        print!("{report}");
        ok &= report.ok();
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, String> {
    let (qp, expected) = qasp::corpus::generate(&args.problem, args.seed, args.size)
        .ok_or_else(|| {
            format!(
                "unknown problem `{}`; available: {}",
                args.problem,
                qasp::corpus::PROBLEMS.join(", ")
            )
        })?;
    let text = qp.to_string();
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))?;
            let sidecar = path.with_extension(format!(
                "{}expected",
                path.extension().map(|e| format!("{}.", e.to_string_lossy())).unwrap_or_default()
            ));
            fs::write(&sidecar, format!("{{\"coherent\": {expected}}}\n"))
                .map_err(|e| format!("{}: {e}", sidecar.display()))?;
        }
        None => {
            println!("% expected: {}", if expected { "coherent" } else { "incoherent" });
            print!("{text}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
