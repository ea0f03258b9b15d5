use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flowsched::instance::{generate_random, GeneratorParams, Instance};
use flowsched::verifier::Fault;
use flowsched_cli::bench::{failure_path, run_grid};
use flowsched_cli::grid::Grid;
use flowsched_cli::run::{self, Objective, RunError, ScheduleFile, SolveSummary, TraceFile};

#[derive(Parser)]
#[command(name = "flowsched", version, about = "LP-rounding schedulers for flow-time on unrelated machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Total,
    Max,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        pmax: i64,
        #[arg(long)]
        rmax: i64,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance, audit the run and print metrics as JSON.
    Solve {
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        #[arg(long = "in")]
        input: PathBuf,
        /// Assignment, schedule and metrics.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-round rounding trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Audit report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Try every processing time as the size guess and keep the best.
        #[arg(long)]
        preprocess: bool,
        /// Skip the audit (timing runs only).
        #[arg(long)]
        no_audit: bool,
        /// Corrupt the artifacts before auditing: slot_shift, machine_swap,
        /// round_deletion, schedule_tamper or lower_bound.
        #[arg(long, value_parser = parse_fault)]
        inject_fault: Option<Fault>,
    },
    /// Compare both algorithms against brute-force optima.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Generate, solve, audit and compare over a parameter grid.
    Bench {
        /// e.g. "n=2..5;m=1..2;pmax=2,4;rmax=0,4;density=1.0,0.7;seeds=0..9"
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    Fault::parse(s).ok_or_else(|| format!("unknown fault {s:?}"))
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| RunError::Input(format!("cannot write {}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn generate(params: GeneratorParams, out: &Path) -> Result<(), RunError> {
    if params.n == 0 || params.m == 0 || params.p_max < 1 || params.r_max < 0 {
        return Err(RunError::Usage("need n >= 1, m >= 1, pmax >= 1, rmax >= 0".into()));
    }
    if !(params.density > 0.0 && params.density <= 1.0) {
        return Err(RunError::Usage(format!(
            "density must lie in (0, 1], got {}",
            params.density
        )));
    }
    generate_random(params).save(out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    objective: ObjectiveArg,
    input: &Path,
    out: Option<&Path>,
    trace: Option<&Path>,
    report: Option<&Path>,
    preprocess: bool,
    no_audit: bool,
    fault: Option<Fault>,
) -> Result<(), RunError> {
    let inst = Instance::load(input)?;
    let objective = match objective {
        ObjectiveArg::Total => Objective::Total,
        ObjectiveArg::Max => Objective::Max,
    };
    let mut outcome = run::solve(&inst, objective, preprocess)?;
    if let Some(fault) = fault {
        run::inject(&mut outcome, fault)?;
    }
    let verdict = if no_audit {
        eprintln!("warning: audit skipped (--no-audit); results are unchecked");
        None
    } else {
        Some(run::audit(&outcome))
    };
    if let Some(path) = out {
        write(path, &json(&ScheduleFile::new(&inst, &outcome)))?;
    }
    if let Some(path) = trace {
        write(path, &json(&TraceFile::new(&outcome)))?;
    }
    if let (Some(path), Some(r)) = (report, &verdict) {
        write(path, &json(r))?;
    }
    let status = match &verdict {
        None => "skipped",
        Some(r) if r.pass => "pass",
        Some(_) => "fail",
    };
    print!("{}", json(&SolveSummary::new(&inst, &outcome, status)));
    match verdict {
        Some(r) if !r.pass => {
            let names: Vec<&str> = r.failed().iter().map(|c| c.check.as_str()).collect();
            Err(RunError::Audit(format!("audit failed: {}", names.join(", "))))
        }
        _ => Ok(()),
    }
}

fn bench(spec: &str, out: &Path) -> Result<(), RunError> {
    let grid = Grid::parse(spec).map_err(|e| RunError::Usage(e.to_string()))?;
    match run_grid(spec, &grid) {
        Ok(report) => write(out, &json(&report)),
        Err(failure) => {
            let path = failure_path(out, &failure.params);
            failure.instance.save(&path)?;
            eprintln!("failing instance written to {}", path.display());
            Err(failure.error)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            n,
            m,
            pmax,
            rmax,
            density,
            seed,
            out,
        } => generate(
            GeneratorParams {
                n,
                m,
                p_max: pmax,
                r_max: rmax,
                density,
                seed,
            },
            &out,
        ),
        Command::Solve {
            objective,
            input,
            out,
            trace,
            report,
            preprocess,
            no_audit,
            inject_fault,
        } => solve(
            objective,
            &input,
            out.as_deref(),
            trace.as_deref(),
            report.as_deref(),
            preprocess,
            no_audit,
            inject_fault,
        ),
        Command::Compare { input } => Instance::load(&input)
            .map_err(RunError::from)
            .and_then(|inst| run::compare(&inst))
            .map(|c| print!("{}", json(&c))),
        Command::Bench { grid, out } => bench(&grid, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                RunError::Input(_) => 1,
                RunError::Usage(_) => 2,
                RunError::Audit(_) => 3,
            })
        }
    }
}
