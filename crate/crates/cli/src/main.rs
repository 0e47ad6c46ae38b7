use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use opf_relax::case_io::{self, bundled, Network};
use opf_relax::chordal;
use opf_relax::network_model::ObjectiveMode;
use opf_relax::relaxations::{RelaxationKind, RelaxationOptions};
use opf_relax::solve_report::{
    run_batch, run_case, text_table, write_csv, BatchCase, ReferenceBounds, RelaxationResult, SolverSettings,
};

mod manifest;

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "opf-relax", version, about = "Conic relaxations of AC optimal power flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve one relaxation of one case.
    Solve {
        /// MATPOWER file, or the name of a bundled case such as `case9`.
        #[arg(long)]
        case: String,
        #[arg(long, value_parser = parse_kind)]
        relaxation: RelaxationKind,
        #[arg(long, default_value = "cost", value_parser = parse_mode)]
        objective: ObjectiveMode,
        /// Encode SOCR pairs as 3×3 PSD blocks.
        #[arg(long)]
        socr_3x3: bool,
        #[arg(long, default_value_t = 1.49e-8)]
        tol: f64,
        /// Reference upper bound for the gap; defaults to the bundled value.
        #[arg(long)]
        upper_bound: Option<f64>,
        /// Write the result as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (case, relaxation, objective) listed in a TOML manifest.
    Batch {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Print the chordal extension and maximal cliques of a case.
    Cliques {
        #[arg(long)]
        case: String,
        /// Emit Graphviz instead of text.
        #[arg(long)]
        dot: bool,
    },
}

fn parse_kind(s: &str) -> Result<RelaxationKind, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<ObjectiveMode, String> {
    s.parse()
}

/// Bad input: unreadable files, malformed cases or manifests.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| InputError(e).into())
}

/// Existing files win over bundled names.
fn resolve_case(spec: &str, base: Option<&Path>) -> Result<(String, Network)> {
    let path = match base {
        Some(dir) if Path::new(spec).is_relative() => dir.join(spec),
        _ => PathBuf::from(spec),
    };
    if path.is_file() {
        let net = case_io::load_case(&path).with_context(|| format!("loading {}", path.display()))?;
        return Ok((net.name.clone(), net));
    }
    if bundled::text(spec).is_some() {
        return Ok((spec.to_string(), bundled::load(spec)?));
    }
    bail!(
        "`{spec}` is neither a readable file nor a bundled case ({})",
        bundled::NAMES.join(", ")
    )
}

fn write_results(results: &[RelaxationResult], out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_csv(results, file)?;
    }
    Ok(())
}

fn exit_for(results: &[RelaxationResult]) -> ExitCode {
    if results.iter().any(RelaxationResult::is_failure) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            case,
            relaxation,
            objective,
            socr_3x3,
            tol,
            upper_bound,
            out,
        } => {
            if !(tol > 0.0) {
                return Err(InputError(anyhow::anyhow!("--tol must be positive")).into());
            }
            let (name, network) = input(resolve_case(&case, None))?;
            let mut bounds = ReferenceBounds::bundled();
            if let Some(ub) = upper_bound {
                bounds.insert(&name, objective, ub, "command line");
            }
            let settings = SolverSettings {
                tol,
                ..Default::default()
            };
            let r = run_case(
                &name,
                &network,
                relaxation,
                objective,
                &settings,
                RelaxationOptions { socr_3x3 },
                &bounds,
            );
            print_result(&r)?;
            let results = [r];
            input(write_results(&results, out.as_deref()))?;
            Ok(exit_for(&results))
        }
        Command::Batch { manifest } => {
            let text = input(
                std::fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display())),
            )?;
            let m: Manifest = input(toml::from_str(&text).with_context(|| format!("parsing {}", manifest.display())))?;
            let base = manifest.parent().map(Path::to_path_buf);
            let mut cases = Vec::new();
            for spec in &m.cases {
                let (name, network) = input(resolve_case(spec, base.as_deref()))?;
                cases.push(BatchCase { name, network });
            }
            let mut bounds = ReferenceBounds::bundled();
            for b in &m.bounds {
                bounds.insert(&b.case, b.objective, b.value, "manifest");
            }
            let settings = SolverSettings {
                tol: m.tol,
                max_iter: m.max_iter,
                time_limit: m.time_limit_s.map(Duration::from_secs_f64),
            };
            if !(settings.tol > 0.0) {
                return Err(InputError(anyhow::anyhow!("tol must be positive")).into());
            }
            let results = run_batch(
                &cases,
                &m.relaxations,
                &m.objectives,
                &settings,
                RelaxationOptions { socr_3x3: m.socr_3x3 },
                &bounds,
            );
            print!("{}", text_table(&results));
            for r in results.iter().filter(|r| r.is_failure()) {
                eprintln!("{} {} {}: {} ({})", r.case, r.kind, r.mode, r.status, r.detail);
            }
            let csv = m.csv.as_ref().map(|p| match &base {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            });
            input(write_results(&results, csv.as_deref()))?;
            Ok(exit_for(&results))
        }
        Command::Cliques { case, dot } => {
            let (_, network) = input(resolve_case(&case, None))?;
            let g = chordal::build_graph(&network);
            let d = chordal::decompose(&g);
            let labels: Vec<usize> = network.buses.iter().map(|b| b.id).collect();
            let text = if dot {
                d.to_dot(&g, Some(&labels))
            } else {
                d.to_text(Some(&labels))
            };
            io::stdout().write_all(text.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_result(r: &RelaxationResult) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "case        {}", r.case)?;
    writeln!(out, "relaxation  {} ({})", r.kind, r.mode)?;
    let status = if r.retried_3x3 {
        format!("{} ({}, after 3x3 retry)", r.status, r.detail)
    } else {
        format!("{} ({})", r.status, r.detail)
    };
    writeln!(out, "status      {status}")?;
    if r.status.has_value() {
        writeln!(out, "lower bound {:.4} {}", r.lower_bound, r.mode.unit())?;
    }
    if let Some(ub) = r.upper_bound {
        writeln!(out, "upper bound {ub:.2} {}", r.mode.unit())?;
    }
    if let Some(g) = r.gap_percent {
        writeln!(out, "gap         {g:.4} %")?;
    }
    if r.rank_ratio.is_finite() {
        writeln!(out, "rank ratio  {:.3e}", r.rank_ratio)?;
    }
    writeln!(
        out,
        "time        build {:.3} s, solve {:.3} s, {} iterations",
        r.build_s, r.solve_s, r.iterations
    )?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<InputError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
