use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use faer::Mat;
use serde::Serialize;
use thiserror::Error;

use super::{solve, Solution, SolveStatus, SolverSettings};
use crate::case_io::Network;
use crate::chordal;
use crate::conic_form::hermitian_eigenvalues;
use crate::network_model::{apply_objective, ObjectiveMode};
use crate::relaxations::{build, Relaxation, RelaxationKind, RelaxationOptions};

/// `λ₂/λ₁` at or below this counts as numerically rank one.
pub const RANK_ONE_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("upper bound must be positive, got {0}")]
    NonPositiveUpperBound(f64),
}

/// Optimality gap `100·(1 − lb/ub)` in percent. Negative values mean the
/// reference bound is not a valid upper bound.
pub fn gap(lb: f64, ub: f64) -> Result<f64, GapError> {
    if !(ub > 0.0) {
        return Err(GapError::NonPositiveUpperBound(ub));
    }
    Ok(100.0 * (1.0 - lb / ub))
}

/// `λ₂/λ₁` of the Hermitian matrix `re + j·im`, clamped to `[0, 1]`. Side-one
/// and zero matrices count as rank one.
pub fn rank_ratio(re: &Mat<f64>, im: &Mat<f64>) -> f64 {
    let eig = hermitian_eigenvalues(re, im);
    match eig.as_slice() {
        [.., l2, l1] if *l1 > 0.0 => (l2.max(0.0) / l1).min(1.0),
        _ => 0.0,
    }
}

/// Largest [`rank_ratio`] over the relaxation's Hermitian blocks at the solution.
pub fn rank_diagnostic(relaxation: &Relaxation, solution: &Solution) -> f64 {
    relaxation
        .rank_blocks
        .iter()
        .map(|map| {
            let (re, im) = map.evaluate(&solution.x);
            rank_ratio(&re, &im)
        })
        .fold(0.0, f64::max)
}

/// Best known feasible objective values, i.e. local AC-OPF optima.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBounds {
    entries: Vec<(String, ObjectiveMode, f64, String)>,
}

impl ReferenceBounds {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Bounds for the bundled cases, from MATPOWER's interior-point AC-OPF solver.
    pub fn bundled() -> Self {
        use ObjectiveMode::{Cost, Loss};
        let source = "MATPOWER MIPS local optimum";
        let table = [
            ("case5", Cost, 17551.89),
            ("case6ww", Cost, 3143.97),
            ("case9", Cost, 5296.69),
            ("case14", Cost, 8081.53),
            ("case30", Cost, 576.89),
            ("case57", Cost, 41737.79),
            ("case118", Cost, 129660.70),
            ("case5", Loss, 1001.06),
            ("case6ww", Loss, 216.84),
            ("case9", Loss, 317.32),
            ("case14", Loss, 259.55),
            ("case30", Loss, 191.09),
            ("case57", Loss, 1262.10),
            ("case118", Loss, 4251.23),
        ];
        Self {
            entries: table
                .into_iter()
                .map(|(c, m, v)| (c.to_string(), m, v, source.to_string()))
                .collect(),
        }
    }

    pub fn insert(&mut self, case: &str, mode: ObjectiveMode, value: f64, source: &str) {
        self.entries.retain(|(c, m, _, _)| !(c == case && *m == mode));
        self.entries.push((case.to_string(), mode, value, source.to_string()));
    }

    pub fn get(&self, case: &str, mode: ObjectiveMode) -> Option<f64> {
        self.entries
            .iter()
            .find(|(c, m, _, _)| c == case && *m == mode)
            .map(|e| e.2)
    }

    pub fn source(&self, case: &str, mode: ObjectiveMode) -> Option<&str> {
        self.entries
            .iter()
            .find(|(c, m, _, _)| c == case && *m == mode)
            .map(|e| e.3.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    pub case: String,
    pub kind: RelaxationKind,
    pub mode: ObjectiveMode,
    /// In $/h or MW; `NaN` without a solution.
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    pub gap_percent: Option<f64>,
    pub rank_ratio: f64,
    pub build_s: f64,
    pub solve_s: f64,
    pub status: SolveStatus,
    pub detail: String,
    /// SOCR was re-solved with the 3×3 encoding after a stall.
    pub retried_3x3: bool,
    pub iterations: usize,
}

impl RelaxationResult {
    pub fn is_failure(&self) -> bool {
        !self.status.has_value()
    }
}

fn status_rank(s: SolveStatus) -> u8 {
    match s {
        SolveStatus::Optimal => 0,
        SolveStatus::NearOptimal => 1,
        _ => 2,
    }
}

struct Attempt {
    relaxation: Relaxation,
    solution: Solution,
    build_s: f64,
    solve_s: f64,
}

fn attempt(
    network: &Network,
    kind: RelaxationKind,
    mode: ObjectiveMode,
    settings: &SolverSettings,
    options: RelaxationOptions,
) -> Result<Attempt, String> {
    let t0 = Instant::now();
    let objective = apply_objective(network, mode);
    let cliques = (kind == RelaxationKind::Chr).then(|| chordal::decompose(&chordal::build_graph(network)));
    let relaxation = build(kind, network, &objective, cliques.as_ref(), options).map_err(|e| e.to_string())?;
    let build_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let solution = solve(&relaxation.program, settings).map_err(|e| e.to_string())?;
    Ok(Attempt {
        relaxation,
        solution,
        build_s,
        solve_s: t1.elapsed().as_secs_f64(),
    })
}

/// Builds and solves one relaxation; failures are captured in the result.
pub fn run_case(
    case: &str,
    network: &Network,
    kind: RelaxationKind,
    mode: ObjectiveMode,
    settings: &SolverSettings,
    options: RelaxationOptions,
    bounds: &ReferenceBounds,
) -> RelaxationResult {
    let upper_bound = bounds.get(case, mode);
    let failed = |detail: String| RelaxationResult {
        case: case.to_string(),
        kind,
        mode,
        lower_bound: f64::NAN,
        upper_bound,
        gap_percent: None,
        rank_ratio: f64::NAN,
        build_s: 0.0,
        solve_s: 0.0,
        status: SolveStatus::Error,
        detail,
        retried_3x3: false,
        iterations: 0,
    };
    let mut a = match attempt(network, kind, mode, settings, options) {
        Ok(a) => a,
        Err(e) => return failed(e),
    };
    let mut retried = false;
    if kind == RelaxationKind::Socr && !options.socr_3x3 && a.solution.status != SolveStatus::Optimal {
        log::info!("{case}: SOCR ended {}, retrying with the 3x3 encoding", a.solution.detail);
        if let Ok(b) = attempt(network, kind, mode, settings, RelaxationOptions { socr_3x3: true }) {
            retried = true;
            let (build_s, solve_s) = (a.build_s + b.build_s, a.solve_s + b.solve_s);
            if status_rank(b.solution.status) <= status_rank(a.solution.status) {
                a = b;
            }
            a.build_s = build_s;
            a.solve_s = solve_s;
        }
    }
    let sol = &a.solution;
    let has_value = sol.status.has_value();
    let lower_bound = if has_value {
        a.relaxation.report_value(sol.objective)
    } else {
        f64::NAN
    };
    RelaxationResult {
        case: case.to_string(),
        kind,
        mode,
        lower_bound,
        upper_bound,
        gap_percent: upper_bound.filter(|_| has_value).and_then(|ub| gap(lower_bound, ub).ok()),
        rank_ratio: if has_value {
            rank_diagnostic(&a.relaxation, sol)
        } else {
            f64::NAN
        },
        build_s: a.build_s,
        solve_s: a.solve_s,
        status: sol.status,
        detail: sol.detail.clone(),
        retried_3x3: retried,
        iterations: sol.iterations,
    }
}

#[derive(Debug, Clone)]
pub struct BatchCase {
    pub name: String,
    pub network: Network,
}

/// Every `(case, mode, kind)` combination, in that nesting order.
pub fn run_batch(
    cases: &[BatchCase],
    kinds: &[RelaxationKind],
    modes: &[ObjectiveMode],
    settings: &SolverSettings,
    options: RelaxationOptions,
    bounds: &ReferenceBounds,
) -> Vec<RelaxationResult> {
    let mut out = Vec::new();
    for c in cases {
        for &mode in modes {
            for &kind in kinds {
                let r = run_case(&c.name, &c.network, kind, mode, settings, options, bounds);
                log::info!(
                    "{} {} {}: {} lb={:.4} in {:.2}s",
                    c.name,
                    kind,
                    mode,
                    r.status,
                    r.lower_bound,
                    r.solve_s
                );
                out.push(r);
            }
        }
    }
    out
}

/// One CSV record.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub case: String,
    pub relaxation: String,
    pub objective: String,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub gap_percent: Option<f64>,
    pub rank_ratio: Option<f64>,
    pub build_s: f64,
    pub solve_s: f64,
    pub status: String,
}

impl From<&RelaxationResult> for CsvRow {
    fn from(r: &RelaxationResult) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            case: r.case.clone(),
            relaxation: r.kind.as_str().to_string(),
            objective: r.mode.as_str().to_string(),
            lower_bound: finite(r.lower_bound),
            upper_bound: r.upper_bound,
            gap_percent: r.gap_percent,
            rank_ratio: finite(r.rank_ratio),
            build_s: r.build_s,
            solve_s: r.solve_s,
            status: r.status.as_str().to_string(),
        }
    }
}

pub fn write_csv<W: io::Write>(results: &[RelaxationResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if results.is_empty() {
        w.write_record([
            "case",
            "relaxation",
            "objective",
            "lower_bound",
            "upper_bound",
            "gap_percent",
            "rank_ratio",
            "build_s",
            "solve_s",
            "status",
        ])?;
    }
    for r in results {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned tables of gaps and solve times, one row per case and objective.
pub fn text_table(results: &[RelaxationResult]) -> String {
    let mut keys: Vec<(String, ObjectiveMode)> = Vec::new();
    let mut kinds: Vec<RelaxationKind> = Vec::new();
    for r in results {
        if !keys.iter().any(|k| k.0 == r.case && k.1 == r.mode) {
            keys.push((r.case.clone(), r.mode));
        }
        if !kinds.contains(&r.kind) {
            kinds.push(r.kind);
        }
    }
    let find = |case: &str, mode, kind| results.iter().find(|r| r.case == case && r.mode == mode && r.kind == kind);
    let mut out = String::new();
    for (title, pick) in [
        ("Optimality gap [%]", 0usize),
        ("Build + solve time [s]", 1usize),
    ] {
        let _ = write!(out, "{title}\n{:<12} {:<5} {:>12}", "case", "obj", "ub");
        for k in &kinds {
            let _ = write!(out, " {:>8}", k.to_string());
        }
        out.push('\n');
        for (case, mode) in &keys {
            let ub = results
                .iter()
                .find(|r| &r.case == case && r.mode == *mode)
                .and_then(|r| r.upper_bound)
                .map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = write!(out, "{case:<12} {:<5} {ub:>12}", mode.as_str());
            for &k in &kinds {
                let cell = match find(case, *mode, k) {
                    None => "".to_string(),
                    Some(r) if pick == 1 => format!("{:.2}", r.build_s + r.solve_s),
                    Some(r) => match (r.status, r.gap_percent) {
                        (s, Some(g)) if s == SolveStatus::Optimal => format!("{g:.2}"),
                        (s, Some(g)) if s == SolveStatus::NearOptimal => format!("{g:.2}*"),
                        (s, _) if s.has_value() => format!("{:.2}", r.lower_bound),
                        (s, _) => s.as_str().to_string(),
                    },
                };
                let _ = write!(out, " {cell:>8}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    if results.iter().any(|r| r.status == SolveStatus::NearOptimal) {
        out.push_str("* near-optimal: the solver stopped before reaching the tolerance\n");
    }
    out
}
