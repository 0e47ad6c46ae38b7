//! Solving programs, rank diagnostics, optimality gaps and batch reports.

mod compile;
mod report;

pub use report::{
    gap, rank_diagnostic, rank_ratio, run_batch, run_case, text_table, write_csv, BatchCase, CsvRow, GapError, ReferenceBounds,
    RelaxationResult, RANK_ONE_THRESHOLD,
};

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic_form::ConicProgram;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1.49e-8,
            max_iter: 200,
            time_limit: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("malformed standard form: {0}")]
    Contract(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped early; the best iterate is returned and flagged.
    NearOptimal,
    Infeasible,
    Unbounded,
    Error,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Error => "error",
        }
    }

    /// Optimal or near-optimal, i.e. the objective is meaningful.
    pub fn has_value(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Backend termination detail, e.g. `stalled` or `max-iterations`.
    pub detail: String,
    /// Primal objective including the constant offset.
    pub objective: f64,
    pub dual_objective: f64,
    /// Program variables.
    pub x: Vec<f64>,
    /// Multipliers of the standard-form rows that survive elimination, labelled
    /// by the constraint they came from.
    pub row_duals: Vec<(String, f64)>,
    /// Dual slack of each cone block, in solver slot coordinates.
    pub cone_duals: Vec<Vec<f64>>,
    pub residuals: conic_ipm::Residuals,
    pub iterations: usize,
    pub solve_time: Duration,
}

impl Solution {
    fn without_solve(prog: &ConicProgram, status: SolveStatus, detail: String) -> Self {
        Self {
            status,
            detail,
            objective: f64::NAN,
            dual_objective: f64::NAN,
            x: vec![0.0; prog.num_vars()],
            row_duals: Vec::new(),
            cone_duals: Vec::new(),
            residuals: Default::default(),
            iterations: 0,
            solve_time: Duration::ZERO,
        }
    }
}

/// Solves `prog` with the interior-point backend.
pub fn solve(prog: &ConicProgram, settings: &SolverSettings) -> Result<Solution, SolveError> {
    if !(settings.tol > 0.0) {
        return Err(SolveError::BadTolerance(settings.tol));
    }
    let compiled = compile::compile(prog);
    match &compiled.outcome {
        compile::Outcome::Ready => {}
        compile::Outcome::Unbounded(msg) => {
            return Ok(Solution::without_solve(prog, SolveStatus::Unbounded, msg.clone()))
        }
        compile::Outcome::Infeasible(msg) => {
            return Ok(Solution::without_solve(prog, SolveStatus::Infeasible, msg.clone()))
        }
    }
    log::debug!(
        "standard form: {} rows, {} slots, {} cones",
        compiled.problem.num_rows,
        compiled.problem.num_vars(),
        compiled.problem.cones.len()
    );
    let ipm = conic_ipm::Settings {
        tol: settings.tol,
        max_iter: settings.max_iter,
        time_limit: settings.time_limit,
    };
    let raw = conic_ipm::solve(&compiled.problem, &ipm).map_err(|e| SolveError::Contract(e.to_string()))?;
    use conic_ipm::Status as S;
    let (status, detail) = match raw.status {
        S::Optimal => (SolveStatus::Optimal, "optimal"),
        S::NearOptimal => (SolveStatus::NearOptimal, "near-optimal"),
        S::Stalled => (SolveStatus::NearOptimal, "stalled"),
        S::MaxIterations => (SolveStatus::NearOptimal, "max-iterations"),
        S::TimeLimit => (SolveStatus::NearOptimal, "time-limit"),
        S::PrimalInfeasible => (SolveStatus::Infeasible, "primal-infeasible"),
        S::DualInfeasible => (SolveStatus::Unbounded, "dual-infeasible"),
        S::NumericalError => (SolveStatus::Error, "numerical-error"),
    };
    let has_point = status.has_value();
    Ok(Solution {
        status,
        detail: detail.to_string(),
        objective: if has_point { raw.primal_objective + compiled.offset } else { f64::NAN },
        dual_objective: if has_point { raw.dual_objective + compiled.offset } else { f64::NAN },
        x: compiled.recover(&raw.x),
        row_duals: compiled.row_labels.iter().cloned().zip(raw.y.iter().copied()).collect(),
        cone_duals: compiled.block_slots.iter().map(|r| raw.s[r.clone()].to_vec()).collect(),
        residuals: raw.residuals,
        iterations: raw.iterations,
        solve_time: raw.solve_time,
    })
}
