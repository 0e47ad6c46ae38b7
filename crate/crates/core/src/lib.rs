//! Conic relaxations of the AC optimal power flow problem.
//!
//! The pipeline reads a MATPOWER case ([`case_io`]), derives branch-flow
//! coefficients ([`network_model`]), builds one of six relaxations
//! ([`relaxations`]) as a [`conic_form::ConicProgram`], and solves and reports
//! it ([`solve_report`]). [`chordal`] supplies the clique decomposition used by
//! the chordal relaxation.

pub mod case_io;
pub mod chordal;
pub mod conic_form;
pub mod network_model;
pub mod relaxations;
pub mod solve_report;
