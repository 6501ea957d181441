//! Directed preferential-attachment growth models and their limiting joint
//! in/out-degree distributions.
//!
//! The crate covers three models — undirected preferential attachment (PA),
//! directed preferential attachment (DPA), and its generalisation with
//! cross-degree weights and reciprocation (GDPA) — and computes the limiting
//! distribution of a uniformly chosen node's `(in, out)` degree pair by three
//! independent routes:
//!
//! * **closed form** ([`joint_closedform`]): exact alternating double sums,
//!   evaluated in rational arithmetic near the origin and in compensated
//!   log-space beyond (DPA only);
//! * **quadrature** ([`joint_quadrature`]): adaptive integration of the
//!   two-sided birth-process representation stopped at an independent
//!   exponential time (DPA only);
//! * **dynamic programming** ([`dp_absorption`]): absorption probabilities of
//!   the embedded lattice walk on a finite grid, with out-of-grid mass
//!   tracked explicitly (DPA and GDPA).
//!
//! [`simulate`] grows the corresponding random graphs with constant-time
//! attachment sampling, and [`stats`] compares empirical degree data against
//! the analytic predictions (total-variation distance, tail-slope fits).
//!
//! Known discrepancies between commonly printed forms of these formulas and
//! the forms used here are documented in `ERRATA.md` at the repository root.

pub mod absorb;
pub mod analytic;
pub mod error;
pub mod io;
pub mod model;
pub mod pmf;
pub mod simulate;
pub mod stats;

pub use absorb::{dp_absorption, dp_marginal, LatticeWalkSpec, DEFAULT_GRID, DEFAULT_LEAK_CEILING};
pub use analytic::{
    argmax_r, bivariate_tail_exponent, falling_factorial, fixed_other_tail_exponents,
    joint_closedform, joint_closedform_triangle, joint_closedform_with_threshold,
    joint_quadrature, marginal_at_t,
    marginal_stopped, marginal_stopped_ratio_form, marginal_stopped_vec, marginal_tail_exponents,
    undirected_pa_pmf, yule_pmf, Axis, TailArgmax, DEFAULT_RATIONAL_THRESHOLD,
};
pub use error::{Error, Result};
pub use model::{
    gdpa_rates, lambda_in, lambda_out, rate_constants, start_distribution, validate, ModelKind,
    ModelParams, RateConstants, RawModelParams, StartDistribution,
};
pub use pmf::{JointPMF, Method};
pub use simulate::{degree_snapshot, grow_dpa, grow_gdpa, grow_pa, GrowthGraph, RngSeed};
pub use stats::{
    ccdf, empirical_joint, expected_reciprocity, loglog_slope, quadrature_tail_slope, reciprocity,
    tv_distance, Binning, DegreeHistogram, EmpiricalPMF, TailReport,
};
