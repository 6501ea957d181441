//! Shared fixtures for the criterion benchmarks.

use dpa_core::ModelParams;

/// Symmetric directed parameters used across benchmarks.
pub fn standard_dpa() -> ModelParams {
    ModelParams::dpa(0.3, 0.4, 1.0, 1.0).expect("valid benchmark parameters")
}

/// Reciprocating generalized parameters used across benchmarks.
pub fn standard_gdpa() -> ModelParams {
    ModelParams::gdpa(0.3, 0.4, 1.0, 1.0, 0.2, 0.1, 0.5).expect("valid benchmark parameters")
}
