//! Joint degree pmf as absorption probabilities of a lattice random walk.
//!
//! A uniformly chosen node's degree pair evolves as a random walk on the
//! `(in, out)` lattice: from `(k, ℓ)` it steps right with probability
//! `λ_k^I/σ`, up with probability `λ_ℓ^O/σ` (GDPA adds the diagonal step at
//! `β^{I+O}/σ`), and is absorbed — keeps its degrees for ever — with the
//! remaining probability `1/σ`, where `σ` is the total outflow rate plus one.
//! Summing over all paths from the start states is a single dynamic-programming
//! sweep in increasing `k+ℓ` (every move strictly increases `k+ℓ`, so each
//! state's reach probability is final when its anti-diagonal is processed).
//!
//! This is the only exact method available for GDPA; for DPA it cross-checks
//! the closed form and the quadrature. Flow that would leave the grid is
//! accumulated into `leaked_mass`, so `Σ absorbed + leaked = 1` is testable to
//! machine precision regardless of grid size.

use crate::analytic::Axis;
use crate::error::{Error, Result};
use crate::model::{
    gdpa_rates, lambda_in, lambda_out, rate_constants, start_distribution, ModelKind, ModelParams,
    StartDistribution,
};
use crate::pmf::{JointPMF, Method};

/// Default square grid edge for desk-scale runs.
pub const DEFAULT_GRID: u32 = 512;

/// Default ceiling on acceptable leaked mass (an artifact of truncating the
/// infinite lattice, not a model quantity; callers with tail-sensitive uses
/// should lower it or enlarge the grid).
pub const DEFAULT_LEAK_CEILING: f64 = 0.05;

/// A truncated lattice walk: model parameters, grid bounds, start
/// distribution, and the leak ceiling used by [`LatticeWalkSpec::check_leak`].
#[derive(Debug, Clone)]
pub struct LatticeWalkSpec {
    params: ModelParams,
    max_in: u32,
    max_out: u32,
    start: StartDistribution,
    leak_ceiling: f64,
}

impl LatticeWalkSpec {
    /// Walk with the model's own start distribution. DPA and GDPA only.
    pub fn new(params: ModelParams, max_in: u32, max_out: u32) -> Result<Self> {
        let start = start_distribution(&params);
        Self::with_start(params, max_in, max_out, start)
    }

    /// Walk with an explicit start distribution (sub-probability masses are
    /// allowed; conservation then holds against the start total).
    pub fn with_start(
        params: ModelParams,
        max_in: u32,
        max_out: u32,
        start: StartDistribution,
    ) -> Result<Self> {
        if params.kind() == ModelKind::Pa {
            return Err(Error::WrongKind {
                expected: "dpa or gdpa",
                got: "pa",
            });
        }
        if start.entries.is_empty() || start.entries.iter().any(|&(_, p)| p.is_nan() || p < 0.0) {
            return Err(Error::AssumptionViolated(
                "start distribution must be nonempty with nonnegative masses".into(),
            ));
        }
        let total = start.total();
        if !(total > 0.0 && total <= 1.0 + 1e-9) {
            return Err(Error::AssumptionViolated(format!(
                "start distribution total {total} outside (0, 1]"
            )));
        }
        let (si, sj) = start.max_coords();
        if max_in < si || max_out < sj {
            return Err(Error::AssumptionViolated(format!(
                "grid ({max_in}, {max_out}) does not cover start state ({si}, {sj})"
            )));
        }
        Ok(LatticeWalkSpec {
            params,
            max_in,
            max_out,
            start,
            leak_ceiling: DEFAULT_LEAK_CEILING,
        })
    }

    pub fn with_leak_ceiling(mut self, ceiling: f64) -> Self {
        self.leak_ceiling = ceiling;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn max_in(&self) -> u32 {
        self.max_in
    }
    pub fn max_out(&self) -> u32 {
        self.max_out
    }
    pub fn start(&self) -> &StartDistribution {
        &self.start
    }
    pub fn leak_ceiling(&self) -> f64 {
        self.leak_ceiling
    }

    /// Flag a computed pmf whose leaked mass exceeds this spec's ceiling.
    ///
    /// The pmf itself is fine on the cells it covers (values are
    /// grid-independent); the error only signals that too much of the
    /// distribution lies outside the grid for downstream summaries to trust.
    pub fn check_leak(&self, pmf: &JointPMF) -> Result<()> {
        if pmf.leaked_mass() > self.leak_ceiling {
            Err(Error::GridTooSmall {
                leaked: pmf.leaked_mass(),
                ceiling: self.leak_ceiling,
            })
        } else {
            Ok(())
        }
    }
}

/// Absorption pmf of the lattice walk by a forward sweep in increasing `k+ℓ`.
///
/// Always returns the pmf for a valid spec; use [`LatticeWalkSpec::check_leak`]
/// to enforce the leak ceiling.
pub fn dp_absorption(spec: &LatticeWalkSpec) -> Result<JointPMF> {
    let params = spec.params();
    let rc = rate_constants(params)?;
    let gdpa = params.kind() == ModelKind::Gdpa;
    let cols = spec.max_out() as usize + 1;
    let idx = |k: u32, l: u32| k as usize * cols + l as usize;

    let mut reach = vec![0.0f64; (spec.max_in() as usize + 1) * cols];
    for &((k, l), p) in &spec.start().entries {
        reach[idx(k, l)] += p;
    }

    let mut pmf = JointPMF::zeroed(Method::Dp, *params, spec.max_in(), spec.max_out());
    let mut leaked = 0.0;
    for s in 0..=(spec.max_in() + spec.max_out()) {
        let k_lo = s.saturating_sub(spec.max_out());
        let k_hi = s.min(spec.max_in());
        for k in k_lo..=k_hi {
            let l = s - k;
            let r = reach[idx(k, l)];
            if r == 0.0 {
                continue;
            }
            let (rate_in, rate_out, rate_diag) = if gdpa {
                gdpa_rates(k, l, &rc, params)?
            } else {
                (
                    lambda_in(k, &rc, params)?,
                    lambda_out(l, &rc, params)?,
                    0.0,
                )
            };
            let sigma = rate_in + rate_out + rate_diag + 1.0;
            pmf.set(k, l, r / sigma);

            let flow_in = r * rate_in / sigma;
            if k < spec.max_in() {
                reach[idx(k + 1, l)] += flow_in;
            } else {
                leaked += flow_in;
            }
            let flow_out = r * rate_out / sigma;
            if l < spec.max_out() {
                reach[idx(k, l + 1)] += flow_out;
            } else {
                leaked += flow_out;
            }
            if rate_diag > 0.0 {
                let flow_diag = r * rate_diag / sigma;
                if k < spec.max_in() && l < spec.max_out() {
                    reach[idx(k + 1, l + 1)] += flow_diag;
                } else {
                    leaked += flow_diag;
                }
            }
        }
    }
    pmf.set_leaked_mass(leaked);
    Ok(pmf)
}

/// Axis sums of a walk pmf (indices 0..=max along the chosen axis).
pub fn dp_marginal(pmf: &JointPMF, axis: Axis) -> Vec<f64> {
    match axis {
        Axis::In => pmf.in_marginal(),
        Axis::Out => pmf.out_marginal(),
    }
}
