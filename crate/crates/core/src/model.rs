//! Model parameters, attachment-rate constants, birth rates, and start states.
//!
//! Three model kinds are supported:
//!
//! * `Pa` — undirected preferential attachment: each step adds one node with
//!   `m` edges, each attaching to an existing node proportionally to degree.
//! * `Dpa` — directed preferential attachment with three event types: with
//!   probability `alpha` a new node with an outgoing edge, with probability
//!   `beta` a new edge between existing nodes, with probability
//!   `gamma = 1 - alpha - beta` a new node with an incoming edge. Targets are
//!   chosen proportionally to `i + delta_in`, sources to `j + delta_out`.
//! * `Gdpa` — generalised DPA: attachment weights gain cross-degree terms
//!   (`i + c*j + delta_in` for targets, `d*i + j + delta_out` for sources) and
//!   every inserted edge is made reciprocal with probability `rho`.
//!
//! The limiting degree law of a uniformly chosen node is the law of a pure
//! birth process on (in, out) stopped at an independent Exp(1) time. The birth
//! rates are affine in the degrees with slopes `c_in`/`c_out` (DPA) or
//! `g_in`/`g_out` (GDPA); those constants are computed here and consumed by the
//! analytic and absorbing-walk modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Pa,
    Dpa,
    Gdpa,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Pa => "pa",
            ModelKind::Dpa => "dpa",
            ModelKind::Gdpa => "gdpa",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Unvalidated parameter set, as parsed from a config file or CLI flags.
/// `validate` turns it into [`ModelParams`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawModelParams {
    pub model: Option<ModelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_out: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

/// Validated model parameters. `gamma` is always derived as `1 - alpha - beta`
/// and never stored, so the three event probabilities cannot drift apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams", into = "RawModelParams")]
pub struct ModelParams {
    kind: ModelKind,
    alpha: f64,
    beta: f64,
    delta_in: f64,
    delta_out: f64,
    /// Cross weight of out-degree in the target attachment (GDPA `c`).
    cross_in: f64,
    /// Cross weight of in-degree in the source attachment (GDPA `d`).
    cross_out: f64,
    rho: f64,
    m: u32,
}

impl ModelParams {
    /// Undirected preferential attachment with `m` edges per new node.
    pub fn pa(m: u32) -> Result<Self> {
        validate(RawModelParams {
            model: Some(ModelKind::Pa),
            m: Some(m),
            ..RawModelParams::default()
        })
    }

    /// Directed preferential attachment.
    pub fn dpa(alpha: f64, beta: f64, delta_in: f64, delta_out: f64) -> Result<Self> {
        validate(RawModelParams {
            model: Some(ModelKind::Dpa),
            alpha: Some(alpha),
            beta: Some(beta),
            delta_in: Some(delta_in),
            delta_out: Some(delta_out),
            ..RawModelParams::default()
        })
    }

    /// Generalised DPA with cross weights `c`, `d` and reciprocation `rho`.
    pub fn gdpa(
        alpha: f64,
        beta: f64,
        delta_in: f64,
        delta_out: f64,
        c: f64,
        d: f64,
        rho: f64,
    ) -> Result<Self> {
        validate(RawModelParams {
            model: Some(ModelKind::Gdpa),
            alpha: Some(alpha),
            beta: Some(beta),
            delta_in: Some(delta_in),
            delta_out: Some(delta_out),
            c: Some(c),
            d: Some(d),
            rho: Some(rho),
            ..RawModelParams::default()
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// Derived event probability `1 - alpha - beta`.
    pub fn gamma(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }
    pub fn delta_in(&self) -> f64 {
        self.delta_in
    }
    pub fn delta_out(&self) -> f64 {
        self.delta_out
    }
    /// GDPA target cross weight `c` (0 for DPA).
    pub fn cross_in(&self) -> f64 {
        self.cross_in
    }
    /// GDPA source cross weight `d` (0 for DPA).
    pub fn cross_out(&self) -> f64 {
        self.cross_out
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    /// Edges per step for PA.
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn expect_kind(&self, expected: ModelKind, _op: &'static str) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: expected.name(),
                got: self.kind.name(),
            })
        }
    }
}

impl From<ModelParams> for RawModelParams {
    fn from(p: ModelParams) -> Self {
        let mut raw = RawModelParams {
            model: Some(p.kind),
            ..RawModelParams::default()
        };
        match p.kind {
            ModelKind::Pa => raw.m = Some(p.m),
            ModelKind::Dpa => {
                raw.alpha = Some(p.alpha);
                raw.beta = Some(p.beta);
                raw.delta_in = Some(p.delta_in);
                raw.delta_out = Some(p.delta_out);
            }
            ModelKind::Gdpa => {
                raw.alpha = Some(p.alpha);
                raw.beta = Some(p.beta);
                raw.delta_in = Some(p.delta_in);
                raw.delta_out = Some(p.delta_out);
                raw.c = Some(p.cross_in);
                raw.d = Some(p.cross_out);
                raw.rho = Some(p.rho);
            }
        }
        raw
    }
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawModelParams) -> Result<Self> {
        validate(raw)
    }
}

fn require(v: Option<f64>, name: &'static str, kind: &'static str) -> Result<f64> {
    let v = v.ok_or_else(|| Error::InconsistentKind {
        kind,
        detail: format!("missing required parameter `{name}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::OutOfRange {
            name,
            value: v,
            detail: "must be finite",
        });
    }
    Ok(v)
}

fn forbid(v: Option<f64>, name: &'static str, kind: &'static str) -> Result<()> {
    match v {
        Some(_) => Err(Error::InconsistentKind {
            kind,
            detail: format!("parameter `{name}` does not apply to this model"),
        }),
        None => Ok(()),
    }
}

fn check_range(value: f64, name: &'static str, lo: f64, hi: f64) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::OutOfRange {
            name,
            value,
            detail: "outside admissible interval",
        });
    }
    Ok(())
}

/// Validate a raw parameter set into [`ModelParams`].
///
/// Beyond simple range checks this enforces the standing model assumptions:
/// `alpha > 0` and `gamma > 0` (both node-creating events must occur), strictly
/// positive `delta`'s for DPA, and for GDPA a positive cross weight whenever the
/// corresponding `delta` is zero (otherwise one attachment axis would have zero
/// total weight forever).
pub fn validate(raw: RawModelParams) -> Result<ModelParams> {
    let kind = raw.model.ok_or_else(|| Error::InconsistentKind {
        kind: "unknown",
        detail: "missing `model`".to_owned(),
    })?;
    match kind {
        ModelKind::Pa => {
            forbid(raw.alpha, "alpha", "pa")?;
            forbid(raw.beta, "beta", "pa")?;
            forbid(raw.delta_in, "delta_in", "pa")?;
            forbid(raw.delta_out, "delta_out", "pa")?;
            forbid(raw.c, "c", "pa")?;
            forbid(raw.d, "d", "pa")?;
            forbid(raw.rho, "rho", "pa")?;
            let m = raw.m.ok_or_else(|| Error::InconsistentKind {
                kind: "pa",
                detail: "missing required parameter `m`".to_owned(),
            })?;
            if m < 1 {
                return Err(Error::OutOfRange {
                    name: "m",
                    value: m as f64,
                    detail: "must be at least 1",
                });
            }
            Ok(ModelParams {
                kind,
                alpha: 0.0,
                beta: 0.0,
                delta_in: 0.0,
                delta_out: 0.0,
                cross_in: 0.0,
                cross_out: 0.0,
                rho: 0.0,
                m,
            })
        }
        ModelKind::Dpa | ModelKind::Gdpa => {
            let kname = kind.name();
            if raw.m.is_some() {
                return Err(Error::InconsistentKind {
                    kind: kname,
                    detail: "parameter `m` does not apply to this model".to_owned(),
                });
            }
            let alpha = require(raw.alpha, "alpha", kname)?;
            let beta = require(raw.beta, "beta", kname)?;
            let delta_in = require(raw.delta_in, "delta_in", kname)?;
            let delta_out = require(raw.delta_out, "delta_out", kname)?;
            check_range(alpha, "alpha", 0.0, 1.0)?;
            check_range(beta, "beta", 0.0, 1.0)?;
            if alpha + beta > 1.0 {
                return Err(Error::OutOfRange {
                    name: "beta",
                    value: beta,
                    detail: "alpha + beta must not exceed 1",
                });
            }
            check_range(delta_in, "delta_in", 0.0, f64::INFINITY)?;
            check_range(delta_out, "delta_out", 0.0, f64::INFINITY)?;
            let gamma = 1.0 - alpha - beta;
            if alpha <= 0.0 {
                return Err(Error::AssumptionViolated(
                    "alpha must be positive (out-edge node creation must occur)".to_owned(),
                ));
            }
            if gamma <= 0.0 {
                return Err(Error::AssumptionViolated(
                    "gamma = 1 - alpha - beta must be positive (in-edge node creation must occur)"
                        .to_owned(),
                ));
            }

            let (cross_in, cross_out, rho) = match kind {
                ModelKind::Dpa => {
                    forbid(raw.c, "c", "dpa")?;
                    forbid(raw.d, "d", "dpa")?;
                    forbid(raw.rho, "rho", "dpa")?;
                    if delta_in <= 0.0 || delta_out <= 0.0 {
                        return Err(Error::AssumptionViolated(
                            "dpa requires delta_in > 0 and delta_out > 0".to_owned(),
                        ));
                    }
                    (0.0, 0.0, 0.0)
                }
                ModelKind::Gdpa => {
                    // c, d and rho default to 0 when omitted.
                    let c = raw.c.unwrap_or(0.0);
                    let d = raw.d.unwrap_or(0.0);
                    let rho = raw.rho.unwrap_or(0.0);
                    for (v, name) in [(c, "c"), (d, "d"), (rho, "rho")] {
                        if !v.is_finite() {
                            return Err(Error::OutOfRange {
                                name: match name {
                                    "c" => "c",
                                    "d" => "d",
                                    _ => "rho",
                                },
                                value: v,
                                detail: "must be finite",
                            });
                        }
                    }
                    check_range(c, "c", 0.0, f64::INFINITY)?;
                    check_range(d, "d", 0.0, f64::INFINITY)?;
                    check_range(rho, "rho", 0.0, 1.0)?;
                    if delta_in <= 0.0 && c <= 0.0 {
                        return Err(Error::AssumptionViolated(
                            "gdpa with delta_in = 0 requires c > 0".to_owned(),
                        ));
                    }
                    if delta_out <= 0.0 && d <= 0.0 {
                        return Err(Error::AssumptionViolated(
                            "gdpa with delta_out = 0 requires d > 0".to_owned(),
                        ));
                    }
                    (c, d, rho)
                }
                ModelKind::Pa => unreachable!(),
            };

            Ok(ModelParams {
                kind,
                alpha,
                beta,
                delta_in,
                delta_out,
                cross_in,
                cross_out,
                rho,
                m: 0,
            })
        }
    }
}

/// Slopes of the affine birth rates of the stopped process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateConstants {
    /// DPA: in-rate `(i + delta_in) * c_in`, out-rate `(j + delta_out) * c_out`;
    /// both constants lie strictly inside (0, 1).
    Dpa { c_in: f64, c_out: f64 },
    /// GDPA: weight-to-rate factors for the in- and out-axis.
    Gdpa { g_in: f64, g_out: f64 },
}

impl RateConstants {
    /// In-axis constant (`c_in` or `g_in`).
    pub fn in_constant(&self) -> f64 {
        match *self {
            RateConstants::Dpa { c_in, .. } => c_in,
            RateConstants::Gdpa { g_in, .. } => g_in,
        }
    }
    /// Out-axis constant (`c_out` or `g_out`).
    pub fn out_constant(&self) -> f64 {
        match *self {
            RateConstants::Dpa { c_out, .. } => c_out,
            RateConstants::Gdpa { g_out, .. } => g_out,
        }
    }

    pub fn dpa(&self) -> Result<(f64, f64)> {
        match *self {
            RateConstants::Dpa { c_in, c_out } => Ok((c_in, c_out)),
            RateConstants::Gdpa { .. } => Err(Error::WrongKind {
                expected: "dpa",
                got: "gdpa",
            }),
        }
    }
}

/// Compute the rate constants for DPA or GDPA parameters.
///
/// DPA: `c_in = (alpha+beta) / (1 + delta_in*(alpha+gamma))` and symmetrically
/// for `c_out`. GDPA: `g_in = (alpha+beta) / ((1+rho)(1+c) + delta_in*(alpha+gamma))`
/// and symmetrically for `g_out`. With `rho = c = d = 0` the GDPA constants
/// reduce to the DPA ones exactly (same floating-point expressions).
pub fn rate_constants(params: &ModelParams) -> Result<RateConstants> {
    let alpha = params.alpha();
    let beta = params.beta();
    let gamma = params.gamma();
    let node_rate = alpha + gamma;
    match params.kind() {
        ModelKind::Pa => Err(Error::WrongKind {
            expected: "dpa or gdpa",
            got: "pa",
        }),
        ModelKind::Dpa => Ok(RateConstants::Dpa {
            c_in: (alpha + beta) / (1.0 + params.delta_in() * node_rate),
            c_out: (gamma + beta) / (1.0 + params.delta_out() * node_rate),
        }),
        ModelKind::Gdpa => {
            let rho = params.rho();
            Ok(RateConstants::Gdpa {
                g_in: (alpha + beta)
                    / ((1.0 + rho) * (1.0 + params.cross_in()) + params.delta_in() * node_rate),
                g_out: (gamma + beta)
                    / ((1.0 + rho) * (1.0 + params.cross_out()) + params.delta_out() * node_rate),
            })
        }
    }
}

/// DPA in-degree birth rate `lambda_in(i) = (i + delta_in) * c_in`.
pub fn lambda_in(i: u32, rc: &RateConstants, params: &ModelParams) -> Result<f64> {
    params.expect_kind(ModelKind::Dpa, "lambda_in")?;
    let (c_in, _) = rc.dpa()?;
    Ok((i as f64 + params.delta_in()) * c_in)
}

/// DPA out-degree birth rate `lambda_out(j) = (j + delta_out) * c_out`.
pub fn lambda_out(j: u32, rc: &RateConstants, params: &ModelParams) -> Result<f64> {
    params.expect_kind(ModelKind::Dpa, "lambda_out")?;
    let (_, c_out) = rc.dpa()?;
    Ok((j as f64 + params.delta_out()) * c_out)
}

/// GDPA birth rates from state `(i, j)`:
/// `(rate of in-only birth, rate of out-only birth, rate of simultaneous birth)`.
///
/// The in-weight is `i + c*j + delta_in`, the out-weight `d*i + j + delta_out`;
/// a plain in- or out-step fires at weight × `(1-rho) * g`, and the diagonal
/// (reciprocated) step collects the `rho` share of both axes.
pub fn gdpa_rates(i: u32, j: u32, rc: &RateConstants, params: &ModelParams) -> Result<(f64, f64, f64)> {
    params.expect_kind(ModelKind::Gdpa, "gdpa_rates")?;
    let (g_in, g_out) = match *rc {
        RateConstants::Gdpa { g_in, g_out } => (g_in, g_out),
        RateConstants::Dpa { .. } => {
            return Err(Error::WrongKind {
                expected: "gdpa",
                got: "dpa",
            })
        }
    };
    let rho = params.rho();
    let w_in = (i as f64 + params.cross_in() * j as f64 + params.delta_in()) * g_in;
    let w_out = (params.cross_out() * i as f64 + j as f64 + params.delta_out()) * g_out;
    Ok((
        w_in * (1.0 - rho),
        w_out * (1.0 - rho),
        w_in * rho + w_out * rho,
    ))
}

/// Initial state distribution of the stopped birth process.
///
/// A uniformly chosen node entered the network through an `alpha` event (state
/// `(0,1)`), a `gamma` event (state `(1,0)`), or — in GDPA — had its first edge
/// reciprocated (state `(1,1)` with probability `rho`). PA starts at degree `m`
/// with certainty (stored on the in-axis).
#[derive(Debug, Clone, PartialEq)]
pub struct StartDistribution {
    /// `((in, out), probability)` entries; probabilities sum to 1.
    pub entries: Vec<((u32, u32), f64)>,
}

impl StartDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }

    /// Largest start coordinates, used to size walk grids.
    pub fn max_coords(&self) -> (u32, u32) {
        self.entries.iter().fold((0, 0), |(mi, mj), &((i, j), _)| {
            (mi.max(i), mj.max(j))
        })
    }
}

pub fn start_distribution(params: &ModelParams) -> StartDistribution {
    match params.kind() {
        ModelKind::Pa => StartDistribution {
            entries: vec![((params.m(), 0), 1.0)],
        },
        ModelKind::Dpa => {
            let w = params.alpha() + params.gamma();
            StartDistribution {
                entries: vec![
                    ((0, 1), params.alpha() / w),
                    ((1, 0), params.gamma() / w),
                ],
            }
        }
        ModelKind::Gdpa => {
            let w = params.alpha() + params.gamma();
            let rho = params.rho();
            StartDistribution {
                entries: vec![
                    ((0, 1), (1.0 - rho) * params.alpha() / w),
                    ((1, 0), (1.0 - rho) * params.gamma() / w),
                    ((1, 1), rho),
                ],
            }
        }
    }
}
