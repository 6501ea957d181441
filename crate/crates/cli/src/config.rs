//! Config-file defaults and flag merging.
//!
//! Every subcommand accepts `--config path.json`; values given on the
//! command line always override the file. The file is a flat JSON object
//! whose keys mirror the long flag names (`delta_in` for `--delta-in`, and
//! so on); unknown keys are rejected so typos fail loudly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use dpa_core::{validate, Method, ModelKind, ModelParams, RawModelParams};

/// Optional defaults loaded from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta_in: Option<f64>,
    pub delta_out: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub rho: Option<f64>,
    pub m: Option<u32>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub replicas: Option<u32>,
    pub max_i: Option<u32>,
    pub max_j: Option<u32>,
    pub method: Option<String>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub tv_tol: Option<f64>,
    pub fit_lo: Option<usize>,
    pub fit_hi: Option<usize>,
    pub slope_tol: Option<f64>,
    pub reciprocity_tol: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
}

pub fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Model-selection flags shared by all subcommands.
#[derive(Debug, Default, clap::Args)]
pub struct ModelArgs {
    /// JSON config file with defaults; command-line flags override it
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Model family: pa, dpa, or gdpa (default dpa)
    #[arg(long)]
    pub model: Option<String>,
    /// Probability of a new node with an outgoing edge
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Probability of a new edge between existing nodes
    #[arg(long)]
    pub beta: Option<f64>,
    /// In-degree attachment offset
    #[arg(long)]
    pub delta_in: Option<f64>,
    /// Out-degree attachment offset
    #[arg(long)]
    pub delta_out: Option<f64>,
    /// Target-weight coefficient on out-degree (gdpa only)
    #[arg(long)]
    pub c: Option<f64>,
    /// Source-weight coefficient on in-degree (gdpa only)
    #[arg(long)]
    pub d: Option<f64>,
    /// Reciprocation probability (gdpa only)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Edges per new node (pa only)
    #[arg(long)]
    pub m: Option<u32>,
}

impl ModelArgs {
    pub fn load_file(&self) -> Result<FileConfig> {
        load_config(self.config.as_deref())
    }

    pub fn resolve_params(&self, file: &FileConfig) -> Result<ModelParams> {
        let name = self
            .model
            .clone()
            .or_else(|| file.model.clone())
            .unwrap_or_else(|| "dpa".to_owned());
        let raw = RawModelParams {
            model: Some(parse_model(&name)?),
            alpha: self.alpha.or(file.alpha),
            beta: self.beta.or(file.beta),
            delta_in: self.delta_in.or(file.delta_in),
            delta_out: self.delta_out.or(file.delta_out),
            c: self.c.or(file.c),
            d: self.d.or(file.d),
            rho: self.rho.or(file.rho),
            m: self.m.or(file.m),
        };
        Ok(validate(raw)?)
    }
}

pub fn parse_model(name: &str) -> Result<ModelKind> {
    match name {
        "pa" => Ok(ModelKind::Pa),
        "dpa" => Ok(ModelKind::Dpa),
        "gdpa" => Ok(ModelKind::Gdpa),
        other => bail!("unknown model `{other}` (expected pa, dpa, or gdpa)"),
    }
}

pub fn parse_method(name: &str) -> Result<Method> {
    match name {
        "closed-form" => Ok(Method::ClosedForm),
        "quadrature" => Ok(Method::Quadrature),
        "dp" => Ok(Method::Dp),
        other => bail!("unknown method `{other}` (expected closed-form, quadrature, or dp)"),
    }
}

/// Growth-run flags shared by `simulate` and `compare`.
#[derive(Debug, Default, clap::Args)]
pub struct RunArgs {
    /// Number of growth steps per replica
    #[arg(long)]
    pub steps: Option<u64>,
    /// RNG seed (all randomness derives from seed and stream; never the clock)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base RNG stream; replica r uses stream base + r
    #[arg(long)]
    pub stream: Option<u64>,
    /// Independent replicas, grown concurrently and merged (default 1)
    #[arg(long)]
    pub replicas: Option<u32>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub steps: u64,
    pub seed: u64,
    pub stream: u64,
    pub replicas: u32,
}

impl RunArgs {
    pub fn resolve(&self, file: &FileConfig) -> Result<RunSettings> {
        let steps = self
            .steps
            .or(file.steps)
            .context("missing --steps (growth length)")?;
        let replicas = self.replicas.or(file.replicas).unwrap_or(1);
        if replicas < 1 {
            bail!("--replicas must be at least 1");
        }
        Ok(RunSettings {
            steps,
            seed: self.seed.or(file.seed).unwrap_or(0),
            stream: self.stream.or(file.stream).unwrap_or(0),
            replicas,
        })
    }
}
