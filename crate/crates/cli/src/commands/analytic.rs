//! `dpa analytic`: evaluate the limiting degree distribution.
//!
//! Two shapes: a grid fill (writes/prints a full pmf) or a single-entry
//! query with `--i`/`--j` (prints one probability). Method support is
//! `closed-form` for pa and dpa, `quadrature` for dpa, `dp` for dpa and gdpa.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};

use dpa_core::{
    dp_absorption, joint_closedform, joint_quadrature, rate_constants, undirected_pa_pmf, Error,
    JointPMF, LatticeWalkSpec, Method, ModelKind, ModelParams,
};

use crate::config::{parse_method, FileConfig, ModelArgs};
use crate::manifest::Manifest;

const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, clap::Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// closed-form, quadrature, or dp (default dp; pa defaults to closed-form)
    #[arg(long)]
    pub method: Option<String>,
    /// Inclusive grid bound on in-degree (default 64 for dp, 32 otherwise)
    #[arg(long, value_name = "I")]
    pub max_i: Option<u32>,
    /// Inclusive grid bound on out-degree
    #[arg(long, value_name = "J")]
    pub max_j: Option<u32>,
    /// Single-entry query: in-degree
    #[arg(long, requires = "j")]
    pub i: Option<u32>,
    /// Single-entry query: out-degree
    #[arg(long, requires = "i")]
    pub j: Option<u32>,
    /// Quadrature relative tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory for pmf.json/pmf.csv (omit to print JSON to stdout)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Default method when none is requested: the walk grid, except for the
/// undirected model whose law only the closed form provides.
pub(crate) fn default_method_name(kind: ModelKind) -> &'static str {
    if kind == ModelKind::Pa {
        "closed-form"
    } else {
        "dp"
    }
}

pub(crate) fn check_supported(method: Method, kind: ModelKind) -> Result<(), Error> {
    let ok = matches!(
        (method, kind),
        (Method::ClosedForm, ModelKind::Pa | ModelKind::Dpa)
            | (Method::Quadrature, ModelKind::Dpa)
            | (Method::Dp, ModelKind::Dpa | ModelKind::Gdpa)
    );
    if ok {
        Ok(())
    } else {
        Err(Error::MethodUnsupported {
            method: method.name(),
            kind: kind.name(),
        })
    }
}

fn single_value(
    method: Method,
    params: &ModelParams,
    i: u32,
    j: u32,
    tol: f64,
) -> Result<f64> {
    match method {
        Method::ClosedForm if params.kind() == ModelKind::Pa => {
            if j != 0 {
                bail!("the pa degree law is univariate; query it with --j 0");
            }
            Ok(undirected_pa_pmf(params.m(), i))
        }
        Method::ClosedForm => {
            let rc = rate_constants(params)?;
            Ok(joint_closedform(i, j, &rc, params)?)
        }
        Method::Quadrature => {
            let rc = rate_constants(params)?;
            Ok(joint_quadrature(i, j, &rc, params, tol)?)
        }
        Method::Dp => {
            // Absorption weights are grid-independent, so the minimal grid
            // containing (i, j) gives the exact entry.
            let spec = LatticeWalkSpec::new(*params, i, j)?;
            Ok(dp_absorption(&spec)?.get(i, j))
        }
        Method::Empirical => unreachable!("not a CLI method"),
    }
}

pub(crate) fn grid_pmf(
    method: Method,
    params: &ModelParams,
    max_i: u32,
    max_j: u32,
    tol: f64,
) -> Result<JointPMF> {
    match method {
        Method::Dp => {
            let spec = LatticeWalkSpec::new(*params, max_i, max_j)?;
            Ok(dp_absorption(&spec)?)
        }
        Method::ClosedForm if params.kind() == ModelKind::Pa => {
            let mut pmf = JointPMF::zeroed(Method::ClosedForm, *params, max_i, 0);
            for i in 0..=max_i {
                pmf.set(i, 0, undirected_pa_pmf(params.m(), i));
            }
            let total = pmf.total_mass();
            pmf.set_leaked_mass((1.0 - total).max(0.0));
            Ok(pmf)
        }
        Method::ClosedForm | Method::Quadrature => {
            let rc = rate_constants(params)?;
            let mut pmf = JointPMF::zeroed(method, *params, max_i, max_j);
            for i in 0..=max_i {
                for j in 0..=max_j {
                    let p = match method {
                        Method::ClosedForm => joint_closedform(i, j, &rc, params)?,
                        _ => joint_quadrature(i, j, &rc, params, tol)?,
                    };
                    pmf.set(i, j, p);
                }
            }
            let total = pmf.total_mass();
            pmf.set_leaked_mass((1.0 - total).max(0.0));
            Ok(pmf)
        }
        Method::Empirical => unreachable!("not a CLI method"),
    }
}

fn default_grid(method: Method, kind: ModelKind, file: &FileConfig, args: &AnalyticArgs) -> (u32, u32) {
    let fallback = if method == Method::Dp { 64 } else { 32 };
    let max_i = args.max_i.or(file.max_i).unwrap_or(fallback);
    let max_j = if kind == ModelKind::Pa {
        0
    } else {
        args.max_j.or(file.max_j).unwrap_or(fallback)
    };
    (max_i, max_j)
}

pub fn run(args: AnalyticArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let file = args.model.load_file()?;
    let params = args.model.resolve_params(&file)?;
    let method_name = args
        .method
        .clone()
        .or_else(|| file.method.clone())
        .unwrap_or_else(|| default_method_name(params.kind()).to_owned());
    let method = parse_method(&method_name)?;
    check_supported(method, params.kind())?;
    let tol = args.tol.or(file.tol).unwrap_or(DEFAULT_QUAD_TOL);
    let out = args.out.clone().or_else(|| file.out.clone());

    let mut manifest = Manifest::new("analytic", params);
    manifest.method = Some(method.name());

    if let (Some(i), Some(j)) = (args.i, args.j) {
        let value = single_value(method, &params, i, j, tol)?;
        println!("p({i},{j}) [{}] = {value:.15}", method.name());
        manifest.grid = Some([i, j]);
        manifest.wall_time_seconds = started.elapsed().as_secs_f64();
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
        }
        manifest.emit(out.as_deref())?;
        return Ok(ExitCode::SUCCESS);
    }

    let (max_i, max_j) = default_grid(method, params.kind(), &file, &args);
    let pmf = grid_pmf(method, &params, max_i, max_j, tol)?;
    manifest.grid = Some([max_i, max_j]);

    match &out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            pmf.write_json_file(&dir.join("pmf.json"))?;
            pmf.write_csv_file(&dir.join("pmf.csv"))?;
            manifest.outputs = vec!["pmf.json".to_owned(), "pmf.csv".to_owned()];
            println!(
                "analytic [{}]: grid {max_i}x{max_j}, on-grid mass {:.6}, leaked {:.6} -> {}",
                method.name(),
                pmf.total_mass(),
                pmf.leaked_mass(),
                dir.display(),
            );
        }
        None => {
            println!(
                "{}",
                serde_json::to_string_pretty(&pmf).map_err(|e| Error::Format(e.to_string()))?
            );
        }
    }
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.emit(out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
