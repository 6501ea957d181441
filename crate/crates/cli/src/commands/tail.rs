//! `dpa tail`: tail exponents along rays `(n, ⌊s·n^r⌋)` and the ray that
//! maximizes the joint tail, with optional quadrature verification.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;

use dpa_core::{
    argmax_r, bivariate_tail_exponent, marginal_tail_exponents, quadrature_tail_slope,
    rate_constants,
};

use crate::config::ModelArgs;
use crate::manifest::Manifest;

/// Probe sizes for `--verify`; geometric so the fit spans a decade.
const VERIFY_N: [u32; 5] = [50, 100, 200, 400, 800];

#[derive(Debug, clap::Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Ray exponent r: study p(n, floor(s*n^r)) as n grows
    #[arg(long)]
    pub r: Option<f64>,
    /// Ray prefactor s (default 1)
    #[arg(long)]
    pub s: Option<f64>,
    /// Fit a quadrature slope along the ray and gate it on --verify-tol
    #[arg(long, requires = "r")]
    pub verify: bool,
    /// Allowed |fitted - predicted| under --verify (exit 1 beyond)
    #[arg(long, default_value_t = 0.2)]
    pub verify_tol: f64,
    /// Print the slope-maximizing ray classification and exit
    #[arg(long)]
    pub argmax: bool,
    /// Output directory for tail.json / tail.csv
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub fn run(args: TailArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let file = args.model.load_file()?;
    let params = args.model.resolve_params(&file)?;
    let rc = rate_constants(&params)?;
    let out = args.out.clone().or_else(|| file.out.clone());
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
    }
    let mut manifest = Manifest::new("tail", params);

    if args.argmax {
        let classification = argmax_r(&rc, &params)?;
        println!("{classification}");
        manifest.wall_time_seconds = started.elapsed().as_secs_f64();
        manifest.emit(out.as_deref())?;
        return Ok(ExitCode::SUCCESS);
    }

    let s = args.s.or(file.s).unwrap_or(1.0);
    if let Some(r) = args.r.or(file.r) {
        let predicted = bivariate_tail_exponent(r, &rc, &params)?;
        println!("ray r={r} s={s}: predicted slope {predicted:.6}");
        let mut pass = true;
        if args.verify {
            let report = quadrature_tail_slope(r, s, &VERIFY_N, &rc, &params)?;
            let deviation = report.deviation().expect("prediction attached");
            pass = deviation <= args.verify_tol;
            println!(
                "ray r={r} s={s}: fitted slope {:.6} over n in [{}, {}] (|deviation| {:.4}, tolerance {}) {}",
                report.fitted_slope,
                report.fit_range[0],
                report.fit_range[1],
                deviation,
                args.verify_tol,
                if pass { "PASS" } else { "FAIL" },
            );
            if let Some(dir) = &out {
                std::fs::write(
                    dir.join("tail.json"),
                    serde_json::to_string_pretty(&report)? + "\n",
                )?;
                manifest.outputs = vec!["tail.json".to_owned()];
            }
            manifest.tolerances = serde_json::json!({ "verify": args.verify_tol });
        } else if let Some(dir) = &out {
            let json = serde_json::json!({ "r": r, "s": s, "predicted": predicted });
            std::fs::write(
                dir.join("tail.json"),
                serde_json::to_string_pretty(&json)? + "\n",
            )?;
            manifest.outputs = vec!["tail.json".to_owned()];
        }
        manifest.wall_time_seconds = started.elapsed().as_secs_f64();
        manifest.emit(out.as_deref())?;
        return Ok(if pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }

    // No ray requested: print the exponent table over a standard r grid.
    let (x_in, x_out) = marginal_tail_exponents(&rc)?;
    println!("marginal exponents: in {x_in:.6}, out {x_out:.6}");
    println!("argmax: {}", argmax_r(&rc, &params)?);
    let mut table = String::from("r,predicted_slope\n");
    for step in 0..=12u32 {
        let r = f64::from(step) * 0.25;
        let slope = bivariate_tail_exponent(r, &rc, &params)?;
        table.push_str(&format!("{r},{slope}\n"));
    }
    print!("{table}");
    if let Some(dir) = &out {
        std::fs::write(dir.join("tail.csv"), &table)?;
        manifest.outputs = vec!["tail.csv".to_owned()];
    }
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.emit(out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
