//! `dpa simulate`: grow a graph (or several replicas) and write degree data.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};

use dpa_core::io::{write_degrees_csv_file, write_edges_csv_file, write_palb_file};
use dpa_core::DegreeHistogram;

use crate::config::{ModelArgs, RunArgs};
use crate::manifest::Manifest;

use super::grow_replicas;

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory (created if needed)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write the full edge list (one CSV row per directed edge)
    #[arg(long)]
    pub edges: bool,
}

fn replica_file(stem: &str, replica: usize) -> String {
    if replica == 0 {
        format!("{stem}.csv")
    } else {
        format!("{stem}-r{replica}.csv")
    }
}

pub fn run(args: SimulateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let file = args.model.load_file()?;
    let params = args.model.resolve_params(&file)?;
    let settings = args.run.resolve(&file)?;
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .context("simulate requires --out (directory for degree data)")?;
    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))?;

    let graphs = grow_replicas(&params, &settings)?;
    let grow_seconds = started.elapsed().as_secs_f64();

    let mut outputs = Vec::new();
    let mut merged = DegreeHistogram::default();
    for (r, graph) in graphs.iter().enumerate() {
        merged.merge(&DegreeHistogram::from_graph(graph));
        let name = replica_file("degrees", r);
        write_degrees_csv_file(graph, &out.join(&name))?;
        outputs.push(name);
        if args.edges {
            let name = replica_file("edges", r);
            write_edges_csv_file(graph, &out.join(&name))?;
            outputs.push(name);
        }
    }
    write_palb_file(&merged, &out.join("hist.palb"))?;
    outputs.push("hist.palb".to_owned());

    let mut manifest = Manifest::new("simulate", params);
    manifest.seed = Some(settings.seed);
    manifest.stream = Some(settings.stream);
    manifest.replicas = Some(settings.replicas);
    manifest.steps = Some(settings.steps);
    manifest.outputs = outputs;
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.emit(Some(&out))?;

    let total_steps = settings.steps * settings.replicas as u64;
    let last = graphs.last().expect("at least one replica");
    println!(
        "simulate: {} replica(s) x {} steps ({} model); last replica {} nodes, {} edges; {:.3e} steps/s",
        settings.replicas,
        settings.steps,
        params.kind(),
        last.node_count(),
        last.edge_count(),
        total_steps as f64 / grow_seconds,
    );
    Ok(ExitCode::SUCCESS)
}
