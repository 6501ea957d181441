//! Reproduction manifests.
//!
//! Every invocation emits a manifest carrying everything needed to recreate
//! its outputs exactly: model parameters, seed/stream assignment, grid,
//! method, tool version, and wall time. Commands with an output directory
//! write `manifest.json` there; stdout-only invocations echo the manifest to
//! stderr so the data stream stays clean.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use dpa_core::ModelParams;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub params: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<[u32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<&'static str>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub tolerances: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

impl Manifest {
    pub fn new(command: &'static str, params: ModelParams) -> Self {
        Manifest {
            tool: "dpa",
            version: env!("CARGO_PKG_VERSION"),
            command,
            params,
            seed: None,
            stream: None,
            replicas: None,
            steps: None,
            grid: None,
            method: None,
            tolerances: serde_json::Value::Null,
            outputs: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn emit(&self, out_dir: Option<&Path>) -> Result<()> {
        match out_dir {
            Some(dir) => {
                let json = serde_json::to_string_pretty(self)?;
                std::fs::write(dir.join("manifest.json"), json + "\n")?;
            }
            None => eprintln!("manifest: {}", serde_json::to_string(self)?),
        }
        Ok(())
    }
}
