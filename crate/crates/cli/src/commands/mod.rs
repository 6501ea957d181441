pub mod analytic;
pub mod compare;
pub mod simulate;
pub mod tail;

use anyhow::Result;

use dpa_core::{grow_dpa, grow_gdpa, grow_pa, GrowthGraph, ModelKind, ModelParams, RngSeed};

use crate::config::RunSettings;

pub fn grow(params: &ModelParams, steps: u64, seed: RngSeed) -> dpa_core::Result<GrowthGraph> {
    match params.kind() {
        ModelKind::Pa => grow_pa(params.m(), steps, seed),
        ModelKind::Dpa => grow_dpa(params, steps, seed),
        ModelKind::Gdpa => grow_gdpa(params, steps, seed),
    }
}

/// Grow all replicas concurrently; replica r uses stream `base + r`, so the
/// result is deterministic in (seed, stream) regardless of thread timing.
pub fn grow_replicas(params: &ModelParams, settings: &RunSettings) -> Result<Vec<GrowthGraph>> {
    let params = *params;
    let settings = *settings;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..settings.replicas)
            .map(|r| {
                scope.spawn(move || {
                    let seed = RngSeed::new(settings.seed, settings.stream + r as u64);
                    grow(&params, settings.steps, seed)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .expect("replica thread panicked")
                    .map_err(Into::into)
            })
            .collect()
    })
}
