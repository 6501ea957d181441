//! Empirical distributions, distances, and tail-slope estimation.
//!
//! This is the bridge between simulation output and the analytic predictions:
//! degree histograms (mergeable across replicas), total-variation distance on
//! a shared grid, log-log slope fits of marginal tails, and the quadrature
//! slope probe along rays `j ~ s·i^r`.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{bivariate_tail_exponent, joint_quadrature};
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams, RateConstants};
use crate::pmf::{JointPMF, Method};
use crate::simulate::{degree_snapshot, GrowthGraph};

/// A normalized degree histogram: a [`JointPMF`] with method tag `empirical`
/// plus the node count it was normalized by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPMF {
    #[serde(flatten)]
    pmf: JointPMF,
    sample_count: u64,
}

impl EmpiricalPMF {
    pub fn pmf(&self) -> &JointPMF {
        &self.pmf
    }
    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }
    pub fn into_pmf(self) -> JointPMF {
        self.pmf
    }

    pub fn write_json_file(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Raw degree-pair counts, mergeable across replicas (merging is associative
/// and commutative, so parallel replica reduction is order-independent).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegreeHistogram {
    counts: HashMap<(u32, u32), u64>,
    samples: u64,
}

impl DegreeHistogram {
    pub fn from_graph(graph: &GrowthGraph) -> Self {
        let mut hist = DegreeHistogram::default();
        for (i, j) in degree_snapshot(graph) {
            *hist.counts.entry((i, j)).or_insert(0) += 1;
            hist.samples += 1;
        }
        hist
    }

    pub fn merge(&mut self, other: &DegreeHistogram) {
        for (&key, &count) in &other.counts {
            *self.counts.entry(key).or_insert(0) += count;
        }
        self.samples += other.samples;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Counts in row-major order of (in, out), suitable for serialization.
    pub fn sorted_entries(&self) -> Vec<((u32, u32), u64)> {
        let mut entries: Vec<_> = self.counts.iter().map(|(&k, &v)| (k, v)).collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        entries
    }

    /// Rebuild from (degree pair, count) entries; duplicate keys accumulate.
    pub fn from_entries(entries: impl IntoIterator<Item = ((u32, u32), u64)>) -> Self {
        let mut hist = DegreeHistogram::default();
        for (key, count) in entries {
            *hist.counts.entry(key).or_insert(0) += count;
            hist.samples += count;
        }
        hist
    }

    /// Normalize onto a grid; out-of-grid mass goes to `leaked_mass`.
    pub fn to_empirical(
        &self,
        params: &ModelParams,
        max_in: u32,
        max_out: u32,
    ) -> Result<EmpiricalPMF> {
        if self.samples == 0 {
            return Err(Error::InsufficientSupport { needed: 1, got: 0 });
        }
        let mut pmf = JointPMF::zeroed(Method::Empirical, *params, max_in, max_out);
        let n = self.samples as f64;
        for (&(i, j), &count) in &self.counts {
            let mass = count as f64 / n;
            if i <= max_in && j <= max_out {
                pmf.add(i, j, mass);
            } else {
                pmf.add_leaked(mass);
            }
        }
        Ok(EmpiricalPMF {
            pmf,
            sample_count: self.samples,
        })
    }
}

/// Fraction of nodes at each degree pair on the grid; out-of-grid nodes are
/// counted in `leaked_mass` so the total stays 1.
pub fn empirical_joint(graph: &GrowthGraph, max_in: u32, max_out: u32) -> Result<EmpiricalPMF> {
    DegreeHistogram::from_graph(graph).to_empirical(graph.params(), max_in, max_out)
}

/// Total-variation distance between two pmfs on the same grid:
/// `½ Σ|p_ij − q_ij| + ½ |leaked_p − leaked_q|`.
pub fn tv_distance(p: &JointPMF, q: &JointPMF) -> Result<f64> {
    p.same_grid(q)?;
    let cell_sum: f64 = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * cell_sum + 0.5 * (p.leaked_mass() - q.leaked_mass()).abs())
}

/// Abscissa binning for tail fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    /// Fit every integer point in the range.
    None,
    /// Geometric bins of ratio 1.25; fit bin densities (bin mass / full
    /// integer width, zero cells included) at exponent-neutral representative
    /// abscissas. Bins holding no mass at all are skipped.
    Log,
}

/// Result of a tail-slope fit.
///
/// `predicted_exponent` is `None` when the fit has no associated theory value
/// (plain marginal fits); ray probes and CLI comparisons fill it in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    #[serde(rename = "predicted")]
    pub predicted_exponent: Option<f64>,
    #[serde(rename = "fitted")]
    pub fitted_slope: f64,
    #[serde(rename = "range")]
    pub fit_range: [f64; 2],
    pub residual_rms: f64,
}

impl TailReport {
    pub fn deviation(&self) -> Option<f64> {
        self.predicted_exponent
            .map(|p| (self.fitted_slope - p).abs())
    }
}

fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// One geometric bin: member abscissas and total mass.
struct LogBin {
    members: Vec<f64>,
    mass: f64,
}

impl LogBin {
    /// Representative abscissa that makes an exact power law `C·i^{-a}` fit
    /// exactly: the density (mass / member count) equals `C·x^{-a}` at
    /// `x = (mean of members^{-a})^{-1/a}`, so placing the density there is
    /// neutral with respect to the exponent `a`. Taking `a → 0` gives the
    /// geometric mean, which seeds the fixed-point iteration in
    /// `loglog_slope`.
    fn neutral_abscissa(&self, a: f64) -> f64 {
        let n = self.members.len() as f64;
        if a.abs() < 1e-9 {
            let log_mean = self.members.iter().map(|&x| x.ln()).sum::<f64>() / n;
            return log_mean.exp();
        }
        let mean_pow = self.members.iter().map(|&x| x.powf(-a)).sum::<f64>() / n;
        mean_pow.powf(-1.0 / a)
    }

    fn density(&self) -> f64 {
        self.mass / self.members.len() as f64
    }
}

/// Least-squares slope of `log p_i` against `log i` over `lo ..= hi`.
///
/// With [`Binning::Log`], mass is pooled into geometric bins of ratio 1.25 and
/// densities are fitted at exponent-neutral abscissas, iterating the abscissa
/// exponent to the fitted slope until fixed (synthetic exact power laws are
/// recovered to 1e-9 in both modes). `predicted_exponent` is left `None`.
pub fn loglog_slope(
    pmf_marginal: &[f64],
    lo: usize,
    hi: usize,
    binning: Binning,
) -> Result<TailReport> {
    if lo < 1 || hi <= lo {
        return Err(Error::OutOfRange {
            name: "fit range",
            value: hi as f64,
            detail: "require hi > lo >= 1",
        });
    }
    let hi = hi.min(pmf_marginal.len().saturating_sub(1));
    let support: Vec<(usize, f64)> = (lo..=hi)
        .filter_map(|i| {
            let p = pmf_marginal[i];
            (p > 0.0).then_some((i, p))
        })
        .collect();
    if support.len() < 5 {
        return Err(Error::InsufficientSupport {
            needed: 5,
            got: support.len(),
        });
    }
    let range = [lo as f64, hi as f64];

    match binning {
        Binning::None => {
            let points: Vec<(f64, f64)> = support
                .iter()
                .map(|&(i, p)| ((i as f64).ln(), p.ln()))
                .collect();
            let (slope, _, rms) = ols(&points);
            Ok(TailReport {
                predicted_exponent: None,
                fitted_slope: slope,
                fit_range: range,
                residual_rms: rms,
            })
        }
        Binning::Log => {
            // Geometric bin edges lo, lo·1.25, lo·1.25², … (advancing at least
            // one integer per bin). Every integer in the range belongs to its
            // bin whether its cell is occupied or not, so a sparsely populated
            // bin is penalized by its full width; only bins with no mass at
            // all are dropped (their log-density is undefined).
            let mut bins: Vec<LogBin> = Vec::new();
            let mut edge = lo as f64;
            let mut i = lo;
            while i <= hi {
                let next_edge = (edge * 1.25).max(edge + 1.0);
                let mut members = Vec::new();
                let mut mass = 0.0;
                while i <= hi && (i as f64) < next_edge {
                    members.push(i as f64);
                    mass += pmf_marginal[i];
                    i += 1;
                }
                if !members.is_empty() && mass > 0.0 {
                    bins.push(LogBin { members, mass });
                }
                edge = next_edge;
            }
            if bins.len() < 5 {
                return Err(Error::InsufficientSupport {
                    needed: 5,
                    got: bins.len(),
                });
            }
            // Fixed point: abscissas depend on the exponent, the exponent on
            // the abscissas. Start from the a→0 geometric-mean abscissa.
            let mut a = 0.0;
            let mut slope = 0.0;
            let mut rms = 0.0;
            for _ in 0..50 {
                let points: Vec<(f64, f64)> = bins
                    .iter()
                    .map(|b| (b.neutral_abscissa(a).ln(), b.density().ln()))
                    .collect();
                let (s, _, r) = ols(&points);
                rms = r;
                let next_a = (-s).clamp(0.1, 20.0);
                let done = (s - slope).abs() < 1e-12;
                slope = s;
                a = next_a;
                if done {
                    break;
                }
            }
            Ok(TailReport {
                predicted_exponent: None,
                fitted_slope: slope,
                fit_range: range,
                residual_rms: rms,
            })
        }
    }
}

/// Slope of `log p_{n, ⌊s·n^r⌋}` against `log n` by quadrature along the ray,
/// with the theoretical ray exponent attached as `predicted_exponent`.
///
/// The least squares includes a `1/min(n, j)` regressor alongside `log n`:
/// the leading finite-size correction to the ray power law is of that order
/// (driven by whichever coordinate is smaller), and absorbing it lets probes
/// at desk-scale `n` recover the limiting exponent. Without it, rays with
/// `r < 1` need `n` in the tens of thousands before the plain two-parameter
/// fit settles. When the correction column carries no information (constant,
/// or indistinguishable from `log n`) the fit falls back to plain OLS.
pub fn quadrature_tail_slope(
    r: f64,
    s: f64,
    n_values: &[u32],
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<TailReport> {
    let mut distinct: Vec<u32> = n_values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(Error::InsufficientSupport {
            needed: 5,
            got: distinct.len(),
        });
    }
    if let Some(&small) = distinct.iter().find(|&&n| n < 20) {
        return Err(Error::OutOfRange {
            name: "n_values",
            value: small as f64,
            detail: "ray probe needs n >= 20",
        });
    }
    if s.is_nan() || s <= 0.0 {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            detail: "ray prefactor must be positive",
        });
    }
    let mut points = Vec::with_capacity(distinct.len());
    for &n in &distinct {
        let j = (s * (n as f64).powf(r)).floor();
        if !(j >= 0.0 && j <= u32::MAX as f64) {
            return Err(Error::OutOfRange {
                name: "s·n^r",
                value: j,
                detail: "ray leaves the 32-bit degree range",
            });
        }
        let p = joint_quadrature(n, j as u32, rc, params, 1e-10)?;
        let correction = 1.0 / f64::from(n.min(j as u32).max(1));
        points.push(((n as f64).ln(), correction, p.ln()));
    }
    let (slope, rms) = corrected_ols(&points);
    Ok(TailReport {
        predicted_exponent: Some(bivariate_tail_exponent(r, rc, params)?),
        fitted_slope: slope,
        fit_range: [distinct[0] as f64, *distinct.last().unwrap() as f64],
        residual_rms: rms,
    })
}

/// Least squares of `y` on `(x, u)` returning the `x` coefficient, falling
/// back to plain OLS on `(x, y)` when the `u` column is degenerate.
fn corrected_ols(points: &[(f64, f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mu = points.iter().map(|p| p.1).sum::<f64>() / n;
    let my = points.iter().map(|p| p.2).sum::<f64>() / n;
    let (mut sxx, mut sxu, mut suu, mut sxy, mut suy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, u, y) in points {
        let (dx, du, dy) = (x - mx, u - mu, y - my);
        sxx += dx * dx;
        sxu += dx * du;
        suu += du * du;
        sxy += dx * dy;
        suy += du * dy;
    }
    let det = sxx * suu - sxu * sxu;
    if det.is_nan() || det <= 1e-12 * sxx * suu || suu == 0.0 {
        let pts: Vec<(f64, f64)> = points.iter().map(|&(x, _, y)| (x, y)).collect();
        let (slope, _, rms) = ols(&pts);
        return (slope, rms);
    }
    let slope = (sxy * suu - suy * sxu) / det;
    let coef_u = (suy * sxx - sxy * sxu) / det;
    let intercept = my - slope * mx - coef_u * mu;
    let rss: f64 = points
        .iter()
        .map(|&(x, u, y)| {
            let r = y - (intercept + slope * x + coef_u * u);
            r * r
        })
        .sum();
    (slope, (rss / n).sqrt())
}

/// Tail sums `ccdf[i] = Σ_{k ≥ i} p_k` (so `ccdf[0]` is the total mass).
pub fn ccdf(marginal: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; marginal.len()];
    let mut acc = 0.0;
    for i in (0..marginal.len()).rev() {
        acc += marginal[i];
        out[i] = acc;
    }
    out
}

fn reciprocity_of_edges(tails: &[u32], heads: &[u32]) -> f64 {
    let key = |u: u32, v: u32| ((u as u64) << 32) | v as u64;
    let present: HashSet<u64> = tails
        .iter()
        .zip(heads)
        .map(|(&u, &v)| key(u, v))
        .collect();
    let reciprocated = tails
        .iter()
        .zip(heads)
        .filter(|&(&u, &v)| present.contains(&key(v, u)))
        .count();
    reciprocated as f64 / tails.len() as f64
}

/// Fraction of directed edges `u→v` whose reverse `v→u` is also present
/// (each edge copy counts once in the denominator; a multi-edge is
/// reciprocated if at least one reverse copy exists).
pub fn reciprocity(graph: &GrowthGraph) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::InsufficientSupport { needed: 1, got: 0 });
    }
    Ok(reciprocity_of_edges(graph.edge_tails(), graph.edge_heads()))
}

/// Expected asymptotic reciprocity of a GDPA run: per step `1+ρ` directed
/// edges are added in expectation, `2ρ` of which lie in reciprocal pairs.
pub fn expected_reciprocity(params: &ModelParams) -> Result<f64> {
    params.expect_kind(ModelKind::Gdpa, "expected_reciprocity")?;
    let rho = params.rho();
    Ok(2.0 * rho / (1.0 + rho))
}
