//! Dense joint degree PMF on a rectangular grid, with leaked-mass accounting
//! and the JSON/CSV serialization shared by the analytic, walk, and empirical
//! producers.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// How a PMF was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "quadrature")]
    Quadrature,
    #[serde(rename = "dp")]
    Dp,
    #[serde(rename = "empirical")]
    Empirical,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::Dp => "dp",
            Method::Empirical => "empirical",
        }
    }
}

/// Joint PMF of (in-degree, out-degree) truncated to `i ≤ max_in, j ≤ max_out`.
///
/// Probability that escaped the grid (by construction or by truncation of an
/// observed sample) is kept in `leaked_mass`, so `total_mass() + leaked_mass`
/// stays checkable against 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPMF {
    method: Method,
    params: ModelParams,
    max_in: u32,
    max_out: u32,
    mass: Vec<f64>,
    leaked_mass: f64,
}

impl JointPMF {
    pub fn zeroed(method: Method, params: ModelParams, max_in: u32, max_out: u32) -> Self {
        let cells = (max_in as usize + 1) * (max_out as usize + 1);
        JointPMF {
            method,
            params,
            max_in,
            max_out,
            mass: vec![0.0; cells],
            leaked_mass: 0.0,
        }
    }

    pub fn method(&self) -> Method {
        self.method
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
    pub fn leaked_mass(&self) -> f64 {
        self.leaked_mass
    }
    pub fn set_leaked_mass(&mut self, leaked: f64) {
        self.leaked_mass = leaked;
    }
    pub fn add_leaked(&mut self, amount: f64) {
        self.leaked_mass += amount;
    }

    #[inline]
    fn idx(&self, i: u32, j: u32) -> usize {
        debug_assert!(i <= self.max_in && j <= self.max_out);
        i as usize * (self.max_out as usize + 1) + j as usize
    }

    #[inline]
    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.mass[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: u32, j: u32, p: f64) {
        let k = self.idx(i, j);
        self.mass[k] = p;
    }

    #[inline]
    pub fn add(&mut self, i: u32, j: u32, p: f64) {
        let k = self.idx(i, j);
        self.mass[k] += p;
    }

    /// Sum of all in-grid mass (excludes `leaked_mass`).
    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn values(&self) -> &[f64] {
        &self.mass
    }

    /// Marginal over the in-degree axis: `Σ_j p(i, j)` for each `i`.
    pub fn in_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.max_in as usize + 1];
        for i in 0..=self.max_in {
            let mut acc = 0.0;
            for j in 0..=self.max_out {
                acc += self.get(i, j);
            }
            out[i as usize] = acc;
        }
        out
    }

    /// Marginal over the out-degree axis: `Σ_i p(i, j)` for each `j`.
    pub fn out_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.max_out as usize + 1];
        for j in 0..=self.max_out {
            let mut acc = 0.0;
            for i in 0..=self.max_in {
                acc += self.get(i, j);
            }
            out[j as usize] = acc;
        }
        out
    }

    /// Row-major `(i, j, p)` triples of the non-zero entries.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..=self.max_in).flat_map(move |i| {
            (0..=self.max_out).filter_map(move |j| {
                let p = self.get(i, j);
                (p != 0.0).then_some((i, j, p))
            })
        })
    }

    pub fn same_grid(&self, other: &JointPMF) -> Result<()> {
        if self.max_in != other.max_in || self.max_out != other.max_out {
            return Err(Error::GridMismatch(
                self.max_in,
                self.max_out,
                other.max_in,
                other.max_out,
            ));
        }
        Ok(())
    }

    pub fn write_json_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer(&mut w, self).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
    }

    /// CSV with header `i,j,p`, one row per non-zero entry, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,p")?;
        for (i, j, p) in self.entries() {
            writeln!(w, "{i},{j},{p}")?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Read entries from `i,j,p` CSV into a PMF shell created by the caller
    /// (method/params/grid are not part of the CSV format).
    pub fn read_csv_into<R: BufRead>(mut shell: JointPMF, reader: R) -> Result<JointPMF> {
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line == "i,j,p") {
                continue;
            }
            let mut parts = line.split(',');
            let (i, j, p) = (|| -> Option<(u32, u32, f64)> {
                let i = parts.next()?.trim().parse().ok()?;
                let j = parts.next()?.trim().parse().ok()?;
                let p = parts.next()?.trim().parse().ok()?;
                Some((i, j, p))
            })()
            .ok_or_else(|| Error::Format(format!("bad csv row {}: {line:?}", lineno + 1)))?;
            if i > shell.max_in || j > shell.max_out {
                return Err(Error::Format(format!(
                    "csv entry ({i},{j}) outside grid ({}, {})",
                    shell.max_in, shell.max_out
                )));
            }
            shell.set(i, j, p);
        }
        Ok(shell)
    }
}

#[derive(Serialize, Deserialize)]
struct JointPMFWire {
    method: Method,
    params: ModelParams,
    max_in: u32,
    max_out: u32,
    entries: Vec<(u32, u32, f64)>,
    leaked_mass: f64,
}

impl Serialize for JointPMF {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        JointPMFWire {
            method: self.method,
            params: self.params,
            max_in: self.max_in,
            max_out: self.max_out,
            entries: self.entries().collect(),
            leaked_mass: self.leaked_mass,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JointPMF {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = JointPMFWire::deserialize(deserializer)?;
        let mut pmf = JointPMF::zeroed(wire.method, wire.params, wire.max_in, wire.max_out);
        for (i, j, p) in wire.entries {
            if i > wire.max_in || j > wire.max_out {
                return Err(D::Error::custom(format!(
                    "entry ({i},{j}) outside grid ({}, {})",
                    wire.max_in, wire.max_out
                )));
            }
            pmf.set(i, j, p);
        }
        pmf.leaked_mass = wire.leaked_mass;
        Ok(pmf)
    }
}
