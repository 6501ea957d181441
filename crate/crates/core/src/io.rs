//! File export/import: degree and edge CSVs, the PALB binary histogram
//! format, and CCDF tables.
//!
//! PALB layout (little-endian throughout): magic bytes `PALB`, format
//! version as u16 (currently 1), then one `(u32 in, u32 out, u64 count)`
//! triple per occupied degree pair, sorted row-major by (in, out), until
//! end of file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::simulate::GrowthGraph;
use crate::stats::{ccdf, DegreeHistogram};

const PALB_MAGIC: &[u8; 4] = b"PALB";
const PALB_VERSION: u16 = 1;

/// One `node,in,out` row per node, in node order.
pub fn write_degrees_csv<W: Write>(graph: &GrowthGraph, w: &mut W) -> Result<()> {
    writeln!(w, "node,in,out")?;
    for (node, (i, j)) in graph
        .in_degrees()
        .iter()
        .zip(graph.out_degrees())
        .enumerate()
    {
        writeln!(w, "{node},{i},{j}")?;
    }
    Ok(())
}

pub fn write_degrees_csv_file(graph: &GrowthGraph, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_degrees_csv(graph, &mut w)
}

/// Expands the per-step reciprocation record into one flag per stored edge:
/// a reciprocated step contributes its primary edge and the immediately
/// following reverse edge, both flagged.
fn per_edge_flags(graph: &GrowthGraph) -> Vec<bool> {
    if graph.kind() != ModelKind::Gdpa {
        return vec![false; graph.edge_count()];
    }
    let mut flags = Vec::with_capacity(graph.edge_count());
    for &reciprocated in graph.reciprocal_flags() {
        flags.push(reciprocated);
        if reciprocated {
            flags.push(true);
        }
    }
    debug_assert_eq!(flags.len(), graph.edge_count());
    flags
}

/// One `source,target,reciprocal_flag` row per directed edge, in insertion
/// order (for the undirected model, one row per edge as stored).
pub fn write_edges_csv<W: Write>(graph: &GrowthGraph, w: &mut W) -> Result<()> {
    writeln!(w, "source,target,reciprocal_flag")?;
    let flags = per_edge_flags(graph);
    for ((&s, &t), f) in graph
        .edge_tails()
        .iter()
        .zip(graph.edge_heads())
        .zip(flags)
    {
        writeln!(w, "{s},{t},{}", f as u8)?;
    }
    Ok(())
}

pub fn write_edges_csv_file(graph: &GrowthGraph, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_edges_csv(graph, &mut w)
}

/// Write a degree histogram in the PALB binary format.
pub fn write_palb<W: Write>(hist: &DegreeHistogram, w: &mut W) -> Result<()> {
    w.write_all(PALB_MAGIC)?;
    w.write_all(&PALB_VERSION.to_le_bytes())?;
    for ((i, j), count) in hist.sorted_entries() {
        w.write_all(&i.to_le_bytes())?;
        w.write_all(&j.to_le_bytes())?;
        w.write_all(&count.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_palb_file(hist: &DegreeHistogram, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_palb(hist, &mut w)
}

/// Read a PALB histogram, validating magic, version, and record framing.
pub fn read_palb<R: Read>(r: &mut R) -> Result<DegreeHistogram> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("missing PALB magic bytes".into()))?;
    if &magic != PALB_MAGIC {
        return Err(Error::Format(format!(
            "bad magic bytes {magic:?}, expected {PALB_MAGIC:?}"
        )));
    }
    let mut version = [0u8; 2];
    r.read_exact(&mut version)
        .map_err(|_| Error::Format("truncated PALB version field".into()))?;
    let version = u16::from_le_bytes(version);
    if version != PALB_VERSION {
        return Err(Error::Format(format!(
            "unsupported PALB version {version}, expected {PALB_VERSION}"
        )));
    }
    let mut entries = Vec::new();
    let mut record = [0u8; 16];
    loop {
        match r.read(&mut record[..1])? {
            0 => break,
            _ => r
                .read_exact(&mut record[1..])
                .map_err(|_| Error::Format("truncated PALB record".into()))?,
        }
        let i = u32::from_le_bytes(record[0..4].try_into().unwrap());
        let j = u32::from_le_bytes(record[4..8].try_into().unwrap());
        let count = u64::from_le_bytes(record[8..16].try_into().unwrap());
        entries.push(((i, j), count));
    }
    Ok(DegreeHistogram::from_entries(entries))
}

pub fn read_palb_file(path: &Path) -> Result<DegreeHistogram> {
    let mut r = BufReader::new(File::open(path)?);
    read_palb(&mut r)
}

/// Tail sums of a marginal as `i,ccdf` rows, where `ccdf = P(X >= i)`.
pub fn write_ccdf_csv<W: Write>(marginal: &[f64], w: &mut W) -> Result<()> {
    writeln!(w, "i,ccdf")?;
    for (i, c) in ccdf(marginal).iter().enumerate() {
        writeln!(w, "{i},{c}")?;
    }
    Ok(())
}

pub fn write_ccdf_csv_file(marginal: &[f64], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ccdf_csv(marginal, &mut w)
}
