//! Binary field snapshots.
//!
//! A snapshot is one line of UTF-8 JSON (the [`SnapshotHeader`]) terminated
//! by `\n`, followed by the raw little-endian `f64` samples: component by
//! component, x fastest within each component.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::domain::DomainSpec;
use crate::grid::field::Field;

pub const SNAPSHOT_FORMAT: &str = "qtf-snapshot";
pub const LAYOUT: &str = "component-major, x fastest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub field: String,
    pub components: usize,
    pub time: f64,
    pub endianness: String,
    pub layout: String,
    pub domain: DomainSpec,
}

pub fn write_snapshot<W: Write, const C: usize>(
    mut w: W,
    name: &str,
    field: &Field<C>,
    time: f64,
) -> Result<()> {
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        version: 1,
        field: name.into(),
        components: C,
        time,
        endianness: "little".into(),
        layout: LAYOUT.into(),
        domain: *field.domain(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(field.len() * C * 8);
    for c in field.comps() {
        for v in c {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

/// Reads a snapshot with any component count.
pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Snapshot("missing header terminator".into()));
    }
    line.pop();
    let header: SnapshotHeader = serde_json::from_slice(&line)?;
    if header.format != SNAPSHOT_FORMAT || header.version != 1 {
        return Err(Error::Snapshot(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    if header.endianness != "little" {
        return Err(Error::Snapshot(format!("unsupported endianness {}", header.endianness)));
    }
    header.domain.validate().map_err(|e| Error::Snapshot(e.to_string()))?;
    let n = header.domain.len();
    let mut bytes = vec![0u8; n * header.components * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Snapshot(format!("truncated payload: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Snapshot("trailing bytes after payload".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let comps = values.chunks_exact(n).map(<[f64]>::to_vec).collect();
    Ok((header, comps))
}

pub fn read_field<R: BufRead, const C: usize>(r: R) -> Result<(SnapshotHeader, Field<C>)> {
    let (header, comps) = read_snapshot(r)?;
    if header.components != C {
        return Err(Error::Snapshot(format!(
            "expected {C} components, found {}",
            header.components
        )));
    }
    let comps: [Vec<f64>; C] = comps
        .try_into()
        .map_err(|_| Error::Snapshot("component count mismatch".into()))?;
    let domain = header.domain;
    Ok((header, Field::from_components(domain, comps)))
}

pub fn save_snapshot<const C: usize>(path: &Path, name: &str, field: &Field<C>, time: f64) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), name, field, time)
}

pub fn load_snapshot<const C: usize>(path: &Path) -> Result<(SnapshotHeader, Field<C>)> {
    read_field(BufReader::new(File::open(path)?))
}
