//! Binary raster formats and CSV exports.
//!
//! All three formats share a header: 4-byte magic, `u16` version (1), then
//! `u32` dimensions, all little-endian.
//!
//! | magic  | dims                     | payload                        |
//! |--------|--------------------------|--------------------------------|
//! | `ORBL` | rows, cols, timesteps    | one byte per label, time-major |
//! | `ORBO` | rows, cols               | `u32` rank per pixel           |
//! | `ORBE` | rows, cols               | `f32` elevation per pixel      |

use std::io::Write;
use std::path::Path;

use crate::analysis::{AccuracyReport, McRow, NoiseRun};
use crate::error::{format_err, invalid, OrbitError, Result};
use crate::raster::{ElevationGrid, ElevationOrdering, Label, LabelStack, LevelSeries};
use crate::temporal::AlphaSweep;

pub const STACK_MAGIC: [u8; 4] = *b"ORBL";
pub const ORDERING_MAGIC: [u8; 4] = *b"ORBO";
pub const ELEVATION_MAGIC: [u8; 4] = *b"ORBE";
pub const FORMAT_VERSION: u16 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            format_err(
                field,
                format!("truncated: need {n} bytes at offset {}", self.pos),
            )
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, field: &'static str) -> Result<usize> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn header(&mut self, magic: [u8; 4]) -> Result<()> {
        let m = self.take(4, "magic")?;
        if m != magic {
            return Err(format_err(
                "magic",
                format!(
                    "expected {:?}, found {:?}",
                    String::from_utf8_lossy(&magic),
                    String::from_utf8_lossy(m)
                ),
            ));
        }
        let v = u16::from_le_bytes(self.take(2, "version")?.try_into().expect("2 bytes"));
        if v != FORMAT_VERSION {
            return Err(format_err(
                "version",
                format!("unsupported version {v}, expected {FORMAT_VERSION}"),
            ));
        }
        Ok(())
    }

    fn dims(&mut self, names: &[&'static str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for &name in names {
            let d = self.u32(name)?;
            if d == 0 {
                return Err(format_err(name, "must be positive"));
            }
            out.push(d);
        }
        Ok(out)
    }

    fn payload(&mut self, elems: Option<usize>, width: usize) -> Result<&'a [u8]> {
        let expected = elems
            .and_then(|e| e.checked_mul(width))
            .ok_or_else(|| format_err("payload length", "dimensions overflow"))?;
        let rest = self.bytes.len() - self.pos;
        if rest != expected {
            return Err(format_err(
                "payload length",
                format!("expected {expected} bytes, found {rest}"),
            ));
        }
        self.take(expected, "payload length")
    }
}

fn header(magic: [u8; 4], dims: &[usize], payload: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(6 + 4 * dims.len() + payload);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for &d in dims {
        let d =
            u32::try_from(d).map_err(|_| invalid(format!("dimension {d} does not fit in u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    Ok(out)
}

pub fn encode_stack(stack: &LabelStack) -> Result<Vec<u8>> {
    let mut out = header(
        STACK_MAGIC,
        &[stack.rows(), stack.cols(), stack.timesteps()],
        stack.data().len(),
    )?;
    out.extend(stack.data().iter().map(|l| l.as_u8()));
    Ok(out)
}

pub fn decode_stack(bytes: &[u8]) -> Result<LabelStack> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(STACK_MAGIC)?;
    let d = r.dims(&["rows", "cols", "timesteps"])?;
    let payload = r.payload(d[0].checked_mul(d[1]).and_then(|n| n.checked_mul(d[2])), 1)?;
    let data = payload
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            Label::from_u8(b).ok_or_else(|| {
                format_err(
                    "label value",
                    format!("byte {b} at payload offset {i} exceeds 3"),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelStack::new(d[0], d[1], d[2], data)
}

pub fn encode_ordering(ordering: &ElevationOrdering) -> Result<Vec<u8>> {
    let mut out = header(
        ORDERING_MAGIC,
        &[ordering.rows(), ordering.cols()],
        4 * ordering.len(),
    )?;
    for &r in ordering.ranks() {
        out.extend_from_slice(&(r as u32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_ordering(bytes: &[u8]) -> Result<ElevationOrdering> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(ORDERING_MAGIC)?;
    let d = r.dims(&["rows", "cols"])?;
    let payload = r.payload(d[0].checked_mul(d[1]), 4)?;
    let ranks = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    ElevationOrdering::from_ranks(d[0], d[1], ranks).map_err(|e| match e {
        OrbitError::InvalidInput(msg) => format_err("rank bijection", msg),
        other => other,
    })
}

pub fn encode_elevation(elev: &ElevationGrid) -> Result<Vec<u8>> {
    let mut out = header(
        ELEVATION_MAGIC,
        &[elev.rows(), elev.cols()],
        4 * elev.values().len(),
    )?;
    for (i, &v) in elev.values().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(format_err(
                "elevation",
                format!("pixel {i} value {v} is not representable as f32"),
            ));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_elevation(bytes: &[u8]) -> Result<ElevationGrid> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(ELEVATION_MAGIC)?;
    let d = r.dims(&["rows", "cols"])?;
    let payload = r.payload(d[0].checked_mul(d[1]), 4)?;
    let values = payload
        .chunks_exact(4)
        .enumerate()
        .map(|(i, c)| {
            let v = f32::from_le_bytes(c.try_into().expect("4 bytes"));
            if v.is_finite() {
                Ok(v as f64)
            } else {
                Err(format_err(
                    "elevation",
                    format!("non-finite value at pixel {i}"),
                ))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ElevationGrid::new(d[0], d[1], values)
}

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place, so a failed write never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| OrbitError::Io(e.error.to_string()))?;
    Ok(())
}

pub fn read_stack(path: &Path) -> Result<LabelStack> {
    decode_stack(&std::fs::read(path)?)
}

pub fn write_stack(path: &Path, stack: &LabelStack) -> Result<()> {
    write_atomic(path, &encode_stack(stack)?)
}

pub fn read_ordering(path: &Path) -> Result<ElevationOrdering> {
    decode_ordering(&std::fs::read(path)?)
}

pub fn write_ordering(path: &Path, ordering: &ElevationOrdering) -> Result<()> {
    write_atomic(path, &encode_ordering(ordering)?)
}

pub fn read_elevation(path: &Path) -> Result<ElevationGrid> {
    decode_elevation(&std::fs::read(path)?)
}

pub fn write_elevation(path: &Path, elev: &ElevationGrid) -> Result<()> {
    write_atomic(path, &encode_elevation(elev)?)
}

/// A header plus string rows, rendered with `.` decimals regardless of locale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| OrbitError::Io(e.to_string());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| OrbitError::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }
}

pub fn report_table(report: &AccuracyReport) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "pct_unknown",
        "pct_error",
        "pct_total",
        "unknown_count",
        "error_count",
        "total_count",
    ]);
    t.push(vec![
        report.pct_unknown.to_string(),
        report.pct_error.to_string(),
        report.pct_total.to_string(),
        report.unknown_count.to_string(),
        report.error_count.to_string(),
        report.total_count.to_string(),
    ]);
    t
}

pub fn sweep_table(sweep: &AlphaSweep) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "alpha",
        "mismatch_cost",
        "transition_cost",
        "total_cost",
    ]);
    for r in sweep.rows() {
        t.push(vec![
            r.alpha.to_string(),
            r.mismatch_cost.to_string(),
            r.transition_cost.to_string(),
            r.total_cost.to_string(),
        ]);
    }
    t
}

pub fn area_table(series: &[(usize, usize)]) -> CsvTable {
    let mut t = CsvTable::new(vec!["timestep", "water_count", "water_plus_unknown_count"]);
    for (i, (w, wu)) in series.iter().enumerate() {
        t.push(vec![i.to_string(), w.to_string(), wu.to_string()]);
    }
    t
}

pub fn levels_table(levels: &LevelSeries) -> CsvTable {
    let mut t = CsvTable::new(vec!["timestep", "level"]);
    for (i, l) in levels.levels().iter().enumerate() {
        t.push(vec![i.to_string(), l.to_string()]);
    }
    t
}

pub fn mc_table(rows: &[McRow]) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "lake",
        "extent_fraction",
        "factor",
        "gr",
        "wth",
        "offset_row",
        "offset_col",
        "extent_size",
        "perimeter",
        "coarse_perimeter",
        "unknown_count",
        "u_ratio",
        "layers_to_containment",
        "pct_error",
    ]);
    for r in rows {
        t.push(vec![
            r.lake.to_string(),
            r.extent_fraction.to_string(),
            r.factor.to_string(),
            r.gr.to_string(),
            r.wth.to_string(),
            r.offset.0.to_string(),
            r.offset.1.to_string(),
            r.extent_size.to_string(),
            r.perimeter.to_string(),
            r.coarse_perimeter.to_string(),
            r.unknown_count.to_string(),
            r.u_ratio.to_string(),
            r.layers_to_containment.to_string(),
            r.pct_error.to_string(),
        ]);
    }
    t
}

pub fn noise_table(runs: &[NoiseRun]) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "method",
        "noise",
        "seed",
        "pct_unknown",
        "pct_error",
        "pct_total",
        "alpha",
        "wth",
    ]);
    let opt = |o: Option<String>| o.unwrap_or_default();
    for r in runs {
        t.push(vec![
            r.method.name().to_string(),
            r.noise.to_string(),
            r.seed.to_string(),
            r.report.pct_unknown.to_string(),
            r.report.pct_error.to_string(),
            r.report.pct_total.to_string(),
            opt(r.alpha.map(|a| a.to_string())),
            opt(r.wth.map(|w| w.to_string())),
        ]);
    }
    t
}
