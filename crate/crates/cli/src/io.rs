//! CSV files exchanged between subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Result;
use rnaseg_core::texture::manifest;
use rnaseg_core::{Candidate, Detection, Error, FeatureSet};

fn parse_error(path: &Path, line: u64, reason: impl Into<String>) -> anyhow::Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        reason: reason.into(),
    }
    .into()
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::Unreadable {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

type Row = (u64, csv::StringRecord);

/// Header row plus records with their 1-based line numbers.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Row>)> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        rows.push((rec.position().map_or(0, |p| p.line()), rec));
    }
    Ok((header, rows))
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| parse_error(path, line, format!("cannot parse column {} value {raw:?}", i + 1)))
}

fn expect_header(path: &Path, header: &[String], want: &[&str]) -> Result<()> {
    if header.len() < want.len() || header.iter().zip(want).any(|(h, w)| h != w) {
        return Err(parse_error(path, 1, format!("expected header starting {}", want.join(","))));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_candidates(path: &Path, cands: &[Candidate]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,intensity,radius")?;
    for c in cands {
        writeln!(w, "{},{},{},{}", c.x, c.y, c.intensity, c.radius)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_candidates(path: &Path) -> Result<Vec<Candidate>> {
    let (header, rows) = read_table(path)?;
    expect_header(path, &header, &["x", "y", "intensity", "radius"])?;
    rows.iter()
        .map(|(line, rec)| {
            Ok(Candidate {
                x: field(path, *line, rec, 0)?,
                y: field(path, *line, rec, 1)?,
                intensity: field(path, *line, rec, 2)?,
                radius: field(path, *line, rec, 3)?,
            })
        })
        .collect()
}

pub fn write_features(path: &Path, set: FeatureSet, coords: &[(usize, usize)], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    let names: Vec<String> = manifest(set).iter().map(|m| m.name()).collect();
    writeln!(w, "x,y,{}", names.join(","))?;
    for ((x, y), row) in coords.iter().zip(rows) {
        write!(w, "{x},{y}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub struct FeatureTable {
    pub set: FeatureSet,
    pub coords: Vec<(usize, usize)>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    let (header, records) = read_table(path)?;
    expect_header(path, &header, &["x", "y"])?;
    let set = [FeatureSet::Reduced, FeatureSet::Full]
        .into_iter()
        .find(|&s| {
            let names = manifest(s);
            names.len() == header.len() - 2 && names.iter().zip(&header[2..]).all(|(m, h)| m.name() == *h)
        })
        .ok_or_else(|| parse_error(path, 1, "feature columns match neither the reduced nor the full layout"))?;
    let mut coords = Vec::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        coords.push((field(path, *line, rec, 0)?, field(path, *line, rec, 1)?));
        let row = (2..header.len())
            .map(|i| field::<f64>(path, *line, rec, i))
            .collect::<Result<Vec<_>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(parse_error(path, *line, "non-finite feature value"));
        }
        rows.push(row);
    }
    Ok(FeatureTable { set, coords, rows })
}

pub fn write_labels(path: &Path, coords: &[(usize, usize)], labels: &[bool]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,label")?;
    for ((x, y), l) in coords.iter().zip(labels) {
        writeln!(w, "{x},{y},{}", *l as u8)?;
    }
    w.flush()?;
    Ok(())
}

/// Labels in file order; coordinates must line up with `coords`.
pub fn read_labels(path: &Path, coords: &[(usize, usize)]) -> Result<Vec<bool>> {
    let (header, rows) = read_table(path)?;
    expect_header(path, &header, &["x", "y", "label"])?;
    if rows.len() != coords.len() {
        return Err(Error::InvalidInput(format!(
            "{} has {} labels for {} feature rows",
            path.display(),
            rows.len(),
            coords.len()
        ))
        .into());
    }
    rows.iter()
        .zip(coords)
        .map(|((line, rec), &(x, y))| {
            let at: (usize, usize) = (field(path, *line, rec, 0)?, field(path, *line, rec, 1)?);
            if at != (x, y) {
                return Err(parse_error(path, *line, format!("label at {at:?} but feature row at {:?}", (x, y))));
            }
            match field::<u8>(path, *line, rec, 2)? {
                0 => Ok(false),
                1 => Ok(true),
                v => Err(parse_error(path, *line, format!("label must be 0 or 1, got {v}"))),
            }
        })
        .collect()
}

pub fn write_scores(path: &Path, coords: &[(usize, usize)], scores: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,score")?;
    for ((x, y), s) in coords.iter().zip(scores) {
        writeln!(w, "{x},{y},{s}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,area,peak")?;
    for d in dets {
        writeln!(w, "{},{},{},{}", d.x, d.y, d.area, d.peak)?;
    }
    w.flush()?;
    Ok(())
}
