//! Plain-text model files.
//!
//! ```text
//! rnaseg-model 1
//! feature_set reduced
//! dims 24
//! bias -0.25
//! c 1
//! tolerance 1e-7
//! max_iterations 10000000
//! balanced true
//! seed 0
//! <name> <weight> <mean> <std>      (one line per dimension)
//! ```
//!
//! Reals are written in shortest round-trip form so a reload is bit exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{LinearModel, NormStats, TrainConfig};
use crate::error::{Error, Result};
use crate::texture::FeatureSet;

const MAGIC: &str = "rnaseg-model";
const VERSION: u32 = 1;

pub fn model_to_string(m: &LinearModel) -> String {
    let mut s = String::new();
    let cfg = &m.config;
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "feature_set {}", m.feature_set);
    let _ = writeln!(s, "dims {}", m.dims());
    let _ = writeln!(s, "bias {:e}", m.bias);
    let _ = writeln!(s, "c {:e}", cfg.c);
    let _ = writeln!(s, "tolerance {:e}", cfg.tolerance);
    let _ = writeln!(s, "max_iterations {}", cfg.max_iterations);
    let _ = writeln!(s, "balanced {}", cfg.balanced);
    let _ = writeln!(s, "seed {}", cfg.seed);
    for (k, meta) in m.manifest().iter().enumerate() {
        let _ = writeln!(
            s,
            "{} {:e} {:e} {:e}",
            meta.name(),
            m.weights[k],
            m.norm.mean[k],
            m.norm.std[k]
        );
    }
    s
}

pub fn save_model(m: &LinearModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(m))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<LinearModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Unreadable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_model(&text, path)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a Path,
    line: u64,
}

impl<'a> Lines<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.line = i as u64 + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok(l.split_whitespace().collect());
                    }
                }
                None => return Err(self.err("unexpected end of file")),
            }
        }
    }

    fn key<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let f = self.next_fields()?;
        if f.len() != 2 || f[0] != key {
            return Err(self.err(format!("expected `{key} <value>`")));
        }
        self.parse(f[1])
    }

    fn parse<T: FromStr>(&self, v: &str) -> Result<T> {
        v.parse().map_err(|_| self.err(format!("cannot parse {v:?}")))
    }
}

pub fn parse_model(text: &str, path: &Path) -> Result<LinearModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        path,
        line: 0,
    };
    let head = lines.next_fields()?;
    if head.len() != 2 || head[0] != MAGIC {
        return Err(lines.err("not a model file"));
    }
    let version: u32 = lines.parse(head[1])?;
    if version != VERSION {
        return Err(lines.err(format!("unsupported model version {version}")));
    }
    let feature_set: FeatureSet = lines.key("feature_set")?;
    let dims: usize = lines.key("dims")?;
    if dims != feature_set.dims() {
        return Err(Error::DimensionMismatch {
            expected: feature_set.dims(),
            got: dims,
        });
    }
    let bias: f64 = lines.key("bias")?;
    let config = TrainConfig {
        c: lines.key("c")?,
        tolerance: lines.key("tolerance")?,
        max_iterations: lines.key("max_iterations")?,
        balanced: lines.key("balanced")?,
        seed: lines.key("seed")?,
    };
    let manifest = crate::texture::manifest(feature_set);
    let mut weights = Vec::with_capacity(dims);
    let mut mean = Vec::with_capacity(dims);
    let mut std = Vec::with_capacity(dims);
    for meta in &manifest {
        let f = lines.next_fields()?;
        if f.len() != 4 {
            return Err(lines.err("expected `<name> <weight> <mean> <std>`"));
        }
        if f[0] != meta.name() {
            return Err(lines.err(format!("expected dimension {}, found {}", meta.name(), f[0])));
        }
        let vals: [f64; 3] = [lines.parse(f[1])?, lines.parse(f[2])?, lines.parse(f[3])?];
        if vals.iter().any(|v| !v.is_finite()) || vals[2] < 0.0 {
            return Err(lines.err("non-finite value or negative spread"));
        }
        weights.push(vals[0]);
        mean.push(vals[1]);
        std.push(vals[2]);
    }
    if !bias.is_finite() {
        return Err(lines.err("non-finite bias"));
    }
    if lines.next_fields().is_ok() {
        return Err(lines.err("trailing content"));
    }
    Ok(LinearModel {
        weights,
        bias,
        norm: NormStats { mean, std },
        feature_set,
        config,
    })
}
