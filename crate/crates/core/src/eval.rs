//! Point matching, detection scores and the threshold sweep.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ChannelImage, Point};
use crate::segmap::{regional_maxima, watershed_with_maxima};

pub const DEFAULT_MATCH_RADIUS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Closest pairs first, ties by detection index then truth index.
    #[default]
    Greedy,
    /// Maximum number of pairs.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `2tp / (2tp + fp + fn)`, 0 when there is nothing to score.
    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// F1 from precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// (detection index, truth index, distance)
    pub pairs: Vec<(usize, usize, f64)>,
    pub counts: Counts,
}

impl MatchResult {
    pub fn precision(&self) -> f64 {
        self.counts.precision()
    }
    pub fn recall(&self) -> f64 {
        self.counts.recall()
    }
    pub fn f1(&self) -> f64 {
        self.counts.f1()
    }
}

/// Pairs detections with annotations closer than `radius` (strict), each
/// point used at most once.
pub fn match_points(dets: &[Point], truth: &[Point], radius: f64, mode: MatchMode) -> Result<MatchResult> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidInput(format!("match radius must be positive, got {radius}")));
    }
    let mut pairs = match mode {
        MatchMode::Greedy => greedy(dets, truth, radius),
        MatchMode::Optimal => maximum_matching(dets, truth, radius),
    };
    pairs.sort_by_key(|p| (p.0, p.1));
    let tp = pairs.len();
    Ok(MatchResult {
        pairs,
        counts: Counts {
            tp,
            fp: dets.len() - tp,
            fn_: truth.len() - tp,
        },
    })
}

fn greedy(dets: &[Point], truth: &[Point], radius: f64) -> Vec<(usize, usize, f64)> {
    let mut cand = Vec::new();
    for (i, d) in dets.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let dist = d.dist(t);
            if dist < radius {
                cand.push((i, j, dist));
            }
        }
    }
    cand.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut det_used = vec![false; dets.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut out = Vec::new();
    for (i, j, d) in cand {
        if !det_used[i] && !truth_used[j] {
            det_used[i] = true;
            truth_used[j] = true;
            out.push((i, j, d));
        }
    }
    out
}

/// Augmenting paths over the bipartite "within radius" graph.
fn maximum_matching(dets: &[Point], truth: &[Point], radius: f64) -> Vec<(usize, usize, f64)> {
    let adj: Vec<Vec<usize>> = dets
        .iter()
        .map(|d| (0..truth.len()).filter(|&j| d.dist(&truth[j]) < radius).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; truth.len()];

    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..dets.len() {
        let mut seen = vec![false; truth.len()];
        augment(i, &adj, &mut owner, &mut seen);
    }
    owner
        .iter()
        .enumerate()
        .filter_map(|(j, o)| o.map(|i| (i, j, dets[i].dist(&truth[j]))))
        .collect()
}

/// Reference (label, F1, precision, recall) rows for the full and reduced
/// classifiers and for expert annotators.
pub const REFERENCE_SCORES: [(&str, f64, f64, f64); 3] = [
    ("full", 0.572, 0.626, 0.527),
    ("reduced", 0.571, 0.633, 0.521),
    ("experts", 0.596, 0.682, 0.530),
];

/// Tab-separated table of F1, precision and recall per labelled result,
/// followed by the reference rows.
pub fn score_table(results: &[(String, Counts)]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no results to tabulate".into()));
    }
    let mut s = String::from("classifier\tf1\tprecision\trecall\n");
    for (label, c) in results {
        let _ = writeln!(s, "{label}\t{:.3}\t{:.3}\t{:.3}", c.f1(), c.precision(), c.recall());
    }
    for (label, f1, p, r) in REFERENCE_SCORES {
        let _ = writeln!(s, "reference:{label}\t{f1:.3}\t{p:.3}\t{r:.3}");
    }
    Ok(s)
}

/// Confidence map of one patch with its annotations.
#[derive(Debug, Clone)]
pub struct SweepPatch {
    pub map: ChannelImage,
    pub truth: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gray: u8,
    pub area: usize,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub grays: Vec<u8>,
    pub areas: Vec<usize>,
    pub radius: f64,
    pub mode: MatchMode,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            grays: (0..=254).step_by(2).collect(),
            areas: (1..=10).collect(),
            radius: DEFAULT_MATCH_RADIUS,
            mode: MatchMode::Greedy,
        }
    }
}

/// Counts pooled over all patches for every (gray, area) grid point, in
/// gray-major order.
pub fn sweep(patches: &[SweepPatch], grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if patches.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one patch".into()));
    }
    if grid.areas.contains(&0) {
        return Err(Error::InvalidInput("area thresholds must be at least 1".into()));
    }
    let maxima: Vec<Vec<u32>> = patches.par_iter().map(|p| regional_maxima(&p.map).0).collect();
    let per_gray: Vec<Result<Vec<SweepRow>>> = grid
        .grays
        .par_iter()
        .map(|&gray| {
            let mut rows: Vec<SweepRow> = grid
                .areas
                .iter()
                .map(|&area| SweepRow {
                    gray,
                    area,
                    counts: Counts::default(),
                })
                .collect();
            for (p, m) in patches.iter().zip(&maxima) {
                let ws = watershed_with_maxima(&p.map, m, gray);
                for row in &mut rows {
                    let dets: Vec<Point> = ws.detections(row.area).iter().map(|d| Point::new(d.x, d.y)).collect();
                    row.counts += match_points(&dets, &p.truth, grid.radius, grid.mode)?.counts;
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::with_capacity(grid.grays.len() * grid.areas.len());
    for r in per_gray {
        out.extend(r?);
    }
    Ok(out)
}

/// Row with the highest F1; the earliest wins ties.
pub fn sweep_argmax(rows: &[SweepRow]) -> Option<SweepRow> {
    let mut best: Option<SweepRow> = None;
    for r in rows {
        if best.is_none_or(|b| r.counts.f1() > b.counts.f1()) {
            best = Some(*r);
        }
    }
    best
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::from(std::io::Error::other(e));
    w.write_record(["gray", "area", "f1", "precision", "recall", "tp", "fp", "fn"])
        .map_err(err)?;
    for r in rows {
        let c = r.counts;
        w.write_record([
            r.gray.to_string(),
            r.area.to_string(),
            format!("{:.6}", c.f1()),
            format!("{:.6}", c.precision()),
            format!("{:.6}", c.recall()),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
