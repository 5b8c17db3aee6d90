//! Feature normalization, linear SVM training and inference, model files
//! and coefficient analysis.

mod breakdown;
mod io;
mod svm;

pub use breakdown::{family_channel_shares, feature_shares, weight_breakdown, write_breakdown_csv, BreakdownRow};
pub use io::{load_model, model_to_string, parse_model, save_model};
pub use svm::{balanced_class_weights, primal_objective, train_svm, SvmSolution, TrainConfig};

use crate::candidates::Candidate;
use crate::error::{Error, Result};
use crate::image::{AnnotationSet, Point};
use crate::texture::{manifest, FeatureMeta, FeatureSet};

/// Radius within which a candidate counts as a positive example.
pub const LABEL_RADIUS: f64 = 1.0;

/// Positive iff some annotation lies within Euclidean distance 1 (inclusive).
pub fn label_candidates(cands: &[Candidate], truth: &AnnotationSet) -> Vec<bool> {
    cands
        .iter()
        .map(|c| {
            let p = Point::new(c.x as f64, c.y as f64);
            truth.points.iter().any(|t| p.dist(t) <= LABEL_RADIUS)
        })
        .collect()
}

/// Per-dimension z-score statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidInput("cannot fit a normalizer on zero rows".into()));
        };
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Ok(Self { mean, std })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// Zero spread is treated as unit spread.
    fn scale(&self, k: usize) -> f64 {
        if self.std[k] > 0.0 {
            self.std[k]
        } else {
            1.0
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: x.len(),
            });
        }
        Ok(x.iter().enumerate().map(|(k, v)| (v - self.mean[k]) / self.scale(k)).collect())
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter().enumerate().map(|(k, v)| v * self.scale(k) + self.mean[k]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Weights in normalized feature space.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub norm: NormStats,
    pub feature_set: FeatureSet,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn manifest(&self) -> Vec<FeatureMeta> {
        manifest(self.feature_set)
    }

    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    /// Signed margin `w . normalize(x) + b`.
    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        let z = self.norm.apply(x)?;
        Ok(z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias)
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict_score(x)? > 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs: u64,
    pub converged: bool,
    pub positives: usize,
    pub negatives: usize,
}

/// Fits the normalizer on `rows`, then the SVM on the normalized rows.
pub fn train(
    rows: &[Vec<f64>],
    labels: &[bool],
    feature_set: FeatureSet,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainReport)> {
    if let Some(r) = rows.iter().find(|r| r.len() != feature_set.dims()) {
        return Err(Error::DimensionMismatch {
            expected: feature_set.dims(),
            got: r.len(),
        });
    }
    let norm = NormStats::fit(rows)?;
    let z: Vec<Vec<f64>> = rows.iter().map(|r| norm.apply(r)).collect::<Result<_>>()?;
    let sol = train_svm(&z, labels, cfg)?;
    if !sol.converged {
        log::warn!("svm stopped after {} epochs without meeting tolerance", sol.epochs);
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let report = TrainReport {
        epochs: sol.epochs,
        converged: sol.converged,
        positives,
        negatives: labels.len() - positives,
    };
    let model = LinearModel {
        weights: sol.weights,
        bias: sol.bias,
        norm,
        feature_set,
        config: cfg.clone(),
    };
    Ok((model, report))
}
