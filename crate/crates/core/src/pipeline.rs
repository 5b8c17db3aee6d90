//! Stage wiring shared by the command-line tool, tests and benches.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::candidates::{select_candidates, Candidate, CandidateParams, Selection};
use crate::error::{Error, Result};
use crate::eval::{match_points, MatchMode, MatchResult, DEFAULT_MATCH_RADIUS};
use crate::image::{to_grayscale, AnnotationSet, ChannelImage, Point, RgbImage};
use crate::model::{label_candidates, train, LinearModel, TrainConfig, TrainReport};
use crate::segmap::{detect, render_map, Detection, DEFAULT_AREA_THRESHOLD, DEFAULT_GRAY_THRESHOLD};
use crate::stain::{deconvolve, StainMatrix, StainPlanes, DEFAULT_HAEMATOXYLIN, DEFAULT_RNASCOPE};
use crate::texture::{extract_all, FeatureChannels, FeatureSet};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub haematoxylin: [f64; 3],
    pub rnascope: [f64; 3],
    pub candidates: CandidateParams,
    pub feature_set: FeatureSet,
    pub train: TrainConfig,
    pub gray_threshold: u8,
    pub area_threshold: usize,
    pub match_radius: f64,
    pub match_mode: MatchMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            haematoxylin: DEFAULT_HAEMATOXYLIN,
            rnascope: DEFAULT_RNASCOPE,
            candidates: CandidateParams::default(),
            feature_set: FeatureSet::Reduced,
            train: TrainConfig::default(),
            gray_threshold: DEFAULT_GRAY_THRESHOLD,
            area_threshold: DEFAULT_AREA_THRESHOLD,
            match_radius: DEFAULT_MATCH_RADIUS,
            match_mode: MatchMode::Greedy,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.stain_matrix()?;
        self.train.validate()?;
        let p = &self.candidates;
        if !(p.blur_sigma > 0.0 && p.blur_sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("blur sigma must be positive, got {}", p.blur_sigma)));
        }
        if self.area_threshold == 0 {
            return Err(Error::InvalidInput("area threshold must be at least 1".into()));
        }
        if !(self.match_radius > 0.0 && self.match_radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "match radius must be positive, got {}",
                self.match_radius
            )));
        }
        Ok(())
    }

    pub fn stain_matrix(&self) -> Result<StainMatrix> {
        StainMatrix::from_stains(self.haematoxylin, self.rnascope)
    }
}

/// Deconvolved planes, grayscale and candidates of one patch.
#[derive(Debug, Clone)]
pub struct PreparedPatch {
    pub planes: StainPlanes,
    pub gray: ChannelImage,
    pub selection: Selection,
}

impl PreparedPatch {
    pub fn candidates(&self) -> &[Candidate] {
        &self.selection.candidates
    }

    pub fn feature_channels(&self) -> FeatureChannels {
        FeatureChannels {
            gray: self.gray.clone(),
            haem: self.planes.haem.clone(),
            rnascope: self.planes.rnascope.clone(),
        }
    }

    pub fn features(&self, set: FeatureSet) -> Vec<Vec<f64>> {
        extract_all(set, &self.feature_channels(), self.candidates())
    }
}

pub fn prepare_patch(img: &RgbImage, cfg: &PipelineConfig) -> Result<PreparedPatch> {
    let planes = deconvolve(img, &cfg.stain_matrix()?);
    let gray = to_grayscale(img);
    let selection = select_candidates(&planes.rnascope, &gray, &cfg.candidates)?;
    Ok(PreparedPatch {
        planes,
        gray,
        selection,
    })
}

type LabelledRows = (Vec<Vec<f64>>, Vec<bool>);

/// Feature rows and labels pooled over annotated patches, in patch order.
pub fn training_set(patches: &[(RgbImage, AnnotationSet)], cfg: &PipelineConfig) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
    let per_patch: Vec<Result<LabelledRows>> = patches
        .par_iter()
        .map(|(img, truth)| {
            let prep = prepare_patch(img, cfg)?;
            let labels = label_candidates(prep.candidates(), truth);
            Ok((prep.features(cfg.feature_set), labels))
        })
        .collect();
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for r in per_patch {
        let (x, y) = r?;
        rows.extend(x);
        labels.extend(y);
    }
    Ok((rows, labels))
}

pub fn train_on_patches(
    patches: &[(RgbImage, AnnotationSet)],
    cfg: &PipelineConfig,
) -> Result<(LinearModel, TrainReport)> {
    let (rows, labels) = training_set(patches, cfg)?;
    train(&rows, &labels, cfg.feature_set, &cfg.train)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub prepare: Duration,
    pub features: Duration,
    pub predict: Duration,
    pub segment: Duration,
}

#[derive(Debug, Clone)]
pub struct PatchOutput {
    pub prepared: PreparedPatch,
    pub scores: Vec<f64>,
    pub map: ChannelImage,
    pub detections: Vec<Detection>,
    pub timings: StageTimings,
}

impl PatchOutput {
    pub fn detection_points(&self) -> Vec<Point> {
        self.detections.iter().map(|d| Point::new(d.x, d.y)).collect()
    }

    pub fn evaluate(&self, truth: &AnnotationSet, cfg: &PipelineConfig) -> Result<MatchResult> {
        match_points(&self.detection_points(), &truth.points, cfg.match_radius, cfg.match_mode)
    }
}

/// Patch to detections with a trained model. The model's feature set wins
/// over the configured one.
pub fn segment_patch(img: &RgbImage, model: &LinearModel, cfg: &PipelineConfig) -> Result<PatchOutput> {
    let mut timings = StageTimings::default();
    let t = Instant::now();
    let prepared = prepare_patch(img, cfg)?;
    timings.prepare = t.elapsed();

    let t = Instant::now();
    let rows = prepared.features(model.feature_set);
    timings.features = t.elapsed();

    let t = Instant::now();
    let scores = rows.iter().map(|r| model.predict_score(r)).collect::<Result<Vec<_>>>()?;
    timings.predict = t.elapsed();

    let t = Instant::now();
    let map = render_map(img.width(), img.height(), prepared.candidates(), &scores)?;
    let detections = detect(&map, cfg.gray_threshold, cfg.area_threshold);
    timings.segment = t.elapsed();

    Ok(PatchOutput {
        prepared,
        scores,
        map,
        detections,
        timings,
    })
}
