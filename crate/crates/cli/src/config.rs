//! TOML pipeline configuration. Every key is optional; absent keys keep
//! their defaults. Dotted keys (`segment.gray_threshold = 140`) and tables
//! are equivalent.

use std::path::Path;

use anyhow::{Context, Result};
use rnaseg_core::{MatchMode, PipelineConfig};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    stain: StainSection,
    #[serde(default)]
    candidates: CandidateSection,
    #[serde(default)]
    features: FeatureSection,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    segment: SegmentSection,
    #[serde(default)]
    eval: EvalSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StainSection {
    haematoxylin: Option<[f64; 3]>,
    rnascope: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateSection {
    blur_sigma: Option<f64>,
    threshold_decrement: Option<u8>,
    dark_fill_offset: Option<u8>,
    dark_cutoff: Option<u8>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureSection {
    set: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    c: Option<f64>,
    tolerance: Option<f64>,
    max_iterations: Option<u64>,
    balanced: Option<bool>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSection {
    gray_threshold: Option<u8>,
    area_threshold: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalSection {
    match_radius: Option<f64>,
    optimal: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(self.stain.haematoxylin => cfg.haematoxylin);
        set!(self.stain.rnascope => cfg.rnascope);
        let c = &self.candidates;
        set!(c.blur_sigma => cfg.candidates.blur_sigma);
        set!(c.threshold_decrement => cfg.candidates.threshold_decrement);
        set!(c.dark_fill_offset => cfg.candidates.dark_fill_offset);
        set!(c.dark_cutoff => cfg.candidates.dark_cutoff);
        if let Some(s) = &self.features.set {
            cfg.feature_set = s.parse()?;
        }
        let t = &self.train;
        set!(t.c => cfg.train.c);
        set!(t.tolerance => cfg.train.tolerance);
        set!(t.max_iterations => cfg.train.max_iterations);
        set!(t.balanced => cfg.train.balanced);
        set!(t.seed => cfg.train.seed);
        set!(self.segment.gray_threshold => cfg.gray_threshold);
        set!(self.segment.area_threshold => cfg.area_threshold);
        set!(self.eval.match_radius => cfg.match_radius);
        if let Some(opt) = self.eval.optimal {
            cfg.match_mode = if opt { MatchMode::Optimal } else { MatchMode::Greedy };
        }
        Ok(())
    }
}
