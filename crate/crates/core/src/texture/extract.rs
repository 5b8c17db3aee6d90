use std::fmt;
use std::str::FromStr;

use super::features::{
    feature_coarseness, feature_energy, feature_ldhgle, feature_variance, firstorder_features, glcm_features,
    gldm_features, glrlm_features, glszm_features, ngtdm_features, FIRSTORDER_NAMES, GLCM_NAMES, GLDM_NAMES,
    GLRLM_NAMES, GLSZM_NAMES, NGTDM_NAMES,
};
use super::matrices::{glcm, gldm, glrlm, glszm, ngtdm};
use super::window::Window;
use crate::candidates::Candidate;
use crate::error::Error;
use crate::image::ChannelImage;

pub const WINDOW_SIDES: [usize; 2] = [7, 11];
pub const DISTANCES: [usize; 3] = [1, 2, 3];
pub const GLDM_CUTOFFS: [u8; 3] = [0, 1, 2];
/// Distance and cutoff used by the reduced set.
pub const REDUCED_DISTANCE: usize = 3;
pub const REDUCED_CUTOFF: u8 = 2;

/// Features per (channel, window) context in the full set.
pub const FULL_PER_CONTEXT: usize = 18 + 24 * 3 + 16 + 16 + 14 * 9 + 5 * 3;
pub const FULL_DIMS: usize = 6 * FULL_PER_CONTEXT;
pub const REDUCED_DIMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Gray,
    Haem,
    Rnascope,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Gray, Channel::Haem, Channel::Rnascope];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Gray => "gray",
            Channel::Haem => "haem",
            Channel::Rnascope => "rnascope",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    FirstOrder,
    Glcm,
    Glrlm,
    Glszm,
    Gldm,
    Ngtdm,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::FirstOrder => "firstorder",
            Family::Glcm => "glcm",
            Family::Glrlm => "glrlm",
            Family::Glszm => "glszm",
            Family::Gldm => "gldm",
            Family::Ngtdm => "ngtdm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureSet {
    Full,
    #[default]
    Reduced,
}

impl FeatureSet {
    pub fn dims(self) -> usize {
        match self {
            FeatureSet::Full => FULL_DIMS,
            FeatureSet::Reduced => REDUCED_DIMS,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Full => "full",
            FeatureSet::Reduced => "reduced",
        })
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(FeatureSet::Full),
            "reduced" => Ok(FeatureSet::Reduced),
            other => Err(Error::InvalidInput(format!("unknown feature set {other:?}"))),
        }
    }
}

/// Describes one dimension of a feature vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureMeta {
    pub channel: Channel,
    pub window: usize,
    pub family: Family,
    pub feature: &'static str,
    pub distance: Option<usize>,
    pub cutoff: Option<u8>,
}

impl FeatureMeta {
    /// Column name, e.g. `rnascope_w11_gldm_LargeDependenceHighGrayLevelEmphasis_d3_a2`.
    pub fn name(&self) -> String {
        let mut s = format!("{}_w{}_{}_{}", self.channel.name(), self.window, self.family.name(), self.feature);
        if let Some(d) = self.distance {
            s.push_str(&format!("_d{d}"));
        }
        if let Some(a) = self.cutoff {
            s.push_str(&format!("_a{a}"));
        }
        s
    }
}

fn meta(channel: Channel, window: usize, family: Family, feature: &'static str) -> FeatureMeta {
    FeatureMeta {
        channel,
        window,
        family,
        feature,
        distance: None,
        cutoff: None,
    }
}

fn context_manifest(channel: Channel, window: usize, out: &mut Vec<FeatureMeta>) {
    let m = |family, feature| meta(channel, window, family, feature);
    out.extend(FIRSTORDER_NAMES.iter().map(|f| m(Family::FirstOrder, f)));
    for d in DISTANCES {
        out.extend(GLCM_NAMES.iter().map(|f| FeatureMeta {
            distance: Some(d),
            ..m(Family::Glcm, f)
        }));
    }
    out.extend(GLRLM_NAMES.iter().map(|f| m(Family::Glrlm, f)));
    out.extend(GLSZM_NAMES.iter().map(|f| m(Family::Glszm, f)));
    for d in DISTANCES {
        for a in GLDM_CUTOFFS {
            out.extend(GLDM_NAMES.iter().map(|f| FeatureMeta {
                distance: Some(d),
                cutoff: Some(a),
                ..m(Family::Gldm, f)
            }));
        }
    }
    for d in DISTANCES {
        out.extend(NGTDM_NAMES.iter().map(|f| FeatureMeta {
            distance: Some(d),
            ..m(Family::Ngtdm, f)
        }));
    }
}

/// Dimension layout for a feature set. Contexts are ordered channel-major
/// (gray, haem, rnascope) then by window side (7, 11).
pub fn manifest(set: FeatureSet) -> Vec<FeatureMeta> {
    let mut out = Vec::with_capacity(set.dims());
    for channel in Channel::ALL {
        for window in WINDOW_SIDES {
            match set {
                FeatureSet::Full => context_manifest(channel, window, &mut out),
                FeatureSet::Reduced => {
                    let m = |family, feature| meta(channel, window, family, feature);
                    out.push(m(Family::FirstOrder, "Energy"));
                    out.push(m(Family::FirstOrder, "Variance"));
                    out.push(FeatureMeta {
                        distance: Some(REDUCED_DISTANCE),
                        ..m(Family::Ngtdm, "Coarseness")
                    });
                    out.push(FeatureMeta {
                        distance: Some(REDUCED_DISTANCE),
                        cutoff: Some(REDUCED_CUTOFF),
                        ..m(Family::Gldm, "LargeDependenceHighGrayLevelEmphasis")
                    });
                }
            }
        }
    }
    out
}

/// Index into the full layout of every reduced dimension, in reduced order.
pub fn reduced_indices() -> Vec<usize> {
    let full = manifest(FeatureSet::Full);
    manifest(FeatureSet::Reduced)
        .iter()
        .map(|r| full.iter().position(|f| f == r).expect("reduced dims are a subset of full"))
        .collect()
}

/// The three planes features are computed on.
#[derive(Debug, Clone)]
pub struct FeatureChannels {
    pub gray: ChannelImage,
    pub haem: ChannelImage,
    pub rnascope: ChannelImage,
}

impl FeatureChannels {
    pub fn get(&self, c: Channel) -> &ChannelImage {
        match c {
            Channel::Gray => &self.gray,
            Channel::Haem => &self.haem,
            Channel::Rnascope => &self.rnascope,
        }
    }
}

fn check_bounds(channels: &FeatureChannels, c: &Candidate) {
    let img = &channels.gray;
    assert!(
        c.x < img.width() && c.y < img.height(),
        "candidate ({}, {}) outside {}x{} image",
        c.x,
        c.y,
        img.width(),
        img.height()
    );
}

pub fn extract_full(channels: &FeatureChannels, c: &Candidate) -> Vec<f64> {
    check_bounds(channels, c);
    let mut out = Vec::with_capacity(FULL_DIMS);
    for channel in Channel::ALL {
        for side in WINDOW_SIDES {
            let w = Window::around(channels.get(channel), c.x, c.y, side);
            let q = w.quantize();
            let pixels = side * side;
            out.extend(firstorder_features(&w));
            for d in DISTANCES {
                out.extend(glcm_features(&glcm(&q, d)));
            }
            out.extend(glrlm_features(&glrlm(&q), pixels));
            out.extend(glszm_features(&glszm(&q), pixels));
            for d in DISTANCES {
                for a in GLDM_CUTOFFS {
                    out.extend(gldm_features(&gldm(&q, d, a)));
                }
            }
            for d in DISTANCES {
                out.extend(ngtdm_features(&ngtdm(&q, d)));
            }
        }
    }
    debug_assert_eq!(out.len(), FULL_DIMS);
    out
}

pub fn extract_reduced(channels: &FeatureChannels, c: &Candidate) -> Vec<f64> {
    check_bounds(channels, c);
    let mut out = Vec::with_capacity(REDUCED_DIMS);
    for channel in Channel::ALL {
        for side in WINDOW_SIDES {
            let w = Window::around(channels.get(channel), c.x, c.y, side);
            let q = w.quantize();
            out.push(feature_energy(&w));
            out.push(feature_variance(&w));
            out.push(feature_coarseness(&ngtdm(&q, REDUCED_DISTANCE)));
            out.push(feature_ldhgle(&gldm(&q, REDUCED_DISTANCE, REDUCED_CUTOFF)));
        }
    }
    out
}

pub fn extract(set: FeatureSet, channels: &FeatureChannels, c: &Candidate) -> Vec<f64> {
    match set {
        FeatureSet::Full => extract_full(channels, c),
        FeatureSet::Reduced => extract_reduced(channels, c),
    }
}

/// Feature rows for many candidates, computed in parallel, in input order.
pub fn extract_all(set: FeatureSet, channels: &FeatureChannels, cands: &[Candidate]) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    cands.par_iter().map(|c| extract(set, channels, c)).collect()
}
