//! Windowed gray-level texture features.
//!
//! Every candidate is described by windows of side 7 and 11 on the gray,
//! haematoxylin and RNAscope planes. Windows are quantized to 32 levels of
//! width 8 before any matrix is built. The full set covers first-order
//! statistics and the GLCM, GLRLM, GLSZM, GLDM and NGTDM families at every
//! distance and cutoff; the reduced set keeps energy, variance, NGTDM
//! coarseness and GLDM large dependence high gray level emphasis.

mod extract;
mod features;
mod matrices;
mod window;

pub use extract::{
    extract, extract_all, extract_full, extract_reduced, manifest, reduced_indices, Channel, Family, FeatureChannels,
    FeatureMeta, FeatureSet, DISTANCES, FULL_DIMS, FULL_PER_CONTEXT, GLDM_CUTOFFS, REDUCED_CUTOFF, REDUCED_DIMS,
    REDUCED_DISTANCE, WINDOW_SIDES,
};
pub use features::*;
pub use matrices::{directions, glcm, gldm, glrlm, glszm, max_dependence, ngtdm, CountMatrix, Ngtdm};
pub use window::{quantize_value, QuantizedWindow, Window, BIN_WIDTH, GRAY_LEVELS};

#[cfg(test)]
mod tests;
