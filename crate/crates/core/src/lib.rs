//! Detection of RNAscope transcript dots in H-DAB stained tissue patches.

pub mod candidates;
pub mod error;
pub mod eval;
pub mod image;
pub mod model;
pub mod pipeline;
pub mod segmap;
pub mod stain;
pub mod synth;
pub mod texture;

pub use error::{Error, Result};
pub use candidates::{Candidate, CandidateParams};
pub use eval::{MatchMode, MatchResult};
pub use image::{AnnotationSet, ChannelImage, Point, RgbImage};
pub use model::{LinearModel, TrainConfig};
pub use pipeline::PipelineConfig;
pub use segmap::Detection;
pub use texture::FeatureSet;
