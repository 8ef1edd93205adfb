//! Moment-based scale-invariant image quality.
//!
//! The crate compares a reference and a test image through their normalized
//! central moments, which are insensitive to translation and uniform scaling
//! but react to anisotropic scaling, shear, rotation and perspective. It also
//! provides PSNR/SSIM baselines, resamplers, degradation generators, rank
//! statistics and the experiment harness built on them.

pub mod baseline;
pub mod error;
pub mod harness;
pub mod image;
pub mod moments;
pub mod msiq;
pub mod stats;
pub mod testset;
pub mod transforms;
pub mod vectors;

pub use crate::baseline::{psnr, ssim, PsnrValue, SsimConfig};
pub use crate::error::{MsiqError, Result};
pub use crate::harness::{ExperimentRecord, ExperimentReport, HarnessConfig, MetricName, RecordValue};
pub use crate::image::{load_image, save_image, to_gray, GrayImage, RgbImage};
pub use crate::moments::{descriptor, MomentDescriptor, MomentScheme};
pub use crate::msiq::{msiq, msiq_images, msiq_rmse, msiq_weighted, MomentWeights, MsiqVariant, VariantChoice};
pub use crate::stats::{MetricPolarity, Specificity};
pub use crate::transforms::{degrade, resize, resize_to, DegradationKind, DegradationSpec, ResizeMethod};
