//! Image clustering and segmentation on per-pixel wavelet-tree features.
//!
//! The pipeline is: decompose every circular shift of the image with a
//! two-channel filter bank ([`filterbank`], [`wavelet`]), flatten the
//! spatial-orientation tree at each pixel into a feature vector
//! ([`features`]), reweight the coarsest sub-bands, then run K-means, fuzzy
//! C-means ([`clustering`]) or a two-phase active contour ([`acwe`]) on the
//! vectors. With zero decomposition levels the features are raw intensities
//! and the algorithms reduce to their conventional forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acwe;
pub mod clustering;
pub mod container;
pub mod error;
pub mod features;
pub mod filterbank;
pub mod image;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod pipeline;
pub mod wavelet;

pub use error::{Error, Result};
pub use features::{FeatureField, WeightingConfig, WeightingMode};
pub use filterbank::FilterPair;
pub use image::GrayImage;
