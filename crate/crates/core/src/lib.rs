//! Webly-labeled learning: curriculum extraction from noisy web metadata and self-paced
//! training of per-concept linear detectors inside a curriculum region.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod lda;
pub mod learner;
pub mod metrics;
pub mod pipeline;
pub mod spl;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
