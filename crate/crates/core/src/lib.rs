//! Font-controllable visual-text diffusion at desk scale.
//!
//! The pipeline mirrors a hint-conditioned latent diffusion setup: conditioning
//! hints (glyph, canny, font-mask) are built from font rasterizations and
//! annotated images, a control branch injects hint features into a small latent
//! denoiser, training combines the latent diffusion loss with a multi-layer
//! perceptual loss computed by a frozen text recognizer, and a deterministic
//! DDIM sampler produces images that are scored with OCR-based metrics.

pub mod autodiff;
pub mod canny;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod control;
pub mod data;
pub mod diffusion;
pub mod error;
pub mod evaluate;
pub mod fonts;
pub mod hints;
pub mod metrics;
pub mod nn;
pub mod ocr;
pub mod plot;
pub mod rng;
pub mod sampler;
pub mod trainer;

pub use error::{Error, Result};
