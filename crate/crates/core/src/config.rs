//! Training configuration: flat TOML file, CLI overrides, validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::HintKind;
use crate::error::{Error, Result};

/// Character set shared by the text encoder, the builtin fonts and the
/// recognizer. Index 0 of the derived token table is reserved for padding /
/// the CTC blank.
pub const DEFAULT_ALPHABET: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,:!?-'";

fn default_image_size() -> u32 {
    64
}
fn default_latent_size() -> usize {
    8
}
fn default_latent_channels() -> usize {
    4
}
fn default_timesteps() -> usize {
    1000
}
fn default_beta_start() -> f64 {
    1e-4
}
fn default_beta_end() -> f64 {
    0.02
}
fn default_lambda_ocr() -> f64 {
    0.1
}
fn default_learning_rate() -> f64 {
    1e-4
}
fn default_batch_size() -> usize {
    8
}
fn default_epochs() -> usize {
    1
}
fn default_hint_kind() -> HintKind {
    HintKind::Glyph
}
fn default_true() -> bool {
    true
}
fn default_seed() -> u64 {
    0
}
fn default_codec() -> CodecMode {
    CodecMode::Analytic
}
fn default_codec_pretrain_steps() -> usize {
    400
}
fn default_codec_psnr_floor() -> f64 {
    12.0
}
fn default_weight_decay() -> f64 {
    0.01
}
fn default_grad_clip() -> f64 {
    1.0
}
fn default_uniform_font() -> String {
    "sans".to_string()
}
fn default_canny_low() -> f64 {
    0.1
}
fn default_canny_high() -> f64 {
    0.3
}
fn default_canny_sigma() -> f64 {
    1.0
}
fn default_alphabet() -> String {
    DEFAULT_ALPHABET.to_string()
}
fn default_text_len() -> usize {
    24
}
fn default_text_dim() -> usize {
    32
}
fn default_base_channels() -> usize {
    32
}
fn default_sample_steps() -> usize {
    20
}
fn default_sample_batch() -> usize {
    4
}
fn default_guidance_weight() -> f64 {
    1.0
}
fn default_checkpoint_every() -> usize {
    500
}
fn default_loss_reduction() -> LossReduction {
    LossReduction::MeanElements
}

/// Image-to-latent codec flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecMode {
    /// Fixed analytic codec: average-pool encode, bilinear-upsample decode.
    Analytic,
    /// Small convolutional autoencoder, pretrained on the corpus then frozen.
    Learned,
}

/// Reduction applied inside the latent diffusion loss. Recorded in
/// checkpoints so loss values stay comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReduction {
    /// Mean over every element of the batch tensor.
    MeanElements,
    /// Sum of squared errors per sample, averaged over the batch.
    SumPerSample,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    /// Square training resolution in pixels.
    #[serde(default = "default_image_size")]
    pub image_size: u32,
    /// Latent spatial size (m = n).
    #[serde(default = "default_latent_size")]
    pub latent_size: usize,
    /// Latent channel count.
    #[serde(default = "default_latent_channels")]
    pub latent_channels: usize,
    /// Diffusion timesteps T.
    #[serde(default = "default_timesteps")]
    pub timesteps: usize,
    #[serde(default = "default_beta_start")]
    pub beta_start: f64,
    #[serde(default = "default_beta_end")]
    pub beta_end: f64,
    /// Weight of the OCR perceptual term in the total objective.
    #[serde(default = "default_lambda_ocr")]
    pub lambda_ocr: f64,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_hint_kind")]
    pub hint_kind: HintKind,
    #[serde(default = "default_true")]
    pub use_ocr_loss: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Keep the base denoiser frozen and train only the control branch and
    /// text encoder.
    #[serde(default = "default_true")]
    pub freeze_base: bool,
    #[serde(default = "default_codec")]
    pub codec: CodecMode,
    #[serde(default = "default_codec_pretrain_steps")]
    pub codec_pretrain_steps: usize,
    /// Minimum round-trip PSNR (dB) the learned codec must reach on held-out
    /// data before it is frozen.
    #[serde(default = "default_codec_psnr_floor")]
    pub codec_psnr_floor: f64,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    /// Global gradient-norm clip; 0 disables clipping.
    #[serde(default = "default_grad_clip")]
    pub grad_clip: f64,
    /// Font used for glyph hints regardless of a region's own font.
    #[serde(default = "default_uniform_font")]
    pub uniform_font: String,
    #[serde(default = "default_canny_low")]
    pub canny_low: f64,
    #[serde(default = "default_canny_high")]
    pub canny_high: f64,
    #[serde(default = "default_canny_sigma")]
    pub canny_sigma: f64,
    #[serde(default = "default_alphabet")]
    pub alphabet: String,
    /// Captions are padded or truncated to this many tokens.
    #[serde(default = "default_text_len")]
    pub text_len: usize,
    #[serde(default = "default_text_dim")]
    pub text_dim: usize,
    /// Width of the first denoiser level; the second level is twice as wide.
    #[serde(default = "default_base_channels")]
    pub base_channels: usize,
    /// DDIM steps used at inference.
    #[serde(default = "default_sample_steps")]
    pub sample_steps: usize,
    /// Images generated per sampling request.
    #[serde(default = "default_sample_batch")]
    pub sample_batch: usize,
    /// Classifier-free guidance weight; 1.0 disables the unconditional pass.
    #[serde(default = "default_guidance_weight")]
    pub guidance_weight: f64,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    #[serde(default = "default_loss_reduction")]
    pub loss_reduction: LossReduction,
    /// Path to a pretrained recognizer checkpoint (required when
    /// `use_ocr_loss` is set).
    #[serde(default)]
    pub recognizer: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config populates defaults")
    }
}

impl TrainConfig {
    /// Spatial downsampling factor of the codec.
    pub fn downsample_factor(&self) -> u32 {
        self.image_size / self.latent_size as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_ocr < 0.0 {
            return Err(Error::Config("lambda_ocr must be >= 0".into()));
        }
        if self.timesteps < 2 {
            return Err(Error::Config("timesteps must be >= 2".into()));
        }
        if !(0.0 < self.beta_start && self.beta_start <= self.beta_end && self.beta_end < 1.0) {
            return Err(Error::Config("need 0 < beta_start <= beta_end < 1".into()));
        }
        if self.latent_size == 0 || self.image_size == 0 {
            return Err(Error::Config("image_size and latent_size must be positive".into()));
        }
        if self.image_size % self.latent_size as u32 != 0 {
            return Err(Error::Config(format!(
                "image_size {} must be divisible by latent_size {}",
                self.image_size, self.latent_size
            )));
        }
        let factor = self.downsample_factor();
        if !factor.is_power_of_two() {
            return Err(Error::Config(format!(
                "downsampling factor {factor} (image_size / latent_size) must be a power of two"
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.sample_steps == 0 || self.sample_steps > self.timesteps {
            return Err(Error::Config("need 1 <= sample_steps <= timesteps".into()));
        }
        if !(0.0 < self.canny_low && self.canny_low < self.canny_high) {
            return Err(Error::Config("need 0 < canny_low < canny_high".into()));
        }
        if self.alphabet.is_empty() {
            return Err(Error::Config("alphabet must not be empty".into()));
        }
        if self.text_len == 0 || self.text_dim == 0 || self.base_channels == 0 {
            return Err(Error::Config("text_len, text_dim and base_channels must be positive".into()));
        }
        Ok(())
    }

    /// Parse a flat TOML config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: TrainConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    /// Apply `key=value` overrides (CLI flags win over file values). Values
    /// are parsed as TOML, falling back to strings for bare words.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut table: toml::Table = toml::Table::try_from(self)
            .map_err(|e| Error::Config(format!("config serialization failed: {e}")))?;
        for (key, value) in overrides {
            let parsed: toml::Value = match value.parse() {
                Ok(v) => v,
                Err(_) => toml::Value::String(value.clone()),
            };
            // Bare words like `glyph` parse only as strings.
            let parsed = match parsed {
                toml::Value::String(s) => toml::Value::String(s),
                other => other,
            };
            table.insert(key.clone(), parsed);
        }
        let merged: TrainConfig = table
            .try_into()
            .map_err(|e| Error::Config(format!("invalid override: {e}")))?;
        Ok(merged)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Write the effective config beside run outputs.
    pub fn write_snapshot(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let path = out_dir.join("effective-config.toml");
        std::fs::write(&path, self.to_toml()).map_err(|e| Error::io(&path, e))
    }

    /// Token table: index 0 is the pad / CTC blank, then one id per alphabet
    /// character.
    pub fn vocab_size(&self) -> usize {
        self.alphabet.chars().count() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_values() {
        let c = TrainConfig::default();
        assert_eq!(c.lambda_ocr, 0.1);
        assert_eq!(c.learning_rate, 1e-4);
        assert_eq!(c.batch_size, 8);
        assert_eq!(c.image_size, 64);
        assert_eq!(c.latent_size, 8);
        assert_eq!(c.latent_channels, 4);
        assert_eq!(c.sample_steps, 20);
        assert_eq!(c.sample_batch, 4);
        assert!(c.freeze_base);
        c.validate().unwrap();
    }

    #[test]
    fn overrides_win_over_defaults() {
        let c = TrainConfig::default()
            .with_overrides(&[
                ("lambda_ocr".into(), "0.5".into()),
                ("hint_kind".into(), "canny".into()),
                ("use_ocr_loss".into(), "false".into()),
            ])
            .unwrap();
        assert_eq!(c.lambda_ocr, 0.5);
        assert_eq!(c.hint_kind, HintKind::Canny);
        assert!(!c.use_ocr_loss);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        let mut c = TrainConfig::default();
        c.epochs = 3;
        c.seed = 42;
        std::fs::write(&path, c.to_toml()).unwrap();
        let loaded = TrainConfig::from_file(&path).unwrap();
        assert_eq!(loaded, c);
    }

    #[test]
    fn validation_rejects_bad_factor() {
        let mut c = TrainConfig::default();
        c.latent_size = 13;
        assert!(c.validate().is_err());
        c.latent_size = 8;
        c.lambda_ocr = -0.1;
        assert!(c.validate().is_err());
        c.lambda_ocr = 0.0;
        c.timesteps = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c: TrainConfig = toml::from_str("epochs = 7\nseed = 5\n").unwrap();
        assert_eq!(c.epochs, 7);
        assert_eq!(c.seed, 5);
        assert_eq!(c.lambda_ocr, 0.1);
    }
}
