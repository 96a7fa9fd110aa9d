//! Run configuration: line-oriented `key = value` files, dataset
//! presets, and flag overrides (flags win over file values, file
//! values win over preset defaults).
//!
//! The resolved configuration can be written back out as a snapshot;
//! replaying a snapshot reproduces the run byte-for-byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use actionet::attention::{AttentionNorm, AttentionVariant};
use actionet::data::{AugmentPolicy, Split, WindowMode};
use actionet::model::{ModelConfig, Streams};
use actionet::synth::SyntheticSpec;
use actionet::train::{OptimizerHyper, Schedule};

use crate::CliError;

/// Dataset preset filling batch size, epochs, decay points, and
/// window sizes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Preset {
    Mit,
    RgBall,
    RgClubs,
    RgHoop,
    RgRibbon,
    Synthetic,
    Custom,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Preset, CliError> {
        Ok(match s {
            "mit" => Preset::Mit,
            "rg-ball" => Preset::RgBall,
            "rg-clubs" => Preset::RgClubs,
            "rg-hoop" => Preset::RgHoop,
            "rg-ribbon" => Preset::RgRibbon,
            "synthetic" => Preset::Synthetic,
            "custom" => Preset::Custom,
            other => {
                return Err(CliError::usage(format!(
                    "unknown preset {other:?} (expected mit, rg-ball, rg-clubs, rg-hoop, rg-ribbon, synthetic, custom)"
                )))
            }
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Preset::Mit => "mit",
            Preset::RgBall => "rg-ball",
            Preset::RgClubs => "rg-clubs",
            Preset::RgHoop => "rg-hoop",
            Preset::RgRibbon => "rg-ribbon",
            Preset::Synthetic => "synthetic",
            Preset::Custom => "custom",
        }
    }

    /// (batch size, epochs, decay epochs, dynamic window, static window).
    /// Gymnastics presets decay in the last 100 and last 50 epochs;
    /// the skating preset decays after 150 and 180 of 200.
    fn schedule_values(self) -> Option<(usize, usize, Vec<usize>, usize, usize)> {
        match self {
            Preset::Mit => Some((16, 200, vec![150, 180], 48, 150)),
            Preset::RgBall => Some((32, 400, vec![300, 350], 26, 80)),
            Preset::RgClubs => Some((32, 300, vec![200, 250], 26, 80)),
            Preset::RgHoop => Some((32, 500, vec![400, 450], 26, 80)),
            Preset::RgRibbon => Some((32, 300, vec![200, 250], 26, 80)),
            Preset::Synthetic => Some((8, 24, vec![8, 16], 26, 80)),
            Preset::Custom => None,
        }
    }

    fn apply(self, rc: &mut RunConfig) {
        if let Some((batch, epochs, decay, wd, ws)) = self.schedule_values() {
            rc.batch_size = batch;
            rc.epochs = epochs;
            rc.decay_epochs = decay;
            rc.window_dynamic = wd;
            rc.window_static = ws;
        }
    }
}

/// Every knob of a run, after preset/file/flag resolution.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset: Preset,
    pub manifest: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub seed: u64,
    pub streams: Streams,
    pub attention: AttentionVariant,
    pub attention_norm: AttentionNorm,
    pub kernel_scale: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub decay_epochs: Vec<usize>,
    pub window_dynamic: usize,
    pub window_static: usize,
    pub augment: WindowMode,
    pub lr_attention: f64,
    pub lr_prediction: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub split: Split,
    pub synth_videos: usize,
    pub synth_train: usize,
    pub synth_dynamic: usize,
    pub synth_static: usize,
    pub synth_keys: usize,
    pub synth_noise: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Preset::Custom,
            manifest: None,
            out_dir: None,
            checkpoint: None,
            seed: 1,
            streams: Streams::Ts,
            attention: AttentionVariant::Caa,
            attention_norm: AttentionNorm::Softmax,
            kernel_scale: 1.0,
            dropout: 0.5,
            batch_size: 32,
            epochs: 200,
            decay_epochs: Vec::new(),
            window_dynamic: 26,
            window_static: 80,
            augment: WindowMode::RandomShift,
            lr_attention: 0.01,
            lr_prediction: 0.05,
            momentum: 0.9,
            weight_decay: 1e-4,
            split: Split::Test,
            synth_videos: 40,
            synth_train: 30,
            synth_dynamic: 32,
            synth_static: 100,
            synth_keys: 16,
            synth_noise: 0.02,
        }
    }
}

fn parse_streams(s: &str) -> Result<Streams, CliError> {
    Ok(match s {
        "ds" => Streams::Ds,
        "ss" => Streams::Ss,
        "ts" => Streams::Ts,
        other => return Err(CliError::usage(format!("streams must be ds, ss, or ts, got {other:?}"))),
    })
}

fn parse_attention(s: &str) -> Result<AttentionVariant, CliError> {
    Ok(match s {
        "caa" => AttentionVariant::Caa,
        "sau" => AttentionVariant::Sau,
        "avg" => AttentionVariant::Avg,
        other => {
            return Err(CliError::usage(format!(
                "attention must be caa, sau, or avg, got {other:?}"
            )))
        }
    })
}

fn parse_norm(s: &str) -> Result<AttentionNorm, CliError> {
    Ok(match s {
        "softmax" => AttentionNorm::Softmax,
        "sigmoid" => AttentionNorm::Sigmoid,
        other => {
            return Err(CliError::usage(format!(
                "attention_norm must be softmax or sigmoid, got {other:?}"
            )))
        }
    })
}

fn parse_augment(s: &str) -> Result<WindowMode, CliError> {
    Ok(match s {
        "random-shift" => WindowMode::RandomShift,
        "center" => WindowMode::Center,
        "start" => WindowMode::Start,
        other => {
            return Err(CliError::usage(format!(
                "augment must be random-shift, center, or start, got {other:?}"
            )))
        }
    })
}

fn parse_split(s: &str) -> Result<Split, CliError> {
    Ok(match s {
        "train" => Split::Train,
        "test" => Split::Test,
        other => return Err(CliError::usage(format!("split must be train or test, got {other:?}"))),
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse::<T>()
        .map_err(|_| CliError::usage(format!("key {key}: cannot parse {value:?}")))
}

fn parse_decay_list(value: &str) -> Result<Vec<usize>, CliError> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("decay_epochs: cannot parse {p:?}")))
        })
        .collect()
}

impl RunConfig {
    fn apply_key(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        let located = |msg: String| CliError::usage(format!("config line {line}: {msg}"));
        match key {
            "preset" => {} // handled during resolution
            "manifest" => self.manifest = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(value)),
            "seed" => self.seed = parse_num(key, value).map_err(|e| located(e.message))?,
            "streams" => self.streams = parse_streams(value).map_err(|e| located(e.message))?,
            "attention" => self.attention = parse_attention(value).map_err(|e| located(e.message))?,
            "attention_norm" => {
                self.attention_norm = parse_norm(value).map_err(|e| located(e.message))?
            }
            "kernel_scale" => self.kernel_scale = parse_num(key, value).map_err(|e| located(e.message))?,
            "dropout" => self.dropout = parse_num(key, value).map_err(|e| located(e.message))?,
            "batch_size" => self.batch_size = parse_num(key, value).map_err(|e| located(e.message))?,
            "epochs" => self.epochs = parse_num(key, value).map_err(|e| located(e.message))?,
            "decay_epochs" => {
                self.decay_epochs = parse_decay_list(value).map_err(|e| located(e.message))?
            }
            "window_dynamic" => {
                self.window_dynamic = parse_num(key, value).map_err(|e| located(e.message))?
            }
            "window_static" => {
                self.window_static = parse_num(key, value).map_err(|e| located(e.message))?
            }
            "augment" => self.augment = parse_augment(value).map_err(|e| located(e.message))?,
            "lr_attention" => self.lr_attention = parse_num(key, value).map_err(|e| located(e.message))?,
            "lr_prediction" => {
                self.lr_prediction = parse_num(key, value).map_err(|e| located(e.message))?
            }
            "momentum" => self.momentum = parse_num(key, value).map_err(|e| located(e.message))?,
            "weight_decay" => self.weight_decay = parse_num(key, value).map_err(|e| located(e.message))?,
            "split" => self.split = parse_split(value).map_err(|e| located(e.message))?,
            "synth_videos" => self.synth_videos = parse_num(key, value).map_err(|e| located(e.message))?,
            "synth_train" => self.synth_train = parse_num(key, value).map_err(|e| located(e.message))?,
            "synth_dynamic" => {
                self.synth_dynamic = parse_num(key, value).map_err(|e| located(e.message))?
            }
            "synth_static" => {
                self.synth_static = parse_num(key, value).map_err(|e| located(e.message))?
            }
            "synth_keys" => self.synth_keys = parse_num(key, value).map_err(|e| located(e.message))?,
            "synth_noise" => self.synth_noise = parse_num(key, value).map_err(|e| located(e.message))?,
            other => return Err(located(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            streams: self.streams,
            attention: self.attention,
            attention_norm: self.attention_norm,
            kernel_scale: self.kernel_scale,
            dropout_rate: self.dropout,
            seed: self.seed,
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule::new(self.epochs, self.decay_epochs.clone(), self.batch_size)
    }

    pub fn policy(&self) -> AugmentPolicy {
        AugmentPolicy {
            window_dynamic: self.window_dynamic,
            window_static: self.window_static,
            mode: self.augment,
        }
    }

    pub fn hyper(&self) -> OptimizerHyper {
        OptimizerHyper {
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            lr_attention: self.lr_attention,
            lr_prediction: self.lr_prediction,
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_videos: self.synth_videos,
            n_train: self.synth_train,
            n_dynamic: self.synth_dynamic,
            n_static: self.synth_static,
            key_count: self.synth_keys,
            noise_sigma: self.synth_noise,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model_config()
            .validate()
            .and_then(|_| self.schedule().validate())
            .map_err(|e| CliError::usage(e.to_string()))?;
        if self.window_dynamic == 0 || self.window_static == 0 {
            return Err(CliError::usage("window sizes must be positive"));
        }
        Ok(())
    }

    /// Snapshot in config-file syntax; all keys explicit, fixed order.
    /// Feeding the snapshot back via `--config` reproduces the run.
    pub fn snapshot(&self) -> String {
        let mut s = String::from("# resolved run configuration\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("preset", self.preset.label().to_string());
        if let Some(p) = &self.manifest {
            kv("manifest", p.display().to_string());
        }
        if let Some(p) = &self.out_dir {
            kv("out_dir", p.display().to_string());
        }
        if let Some(p) = &self.checkpoint {
            kv("checkpoint", p.display().to_string());
        }
        kv("seed", self.seed.to_string());
        kv("streams", self.streams.label().to_string());
        kv("attention", self.attention.label().to_string());
        kv(
            "attention_norm",
            match self.attention_norm {
                AttentionNorm::Softmax => "softmax".to_string(),
                AttentionNorm::Sigmoid => "sigmoid".to_string(),
            },
        );
        kv("kernel_scale", self.kernel_scale.to_string());
        kv("dropout", self.dropout.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("epochs", self.epochs.to_string());
        kv(
            "decay_epochs",
            self.decay_epochs
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("window_dynamic", self.window_dynamic.to_string());
        kv("window_static", self.window_static.to_string());
        kv("augment", self.augment.label().to_string());
        kv("lr_attention", self.lr_attention.to_string());
        kv("lr_prediction", self.lr_prediction.to_string());
        kv("momentum", self.momentum.to_string());
        kv("weight_decay", self.weight_decay.to_string());
        kv("split", self.split.label().to_string());
        kv("synth_videos", self.synth_videos.to_string());
        kv("synth_train", self.synth_train.to_string());
        kv("synth_dynamic", self.synth_dynamic.to_string());
        kv("synth_static", self.synth_static.to_string());
        kv("synth_keys", self.synth_keys.to_string());
        kv("synth_noise", self.synth_noise.to_string());
        s
    }
}

/// Flag-level overrides collected by the argument parser; `None`
/// means "not given".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub seed: Option<u64>,
    pub preset: Option<String>,
    pub streams: Option<String>,
    pub attention: Option<String>,
    pub split: Option<String>,
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let Some(eq) = stripped.find('=') else {
            return Err(CliError::usage(format!(
                "config line {line}: expected 'key = value', got {raw:?}"
            )));
        };
        let key = stripped[..eq].trim().to_string();
        let value = stripped[eq + 1..].trim().to_string();
        if key.is_empty() {
            return Err(CliError::usage(format!("config line {line}: empty key")));
        }
        pairs.push((line, key, value));
    }
    Ok(pairs)
}

/// Defaults, then preset values, then config-file keys, then flags.
pub fn resolve(overrides: &Overrides) -> Result<RunConfig, CliError> {
    let pairs = match &overrides.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };

    let preset_name = overrides
        .preset
        .clone()
        .or_else(|| {
            pairs
                .iter()
                .rev()
                .find(|(_, k, _)| k == "preset")
                .map(|(_, _, v)| v.clone())
        })
        .unwrap_or_else(|| "custom".to_string());
    let preset = Preset::parse(&preset_name)?;

    let mut rc = RunConfig {
        preset,
        ..RunConfig::default()
    };
    preset.apply(&mut rc);
    for (line, key, value) in &pairs {
        rc.apply_key(key, value, *line)?;
    }

    if let Some(v) = &overrides.manifest {
        rc.manifest = Some(v.clone());
    }
    if let Some(v) = &overrides.out_dir {
        rc.out_dir = Some(v.clone());
    }
    if let Some(v) = &overrides.checkpoint {
        rc.checkpoint = Some(v.clone());
    }
    if let Some(v) = overrides.seed {
        rc.seed = v;
    }
    if let Some(v) = &overrides.streams {
        rc.streams = parse_streams(v)?;
    }
    if let Some(v) = &overrides.attention {
        rc.attention = parse_attention(v)?;
    }
    if let Some(v) = &overrides.split {
        rc.split = parse_split(v)?;
    }

    rc.validate()?;
    Ok(rc)
}

/// Requires `manifest` to be set and to exist on disk.
pub fn require_manifest(rc: &RunConfig) -> Result<PathBuf, CliError> {
    let path = rc
        .manifest
        .clone()
        .ok_or_else(|| CliError::usage("a manifest is required (--manifest or manifest= in config)"))?;
    if !path.is_file() {
        return Err(CliError::usage(format!("manifest not found: {}", path.display())));
    }
    Ok(path)
}

pub fn require_out_dir(rc: &RunConfig) -> Result<PathBuf, CliError> {
    rc.out_dir
        .clone()
        .ok_or_else(|| CliError::usage("an output directory is required (--out-dir or out_dir= in config)"))
}

pub fn require_checkpoint(rc: &RunConfig) -> Result<PathBuf, CliError> {
    let path = rc
        .checkpoint
        .clone()
        .ok_or_else(|| CliError::usage("a checkpoint is required (--checkpoint or checkpoint= in config)"))?;
    if !path.is_file() {
        return Err(CliError::usage(format!("checkpoint not found: {}", path.display())));
    }
    Ok(path)
}

pub fn absolutize(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir()
            .map(|cwd| cwd.join(path))
            .unwrap_or_else(|_| path.to_path_buf())
    }
}
