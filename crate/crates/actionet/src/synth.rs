//! Synthetic planted-signal dataset for desk-scale verification.
//!
//! Real benchmark videos and their backbone features are out of reach
//! here, so end-to-end checks run on generated data with a known
//! answer: every feature matrix is standard normal noise except for a
//! few designated key instances, which carry a fixed direction scaled
//! by a per-video magnitude. The ground-truth score is a strictly
//! increasing function of the combined magnitudes, so a model that
//! finds the planted signal ranks videos correctly.

use rand::Rng;
use rand_distr::StandardNormal;

use std::path::PathBuf;

use crate::attention::StreamKind;
use crate::data::{LoadedDataset, LoadedVideo, Split, VideoRecord};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor2D;

/// Planted direction scale: key-instance projections are ~6x the unit
/// noise on the same axis, strong enough for desk-scale training runs.
const SIGNAL_SCALE: f64 = 6.0;
/// Score = clip01(sigmoid(A*m_dyn + B*m_stat) + noise).
const SCORE_COEF_DYNAMIC: f64 = 2.0;
const SCORE_COEF_STATIC: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub n_videos: usize,
    /// First `n_train` videos land in the train split, the rest in test.
    pub n_train: usize,
    pub n_dynamic: usize,
    pub n_static: usize,
    pub key_count: usize,
    /// Standard deviation of the additive score noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_videos: 40,
            n_train: 30,
            n_dynamic: 26,
            n_static: 80,
            key_count: 6,
            noise_sigma: 0.02,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub dataset: LoadedDataset,
    /// Key-instance row indices, identical for every video.
    pub key_dynamic: Vec<usize>,
    pub key_static: Vec<usize>,
    /// Per-video combined planted magnitude `A*m_dyn + B*m_stat`; the
    /// noise-free score is a strictly increasing function of it.
    pub planted: Vec<f64>,
}

pub fn make_synthetic_dataset(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    if spec.n_videos == 0 || spec.n_dynamic == 0 || spec.n_static == 0 {
        return Err(Error::InvalidArgument("synthetic dataset dimensions must be positive".into()));
    }
    if spec.n_train > spec.n_videos {
        return Err(Error::InvalidArgument(format!(
            "n_train {} exceeds n_videos {}",
            spec.n_train, spec.n_videos
        )));
    }
    if spec.key_count > spec.n_dynamic.min(spec.n_static) {
        return Err(Error::InvalidArgument(format!(
            "key_count {} exceeds min instance count {}",
            spec.key_count,
            spec.n_dynamic.min(spec.n_static)
        )));
    }
    if spec.noise_sigma < 0.0 {
        return Err(Error::InvalidArgument("noise_sigma must be non-negative".into()));
    }

    let dir_dynamic = planted_direction(spec.seed, "direction-dynamic", StreamKind::Dynamic.feature_dim());
    let dir_static = planted_direction(spec.seed, "direction-static", StreamKind::Static.feature_dim());
    let key_dynamic = spread_indices(spec.key_count, spec.n_dynamic);
    let key_static = spread_indices(spec.key_count, spec.n_static);
    let m_dynamic = stratified_magnitudes(spec.seed, "magnitude-dynamic", spec.n_videos);
    let m_static = stratified_magnitudes(spec.seed, "magnitude-static", spec.n_videos);

    let mut videos = Vec::with_capacity(spec.n_videos);
    let mut planted = Vec::with_capacity(spec.n_videos);
    for v in 0..spec.n_videos {
        let m_dyn = m_dynamic[v];
        let m_stat = m_static[v];

        let dynamic = stream_features(
            spec.seed,
            "features-dynamic",
            v,
            spec.n_dynamic,
            &dir_dynamic,
            &key_dynamic,
            m_dyn,
        );
        let static_ = stream_features(
            spec.seed,
            "features-static",
            v,
            spec.n_static,
            &dir_static,
            &key_static,
            m_stat,
        );

        let t = SCORE_COEF_DYNAMIC * m_dyn + SCORE_COEF_STATIC * m_stat;
        let mut score = crate::autodiff::sigmoid(t);
        if spec.noise_sigma > 0.0 {
            let noise: f64 = rng::stream_indexed(spec.seed, "score-noise", v as u64, 0).sample(StandardNormal);
            score += spec.noise_sigma * noise;
        }
        score = score.clamp(0.0, 1.0);
        planted.push(t);

        let video_id = format!("synth-{v:03}");
        videos.push(LoadedVideo {
            record: VideoRecord {
                video_id: video_id.clone(),
                dynamic_path: PathBuf::from(format!("features/{video_id}_dyn.aqf")),
                static_path: PathBuf::from(format!("features/{video_id}_stat.aqf")),
                difficulty: m_dyn,
                execution: m_stat,
                total: score,
                split: if v < spec.n_train { Split::Train } else { Split::Test },
            },
            dynamic,
            static_,
        });
    }

    Ok(SyntheticDataset {
        dataset: LoadedDataset { videos },
        key_dynamic,
        key_static,
        planted,
    })
}

/// Standard-normal rows with the planted direction added to key rows;
/// entries are rounded to f32 so in-memory data equals data written to
/// an AQF1 file and read back.
fn stream_features(
    seed: u64,
    label: &str,
    video: usize,
    n: usize,
    direction: &[f64],
    keys: &[usize],
    magnitude: f64,
) -> Tensor2D {
    let d = direction.len();
    let mut r = rng::stream_indexed(seed, label, video as u64, 0);
    let mut features = Tensor2D::zeros(n, d);
    for row in 0..n {
        let is_key = keys.contains(&row);
        for col in 0..d {
            let noise: f64 = r.sample(StandardNormal);
            let value = if is_key {
                noise + magnitude * direction[col]
            } else {
                noise
            };
            features.set(row, col, value as f32 as f64);
        }
    }
    features
}

/// Per-video magnitudes stratified over (0, 1): a seeded permutation
/// of evenly spaced values, so any subset of videos has well-spread
/// magnitudes (an i.i.d. draw can cluster and make small test splits
/// rank-degenerate).
fn stratified_magnitudes(seed: u64, label: &str, n: usize) -> Vec<f64> {
    use rand::seq::SliceRandom;
    let mut r = rng::stream(seed, label);
    let mut values: Vec<f64> = (0..n)
        .map(|i| (i as f64 + r.random::<f64>()) / n as f64)
        .collect();
    values.shuffle(&mut r);
    values
}

/// Fixed unit direction scaled by [`SIGNAL_SCALE`].
fn planted_direction(seed: u64, label: &str, dim: usize) -> Vec<f64> {
    let mut r = rng::stream(seed, label);
    let raw: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| x / norm * SIGNAL_SCALE).collect()
}

/// `count` row indices spread evenly over the central band
/// [0.2n, 0.8n). Start-shift windows of at least 0.8n rows always
/// cover the band, so window augmentation varies the noise an
/// instance window sees but never the planted signal.
fn spread_indices(count: usize, n: usize) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let lo = n / 5;
    let hi = (4 * n).div_ceil(5);
    let span = (hi - lo).max(1);
    (0..count).map(|i| lo + i * span / count).collect()
}
