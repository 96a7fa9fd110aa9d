//! Feature-file and manifest ingestion, score normalization, and
//! start-shift window augmentation.
//!
//! Feature files use the AQF1 format: magic `AQF1`, little-endian u32
//! instance count N and width D, then N*D little-endian IEEE-754
//! 32-bit reals in row-major order, with no trailing bytes. Values are
//! widened to f64 in memory (upstream extractors emit 32-bit; training
//! math is 64-bit).

use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::attention::{InstanceSet, StreamKind};
use crate::error::{Error, Result};
use crate::tensor::Tensor2D;

pub const AQF1_MAGIC: [u8; 4] = *b"AQF1";

/// Manifest header; column order is fixed and unquoted.
pub const MANIFEST_HEADER: &str =
    "video_id,dynamic_path,static_path,score_difficulty,score_execution,score_total,split";

/// Which dataset split a video belongs to.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One video's manifest entry.
#[derive(Clone, Debug)]
pub struct VideoRecord {
    pub video_id: String,
    pub dynamic_path: PathBuf,
    pub static_path: PathBuf,
    /// Judge sub-scores; the total is the training target. For
    /// gymnastics-style data the total is approximately difficulty +
    /// execution - penalties; recorded, never enforced.
    pub difficulty: f64,
    pub execution: f64,
    pub total: f64,
    pub split: Split,
}

/// Reads an AQF1 feature file into an NxD matrix.
pub fn read_feature_file(path: &Path) -> Result<Tensor2D> {
    let bytes = fs::read(path)?;
    read_feature_bytes(&bytes, &path.display().to_string())
}

pub fn read_feature_bytes(bytes: &[u8], source: &str) -> Result<Tensor2D> {
    let mut cursor = bytes;
    let mut magic = [0u8; 4];
    read_exact(&mut cursor, &mut magic, source)?;
    if magic != AQF1_MAGIC {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(&AQF1_MAGIC).into_owned(),
            found: String::from_utf8_lossy(&magic).into_owned(),
        });
    }
    let n = read_u32(&mut cursor, source)? as usize;
    let d = read_u32(&mut cursor, source)? as usize;
    if n == 0 {
        return Err(Error::EmptyInstanceSet(source.into()));
    }
    let payload = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::InvalidArgument(format!("{source}: dimensions overflow")))?;
    if cursor.len() < payload {
        return Err(Error::UnexpectedEof(format!(
            "{source}: payload needs {payload} bytes, {} remain",
            cursor.len()
        )));
    }
    if cursor.len() > payload {
        return Err(Error::TrailingBytes((cursor.len() - payload) as u64));
    }
    let mut data = Vec::with_capacity(n * d);
    for chunk in cursor.chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().expect("chunk of 4")) as f64;
        if !v.is_finite() {
            return Err(Error::NonFiniteData(source.into()));
        }
        data.push(v);
    }
    Tensor2D::new(n, d, data)
}

/// Writes an NxD matrix as an AQF1 file, narrowing entries to f32.
pub fn write_feature_file(path: &Path, features: &Tensor2D) -> Result<()> {
    let mut out = fs::File::create(path)?;
    out.write_all(&feature_bytes(features))?;
    Ok(())
}

pub fn feature_bytes(features: &Tensor2D) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(12 + features.len() * 4);
    bytes.extend_from_slice(&AQF1_MAGIC);
    bytes.extend_from_slice(&(features.rows() as u32).to_le_bytes());
    bytes.extend_from_slice(&(features.cols() as u32).to_le_bytes());
    for &v in features.data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    bytes
}

fn read_exact(cursor: &mut &[u8], buf: &mut [u8], source: &str) -> Result<()> {
    if cursor.len() < buf.len() {
        return Err(Error::UnexpectedEof(source.into()));
    }
    cursor.read_exact(buf).map_err(Error::Io)
}

fn read_u32(cursor: &mut &[u8], source: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(cursor, &mut buf, source)?;
    Ok(u32::from_le_bytes(buf))
}

/// Parses a manifest CSV. The header must match [`MANIFEST_HEADER`]
/// exactly; fields are split on commas with no quoting, so paths
/// containing commas are rejected by the field count check.
pub fn read_manifest(path: &Path) -> Result<Vec<VideoRecord>> {
    let text = fs::read_to_string(path)?;
    parse_manifest(&text)
}

pub fn parse_manifest(text: &str) -> Result<Vec<VideoRecord>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Manifest {
        line: 1,
        detail: "empty manifest".into(),
    })?;
    if header.trim_end() != MANIFEST_HEADER {
        return Err(Error::Manifest {
            line: 1,
            detail: format!("header must be {MANIFEST_HEADER:?}, got {header:?}"),
        });
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Manifest {
                line: line_no,
                detail: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let video_id = fields[0].trim().to_string();
        if video_id.is_empty() {
            return Err(Error::Manifest {
                line: line_no,
                detail: "empty video_id".into(),
            });
        }
        if !seen.insert(video_id.clone()) {
            return Err(Error::Manifest {
                line: line_no,
                detail: format!("duplicate video id {video_id:?}"),
            });
        }
        let score = |field: &str, name: &str| -> Result<f64> {
            field.trim().parse::<f64>().map_err(|_| Error::Manifest {
                line: line_no,
                detail: format!("unparsable {name} {field:?}"),
            })
        };
        let split = match fields[6].trim() {
            "train" => Split::Train,
            "test" => Split::Test,
            other => {
                return Err(Error::Manifest {
                    line: line_no,
                    detail: format!("split must be train or test, got {other:?}"),
                })
            }
        };
        records.push(VideoRecord {
            video_id,
            dynamic_path: PathBuf::from(fields[1].trim()),
            static_path: PathBuf::from(fields[2].trim()),
            difficulty: score(fields[3], "score_difficulty")?,
            execution: score(fields[4], "score_execution")?,
            total: score(fields[5], "score_total")?,
            split,
        });
    }
    Ok(records)
}

pub fn manifest_text(records: &[VideoRecord]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.video_id,
            r.dynamic_path.display(),
            r.static_path.display(),
            r.difficulty,
            r.execution,
            r.total,
            r.split.label()
        ));
    }
    out
}

pub fn write_manifest(path: &Path, records: &[VideoRecord]) -> Result<()> {
    fs::write(path, manifest_text(records))?;
    Ok(())
}

/// Min-max normalizer fit on the training split only. Test scores may
/// map outside [0, 1]; evaluation uses rank correlation, which is
/// invariant to any monotone transform, so that is harmless.
#[derive(Copy, Clone, Debug)]
pub struct ScoreNormalizer {
    min: f64,
    max: f64,
}

impl ScoreNormalizer {
    pub fn fit(train_scores: &[f64]) -> Result<Self> {
        if train_scores.is_empty() {
            return Err(Error::InvalidArgument("no training scores to fit".into()));
        }
        if train_scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteData("training scores".into()));
        }
        let min = train_scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = train_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::InvalidArgument(format!(
                "training scores are constant ({min}); normalizer undefined"
            )));
        }
        Ok(ScoreNormalizer { min, max })
    }

    pub fn normalize(&self, score: f64) -> f64 {
        (score - self.min) / (self.max - self.min)
    }

    pub fn denormalize(&self, value: f64) -> f64 {
        value * (self.max - self.min) + self.min
    }
}

/// How a training window is placed within a video's instances.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WindowMode {
    /// Uniformly random start offset (the start-shift augmentation).
    RandomShift,
    Center,
    Start,
}

impl WindowMode {
    pub fn label(self) -> &'static str {
        match self {
            WindowMode::RandomShift => "random-shift",
            WindowMode::Center => "center",
            WindowMode::Start => "start",
        }
    }
}

/// Per-stream window sizes plus the placement mode.
#[derive(Copy, Clone, Debug)]
pub struct AugmentPolicy {
    pub window_dynamic: usize,
    pub window_static: usize,
    pub mode: WindowMode,
}

impl AugmentPolicy {
    pub fn window_for(&self, kind: StreamKind) -> usize {
        match kind {
            StreamKind::Dynamic => self.window_dynamic,
            StreamKind::Static => self.window_static,
        }
    }

    pub fn with_mode(self, mode: WindowMode) -> Self {
        AugmentPolicy { mode, ..self }
    }
}

/// Takes a contiguous window of `window` rows. Offsets are uniform
/// over the slack in random-shift mode; rows are never reordered. If
/// the video is shorter than the window, the last row is repeated to
/// fill it.
pub fn augment_window(
    features: &Tensor2D,
    window: usize,
    mode: WindowMode,
    rng: &mut ChaCha8Rng,
) -> Tensor2D {
    let n = features.rows();
    if window == 0 || n == 0 {
        return Tensor2D::zeros(window, features.cols());
    }
    if n < window {
        // repeat-pad the last row
        return Tensor2D::from_fn(window, features.cols(), |r, c| {
            features.get(r.min(n - 1), c)
        });
    }
    let slack = n - window;
    let offset = match mode {
        WindowMode::Start => 0,
        WindowMode::Center => slack / 2,
        WindowMode::RandomShift => {
            if slack == 0 {
                0
            } else {
                rng.random_range(0..=slack)
            }
        }
    };
    Tensor2D::from_fn(window, features.cols(), |r, c| features.get(offset + r, c))
}

/// One video with both streams resident in memory.
#[derive(Clone, Debug)]
pub struct LoadedVideo {
    pub record: VideoRecord,
    pub dynamic: Tensor2D,
    pub static_: Tensor2D,
}

/// A fully loaded dataset, the unit the trainer consumes.
#[derive(Clone, Debug, Default)]
pub struct LoadedDataset {
    pub videos: Vec<LoadedVideo>,
}

impl LoadedDataset {
    pub fn split_indices(&self, split: Split) -> Vec<usize> {
        self.videos
            .iter()
            .enumerate()
            .filter(|(_, v)| v.record.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn index_of(&self, video_id: &str) -> Option<usize> {
        self.videos.iter().position(|v| v.record.video_id == video_id)
    }
}

/// Loads every manifest entry's feature files. Relative paths resolve
/// against the manifest's parent directory.
pub fn load_dataset(manifest_path: &Path) -> Result<LoadedDataset> {
    let records = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut videos = Vec::with_capacity(records.len());
    for record in records {
        let resolve = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let dynamic = read_feature_file(&resolve(&record.dynamic_path))?;
        let static_ = read_feature_file(&resolve(&record.static_path))?;
        // validate stream widths up front
        InstanceSet::new(dynamic.clone(), StreamKind::Dynamic, record.video_id.clone())?;
        InstanceSet::new(static_.clone(), StreamKind::Static, record.video_id.clone())?;
        videos.push(LoadedVideo {
            record,
            dynamic,
            static_,
        });
    }
    Ok(LoadedDataset { videos })
}
