//! The five operator commands.

use std::fmt::Write as _;
use std::fs;

use actionet::attention::{InstanceSet, StreamKind};
use actionet::checkpoint;
use actionet::data;
use actionet::metrics;
use actionet::model::{self, ModelParams, ParamGroup, Phase, CLAIMED_PARAM_COUNT};
use actionet::synth::make_synthetic_dataset;
use actionet::train;

use crate::config::{
    absolutize, require_checkpoint, require_manifest, require_out_dir, RunConfig,
};
use crate::CliError;

fn create_out_dir(rc: &RunConfig) -> Result<std::path::PathBuf, CliError> {
    let dir = require_out_dir(rc)?;
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Train from a manifest; writes report.csv, model.anpw, and the
/// resolved-config snapshot; prints the final test correlation.
pub fn cmd_train(mut rc: RunConfig) -> Result<(), CliError> {
    let manifest = require_manifest(&rc)?;
    let out_dir = create_out_dir(&rc)?;

    // snapshot paths absolute so a replay works from any directory
    rc.manifest = Some(absolutize(&manifest));
    rc.out_dir = Some(absolutize(&out_dir));

    let dataset = data::load_dataset(&manifest)?;
    let (params, report) = train::train(
        &dataset,
        &rc.model_config(),
        &rc.schedule(),
        &rc.policy(),
        rc.hyper(),
    )?;

    let report_path = out_dir.join("report.csv");
    fs::write(&report_path, report.to_csv())?;
    let ckpt_path = out_dir.join("model.anpw");
    checkpoint::save_params(&ckpt_path, &params)?;
    fs::write(out_dir.join("config_resolved.cfg"), rc.snapshot())?;

    let final_rho = report
        .final_test_rho()
        .map(|r| r.to_string())
        .unwrap_or_else(|| "nan".to_string());
    println!("trained {} epochs in {:.1}s", report.epochs.len(), report.wall_time.as_secs_f64());
    println!("report: {}", report_path.display());
    println!("checkpoint: {}", ckpt_path.display());
    println!("final test rho: {final_rho}");
    Ok(())
}

/// Evaluate a checkpoint on one split; prints rho and writes the
/// per-video predictions when an output directory is given.
pub fn cmd_eval(rc: RunConfig) -> Result<(), CliError> {
    let manifest = require_manifest(&rc)?;
    let ckpt = require_checkpoint(&rc)?;
    let dataset = data::load_dataset(&manifest)?;
    let params = checkpoint::load_params(&ckpt, &rc.model_config())?;

    let indices = dataset.split_indices(rc.split);
    if indices.is_empty() {
        return Err(CliError::data(format!("empty {} split", rc.split.label())));
    }
    let predicted = train::predict(&dataset, &indices, &params, &rc.model_config(), &rc.policy())?;
    let actual: Vec<f64> = indices
        .iter()
        .map(|&i| dataset.videos[i].record.total)
        .collect();
    let rho = metrics::spearman(&predicted, &actual)?;

    if rc.out_dir.is_some() {
        let out_dir = create_out_dir(&rc)?;
        let mut csv = String::from("video_id,predicted,actual\n");
        for (k, &i) in indices.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{}",
                dataset.videos[i].record.video_id, predicted[k], actual[k]
            );
        }
        fs::write(out_dir.join("predictions.csv"), csv)?;
    }
    println!("{} split: {} videos", rc.split.label(), indices.len());
    println!("spearman rho: {rho}");
    Ok(())
}

/// Per-instance attention weights of the requested videos (all
/// manifest videos when none are named), on the full un-windowed
/// feature sets, as CSV rows `video_id,stream,instance_index,weight`.
pub fn cmd_export_attention(rc: RunConfig, video_ids: &[String]) -> Result<(), CliError> {
    let manifest = require_manifest(&rc)?;
    let ckpt = require_checkpoint(&rc)?;
    let out_dir = create_out_dir(&rc)?;
    let dataset = data::load_dataset(&manifest)?;
    let config = rc.model_config();
    let params = checkpoint::load_params(&ckpt, &config)?;

    let indices: Vec<usize> = if video_ids.is_empty() {
        (0..dataset.videos.len()).collect()
    } else {
        video_ids
            .iter()
            .map(|id| {
                dataset
                    .index_of(id)
                    .ok_or_else(|| actionet::Error::UnknownVideo(id.clone()))
            })
            .collect::<actionet::Result<_>>()?
    };

    let mut csv = String::from("video_id,stream,instance_index,weight\n");
    for &i in &indices {
        let video = &dataset.videos[i];
        let id = &video.record.video_id;
        let dynamic = config
            .streams
            .uses_dynamic()
            .then(|| InstanceSet::new(video.dynamic.clone(), StreamKind::Dynamic, id.clone()))
            .transpose()?;
        let static_ = config
            .streams
            .uses_static()
            .then(|| InstanceSet::new(video.static_.clone(), StreamKind::Static, id.clone()))
            .transpose()?;
        let out = model::forward(&params, &config, dynamic.as_ref(), static_.as_ref(), &mut Phase::Eval)?;
        for (kind, att) in [
            (StreamKind::Dynamic, out.dynamic.as_ref()),
            (StreamKind::Static, out.static_.as_ref()),
        ] {
            if let Some(att) = att {
                for row in 0..att.weights.rows() {
                    let _ = writeln!(csv, "{},{},{},{}", id, kind.label(), row, att.weights.get(row, 0));
                }
            }
        }
    }
    let path = out_dir.join("attention.csv");
    fs::write(&path, csv)?;
    println!("wrote attention weights for {} video(s): {}", indices.len(), path.display());
    Ok(())
}

/// Generate a synthetic dataset on disk: AQF1 feature files, a
/// manifest, and a key-index sidecar. Byte-identical per seed.
pub fn cmd_synth(rc: RunConfig) -> Result<(), CliError> {
    let out_dir = create_out_dir(&rc)?;
    let features_dir = out_dir.join("features");
    fs::create_dir_all(&features_dir)?;

    let generated = make_synthetic_dataset(&rc.synthetic_spec())?;
    let mut records = Vec::new();
    for video in &generated.dataset.videos {
        let rec = &video.record;
        data::write_feature_file(&out_dir.join(&rec.dynamic_path), &video.dynamic)?;
        data::write_feature_file(&out_dir.join(&rec.static_path), &video.static_)?;
        records.push(rec.clone());
    }
    let manifest_path = out_dir.join("manifest.csv");
    data::write_manifest(&manifest_path, &records)?;

    let mut keys = String::from("stream,instance_index\n");
    for &k in &generated.key_dynamic {
        let _ = writeln!(keys, "dynamic,{k}");
    }
    for &k in &generated.key_static {
        let _ = writeln!(keys, "static,{k}");
    }
    fs::write(out_dir.join("keys.csv"), keys)?;

    println!(
        "generated {} videos ({} train / {} test) under {}",
        records.len(),
        rc.synth_train,
        records.len() - rc.synth_train,
        out_dir.display()
    );
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

fn count_raw(tensors: &[(String, actionet::Tensor2D)]) -> (Vec<(String, usize)>, usize, usize) {
    let mut per_tensor = Vec::new();
    let mut attention = 0;
    let mut prediction = 0;
    for (name, t) in tensors {
        match ParamGroup::of(name) {
            ParamGroup::Attention => attention += t.len(),
            ParamGroup::Prediction => prediction += t.len(),
        }
        per_tensor.push((name.clone(), t.len()));
    }
    (per_tensor, attention, prediction)
}

/// Parameter-count breakdown, from a checkpoint when given, otherwise
/// from a fresh initialization of the configuration.
pub fn cmd_inspect(rc: RunConfig) -> Result<(), CliError> {
    let (per_tensor, attention, prediction, source) = match &rc.checkpoint {
        Some(path) => {
            if !path.is_file() {
                return Err(CliError::usage(format!("checkpoint not found: {}", path.display())));
            }
            let raw = checkpoint::read_raw(path)?;
            let (p, a, pr) = count_raw(&raw);
            (p, a, pr, format!("checkpoint {}", path.display()))
        }
        None => {
            let params: ModelParams = model::init_params(&rc.model_config())?;
            let count = model::count_params(&params);
            (
                count.per_tensor,
                count.attention,
                count.prediction,
                format!(
                    "{} + {} configuration",
                    rc.streams.label(),
                    rc.attention.label()
                ),
            )
        }
    };
    let total = attention + prediction;

    println!("parameters of {source}");
    for (name, n) in &per_tensor {
        println!("  {name:<28} {n:>9}");
    }
    println!("  {:<28} {attention:>9}", "attention group");
    println!("  {:<28} {prediction:>9}", "prediction group");
    println!("  {:<28} {total:>9}", "total");
    println!(
        "reference claim: {:.2}M parameters; this model is {:.2}M ({:+.1}% of claim)",
        CLAIMED_PARAM_COUNT / 1e6,
        total as f64 / 1e6,
        (total as f64 / CLAIMED_PARAM_COUNT - 1.0) * 100.0
    );
    Ok(())
}

