use std::fs;
use std::path::PathBuf;

use ids_polar::pad::{PadKey, PadModel};
use ids_polar::{estimate_pad_model, exact_pad_model, factored_pad_model, Channel, PadContext};
use serde_json::json;

use super::arm_rng;
use crate::config::{ExperimentConfig, PadMode};
use crate::error::CliError;
use crate::record::{Metric, Report};
use crate::row;

fn mode_name(mode: PadMode) -> &'static str {
    match mode {
        PadMode::Exact => "exact",
        PadMode::Empirical => "empirical",
        PadMode::Factored => "factored",
    }
}

fn build(spec: &Channel, ctx: &PadContext, mode: PadMode, trials: u64, seed: u64) -> Result<PadModel, CliError> {
    Ok(match mode {
        PadMode::Exact => exact_pad_model(spec, ctx)?,
        PadMode::Empirical => estimate_pad_model(spec, ctx, trials, &mut arm_rng(seed, 0, 0)),
        PadMode::Factored => factored_pad_model(spec, ctx, trials, &mut arm_rng(seed, 0, 0)),
    })
}

/// Cache file for a model built with the given inputs.
pub fn pad_model_path(cfg: &ExperimentConfig, key: &PadKey, mode: PadMode, trials: u64) -> PathBuf {
    let suffix = match mode {
        PadMode::Exact => String::new(),
        _ => format!("-t{trials}-s{}", cfg.seed),
    };
    cfg.out
        .join("pad-models")
        .join(format!("{}-{}{suffix}.json", key.cache_key(), mode_name(mode)))
}

/// Loads a cached pad model or builds and caches it.
pub fn load_or_build_pad_model(
    cfg: &ExperimentConfig,
    spec: &Channel,
    ctx: &PadContext,
    mode: PadMode,
    trials: u64,
) -> Result<(PadModel, PathBuf), CliError> {
    let key = PadKey {
        channel: *spec,
        context: *ctx,
    };
    let path = pad_model_path(cfg, &key, mode, trials);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(model) = serde_json::from_str::<PadModel>(&text) {
            if model.validate(&key).is_ok() {
                return Ok((model, path));
            }
        }
    }
    let model = build(spec, ctx, mode, trials, cfg.seed)?;
    let dir = path.parent().expect("cache path has a parent");
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let mut bytes = serde_json::to_vec(&model)?;
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|e| CliError::Io(path.clone(), e))?;
    Ok((model, path))
}

/// Builds (or loads) a pad model and reports its length laws.
pub fn cmd_pad_model(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate_common()?;
    let spec = cfg.channel()?;
    let ctx = cfg.pad_context(&spec, &cfg.pad_model.context)?;
    let mode = cfg.pad_model.mode;
    let (model, path) = load_or_build_pad_model(cfg, &spec, &ctx, mode, cfg.trials)?;
    let trials = if mode == PadMode::Exact { 0 } else { cfg.trials };

    let mut report = Report::new("pad-model", vec!["side", "length", "probability", "mode", "trials", "seed"]);
    for (side, pmf) in [("left", model.left_len_pmf()), ("right", model.right_len_pmf())] {
        let mut mean = 0.0;
        for (len, p) in pmf.iter().enumerate() {
            report.rows.push(row![side, len, p, mode_name(mode), trials, cfg.seed]);
            mean += len as f64 * p;
        }
        report.metrics.push(Metric::exact(format!("mean_{side}_pad_len"), mean, cfg.seed));
    }
    let file = path.strip_prefix(&cfg.out).unwrap_or(&path).to_string_lossy().into_owned();
    report.details = json!({ "cache_key": model.key.cache_key(), "model_file": file, "context": ctx });
    Ok(report)
}
