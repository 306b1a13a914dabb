use ids_polar::channel::sample_truncated_output;
use ids_polar::{channel_stats, lemma1_constants, window_majority_test};
use serde_json::json;

use super::arm_rng;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::record::{Check, Metric, Report};
use crate::row;

fn window_grid(cfg: &ExperimentConfig, h0: f64) -> Result<Vec<usize>, CliError> {
    let mut grid: Vec<usize> = cfg
        .lemma1
        .h0_multiples
        .iter()
        .map(|m| (m * h0 - 1e-9).ceil().max(1.0) as usize)
        .chain(cfg.lemma1.h_values.iter().copied())
        .collect();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(CliError::Config("lemma1 needs at least one window length".into()));
    }
    if let Some(&h) = grid.iter().find(|&&h| (h as f64) < h0) {
        if !cfg.lemma1.allow_below_h0 {
            return Err(CliError::Config(format!(
                "window length {h} is below h0 = {h0:.3}, where the bound is not claimed; \
                 raise it or set lemma1.allow_below_h0 = true"
            )));
        }
    }
    Ok(grid)
}

/// Empirical window misclassification against `e^{-h c0}`.
pub fn cmd_lemma1(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate_common()?;
    let spec = cfg.channel()?;
    let consts = lemma1_constants(&channel_stats(&spec)?);
    let grid = window_grid(cfg, consts.h0)?;

    let mut report = Report::new(
        "lemma1",
        vec![
            "h", "x", "variant", "trials", "seed", "errors", "rate", "ci_low", "ci_high", "bound", "bound_claimed",
            "pass",
        ],
    );
    let mut arm = 0u64;
    for &h in &grid {
        let bound = (-(h as f64) * consts.c0).exp();
        let claimed = h as f64 >= consts.h0;
        for x in [0u8, 1] {
            for (variant, drop_first) in [("full", false), ("first_removed", true)] {
                let errors = (0..cfg.trials)
                    .filter(|&t| {
                        let mut rng = arm_rng(cfg.seed, arm, t);
                        let w = sample_truncated_output(&spec, x, h, drop_first, &mut rng);
                        window_majority_test(w.as_slice()) != x
                    })
                    .count() as u64;
                arm += 1;
                let m = Metric::proportion(format!("misclassification[h={h},x={x},{variant}]"), errors, cfg.trials, cfg.seed);
                let pass = m.value <= bound;
                report.rows.push(row![
                    h, x, variant, cfg.trials, cfg.seed, errors, m.value, m.ci_low, m.ci_high, bound, claimed, pass
                ]);
                if claimed {
                    report.checks.push(Check::new(
                        format!("h={h} x={x} {variant}: empirical <= bound"),
                        pass,
                        format!("{} <= {bound:e}", m.value),
                    ));
                }
                report.metrics.push(m);
            }
        }
    }
    report.metrics.push(Metric::exact("h0", consts.h0, cfg.seed));
    report.metrics.push(Metric::exact("c0", consts.c0, cfg.seed));
    report.details = json!({ "constants": consts, "grid": grid });
    Ok(report)
}
