use ids_polar::mi::{exact_mi_sandwich, ids_conditionals, monte_carlo_mi, mutual_information_bits};
use ids_polar::pad::MAX_EXACT_ELL_ZERO;
use ids_polar::{exact_pad_model, factored_pad_model};
use serde_json::json;

use super::arm_rng;
use crate::config::{ExperimentConfig, MiMode};
use crate::error::CliError;
use crate::record::{Check, Metric, Report};
use crate::row;

const COLUMNS: [&str; 10] = [
    "mode", "block_len", "quantity", "value", "ci_low", "ci_high", "trials", "seed", "ell_zero", "h",
];

/// `I(X; Y)` and `I(X; Y★)` with the two-sided sandwich check.
pub fn cmd_mi(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate_common()?;
    cfg.validate_mi()?;
    let spec = cfg.channel()?;
    let ctx = cfg.pad_context(&spec, &cfg.mi.context)?;
    let n0 = cfg.mi.block_len;
    let slack = 2.0 * (n0 as f64).log2();
    let mut report = Report::new("mi", COLUMNS.to_vec());
    let push = |report: &mut Report, mode: &str, m: Metric| {
        report
            .rows
            .push(row![mode, n0, m.name, m.value, m.ci_low, m.ci_high, m.trials, m.seed, ctx.ell_zero, ctx.h]);
        report.metrics.push(m);
    };

    match cfg.mi.mode {
        MiMode::Exact => {
            let pads = exact_pad_model(&spec, &ctx)?;
            let s = exact_mi_sandwich(&spec, &pads, n0)?;
            for (name, v) in [("i_xy", s.i_xy), ("i_xy_star", s.i_xy_star), ("lower_bound", s.lower_bound)] {
                push(&mut report, "exact", Metric::exact(name, v, cfg.seed));
            }
            report.checks.push(Check::new(
                "I(X;Y*) <= I(X;Y)",
                s.upper_holds,
                format!("{} <= {}", s.i_xy_star, s.i_xy),
            ));
            report.checks.push(Check::new(
                "I(X;Y) - 2 log2 N0 <= I(X;Y*)",
                s.lower_holds,
                format!("{} <= {}", s.lower_bound, s.i_xy_star),
            ));
            report.details = json!({ "sandwich": s, "context": ctx });
        }
        MiMode::MonteCarlo => {
            let pads = if ctx.ell_zero <= MAX_EXACT_ELL_ZERO {
                exact_pad_model(&spec, &ctx)?
            } else {
                factored_pad_model(&spec, &ctx, cfg.trials, &mut arm_rng(cfg.seed, 1, 0))
            };
            let mc = monte_carlo_mi(&spec, &pads, n0, cfg.trials, &mut arm_rng(cfg.seed, 0, 0))?;
            let metric = |name: &str, e: ids_polar::mi::MiEstimate| Metric {
                name: name.into(),
                value: e.mean,
                ci_low: e.mean - e.ci_half_width,
                ci_high: e.mean + e.ci_half_width,
                trials: e.trials,
                seed: cfg.seed,
            };
            push(&mut report, "monte-carlo", metric("i_xy", mc.i_xy));
            push(&mut report, "monte-carlo", metric("i_xy_star", mc.i_xy_star));
            push(&mut report, "monte-carlo", metric("gap", mc.gap));
            report.checks.push(Check::new(
                "I(X;Y*) <= I(X;Y) within CI",
                mc.gap.mean + mc.gap.ci_half_width >= 0.0,
                format!("gap {} +- {}", mc.gap.mean, mc.gap.ci_half_width),
            ));
            report.checks.push(Check::new(
                "I(X;Y) - 2 log2 N0 <= I(X;Y*) within CI",
                mc.gap.mean - mc.gap.ci_half_width <= slack,
                format!("gap {} +- {} vs {slack}", mc.gap.mean, mc.gap.ci_half_width),
            ));
            report.details = json!({ "estimates": mc, "context": ctx });
        }
    }
    if n0 <= ids_polar::mi::MAX_EXACT_MI_BLOCK {
        let noiseless = mutual_information_bits(&ids_conditionals(&ids_polar::Channel::noiseless(), n0));
        push(&mut report, "exact", Metric::exact("i_xy_noiseless", noiseless, cfg.seed));
    }
    Ok(report)
}
