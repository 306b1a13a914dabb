use ids_polar::stats::chi_square_uniform;
use ids_polar::{run_coupled_trial, BitString, PadContext};
use serde::Serialize;
use serde_json::json;

use super::arm_rng;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::record::{Check, Metric, Report};
use crate::row;

/// Significance level of the dither uniformity test.
pub const DITHER_ALPHA: f64 = 1e-4;

const COLUMNS: [&str; 21] = [
    "n",
    "n0",
    "xi",
    "h",
    "seed",
    "trials",
    "matched",
    "match_rate",
    "match_ci_low",
    "match_ci_high",
    "flags_1a",
    "flags_4a",
    "flags_7a",
    "flags_minority",
    "coupling_breaks",
    "parse_failures",
    "flagged_trials",
    "unflagged_mismatches",
    "dither_samples",
    "dither_chi2",
    "dither_p_value",
];

/// Trial counts of one sweep point. Every field except the histogram
/// counts trials, not events.
#[derive(Debug, Clone, Default, Serialize)]
struct Tally {
    matched: u64,
    short_ones: u64,
    first_fell_off: u64,
    second_fell_off: u64,
    minority: u64,
    coupling_breaks: u64,
    parse_failures: u64,
    flagged: u64,
    unflagged_mismatches: u64,
    dither_counts: Vec<u64>,
}

/// Genie and receiver parses under shared randomness, swept over `n0`.
pub fn cmd_parse_agreement(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate_common()?;
    let spec = cfg.channel()?;
    let beta = spec.stats().beta;
    let n = cfg.code.n;
    let mut report = Report::new("parse-agreement", COLUMNS.to_vec());
    let mut points = Vec::new();
    let mut rates: Vec<(u32, Metric)> = Vec::new();

    for (arm, n0) in cfg.n0_sweep().into_iter().enumerate() {
        let guard = cfg.guard_with(n, n0)?;
        let h = PadContext::for_guard(&guard, beta).h;
        let mut t = Tally {
            dither_counts: vec![0; h],
            ..Tally::default()
        };
        for trial in 0..cfg.trials {
            let mut rng = arm_rng(cfg.seed, arm as u64, trial);
            let x = BitString::random(1 << n, &mut rng);
            let r = run_coupled_trial(&spec, &x, &guard, &mut rng)?;
            let b = &r.bad_events;
            t.matched += r.matched as u64;
            t.short_ones += (b.short_ones > 0) as u64;
            t.first_fell_off += (b.first_window_fell_off > 0) as u64;
            t.second_fell_off += (b.second_window_fell_off > 0) as u64;
            t.minority += (b.second_window_minority > 0) as u64;
            t.coupling_breaks += (b.coupling_breaks > 0) as u64;
            t.parse_failures += r.parse.failed as u64;
            t.flagged += r.flagged() as u64;
            t.unflagged_mismatches += (!r.matched && !r.flagged()) as u64;
            for s in r.sites.iter().filter(|s| s.reached) {
                t.dither_counts[s.genie_rho - 1] += 1;
            }
        }
        let chi = chi_square_uniform(&t.dither_counts);
        let rate = Metric::proportion(format!("match_rate[n0={n0}]"), t.matched, cfg.trials, cfg.seed);
        report.rows.push(row![
            n,
            n0,
            cfg.code.xi,
            h,
            cfg.seed,
            cfg.trials,
            t.matched,
            rate.value,
            rate.ci_low,
            rate.ci_high,
            t.short_ones,
            t.first_fell_off,
            t.second_fell_off,
            t.minority,
            t.coupling_breaks,
            t.parse_failures,
            t.flagged,
            t.unflagged_mismatches,
            t.dither_counts.iter().sum::<u64>(),
            chi.statistic,
            chi.p_value
        ]);
        report.checks.push(Check::new(
            format!("n0={n0}: every mismatch is flagged"),
            t.unflagged_mismatches == 0,
            format!("{} unflagged mismatches in {} trials", t.unflagged_mismatches, cfg.trials),
        ));
        report.checks.push(Check::new(
            format!("n0={n0}: genie dithers uniform"),
            chi.p_value >= DITHER_ALPHA,
            format!("chi2 = {} on {} dof, p = {}", chi.statistic, chi.dof, chi.p_value),
        ));
        for (name, k) in [
            ("flag_rate_1a", t.short_ones),
            ("flag_rate_4a", t.first_fell_off),
            ("flag_rate_7a", t.second_fell_off),
            ("flag_rate_minority", t.minority),
            ("coupling_break_rate", t.coupling_breaks),
            ("parse_failure_rate", t.parse_failures),
        ] {
            report
                .metrics
                .push(Metric::proportion(format!("{name}[n0={n0}]"), k, cfg.trials, cfg.seed));
        }
        report.metrics.push(rate.clone());
        rates.push((n0, rate));
        points.push(json!({ "n0": n0, "h": h, "tally": t, "chi_square": chi }));
    }

    rates.sort_by_key(|(n0, _)| *n0);
    let regressions: Vec<String> = rates
        .windows(2)
        .filter(|w| w[1].1.ci_high < w[0].1.ci_low)
        .map(|w| format!("n0 {} -> {}", w[0].0, w[1].0))
        .collect();
    if rates.len() > 1 {
        report.checks.push(Check::new(
            "match rate nondecreasing in n0 within 95% CIs",
            regressions.is_empty(),
            if regressions.is_empty() {
                rates.iter().map(|(n0, m)| format!("{n0}:{}", m.value)).collect::<Vec<_>>().join(" ")
            } else {
                format!("significant drop at {}", regressions.join(", "))
            },
        ));
    }
    report.details = json!({ "n": n, "points": points });
    Ok(report)
}
