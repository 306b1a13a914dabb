use ids_polar::{channel_stats, lemma1_constants, ChannelSpec, ExactChannel, Rational};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::record::{Metric, Report};
use crate::row;

/// Exact view of a decimal probability, when its denominator stays small.
fn small_rational(p: f64) -> Option<Rational> {
    let r = Rational::approximate_float(p)?;
    (*r.denom() <= 10_000).then_some(r)
}

fn exact_stats(cfg: &ExperimentConfig) -> Option<ids_polar::ExactStats> {
    let (pi, pd, ps) = cfg.channel_probabilities();
    let spec: ExactChannel = ChannelSpec::new(small_rational(pi)?, small_rational(pd)?, small_rational(ps)?).ok()?;
    channel_stats(&spec).ok()
}

/// Channel statistics and the window-test constants.
pub fn cmd_stats(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let spec = cfg.channel()?;
    let s = channel_stats(&spec)?;
    let c = lemma1_constants(&s);
    let exact = exact_stats(cfg);
    let exact_of = |f: fn(&ids_polar::ExactStats) -> Rational| exact.as_ref().map(|e| f(e).to_string()).unwrap_or_default();

    let mut report = Report::new("stats", vec!["quantity", "value", "exact"]);
    let entries: [(&str, f64, String); 12] = [
        ("alpha_0_given_0", s.alpha_0_given_0, exact_of(|e| e.alpha_0_given_0)),
        ("alpha_1_given_0", s.alpha_1_given_0, exact_of(|e| e.alpha_1_given_0)),
        ("alpha_0_given_1", s.alpha_0_given_1, exact_of(|e| e.alpha_0_given_1)),
        ("alpha_1_given_1", s.alpha_1_given_1, exact_of(|e| e.alpha_1_given_1)),
        ("beta", s.beta, exact_of(|e| e.beta)),
        ("gamma", s.gamma, exact_of(|e| e.gamma)),
        ("delta", c.delta, String::new()),
        ("h0_prime", c.h0_prime, String::new()),
        ("c0_prime", c.c0_prime, String::new()),
        ("c0_double_prime", c.c0_double_prime, String::new()),
        ("c0", c.c0, String::new()),
        ("h0", c.h0, String::new()),
    ];
    for (name, value, ex) in entries {
        report.rows.push(row![name, value, ex]);
        report.metrics.push(Metric::exact(name, value, cfg.seed));
    }
    report.details = json!({ "stats": s, "constants": c });
    Ok(report)
}
