use ids_polar::mi::exact_mi_sandwich;
use ids_polar::pad::PadModel;
use ids_polar::polar::{block_tables, sc_decode_tables};
use ids_polar::stats::mean_ci;
use ids_polar::{construct_code, exact_pad_model, polar_encode, run_coupled_trial, BitString, Channel, PadContext, PolarConfig};
use serde_json::json;

use super::{arm_rng, load_or_build_pad_model};
use crate::config::{ExperimentConfig, PadMode};
use crate::error::CliError;
use crate::record::{Check, Metric, Report};
use crate::row;

const COLUMNS: [&str; 24] = [
    "n",
    "n0",
    "xi",
    "h",
    "rate",
    "info_bits",
    "seed",
    "trials",
    "fer_genie",
    "fer_genie_ci_low",
    "fer_genie_ci_high",
    "ber_genie",
    "ber_genie_ci_half_width",
    "fer_aladdin",
    "fer_aladdin_ci_low",
    "fer_aladdin_ci_high",
    "ber_aladdin",
    "ber_aladdin_ci_half_width",
    "mismatch_rate",
    "mismatch_ci_high",
    "aladdin_errors_on_mismatch",
    "decoder_disagreements_on_match",
    "parse_failures",
    "genie_union_estimate",
];

/// Arm offset for the construction streams.
const CONSTRUCTION_ARM: u64 = 1 << 20;

fn code_rate(cfg: &ExperimentConfig, spec: &Channel, ctx: &PadContext) -> Result<(f64, Option<f64>), CliError> {
    if let Some(r) = cfg.code.target_rate {
        return Ok((r, None));
    }
    let b = cfg.e2e.mi_proxy_block_len;
    let s = exact_mi_sandwich(spec, &exact_pad_model(spec, ctx)?, b)?;
    let per_bit = s.i_xy_star / b as f64;
    Ok((cfg.e2e.mi_proxy_factor * per_bit, Some(per_bit)))
}

fn payload_errors(code: &PolarConfig, decoded: &BitString, payload: &BitString) -> usize {
    code.payload(decoded).hamming_distance(payload)
}

#[derive(Default)]
struct Point {
    frame_genie: u64,
    frame_aladdin: u64,
    ber_genie: Vec<f64>,
    ber_aladdin: Vec<f64>,
    fer_diff: Vec<f64>,
    mismatches: u64,
    aladdin_errors_on_mismatch: u64,
    disagreements_on_match: u64,
    parse_failures: u64,
}

/// Construction, transmission, both parsers and SC decoding, swept over `n`.
pub fn cmd_e2e(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate_common()?;
    cfg.validate_e2e()?;
    let spec = cfg.channel()?;
    let beta = spec.stats().beta;
    let n0 = cfg.code.n0;
    let ctx = PadContext::for_guard(&cfg.guard_with(n0, n0)?, beta);
    let (rate, mi_per_bit) = code_rate(cfg, &spec, &ctx)?;
    let pads: PadModel = match cfg.e2e.pad_mode {
        PadMode::Exact => exact_pad_model(&spec, &ctx)?,
        mode => load_or_build_pad_model(cfg, &spec, &ctx, mode, cfg.e2e.pad_trials)?.0,
    };

    let mut report = Report::new("e2e", COLUMNS.to_vec());
    let mut fers: Vec<(u32, Metric)> = Vec::new();
    let mut codes = Vec::new();
    for (arm, n) in cfg.n_sweep().into_iter().enumerate() {
        let guard = cfg.guard_with(n, n0)?;
        let mut crng = arm_rng(cfg.seed, CONSTRUCTION_ARM + arm as u64, 0);
        let (code, est) = construct_code(&spec, &guard, &pads, rate, cfg.e2e.construction_trials, &mut crng)?;
        let info = code.information_set();
        let union: f64 = info.iter().map(|&i| est.soft_error[i]).sum();
        let k = info.len();

        let mut p = Point::default();
        for t in 0..cfg.trials {
            let mut rng = arm_rng(cfg.seed, arm as u64, t);
            let payload = BitString::random(k, &mut rng);
            let x = polar_encode(&code.assemble(&payload))?;
            let r = run_coupled_trial(&spec, &x, &guard, &mut rng)?;
            let genie = sc_decode_tables(&block_tables(&spec, &pads, &r.genie_y_stars(), code.block_len())?, &code).decisions;
            let eg = payload_errors(&code, &genie, &payload);
            // a failed parse yields the all-zero payload guess
            let ea = if r.parse.failed {
                p.parse_failures += 1;
                payload.count_ones()
            } else {
                let al = sc_decode_tables(&block_tables(&spec, &pads, &r.parse.blocks, code.block_len())?, &code).decisions;
                if r.matched && al != genie {
                    p.disagreements_on_match += 1;
                }
                payload_errors(&code, &al, &payload)
            };
            let kf = k.max(1) as f64;
            p.frame_genie += (eg > 0) as u64;
            p.frame_aladdin += (ea > 0) as u64;
            p.ber_genie.push(eg as f64 / kf);
            p.ber_aladdin.push(ea as f64 / kf);
            p.fer_diff.push((ea > 0) as u8 as f64 - (eg > 0) as u8 as f64);
            if !r.matched {
                p.mismatches += 1;
                p.aladdin_errors_on_mismatch += (ea > 0) as u64;
            }
        }

        let fg = Metric::proportion(format!("fer_genie[n={n}]"), p.frame_genie, cfg.trials, cfg.seed);
        let fa = Metric::proportion(format!("fer_aladdin[n={n}]"), p.frame_aladdin, cfg.trials, cfg.seed);
        let bg = Metric::mean(format!("ber_genie[n={n}]"), &p.ber_genie, cfg.seed);
        let ba = Metric::mean(format!("ber_aladdin[n={n}]"), &p.ber_aladdin, cfg.seed);
        let mm = Metric::proportion(format!("mismatch_rate[n={n}]"), p.mismatches, cfg.trials, cfg.seed);
        let attributable = Metric::proportion(
            format!("aladdin_error_fraction_on_mismatch[n={n}]"),
            p.aladdin_errors_on_mismatch,
            p.frame_aladdin,
            cfg.seed,
        );
        let (diff, diff_hw) = mean_ci(&p.fer_diff);
        report.rows.push(row![
            n,
            n0,
            cfg.code.xi,
            ctx.h,
            code.rate(),
            k,
            cfg.seed,
            cfg.trials,
            fg.value,
            fg.ci_low,
            fg.ci_high,
            bg.value,
            bg.half_width(),
            fa.value,
            fa.ci_low,
            fa.ci_high,
            ba.value,
            ba.half_width(),
            mm.value,
            mm.ci_high,
            p.aladdin_errors_on_mismatch,
            p.disagreements_on_match,
            p.parse_failures,
            union
        ]);
        report.checks.push(Check::new(
            format!("n={n}: |FER(aladdin) - FER(genie)| <= mismatch rate + CI"),
            diff.abs() <= mm.value + diff_hw,
            format!("|{diff}| vs {} + {diff_hw}", mm.value),
        ));
        report.checks.push(Check::new(
            format!("n={n}: decoders agree whenever the parses match"),
            p.disagreements_on_match == 0,
            format!("{} disagreements", p.disagreements_on_match),
        ));
        report.metrics.extend([fg.clone(), bg, fa, ba, mm, attributable]);
        fers.push((n, fg));
        codes.push(json!({ "n": n, "code": code }));
    }

    fers.sort_by_key(|(n, _)| *n);
    if fers.len() > 1 {
        let summary = fers.iter().map(|(n, m)| format!("{n}:{}", m.value)).collect::<Vec<_>>().join(" ");
        let consistent = fers.windows(2).all(|w| w[1].1.ci_low <= w[0].1.ci_high);
        report.checks.push(Check::new(
            "genie FER nonincreasing in n within 95% CIs",
            consistent,
            summary.clone(),
        ));
        let (first, last) = (&fers[0].1, &fers[fers.len() - 1].1);
        let strictly = fers.windows(2).all(|w| w[1].1.value < w[0].1.value) && last.ci_high < first.ci_low;
        report.checks.push(Check::new(
            "genie FER decreasing in n with separated 95% CIs",
            strictly,
            summary,
        ));
    }
    report.details = json!({
        "rate": rate,
        "mi_proxy_per_bit": mi_per_bit,
        "context": ctx,
        "pad_cache_key": pads.key.cache_key(),
        "codes": codes,
    });
    Ok(report)
}
