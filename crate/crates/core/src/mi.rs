//! Mutual information of one block over the IDS and DZP channels.
//!
//! With `X` uniform on `{0,1}^N0`, padding is a post-processing of `Y`
//! with independent pads, so `I(X; Y★) <= I(X; Y)`; and because the pads
//! are shorter than `N0`, the split of `Y★` costs at most `2 log2 N0` bits,
//! giving `I(X; Y) - 2 log2 N0 <= I(X; Y★)`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::channel::{output_distribution, ChannelSpec};
use crate::genie::sample_dzp;
use crate::pad::PadModel;
use crate::stats::mean_ci;
use crate::trellis::{block_likelihood_table, NoPads, PadLaw, TrellisError};

/// Largest block for exhaustive mutual information.
pub const MAX_EXACT_MI_BLOCK: usize = 4;

/// Slack allowed when checking the sandwich in floating point.
pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MiError {
    #[error("exact mutual information unavailable: {0}")]
    ExactModeUnavailable(String),
    #[error(transparent)]
    Trellis(#[from] TrellisError),
}

pub type Conditional = BTreeMap<BitString, f64>;

/// `P(Y | X = x)` for every `x`, in candidate-index order.
pub fn ids_conditionals(spec: &ChannelSpec, block_len: usize) -> Vec<Conditional> {
    (0..1usize << block_len)
        .map(|v| output_distribution(spec, BitString::from_index(v, block_len).as_slice()))
        .collect()
}

/// `P(Y★ | X = x)` for every `x`, from a tabulated pad model.
pub fn dzp_conditionals(spec: &ChannelSpec, pads: &PadModel, block_len: usize) -> Result<Vec<Conditional>, MiError> {
    let (left, right) = match (pads.left_pmf(), pads.right_pmf()) {
        (Some(l), Some(r)) => (l, r),
        _ => {
            return Err(MiError::ExactModeUnavailable(
                "the pad model has no full pad tables".into(),
            ))
        }
    };
    Ok(ids_conditionals(spec, block_len)
        .into_iter()
        .map(|cond| {
            let mut out: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
            for (l, pl) in left {
                for (y, py) in &cond {
                    for (r, pr) in right {
                        let mut key = Vec::with_capacity(l.len() + y.len() + r.len());
                        key.extend_from_slice(l.as_slice());
                        key.extend_from_slice(y.as_slice());
                        key.extend_from_slice(r.as_slice());
                        *out.entry(key).or_insert(0.0) += pl * py * pr;
                    }
                }
            }
            out.into_iter().map(|(k, v)| (BitString::from_bits(k), v)).collect()
        })
        .collect())
}

/// `I(X; Y)` in bits for uniform `X` given the rows `P(Y | X = x)`.
pub fn mutual_information_bits(conditionals: &[Conditional]) -> f64 {
    let nx = conditionals.len() as f64;
    let mut marginal: BTreeMap<&BitString, f64> = BTreeMap::new();
    for cond in conditionals {
        for (y, p) in cond {
            *marginal.entry(y).or_insert(0.0) += p / nx;
        }
    }
    let mut mi = 0.0;
    for cond in conditionals {
        for (y, &p) in cond {
            if p > 0.0 {
                mi += p / nx * (p / marginal[y]).log2();
            }
        }
    }
    mi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiSandwich {
    pub block_len: usize,
    pub i_xy: f64,
    pub i_xy_star: f64,
    /// `I(X; Y) - 2 log2 N0`.
    pub lower_bound: f64,
    pub max_left_pad: usize,
    pub max_right_pad: usize,
    pub upper_holds: bool,
    pub lower_holds: bool,
}

impl MiSandwich {
    pub fn holds(&self) -> bool {
        self.upper_holds && self.lower_holds
    }
}

/// Exhaustive evaluation of both sides of the sandwich.
pub fn exact_mi_sandwich(spec: &ChannelSpec, pads: &PadModel, block_len: usize) -> Result<MiSandwich, MiError> {
    if block_len == 0 || block_len > MAX_EXACT_MI_BLOCK {
        return Err(MiError::ExactModeUnavailable(format!(
            "block length {block_len} outside 1..={MAX_EXACT_MI_BLOCK}"
        )));
    }
    let i_xy = mutual_information_bits(&ids_conditionals(spec, block_len));
    let i_xy_star = mutual_information_bits(&dzp_conditionals(spec, pads, block_len)?);
    let lower_bound = i_xy - 2.0 * (block_len as f64).log2();
    Ok(MiSandwich {
        block_len,
        i_xy,
        i_xy_star,
        lower_bound,
        max_left_pad: pads.max_left_len(),
        max_right_pad: pads.max_right_len(),
        upper_holds: i_xy_star <= i_xy + SANDWICH_SLACK,
        lower_holds: lower_bound <= i_xy_star + SANDWICH_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiEstimate {
    pub trials: u64,
    pub mean: f64,
    pub ci_half_width: f64,
}

impl MiEstimate {
    fn from_samples(samples: &[f64]) -> Self {
        let (mean, ci_half_width) = mean_ci(samples);
        Self {
            trials: samples.len() as u64,
            mean,
            ci_half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloMi {
    pub i_xy: MiEstimate,
    pub i_xy_star: MiEstimate,
    /// Paired estimate of `I(X; Y) - I(X; Y★)`.
    pub gap: MiEstimate,
}

fn pointwise_bits<P: PadLaw + ?Sized>(
    spec: &ChannelSpec,
    pads: &P,
    x: &BitString,
    y: &BitString,
) -> Result<f64, TrellisError> {
    let table = block_likelihood_table(spec, pads, y, x.len())?;
    let ln2 = std::f64::consts::LN_2;
    let marginal = table.log_total() - (x.len() as f64) * ln2;
    Ok((table.get(x) - marginal) / ln2)
}

/// Plug-in estimates of `I(X; Y)` and `I(X; Y★)` from `trials` paired
/// samples drawn with the pad model's own guard context.
pub fn monte_carlo_mi<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    pads: &PadModel,
    block_len: usize,
    trials: u64,
    rng: &mut R,
) -> Result<MonteCarloMi, MiError> {
    let ctx = pads.key.context;
    let mut a = Vec::with_capacity(trials as usize);
    let mut b = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let x = BitString::random(block_len, rng);
        let sample = sample_dzp(spec, &x, &ctx, rng);
        a.push(pointwise_bits(spec, &NoPads, &x, &sample.output.y_middle)?);
        b.push(pointwise_bits(spec, pads, &x, &sample.output.y_star())?);
    }
    let gap: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
    Ok(MonteCarloMi {
        i_xy: MiEstimate::from_samples(&a),
        i_xy_star: MiEstimate::from_samples(&b),
        gap: MiEstimate::from_samples(&gap),
    })
}
