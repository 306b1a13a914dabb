//! Laws of the genie's left and right pads.
//!
//! Three constructions are offered:
//!
//! * `Exact`: exhaustive enumeration of the padding procedure over every
//!   channel outcome of the guard context. Feasible for `ℓ(n0) <= 6`.
//! * `Empirical`: relative frequencies of sampled pads.
//! * `Factored`: a sampled length law times the exact law of the content of
//!   a suffix (left) or prefix (right) of the channel output of a long run
//!   of zeros.
//!
//! Models are keyed by channel and guard context and carry a format
//! version so cached copies can be validated.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::channel::{output_distribution, ChannelSpec};
use crate::genie::{dithered_scan, sample_pad_left, sample_pad_right, PadContext};
use crate::trellis::PadLaw;

pub const PAD_MODEL_VERSION: u32 = 1;
pub const MAX_EXACT_ELL_ZERO: usize = 6;

pub type Pmf = BTreeMap<BitString, f64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadError {
    #[error("exact pad law needs ell(n0) <= {MAX_EXACT_ELL_ZERO}, got {0}")]
    ExactTooLarge(usize),
    #[error("pad model version {found} does not match {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("pad model was built for a different channel or guard context")]
    KeyMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadKey {
    pub channel: ChannelSpec,
    pub context: PadContext,
}

impl PadKey {
    /// Stable string identifying the model's inputs.
    pub fn cache_key(&self) -> String {
        let c = &self.channel;
        let ctx = &self.context;
        format!(
            "v{PAD_MODEL_VERSION}-pi{:?}-pd{:?}-ps{:?}-l0{}-lm{}-h{}",
            c.p_insert(),
            c.p_delete(),
            c.p_substitute(),
            ctx.ell_zero,
            ctx.ell_mid,
            ctx.h
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PadLawData {
    Exact { left: Pmf, right: Pmf },
    Empirical { trials: u64, left: Pmf, right: Pmf },
    Factored { trials: u64, left_len: Vec<f64>, right_len: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadModel {
    pub version: u32,
    pub key: PadKey,
    pub law: PadLawData,
}

impl PadModel {
    pub fn validate(&self, key: &PadKey) -> Result<(), PadError> {
        if self.version != PAD_MODEL_VERSION {
            return Err(PadError::VersionMismatch {
                found: self.version,
                expected: PAD_MODEL_VERSION,
            });
        }
        if self.key != *key {
            return Err(PadError::KeyMismatch);
        }
        Ok(())
    }

    /// Full table of the left pad law, when the model stores one.
    pub fn left_pmf(&self) -> Option<&Pmf> {
        match &self.law {
            PadLawData::Exact { left, .. } | PadLawData::Empirical { left, .. } => Some(left),
            PadLawData::Factored { .. } => None,
        }
    }

    pub fn right_pmf(&self) -> Option<&Pmf> {
        match &self.law {
            PadLawData::Exact { right, .. } | PadLawData::Empirical { right, .. } => Some(right),
            PadLawData::Factored { .. } => None,
        }
    }

    /// Law of the left pad length.
    pub fn left_len_pmf(&self) -> Vec<f64> {
        match &self.law {
            PadLawData::Factored { left_len, .. } => left_len.clone(),
            _ => len_pmf(self.left_pmf().unwrap()),
        }
    }

    pub fn right_len_pmf(&self) -> Vec<f64> {
        match &self.law {
            PadLawData::Factored { right_len, .. } => right_len.clone(),
            _ => len_pmf(self.right_pmf().unwrap()),
        }
    }
}

fn len_pmf(pmf: &Pmf) -> Vec<f64> {
    let max = pmf.keys().map(BitString::len).max().unwrap_or(0);
    let mut out = vec![0.0; max + 1];
    for (k, p) in pmf {
        out[k.len()] += p;
    }
    out
}

impl PadLaw for PadModel {
    fn left_prob(&self, pad: &[u8]) -> f64 {
        match &self.law {
            PadLawData::Exact { left, .. } | PadLawData::Empirical { left, .. } => left.get(pad).copied().unwrap_or(0.0),
            PadLawData::Factored { left_len, .. } => {
                let lp = left_len.get(pad.len()).copied().unwrap_or(0.0);
                if lp == 0.0 {
                    0.0
                } else {
                    lp * suffix_content_prob(&self.key.channel, pad)
                }
            }
        }
    }

    fn right_prob(&self, pad: &[u8]) -> f64 {
        match &self.law {
            PadLawData::Exact { right, .. } | PadLawData::Empirical { right, .. } => {
                right.get(pad).copied().unwrap_or(0.0)
            }
            PadLawData::Factored { right_len, .. } => {
                let lp = right_len.get(pad.len()).copied().unwrap_or(0.0);
                if lp == 0.0 {
                    0.0
                } else {
                    lp * prefix_content_prob(&self.key.channel, pad)
                }
            }
        }
    }

    fn max_left_len(&self) -> usize {
        match &self.law {
            PadLawData::Factored { left_len, .. } => left_len.len().saturating_sub(1),
            _ => self.left_pmf().unwrap().keys().map(BitString::len).max().unwrap_or(0),
        }
    }

    fn max_right_len(&self) -> usize {
        match &self.law {
            PadLawData::Factored { right_len, .. } => right_len.len().saturating_sub(1),
            _ => self.right_pmf().unwrap().keys().map(BitString::len).max().unwrap_or(0),
        }
    }
}

type Outcomes = Vec<(Vec<u8>, f64)>;

fn outcomes(spec: &ChannelSpec, x: u8, reversed: bool) -> Outcomes {
    spec.symbol_output_pmf(x)
        .entries
        .into_iter()
        .map(|(s, p)| {
            let mut v = s.into_vec();
            if reversed {
                v.reverse();
            }
            (v, p)
        })
        .collect()
}

fn accumulate(map: &mut BTreeMap<Vec<u8>, f64>, key: Vec<u8>, p: f64) {
    *map.entry(key).or_insert(0.0) += p;
}

/// Law of the last `h - 1` symbols of the (extended) ones run: `count`
/// outcomes of `mid` are prepended, then non-empty outcomes of `ext` until
/// the run holds at least `h` symbols.
fn tail_distribution(mid: &Outcomes, count: usize, ext: &Outcomes, h: usize) -> BTreeMap<Vec<u8>, f64> {
    let keep = h - 1;
    let mut saturated: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let mut open: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    open.insert(Vec::new(), 1.0);
    let step = |open: &BTreeMap<Vec<u8>, f64>, draws: &Outcomes, saturated: &mut BTreeMap<Vec<u8>, f64>| {
        let mut next = BTreeMap::new();
        for (s, p) in open {
            for (o, q) in draws {
                let mut v = o.clone();
                v.extend_from_slice(s);
                if v.len() >= h {
                    let tail = v[v.len() - keep..].to_vec();
                    accumulate(saturated, tail, p * q);
                } else {
                    accumulate(&mut next, v, p * q);
                }
            }
        }
        next
    };
    for _ in 0..count {
        if open.is_empty() {
            break;
        }
        open = step(&open, mid, &mut saturated);
    }
    let nonempty: Outcomes = {
        let total: f64 = ext.iter().filter(|(o, _)| !o.is_empty()).map(|(_, q)| q).sum();
        ext.iter()
            .filter(|(o, _)| !o.is_empty())
            .map(|(o, q)| (o.clone(), q / total))
            .collect()
    };
    while !open.is_empty() {
        open = step(&open, &nonempty, &mut saturated);
    }
    saturated
}

fn exact_side(spec: &ChannelSpec, ctx: &PadContext, mirrored: bool) -> Pmf {
    let h = ctx.h;
    let mid = outcomes(spec, 1, mirrored);
    let ext = outcomes(spec, 1, false);
    let tails = tail_distribution(&mid, ctx.ell_mid, &ext, h);
    let dirty = output_distribution(spec, &vec![0; ctx.ell_zero]);
    let mut pmf: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let w = 1.0 / h as f64;
    for (tail, pt) in &tails {
        for (d, pd) in &dirty {
            let mut z = tail.clone();
            if mirrored {
                z.extend(d.as_slice().iter().rev());
            } else {
                z.extend_from_slice(d.as_slice());
            }
            for rho in 1..=h {
                let scan = dithered_scan(&z, tail.len(), h, rho);
                let mut pad = scan.cut.map(|e| z[e..].to_vec()).unwrap_or_default();
                if mirrored {
                    pad.reverse();
                }
                accumulate(&mut pmf, pad, pt * pd * w);
            }
        }
    }
    pmf.into_iter().map(|(k, v)| (BitString::from_bits(k), v)).collect()
}

/// Exact pad laws by enumeration.
pub fn exact_pad_model(spec: &ChannelSpec, ctx: &PadContext) -> Result<PadModel, PadError> {
    if ctx.ell_zero > MAX_EXACT_ELL_ZERO {
        return Err(PadError::ExactTooLarge(ctx.ell_zero));
    }
    Ok(PadModel {
        version: PAD_MODEL_VERSION,
        key: PadKey {
            channel: *spec,
            context: *ctx,
        },
        law: PadLawData::Exact {
            left: exact_side(spec, ctx, false),
            right: exact_side(spec, ctx, true),
        },
    })
}

fn normalize(counts: BTreeMap<BitString, u64>, trials: u64) -> Pmf {
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / trials as f64))
        .collect()
}

/// Relative frequencies of `trials` sampled left and right pads.
pub fn estimate_pad_model<R: Rng + ?Sized>(spec: &ChannelSpec, ctx: &PadContext, trials: u64, rng: &mut R) -> PadModel {
    assert!(trials > 0);
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    for _ in 0..trials {
        *left.entry(sample_pad_left(spec, ctx, rng).pad).or_insert(0) += 1;
        *right.entry(sample_pad_right(spec, ctx, rng).pad).or_insert(0) += 1;
    }
    PadModel {
        version: PAD_MODEL_VERSION,
        key: PadKey {
            channel: *spec,
            context: *ctx,
        },
        law: PadLawData::Empirical {
            trials,
            left: normalize(left, trials),
            right: normalize(right, trials),
        },
    }
}

/// Sampled length laws combined with exact content laws.
pub fn factored_pad_model<R: Rng + ?Sized>(spec: &ChannelSpec, ctx: &PadContext, trials: u64, rng: &mut R) -> PadModel {
    assert!(trials > 0);
    let mut left_len = Vec::new();
    let mut right_len = Vec::new();
    let bump = |v: &mut Vec<f64>, len: usize| {
        if v.len() <= len {
            v.resize(len + 1, 0.0);
        }
        v[len] += 1.0 / trials as f64;
    };
    for _ in 0..trials {
        bump(&mut left_len, sample_pad_left(spec, ctx, rng).pad.len());
        bump(&mut right_len, sample_pad_right(spec, ctx, rng).pad.len());
    }
    PadModel {
        version: PAD_MODEL_VERSION,
        key: PadKey {
            channel: *spec,
            context: *ctx,
        },
        law: PadLawData::Factored {
            trials,
            left_len,
            right_len,
        },
    }
}

fn nonempty_zero_outcomes(spec: &ChannelSpec) -> Outcomes {
    let all = outcomes(spec, 0, false);
    let total: f64 = all.iter().filter(|(o, _)| !o.is_empty()).map(|(_, q)| q).sum();
    all.into_iter()
        .filter(|(o, _)| !o.is_empty())
        .map(|(o, q)| (o, q / total))
        .collect()
}

/// Probability that the last `|a|` symbols of the output of an unbounded
/// run of zeros equal `a`.
pub fn suffix_content_prob(spec: &ChannelSpec, a: &[u8]) -> f64 {
    let outs = nonempty_zero_outcomes(spec);
    let len = a.len();
    // f[t]: the last t symbols are produced, match, and end on an outcome boundary
    let mut f = vec![0.0; len + 1];
    f[0] = 1.0;
    let mut done = 0.0;
    for t in 0..len {
        if f[t] == 0.0 {
            continue;
        }
        for (o, q) in &outs {
            if t + o.len() <= len {
                if a[len - t - o.len()..len - t] == o[..] {
                    f[t + o.len()] += f[t] * q;
                }
            } else if o[o.len() - 1 - (len - t - 1)..] == a[..len - t] {
                done += f[t] * q;
            }
        }
    }
    f[len] + done
}

/// Probability that the first `|b|` symbols of the output of an unbounded
/// run of zeros equal `b`.
pub fn prefix_content_prob(spec: &ChannelSpec, b: &[u8]) -> f64 {
    let outs = nonempty_zero_outcomes(spec);
    let len = b.len();
    let mut f = vec![0.0; len + 1];
    f[0] = 1.0;
    let mut done = 0.0;
    for t in 0..len {
        if f[t] == 0.0 {
            continue;
        }
        for (o, q) in &outs {
            if t + o.len() <= len {
                if b[t..t + o.len()] == o[..] {
                    f[t + o.len()] += f[t] * q;
                }
            } else if o[..len - t] == b[t..] {
                done += f[t] * q;
            }
        }
    }
    f[len] + done
}

/// Total variation distance between two pad tables.
pub fn total_variation(a: &Pmf, b: &Pmf) -> f64 {
    let mut keys: Vec<&BitString> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}
