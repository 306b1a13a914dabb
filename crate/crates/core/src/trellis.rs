//! Joint-probability trellises for the IDS and DZP channels.
//!
//! The forward lattice `F(i, j)` is the probability that the first `i`
//! input symbols produced exactly the first `j` output symbols:
//!
//! ```text
//! F(i+1, j)   += F(i, j) · p_d
//! F(i+1, j+1) += F(i, j) · (q if y[j] == x[i] else p_s)
//! F(i+1, j+2) += F(i, j) · p_i/2      if y[j+1] == x[i]
//! ```
//!
//! All lattice arithmetic is in the log domain through [`LogProb`].

use std::ops::{Add, Mul};

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::channel::ChannelSpec;
use crate::scalar::Real;

/// A probability stored as its natural logarithm. Zero is `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb<T = f64>(T);

impl<T: Real> LogProb<T> {
    pub fn zero() -> Self {
        Self(T::neg_infinity())
    }

    pub fn one() -> Self {
        Self(T::zero())
    }

    pub fn from_prob(p: T) -> Self {
        if p > T::zero() {
            Self(p.ln())
        } else {
            Self::zero()
        }
    }

    pub fn from_ln(v: T) -> Self {
        Self(v)
    }

    pub fn ln(self) -> T {
        self.0
    }

    pub fn prob(self) -> T {
        if self.is_zero() {
            T::zero()
        } else {
            self.0.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == T::neg_infinity()
    }
}

impl<T: Real> Mul for LogProb<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::zero()
        } else {
            Self(self.0 + rhs.0)
        }
    }
}

impl<T: Real> Add for LogProb<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.0 >= rhs.0 { (self.0, rhs.0) } else { (rhs.0, self.0) };
        Self(hi + (lo - hi).exp().ln_1p())
    }
}

pub fn log_sum_exp<T: Real, I: IntoIterator<Item = LogProb<T>>>(terms: I) -> LogProb<T> {
    terms.into_iter().fold(LogProb::zero(), |acc, t| acc + t)
}

#[derive(Debug, Clone, Copy)]
struct Weights<T> {
    delete: LogProb<T>,
    keep: LogProb<T>,
    flip: LogProb<T>,
    insert_half: LogProb<T>,
}

impl<T: Real> Weights<T> {
    fn new(spec: &ChannelSpec<T>) -> Self {
        Self {
            delete: LogProb::from_prob(spec.p_delete()),
            keep: LogProb::from_prob(spec.p_keep()),
            flip: LogProb::from_prob(spec.p_substitute()),
            insert_half: LogProb::from_prob(spec.p_insert() * T::half()),
        }
    }

    #[inline]
    fn single(&self, x: u8, y: u8) -> LogProb<T> {
        if x == y {
            self.keep
        } else {
            self.flip
        }
    }
}

/// Full forward and backward tables for one `(x, y)` pair.
#[derive(Debug, Clone)]
pub struct Lattice<T = f64> {
    cols: usize,
    forward: Vec<LogProb<T>>,
    backward: Vec<LogProb<T>>,
}

impl<T: Real> Lattice<T> {
    pub fn build(spec: &ChannelSpec<T>, x: &[u8], y: &[u8]) -> Self {
        let w = Weights::new(spec);
        let (rows, cols) = (x.len() + 1, y.len() + 1);
        let mut forward = vec![LogProb::zero(); rows * cols];
        forward[0] = LogProb::one();
        for i in 0..x.len() {
            for j in 0..cols {
                let f = forward[i * cols + j];
                if f.is_zero() {
                    continue;
                }
                let next = (i + 1) * cols;
                forward[next + j] = forward[next + j] + f * w.delete;
                if j < y.len() {
                    forward[next + j + 1] = forward[next + j + 1] + f * w.single(x[i], y[j]);
                }
                if j + 1 < y.len() && y[j + 1] == x[i] {
                    forward[next + j + 2] = forward[next + j + 2] + f * w.insert_half;
                }
            }
        }
        let mut backward = vec![LogProb::zero(); rows * cols];
        backward[rows * cols - 1] = LogProb::one();
        for i in (0..x.len()).rev() {
            for j in 0..cols {
                let next = (i + 1) * cols;
                let mut b = backward[next + j] * w.delete;
                if j < y.len() {
                    b = b + backward[next + j + 1] * w.single(x[i], y[j]);
                }
                if j + 1 < y.len() && y[j + 1] == x[i] {
                    b = b + backward[next + j + 2] * w.insert_half;
                }
                backward[i * cols + j] = b;
            }
        }
        Self {
            cols,
            forward,
            backward,
        }
    }

    pub fn forward(&self, i: usize, j: usize) -> LogProb<T> {
        self.forward[i * self.cols + j]
    }

    pub fn backward(&self, i: usize, j: usize) -> LogProb<T> {
        self.backward[i * self.cols + j]
    }

    /// `P(Y = y | X = x)`.
    pub fn log_prob(&self) -> LogProb<T> {
        *self.forward.last().unwrap()
    }
}

/// `P(Y = y | X = x)` with a rolling row, in `O(|x| |y|)` time and `O(|y|)`
/// memory.
pub fn ids_joint_prob<T: Real>(spec: &ChannelSpec<T>, x: &BitString, y: &BitString) -> LogProb<T> {
    let init = |j: usize| if j == 0 { LogProb::one() } else { LogProb::zero() };
    forward_rows(spec, x.as_slice(), y.as_slice(), init)[y.len()]
}

fn forward_rows<T: Real>(spec: &ChannelSpec<T>, x: &[u8], y: &[u8], init: impl Fn(usize) -> LogProb<T>) -> Vec<LogProb<T>> {
    let w = Weights::new(spec);
    let cols = y.len() + 1;
    let mut row: Vec<LogProb<T>> = (0..cols).map(init).collect();
    let mut next = vec![LogProb::zero(); cols];
    for &xi in x {
        next.iter_mut().for_each(|v| *v = LogProb::zero());
        for j in 0..cols {
            let f = row[j];
            if f.is_zero() {
                continue;
            }
            next[j] = next[j] + f * w.delete;
            if j < y.len() {
                next[j + 1] = next[j + 1] + f * w.single(xi, y[j]);
            }
            if j + 1 < y.len() && y[j + 1] == xi {
                next[j + 2] = next[j + 2] + f * w.insert_half;
            }
        }
        std::mem::swap(&mut row, &mut next);
    }
    row
}

/// Probability law of the left and right dirty-zero pads.
pub trait PadLaw {
    fn left_prob(&self, pad: &[u8]) -> f64;
    fn right_prob(&self, pad: &[u8]) -> f64;
    /// No left pad is longer than this.
    fn max_left_len(&self) -> usize;
    fn max_right_len(&self) -> usize;
}

/// Pads that are always empty; reduces the DZP channel to the IDS channel.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPads;

impl PadLaw for NoPads {
    fn left_prob(&self, pad: &[u8]) -> f64 {
        pad.is_empty() as u8 as f64
    }

    fn right_prob(&self, pad: &[u8]) -> f64 {
        pad.is_empty() as u8 as f64
    }

    fn max_left_len(&self) -> usize {
        0
    }

    fn max_right_len(&self) -> usize {
        0
    }
}

fn pad_prefix_probs<P: PadLaw + ?Sized>(pads: &P, y: &[u8]) -> Vec<f64> {
    let max_left = pads.max_left_len().min(y.len());
    (0..=y.len())
        .map(|j| if j <= max_left { pads.left_prob(&y[..j]) } else { 0.0 })
        .collect()
}

fn pad_suffix_probs<P: PadLaw + ?Sized>(pads: &P, y: &[u8]) -> Vec<f64> {
    let min_start = y.len().saturating_sub(pads.max_right_len());
    (0..=y.len())
        .map(|k| if k >= min_start { pads.right_prob(&y[k..]) } else { 0.0 })
        .collect()
}

/// `P(Y★ = y★ | X = x)` for the dirty-zero-padded channel.
///
/// The lattice starts from `F(0, j) = P_left(y★[..j])` and ends with
/// `Σ_k F(|x|, k) · P_right(y★[k..])`.
pub fn dzp_joint_prob<T: Real, P: PadLaw + ?Sized>(
    spec: &ChannelSpec<T>,
    pads: &P,
    x: &BitString,
    y_star: &BitString,
) -> LogProb<T> {
    let y = y_star.as_slice();
    let left = pad_prefix_probs(pads, y);
    let right = pad_suffix_probs(pads, y);
    let row = forward_rows(spec, x.as_slice(), y, |j| LogProb::from_prob(T::from_f64(left[j])));
    log_sum_exp(
        row.into_iter()
            .zip(right)
            .map(|(f, r)| f * LogProb::from_prob(T::from_f64(r))),
    )
}

pub const MAX_EXHAUSTIVE_BLOCK: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrellisError {
    #[error("block length {0} exceeds the exhaustive limit of {MAX_EXHAUSTIVE_BLOCK}")]
    BlockTooLarge(usize),
}

/// `ln P(y★ | x)` for every candidate block `x`. Entry `v` belongs to
/// `BitString::from_index(v, block_len)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTable {
    pub block_len: usize,
    pub log_probs: Vec<f64>,
}

impl BlockTable {
    pub fn get(&self, x: &BitString) -> f64 {
        assert_eq!(x.len(), self.block_len);
        self.log_probs[x.to_index()]
    }

    /// Posterior over candidates under a uniform prior. Uniform when every
    /// candidate has zero likelihood.
    pub fn posterior(&self) -> Vec<f64> {
        let max = self.log_probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return vec![1.0 / self.log_probs.len() as f64; self.log_probs.len()];
        }
        let w: Vec<f64> = self.log_probs.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }

    /// `ln Σ_x P(y★ | x)`.
    pub fn log_total(&self) -> f64 {
        log_sum_exp(self.log_probs.iter().map(|&l| LogProb::from_ln(l))).ln()
    }
}

struct TableWalk<'a> {
    y: &'a [u8],
    weights: [f64; 4],
    right: &'a [f64],
    rows: Vec<Vec<f64>>,
    scales: Vec<f64>,
    out: Vec<f64>,
}

impl TableWalk<'_> {
    fn visit(&mut self, depth: usize, index: usize, block_len: usize) {
        if depth == block_len {
            let row = &self.rows[depth];
            let tail: f64 = row.iter().zip(self.right).map(|(f, r)| f * r).sum();
            self.out[index] = if tail > 0.0 { self.scales[depth] + tail.ln() } else { f64::NEG_INFINITY };
            return;
        }
        let [delete, keep, flip, insert_half] = self.weights;
        for bit in 0..2u8 {
            let (head, tail) = self.rows.split_at_mut(depth + 1);
            let (prev, next) = (&head[depth], &mut tail[0]);
            let mut max = 0.0f64;
            for j in 0..next.len() {
                let mut v = prev[j] * delete;
                if j >= 1 {
                    v += prev[j - 1] * if self.y[j - 1] == bit { keep } else { flip };
                }
                if j >= 2 && self.y[j - 1] == bit {
                    v += prev[j - 2] * insert_half;
                }
                next[j] = v;
                max = max.max(v);
            }
            let child = index | ((bit as usize) << depth);
            if max == 0.0 {
                self.mark_zero(depth + 1, child, block_len);
                continue;
            }
            next.iter_mut().for_each(|v| *v /= max);
            self.scales[depth + 1] = self.scales[depth] + max.ln();
            self.visit(depth + 1, child, block_len);
        }
    }

    fn mark_zero(&mut self, depth: usize, index: usize, block_len: usize) {
        for rest in 0..(1usize << (block_len - depth)) {
            self.out[index | (rest << depth)] = f64::NEG_INFINITY;
        }
    }
}

/// Exhaustive DZP likelihoods of all `2^block_len` candidates for one
/// received `y★`, sharing lattice rows along common prefixes.
pub fn block_likelihood_table<P: PadLaw + ?Sized>(
    spec: &ChannelSpec,
    pads: &P,
    y_star: &BitString,
    block_len: usize,
) -> Result<BlockTable, TrellisError> {
    if block_len > MAX_EXHAUSTIVE_BLOCK {
        return Err(TrellisError::BlockTooLarge(block_len));
    }
    let y = y_star.as_slice();
    let mut left = pad_prefix_probs(pads, y);
    let right = pad_suffix_probs(pads, y);
    let mut out = vec![f64::NEG_INFINITY; 1 << block_len];
    let max = left.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        left.iter_mut().for_each(|v| *v /= max);
        let mut rows = vec![vec![0.0; y.len() + 1]; block_len + 1];
        rows[0] = left;
        let mut scales = vec![0.0; block_len + 1];
        scales[0] = max.ln();
        let mut walk = TableWalk {
            y,
            weights: [
                spec.p_delete(),
                spec.p_keep(),
                spec.p_substitute(),
                spec.p_insert() / 2.0,
            ],
            right: &right,
            rows,
            scales,
            out,
        };
        walk.visit(0, 0, block_len);
        out = walk.out;
    }
    Ok(BlockTable {
        block_len,
        log_probs: out,
    })
}
