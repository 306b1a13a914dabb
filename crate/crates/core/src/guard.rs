//! Guard-band insertion between codeword blocks.
//!
//! A length-`2^n` word is split into `Φ = 2^{n-n0}` blocks of `N0 = 2^{n0}`
//! bits. Blocks are joined recursively: `g(x) = x` at depth `n0`, otherwise
//! `g(x_I) ⊙ g_m ⊙ g(x_II)` with
//! `g_m = 0(ℓ(n0)) ⊙ 1(ℓ(m)) ⊙ 1(ℓ(m)) ⊙ 0(ℓ(n0))` and
//! `ℓ(m) = 2^{⌊(1-ξ)(m-1)⌋}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuardError {
    #[error("input has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("invalid guard configuration: {0}")]
    InvalidConfig(String),
}

/// Depths and guard shrink exponent.
///
/// `n == n0` is accepted and describes a single block with no guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGuardConfig")]
pub struct GuardConfig {
    n: u32,
    n0: u32,
    xi: f64,
}

#[derive(Deserialize)]
struct RawGuardConfig {
    n: u32,
    n0: u32,
    xi: f64,
}

impl TryFrom<RawGuardConfig> for GuardConfig {
    type Error = GuardError;

    fn try_from(raw: RawGuardConfig) -> Result<Self, Self::Error> {
        GuardConfig::new(raw.n, raw.n0, raw.xi)
    }
}

/// Largest supported depth; keeps every length comfortably inside `usize`.
pub const MAX_DEPTH: u32 = 30;

impl GuardConfig {
    pub fn new(n: u32, n0: u32, xi: f64) -> Result<Self, GuardError> {
        if n0 < 1 {
            return Err(GuardError::InvalidConfig("n0 must be at least 1".into()));
        }
        if n < n0 {
            return Err(GuardError::InvalidConfig(format!("n = {n} is below n0 = {n0}")));
        }
        if n > MAX_DEPTH {
            return Err(GuardError::InvalidConfig(format!("n = {n} exceeds {MAX_DEPTH}")));
        }
        if !(xi > 0.0 && xi < 0.5) {
            return Err(GuardError::InvalidConfig(format!("xi = {xi} outside (0, 1/2)")));
        }
        Ok(Self { n, n0, xi })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `N = 2^n`.
    pub fn codeword_len(&self) -> usize {
        1 << self.n
    }

    /// `N0 = 2^{n0}`.
    pub fn block_len(&self) -> usize {
        1 << self.n0
    }

    /// `Φ = 2^{n - n0}`.
    pub fn num_blocks(&self) -> usize {
        1 << (self.n - self.n0)
    }

    pub fn num_bands(&self) -> usize {
        self.num_blocks() - 1
    }

    /// `ℓ(m) = 2^{⌊(1-ξ)(m-1)⌋}` for `m >= 1`.
    pub fn ell(&self, m: u32) -> usize {
        assert!(m >= 1);
        // The tolerance absorbs representation error when (1-ξ)(m-1) is an integer.
        let e = ((1.0 - self.xi) * (m - 1) as f64 + 1e-9).floor() as u32;
        1 << e
    }

    pub fn ell_zero(&self) -> usize {
        self.ell(self.n0)
    }

    /// Guard band length at level `m`.
    pub fn guard_len(&self, m: u32) -> usize {
        2 * self.ell_zero() + 2 * self.ell(m)
    }

    /// Level of the band between blocks `band` and `band + 1` (0-based).
    pub fn band_level(&self, band: usize) -> u32 {
        assert!(band < self.num_bands());
        self.n0 + 1 + (band + 1).trailing_zeros()
    }

    /// Window length `h = ⌈ℓ(n0)·β/4⌉`, at least 1.
    pub fn window_len(&self, beta: f64) -> usize {
        let v = self.ell_zero() as f64 * beta / 4.0;
        ((v - 1e-9).ceil() as usize).max(1)
    }

    /// `Λ`, the length of `g(x)`.
    pub fn total_length(&self) -> usize {
        self.codeword_len()
            + (0..self.num_bands())
                .map(|g| self.guard_len(self.band_level(g)))
                .sum::<usize>()
    }
}

pub fn total_length(cfg: &GuardConfig) -> usize {
    cfg.total_length()
}

/// Which part of `g(x)` a segment covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Block,
    GuardLeft,
    GuardMidLeft,
    GuardMidRight,
    GuardRight,
}

/// Sub-blocks of a guard band, in transmission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuardPart {
    Left = 0,
    MidLeft = 1,
    MidRight = 2,
    Right = 3,
}

/// A half-open range `[start, end)` of `g(x)`. `index` is the block index
/// for blocks and the band index for guard parts (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub index: usize,
    pub level: u32,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn is_guard(&self) -> bool {
        self.kind != SegmentKind::Block
    }
}

/// Segment annotation of `g(x)`: block `i` is segment `5i`, and band `g`
/// occupies segments `5g + 1 ..= 5g + 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardLayout {
    pub segments: Vec<Segment>,
}

impl GuardLayout {
    pub fn new(cfg: &GuardConfig) -> Self {
        let mut segments = Vec::with_capacity(5 * cfg.num_blocks());
        let mut pos = 0;
        let mut push = |kind, index, level, len: usize| {
            segments.push(Segment {
                kind,
                index,
                level,
                start: pos,
                end: pos + len,
            });
            pos += len;
        };
        let ell0 = cfg.ell_zero();
        for i in 0..cfg.num_blocks() {
            push(SegmentKind::Block, i, cfg.n0(), cfg.block_len());
            if i + 1 < cfg.num_blocks() {
                let level = cfg.band_level(i);
                let mid = cfg.ell(level);
                push(SegmentKind::GuardLeft, i, level, ell0);
                push(SegmentKind::GuardMidLeft, i, level, mid);
                push(SegmentKind::GuardMidRight, i, level, mid);
                push(SegmentKind::GuardRight, i, level, ell0);
            }
        }
        Self { segments }
    }

    pub fn num_blocks(&self) -> usize {
        self.segments.len().div_ceil(5)
    }

    pub fn block(&self, i: usize) -> &Segment {
        &self.segments[5 * i]
    }

    pub fn guard(&self, band: usize, part: GuardPart) -> &Segment {
        &self.segments[5 * band + 1 + part as usize]
    }

    pub fn total_len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.end)
    }

    /// Removes every guard segment from `g_x`.
    pub fn strip_guards(&self, g_x: &BitString) -> BitString {
        let mut out = BitString::with_capacity(g_x.len());
        for s in self.segments.iter().filter(|s| !s.is_guard()) {
            out.extend_from_slice(&g_x.as_slice()[s.start..s.end]);
        }
        out
    }
}

/// Builds `g(x)` together with its segment layout.
pub fn encode_with_guards(x: &BitString, cfg: &GuardConfig) -> Result<(BitString, GuardLayout), GuardError> {
    check_len(x, cfg)?;
    let layout = GuardLayout::new(cfg);
    let mut out = BitString::with_capacity(layout.total_len());
    let n0 = cfg.block_len();
    for seg in &layout.segments {
        match seg.kind {
            SegmentKind::Block => {
                out.extend_from_slice(&x.as_slice()[seg.index * n0..(seg.index + 1) * n0]);
            }
            SegmentKind::GuardLeft | SegmentKind::GuardRight => {
                out.append(&BitString::zeros(seg.len()));
            }
            SegmentKind::GuardMidLeft | SegmentKind::GuardMidRight => {
                out.append(&BitString::ones(seg.len()));
            }
        }
    }
    debug_assert_eq!(out.len(), cfg.total_length());
    Ok((out, layout))
}

/// `x(1), …, x(Φ)`.
pub fn split_blocks(x: &BitString, cfg: &GuardConfig) -> Result<Vec<BitString>, GuardError> {
    check_len(x, cfg)?;
    Ok(x.as_slice()
        .chunks(cfg.block_len())
        .map(BitString::from)
        .collect())
}

fn check_len(x: &BitString, cfg: &GuardConfig) -> Result<(), GuardError> {
    if x.len() != cfg.codeword_len() {
        return Err(GuardError::BadLength {
            got: x.len(),
            expected: cfg.codeword_len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::rng::trial_rng;
    use proptest::prelude::*;

    /// Direct transcription of the recursive definition.
    fn recursive_guards(x: &[u8], depth: u32, cfg: &GuardConfig) -> Vec<u8> {
        if depth <= cfg.n0() {
            return x.to_vec();
        }
        let (a, b) = x.split_at(x.len() / 2);
        let mut out = recursive_guards(a, depth - 1, cfg);
        out.extend(std::iter::repeat_n(0, cfg.ell_zero()));
        out.extend(std::iter::repeat_n(1, 2 * cfg.ell(depth)));
        out.extend(std::iter::repeat_n(0, cfg.ell_zero()));
        out.extend(recursive_guards(b, depth - 1, cfg));
        out
    }

    #[test]
    fn single_block_is_identity() {
        let cfg = GuardConfig::new(2, 2, 0.25).unwrap();
        let x = bits("0110");
        let (g, layout) = encode_with_guards(&x, &cfg).unwrap();
        assert_eq!(g, x);
        assert_eq!(layout.segments.len(), 1);
        assert_eq!(cfg.total_length(), 4);
    }

    #[test]
    fn two_block_example() {
        let cfg = GuardConfig::new(3, 2, 0.25).unwrap();
        assert_eq!((cfg.ell(2), cfg.ell(3)), (1, 2));
        let x = bits("10110010");
        let (g, layout) = encode_with_guards(&x, &cfg).unwrap();
        assert_eq!(g, bits("1011").concat(&bits("011110")).concat(&bits("0010")));
        assert_eq!(g.len(), 14);
        assert_eq!(layout.guard(0, GuardPart::MidLeft).len(), 2);
        assert_eq!(layout.guard(0, GuardPart::MidRight).start, 7);
    }

    #[test]
    fn four_block_example() {
        let cfg = GuardConfig::new(5, 3, 0.2).unwrap();
        assert_eq!((cfg.ell(3), cfg.ell(4), cfg.ell(5)), (2, 4, 8));
        assert_eq!(cfg.num_blocks(), 4);
        let levels: Vec<u32> = (0..3).map(|g| cfg.band_level(g)).collect();
        assert_eq!(levels, vec![4, 5, 4]);
        assert_eq!(cfg.guard_len(4), 12);
        assert_eq!(cfg.guard_len(5), 20);
        assert_eq!(total_length(&cfg), 76);
        let x = BitString::random(32, &mut trial_rng(0, 0));
        assert_eq!(encode_with_guards(&x, &cfg).unwrap().0.len(), 76);
    }

    #[test]
    fn window_length() {
        let cfg = GuardConfig::new(10, 6, 0.2).unwrap();
        assert_eq!(cfg.ell_zero(), 16);
        assert_eq!(cfg.window_len(1.0), 4);
        assert_eq!(cfg.window_len(1.0 + 1e-15), 4);
        assert_eq!(cfg.window_len(0.9), 4);
        let small = GuardConfig::new(3, 2, 0.25).unwrap();
        assert_eq!(small.window_len(1.0), 1);
    }

    #[test]
    fn bad_inputs() {
        let cfg = GuardConfig::new(3, 2, 0.25).unwrap();
        assert!(matches!(
            encode_with_guards(&bits("0101"), &cfg),
            Err(GuardError::BadLength { got: 4, expected: 8 })
        ));
        assert!(split_blocks(&bits("0"), &cfg).is_err());
        assert!(GuardConfig::new(3, 4, 0.2).is_err());
        assert!(GuardConfig::new(3, 0, 0.2).is_err());
        assert!(GuardConfig::new(3, 2, 0.5).is_err());
    }

    #[test]
    fn level_counts() {
        let cfg = GuardConfig::new(9, 4, 0.3).unwrap();
        let layout = GuardLayout::new(&cfg);
        for m in cfg.n0() + 1..=cfg.n() {
            let count = layout
                .segments
                .iter()
                .filter(|s| s.kind == SegmentKind::GuardLeft && s.level == m)
                .count();
            assert_eq!(count, 1 << (cfg.n() - m), "level {m}");
        }
    }

    #[test]
    fn guard_overhead_shrinks() {
        // With a fixed number of outer levels the guard overhead vanishes as
        // the blocks grow, since ℓ grows like 2^{(1-ξ)m}.
        let ratios: Vec<f64> = (2..=14)
            .map(|n0| {
                let cfg = GuardConfig::new(n0 + 4, n0, 0.3).unwrap();
                cfg.total_length() as f64 / cfg.codeword_len() as f64
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{ratios:?}");
        assert!(ratios.last().unwrap() - 1.0 < 0.5 * (ratios[0] - 1.0));
    }

    fn cfg_strategy() -> impl Strategy<Value = GuardConfig> {
        (1u32..5, 0u32..5, 0.01f64..0.49).prop_map(|(n0, gap, xi)| GuardConfig::new(n0 + gap, n0, xi).unwrap())
    }

    proptest! {
        #[test]
        fn matches_recursive_definition(cfg in cfg_strategy(), seed in any::<u64>()) {
            let x = BitString::random(cfg.codeword_len(), &mut trial_rng(seed, 0));
            let (g, layout) = encode_with_guards(&x, &cfg).unwrap();
            let expected = recursive_guards(x.as_slice(), cfg.n(), &cfg);
            prop_assert_eq!(g.as_slice(), expected.as_slice());
            prop_assert_eq!(g.len(), cfg.total_length());
            prop_assert_eq!(layout.strip_guards(&g), x.clone());
            let blocks = split_blocks(&x, &cfg).unwrap();
            prop_assert_eq!(blocks.len(), cfg.num_blocks());
            prop_assert_eq!(BitString::concat_all(&blocks), x);
        }

        #[test]
        fn layout_tiles_and_guards_have_right_content(cfg in cfg_strategy()) {
            let x = BitString::zeros(cfg.codeword_len());
            let (g, layout) = encode_with_guards(&x, &cfg).unwrap();
            let mut pos = 0;
            for s in &layout.segments {
                prop_assert_eq!(s.start, pos);
                pos = s.end;
            }
            prop_assert_eq!(pos, g.len());
            prop_assert_eq!(layout.segments.iter().filter(|s| !s.is_guard()).count(), cfg.num_blocks());
            for band in 0..cfg.num_bands() {
                let m = cfg.band_level(band);
                let lo = layout.guard(band, GuardPart::Left).start;
                let hi = layout.guard(band, GuardPart::Right).end;
                let band_bits = g.slice(lo..hi);
                prop_assert_eq!(band_bits.len(), cfg.guard_len(m));
                prop_assert_eq!(band_bits.count_ones(), 2 * cfg.ell(m));
                prop_assert_eq!(layout.guard(band, GuardPart::Left).len(), cfg.ell_zero());
                prop_assert_eq!(layout.guard(band, GuardPart::Right).len(), cfg.ell_zero());
            }
            for m in 1..cfg.n() {
                prop_assert!(cfg.ell(m + 1) >= cfg.ell(m));
            }
        }
    }
}
