//! Genie parsing: the idealized segmentation of the channel output.
//!
//! The genie sees which output symbols came from which input segment of
//! `g(x)`. Around each guard band it pads the neighbouring block outputs
//! with "dirty zeros" using a dithered window scan, which turns every block
//! into one use of the dirty-zero-padded (DZP) channel.
//!
//! Window convention: a window "from `s` to `e`" covers the `h` symbols
//! `z[s..e]` (0-based, half-open), so the initial window `e = |d_midright|`
//! covers exactly the last `h` symbols of `d_midright`. "Deleting `z_1` to
//! `z_e`" keeps `z[e..]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{count_zeros, BitString};
use crate::channel::{ChannelSpec, SymbolSampler};
use crate::guard::{encode_with_guards, GuardConfig, GuardError, GuardLayout, GuardPart};

/// Guard context used when pads are synthesized outside a full codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadContext {
    /// Length of the zero sub-blocks, `ℓ(n0)`.
    pub ell_zero: usize,
    /// Length of one half of the ones run, `ℓ(m)` at the synthesized level.
    pub ell_mid: usize,
    /// Window length.
    pub h: usize,
}

impl PadContext {
    pub fn new(ell_zero: usize, ell_mid: usize, h: usize) -> Self {
        assert!(h >= 1, "window length must be positive");
        Self { ell_zero, ell_mid, h }
    }

    /// Context of the narrowest guard band, level `n0 + 1`.
    pub fn for_guard(cfg: &GuardConfig, beta: f64) -> Self {
        Self::for_guard_level(cfg, beta, cfg.n0() + 1)
    }

    pub fn for_guard_level(cfg: &GuardConfig, beta: f64, level: u32) -> Self {
        Self::new(cfg.ell_zero(), cfg.ell(level), cfg.window_len(beta))
    }
}

/// Events that make the genie's padding hard for the receiver to mimic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadFlags {
    /// The ones run was shorter than `h` and had to be extended.
    pub short_ones: bool,
    pub first_window_fell_off: bool,
    pub second_window_fell_off: bool,
    /// The second window was used although it held fewer than `h/2` zeros.
    pub second_window_minority: bool,
}

impl PadFlags {
    pub fn any(&self) -> bool {
        self.short_ones || self.first_window_fell_off || self.second_window_fell_off || self.second_window_minority
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadRecord {
    pub rho: usize,
    /// Symbols prepended to the ones run, in scan orientation.
    pub extension: BitString,
    pub flags: PadFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeniePad {
    pub pad: BitString,
    pub record: PadRecord,
}

/// Outcome of the dithered scan over `z = mid ⊙ dirty`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ScanResult {
    pub first_window: (usize, usize),
    /// `e` at which the prefix is deleted; `None` when a window fell off.
    pub cut: Option<usize>,
    pub first_fell_off: bool,
    pub second_fell_off: bool,
    pub second_minority: bool,
}

/// Steps 2-8 of the padding procedure. Needs `mid_len + rho >= h`.
pub(crate) fn dithered_scan(z: &[u8], mid_len: usize, h: usize, rho: usize) -> ScanResult {
    debug_assert!((1..=h).contains(&rho) && mid_len + rho >= h);
    let mut e = mid_len + rho;
    let mut s = e - h;
    let mut res = ScanResult {
        first_window: (s, e),
        cut: None,
        first_fell_off: false,
        second_fell_off: false,
        second_minority: false,
    };
    if e > z.len() {
        res.first_fell_off = true;
        return res;
    }
    if 2 * count_zeros(&z[s..e]) >= h {
        res.cut = Some(e);
        return res;
    }
    s += h;
    e += h;
    if e > z.len() {
        res.second_fell_off = true;
        return res;
    }
    res.second_minority = 2 * count_zeros(&z[s..e]) < h;
    res.cut = Some(e);
    res
}

fn pad_left_impl<R: Rng + ?Sized>(
    d_midright: &[u8],
    d_right: &[u8],
    h: usize,
    sampler: &SymbolSampler,
    rho: Option<usize>,
    rng: &mut R,
) -> GeniePad {
    assert!(h >= 1);
    let mut extension: Vec<u8> = Vec::new();
    while extension.len() + d_midright.len() < h {
        let mut draw = Vec::with_capacity(2 + extension.len());
        sampler.emit(1, rng, &mut draw);
        draw.extend_from_slice(&extension);
        extension = draw;
    }
    let mid_len = extension.len() + d_midright.len();
    let mut z = Vec::with_capacity(mid_len + d_right.len());
    z.extend_from_slice(&extension);
    z.extend_from_slice(d_midright);
    z.extend_from_slice(d_right);

    let rho = rho.unwrap_or_else(|| rng.gen_range(1..=h));
    let scan = dithered_scan(&z, mid_len, h, rho);
    let pad = match scan.cut {
        Some(e) => BitString::from(&z[e..]),
        None => BitString::new(),
    };
    GeniePad {
        pad,
        record: PadRecord {
            rho,
            flags: PadFlags {
                short_ones: !extension.is_empty(),
                first_window_fell_off: scan.first_fell_off,
                second_window_fell_off: scan.second_fell_off,
                second_window_minority: scan.second_minority,
            },
            extension: BitString::from_bits(extension),
        },
    }
}

/// Left padding of a block from the preceding guard band's
/// `d_midright ⊙ d_right`, with a fresh dither.
pub fn genie_pad_left<R: Rng + ?Sized>(
    d_midright: &BitString,
    d_right: &BitString,
    h: usize,
    spec: &ChannelSpec,
    rng: &mut R,
) -> GeniePad {
    pad_left_impl(d_midright.as_slice(), d_right.as_slice(), h, &spec.sampler(), None, rng)
}

/// As [`genie_pad_left`] with the dither supplied by the caller.
pub fn genie_pad_left_with_dither<R: Rng + ?Sized>(
    d_midright: &BitString,
    d_right: &BitString,
    h: usize,
    spec: &ChannelSpec,
    rho: usize,
    rng: &mut R,
) -> GeniePad {
    assert!((1..=h).contains(&rho), "dither {rho} outside 1..={h}");
    pad_left_impl(d_midright.as_slice(), d_right.as_slice(), h, &spec.sampler(), Some(rho), rng)
}

fn pad_right_impl<R: Rng + ?Sized>(
    d_left: &BitString,
    d_midleft: &BitString,
    h: usize,
    sampler: &SymbolSampler,
    rho: Option<usize>,
    rng: &mut R,
) -> GeniePad {
    let mirrored = pad_left_impl(
        d_midleft.reversed().as_slice(),
        d_left.reversed().as_slice(),
        h,
        sampler,
        rho,
        rng,
    );
    GeniePad {
        pad: mirrored.pad.reversed(),
        record: mirrored.record,
    }
}

/// Right padding of a block from the following guard band's
/// `d_left ⊙ d_midleft`: the mirror image of [`genie_pad_left`].
pub fn genie_pad_right<R: Rng + ?Sized>(
    d_left: &BitString,
    d_midleft: &BitString,
    h: usize,
    spec: &ChannelSpec,
    rng: &mut R,
) -> GeniePad {
    pad_right_impl(d_left, d_midleft, h, &spec.sampler(), None, rng)
}

pub fn genie_pad_right_with_dither<R: Rng + ?Sized>(
    d_left: &BitString,
    d_midleft: &BitString,
    h: usize,
    spec: &ChannelSpec,
    rho: usize,
    rng: &mut R,
) -> GeniePad {
    assert!((1..=h).contains(&rho), "dither {rho} outside 1..={h}");
    pad_right_impl(d_left, d_midleft, h, &spec.sampler(), Some(rho), rng)
}

/// Channel outputs of each segment of `g(x)`, aligned with the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedOutput {
    parts: Vec<BitString>,
    offsets: Vec<usize>,
}

impl SegmentedOutput {
    pub fn from_parts(parts: Vec<BitString>) -> Self {
        let mut offsets = Vec::with_capacity(parts.len() + 1);
        let mut pos = 0;
        for p in &parts {
            offsets.push(pos);
            pos += p.len();
        }
        offsets.push(pos);
        Self { parts, offsets }
    }

    pub fn parts(&self) -> &[BitString] {
        &self.parts
    }

    /// `y(i)`.
    pub fn block(&self, i: usize) -> &BitString {
        &self.parts[5 * i]
    }

    /// `d^part(band)`.
    pub fn guard(&self, band: usize, part: GuardPart) -> &BitString {
        &self.parts[5 * band + 1 + part as usize]
    }

    /// Start of segment `idx` within the concatenated output.
    pub fn offset(&self, idx: usize) -> usize {
        self.offsets[idx]
    }

    pub fn guard_offset(&self, band: usize, part: GuardPart) -> usize {
        self.offsets[5 * band + 1 + part as usize]
    }

    pub fn total_len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn concat(&self) -> BitString {
        BitString::concat_all(&self.parts)
    }
}

/// Transmits every segment of `g_x` independently. For a memoryless channel
/// the concatenation has exactly the law of transmitting `g_x` at once.
pub fn transmit_segmented<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    g_x: &BitString,
    layout: &GuardLayout,
    rng: &mut R,
) -> SegmentedOutput {
    assert_eq!(g_x.len(), layout.total_len(), "layout does not match codeword");
    let sampler = spec.sampler();
    let parts = layout
        .segments
        .iter()
        .map(|s| {
            let mut out = Vec::with_capacity(s.len() + 2);
            sampler.transmit_into(&g_x.as_slice()[s.start..s.end], rng, &mut out);
            BitString::from_bits(out)
        })
        .collect();
    SegmentedOutput::from_parts(parts)
}

/// One block's DZP channel output `y★ = y_left ⊙ y_middle ⊙ y_right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DzpBlockOutput {
    pub y_left: BitString,
    pub y_middle: BitString,
    pub y_right: BitString,
}

impl DzpBlockOutput {
    pub fn y_star(&self) -> BitString {
        let mut out = BitString::with_capacity(self.y_left.len() + self.y_middle.len() + self.y_right.len());
        out.append(&self.y_left);
        out.append(&self.y_middle);
        out.append(&self.y_right);
        out
    }
}

/// Left pad drawn from synthesized guard context.
pub fn sample_pad_left<R: Rng + ?Sized>(spec: &ChannelSpec, ctx: &PadContext, rng: &mut R) -> GeniePad {
    let sampler = spec.sampler();
    let mut d_midright = Vec::new();
    sampler.transmit_into(&vec![1; ctx.ell_mid], rng, &mut d_midright);
    let mut d_right = Vec::new();
    sampler.transmit_into(&vec![0; ctx.ell_zero], rng, &mut d_right);
    pad_left_impl(&d_midright, &d_right, ctx.h, &sampler, None, rng)
}

/// Right pad drawn from synthesized guard context.
pub fn sample_pad_right<R: Rng + ?Sized>(spec: &ChannelSpec, ctx: &PadContext, rng: &mut R) -> GeniePad {
    let sampler = spec.sampler();
    let mut d_left = Vec::new();
    sampler.transmit_into(&vec![0; ctx.ell_zero], rng, &mut d_left);
    let mut d_midleft = Vec::new();
    sampler.transmit_into(&vec![1; ctx.ell_mid], rng, &mut d_midleft);
    pad_right_impl(
        &BitString::from_bits(d_left),
        &BitString::from_bits(d_midleft),
        ctx.h,
        &sampler,
        None,
        rng,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DzpSample {
    pub output: DzpBlockOutput,
    pub left: PadRecord,
    pub right: PadRecord,
}

/// Standalone sampler of the DZP channel for one block.
pub fn sample_dzp<R: Rng + ?Sized>(spec: &ChannelSpec, x_block: &BitString, ctx: &PadContext, rng: &mut R) -> DzpSample {
    let left = sample_pad_left(spec, ctx, rng);
    let y_middle = crate::channel::transmit(spec, x_block, rng);
    let right = sample_pad_right(spec, ctx, rng);
    DzpSample {
        output: DzpBlockOutput {
            y_left: left.pad,
            y_middle,
            y_right: right.pad,
        },
        left: left.record,
        right: right.record,
    }
}

/// Which pad of which block a dither site produces.
///
/// Band `g` sits between blocks `g` and `g + 1`; its `Right` site pads block
/// `g` on the right (the receiver's left-half trim) and its `Left` site pads
/// block `g + 1` on the left (the right-half trim).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub band: usize,
    pub side: PadSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadSide {
    Right,
    Left,
}

impl Site {
    pub fn right_of(band: usize) -> Self {
        Self {
            band,
            side: PadSide::Right,
        }
    }

    pub fn left_of_next(band: usize) -> Self {
        Self {
            band,
            side: PadSide::Left,
        }
    }

    /// Dense index in `0..2(Φ-1)`.
    pub fn index(&self) -> usize {
        2 * self.band + self.side as usize
    }

    pub fn from_index(idx: usize) -> Self {
        Self {
            band: idx / 2,
            side: if idx.is_multiple_of(2) { PadSide::Right } else { PadSide::Left },
        }
    }

    /// The block whose pad this site produces.
    pub fn block(&self) -> usize {
        match self.side {
            PadSide::Right => self.band,
            PadSide::Left => self.band + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub site: Site,
    pub block: usize,
    #[serde(flatten)]
    pub record: PadRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePad {
    pub pad: BitString,
    #[serde(flatten)]
    pub record: PadRecord,
}

impl From<GeniePad> for EdgePad {
    fn from(p: GeniePad) -> Self {
        Self {
            pad: p.pad,
            record: p.record,
        }
    }
}

/// The genie's randomness: dithers, extension draws, edge pads and the
/// bad-event flags of every padding site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DitherTape {
    pub edge_left: EdgePad,
    pub edge_right: EdgePad,
    pub sites: Vec<SiteRecord>,
}

impl DitherTape {
    pub fn site(&self, site: Site) -> &SiteRecord {
        &self.sites[site.index()]
    }
}

/// Pads every block of a segmented output. `dither` may supply the dither
/// of a site; `None` draws it uniformly after any extension draws.
#[allow(clippy::too_many_arguments)]
pub fn genie_pads<R, F>(
    spec: &ChannelSpec,
    segmented: &SegmentedOutput,
    num_blocks: usize,
    h: usize,
    edge_left: EdgePad,
    edge_right: EdgePad,
    mut dither: F,
    rng: &mut R,
) -> (Vec<DzpBlockOutput>, DitherTape)
where
    R: Rng + ?Sized,
    F: FnMut(Site) -> Option<usize>,
{
    let sampler = spec.sampler();
    let mut sites = Vec::with_capacity(2 * num_blocks.saturating_sub(1));
    let mut right_pads = Vec::with_capacity(num_blocks);
    let mut left_pads = vec![edge_left.pad.clone()];
    for band in 0..num_blocks - 1 {
        let site = Site::right_of(band);
        let right = pad_right_impl(
            segmented.guard(band, GuardPart::Left),
            segmented.guard(band, GuardPart::MidLeft),
            h,
            &sampler,
            dither(site),
            rng,
        );
        right_pads.push(right.pad);
        sites.push(SiteRecord {
            site,
            block: site.block(),
            record: right.record,
        });

        let site = Site::left_of_next(band);
        let left = pad_left_impl(
            segmented.guard(band, GuardPart::MidRight).as_slice(),
            segmented.guard(band, GuardPart::Right).as_slice(),
            h,
            &sampler,
            dither(site),
            rng,
        );
        left_pads.push(left.pad);
        sites.push(SiteRecord {
            site,
            block: site.block(),
            record: left.record,
        });
    }
    right_pads.push(edge_right.pad.clone());

    let blocks = left_pads
        .into_iter()
        .zip(right_pads)
        .enumerate()
        .map(|(i, (y_left, y_right))| DzpBlockOutput {
            y_left,
            y_middle: segmented.block(i).clone(),
            y_right,
        })
        .collect();
    (
        blocks,
        DitherTape {
            edge_left,
            edge_right,
            sites,
        },
    )
}

/// Everything produced by one genie-parsed transmission.
#[derive(Debug, Clone)]
pub struct GenieParse {
    pub codeword: BitString,
    pub layout: GuardLayout,
    pub segmented: SegmentedOutput,
    /// Raw channel output.
    pub y: BitString,
    pub blocks: Vec<DzpBlockOutput>,
    pub tape: DitherTape,
}

impl GenieParse {
    /// The received string with the (shared) edge pads attached.
    pub fn y_pad(&self) -> BitString {
        self.tape.edge_left.pad.concat(&self.y).concat(&self.tape.edge_right.pad)
    }

    pub fn y_stars(&self) -> Vec<BitString> {
        self.blocks.iter().map(DzpBlockOutput::y_star).collect()
    }
}

/// Encodes `x` with guards, transmits it and pads every block.
pub fn genie_parse<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    x: &BitString,
    cfg: &GuardConfig,
    rng: &mut R,
) -> Result<GenieParse, GuardError> {
    let beta = spec.stats().beta;
    let ctx = PadContext::for_guard(cfg, beta);
    let (codeword, layout) = encode_with_guards(x, cfg)?;
    let segmented = transmit_segmented(spec, &codeword, &layout, rng);
    let edge_left = sample_pad_left(spec, &ctx, rng).into();
    let edge_right = sample_pad_right(spec, &ctx, rng).into();
    let (blocks, tape) = genie_pads(
        spec,
        &segmented,
        cfg.num_blocks(),
        ctx.h,
        edge_left,
        edge_right,
        |_| None,
        rng,
    );
    Ok(GenieParse {
        y: segmented.concat(),
        codeword,
        layout,
        segmented,
        blocks,
        tape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::rng::trial_rng;
    use crate::stats::{chi_square_homogeneity, chi_square_uniform};

    fn p01() -> ChannelSpec {
        ChannelSpec::new(0.01, 0.01, 0.01).unwrap()
    }

    #[test]
    fn scan_hand_traces() {
        // z = 1111 | 0000, h = 2
        let z = bits("11110000");
        // rho = 1: window z[3..5] = "10" -> one zero, majority -> cut at 5
        let r = dithered_scan(z.as_slice(), 4, 2, 1);
        assert_eq!(r.first_window, (3, 5));
        assert_eq!(r.cut, Some(5));
        // h = 4, rho = 1: window "1110" minority, second window "0000" -> cut 9? z has 8
        let r = dithered_scan(z.as_slice(), 4, 4, 1);
        assert_eq!(r.first_window, (1, 5));
        assert!(r.second_fell_off);
        assert_eq!(r.cut, None);
        // h = 3, rho = 1: "110" minority, "000" -> cut at 8 = |z|, pad empty without flags
        let r = dithered_scan(z.as_slice(), 4, 3, 1);
        assert_eq!(r.cut, Some(8));
        assert!(!r.second_fell_off && !r.second_minority);
    }

    #[test]
    fn noiseless_pad_left_trace() {
        let spec = ChannelSpec::noiseless();
        let (ell_mid, ell_zero, h) = (16, 16, 4);
        let dmr = BitString::ones(ell_mid);
        let dr = BitString::zeros(ell_zero);
        for rho in 1..=h {
            let p = genie_pad_left_with_dither(&dmr, &dr, h, &spec, rho, &mut trial_rng(0, 0));
            // the first window holds h - rho ones and rho zeros
            let expected_len = if 2 * rho >= h { ell_zero - rho } else { ell_zero - rho - h };
            assert_eq!(p.pad, BitString::zeros(expected_len), "rho {rho}");
            assert!(!p.record.flags.any());
        }
    }

    #[test]
    fn empty_dirty_segment_falls_off() {
        let spec = ChannelSpec::noiseless();
        let p = genie_pad_left(&BitString::ones(8), &BitString::new(), 3, &spec, &mut trial_rng(1, 0));
        assert!(p.pad.is_empty());
        assert!(p.record.flags.first_window_fell_off);
        let p = genie_pad_right(&BitString::new(), &BitString::new(), 3, &spec, &mut trial_rng(1, 1));
        assert!(p.pad.is_empty());
        assert!(p.record.flags.short_ones && p.record.flags.first_window_fell_off);
    }

    #[test]
    fn short_ones_are_extended() {
        let spec = p01();
        let p = genie_pad_left(&bits("1"), &BitString::zeros(10), 4, &spec, &mut trial_rng(2, 0));
        assert!(p.record.flags.short_ones);
        assert!(p.record.extension.len() + 1 >= 4);
    }

    #[test]
    fn mirror_property() {
        let spec = ChannelSpec::new(0.1, 0.1, 0.1).unwrap();
        let mut src = trial_rng(3, 0);
        for seed in 0..200 {
            let a = BitString::random(src.gen_range(0..12), &mut src);
            let b = BitString::random(src.gen_range(0..12), &mut src);
            let h = src.gen_range(1..5);
            let right = genie_pad_right(&a, &b, h, &spec, &mut trial_rng(seed, 9));
            let left = genie_pad_left(&b.reversed(), &a.reversed(), h, &spec, &mut trial_rng(seed, 9));
            assert_eq!(right.pad, left.pad.reversed());
            assert_eq!(right.record, left.record);
        }
    }

    #[test]
    fn pad_left_is_suffix_of_dirty_zeros() {
        let spec = ChannelSpec::new(0.1, 0.1, 0.1).unwrap();
        let mut rng = trial_rng(4, 0);
        for _ in 0..2000 {
            let dmr = crate::channel::transmit(&spec, &BitString::ones(rng.gen_range(0..10)), &mut rng);
            let dr = crate::channel::transmit(&spec, &BitString::zeros(rng.gen_range(0..10)), &mut rng);
            let p = genie_pad_left(&dmr, &dr, rng.gen_range(1..4), &spec, &mut rng);
            assert!(dr.as_slice().ends_with(p.pad.as_slice()));
        }
    }

    #[test]
    fn segmented_transmission_degenerate_channels() {
        let cfg = GuardConfig::new(5, 3, 0.2).unwrap();
        let x = BitString::random(32, &mut trial_rng(5, 0));
        let (g, layout) = encode_with_guards(&x, &cfg).unwrap();
        let out = transmit_segmented(&ChannelSpec::noiseless(), &g, &layout, &mut trial_rng(5, 1));
        for (part, seg) in out.parts().iter().zip(&layout.segments) {
            assert_eq!(part.as_slice(), &g.as_slice()[seg.start..seg.end]);
        }
        assert_eq!(out.concat(), g);

        let del = ChannelSpec::new(0.0, 0.3, 0.0).unwrap();
        let out = transmit_segmented(&del, &g, &layout, &mut trial_rng(5, 2));
        for band in 0..cfg.num_bands() {
            assert_eq!(out.guard(band, GuardPart::Left).count_ones(), 0);
            assert_eq!(out.guard(band, GuardPart::Right).count_ones(), 0);
            assert_eq!(out.guard(band, GuardPart::MidLeft).count_zeros(), 0);
            assert_eq!(out.guard(band, GuardPart::MidRight).count_zeros(), 0);
        }
    }

    #[test]
    fn dirty_segment_mean_length() {
        let spec = ChannelSpec::new(0.05, 0.05, 0.05).unwrap();
        let cfg = GuardConfig::new(4, 2, 0.2).unwrap();
        let x = BitString::zeros(16);
        let (g, layout) = encode_with_guards(&x, &cfg).unwrap();
        let mut rng = trial_rng(6, 0);
        let trials = 20_000;
        let lens: Vec<f64> = (0..trials)
            .map(|_| transmit_segmented(&spec, &g, &layout, &mut rng).guard(0, GuardPart::Right).len() as f64)
            .collect();
        let (mean, half) = crate::stats::mean_ci(&lens);
        let beta = spec.stats().beta;
        assert!((mean - cfg.ell_zero() as f64 * beta).abs() < 2.0 * half.max(1e-3), "{mean}");
    }

    #[test]
    fn genie_parse_structure() {
        let spec = p01();
        let cfg = GuardConfig::new(6, 3, 0.2).unwrap();
        let mut rng = trial_rng(7, 0);
        let x = BitString::random(64, &mut rng);
        let parse = genie_parse(&spec, &x, &cfg, &mut rng).unwrap();
        assert_eq!(parse.blocks.len(), 8);
        assert_eq!(parse.tape.sites.len(), 14);
        assert_eq!(parse.y, parse.segmented.concat());
        for (i, b) in parse.blocks.iter().enumerate() {
            assert_eq!(&b.y_middle, parse.segmented.block(i));
        }
        assert_eq!(parse.blocks[0].y_left, parse.tape.edge_left.pad);
        assert_eq!(parse.blocks[7].y_right, parse.tape.edge_right.pad);
        let h = cfg.window_len(spec.stats().beta);
        assert!(parse.tape.sites.iter().all(|s| (1..=h).contains(&s.record.rho)));
    }

    #[test]
    fn single_block_parse_uses_edges() {
        let spec = p01();
        let cfg = GuardConfig::new(3, 3, 0.2).unwrap();
        let mut rng = trial_rng(8, 0);
        let x = BitString::random(8, &mut rng);
        let parse = genie_parse(&spec, &x, &cfg, &mut rng).unwrap();
        assert_eq!(parse.blocks.len(), 1);
        let b = &parse.blocks[0];
        assert_eq!(
            b.y_star(),
            parse.tape.edge_left.pad.concat(&parse.y).concat(&parse.tape.edge_right.pad)
        );
    }

    #[test]
    fn pure_deletion_left_pads_are_clean_zeros() {
        let spec = ChannelSpec::new(0.0, 0.2, 0.0).unwrap();
        let cfg = GuardConfig::new(6, 3, 0.2).unwrap();
        let mut rng = trial_rng(9, 0);
        for _ in 0..100 {
            let x = BitString::random(64, &mut rng);
            let parse = genie_parse(&spec, &x, &cfg, &mut rng).unwrap();
            for b in &parse.blocks {
                assert_eq!(b.y_left.count_ones(), 0);
                assert_eq!(b.y_right.count_ones(), 0);
            }
        }
    }

    #[test]
    fn noiseless_dzp_keeps_middle() {
        let spec = ChannelSpec::noiseless();
        let ctx = PadContext::new(8, 8, 2);
        let x = bits("10110011");
        let s = sample_dzp(&spec, &x, &ctx, &mut trial_rng(10, 0));
        assert_eq!(s.output.y_middle, x);
        assert_eq!(s.output.y_left.count_ones(), 0);
    }

    fn length_histogram(lens: impl Iterator<Item = usize>, bins: usize) -> Vec<u64> {
        let mut counts = vec![0u64; bins];
        for l in lens {
            counts[l.min(bins - 1)] += 1;
        }
        counts
    }

    #[test]
    fn interior_left_pads_do_not_depend_on_position() {
        let spec = ChannelSpec::new(0.05, 0.05, 0.05).unwrap();
        let cfg = GuardConfig::new(5, 2, 0.3).unwrap();
        let mut rng = trial_rng(11, 0);
        let trials = 100_000;
        let mut a = Vec::with_capacity(trials);
        let mut b = Vec::with_capacity(trials);
        for _ in 0..trials {
            let x = BitString::random(32, &mut rng);
            let parse = genie_parse(&spec, &x, &cfg, &mut rng).unwrap();
            // blocks 2 and 3 (1-based) face guards of different levels
            a.push(parse.blocks[1].y_left.len());
            b.push(parse.blocks[2].y_left.len());
        }
        let ha = length_histogram(a.into_iter(), 8);
        let hb = length_histogram(b.into_iter(), 8);
        let test = chi_square_homogeneity(&ha, &hb);
        assert!(test.p_value > 1e-4, "{test:?} {ha:?} {hb:?}");
    }

    #[test]
    fn pads_independent_of_block_content() {
        let spec = ChannelSpec::new(0.05, 0.05, 0.05).unwrap();
        let cfg = GuardConfig::new(4, 2, 0.3).unwrap();
        let mut rng = trial_rng(12, 0);
        let trials = 50_000;
        let mut hists = Vec::new();
        for planted in [BitString::zeros(16), BitString::ones(16)] {
            let lens = (0..trials).map(|_| {
                let parse = genie_parse(&spec, &planted, &cfg, &mut rng).unwrap();
                parse.blocks[1].y_left.len()
            });
            hists.push(length_histogram(lens, 8));
        }
        let test = chi_square_homogeneity(&hists[0], &hists[1]);
        assert!(test.p_value > 1e-4, "{test:?}");
    }

    #[test]
    fn standalone_sampler_matches_interior_pads() {
        let spec = ChannelSpec::new(0.05, 0.05, 0.05).unwrap();
        let cfg = GuardConfig::new(4, 3, 0.3).unwrap();
        let ctx = PadContext::for_guard(&cfg, spec.stats().beta);
        let mut rng = trial_rng(13, 0);
        let trials = 100_000;
        let mut empty_standalone = 0;
        let mut lens_standalone = Vec::with_capacity(trials);
        for _ in 0..trials {
            let p = sample_pad_left(&spec, &ctx, &mut rng);
            empty_standalone += p.pad.is_empty() as u64;
            lens_standalone.push(p.pad.len());
        }
        let mut empty_parse = 0;
        let mut lens_parse = Vec::with_capacity(trials);
        for _ in 0..trials {
            let x = BitString::random(16, &mut rng);
            let parse = genie_parse(&spec, &x, &cfg, &mut rng).unwrap();
            empty_parse += parse.blocks[1].y_left.is_empty() as u64;
            lens_parse.push(parse.blocks[1].y_left.len());
        }
        let (p1, p2) = (empty_standalone as f64 / trials as f64, empty_parse as f64 / trials as f64);
        let sd = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / trials as f64).sqrt();
        assert!((p1 - p2).abs() < 4.0 * sd + 1e-9, "{p1} vs {p2}");
        let test = chi_square_homogeneity(
            &length_histogram(lens_standalone.into_iter(), 12),
            &length_histogram(lens_parse.into_iter(), 12),
        );
        assert!(test.p_value > 1e-4, "{test:?}");
    }

    #[test]
    fn left_and_right_pads_uncorrelated() {
        let spec = ChannelSpec::new(0.05, 0.05, 0.05).unwrap();
        let ctx = PadContext::new(8, 8, 2);
        let mut rng = trial_rng(14, 0);
        let x = BitString::zeros(8);
        let n = 50_000;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let s = sample_dzp(&spec, &x, &ctx, &mut rng);
                (s.output.y_left.len() as f64, s.output.y_right.len() as f64)
            })
            .collect();
        let corr = crate::stats::correlation(&pairs);
        // |r| beyond 4/sqrt(n) would be a clear dependence
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "{corr}");
    }

    #[test]
    fn bad_events_decay_with_guard_size() {
        let spec = ChannelSpec::new(0.05, 0.05, 0.05).unwrap();
        let beta = spec.stats().beta;
        let mut rates = Vec::new();
        for ell in [4usize, 16, 64] {
            let h = ((ell as f64 * beta / 4.0 - 1e-9).ceil() as usize).max(1);
            let ctx = PadContext::new(ell, ell, h);
            let mut rng = trial_rng(15, ell as u64);
            let trials = 40_000;
            let bad = (0..trials)
                .filter(|_| sample_pad_left(&spec, &ctx, &mut rng).record.flags.any())
                .count();
            rates.push(bad as f64 / trials as f64);
        }
        assert!(rates[1] < rates[0] && rates[2] <= rates[1], "{rates:?}");
    }

    #[test]
    fn genie_dithers_are_uniform() {
        let spec = p01();
        let cfg = GuardConfig::new(7, 5, 0.2).unwrap();
        let h = cfg.window_len(spec.stats().beta);
        assert!(h >= 2);
        let mut counts = vec![0u64; h];
        let mut rng = trial_rng(16, 0);
        let mut total = 0;
        while total < 100_000 {
            let x = BitString::random(cfg.codeword_len(), &mut rng);
            for s in genie_parse(&spec, &x, &cfg, &mut rng).unwrap().tape.sites {
                counts[s.record.rho - 1] += 1;
                total += 1;
            }
        }
        let test = chi_square_uniform(&counts);
        assert!(test.p_value > 1e-4, "{test:?}");
    }
}
