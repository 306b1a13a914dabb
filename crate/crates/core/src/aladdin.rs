//! Aladdin parsing: the receiver's recursive split of `y_pad` into blocks,
//! plus the coupling that runs it side by side with the genie.
//!
//! At every node of the guard recursion the string is cut at its midpoint.
//! The right half is trimmed by scanning frames `[ρ' + kh, ρ' + (k+1)h)`
//! until one holds a zero majority and deleting everything before that
//! frame's end; the left half is the mirror image. The aim is to land on
//! the same cut points the genie chose.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{count_zeros, BitString};
use crate::channel::ChannelSpec;
use crate::genie::{
    genie_pads, sample_pad_left, sample_pad_right, DitherTape, DzpBlockOutput, PadContext, PadSide, SegmentedOutput,
    Site,
};
use crate::guard::{encode_with_guards, GuardConfig, GuardError, GuardPart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub start: usize,
    pub end: usize,
    pub zeros: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOutcome {
    /// Delete the first `n` symbols.
    Cut(usize),
    FellOff,
}

/// Frames examined by one trim, in scan coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanTrace {
    pub rho: usize,
    pub h: usize,
    pub frames: Vec<Frame>,
    pub outcome: ScanOutcome,
}

/// Scans `z` with frames of length `h` starting at `rho`.
pub fn trim_scan(z: &[u8], h: usize, rho: usize) -> ScanTrace {
    assert!(h >= 1 && (1..=h).contains(&rho));
    let mut frames = Vec::new();
    let mut start = rho;
    let outcome = loop {
        let end = start + h;
        if end > z.len() {
            break ScanOutcome::FellOff;
        }
        let zeros = count_zeros(&z[start..end]);
        frames.push(Frame { start, end, zeros });
        if 2 * zeros >= h {
            break ScanOutcome::Cut(end);
        }
        start = end;
    };
    ScanTrace {
        rho,
        h,
        frames,
        outcome,
    }
}

/// Supplies the dither `ρ'` of each trim.
pub trait DitherSource {
    fn dither(&mut self, site: Site, h: usize) -> usize;
}

impl<F: FnMut(Site, usize) -> usize> DitherSource for F {
    fn dither(&mut self, site: Site, h: usize) -> usize {
        self(site, h)
    }
}

/// Fresh uniform dithers from a generator.
pub struct RngDithers<'a, R: ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> DitherSource for RngDithers<'_, R> {
    fn dither(&mut self, _site: Site, h: usize) -> usize {
        self.0.gen_range(1..=h)
    }
}

/// One trim performed by the parser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteScan {
    pub site: Site,
    /// Absolute index in `y_pad` of the node's cut point.
    pub midpoint: usize,
    pub trace: ScanTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseResult {
    /// Estimates of the block outputs, `Φ` of them when the parse succeeds
    /// and empty when it fails.
    pub blocks: Vec<BitString>,
    pub failed: bool,
    pub failure_site: Option<Site>,
    /// Every trim performed, in the order it was performed.
    pub scans: Vec<SiteScan>,
}

impl ParseResult {
    pub fn scan(&self, site: Site) -> Option<&SiteScan> {
        self.scans.iter().find(|s| s.site == site)
    }
}

struct Parser<'a, D> {
    y: &'a [u8],
    h: usize,
    dithers: D,
    blocks: Vec<BitString>,
    scans: Vec<SiteScan>,
}

impl<D: DitherSource> Parser<'_, D> {
    fn node(&mut self, lo: usize, hi: usize, start: usize, end: usize) -> Result<(), Site> {
        if hi - lo == 1 {
            self.blocks.push(BitString::from(&self.y[start..end]));
            return Ok(());
        }
        let mid_block = (lo + hi) / 2;
        let band = mid_block - 1;
        let m = start + (end - start).div_ceil(2);

        let site = Site::right_of(band);
        let rho = self.dithers.dither(site, self.h);
        let mirrored: Vec<u8> = self.y[start..m].iter().rev().copied().collect();
        let trace = trim_scan(&mirrored, self.h, rho);
        let left_end = match trace.outcome {
            ScanOutcome::Cut(c) => Some(m - c),
            ScanOutcome::FellOff => None,
        };
        self.scans.push(SiteScan {
            site,
            midpoint: m,
            trace,
        });
        let left_end = left_end.ok_or(site)?;

        let site = Site::left_of_next(band);
        let rho = self.dithers.dither(site, self.h);
        let trace = trim_scan(&self.y[m..end], self.h, rho);
        let right_start = match trace.outcome {
            ScanOutcome::Cut(c) => Some(m + c),
            ScanOutcome::FellOff => None,
        };
        self.scans.push(SiteScan {
            site,
            midpoint: m,
            trace,
        });
        let right_start = right_start.ok_or(site)?;

        self.node(lo, mid_block, start, left_end)?;
        self.node(mid_block, hi, right_start, end)
    }
}

/// Recursively splits `y_pad` into `cfg.num_blocks()` block estimates.
pub fn aladdin_parse<D: DitherSource>(y_pad: &BitString, cfg: &GuardConfig, h: usize, dithers: D) -> ParseResult {
    assert!(h >= 1);
    let mut parser = Parser {
        y: y_pad.as_slice(),
        h,
        dithers,
        blocks: Vec::with_capacity(cfg.num_blocks()),
        scans: Vec::new(),
    };
    match parser.node(0, cfg.num_blocks(), 0, y_pad.len()) {
        Ok(()) => ParseResult {
            blocks: parser.blocks,
            failed: false,
            failure_site: None,
            scans: parser.scans,
        },
        Err(site) => ParseResult {
            blocks: Vec::new(),
            failed: true,
            failure_site: Some(site),
            scans: parser.scans,
        },
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CouplingError {
    #[error("no examined frame overlaps the dirty-zero segment")]
    NoOverlap,
}

/// The genie's dither implied by a receiver scan: the overlap of the first
/// examined frame that reaches into the dirty-zero segment
/// `[dirty_start, dirty_start + dirty_len)` (scan coordinates).
pub fn derive_genie_dither(trace: &ScanTrace, dirty_start: isize, dirty_len: usize) -> Result<usize, CouplingError> {
    let dirty_end = dirty_start + dirty_len as isize;
    trace
        .frames
        .iter()
        .find_map(|f| {
            let lo = (f.start as isize).max(dirty_start);
            let hi = (f.end as isize).min(dirty_end);
            (hi > lo).then_some((hi - lo) as usize)
        })
        .ok_or(CouplingError::NoOverlap)
}

/// Overlap with `[dirty_start, ∞)` of the frame grid `ρ' + kh` extended
/// over all integers `k`. Uniform on `1..=h` when `ρ'` is, whatever the
/// channel did, and equal to [`derive_genie_dither`] whenever the scan
/// reaches the dirty zeros.
pub fn grid_dither(rho_prime: usize, dirty_start: isize, h: usize) -> usize {
    (rho_prime as isize - dirty_start - 1).rem_euclid(h as isize) as usize + 1
}

/// How one padding site was coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteCoupling {
    pub site: Site,
    pub rho_prime: usize,
    pub genie_rho: usize,
    /// Whether the receiver performed this trim.
    pub reached: bool,
    /// The receiver's scan did not examine the genie's first window.
    pub coupling_break: bool,
}

/// Per-trial tallies of events under which the two parsers may disagree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadEventCounts {
    pub short_ones: usize,
    pub first_window_fell_off: usize,
    pub second_window_fell_off: usize,
    pub second_window_minority: usize,
    pub coupling_breaks: usize,
}

impl BadEventCounts {
    pub fn any(&self) -> bool {
        self.short_ones + self.first_window_fell_off + self.second_window_fell_off + self.second_window_minority
            + self.coupling_breaks
            > 0
    }

    pub fn add(&mut self, other: &BadEventCounts) {
        self.short_ones += other.short_ones;
        self.first_window_fell_off += other.first_window_fell_off;
        self.second_window_fell_off += other.second_window_fell_off;
        self.second_window_minority += other.second_window_minority;
        self.coupling_breaks += other.coupling_breaks;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoupledTrialReport {
    pub codeword: BitString,
    pub y_pad: BitString,
    pub genie_blocks: Vec<DzpBlockOutput>,
    pub parse: ParseResult,
    pub tape: DitherTape,
    pub sites: Vec<SiteCoupling>,
    pub bad_events: BadEventCounts,
    pub matched: bool,
}

impl CoupledTrialReport {
    pub fn genie_y_stars(&self) -> Vec<BitString> {
        self.genie_blocks.iter().map(DzpBlockOutput::y_star).collect()
    }

    /// Flags that account for a mismatch, if any was raised.
    pub fn flagged(&self) -> bool {
        self.parse.failed || self.bad_events.any()
    }
}

/// Start of the dirty-zero segment facing `site`, in that site's scan
/// coordinates, and its length.
fn dirty_segment(site: Site, midpoint: usize, seg: &SegmentedOutput, offset: usize) -> (isize, usize) {
    match site.side {
        PadSide::Left => {
            let d = seg.guard(site.band, GuardPart::Right);
            let start = offset + seg.guard_offset(site.band, GuardPart::Right);
            (start as isize - midpoint as isize, d.len())
        }
        PadSide::Right => {
            let d = seg.guard(site.band, GuardPart::Left);
            let end = offset + seg.guard_offset(site.band, GuardPart::Left) + d.len();
            (midpoint as isize - end as isize, d.len())
        }
    }
}

/// One transmission parsed by both the genie and the receiver with shared
/// randomness.
pub fn run_coupled_trial<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    x: &BitString,
    cfg: &GuardConfig,
    rng: &mut R,
) -> Result<CoupledTrialReport, GuardError> {
    let beta = spec.stats().beta;
    let ctx = PadContext::for_guard(cfg, beta);
    let h = ctx.h;
    let (codeword, layout) = encode_with_guards(x, cfg)?;
    let seg = crate::genie::transmit_segmented(spec, &codeword, &layout, rng);
    let edge_left = sample_pad_left(spec, &ctx, rng);
    let edge_right = sample_pad_right(spec, &ctx, rng);
    let num_sites = 2 * cfg.num_bands();
    let rho_primes: Vec<usize> = (0..num_sites).map(|_| rng.gen_range(1..=h)).collect();

    let offset = edge_left.pad.len();
    let y_pad = edge_left.pad.concat(&seg.concat()).concat(&edge_right.pad);
    let parse = aladdin_parse(&y_pad, cfg, h, |site: Site, _h: usize| rho_primes[site.index()]);

    let mut sites = Vec::with_capacity(num_sites);
    for (idx, &rho_prime) in rho_primes.iter().enumerate() {
        let site = Site::from_index(idx);
        let coupling = match parse.scan(site) {
            Some(scan) => {
                let (t, len) = dirty_segment(site, scan.midpoint, &seg, offset);
                let genie_rho = grid_dither(rho_prime, t, h);
                let window_start = t - h as isize + genie_rho as isize;
                let hit = scan.trace.frames.iter().any(|f| f.start as isize == window_start);
                if hit && len > 0 {
                    debug_assert_eq!(derive_genie_dither(&scan.trace, t, len), Ok(genie_rho.min(len)));
                }
                SiteCoupling {
                    site,
                    rho_prime,
                    genie_rho,
                    reached: true,
                    coupling_break: !hit,
                }
            }
            None => SiteCoupling {
                site,
                rho_prime,
                genie_rho: rho_prime,
                reached: false,
                coupling_break: false,
            },
        };
        sites.push(coupling);
    }

    let (genie_blocks, tape) = genie_pads(
        spec,
        &seg,
        cfg.num_blocks(),
        h,
        edge_left.into(),
        edge_right.into(),
        |site| Some(sites[site.index()].genie_rho),
        rng,
    );

    let mut bad_events = BadEventCounts::default();
    for (rec, coupling) in tape.sites.iter().zip(&sites) {
        let f = rec.record.flags;
        bad_events.short_ones += f.short_ones as usize;
        bad_events.first_window_fell_off += f.first_window_fell_off as usize;
        bad_events.second_window_fell_off += f.second_window_fell_off as usize;
        bad_events.second_window_minority += f.second_window_minority as usize;
        bad_events.coupling_breaks += coupling.coupling_break as usize;
    }

    let matched = !parse.failed
        && parse
            .blocks
            .iter()
            .zip(&genie_blocks)
            .all(|(a, g)| *a == g.y_star());

    Ok(CoupledTrialReport {
        codeword,
        y_pad,
        genie_blocks,
        parse,
        tape,
        sites,
        bad_events,
        matched,
    })
}
