//! The binary insertion/deletion/substitution (IDS) channel.
//!
//! Each input bit `x` independently produces one of five outputs:
//!
//! | output | probability        |
//! |--------|--------------------|
//! | ε      | `p_delete`         |
//! | `x`    | `1 - p_i - p_d - p_s` |
//! | `x̄`    | `p_substitute`     |
//! | `0x`   | `p_insert / 2`     |
//! | `1x`   | `p_insert / 2`     |
//!
//! and the channel output is the concatenation of the per-symbol outputs.
//! The inserted bit always precedes the input's own (possibly kept) bit.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{count_zeros, BitString};
use crate::scalar::{min_of, Prob, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("p_insert + p_delete + p_substitute = {0} exceeds 1")]
    ExcessMass(f64),
    #[error(
        "channel gives no advantage to the input symbol (alpha_0|0 = {a00}, alpha_1|0 = {a10}, \
         alpha_1|1 = {a11}, alpha_0|1 = {a01}); a zero-majority window cannot tell long runs of \
         zeros from long runs of ones"
    )]
    AdvantageViolation { a00: f64, a10: f64, a11: f64, a01: f64 },
    #[error("window length {h} is below h0 = {h0:.3}; the misclassification bound does not apply")]
    WindowTooShort { h: usize, h0: f64 },
}

/// Parameters `(p_insert, p_delete, p_substitute)` of a binary IDS channel.
///
/// Construction enforces the range constraints and the advantage condition
/// `alpha_0|0 > alpha_1|0`, `alpha_1|1 > alpha_0|1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawChannelSpec<T>",
    bound(serialize = "T: Serialize", deserialize = "T: Prob + Deserialize<'de>")
)]
pub struct ChannelSpec<T = f64> {
    p_insert: T,
    p_delete: T,
    p_substitute: T,
}

#[derive(Deserialize)]
struct RawChannelSpec<T> {
    p_insert: T,
    p_delete: T,
    p_substitute: T,
}

impl<T: Prob> TryFrom<RawChannelSpec<T>> for ChannelSpec<T> {
    type Error = ChannelError;

    fn try_from(raw: RawChannelSpec<T>) -> Result<Self, Self::Error> {
        ChannelSpec::new(raw.p_insert, raw.p_delete, raw.p_substitute)
    }
}

impl<T: Prob> ChannelSpec<T> {
    pub fn new(p_insert: T, p_delete: T, p_substitute: T) -> Result<Self, ChannelError> {
        for (name, value) in [
            ("p_insert", p_insert),
            ("p_delete", p_delete),
            ("p_substitute", p_substitute),
        ] {
            if !(value >= T::zero() && value <= T::one()) {
                return Err(ChannelError::InvalidProbability {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        let total = p_insert + p_delete + p_substitute;
        if total > T::one() {
            return Err(ChannelError::ExcessMass(total.as_f64()));
        }
        let spec = Self {
            p_insert,
            p_delete,
            p_substitute,
        };
        channel_stats(&spec)?;
        Ok(spec)
    }

    pub fn noiseless() -> Self {
        Self {
            p_insert: T::zero(),
            p_delete: T::zero(),
            p_substitute: T::zero(),
        }
    }

    pub fn p_insert(&self) -> T {
        self.p_insert
    }

    pub fn p_delete(&self) -> T {
        self.p_delete
    }

    pub fn p_substitute(&self) -> T {
        self.p_substitute
    }

    /// Probability that a symbol is passed through unchanged.
    pub fn p_keep(&self) -> T {
        T::one() - self.p_insert - self.p_delete - self.p_substitute
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_insert == T::zero() && self.p_delete == T::zero() && self.p_substitute == T::zero()
    }

    pub fn symbol_output_pmf(&self, x: u8) -> SymbolOutputPmf<T> {
        symbol_output_pmf(self, x)
    }

    /// Infallible on a constructed spec.
    pub fn stats(&self) -> ChannelStats<T> {
        channel_stats(self).expect("validated at construction")
    }

    pub fn sampler(&self) -> SymbolSampler {
        SymbolSampler::new(self)
    }

    pub fn to_f64(&self) -> ChannelSpec<f64> {
        ChannelSpec {
            p_insert: self.p_insert.as_f64(),
            p_delete: self.p_delete.as_f64(),
            p_substitute: self.p_substitute.as_f64(),
        }
    }
}

/// Output distribution of a single input symbol. Zero-probability outcomes
/// are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolOutputPmf<T> {
    pub input: u8,
    pub entries: Vec<(BitString, T)>,
}

impl<T: Prob> SymbolOutputPmf<T> {
    pub fn prob(&self, output: &BitString) -> T {
        self.entries
            .iter()
            .find(|(s, _)| s == output)
            .map(|(_, p)| *p)
            .unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, (_, p)| acc + *p)
    }
}

pub fn symbol_output_pmf<T: Prob>(spec: &ChannelSpec<T>, x: u8) -> SymbolOutputPmf<T> {
    assert!(x <= 1);
    let half_ins = spec.p_insert * T::half();
    let candidates = [
        (BitString::new(), spec.p_delete),
        (BitString::from_bits(vec![x]), spec.p_keep()),
        (BitString::from_bits(vec![1 - x]), spec.p_substitute),
        (BitString::from_bits(vec![0, x]), half_ins),
        (BitString::from_bits(vec![1, x]), half_ins),
    ];
    SymbolOutputPmf {
        input: x,
        entries: candidates
            .into_iter()
            .filter(|(_, p)| *p > T::zero())
            .collect(),
    }
}

/// Expected symbol counts per input symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelStats<T = f64> {
    pub alpha_0_given_0: T,
    pub alpha_1_given_0: T,
    pub alpha_0_given_1: T,
    pub alpha_1_given_1: T,
    /// Expected output length per input symbol.
    pub beta: T,
    /// Half the smaller advantage of the input symbol at the output.
    pub gamma: T,
}

pub fn channel_stats<T: Prob>(spec: &ChannelSpec<T>) -> Result<ChannelStats<T>, ChannelError> {
    let half_ins = spec.p_insert * T::half();
    // "xx" contributes two copies of x, "x̄x" one of each.
    let same = spec.p_keep() + spec.p_insert + half_ins;
    let other = spec.p_substitute + half_ins;
    let (a00, a10, a11, a01) = (same, other, same, other);
    if !(a00 > a10 && a11 > a01) {
        return Err(ChannelError::AdvantageViolation {
            a00: a00.as_f64(),
            a10: a10.as_f64(),
            a11: a11.as_f64(),
            a01: a01.as_f64(),
        });
    }
    Ok(ChannelStats {
        alpha_0_given_0: a00,
        alpha_1_given_0: a10,
        alpha_0_given_1: a01,
        alpha_1_given_1: a11,
        beta: a00 + a10,
        gamma: min_of(a00 - a10, a11 - a01) * T::half(),
    })
}

/// Constants of the window misclassification bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Constants<T = f64> {
    pub delta: T,
    pub h0_prime: T,
    pub c0_prime: T,
    pub c0_double_prime: T,
    pub c0: T,
    pub h0: T,
}

pub fn lemma1_constants<T: Real>(stats: &ChannelStats<T>) -> Lemma1Constants<T> {
    let one = T::one();
    let two = T::two();
    let half = T::half();
    let ChannelStats {
        alpha_0_given_0: a00,
        alpha_1_given_1: a11,
        beta,
        gamma,
        ..
    } = *stats;

    let delta = min_of(min_of(gamma / (two * a00), gamma / (two * a11)), half);
    let h0_prime = two * (beta + one) / delta - one;
    let scale = (one - delta) / beta;
    let c0_prime = scale * (beta / (one - delta / two) - beta).powi(2) / two;
    let c0_double_prime = scale * ((gamma / two) / (one - delta)).powi(2) / two;
    let c0 = half * min_of(c0_prime, c0_double_prime);
    let h0 = h0_prime.max(T::from_f64(4.0).ln() / c0);
    Lemma1Constants {
        delta,
        h0_prime,
        c0_prime,
        c0_double_prime,
        c0,
        h0,
    }
}

/// Declares 0 iff at least half of the window is zeros.
pub fn window_majority_test(window: &[u8]) -> u8 {
    debug_assert!(!window.is_empty());
    if 2 * count_zeros(window) >= window.len() {
        0
    } else {
        1
    }
}

/// `e^{-h c0}`, valid only for `h >= h0`.
pub fn misclassification_bound<T: Real>(consts: &Lemma1Constants<T>, h: usize) -> Result<T, ChannelError> {
    let hr = T::from_f64(h as f64);
    if hr < consts.h0 {
        return Err(ChannelError::WindowTooShort {
            h,
            h0: consts.h0.as_f64(),
        });
    }
    Ok((-hr * consts.c0).exp())
}

/// Precomputed cumulative thresholds for drawing per-symbol outputs.
#[derive(Debug, Clone, Copy)]
pub struct SymbolSampler {
    delete: f64,
    keep: f64,
    flip: f64,
    insert_zero: f64,
}

impl SymbolSampler {
    pub fn new<T: Prob>(spec: &ChannelSpec<T>) -> Self {
        let pd = spec.p_delete.as_f64();
        let keep = pd + spec.p_keep().as_f64();
        let flip = keep + spec.p_substitute.as_f64();
        let insert_zero = flip + spec.p_insert.as_f64() / 2.0;
        Self {
            delete: pd,
            keep,
            flip,
            insert_zero,
        }
    }

    /// Appends the output of one input symbol to `out`.
    #[inline]
    pub fn emit<R: Rng + ?Sized>(&self, x: u8, rng: &mut R, out: &mut Vec<u8>) {
        let u: f64 = rng.gen();
        if u < self.delete {
        } else if u < self.keep {
            out.push(x);
        } else if u < self.flip {
            out.push(1 - x);
        } else if u < self.insert_zero {
            out.extend_from_slice(&[0, x]);
        } else if self.insert_zero < 1.0 {
            out.extend_from_slice(&[1, x]);
        } else {
            // rounding slack above the last threshold
            out.push(x);
        }
    }

    pub fn emit_string<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> BitString {
        let mut v = Vec::with_capacity(2);
        self.emit(x, rng, &mut v);
        BitString::from_bits(v)
    }

    pub fn transmit_into<R: Rng + ?Sized>(&self, x: &[u8], rng: &mut R, out: &mut Vec<u8>) {
        for &b in x {
            self.emit(b, rng, out);
        }
    }
}

/// Passes `x` through the channel.
pub fn transmit<T: Prob, R: Rng + ?Sized>(spec: &ChannelSpec<T>, x: &BitString, rng: &mut R) -> BitString {
    let sampler = SymbolSampler::new(spec);
    let mut out = Vec::with_capacity(x.len() + x.len() / 8 + 2);
    sampler.transmit_into(x.as_slice(), rng, &mut out);
    BitString::from_bits(out)
}

/// Exact law of `transmit(x)` by enumeration. Exponential in `|x|`.
pub fn output_distribution<T: Prob>(spec: &ChannelSpec<T>, x: &[u8]) -> BTreeMap<BitString, T> {
    let pmfs = [symbol_output_pmf(spec, 0), symbol_output_pmf(spec, 1)];
    let mut dist: BTreeMap<Vec<u8>, T> = BTreeMap::new();
    dist.insert(Vec::new(), T::one());
    for &b in x {
        let mut next: BTreeMap<Vec<u8>, T> = BTreeMap::new();
        for (prefix, p) in &dist {
            for (o, q) in &pmfs[b as usize].entries {
                let mut s = Vec::with_capacity(prefix.len() + o.len());
                s.extend_from_slice(prefix);
                s.extend_from_slice(o.as_slice());
                let slot = next.entry(s).or_insert_with(T::zero);
                *slot = *slot + *p * *q;
            }
        }
        dist = next;
    }
    dist.into_iter().map(|(k, v)| (BitString::from_bits(k), v)).collect()
}

/// Draws the length-`h` window used by the misclassification bound: the
/// all-`x` input is fed symbol by symbol until the output holds at least
/// `h + 1` bits, the first bit is optionally dropped, and the result is
/// truncated to `h` bits.
pub fn sample_truncated_output<T: Prob, R: Rng + ?Sized>(
    spec: &ChannelSpec<T>,
    x: u8,
    h: usize,
    drop_first: bool,
    rng: &mut R,
) -> BitString {
    let sampler = SymbolSampler::new(spec);
    let mut out = Vec::with_capacity(h + 3);
    while out.len() < h + 1 {
        sampler.emit(x, rng, &mut out);
    }
    if drop_first {
        out.remove(0);
    }
    out.truncate(h);
    BitString::from_bits(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::rng::trial_rng;
    use num_rational::Ratio;
    use proptest::prelude::*;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    fn p05() -> ChannelSpec<f64> {
        ChannelSpec::new(0.05, 0.05, 0.05).unwrap()
    }

    /// Expected counts by enumerating the pmf entries.
    fn enumerated_alphas<T: Prob>(spec: &ChannelSpec<T>, x: u8) -> (T, T) {
        let pmf = spec.symbol_output_pmf(x);
        let mut zeros = T::zero();
        let mut ones = T::zero();
        for (s, p) in &pmf.entries {
            for b in s.iter() {
                if b == 0 {
                    zeros = zeros + *p;
                } else {
                    ones = ones + *p;
                }
            }
        }
        (zeros, ones)
    }

    #[test]
    fn pmf_matches_table() {
        let pmf = p05().symbol_output_pmf(0);
        let expect = [("", 0.05), ("0", 0.85), ("1", 0.05), ("00", 0.025), ("10", 0.025)];
        assert_eq!(pmf.entries.len(), 5);
        for (s, p) in expect {
            assert!((pmf.prob(&bits(s)) - p).abs() < 1e-15, "{s}");
        }
        assert_eq!(pmf.prob(&bits("01")), 0.0);
    }

    #[test]
    fn pmf_degenerate_cases() {
        let clean = ChannelSpec::<f64>::noiseless().symbol_output_pmf(1);
        assert_eq!(clean.entries, vec![(bits("1"), 1.0)]);
        let del = ChannelSpec::<f64>::new(0.0, 0.1, 0.0).unwrap().symbol_output_pmf(0);
        assert_eq!(del.entries.len(), 2);
        assert!((del.prob(&BitString::new()) - 0.1).abs() < 1e-15);
        assert!((del.prob(&bits("0")) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn stats_exact_in_rationals() {
        let spec = ChannelSpec::new(q(1, 20), q(1, 20), q(1, 20)).unwrap();
        let s = spec.stats();
        assert_eq!(s.alpha_0_given_0, q(37, 40));
        assert_eq!(s.alpha_1_given_0, q(3, 40));
        assert_eq!(s.beta, q(1, 1));
        assert_eq!(s.gamma, q(17, 40));
        // independent route: enumerate the pmf
        assert_eq!(enumerated_alphas(&spec, 0), (q(37, 40), q(3, 40)));
        assert_eq!(enumerated_alphas(&spec, 1), (q(3, 40), q(37, 40)));
    }

    #[test]
    fn stats_pure_deletion_and_identity() {
        let s = ChannelSpec::<f64>::new(0.0, 0.1, 0.0).unwrap().stats();
        assert!((s.alpha_0_given_0 - 0.9).abs() < 1e-15);
        assert_eq!(s.alpha_1_given_0, 0.0);
        assert!((s.beta - 0.9).abs() < 1e-15);
        assert!((s.gamma - 0.45).abs() < 1e-15);
        let s = ChannelSpec::<f64>::noiseless().stats();
        assert_eq!((s.beta, s.gamma), (1.0, 0.5));
    }

    #[test]
    fn advantage_violation_rejected() {
        let err = ChannelSpec::new(0.0, 0.0, 0.5).unwrap_err();
        assert!(matches!(err, ChannelError::AdvantageViolation { a00, a10, .. } if a00 == 0.5 && a10 == 0.5));
        assert!(matches!(
            ChannelSpec::new(0.5, 0.4, 0.2),
            Err(ChannelError::ExcessMass(_))
        ));
        assert!(matches!(
            ChannelSpec::new(-0.1, 0.0, 0.0),
            Err(ChannelError::InvalidProbability { name: "p_insert", .. })
        ));
    }

    #[test]
    fn lemma1_constants_reference_values() {
        let c = lemma1_constants(&p05().stats());
        // evaluated independently with a desk calculator
        assert!((c.delta - 0.229_729_729_729_729_7).abs() < 1e-12);
        assert!((c.h0_prime - 16.411_764_705_882_35).abs() < 1e-9);
        assert!((c.c0_prime - 0.006_485_872_271_665_654).abs() < 1e-12);
        assert!((c.c0_double_prime - 0.029_311_951_754_385_966).abs() < 1e-12);
        assert!((c.c0 - 3.242_936_135_832_827e-3).abs() < 1e-12);
        assert!((c.h0 - 427.481_240_164_439).abs() < 1e-6);

        let d = lemma1_constants(&ChannelSpec::<f64>::new(0.0, 0.1, 0.0).unwrap().stats());
        assert!((d.delta - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lemma1_constants_in_f32() {
        let spec = ChannelSpec::new(0.05f32, 0.05, 0.05).unwrap();
        let c = lemma1_constants(&spec.stats());
        assert!((c.h0 - 427.48).abs() < 0.1);
    }

    #[test]
    fn majority_test() {
        assert_eq!(window_majority_test(bits("0000").as_slice()), 0);
        assert_eq!(window_majority_test(bits("0011").as_slice()), 0);
        assert_eq!(window_majority_test(bits("0111").as_slice()), 1);
        assert_eq!(window_majority_test(bits("1").as_slice()), 1);
    }

    #[test]
    fn bound_values_and_guard() {
        let c = lemma1_constants(&p05().stats());
        let b = misclassification_bound(&c, 428).unwrap();
        assert!((b - (-428.0 * c.c0).exp()).abs() < 1e-15);
        assert!((b - 0.2496).abs() < 1e-3);
        assert!(misclassification_bound(&c, 1000).unwrap() < b);
        assert!(matches!(
            misclassification_bound(&c, 427),
            Err(ChannelError::WindowTooShort { h: 427, .. })
        ));
    }

    #[test]
    fn transmit_degenerate_channels() {
        let mut rng = trial_rng(1, 0);
        let x = bits("0110");
        for _ in 0..20 {
            assert_eq!(transmit(&ChannelSpec::<f64>::noiseless(), &x, &mut rng), x);
        }
        assert!(matches!(
            ChannelSpec::new(0.0, 1.0, 0.0),
            Err(ChannelError::AdvantageViolation { .. })
        ));
    }

    #[test]
    fn certain_deletion_sampler_outputs_nothing() {
        // A spec with p_delete = 1 violates the advantage condition, but the
        // sampler itself must still honour it.
        let spec = ChannelSpec {
            p_insert: 0.0,
            p_delete: 1.0,
            p_substitute: 0.0,
        };
        let mut rng = trial_rng(2, 0);
        assert!(transmit(&spec, &bits("0110101"), &mut rng).is_empty());
    }

    #[test]
    fn transmit_single_symbol_frequency() {
        let spec = p05();
        let mut rng = trial_rng(3, 0);
        let trials = 1_000_000u32;
        let x = bits("0");
        let hits = (0..trials)
            .filter(|_| transmit(&spec, &x, &mut rng) == x)
            .count() as f64;
        let p = 0.85;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits / trials as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn truncated_output_shape() {
        let spec = p05();
        let mut rng = trial_rng(4, 0);
        for drop in [false, true] {
            let w = sample_truncated_output(&spec, 1, 50, drop, &mut rng);
            assert_eq!(w.len(), 50);
        }
    }

    fn spec_strategy() -> impl Strategy<Value = ChannelSpec<f64>> {
        (0.0..0.3f64, 0.0..0.3f64, 0.0..0.3f64)
            .prop_filter_map("valid", |(a, b, c)| ChannelSpec::new(a, b, c).ok())
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one(spec in spec_strategy(), x in 0u8..=1) {
            let pmf = spec.symbol_output_pmf(x);
            prop_assert!((pmf.total() - 1.0).abs() < 1e-12);
            for (s, _) in &pmf.entries {
                prop_assert!(s.len() <= 2);
                prop_assert!(s.is_empty() || s.get(s.len() - 1) == Some(x) || s.as_slice() == [1 - x]);
            }
        }

        #[test]
        fn beta_is_input_independent(spec in spec_strategy()) {
            let s = spec.stats();
            prop_assert!((s.alpha_0_given_0 + s.alpha_1_given_0 - s.beta).abs() < 1e-12);
            prop_assert!((s.alpha_0_given_1 + s.alpha_1_given_1 - s.beta).abs() < 1e-12);
            prop_assert!(s.gamma > 0.0);
            let c = lemma1_constants(&s);
            prop_assert!(c.h0 >= c.h0_prime && c.c0 > 0.0 && c.h0_prime > 1.0);
            prop_assert!(c.delta > 0.0 && c.delta < 1.0);
        }

        #[test]
        fn transmit_length_bounded(spec in spec_strategy(), v in proptest::collection::vec(0u8..=1, 0..200), seed in any::<u64>()) {
            let x = BitString::from_bits(v);
            let y = transmit(&spec, &x, &mut trial_rng(seed, 0));
            prop_assert!(y.len() <= 2 * x.len());
            let y2 = transmit(&spec, &x, &mut trial_rng(seed, 0));
            prop_assert_eq!(y, y2);
        }
    }
}
