//! Binary strings over `{0, 1}`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid bit character {0:?}")]
pub struct ParseBitsError(pub char);

/// A finite string of bits. Each element is `0` or `1`.
///
/// The empty string is the length-0 string. Serialized as a string of
/// `'0'`/`'1'` characters.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(cap: usize) -> Self {
        Self(Vec::with_capacity(cap))
    }

    /// Panics if any element is not a bit.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bit strings hold only 0 and 1");
        Self(bits)
    }

    pub fn repeat(bit: u8, len: usize) -> Self {
        assert!(bit <= 1);
        Self(vec![bit; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::repeat(0, len)
    }

    pub fn ones(len: usize) -> Self {
        Self::repeat(1, len)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.gen_range(0..=1u8)).collect())
    }

    /// Bit `t` of the string is bit `t` of `index`.
    pub fn from_index(index: usize, len: usize) -> Self {
        Self((0..len).map(|t| ((index >> t) & 1) as u8).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (t, &b)| acc | ((b as usize) << t))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: u8) {
        assert!(bit <= 1);
        self.0.push(bit);
    }

    pub fn extend_from_slice(&mut self, bits: &[u8]) {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        self.0.extend_from_slice(bits);
    }

    pub fn append(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    /// `self ⊙ other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub fn concat_all<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> BitString {
        let mut out = BitString::new();
        for p in parts {
            out.append(p);
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> BitString {
        Self(self.0[range].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> BitString {
        Self(self.0[start..].to_vec())
    }

    pub fn reversed(&self) -> BitString {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn count_zeros(&self) -> usize {
        count_zeros(&self.0)
    }

    pub fn count_ones(&self) -> usize {
        self.len() - self.count_zeros()
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }
}

pub(crate) fn count_zeros(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 0).count()
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(ParseBitsError(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl From<&[u8]> for BitString {
    fn from(bits: &[u8]) -> Self {
        Self::from_bits(bits.to_vec())
    }
}

impl FromIterator<u8> for BitString {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_bits(iter.into_iter().collect())
    }
}

impl AsRef<[u8]> for BitString {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl std::borrow::Borrow<[u8]> for BitString {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for literals in tests and examples. Panics on bad input.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("bit literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_and_parse() {
        let b = bits("0110");
        assert_eq!(b.to_string(), "0110");
        assert_eq!(format!("{:?}", BitString::new()), "ε");
        assert!("01a".parse::<BitString>().is_err());
    }

    #[test]
    fn counting() {
        let b = bits("0010111");
        assert_eq!(b.count_zeros(), 3);
        assert_eq!(b.count_ones(), 4);
        assert_eq!(b.reversed(), bits("1110100"));
    }

    #[test]
    fn index_convention() {
        let b = BitString::from_index(0b110, 4);
        assert_eq!(b, bits("0110"));
        assert_eq!(b.to_index(), 6);
    }

    proptest! {
        #[test]
        fn index_round_trip(v in 0usize..4096) {
            prop_assert_eq!(BitString::from_index(v, 12).to_index(), v);
        }

        #[test]
        fn string_round_trip(v in proptest::collection::vec(0u8..=1, 0..64)) {
            let b = BitString::from_bits(v);
            prop_assert_eq!(b.to_string().parse::<BitString>().unwrap(), b);
        }
    }
}
