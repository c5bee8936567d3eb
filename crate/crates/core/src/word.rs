//! Fixed-width words and their hex rendering.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ConfigError;

/// An n-bit value held in a 64-bit container. The width lives in [`Width`];
/// every constructor that takes raw input masks through it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct Word(pub u64);

impl Word {
    pub const ZERO: Word = Word(0);

    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl fmt::LowerHex for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

impl BitXor for Word {
    type Output = Word;
    fn bitxor(self, rhs: Word) -> Word {
        Word(self.0 ^ rhs.0)
    }
}

impl BitXorAssign for Word {
    fn bitxor_assign(&mut self, rhs: Word) {
        self.0 ^= rhs.0;
    }
}

/// A pair of words, e.g. the two halves `(x0, x1)` of a permutation input.
pub type Pair = (Word, Word);

/// Word width `n`, with `2 <= n <= 32`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Width(u32);

impl Width {
    pub const MIN_BITS: u32 = 2;
    pub const MAX_BITS: u32 = 32;

    pub fn new(bits: u32) -> Result<Width, ConfigError> {
        if (Self::MIN_BITS..=Self::MAX_BITS).contains(&bits) {
            Ok(Width(bits))
        } else {
            Err(ConfigError::Width(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn mask(self) -> u64 {
        (1u64 << self.0) - 1
    }

    /// Number of distinct words, `2^n`.
    pub fn size(self) -> u64 {
        1u64 << self.0
    }

    pub fn word(self, raw: u64) -> Word {
        Word(raw & self.mask())
    }

    /// Splits a 2n-bit value into `(high, low)` halves.
    pub fn split(self, packed: u64) -> Pair {
        (
            Word((packed >> self.0) & self.mask()),
            Word(packed & self.mask()),
        )
    }

    pub fn join(self, pair: Pair) -> u64 {
        (pair.0 .0 << self.0) | pair.1 .0
    }

    pub fn hex_digits(self) -> usize {
        self.0.div_ceil(4) as usize
    }

    pub fn hex(self, w: Word) -> String {
        format!("{:0width$x}", w.0, width = self.hex_digits())
    }

    pub fn parse_hex(self, s: &str) -> Result<Word, ConfigError> {
        let v = u64::from_str_radix(s, 16).map_err(|_| ConfigError::Hex(s.to_string()))?;
        if v > self.mask() {
            return Err(ConfigError::Hex(s.to_string()));
        }
        Ok(Word(v))
    }

    /// Every word of this width, in increasing order.
    pub fn all(self) -> impl Iterator<Item = Word> {
        (0..self.size()).map(Word)
    }
}

impl TryFrom<u32> for Width {
    type Error = ConfigError;
    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        Width::new(bits)
    }
}

impl From<Width> for u32 {
    fn from(w: Width) -> u32 {
        w.0
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A word that serializes as zero-padded lowercase hex. The digit count is
/// carried alongside so the rendering survives a JSON round trip.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HexWord {
    pub word: Word,
    pub digits: u8,
}

impl HexWord {
    pub fn new(width: Width, word: Word) -> HexWord {
        HexWord {
            word,
            digits: width.hex_digits() as u8,
        }
    }
}

impl Serialize for HexWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!(
            "{:0width$x}",
            self.word.0,
            width = self.digits as usize
        ))
    }
}

impl<'de> Deserialize<'de> for HexWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let v = u64::from_str_radix(&s, 16).map_err(serde::de::Error::custom)?;
        Ok(HexWord {
            word: Word(v),
            digits: s.len() as u8,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_bounds() {
        assert!(Width::new(1).is_err());
        assert!(Width::new(33).is_err());
        assert_eq!(Width::new(2).unwrap().mask(), 3);
        assert_eq!(Width::new(32).unwrap().mask(), 0xffff_ffff);
    }

    #[test]
    fn hex_padding() {
        let w = Width::new(10).unwrap();
        assert_eq!(w.hex(Word(5)), "005");
        assert_eq!(w.parse_hex("3ff").unwrap(), Word(0x3ff));
        assert!(w.parse_hex("400").is_err());
        let w = Width::new(16).unwrap();
        assert_eq!(w.hex(Word(0xab)), "00ab");
    }

    #[test]
    fn split_join_roundtrip() {
        let w = Width::new(12).unwrap();
        let p = (Word(0xabc), Word(0x123));
        assert_eq!(w.split(w.join(p)), p);
    }

    #[test]
    fn hexword_serde() {
        let w = Width::new(16).unwrap();
        let h = HexWord::new(w, Word(0x1f));
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, "\"001f\"");
        let back: HexWord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
    }
}
