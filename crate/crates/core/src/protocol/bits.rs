use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A classical bit string, written most-significant first ("0110").
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a binary string")]
pub struct ParseBitsError(String);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    /// Consecutive 2-bit chunks; a trailing odd bit is dropped.
    pub fn pairs(&self) -> impl Iterator<Item = (bool, bool)> + '_ {
        self.0.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// Parses `0b…`/binary or `0x…` hexadecimal (4 bits per digit).
    pub fn parse_flexible(s: &str) -> Result<Self, ParseBitsError> {
        let t = s.trim();
        if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            let mut bits = Vec::with_capacity(hex.len() * 4);
            for ch in hex.chars() {
                let v = ch
                    .to_digit(16)
                    .ok_or_else(|| ParseBitsError(s.to_string()))?;
                bits.extend((0..4).rev().map(|i| (v >> i) & 1 == 1));
            }
            return Ok(Self(bits));
        }
        t.strip_prefix("0b").unwrap_or(t).parse()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitString::parse_flexible(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_binary_and_hex() {
        assert_eq!("0110".parse::<BitString>().unwrap().to_string(), "0110");
        assert_eq!(
            BitString::parse_flexible("0xA").unwrap().to_string(),
            "1010"
        );
        assert_eq!(BitString::parse_flexible("0b11").unwrap().to_string(), "11");
        assert_eq!(BitString::parse_flexible("").unwrap().len(), 0);
        assert!("012".parse::<BitString>().is_err());
        assert!(BitString::parse_flexible("0xG").is_err());
    }
}
