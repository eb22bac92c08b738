//! Shared vocabulary: raw 32-bit patterns, the two formats, and decoded values.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exact::Dyadic;

/// A raw 32-bit pattern. Both codecs and the fault engine operate on it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RawWord32(pub u32);

impl RawWord32 {
    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn bit(self, index: u8) -> bool {
        (self.0 >> index) & 1 == 1
    }
}

impl fmt::Debug for RawWord32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RawWord32(0x{:08X})", self.0)
    }
}

/// Eight uppercase hex digits, no prefix.
impl fmt::Display for RawWord32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08X}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a 32-bit word (expected 8 hex digits, optional 0x prefix)")]
pub struct ParseWordError(pub String);

impl FromStr for RawWord32 {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let digits = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .unwrap_or(t);
        if digits.len() != 8 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(ParseWordError(s.to_string()));
        }
        u32::from_str_radix(digits, 16)
            .map(RawWord32)
            .map_err(|_| ParseWordError(s.to_string()))
    }
}

/// The two number formats under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Format {
    Float32,
    Posit32,
}

impl Format {
    pub const ALL: [Format; 2] = [Format::Float32, Format::Posit32];

    pub fn decode(self, word: RawWord32) -> DecodedNumber {
        match self {
            Format::Float32 => crate::float32::float_decode(word),
            Format::Posit32 => crate::posit32::posit_decode(word),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Float32 => "float32",
            Format::Posit32 => "posit32",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown format `{0}` (expected float32 or posit32)")]
pub struct ParseFormatError(pub String);

impl FromStr for Format {
    type Err = ParseFormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "float" | "float32" | "binary32" | "f32" => Ok(Format::Float32),
            "posit" | "posit32" | "p32" => Ok(Format::Posit32),
            _ => Err(ParseFormatError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumberClass {
    Finite,
    Zero,
    Subnormal,
    Infinity,
    Nan,
    Nar,
}

impl NumberClass {
    /// Finite, zero, and subnormal carry a meaningful value.
    pub fn has_value(self) -> bool {
        matches!(self, NumberClass::Finite | NumberClass::Zero | NumberClass::Subnormal)
    }

    /// NaN, NaR, and infinities: the outcomes tallied separately from error means.
    pub fn is_special(self) -> bool {
        !self.has_value()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NumberClass::Finite => "finite",
            NumberClass::Zero => "zero",
            NumberClass::Subnormal => "subnormal",
            NumberClass::Infinity => "infinity",
            NumberClass::Nan => "nan",
            NumberClass::Nar => "nar",
        }
    }
}

impl fmt::Display for NumberClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact interpretation of a pattern in one of the formats.
///
/// `value` is meaningful only when [`NumberClass::has_value`] holds; it is
/// zero for the special classes. `negative` records the sign bit for zero and
/// infinities, where the value alone cannot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodedNumber {
    pub value: Dyadic,
    pub class: NumberClass,
    pub negative: bool,
}

impl DecodedNumber {
    pub fn special(class: NumberClass, negative: bool) -> Self {
        DecodedNumber {
            value: Dyadic::ZERO,
            class,
            negative,
        }
    }

    /// The value when the class carries one.
    pub fn finite_value(&self) -> Option<Dyadic> {
        self.class.has_value().then_some(self.value)
    }

    /// `f64` view; NaN/NaR become NaN and infinities keep their sign.
    pub fn to_f64(&self) -> f64 {
        match self.class {
            NumberClass::Nan | NumberClass::Nar => f64::NAN,
            NumberClass::Infinity if self.negative => f64::NEG_INFINITY,
            NumberClass::Infinity => f64::INFINITY,
            NumberClass::Zero if self.negative => -0.0,
            _ => self.value.to_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_parsing() {
        assert_eq!("3F800000".parse::<RawWord32>().unwrap(), RawWord32(0x3F80_0000));
        assert_eq!("0x0000000a".parse::<RawWord32>().unwrap(), RawWord32(10));
        assert!("3F8".parse::<RawWord32>().is_err());
        assert!("3F80000G".parse::<RawWord32>().is_err());
        assert!("+3F80000".parse::<RawWord32>().is_err());
        assert_eq!(RawWord32(0xAB).to_string(), "000000AB");
    }

    #[test]
    fn format_parsing() {
        assert_eq!("float".parse::<Format>().unwrap(), Format::Float32);
        assert_eq!("Posit32".parse::<Format>().unwrap(), Format::Posit32);
        assert!("bf16".parse::<Format>().is_err());
    }
}
