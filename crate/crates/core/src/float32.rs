//! IEEE 754 binary32: field split, exact decode, nearest-even encode.

use std::cmp::Ordering;

use crate::exact::{Dyadic, ExactReal};
use crate::word::{DecodedNumber, NumberClass, RawWord32};

pub const EXPONENT_BITS: u32 = 8;
pub const FRACTION_BITS: u32 = 23;
pub const BIAS: i32 = 127;
const EXPONENT_MAX: u32 = 0xFF;
const FRACTION_MASK: u32 = (1 << FRACTION_BITS) - 1;

pub const POSITIVE_INFINITY: RawWord32 = RawWord32(0x7F80_0000);
pub const NEGATIVE_INFINITY: RawWord32 = RawWord32(0xFF80_0000);
pub const NEGATIVE_ZERO: RawWord32 = RawWord32(0x8000_0000);
/// Canonical quiet NaN.
pub const QUIET_NAN: RawWord32 = RawWord32(0x7FC0_0000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Float32Fields {
    pub sign: bool,
    /// Biased exponent, `0..=255`.
    pub exponent: u32,
    /// `0..2^23`.
    pub fraction: u32,
}

impl Float32Fields {
    pub fn from_word(word: RawWord32) -> Self {
        let w = word.0;
        Float32Fields {
            sign: w >> 31 == 1,
            exponent: (w >> FRACTION_BITS) & EXPONENT_MAX,
            fraction: w & FRACTION_MASK,
        }
    }

    pub fn to_word(self) -> RawWord32 {
        RawWord32(((self.sign as u32) << 31) | (self.exponent << FRACTION_BITS) | self.fraction)
    }

    pub fn class(self) -> NumberClass {
        match (self.exponent, self.fraction) {
            (EXPONENT_MAX, 0) => NumberClass::Infinity,
            (EXPONENT_MAX, _) => NumberClass::Nan,
            (0, 0) => NumberClass::Zero,
            (0, _) => NumberClass::Subnormal,
            _ => NumberClass::Finite,
        }
    }

    /// Unbiased exponent of the leading significand bit position; subnormals
    /// share the minimum normal exponent.
    pub fn unbiased_exponent(self) -> i32 {
        if self.exponent == 0 {
            1 - BIAS
        } else {
            self.exponent as i32 - BIAS
        }
    }

    /// Integer significand including the hidden bit when normal.
    pub fn significand(self) -> u32 {
        if self.exponent == 0 {
            self.fraction
        } else {
            self.fraction | (1 << FRACTION_BITS)
        }
    }
}

/// Exact value: `(−1)^s · 2^(e−127) · (1 + f·2^−23)`, or `2^−126 · f·2^−23`
/// for subnormals. Never fails; special patterns map to their class.
pub fn float_decode(word: RawWord32) -> DecodedNumber {
    let fields = Float32Fields::from_word(word);
    let class = fields.class();
    let value = match class {
        NumberClass::Finite | NumberClass::Subnormal => {
            let m = fields.significand() as i64;
            Dyadic::new(
                if fields.sign { -m } else { m },
                fields.unbiased_exponent() - FRACTION_BITS as i32,
            )
        }
        _ => Dyadic::ZERO,
    };
    DecodedNumber {
        value,
        class,
        negative: fields.sign,
    }
}

/// Nearest binary32 pattern, ties to even. Zero encodes as `+0`; magnitudes
/// that round past the largest finite value become infinity.
pub fn float_encode<X: ExactReal + ?Sized>(x: &X) -> RawWord32 {
    if x.is_zero() {
        return RawWord32(0);
    }
    let sign = (x.is_negative() as u32) << 31;
    let s = x.floor_log2();
    if s > BIAS as i64 {
        return RawWord32(sign | POSITIVE_INFINITY.0);
    }
    let min_normal = 1 - BIAS as i64;
    let e = s.max(min_normal);
    let lsb = e - FRACTION_BITS as i64;
    let scaled = x.scaled(-lsb);
    let mut m = scaled.floor as u32;
    if scaled.half == Ordering::Greater || (scaled.half == Ordering::Equal && m & 1 == 1) {
        m += 1;
    }
    // a significand carry into 2^24 (or 2^23 for subnormals) lands on the next
    // exponent field through the addition
    let bits = if s < min_normal {
        m
    } else {
        (((e + BIAS as i64) as u32) << FRACTION_BITS) + (m - (1 << FRACTION_BITS))
    };
    RawWord32(sign | bits.min(POSITIVE_INFINITY.0))
}

/// Encode preserving what the bare value loses: the sign of zero and
/// infinities. `None` for NaN, which has no canonical pattern here.
pub fn float_reencode(decoded: &DecodedNumber) -> Option<RawWord32> {
    let sign = (decoded.negative as u32) << 31;
    match decoded.class {
        NumberClass::Nan | NumberClass::Nar => None,
        NumberClass::Infinity => Some(RawWord32(sign | POSITIVE_INFINITY.0)),
        NumberClass::Zero => Some(RawWord32(sign)),
        _ => Some(float_encode(&decoded.value)),
    }
}

/// Encode an `f64`, keeping NaN and infinities.
pub fn float_encode_f64(x: f64) -> RawWord32 {
    if x == 0.0 && x.is_sign_negative() {
        return NEGATIVE_ZERO;
    }
    match Dyadic::from_f64(x) {
        Some(d) => float_encode(&d),
        None if x.is_nan() => QUIET_NAN,
        None if x > 0.0 => POSITIVE_INFINITY,
        None => NEGATIVE_INFINITY,
    }
}
