//! posit(32, 2): regime run-length decoding, exact decode, and encode with
//! round-to-nearest-even on the bit string.
//!
//! A pattern with the sign bit set is the two's complement of the positive
//! pattern of the same magnitude. `0x00000000` is zero and `0x80000000` is
//! NaR; every other pattern decodes to
//! `useed^k · 2^e · (1 + fraction)` with `useed = 2^(2^es) = 16`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::exact::{Dyadic, ExactReal};
use crate::word::{DecodedNumber, NumberClass, RawWord32};

/// Width and exponent size of the only configuration exposed here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositConfig {
    pub n: u32,
    pub es: u32,
}

impl PositConfig {
    pub const P32E2: PositConfig = PositConfig { n: 32, es: 2 };

    /// `log2(useed) = 2^es`.
    pub const fn useed_log2(self) -> u32 {
        1 << self.es
    }

    pub const fn useed(self) -> u64 {
        1 << self.useed_log2()
    }

    /// Largest reachable `k`: a regime of `n − 1` ones.
    pub const fn max_k(self) -> i32 {
        self.n as i32 - 2
    }

    /// Smallest reachable `k`: `n − 2` zeros then the terminating one.
    pub const fn min_k(self) -> i32 {
        -(self.n as i32 - 2)
    }
}

const CONFIG: PositConfig = PositConfig::P32E2;
const ES: u32 = CONFIG.es;
const BODY_BITS: u32 = CONFIG.n - 1;

pub const ZERO: RawWord32 = RawWord32(0);
pub const NAR: RawWord32 = RawWord32(0x8000_0000);
/// `16^30 = 2^120`.
pub const MAX_POS: RawWord32 = RawWord32(0x7FFF_FFFF);
/// `16^−30 = 2^−120`.
pub const MIN_POS: RawWord32 = RawWord32(0x0000_0001);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PositError {
    #[error("zero has no field decomposition")]
    Zero,
    #[error("NaR has no field decomposition")]
    Nar,
}

/// Field decomposition of a non-exceptional posit. For negative words the
/// fields describe the two's-complement magnitude pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositFields {
    pub sign: bool,
    /// Regime value, in `[−30, 30]`.
    pub k: i32,
    /// Regime bits including the terminating bit when present.
    pub regime_len: u32,
    /// Exponent value with truncated low bits read as zero, in `[0, 3]`.
    pub exponent: u32,
    /// Exponent bits physically present, `0..=2`.
    pub exponent_len: u32,
    /// Fraction bits after the hidden one (`fn − 1`).
    pub fraction: u32,
    pub fraction_len: u32,
}

impl PositFields {
    /// Count of significand bits including the hidden one.
    pub fn significand_bits(&self) -> u32 {
        self.fraction_len + 1
    }

    /// `k · 2^es + exponent`, the power of two of the leading significand bit.
    pub fn scale(&self) -> i32 {
        self.k * CONFIG.useed_log2() as i32 + self.exponent as i32
    }

    /// Reassembles `(−1)^s · 16^k · 2^e · (1 + f · 2^−len)` exactly.
    pub fn value(&self) -> Dyadic {
        let m = ((1u64 << self.fraction_len) | self.fraction as u64) as i64;
        Dyadic::new(
            if self.sign { -m } else { m },
            self.scale() - self.fraction_len as i32,
        )
    }

    /// Positional index (0 = LSB) of the highest fraction bit, if any.
    pub fn fraction_top_bit(&self) -> Option<u8> {
        self.fraction_len.checked_sub(1).map(|b| b as u8)
    }
}

/// Splits the 31 body bits of a positive pattern.
fn split_body(magnitude: u32) -> (i32, u32, u32, u32, u32, u32) {
    // body occupies bits 30..0; shift it to the top so the regime leads
    let body = magnitude << 1;
    let leading_one = body >> 31 == 1;
    let run = if leading_one {
        body.leading_ones()
    } else {
        body.leading_zeros()
    }
    .min(BODY_BITS);
    let k = if leading_one { run as i32 - 1 } else { -(run as i32) };
    let regime_len = (run + 1).min(BODY_BITS);
    let rest_len = BODY_BITS - regime_len;
    let rest = if rest_len == 0 {
        0
    } else {
        magnitude & ((1u32 << rest_len) - 1)
    };
    let exponent_len = rest_len.min(ES);
    let fraction_len = rest_len - exponent_len;
    let exponent = (rest >> fraction_len) << (ES - exponent_len);
    let fraction = rest & ((1u32 << fraction_len) - 1);
    (k, regime_len, exponent, exponent_len, fraction, fraction_len)
}

/// Field decomposition; rejects zero and NaR.
pub fn posit_fields(word: RawWord32) -> Result<PositFields, PositError> {
    match word {
        ZERO => return Err(PositError::Zero),
        NAR => return Err(PositError::Nar),
        _ => {}
    }
    let sign = word.0 >> 31 == 1;
    let magnitude = if sign { word.0.wrapping_neg() } else { word.0 };
    let (k, regime_len, exponent, exponent_len, fraction, fraction_len) = split_body(magnitude);
    Ok(PositFields {
        sign,
        k,
        regime_len,
        exponent,
        exponent_len,
        fraction,
        fraction_len,
    })
}

/// Exact decode; total over all patterns.
pub fn posit_decode(word: RawWord32) -> DecodedNumber {
    match posit_fields(word) {
        Ok(fields) => DecodedNumber {
            value: fields.value(),
            class: NumberClass::Finite,
            negative: fields.sign,
        },
        Err(PositError::Zero) => DecodedNumber::special(NumberClass::Zero, false),
        Err(PositError::Nar) => DecodedNumber::special(NumberClass::Nar, false),
    }
}

/// Nearest posit pattern with ties to the even pattern. Nonzero magnitudes
/// below `MIN_POS` round to `MIN_POS` and magnitudes above `MAX_POS` saturate.
///
/// Rounding happens on the infinite regime/exponent/fraction bit string, so
/// where exponent bits are truncated the rounding point is the bit-string
/// midpoint rather than the arithmetic mean of the neighbours.
pub fn posit_encode<X: ExactReal + ?Sized>(x: &X) -> RawWord32 {
    if x.is_zero() {
        return ZERO;
    }
    let magnitude = encode_magnitude(x);
    if x.is_negative() {
        RawWord32(magnitude.wrapping_neg())
    } else {
        RawWord32(magnitude)
    }
}

fn encode_magnitude<X: ExactReal + ?Sized>(x: &X) -> u32 {
    let useed_log2 = CONFIG.useed_log2() as i64;
    let s = x.floor_log2();
    if s >= CONFIG.max_k() as i64 * useed_log2 {
        return MAX_POS.0;
    }
    if s < CONFIG.min_k() as i64 * useed_log2 {
        return MIN_POS.0;
    }
    let k = s.div_euclid(useed_log2);
    let e = s.rem_euclid(useed_log2) as u32;
    let (regime, regime_len) = if k >= 0 {
        // k + 1 ones and a terminating zero
        (((1u32 << (k + 1)) - 1) << 1, k as u32 + 2)
    } else {
        (1u32, (-k) as u32 + 1)
    };
    let rem = BODY_BITS - regime_len;
    let (tail, half) = if rem >= ES {
        let fraction_len = rem - ES;
        let sc = x.scaled(fraction_len as i64 - s);
        let fraction = sc.floor as u32 - (1u32 << fraction_len);
        ((e << fraction_len) | fraction, sc.half)
    } else {
        // only the top `rem` exponent bits survive; the discarded string is
        // the low exponent bits followed by the whole fraction
        let dropped = ES - rem;
        let kept = e >> dropped;
        let low = e & ((1 << dropped) - 1);
        // remainder/2^dropped vs 1/2  <=>  low + (y − 1) vs 2^(dropped−1),
        // with y = x / 2^s in [1, 2)
        let threshold = (1i64 << (dropped - 1)) + 1 - low as i64;
        let y_is_one = x.scaled(-s).exact;
        let half = match threshold {
            t if t <= 0 => Ordering::Greater,
            1 if y_is_one => Ordering::Equal,
            1 => Ordering::Greater,
            _ => Ordering::Less,
        };
        (kept, half)
    };
    let mut pattern = (regime << rem) | tail;
    if half == Ordering::Greater || (half == Ordering::Equal && pattern & 1 == 1) {
        pattern += 1;
    }
    pattern
}

/// Inverse of [`posit_decode`] including the exception values: zero and NaR
/// have dedicated patterns. Infinity and NaN have no posit image and saturate
/// to NaR.
pub fn posit_reencode(decoded: &DecodedNumber) -> RawWord32 {
    match decoded.class {
        NumberClass::Zero => ZERO,
        NumberClass::Nar | NumberClass::Nan | NumberClass::Infinity => NAR,
        _ => posit_encode(&decoded.value),
    }
}

/// Encode an `f64`; NaN and infinities map to NaR.
pub fn posit_encode_f64(x: f64) -> RawWord32 {
    match Dyadic::from_f64(x) {
        Some(d) => posit_encode(&d),
        None => NAR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use crate::exact::parse_decimal;
    use proptest::prelude::*;

    fn decode(w: u32) -> DecodedNumber {
        posit_decode(RawWord32(w))
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(0x4000_0000).value, Dyadic::new(1, 0));
        assert_eq!(decode(0x4000_0000).class, NumberClass::Finite);
        assert_eq!(decode(0x8000_0000).class, NumberClass::Nar);
        assert_eq!(decode(0).class, NumberClass::Zero);
        // 0 | 110 | 00 | 0...: run of two ones, k = 1, scale 16
        assert_eq!(decode(0x6000_0000).value, Dyadic::new(16, 0));
        assert_eq!(decode(0xC000_0000).value, Dyadic::new(-1, 0));
        // 0 | 10 | 01 | 0...: e = 1
        assert_eq!(decode(0x4800_0000).value, Dyadic::new(2, 0));
        // 0 | 10 | 00 | 1 0...: 1 + 1/2
        assert_eq!(decode(0x4400_0000).value, Dyadic::new(3, -1));
        // 0 | 01 | 11 | 0...: k = -1, e = 3: 16^-1 * 8
        assert_eq!(decode(0x3800_0000).value, Dyadic::new(1, -1));
    }

    #[test]
    fn field_examples() {
        let one = posit_fields(RawWord32(0x4000_0000)).unwrap();
        assert_eq!((one.sign, one.k, one.exponent, one.fraction_len), (false, 0, 0, 27));
        assert_eq!(one.fraction, 0);

        let max = posit_fields(MAX_POS).unwrap();
        assert_eq!((max.k, max.exponent, max.exponent_len, max.fraction_len), (30, 0, 0, 0));
        assert_eq!(max.value(), Dyadic::pow2(120));

        let min = posit_fields(MIN_POS).unwrap();
        assert_eq!((min.k, min.exponent, min.exponent_len, min.fraction_len), (-30, 0, 0, 0));
        assert_eq!(min.value(), Dyadic::pow2(-120));

        // 29 zeros, one, one exponent bit set: 16^-29 * 2^2
        let w = posit_fields(RawWord32(0x0000_0003)).unwrap();
        assert_eq!((w.k, w.exponent, w.exponent_len), (-29, 2, 1));
        assert_eq!(w.value(), Dyadic::pow2(-114));

        assert_eq!(posit_fields(ZERO), Err(PositError::Zero));
        assert_eq!(posit_fields(NAR), Err(PositError::Nar));
    }

    #[test]
    fn reachable_k_extremes() {
        assert_eq!(CONFIG.useed(), 16);
        assert_eq!(posit_fields(MAX_POS).unwrap().k, CONFIG.max_k());
        assert_eq!(posit_fields(MIN_POS).unwrap().k, CONFIG.min_k());
        assert_eq!(posit_fields(RawWord32(0xFFFF_FFFF)).unwrap().k, -30);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(posit_encode(&Dyadic::new(1, 0)), RawWord32(0x4000_0000));
        assert_eq!(posit_encode(&Dyadic::ZERO), ZERO);
        assert_eq!(posit_encode(&Dyadic::new(-1, 0)), RawWord32(0xC000_0000));
        assert_eq!(posit_encode(&Dyadic::new(16, 0)), RawWord32(0x6000_0000));
        // 0.1 has 27 fraction bits available at k = -1
        let tenth = parse_decimal("0.1").unwrap();
        let w = posit_encode(&tenth);
        let err = (decode(w.0).value.to_f64() - 0.1).abs();
        assert!(err <= 2f64.powi(-4 - 27 - 1) * 1.0000001, "{err}");
    }

    #[test]
    fn encode_saturates_and_never_underflows() {
        assert_eq!(posit_encode(&Dyadic::pow2(500)), MAX_POS);
        assert_eq!(posit_encode(&Dyadic::pow2(120)), MAX_POS);
        assert_eq!(posit_encode(&Dyadic::pow2(-500)), MIN_POS);
        assert_eq!(posit_encode(&Dyadic::new(-1, -500)).0, MIN_POS.0.wrapping_neg());
        assert_eq!(posit_encode_f64(5e-324), MIN_POS);
    }

    #[test]
    fn encode_rounds_on_the_bit_string() {
        // between 2^-120 (0x1) and 2^-116 (0x2) the string midpoint is 2^-118
        assert_eq!(posit_encode(&Dyadic::new(3, -120)), MIN_POS);
        assert_eq!(posit_encode(&Dyadic::pow2(-118)), RawWord32(2));
        assert_eq!(posit_encode(&Dyadic::new(3, -119)), RawWord32(2));
        // one exponent bit present: 0x2 = 2^-116, 0x3 = 2^-114, midpoint 2^-115
        assert_eq!(posit_encode(&Dyadic::pow2(-115)), RawWord32(2));
        assert_eq!(posit_encode(&Dyadic::new(3, -116)), RawWord32(3));
        // near one: 27 fraction bits, halfway between 1 and 1 + 2^-27
        assert_eq!(posit_encode(&Dyadic::new((1 << 28) + 1, -28)), RawWord32(0x4000_0000));
        assert_eq!(posit_encode(&Dyadic::new((1 << 28) + 3, -28)), RawWord32(0x4000_0002));
        // carry from the fraction into the regime
        assert_eq!(posit_encode(&Dyadic::new((1 << 29) - 1, -25)), RawWord32(0x6000_0000));
    }

    #[test]
    fn reencode_exceptions() {
        assert_eq!(posit_reencode(&decode(0)), ZERO);
        assert_eq!(posit_reencode(&decode(0x8000_0000)), NAR);
        assert_eq!(posit_encode_f64(f64::NAN), NAR);
    }

    proptest! {
        #[test]
        fn round_trip(w in any::<u32>()) {
            prop_assume!(w != NAR.0);
            let d = decode(w);
            prop_assert_eq!(posit_encode(&d.value), RawWord32(w));
            prop_assert_eq!(posit_reencode(&d), RawWord32(w));
        }

        #[test]
        fn ordered_as_signed_integers(a in any::<u32>(), b in any::<u32>()) {
            prop_assume!(a != NAR.0 && b != NAR.0);
            prop_assert_eq!(
                decode(a).value.cmp(&decode(b).value),
                (a as i32).cmp(&(b as i32))
            );
        }

        #[test]
        fn negation_is_twos_complement(w in any::<u32>()) {
            prop_assume!(w != NAR.0);
            prop_assert_eq!(decode(w.wrapping_neg()).value, -decode(w).value);
        }

        #[test]
        fn encode_is_nearest_in_the_tapered_interior(w in 0x0100_0000u32..0x7F00_0000, num in 0u64..1024) {
            // x strictly between two adjacent patterns lands on one of them
            let lo = decode(w).value.to_rational();
            let hi = decode(w + 1).value.to_rational();
            let t = num_rational::BigRational::new(num.into(), 1024u64.into());
            let x = &lo + (&hi - &lo) * t;
            let got = posit_encode(&x).0;
            prop_assert!(got == w || got == w + 1);
            let d_lo = (&x - &lo).abs();
            let d_hi = (&hi - &x).abs();
            let expect = match d_lo.cmp(&d_hi) {
                Ordering::Less => w,
                Ordering::Greater => w + 1,
                Ordering::Equal => if w % 2 == 0 { w } else { w + 1 },
            };
            prop_assert_eq!(got, expect);
        }
    }
}
