//! Exact arithmetic on dyadic rationals.
//!
//! Every finite binary32 and posit(32,2) value is `m · 2^e` with a small
//! integer `m`, so [`Dyadic`] stores decoded values without loss. Sums and
//! differences whose exponents are far apart go through [`BigDyadic`], and
//! quotients (relative errors, MRED) are surfaced as [`BigRational`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// `mantissa · 2^exponent`, normalized so the mantissa is odd (or the value is
/// `0 · 2^0`).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: i64,
    exponent: i32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        mantissa: 0,
        exponent: 0,
    };

    pub fn new(mantissa: i64, exponent: i32) -> Self {
        if mantissa == 0 {
            return Self::ZERO;
        }
        let tz = mantissa.trailing_zeros();
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i32,
        }
    }

    /// `2^exponent`.
    pub fn pow2(exponent: i32) -> Self {
        Dyadic {
            mantissa: 1,
            exponent,
        }
    }

    pub fn mantissa(self) -> i64 {
        self.mantissa
    }

    pub fn exponent(self) -> i32 {
        self.exponent
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0
    }

    pub fn is_negative(self) -> bool {
        self.mantissa < 0
    }

    pub fn abs(self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// `floor(log2 |x|)`; `None` for zero.
    pub fn floor_log2(self) -> Option<i32> {
        if self.mantissa == 0 {
            return None;
        }
        let bits = 64 - self.mantissa.unsigned_abs().leading_zeros() as i32;
        Some(bits - 1 + self.exponent)
    }

    /// Exact conversion from a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let fraction = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1i64 << 52), biased - 1075)
        };
        Some(Dyadic::new(if negative { -m } else { m }, e))
    }

    /// Nearest `f64`. Exact whenever the value is representable, which covers
    /// every binary32 and posit(32,2) value.
    pub fn to_f64(self) -> f64 {
        let m = self.mantissa as f64;
        let e = self.exponent;
        if e > 1023 {
            return m * f64::INFINITY;
        }
        if e >= -1022 {
            m * pow2_f64(e)
        } else {
            // split so neither factor is subnormal before the final product
            m * pow2_f64(e + 600) * pow2_f64(-600)
        }
    }

    pub fn to_rational(self) -> BigRational {
        BigDyadic::from(self).to_rational()
    }

    /// Exact decimal expansion; always terminates for a dyadic value.
    pub fn to_decimal_string(self) -> String {
        BigDyadic::from(self).to_decimal_string()
    }
}

fn pow2_f64(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.signum(), other.mantissa.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let la = Dyadic::floor_log2(*self).unwrap();
        let lb = Dyadic::floor_log2(*other).unwrap();
        let magnitude = if la != lb {
            la.cmp(&lb)
        } else {
            // same binade: align onto the smaller exponent, shift is < 64
            let e = self.exponent.min(other.exponent);
            let a = (self.mantissa.unsigned_abs() as u128) << (self.exponent - e);
            let b = (other.mantissa.unsigned_abs() as u128) << (other.exponent - e);
            a.cmp(&b)
        };
        if sa > 0 {
            magnitude
        } else {
            magnitude.reverse()
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// Arbitrary-precision dyadic rational `mantissa · 2^exponent`.
#[derive(Clone, PartialEq, Eq)]
pub struct BigDyadic {
    mantissa: BigInt,
    exponent: i32,
}

impl BigDyadic {
    pub fn zero() -> Self {
        BigDyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn abs(&self) -> Self {
        BigDyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i32) {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        (a, b, e)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        BigDyadic::normalized(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        BigDyadic::normalized(a - b, e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        BigDyadic::normalized(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
        )
    }

    fn normalized(mantissa: BigInt, exponent: i32) -> Self {
        match mantissa.trailing_zeros() {
            None => BigDyadic::zero(),
            Some(0) => BigDyadic { mantissa, exponent },
            Some(tz) => BigDyadic {
                mantissa: mantissa >> tz as usize,
                exponent: exponent + tz as i32,
            },
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as usize,
            )
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_decimal_string(&self) -> String {
        if self.exponent >= 0 {
            return (&self.mantissa << self.exponent as usize).to_string();
        }
        // m / 2^q = m * 5^q / 10^q
        let q = (-self.exponent) as usize;
        let scaled = self.mantissa.abs() * num_traits::pow(BigInt::from(5u8), q);
        let mut digits = scaled.to_string();
        if digits.len() <= q {
            digits = "0".repeat(q + 1 - digits.len()) + &digits;
        }
        let point = digits.len() - q;
        let (int_part, frac_part) = digits.split_at(point);
        let frac_part = frac_part.trim_end_matches('0');
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }
}

impl From<Dyadic> for BigDyadic {
    fn from(d: Dyadic) -> Self {
        BigDyadic {
            mantissa: BigInt::from(d.mantissa),
            exponent: d.exponent,
        }
    }
}

impl Ord for BigDyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for BigDyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BigDyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

/// `|corrupted − golden|` as an exact dyadic.
pub fn abs_diff(golden: Dyadic, corrupted: Dyadic) -> BigDyadic {
    BigDyadic::from(corrupted).sub(&BigDyadic::from(golden)).abs()
}

/// `|corrupted − golden| / |golden|`. `golden` must be nonzero.
pub fn relative_error(golden: Dyadic, corrupted: Dyadic) -> BigRational {
    assert!(!golden.is_zero(), "relative error against a zero golden value");
    abs_diff(golden, corrupted).to_rational() / golden.abs().to_rational()
}

// two roundings (difference, quotient) of at most 2^-53 each, with margin
const REL_ERROR_SLACK: f64 = 8.0 * f64::EPSILON;

/// Orders `rel(a) = |a.1 − a.0| / |a.0|` against `rel(b)` exactly.
///
/// A double-precision estimate is accepted whenever its error bound separates
/// the two sides; otherwise the comparison is redone in big integers.
pub fn compare_relative_errors(a: (Dyadic, Dyadic), b: (Dyadic, Dyadic)) -> Ordering {
    let ra = ((a.1.to_f64() - a.0.to_f64()) / a.0.to_f64()).abs();
    let rb = ((b.1.to_f64() - b.0.to_f64()) / b.0.to_f64()).abs();
    if ra * (1.0 + REL_ERROR_SLACK) < rb * (1.0 - REL_ERROR_SLACK) {
        return Ordering::Less;
    }
    if rb * (1.0 + REL_ERROR_SLACK) < ra * (1.0 - REL_ERROR_SLACK) {
        return Ordering::Greater;
    }
    compare_relative_errors_exact(a, b)
}

/// Big-integer cross multiplication: `|Δa|·|b.0|` against `|Δb|·|a.0|`.
pub fn compare_relative_errors_exact(a: (Dyadic, Dyadic), b: (Dyadic, Dyadic)) -> Ordering {
    let lhs = abs_diff(a.0, a.1).mul(&BigDyadic::from(b.0.abs()));
    let rhs = abs_diff(b.0, b.1).mul(&BigDyadic::from(a.0.abs()));
    lhs.cmp(&rhs)
}

/// Result of scaling a magnitude by a power of two and truncating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scaled {
    pub floor: u64,
    /// The discarded remainder compared against one half.
    pub half: Ordering,
    pub exact: bool,
}

/// Exact real inputs accepted by the encoders.
pub trait ExactReal {
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    /// `floor(log2 |x|)` for nonzero `x`.
    fn floor_log2(&self) -> i64;
    /// `floor(|x| · 2^shift)` together with remainder information. Callers
    /// only request shifts whose integer part fits in 64 bits.
    fn scaled(&self, shift: i64) -> Scaled;
}

impl ExactReal for Dyadic {
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(*self)
    }

    fn is_negative(&self) -> bool {
        Dyadic::is_negative(*self)
    }

    fn floor_log2(&self) -> i64 {
        Dyadic::floor_log2(*self).expect("floor_log2 of zero") as i64
    }

    fn scaled(&self, shift: i64) -> Scaled {
        let m = self.mantissa.unsigned_abs() as u128;
        let t = self.exponent as i64 + shift;
        if t >= 0 {
            assert!(t < 64 && (m << t) <= u64::MAX as u128, "scaled value overflows");
            return Scaled {
                floor: (m << t) as u64,
                half: Ordering::Less,
                exact: true,
            };
        }
        let sh = (-t) as u32;
        if sh >= 128 {
            return Scaled {
                floor: 0,
                half: Ordering::Less,
                exact: m == 0,
            };
        }
        let rem = m & ((1u128 << sh) - 1);
        Scaled {
            floor: (m >> sh) as u64,
            half: rem.cmp(&(1u128 << (sh - 1))),
            exact: rem == 0,
        }
    }
}

impl ExactReal for BigRational {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn floor_log2(&self) -> i64 {
        let n = self.numer().abs();
        let d = self.denom().abs();
        assert!(!n.is_zero(), "floor_log2 of zero");
        let b = n.bits() as i64 - d.bits() as i64;
        let at_least = if b >= 0 {
            n >= (&d << b as usize)
        } else {
            (&n << (-b) as usize) >= d
        };
        if at_least {
            b
        } else {
            b - 1
        }
    }

    fn scaled(&self, shift: i64) -> Scaled {
        let mut n = self.numer().abs();
        let mut d = self.denom().abs();
        if shift >= 0 {
            n <<= shift as usize;
        } else {
            d <<= (-shift) as usize;
        }
        let (q, r) = n.div_rem(&d);
        let twice: BigInt = &r << 1usize;
        Scaled {
            floor: q.to_u64().expect("scaled value overflows"),
            half: twice.cmp(&d),
            exact: r.is_zero(),
        }
    }
}

/// Scientific notation with `significant` correctly rounded (half-even)
/// digits, trailing zeros trimmed: `1.5e-3`, `2e0`, `-7.25e12`.
pub fn format_scientific(value: &BigRational, significant: usize) -> String {
    assert!(significant >= 1);
    if Zero::is_zero(value) {
        return "0e0".to_string();
    }
    let negative = Signed::is_negative(value);
    let n = value.numer().abs();
    let d = value.denom().abs();
    let ten = BigInt::from(10u8);
    // initial guess of floor(log10), fixed up below
    let mut e10 = ((n.bits() as f64 - d.bits() as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let lower = num_traits::pow(ten.clone(), significant - 1);
    let upper = &lower * &ten;
    let (digits, exp10) = loop {
        let shift = significant as i64 - 1 - e10;
        let (num, den) = if shift >= 0 {
            (&n * num_traits::pow(ten.clone(), shift as usize), d.clone())
        } else {
            (n.clone(), &d * num_traits::pow(ten.clone(), (-shift) as usize))
        };
        let (mut q, r) = num.div_rem(&den);
        if q < lower {
            e10 -= 1;
            continue;
        }
        if q >= upper {
            e10 += 1;
            continue;
        }
        let twice: BigInt = &r << 1usize;
        match twice.cmp(&den) {
            Ordering::Greater => q += 1,
            Ordering::Equal if q.is_odd() => q += 1,
            _ => {}
        }
        if q == upper {
            break (lower.clone(), e10 + 1);
        }
        break (q, e10);
    };
    let s = digits.to_string();
    let (lead, rest) = s.split_at(1);
    let rest = rest.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if rest.is_empty() {
        format!("{sign}{lead}e{exp10}")
    } else {
        format!("{sign}{lead}.{rest}e{exp10}")
    }
}

/// `floor(log2 x)` for a positive rational.
pub fn floor_log2_rational(x: &BigRational) -> i64 {
    ExactReal::floor_log2(x)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseDecimalError {
    #[error("empty decimal literal")]
    Empty,
    #[error("invalid decimal literal `{0}`")]
    Invalid(String),
    #[error("decimal exponent out of range in `{0}`")]
    ExponentRange(String),
}

const MAX_DECIMAL_EXPONENT: i64 = 100_000;

/// Parses `[+-]digits[.digits][(e|E)[+-]digits]` into an exact rational.
pub fn parse_decimal(text: &str) -> Result<BigRational, ParseDecimalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseDecimalError::Empty);
    }
    let invalid = || ParseDecimalError::Invalid(s.to_string());
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp_part) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int_digits, frac_digits) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(invalid());
    }
    if !int_digits.bytes().chain(frac_digits.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(invalid());
    }
    let mut exponent: i64 = match exp_part {
        None => 0,
        Some(e) => {
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            let v: i64 = e
                .parse()
                .map_err(|_| ParseDecimalError::ExponentRange(s.to_string()))?;
            v
        }
    };
    exponent -= frac_digits.len() as i64;
    if exponent.abs() > MAX_DECIMAL_EXPONENT {
        return Err(ParseDecimalError::ExponentRange(s.to_string()));
    }
    let all_digits = format!("{int_digits}{frac_digits}");
    let mut numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|_| invalid())?;
    if negative {
        numer = -numer;
    }
    let ten = BigInt::from(10u8);
    Ok(if exponent >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, exponent as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-exponent) as usize))
    })
}

/// Nearest `f64` to an exact rational, rounding half to even.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if Zero::is_zero(x) {
        return 0.0;
    }
    let negative = Signed::is_negative(x);
    let s = ExactReal::floor_log2(x);
    let magnitude = if s > 1023 {
        f64::INFINITY
    } else {
        let e = s.max(-1022);
        let lsb = e - 52;
        let sc = x.scaled(-lsb);
        let mut m = sc.floor;
        if sc.half == Ordering::Greater || (sc.half == Ordering::Equal && m & 1 == 1) {
            m += 1;
        }
        // m ≤ 2^53, exactly representable; the product is exact or overflows
        Dyadic::new(m as i64, lsb as i32).to_f64()
    };
    if negative {
        -magnitude
    } else {
        magnitude
    }
}
