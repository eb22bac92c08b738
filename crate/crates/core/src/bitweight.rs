//! Per-bit error weights of a word: what flipping each single bit does to the
//! decoded value, labeled by the golden word's field layout.
//!
//! Every entry is measured by decode difference. Fraction bits whose flip
//! leaves the sign, scale and layout intact also carry the closed-form weight
//! (`2^e · 2^(j−23)` for binary32, `16^k · 2^e · 2^−i` for posits), so the
//! two can be checked against each other.

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::exact::{abs_diff, BigDyadic, Dyadic};
use crate::fault::{flip, FaultSpec, WORD_BITS};
use crate::float32::{float_decode, Float32Fields, EXPONENT_BITS, FRACTION_BITS};
use crate::posit32::{posit_decode, posit_fields, PositConfig, PositError, PositFields};
use crate::word::{DecodedNumber, Format, NumberClass, RawWord32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitRegion {
    Sign,
    Exponent,
    Regime,
    Fraction,
}

impl BitRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            BitRegion::Sign => "sign",
            BitRegion::Exponent => "exponent",
            BitRegion::Regime => "regime",
            BitRegion::Fraction => "fraction",
        }
    }
}

impl fmt::Display for BitRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitWeightError {
    #[error("{format} word {word} decodes to {class}; no golden value")]
    NonFinite {
        word: RawWord32,
        format: Format,
        class: NumberClass,
    },
    #[error(transparent)]
    Posit(#[from] PositError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitWeight {
    pub bit: u8,
    pub region: BitRegion,
    pub flipped: RawWord32,
    pub outcome: DecodedNumber,
    /// `|decode(flipped) − decode(word)|`; `None` when the outcome is special.
    pub abs_error: Option<BigDyadic>,
    /// Analytic fraction weight, when the flip keeps the field structure.
    pub closed_form: Option<Dyadic>,
    /// The flip moved a field boundary or changed the class.
    pub layout_changed: bool,
}

impl BitWeight {
    pub fn relative_error(&self, golden: Dyadic) -> Option<BigRational> {
        if golden.is_zero() {
            return None;
        }
        let abs = self.abs_error.as_ref()?;
        Some(abs.to_rational() / golden.abs().to_rational())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitWeightReport {
    pub word: RawWord32,
    pub format: Format,
    pub golden: DecodedNumber,
    /// Indexed by bit position, LSB first.
    pub bits: Vec<BitWeight>,
}

/// Extra fraction bits a posit is credited with over binary32 by the
/// headroom formula `m = exp_size − k − es` (exp_size 8, es 2). Negative for
/// long regimes.
pub fn fraction_headroom(word: RawWord32) -> Result<i32, BitWeightError> {
    let fields = posit_fields(word)?;
    Ok(EXPONENT_BITS as i32 - fields.k - PositConfig::P32E2.es as i32)
}

/// Actual fraction-length difference `posit fraction bits − 23`. Unlike the
/// headroom formula this counts the regime terminator and the run length
/// (`k + 2` bits for `k ≥ 0`, `1 − k` for `k < 0`).
pub fn fraction_gain(word: RawWord32) -> Result<i32, BitWeightError> {
    let fields = posit_fields(word)?;
    Ok(fields.fraction_len as i32 - FRACTION_BITS as i32)
}

pub fn bit_weight_report(word: RawWord32, format: Format) -> Result<BitWeightReport, BitWeightError> {
    match format {
        Format::Float32 => float_report(word),
        Format::Posit32 => posit_report(word),
    }
}

fn measured(golden: Dyadic, outcome: &DecodedNumber) -> Option<BigDyadic> {
    outcome.finite_value().map(|v| abs_diff(golden, v))
}

fn float_report(word: RawWord32) -> Result<BitWeightReport, BitWeightError> {
    let golden = float_decode(word);
    if !golden.class.has_value() {
        return Err(BitWeightError::NonFinite {
            word,
            format: Format::Float32,
            class: golden.class,
        });
    }
    let fields = Float32Fields::from_word(word);
    let bits = (0..WORD_BITS)
        .map(|bit| {
            let flipped = flip(word, &FaultSpec::seu(bit).expect("bit in range"));
            let outcome = float_decode(flipped);
            let region = match bit as u32 {
                31 => BitRegion::Sign,
                b if b >= FRACTION_BITS => BitRegion::Exponent,
                _ => BitRegion::Fraction,
            };
            let closed_form = (region == BitRegion::Fraction).then(|| {
                Dyadic::pow2(fields.unbiased_exponent() + bit as i32 - FRACTION_BITS as i32)
            });
            BitWeight {
                bit,
                region,
                flipped,
                outcome,
                abs_error: measured(golden.value, &outcome),
                closed_form,
                layout_changed: outcome.class != golden.class,
            }
        })
        .collect();
    Ok(BitWeightReport {
        word,
        format: Format::Float32,
        golden,
        bits,
    })
}

fn posit_region(fields: &PositFields, bit: u8) -> BitRegion {
    let bit = bit as u32;
    let fraction_end = fields.fraction_len;
    let exponent_end = fraction_end + fields.exponent_len;
    match bit {
        31 => BitRegion::Sign,
        b if b < fraction_end => BitRegion::Fraction,
        b if b < exponent_end => BitRegion::Exponent,
        _ => BitRegion::Regime,
    }
}

fn posit_report(word: RawWord32) -> Result<BitWeightReport, BitWeightError> {
    let fields = posit_fields(word)?;
    let golden = posit_decode(word);
    let bits = (0..WORD_BITS)
        .map(|bit| {
            let flipped = flip(word, &FaultSpec::seu(bit).expect("bit in range"));
            let outcome = posit_decode(flipped);
            let region = posit_region(&fields, bit);
            let after = posit_fields(flipped).ok();
            let layout_changed = after.is_none_or(|a| {
                a.sign != fields.sign
                    || a.regime_len != fields.regime_len
                    || a.exponent_len != fields.exponent_len
            });
            // for negative words a raw flip is ±2^bit on the magnitude pattern,
            // which can carry out of the fraction; require the scale to hold
            let structure_kept = after.is_some_and(|a| {
                !layout_changed && a.k == fields.k && a.exponent == fields.exponent
            });
            let closed_form = (region == BitRegion::Fraction && structure_kept).then(|| {
                let depth = fields.fraction_len as i32 - bit as i32;
                Dyadic::pow2(fields.scale() - depth)
            });
            BitWeight {
                bit,
                region,
                flipped,
                outcome,
                abs_error: measured(golden.value, &outcome),
                closed_form,
                layout_changed,
            }
        })
        .collect();
    Ok(BitWeightReport {
        word,
        format: Format::Posit32,
        golden,
        bits,
    })
}
