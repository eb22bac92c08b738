//! Single- and double-bit upsets on raw words.
//!
//! The second position of a double upset is drawn from a counter-based
//! stream: ChaCha8 keyed by the run seed, one stream per word index, and a
//! fixed block offset per first-bit position. A draw therefore depends only
//! on `(seed, word_index, first_bit)`, never on which worker makes it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::word::RawWord32;

pub const WORD_BITS: u8 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpsetMode {
    /// Single-event upset: one flipped bit.
    Seu,
    /// Multi-bit upset: two distinct flipped bits.
    Mbu,
}

impl UpsetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UpsetMode::Seu => "seu",
            UpsetMode::Mbu => "mbu",
        }
    }
}

impl fmt::Display for UpsetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UpsetMode {
    type Err = FaultError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "seu" => Ok(UpsetMode::Seu),
            "mbu" => Ok(UpsetMode::Mbu),
            _ => Err(FaultError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultError {
    #[error("bit index {0} is outside 0..=31")]
    BitOutOfRange(u8),
    #[error("double upset needs two distinct bits, got {0} twice")]
    RepeatedBit(u8),
    #[error("unknown upset mode `{0}` (expected seu or mbu)")]
    UnknownMode(String),
}

/// Which bits flip. Constructed only through [`FaultSpec::seu`] and
/// [`FaultSpec::mbu`], so an instance is always valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultSpec {
    first_bit: u8,
    second_bit: Option<u8>,
}

impl FaultSpec {
    pub fn seu(bit: u8) -> Result<Self, FaultError> {
        check_bit(bit)?;
        Ok(FaultSpec {
            first_bit: bit,
            second_bit: None,
        })
    }

    pub fn mbu(first: u8, second: u8) -> Result<Self, FaultError> {
        check_bit(first)?;
        check_bit(second)?;
        if first == second {
            return Err(FaultError::RepeatedBit(first));
        }
        Ok(FaultSpec {
            first_bit: first,
            second_bit: Some(second),
        })
    }

    pub fn first_bit(&self) -> u8 {
        self.first_bit
    }

    pub fn second_bit(&self) -> Option<u8> {
        self.second_bit
    }

    pub fn mode(&self) -> UpsetMode {
        match self.second_bit {
            None => UpsetMode::Seu,
            Some(_) => UpsetMode::Mbu,
        }
    }

    pub fn mask(&self) -> u32 {
        (1u32 << self.first_bit) | self.second_bit.map_or(0, |b| 1u32 << b)
    }
}

fn check_bit(bit: u8) -> Result<(), FaultError> {
    if bit < WORD_BITS {
        Ok(())
    } else {
        Err(FaultError::BitOutOfRange(bit))
    }
}

/// Inverts the bits named by `spec`. Involutive.
pub fn flip(word: RawWord32, spec: &FaultSpec) -> RawWord32 {
    RawWord32(word.0 ^ spec.mask())
}

/// Randomness key for one word of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededDraw {
    pub seed: u64,
    pub word_index: u64,
}

impl SeededDraw {
    pub fn new(seed: u64, word_index: u64) -> Self {
        SeededDraw { seed, word_index }
    }

    fn stream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.word_index);
        rng
    }
}

// 16 u32 words: one ChaCha block reserved per first-bit position
const WORDS_PER_DRAW: u128 = 16;

/// Uniform over the 31 positions other than `first_bit`.
pub fn draw_second_bit(draw: SeededDraw, first_bit: u8) -> Result<u8, FaultError> {
    check_bit(first_bit)?;
    let mut rng = draw.stream();
    Ok(second_from(&mut rng, first_bit))
}

fn second_from(rng: &mut ChaCha8Rng, first_bit: u8) -> u8 {
    rng.set_word_pos(first_bit as u128 * WORDS_PER_DRAW);
    let r: u8 = rng.random_range(0..WORD_BITS - 1);
    if r >= first_bit {
        r + 1
    } else {
        r
    }
}

/// The 32 injections made on one word: every first bit in order, each paired
/// with its drawn second bit in MBU mode. Both formats consume this same
/// sequence, which is what makes the comparison fair.
pub fn injections_for_word(mode: UpsetMode, draw: SeededDraw) -> [FaultSpec; WORD_BITS as usize] {
    let mut out = [FaultSpec {
        first_bit: 0,
        second_bit: None,
    }; WORD_BITS as usize];
    match mode {
        UpsetMode::Seu => {
            for (bit, slot) in out.iter_mut().enumerate() {
                slot.first_bit = bit as u8;
            }
        }
        UpsetMode::Mbu => {
            let mut rng = draw.stream();
            for (bit, slot) in out.iter_mut().enumerate() {
                slot.first_bit = bit as u8;
                slot.second_bit = Some(second_from(&mut rng, bit as u8));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flip_examples() {
        let spec = FaultSpec::seu(31).unwrap();
        assert_eq!(flip(RawWord32(0), &spec), RawWord32(0x8000_0000));
        let spec = FaultSpec::seu(23).unwrap();
        assert_eq!(flip(RawWord32(0x3F80_0000), &spec), RawWord32(0x3F00_0000));
        let spec = FaultSpec::mbu(0, 31).unwrap();
        assert_eq!(flip(RawWord32(0xFFFF_FFFF), &spec), RawWord32(0x7FFF_FFFE));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert_eq!(FaultSpec::seu(32), Err(FaultError::BitOutOfRange(32)));
        assert_eq!(FaultSpec::mbu(3, 3), Err(FaultError::RepeatedBit(3)));
        assert_eq!(FaultSpec::mbu(3, 40), Err(FaultError::BitOutOfRange(40)));
        assert!(draw_second_bit(SeededDraw::new(1, 0), 32).is_err());
    }

    #[test]
    fn mode_tracks_second_bit() {
        assert_eq!(FaultSpec::seu(4).unwrap().mode(), UpsetMode::Seu);
        assert_eq!(FaultSpec::mbu(4, 5).unwrap().mode(), UpsetMode::Mbu);
        assert_eq!("MBU".parse::<UpsetMode>().unwrap(), UpsetMode::Mbu);
        assert!("tmr".parse::<UpsetMode>().is_err());
    }

    #[test]
    fn second_bit_excludes_first() {
        for seed in 0..20u64 {
            for first in 0..32u8 {
                let s = draw_second_bit(SeededDraw::new(seed, seed * 7), first).unwrap();
                assert_ne!(s, first);
                assert!(s < 32);
            }
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let d = SeededDraw::new(42, 123_456);
        for first in 0..32u8 {
            assert_eq!(draw_second_bit(d, first), draw_second_bit(d, first));
        }
        let batch = injections_for_word(UpsetMode::Mbu, d);
        for spec in batch {
            assert_eq!(
                spec.second_bit(),
                Some(draw_second_bit(d, spec.first_bit()).unwrap())
            );
        }
    }

    #[test]
    fn seu_batch_covers_every_bit_once() {
        let batch = injections_for_word(UpsetMode::Seu, SeededDraw::new(0, 0));
        let mask = batch.iter().fold(0u32, |acc, s| acc | s.mask());
        assert_eq!(mask, u32::MAX);
        assert!(batch.iter().all(|s| s.mode() == UpsetMode::Seu));
    }

    proptest! {
        #[test]
        fn flip_is_involutive(w in any::<u32>(), a in 0u8..32, b in 0u8..32) {
            let spec = if a == b { FaultSpec::seu(a) } else { FaultSpec::mbu(a, b) }.unwrap();
            prop_assert_eq!(flip(flip(RawWord32(w), &spec), &spec), RawWord32(w));
            prop_assert_eq!((w ^ flip(RawWord32(w), &spec).0).count_ones(), if a == b { 1 } else { 2 });
        }
    }
}
