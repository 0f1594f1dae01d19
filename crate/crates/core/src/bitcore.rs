// SPDX-License-Identifier: Apache-2.0

//! Two's-complement fixed-point words in the clear.
//!
//! Bits are stored LSB first everywhere in this crate; the last bit of a
//! word is its sign. A word's value is `raw * 2^-frac_bits` where `raw` is
//! the two's-complement integer spelled by the bits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest word any layer of the compiler may produce.
pub const MAX_WORD_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error("invalid fixed-point format: {total_bits} total bits with {frac_bits} fraction bits")]
    InvalidFormat { total_bits: u32, frac_bits: u32 },
    #[error("cannot sign-extend a {from}-bit word to {to} bits")]
    Narrowing { from: u32, to: u32 },
    #[error("word has {got} bits but its format declares {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Bit width and binary point position of a two's-complement word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedFormat {
    pub total_bits: u32,
    pub frac_bits: u32,
}

impl FixedFormat {
    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self, BitError> {
        if total_bits == 0 || total_bits > MAX_WORD_BITS || frac_bits >= total_bits {
            return Err(BitError::InvalidFormat { total_bits, frac_bits });
        }
        Ok(Self { total_bits, frac_bits })
    }

    /// Plain integer format (no fraction bits).
    pub fn integer(total_bits: u32) -> Self {
        Self { total_bits, frac_bits: 0 }
    }

    pub fn min_raw(&self) -> i64 {
        -(1i64 << (self.total_bits - 1))
    }

    pub fn max_raw(&self) -> i64 {
        (1i64 << (self.total_bits - 1)) - 1
    }

    pub fn fits(&self, raw: i64) -> bool {
        raw >= self.min_raw() && raw <= self.max_raw()
    }

    /// Value of one unit in the last place.
    pub fn ulp(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn with_total_bits(&self, total_bits: u32) -> Self {
        Self { total_bits, frac_bits: self.frac_bits }
    }

    pub fn with_frac_bits(&self, frac_bits: u32) -> Self {
        Self { total_bits: self.total_bits, frac_bits }
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.total_bits - self.frac_bits, self.frac_bits)
    }
}

/// A fixed-point word whose bits are all known in the clear.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlainWord {
    bits: Vec<bool>,
    format: FixedFormat,
}

impl PlainWord {
    pub fn from_bits(bits: Vec<bool>, format: FixedFormat) -> Result<Self, BitError> {
        if bits.len() != format.total_bits as usize {
            return Err(BitError::LengthMismatch { expected: format.total_bits as usize, got: bits.len() });
        }
        Ok(Self { bits, format })
    }

    /// Builds the word holding `raw` reduced modulo `2^total_bits`.
    pub fn from_raw(raw: i64, format: FixedFormat) -> Self {
        let bits = (0..format.total_bits).map(|i| (raw >> i.min(63)) & 1 == 1).collect();
        Self { bits, format }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    pub fn sign(&self) -> bool {
        *self.bits.last().expect("words are never empty")
    }

    /// Two's-complement integer spelled by the bits.
    pub fn raw(&self) -> i64 {
        bits_to_raw(&self.bits)
    }

    /// Bits written MSB first, e.g. `"11101"` for a 5-bit `-3`.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for PlainWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.to_bit_string(), decode_fixed(self))
    }
}

pub(crate) fn bits_to_raw(bits: &[bool]) -> i64 {
    let n = bits.len();
    let mut raw: i64 = 0;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            raw |= 1 << i;
        }
    }
    if n < 64 && bits[n - 1] {
        raw -= 1 << n;
    }
    raw
}

/// Rounds to the nearest integer, ties to even.
pub fn round_half_even(x: f64) -> f64 {
    x.round_ties_even()
}

/// Reduces `raw` modulo `2^bits` into the signed range of a `bits`-wide word.
pub fn wrap_to_width(raw: i64, bits: u32) -> i64 {
    if bits >= 64 {
        return raw;
    }
    let shift = 64 - bits;
    (raw << shift) >> shift
}

/// Smallest two's-complement width that holds `raw`.
pub fn min_width_for(raw: i64) -> u32 {
    let magnitude = if raw < 0 { !raw } else { raw };
    64 - magnitude.leading_zeros() + 1
}

/// Floor of `raw * 2^shift` for any signed shift.
pub fn shift_floor(raw: i64, shift: i32) -> i64 {
    if shift >= 0 {
        raw << shift
    } else {
        raw >> (-shift).min(63)
    }
}

/// Rounds `x * 2^frac_bits` half-to-even and saturates to the format range.
pub fn encode_fixed(x: f64, format: FixedFormat) -> PlainWord {
    PlainWord::from_raw(quantize_raw(x, format), format)
}

/// Raw integer `encode_fixed` would store for `x`.
pub fn quantize_raw(x: f64, format: FixedFormat) -> i64 {
    if x.is_nan() {
        return 0;
    }
    let scaled = round_half_even(x * (format.frac_bits as f64).exp2());
    if scaled <= format.min_raw() as f64 {
        format.min_raw()
    } else if scaled >= format.max_raw() as f64 {
        format.max_raw()
    } else {
        scaled as i64
    }
}

pub fn decode_fixed(w: &PlainWord) -> f64 {
    w.raw() as f64 * w.format.ulp()
}

/// Widens `w` to `new_total_bits` by replicating its sign bit.
pub fn sign_extend(w: &PlainWord, new_total_bits: u32) -> Result<PlainWord, BitError> {
    let from = w.format.total_bits;
    if new_total_bits < from {
        return Err(BitError::Narrowing { from, to: new_total_bits });
    }
    let sign = w.sign();
    let mut bits = w.bits.clone();
    bits.resize(new_total_bits as usize, sign);
    Ok(PlainWord { bits, format: w.format.with_total_bits(new_total_bits) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fmt(total: u32, frac: u32) -> FixedFormat {
        FixedFormat::new(total, frac).unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_fixed(0.0, fmt(5, 0)).to_bit_string(), "00000");
        assert_eq!(encode_fixed(-1.0, fmt(5, 0)).to_bit_string(), "11111");
        // 0.37 * 4 = 1.48 rounds to 1.
        let w = encode_fixed(0.37, fmt(5, 2));
        assert_eq!(w.raw(), 1);
        assert_eq!(decode_fixed(&w), 0.25);
    }

    #[test]
    fn encode_ties_go_to_even() {
        let f = fmt(5, 1);
        assert_eq!(encode_fixed(0.25, f).raw(), 0);
        assert_eq!(encode_fixed(0.75, f).raw(), 2);
        assert_eq!(encode_fixed(-0.25, f).raw(), 0);
        assert_eq!(encode_fixed(-0.75, f).raw(), -2);
    }

    #[test]
    fn encode_saturates() {
        let f = fmt(5, 2);
        assert_eq!(encode_fixed(100.0, f).to_bit_string(), "01111");
        assert_eq!(encode_fixed(-100.0, f).to_bit_string(), "10000");
        assert_eq!(encode_fixed(f64::INFINITY, f).raw(), 15);
        assert_eq!(encode_fixed(f64::NAN, f).raw(), 0);
    }

    #[test]
    fn decode_examples() {
        let f = fmt(5, 0);
        assert_eq!(decode_fixed(&PlainWord::from_raw(0, f)), 0.0);
        let ones = PlainWord::from_bits(vec![true; 5], f).unwrap();
        assert_eq!(decode_fixed(&ones), -1.0);
    }

    #[test]
    fn all_five_bit_patterns_round_trip() {
        for frac in 0..5 {
            let f = fmt(5, frac);
            for pattern in 0u32..32 {
                let bits: Vec<bool> = (0..5).map(|i| (pattern >> i) & 1 == 1).collect();
                let w = PlainWord::from_bits(bits, f).unwrap();
                assert_eq!(encode_fixed(decode_fixed(&w), f), w);
            }
        }
    }

    #[test]
    fn sign_extend_examples() {
        let f = fmt(3, 0);
        let neg3 = PlainWord::from_raw(-3, f);
        assert_eq!(neg3.to_bit_string(), "101");
        assert_eq!(sign_extend(&neg3, 5).unwrap().to_bit_string(), "11101");
        let three = PlainWord::from_raw(3, f);
        assert_eq!(sign_extend(&three, 5).unwrap().to_bit_string(), "00011");
        for raw in -4..4 {
            let w = sign_extend(&PlainWord::from_raw(raw, f), 5).unwrap();
            assert_eq!(w.raw(), raw);
        }
    }

    #[test]
    fn sign_extend_rejects_narrowing() {
        let w = PlainWord::from_raw(1, fmt(5, 0));
        assert_eq!(sign_extend(&w, 4), Err(BitError::Narrowing { from: 5, to: 4 }));
    }

    #[test]
    fn format_validation() {
        assert!(FixedFormat::new(0, 0).is_err());
        assert!(FixedFormat::new(5, 5).is_err());
        assert!(FixedFormat::new(33, 0).is_err());
        assert!(FixedFormat::new(5, 4).is_ok());
    }

    #[test]
    fn helpers() {
        assert_eq!(wrap_to_width(16, 5), -16);
        assert_eq!(wrap_to_width(-17, 5), 15);
        assert_eq!(min_width_for(0), 1);
        assert_eq!(min_width_for(-1), 1);
        assert_eq!(min_width_for(1), 2);
        assert_eq!(min_width_for(15), 5);
        assert_eq!(min_width_for(-16), 5);
        assert_eq!(min_width_for(16), 6);
        assert_eq!(shift_floor(-5, -1), -3);
        assert_eq!(shift_floor(3, 2), 12);
    }

    proptest! {
        #[test]
        fn sign_extend_preserves_value(width in 2u32..=16, extra in 0u32..=16, seed: i64) {
            let f = FixedFormat::integer(width);
            let raw = wrap_to_width(seed, width);
            let w = PlainWord::from_raw(raw, f);
            let e = sign_extend(&w, width + extra).unwrap();
            prop_assert_eq!(e.raw(), raw);
            prop_assert_eq!(decode_fixed(&e), decode_fixed(&w));
        }

        #[test]
        fn encode_error_is_half_ulp_inside_range(x in -4.0f64..3.8) {
            let f = fmt(5, 2);
            let w = encode_fixed(x, f);
            prop_assert!((decode_fixed(&w) - x).abs() <= f.ulp() / 2.0 + 1e-12);
        }
    }
}
