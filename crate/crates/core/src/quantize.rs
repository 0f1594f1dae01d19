// SPDX-License-Identifier: Apache-2.0

//! Power-of-two weight quantization and fixed-point activation quantization.
//!
//! A weight is stored as a sign, an integer exponent and a zero flag, so the
//! product of an activation with it is an arithmetic shift.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitcore::{encode_fixed, round_half_even, FixedFormat, PlainWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantError {
    #[error("exponent range [{e_min}, {e_max}] is empty")]
    EmptyRange { e_min: i32, e_max: i32 },
    #[error("exponent range [{e_min}, {e_max}] plus a zero code does not fit in {bitwidth} bits")]
    RangeTooWide { e_min: i32, e_max: i32, bitwidth: u32 },
    #[error("bitwidth {0} leaves no exponent field")]
    BitwidthTooSmall(u32),
    #[error("accumulator cap of {cap} bits is outside 2..=32")]
    BadCap { cap: u32 },
    #[error("{0} extra accumulator fraction bits is too many")]
    BadAccFrac(u32),
}

/// Quantization parameters for weights, activations and accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantConfig {
    /// Bits per quantized weight: one sign bit plus the exponent field.
    pub bitwidth: u32,
    pub e_max: i32,
    pub e_min: i32,
    pub act_format: FixedFormat,
    /// Extra fraction bits kept below the activation format inside
    /// accumulators so right shifts by small exponents are not truncated.
    pub acc_frac_bits: u32,
    /// Widest adder in a mixed-bitwidth accumulator tree.
    pub acc_cap_bits: u32,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self {
            bitwidth: 5,
            e_max: 0,
            e_min: -14,
            act_format: FixedFormat { total_bits: 5, frac_bits: 0 },
            acc_frac_bits: 0,
            acc_cap_bits: 16,
        }
    }
}

impl QuantConfig {
    /// Checks that every exponent plus the zero code has a distinct code in
    /// the `bitwidth - 1` bit exponent field.
    pub fn validate(&self) -> Result<(), QuantError> {
        if self.bitwidth < 2 || self.bitwidth > 16 {
            return Err(QuantError::BitwidthTooSmall(self.bitwidth));
        }
        if self.e_min >= self.e_max {
            return Err(QuantError::EmptyRange { e_min: self.e_min, e_max: self.e_max });
        }
        let codes = (self.e_max as i64 - self.e_min as i64) + 2;
        if codes > 1i64 << (self.bitwidth - 1) {
            return Err(QuantError::RangeTooWide { e_min: self.e_min, e_max: self.e_max, bitwidth: self.bitwidth });
        }
        if !(2..=32).contains(&self.acc_cap_bits) {
            return Err(QuantError::BadCap { cap: self.acc_cap_bits });
        }
        if self.acc_frac_bits > 16 {
            return Err(QuantError::BadAccFrac(self.acc_frac_bits));
        }
        FixedFormat::new(self.act_format.total_bits, self.act_format.frac_bits)
            .map_err(|_| QuantError::BitwidthTooSmall(self.act_format.total_bits))?;
        Ok(())
    }

    /// Fraction bits of accumulator leaves.
    pub fn acc_frac(&self) -> u32 {
        self.act_format.frac_bits + self.acc_frac_bits
    }
}

/// One power-of-two weight: `(-1)^negative * 2^exponent`, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizedWeight {
    pub negative: bool,
    pub exponent: i32,
    pub zero: bool,
}

impl QuantizedWeight {
    pub const ZERO: QuantizedWeight = QuantizedWeight { negative: false, exponent: 0, zero: true };

    pub fn new(negative: bool, exponent: i32) -> Self {
        Self { negative, exponent, zero: false }
    }

    pub fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            let m = (self.exponent as f64).exp2();
            if self.negative {
                -m
            } else {
                m
            }
        }
    }

    /// `Some((negative, exponent))` for nonzero weights.
    pub fn as_pow2(&self) -> Option<(bool, i32)> {
        (!self.zero).then_some((self.negative, self.exponent))
    }
}

/// Serialized form `{"s": ±1, "e": exponent, "z": 0|1}`.
#[derive(Serialize, Deserialize)]
struct WeightRepr {
    s: i8,
    e: i32,
    z: u8,
}

impl Serialize for QuantizedWeight {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WeightRepr { s: if self.negative { -1 } else { 1 }, e: self.exponent, z: self.zero as u8 }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantizedWeight {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = WeightRepr::deserialize(deserializer)?;
        if r.s != 1 && r.s != -1 {
            return Err(serde::de::Error::custom(format!("weight sign must be 1 or -1, got {}", r.s)));
        }
        if r.z > 1 {
            return Err(serde::de::Error::custom(format!("zero flag must be 0 or 1, got {}", r.z)));
        }
        if r.z == 1 {
            return Ok(QuantizedWeight::ZERO);
        }
        Ok(QuantizedWeight { negative: r.s < 0, exponent: r.e, zero: false })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizedTensor {
    pub shape: Vec<usize>,
    pub data: Vec<QuantizedWeight>,
}

impl QuantizedTensor {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|w| !w.zero).count()
    }
}

/// Quantizes one weight: nearest exponent (ties to even), clamped above at
/// `e_max`, flushed to zero below `e_min`.
pub fn quantize_weight(w: f64, e_min: i32, e_max: i32) -> QuantizedWeight {
    if w == 0.0 || w.is_nan() {
        return QuantizedWeight::ZERO;
    }
    let e = round_half_even(w.abs().log2());
    if e < e_min as f64 {
        return QuantizedWeight::ZERO;
    }
    let exponent = if e > e_max as f64 { e_max } else { e as i32 };
    QuantizedWeight::new(w < 0.0, exponent)
}

pub fn log_quantize(w: &[f64], shape: &[usize], cfg: &QuantConfig) -> QuantizedTensor {
    QuantizedTensor {
        shape: shape.to_vec(),
        data: w.iter().map(|&x| quantize_weight(x, cfg.e_min, cfg.e_max)).collect(),
    }
}

pub fn dequantize(q: &QuantizedTensor) -> Vec<f64> {
    q.data.iter().map(QuantizedWeight::value).collect()
}

pub fn quantize_activations(x: &[f64], fmt: FixedFormat) -> Vec<PlainWord> {
    x.iter().map(|&v| encode_fixed(v, fmt)).collect()
}

/// Relative error statistics of a quantized tensor against its source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QuantErrorStats {
    pub max_rel: f64,
    pub mean_rel: f64,
    pub zeros: usize,
    pub total: usize,
}

pub fn error_stats(w: &[f64], q: &QuantizedTensor) -> QuantErrorStats {
    let mut stats = QuantErrorStats { total: w.len(), ..Default::default() };
    let mut sum = 0.0;
    let mut nonzero = 0usize;
    for (&x, qw) in w.iter().zip(&q.data) {
        if qw.zero {
            stats.zeros += 1;
        }
        if x == 0.0 {
            continue;
        }
        let rel = ((qw.value() - x) / x).abs();
        stats.max_rel = stats.max_rel.max(rel);
        sum += rel;
        nonzero += 1;
    }
    if nonzero > 0 {
        stats.mean_rel = sum / nonzero as f64;
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::decode_fixed;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn weight_examples() {
        let cfg = QuantConfig::default();
        let q = log_quantize(&[0.25, 0.0, -0.3], &[3], &cfg);
        assert_eq!(q.data[0], QuantizedWeight::new(false, -2));
        assert!(q.data[1].zero);
        assert_eq!(q.data[2], QuantizedWeight::new(true, -2));
    }

    #[test]
    fn clamps_above_and_flushes_below() {
        assert_eq!(quantize_weight(8.0, -14, 0), QuantizedWeight::new(false, 0));
        assert_eq!(quantize_weight(2f64.powi(-14), -14, 0), QuantizedWeight::new(false, -14));
        assert!(quantize_weight(2f64.powi(-15), -14, 0).zero);
        assert!(quantize_weight(f64::NAN, -14, 0).zero);
    }

    #[test]
    fn ties_round_to_even_exponent() {
        // log2(2^-2.5) is exactly -2.5 up to float error; pick values whose
        // log is a representable half.
        let w = (-2.5f64).exp2();
        assert_eq!(w.log2(), -2.5);
        assert_eq!(quantize_weight(w, -14, 0).exponent, -2);
        let w = (-3.5f64).exp2();
        assert_eq!(w.log2(), -3.5);
        assert_eq!(quantize_weight(w, -14, 0).exponent, -4);
    }

    #[test]
    fn dequantize_examples() {
        let q = QuantizedTensor { shape: vec![2], data: vec![QuantizedWeight::new(false, -2), QuantizedWeight::ZERO] };
        assert_eq!(dequantize(&q), vec![0.25, 0.0]);
    }

    #[test]
    fn dequantize_error_bound_on_random_sweep() {
        let cfg = QuantConfig::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let bound = 2f64.sqrt() - 1.0;
        for _ in 0..10_000 {
            let mag = rng.random_range(-13.5f64..0.5).exp2();
            let w = if rng.random_bool(0.5) { mag } else { -mag };
            let q = quantize_weight(w, cfg.e_min, cfg.e_max);
            assert!((q.value() - w).abs() <= w.abs() * bound + 1e-15, "w = {w}");
        }
    }

    #[test]
    fn activation_examples() {
        let f = FixedFormat::new(5, 2).unwrap();
        assert!(quantize_activations(&[0.0; 4], f).iter().all(|w| w.raw() == 0));
        assert_eq!(quantize_activations(&[3.75], f)[0].to_bit_string(), "01111");
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-8.0..8.0);
            let w = &quantize_activations(&[x], f)[0];
            let clamped = x.clamp(-4.0, 3.75);
            assert!((decode_fixed(w) - clamped).abs() <= 0.125 + 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(QuantConfig::default().validate().is_ok());
        let wide = QuantConfig { e_min: -15, ..Default::default() };
        assert!(matches!(wide.validate(), Err(QuantError::RangeTooWide { .. })));
        let empty = QuantConfig { e_min: 0, ..Default::default() };
        assert!(matches!(empty.validate(), Err(QuantError::EmptyRange { .. })));
    }

    #[test]
    fn serde_shape() {
        let q = vec![QuantizedWeight::new(true, -3), QuantizedWeight::ZERO];
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(text, r#"[{"s":-1,"e":-3,"z":0},{"s":1,"e":0,"z":1}]"#);
        let back: Vec<QuantizedWeight> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<QuantizedWeight>(r#"{"s":2,"e":0,"z":0}"#).is_err());
    }

    #[test]
    fn error_stats_on_exact_powers() {
        let w = [0.5, -0.25, 1.0, 0.0];
        let q = log_quantize(&w, &[4], &QuantConfig::default());
        let s = error_stats(&w, &q);
        assert_eq!((s.max_rel, s.mean_rel, s.zeros), (0.0, 0.0, 1));
    }

    proptest! {
        #[test]
        fn requantizing_is_idempotent(neg: bool, e in -14i32..=0, zero: bool) {
            let cfg = QuantConfig::default();
            let q = if zero { QuantizedWeight::ZERO } else { QuantizedWeight::new(neg, e) };
            prop_assert_eq!(quantize_weight(q.value(), cfg.e_min, cfg.e_max), q);
        }
    }
}
