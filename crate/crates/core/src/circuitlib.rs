// SPDX-License-Identifier: Apache-2.0

//! Arithmetic and comparison circuit generators over [`Word`]s.
//!
//! Every generator takes the [`Evaluator`] it emits gates into and returns
//! the output word. Adders are ripple-carry; comparisons use a subtractor's
//! sign bit. Shifts and sign extensions are pure rewiring and emit no gates.

use thiserror::Error;

use crate::bitcore::{bits_to_raw, min_width_for, BitError, FixedFormat, PlainWord, MAX_WORD_BITS};
use crate::hbackend::{Evaluator, GateBackend, Hop, WireBit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("operands have {left} and {right} fraction bits")]
    FracMismatch { left: u32, right: u32 },
    #[error("operands have formats {left} and {right}")]
    FormatMismatch { left: FixedFormat, right: FixedFormat },
    #[error("empty input list")]
    Empty,
    #[error("expected {expected} inputs, got {got}")]
    WindowSize { expected: usize, got: usize },
    #[error("accumulator inputs must share one format")]
    NonUniform,
    #[error("accumulator cap of {cap} bits is narrower than its {width}-bit inputs")]
    CapTooSmall { cap: u32, width: u32 },
    #[error("{carries} carry-ins requested for {adders} adders")]
    TooManyCarries { carries: usize, adders: usize },
    #[error("word would need {0} bits")]
    TooWide(u32),
    #[error(transparent)]
    Bits(#[from] BitError),
}

/// A fixed-point value on circuit wires, LSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word<C> {
    bits: Vec<WireBit<C>>,
    format: FixedFormat,
}

impl<C: Clone> Word<C> {
    pub fn new(bits: Vec<WireBit<C>>, format: FixedFormat) -> Result<Self, BitError> {
        if bits.len() != format.total_bits as usize {
            return Err(BitError::LengthMismatch { expected: format.total_bits as usize, got: bits.len() });
        }
        Ok(Self { bits, format })
    }

    /// Public constant `raw` (reduced modulo the width).
    pub fn constant(raw: i64, format: FixedFormat) -> Self {
        let bits = (0..format.total_bits).map(|i| WireBit::Const((raw >> i.min(63)) & 1 == 1)).collect();
        Self { bits, format }
    }

    pub fn bits(&self) -> &[WireBit<C>] {
        &self.bits
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    pub fn width(&self) -> u32 {
        self.format.total_bits
    }

    pub fn sign_bit(&self) -> &WireBit<C> {
        self.bits.last().expect("words are never empty")
    }

    /// Raw value if every bit is a public constant.
    pub fn constant_raw(&self) -> Option<i64> {
        let bits: Option<Vec<bool>> = self.bits.iter().map(|b| b.as_const()).collect();
        bits.map(|b| bits_to_raw(&b))
    }

    pub fn max_depth(&self) -> u32 {
        self.bits.iter().map(|b| b.depth()).max().unwrap_or(0)
    }

    /// Widens by replicating the sign wire. Emits no gates.
    pub fn sign_extend(&self, new_total_bits: u32) -> Result<Self, BitError> {
        let from = self.width();
        if new_total_bits < from {
            return Err(BitError::Narrowing { from, to: new_total_bits });
        }
        let mut bits = self.bits.clone();
        bits.resize(new_total_bits as usize, self.sign_bit().clone());
        Ok(Self { bits, format: self.format.with_total_bits(new_total_bits) })
    }

    /// Reinterprets the same raw integer with a different binary point.
    pub fn with_frac_bits(mut self, frac_bits: u32) -> Self {
        self.format = self.format.with_frac_bits(frac_bits);
        self
    }

    /// Drops high bits. The caller guarantees they are sign copies.
    fn narrow(mut self, total_bits: u32) -> Self {
        self.bits.truncate(total_bits as usize);
        self.format = self.format.with_total_bits(total_bits);
        self
    }
}

impl<'a, B: GateBackend> Evaluator<'a, B> {
    /// Encrypts every bit of a clear word as a fresh input.
    pub fn encrypt_word(&mut self, w: &PlainWord) -> Word<B::Cipher> {
        let bits = w.bits().iter().map(|&b| self.fresh_input(b)).collect();
        Word { bits, format: w.format() }
    }

    /// Decrypts a word, or `None` if the backend cannot decrypt.
    pub fn reveal_word(&self, w: &Word<B::Cipher>) -> Option<PlainWord> {
        let bits: Option<Vec<bool>> = w.bits.iter().map(|b| self.reveal(b)).collect();
        Some(PlainWord::from_bits(bits?, w.format).expect("word length matches its format"))
    }

    fn reveal_raw(&self, bits: &[WireBit<B::Cipher>]) -> Option<i64> {
        let bits: Option<Vec<bool>> = bits.iter().map(|b| self.reveal(b)).collect();
        Some(bits_to_raw(&bits?))
    }
}

/// Ripple-carry addition of two equally wide bit vectors modulo `2^width`.
/// Per position: two XOR, two AND, one OR; the carry out of the top bit is
/// never built.
fn ripple_add<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    a: &[WireBit<B::Cipher>],
    b: &[WireBit<B::Cipher>],
    carry_in: bool,
) -> Vec<WireBit<B::Cipher>> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut carry = WireBit::Const(carry_in);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = ev.xor(&a[i], &b[i]);
        out.push(ev.xor(&t, &carry));
        if i + 1 < n {
            let g = ev.and(&a[i], &b[i]);
            let p = ev.and(&carry, &t);
            carry = ev.or(&g, &p);
        }
    }
    out
}

fn not_bits<B: GateBackend>(ev: &mut Evaluator<'_, B>, bits: &[WireBit<B::Cipher>]) -> Vec<WireBit<B::Cipher>> {
    bits.iter().map(|b| ev.not(b)).collect()
}

/// Bitwise complement (`-x - 1`). NOT gates only, so free under the default
/// cost model.
pub fn bitwise_not<B: GateBackend>(ev: &mut Evaluator<'_, B>, x: &Word<B::Cipher>) -> Word<B::Cipher> {
    Word { bits: not_bits(ev, &x.bits), format: x.format }
}

/// Options for [`build_adder_ext`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AddOptions {
    /// Adds one more unit through the carry into the lowest position.
    pub carry_in: bool,
    /// Output width. `None` means `max(widths) + 1`, which never overflows;
    /// narrower outputs wrap modulo `2^width` and flag a wrap event when the
    /// backend can see that the exact sum did not fit.
    pub width: Option<u32>,
}

/// Exact two's-complement sum, one bit wider than the wider operand.
pub fn build_adder<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    a: &Word<B::Cipher>,
    b: &Word<B::Cipher>,
) -> Result<Word<B::Cipher>, CircuitError> {
    build_adder_ext(ev, a, b, AddOptions::default())
}

pub fn build_adder_ext<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    a: &Word<B::Cipher>,
    b: &Word<B::Cipher>,
    opts: AddOptions,
) -> Result<Word<B::Cipher>, CircuitError> {
    if a.format.frac_bits != b.format.frac_bits {
        return Err(CircuitError::FracMismatch { left: a.format.frac_bits, right: b.format.frac_bits });
    }
    let exact = a.width().max(b.width()) + 1;
    let width = opts.width.unwrap_or(exact);
    if width > MAX_WORD_BITS {
        return Err(CircuitError::TooWide(width));
    }
    let ext = width.max(a.width()).max(b.width());
    let a_bits = a.sign_extend(ext)?.bits;
    let b_bits = b.sign_extend(ext)?.bits;
    let mut bits = ripple_add(ev, &a_bits[..width as usize], &b_bits[..width as usize], opts.carry_in);
    bits.truncate(width as usize);
    ev.count(Hop::CcAdd);
    let format = a.format.with_total_bits(width);
    if width < exact {
        let exact_sum = ev.reveal_raw(&a.bits).zip(ev.reveal_raw(&b.bits)).map(|(x, y)| x + y + opts.carry_in as i64);
        if matches!(exact_sum, Some(s) if !format.fits(s)) {
            ev.flag_wrap();
        }
    }
    Ok(Word { bits, format })
}

/// `max(x, 0)`: every value bit is ANDed with the negated sign; the output
/// sign is the constant 0.
pub fn build_relu<B: GateBackend>(ev: &mut Evaluator<'_, B>, x: &Word<B::Cipher>) -> Word<B::Cipher> {
    ev.count(Hop::CcCom);
    let w = x.bits.len();
    let keep = ev.not(x.sign_bit());
    let mut bits: Vec<_> = x.bits[..w - 1].iter().map(|b| ev.and(b, &keep)).collect();
    bits.push(WireBit::Const(false));
    Word { bits, format: x.format }
}

/// Non-NOT gates emitted by [`build_relu`] on a `width`-bit word.
pub const fn relu_gate_count(width: u32) -> u32 {
    width.saturating_sub(1)
}

/// Sign bit of `x - y` computed by a ripple-carry subtractor one bit wider
/// than the operands (so it cannot overflow). Only the carry chain and the
/// top sum bit are built.
pub fn build_less_than<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    y: &Word<B::Cipher>,
) -> Result<WireBit<B::Cipher>, CircuitError> {
    if x.format != y.format {
        return Err(CircuitError::FormatMismatch { left: x.format, right: y.format });
    }
    let ny = not_bits(ev, &y.bits);
    let mut carry = WireBit::Const(true);
    let mut top_t = None;
    for (xb, yb) in x.bits.iter().zip(&ny) {
        let t = ev.xor(xb, yb);
        let g = ev.and(xb, yb);
        let p = ev.and(&carry, &t);
        carry = ev.or(&g, &p);
        top_t = Some(t);
    }
    // The extension position repeats both sign bits, so its propagate bit
    // equals the one of position n-1.
    let t = top_t.expect("words are never empty");
    Ok(ev.xor(&t, &carry))
}

/// `max(x, y)`: a subtractor sign bit drives one MUX per output bit.
pub fn build_max<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    y: &Word<B::Cipher>,
) -> Result<Word<B::Cipher>, CircuitError> {
    let lt = build_less_than(ev, x, y)?;
    ev.count(Hop::CcCom);
    let bits = x.bits.iter().zip(&y.bits).map(|(xi, yi)| ev.mux(&lt, yi, xi)).collect();
    Ok(Word { bits, format: x.format })
}

/// Balanced tree of [`build_max`] units over any non-empty list. Adjacent
/// pairs are reduced level by level; an odd word out moves up unchanged.
pub fn build_max_tree<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    inputs: &[Word<B::Cipher>],
) -> Result<Word<B::Cipher>, CircuitError> {
    if inputs.is_empty() {
        return Err(CircuitError::Empty);
    }
    let mut level: Vec<Word<B::Cipher>> = inputs.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            match pair {
                [a, b] => next.push(build_max(ev, a, b)?),
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    Ok(level.pop().expect("non-empty"))
}

/// Max pooling over one `kernel_size x kernel_size` window.
pub fn build_maxpool<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    inputs: &[Word<B::Cipher>],
    kernel_size: usize,
) -> Result<Word<B::Cipher>, CircuitError> {
    if inputs.is_empty() {
        return Err(CircuitError::Empty);
    }
    if inputs.len() != kernel_size * kernel_size {
        return Err(CircuitError::WindowSize { expected: kernel_size * kernel_size, got: inputs.len() });
    }
    build_max_tree(ev, inputs)
}

/// Rewires `x` to `floor(x * 2^k)` within the same width: left shifts feed
/// constant zeros in at the bottom, right shifts replicate the sign wire.
fn shift_wires<C: Clone>(x: &Word<C>, k: i32) -> Word<C> {
    let w = x.bits.len();
    let bits = if k >= 0 {
        let k = (k as usize).min(w);
        let mut bits = vec![WireBit::Const(false); k];
        bits.extend_from_slice(&x.bits[..w - k]);
        bits
    } else {
        let k = (k.unsigned_abs() as usize).min(w);
        let mut bits = x.bits[k..].to_vec();
        bits.resize(w, x.sign_bit().clone());
        bits
    };
    Word { bits, format: x.format }
}

/// Plaintext-controlled arithmetic shift. Zero gates; counted as one PC_Shift.
pub fn arithmetic_shift<B: GateBackend>(ev: &mut Evaluator<'_, B>, x: &Word<B::Cipher>, k: i32) -> Word<B::Cipher> {
    ev.count(Hop::PcShift);
    shift_wires(x, k)
}

/// Output of a mixed-bitwidth accumulator.
#[derive(Debug, Clone)]
pub struct Accumulation<C> {
    pub word: Word<C>,
    /// Width of the adders at levels 1, 2, ... of the tree.
    pub level_widths: Vec<u32>,
    /// Whether any adder at the cap wrapped around (only detectable when the
    /// backend can decrypt).
    pub wrapped: bool,
}

/// Sum of `inputs` through a balanced adder tree whose level-`n` adders are
/// `min(b + n, cap_bits)` bits wide, `b` being the input width.
pub fn build_mixed_accumulator<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    inputs: &[Word<B::Cipher>],
    cap_bits: u32,
) -> Result<Accumulation<B::Cipher>, CircuitError> {
    build_mixed_accumulator_with_carries(ev, inputs, 0, cap_bits)
}

/// As [`build_mixed_accumulator`], additionally adding `carry_ins` units
/// through the carry inputs of the first `carry_ins` adders.
pub fn build_mixed_accumulator_with_carries<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    inputs: &[Word<B::Cipher>],
    carry_ins: usize,
    cap_bits: u32,
) -> Result<Accumulation<B::Cipher>, CircuitError> {
    let first = inputs.first().ok_or(CircuitError::Empty)?;
    let format = first.format;
    if inputs.iter().any(|w| w.format != format) {
        return Err(CircuitError::NonUniform);
    }
    let b = format.total_bits;
    if cap_bits < b {
        return Err(CircuitError::CapTooSmall { cap: cap_bits, width: b });
    }
    if cap_bits > MAX_WORD_BITS {
        return Err(CircuitError::TooWide(cap_bits));
    }
    let adders = inputs.len() - 1;
    if carry_ins > adders {
        return Err(CircuitError::TooManyCarries { carries: carry_ins, adders });
    }
    let wraps_before = ev.wrap_events();
    let mut carries_left = carry_ins;
    let mut level: Vec<Word<B::Cipher>> = inputs.to_vec();
    let mut level_widths = Vec::new();
    let mut n = 0;
    while level.len() > 1 {
        n += 1;
        let width = (b + n).min(cap_bits);
        level_widths.push(width);
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            match pair {
                [x, y] => {
                    let carry_in = carries_left > 0;
                    carries_left -= carry_in as usize;
                    next.push(build_adder_ext(ev, x, y, AddOptions { carry_in, width: Some(width) })?);
                }
                [x] => next.push(x.sign_extend(width)?),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    Ok(Accumulation { word: level.pop().expect("non-empty"), level_widths, wrapped: ev.wrap_events() > wraps_before })
}

/// A plaintext fixed-point constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedConst {
    pub raw: i64,
    pub format: FixedFormat,
}

/// Plaintext-ciphertext multiplication by shift-and-add over the set bits of
/// `|c|`, negated when `c < 0`. The product is exact: its width is the sum
/// of the operand widths and its fraction bits add up. Counted as one
/// PC_Mult; the internal shifts and adds are not counted separately.
pub fn build_pc_mult<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    c: FixedConst,
) -> Result<Word<B::Cipher>, CircuitError> {
    ev.count(Hop::PcMult);
    let width = x.width() + c.format.total_bits;
    if width > MAX_WORD_BITS {
        return Err(CircuitError::TooWide(width));
    }
    let format = FixedFormat { total_bits: width, frac_bits: x.format.frac_bits + c.format.frac_bits };
    let magnitude = c.raw.unsigned_abs();
    if magnitude == 0 {
        return Ok(Word::constant(0, format));
    }
    let wide = x.sign_extend(width)?.with_frac_bits(format.frac_bits);
    let mut acc: Option<Word<B::Cipher>> = None;
    for j in 0..64 {
        if (magnitude >> j) & 1 == 0 {
            continue;
        }
        let term = shift_wires(&wide, j);
        acc = Some(match acc {
            None => term,
            Some(sum) => Word { bits: ripple_add(ev, &sum.bits, &term.bits, false), format },
        });
    }
    let product = acc.expect("non-zero constant has a set bit");
    if c.raw > 0 {
        return Ok(product);
    }
    let inverted = not_bits(ev, &product.bits);
    let zero = vec![WireBit::Const(false); width as usize];
    Ok(Word { bits: ripple_add(ev, &inverted, &zero, true), format })
}

/// `scale * x + offset` with a signed power-of-two scale, in the format of
/// `x` (widened as needed). The shift is free; a negative scale complements
/// the shifted word and feeds the missing unit in as the adder's carry, so
/// at most one adder is built. Counted as one PC_Mult, plus one CC_Add when
/// the adder exists.
pub fn build_affine_pow2<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    scale: Option<(bool, i32)>,
    offset_raw: i64,
) -> Result<Word<B::Cipher>, CircuitError> {
    ev.count(Hop::PcMult);
    let (negative, exponent) = match scale {
        None => {
            let width = min_width_for(offset_raw).max(x.width());
            return Ok(Word::constant(offset_raw, x.format.with_total_bits(width)));
        }
        Some(s) => s,
    };
    let widened = x.width() as i64 + exponent.max(0) as i64;
    if widened > MAX_WORD_BITS as i64 {
        return Err(CircuitError::TooWide(widened as u32));
    }
    let shifted = shift_wires(&x.sign_extend(widened as u32)?, exponent);
    if offset_raw == 0 && !negative {
        return Ok(shifted);
    }
    let operand = if negative { bitwise_not(ev, &shifted) } else { shifted };
    let offset = Word::constant(offset_raw, x.format.with_total_bits(min_width_for(offset_raw)));
    build_adder_ext(ev, &operand, &offset, AddOptions { carry_in: negative, width: None })
}

/// Format [`rescale_floor`] produces for an input of format `from`.
pub fn rescaled_format(from: FixedFormat, frac_bits: u32) -> FixedFormat {
    let total_bits = if frac_bits <= from.frac_bits {
        // Keep at least one integer bit so the format stays valid.
        from.total_bits.saturating_sub(from.frac_bits - frac_bits).max(1).max(frac_bits + 1)
    } else {
        from.total_bits + (frac_bits - from.frac_bits)
    };
    FixedFormat { total_bits, frac_bits }
}

/// Re-expresses `x` with `frac_bits` fraction bits: dropping fraction bits
/// floors and narrows the word, adding them widens it. Pure rewiring.
pub fn rescale_floor<C: Clone>(x: &Word<C>, frac_bits: u32) -> Result<Word<C>, CircuitError> {
    let from = x.format.frac_bits;
    let target = rescaled_format(x.format, frac_bits);
    if target.total_bits > MAX_WORD_BITS {
        return Err(CircuitError::TooWide(target.total_bits));
    }
    if frac_bits <= from {
        let drop = from - frac_bits;
        let keep = x.width().saturating_sub(drop).max(1);
        let shifted = shift_wires(x, -(drop as i32)).narrow(keep);
        Ok(shifted.sign_extend(target.total_bits)?.with_frac_bits(frac_bits))
    } else {
        let add = frac_bits - from;
        Ok(shift_wires(&x.sign_extend(target.total_bits)?, add as i32).with_frac_bits(frac_bits))
    }
}

type BitOp<B> = fn(
    &mut Evaluator<'_, B>,
    &WireBit<<B as GateBackend>::Cipher>,
    &WireBit<<B as GateBackend>::Cipher>,
) -> WireBit<<B as GateBackend>::Cipher>;

fn reduce_tree<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    bits: &[WireBit<B::Cipher>],
    op: BitOp<B>,
) -> WireBit<B::Cipher> {
    let mut level = bits.to_vec();
    while level.len() > 1 {
        level = level.chunks(2).map(|p| if p.len() == 2 { op(ev, &p[0], &p[1]) } else { p[0].clone() }).collect();
    }
    level.pop().expect("non-empty")
}

/// Clamps `x` into `total_bits` bits, saturating at the signed range limits.
/// When the sign is a known constant only the matching overflow test is
/// built.
pub fn saturate<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    total_bits: u32,
) -> Result<Word<B::Cipher>, CircuitError> {
    let w = x.width();
    if total_bits >= w {
        return Ok(x.sign_extend(total_bits)?);
    }
    let t = total_bits as usize;
    let sign = x.sign_bit().clone();
    let high = &x.bits[t - 1..w as usize - 1];
    let pos_ovf = match sign.as_const() {
        Some(true) => WireBit::Const(false),
        _ => {
            let any = reduce_tree(ev, high, |ev, a, b| ev.or(a, b));
            let pos = ev.not(&sign);
            ev.and(&pos, &any)
        }
    };
    let neg_ok = match sign.as_const() {
        Some(false) => WireBit::Const(true),
        _ => {
            let all = reduce_tree(ev, high, |ev, a, b| ev.and(a, b));
            let neg_ovf = {
                let not_all = ev.not(&all);
                ev.and(&sign, &not_all)
            };
            ev.not(&neg_ovf)
        }
    };
    let mut bits = Vec::with_capacity(t);
    for b in &x.bits[..t - 1] {
        let kept = ev.and(b, &neg_ok);
        bits.push(ev.or(&kept, &pos_ovf));
    }
    bits.push(sign);
    Ok(Word { bits, format: x.format.with_total_bits(total_bits) })
}

/// Brings `x` into `target`: floor to the target's fraction bits, then
/// saturate to its width.
pub fn build_requantize<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    target: FixedFormat,
) -> Result<Word<B::Cipher>, CircuitError> {
    let rescaled = rescale_floor(x, target.frac_bits)?;
    saturate(ev, &rescaled, target.total_bits)
}

/// Activation unit: ReLU followed by requantization into `target`.
/// The floor happens before the ReLU, which gives the same value with fewer
/// gates since flooring never changes the sign.
pub fn build_relu_requantize<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    x: &Word<B::Cipher>,
    target: FixedFormat,
) -> Result<Word<B::Cipher>, CircuitError> {
    let rescaled = rescale_floor(x, target.frac_bits)?;
    let r = build_relu(ev, &rescaled);
    saturate(ev, &r, target.total_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::{shift_floor, PlainWord};
    use crate::hbackend::{ClearBackend, GateCostModel};

    fn int(bits: u32) -> FixedFormat {
        FixedFormat::integer(bits)
    }

    fn enc<'a>(ev: &mut Evaluator<'a, ClearBackend>, raw: i64, f: FixedFormat) -> Word<bool> {
        ev.encrypt_word(&PlainWord::from_raw(raw, f))
    }

    fn val(ev: &Evaluator<'_, ClearBackend>, w: &Word<bool>) -> i64 {
        ev.reveal_word(w).unwrap().raw()
    }

    #[test]
    fn adder_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let a = enc(&mut ev, 3, int(5));
        let b = enc(&mut ev, -3, int(5));
        let s = build_adder(&mut ev, &a, &b).unwrap();
        assert_eq!((s.width(), val(&ev, &s)), (6, 0));
        let a = enc(&mut ev, 15, int(5));
        let s = build_adder(&mut ev, &a, &a).unwrap();
        assert_eq!((s.width(), val(&ev, &s)), (6, 30));
        assert_eq!(ev.snapshot_report().cc_add, 2);
    }

    #[test]
    fn adder_rejects_frac_mismatch() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let a = enc(&mut ev, 1, FixedFormat::new(5, 1).unwrap());
        let b = enc(&mut ev, 1, int(5));
        assert_eq!(build_adder(&mut ev, &a, &b), Err(CircuitError::FracMismatch { left: 1, right: 0 }));
    }

    #[test]
    fn relu_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let x = enc(&mut ev, -3, int(3));
        let r = build_relu(&mut ev, &x);
        assert_eq!(ev.reveal_word(&r).unwrap().to_bit_string(), "000");
        let x = enc(&mut ev, 3, int(3));
        let r = build_relu(&mut ev, &x);
        assert_eq!(val(&ev, &r), 3);
        assert_eq!(ev.snapshot_report().cc_com, 2);
        assert_eq!(ev.snapshot_report().hgops, 2 * relu_gate_count(3) as u64);
    }

    #[test]
    fn max_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let a = enc(&mut ev, -1, int(5));
        let b = enc(&mut ev, 0, int(5));
        let m = build_max(&mut ev, &a, &b).unwrap();
        assert_eq!(val(&ev, &m), 0);
        let a = enc(&mut ev, 7, int(5));
        let m = build_max(&mut ev, &a, &a).unwrap();
        assert_eq!(val(&ev, &m), 7);
        let c = enc(&mut ev, 7, int(6));
        assert!(matches!(build_max(&mut ev, &a, &c), Err(CircuitError::FormatMismatch { .. })));
    }

    #[test]
    fn maxpool_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let one = enc(&mut ev, 5, int(5));
        let before = ev.snapshot_report();
        let m = build_maxpool(&mut ev, std::slice::from_ref(&one), 1).unwrap();
        assert_eq!(m, one);
        assert_eq!(ev.snapshot_report(), before);

        let window: Vec<_> = [1, -2, 3, 0].iter().map(|&v| enc(&mut ev, v, int(5))).collect();
        let m = build_maxpool(&mut ev, &window, 2).unwrap();
        assert_eq!(val(&ev, &m), 3);
        assert_eq!(ev.snapshot_report().cc_com, 3);
        assert_eq!(build_maxpool(&mut ev, &[], 1), Err(CircuitError::Empty));
        assert!(matches!(build_maxpool(&mut ev, &window, 3), Err(CircuitError::WindowSize { .. })));
    }

    #[test]
    fn shift_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let x = enc(&mut ev, 3, int(10));
        let s = arithmetic_shift(&mut ev, &x, 2);
        assert_eq!(val(&ev, &s), 12);
        let x = enc(&mut ev, -5, int(10));
        let s = arithmetic_shift(&mut ev, &x, -1);
        assert_eq!(val(&ev, &s), -3);
        let s = arithmetic_shift(&mut ev, &x, 0);
        assert_eq!(s, x);
        let r = ev.snapshot_report();
        assert_eq!((r.pc_shift, r.hgops, r.max_depth), (3, 0, 0));
    }

    #[test]
    fn accumulator_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let two: Vec<_> = [7, -3].iter().map(|&v| enc(&mut ev, v, int(5))).collect();
        let acc = build_mixed_accumulator(&mut ev, &two, 16).unwrap();
        assert_eq!(acc.level_widths, vec![6]);
        assert_eq!(val(&ev, &acc.word), 4);

        let sixteen: Vec<_> = (0..16).map(|_| enc(&mut ev, 15, int(5))).collect();
        let acc = build_mixed_accumulator(&mut ev, &sixteen, 16).unwrap();
        assert_eq!(acc.level_widths, vec![6, 7, 8, 9]);
        assert_eq!((acc.word.width(), val(&ev, &acc.word)), (9, 240));
        assert!(!acc.wrapped);

        assert!(matches!(build_mixed_accumulator(&mut ev, &[], 16), Err(CircuitError::Empty)));
        assert!(matches!(build_mixed_accumulator(&mut ev, &two, 4), Err(CircuitError::CapTooSmall { .. })));
        assert!(matches!(
            build_mixed_accumulator_with_carries(&mut ev, &two, 2, 16),
            Err(CircuitError::TooManyCarries { .. })
        ));
    }

    #[test]
    fn accumulator_wraps_at_cap_and_flags() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let inputs: Vec<_> = (0..8).map(|_| enc(&mut ev, 15, int(5))).collect();
        let acc = build_mixed_accumulator(&mut ev, &inputs, 7).unwrap();
        assert_eq!(acc.level_widths, vec![6, 7, 7]);
        assert_eq!(val(&ev, &acc.word), crate::bitcore::wrap_to_width(120, 7));
        assert!(acc.wrapped);
    }

    #[test]
    fn carries_add_units() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let inputs: Vec<_> = [1, 2, 3].iter().map(|&v| enc(&mut ev, v, int(5))).collect();
        let acc = build_mixed_accumulator_with_carries(&mut ev, &inputs, 2, 16).unwrap();
        assert_eq!(val(&ev, &acc.word), 8);
    }

    #[test]
    fn pc_mult_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let x = enc(&mut ev, -7, int(5));
        let one = FixedConst { raw: 1, format: int(2) };
        let p = build_pc_mult(&mut ev, &x, one).unwrap();
        assert_eq!(val(&ev, &p), -7);
        assert_eq!(ev.snapshot_report().hgops, 0);
        let minus_one = FixedConst { raw: -1, format: int(2) };
        let p = build_pc_mult(&mut ev, &x, minus_one).unwrap();
        assert_eq!(val(&ev, &p), 7);
        let zero = FixedConst { raw: 0, format: int(2) };
        let p = build_pc_mult(&mut ev, &x, zero).unwrap();
        assert_eq!(p.constant_raw(), Some(0));
        let r = ev.snapshot_report();
        assert_eq!((r.pc_mult, r.pc_shift, r.cc_add), (3, 0, 0));
    }

    #[test]
    fn affine_examples() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let f = FixedFormat::new(8, 2).unwrap();
        let x = enc(&mut ev, 13, f);
        let id = build_affine_pow2(&mut ev, &x, Some((false, 0)), 0).unwrap();
        assert_eq!(id, x);
        assert_eq!(ev.snapshot_report().hgops, 0);
        // 0.5 * 3.25 + 0.25 with floor on the halving: floor(13 / 2) + 1 = 7.
        let y = build_affine_pow2(&mut ev, &x, Some((false, -1)), 1).unwrap();
        assert_eq!(val(&ev, &y), 7);
        let y = build_affine_pow2(&mut ev, &x, Some((true, 2)), -5).unwrap();
        assert_eq!(val(&ev, &y), -13 * 4 - 5);
        let y = build_affine_pow2(&mut ev, &x, Some((true, 0)), 0).unwrap();
        assert_eq!(val(&ev, &y), -13);
        let y = build_affine_pow2(&mut ev, &x, None, 9).unwrap();
        assert_eq!(y.constant_raw(), Some(9));
    }

    #[test]
    fn requantize_saturates() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let wide = FixedFormat::new(12, 5).unwrap();
        let target = FixedFormat::new(5, 2).unwrap();
        for raw in -2048..2048 {
            let x = enc(&mut ev, raw, wide);
            let q = build_requantize(&mut ev, &x, target).unwrap();
            let expect = shift_floor(raw, -3).clamp(-16, 15);
            assert_eq!(val(&ev, &q), expect, "raw {raw}");
            let a = build_relu_requantize(&mut ev, &x, target).unwrap();
            assert_eq!(val(&ev, &a), shift_floor(raw.max(0), -3).min(15), "raw {raw}");
        }
    }

    #[test]
    fn rescale_widens_when_adding_fraction_bits() {
        let x: Word<bool> = Word::constant(-3, FixedFormat::new(5, 1).unwrap());
        let y = rescale_floor(&x, 3).unwrap();
        assert_eq!(y.format(), FixedFormat::new(7, 3).unwrap());
        assert_eq!(y.constant_raw(), Some(-12));
    }
}
