// SPDX-License-Identifier: Apache-2.0

//! Lowering of a folded model to an [`EvaluationPlan`].
//!
//! Every value the plan touches lives in a numbered slot; slot formats are
//! fixed at compile time. A layer is a list of stages and the ops inside one
//! stage only read slots written by earlier stages, so they can run in any
//! order or in parallel.

use std::ops::Range;

use serde::Serialize;

use super::depth::{ceil_log2, estimate_layer_depth, BudgetVerdict, DepthCostTable, LayerGeometry};
use super::fold::is_folded;
use super::model::{LayerSpec, ModelSpec, Shape};
use super::CompileError;
use crate::bitcore::{encode_fixed, min_width_for, round_half_even, FixedFormat, PlainWord, MAX_WORD_BITS};
use crate::circuitlib::rescaled_format;
use crate::hbackend::{DepthBudget, GateCostModel};
use crate::quantize::QuantConfig;

/// One accumulator leaf: slot `src` shifted by `shift`, optionally negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShiftTerm {
    pub src: u32,
    pub shift: i32,
    pub negate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PlanOp {
    /// `sum(terms) + constant` through a mixed-bitwidth tree. Each leaf is
    /// its source sign-extended to `leaf_format.total_bits`, re-tagged with
    /// the leaf fraction bits and shifted; negated leaves are complemented
    /// and get their `+1` from one of the `carry_ins`.
    Accumulate {
        dst: u32,
        terms: Vec<ShiftTerm>,
        carry_ins: u32,
        constant: i64,
        leaf_format: FixedFormat,
        cap_bits: u32,
    },
    /// Signed floor-and-saturate into the activation format.
    Requantize { src: u32, dst: u32 },
    /// `(+/-)2^e * x + offset`, or the constant offset when `scale` is `None`.
    Affine { src: u32, dst: u32, scale: Option<(bool, i32)>, offset_raw: i64 },
    /// ReLU and requantization into the activation format.
    Relu { src: u32, dst: u32 },
    /// Maximum over a pooling window.
    MaxTree { srcs: Vec<u32>, dst: u32 },
}

impl PlanOp {
    pub fn dst(&self) -> u32 {
        match self {
            PlanOp::Accumulate { dst, .. }
            | PlanOp::Requantize { dst, .. }
            | PlanOp::Affine { dst, .. }
            | PlanOp::Relu { dst, .. }
            | PlanOp::MaxTree { dst, .. } => *dst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanLayer {
    pub index: usize,
    pub tag: char,
    pub kind: String,
    pub stages: Vec<Vec<PlanOp>>,
    pub input: Range<u32>,
    pub output: Range<u32>,
    pub out_shape: Shape,
    pub output_format: FixedFormat,
    pub geometry: LayerGeometry,
    /// Analytic multiplicative depth of the layer.
    pub estimate: u64,
}

impl PlanLayer {
    pub fn op_count(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaluationPlan {
    pub name: String,
    pub topology: String,
    pub input_shape: Shape,
    pub input_format: FixedFormat,
    pub quant: QuantConfig,
    pub slot_formats: Vec<FixedFormat>,
    pub layers: Vec<PlanLayer>,
    pub total_estimate: u64,
    pub budget: u64,
}

impl EvaluationPlan {
    pub fn input_slots(&self) -> Range<u32> {
        0..self.input_shape.len() as u32
    }

    pub fn output_slots(&self) -> Range<u32> {
        self.layers.last().map(|l| l.output.clone()).unwrap_or_else(|| self.input_slots())
    }

    pub fn output_format(&self) -> FixedFormat {
        self.layers.last().map(|l| l.output_format).unwrap_or(self.input_format)
    }

    /// Shift leaves in all accumulators.
    pub fn shift_term_count(&self) -> usize {
        let mut n = 0;
        for layer in &self.layers {
            for stage in &layer.stages {
                for op in stage {
                    if let PlanOp::Accumulate { terms, .. } = op {
                        n += terms.len();
                    }
                }
            }
        }
        n
    }
}

/// Encodes image pixels in `[0, 255]` (CHW order) into the plan's input format.
pub fn input_words(plan: &EvaluationPlan, pixels: &[f64]) -> Vec<PlainWord> {
    pixels.iter().map(|&p| encode_fixed(p / 255.0, plan.input_format)).collect()
}

struct Builder {
    slot_formats: Vec<FixedFormat>,
}

impl Builder {
    fn alloc(&mut self, n: usize, format: FixedFormat) -> Range<u32> {
        let start = self.slot_formats.len() as u32;
        self.slot_formats.extend(std::iter::repeat_n(format, n));
        start..self.slot_formats.len() as u32
    }
}

fn check_width(bits: u32, layer: usize, what: &'static str) -> Result<u32, CompileError> {
    if bits > MAX_WORD_BITS {
        return Err(CompileError::TooWide { layer, what, bits });
    }
    Ok(bits)
}

/// Static shape of one accumulator neuron before the layer-wide widening.
struct Neuron {
    terms: Vec<ShiftTerm>,
    carry_ins: u32,
    constant: i64,
}

struct AccLayout {
    ops: Vec<PlanOp>,
    width: u32,
    adder_width: u32,
    const_width: Option<u32>,
}

/// Turns per-neuron term lists into accumulate ops and works out the
/// widths the circuit will have.
fn lay_out_accumulators(
    neurons: Vec<Neuron>,
    dst: Range<u32>,
    leaf_format: FixedFormat,
    cap_bits: u32,
    layer: usize,
) -> Result<AccLayout, CompileError> {
    let b = leaf_format.total_bits;
    let mut width = 1;
    let mut adder_width = 0;
    let mut const_width = None;
    let mut ops = Vec::with_capacity(neurons.len());
    for (neuron, dst) in neurons.into_iter().zip(dst) {
        let n = neuron.terms.len() as u64;
        let tree = if n == 0 { 0 } else { (b + ceil_log2(n) as u32).min(cap_bits) };
        if n >= 2 {
            adder_width = adder_width.max(tree);
        }
        let out = if n == 0 {
            min_width_for(neuron.constant)
        } else if neuron.constant != 0 {
            let w = tree.max(min_width_for(neuron.constant)) + 1;
            const_width = Some(const_width.unwrap_or(0).max(w));
            w
        } else {
            tree
        };
        width = width.max(check_width(out, layer, "accumulator output")?);
        ops.push(PlanOp::Accumulate {
            dst,
            terms: neuron.terms,
            carry_ins: neuron.carry_ins,
            constant: neuron.constant,
            leaf_format,
            cap_bits,
        });
    }
    Ok(AccLayout { ops, width, adder_width, const_width })
}

/// Builds a neuron from `(src, negative, exponent)` taps.
fn neuron(taps: impl Iterator<Item = (u32, bool, i32)>, acc_frac_bits: u32, bias_raw: i64) -> Neuron {
    let terms: Vec<ShiftTerm> =
        taps.map(|(src, negate, e)| ShiftTerm { src, shift: e + acc_frac_bits as i32, negate }).collect();
    let negated = terms.iter().filter(|t| t.negate).count() as u32;
    let adders = (terms.len() as u32).saturating_sub(1);
    let carry_ins = negated.min(adders);
    Neuron { terms, carry_ins, constant: bias_raw + (negated - carry_ins) as i64 }
}

fn bias_raw(bias: &Option<Vec<f64>>, o: usize, frac_bits: u32, layer: usize) -> Result<i64, CompileError> {
    let Some(b) = bias else { return Ok(0) };
    let raw = round_half_even(b[o] * (frac_bits as f64).exp2());
    if raw.abs() >= (1u64 << (MAX_WORD_BITS - 2)) as f64 {
        return Err(CompileError::TooWide { layer, what: "bias constant", bits: MAX_WORD_BITS + 1 });
    }
    Ok(raw as i64)
}

/// Width of a leaf word: the activation width plus room for the largest left
/// shift any weight of the layer asks for.
fn leaf_format(
    exponents: impl Iterator<Item = i32>,
    q: &QuantConfig,
    layer: usize,
) -> Result<FixedFormat, CompileError> {
    let max_shift = exponents.map(|e| e + q.acc_frac_bits as i32).max().unwrap_or(0).max(0) as u32;
    let b = check_width(q.act_format.total_bits + max_shift, layer, "accumulator leaf")?;
    if b > q.acc_cap_bits {
        return Err(CompileError::Shape(format!(
            "layer {layer}: {b}-bit accumulator leaves exceed the {}-bit cap",
            q.acc_cap_bits
        )));
    }
    Ok(FixedFormat { total_bits: b, frac_bits: q.acc_frac() })
}

/// Output width of `build_affine_pow2` on a `w`-bit input.
fn affine_width(w: u32, scale: Option<(bool, i32)>, offset_raw: i64) -> (u32, bool) {
    match scale {
        None => (min_width_for(offset_raw).max(w), false),
        Some((negative, e)) => {
            let widened = w + e.max(0) as u32;
            if offset_raw == 0 && !negative {
                (widened, false)
            } else {
                (widened.max(min_width_for(offset_raw)) + 1, true)
            }
        }
    }
}

/// Compiles without a strict budget check.
pub fn compile(m: &ModelSpec, cost: &GateCostModel, budget: DepthBudget) -> Result<EvaluationPlan, CompileError> {
    compile_with(m, cost, budget, false)
}

/// Lowers a folded model. With `strict`, a plan whose estimated depth
/// exceeds `budget` is an error.
pub fn compile_with(
    m: &ModelSpec,
    cost: &GateCostModel,
    budget: DepthBudget,
    strict: bool,
) -> Result<EvaluationPlan, CompileError> {
    if let Some(i) = m.layers.iter().position(|l| matches!(l, LayerSpec::BatchNorm(_))) {
        return Err(CompileError::NotFolded(i));
    }
    debug_assert!(is_folded(m));
    let table = DepthCostTable::measure(cost);
    let q = m.quant;
    let act = q.act_format;
    let mut b = Builder { slot_formats: Vec::new() };
    let mut input = b.alloc(m.input_shape.len(), act);
    let mut shape = m.input_shape;
    let mut format = act;
    let mut layers = Vec::with_capacity(m.layers.len());

    for (index, layer) in m.layers.iter().enumerate() {
        let out_shape = layer.output_shape(shape);
        let layer_input = input.clone();
        let mut stages = Vec::new();
        let (output, output_format, geometry) = match layer {
            LayerSpec::Conv(_) | LayerSpec::Fc(_) => {
                let mut requant = None;
                if format != act {
                    let r = rescaled_format(format, act.frac_bits);
                    requant = Some((check_width(r.total_bits, index, "requantized input")?, act.total_bits));
                    let dst = b.alloc(input.len(), act);
                    stages.push(
                        input.clone().zip(dst.clone()).map(|(src, dst)| PlanOp::Requantize { src, dst }).collect(),
                    );
                    input = dst;
                }
                let weights = layer.weights().expect("conv and fc carry weights");
                let leaf =
                    leaf_format(weights.quantized.data.iter().filter(|w| !w.zero).map(|w| w.exponent), &q, index)?;
                let mut neurons = Vec::with_capacity(out_shape.len());
                match layer {
                    LayerSpec::Conv(c) => {
                        let (_, pad_y) = c.geometry(shape.h);
                        let (_, pad_x) = c.geometry(shape.w);
                        for o in 0..c.out_channels {
                            let bias = bias_raw(&c.bias, o, leaf.frac_bits, index)?;
                            for oy in 0..out_shape.h {
                                for ox in 0..out_shape.w {
                                    let mut taps = Vec::new();
                                    for i in 0..c.in_channels {
                                        for ky in 0..c.kernel {
                                            for kx in 0..c.kernel {
                                                let y = (oy * c.stride + ky) as isize - pad_y as isize;
                                                let x = (ox * c.stride + kx) as isize - pad_x as isize;
                                                if y < 0 || x < 0 || y as usize >= shape.h || x as usize >= shape.w {
                                                    continue;
                                                }
                                                let w = c.weight(o, i, ky, kx);
                                                if w.zero {
                                                    continue;
                                                }
                                                let src = input.start + shape.index(i, y as usize, x as usize) as u32;
                                                taps.push((src, w.negative, w.exponent));
                                            }
                                        }
                                    }
                                    neurons.push(neuron(taps.into_iter(), q.acc_frac_bits, bias));
                                }
                            }
                        }
                    }
                    LayerSpec::Fc(f) => {
                        for o in 0..f.out_features {
                            let bias = bias_raw(&f.bias, o, leaf.frac_bits, index)?;
                            let taps = (0..f.in_features).filter_map(|i| {
                                let w = f.weight(o, i);
                                (!w.zero).then_some((input.start + i as u32, w.negative, w.exponent))
                            });
                            neurons.push(neuron(taps, q.acc_frac_bits, bias));
                        }
                    }
                    _ => unreachable!(),
                }
                let start = b.slot_formats.len() as u32;
                let dst = start..start + neurons.len() as u32;
                let layout = lay_out_accumulators(neurons, dst, leaf, q.acc_cap_bits, index)?;
                let out_format = FixedFormat { total_bits: layout.width, frac_bits: leaf.frac_bits };
                let out = b.alloc(out_shape.len(), out_format);
                stages.push(layout.ops);
                let geometry = match layer {
                    LayerSpec::Conv(c) => LayerGeometry::Conv {
                        requant,
                        in_channels: c.in_channels as u64,
                        kernel: c.kernel as u64,
                        adder_width: layout.adder_width,
                        const_width: layout.const_width,
                    },
                    LayerSpec::Fc(f) => LayerGeometry::Fc {
                        requant,
                        fan_in: f.in_features as u64,
                        adder_width: layout.adder_width,
                        const_width: layout.const_width,
                    },
                    _ => unreachable!(),
                };
                (out, out_format, geometry)
            }
            LayerSpec::Affine(a) => {
                let per_channel = shape.h * shape.w;
                let mut width = 1;
                let mut adder_width: Option<u32> = None;
                let mut params = Vec::with_capacity(a.scale.len());
                for (s, &off) in a.scale.iter().zip(&a.offset) {
                    let scaled = off * (format.frac_bits as f64).exp2();
                    if !scaled.is_finite() || scaled.abs() >= (1u64 << (MAX_WORD_BITS - 2)) as f64 {
                        return Err(CompileError::TooWide {
                            layer: index,
                            what: "affine offset",
                            bits: MAX_WORD_BITS + 1,
                        });
                    }
                    let offset_raw = round_half_even(scaled) as i64;
                    let scale = s.as_pow2();
                    let (w, adder) = affine_width(format.total_bits, scale, offset_raw);
                    width = width.max(check_width(w, index, "affine output")?);
                    if adder {
                        adder_width = Some(adder_width.unwrap_or(0).max(w));
                    }
                    params.push((scale, offset_raw));
                }
                let out_format = FixedFormat { total_bits: width, frac_bits: format.frac_bits };
                let out = b.alloc(out_shape.len(), out_format);
                let ops = input
                    .clone()
                    .zip(out.clone())
                    .enumerate()
                    .map(|(k, (src, dst))| {
                        let (scale, offset_raw) = params[k / per_channel];
                        PlanOp::Affine { src, dst, scale, offset_raw }
                    })
                    .collect();
                stages.push(ops);
                (out, out_format, LayerGeometry::Affine { adder_width })
            }
            LayerSpec::Relu => {
                let r = rescaled_format(format, act.frac_bits);
                check_width(r.total_bits, index, "rescaled activation")?;
                let out = b.alloc(out_shape.len(), act);
                stages.push(input.clone().zip(out.clone()).map(|(src, dst)| PlanOp::Relu { src, dst }).collect());
                (out, act, LayerGeometry::Relu { width: r.total_bits, out_width: act.total_bits })
            }
            LayerSpec::MaxPool(p) => {
                let out = b.alloc(out_shape.len(), format);
                let mut ops = Vec::with_capacity(out_shape.len());
                let mut dst = out.start;
                for c in 0..out_shape.c {
                    for oy in 0..out_shape.h {
                        for ox in 0..out_shape.w {
                            let mut srcs = Vec::with_capacity(p.kernel * p.kernel);
                            for ky in 0..p.kernel {
                                for kx in 0..p.kernel {
                                    srcs.push(
                                        input.start + shape.index(c, oy * p.stride + ky, ox * p.stride + kx) as u32,
                                    );
                                }
                            }
                            ops.push(PlanOp::MaxTree { srcs, dst });
                            dst += 1;
                        }
                    }
                }
                stages.push(ops);
                (out, format, LayerGeometry::MaxPool { kernel: p.kernel as u64, width: format.total_bits })
            }
            LayerSpec::BatchNorm(_) => unreachable!("checked above"),
        };
        let estimate = estimate_layer_depth(&geometry, &table)?;
        layers.push(PlanLayer {
            index,
            tag: layer.tag(),
            kind: layer.kind_name().to_string(),
            stages,
            input: layer_input,
            output: output.clone(),
            out_shape,
            output_format,
            geometry,
            estimate,
        });
        input = output;
        shape = out_shape;
        format = output_format;
    }

    let total_estimate = layers.iter().map(|l| l.estimate).sum();
    if strict && total_estimate > budget.max_depth {
        return Err(CompileError::BudgetExceeded { total: total_estimate, budget: budget.max_depth });
    }
    Ok(EvaluationPlan {
        name: m.name.clone(),
        topology: m.topology(),
        input_shape: m.input_shape,
        input_format: act,
        quant: q,
        slot_formats: b.slot_formats,
        layers,
        total_estimate,
        budget: budget.max_depth,
    })
}

/// Checks the plan's per-layer estimates against `budget`.
pub fn check_budget(plan: &EvaluationPlan, budget: DepthBudget) -> BudgetVerdict {
    let rows = plan.layers.iter().map(|l| (l.tag, l.kind.clone(), l.estimate)).collect();
    BudgetVerdict::from_depths(&plan.name, rows, budget.max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcompile::{fold_batchnorm, parse_model};

    fn plan_for(text: &str) -> EvaluationPlan {
        let m = fold_batchnorm(&parse_model(text.as_bytes()).unwrap()).unwrap();
        compile(&m, &GateCostModel::default(), DepthBudget::default()).unwrap()
    }

    #[test]
    fn one_by_one_unit_conv_is_a_single_shift() {
        let p = plan_for(
            r#"{"name": "id", "input_shape": [1, 1, 1], "layers": [
                {"kind": "conv", "in_channels": 1, "out_channels": 1, "kernel": 1, "weights": [1.0]}]}"#,
        );
        let PlanOp::Accumulate { terms, carry_ins, constant, .. } = &p.layers[0].stages[0][0] else { panic!() };
        assert_eq!(terms, &vec![ShiftTerm { src: 0, shift: 0, negate: false }]);
        assert_eq!((*carry_ins, *constant), (0, 0));
        assert_eq!(p.layers[0].output_format, p.input_format);
        assert_eq!(p.layers[0].estimate, 0);
    }

    #[test]
    fn fc_terms_skip_zero_weights() {
        let p = plan_for(
            r#"{"name": "fc", "input_shape": [1, 4, 1], "layers": [
                {"kind": "fc", "in_features": 4, "out_features": 2,
                 "weights": [1, 0, -0.5, 0.25, 0, 0, 0, -1]}]}"#,
        );
        assert_eq!(p.shift_term_count(), 4);
        let PlanOp::Accumulate { terms, carry_ins, constant, .. } = &p.layers[0].stages[0][1] else { panic!() };
        // A lone negated leaf has no adder to carry its +1.
        assert_eq!((terms.len(), *carry_ins, *constant), (1, 0, 1));
    }

    #[test]
    fn unfolded_batchnorm_is_rejected() {
        let m = parse_model(
            br#"{"name": "b", "input_shape": [1, 1, 1], "layers": [{"kind": "batchnorm", "scale": [1], "offset": [0]}]}"#,
        )
        .unwrap();
        assert_eq!(compile(&m, &GateCostModel::default(), DepthBudget::default()), Err(CompileError::NotFolded(0)));
    }

    #[test]
    fn strict_budget() {
        let text = r#"{"name": "s", "input_shape": [4, 4, 1], "layers": [
            {"kind": "conv", "in_channels": 1, "out_channels": 1, "kernel": 3, "weights": [1,1,1,1,1,1,1,1,1]},
            {"kind": "relu"}]}"#;
        let m = parse_model(text.as_bytes()).unwrap();
        let cost = GateCostModel::default();
        let plan = compile(&m, &cost, DepthBudget::new(1)).unwrap();
        assert!(plan.total_estimate > 1);
        assert!(!check_budget(&plan, DepthBudget::new(1)).pass);
        assert!(matches!(compile_with(&m, &cost, DepthBudget::new(1), true), Err(CompileError::BudgetExceeded { .. })));
        assert!(compile_with(&m, &cost, DepthBudget::default(), true).is_ok());
    }

    #[test]
    fn empty_model_passes_with_zero_total() {
        let p = plan_for(r#"{"name": "e", "input_shape": [2, 2, 1], "layers": []}"#);
        let v = check_budget(&p, DepthBudget::default());
        assert!(v.pass);
        assert_eq!(v.total, 0);
        assert_eq!(p.output_slots(), 0..4);
    }

    #[test]
    fn topology_is_preserved_by_plan() {
        let p = plan_for(
            r#"{"name": "t", "input_shape": [4, 4, 1], "layers": [
                {"kind": "conv", "in_channels": 1, "out_channels": 1, "kernel": 1, "weights": [0.5], "bias": [0.1]},
                {"kind": "batchnorm", "scale": [2], "offset": [0.5]},
                {"kind": "relu"},
                {"kind": "maxpool", "kernel": 2},
                {"kind": "fc", "in_features": 4, "out_features": 2, "weights": [1,1,1,1,1,1,1,1]}]}"#,
        );
        let tags: String = p.layers.iter().map(|l| l.tag.to_string()).collect::<Vec<_>>().join("-");
        assert_eq!(tags, "C-B-A-P-F");
        assert_eq!(tags, p.topology);
    }
}
