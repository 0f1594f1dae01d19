// SPDX-License-Identifier: Apache-2.0

//! Plan execution on a gate backend, the integer reference oracle and the
//! float model used to measure quantization loss.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitcore::{min_width_for, round_half_even, shift_floor, wrap_to_width, FixedFormat, PlainWord};
use crate::circuitlib::{
    arithmetic_shift, bitwise_not, build_adder, build_affine_pow2, build_max_tree,
    build_mixed_accumulator_with_carries, build_relu_requantize, build_requantize, CircuitError, Word,
};
use crate::hbackend::{CounterReport, Evaluator, GateBackend, GateCostModel};
use crate::netcompile::{ceil_log2, is_folded, EvaluationPlan, LayerSpec, ModelSpec, PlanOp, Shape};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("model must be folded before reference evaluation")]
    NotFolded,
    #[error("backend cannot decrypt the outputs")]
    Opaque,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Worker threads per stage; 0 and 1 both mean single-threaded.
    pub workers: usize,
    /// Fold gates with one constant input.
    pub fold: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { workers: 1, fold: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDepth {
    pub index: usize,
    pub tag: char,
    /// Deepest wire entering the layer.
    pub input_depth: u64,
    /// Deepest wire leaving the layer.
    pub output_depth: u64,
    pub estimate: u64,
}

impl LayerDepth {
    /// Depth the layer itself added.
    pub fn added(&self) -> u64 {
        self.output_depth.saturating_sub(self.input_depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OverflowEvent {
    pub layer: usize,
    pub neuron: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub logits: Vec<f64>,
    pub raw_logits: Vec<i64>,
    pub logit_format: FixedFormat,
    pub predicted: usize,
    pub report: CounterReport,
    pub layer_depths: Vec<LayerDepth>,
    pub overflow_events: Vec<OverflowEvent>,
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[i64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

type Slots<C> = Vec<Option<Word<C>>>;

fn slot<C>(slots: &Slots<C>, i: u32) -> &Word<C> {
    slots[i as usize].as_ref().expect("plan reads only written slots")
}

fn run_op<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    slots: &Slots<B::Cipher>,
    op: &PlanOp,
    plan: &EvaluationPlan,
) -> Result<(Word<B::Cipher>, bool), RuntimeError> {
    let act = plan.quant.act_format;
    let target = plan.slot_formats[op.dst() as usize];
    let (word, wrapped) = match op {
        PlanOp::Accumulate { terms, carry_ins, constant, leaf_format, cap_bits, .. } => {
            let mut leaves = Vec::with_capacity(terms.len());
            for t in terms {
                let x = slot(slots, t.src).sign_extend(leaf_format.total_bits).map_err(CircuitError::from)?;
                let shifted = arithmetic_shift(ev, &x.with_frac_bits(leaf_format.frac_bits), t.shift);
                leaves.push(if t.negate { bitwise_not(ev, &shifted) } else { shifted });
            }
            let const_format = leaf_format.with_total_bits(min_width_for(*constant));
            if leaves.is_empty() {
                (Word::constant(*constant, const_format), false)
            } else {
                let acc = build_mixed_accumulator_with_carries(ev, &leaves, *carry_ins as usize, *cap_bits)?;
                let word = if *constant != 0 {
                    build_adder(ev, &acc.word, &Word::constant(*constant, const_format))?
                } else {
                    acc.word
                };
                (word, acc.wrapped)
            }
        }
        PlanOp::Requantize { src, .. } => (build_requantize(ev, slot(slots, *src), act)?, false),
        PlanOp::Affine { src, scale, offset_raw, .. } => {
            (build_affine_pow2(ev, slot(slots, *src), *scale, *offset_raw)?, false)
        }
        PlanOp::Relu { src, .. } => (build_relu_requantize(ev, slot(slots, *src), act)?, false),
        PlanOp::MaxTree { srcs, .. } => {
            let words: Vec<_> = srcs.iter().map(|&s| slot(slots, s).clone()).collect();
            (build_max_tree(ev, &words)?, false)
        }
    };
    debug_assert_eq!(word.format().frac_bits, target.frac_bits);
    Ok((word.sign_extend(target.total_bits).map_err(CircuitError::from)?, wrapped))
}

type OpOutput<C> = (u32, Word<C>, bool);

fn run_chunk<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    slots: &Slots<B::Cipher>,
    ops: &[PlanOp],
    plan: &EvaluationPlan,
) -> Result<Vec<OpOutput<B::Cipher>>, RuntimeError> {
    ops.iter().map(|op| run_op(ev, slots, op, plan).map(|(w, wrapped)| (op.dst(), w, wrapped))).collect()
}

/// Below this many ops a stage runs on the calling thread.
const MIN_OPS_PER_WORKER: usize = 8;

fn run_stage<B: GateBackend>(
    ev: &mut Evaluator<'_, B>,
    slots: &Slots<B::Cipher>,
    ops: &[PlanOp],
    plan: &EvaluationPlan,
    workers: usize,
) -> Result<Vec<OpOutput<B::Cipher>>, RuntimeError> {
    let workers = workers.max(1).min(ops.len().div_ceil(MIN_OPS_PER_WORKER)).max(1);
    if workers == 1 {
        return run_chunk(ev, slots, ops, plan);
    }
    let chunk = ops.len().div_ceil(workers);
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = ops
            .chunks(chunk)
            .map(|part| {
                let mut local = ev.fork();
                scope.spawn(move || {
                    let out = run_chunk(&mut local, slots, part, plan);
                    (out, local.snapshot_report(), local.wrap_events())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    let mut outputs = Vec::with_capacity(ops.len());
    for (out, report, wraps) in results {
        ev.absorb(&report, wraps);
        outputs.extend(out?);
    }
    Ok(outputs)
}

/// Runs `plan` on `image` (one word per input pixel, CHW order).
pub fn evaluate<B: GateBackend>(
    plan: &EvaluationPlan,
    image: &[PlainWord],
    backend: &B,
    cost: &GateCostModel,
    opts: EvalOptions,
) -> Result<InferenceResult, RuntimeError> {
    if image.len() != plan.input_shape.len() {
        return Err(RuntimeError::Shape(format!(
            "image has {} values, plan expects {}",
            image.len(),
            plan.input_shape.len()
        )));
    }
    if let Some(w) = image.iter().find(|w| w.format() != plan.input_format) {
        return Err(RuntimeError::Shape(format!(
            "input word has format {}, plan expects {}",
            w.format(),
            plan.input_format
        )));
    }
    let mut ev = Evaluator::new(backend, cost).with_folding(opts.fold);
    let mut slots: Slots<B::Cipher> = vec![None; plan.slot_formats.len()];
    for (i, w) in image.iter().enumerate() {
        slots[i] = Some(ev.encrypt_word(w));
    }
    let max_depth_of = |slots: &Slots<B::Cipher>, r: std::ops::Range<u32>| -> u64 {
        r.map(|i| slot(slots, i).max_depth() as u64).max().unwrap_or(0)
    };
    let mut layer_depths = Vec::with_capacity(plan.layers.len());
    let mut overflow_events = Vec::new();
    for layer in &plan.layers {
        let input_depth = max_depth_of(&slots, layer.input.clone());
        for stage in &layer.stages {
            for (dst, word, wrapped) in run_stage(&mut ev, &slots, stage, plan, opts.workers)? {
                if wrapped {
                    overflow_events
                        .push(OverflowEvent { layer: layer.index, neuron: (dst - layer.output.start) as usize });
                }
                slots[dst as usize] = Some(word);
            }
        }
        layer_depths.push(LayerDepth {
            index: layer.index,
            tag: layer.tag,
            input_depth,
            output_depth: max_depth_of(&slots, layer.output.clone()),
            estimate: layer.estimate,
        });
    }
    let logit_format = plan.output_format();
    let mut raw_logits = Vec::new();
    for i in plan.output_slots() {
        raw_logits.push(ev.reveal_word(slot(&slots, i)).ok_or(RuntimeError::Opaque)?.raw());
    }
    Ok(InferenceResult {
        logits: raw_logits.iter().map(|&r| r as f64 * logit_format.ulp()).collect(),
        predicted: argmax(&raw_logits),
        raw_logits,
        logit_format,
        report: ev.snapshot_report(),
        layer_depths,
        overflow_events,
    })
}

/// Output of [`reference_eval`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOutput {
    pub raw_logits: Vec<i64>,
    pub frac_bits: u32,
    pub logits: Vec<f64>,
    pub predicted: usize,
    /// Neurons whose accumulator total did not fit the tree width.
    pub overflows: Vec<OverflowEvent>,
}

fn clamp_to(v: i64, total_bits: u32) -> i64 {
    let hi = (1i64 << (total_bits - 1)) - 1;
    v.clamp(-hi - 1, hi)
}

/// Floor-rescales `v` from `from` to `to` fraction bits.
fn rescale(v: i64, from: u32, to: u32) -> i64 {
    shift_floor(v, to as i32 - from as i32)
}

/// Evaluates a folded model with plain integer arithmetic: shifts with
/// floor, exact sums wrapped at the accumulator tree width, max, ReLU and
/// floor-then-saturate requantization.
pub fn reference_eval(m: &ModelSpec, image: &[PlainWord]) -> Result<ReferenceOutput, RuntimeError> {
    if !is_folded(m) {
        return Err(RuntimeError::NotFolded);
    }
    if image.len() != m.input_shape.len() {
        return Err(RuntimeError::Shape(format!(
            "image has {} values, model expects {}",
            image.len(),
            m.input_shape.len()
        )));
    }
    let q = m.quant;
    let act = q.act_format;
    let mut values: Vec<i64> = image.iter().map(PlainWord::raw).collect();
    let mut frac = image.first().map(|w| w.format().frac_bits).unwrap_or(act.frac_bits);
    let mut is_act = image.iter().all(|w| w.format() == act);
    let mut shape = m.input_shape;
    let mut overflows = Vec::new();

    for (li, layer) in m.layers.iter().enumerate() {
        let out_shape = layer.output_shape(shape);
        match layer {
            LayerSpec::Conv(_) | LayerSpec::Fc(_) => {
                if !is_act {
                    values =
                        values.iter().map(|&v| clamp_to(rescale(v, frac, act.frac_bits), act.total_bits)).collect();
                }
                let e = q.acc_frac_bits as i32;
                let qw = &layer.weights().expect("weights").quantized.data;
                let max_shift = qw.iter().filter(|w| !w.zero).map(|w| w.exponent + e).max().unwrap_or(0).max(0);
                let leaf_bits = act.total_bits + max_shift as u32;
                let leaf_frac = act.frac_bits + q.acc_frac_bits;
                let mut out = Vec::with_capacity(out_shape.len());
                let mut push_neuron = |taps: &[(i64, bool, i32)], bias: Option<f64>, neuron: usize| {
                    let mut sum: i64 = 0;
                    for &(a, neg, exp) in taps {
                        let leaf = shift_floor(a, exp + e);
                        sum += if neg { -leaf } else { leaf };
                    }
                    let bias_raw = bias.map(|b| round_half_even(b * (leaf_frac as f64).exp2()) as i64).unwrap_or(0);
                    if taps.is_empty() {
                        out.push(bias_raw);
                        return;
                    }
                    // All-negated neurons carry one leftover unit outside the tree.
                    let leftover = taps.iter().all(|t| t.1) as i64;
                    let tree_bits = (leaf_bits + ceil_log2(taps.len() as u64) as u32).min(q.acc_cap_bits);
                    let tree = wrap_to_width(sum - leftover, tree_bits);
                    if tree != sum - leftover {
                        overflows.push(OverflowEvent { layer: li, neuron });
                    }
                    out.push(tree + leftover + bias_raw);
                };
                match layer {
                    LayerSpec::Conv(c) => {
                        let (_, pad_y) = c.geometry(shape.h);
                        let (_, pad_x) = c.geometry(shape.w);
                        let mut neuron = 0;
                        for o in 0..c.out_channels {
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
                                                if !w.zero {
                                                    let a = values[shape.index(i, y as usize, x as usize)];
                                                    taps.push((a, w.negative, w.exponent));
                                                }
                                            }
                                        }
                                    }
                                    push_neuron(&taps, c.bias.as_ref().map(|b| b[o]), neuron);
                                    neuron += 1;
                                }
                            }
                        }
                    }
                    LayerSpec::Fc(f) => {
                        for o in 0..f.out_features {
                            let taps: Vec<_> = (0..f.in_features)
                                .filter_map(|i| {
                                    let w = f.weight(o, i);
                                    (!w.zero).then_some((values[i], w.negative, w.exponent))
                                })
                                .collect();
                            push_neuron(&taps, f.bias.as_ref().map(|b| b[o]), o);
                        }
                    }
                    _ => unreachable!(),
                }
                values = out;
                frac = leaf_frac;
                is_act = false;
            }
            LayerSpec::Affine(a) => {
                let per_channel = shape.h * shape.w;
                values = values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let c = k / per_channel;
                        let offset = round_half_even(a.offset[c] * (frac as f64).exp2()) as i64;
                        match a.scale[c].as_pow2() {
                            None => offset,
                            Some((neg, e)) => {
                                let s = shift_floor(v, e);
                                (if neg { -s } else { s }) + offset
                            }
                        }
                    })
                    .collect();
                is_act = false;
            }
            LayerSpec::Relu => {
                values =
                    values.iter().map(|&v| clamp_to(rescale(v.max(0), frac, act.frac_bits), act.total_bits)).collect();
                frac = act.frac_bits;
                is_act = true;
            }
            LayerSpec::MaxPool(p) => {
                let mut out = Vec::with_capacity(out_shape.len());
                for c in 0..out_shape.c {
                    for oy in 0..out_shape.h {
                        for ox in 0..out_shape.w {
                            let mut best = i64::MIN;
                            for ky in 0..p.kernel {
                                for kx in 0..p.kernel {
                                    best = best.max(values[shape.index(c, oy * p.stride + ky, ox * p.stride + kx)]);
                                }
                            }
                            out.push(best);
                        }
                    }
                }
                values = out;
            }
            LayerSpec::BatchNorm(_) => unreachable!("checked above"),
        }
        shape = out_shape;
    }
    let ulp = (-(frac as f64)).exp2();
    Ok(ReferenceOutput {
        logits: values.iter().map(|&v| v as f64 * ulp).collect(),
        predicted: argmax(&values),
        raw_logits: values,
        frac_bits: frac,
        overflows,
    })
}

/// Which weights [`float_eval`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    /// The float weights from the model file (dequantized ones where absent).
    Float,
    /// The power-of-two weights.
    Quantized,
}

/// Real-valued forward pass with no activation or accumulator quantization.
/// Works on folded and unfolded models.
pub fn float_eval(m: &ModelSpec, input: &[f64], source: WeightSource) -> Result<Vec<f64>, RuntimeError> {
    if input.len() != m.input_shape.len() {
        return Err(RuntimeError::Shape(format!(
            "input has {} values, model expects {}",
            input.len(),
            m.input_shape.len()
        )));
    }
    let mut values = input.to_vec();
    let mut shape: Shape = m.input_shape;
    for layer in &m.layers {
        let out_shape = layer.output_shape(shape);
        let weights = layer.weights().map(|w| match source {
            WeightSource::Float => w.real_values(),
            WeightSource::Quantized => w.quantized.data.iter().map(|q| q.value()).collect(),
        });
        values = match layer {
            LayerSpec::Conv(c) => {
                let w = weights.expect("conv weights");
                let k = c.kernel;
                let (_, pad_y) = c.geometry(shape.h);
                let (_, pad_x) = c.geometry(shape.w);
                let mut out = vec![0.0; out_shape.len()];
                for o in 0..c.out_channels {
                    for oy in 0..out_shape.h {
                        for ox in 0..out_shape.w {
                            let mut acc = c.bias.as_ref().map(|b| b[o]).unwrap_or(0.0);
                            for i in 0..c.in_channels {
                                for ky in 0..k {
                                    for kx in 0..k {
                                        let y = (oy * c.stride + ky) as isize - pad_y as isize;
                                        let x = (ox * c.stride + kx) as isize - pad_x as isize;
                                        if y < 0 || x < 0 || y as usize >= shape.h || x as usize >= shape.w {
                                            continue;
                                        }
                                        acc += w[((o * c.in_channels + i) * k + ky) * k + kx]
                                            * values[shape.index(i, y as usize, x as usize)];
                                    }
                                }
                            }
                            out[out_shape.index(o, oy, ox)] = acc;
                        }
                    }
                }
                out
            }
            LayerSpec::Fc(f) => {
                let w = weights.expect("fc weights");
                (0..f.out_features)
                    .map(|o| {
                        let b = f.bias.as_ref().map(|b| b[o]).unwrap_or(0.0);
                        b + (0..f.in_features).map(|i| w[o * f.in_features + i] * values[i]).sum::<f64>()
                    })
                    .collect()
            }
            LayerSpec::BatchNorm(bn) => {
                let (scale, offset) = bn.inference_affine().ok_or(RuntimeError::NotFolded)?;
                let per_channel = shape.h * shape.w;
                values.iter().enumerate().map(|(k, v)| scale[k / per_channel] * v + offset[k / per_channel]).collect()
            }
            LayerSpec::Affine(a) => {
                let per_channel = shape.h * shape.w;
                values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| a.scale[k / per_channel].value() * v + a.offset[k / per_channel])
                    .collect()
            }
            LayerSpec::Relu => values.iter().map(|v| v.max(0.0)).collect(),
            LayerSpec::MaxPool(p) => {
                let mut out = Vec::with_capacity(out_shape.len());
                for c in 0..out_shape.c {
                    for oy in 0..out_shape.h {
                        for ox in 0..out_shape.w {
                            let mut best = f64::NEG_INFINITY;
                            for ky in 0..p.kernel {
                                for kx in 0..p.kernel {
                                    best = best.max(values[shape.index(c, oy * p.stride + ky, ox * p.stride + kx)]);
                                }
                            }
                            out.push(best);
                        }
                    }
                }
                out
            }
        };
        shape = out_shape;
    }
    Ok(values)
}

/// Index of the largest float, lowest index on ties.
pub fn argmax_f64(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Counter row in the usual column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "HOPs")]
    pub hops: u64,
    #[serde(rename = "CC_Add")]
    pub cc_add: u64,
    #[serde(rename = "PC_Mult")]
    pub pc_mult: u64,
    #[serde(rename = "CC_Mult")]
    pub cc_mult: u64,
    #[serde(rename = "PC_Shift")]
    pub pc_shift: u64,
    #[serde(rename = "CC_Com")]
    pub cc_com: u64,
    #[serde(rename = "HGOPs")]
    pub hgops: u64,
    #[serde(rename = "Depth")]
    pub depth: u64,
}

pub const REPORT_COLUMNS: [&str; 8] = ["HOPs", "CC_Add", "PC_Mult", "CC_Mult", "PC_Shift", "CC_Com", "HGOPs", "Depth"];

impl ReportRow {
    pub fn from_report(r: &CounterReport) -> Self {
        ReportRow {
            hops: r.hops(),
            cc_add: r.cc_add,
            pc_mult: r.pc_mult,
            cc_mult: r.cc_mult,
            pc_shift: r.pc_shift,
            cc_com: r.cc_com,
            hgops: r.hgops,
            depth: r.max_depth,
        }
    }

    fn values(&self) -> [u64; 8] {
        [self.hops, self.cc_add, self.pc_mult, self.cc_mult, self.pc_shift, self.cc_com, self.hgops, self.depth]
    }

    /// Two aligned lines: column names, then exact integers.
    pub fn to_text(&self) -> String {
        let values = self.values().map(|v| v.to_string());
        let widths: Vec<usize> = REPORT_COLUMNS.iter().zip(&values).map(|(h, v)| h.len().max(v.len())).collect();
        let line = |cells: Vec<&str>| {
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
        };
        format!("{}\n{}\n", line(REPORT_COLUMNS.to_vec()), line(values.iter().map(String::as_str).collect()))
    }

    /// Parses the output of [`ReportRow::to_text`].
    pub fn from_text(text: &str) -> Option<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next()?.split_whitespace().collect();
        if header != REPORT_COLUMNS {
            return None;
        }
        let v: Vec<u64> = lines.next()?.split_whitespace().map(|s| s.parse().ok()).collect::<Option<_>>()?;
        let [hops, cc_add, pc_mult, cc_mult, pc_shift, cc_com, hgops, depth] = v[..] else { return None };
        Some(ReportRow { hops, cc_add, pc_mult, cc_mult, pc_shift, cc_com, hgops, depth })
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    predicted: usize,
    logits: &'a [f64],
    raw_logits: &'a [i64],
    logit_format: FixedFormat,
    counters: ReportRow,
    layer_depths: &'a [LayerDepth],
    overflow_events: &'a [OverflowEvent],
}

/// Renders a result as a counter table plus prediction lines, or as JSON.
pub fn emit_report(result: &InferenceResult, format: ReportFormat) -> String {
    let row = ReportRow::from_report(&result.report);
    match format {
        ReportFormat::Json => {
            let doc = JsonReport {
                predicted: result.predicted,
                logits: &result.logits,
                raw_logits: &result.raw_logits,
                logit_format: result.logit_format,
                counters: row,
                layer_depths: &result.layer_depths,
                overflow_events: &result.overflow_events,
            };
            let mut s = serde_json::to_string(&doc).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut s = row.to_text();
            let logits: Vec<String> = result.logits.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "predicted: {}", result.predicted);
            let _ = writeln!(s, "logits ({}): {}", result.logit_format, logits.join(" "));
            if !result.overflow_events.is_empty() {
                let _ = writeln!(s, "overflow events: {}", result.overflow_events.len());
            }
            s
        }
    }
}
