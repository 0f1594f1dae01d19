// SPDX-License-Identifier: Apache-2.0

//! JSON model description: parsing, validation, shape inference and
//! canonical re-serialization.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::CompileError;
use crate::bitcore::FixedFormat;
use crate::quantize::{error_stats, log_quantize, QuantConfig, QuantErrorStats, QuantizedTensor, QuantizedWeight};

/// Layer kinds the schema reserves but the compiler does not implement.
pub const RESERVED_KINDS: [&str; 4] = ["avgpool", "residual", "lstm", "add"];

/// Feature map shape, channels first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index in CHW order.
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.h + y) * self.w + x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Valid,
    Same,
}

/// Power-of-two weights plus, when the file carried them, the float
/// weights they were quantized from.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBlock {
    pub quantized: QuantizedTensor,
    pub float: Option<Vec<f64>>,
}

impl WeightBlock {
    pub fn error_stats(&self) -> Option<QuantErrorStats> {
        self.float.as_ref().map(|f| error_stats(f, &self.quantized))
    }

    /// Float weights if present, else the dequantized ones.
    pub fn real_values(&self) -> Vec<f64> {
        match &self.float {
            Some(f) => f.clone(),
            None => self.quantized.data.iter().map(QuantizedWeight::value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: Padding,
    /// OIHW layout.
    pub weights: WeightBlock,
    pub bias: Option<Vec<f64>>,
}

impl ConvSpec {
    /// Output spatial size and the padding added before the first row/column.
    pub fn geometry(&self, input: usize) -> (usize, usize) {
        match self.padding {
            Padding::Valid => ((input - self.kernel) / self.stride + 1, 0),
            Padding::Same => {
                let out = input.div_ceil(self.stride);
                let total = ((out - 1) * self.stride + self.kernel).saturating_sub(input);
                (out, total / 2)
            }
        }
    }

    pub fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> &QuantizedWeight {
        let k = self.kernel;
        &self.weights.quantized.data[((o * self.in_channels + i) * k + ky) * k + kx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcSpec {
    pub in_features: usize,
    pub out_features: usize,
    /// `[out, in]` layout; inputs are the previous feature map flattened in
    /// CHW order.
    pub weights: WeightBlock,
    pub bias: Option<Vec<f64>>,
}

impl FcSpec {
    pub fn weight(&self, o: usize, i: usize) -> &QuantizedWeight {
        &self.weights.quantized.data[o * self.in_features + i]
    }
}

/// Batch normalization as read from the file.
#[derive(Debug, Clone, PartialEq)]
pub enum BatchNormSpec {
    /// Inference-folded per-channel `y = scale * x + offset`.
    Folded {
        scale: Vec<f64>,
        offset: Vec<f64>,
    },
    Stats {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        mean: Vec<f64>,
        var: Vec<f64>,
        eps: f64,
    },
    /// Declared without usable statistics; folding fails.
    Missing,
}

impl BatchNormSpec {
    /// Per-channel `(scale, offset)` at inference time.
    pub fn inference_affine(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            BatchNormSpec::Folded { scale, offset } => Some((scale.clone(), offset.clone())),
            BatchNormSpec::Stats { gamma, beta, mean, var, eps } => {
                let scale: Vec<f64> = gamma.iter().zip(var).map(|(g, v)| g / (v + eps).sqrt()).collect();
                let offset = beta.iter().zip(mean).zip(&scale).map(|((b, m), s)| b - m * s).collect();
                Some((scale, offset))
            }
            BatchNormSpec::Missing => None,
        }
    }
}

/// Folded batch normalization: power-of-two scale and real offset per
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSpec {
    pub scale: Vec<QuantizedWeight>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSpec {
    pub kernel: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Conv(ConvSpec),
    Fc(FcSpec),
    BatchNorm(BatchNormSpec),
    Affine(AffineSpec),
    Relu,
    MaxPool(PoolSpec),
}

impl LayerSpec {
    /// Letter used in topology strings. Folded batch norms keep their `B`.
    pub fn tag(&self) -> char {
        match self {
            LayerSpec::Conv(_) => 'C',
            LayerSpec::Fc(_) => 'F',
            LayerSpec::BatchNorm(_) | LayerSpec::Affine(_) => 'B',
            LayerSpec::Relu => 'A',
            LayerSpec::MaxPool(_) => 'P',
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerSpec::Conv(_) => "conv",
            LayerSpec::Fc(_) => "fc",
            LayerSpec::BatchNorm(_) => "batchnorm",
            LayerSpec::Affine(_) => "affine",
            LayerSpec::Relu => "relu",
            LayerSpec::MaxPool(_) => "maxpool",
        }
    }

    pub fn weights(&self) -> Option<&WeightBlock> {
        match self {
            LayerSpec::Conv(c) => Some(&c.weights),
            LayerSpec::Fc(f) => Some(&f.weights),
            _ => None,
        }
    }

    /// Output shape for a given input shape.
    pub fn output_shape(&self, input: Shape) -> Shape {
        match self {
            LayerSpec::Conv(c) => {
                let (h, _) = c.geometry(input.h);
                let (w, _) = c.geometry(input.w);
                Shape { c: c.out_channels, h, w }
            }
            LayerSpec::Fc(f) => Shape { c: f.out_features, h: 1, w: 1 },
            LayerSpec::MaxPool(p) => {
                Shape { c: input.c, h: (input.h - p.kernel) / p.stride + 1, w: (input.w - p.kernel) / p.stride + 1 }
            }
            _ => input,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub input_shape: Shape,
    pub quant: QuantConfig,
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    /// Dash-separated layer letters, e.g. `C-B-A-P-F`.
    pub fn topology(&self) -> String {
        let tags: Vec<String> = self.layers.iter().map(|l| l.tag().to_string()).collect();
        tags.join("-")
    }

    /// Topology with repeated blocks written as `[...]xN`.
    pub fn compressed_topology(&self) -> String {
        compress_topology(&self.layers.iter().map(|l| l.tag()).collect::<Vec<_>>())
    }

    /// Shape after each layer; entry 0 is the input shape.
    pub fn shapes(&self) -> Vec<Shape> {
        let mut shapes = vec![self.input_shape];
        for layer in &self.layers {
            let last = *shapes.last().expect("non-empty");
            shapes.push(layer.output_shape(last));
        }
        shapes
    }

    pub fn output_shape(&self) -> Shape {
        *self.shapes().last().expect("non-empty")
    }

    /// Count of multiply-accumulates with a nonzero weight whose input tap
    /// lies inside the feature map (padding taps are never materialized).
    pub fn nonzero_macs(&self) -> usize {
        let shapes = self.shapes();
        let mut total = 0;
        for (layer, input) in self.layers.iter().zip(&shapes) {
            match layer {
                LayerSpec::Fc(f) => total += f.weights.quantized.nonzero_count(),
                LayerSpec::Conv(c) => {
                    let (oh, pad_y) = c.geometry(input.h);
                    let (ow, pad_x) = c.geometry(input.w);
                    for o in 0..c.out_channels {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                for i in 0..c.in_channels {
                                    for ky in 0..c.kernel {
                                        for kx in 0..c.kernel {
                                            let y = (oy * c.stride + ky) as isize - pad_y as isize;
                                            let x = (ox * c.stride + kx) as isize - pad_x as isize;
                                            let inside =
                                                y >= 0 && x >= 0 && (y as usize) < input.h && (x as usize) < input.w;
                                            if inside && !c.weight(o, i, ky, kx).zero {
                                                total += 1;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        total
    }

    /// Canonical JSON. Weights are written as `qweights`; float weights,
    /// when present, are kept alongside so the file can be re-quantized.
    pub fn to_json(&self) -> Value {
        let q = &self.quant;
        let quant = json!({
            "bitwidth": q.bitwidth,
            "e_max": q.e_max,
            "e_min": q.e_min,
            "act_total_bits": q.act_format.total_bits,
            "act_frac_bits": q.act_format.frac_bits,
            "acc_frac_bits": q.acc_frac_bits,
            "acc_cap_bits": q.acc_cap_bits,
        });
        let layers: Vec<Value> = self.layers.iter().map(layer_to_json).collect();
        json!({
            "name": self.name,
            "topology": self.topology(),
            "input_shape": [self.input_shape.h, self.input_shape.w, self.input_shape.c],
            "quant": quant,
            "layers": layers,
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("model serializes");
        text.push('\n');
        text
    }
}

fn compress_topology(tags: &[char]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let mut best = (1, 1);
        for len in 2..=(tags.len() - i) / 2 {
            let block = &tags[i..i + len];
            let mut reps = 1;
            while i + (reps + 1) * len <= tags.len() && &tags[i + reps * len..i + (reps + 1) * len] == block {
                reps += 1;
            }
            if reps > 1 && reps * len > best.0 * best.1 {
                best = (len, reps);
            }
        }
        let (len, reps) = best;
        if reps > 1 {
            let block: Vec<String> = tags[i..i + len].iter().map(char::to_string).collect();
            parts.push(format!("[{}]x{}", block.join("-"), reps));
        } else {
            parts.push(tags[i].to_string());
        }
        i += len * reps;
    }
    parts.join("-")
}

fn encode_f32(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
    B64.encode(bytes)
}

fn layer_to_json(layer: &LayerSpec) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), json!(layer.kind_name()));
    let put_weights = |m: &mut Map<String, Value>, w: &WeightBlock| {
        m.insert("qweights".into(), serde_json::to_value(&w.quantized.data).expect("weights serialize"));
        if let Some(f) = &w.float {
            m.insert("weights".into(), json!(encode_f32(f)));
        }
    };
    match layer {
        LayerSpec::Conv(c) => {
            m.insert("in_channels".into(), json!(c.in_channels));
            m.insert("out_channels".into(), json!(c.out_channels));
            m.insert("kernel".into(), json!(c.kernel));
            m.insert("stride".into(), json!(c.stride));
            m.insert("padding".into(), serde_json::to_value(c.padding).expect("padding serializes"));
            put_weights(&mut m, &c.weights);
            if let Some(b) = &c.bias {
                m.insert("bias".into(), json!(b));
            }
        }
        LayerSpec::Fc(f) => {
            m.insert("in_features".into(), json!(f.in_features));
            m.insert("out_features".into(), json!(f.out_features));
            put_weights(&mut m, &f.weights);
            if let Some(b) = &f.bias {
                m.insert("bias".into(), json!(b));
            }
        }
        LayerSpec::BatchNorm(bn) => match bn {
            BatchNormSpec::Folded { scale, offset } => {
                m.insert("scale".into(), json!(scale));
                m.insert("offset".into(), json!(offset));
            }
            BatchNormSpec::Stats { gamma, beta, mean, var, eps } => {
                m.insert("gamma".into(), json!(gamma));
                m.insert("beta".into(), json!(beta));
                m.insert("mean".into(), json!(mean));
                m.insert("var".into(), json!(var));
                m.insert("eps".into(), json!(eps));
            }
            BatchNormSpec::Missing => {}
        },
        LayerSpec::Affine(a) => {
            m.insert("qscale".into(), serde_json::to_value(&a.scale).expect("weights serialize"));
            m.insert("offset".into(), json!(a.offset));
        }
        LayerSpec::Relu => {}
        LayerSpec::MaxPool(p) => {
            m.insert("kernel".into(), json!(p.kernel));
            m.insert("stride".into(), json!(p.stride));
        }
    }
    Value::Object(m)
}

/// Float data given either inline or as base64 little-endian float32.
#[derive(Deserialize)]
#[serde(untagged)]
enum FloatBlock {
    List(Vec<f64>),
    Base64(String),
}

impl FloatBlock {
    fn decode(self, what: &str, layer: usize) -> Result<Vec<f64>, CompileError> {
        match self {
            FloatBlock::List(v) => Ok(v),
            FloatBlock::Base64(s) => {
                let bytes = B64
                    .decode(s.trim())
                    .map_err(|e| CompileError::Schema(format!("layer {layer}: {what}: bad base64: {e}")))?;
                if bytes.len() % 4 != 0 {
                    return Err(CompileError::Schema(format!(
                        "layer {layer}: {what}: {} bytes is not a whole number of float32 values",
                        bytes.len()
                    )));
                }
                Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect())
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuant {
    bitwidth: Option<u32>,
    e_max: Option<i32>,
    e_min: Option<i32>,
    act_total_bits: Option<u32>,
    act_frac_bits: Option<u32>,
    acc_frac_bits: Option<u32>,
    acc_cap_bits: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    #[serde(default)]
    topology: Option<String>,
    input_shape: Vec<usize>,
    #[serde(default)]
    quant: Option<RawQuant>,
    layers: Vec<Value>,
    /// Free-form provenance; ignored.
    #[serde(default)]
    #[allow(dead_code)]
    metadata: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    kind: String,
    in_channels: Option<usize>,
    out_channels: Option<usize>,
    in_features: Option<usize>,
    out_features: Option<usize>,
    kernel: Option<usize>,
    stride: Option<usize>,
    padding: Option<Padding>,
    weights: Option<FloatBlock>,
    qweights: Option<Vec<QuantizedWeight>>,
    bias: Option<FloatBlock>,
    scale: Option<FloatBlock>,
    qscale: Option<Vec<QuantizedWeight>>,
    offset: Option<FloatBlock>,
    gamma: Option<FloatBlock>,
    beta: Option<FloatBlock>,
    mean: Option<FloatBlock>,
    var: Option<FloatBlock>,
    eps: Option<f64>,
}

fn quant_config(raw: Option<RawQuant>) -> Result<QuantConfig, CompileError> {
    let d = QuantConfig::default();
    let Some(r) = raw else { return Ok(d) };
    let e_max = r.e_max.unwrap_or(d.e_max);
    let bitwidth = r.bitwidth.unwrap_or(d.bitwidth);
    let default_span = (1i32 << (bitwidth.clamp(2, 16) - 1)) - 2;
    let act_total = r.act_total_bits.unwrap_or(d.act_format.total_bits);
    let act_frac = r.act_frac_bits.unwrap_or(d.act_format.frac_bits);
    let act_format = FixedFormat::new(act_total, act_frac)
        .map_err(|e| CompileError::Schema(format!("quant: activation format: {e}")))?;
    let cfg = QuantConfig {
        bitwidth,
        e_max,
        e_min: r.e_min.unwrap_or(e_max - default_span),
        act_format,
        acc_frac_bits: r.acc_frac_bits.unwrap_or(d.acc_frac_bits),
        acc_cap_bits: r.acc_cap_bits.unwrap_or(d.acc_cap_bits),
    };
    cfg.validate().map_err(|e| CompileError::Schema(format!("quant: {e}")))?;
    Ok(cfg)
}

fn require<T>(v: Option<T>, field: &str, layer: usize, kind: &str) -> Result<T, CompileError> {
    v.ok_or_else(|| CompileError::Schema(format!("layer {layer} ({kind}): missing `{field}`")))
}

fn positive(v: usize, field: &str, layer: usize) -> Result<usize, CompileError> {
    if v == 0 {
        return Err(CompileError::Shape(format!("layer {layer}: `{field}` must be at least 1")));
    }
    Ok(v)
}

fn weight_block(
    raw_f: Option<FloatBlock>,
    raw_q: Option<Vec<QuantizedWeight>>,
    shape: &[usize],
    cfg: &QuantConfig,
    layer: usize,
) -> Result<WeightBlock, CompileError> {
    let expected: usize = shape.iter().product();
    let float = raw_f.map(|f| f.decode("weights", layer)).transpose()?;
    if let Some(f) = &float {
        if f.len() != expected {
            return Err(CompileError::Shape(format!(
                "layer {layer}: weights hold {} values, shape {shape:?} needs {expected}",
                f.len()
            )));
        }
    }
    let quantized = match (raw_q, &float) {
        (Some(q), _) => {
            if q.len() != expected {
                return Err(CompileError::Shape(format!(
                    "layer {layer}: qweights hold {} values, shape {shape:?} needs {expected}",
                    q.len()
                )));
            }
            if let Some(bad) = q.iter().find(|w| !w.zero && (w.exponent < cfg.e_min || w.exponent > cfg.e_max)) {
                return Err(CompileError::Schema(format!(
                    "layer {layer}: qweight exponent {} outside [{}, {}]",
                    bad.exponent, cfg.e_min, cfg.e_max
                )));
            }
            QuantizedTensor { shape: shape.to_vec(), data: q }
        }
        (None, Some(f)) => log_quantize(f, shape, cfg),
        (None, None) => {
            return Err(CompileError::Schema(format!("layer {layer}: needs `weights` or `qweights`")));
        }
    };
    Ok(WeightBlock { quantized, float })
}

fn per_channel(
    block: Option<FloatBlock>,
    what: &str,
    channels: usize,
    layer: usize,
) -> Result<Option<Vec<f64>>, CompileError> {
    let Some(block) = block else { return Ok(None) };
    let v = block.decode(what, layer)?;
    if v.len() != channels {
        return Err(CompileError::Shape(format!(
            "layer {layer}: `{what}` has {} entries for {channels} channels",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CompileError::Schema(format!("layer {layer}: `{what}` holds a non-finite value")));
    }
    Ok(Some(v))
}

fn parse_layer(raw: RawLayer, index: usize, input: Shape, cfg: &QuantConfig) -> Result<LayerSpec, CompileError> {
    let kind = raw.kind.to_ascii_lowercase();
    let k = kind.as_str();
    match k {
        "conv" => {
            let in_channels = positive(require(raw.in_channels, "in_channels", index, k)?, "in_channels", index)?;
            let out_channels = positive(require(raw.out_channels, "out_channels", index, k)?, "out_channels", index)?;
            let kernel = positive(require(raw.kernel, "kernel", index, k)?, "kernel", index)?;
            let stride = positive(raw.stride.unwrap_or(1), "stride", index)?;
            let padding = raw.padding.unwrap_or(Padding::Valid);
            if in_channels != input.c {
                return Err(CompileError::Shape(format!(
                    "layer {index}: conv expects {in_channels} input channels, previous layer yields {}",
                    input.c
                )));
            }
            if stride > kernel {
                return Err(CompileError::Unsupported(format!(
                    "layer {index}: stride {stride} exceeds kernel {kernel}"
                )));
            }
            if padding == Padding::Valid && (kernel > input.h || kernel > input.w) {
                return Err(CompileError::Shape(format!(
                    "layer {index}: {kernel}x{kernel} kernel does not fit a {}x{} map",
                    input.h, input.w
                )));
            }
            let weights =
                weight_block(raw.weights, raw.qweights, &[out_channels, in_channels, kernel, kernel], cfg, index)?;
            let bias = per_channel(raw.bias, "bias", out_channels, index)?;
            Ok(LayerSpec::Conv(ConvSpec { in_channels, out_channels, kernel, stride, padding, weights, bias }))
        }
        "fc" | "dense" | "linear" => {
            let in_features = positive(require(raw.in_features, "in_features", index, k)?, "in_features", index)?;
            let out_features = positive(require(raw.out_features, "out_features", index, k)?, "out_features", index)?;
            if in_features != input.len() {
                return Err(CompileError::Shape(format!(
                    "layer {index}: fc expects {in_features} inputs, previous layer yields {}",
                    input.len()
                )));
            }
            let weights = weight_block(raw.weights, raw.qweights, &[out_features, in_features], cfg, index)?;
            let bias = per_channel(raw.bias, "bias", out_features, index)?;
            Ok(LayerSpec::Fc(FcSpec { in_features, out_features, weights, bias }))
        }
        "batchnorm" | "bn" => {
            let c = input.c;
            let scale = per_channel(raw.scale, "scale", c, index)?;
            let offset = per_channel(raw.offset, "offset", c, index)?;
            let gamma = per_channel(raw.gamma, "gamma", c, index)?;
            let beta = per_channel(raw.beta, "beta", c, index)?;
            let mean = per_channel(raw.mean, "mean", c, index)?;
            let var = per_channel(raw.var, "var", c, index)?;
            let spec = match (scale, offset, gamma, beta, mean, var) {
                (Some(scale), Some(offset), None, None, None, None) => BatchNormSpec::Folded { scale, offset },
                (None, None, Some(gamma), Some(beta), Some(mean), Some(var)) => {
                    let eps = raw.eps.unwrap_or(1e-5);
                    if eps < 0.0 || var.iter().any(|&v| v + eps <= 0.0) {
                        return Err(CompileError::Schema(format!("layer {index}: variance plus eps must be positive")));
                    }
                    BatchNormSpec::Stats { gamma, beta, mean, var, eps }
                }
                (None, None, None, None, None, None) => BatchNormSpec::Missing,
                _ => {
                    return Err(CompileError::Schema(format!(
                        "layer {index}: batchnorm needs either scale+offset or gamma+beta+mean+var"
                    )))
                }
            };
            Ok(LayerSpec::BatchNorm(spec))
        }
        "affine" => {
            let c = input.c;
            let scale = require(raw.qscale, "qscale", index, k)?;
            if scale.len() != c {
                return Err(CompileError::Shape(format!(
                    "layer {index}: `qscale` has {} entries for {c} channels",
                    scale.len()
                )));
            }
            let offset = per_channel(raw.offset, "offset", c, index)?.unwrap_or_else(|| vec![0.0; c]);
            Ok(LayerSpec::Affine(AffineSpec { scale, offset }))
        }
        "relu" => Ok(LayerSpec::Relu),
        "maxpool" => {
            let kernel = positive(require(raw.kernel, "kernel", index, k)?, "kernel", index)?;
            let stride = positive(raw.stride.unwrap_or(kernel), "stride", index)?;
            if kernel > input.h || kernel > input.w {
                return Err(CompileError::Shape(format!(
                    "layer {index}: {kernel}x{kernel} pool does not fit a {}x{} map",
                    input.h, input.w
                )));
            }
            Ok(LayerSpec::MaxPool(PoolSpec { kernel, stride }))
        }
        other if RESERVED_KINDS.contains(&other) => Err(CompileError::Unsupported(format!(
            "layer {index}: layer kind `{other}` is reserved but not implemented"
        ))),
        other => Err(CompileError::Schema(format!("layer {index}: unknown layer kind `{other}`"))),
    }
}

/// Parses and validates a model file. Float weights are log-quantized with
/// the file's quantization settings.
pub fn parse_model(bytes: &[u8]) -> Result<ModelSpec, CompileError> {
    let raw: RawModel = serde_json::from_slice(bytes).map_err(|e| CompileError::Schema(e.to_string()))?;
    let quant = quant_config(raw.quant)?;
    let [h, w, c] = raw.input_shape[..] else {
        return Err(CompileError::Schema(format!(
            "input_shape must be [H, W, C], got {} entries",
            raw.input_shape.len()
        )));
    };
    if h == 0 || w == 0 || c == 0 {
        return Err(CompileError::Shape("input_shape entries must be at least 1".into()));
    }
    let input_shape = Shape { c, h, w };
    let mut layers = Vec::with_capacity(raw.layers.len());
    let mut shape = input_shape;
    for (index, value) in raw.layers.into_iter().enumerate() {
        let raw_layer: RawLayer =
            serde_json::from_value(value).map_err(|e| CompileError::Schema(format!("layer {index}: {e}")))?;
        let layer = parse_layer(raw_layer, index, shape, &quant)?;
        shape = layer.output_shape(shape);
        layers.push(layer);
    }
    let model = ModelSpec { name: raw.name, input_shape, quant, layers };
    if let Some(t) = raw.topology {
        let t = t.replace(' ', "");
        if t != model.topology() && t != model.compressed_topology() {
            return Err(CompileError::Schema(format!(
                "declared topology {t} does not match layers {}",
                model.topology()
            )));
        }
    }
    Ok(model)
}
