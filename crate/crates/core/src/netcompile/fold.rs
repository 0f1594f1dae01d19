// SPDX-License-Identifier: Apache-2.0

//! Batch-norm folding into power-of-two affine layers.

use super::model::{AffineSpec, LayerSpec, ModelSpec};
use super::CompileError;
use crate::quantize::quantize_weight;

/// Exponent range for folded batch-norm scales. Scales are not bound by the
/// weight exponent field, so they get a wider symmetric range.
pub const SCALE_EXP_RANGE: (i32, i32) = (-15, 15);

/// Rewrites every batch norm as `2^e`-scale plus offset. The bias of a
/// directly preceding conv/fc layer moves into the offset, scaled by the
/// quantized scale, so the quantized function is unchanged. Layer count and
/// topology are preserved.
pub fn fold_batchnorm(m: &ModelSpec) -> Result<ModelSpec, CompileError> {
    let mut layers: Vec<LayerSpec> = Vec::with_capacity(m.layers.len());
    for (index, layer) in m.layers.iter().enumerate() {
        let LayerSpec::BatchNorm(bn) = layer else {
            layers.push(layer.clone());
            continue;
        };
        let (scale, mut offset) = bn
            .inference_affine()
            .ok_or_else(|| CompileError::Schema(format!("layer {index}: batchnorm has no inference statistics")))?;
        let qscale: Vec<_> = scale.iter().map(|&s| quantize_weight(s, SCALE_EXP_RANGE.0, SCALE_EXP_RANGE.1)).collect();
        let prev_bias = match layers.last_mut() {
            Some(LayerSpec::Conv(c)) => c.bias.take(),
            Some(LayerSpec::Fc(f)) => f.bias.take(),
            _ => None,
        };
        if let Some(bias) = prev_bias {
            for ((o, b), q) in offset.iter_mut().zip(&bias).zip(&qscale) {
                *o += q.value() * b;
            }
        }
        layers.push(LayerSpec::Affine(AffineSpec { scale: qscale, offset }));
    }
    Ok(ModelSpec { name: m.name.clone(), input_shape: m.input_shape, quant: m.quant, layers })
}

pub fn is_folded(m: &ModelSpec) -> bool {
    !m.layers.iter().any(|l| matches!(l, LayerSpec::BatchNorm(_)))
}
