// SPDX-License-Identifier: Apache-2.0

//! Compiler and gate-level evaluator for shift-accumulation CNN inference
//! over bitwise leveled homomorphic encryption.
//!
//! The pipeline is:
//!
//! 1. [`netcompile::parse_model`] reads a JSON model description and
//!    log-quantizes its weights to signed powers of two ([`quantize`]).
//! 2. [`netcompile::fold_batchnorm`] rewrites batch-norm layers into a
//!    power-of-two scale plus a constant offset.
//! 3. [`netcompile::compile`] lowers every layer onto the circuit generators
//!    in [`circuitlib`]: multiplications become free wire shifts, sums become
//!    mixed-bitwidth adder trees, activations and pooling become exact
//!    comparison circuits. Each layer carries an analytic multiplicative
//!    depth estimate checked against a [`hbackend::DepthBudget`].
//! 4. [`runtime::evaluate`] runs the plan gate by gate on a
//!    [`hbackend::GateBackend`] (the shipped one is the clear-bit simulator)
//!    and [`runtime::reference_eval`] computes the same quantized function
//!    with plain integers so the two can be compared bit for bit.

pub mod bitcore;
pub mod circuitlib;
pub mod dataset;
pub mod hbackend;
pub mod netcompile;
pub mod quantize;
pub mod runtime;

pub use bitcore::{decode_fixed, encode_fixed, sign_extend, FixedFormat, PlainWord};
pub use circuitlib::Word;
pub use hbackend::{
    ClearBackend, CounterReport, DepthBudget, Evaluator, GateBackend, GateCostModel, GateKind, WireBit,
};
pub use netcompile::{compile, fold_batchnorm, parse_model, EvaluationPlan, ModelSpec};
pub use quantize::{QuantConfig, QuantizedTensor, QuantizedWeight};
pub use runtime::{evaluate, reference_eval, InferenceResult};
