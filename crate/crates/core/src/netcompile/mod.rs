// SPDX-License-Identifier: Apache-2.0

//! Model description, batch-norm folding, lowering to gate-level plans and
//! depth-budget accounting.

mod depth;
mod fold;
mod model;
mod plan;

use thiserror::Error;

pub use depth::{
    ceil_log2, estimate_layer_depth, message_size, BudgetVerdict, DepthCostTable, LayerGeometry, LedgerRow,
};
pub use fold::{fold_batchnorm, is_folded, SCALE_EXP_RANGE};
pub use model::{
    parse_model, AffineSpec, BatchNormSpec, ConvSpec, FcSpec, LayerSpec, ModelSpec, Padding, PoolSpec, Shape,
    WeightBlock, RESERVED_KINDS,
};
pub use plan::{check_budget, compile, compile_with, input_words, EvaluationPlan, PlanLayer, PlanOp, ShiftTerm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("layer {0}: batch norm must be folded before compiling")]
    NotFolded(usize),
    #[error("layer {layer}: {what} needs {bits} bits, more than the 32-bit word limit")]
    TooWide { layer: usize, what: &'static str, bits: u32 },
    #[error("no {table} cost entry for width {width}")]
    MissingCost { table: &'static str, width: u32 },
    #[error("estimated depth {total} exceeds the budget of {budget}")]
    BudgetExceeded { total: u64, budget: u64 },
}
