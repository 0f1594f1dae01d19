// SPDX-License-Identifier: Apache-2.0

//! Analytic multiplicative-depth accounting.
//!
//! Per-layer estimates follow the shape
//! `IN * ceil(log2 KC^2) * (DA[a] + DM[b]) + DR[c] + ceil(log2 KP^2) * DMx[d]`
//! with the component depths measured on the real generators under the
//! active cost model.

use std::collections::BTreeMap;

use serde::Serialize;

use super::CompileError;
use crate::bitcore::{FixedFormat, MAX_WORD_BITS};
use crate::circuitlib::{
    build_adder_ext, build_max, build_pc_mult, build_relu, saturate, AddOptions, FixedConst, Word,
};
use crate::hbackend::{ClearBackend, Evaluator, GateCostModel, WireBit};

/// Depths of the basic generators, indexed by bit width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthCostTable {
    /// Adder producing an `a`-bit result (exact or wrapping, either carry-in).
    pub da: BTreeMap<u32, u64>,
    /// Multiplication of a `b`-bit word by the constant -1 via shift-and-add.
    /// Shift-based layers charge zero for it.
    pub dm: BTreeMap<u32, u64>,
    /// ReLU unit on a `c`-bit word.
    pub dr: BTreeMap<u32, u64>,
    /// Max unit on two `d`-bit words.
    pub dmx: BTreeMap<u32, u64>,
    /// Saturation from `in` to `out` bits, signed input or one whose sign is a
    /// known zero.
    #[serde(skip)]
    pub dq: BTreeMap<(u32, u32, bool), u64>,
}

fn depth_of(ev: &Evaluator<'_, ClearBackend>, out: &Word<bool>) -> u64 {
    ev.snapshot_report().max_depth.max(out.max_depth() as u64)
}

impl DepthCostTable {
    /// Measures every generator at widths `1..=32` on fresh depth-0 inputs.
    pub fn measure(cost: &GateCostModel) -> Self {
        let mut table = DepthCostTable {
            da: BTreeMap::new(),
            dm: BTreeMap::new(),
            dr: BTreeMap::new(),
            dmx: BTreeMap::new(),
            dq: BTreeMap::new(),
        };
        let fresh_word = |ev: &mut Evaluator<'_, ClearBackend>, w: u32| -> Word<bool> {
            let bits: Vec<WireBit<bool>> = (0..w).map(|_| ev.fresh_input(false)).collect();
            Word::new(bits, FixedFormat::integer(w)).expect("length matches")
        };
        for w in 1..=MAX_WORD_BITS {
            let mut da = 0;
            for carry_in in [false, true] {
                let mut ev = Evaluator::new(&ClearBackend, cost);
                let (a, b) = (fresh_word(&mut ev, w), fresh_word(&mut ev, w));
                let s = build_adder_ext(&mut ev, &a, &b, AddOptions { carry_in, width: Some(w) }).expect("valid");
                da = da.max(depth_of(&ev, &s));
                if w >= 2 {
                    let mut ev = Evaluator::new(&ClearBackend, cost);
                    let (a, b) = (fresh_word(&mut ev, w - 1), fresh_word(&mut ev, w - 1));
                    let s = build_adder_ext(&mut ev, &a, &b, AddOptions { carry_in, width: None }).expect("valid");
                    da = da.max(depth_of(&ev, &s));
                }
            }
            table.da.insert(w, da);

            let mut ev = Evaluator::new(&ClearBackend, cost);
            let x = fresh_word(&mut ev, w);
            let r = build_relu(&mut ev, &x);
            table.dr.insert(w, depth_of(&ev, &r));

            let mut ev = Evaluator::new(&ClearBackend, cost);
            let (x, y) = (fresh_word(&mut ev, w), fresh_word(&mut ev, w));
            let m = build_max(&mut ev, &x, &y).expect("same format");
            table.dmx.insert(w, depth_of(&ev, &m));

            if w + 2 <= MAX_WORD_BITS {
                let mut ev = Evaluator::new(&ClearBackend, cost);
                let x = fresh_word(&mut ev, w);
                let c = FixedConst { raw: -1, format: FixedFormat::integer(2) };
                let p = build_pc_mult(&mut ev, &x, c).expect("fits");
                table.dm.insert(w, depth_of(&ev, &p));
            }

            for out in 1..=MAX_WORD_BITS {
                for signed in [true, false] {
                    let mut ev = Evaluator::new(&ClearBackend, cost);
                    let mut x = fresh_word(&mut ev, w);
                    if !signed {
                        let mut bits = x.bits().to_vec();
                        *bits.last_mut().expect("non-empty") = WireBit::Const(false);
                        x = Word::new(bits, x.format()).expect("length matches");
                    }
                    let s = saturate(&mut ev, &x, out).expect("valid");
                    table.dq.insert((w, out, signed), depth_of(&ev, &s));
                }
            }
        }
        table
    }

    fn get(map: &BTreeMap<u32, u64>, name: &'static str, width: u32) -> Result<u64, CompileError> {
        map.get(&width).copied().ok_or(CompileError::MissingCost { table: name, width })
    }

    pub fn adder(&self, width: u32) -> Result<u64, CompileError> {
        Self::get(&self.da, "DA", width)
    }

    pub fn relu(&self, width: u32) -> Result<u64, CompileError> {
        Self::get(&self.dr, "DR", width)
    }

    pub fn max_unit(&self, width: u32) -> Result<u64, CompileError> {
        Self::get(&self.dmx, "DMx", width)
    }

    pub fn saturate(&self, from: u32, to: u32, signed: bool) -> Result<u64, CompileError> {
        self.dq.get(&(from, to, signed)).copied().ok_or(CompileError::MissingCost { table: "DQ", width: from })
    }
}

/// `ceil(log2 n)`, zero for `n <= 1`.
pub fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// Widths and sizes of one compiled layer that its depth estimate depends on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerGeometry {
    Conv {
        /// `(input width after rescaling, activation width)` when the input
        /// must be requantized first.
        requant: Option<(u32, u32)>,
        in_channels: u64,
        kernel: u64,
        /// Widest adder in any accumulator tree of the layer; 0 when no
        /// neuron has two or more terms.
        adder_width: u32,
        /// Width of the adder that adds per-neuron constants, if any.
        const_width: Option<u32>,
    },
    Fc {
        requant: Option<(u32, u32)>,
        fan_in: u64,
        adder_width: u32,
        const_width: Option<u32>,
    },
    Affine {
        adder_width: Option<u32>,
    },
    Relu {
        width: u32,
        out_width: u32,
    },
    MaxPool {
        kernel: u64,
        width: u32,
    },
}

/// Height multiplier of a conv accumulator: `ceil(log2 KC^2)`, with a 1x1
/// kernel over several channels charged one level per channel.
fn conv_levels(in_channels: u64, kernel: u64) -> u64 {
    if kernel >= 2 {
        ceil_log2(kernel * kernel)
    } else if in_channels > 1 {
        1
    } else {
        0
    }
}

fn requant_depth(requant: &Option<(u32, u32)>, table: &DepthCostTable) -> Result<u64, CompileError> {
    match requant {
        Some((from, to)) => table.saturate(*from, *to, true),
        None => Ok(0),
    }
}

fn const_depth(width: &Option<u32>, table: &DepthCostTable) -> Result<u64, CompileError> {
    width.map(|w| table.adder(w)).unwrap_or(Ok(0))
}

/// Analytic depth of one layer. Shift-based multiplications add nothing,
/// so the multiplier term is zero throughout.
pub fn estimate_layer_depth(g: &LayerGeometry, table: &DepthCostTable) -> Result<u64, CompileError> {
    Ok(match g {
        LayerGeometry::Conv { requant, in_channels, kernel, adder_width, const_width } => {
            let levels = in_channels * conv_levels(*in_channels, *kernel);
            let tree = if levels == 0 || *adder_width == 0 { 0 } else { levels * table.adder(*adder_width)? };
            requant_depth(requant, table)? + tree + const_depth(const_width, table)?
        }
        LayerGeometry::Fc { requant, fan_in, adder_width, const_width } => {
            let levels = ceil_log2(*fan_in);
            let tree = if levels == 0 || *adder_width == 0 { 0 } else { levels * table.adder(*adder_width)? };
            requant_depth(requant, table)? + tree + const_depth(const_width, table)?
        }
        LayerGeometry::Affine { adder_width } => const_depth(adder_width, table)?,
        LayerGeometry::Relu { width, out_width } => table.relu(*width)? + table.saturate(*width, *out_width, false)?,
        LayerGeometry::MaxPool { kernel, width } => {
            let levels = ceil_log2(kernel * kernel);
            if levels == 0 {
                0
            } else {
                levels * table.max_unit(*width)?
            }
        }
    })
}

/// Bytes sent for one encrypted input: pixels x ciphertexts per pixel x
/// bytes per ciphertext.
pub fn message_size(pixels: u64, polys_per_pixel: u64, poly_bytes: u64) -> u64 {
    pixels * polys_per_pixel * poly_bytes
}

/// One row of a budget ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerRow {
    pub index: usize,
    pub tag: char,
    pub kind: String,
    pub depth: u64,
    pub cumulative: u64,
}

/// Result of checking a plan against a depth budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetVerdict {
    pub name: String,
    pub topology: String,
    pub budget: u64,
    pub total: u64,
    pub pass: bool,
    /// First layer at which the running total exceeds the budget.
    pub first_failing_layer: Option<usize>,
    pub layers: Vec<LedgerRow>,
}

impl BudgetVerdict {
    pub fn from_depths(name: &str, rows: Vec<(char, String, u64)>, budget: u64) -> Self {
        let mut cumulative = 0;
        let mut first_failing_layer = None;
        let layers: Vec<LedgerRow> = rows
            .into_iter()
            .enumerate()
            .map(|(index, (tag, kind, depth))| {
                cumulative += depth;
                if cumulative > budget && first_failing_layer.is_none() {
                    first_failing_layer = Some(index);
                }
                LedgerRow { index, tag, kind, depth, cumulative }
            })
            .collect();
        let topology = layers.iter().map(|r| r.tag.to_string()).collect::<Vec<_>>().join("-");
        BudgetVerdict {
            name: name.to_string(),
            topology,
            budget,
            total: cumulative,
            pass: cumulative <= budget,
            first_failing_layer,
            layers,
        }
    }

    /// Ledger table: network, topology, dash-separated per-layer depth,
    /// total, budget and verdict.
    pub fn to_text(&self) -> String {
        let per_layer = self.layers.iter().map(|r| r.depth.to_string()).collect::<Vec<_>>().join("-");
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let headers = ["Network", "Topology", "MD per layer", "Total", "Budget", "Verdict"];
        let cells = [
            self.name.clone(),
            if self.topology.is_empty() { "-".into() } else { self.topology.clone() },
            if per_layer.is_empty() { "-".into() } else { per_layer },
            self.total.to_string(),
            self.budget.to_string(),
            verdict.to_string(),
        ];
        let widths: Vec<usize> = headers.iter().zip(&cells).map(|(h, c)| h.len().max(c.len())).collect();
        let line = |items: Vec<&str>| -> String {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = line(headers.to_vec());
        out.push('\n');
        out.push_str(&line(cells.iter().map(String::as_str).collect()));
        out.push('\n');
        if let Some(i) = self.first_failing_layer {
            let row = &self.layers[i];
            out.push_str(&format!(
                "budget exhausted at layer {} ({} {}): cumulative depth {} > {}\n",
                i, row.tag, row.kind, row.cumulative, self.budget
            ));
        }
        out
    }
}
