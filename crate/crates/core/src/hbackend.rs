// SPDX-License-Identifier: Apache-2.0

//! Gate-evaluation substrate.
//!
//! A [`GateBackend`] knows how to evaluate Boolean gates on its ciphertext
//! type. Everything else that is common to all backends lives in
//! [`Evaluator`]: constant folding against public bits, multiplicative depth
//! tracking per wire, and the HOP/HGOP counters.
//!
//! [`ClearBackend`] evaluates on plaintext bits and is what the compiler is
//! verified on. [`NetlistBackend`] additionally records every gate so that
//! emitted circuits can be inspected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    /// `MUX(select, then, else)`.
    Mux,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Mux,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            GateKind::Mux => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Mux => "MUX",
        }
    }

    /// Truth table. `inputs` must have exactly `arity()` entries.
    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs[0] & inputs[1],
            GateKind::Or => inputs[0] | inputs[1],
            GateKind::Nand => !(inputs[0] & inputs[1]),
            GateKind::Nor => !(inputs[0] | inputs[1]),
            GateKind::Xor => inputs[0] ^ inputs[1],
            GateKind::Xnor => !(inputs[0] ^ inputs[1]),
            GateKind::Not => !inputs[0],
            GateKind::Mux => {
                if inputs[0] {
                    inputs[1]
                } else {
                    inputs[2]
                }
            }
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = CostModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CostModelError::UnknownGate(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCost {
    /// 0 or 1: how much the gate adds to the multiplicative depth of its output.
    pub depth: u32,
    /// Homomorphic gate operations charged per evaluation.
    pub hgops: u64,
}

#[derive(Debug, Error)]
pub enum CostModelError {
    #[error("unknown gate name `{0}`")]
    UnknownGate(String),
    #[error("gate {gate}: depth weight must be 0 or 1, got {depth}")]
    BadDepth { gate: GateKind, depth: u32 },
    #[error("NOT must have depth weight 0")]
    CostlyNot,
    #[error("malformed cost model: {0}")]
    Parse(String),
    #[error("cannot read cost model {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Per-gate depth and HGOP weights. This is the policy that defines what
/// "multiplicative depth" means for a compiled circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateCostModel {
    costs: [GateCost; 8],
}

impl Default for GateCostModel {
    fn default() -> Self {
        let unit = GateCost { depth: 1, hgops: 1 };
        let mut costs = [unit; 8];
        costs[GateKind::Not.index()] = GateCost { depth: 0, hgops: 0 };
        Self { costs }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CostEntry {
    depth: Option<u32>,
    hgops: Option<u64>,
}

impl GateCostModel {
    pub fn cost(&self, kind: GateKind) -> GateCost {
        self.costs[kind.index()]
    }

    pub fn set(&mut self, kind: GateKind, cost: GateCost) -> Result<(), CostModelError> {
        if cost.depth > 1 {
            return Err(CostModelError::BadDepth { gate: kind, depth: cost.depth });
        }
        if kind == GateKind::Not && cost.depth != 0 {
            return Err(CostModelError::CostlyNot);
        }
        self.costs[kind.index()] = cost;
        Ok(())
    }

    /// Parses a TOML table of overrides on top of the default model:
    ///
    /// ```toml
    /// XOR = { depth = 0, hgops = 1 }
    /// MUX = { hgops = 2 }
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self, CostModelError> {
        let entries: BTreeMap<String, CostEntry> =
            toml::from_str(text).map_err(|e| CostModelError::Parse(e.to_string()))?;
        let mut model = Self::default();
        for (name, entry) in entries {
            let kind: GateKind = name.parse()?;
            let base = model.cost(kind);
            model.set(
                kind,
                GateCost { depth: entry.depth.unwrap_or(base.depth), hgops: entry.hgops.unwrap_or(base.hgops) },
            )?;
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self, CostModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CostModelError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        GateKind::ALL
            .iter()
            .map(|&k| {
                let c = self.cost(k);
                format!("{} = {{ depth = {}, hgops = {} }}\n", k.name(), c.depth, c.hgops)
            })
            .collect()
    }
}

/// Operation counters in the column order of the usual HE inference tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CounterReport {
    pub cc_add: u64,
    pub pc_mult: u64,
    pub cc_mult: u64,
    pub pc_shift: u64,
    pub cc_com: u64,
    pub hgops: u64,
    pub max_depth: u64,
}

impl CounterReport {
    /// Merges a report produced by another worker: counts add, depth maxes.
    pub fn merge(&mut self, other: &CounterReport) {
        self.cc_add += other.cc_add;
        self.pc_mult += other.pc_mult;
        self.cc_mult += other.cc_mult;
        self.pc_shift += other.pc_shift;
        self.cc_com += other.cc_com;
        self.hgops += other.hgops;
        self.max_depth = self.max_depth.max(other.max_depth);
    }

    /// Homomorphic operations. Shifts are wire permutations and are not
    /// counted as operations.
    pub fn hops(&self) -> u64 {
        self.cc_add + self.pc_mult + self.cc_mult + self.cc_com
    }
}

/// High-level homomorphic operation classes attributed by circuit generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    CcAdd,
    PcMult,
    CcMult,
    PcShift,
    CcCom,
}

/// Largest multiplicative depth the HE parameters can absorb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthBudget {
    pub max_depth: u64,
}

impl DepthBudget {
    pub const DEFAULT_MAX_DEPTH: u64 = 32 * 1024;

    pub fn new(max_depth: u64) -> Self {
        Self { max_depth }
    }
}

impl Default for DepthBudget {
    fn default() -> Self {
        Self { max_depth: Self::DEFAULT_MAX_DEPTH }
    }
}

/// Evaluates Boolean gates on ciphertexts.
///
/// Implementations must be shareable between worker threads; every method
/// takes `&self`.
pub trait GateBackend: Sync {
    type Cipher: Clone + Send + Sync + fmt::Debug;

    /// Encrypts a fresh input bit.
    fn encrypt(&self, value: bool) -> Self::Cipher;

    /// Noiseless encryption of a public constant, used when constant folding
    /// is disabled.
    fn trivial(&self, value: bool) -> Self::Cipher;

    /// Evaluates `kind` on exactly `kind.arity()` inputs.
    fn apply(&self, kind: GateKind, inputs: &[&Self::Cipher]) -> Self::Cipher;

    /// Decrypts a bit, or `None` if this handle holds no secret key.
    fn decrypt(&self, ct: &Self::Cipher) -> Option<bool>;
}

/// Plaintext simulator: a "ciphertext" is its own plaintext bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClearBackend;

impl GateBackend for ClearBackend {
    type Cipher = bool;

    fn encrypt(&self, value: bool) -> bool {
        value
    }

    fn trivial(&self, value: bool) -> bool {
        value
    }

    #[inline]
    fn apply(&self, kind: GateKind, inputs: &[&bool]) -> bool {
        match kind {
            GateKind::Not => !*inputs[0],
            GateKind::Mux => {
                if *inputs[0] {
                    *inputs[1]
                } else {
                    *inputs[2]
                }
            }
            _ => kind.eval(&[*inputs[0], *inputs[1]]),
        }
    }

    fn decrypt(&self, ct: &bool) -> Option<bool> {
        Some(*ct)
    }
}

/// Handle to a node of a [`NetlistBackend`], together with its clear value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetBit {
    pub node: u32,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetNode {
    Input,
    Trivial(bool),
    Gate { kind: GateKind, inputs: Vec<u32> },
}

/// Clear evaluation that also records the gate graph it executes.
#[derive(Debug, Default)]
pub struct NetlistBackend {
    nodes: Mutex<Vec<NetNode>>,
}

impl NetlistBackend {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&self, node: NetNode) -> u32 {
        let mut nodes = self.nodes.lock().expect("netlist lock poisoned");
        nodes.push(node);
        (nodes.len() - 1) as u32
    }

    /// Copy of every node recorded so far, indexed by `NetBit::node`.
    pub fn nodes(&self) -> Vec<NetNode> {
        self.nodes.lock().expect("netlist lock poisoned").clone()
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.lock().expect("netlist lock poisoned").iter().filter(|n| matches!(n, NetNode::Gate { .. })).count()
    }
}

impl GateBackend for NetlistBackend {
    type Cipher = NetBit;

    fn encrypt(&self, value: bool) -> NetBit {
        NetBit { node: self.push(NetNode::Input), value }
    }

    fn trivial(&self, value: bool) -> NetBit {
        NetBit { node: self.push(NetNode::Trivial(value)), value }
    }

    fn apply(&self, kind: GateKind, inputs: &[&NetBit]) -> NetBit {
        let values: Vec<bool> = inputs.iter().map(|b| b.value).collect();
        let node = self.push(NetNode::Gate { kind, inputs: inputs.iter().map(|b| b.node).collect() });
        NetBit { node, value: kind.eval(&values) }
    }

    fn decrypt(&self, ct: &NetBit) -> Option<bool> {
        Some(ct.value)
    }
}

/// One circuit wire: either a public constant or a ciphertext with its
/// multiplicative depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireBit<C> {
    Const(bool),
    Cipher { ct: C, depth: u32 },
}

impl<C> WireBit<C> {
    pub fn depth(&self) -> u32 {
        match self {
            WireBit::Const(_) => 0,
            WireBit::Cipher { depth, .. } => *depth,
        }
    }

    pub fn as_const(&self) -> Option<bool> {
        match self {
            WireBit::Const(v) => Some(*v),
            WireBit::Cipher { .. } => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, WireBit::Const(_))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GateError {
    #[error("{kind} takes {expected} inputs, got {got}")]
    Arity { kind: GateKind, expected: usize, got: usize },
}

/// Mutable evaluation context shared by every circuit generator.
///
/// Contexts are cheap; parallel evaluation gives each worker its own
/// [`fork`](Evaluator::fork) and merges the reports afterwards.
pub struct Evaluator<'a, B: GateBackend> {
    backend: &'a B,
    cost: &'a GateCostModel,
    counters: CounterReport,
    fold: bool,
    wraps: u64,
}

impl<'a, B: GateBackend> Evaluator<'a, B> {
    pub fn new(backend: &'a B, cost: &'a GateCostModel) -> Self {
        Self { backend, cost, counters: CounterReport::default(), fold: true, wraps: 0 }
    }

    /// Enables or disables folding of gates that mix constants and
    /// ciphertexts. Gates whose inputs are all constant always fold.
    pub fn with_folding(mut self, fold: bool) -> Self {
        self.fold = fold;
        self
    }

    pub fn backend(&self) -> &'a B {
        self.backend
    }

    pub fn cost_model(&self) -> &'a GateCostModel {
        self.cost
    }

    /// New context on the same backend with zeroed counters.
    pub fn fork(&self) -> Self {
        Self { backend: self.backend, cost: self.cost, counters: CounterReport::default(), fold: self.fold, wraps: 0 }
    }

    /// Adds the counters and wrap events of a finished fork.
    pub fn absorb(&mut self, report: &CounterReport, wraps: u64) {
        self.counters.merge(report);
        self.wraps += wraps;
    }

    pub fn snapshot_report(&self) -> CounterReport {
        self.counters
    }

    /// Number of accumulator wrap-around events observed so far. Only
    /// backends that can decrypt detect wraps.
    pub fn wrap_events(&self) -> u64 {
        self.wraps
    }

    pub(crate) fn flag_wrap(&mut self) {
        self.wraps += 1;
    }

    pub fn count(&mut self, hop: Hop) {
        let c = &mut self.counters;
        match hop {
            Hop::CcAdd => c.cc_add += 1,
            Hop::PcMult => c.pc_mult += 1,
            Hop::CcMult => c.cc_mult += 1,
            Hop::PcShift => c.pc_shift += 1,
            Hop::CcCom => c.cc_com += 1,
        }
    }

    pub fn fresh_input(&mut self, value: bool) -> WireBit<B::Cipher> {
        WireBit::Cipher { ct: self.backend.encrypt(value), depth: 0 }
    }

    pub fn constant(value: bool) -> WireBit<B::Cipher> {
        WireBit::Const(value)
    }

    pub fn reveal(&self, bit: &WireBit<B::Cipher>) -> Option<bool> {
        match bit {
            WireBit::Const(v) => Some(*v),
            WireBit::Cipher { ct, .. } => self.backend.decrypt(ct),
        }
    }

    /// Evaluates one gate, checking its arity. MUX inputs are
    /// `[select, then, else]`.
    pub fn gate(&mut self, kind: GateKind, inputs: &[&WireBit<B::Cipher>]) -> Result<WireBit<B::Cipher>, GateError> {
        if inputs.len() != kind.arity() {
            return Err(GateError::Arity { kind, expected: kind.arity(), got: inputs.len() });
        }
        Ok(self.emit(kind, inputs))
    }

    pub fn not(&mut self, a: &WireBit<B::Cipher>) -> WireBit<B::Cipher> {
        self.emit(GateKind::Not, &[a])
    }

    pub fn and(&mut self, a: &WireBit<B::Cipher>, b: &WireBit<B::Cipher>) -> WireBit<B::Cipher> {
        self.emit(GateKind::And, &[a, b])
    }

    pub fn or(&mut self, a: &WireBit<B::Cipher>, b: &WireBit<B::Cipher>) -> WireBit<B::Cipher> {
        self.emit(GateKind::Or, &[a, b])
    }

    pub fn xor(&mut self, a: &WireBit<B::Cipher>, b: &WireBit<B::Cipher>) -> WireBit<B::Cipher> {
        self.emit(GateKind::Xor, &[a, b])
    }

    pub fn mux(
        &mut self,
        select: &WireBit<B::Cipher>,
        then: &WireBit<B::Cipher>,
        otherwise: &WireBit<B::Cipher>,
    ) -> WireBit<B::Cipher> {
        self.emit(GateKind::Mux, &[select, then, otherwise])
    }

    fn emit(&mut self, kind: GateKind, inputs: &[&WireBit<B::Cipher>]) -> WireBit<B::Cipher> {
        if inputs.iter().all(|w| w.is_const()) {
            let mut values = [false; 3];
            for (v, w) in values.iter_mut().zip(inputs) {
                *v = w.as_const().unwrap_or_default();
            }
            return WireBit::Const(kind.eval(&values[..inputs.len()]));
        }
        if self.fold {
            if let Some(folded) = self.fold_partial(kind, inputs) {
                return folded;
            }
        }
        self.apply_cipher(kind, inputs)
    }

    /// Simplifies a gate with at least one constant and one cipher input.
    fn fold_partial(&mut self, kind: GateKind, inputs: &[&WireBit<B::Cipher>]) -> Option<WireBit<B::Cipher>> {
        use GateKind::*;
        if kind == Mux {
            let (s, t, e) = (inputs[0], inputs[1], inputs[2]);
            if let Some(sel) = s.as_const() {
                return Some(if sel { t.clone() } else { e.clone() });
            }
            return match (t.as_const(), e.as_const()) {
                (Some(a), Some(b)) if a == b => Some(WireBit::Const(a)),
                (Some(true), Some(false)) => Some(s.clone()),
                (Some(false), Some(true)) => Some(self.not(s)),
                (Some(true), None) => Some(self.or(s, e)),
                (Some(false), None) => {
                    let ns = self.not(s);
                    Some(self.and(&ns, e))
                }
                (None, Some(false)) => Some(self.and(s, t)),
                (None, Some(true)) => {
                    let ns = self.not(s);
                    Some(self.or(&ns, t))
                }
                _ => None,
            };
        }
        if inputs.len() < 2 {
            return None;
        }
        let (c, other) = match (inputs[0].as_const(), inputs[1].as_const()) {
            (Some(c), None) => (c, inputs[1]),
            (None, Some(c)) => (c, inputs[0]),
            _ => return None,
        };
        Some(match (kind, c) {
            (And, false) | (Nor, true) => WireBit::Const(false),
            (Or, true) | (Nand, false) => WireBit::Const(true),
            (And, true) | (Or, false) | (Xor, false) | (Xnor, true) => other.clone(),
            (Nand, true) | (Nor, false) | (Xor, true) | (Xnor, false) => self.not(other),
            _ => return None,
        })
    }

    fn apply_cipher(&mut self, kind: GateKind, inputs: &[&WireBit<B::Cipher>]) -> WireBit<B::Cipher> {
        let mut lifted: [Option<B::Cipher>; 3] = [None, None, None];
        let mut depth = 0;
        for (slot, w) in lifted.iter_mut().zip(inputs) {
            match w {
                WireBit::Const(v) => *slot = Some(self.backend.trivial(*v)),
                WireBit::Cipher { depth: d, .. } => depth = depth.max(*d),
            }
        }
        let ct = {
            let get = |i: usize| -> &B::Cipher {
                match inputs[i] {
                    WireBit::Cipher { ct, .. } => ct,
                    WireBit::Const(_) => lifted[i].as_ref().expect("constant inputs are lifted"),
                }
            };
            match inputs.len() {
                1 => self.backend.apply(kind, &[get(0)]),
                2 => self.backend.apply(kind, &[get(0), get(1)]),
                _ => self.backend.apply(kind, &[get(0), get(1), get(2)]),
            }
        };
        let cost = self.cost.cost(kind);
        let depth = depth + cost.depth;
        self.counters.hgops += cost.hgops;
        self.counters.max_depth = self.counters.max_depth.max(depth as u64);
        WireBit::Cipher { ct, depth }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_inputs_cost_nothing() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        for v in [true, false, true, true, false] {
            let b = ev.fresh_input(v);
            assert_eq!(b.depth(), 0);
            assert_eq!(ev.reveal(&b), Some(v));
        }
        assert_eq!(ev.snapshot_report(), CounterReport::default());
    }

    #[test]
    fn and_of_two_ciphers() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let a = ev.fresh_input(true);
        let b = ev.fresh_input(true);
        let c = ev.and(&a, &b);
        assert_eq!(ev.reveal(&c), Some(true));
        assert_eq!(c.depth(), 1);
        let r = ev.snapshot_report();
        assert_eq!((r.hgops, r.max_depth), (1, 1));
    }

    #[test]
    fn not_is_free_under_default_model() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let a = ev.fresh_input(true);
        let b = ev.fresh_input(false);
        let c = ev.xor(&a, &b);
        let n = ev.not(&c);
        assert_eq!(n.depth(), c.depth());
        assert_eq!(ev.snapshot_report().hgops, 1);
        assert_eq!(ev.reveal(&n), Some(false));
    }

    #[test]
    fn constant_and_folds() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let x = ev.fresh_input(true);
        let out = ev.and(&WireBit::Const(false), &x);
        assert_eq!(out, WireBit::Const(false));
        assert_eq!(ev.snapshot_report(), CounterReport::default());
    }

    #[test]
    fn all_constant_gates_fold_even_without_partial_folding() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost).with_folding(false);
        let out = ev.gate(GateKind::Mux, &[&WireBit::Const(true), &WireBit::Const(false), &WireBit::Const(true)]);
        assert_eq!(out, Ok(WireBit::Const(false)));
        assert_eq!(ev.snapshot_report(), CounterReport::default());
    }

    #[test]
    fn arity_is_checked() {
        let cost = GateCostModel::default();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let a = ev.fresh_input(true);
        assert_eq!(
            ev.gate(GateKind::Mux, &[&a, &a]),
            Err(GateError::Arity { kind: GateKind::Mux, expected: 3, got: 2 })
        );
        assert!(ev.gate(GateKind::Not, &[&a, &a]).is_err());
    }

    #[test]
    fn cost_model_parses_overrides() {
        let model = GateCostModel::from_toml_str("xor = { depth = 0 }\nMUX = { hgops = 3 }\n").unwrap();
        assert_eq!(model.cost(GateKind::Xor), GateCost { depth: 0, hgops: 1 });
        assert_eq!(model.cost(GateKind::Mux), GateCost { depth: 1, hgops: 3 });
        assert_eq!(model.cost(GateKind::And), GateCost { depth: 1, hgops: 1 });
        let round = GateCostModel::from_toml_str(&model.to_toml_string()).unwrap();
        assert_eq!(round, model);
    }

    #[test]
    fn cost_model_rejects_bad_entries() {
        assert!(matches!(GateCostModel::from_toml_str("FOO = { depth = 1 }"), Err(CostModelError::UnknownGate(_))));
        assert!(matches!(GateCostModel::from_toml_str("AND = { depth = 2 }"), Err(CostModelError::BadDepth { .. })));
        assert!(matches!(GateCostModel::from_toml_str("NOT = { depth = 1 }"), Err(CostModelError::CostlyNot)));
        assert!(matches!(GateCostModel::from_toml_str("AND = { width = 1 }"), Err(CostModelError::Parse(_))));
    }

    #[test]
    fn merge_adds_counts_and_maxes_depth() {
        let mut a = CounterReport { cc_add: 1, hgops: 10, max_depth: 7, ..Default::default() };
        let b = CounterReport { cc_add: 2, cc_com: 1, hgops: 5, max_depth: 9, ..Default::default() };
        a.merge(&b);
        assert_eq!(a, CounterReport { cc_add: 3, cc_com: 1, hgops: 15, max_depth: 9, ..Default::default() });
    }

    #[test]
    fn netlist_records_gates() {
        let cost = GateCostModel::default();
        let net = NetlistBackend::new();
        let mut ev = Evaluator::new(&net, &cost);
        let a = ev.fresh_input(true);
        let b = ev.fresh_input(false);
        let c = ev.or(&a, &b);
        let _ = ev.and(&c, &WireBit::Const(true));
        assert_eq!(net.gate_count(), 1);
        assert_eq!(ev.reveal(&c), Some(true));
        assert_eq!(net.nodes()[2], NetNode::Gate { kind: GateKind::Or, inputs: vec![0, 1] });
    }
}
