//! Canonical reduced ordered multi-terminal decision diagrams.
//!
//! ```text
//!  DdManager
//!  ├── nodes: Vec<Node>            arena, compacted only by collect_garbage
//!  ├── unique: key -> Edge         one node per (var, then, else) / terminal key
//!  ├── apply / unary / cofactor    computed caches
//!  └── mm / transpose / ptrace     caches used by the linear-algebra layer
//! ```
//!
//! Variables are interleaved: level `2k` is the row variable `R_k` and level
//! `2k + 1` is the column variable `C_k`. Lower levels sit closer to the root.
//! Terminals are ordered after every variable.

mod dot;
mod terminal;

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use thiserror::Error;

pub use terminal::Rounding;
use terminal::TerminalKey;

/// Position of a variable in the global order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarIndex(pub u32);

impl VarIndex {
    /// Row variable `R_k`.
    pub fn row(qubit: usize) -> Self {
        VarIndex(2 * qubit as u32)
    }

    /// Column variable `C_k`.
    pub fn col(qubit: usize) -> Self {
        VarIndex(2 * qubit as u32 + 1)
    }

    pub fn qubit(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_row(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for VarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.is_row() { 'R' } else { 'C' };
        write!(f, "{}_{}", tag, self.qubit())
    }
}

/// Handle to a node owned by a [`DdManager`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(u32);

impl Edge {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Node {
    Terminal(Complex64),
    Internal {
        var: VarIndex,
        then_edge: Edge,
        else_edge: Edge,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum UniqueKey {
    Terminal(TerminalKey),
    Internal(VarIndex, Edge, Edge),
}

/// Approximate bytes one node occupies: arena slot plus unique-table entry.
pub const NODE_BYTES: usize =
    std::mem::size_of::<Node>() + std::mem::size_of::<UniqueKey>() + std::mem::size_of::<Edge>();

/// Level reported for terminals: after every variable.
pub const TERMINAL_LEVEL: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdError {
    #[error("variable order violated: {var} has child at level {child_level}")]
    OrderViolation { var: VarIndex, child_level: u32 },
    #[error("variable {var} exceeds manager capacity of {capacity} levels")]
    VarOutOfRange { var: VarIndex, capacity: u32 },
    #[error("terminal value {re}+{im}i is not finite")]
    NonFiniteTerminal { re: f64, im: f64 },
    #[error("assignment has no value for support variable {0}")]
    MissingAssignment(VarIndex),
    #[error("shifting levels >= {threshold} by {delta} collides with or crosses the support")]
    ShiftCollision { threshold: u32, delta: i64 },
    #[error("invalid rounding: {digits} digits, zero threshold {zero_threshold}")]
    InvalidRounding { digits: u32, zero_threshold: f64 },
}

/// Handle to a registered binary terminal operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BinaryOp(u16);

impl BinaryOp {
    pub const ADD: BinaryOp = BinaryOp(0);
    pub const SUB: BinaryOp = BinaryOp(1);
    pub const MUL: BinaryOp = BinaryOp(2);
    pub const DIV: BinaryOp = BinaryOp(3);
}

/// Handle to a registered unary terminal operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnaryOp(u16);

impl UnaryOp {
    pub const IDENTITY: UnaryOp = UnaryOp(0);
    pub const CONJ: UnaryOp = UnaryOp(1);
    pub const NEG: UnaryOp = UnaryOp(2);
    pub const ABS: UnaryOp = UnaryOp(3);
}

pub type BinaryFn = fn(Complex64, Complex64) -> Complex64;

pub type UnaryFn = fn(Complex64) -> Complex64;

struct BinaryEntry {
    fun: BinaryFn,
    commutative: bool,
}

/// Keys of the caches owned by the linear-algebra layer.
#[derive(Default)]
pub(crate) struct AlgebraCaches {
    pub(crate) multiply: FxHashMap<(Edge, Edge, u32), Edge>,
    pub(crate) transpose: FxHashMap<Edge, Edge>,
    pub(crate) ptrace: FxHashMap<(Edge, u32), Edge>,
}

impl AlgebraCaches {
    fn len(&self) -> usize {
        self.multiply.len() + self.transpose.len() + self.ptrace.len()
    }

    fn clear(&mut self) {
        self.multiply.clear();
        self.transpose.clear();
        self.ptrace.clear();
    }
}

/// Owner of all nodes, the unique table and the computed caches.
///
/// A manager and its edges are a single-threaded unit: the manager may be
/// moved to another thread, but edges are only meaningful with the manager
/// that created them.
pub struct DdManager {
    nodes: Vec<Node>,
    unique: FxHashMap<UniqueKey, Edge>,
    apply_cache: FxHashMap<(BinaryOp, Edge, Edge), Edge>,
    unary_cache: FxHashMap<(UnaryOp, Edge), Edge>,
    cofactor_cache: FxHashMap<(Edge, VarIndex, bool), Edge>,
    pub(crate) algebra: AlgebraCaches,
    binary_ops: Vec<BinaryEntry>,
    unary_ops: Vec<UnaryFn>,
    rounding: Rounding,
    var_capacity: u32,
    cache_enabled: bool,
    peak_nodes: usize,
    zero: Edge,
    one: Edge,
}

impl fmt::Debug for DdManager {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DdManager")
            .field("nodes", &self.nodes.len())
            .field("var_capacity", &self.var_capacity)
            .field("rounding", &self.rounding)
            .finish()
    }
}

impl DdManager {
    /// Manager able to hold matrices over up to `max_qubits` qubits.
    pub fn new(max_qubits: usize) -> Self {
        Self::with_rounding(max_qubits, Rounding::default())
    }

    pub fn with_rounding(max_qubits: usize, rounding: Rounding) -> Self {
        let mut mgr = DdManager {
            nodes: Vec::new(),
            unique: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
            unary_cache: FxHashMap::default(),
            cofactor_cache: FxHashMap::default(),
            algebra: AlgebraCaches::default(),
            binary_ops: Vec::new(),
            unary_ops: Vec::new(),
            rounding,
            var_capacity: 2 * max_qubits as u32,
            cache_enabled: true,
            peak_nodes: 0,
            zero: Edge(0),
            one: Edge(0),
        };
        mgr.register_binary(|a, b| a + b, true);
        mgr.register_binary(|a, b| a - b, false);
        mgr.register_binary(|a, b| a * b, true);
        mgr.register_binary(|a, b| a / b, false);
        mgr.register_unary(|a| a);
        mgr.register_unary(|a| a.conj());
        mgr.register_unary(|a| -a);
        mgr.register_unary(|a| Complex64::new(a.norm(), 0.0));
        mgr.zero = mgr.constant(Complex64::new(0.0, 0.0));
        mgr.one = mgr.constant(Complex64::new(1.0, 0.0));
        mgr
    }

    pub fn register_binary(&mut self, fun: BinaryFn, commutative: bool) -> BinaryOp {
        self.binary_ops.push(BinaryEntry { fun, commutative });
        BinaryOp(self.binary_ops.len() as u16 - 1)
    }

    pub fn register_unary(&mut self, fun: UnaryFn) -> UnaryOp {
        self.unary_ops.push(fun);
        UnaryOp(self.unary_ops.len() as u16 - 1)
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    /// Number of variable levels this manager accepts.
    pub fn var_capacity(&self) -> u32 {
        self.var_capacity
    }

    pub fn max_qubits(&self) -> usize {
        (self.var_capacity / 2) as usize
    }

    pub fn zero(&self) -> Edge {
        self.zero
    }

    pub fn one(&self) -> Edge {
        self.one
    }

    /// Nodes currently allocated in the arena.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// High-water mark of [`node_count`](Self::node_count).
    pub fn peak_node_count(&self) -> usize {
        self.peak_nodes
    }

    pub fn cache_entries(&self) -> usize {
        self.apply_cache.len()
            + self.unary_cache.len()
            + self.cofactor_cache.len()
            + self.algebra.len()
    }

    /// Drops every computed-cache entry. Nodes and edges stay valid.
    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.unary_cache.clear();
        self.cofactor_cache.clear();
        self.algebra.clear();
    }

    /// Disables (or re-enables) all computed caches.
    pub fn set_cache_enabled(&mut self, enabled: bool) {
        self.cache_enabled = enabled;
        if !enabled {
            self.clear_caches();
        }
    }

    pub(crate) fn cache_enabled(&self) -> bool {
        self.cache_enabled
    }

    // ---- node access -------------------------------------------------------

    pub(crate) fn node(&self, e: Edge) -> Node {
        self.nodes[e.index()]
    }

    pub fn is_terminal(&self, e: Edge) -> bool {
        matches!(self.node(e), Node::Terminal(_))
    }

    /// Terminal value, or `None` for internal nodes.
    pub fn value(&self, e: Edge) -> Option<Complex64> {
        match self.node(e) {
            Node::Terminal(v) => Some(v),
            Node::Internal { .. } => None,
        }
    }

    /// Level of the node's variable, [`TERMINAL_LEVEL`] for terminals.
    pub fn level(&self, e: Edge) -> u32 {
        match self.node(e) {
            Node::Terminal(_) => TERMINAL_LEVEL,
            Node::Internal { var, .. } => var.0,
        }
    }

    pub fn var(&self, e: Edge) -> Option<VarIndex> {
        match self.node(e) {
            Node::Terminal(_) => None,
            Node::Internal { var, .. } => Some(var),
        }
    }

    /// `(then, else)` children of an internal node.
    pub fn children(&self, e: Edge) -> Option<(Edge, Edge)> {
        match self.node(e) {
            Node::Terminal(_) => None,
            Node::Internal {
                then_edge,
                else_edge,
                ..
            } => Some((then_edge, else_edge)),
        }
    }

    /// Branches of `e` with respect to the variable at `level`; a node that
    /// does not test `level` is its own branch on both sides.
    pub(crate) fn branches(&self, e: Edge, level: u32) -> (Edge, Edge) {
        match self.node(e) {
            Node::Internal {
                var,
                then_edge,
                else_edge,
            } if var.0 == level => (then_edge, else_edge),
            _ => (e, e),
        }
    }

    // ---- construction ------------------------------------------------------

    fn push(&mut self, key: UniqueKey, node: Node) -> Edge {
        let e = Edge(self.nodes.len() as u32);
        self.nodes.push(node);
        self.unique.insert(key, e);
        self.peak_nodes = self.peak_nodes.max(self.nodes.len());
        e
    }

    /// Canonical terminal for `c` after key rounding. The first value seen
    /// for a key becomes its stored representative.
    pub fn terminal(&mut self, c: Complex64) -> Result<Edge, DdError> {
        let key = self.rounding.key(c)?;
        if let Some(&e) = self.unique.get(&UniqueKey::Terminal(key)) {
            return Ok(e);
        }
        let value = self.rounding.flush(c);
        Ok(self.push(UniqueKey::Terminal(key), Node::Terminal(value)))
    }

    /// Like [`terminal`](Self::terminal) but panics on NaN or infinite input.
    pub fn constant(&mut self, c: Complex64) -> Edge {
        match self.terminal(c) {
            Ok(e) => e,
            Err(err) => panic!("{err}"),
        }
    }

    pub fn real(&mut self, x: f64) -> Edge {
        self.constant(Complex64::new(x, 0.0))
    }

    /// Checked node constructor.
    pub fn mk_internal(&mut self, var: VarIndex, then_e: Edge, else_e: Edge) -> Result<Edge, DdError> {
        if var.0 >= self.var_capacity {
            return Err(DdError::VarOutOfRange {
                var,
                capacity: self.var_capacity,
            });
        }
        for child in [then_e, else_e] {
            let child_level = self.level(child);
            if child_level <= var.0 {
                return Err(DdError::OrderViolation { var, child_level });
            }
        }
        Ok(self.mk(var.0, then_e, else_e))
    }

    /// Unchecked constructor used by the algorithms, which preserve the order
    /// by construction.
    pub(crate) fn mk(&mut self, level: u32, then_e: Edge, else_e: Edge) -> Edge {
        if then_e == else_e {
            return then_e;
        }
        debug_assert!(self.level(then_e) > level && self.level(else_e) > level);
        let var = VarIndex(level);
        let key = UniqueKey::Internal(var, then_e, else_e);
        if let Some(&e) = self.unique.get(&key) {
            return e;
        }
        self.push(
            key,
            Node::Internal {
                var,
                then_edge: then_e,
                else_edge: else_e,
            },
        )
    }

    /// Compacts the arena to the nodes reachable from `roots` and returns the
    /// roots renumbered. Every other edge and all cache entries become
    /// invalid. Terminals are all kept, so a key never changes representative
    /// and results do not depend on when collection runs.
    pub fn collect_garbage(&mut self, roots: &[Edge]) -> Vec<Edge> {
        let mut keep = self.reachable(roots);
        keep.extend(
            (0..self.nodes.len() as u32)
                .map(Edge)
                .filter(|&e| matches!(self.nodes[e.index()], Node::Terminal(_))),
        );
        keep.sort_unstable_by_key(|&e| (std::cmp::Reverse(self.level(e)), e));
        keep.dedup();
        let mut remap = FxHashMap::default();
        let old = std::mem::take(&mut self.nodes);
        self.unique.clear();
        self.clear_caches();
        for e in keep {
            let key_node = match old[e.index()] {
                Node::Terminal(v) => {
                    let key = self.rounding.key(v).expect("stored terminals are finite");
                    (UniqueKey::Terminal(key), Node::Terminal(v))
                }
                Node::Internal {
                    var,
                    then_edge,
                    else_edge,
                } => {
                    let (t, el) = (remap[&then_edge], remap[&else_edge]);
                    (
                        UniqueKey::Internal(var, t, el),
                        Node::Internal {
                            var,
                            then_edge: t,
                            else_edge: el,
                        },
                    )
                }
            };
            let fresh = Edge(self.nodes.len() as u32);
            self.nodes.push(key_node.1);
            self.unique.insert(key_node.0, fresh);
            remap.insert(e, fresh);
        }
        self.zero = remap[&self.zero];
        self.one = remap[&self.one];
        roots.iter().map(|r| remap[r]).collect()
    }

    // ---- Apply -------------------------------------------------------------

    /// Combines two diagrams pointwise under `op`.
    ///
    /// # Panics
    /// If `op` produces a NaN or infinite terminal value.
    pub fn apply(&mut self, f: Edge, g: Edge, op: BinaryOp) -> Edge {
        let entry = &self.binary_ops[op.0 as usize];
        let (fun, commutative) = (entry.fun, entry.commutative);
        self.apply_rec(f, g, op, fun, commutative)
    }

    fn apply_rec(&mut self, f: Edge, g: Edge, op: BinaryOp, fun: BinaryFn, commutative: bool) -> Edge {
        let (f, g) = if commutative && f > g { (g, f) } else { (f, g) };
        if let (Node::Terminal(a), Node::Terminal(b)) = (self.node(f), self.node(g)) {
            return self.constant(fun(a, b));
        }
        if let Some(r) = self.apply_shortcut(f, g, op) {
            return r;
        }
        if self.cache_enabled {
            if let Some(&r) = self.apply_cache.get(&(op, f, g)) {
                return r;
            }
        }
        let level = self.level(f).min(self.level(g));
        let (f1, f0) = self.branches(f, level);
        let (g1, g0) = self.branches(g, level);
        let t = self.apply_rec(f1, g1, op, fun, commutative);
        let e = self.apply_rec(f0, g0, op, fun, commutative);
        let r = self.mk(level, t, e);
        if self.cache_enabled {
            self.apply_cache.insert((op, f, g), r);
        }
        r
    }

    fn apply_shortcut(&self, f: Edge, g: Edge, op: BinaryOp) -> Option<Edge> {
        let (zero, one) = (self.zero, self.one);
        match op {
            BinaryOp::ADD if f == zero => Some(g),
            BinaryOp::ADD if g == zero => Some(f),
            BinaryOp::SUB if g == zero => Some(f),
            BinaryOp::MUL if f == zero || g == zero => Some(zero),
            BinaryOp::MUL if f == one => Some(g),
            BinaryOp::MUL if g == one => Some(f),
            BinaryOp::DIV if g == one => Some(f),
            _ => None,
        }
    }

    /// Replaces every terminal value `t` with `op(t)`.
    ///
    /// # Panics
    /// If `op` produces a NaN or infinite terminal value.
    pub fn map_terminals(&mut self, f: Edge, op: UnaryOp) -> Edge {
        if op == UnaryOp::IDENTITY {
            return f;
        }
        let fun = self.unary_ops[op.0 as usize];
        self.map_rec(f, op, fun)
    }

    fn map_rec(&mut self, f: Edge, op: UnaryOp, fun: UnaryFn) -> Edge {
        let (level, t, e) = match self.node(f) {
            Node::Terminal(v) => return self.constant(fun(v)),
            Node::Internal {
                var,
                then_edge,
                else_edge,
            } => (var.0, then_edge, else_edge),
        };
        if self.cache_enabled {
            if let Some(&r) = self.unary_cache.get(&(op, f)) {
                return r;
            }
        }
        let t = self.map_rec(t, op, fun);
        let e = self.map_rec(e, op, fun);
        let r = self.mk(level, t, e);
        if self.cache_enabled {
            self.unary_cache.insert((op, f), r);
        }
        r
    }

    /// `f` multiplied by a constant.
    pub fn scale(&mut self, f: Edge, c: Complex64) -> Edge {
        let k = self.constant(c);
        self.apply(f, k, BinaryOp::MUL)
    }

    // ---- restriction and relabeling -------------------------------------

    /// Restriction of `f` with `var` fixed to `polarity`.
    pub fn cofactor(&mut self, f: Edge, var: VarIndex, polarity: bool) -> Edge {
        let (level, t, e) = match self.node(f) {
            Node::Terminal(_) => return f,
            Node::Internal {
                var: v,
                then_edge,
                else_edge,
            } => (v.0, then_edge, else_edge),
        };
        if level > var.0 {
            return f;
        }
        if level == var.0 {
            return if polarity { t } else { e };
        }
        if self.cache_enabled {
            if let Some(&r) = self.cofactor_cache.get(&(f, var, polarity)) {
                return r;
            }
        }
        let t = self.cofactor(t, var, polarity);
        let e = self.cofactor(e, var, polarity);
        let r = self.mk(level, t, e);
        if self.cache_enabled {
            self.cofactor_cache.insert((f, var, polarity), r);
        }
        r
    }

    /// Relabels every node at level `>= threshold` to `level + delta`.
    pub fn shift_variables(&mut self, f: Edge, threshold: VarIndex, delta: i64) -> Result<Edge, DdError> {
        if delta == 0 {
            return Ok(f);
        }
        let support = self.support(f);
        let collision = DdError::ShiftCollision {
            threshold: threshold.0,
            delta,
        };
        let fixed_max = support.iter().filter(|v| v.0 < threshold.0).map(|v| v.0 as i64).max();
        for v in support.iter().filter(|v| v.0 >= threshold.0) {
            let moved = v.0 as i64 + delta;
            if moved < 0 || fixed_max.is_some_and(|m| moved <= m) {
                return Err(collision);
            }
            if moved >= self.var_capacity as i64 {
                return Err(DdError::VarOutOfRange {
                    var: VarIndex(moved as u32),
                    capacity: self.var_capacity,
                });
            }
        }
        let mut memo = FxHashMap::default();
        Ok(self.shift_rec(f, threshold.0, delta, &mut memo))
    }

    fn shift_rec(&mut self, f: Edge, threshold: u32, delta: i64, memo: &mut FxHashMap<Edge, Edge>) -> Edge {
        let (level, t, e) = match self.node(f) {
            Node::Terminal(_) => return f,
            Node::Internal {
                var,
                then_edge,
                else_edge,
            } => (var.0, then_edge, else_edge),
        };
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let t = self.shift_rec(t, threshold, delta, memo);
        let e = self.shift_rec(e, threshold, delta, memo);
        let new_level = if level >= threshold {
            (level as i64 + delta) as u32
        } else {
            level
        };
        let r = self.mk(new_level, t, e);
        memo.insert(f, r);
        r
    }

    // ---- inspection ----------------------------------------------------

    /// Variables tested anywhere in `f`.
    pub fn support(&self, f: Edge) -> BTreeSet<VarIndex> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut out = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(e) = stack.pop() {
            if !seen.insert(e) {
                continue;
            }
            if let Node::Internal {
                var,
                then_edge,
                else_edge,
            } = self.node(e)
            {
                out.insert(var);
                stack.push(then_edge);
                stack.push(else_edge);
            }
        }
        out
    }

    /// Distinct nodes (internal and terminal) reachable from `f`.
    pub fn count_nodes(&self, f: Edge) -> usize {
        self.count_nodes_many(&[f])
    }

    /// Distinct nodes reachable from any of `roots`, shared nodes counted once.
    pub fn count_nodes_many(&self, roots: &[Edge]) -> usize {
        self.reachable(roots).len()
    }

    pub(crate) fn reachable(&self, roots: &[Edge]) -> Vec<Edge> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut order = Vec::new();
        let mut stack = roots.to_vec();
        while let Some(e) = stack.pop() {
            if !seen.insert(e) {
                continue;
            }
            order.push(e);
            if let Some((t, el)) = self.children(e) {
                stack.push(t);
                stack.push(el);
            }
        }
        order
    }

    /// Value of `f` under `assignment`; variables outside the support are
    /// never queried.
    pub fn eval<A>(&self, f: Edge, assignment: A) -> Result<Complex64, DdError>
    where
        A: Fn(VarIndex) -> Option<bool>,
    {
        let mut e = f;
        loop {
            match self.node(e) {
                Node::Terminal(v) => return Ok(v),
                Node::Internal {
                    var,
                    then_edge,
                    else_edge,
                } => {
                    let bit = assignment(var).ok_or(DdError::MissingAssignment(var))?;
                    e = if bit { then_edge } else { else_edge };
                }
            }
        }
    }

    /// Checks both reduction rules and the variable order on everything
    /// reachable from `roots`. Returns a description of the first violation.
    pub fn check_reduced(&self, roots: &[Edge]) -> Result<(), String> {
        let mut seen = FxHashMap::default();
        for e in self.reachable(roots) {
            match self.node(e) {
                Node::Terminal(v) => {
                    let key = UniqueKey::Terminal(self.rounding.key(v).map_err(|e| e.to_string())?);
                    if let Some(prev) = seen.insert(key, e) {
                        return Err(format!("terminals {prev:?} and {e:?} share a key"));
                    }
                }
                Node::Internal {
                    var,
                    then_edge,
                    else_edge,
                } => {
                    if then_edge == else_edge {
                        return Err(format!("{e:?} at {var} has identical children"));
                    }
                    if self.level(then_edge) <= var.0 || self.level(else_edge) <= var.0 {
                        return Err(format!("{e:?} at {var} violates the order"));
                    }
                    let key = UniqueKey::Internal(var, then_edge, else_edge);
                    if let Some(prev) = seen.insert(key, e) {
                        return Err(format!("{prev:?} and {e:?} are isomorphic"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mk_internal_collapses_redundant_nodes() {
        let mut m = DdManager::new(2);
        let one = m.one();
        let before = m.node_count();
        assert_eq!(m.mk_internal(VarIndex::row(0), one, one).unwrap(), one);
        assert_eq!(m.node_count(), before);
    }

    #[test]
    fn first_value_represents_its_key() {
        let mut m = DdManager::new(1);
        let a = m.real(0.1 + 0.2);
        let b = m.real(0.3);
        assert_eq!(a, b);
        assert_eq!(m.value(b).unwrap().re, 0.1 + 0.2);
    }

    #[test]
    fn garbage_collection_preserves_roots() {
        let mut m = DdManager::new(2);
        let (one, zero) = (m.one(), m.zero());
        let half = m.real(0.5);
        let _dead = m.mk_internal(VarIndex::col(1), half, zero).unwrap();
        let live = m.mk_internal(VarIndex::row(0), one, half).unwrap();
        let values: Vec<_> = [false, true]
            .iter()
            .map(|&b| m.eval(live, |_| Some(b)).unwrap())
            .collect();
        let roots = m.collect_garbage(&[live]);
        assert_eq!(m.node_count(), 4);
        assert!(m.check_reduced(&roots).is_ok());
        for (i, &b) in [false, true].iter().enumerate() {
            assert_eq!(m.eval(roots[0], |_| Some(b)).unwrap(), values[i]);
        }
        // Hash-consing still finds the surviving nodes.
        let (one, half) = (m.one(), m.real(0.5));
        assert_eq!(m.mk_internal(VarIndex::row(0), one, half).unwrap(), roots[0]);
        assert_eq!(m.value(m.zero()), Some(c(0.0, 0.0)));
    }

    #[test]
    fn mk_internal_is_unique() {
        let mut m = DdManager::new(2);
        let (one, zero) = (m.one(), m.zero());
        let a = m.mk_internal(VarIndex::row(0), one, zero).unwrap();
        let b = m.mk_internal(VarIndex::row(0), one, zero).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mk_internal_composed_collapse() {
        let mut m = DdManager::new(2);
        let (one, zero) = (m.one(), m.zero());
        let col = m.mk_internal(VarIndex::col(0), one, zero).unwrap();
        let top = m.mk_internal(VarIndex::row(0), col, col).unwrap();
        assert_eq!(top, col);
    }

    #[test]
    fn mk_internal_rejects_order_violations() {
        let mut m = DdManager::new(2);
        let (one, zero) = (m.one(), m.zero());
        let low = m.mk_internal(VarIndex::row(1), one, zero).unwrap();
        let err = m.mk_internal(VarIndex::row(1), low, zero).unwrap_err();
        assert!(matches!(err, DdError::OrderViolation { .. }));
        let err = m.mk_internal(VarIndex(4), one, zero).unwrap_err();
        assert!(matches!(err, DdError::VarOutOfRange { .. }));
    }

    #[test]
    fn apply_on_terminals_with_custom_xor() {
        let mut m = DdManager::new(1);
        let xor = m.register_binary(
            |a, b| {
                let bit = |x: Complex64| x.re != 0.0;
                Complex64::new((bit(a) ^ bit(b)) as u8 as f64, 0.0)
            },
            true,
        );
        let (one, zero) = (m.one(), m.zero());
        assert_eq!(m.apply(one, zero, xor), one);
    }

    #[test]
    fn apply_multiply_by_zero_is_zero() {
        let mut m = DdManager::new(2);
        let (one, zero) = (m.one(), m.zero());
        let half = m.real(0.5);
        let f0 = m.mk_internal(VarIndex::col(1), half, one).unwrap();
        let f = m.mk_internal(VarIndex::row(0), f0, zero).unwrap();
        assert_eq!(m.apply(f, zero, BinaryOp::MUL), zero);
    }

    #[test]
    fn map_terminals_conjugates_and_merges() {
        let mut m = DdManager::new(1);
        let t = m.constant(c(2.0, 3.0));
        let conj = m.map_terminals(t, UnaryOp::CONJ);
        assert_eq!(m.value(conj), Some(c(2.0, -3.0)));
        assert_eq!(m.map_terminals(t, UnaryOp::IDENTITY), t);

        let pos = m.real(0.5);
        let neg = m.real(-0.5);
        let f = m.mk_internal(VarIndex::row(0), pos, neg).unwrap();
        assert_eq!(m.count_nodes(f), 3);
        let abs = m.map_terminals(f, UnaryOp::ABS);
        assert_eq!(abs, pos);
        assert_eq!(m.count_nodes(abs), 1);
    }

    #[test]
    fn cofactor_cases() {
        let mut m = DdManager::new(6);
        let (one, zero) = (m.one(), m.zero());
        let k = m.constant(c(0.25, 1.0));
        assert_eq!(m.cofactor(k, VarIndex::row(0), true), k);
        let f = m.mk_internal(VarIndex::row(0), one, zero).unwrap();
        assert_eq!(m.cofactor(f, VarIndex::row(0), true), one);
        assert_eq!(m.cofactor(f, VarIndex::row(0), false), zero);
        assert_eq!(m.cofactor(f, VarIndex::col(5), false), f);
    }

    #[test]
    fn shift_relabels_and_validates() {
        let mut m = DdManager::new(3);
        let (one, zero) = (m.one(), m.zero());
        assert_eq!(m.shift_variables(one, VarIndex(0), 0).unwrap(), one);

        let c1 = m.mk_internal(VarIndex::col(1), one, zero).unwrap();
        let f = m.mk_internal(VarIndex::row(1), c1, zero).unwrap();
        let g = m.shift_variables(f, VarIndex(2), -2).unwrap();
        assert_eq!(m.var(g), Some(VarIndex::row(0)));
        let (t, _) = m.children(g).unwrap();
        assert_eq!(m.var(t), Some(VarIndex::col(0)));
        assert_eq!(m.count_nodes(g), m.count_nodes(f));

        // R_0 stays put, so moving R_1/C_1 down by two would collide with it.
        let h = m.mk_internal(VarIndex::row(0), f, one).unwrap();
        assert!(matches!(
            m.shift_variables(h, VarIndex(2), -2),
            Err(DdError::ShiftCollision { .. })
        ));
        assert!(matches!(
            m.shift_variables(h, VarIndex(2), 4),
            Err(DdError::VarOutOfRange { .. })
        ));
    }

    #[test]
    fn count_and_eval() {
        let mut m = DdManager::new(2);
        let (one, zero) = (m.one(), m.zero());
        assert_eq!(m.count_nodes(zero), 1);
        let f = m.mk_internal(VarIndex::row(0), one, zero).unwrap();
        assert_eq!(m.count_nodes(f), 3);
        assert_eq!(m.eval(f, |_| Some(true)).unwrap(), c(1.0, 0.0));
        let k = m.constant(c(-1.5, 2.0));
        assert_eq!(m.eval(k, |_| None).unwrap(), c(-1.5, 2.0));
        assert_eq!(
            m.eval(f, |_| None).unwrap_err(),
            DdError::MissingAssignment(VarIndex::row(0))
        );
    }

    #[test]
    fn non_finite_terminals_are_rejected() {
        let mut m = DdManager::new(1);
        assert!(matches!(
            m.terminal(c(f64::NAN, 0.0)),
            Err(DdError::NonFiniteTerminal { .. })
        ));
    }

    #[test]
    fn var_index_display() {
        assert_eq!(VarIndex::row(3).to_string(), "R_3");
        assert_eq!(VarIndex::col(0).to_string(), "C_0");
    }
}
