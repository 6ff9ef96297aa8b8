//! Matrix and vector semantics over decision diagrams.
//!
//! Bit `R_k` (`C_k`) is the k-th most significant bit of the row (column)
//! index, so wire 0 is the top circuit wire. A column vector only tests row
//! variables and doubles as the `2^n x 2^n` matrix whose columns are all equal
//! to it; the multiplication engine sees vectors that way.

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::dd::{BinaryOp, DdError, DdManager, Edge, UnaryOp, VarIndex, TERMINAL_LEVEL};
use crate::oracle::{DenseMatrix, DEFAULT_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Matrix,
    ColVector,
}

/// A diagram together with its matrix or vector shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quidd {
    pub root: Edge,
    pub n_qubits: usize,
    pub kind: Kind,
}

impl Quidd {
    pub fn matrix(root: Edge, n_qubits: usize) -> Self {
        Quidd {
            root,
            n_qubits,
            kind: Kind::Matrix,
        }
    }

    pub fn vector(root: Edge, n_qubits: usize) -> Self {
        Quidd {
            root,
            n_qubits,
            kind: Kind::ColVector,
        }
    }
}

/// 2x2 matrix `[row][col]`.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarOp {
    Multiply,
    Divide,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error("expected a {expected:?}, found a {found:?}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitRange { qubit: usize, n: usize },
    #[error("{n} qubits exceeds the manager capacity of {max}")]
    Capacity { n: usize, max: usize },
    #[error("dense dimension {found} is not 2^n (n <= {max})")]
    DenseShape { found: usize, max: usize },
    #[error("{n} qubits exceeds the dense cap of {cap}")]
    DenseCap { n: usize, cap: usize },
    #[error("division by zero")]
    DivisionByZero,
}

fn pow2(k: usize) -> f64 {
    2f64.powi(k as i32)
}

fn row_level(q: usize) -> u32 {
    2 * q as u32
}

fn col_level(q: usize) -> u32 {
    2 * q as u32 + 1
}

impl DdManager {
    fn check_capacity(&self, n: usize) -> Result<(), LinalgError> {
        if n > self.max_qubits() {
            return Err(LinalgError::Capacity {
                n,
                max: self.max_qubits(),
            });
        }
        Ok(())
    }

    /// Qubit tested at the root of `e`; `usize::MAX` for terminals.
    fn top_qubit(&self, e: Edge) -> usize {
        match self.level(e) {
            TERMINAL_LEVEL => usize::MAX,
            l => (l / 2) as usize,
        }
    }

    /// The four `(R_q, C_q)` sub-blocks of `e`, indexed `[row][col]`.
    fn blocks(&self, e: Edge, q: usize) -> [[Edge; 2]; 2] {
        let (r1, r0) = self.branches(e, row_level(q));
        let (r1c1, r1c0) = self.branches(r1, col_level(q));
        let (r0c1, r0c0) = self.branches(r0, col_level(q));
        [[r0c0, r0c1], [r1c0, r1c1]]
    }

    fn join_blocks(&mut self, q: usize, b: [[Edge; 2]; 2]) -> Edge {
        let hi = self.mk(col_level(q), b[1][1], b[1][0]);
        let lo = self.mk(col_level(q), b[0][1], b[0][0]);
        self.mk(row_level(q), hi, lo)
    }

    // ---- constructors --------------------------------------------------

    /// 0-qubit matrix holding a single value.
    pub fn scalar_quidd(&mut self, c: Complex64) -> Quidd {
        Quidd::matrix(self.constant(c), 0)
    }

    pub fn identity(&mut self, n: usize) -> Result<Quidd, LinalgError> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        self.kron_wires(&vec![[[one, zero], [zero, one]]; n])
    }

    /// Tensor product of one 2x2 factor per wire, built bottom-up in O(n) nodes.
    pub fn kron_wires(&mut self, factors: &[Mat2]) -> Result<Quidd, LinalgError> {
        let n = factors.len();
        self.check_capacity(n)?;
        let mut acc = self.one();
        for (q, m) in factors.iter().enumerate().rev() {
            let mut b = [[acc; 2]; 2];
            for (r, row) in m.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    b[r][c] = self.scale(acc, v);
                }
            }
            acc = self.join_blocks(q, b);
        }
        Ok(Quidd::matrix(acc, n))
    }

    /// Computational-basis ket `|index⟩` on `n` qubits.
    pub fn basis_vector(&mut self, n: usize, index: usize) -> Result<Quidd, LinalgError> {
        self.check_capacity(n)?;
        let mut acc = self.one();
        let zero = self.zero();
        for q in (0..n).rev() {
            let bit = (index >> (n - 1 - q)) & 1 == 1;
            acc = if bit {
                self.mk(row_level(q), acc, zero)
            } else {
                self.mk(row_level(q), zero, acc)
            };
        }
        Ok(Quidd::vector(acc, n))
    }

    // ---- dense bridge --------------------------------------------------

    pub fn from_dense(&mut self, m: &DenseMatrix) -> Result<Quidd, LinalgError> {
        let n = m.n_qubits();
        self.check_capacity(n)?;
        let root = self.build_matrix(m, 0, 0, 0)?;
        Ok(Quidd::matrix(root, n))
    }

    fn build_matrix(&mut self, m: &DenseMatrix, q: usize, r: usize, c: usize) -> Result<Edge, LinalgError> {
        if q == m.n_qubits() {
            return Ok(self.terminal(m.get(r, c))?);
        }
        let mut b = [[self.zero(); 2]; 2];
        for (rb, row) in b.iter_mut().enumerate() {
            for (cb, slot) in row.iter_mut().enumerate() {
                *slot = self.build_matrix(m, q + 1, 2 * r + rb, 2 * c + cb)?;
            }
        }
        Ok(self.join_blocks(q, b))
    }

    pub fn from_dense_vector(&mut self, v: &[Complex64]) -> Result<Quidd, LinalgError> {
        if !v.len().is_power_of_two() {
            return Err(LinalgError::DenseShape {
                found: v.len(),
                max: self.max_qubits(),
            });
        }
        let n = v.len().trailing_zeros() as usize;
        self.check_capacity(n)?;
        let root = self.build_vector(v, n, 0, 0)?;
        Ok(Quidd::vector(root, n))
    }

    fn build_vector(&mut self, v: &[Complex64], n: usize, q: usize, r: usize) -> Result<Edge, LinalgError> {
        if q == n {
            return Ok(self.terminal(v[r])?);
        }
        let hi = self.build_vector(v, n, q + 1, 2 * r + 1)?;
        let lo = self.build_vector(v, n, q + 1, 2 * r)?;
        Ok(self.mk(row_level(q), hi, lo))
    }

    /// Dense form of a matrix, refusing more than [`DEFAULT_CAP`] qubits.
    pub fn to_dense(&self, q: &Quidd) -> Result<DenseMatrix, LinalgError> {
        self.to_dense_capped(q, DEFAULT_CAP)
    }

    pub fn to_dense_capped(&self, q: &Quidd, cap: usize) -> Result<DenseMatrix, LinalgError> {
        expect_kind(q, Kind::Matrix)?;
        if q.n_qubits > cap {
            return Err(LinalgError::DenseCap { n: q.n_qubits, cap });
        }
        let mut m = DenseMatrix::zeros(q.n_qubits);
        self.fill_dense(q.root, q.n_qubits, 0, 0, 0, &mut m);
        Ok(m)
    }

    fn fill_dense(&self, e: Edge, n: usize, q: usize, r: usize, c: usize, m: &mut DenseMatrix) {
        if q == n {
            m.set(r, c, self.value(e).expect("support exceeds declared qubits"));
            return;
        }
        let b = self.blocks(e, q);
        for (rb, row) in b.iter().enumerate() {
            for (cb, &child) in row.iter().enumerate() {
                self.fill_dense(child, n, q + 1, 2 * r + rb, 2 * c + cb, m);
            }
        }
    }

    pub fn to_dense_vector(&self, q: &Quidd) -> Result<Vec<Complex64>, LinalgError> {
        expect_kind(q, Kind::ColVector)?;
        if q.n_qubits > 2 * DEFAULT_CAP {
            return Err(LinalgError::DenseCap {
                n: q.n_qubits,
                cap: 2 * DEFAULT_CAP,
            });
        }
        let dim = 1usize << q.n_qubits;
        Ok((0..dim).map(|i| self.entry(q, i, 0)).collect())
    }

    /// Single entry `(row, col)`; `col` is ignored for vectors.
    pub fn entry(&self, q: &Quidd, row: usize, col: usize) -> Complex64 {
        let n = q.n_qubits;
        let bit = |idx: usize, qubit: usize| (idx >> (n - 1 - qubit)) & 1 == 1;
        self.eval(q.root, |v| {
            let qubit = v.qubit();
            if qubit >= n {
                None
            } else if v.is_row() {
                Some(bit(row, qubit))
            } else {
                Some(bit(col, qubit))
            }
        })
        .expect("support exceeds declared qubits")
    }

    // ---- algebra -------------------------------------------------------

    /// `a ⊗ b`: `b`'s variables move below `a`'s and the two are multiplied
    /// pointwise.
    pub fn tensor(&mut self, a: &Quidd, b: &Quidd) -> Result<Quidd, LinalgError> {
        if a.kind != b.kind {
            return Err(LinalgError::KindMismatch {
                expected: a.kind,
                found: b.kind,
            });
        }
        let n = a.n_qubits + b.n_qubits;
        self.check_capacity(n)?;
        let shifted = self.shift_variables(b.root, VarIndex(0), 2 * a.n_qubits as i64)?;
        let root = self.apply(a.root, shifted, BinaryOp::MUL);
        Ok(Quidd {
            root,
            n_qubits: n,
            kind: a.kind,
        })
    }

    pub fn add(&mut self, a: &Quidd, b: &Quidd) -> Result<Quidd, LinalgError> {
        same_shape(a, b)?;
        let root = self.apply(a.root, b.root, BinaryOp::ADD);
        Ok(Quidd { root, ..*a })
    }

    pub fn sub(&mut self, a: &Quidd, b: &Quidd) -> Result<Quidd, LinalgError> {
        same_shape(a, b)?;
        let root = self.apply(a.root, b.root, BinaryOp::SUB);
        Ok(Quidd { root, ..*a })
    }

    pub fn scalar_op(&mut self, q: &Quidd, c: Complex64, op: ScalarOp) -> Result<Quidd, LinalgError> {
        let k = self.terminal(c)?;
        let root = match op {
            ScalarOp::Multiply => self.apply(q.root, k, BinaryOp::MUL),
            ScalarOp::Divide => {
                if k == self.zero() {
                    return Err(LinalgError::DivisionByZero);
                }
                self.apply(q.root, k, BinaryOp::DIV)
            }
        };
        Ok(Quidd { root, ..*q })
    }

    /// Swaps `R_k` with `C_k` for every qubit (plain transpose).
    pub fn swap_row_col(&mut self, q: &Quidd) -> Edge {
        self.transpose_rec(q.root)
    }

    fn transpose_rec(&mut self, e: Edge) -> Edge {
        let q = self.top_qubit(e);
        if q == usize::MAX {
            return e;
        }
        if self.cache_enabled() {
            if let Some(&r) = self.algebra.transpose.get(&e) {
                return r;
            }
        }
        let b = self.blocks(e, q);
        let mut t = [[e; 2]; 2];
        for (r, row) in t.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = self.transpose_rec(b[c][r]);
            }
        }
        let res = self.join_blocks(q, t);
        if self.cache_enabled() {
            self.algebra.transpose.insert(e, res);
        }
        res
    }

    pub fn conj_transpose(&mut self, a: &Quidd) -> Result<Quidd, LinalgError> {
        expect_kind(a, Kind::Matrix)?;
        let t = self.swap_row_col(a);
        let root = self.map_terminals(t, UnaryOp::CONJ);
        Ok(Quidd { root, ..*a })
    }

    pub fn matrix_multiply(&mut self, a: &Quidd, b: &Quidd) -> Result<Quidd, LinalgError> {
        expect_kind(a, Kind::Matrix)?;
        expect_kind(b, Kind::Matrix)?;
        if a.n_qubits != b.n_qubits {
            return Err(LinalgError::SizeMismatch {
                left: a.n_qubits,
                right: b.n_qubits,
            });
        }
        let root = self.mm(a.root, b.root, 0, a.n_qubits);
        Ok(Quidd::matrix(root, a.n_qubits))
    }

    pub fn matrix_vector(&mut self, a: &Quidd, v: &Quidd) -> Result<Quidd, LinalgError> {
        expect_kind(a, Kind::Matrix)?;
        expect_kind(v, Kind::ColVector)?;
        if a.n_qubits != v.n_qubits {
            return Err(LinalgError::SizeMismatch {
                left: a.n_qubits,
                right: v.n_qubits,
            });
        }
        let root = self.mm(a.root, v.root, 0, a.n_qubits);
        Ok(Quidd::vector(root, v.n_qubits))
    }

    /// Product of the sub-matrices on qubits `q..n` of `a` and `b`.
    ///
    /// A summation qubit that neither operand tests contributes two equal
    /// terms, hence the `2^(skipped)` factors.
    fn mm(&mut self, a: Edge, b: Edge, q: usize, n: usize) -> Edge {
        let zero = self.zero();
        if a == zero || b == zero {
            return zero;
        }
        let top = self.top_qubit(a).min(self.top_qubit(b));
        if top >= n {
            let (x, y) = (self.value(a).unwrap(), self.value(b).unwrap());
            return self.constant(x * y * pow2(n - q));
        }
        let core = self.mm_at(a, b, top, n);
        if top > q {
            self.scale(core, Complex64::new(pow2(top - q), 0.0))
        } else {
            core
        }
    }

    fn mm_at(&mut self, a: Edge, b: Edge, q: usize, n: usize) -> Edge {
        let key = (a, b, n as u32);
        if self.cache_enabled() {
            if let Some(&r) = self.algebra.multiply.get(&key) {
                return r;
            }
        }
        let ba = self.blocks(a, q);
        let bb = self.blocks(b, q);
        let mut out = [[a; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                let p0 = self.mm(ba[r][0], bb[0][c], q + 1, n);
                let p1 = self.mm(ba[r][1], bb[1][c], q + 1, n);
                *slot = self.apply(p0, p1, BinaryOp::ADD);
            }
        }
        let res = self.join_blocks(q, out);
        if self.cache_enabled() {
            self.algebra.multiply.insert(key, res);
        }
        res
    }

    /// `v v†` as transpose, conjugate, multiply and the `2^n` correction.
    pub fn outer_product(&mut self, v: &Quidd) -> Result<Quidd, LinalgError> {
        let raw = self.outer_product_unnormalized(v)?;
        self.scalar_op(&raw, Complex64::new(pow2(v.n_qubits), 0.0), ScalarOp::Divide)
    }

    /// The outer product before the `2^n` correction: every entry carries
    /// an extra factor of `2^n` because `v` multiplies as a constant-column
    /// matrix.
    pub fn outer_product_unnormalized(&mut self, v: &Quidd) -> Result<Quidd, LinalgError> {
        expect_kind(v, Kind::ColVector)?;
        let swapped = self.swap_row_col(v);
        let cctrans = self.map_terminals(swapped, UnaryOp::CONJ);
        let root = self.mm(v.root, cctrans, 0, v.n_qubits);
        Ok(Quidd::matrix(root, v.n_qubits))
    }

    /// Traces out wire `qubit`; the remaining variables below it move up one
    /// qubit so the order has no gap.
    pub fn partial_trace(&mut self, rho: &Quidd, qubit: usize) -> Result<Quidd, LinalgError> {
        expect_kind(rho, Kind::Matrix)?;
        if qubit >= rho.n_qubits {
            return Err(LinalgError::QubitRange {
                qubit,
                n: rho.n_qubits,
            });
        }
        let summed = self.ptrace_rec(rho.root, qubit);
        let root = self.shift_variables(summed, VarIndex::row(qubit + 1), -2)?;
        Ok(Quidd::matrix(root, rho.n_qubits - 1))
    }

    fn ptrace_rec(&mut self, e: Edge, qubit: usize) -> Edge {
        let top = self.top_qubit(e);
        if top > qubit {
            // R_q and C_q are both absent: the two diagonal blocks are equal.
            return self.apply(e, e, BinaryOp::ADD);
        }
        let key = (e, qubit as u32);
        if self.cache_enabled() {
            if let Some(&r) = self.algebra.ptrace.get(&key) {
                return r;
            }
        }
        let res = if top == qubit {
            let b = self.blocks(e, qubit);
            self.apply(b[1][1], b[0][0], BinaryOp::ADD)
        } else {
            let level = self.level(e);
            let (t, el) = self.children(e).unwrap();
            let t = self.ptrace_rec(t, qubit);
            let el = self.ptrace_rec(el, qubit);
            self.mk(level, t, el)
        };
        if self.cache_enabled() {
            self.algebra.ptrace.insert(key, res);
        }
        res
    }

    /// Traces out every listed wire, highest index first so the lower
    /// indices keep their meaning.
    pub fn partial_trace_many(&mut self, rho: &Quidd, qubits: &[usize]) -> Result<Quidd, LinalgError> {
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut out = *rho;
        for &q in sorted.iter().rev() {
            out = self.partial_trace(&out, q)?;
        }
        Ok(out)
    }

    /// Sum of the diagonal.
    pub fn trace(&self, rho: &Quidd) -> Result<Complex64, LinalgError> {
        expect_kind(rho, Kind::Matrix)?;
        let mut memo = FxHashMap::default();
        Ok(self.trace_rec(rho.root, 0, rho.n_qubits, &mut memo))
    }

    fn trace_rec(&self, e: Edge, q: usize, n: usize, memo: &mut FxHashMap<(Edge, usize), Complex64>) -> Complex64 {
        let top = self.top_qubit(e);
        if top >= n {
            return self.value(e).unwrap() * pow2(n - q);
        }
        if top > q {
            return self.trace_rec(e, top, n, memo) * pow2(top - q);
        }
        if let Some(&v) = memo.get(&(e, q)) {
            return v;
        }
        let b = self.blocks(e, q);
        let v = self.trace_rec(b[0][0], q + 1, n, memo) + self.trace_rec(b[1][1], q + 1, n, memo);
        memo.insert((e, q), v);
        v
    }

    /// Trace computed by folding [`partial_trace`](Self::partial_trace) down
    /// to a 0-qubit scalar.
    pub fn trace_by_partial_traces(&mut self, rho: &Quidd) -> Result<Complex64, LinalgError> {
        let mut out = *rho;
        while out.n_qubits > 0 {
            out = self.partial_trace(&out, out.n_qubits - 1)?;
        }
        Ok(self.value(out.root).expect("0-qubit matrix is a terminal"))
    }

    pub fn quidd_nodes(&self, q: &Quidd) -> usize {
        self.count_nodes(q.root)
    }
}

fn expect_kind(q: &Quidd, kind: Kind) -> Result<(), LinalgError> {
    if q.kind != kind {
        return Err(LinalgError::KindMismatch {
            expected: kind,
            found: q.kind,
        });
    }
    Ok(())
}

fn same_shape(a: &Quidd, b: &Quidd) -> Result<(), LinalgError> {
    if a.kind != b.kind {
        return Err(LinalgError::KindMismatch {
            expected: a.kind,
            found: b.kind,
        });
    }
    if a.n_qubits != b.n_qubits {
        return Err(LinalgError::SizeMismatch {
            left: a.n_qubits,
            right: b.n_qubits,
        });
    }
    Ok(())
}
