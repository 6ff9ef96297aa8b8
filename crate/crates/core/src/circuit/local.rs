//! Blockwise `U ρ U†` for single-target gates.
//!
//! Instead of building the full operator and multiplying twice, the row side
//! mixes the two cofactor blocks of ρ at `R_t` with the rows of the payload,
//! and the column side does the same at `C_t` with the conjugated payload.
//! Payloads of the form `s · V` with `V` over `{0, ±1, ±i}` (H, X, Y, Z, S
//! and their controlled forms) are applied with additions and negations only.
//! Uncontrolled gates then scale the whole result once by `|s|²`, so equal
//! values computed along different paths stay bitwise equal; controlled gates
//! scale the mixed blocks by `s` on each side.

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use super::gate::Control;
use super::CircuitError;
use crate::dd::{BinaryOp, DdManager, Edge, UnaryOp, VarIndex, TERMINAL_LEVEL};
use crate::linalg::Quidd;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Entries of `V` must lie this close to `{0, ±1, ±i}` to be snapped.
const SNAP_TOL: f64 = 1e-12;

/// Splits `u` into `(V, s, |s|²)` with `V` snapped onto `{0, ±1, ±i}` when
/// possible; otherwise returns `(u, 1, 1)`.
fn factor(u: [Complex64; 4]) -> ([Complex64; 4], f64, f64) {
    let s = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if s == 0.0 {
        return (u, 1.0, 1.0);
    }
    let mut v = [ZERO; 4];
    for (dst, z) in v.iter_mut().zip(u) {
        let w = z / s;
        let snapped = Complex64::new(w.re.round(), w.im.round());
        if (w - snapped).norm() > SNAP_TOL || snapped.norm_sqr() > 1.0 {
            return (u, 1.0, 1.0);
        }
        *dst = snapped;
    }
    // |s|² to 15 significant digits: (1/√2)² becomes exactly 0.5.
    let w: f64 = format!("{:.14e}", s * s).parse().expect("formatted float");
    (v, s, w)
}

#[derive(Clone, Copy)]
enum Side {
    Row,
    Col,
}

impl Side {
    fn level(self, qubit: usize) -> u32 {
        match self {
            Side::Row => VarIndex::row(qubit).0,
            Side::Col => VarIndex::col(qubit).0,
        }
    }
}

/// One side of the conjugation: `W ⊗ I` applied to the row (or column)
/// index where the controls hold.
struct Pass {
    /// Control levels above the target, with polarity.
    above: Vec<(u32, bool)>,
    target: u32,
    /// Control levels below the target, with polarity.
    below: Vec<(u32, bool)>,
    w: [Complex64; 4],
    /// Applied to the mixed blocks; `1` when the caller scales globally.
    scale: f64,
    walk_memo: FxHashMap<(Edge, usize), Edge>,
    select_memo: FxHashMap<(Edge, Edge, usize), Edge>,
}

impl Pass {
    fn new(side: Side, target: usize, controls: &[Control], w: [Complex64; 4], scale: f64) -> Self {
        let target = side.level(target);
        let mut above = Vec::new();
        let mut below = Vec::new();
        for c in controls {
            let l = side.level(c.qubit);
            if l < target {
                above.push((l, c.positive));
            } else {
                below.push((l, c.positive));
            }
        }
        above.sort_unstable();
        below.sort_unstable();
        Pass {
            above,
            target,
            below,
            w,
            scale,
            walk_memo: FxHashMap::default(),
            select_memo: FxHashMap::default(),
        }
    }

    fn special(&self, i: usize) -> u32 {
        self.above.get(i).map_or(self.target, |&(l, _)| l)
    }

    fn walk(&mut self, m: &mut DdManager, f: Edge, i: usize) -> Edge {
        if let Some(&r) = self.walk_memo.get(&(f, i)) {
            return r;
        }
        let special = self.special(i);
        let lv = m.level(f);
        let r = if lv < special {
            let (t, e) = m.branches(f, lv);
            let t = self.walk(m, t, i);
            let e = self.walk(m, e, i);
            m.mk(lv, t, e)
        } else {
            let (f1, f0) = m.branches(f, special);
            if let Some(&(_, positive)) = self.above.get(i) {
                let (t, e) = if positive {
                    (self.walk(m, f1, i + 1), f0)
                } else {
                    (f1, self.walk(m, f0, i + 1))
                };
                m.mk(special, t, e)
            } else {
                let g0 = combine(m, self.w[0], f0, self.w[1], f1);
                let g1 = combine(m, self.w[2], f0, self.w[3], f1);
                let (g0, g1) = if self.scale == 1.0 {
                    (g0, g1)
                } else {
                    let s = Complex64::new(self.scale, 0.0);
                    (m.scale(g0, s), m.scale(g1, s))
                };
                let g0 = self.select(m, f0, g0, 0);
                let g1 = self.select(m, f1, g1, 0);
                m.mk(special, g1, g0)
            }
        };
        self.walk_memo.insert((f, i), r);
        r
    }

    /// `new` where the controls below the target hold, `orig` elsewhere.
    fn select(&mut self, m: &mut DdManager, orig: Edge, new: Edge, j: usize) -> Edge {
        let Some(&(special, positive)) = self.below.get(j) else {
            return new;
        };
        if orig == new {
            return new;
        }
        if let Some(&r) = self.select_memo.get(&(orig, new, j)) {
            return r;
        }
        let top = m.level(orig).min(m.level(new));
        let r = if top < special {
            let (o1, o0) = m.branches(orig, top);
            let (n1, n0) = m.branches(new, top);
            let t = self.select(m, o1, n1, j);
            let e = self.select(m, o0, n0, j);
            m.mk(top, t, e)
        } else {
            let (o1, o0) = m.branches(orig, special);
            let (n1, n0) = m.branches(new, special);
            let (t, e) = if positive {
                (self.select(m, o1, n1, j + 1), o0)
            } else {
                (o1, self.select(m, o0, n0, j + 1))
            };
            m.mk(special, t, e)
        };
        self.select_memo.insert((orig, new, j), r);
        r
    }
}

fn term(m: &mut DdManager, w: Complex64, f: Edge) -> Option<Edge> {
    if w == ZERO {
        None
    } else if w == ONE {
        Some(f)
    } else if w == -ONE {
        Some(m.map_terminals(f, UnaryOp::NEG))
    } else {
        Some(m.scale(f, w))
    }
}

/// `a · f + b · g`, using subtraction for `f − g`.
fn combine(m: &mut DdManager, a: Complex64, f: Edge, b: Complex64, g: Edge) -> Edge {
    if a == ONE && b == -ONE {
        return m.apply(f, g, BinaryOp::SUB);
    }
    if a == -ONE && b == ONE {
        return m.apply(g, f, BinaryOp::SUB);
    }
    match (term(m, a, f), term(m, b, g)) {
        (None, None) => m.zero(),
        (Some(x), None) | (None, Some(x)) => x,
        (Some(x), Some(y)) => m.apply(x, y, BinaryOp::ADD),
    }
}

impl DdManager {
    /// `U ρ U†` where `U` applies the 2×2 `payload` to `target` wherever every
    /// control holds.
    pub(crate) fn conjugate_local(
        &mut self,
        rho: &Quidd,
        target: usize,
        controls: &[Control],
        payload: [Complex64; 4],
    ) -> Result<Quidd, CircuitError> {
        let n = rho.n_qubits;
        for q in std::iter::once(target).chain(controls.iter().map(|c| c.qubit)) {
            if q >= n {
                return Err(CircuitError::QubitRange { qubit: q, n });
            }
        }
        let (v, s, scale) = factor(payload);
        // Controlled gates leave the uncontrolled blocks alone, so the
        // factor cannot be pulled out of the whole result.
        let (side_scale, scale) = if controls.is_empty() { (1.0, scale) } else { (s, 1.0) };
        let v_conj = v.map(|z| z.conj());
        let mut rows = Pass::new(Side::Row, target, controls, v, side_scale);
        let left = rows.walk(self, rho.root, 0);
        let mut cols = Pass::new(Side::Col, target, controls, v_conj, side_scale);
        let mut root = cols.walk(self, left, 0);
        if scale != 1.0 {
            root = self.scale(root, Complex64::new(scale, 0.0));
        }
        debug_assert!(self.level(root) == TERMINAL_LEVEL || (self.level(root) as usize) < 2 * n);
        Ok(Quidd::matrix(root, n))
    }
}
