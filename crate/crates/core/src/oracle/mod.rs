//! Explicit dense reference simulator.
//!
//! Every matrix here stores all `4^n` entries regardless of structure. Gates
//! are applied with strided k-qubit kernels so the full `2^n x 2^n` operator
//! is never materialized.

mod sim;
mod text;

use num_complex::Complex64;
use thiserror::Error;

pub use sim::{dense_run, DenseRun, DenseSimulator};
pub use text::{format_complex, parse_complex};

/// Default qubit cap for dense matrices (`4^11` entries, 64 MiB).
pub const DEFAULT_CAP: usize = 11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{n} qubits exceeds the dense cap of {cap}")]
    OverCap { n: usize, cap: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitRange { qubit: usize, n: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("step {step}: {message}")]
    Step { step: usize, message: String },
}

/// Row-major `2^n x 2^n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl DenseMatrix {
    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DenseMatrix {
            n_qubits,
            dim,
            data: vec![c0(); dim * dim],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut m = Self::zeros(n_qubits);
        for i in 0..m.dim {
            m.data[i * m.dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix from row-major entries; `data.len()` must be `4^n_qubits`.
    pub fn from_data(n_qubits: usize, data: Vec<Complex64>) -> Result<Self, OracleError> {
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(OracleError::Dimension {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { n_qubits, dim, data })
    }

    /// Matrix from a square row-major slice whose side must be a power of two.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, OracleError> {
        let dim = rows.len();
        if !dim.is_power_of_two() {
            return Err(OracleError::Dimension {
                expected: dim.next_power_of_two(),
                found: dim,
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(OracleError::Dimension {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_data(dim.trailing_zeros() as usize, data)
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(n_qubits: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n_qubits);
        for r in 0..m.dim {
            for c in 0..m.dim {
                m.data[r * m.dim + c] = f(r, c);
            }
        }
        m
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    /// Bytes of entry storage.
    pub fn bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<Complex64>()
    }

    fn check_same(&self, other: &DenseMatrix) -> Result<(), OracleError> {
        if self.dim != other.dim {
            return Err(OracleError::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
        self.check_same(other)?;
        let d = self.dim;
        let mut out = Self::zeros(self.n_qubits);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == c0() {
                    continue;
                }
                for c in 0..d {
                    out.data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        Ok(out)
    }

    pub fn apply_vector(&self, v: &[Complex64]) -> Result<Vec<Complex64>, OracleError> {
        if v.len() != self.dim {
            return Err(OracleError::Dimension {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|r| (0..self.dim).map(|k| self.data[r * self.dim + k] * v[k]).sum())
            .collect())
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> DenseMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn conj_transpose(&self) -> DenseMatrix {
        let d = self.dim;
        Self::from_fn(self.n_qubits, |r, c| self.data[c * d + r].conj())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let db = other.dim;
        Self::from_fn(self.n_qubits + other.n_qubits, |r, c| {
            self.get(r / db, c / db) * other.get(r % db, c % db)
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Partial trace over wire `qubit` (wire 0 is the most significant bit):
    /// sums the diagonal of every 2x2 sub-block indexed by that qubit.
    pub fn ptrace(&self, qubit: usize) -> Result<DenseMatrix, OracleError> {
        if qubit >= self.n_qubits {
            return Err(OracleError::QubitRange {
                qubit,
                n: self.n_qubits,
            });
        }
        let n_out = self.n_qubits - 1;
        let low_bits = self.n_qubits - 1 - qubit;
        let expand = |i: usize, b: usize| {
            let high = i >> low_bits;
            let low = i & ((1 << low_bits) - 1);
            (((high << 1) | b) << low_bits) | low
        };
        Ok(Self::from_fn(n_out, |r, c| {
            (0..2).map(|b| self.get(expand(r, b), expand(c, b))).sum()
        }))
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim;
        (0..d).all(|r| (0..d).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }

    /// True when every eigenvalue is at least `-tol`: a Cholesky
    /// factorization of `self + tol·I` must exist. Assumes Hermitian input.
    pub fn is_psd(&self, tol: f64) -> bool {
        let d = self.dim;
        let mut l = vec![c0(); d * d];
        for j in 0..d {
            let mut diag = self.get(j, j).re + tol;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag < 0.0 {
                return false;
            }
            let pivot = diag.sqrt();
            l[j * d + j] = Complex64::new(pivot, 0.0);
            for i in j + 1..d {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = if pivot > 0.0 { s / pivot } else { c0() };
            }
        }
        true
    }
}

/// `v v†` for a dense column vector of length `2^n`.
pub fn dense_outer(v: &[Complex64]) -> Result<DenseMatrix, OracleError> {
    if !v.len().is_power_of_two() {
        return Err(OracleError::Dimension {
            expected: v.len().next_power_of_two(),
            found: v.len(),
        });
    }
    let n = v.len().trailing_zeros() as usize;
    Ok(DenseMatrix::from_fn(n, |r, c| v[r] * v[c].conj()))
}

pub fn dense_multiply(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
    a.multiply(b)
}

pub fn dense_ptrace(rho: &DenseMatrix, qubit: usize) -> Result<DenseMatrix, OracleError> {
    rho.ptrace(qubit)
}
