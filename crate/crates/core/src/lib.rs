//! Density-matrix quantum circuit simulation on QuIDDs.
//!
//! A QuIDD is a reduced ordered multi-terminal decision diagram over
//! interleaved row/column index variables with complex terminals. Quantum
//! states and operators with repeated structure (equal superpositions,
//! computational-basis projectors, Pauli and Hadamard tensor products)
//! compress to diagrams whose size is polynomial in the number of qubits.
//!
//! Layout:
//! * [`dd`]: node storage, unique table, Apply, cofactors, relabeling.
//! * [`linalg`]: matrix semantics: tensor, multiply, outer product,
//!   partial trace, trace.
//! * [`circuit`]: gates, noise channels, measurement and the run loop.
//! * [`lang`]: the `.qpd` circuit description language.
//! * [`oracle`]: an explicit dense density-matrix simulator used as the
//!   reference and the array-based baseline.
//! * [`bench`]: benchmark circuit generators and the scaling harness.

pub mod bench;
pub mod circuit;
pub mod dd;
pub mod lang;
pub mod linalg;
pub mod oracle;

pub use num_complex::Complex64;

pub use circuit::{Channel, Circuit, Gate, InitialState, Operation};
pub use dd::{DdManager, Edge, VarIndex};
pub use linalg::{Kind, Quidd};
pub use oracle::DenseMatrix;
