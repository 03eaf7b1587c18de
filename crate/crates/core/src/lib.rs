//! Data structures for representing and manipulating n-qubit quantum states:
//! a dense state-vector oracle, three families of decision diagrams (ADD,
//! QMDD, LIMDD), matrix product states, and complex restricted Boltzmann
//! machines, together with cross-representation transformations, benchmark
//! state families, and an induced-subgraph counting pipeline.
//!
//! Conventions used throughout:
//!
//! * Qubits are numbered `1..=n`. Qubit `n` is the top decision-diagram
//!   variable, the leftmost ket symbol, and the leftmost MPS site matrix.
//! * A basis string `(x_n, ..., x_1)` indexes amplitude
//!   `k = sum_j 2^(j-1) * x_j`, so qubit 1 is the least significant bit.
//! * Complex numbers compare equal when both components differ by at most
//!   [`EPS`].

pub mod basis;
pub mod circuit;
pub mod complex;
pub mod dense;
pub mod gate;
pub mod graph;
pub mod mps;
pub mod qdd;
pub mod rbm;
pub mod sim;
pub mod states;
pub mod subgraphs;
pub mod svd;
pub mod transform;

pub use basis::BasisString;
pub use circuit::{Circuit, Step};
pub use complex::{approx_eq, approx_zero, Amplitude, EPS};
pub use dense::DenseState;
pub use gate::Gate;
pub use graph::Graph;
pub use mps::Mps;
pub use qdd::add::AddDiagram;
pub use qdd::limdd::LimddDiagram;
pub use qdd::qmdd::QmddDiagram;
pub use rbm::Rbm;

/// Largest qubit count the dense oracle accepts.
pub const DENSE_CAP: usize = 24;

/// Default ceiling on decision-diagram node stores. Operations that would
/// grow a store past this abort with [`Error::BudgetExceeded`].
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("operands have different qubit counts: {0} vs {1}")]
    QubitCountMismatch(usize, usize),
    #[error("basis string has {got} bits, state has {want} qubits")]
    BasisLengthMismatch { got: usize, want: usize },
    #[error("dense oracle capped at {cap} qubits, requested {n}")]
    DenseCapExceeded { n: usize, cap: usize },
    #[error("gate arity {arity} above the supported cap {cap}")]
    ArityTooLarge { arity: usize, cap: usize },
    #[error("matrix is not unitary within tolerance")]
    NotUnitary,
    #[error("gate targets must be distinct")]
    DuplicateTarget,
    #[error("state is not normalized")]
    NotNormalized,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("node store exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: usize },
    #[error("children are at level {got}, expected level {want}")]
    LevelMismatch { got: usize, want: usize },
    #[error("follow applied to an edge into a leaf")]
    FollowOnLeaf,
    #[error("k must lie in 0..={n}, got {k}")]
    KOutOfRange { k: usize, n: usize },
    #[error("graph must be simple: {0}")]
    NotSimpleGraph(String),
    #[error("{family} requires {requirement}")]
    BadFamilyParameter {
        family: &'static str,
        requirement: &'static str,
    },
    #[error("gate {gate} unsupported on backend {backend} (tractability table marks it '{cell}')")]
    UnsupportedGate {
        gate: String,
        backend: &'static str,
        cell: &'static str,
    },
    #[error("no transformation from {from} to {to}")]
    UnsupportedConversion { from: String, to: String },
    #[error("inconsistent even/odd-difference oracle: neither sign branch matches")]
    InconsistentOracle,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
