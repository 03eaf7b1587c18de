//! Levelled decision diagrams over qubits. Three specializations share the
//! conventions here: [`add`] (unit edge labels, complex leaves), [`qmdd`]
//! (complex edge weights, unit leaf) and [`limdd`] (Pauli local-invertible-
//! map edge labels, unit leaf).
//!
//! Qubit `n` is the root variable; a node at level `k` represents a k-qubit
//! vector. Levels never skip: both children of a level-k node sit at level
//! k-1, except that zero-weighted edges point directly at the leaf.
//!
//! Text serialization (round-trips bit-exactly):
//!
//! ```text
//! qdd <variant> <n>
//! leaf <id> <re,im>
//! node <id> <level> <low_label> <low_target> <high_label> <high_target>
//! root <label> <target>
//! ```
//!
//! Scalar labels print as `re,im`; Pauli LIMs as `re,im:PSTRING` with
//! `PSTRING` over `{I,X,Y,Z}`; the zero label prints as `0,0`.

pub mod add;
pub mod limdd;
pub mod pauli;
pub mod qmdd;

pub type NodeId = usize;

/// Sentinel id of the leaf node every store creates first.
pub const LEAF: NodeId = 0;

/// Shared capacity guard for node stores.
#[derive(Clone, Debug)]
pub(crate) struct Budget {
    pub limit: usize,
}

impl Budget {
    pub fn check(&self, nodes: usize) -> crate::Result<()> {
        if nodes > self.limit {
            Err(crate::Error::BudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            limit: crate::DEFAULT_NODE_BUDGET,
        }
    }
}
