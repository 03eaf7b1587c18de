//! QMDDs: decision diagrams with complex edge weights and a unit leaf.
//! Nodes merge when their subfunctions agree up to a scalar; canonicity
//! comes from normalizing the first nonzero child weight of every node to
//! exactly 1 and pushing the factor to incoming edges. Zero-weighted edges
//! point directly at the leaf.

use super::{Budget, NodeId, LEAF};
use crate::basis::BasisString;
use crate::complex::{
    approx_eq, approx_zero, format_amplitude, parse_amplitude, quantize, Amplitude, EPS,
};
use crate::dense::DenseState;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QmddEdge {
    pub w: Amplitude,
    pub v: NodeId,
}

impl QmddEdge {
    pub fn zero() -> Self {
        QmddEdge {
            w: Complex64::new(0.0, 0.0),
            v: LEAF,
        }
    }

    pub fn is_zero(&self) -> bool {
        approx_zero(self.w)
    }

    pub fn scaled(&self, f: Amplitude) -> Self {
        if self.is_zero() {
            QmddEdge::zero()
        } else {
            QmddEdge {
                w: self.w * f,
                v: self.v,
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    level: usize,
    w0: Amplitude,
    v0: NodeId,
    w1: Amplitude,
    v1: NodeId,
}

type Key = (
    usize,
    crate::complex::QuantAmplitude,
    NodeId,
    crate::complex::QuantAmplitude,
    NodeId,
);

pub(crate) struct Builder {
    nodes: Vec<Node>,
    table: HashMap<Key, NodeId>,
    budget: Budget,
}

impl Builder {
    pub(crate) fn new() -> Self {
        Builder::with_budget(Budget::default().limit)
    }

    pub(crate) fn with_budget(limit: usize) -> Self {
        let leaf = Node {
            level: 0,
            w0: Complex64::new(0.0, 0.0),
            v0: LEAF,
            w1: Complex64::new(0.0, 0.0),
            v1: LEAF,
        };
        Builder {
            nodes: vec![leaf],
            table: HashMap::new(),
            budget: Budget { limit },
        }
    }

    pub(crate) fn level_of(&self, id: NodeId) -> usize {
        self.nodes[id].level
    }

    pub(crate) fn node_total(&self) -> usize {
        self.nodes.len()
    }

    /// Canonicalizing constructor: normalizes the first nonzero child
    /// weight to 1, collapses all-zero nodes to the zero edge, and
    /// hash-conses the result.
    pub(crate) fn make_node(&mut self, level: usize, low: QmddEdge, high: QmddEdge) -> Result<QmddEdge> {
        let low = if low.is_zero() { QmddEdge::zero() } else { low };
        let high = if high.is_zero() { QmddEdge::zero() } else { high };
        if low.is_zero() && high.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if !low.is_zero() && self.nodes[low.v].level != level - 1 {
            return Err(Error::LevelMismatch {
                got: self.nodes[low.v].level,
                want: level - 1,
            });
        }
        if !high.is_zero() && self.nodes[high.v].level != level - 1 {
            return Err(Error::LevelMismatch {
                got: self.nodes[high.v].level,
                want: level - 1,
            });
        }
        let (factor, w0, w1) = if !low.is_zero() {
            (low.w, Complex64::new(1.0, 0.0), high.w / low.w)
        } else {
            (high.w, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
        };
        let w1 = if approx_zero(w1) { Complex64::new(0.0, 0.0) } else { w1 };
        let key = (level, quantize(w0), low.v, quantize(w1), high.v);
        let v = match self.table.get(&key) {
            Some(&id) => id,
            None => {
                self.budget.check(self.nodes.len())?;
                let id = self.nodes.len();
                self.nodes.push(Node {
                    level,
                    w0,
                    v0: low.v,
                    w1,
                    v1: high.v,
                });
                self.table.insert(key, id);
                id
            }
        };
        Ok(QmddEdge { w: factor, v })
    }

    fn finish(self, n: usize, root: QmddEdge) -> QmddDiagram {
        QmddDiagram {
            n,
            nodes: self.nodes,
            table: self.table,
            root,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QmddDiagram {
    n: usize,
    nodes: Vec<Node>,
    #[allow(dead_code)]
    table: HashMap<Key, NodeId>,
    root: QmddEdge,
}

impl QmddDiagram {
    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> QmddEdge {
        self.root
    }

    /// Child edges of an internal node.
    pub fn children(&self, id: NodeId) -> (QmddEdge, QmddEdge) {
        let n = &self.nodes[id];
        (
            QmddEdge { w: n.w0, v: n.v0 },
            QmddEdge { w: n.w1, v: n.v1 },
        )
    }

    pub fn level_of(&self, id: NodeId) -> usize {
        self.nodes[id].level
    }

    pub fn from_dense(s: &DenseState) -> Result<Self> {
        Self::from_dense_with_budget(s, Budget::default().limit)
    }

    pub fn from_dense_with_budget(s: &DenseState, budget: usize) -> Result<Self> {
        let n = s.qubit_count();
        let mut b = Builder::with_budget(budget);
        let root = from_dense_rec(&mut b, s.amplitudes(), n)?;
        Ok(b.finish(n, root))
    }

    /// One Shannon step: the edge for cofactor `x` of the state below `e`.
    pub fn follow(&self, e: QmddEdge, x: u8) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if e.v == LEAF {
            return Err(Error::FollowOnLeaf);
        }
        let node = &self.nodes[e.v];
        let (wc, vc) = if x == 0 { (node.w0, node.v0) } else { (node.w1, node.v1) };
        let w = e.w * wc;
        if approx_zero(w) {
            Ok(QmddEdge::zero())
        } else {
            Ok(QmddEdge { w, v: vc })
        }
    }

    pub fn amplitude(&self, x: &BasisString) -> Result<Amplitude> {
        if x.len() != self.n {
            return Err(Error::BasisLengthMismatch {
                got: x.len(),
                want: self.n,
            });
        }
        let mut e = self.root;
        for q in (1..=self.n).rev() {
            if e.is_zero() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            e = self.follow(e, x.bit(q))?;
        }
        Ok(e.w)
    }

    fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack = vec![self.root.v];
        if self.root.is_zero() {
            stack = vec![LEAF];
        }
        while let Some(id) = stack.pop() {
            if seen[id] {
                continue;
            }
            seen[id] = true;
            out.push(id);
            if id != LEAF {
                let n = &self.nodes[id];
                if !approx_zero(n.w0) || n.v0 != LEAF {
                    stack.push(n.v0);
                }
                if !approx_zero(n.w1) || n.v1 != LEAF {
                    stack.push(n.v1);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn reachable_by_level(&self) -> Vec<Vec<NodeId>> {
        let mut levels = vec![Vec::new(); self.n + 1];
        for id in self.reachable() {
            levels[self.nodes[id].level].push(id);
        }
        levels
    }

    /// Reachable nodes including the leaf.
    pub fn node_count(&self) -> usize {
        self.reachable().len()
    }

    pub fn internal_node_count(&self) -> usize {
        self.reachable().iter().filter(|&&id| id != LEAF).count()
    }

    pub fn edge_count(&self) -> usize {
        2 * self.internal_node_count() + 1
    }

    /// |V| + |E| + leaf label + edge labels (scalars count 1 each).
    pub fn size(&self) -> usize {
        let v = self.node_count();
        let e = self.edge_count();
        let leaf_labels = if self.reachable().contains(&LEAF) { 1 } else { 0 };
        v + e + leaf_labels + e
    }

    /// Single-qubit diagonal `diag(alpha, beta)` on qubit q, or the
    /// anti-diagonal `[[0, beta], [alpha, 0]]` when `antidiag` is set.
    /// Topology is preserved: weights change, structure does not.
    pub fn apply_diag_1q(
        &self,
        q: usize,
        alpha: Amplitude,
        beta: Amplitude,
        antidiag: bool,
    ) -> Result<Self> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let mut b = Builder::new();
        let mut memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let root = self.diag_rec(&mut b, self.root, q, alpha, beta, antidiag, &mut memo)?;
        Ok(b.finish(self.n, root))
    }

    #[allow(clippy::too_many_arguments)]
    fn diag_rec(
        &self,
        b: &mut Builder,
        e: QmddEdge,
        q: usize,
        alpha: Amplitude,
        beta: Amplitude,
        antidiag: bool,
        memo: &mut HashMap<NodeId, QmddEdge>,
    ) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if let Some(hit) = memo.get(&e.v) {
            return Ok(hit.scaled(e.w));
        }
        let node = &self.nodes[e.v];
        let lo = QmddEdge { w: node.w0, v: node.v0 };
        let hi = QmddEdge { w: node.w1, v: node.v1 };
        let out = if node.level == q {
            let lo_c = self.copy_rec(b, lo, &mut HashMap::new())?;
            let hi_c = self.copy_rec(b, hi, &mut HashMap::new())?;
            if antidiag {
                b.make_node(node.level, hi_c.scaled(beta), lo_c.scaled(alpha))?
            } else {
                b.make_node(node.level, lo_c.scaled(alpha), hi_c.scaled(beta))?
            }
        } else {
            let l = self.diag_rec(b, lo, q, alpha, beta, antidiag, memo)?;
            let h = self.diag_rec(b, hi, q, alpha, beta, antidiag, memo)?;
            b.make_node(node.level, l, h)?
        };
        memo.insert(e.v, out);
        Ok(out.scaled(e.w))
    }

    fn copy_rec(
        &self,
        b: &mut Builder,
        e: QmddEdge,
        memo: &mut HashMap<NodeId, QmddEdge>,
    ) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if e.v == LEAF {
            return Ok(e);
        }
        if let Some(hit) = memo.get(&e.v) {
            return Ok(hit.scaled(e.w));
        }
        let node = &self.nodes[e.v];
        let l = self.copy_rec(b, QmddEdge { w: node.w0, v: node.v0 }, memo)?;
        let h = self.copy_rec(b, QmddEdge { w: node.w1, v: node.v1 }, memo)?;
        let out = b.make_node(node.level, l, h)?;
        memo.insert(e.v, out);
        Ok(out.scaled(e.w))
    }

    pub fn apply_x(&self, q: usize) -> Result<Self> {
        self.apply_diag_1q(q, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), true)
    }

    pub fn apply_y(&self, q: usize) -> Result<Self> {
        self.apply_diag_1q(q, Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), true)
    }

    pub fn apply_z(&self, q: usize) -> Result<Self> {
        self.apply_diag_1q(q, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), false)
    }

    pub fn apply_s(&self, q: usize) -> Result<Self> {
        self.apply_diag_1q(q, Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), false)
    }

    pub fn apply_t(&self, q: usize) -> Result<Self> {
        self.apply_diag_1q(
            q,
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            false,
        )
    }

    /// Projects qubit q onto `bit` (non-unitary diagonal).
    pub fn project_qubit(&self, q: usize, bit: u8) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if bit == 0 {
            self.apply_diag_1q(q, one, zero, false)
        } else {
            self.apply_diag_1q(q, zero, one, false)
        }
    }

    /// Controlled-Z with per-call caches keyed on (node) for each of the
    /// two recursion kinds. Runs in time linear in the node count.
    pub fn apply_cz(&self, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::DuplicateTarget);
        }
        for q in [a, b] {
            if q == 0 || q > self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        let (a, b) = (a.max(b), a.min(b));
        let mut builder = Builder::new();
        let mut cz_memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let mut z_memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let mut copy_memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let root = self.cz_rec(
            &mut builder,
            self.root,
            a,
            b,
            &mut cz_memo,
            &mut z_memo,
            &mut copy_memo,
        )?;
        Ok(builder.finish(self.n, root))
    }

    #[allow(clippy::too_many_arguments)]
    fn cz_rec(
        &self,
        bld: &mut Builder,
        e: QmddEdge,
        a: usize,
        b: usize,
        cz_memo: &mut HashMap<NodeId, QmddEdge>,
        z_memo: &mut HashMap<NodeId, QmddEdge>,
        copy_memo: &mut HashMap<NodeId, QmddEdge>,
    ) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if let Some(hit) = cz_memo.get(&e.v) {
            return Ok(hit.scaled(e.w));
        }
        let node = &self.nodes[e.v];
        let lo = QmddEdge { w: node.w0, v: node.v0 };
        let hi = QmddEdge { w: node.w1, v: node.v1 };
        let out = if node.level == a {
            let l = self.copy_rec(bld, lo, copy_memo)?;
            let h = self.z_rec(bld, hi, b, z_memo, copy_memo)?;
            bld.make_node(node.level, l, h)?
        } else {
            let l = self.cz_rec(bld, lo, a, b, cz_memo, z_memo, copy_memo)?;
            let h = self.cz_rec(bld, hi, a, b, cz_memo, z_memo, copy_memo)?;
            bld.make_node(node.level, l, h)?
        };
        cz_memo.insert(e.v, out);
        Ok(out.scaled(e.w))
    }

    fn z_rec(
        &self,
        bld: &mut Builder,
        e: QmddEdge,
        t: usize,
        z_memo: &mut HashMap<NodeId, QmddEdge>,
        copy_memo: &mut HashMap<NodeId, QmddEdge>,
    ) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if let Some(hit) = z_memo.get(&e.v) {
            return Ok(hit.scaled(e.w));
        }
        let node = &self.nodes[e.v];
        let lo = QmddEdge { w: node.w0, v: node.v0 };
        let hi = QmddEdge { w: node.w1, v: node.v1 };
        let out = if node.level == t {
            let l = self.copy_rec(bld, lo, copy_memo)?;
            let h = self.copy_rec(bld, hi, copy_memo)?;
            bld.make_node(node.level, l, h.scaled(Complex64::new(-1.0, 0.0)))?
        } else {
            let l = self.z_rec(bld, lo, t, z_memo, copy_memo)?;
            let h = self.z_rec(bld, hi, t, z_memo, copy_memo)?;
            bld.make_node(node.level, l, h)?
        };
        z_memo.insert(e.v, out);
        Ok(out.scaled(e.w))
    }

    /// Pointwise sum. Provided for completeness; worst-case output size is
    /// exponential (this is what the Sum-state benchmarks measure).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_with_budget(other, Budget::default().limit)
    }

    pub fn add_with_budget(&self, other: &Self, budget: usize) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        let mut bld = Builder::with_budget(budget);
        let mut memo = HashMap::new();
        let mut copy_a = HashMap::new();
        let mut copy_b = HashMap::new();
        let root = add_rec(
            &mut bld,
            self,
            self.root,
            other,
            other.root,
            &mut memo,
            &mut copy_a,
            &mut copy_b,
        )?;
        Ok(bld.finish(self.n, root))
    }

    /// Hadamard on qubit q by child addition; worst-case exponential.
    pub fn apply_hadamard(&self, q: usize) -> Result<Self> {
        self.apply_hadamard_with_budget(q, Budget::default().limit)
    }

    pub fn apply_hadamard_with_budget(&self, q: usize, budget: usize) -> Result<Self> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let mut bld = Builder::with_budget(budget);
        let mut memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let root = self.h_rec(&mut bld, self.root, q, &mut memo)?;
        Ok(bld.finish(self.n, root))
    }

    fn h_rec(
        &self,
        bld: &mut Builder,
        e: QmddEdge,
        q: usize,
        memo: &mut HashMap<NodeId, QmddEdge>,
    ) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if let Some(hit) = memo.get(&e.v) {
            return Ok(hit.scaled(e.w));
        }
        let node = &self.nodes[e.v];
        let lo = QmddEdge { w: node.w0, v: node.v0 };
        let hi = QmddEdge { w: node.w1, v: node.v1 };
        let out = if node.level == q {
            let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut memo_add = HashMap::new();
            let mut ca = HashMap::new();
            let mut cb = HashMap::new();
            let plus = add_rec(bld, self, lo, self, hi, &mut memo_add, &mut ca, &mut cb)?;
            let minus = add_rec(
                bld,
                self,
                lo,
                self,
                hi.scaled(Complex64::new(-1.0, 0.0)),
                &mut memo_add,
                &mut ca,
                &mut cb,
            )?;
            bld.make_node(node.level, plus.scaled(s), minus.scaled(s))?
        } else {
            let l = self.h_rec(bld, lo, q, memo)?;
            let h = self.h_rec(bld, hi, q, memo)?;
            bld.make_node(node.level, l, h)?
        };
        memo.insert(e.v, out);
        Ok(out.scaled(e.w))
    }

    /// Swap by a chain of adjacent level exchanges; worst-case exponential.
    pub fn apply_swap(&self, a: usize, b: usize) -> Result<Self> {
        self.apply_swap_with_budget(a, b, Budget::default().limit)
    }

    pub fn apply_swap_with_budget(&self, a: usize, b: usize, budget: usize) -> Result<Self> {
        if a == b {
            return Err(Error::DuplicateTarget);
        }
        for q in [a, b] {
            if q == 0 || q > self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        let (a, b) = (a.max(b), a.min(b));
        let mut cur = self.clone();
        for k in (b + 1)..=a {
            cur = cur.exchange_adjacent(k, budget)?;
        }
        for k in ((b + 1)..a).rev() {
            cur = cur.exchange_adjacent(k, budget)?;
        }
        Ok(cur)
    }

    /// Swap implemented as three CX gates, each CX = (I x H) CZ (I x H).
    /// Retained as a cross-check for the exchange-based implementation.
    pub fn apply_swap_via_cx(&self, a: usize, b: usize) -> Result<Self> {
        let cx = |d: &QmddDiagram, ctrl: usize, tgt: usize| -> Result<QmddDiagram> {
            let d = d.apply_hadamard(tgt)?;
            let d = d.apply_cz(ctrl, tgt)?;
            d.apply_hadamard(tgt)
        };
        let d = cx(self, a, b)?;
        let d = cx(&d, b, a)?;
        cx(&d, a, b)
    }

    /// Exchanges qubits k and k-1.
    fn exchange_adjacent(&self, k: usize, budget: usize) -> Result<Self> {
        let mut bld = Builder::with_budget(budget);
        let mut memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let mut copy_memo: HashMap<NodeId, QmddEdge> = HashMap::new();
        let root = self.exchange_rec(&mut bld, self.root, k, &mut memo, &mut copy_memo)?;
        Ok(bld.finish(self.n, root))
    }

    fn exchange_rec(
        &self,
        bld: &mut Builder,
        e: QmddEdge,
        k: usize,
        memo: &mut HashMap<NodeId, QmddEdge>,
        copy_memo: &mut HashMap<NodeId, QmddEdge>,
    ) -> Result<QmddEdge> {
        if e.is_zero() {
            return Ok(QmddEdge::zero());
        }
        if let Some(hit) = memo.get(&e.v) {
            return Ok(hit.scaled(e.w));
        }
        let node = &self.nodes[e.v];
        let lo = QmddEdge { w: node.w0, v: node.v0 };
        let hi = QmddEdge { w: node.w1, v: node.v1 };
        let out = if node.level == k {
            let e00 = self.follow(lo, 0)?;
            let e01 = self.follow(lo, 1)?;
            let e10 = self.follow(hi, 0)?;
            let e11 = self.follow(hi, 1)?;
            let c00 = self.copy_rec(bld, e00, copy_memo)?;
            let c01 = self.copy_rec(bld, e01, copy_memo)?;
            let c10 = self.copy_rec(bld, e10, copy_memo)?;
            let c11 = self.copy_rec(bld, e11, copy_memo)?;
            let new_lo = bld.make_node(k - 1, c00, c10)?;
            let new_hi = bld.make_node(k - 1, c01, c11)?;
            bld.make_node(k, new_lo, new_hi)?
        } else {
            let l = self.exchange_rec(bld, lo, k, memo, copy_memo)?;
            let h = self.exchange_rec(bld, hi, k, memo, copy_memo)?;
            bld.make_node(node.level, l, h)?
        };
        memo.insert(e.v, out);
        Ok(out.scaled(e.w))
    }

    /// Inner product via the MPS translation (the tractable route).
    pub fn inner_product(&self, other: &Self) -> Result<Amplitude> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        let ma = crate::transform::qmdd_to_mps(self)?;
        let mb = crate::transform::qmdd_to_mps(other)?;
        ma.inner_product(&mb)
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut cache = HashMap::new();
        self.root.w.norm_sqr() * self.subtree_norm_sqr(self.root.v, &mut cache)
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na <= EPS * EPS || nb <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner_product(other)?.norm_sqr() / (na * nb))
    }

    fn subtree_norm_sqr(&self, id: NodeId, cache: &mut HashMap<NodeId, f64>) -> f64 {
        if id == LEAF {
            return 1.0;
        }
        if let Some(&hit) = cache.get(&id) {
            return hit;
        }
        let node = &self.nodes[id];
        let out = node.w0.norm_sqr() * self.subtree_norm_sqr(node.v0, cache)
            + node.w1.norm_sqr() * self.subtree_norm_sqr(node.v1, cache);
        cache.insert(id, out);
        out
    }

    pub fn prob(&self, x: &BasisString) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.amplitude(x)?.norm_sqr() / norm)
    }

    /// Samples all qubits top-down using cached subtree squared norms; one
    /// uniform per qubit. Returns the outcome and the collapsed diagram.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(BasisString, QmddDiagram)> {
        if self.norm_sqr() <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        let mut cache = HashMap::new();
        let mut e = self.root;
        let mut bits = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let e0 = self.follow(e, 0)?;
            let e1 = self.follow(e, 1)?;
            let w0 = e0.w.norm_sqr() * self.subtree_norm_sqr(e0.v, &mut cache);
            let w1 = e1.w.norm_sqr() * self.subtree_norm_sqr(e1.v, &mut cache);
            let u: f64 = rng.gen();
            let bit = if w0 + w1 <= 0.0 || u * (w0 + w1) < w0 { 0u8 } else { 1u8 };
            bits.push(bit);
            e = if bit == 0 { e0 } else { e1 };
        }
        let outcome = BasisString::new(bits);
        let amp = self.amplitude(&outcome)?;
        let collapsed = Self::basis_diagram(&outcome, amp / amp.norm())?;
        Ok((outcome, collapsed))
    }

    pub fn basis_diagram(x: &BasisString, factor: Amplitude) -> Result<Self> {
        let mut b = Builder::new();
        let mut e = QmddEdge { w: Complex64::new(1.0, 0.0), v: LEAF };
        for q in 1..=x.len() {
            e = if x.bit(q) == 0 {
                b.make_node(q, e, QmddEdge::zero())?
            } else {
                b.make_node(q, QmddEdge::zero(), e)?
            };
        }
        Ok(b.finish(x.len(), e.scaled(factor)))
    }

    /// Equivalence up to a complex factor: canonical structure comparison,
    /// ignoring the root weight.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        match (self.root.is_zero(), other.root.is_zero()) {
            (true, true) => Ok(true),
            (true, false) | (false, true) => Ok(false),
            (false, false) => Ok(structural_eq(
                self,
                self.root.v,
                other,
                other.root.v,
                &mut HashMap::new(),
            )),
        }
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        DenseState::from_fn(self.n, |x| self.amplitude(x).unwrap())
    }

    /// Verifies that no two reachable nodes at the same level represent
    /// states equal up to a scalar. Exponential in n; a test utility.
    pub fn audit_reduced(&self) -> Result<()> {
        let levels = self.reachable_by_level();
        let mut tables: HashMap<NodeId, Vec<Amplitude>> = HashMap::new();
        for ids in &levels {
            for &id in ids {
                let t = self.subtree_table(id, &mut tables);
                tables.insert(id, t);
            }
        }
        for (level, ids) in levels.iter().enumerate() {
            for i in 0..ids.len() {
                for j in (i + 1)..ids.len() {
                    let ta = &tables[&ids[i]];
                    let tb = &tables[&ids[j]];
                    if proportional(ta, tb) {
                        return Err(Error::Parse(format!(
                            "nodes {} and {} at level {level} are scalar multiples",
                            ids[i], ids[j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn subtree_table(&self, id: NodeId, tables: &mut HashMap<NodeId, Vec<Amplitude>>) -> Vec<Amplitude> {
        if let Some(t) = tables.get(&id) {
            return t.clone();
        }
        let out = if id == LEAF {
            vec![Complex64::new(1.0, 0.0)]
        } else {
            let node = &self.nodes[id];
            let lo = self.subtree_table(node.v0, tables);
            let hi = self.subtree_table(node.v1, tables);
            let width = 1usize << (node.level - 1);
            let mut t = Vec::with_capacity(2 * width);
            for i in 0..width {
                let v = lo.get(i).copied().unwrap_or(Complex64::new(0.0, 0.0));
                t.push(node.w0 * v);
            }
            for i in 0..width {
                let v = hi.get(i).copied().unwrap_or(Complex64::new(0.0, 0.0));
                t.push(node.w1 * v);
            }
            t
        };
        // Zero edges point at the leaf whose table has length 1; pad.
        tables.insert(id, out.clone());
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qdd qmdd {}\n", self.n);
        out.push_str("leaf 0 1,0\n");
        for id in self.reachable() {
            if id == LEAF {
                continue;
            }
            let n = &self.nodes[id];
            out.push_str(&format!(
                "node {id} {} {} {} {} {}\n",
                n.level,
                format_amplitude(n.w0),
                n.v0,
                format_amplitude(n.w1),
                n.v1
            ));
        }
        out.push_str(&format!(
            "root {} {}\n",
            format_amplitude(self.root.w),
            self.root.v
        ));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        #[derive(Clone, Copy)]
        struct RawNode {
            level: usize,
            w0: Amplitude,
            v0: usize,
            w1: Amplitude,
            v1: usize,
        }
        let mut raw: HashMap<usize, RawNode> = HashMap::new();
        let mut n = None;
        let mut root: Option<(Amplitude, usize)> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "qdd" => {
                    if toks.len() != 3 || toks[1] != "qmdd" {
                        return Err(Error::Parse(format!("bad header {line:?}")));
                    }
                    n = Some(toks[2].parse::<usize>().map_err(|e| Error::Parse(format!("{e}")))?);
                }
                "leaf" => {}
                "node" => {
                    if toks.len() != 7 {
                        return Err(Error::Parse(format!("bad node line {line:?}")));
                    }
                    let id: usize = toks[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
                    raw.insert(
                        id,
                        RawNode {
                            level: toks[2].parse().map_err(|e| Error::Parse(format!("{e}")))?,
                            w0: parse_amplitude(toks[3])?,
                            v0: toks[4].parse().map_err(|e| Error::Parse(format!("{e}")))?,
                            w1: parse_amplitude(toks[5])?,
                            v1: toks[6].parse().map_err(|e| Error::Parse(format!("{e}")))?,
                        },
                    );
                }
                "root" => {
                    if toks.len() != 3 {
                        return Err(Error::Parse(format!("bad root line {line:?}")));
                    }
                    root = Some((
                        parse_amplitude(toks[1])?,
                        toks[2].parse().map_err(|e| Error::Parse(format!("{e}")))?,
                    ));
                }
                other => return Err(Error::Parse(format!("unknown line tag {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing header".into()))?;
        let (rw, rv) = root.ok_or_else(|| Error::Parse("missing root".into()))?;
        let mut b = Builder::new();
        let mut remap: HashMap<usize, QmddEdge> = HashMap::new();
        fn build(
            ext: usize,
            raw: &HashMap<usize, RawNode>,
            b: &mut Builder,
            remap: &mut HashMap<usize, QmddEdge>,
        ) -> Result<QmddEdge> {
            if ext == LEAF {
                return Ok(QmddEdge { w: Complex64::new(1.0, 0.0), v: LEAF });
            }
            if let Some(&e) = remap.get(&ext) {
                return Ok(e);
            }
            let node = *raw
                .get(&ext)
                .ok_or_else(|| Error::Parse(format!("dangling node id {ext}")))?;
            let lo = build(node.v0, raw, b, remap)?.scaled(node.w0);
            let hi = build(node.v1, raw, b, remap)?.scaled(node.w1);
            let e = build_checked(b, node.level, lo, hi)?;
            remap.insert(ext, e);
            Ok(e)
        }
        fn build_checked(b: &mut Builder, level: usize, lo: QmddEdge, hi: QmddEdge) -> Result<QmddEdge> {
            b.make_node(level, lo, hi)
        }
        let root_edge = if approx_zero(rw) {
            QmddEdge::zero()
        } else {
            build(rv, &raw, &mut b, &mut remap)?.scaled(rw)
        };
        let d = b.finish(n, root_edge);
        if !d.root.is_zero() && d.nodes[d.root.v].level != n {
            return Err(Error::Parse("root level does not match qubit count".into()));
        }
        Ok(d)
    }
}

fn from_dense_rec(b: &mut Builder, amps: &[Amplitude], level: usize) -> Result<QmddEdge> {
    if amps.iter().all(|a| approx_zero(*a)) {
        return Ok(QmddEdge::zero());
    }
    if level == 0 {
        return Ok(QmddEdge { w: amps[0], v: LEAF });
    }
    let half = amps.len() / 2;
    let lo = from_dense_rec(b, &amps[..half], level - 1)?;
    let hi = from_dense_rec(b, &amps[half..], level - 1)?;
    b.make_node(level, lo, hi)
}

#[allow(clippy::too_many_arguments)]
fn add_rec(
    bld: &mut Builder,
    a: &QmddDiagram,
    ea: QmddEdge,
    o: &QmddDiagram,
    eb: QmddEdge,
    memo: &mut HashMap<(NodeId, NodeId, crate::complex::QuantAmplitude), QmddEdge>,
    copy_a: &mut HashMap<NodeId, QmddEdge>,
    copy_b: &mut HashMap<NodeId, QmddEdge>,
) -> Result<QmddEdge> {
    if ea.is_zero() {
        return o.copy_rec(bld, eb, copy_b);
    }
    if eb.is_zero() {
        return a.copy_rec(bld, ea, copy_a);
    }
    if ea.v == LEAF && eb.v == LEAF {
        let w = ea.w + eb.w;
        return Ok(if approx_zero(w) {
            QmddEdge::zero()
        } else {
            QmddEdge { w, v: LEAF }
        });
    }
    let ratio = eb.w / ea.w;
    let key = (ea.v, eb.v, quantize(ratio));
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.scaled(ea.w));
    }
    let na = &a.nodes[ea.v];
    let nb = &o.nodes[eb.v];
    debug_assert_eq!(na.level, nb.level);
    let lo = add_rec(
        bld,
        a,
        QmddEdge { w: na.w0, v: na.v0 },
        o,
        QmddEdge { w: nb.w0, v: nb.v0 }.scaled(ratio),
        memo,
        copy_a,
        copy_b,
    )?;
    let hi = add_rec(
        bld,
        a,
        QmddEdge { w: na.w1, v: na.v1 },
        o,
        QmddEdge { w: nb.w1, v: nb.v1 }.scaled(ratio),
        memo,
        copy_a,
        copy_b,
    )?;
    let e = bld.make_node(na.level, lo, hi)?;
    memo.insert(key, e);
    Ok(e.scaled(ea.w))
}

fn structural_eq(
    a: &QmddDiagram,
    na: NodeId,
    b: &QmddDiagram,
    nb: NodeId,
    memo: &mut HashMap<(NodeId, NodeId), bool>,
) -> bool {
    if na == LEAF || nb == LEAF {
        return na == nb;
    }
    if let Some(&hit) = memo.get(&(na, nb)) {
        return hit;
    }
    let x = &a.nodes[na];
    let y = &b.nodes[nb];
    let out = x.level == y.level
        && approx_eq(x.w0, y.w0)
        && approx_eq(x.w1, y.w1)
        && structural_eq(a, x.v0, b, y.v0, memo)
        && structural_eq(a, x.v1, b, y.v1, memo);
    memo.insert((na, nb), out);
    out
}

fn proportional(ta: &[Amplitude], tb: &[Amplitude]) -> bool {
    if ta.len() != tb.len() {
        return false;
    }
    let mut ratio: Option<Amplitude> = None;
    for (x, y) in ta.iter().zip(tb) {
        let zx = approx_zero(*x);
        let zy = approx_zero(*y);
        if zx != zy {
            return false;
        }
        if zx {
            continue;
        }
        let r = y / x;
        match ratio {
            None => ratio = Some(r),
            Some(prev) => {
                if (r - prev).norm() > 1e-6 {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{ghz_amplitude, random_state};

    fn ghz_qmdd() -> QmddDiagram {
        QmddDiagram::from_dense(&DenseState::from_fn(3, ghz_amplitude).unwrap()).unwrap()
    }

    #[test]
    fn ghz_matches_figure() {
        let d = ghz_qmdd();
        assert_eq!(d.internal_node_count(), 5);
        assert_eq!(d.node_count(), 6);
        assert_eq!(d.edge_count(), 11);
        assert!(approx_eq(
            d.root().w,
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ));
        let amp = |s: &str| d.amplitude(&BasisString::parse(s).unwrap()).unwrap();
        assert!(approx_eq(amp("000"), Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)));
        assert!(approx_eq(amp("010"), Complex64::new(0.0, 0.0)));
        d.audit_reduced().unwrap();
    }

    #[test]
    fn zero_state_single_path() {
        let s = DenseState::zero_state(4).unwrap();
        let d = QmddDiagram::from_dense(&s).unwrap();
        assert_eq!(d.internal_node_count(), 4);
        // All weights on the path are 1.
        let mut e = d.root();
        assert!(approx_eq(e.w, Complex64::new(1.0, 0.0)));
        for _ in 0..4 {
            e = d.follow(e, 0).unwrap();
            assert!(approx_eq(e.w, Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn follow_ghz_low_branch() {
        let d = ghz_qmdd();
        let e = d.follow(d.root(), 0).unwrap();
        // Represents (1/sqrt 2)|00>.
        assert!(approx_eq(e.w, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)));
        let zero_branch = d.follow(e, 1).unwrap();
        assert!(zero_branch.is_zero());
        let z = d.follow(zero_branch, 0).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn follow_on_leaf_errors() {
        let d = ghz_qmdd();
        let mut e = d.root();
        for _ in 0..3 {
            e = d.follow(e, 0).unwrap();
        }
        assert!(matches!(d.follow(e, 0), Err(Error::FollowOnLeaf)));
    }

    #[test]
    fn amplitudes_round_trip() {
        let s = random_state(5, 23).unwrap();
        let d = QmddDiagram::from_dense(&s).unwrap();
        assert!(d.to_dense().unwrap().approx_equal(&s));
        d.audit_reduced().unwrap();
    }

    #[test]
    fn canonicity_rebuild_is_structural_identity() {
        for seed in 0..10 {
            let s = random_state(6, 100 + seed).unwrap();
            let d1 = QmddDiagram::from_dense(&s).unwrap();
            let d2 = QmddDiagram::from_dense(&d1.to_dense().unwrap()).unwrap();
            assert!(d1.equivalent(&d2).unwrap());
            assert_eq!(d1.internal_node_count(), d2.internal_node_count());
        }
    }

    #[test]
    fn diag_gates_preserve_topology_and_match_oracle() {
        let s = random_state(5, 61).unwrap();
        let d = QmddDiagram::from_dense(&s).unwrap();
        let before = (d.internal_node_count(), d.edge_count());
        for q in 1..=5 {
            for (name, got, want) in [
                ("z", d.apply_z(q).unwrap(), s.apply_gate(&crate::gate::Gate::z(q)).unwrap()),
                ("s", d.apply_s(q).unwrap(), s.apply_gate(&crate::gate::Gate::s(q)).unwrap()),
                ("t", d.apply_t(q).unwrap(), s.apply_gate(&crate::gate::Gate::t(q)).unwrap()),
            ] {
                assert!(got.to_dense().unwrap().approx_equal(&want), "{name} q={q}");
                assert_eq!((got.internal_node_count(), got.edge_count()), before, "{name} q={q}");
            }
            // Anti-diagonal gates are correct too (topology may relabel).
            let gx = d.apply_x(q).unwrap();
            assert!(gx
                .to_dense()
                .unwrap()
                .approx_equal(&s.apply_gate(&crate::gate::Gate::x(q)).unwrap()));
            let gy = d.apply_y(q).unwrap();
            assert!(gy
                .to_dense()
                .unwrap()
                .approx_equal(&s.apply_gate(&crate::gate::Gate::y(q)).unwrap()));
        }
    }

    #[test]
    fn z_flips_sign_of_all_ones() {
        let d = ghz_qmdd();
        let z = d.apply_z(1).unwrap();
        let want = DenseState::from_fn(3, |x| {
            let a = ghz_amplitude(x);
            if x.weight() == 3 {
                -a
            } else {
                a
            }
        })
        .unwrap();
        assert!(z.to_dense().unwrap().approx_equal(&want));
    }

    #[test]
    fn cz_examples() {
        // CZ on |++>.
        let plus2 = DenseState::from_fn(2, |_| Complex64::new(0.5, 0.0)).unwrap();
        let d = QmddDiagram::from_dense(&plus2).unwrap();
        let got = d.apply_cz(2, 1).unwrap();
        let want = plus2.apply_gate(&crate::gate::Gate::cz(2, 1)).unwrap();
        assert!(got.to_dense().unwrap().approx_equal(&want));

        // Control inactive on |00..>.
        let z = QmddDiagram::from_dense(&DenseState::zero_state(4).unwrap()).unwrap();
        let after = z.apply_cz(3, 1).unwrap();
        assert!(after.to_dense().unwrap().approx_equal(&z.to_dense().unwrap()));

        // CZ twice is the identity; size never more than doubles.
        let s = random_state(6, 71).unwrap();
        let d = QmddDiagram::from_dense(&s).unwrap();
        let pre = d.internal_node_count();
        let once = d.apply_cz(5, 2).unwrap();
        assert!(once.internal_node_count() <= 2 * pre);
        let twice = once.apply_cz(5, 2).unwrap();
        assert!(twice.to_dense().unwrap().approx_equal(&s));
    }

    #[test]
    fn add_examples() {
        let g = ghz_qmdd();
        let zero = QmddDiagram::from_dense(
            &DenseState::from_fn(3, |_| Complex64::new(0.0, 0.0)).unwrap(),
        )
        .unwrap();
        let s = g.add(&zero).unwrap();
        assert!(s.equivalent(&g).unwrap());
        assert!(approx_eq(s.root().w, g.root().w));

        // GHZ + GHZ doubles the root weight of the same canonical node.
        let doubled = g.add(&g).unwrap();
        assert!(doubled.equivalent(&g).unwrap());
        assert!(approx_eq(doubled.root().w, g.root().w * 2.0));

        let a = random_state(5, 81).unwrap();
        let b = random_state(5, 82).unwrap();
        let sum = QmddDiagram::from_dense(&a)
            .unwrap()
            .add(&QmddDiagram::from_dense(&b).unwrap())
            .unwrap();
        let want = DenseState::from_fn(5, |x| {
            a.amplitude(x).unwrap() + b.amplitude(x).unwrap()
        })
        .unwrap();
        assert!(sum.to_dense().unwrap().approx_equal(&want));
    }

    #[test]
    fn hadamard_involution_and_oracle() {
        let s = random_state(5, 91).unwrap();
        let d = QmddDiagram::from_dense(&s).unwrap();
        for q in [1, 3, 5] {
            let h = d.apply_hadamard(q).unwrap();
            let want = s.apply_gate(&crate::gate::Gate::h(q)).unwrap();
            assert!(h.to_dense().unwrap().approx_equal(&want));
            let back = h.apply_hadamard(q).unwrap();
            assert!(back.to_dense().unwrap().approx_equal(&s));
        }
    }

    #[test]
    fn swap_examples() {
        let s01 = DenseState::basis_state(&BasisString::parse("01").unwrap()).unwrap();
        let d = QmddDiagram::from_dense(&s01).unwrap();
        let swapped = d.apply_swap(2, 1).unwrap();
        assert!(approx_eq(
            swapped.amplitude(&BasisString::parse("10").unwrap()).unwrap(),
            Complex64::new(1.0, 0.0)
        ));

        let s = random_state(6, 13).unwrap();
        let d = QmddDiagram::from_dense(&s).unwrap();
        for (a, b) in [(6, 1), (4, 2), (5, 4)] {
            let once = d.apply_swap(a, b).unwrap();
            let want = s.apply_gate(&crate::gate::Gate::swap(a, b)).unwrap();
            assert!(once.to_dense().unwrap().approx_equal(&want), "swap {a} {b}");
            let twice = once.apply_swap(a, b).unwrap();
            assert!(twice.to_dense().unwrap().approx_equal(&s));
            // Cross-check against the 3-CX decomposition.
            let via_cx = d.apply_swap_via_cx(a, b).unwrap();
            assert!(via_cx.to_dense().unwrap().approx_equal(&want));
        }
    }

    #[test]
    fn prob_and_sample() {
        let d = ghz_qmdd();
        assert!((d.prob(&BasisString::parse("111").unwrap()).unwrap() - 0.5).abs() < 1e-12);
        assert!(d.prob(&BasisString::parse("010").unwrap()).unwrap() < 1e-12);
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut ones = 0;
        for _ in 0..10_000 {
            let (x, _) = d.sample(&mut rng).unwrap();
            if x.weight() == 3 {
                ones += 1;
            } else {
                assert_eq!(x.weight(), 0);
            }
        }
        let f = ones as f64 / 10_000.0;
        assert!((f - 0.5).abs() < 0.02);
    }

    #[test]
    fn equivalence_ignores_global_factor() {
        let d = ghz_qmdd();
        assert!(d.equivalent(&d).unwrap());
        let phased = QmddDiagram {
            root: d.root().scaled(Complex64::from_polar(1.0, 1.234)),
            ..d.clone()
        };
        assert!(d.equivalent(&phased).unwrap());
        let zero = QmddDiagram::from_dense(&DenseState::zero_state(3).unwrap()).unwrap();
        assert!(!d.equivalent(&zero).unwrap());
    }

    #[test]
    fn budget_aborts_blowup() {
        let plus = crate::states::plus_qmdd(12).unwrap();
        let rot = crate::states::rot_qmdd(12).unwrap();
        assert!(matches!(
            plus.add_with_budget(&rot, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let d = QmddDiagram::from_dense(&random_state(4, 3).unwrap()).unwrap();
        let text = d.to_text();
        let back = QmddDiagram::from_text(&text).unwrap();
        assert_eq!(text, back.to_text());
    }
}
