//! Algebraic decision diagrams: every edge carries the label 1, leaves carry
//! arbitrary complex values, and only pointwise-equal subfunctions merge.

use super::{Budget, NodeId};
use crate::basis::BasisString;
use crate::complex::{approx_eq, approx_zero, format_amplitude, parse_amplitude, quantize, Amplitude, EPS};
use crate::dense::DenseState;
use crate::gate::Gate;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[derive(Clone, Debug)]
enum Node {
    Leaf(Amplitude),
    Internal { level: usize, lo: NodeId, hi: NodeId },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Key {
    Leaf(crate::complex::QuantAmplitude),
    Internal(usize, NodeId, NodeId),
}

#[derive(Clone, Debug)]
pub struct AddDiagram {
    n: usize,
    nodes: Vec<Node>,
    table: HashMap<Key, NodeId>,
    root: NodeId,
    budget: Budget,
}

struct Builder {
    nodes: Vec<Node>,
    table: HashMap<Key, NodeId>,
    budget: Budget,
}

impl Builder {
    fn new() -> Self {
        Builder {
            nodes: Vec::new(),
            table: HashMap::new(),
            budget: Budget::default(),
        }
    }

    fn leaf(&mut self, value: Amplitude) -> Result<NodeId> {
        let value = if approx_zero(value) {
            Complex64::new(0.0, 0.0)
        } else {
            value
        };
        let key = Key::Leaf(quantize(value));
        if let Some(&id) = self.table.get(&key) {
            return Ok(id);
        }
        self.budget.check(self.nodes.len() + 1)?;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(value));
        self.table.insert(key, id);
        Ok(id)
    }

    fn node(&mut self, level: usize, lo: NodeId, hi: NodeId) -> Result<NodeId> {
        debug_assert_eq!(self.level_of(lo) + 1, level);
        debug_assert_eq!(self.level_of(hi) + 1, level);
        let key = Key::Internal(level, lo, hi);
        if let Some(&id) = self.table.get(&key) {
            return Ok(id);
        }
        self.budget.check(self.nodes.len() + 1)?;
        let id = self.nodes.len();
        self.nodes.push(Node::Internal { level, lo, hi });
        self.table.insert(key, id);
        Ok(id)
    }

    fn level_of(&self, id: NodeId) -> usize {
        match self.nodes[id] {
            Node::Leaf(_) => 0,
            Node::Internal { level, .. } => level,
        }
    }

    /// The all-zero function on `level` qubits: a chain of nodes down to
    /// the 0 leaf (node skipping is not allowed).
    fn zero_chain(&mut self, level: usize) -> Result<NodeId> {
        let mut id = self.leaf(Complex64::new(0.0, 0.0))?;
        for l in 1..=level {
            id = self.node(l, id, id)?;
        }
        Ok(id)
    }

    fn finish(self, n: usize, root: NodeId) -> AddDiagram {
        AddDiagram {
            n,
            nodes: self.nodes,
            table: self.table,
            root,
            budget: self.budget,
        }
    }
}

impl AddDiagram {
    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Shannon-decomposes a dense state into the canonical ADD.
    pub fn from_dense(s: &DenseState) -> Result<Self> {
        let n = s.qubit_count();
        let mut b = Builder::new();
        let root = build_rec(&mut b, s.amplitudes(), n)?;
        Ok(b.finish(n, root))
    }

    pub fn amplitude(&self, x: &BasisString) -> Result<Amplitude> {
        if x.len() != self.n {
            return Err(Error::BasisLengthMismatch {
                got: x.len(),
                want: self.n,
            });
        }
        let mut id = self.root;
        for q in (1..=self.n).rev() {
            match self.nodes[id] {
                Node::Internal { lo, hi, .. } => {
                    id = if x.bit(q) == 0 { lo } else { hi };
                }
                Node::Leaf(_) => unreachable!("level invariant violated"),
            }
        }
        match self.nodes[id] {
            Node::Leaf(v) => Ok(v),
            Node::Internal { .. } => unreachable!(),
        }
    }

    fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if seen[id] {
                continue;
            }
            seen[id] = true;
            out.push(id);
            if let Node::Internal { lo, hi, .. } = self.nodes[id] {
                stack.push(lo);
                stack.push(hi);
            }
        }
        out
    }

    /// Reachable node count, leaves included.
    pub fn node_count(&self) -> usize {
        self.reachable().len()
    }

    pub fn internal_node_count(&self) -> usize {
        self.reachable()
            .iter()
            .filter(|&&id| matches!(self.nodes[id], Node::Internal { .. }))
            .count()
    }

    pub fn leaf_values(&self) -> Vec<Amplitude> {
        self.reachable()
            .iter()
            .filter_map(|&id| match self.nodes[id] {
                Node::Leaf(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        2 * self.internal_node_count() + 1
    }

    /// |V| + |E| + leaf labels + edge labels, unit labels counting 1.
    pub fn size(&self) -> usize {
        let v = self.node_count();
        let e = self.edge_count();
        let leaf_labels = v - self.internal_node_count();
        v + e + leaf_labels + e
    }

    /// Pointwise sum, recursive apply with memoization on node pairs.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        let mut b = Builder::new();
        let mut memo: HashMap<(NodeId, NodeId), NodeId> = HashMap::new();
        let root = sum_rec(&mut b, self, self.root, other, other.root, &mut memo)?;
        Ok(b.finish(self.n, root))
    }

    pub fn scale(&self, factor: Amplitude) -> Result<Self> {
        let mut b = Builder::new();
        let mut memo = HashMap::new();
        let root = scale_rec(&mut b, self, self.root, factor, &mut memo)?;
        Ok(b.finish(self.n, root))
    }

    /// Applies a k-local gate (k <= 3) as a sum of 4^k projection terms.
    pub fn apply_local(&self, g: &Gate) -> Result<Self> {
        g.check_targets(self.n)?;
        let k = g.arity();
        if k > 3 {
            return Err(Error::ArityTooLarge { arity: k, cap: 3 });
        }
        let m = g.matrix();
        let mut acc: Option<AddDiagram> = None;
        for row in 0..1usize << k {
            for col in 0..1usize << k {
                let u = m[(row, col)];
                if approx_zero(u) {
                    continue;
                }
                let term = self.projection_term(g.targets(), row, col, u)?;
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.sum(&term)?,
                });
            }
        }
        match acc {
            Some(d) => Ok(d),
            None => {
                // The zero gate cannot be unitary, but handle it anyway.
                let mut b = Builder::new();
                let root = b.zero_chain(self.n)?;
                Ok(b.finish(self.n, root))
            }
        }
    }

    /// One |y><x| (x) I term: select the `x` branch at every target level,
    /// reroute it under branch `y`, scale by `u`.
    fn projection_term(&self, targets: &[usize], y: usize, x: usize, u: Amplitude) -> Result<Self> {
        let k = targets.len();
        let mut b = Builder::new();
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        // target qubit -> (x bit, y bit)
        let mut bits: HashMap<usize, (u8, u8)> = HashMap::new();
        for (pos, &q) in targets.iter().enumerate() {
            let sh = k - 1 - pos;
            bits.insert(q, (((x >> sh) & 1) as u8, ((y >> sh) & 1) as u8));
        }
        fn rec(
            b: &mut Builder,
            src: &AddDiagram,
            id: NodeId,
            bits: &HashMap<usize, (u8, u8)>,
            u: Amplitude,
            memo: &mut HashMap<NodeId, NodeId>,
        ) -> Result<NodeId> {
            if let Some(&hit) = memo.get(&id) {
                return Ok(hit);
            }
            let out = match src.nodes[id] {
                Node::Leaf(v) => b.leaf(v * u)?,
                Node::Internal { level, lo, hi } => match bits.get(&level) {
                    Some(&(xb, yb)) => {
                        let chosen = if xb == 0 { lo } else { hi };
                        let r = rec(b, src, chosen, bits, u, memo)?;
                        let z = b.zero_chain(level - 1)?;
                        if yb == 0 {
                            b.node(level, r, z)?
                        } else {
                            b.node(level, z, r)?
                        }
                    }
                    None => {
                        let l = rec(b, src, lo, bits, u, memo)?;
                        let h = rec(b, src, hi, bits, u, memo)?;
                        b.node(level, l, h)?
                    }
                },
            };
            memo.insert(id, out);
            Ok(out)
        }
        let root = rec(&mut b, self, self.root, &bits, u, &mut memo)?;
        Ok(b.finish(self.n, root))
    }

    /// `<a|b>` by pairwise recursion with memoization.
    pub fn inner_product(&self, other: &Self) -> Result<Amplitude> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        let mut memo: HashMap<(NodeId, NodeId), Amplitude> = HashMap::new();
        fn rec(
            a: &AddDiagram,
            na: NodeId,
            b: &AddDiagram,
            nb: NodeId,
            memo: &mut HashMap<(NodeId, NodeId), Amplitude>,
        ) -> Amplitude {
            if let Some(&hit) = memo.get(&(na, nb)) {
                return hit;
            }
            let out = match (&a.nodes[na], &b.nodes[nb]) {
                (Node::Leaf(x), Node::Leaf(y)) => x.conj() * y,
                (
                    Node::Internal { lo: la, hi: ha, .. },
                    Node::Internal { lo: lb, hi: hb, .. },
                ) => rec(a, *la, b, *lb, memo) + rec(a, *ha, b, *hb, memo),
                _ => unreachable!("operands share the level structure"),
            };
            memo.insert((na, nb), out);
            out
        }
        Ok(rec(self, self.root, other, other.root, &mut memo))
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut cache = HashMap::new();
        self.subtree_norm_sqr(self.root, &mut cache)
    }

    fn subtree_norm_sqr(&self, id: NodeId, cache: &mut HashMap<NodeId, f64>) -> f64 {
        if let Some(&hit) = cache.get(&id) {
            return hit;
        }
        let out = match self.nodes[id] {
            Node::Leaf(v) => v.norm_sqr(),
            Node::Internal { lo, hi, .. } => {
                self.subtree_norm_sqr(lo, cache) + self.subtree_norm_sqr(hi, cache)
            }
        };
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

    /// Top-down sampling from cached subtree squared norms; one uniform per
    /// qubit. Returns the outcome and the collapsed diagram.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(BasisString, AddDiagram)> {
        let mut cache = HashMap::new();
        let total = self.subtree_norm_sqr(self.root, &mut cache);
        if total <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        let mut bits = Vec::with_capacity(self.n);
        let mut id = self.root;
        for _ in 0..self.n {
            let (lo, hi) = match self.nodes[id] {
                Node::Internal { lo, hi, .. } => (lo, hi),
                Node::Leaf(_) => unreachable!(),
            };
            let w0 = self.subtree_norm_sqr(lo, &mut cache);
            let w1 = self.subtree_norm_sqr(hi, &mut cache);
            let u: f64 = rng.gen();
            let bit = if w0 + w1 <= 0.0 || u * (w0 + w1) < w0 { 0u8 } else { 1u8 };
            bits.push(bit);
            id = if bit == 0 { lo } else { hi };
        }
        let outcome = BasisString::new(bits);
        let amp = self.amplitude(&outcome)?;
        let collapsed = Self::basis_diagram(&outcome, amp / amp.norm())?;
        Ok((outcome, collapsed))
    }

    /// The state `factor * |x>` as a canonical ADD.
    pub fn basis_diagram(x: &BasisString, factor: Amplitude) -> Result<Self> {
        let mut b = Builder::new();
        let mut id = b.leaf(factor)?;
        for q in 1..=x.len() {
            let z = b.zero_chain(q - 1)?;
            id = if x.bit(q) == 0 {
                b.node(q, id, z)?
            } else {
                b.node(q, z, id)?
            };
        }
        Ok(b.finish(x.len(), id))
    }

    /// Projects qubit q onto `bit` (diagonal, non-unitary).
    pub fn project_qubit(&self, q: usize, bit: u8) -> Result<Self> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let mut b = Builder::new();
        let mut memo = HashMap::new();
        fn rec(
            b: &mut Builder,
            src: &AddDiagram,
            id: NodeId,
            q: usize,
            bit: u8,
            memo: &mut HashMap<NodeId, NodeId>,
        ) -> Result<NodeId> {
            if let Some(&hit) = memo.get(&id) {
                return Ok(hit);
            }
            let out = match src.nodes[id] {
                Node::Leaf(v) => b.leaf(v)?,
                Node::Internal { level, lo, hi } => {
                    if level == q {
                        let kept = rec(b, src, if bit == 0 { lo } else { hi }, q, bit, memo)?;
                        let z = b.zero_chain(level - 1)?;
                        if bit == 0 {
                            b.node(level, kept, z)?
                        } else {
                            b.node(level, z, kept)?
                        }
                    } else {
                        let l = rec(b, src, lo, q, bit, memo)?;
                        let h = rec(b, src, hi, q, bit, memo)?;
                        b.node(level, l, h)?
                    }
                }
            };
            memo.insert(id, out);
            Ok(out)
        }
        let root = rec(&mut b, self, self.root, q, bit, &mut memo)?;
        Ok(b.finish(self.n, root))
    }

    /// Equivalence up to a complex factor: normalize the first (lexicographic)
    /// nonzero amplitude to 1 on both sides, then compare canonical diagrams.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        let fa = self.first_nonzero_amplitude();
        let fb = other.first_nonzero_amplitude();
        match (fa, fb) {
            (None, None) => Ok(true),
            (None, _) | (_, None) => Ok(false),
            (Some(a), Some(b)) => {
                let na = self.scale(Complex64::new(1.0, 0.0) / a)?;
                let nb = other.scale(Complex64::new(1.0, 0.0) / b)?;
                Ok(structural_eq(&na, na.root, &nb, nb.root, &mut HashMap::new()))
            }
        }
    }

    fn first_nonzero_amplitude(&self) -> Option<Amplitude> {
        let mut cache = HashMap::new();
        if self.subtree_norm_sqr(self.root, &mut cache) <= EPS * EPS {
            return None;
        }
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                Node::Leaf(v) => return Some(v),
                Node::Internal { lo, hi, .. } => {
                    id = if self.subtree_norm_sqr(lo, &mut cache) > EPS * EPS {
                        lo
                    } else {
                        hi
                    };
                }
            }
        }
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        DenseState::from_fn(self.n, |x| self.amplitude(x).unwrap())
    }

    /// Checks that no two distinct reachable nodes at the same level are
    /// pointwise equal (the ADD merging rule), by comparing subtree tables.
    pub fn audit_reduced(&self) -> Result<()> {
        let reach = self.reachable();
        let mut by_level: HashMap<usize, Vec<NodeId>> = HashMap::new();
        for id in reach {
            by_level.entry(self.level_of(id)).or_default().push(id);
        }
        let mut tables: HashMap<NodeId, Vec<Amplitude>> = HashMap::new();
        for (_, ids) in by_level.iter() {
            for &id in ids {
                let t = self.subtree_table(id, &mut tables).clone();
                tables.insert(id, t);
            }
        }
        for (level, ids) in by_level {
            for i in 0..ids.len() {
                for j in (i + 1)..ids.len() {
                    let ta = &tables[&ids[i]];
                    let tb = &tables[&ids[j]];
                    if ta.iter().zip(tb).all(|(x, y)| approx_eq(*x, *y)) {
                        return Err(Error::Parse(format!(
                            "nodes {} and {} at level {level} are pointwise equal",
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
        let out = match self.nodes[id] {
            Node::Leaf(v) => vec![v],
            Node::Internal { lo, hi, .. } => {
                let mut t = self.subtree_table(lo, tables);
                t.extend(self.subtree_table(hi, tables));
                t
            }
        };
        tables.insert(id, out.clone());
        out
    }

    fn level_of(&self, id: NodeId) -> usize {
        match self.nodes[id] {
            Node::Leaf(_) => 0,
            Node::Internal { level, .. } => level,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qdd add {}\n", self.n);
        // Emit reachable nodes bottom-up by id order for stability.
        let mut reach = self.reachable();
        reach.sort_unstable();
        for &id in &reach {
            match self.nodes[id] {
                Node::Leaf(v) => {
                    out.push_str(&format!("leaf {id} {}\n", format_amplitude(v)));
                }
                Node::Internal { level, lo, hi } => {
                    out.push_str(&format!("node {id} {level} 1,0 {lo} 1,0 {hi}\n"));
                }
            }
        }
        out.push_str(&format!("root 1,0 {}\n", self.root));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut nodes_by_id: HashMap<usize, Node> = HashMap::new();
        let mut n = None;
        let mut root = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "qdd" => {
                    if toks.len() != 3 || toks[1] != "add" {
                        return Err(Error::Parse(format!("bad header {line:?}")));
                    }
                    n = Some(
                        toks[2]
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("bad qubit count: {e}")))?,
                    );
                }
                "leaf" => {
                    if toks.len() != 3 {
                        return Err(Error::Parse(format!("bad leaf line {line:?}")));
                    }
                    let id: usize = toks[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
                    nodes_by_id.insert(id, Node::Leaf(parse_amplitude(toks[2])?));
                }
                "node" => {
                    if toks.len() != 7 {
                        return Err(Error::Parse(format!("bad node line {line:?}")));
                    }
                    let id: usize = toks[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
                    let level: usize = toks[2].parse().map_err(|e| Error::Parse(format!("{e}")))?;
                    let lo: usize = toks[4].parse().map_err(|e| Error::Parse(format!("{e}")))?;
                    let hi: usize = toks[6].parse().map_err(|e| Error::Parse(format!("{e}")))?;
                    nodes_by_id.insert(id, Node::Internal { level, lo, hi });
                }
                "root" => {
                    if toks.len() != 3 {
                        return Err(Error::Parse(format!("bad root line {line:?}")));
                    }
                    root = Some(toks[2].parse::<usize>().map_err(|e| Error::Parse(format!("{e}")))?);
                }
                other => return Err(Error::Parse(format!("unknown line tag {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing header".into()))?;
        let root_ext = root.ok_or_else(|| Error::Parse("missing root".into()))?;
        // Remap external ids to dense storage, children first.
        let mut b = Builder::new();
        let mut remap: HashMap<usize, NodeId> = HashMap::new();
        fn build(
            ext: usize,
            nodes_by_id: &HashMap<usize, Node>,
            b: &mut Builder,
            remap: &mut HashMap<usize, NodeId>,
        ) -> Result<NodeId> {
            if let Some(&id) = remap.get(&ext) {
                return Ok(id);
            }
            let node = nodes_by_id
                .get(&ext)
                .ok_or_else(|| Error::Parse(format!("dangling node id {ext}")))?;
            let id = match *node {
                Node::Leaf(v) => b.leaf(v)?,
                Node::Internal { level, lo, hi } => {
                    let l = build(lo, nodes_by_id, b, remap)?;
                    let h = build(hi, nodes_by_id, b, remap)?;
                    if b.level_of(l) + 1 != level || b.level_of(h) + 1 != level {
                        return Err(Error::Parse(format!("level skip at node {ext}")));
                    }
                    b.node(level, l, h)?
                }
            };
            remap.insert(ext, id);
            Ok(id)
        }
        let root = build(root_ext, &nodes_by_id, &mut b, &mut remap)?;
        let d = b.finish(n, root);
        if d.level_of(d.root) != n {
            return Err(Error::Parse("root level does not match qubit count".into()));
        }
        Ok(d)
    }
}

fn build_rec(b: &mut Builder, amps: &[Amplitude], level: usize) -> Result<NodeId> {
    if level == 0 {
        return b.leaf(amps[0]);
    }
    let half = amps.len() / 2;
    let lo = build_rec(b, &amps[..half], level - 1)?;
    let hi = build_rec(b, &amps[half..], level - 1)?;
    b.node(level, lo, hi)
}

fn sum_rec(
    b: &mut Builder,
    a: &AddDiagram,
    na: NodeId,
    o: &AddDiagram,
    nb: NodeId,
    memo: &mut HashMap<(NodeId, NodeId), NodeId>,
) -> Result<NodeId> {
    if let Some(&hit) = memo.get(&(na, nb)) {
        return Ok(hit);
    }
    let out = match (&a.nodes[na], &o.nodes[nb]) {
        (Node::Leaf(x), Node::Leaf(y)) => b.leaf(x + y)?,
        (Node::Internal { level, lo: la, hi: ha }, Node::Internal { lo: lb, hi: hb, .. }) => {
            let l = sum_rec(b, a, *la, o, *lb, memo)?;
            let h = sum_rec(b, a, *ha, o, *hb, memo)?;
            b.node(*level, l, h)?
        }
        _ => unreachable!("operands share the level structure"),
    };
    memo.insert((na, nb), out);
    Ok(out)
}

fn scale_rec(
    b: &mut Builder,
    a: &AddDiagram,
    id: NodeId,
    factor: Amplitude,
    memo: &mut HashMap<NodeId, NodeId>,
) -> Result<NodeId> {
    if let Some(&hit) = memo.get(&id) {
        return Ok(hit);
    }
    let out = match a.nodes[id] {
        Node::Leaf(v) => b.leaf(v * factor)?,
        Node::Internal { level, lo, hi } => {
            let l = scale_rec(b, a, lo, factor, memo)?;
            let h = scale_rec(b, a, hi, factor, memo)?;
            b.node(level, l, h)?
        }
    };
    memo.insert(id, out);
    Ok(out)
}

fn structural_eq(
    a: &AddDiagram,
    na: NodeId,
    b: &AddDiagram,
    nb: NodeId,
    memo: &mut HashMap<(NodeId, NodeId), bool>,
) -> bool {
    if let Some(&hit) = memo.get(&(na, nb)) {
        return hit;
    }
    let out = match (&a.nodes[na], &b.nodes[nb]) {
        (Node::Leaf(x), Node::Leaf(y)) => approx_eq(*x, *y),
        (
            Node::Internal { level: l1, lo: la, hi: ha },
            Node::Internal { level: l2, lo: lb, hi: hb },
        ) => l1 == l2 && structural_eq(a, *la, b, *lb, memo) && structural_eq(a, *ha, b, *hb, memo),
        _ => false,
    };
    memo.insert((na, nb), out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{ghz_amplitude, random_state};

    fn ghz_add() -> AddDiagram {
        AddDiagram::from_dense(&DenseState::from_fn(3, ghz_amplitude).unwrap()).unwrap()
    }

    #[test]
    fn ghz_structure_matches_figure() {
        let d = ghz_add();
        // 6 internal nodes (1 + 2 + 3) and the two leaves {0, 1/sqrt(2)}.
        assert_eq!(d.internal_node_count(), 6);
        let mut leaves = d.leaf_values();
        leaves.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        assert_eq!(leaves.len(), 2);
        assert!(approx_zero(leaves[0]));
        assert!(approx_eq(
            leaves[1],
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ));
        d.audit_reduced().unwrap();
    }

    #[test]
    fn zero_state_is_single_chain() {
        let z = DenseState::from_fn(3, |_| Complex64::new(0.0, 0.0)).unwrap();
        let d = AddDiagram::from_dense(&z).unwrap();
        assert_eq!(d.internal_node_count(), 3);
        assert_eq!(d.node_count(), 4);
    }

    #[test]
    fn amplitudes_round_trip_all_strings() {
        let s = random_state(5, 9).unwrap();
        let d = AddDiagram::from_dense(&s).unwrap();
        assert!(d.to_dense().unwrap().approx_equal(&s));
        d.audit_reduced().unwrap();
    }

    #[test]
    fn sum_identity_and_basis() {
        let a = ghz_add();
        let z = AddDiagram::from_dense(&DenseState::from_fn(3, |_| Complex64::new(0.0, 0.0)).unwrap())
            .unwrap();
        let s = a.sum(&z).unwrap();
        assert!(s.equivalent(&a).unwrap());
        assert!(s.to_dense().unwrap().approx_equal(&a.to_dense().unwrap()));

        let k0 = AddDiagram::basis_diagram(&BasisString::parse("0").unwrap(), Complex64::new(1.0, 0.0))
            .unwrap();
        let k1 = AddDiagram::basis_diagram(&BasisString::parse("1").unwrap(), Complex64::new(1.0, 0.0))
            .unwrap();
        let u = k0.sum(&k1).unwrap();
        for k in 0..2 {
            let x = BasisString::from_index(1, k);
            assert!(approx_eq(u.amplitude(&x).unwrap(), Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn sum_commutative_up_to_canonical_form() {
        let a = AddDiagram::from_dense(&random_state(4, 31).unwrap()).unwrap();
        let b = AddDiagram::from_dense(&random_state(4, 32).unwrap()).unwrap();
        let ab = a.sum(&b).unwrap();
        let ba = b.sum(&a).unwrap();
        assert!(structural_eq(&ab, ab.root, &ba, ba.root, &mut HashMap::new()));
    }

    #[test]
    fn local_gates_match_oracle() {
        let s = random_state(4, 17).unwrap();
        let d = AddDiagram::from_dense(&s).unwrap();
        for g in [Gate::h(1), Gate::x(3), Gate::t(4), Gate::cz(2, 4), Gate::swap(1, 3)] {
            let got = d.apply_local(&g).unwrap();
            let want = s.apply_gate(&g).unwrap();
            assert!(got.to_dense().unwrap().approx_equal(&want), "{}", g.name);
            got.audit_reduced().unwrap();
        }
    }

    #[test]
    fn h_on_zero_gives_plus() {
        let d = AddDiagram::from_dense(&DenseState::zero_state(1).unwrap()).unwrap();
        let h = d.apply_local(&Gate::h(1)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..2 {
            let x = BasisString::from_index(1, k);
            assert!(approx_eq(h.amplitude(&x).unwrap(), Complex64::new(r, 0.0)));
        }
    }

    #[test]
    fn swap_on_basis() {
        let d = AddDiagram::from_dense(
            &DenseState::basis_state(&BasisString::parse("01").unwrap()).unwrap(),
        )
        .unwrap();
        let s = d.apply_local(&Gate::swap(2, 1)).unwrap();
        assert!(approx_eq(
            s.amplitude(&BasisString::parse("10").unwrap()).unwrap(),
            Complex64::new(1.0, 0.0)
        ));
    }

    #[test]
    fn arity_cap() {
        let s = random_state(4, 1).unwrap();
        let d = AddDiagram::from_dense(&s).unwrap();
        let m = ndarray::Array2::eye(16);
        let g = Gate::new("id4", vec![1, 2, 3, 4], m).unwrap();
        assert!(matches!(d.apply_local(&g), Err(Error::ArityTooLarge { .. })));
    }

    #[test]
    fn inner_product_examples() {
        let g = ghz_add();
        assert!(approx_eq(g.inner_product(&g).unwrap(), Complex64::new(1.0, 0.0)));
        let zero = AddDiagram::from_dense(&DenseState::zero_state(3).unwrap()).unwrap();
        assert!(approx_eq(
            zero.inner_product(&g).unwrap(),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ));
        let a = random_state(6, 41).unwrap();
        let b = random_state(6, 42).unwrap();
        let da = AddDiagram::from_dense(&a).unwrap();
        let db = AddDiagram::from_dense(&b).unwrap();
        let got = da.inner_product(&db).unwrap();
        let want = a.inner_product(&b).unwrap();
        assert!((got - want).norm() <= 1e-9);
    }

    #[test]
    fn prob_and_sampling() {
        let g = ghz_add();
        assert!((g.prob(&BasisString::parse("000").unwrap()).unwrap() - 0.5).abs() < 1e-12);
        let one = AddDiagram::from_dense(
            &DenseState::basis_state(&BasisString::parse("1").unwrap()).unwrap(),
        )
        .unwrap();
        assert!(one.prob(&BasisString::parse("0").unwrap()).unwrap() < 1e-12);

        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut zeros = 0;
        for _ in 0..10_000 {
            let (x, collapsed) = g.sample(&mut rng).unwrap();
            if x.weight() == 0 {
                zeros += 1;
            }
            assert!(collapsed.to_dense().unwrap().normalized());
        }
        let f = zeros as f64 / 10_000.0;
        assert!((f - 0.5).abs() < 0.02);
    }

    #[test]
    fn equivalence_up_to_scalar() {
        let g = ghz_add();
        assert!(g.equivalent(&g).unwrap());
        let doubled = g.scale(Complex64::new(2.0, 0.0)).unwrap();
        assert!(g.equivalent(&doubled).unwrap());
        let zero_state = AddDiagram::from_dense(&DenseState::zero_state(3).unwrap()).unwrap();
        assert!(!g.equivalent(&zero_state).unwrap());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let d = AddDiagram::from_dense(&random_state(4, 55).unwrap()).unwrap();
        let text = d.to_text();
        let back = AddDiagram::from_text(&text).unwrap();
        assert_eq!(text, back.to_text());
        assert!(d.to_dense().unwrap().approx_equal(&back.to_dense().unwrap()));
    }
}
