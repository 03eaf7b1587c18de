//! Simple undirected graphs for graph states and subgraph counting.
//!
//! File format: first line `n m`, then m lines `u v` with 1-based vertices.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Adjacency bitmask per vertex (0-based internally).
    adj: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > 64 {
            return Err(Error::NotSimpleGraph("at most 64 vertices supported".into()));
        }
        let mut g = Graph {
            n,
            adj: vec![0; n],
            edges: Vec::new(),
        };
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![0; n],
            edges: Vec::new(),
        }
    }

    /// Adds an edge between 1-based vertices.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == 0 || u > self.n || v == 0 || v > self.n {
            return Err(Error::NotSimpleGraph(format!(
                "edge ({u},{v}) out of range 1..={}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::NotSimpleGraph(format!("self-loop at {u}")));
        }
        let (a, b) = (u - 1, v - 1);
        if self.adj[a] >> b & 1 == 1 {
            return Err(Error::NotSimpleGraph(format!("duplicate edge ({u},{v})")));
        }
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
        self.edges.push((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as 1-based pairs (u < v).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges induced by a vertex subset given as a bitmask over
    /// 0-based vertices.
    pub fn induced_edge_count(&self, mask: u64) -> usize {
        let mut total = 0usize;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += (self.adj[v] & rest).count_ones() as usize;
        }
        total
    }

    /// Same graph with `extra` fresh isolated vertices appended.
    pub fn with_isolated_vertices(&self, extra: usize) -> Result<Self> {
        let mut g = Graph::empty(self.n + extra);
        if g.n > 64 {
            return Err(Error::NotSimpleGraph("at most 64 vertices supported".into()));
        }
        for &(u, v) in &self.edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Path graph 1-2-...-n.
    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for v in 1..n {
            g.add_edge(v, v + 1).unwrap();
        }
        g
    }

    /// Cycle graph on n >= 3 vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::NotSimpleGraph("cycle needs at least 3 vertices".into()));
        }
        let mut g = Graph::path(n);
        g.add_edge(n, 1)?;
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 1..=n {
            for v in (u + 1)..=n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    /// Grid graph with `rows` x `cols` vertices, row-major numbering.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut g = Graph::empty(rows * cols);
        let id = |r: usize, c: usize| r * cols + c + 1;
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    g.add_edge(id(r, c), id(r, c + 1)).unwrap();
                }
                if r + 1 < rows {
                    g.add_edge(id(r, c), id(r + 1, c)).unwrap();
                }
            }
        }
        g
    }

    /// Seeded Erdos-Renyi-style random graph with edge probability 1/2.
    pub fn random(n: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::empty(n);
        for u in 1..=n {
            for v in (u + 1)..=n {
                if rng.gen::<bool>() {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing vertex count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad vertex count: {e}")))?;
        let m: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing edge count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad edge count: {e}")))?;
        let mut g = Graph::empty(n);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| Error::Parse("missing edge line".into()))?;
            let mut p = line.split_whitespace();
            let u: usize = p
                .next()
                .ok_or_else(|| Error::Parse("bad edge line".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad edge endpoint: {e}")))?;
            let v: usize = p
                .next()
                .ok_or_else(|| Error::Parse("bad edge line".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad edge endpoint: {e}")))?;
            g.add_edge(u, v)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_edges_of_triangle() {
        let k3 = Graph::complete(3);
        assert_eq!(k3.induced_edge_count(0b111), 3);
        assert_eq!(k3.induced_edge_count(0b011), 1);
        assert_eq!(k3.induced_edge_count(0b001), 0);
    }

    #[test]
    fn rejects_non_simple() {
        assert!(Graph::new(2, &[(1, 1)]).is_err());
        assert!(Graph::new(2, &[(1, 2), (2, 1)]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::random(6, 3);
        let back = Graph::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn grid_edge_count() {
        let g = Graph::grid(3, 4);
        // 3 rows x 3 horizontal + 2 x 4 vertical = 9 + 8.
        assert_eq!(g.edge_count(), 17);
    }
}
