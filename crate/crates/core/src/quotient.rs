//! Quotients of the directed `2ℓ`-cycle by a pair partition.
//!
//! Start from `v_1 → v_2 → … → v_{2ℓ} → v_1` with edge `e_j: v_j → v_{j+1}`.
//! For each block `(j < k)` of `π`, edges `e_j` and `e_k` are overlaid
//! head-to-tail: `v_j ~ v_{k+1}` and `v_k ~ v_{j+1}`. The resulting vertex
//! classes are exactly the cycles of `γ∘π`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::combinat::PairPartition;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientVertex {
    /// Smallest absorbed cycle-graph index; the vertex's stable id.
    pub id: usize,
    /// Absorbed 1-based cycle-graph vertex indices, sorted.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientEdge {
    /// Position of the source vertex in [`QuotientGraph::vertices`].
    pub source: usize,
    pub target: usize,
    /// 1-based index `j` of the original edge `e_j`.
    pub index: usize,
}

impl QuotientEdge {
    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub ell: usize,
    /// Sorted by id.
    pub vertices: Vec<QuotientVertex>,
    /// One entry per original edge, in order `e_1, …, e_{2ℓ}`.
    pub edges: Vec<QuotientEdge>,
}

impl QuotientGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn loops(&self) -> impl Iterator<Item = &QuotientEdge> {
        self.edges.iter().filter(|e| e.is_loop())
    }

    /// One line per vertex pair: `src dst mult loopflag`, using vertex ids.
    /// Non-loop pairs are written with the smaller id first.
    pub fn to_adjacency_text(&self) -> String {
        let mut grouped: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &self.edges {
            let (s, t) = (self.vertices[e.source].id, self.vertices[e.target].id);
            *grouped.entry((s.min(t), s.max(t))).or_default() += 1;
        }
        let mut out = String::new();
        for ((s, t), mult) in grouped {
            let _ = writeln!(out, "{s} {t} {mult} {}", u8::from(s == t));
        }
        out
    }
}

/// Underlying simple graph: loops dropped, parallel edges merged with their
/// multiplicity recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    /// Vertex ids, in the same order as the quotient's vertices.
    pub vertex_ids: Vec<usize>,
    /// `(u, v) ↦ multiplicity` with `u < v` positions into `vertex_ids`.
    pub edges: BTreeMap<(usize, usize), usize>,
    pub loops: usize,
}

impl SimpleGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges.keys().copied().collect()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in self.edges.keys() {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count() && self.is_connected()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as root so roots are class minima
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }
}

pub fn build_quotient(pp: &PairPartition) -> QuotientGraph {
    let n = pp.size();
    let next = |i: usize| if i + 1 == n { 0 } else { i + 1 };
    let mut uf = UnionFind((0..n).collect());
    for (j, k) in pp.blocks() {
        let (j, k) = (j - 1, k - 1);
        uf.union(j, next(k));
        uf.union(k, next(j));
    }
    let mut position = vec![usize::MAX; n];
    let mut vertices: Vec<QuotientVertex> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        if position[root] == usize::MAX {
            position[root] = vertices.len();
            vertices.push(QuotientVertex { id: root + 1, members: Vec::new() });
        }
        vertices[position[root]].members.push(i + 1);
    }
    let edges = (0..n).map(|j| QuotientEdge { source: position[uf.find(j)], target: position[uf.find(next(j))], index: j + 1 }).collect();
    QuotientGraph { ell: pp.ell(), vertices, edges }
}

pub fn underlying_simple(qg: &QuotientGraph) -> SimpleGraph {
    let mut edges = BTreeMap::new();
    let mut loops = 0;
    for e in &qg.edges {
        if e.is_loop() {
            loops += 1;
        } else {
            *edges.entry((e.source.min(e.target), e.source.max(e.target))).or_insert(0) += 1;
        }
    }
    SimpleGraph { vertex_ids: qg.vertices.iter().map(|v| v.id).collect(), edges, loops }
}

/// No loops, underlying simple graph a tree, every edge doubled.
pub fn is_double_tree(qg: &QuotientGraph) -> bool {
    let sg = underlying_simple(qg);
    sg.loops == 0 && sg.is_tree() && sg.edges.values().all(|&m| m == 2)
}

/// Spanning tree grown from the first vertex, taking the lexicographically
/// smallest crossing edge at each step.
pub fn spanning_tree(sg: &SimpleGraph) -> Result<Vec<(usize, usize)>> {
    let n = sg.vertex_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut tree = Vec::with_capacity(n - 1);
    while tree.len() + 1 < n {
        let next = sg.edges.keys().find(|&&(u, v)| in_tree[u] != in_tree[v]).copied();
        let (u, v) = next.ok_or(Error::Disconnected)?;
        in_tree[u] = true;
        in_tree[v] = true;
        tree.push((u, v));
    }
    Ok(tree)
}
