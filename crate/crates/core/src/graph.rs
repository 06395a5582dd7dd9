//! Immutable weighted, time-scaled graphs and the combinatorial machinery
//! built on top of them: incidence matrices, Laplacians, spanning trees,
//! fundamental cycles, and the Tucker representation.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::solve_linear;

/// Tolerance for snapping cycle-matrix entries to integers.
const SNAP_TOL: f64 = 1e-9;

/// A weighted, time-scaled undirected graph. Vertices carry a positive
/// time scale, edges a positive weight. Vertex and edge order is fixed at
/// construction and used everywhere a matrix column refers to an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<u64>,
    epsilons: Vec<f64>,
    /// Edges as (lo, hi, weight) over internal indices, declaration order.
    edges: Vec<(usize, usize, f64)>,
    label_to_index: HashMap<u64, usize>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn is_tree(&self) -> bool {
        self.m() + 1 == self.n() && self.is_connected()
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn epsilon(&self, idx: usize) -> f64 {
        self.epsilons[idx]
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// Edge endpoints (internal indices, lo < hi) and weight.
    pub fn edge(&self, pos: usize) -> (usize, usize, f64) {
        self.edges[pos]
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn weight(&self, pos: usize) -> f64 {
        self.edges[pos].2
    }

    pub fn index_of(&self, label: u64) -> Result<usize> {
        self.label_to_index
            .get(&label)
            .copied()
            .ok_or(Error::UnknownVertex(label))
    }

    pub fn label_of(&self, idx: usize) -> u64 {
        self.labels[idx]
    }

    /// Edge position for an undirected endpoint pair of internal indices.
    pub fn edge_position(&self, u: usize, v: usize) -> Option<usize> {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        self.edges.iter().position(|&(a, b, _)| a == lo && b == hi)
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return false;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let adj = self.adjacency_lists();
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Adjacency lists as (neighbor, edge position).
    pub fn adjacency_lists(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (pos, &(u, v, _)) in self.edges.iter().enumerate() {
            adj[u].push((v, pos));
            adj[v].push((u, pos));
        }
        adj
    }

    /// A new graph with one edge appended; endpoints are vertex labels.
    pub fn with_edge(&self, u: u64, v: u64, weight: f64) -> Result<Graph> {
        let vertices: Vec<(u64, f64)> = self
            .labels
            .iter()
            .zip(&self.epsilons)
            .map(|(&l, &e)| (l, e))
            .collect();
        let mut edges: Vec<(u64, u64, f64)> = self
            .edges
            .iter()
            .map(|&(a, b, w)| (self.labels[a], self.labels[b], w))
            .collect();
        edges.push((u, v, weight));
        build_graph(&vertices, &edges)
    }
}

/// An ordered partition of a graph's edges into a spanning tree and its
/// cotree. Tree and cotree positions are kept in ascending edge order, which
/// fixes the column order of every matrix built from the pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub tree_edges: Vec<usize>,
    pub cotree_edges: Vec<usize>,
}

impl SpanningTree {
    /// Validates and builds a spanning tree from a set of edge positions.
    pub fn from_edges(g: &Graph, tree_edges: &[usize]) -> Result<SpanningTree> {
        let n = g.n();
        if tree_edges.len() + 1 != n {
            return Err(Error::InvalidTree(format!(
                "expected {} tree edges, got {}",
                n - 1,
                tree_edges.len()
            )));
        }
        let mut sorted: Vec<usize> = tree_edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() + 1 != n {
            return Err(Error::InvalidTree("duplicate tree edges".into()));
        }
        if sorted.iter().any(|&p| p >= g.m()) {
            return Err(Error::InvalidTree("edge position out of range".into()));
        }
        // acyclic + spanning via union-find
        let mut uf = UnionFind::new(n);
        for &p in &sorted {
            let (u, v, _) = g.edge(p);
            if !uf.union(u, v) {
                return Err(Error::InvalidTree("tree edges contain a cycle".into()));
            }
        }
        let cotree_edges = (0..g.m()).filter(|p| !sorted.contains(p)).collect();
        Ok(SpanningTree {
            tree_edges: sorted,
            cotree_edges,
        })
    }

    /// Tree degree of each vertex (internal index).
    pub fn degrees(&self, g: &Graph) -> Vec<usize> {
        let mut deg = vec![0usize; g.n()];
        for &p in &self.tree_edges {
            let (u, v, _) = g.edge(p);
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// The tree viewed as a standalone graph (original labels, tree edges only).
    pub fn as_graph(&self, g: &Graph) -> Graph {
        let vertices: Vec<(u64, f64)> = g
            .labels()
            .iter()
            .zip(g.epsilons())
            .map(|(&l, &e)| (l, e))
            .collect();
        let edges: Vec<(u64, u64, f64)> = self
            .tree_edges
            .iter()
            .map(|&p| {
                let (u, v, w) = g.edge(p);
                (g.label_of(u), g.label_of(v), w)
            })
            .collect();
        build_graph(&vertices, &edges).expect("tree subgraph is always valid")
    }
}

/// Incidence, Tucker, and cycle representation matrices for a (graph, tree)
/// pair: D_tree, D_cotree, the cycle matrix T (tree-edge signatures of the
/// fundamental cycles), and R = [I T].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBasis {
    pub d_tree: DMatrix<f64>,
    pub d_cotree: DMatrix<f64>,
    pub t_cycle: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

/// A fundamental cycle: its edge positions and the cotree edge closing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub edges: Vec<usize>,
    pub chord: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Builds a validated graph. Vertex labels are arbitrary non-negative
/// integers; internal indices follow declaration order. Simple graphs only:
/// self-loops and parallel edges are rejected.
pub fn build_graph(vertices: &[(u64, f64)], edges: &[(u64, u64, f64)]) -> Result<Graph> {
    if vertices.is_empty() {
        return Err(Error::NonPositiveParameter("empty vertex list".into()));
    }
    let mut labels = Vec::with_capacity(vertices.len());
    let mut epsilons = Vec::with_capacity(vertices.len());
    let mut label_to_index = HashMap::new();
    for &(id, eps) in vertices {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::NonPositiveParameter(format!(
                "time scale of vertex {id} must be positive, got {eps}"
            )));
        }
        if label_to_index.insert(id, labels.len()).is_some() {
            return Err(Error::NonPositiveParameter(format!(
                "vertex {id} declared twice"
            )));
        }
        labels.push(id);
        epsilons.push(eps);
    }
    let mut internal_edges = Vec::with_capacity(edges.len());
    for &(u, v, w) in edges {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::NonPositiveParameter(format!(
                "weight of edge {u}-{v} must be positive, got {w}"
            )));
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let iu = *label_to_index.get(&u).ok_or(Error::UnknownVertex(u))?;
        let iv = *label_to_index.get(&v).ok_or(Error::UnknownVertex(v))?;
        let (lo, hi) = if iu < iv { (iu, iv) } else { (iv, iu) };
        if internal_edges.iter().any(|&(a, b, _)| a == lo && b == hi) {
            return Err(Error::DuplicateEdge(u, v));
        }
        internal_edges.push((lo, hi, w));
    }
    Ok(Graph {
        labels,
        epsilons,
        edges: internal_edges,
        label_to_index,
    })
}

/// Incidence matrix over a subset of edges, one column per edge in subset
/// order: +1 at the lower internal vertex index, -1 at the other.
pub fn incidence_matrix(g: &Graph, subset: &[usize]) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(g.n(), subset.len());
    for (col, &pos) in subset.iter().enumerate() {
        let (lo, hi, _) = g.edge(pos);
        d[(lo, col)] = 1.0;
        d[(hi, col)] = -1.0;
    }
    d
}

/// Diagonal weight matrix over an edge subset.
pub fn weight_matrix(g: &Graph, subset: &[usize]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        subset.len(),
        subset.iter().map(|&p| g.weight(p)),
    ))
}

/// Graph Laplacian D W D^T.
pub fn graph_laplacian(g: &Graph) -> DMatrix<f64> {
    let all: Vec<usize> = (0..g.m()).collect();
    let d = incidence_matrix(g, &all);
    let w = weight_matrix(g, &all);
    &d * w * d.transpose()
}

/// Edge Laplacian D_S^T E^{-1} D_S over an edge subset S; the diagonal entry
/// for edge (i, j) is 1/eps_i + 1/eps_j.
pub fn edge_laplacian(g: &Graph, subset: &[usize]) -> DMatrix<f64> {
    let d = incidence_matrix(g, subset);
    let e_inv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        g.n(),
        g.epsilons().iter().map(|&e| 1.0 / e),
    ));
    d.transpose() * e_inv * d
}

/// Deterministic spanning tree via depth-first search over the edge order.
pub fn find_spanning_tree(g: &Graph) -> Result<SpanningTree> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let adj = g.adjacency_lists();
    let mut seen = vec![false; g.n()];
    let mut tree = Vec::with_capacity(g.n() - 1);
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(w, pos) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                tree.push(pos);
                stack.push(w);
            }
        }
    }
    SpanningTree::from_edges(g, &tree)
}

/// Exhaustively enumerates spanning trees (recursive include/exclude over the
/// edge order with union-find pruning). Errors once more than `cap` trees are
/// found; oracle use only.
pub fn enumerate_spanning_trees(g: &Graph, cap: usize) -> Result<Vec<SpanningTree>> {
    let (trees, complete) = enumerate_spanning_trees_capped(g, cap)?;
    if !complete {
        return Err(Error::CapExceeded(cap));
    }
    Ok(trees)
}

/// Like [`enumerate_spanning_trees`] but truncates at `cap` instead of
/// erroring. Returns the trees found and whether the enumeration completed.
pub fn enumerate_spanning_trees_capped(
    g: &Graph,
    cap: usize,
) -> Result<(Vec<SpanningTree>, bool)> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    let complete = recurse_trees(g, 0, &mut UnionFind::new(g.n()), &mut chosen, &mut out, cap);
    let trees = out
        .into_iter()
        .map(|edges| SpanningTree::from_edges(g, &edges))
        .collect::<Result<Vec<_>>>()?;
    Ok((trees, complete))
}

fn recurse_trees(
    g: &Graph,
    next: usize,
    uf: &mut UnionFind,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> bool {
    if chosen.len() + 1 == g.n() {
        if out.len() >= cap {
            return false;
        }
        out.push(chosen.clone());
        return true;
    }
    if next >= g.m() || chosen.len() + (g.m() - next) + 1 < g.n() {
        return true;
    }
    // include edge `next` if it joins two components
    let (u, v, _) = g.edge(next);
    let saved = uf.parent.clone();
    if uf.union(u, v) {
        chosen.push(next);
        if !recurse_trees(g, next + 1, uf, chosen, out, cap) {
            chosen.pop();
            uf.parent = saved;
            return false;
        }
        chosen.pop();
    }
    uf.parent = saved;
    // exclude, but only if the remaining edges can still connect everything
    if excluding_keeps_connected(g, next + 1, chosen) {
        if !recurse_trees(g, next + 1, uf, chosen, out, cap) {
            return false;
        }
    }
    true
}

fn excluding_keeps_connected(g: &Graph, next: usize, chosen: &[usize]) -> bool {
    let mut uf = UnionFind::new(g.n());
    let mut comps = g.n();
    for &p in chosen {
        let (u, v, _) = g.edge(p);
        if uf.union(u, v) {
            comps -= 1;
        }
    }
    for p in next..g.m() {
        let (u, v, _) = g.edge(p);
        if uf.union(u, v) {
            comps -= 1;
        }
    }
    comps == 1
}

/// Computes the Tucker machinery for a (graph, tree) pair: the cycle matrix
/// from the normal equations (D_T^T D_T) X = D_T^T D_cotree, with entries
/// snapped to the nearest integer (they are integral in exact arithmetic).
pub fn fundamental_basis(g: &Graph, t: &SpanningTree) -> Result<EdgeBasis> {
    let d_tree = incidence_matrix(g, &t.tree_edges);
    let d_cotree = incidence_matrix(g, &t.cotree_edges);
    let k = t.tree_edges.len();
    let c = t.cotree_edges.len();
    let mut t_cycle = if c == 0 {
        DMatrix::zeros(k, 0)
    } else {
        let gram = d_tree.transpose() * &d_tree;
        let rhs = d_tree.transpose() * &d_cotree;
        solve_linear(&gram, &rhs)?
    };
    for entry in t_cycle.iter_mut() {
        let snapped = entry.round();
        if (*entry - snapped).abs() > SNAP_TOL {
            return Err(Error::NumericalFailure(format!(
                "cycle matrix entry {entry} not within {SNAP_TOL} of an integer"
            )));
        }
        *entry = snapped;
    }
    // Columns of R follow the graph's edge-position order so that R pairs
    // directly with position-ordered weight and noise diagonals.
    let mut r = DMatrix::zeros(k, k + c);
    for (i, &pos) in t.tree_edges.iter().enumerate() {
        r[(i, pos)] = 1.0;
    }
    for (j, &pos) in t.cotree_edges.iter().enumerate() {
        r.view_mut((0, pos), (k, 1)).copy_from(&t_cycle.column(j));
    }
    Ok(EdgeBasis {
        d_tree,
        d_cotree,
        t_cycle,
        r,
    })
}

/// One fundamental cycle per cotree edge: the tree edges with nonzero entries
/// in the corresponding cycle-matrix column, plus the chord itself.
pub fn fundamental_cycles(g: &Graph, t: &SpanningTree) -> Result<Vec<Cycle>> {
    let basis = fundamental_basis(g, t)?;
    let mut cycles = Vec::with_capacity(t.cotree_edges.len());
    for (col, &chord) in t.cotree_edges.iter().enumerate() {
        let mut edges: Vec<usize> = t
            .tree_edges
            .iter()
            .enumerate()
            .filter(|&(row, _)| basis.t_cycle[(row, col)] != 0.0)
            .map(|(_, &pos)| pos)
            .collect();
        edges.push(chord);
        edges.sort_unstable();
        cycles.push(Cycle { edges, chord });
    }
    Ok(cycles)
}

/// Weighted length (sum of reciprocal weights) and unweighted length of a cycle.
pub fn cycle_lengths(g: &Graph, c: &Cycle) -> (f64, usize) {
    let l_w = c.edges.iter().map(|&p| 1.0 / g.weight(p)).sum();
    (l_w, c.edges.len())
}
