//! Minimum-H2 spanning tree: the auxiliary-graph reduction, the greedy
//! frontier-expansion algorithm, the total-cost functional, and the
//! exhaustive oracle.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{enumerate_spanning_trees, Graph, SpanningTree};
use crate::h2::{h2_closed_form, H2Report, NoiseModel, OutputModel};

/// Default enumeration budget for the brute-force oracle.
pub const DEFAULT_TREE_CAP: usize = 1_000_000;

/// The source topology re-weighted so that a minimum-weight spanning tree is
/// a minimum-H2 spanning tree: each edge ij costs
/// sigma_v^2/eps_i + sigma_v^2/eps_j + sigma_omega^2/w_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryGraph {
    /// One cost per edge, in the source graph's edge order.
    pub aux_weights: Vec<f64>,
}

/// Builds the auxiliary edge costs for a graph under structured noise.
pub fn auxiliary_graph(g: &Graph, noise: &NoiseModel) -> Result<AuxiliaryGraph> {
    if !noise.is_structured() {
        return Err(Error::InvalidNoise(
            "auxiliary costs require the structured noise model".into(),
        ));
    }
    let (sw2, sv2) = (noise.sigma_omega.powi(2), noise.sigma_v.powi(2));
    let aux_weights = g
        .edges()
        .iter()
        .map(|&(i, j, w)| sv2 / g.epsilon(i) + sv2 / g.epsilon(j) + sw2 / w)
        .collect();
    Ok(AuxiliaryGraph { aux_weights })
}

/// Half the sum of auxiliary costs over the tree's edges; equals the squared
/// H2 norm of the tree-output model on the tree.
pub fn total_cost(t: &SpanningTree, aux: &AuxiliaryGraph) -> f64 {
    0.5 * t.tree_edges.iter().map(|&p| aux.aux_weights[p]).sum::<f64>()
}

#[derive(PartialEq)]
struct FrontierEdge {
    cost: f64,
    pos: usize,
    vertex: usize,
}

impl Eq for FrontierEdge {}

impl Ord for FrontierEdge {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // finite costs only; ties broken by the lowest edge position
        self.cost
            .partial_cmp(&other.cost)
            .unwrap()
            .then(self.pos.cmp(&other.pos))
    }
}

impl PartialOrd for FrontierEdge {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy minimum-H2 spanning tree, seeded at the lowest-index vertex.
pub fn min_h2_spanning_tree(g: &Graph, noise: &NoiseModel) -> Result<(SpanningTree, H2Report)> {
    min_h2_spanning_tree_from(g, noise, 0)
}

/// Greedy frontier expansion from a chosen seed vertex: repeatedly admit the
/// cheapest auxiliary-cost edge joining the tree to a new vertex. The
/// objective value is seed-independent; the tree itself may differ under ties.
pub fn min_h2_spanning_tree_from(
    g: &Graph,
    noise: &NoiseModel,
    seed: usize,
) -> Result<(SpanningTree, H2Report)> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if seed >= g.n() {
        return Err(Error::UnknownVertex(seed as u64));
    }
    let aux = auxiliary_graph(g, noise)?;
    let adj = g.adjacency_lists();
    let mut in_tree = vec![false; g.n()];
    let mut heap = BinaryHeap::new();
    let push_frontier = |v: usize, heap: &mut BinaryHeap<Reverse<FrontierEdge>>| {
        for &(w, pos) in &adj[v] {
            heap.push(Reverse(FrontierEdge {
                cost: aux.aux_weights[pos],
                pos,
                vertex: w,
            }));
        }
    };
    in_tree[seed] = true;
    push_frontier(seed, &mut heap);
    let mut tree_edges = Vec::with_capacity(g.n() - 1);
    while tree_edges.len() + 1 < g.n() {
        let Reverse(edge) = heap.pop().expect("connected graph cannot exhaust frontier");
        if in_tree[edge.vertex] {
            continue;
        }
        in_tree[edge.vertex] = true;
        tree_edges.push(edge.pos);
        push_frontier(edge.vertex, &mut heap);
    }
    let tree = SpanningTree::from_edges(g, &tree_edges)?;
    let tree_graph = tree.as_graph(g);
    let tree_of_tree = SpanningTree::from_edges(&tree_graph, &(0..tree_graph.m()).collect::<Vec<_>>())?;
    let report = h2_closed_form(&tree_graph, &tree_of_tree, noise, OutputModel::Tree)?;
    Ok((tree, report))
}

/// Exhaustive minimum over all spanning trees; ties broken by the
/// lexicographically smallest tree edge list.
pub fn brute_force_min_tree(g: &Graph, noise: &NoiseModel) -> Result<(SpanningTree, f64)> {
    brute_force_min_tree_capped(g, noise, DEFAULT_TREE_CAP)
}

pub fn brute_force_min_tree_capped(
    g: &Graph,
    noise: &NoiseModel,
    cap: usize,
) -> Result<(SpanningTree, f64)> {
    let aux = auxiliary_graph(g, noise)?;
    let trees = enumerate_spanning_trees(g, cap)?;
    let mut best: Option<(SpanningTree, f64)> = None;
    for t in trees {
        let v = total_cost(&t, &aux);
        match &best {
            Some((bt, bv)) if v > *bv || (v == *bv && t.tree_edges >= bt.tree_edges) => {}
            _ => best = Some((t, v)),
        }
    }
    best.ok_or(Error::Disconnected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::h2::Method;
    use crate::fixtures;
    use crate::graph::build_graph;
    use approx::assert_relative_eq;

    #[test]
    fn tri_aux_weights_all_equal() {
        let g = fixtures::tri();
        let aux = auxiliary_graph(&g, &NoiseModel::default()).unwrap();
        for &w in &aux.aux_weights {
            assert_relative_eq!(w, 11.0 / 6.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn k2_aux_weight() {
        let g = fixtures::k2();
        let aux = auxiliary_graph(&g, &NoiseModel::default()).unwrap();
        assert_relative_eq!(aux.aux_weights[0], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn aux_weights_zero_process_noise() {
        let g = fixtures::tri();
        let noise = NoiseModel::structured(0.0, 1.0).unwrap();
        let aux = auxiliary_graph(&g, &noise).unwrap();
        // depends only on time scales
        assert_relative_eq!(aux.aux_weights[0], 1.0 + 0.5, epsilon = 1e-12);
        assert_relative_eq!(aux.aux_weights[1], 1.0 + 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(aux.aux_weights[2], 0.5 + 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn tri_total_cost_matches_h2() {
        let g = fixtures::tri();
        let aux = auxiliary_graph(&g, &NoiseModel::default()).unwrap();
        let t1 = SpanningTree::from_edges(&g, &[0, 1]).unwrap();
        assert_relative_eq!(total_cost(&t1, &aux), 11.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn k2_total_cost() {
        let g = fixtures::k2();
        let aux = auxiliary_graph(&g, &NoiseModel::default()).unwrap();
        let t = crate::graph::find_spanning_tree(&g).unwrap();
        assert_relative_eq!(total_cost(&t, &aux), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn greedy_tri() {
        let g = fixtures::tri();
        let (tree, report) = min_h2_spanning_tree(&g, &NoiseModel::default()).unwrap();
        assert_eq!(tree.tree_edges.len(), 2);
        assert_relative_eq!(report.total_sq, 11.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn greedy_k2() {
        let g = fixtures::k2();
        let (tree, report) = min_h2_spanning_tree(&g, &NoiseModel::default()).unwrap();
        assert_eq!(tree.tree_edges, vec![0]);
        assert_relative_eq!(report.total_sq, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn greedy_disconnected() {
        let g = build_graph(
            &[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)],
            &[(1, 2, 1.0), (3, 4, 1.0)],
        )
        .unwrap();
        assert_eq!(
            min_h2_spanning_tree(&g, &NoiseModel::default()).unwrap_err(),
            Error::Disconnected
        );
    }

    #[test]
    fn brute_force_tri() {
        let g = fixtures::tri();
        let (_tree, v) = brute_force_min_tree(&g, &NoiseModel::default()).unwrap();
        assert_relative_eq!(v, 11.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn c4_unique_minimizer() {
        // distinct weights and time scales give distinct auxiliary costs here
        let g = build_graph(
            &[(1, 1.0), (2, 2.0), (3, 4.0), (4, 8.0)],
            &[(1, 2, 1.0), (2, 3, 2.0), (3, 4, 4.0), (4, 1, 16.0)],
        )
        .unwrap();
        let noise = NoiseModel::default();
        let aux = auxiliary_graph(&g, &noise).unwrap();
        let mut costs = aux.aux_weights.clone();
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        costs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(costs.len(), 4, "costs must be distinct for this test");
        let (greedy_tree, report) = min_h2_spanning_tree(&g, &noise).unwrap();
        let (brute_tree, v) = brute_force_min_tree(&g, &noise).unwrap();
        assert_relative_eq!(report.total_sq, v, epsilon = 1e-12);
        assert_eq!(greedy_tree.tree_edges, brute_tree.tree_edges);
    }

    #[test]
    fn seed_independent_value() {
        let g = fixtures::p6_with_chords();
        let noise = NoiseModel::default();
        let (_t0, r0) = min_h2_spanning_tree_from(&g, &noise, 0).unwrap();
        for seed in 1..g.n() {
            let (_t, r) = min_h2_spanning_tree_from(&g, &noise, seed).unwrap();
            assert_relative_eq!(r.total_sq, r0.total_sq, epsilon = 1e-12);
        }
    }

    #[test]
    fn greedy_report_method() {
        let g = fixtures::tri();
        let (_t, report) = min_h2_spanning_tree(&g, &NoiseModel::default()).unwrap();
        assert_eq!(report.method, Method::ClosedForm);
    }
}
