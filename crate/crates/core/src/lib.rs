//! H2 performance of weighted, time-scaled consensus networks in edge
//! coordinates: closed-form norms cross-validated against Lyapunov and
//! Monte Carlo oracles, minimum-H2 spanning trees, and edge-addition
//! planning over fundamental cycles.

pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod h2;
pub mod numerics;
pub mod planner;
pub mod sim;
pub mod treeopt;

pub use error::{Error, Result};
pub use graph::{
    build_graph, cycle_lengths, edge_laplacian, enumerate_spanning_trees, find_spanning_tree,
    fundamental_basis, fundamental_cycles, graph_laplacian, incidence_matrix, Cycle, EdgeBasis,
    Graph, SpanningTree,
};
pub use h2::{
    closed_form_gramian, h2_closed_form, h2_lyapunov, h2_relation_check, realization,
    tree_invariance_check, verify_similarity, EdgeRealization, H2Report, Method, NoiseModel,
    OutputModel,
};
pub use planner::{
    delta_full_timescale, delta_full_weight, delta_tree_model, delta_tree_model_multi,
    rank_candidates, timescale_split, CandidateEdge, EdgeAdditionReport,
};
pub use sim::{empirical_h2, simulate, Estimate, SimConfig};
pub use treeopt::{
    auxiliary_graph, brute_force_min_tree, min_h2_spanning_tree, min_h2_spanning_tree_from,
    total_cost, AuxiliaryGraph,
};
