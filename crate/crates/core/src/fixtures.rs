//! Small named graphs used throughout the tests and the CLI demo corpus.

use crate::graph::{build_graph, Graph};

/// Two vertices joined by a unit edge, unit time scales.
pub fn k2() -> Graph {
    build_graph(&[(1, 1.0), (2, 1.0)], &[(1, 2, 1.0)]).unwrap()
}

/// Triangle with eps = (1, 2, 3) and weights w12 = 3, w13 = 2, w23 = 1.
/// Distinct parameters, yet every spanning tree has the same H2 value.
pub fn tri() -> Graph {
    build_graph(
        &[(1, 1.0), (2, 2.0), (3, 3.0)],
        &[(1, 2, 3.0), (1, 3, 2.0), (2, 3, 1.0)],
    )
    .unwrap()
}

/// The triangle's spanning tree {e12, e13} as a standalone graph.
pub fn tri_tree1() -> Graph {
    build_graph(&[(1, 1.0), (2, 2.0), (3, 3.0)], &[(1, 2, 3.0), (1, 3, 2.0)]).unwrap()
}

/// The triangle's spanning tree {e12, e23} as a standalone graph.
pub fn tri_tree2() -> Graph {
    build_graph(&[(1, 1.0), (2, 2.0), (3, 3.0)], &[(1, 2, 3.0), (2, 3, 1.0)]).unwrap()
}

/// Six-vertex path with unit weights and unit time scales:
/// edges 1-2, 1-3, 3-4, 4-5, 5-6.
pub fn p6() -> Graph {
    build_graph(
        &[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0), (5, 1.0), (6, 1.0)],
        &[
            (1, 2, 1.0),
            (1, 3, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (5, 6, 1.0),
        ],
    )
    .unwrap()
}

/// The path above plus both chords: 2-3 with weight 10 (closing a 3-edge
/// cycle) and 3-6 with weight 5 (closing a 4-edge cycle).
pub fn p6_with_chords() -> Graph {
    build_graph(
        &[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0), (5, 1.0), (6, 1.0)],
        &[
            (1, 2, 1.0),
            (1, 3, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (5, 6, 1.0),
            (2, 3, 10.0),
            (3, 6, 5.0),
        ],
    )
    .unwrap()
}
