//! Seeded random graph generation for the verification battery and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{build_graph, Graph};

/// A random connected graph: a random spanning tree plus `extra_edges`
/// random chords (fewer if the graph saturates). Weights and time scales are
/// uniform in [lo, hi]. Deterministic in the RNG state.
pub fn random_connected_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    extra_edges: usize,
    lo: f64,
    hi: f64,
) -> Graph {
    assert!(n >= 2);
    let vertices: Vec<(u64, f64)> = (0..n)
        .map(|i| (i as u64 + 1, rng.gen_range(lo..hi)))
        .collect();
    let mut edges: Vec<(u64, u64, f64)> = Vec::new();
    // random recursive tree keeps every graph connected
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((j as u64 + 1, i as u64 + 1, rng.gen_range(lo..hi)));
    }
    let mut attempts = 0;
    let mut added = 0;
    while added < extra_edges && attempts < 50 * extra_edges.max(1) {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let (a, b) = (u.min(v) as u64 + 1, u.max(v) as u64 + 1);
        if edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (y, x) == (a, b)) {
            continue;
        }
        edges.push((a, b, rng.gen_range(lo..hi)));
        added += 1;
    }
    build_graph(&vertices, &edges).expect("generated graph is always valid")
}

/// A random tree on `n` vertices with parameters uniform in [lo, hi].
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Graph {
    random_connected_graph(rng, n, 0, lo, hi)
}

/// Fresh deterministic RNG for corpus generation.
pub fn corpus_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
