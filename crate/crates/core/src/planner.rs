//! Predicts and ranks the H2 effect of adding edges back to a tree: the
//! closed-form deltas for the tree-output model, the time-scale term of the
//! full-output model, and its weight term, plus a greedy multi-edge planner.

use crate::error::{Error, Result};
use crate::graph::{edge_laplacian, fundamental_basis, Graph, SpanningTree};
use crate::h2::{h2_closed_form, NoiseModel, OutputModel};

/// An edge proposed for addition; endpoints are vertex labels and the weight
/// is always caller-supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEdge {
    pub u: u64,
    pub v: u64,
    pub weight: f64,
}

/// Predicted effect of adding one candidate edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAdditionReport {
    pub candidate: CandidateEdge,
    /// The fundamental cycle the candidate closes in the base tree, as
    /// endpoint label pairs (the candidate itself last).
    pub cycle_edges: Vec<(u64, u64)>,
    /// Change of the tree-output model's total (always <= 0 off a tree base).
    pub delta_tree_model: f64,
    /// Change of the full-output model's weight term.
    pub delta_full_weight: f64,
    /// Change of the full-output model's time-scale term (always >= 0).
    pub delta_full_timescale: f64,
    pub delta_full_total: f64,
}

fn validate_candidate(g: &Graph, c: &CandidateEdge) -> Result<(usize, usize)> {
    let iu = g.index_of(c.u)?;
    let iv = g.index_of(c.v)?;
    if iu == iv {
        return Err(Error::SelfLoop(c.u));
    }
    if !(c.weight.is_finite() && c.weight > 0.0) {
        return Err(Error::NonPositiveParameter(format!(
            "candidate weight must be positive, got {}",
            c.weight
        )));
    }
    if g.edge_position(iu, iv).is_some() {
        return Err(Error::EdgeExists(c.u, c.v));
    }
    Ok((iu, iv))
}

/// Edge positions on the unique tree path between two vertices.
fn tree_path(g: &Graph, from: usize, to: usize) -> Vec<usize> {
    let adj = g.adjacency_lists();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; g.n()];
    let mut stack = vec![from];
    let mut seen = vec![false; g.n()];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        if v == to {
            break;
        }
        for &(w, pos) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, pos));
                stack.push(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while let Some((p, pos)) = prev[v] {
        path.push(pos);
        v = p;
    }
    path
}

fn require_tree(g: &Graph) -> Result<()> {
    if g.is_tree() {
        Ok(())
    } else {
        Err(Error::NotATree)
    }
}

/// Closed-form change of the tree-output model's squared H2 norm when a
/// candidate closes one cycle off a tree base. The weighted cycle length
/// includes the candidate's own reciprocal weight; the quadratic sum runs
/// over tree edges only. Always negative.
pub fn delta_tree_model(g: &Graph, c: &CandidateEdge, noise: &NoiseModel) -> Result<f64> {
    require_tree(g)?;
    let (iu, iv) = validate_candidate(g, c)?;
    let path = tree_path(g, iu, iv);
    let l_w: f64 =
        path.iter().map(|&p| 1.0 / g.weight(p)).sum::<f64>() + 1.0 / c.weight;
    let quad: f64 = path.iter().map(|&p| g.weight(p).powi(-2)).sum();
    Ok(-noise.sigma_omega.powi(2) / (2.0 * l_w) * quad)
}

/// Sum of the per-cycle deltas when several candidates close pairwise
/// edge-disjoint cycles; disjointness is checked through the cycle matrix of
/// the augmented graph (off-diagonal of T^T T must vanish).
pub fn delta_tree_model_multi(
    g: &Graph,
    cs: &[CandidateEdge],
    noise: &NoiseModel,
) -> Result<f64> {
    require_tree(g)?;
    let mut augmented = g.clone();
    for c in cs {
        validate_candidate(&augmented, c)?;
        augmented = augmented.with_edge(c.u, c.v, c.weight)?;
    }
    let tree = SpanningTree::from_edges(&augmented, &(0..g.m()).collect::<Vec<_>>())?;
    let basis = fundamental_basis(&augmented, &tree)?;
    let gram = basis.t_cycle.transpose() * &basis.t_cycle;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            if i != j && gram[(i, j)] != 0.0 {
                return Err(Error::CyclesNotDisjoint);
            }
        }
    }
    cs.iter().map(|c| delta_tree_model(g, c, noise)).sum()
}

/// Splits the full-output model's time-scale term into its tree and cotree
/// parts (each a scaled edge-Laplacian trace).
pub fn timescale_split(g: &Graph, t: &SpanningTree, noise: &NoiseModel) -> Result<(f64, f64)> {
    if !noise.is_structured() {
        return Err(Error::InvalidNoise(
            "the time-scale split requires structured noise".into(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let sv2 = noise.sigma_v.powi(2);
    let tree_part = 0.5 * sv2 * edge_laplacian(g, &t.tree_edges).trace();
    let cotree_part = if t.cotree_edges.is_empty() {
        0.0
    } else {
        0.5 * sv2 * edge_laplacian(g, &t.cotree_edges).trace()
    };
    Ok((tree_part, cotree_part))
}

/// Exact increase of the full-output model's time-scale term when an edge is
/// added between two vertices: half sigma_v^2 times the sum of the endpoints'
/// reciprocal time scales. Always nonnegative; slower nodes cost less.
pub fn delta_full_timescale(g: &Graph, c: &CandidateEdge, noise: &NoiseModel) -> Result<f64> {
    let iu = g.index_of(c.u)?;
    let iv = g.index_of(c.v)?;
    Ok(0.5 * noise.sigma_v.powi(2) * (1.0 / g.epsilon(iu) + 1.0 / g.epsilon(iv)))
}

/// Exact change of the full-output model's weight term when a candidate is
/// added to a tree; the quadratic sum here runs over the whole cycle, the
/// candidate included, so the sign can go either way.
pub fn delta_full_weight(g: &Graph, c: &CandidateEdge, noise: &NoiseModel) -> Result<f64> {
    require_tree(g)?;
    let (iu, iv) = validate_candidate(g, c)?;
    let path = tree_path(g, iu, iv);
    let l_w: f64 =
        path.iter().map(|&p| 1.0 / g.weight(p)).sum::<f64>() + 1.0 / c.weight;
    let quad: f64 =
        path.iter().map(|&p| g.weight(p).powi(-2)).sum::<f64>() + c.weight.powi(-2);
    let sw2 = noise.sigma_omega.powi(2);
    Ok(sw2 / (2.0 * c.weight) - sw2 / (2.0 * l_w) * quad)
}

fn exact_deltas(
    working: &Graph,
    base_tree_positions: &[usize],
    c: &CandidateEdge,
    noise: &NoiseModel,
) -> Result<(f64, f64, f64)> {
    let tree_before = SpanningTree::from_edges(working, base_tree_positions)?;
    let after = working.with_edge(c.u, c.v, c.weight)?;
    let tree_after = SpanningTree::from_edges(&after, base_tree_positions)?;
    let cf = |g: &Graph, t: &SpanningTree, model| h2_closed_form(g, t, noise, model);
    let tree_b = cf(working, &tree_before, OutputModel::Tree)?;
    let tree_a = cf(&after, &tree_after, OutputModel::Tree)?;
    let full_b = cf(working, &tree_before, OutputModel::Full)?;
    let full_a = cf(&after, &tree_after, OutputModel::Full)?;
    Ok((
        tree_a.total_sq - tree_b.total_sq,
        full_a.weight_term.unwrap() - full_b.weight_term.unwrap(),
        full_a.timescale_term.unwrap() - full_b.timescale_term.unwrap(),
    ))
}

/// Greedy sequential edge addition off a tree base. The first step uses the
/// closed-form deltas; once the working graph carries cycles every remaining
/// candidate is scored by exact recomputation. Tree model picks the most
/// negative total change, full model the smallest total change; ties go to
/// the earlier candidate.
pub fn rank_candidates(
    g: &Graph,
    cs: &[CandidateEdge],
    noise: &NoiseModel,
    model: OutputModel,
    k: usize,
) -> Result<Vec<EdgeAdditionReport>> {
    require_tree(g)?;
    if k > cs.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} exceeds the {} candidates",
            cs.len()
        )));
    }
    for c in cs {
        validate_candidate(g, c)?;
    }
    let base_tree_positions: Vec<usize> = (0..g.m()).collect();
    let mut working = g.clone();
    let mut remaining: Vec<CandidateEdge> = cs.to_vec();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let mut scored = Vec::with_capacity(remaining.len());
        for c in &remaining {
            let (dt, dfw, dfe) = if working.is_tree() {
                (
                    delta_tree_model(&working, c, noise)?,
                    delta_full_weight(&working, c, noise)?,
                    delta_full_timescale(&working, c, noise)?,
                )
            } else {
                exact_deltas(&working, &base_tree_positions, c, noise)?
            };
            let score = match model {
                OutputModel::Tree => dt,
                OutputModel::Full => dfw + dfe,
            };
            scored.push((score, dt, dfw, dfe));
        }
        let best = scored
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.0.partial_cmp(&b.0).unwrap().then(i.cmp(j)))
            .map(|(i, _)| i)
            .expect("k <= remaining.len()");
        let c = remaining.remove(best);
        let (_, dt, dfw, dfe) = scored[best];
        let iu = g.index_of(c.u)?;
        let iv = g.index_of(c.v)?;
        let mut cycle_edges: Vec<(u64, u64)> = tree_path(g, iu, iv)
            .iter()
            .map(|&p| {
                let (a, b, _) = g.edge(p);
                (g.label_of(a), g.label_of(b))
            })
            .collect();
        cycle_edges.push((c.u, c.v));
        working = working.with_edge(c.u, c.v, c.weight)?;
        picked.push(EdgeAdditionReport {
            candidate: c,
            cycle_edges,
            delta_tree_model: dt,
            delta_full_weight: dfw,
            delta_full_timescale: dfe,
            delta_full_total: dfw + dfe,
        });
    }
    Ok(picked)
}
