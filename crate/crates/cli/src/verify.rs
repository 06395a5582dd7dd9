//! The cross-validation battery behind the `verify` subcommand: closed forms
//! against the Lyapunov oracle, the Gramian residual, the trace identity for
//! the time-scale split, tree invariance of the full-output model, and the
//! edge-addition deltas against exact recomputation.

use edgeh2_core::corpus::{corpus_rng, random_connected_graph, random_tree};
use edgeh2_core::graph::find_spanning_tree;
use edgeh2_core::h2::realization;
use edgeh2_core::{
    closed_form_gramian, delta_full_timescale, delta_full_weight, delta_tree_model,
    h2_closed_form, h2_lyapunov, h2_relation_check, timescale_split, tree_invariance_check,
    CandidateEdge, Graph, NoiseModel, OutputModel, SpanningTree,
};
use rand::Rng;

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        pass,
        detail,
    }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// All consistency checks for one (graph, tree, noise) triple.
pub fn graph_checks(
    g: &Graph,
    t: &SpanningTree,
    noise: &NoiseModel,
    tag: &str,
) -> Vec<Check> {
    let mut out = Vec::new();
    for model in [OutputModel::Full, OutputModel::Tree] {
        let name = format!("{tag}: closed form vs Lyapunov ({})", model.as_str());
        match (
            h2_closed_form(g, t, noise, model),
            h2_lyapunov(g, t, noise, model),
        ) {
            (Ok(cf), Ok(ly)) => {
                let dev = rel_dev(cf.total_sq, ly.total_sq);
                out.push(check(name, dev <= 1e-8, format!("relative deviation {dev:.3e}")));
            }
            (a, b) => out.push(check(name, false, format!("{a:?} / {b:?}"))),
        }
    }
    // closed-form Gramian satisfies the Lyapunov equation
    let name = format!("{tag}: Gramian residual");
    match (closed_form_gramian(g, t, noise), realization(g, t, OutputModel::Tree)) {
        (Ok(x), Ok(real)) => {
            let (om, ga) = noise.factors(g).unwrap();
            let om2 = nalgebra::DMatrix::from_diagonal(&om.map(|v| v * v));
            let ga2 = nalgebra::DMatrix::from_diagonal(&ga.map(|v| v * v));
            let q = &real.b_process * om2 * real.b_process.transpose()
                + &real.b_edge * ga2 * real.b_edge.transpose();
            let resid = (&real.a * &x + &x * real.a.transpose() + &q).norm() / q.norm();
            out.push(check(name, resid <= 1e-8, format!("relative residual {resid:.3e}")));
        }
        (a, b) => out.push(check(name, false, format!("{a:?} / {b:?}"))),
    }
    // time-scale split identity
    let name = format!("{tag}: time-scale split identity");
    match (
        timescale_split(g, t, noise),
        h2_closed_form(g, t, noise, OutputModel::Full),
    ) {
        (Ok((tp, cp)), Ok(full)) => {
            let dev = (tp + cp - full.timescale_term.unwrap()).abs();
            out.push(check(name, dev <= 1e-10, format!("deviation {dev:.3e}")));
        }
        (a, b) => out.push(check(name, false, format!("{a:?} / {b:?}"))),
    }
    // full/tree relation corrections match the closed-form differences
    let name = format!("{tag}: output-model relation");
    match (
        h2_relation_check(g, t, noise),
        h2_closed_form(g, t, noise, OutputModel::Full),
        h2_closed_form(g, t, noise, OutputModel::Tree),
    ) {
        (Ok((wc, ec)), Ok(full), Ok(tree)) => {
            let dw = (wc - (full.weight_term.unwrap() - tree.weight_term.unwrap())).abs();
            let de = (ec - (full.timescale_term.unwrap() - tree.timescale_term.unwrap())).abs();
            let pass = dw <= 1e-10 && de <= 1e-10 && wc >= -1e-12 && ec >= -1e-12;
            out.push(check(name, pass, format!("deviations {dw:.3e}, {de:.3e}")));
        }
        (a, b, c) => out.push(check(name, false, format!("{a:?} / {b:?} / {c:?}"))),
    }
    // spanning-tree invariance of the full-output model
    let name = format!("{tag}: full-model tree invariance");
    match tree_invariance_check(g, noise) {
        Ok(dev) => out.push(check(name, dev <= 1e-8, format!("max relative deviation {dev:.3e}"))),
        Err(e) => out.push(check(name, false, format!("{e}"))),
    }
    out
}

/// Edge-addition deltas against exact recomputation on a random tree.
pub fn delta_checks(
    tree_graph: &Graph,
    cand: &CandidateEdge,
    noise: &NoiseModel,
    tag: &str,
) -> Vec<Check> {
    let mut out = Vec::new();
    let t = find_spanning_tree(tree_graph).unwrap();
    let before_tree = h2_closed_form(tree_graph, &t, noise, OutputModel::Tree).unwrap();
    let before_full = h2_closed_form(tree_graph, &t, noise, OutputModel::Full).unwrap();
    let after_graph = tree_graph.with_edge(cand.u, cand.v, cand.weight).unwrap();
    let t_after = SpanningTree::from_edges(&after_graph, &t.tree_edges).unwrap();
    let after_tree = h2_closed_form(&after_graph, &t_after, noise, OutputModel::Tree).unwrap();
    let after_full = h2_closed_form(&after_graph, &t_after, noise, OutputModel::Full).unwrap();

    let dt = delta_tree_model(tree_graph, cand, noise).unwrap();
    let exact_dt = after_tree.total_sq - before_tree.total_sq;
    out.push(check(
        format!("{tag}: tree-model delta exactness"),
        (dt - exact_dt).abs() <= 1e-10 && dt < 0.0,
        format!("predicted {dt:.6}, exact {exact_dt:.6}"),
    ));

    let dw = delta_full_weight(tree_graph, cand, noise).unwrap();
    let exact_dw = after_full.weight_term.unwrap() - before_full.weight_term.unwrap();
    out.push(check(
        format!("{tag}: full-model weight delta exactness"),
        (dw - exact_dw).abs() <= 1e-10,
        format!("predicted {dw:.6}, exact {exact_dw:.6}"),
    ));

    let de = delta_full_timescale(tree_graph, cand, noise).unwrap();
    let exact_de = after_full.timescale_term.unwrap() - before_full.timescale_term.unwrap();
    out.push(check(
        format!("{tag}: time-scale delta exactness"),
        (de - exact_de).abs() <= 1e-12 && de >= 0.0,
        format!("predicted {de:.6}, exact {exact_de:.6}"),
    ));
    out
}

/// Runs the full battery: the supplied graph, then `trials` random graphs and
/// `trials` random tree-plus-candidate instances.
pub fn run_battery(g: &Graph, t: &SpanningTree, noise: &NoiseModel, trials: usize) -> Vec<Check> {
    let mut checks = graph_checks(g, t, noise, "input");
    let mut rng = corpus_rng(2024);
    for i in 0..trials {
        let n = rng.gen_range(3..=8);
        let extra = rng.gen_range(0..=3);
        let rg = random_connected_graph(&mut rng, n, extra, 0.1, 10.0);
        let rt = find_spanning_tree(&rg).unwrap();
        let rnoise =
            NoiseModel::structured(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)).unwrap();
        checks.extend(graph_checks(&rg, &rt, &rnoise, &format!("random graph {i}")));
    }
    for i in 0..trials {
        let n = rng.gen_range(3..=10);
        let tree = random_tree(&mut rng, n, 0.1, 10.0);
        // pick a non-adjacent pair; the random recursive tree always leaves one for n >= 3
        let cand = loop {
            let u = rng.gen_range(0..n) as u64 + 1;
            let v = rng.gen_range(0..n) as u64 + 1;
            if u == v {
                continue;
            }
            let iu = tree.index_of(u).unwrap();
            let iv = tree.index_of(v).unwrap();
            if tree.edge_position(iu, iv).is_none() {
                break CandidateEdge {
                    u,
                    v,
                    weight: rng.gen_range(0.1..10.0),
                };
            }
        };
        let rnoise =
            NoiseModel::structured(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)).unwrap();
        checks.extend(delta_checks(&tree, &cand, &rnoise, &format!("random tree {i}")));
    }
    checks
}
