//! Edge-coordinate state-space realizations of the noisy consensus dynamics
//! and their squared H2 norms, evaluated both in closed form and through a
//! Lyapunov-equation oracle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{
    edge_laplacian, fundamental_basis, incidence_matrix, weight_matrix,
    enumerate_spanning_trees_capped, Graph, SpanningTree,
};
use crate::numerics::{invert, lyapunov_solve};

/// Enumeration budget for the tree-invariance check; when exceeded, the
/// check runs on the truncated sample instead.
pub const TREE_SAMPLE_CAP: usize = 1000;

/// Which output the realization measures: every edge of the graph, or the
/// spanning-tree edges only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputModel {
    Full,
    Tree,
}

impl OutputModel {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputModel::Full => "full",
            OutputModel::Tree => "tree",
        }
    }
}

/// How an H2 value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Lyapunov,
    Empirical,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Lyapunov => "lyapunov",
            Method::Empirical => "empirical",
        }
    }
}

/// Diagonal noise covariance factors for the general (oracle-only) path.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralNoise {
    /// Diagonal of the process-noise factor, one entry per vertex.
    pub omega_diag: DVector<f64>,
    /// Diagonal of the edge-noise factor, one entry per edge.
    pub gamma_diag: DVector<f64>,
}

/// Noise intensities. The structured case (sigma_omega, sigma_v) scales the
/// process noise by the time scales and the edge noise by the weights, which
/// is what makes the closed forms exact. A general diagonal model may be
/// attached for the Lyapunov path only.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub sigma_omega: f64,
    pub sigma_v: f64,
    pub general: Option<GeneralNoise>,
}

impl NoiseModel {
    pub fn structured(sigma_omega: f64, sigma_v: f64) -> Result<NoiseModel> {
        if sigma_omega < 0.0 || sigma_v < 0.0 || !(sigma_omega.is_finite() && sigma_v.is_finite())
        {
            return Err(Error::InvalidNoise(
                "noise intensities must be finite and nonnegative".into(),
            ));
        }
        if sigma_omega == 0.0 && sigma_v == 0.0 {
            return Err(Error::InvalidNoise(
                "at least one noise intensity must be positive".into(),
            ));
        }
        Ok(NoiseModel {
            sigma_omega,
            sigma_v,
            general: None,
        })
    }

    pub fn general(omega_diag: DVector<f64>, gamma_diag: DVector<f64>) -> Result<NoiseModel> {
        if omega_diag.iter().chain(gamma_diag.iter()).any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidNoise(
                "general noise diagonals must be finite and nonnegative".into(),
            ));
        }
        Ok(NoiseModel {
            sigma_omega: 0.0,
            sigma_v: 0.0,
            general: Some(GeneralNoise {
                omega_diag,
                gamma_diag,
            }),
        })
    }

    pub fn is_structured(&self) -> bool {
        self.general.is_none()
    }

    /// Diagonals of the noise factors Omega and Gamma for a given graph:
    /// sigma_omega * sqrt(eps_i) per vertex and sigma_v * sqrt(w_e) per edge
    /// in the structured case.
    pub fn factors(&self, g: &Graph) -> Result<(DVector<f64>, DVector<f64>)> {
        match &self.general {
            Some(gn) => {
                if gn.omega_diag.len() != g.n() || gn.gamma_diag.len() != g.m() {
                    return Err(Error::InvalidNoise(format!(
                        "general noise dimensions ({}, {}) do not match graph ({}, {})",
                        gn.omega_diag.len(),
                        gn.gamma_diag.len(),
                        g.n(),
                        g.m()
                    )));
                }
                Ok((gn.omega_diag.clone(), gn.gamma_diag.clone()))
            }
            None => Ok((
                DVector::from_iterator(
                    g.n(),
                    g.epsilons().iter().map(|&e| self.sigma_omega * e.sqrt()),
                ),
                DVector::from_iterator(
                    g.m(),
                    g.edges().iter().map(|&(_, _, w)| self.sigma_v * w.sqrt()),
                ),
            )),
        }
    }

    fn require_structured(&self) -> Result<()> {
        if self.is_structured() {
            Ok(())
        } else {
            Err(Error::InvalidNoise(
                "closed forms require the structured noise model".into(),
            ))
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::structured(1.0, 1.0).unwrap()
    }
}

/// State-space realization of the edge dynamics over a spanning tree.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRealization {
    /// System matrix -L^T R W R^T, (n-1) x (n-1).
    pub a: DMatrix<f64>,
    /// Process-noise input D_T^T E^{-1}, (n-1) x n.
    pub b_process: DMatrix<f64>,
    /// Edge-noise input -L^T R, (n-1) x m.
    pub b_edge: DMatrix<f64>,
    /// Output matrix: R^T for the full model, identity for the tree model.
    pub c: DMatrix<f64>,
    pub model: OutputModel,
}

/// A squared H2 value with its weight/time-scale decomposition (structured
/// noise only) and the method that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Report {
    pub model: OutputModel,
    pub method: Method,
    pub total_sq: f64,
    pub weight_term: Option<f64>,
    pub timescale_term: Option<f64>,
}

/// Residuals of the similarity transform taking the scaled node Laplacian to
/// block-diagonal edge coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    /// Max abs deviation of the transformed matrix from blkdiag(L^T R W R^T, 0).
    pub max_deviation: f64,
    /// The expected top-left block L^T R W R^T.
    pub top_block: DMatrix<f64>,
}

fn check_tree(g: &Graph, t: &SpanningTree) -> Result<()> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    SpanningTree::from_edges(g, &t.tree_edges).map(|_| ())
}

fn e_inverse(g: &Graph) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        g.n(),
        g.epsilons().iter().map(|&e| 1.0 / e),
    ))
}

/// Assembles the edge-coordinate realization for a (graph, tree) pair.
pub fn realization(g: &Graph, t: &SpanningTree, model: OutputModel) -> Result<EdgeRealization> {
    check_tree(g, t)?;
    let basis = fundamental_basis(g, t)?;
    let l_tree = edge_laplacian(g, &t.tree_edges);
    let all: Vec<usize> = (0..g.m()).collect();
    let w = weight_matrix(g, &all);
    let a = -(&l_tree * &basis.r * w * basis.r.transpose());
    let b_process = basis.d_tree.transpose() * e_inverse(g);
    let b_edge = -(&l_tree * &basis.r);
    let c = match model {
        OutputModel::Full => basis.r.transpose(),
        OutputModel::Tree => DMatrix::identity(t.tree_edges.len(), t.tree_edges.len()),
    };
    Ok(EdgeRealization {
        a,
        b_process,
        b_edge,
        c,
        model,
    })
}

/// Closed-form squared H2 norm with its weight/time-scale split. On a tree
/// graph the explicit sums over edge weights and tree degrees are used; on a
/// graph with cycles the trace formulas over the Tucker basis apply.
pub fn h2_closed_form(
    g: &Graph,
    t: &SpanningTree,
    noise: &NoiseModel,
    model: OutputModel,
) -> Result<H2Report> {
    noise.require_structured()?;
    check_tree(g, t)?;
    let (sw2, sv2) = (noise.sigma_omega.powi(2), noise.sigma_v.powi(2));
    let (weight_term, timescale_term) = if g.is_tree() {
        // both models coincide on a tree: R = I
        let wt = 0.5 * sw2 * g.edges().iter().map(|&(_, _, w)| 1.0 / w).sum::<f64>();
        let degs = t.degrees(g);
        let ts = 0.5
            * sv2
            * degs
                .iter()
                .zip(g.epsilons())
                .map(|(&d, &e)| d as f64 / e)
                .sum::<f64>();
        (wt, ts)
    } else {
        let basis = fundamental_basis(g, t)?;
        let all: Vec<usize> = (0..g.m()).collect();
        let w = weight_matrix(g, &all);
        let m_inv = invert(&(&basis.r * w * basis.r.transpose()))?;
        let l_tree = edge_laplacian(g, &t.tree_edges);
        match model {
            OutputModel::Tree => (0.5 * sw2 * m_inv.trace(), 0.5 * sv2 * l_tree.trace()),
            OutputModel::Full => (
                0.5 * sw2 * (basis.r.transpose() * &m_inv * &basis.r).trace(),
                0.5 * sv2 * (basis.r.transpose() * &l_tree * &basis.r).trace(),
            ),
        }
    };
    Ok(H2Report {
        model,
        method: Method::ClosedForm,
        total_sq: weight_term + timescale_term,
        weight_term: Some(weight_term),
        timescale_term: Some(timescale_term),
    })
}

/// The closed-form Gramian (sigma_omega^2 (R W R^T)^{-1} + sigma_v^2 L^T) / 2.
pub fn closed_form_gramian(
    g: &Graph,
    t: &SpanningTree,
    noise: &NoiseModel,
) -> Result<DMatrix<f64>> {
    noise.require_structured()?;
    check_tree(g, t)?;
    let basis = fundamental_basis(g, t)?;
    let all: Vec<usize> = (0..g.m()).collect();
    let w = weight_matrix(g, &all);
    let m_inv = invert(&(&basis.r * w * basis.r.transpose()))?;
    let l_tree = edge_laplacian(g, &t.tree_edges);
    Ok((m_inv.scale(noise.sigma_omega.powi(2)) + l_tree.scale(noise.sigma_v.powi(2))).scale(0.5))
}

fn lyapunov_gramian(
    r: &EdgeRealization,
    omega_diag: &DVector<f64>,
    gamma_diag: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let omega_sq = DMatrix::from_diagonal(&omega_diag.map(|v| v * v));
    let gamma_sq = DMatrix::from_diagonal(&gamma_diag.map(|v| v * v));
    let q = &r.b_process * omega_sq * r.b_process.transpose()
        + &r.b_edge * gamma_sq * r.b_edge.transpose();
    lyapunov_solve(&r.a, &q)
}

/// Squared H2 norm through the Lyapunov equation. Accepts general diagonal
/// noise; under structured noise the weight and time-scale terms are obtained
/// by zeroing one channel at a time, so the decomposition is additive by
/// construction.
pub fn h2_lyapunov(
    g: &Graph,
    t: &SpanningTree,
    noise: &NoiseModel,
    model: OutputModel,
) -> Result<H2Report> {
    let real = realization(g, t, model)?;
    let (omega_diag, gamma_diag) = noise.factors(g)?;
    if noise.is_structured() {
        let zeros_n = DVector::zeros(g.n());
        let zeros_m = DVector::zeros(g.m());
        let x_w = lyapunov_gramian(&real, &omega_diag, &zeros_m)?;
        let x_e = lyapunov_gramian(&real, &zeros_n, &gamma_diag)?;
        let wt = (&real.c * x_w * real.c.transpose()).trace();
        let ts = (&real.c * x_e * real.c.transpose()).trace();
        Ok(H2Report {
            model,
            method: Method::Lyapunov,
            total_sq: wt + ts,
            weight_term: Some(wt),
            timescale_term: Some(ts),
        })
    } else {
        let x = lyapunov_gramian(&real, &omega_diag, &gamma_diag)?;
        Ok(H2Report {
            model,
            method: Method::Lyapunov,
            total_sq: (&real.c * x * real.c.transpose()).trace(),
            weight_term: None,
            timescale_term: None,
        })
    }
}

/// The two correction traces relating the full-output and tree-output models:
/// the weight correction tr[T^T (R W R^T)^{-1} T] and the time-scale
/// correction tr[T^T L^T T], each scaled by its noise intensity over two.
pub fn h2_relation_check(g: &Graph, t: &SpanningTree, noise: &NoiseModel) -> Result<(f64, f64)> {
    noise.require_structured()?;
    check_tree(g, t)?;
    let basis = fundamental_basis(g, t)?;
    let all: Vec<usize> = (0..g.m()).collect();
    let w = weight_matrix(g, &all);
    let m_inv = invert(&(&basis.r * w * basis.r.transpose()))?;
    let l_tree = edge_laplacian(g, &t.tree_edges);
    let tt = &basis.t_cycle;
    let w_corr =
        0.5 * noise.sigma_omega.powi(2) * (tt.transpose() * &m_inv * tt).trace();
    let e_corr = 0.5 * noise.sigma_v.powi(2) * (tt.transpose() * &l_tree * tt).trace();
    Ok((w_corr, e_corr))
}

/// Builds the similarity transform from node to edge coordinates and measures
/// how far the transformed scaled Laplacian is from block diagonal.
pub fn verify_similarity(g: &Graph, t: &SpanningTree) -> Result<SimilarityReport> {
    check_tree(g, t)?;
    let basis = fundamental_basis(g, t)?;
    let e_inv = e_inverse(g);
    let l_tree = edge_laplacian(g, &t.tree_edges);
    let l_tree_inv = invert(&l_tree)?;
    let n = g.n();
    let mut s = DMatrix::zeros(n, n);
    s.view_mut((0, 0), (n, n - 1))
        .copy_from(&(&e_inv * &basis.d_tree * l_tree_inv));
    s.view_mut((0, n - 1), (n, 1))
        .copy_from(&DMatrix::from_element(n, 1, 1.0));
    let s_inv = invert(&s)?;
    let all: Vec<usize> = (0..g.m()).collect();
    let w = weight_matrix(g, &all);
    let transformed = s_inv * &e_inv * crate::graph::graph_laplacian(g) * s;
    let top_block = &l_tree * &basis.r * w * basis.r.transpose();
    let mut expected = DMatrix::zeros(n, n);
    expected
        .view_mut((0, 0), (n - 1, n - 1))
        .copy_from(&top_block);
    let max_deviation = (transformed - expected)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(SimilarityReport {
        max_deviation,
        top_block,
    })
}

/// The full-output model measures every edge, so its value cannot depend on
/// which spanning tree parameterizes it. Evaluates the closed form over all
/// spanning trees (truncated at [`TREE_SAMPLE_CAP`]) and returns the maximum
/// pairwise relative deviation of the totals.
pub fn tree_invariance_check(g: &Graph, noise: &NoiseModel) -> Result<f64> {
    let (trees, _complete) = enumerate_spanning_trees_capped(g, TREE_SAMPLE_CAP)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in &trees {
        let v = h2_closed_form(g, t, noise, OutputModel::Full)?.total_sq;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((hi - lo) / hi.abs().max(f64::MIN_POSITIVE))
}

/// Incidence matrix of the whole graph, in edge order. Exposed for the
/// simulation and verification layers.
pub fn full_incidence(g: &Graph) -> DMatrix<f64> {
    let all: Vec<usize> = (0..g.m()).collect();
    incidence_matrix(g, &all)
}
