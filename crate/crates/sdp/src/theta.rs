//! Weighted Lovász theta as a standard-form problem.
//!
//! For a graph Γ with weights `w ≥ 0`:
//!
//! ```text
//! θ_w(Γ) = max Σ_{u,v} √(w_u w_v) X_uv   s.t.  tr X = 1,  X_uv = 0 for uv ∈ E(Γ),  X ⪰ 0
//! ```
//!
//! This is the matrix form of `max Σ_v w_v |<ψ|u_v>|²` over orthonormal
//! representations `{u_v}` of Γ and unit handles `ψ`: given such vectors, the
//! Gram matrix of `√w_v <ψ|u_v> u_v / ‖·‖` is feasible with the same value,
//! and conversely a factorisation of an optimal `X` yields the representation.
//!
//! The max form carries one constraint per edge. Exclusivity graphs are often
//! dense, so [`theta_program`] switches to the eigenvalue form
//!
//! ```text
//! θ_w(Γ) = min t   s.t.  Z ⪰ 0,  Z_vv = t - w_v,  Z_uv = -√(w_u w_v) for uv ∉ E(Γ)
//! ```
//!
//! (`Z = tI - A` with `A` free on edges) whenever it has fewer constraints.

use crate::error::SdpError;
use crate::problem::{SdpProblem, SymMatrix};
use crate::solver::SdpSolution;

fn check_graph(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> Result<Vec<(usize, usize)>, SdpError> {
    if n == 0 {
        return Err(SdpError::InvalidArgument("graph has no vertices".into()));
    }
    if weights.len() != n {
        return Err(SdpError::InvalidArgument(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(SdpError::InvalidArgument(format!("weight {w} is not a nonnegative number")));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(SdpError::InvalidArgument(format!("edge ({u},{v}) out of range")));
        }
        if u == v {
            return Err(SdpError::InvalidArgument(format!("loop at vertex {u}")));
        }
        seen.insert((u.min(v), u.max(v)));
    }
    Ok(seen.into_iter().collect())
}

pub fn theta_sdp(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> Result<SdpProblem, SdpError> {
    let edges = check_graph(n, edges, weights)?;
    let mut p = SdpProblem::new(n);
    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    for u in 0..n {
        for v in u..n {
            let c = roots[u] * roots[v];
            if c != 0.0 {
                p.objective.add(u, v, c);
            }
        }
    }
    let mut trace = SymMatrix::new();
    for i in 0..n {
        trace.add(i, i, 1.0);
    }
    p.add_constraint(trace, 1.0);
    for (u, v) in edges {
        p.fix_entry(u, v, 0.0);
    }
    Ok(p)
}

/// Eigenvalue form. The objective is `-Z_00`, so `θ_w = w_0 - optimum`.
pub fn theta_sdp_min(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> Result<SdpProblem, SdpError> {
    let edges = check_graph(n, edges, weights)?;
    let mut p = SdpProblem::new(n);
    p.objective.add(0, 0, -1.0);
    for v in 1..n {
        let mut a = SymMatrix::new();
        a.add(v, v, 1.0);
        a.add(0, 0, -1.0);
        p.add_constraint(a, weights[0] - weights[v]);
    }
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if edges.get(k) == Some(&(u, v)) {
                k += 1;
            } else {
                p.fix_entry(u, v, -(weights[u] * weights[v]).sqrt());
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaForm {
    Max,
    Min,
}

/// A theta problem in whichever form has fewer constraints.
#[derive(Debug, Clone)]
pub struct ThetaProgram {
    pub problem: SdpProblem,
    pub form: ThetaForm,
    offset: f64,
}

impl ThetaProgram {
    /// Certified upper bound on θ_w from a solution of `problem`.
    ///
    /// The max form is bounded by its dual objective; the min form by its
    /// primal point, which is a feasible `Z` and hence a feasible `t`.
    pub fn bound(&self, s: &SdpSolution) -> f64 {
        match self.form {
            ThetaForm::Max => s.value(),
            ThetaForm::Min => self.offset - s.primal_value,
        }
    }
}

pub fn theta_program(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> Result<ThetaProgram, SdpError> {
    let m = check_graph(n, edges, weights)?.len();
    let non_edges = n * (n - 1) / 2 - m;
    if non_edges + n - 1 < m + 1 {
        Ok(ThetaProgram {
            problem: theta_sdp_min(n, edges, weights)?,
            form: ThetaForm::Min,
            offset: weights[0],
        })
    } else {
        Ok(ThetaProgram {
            problem: theta_sdp(n, edges, weights)?,
            form: ThetaForm::Max,
            offset: 0.0,
        })
    }
}

/// Unit-weight convenience wrapper.
pub fn theta_sdp_unweighted(n: usize, edges: &[(usize, usize)]) -> Result<SdpProblem, SdpError> {
    theta_sdp(n, edges, &vec![1.0; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SdpOptions};

    #[test]
    fn single_vertex() {
        let p = theta_sdp(1, &[], &[1.0]).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!((s.value() - 1.0).abs() <= 2e-7, "{s:?}");
    }

    #[test]
    fn two_isolated_vertices() {
        let p = theta_sdp(2, &[], &[1.0, 1.0]).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!((s.value() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_negative_weight() {
        assert!(theta_sdp(2, &[], &[1.0, -0.5]).is_err());
        assert!(theta_sdp(2, &[(0, 0)], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn weighted_edge_takes_max_weight() {
        let p = theta_sdp(2, &[(0, 1)], &[1.0, 3.0]).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!((s.value() - 3.0).abs() < 1e-6);
    }

    fn both_forms(n: usize, edges: &[(usize, usize)], w: &[f64]) -> (f64, f64) {
        let a = solve(&theta_sdp(n, edges, w).unwrap(), &SdpOptions::default()).unwrap();
        let q = theta_sdp_min(n, edges, w).unwrap();
        let b = solve(&q, &SdpOptions::default()).unwrap();
        (a.value(), w[0] - b.primal_value)
    }

    #[test]
    fn min_form_matches_max_form() {
        let c5: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let (a, b) = both_forms(5, &c5, &[1.0; 5]);
        assert!((a - 5f64.sqrt()).abs() < 1e-6 && (b - a).abs() < 1e-6, "{a} {b}");
        let (a, b) = both_forms(5, &c5, &[1.0, 2.0, 0.5, 3.0, 1.5]);
        assert!((b - a).abs() < 1e-6, "{a} {b}");
        let k3 = [(0, 1), (0, 2), (1, 2)];
        let (a, b) = both_forms(4, &k3, &[1.0, 2.0, 0.5, 1.0]);
        assert!((a - 3.0).abs() < 1e-6 && (b - 3.0).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn dense_graphs_use_the_min_form() {
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let t = theta_program(4, &k4, &[1.0, 4.0, 2.0, 0.5]).unwrap();
        assert_eq!(t.form, ThetaForm::Min);
        let s = solve(&t.problem, &SdpOptions::default()).unwrap();
        assert!((t.bound(&s) - 4.0).abs() < 1e-6);
        assert_eq!(theta_program(4, &[], &[1.0; 4]).unwrap().form, ThetaForm::Max);
    }
}
