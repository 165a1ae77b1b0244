//! Infeasible-start primal-dual path-following solver.
//!
//! Primal: `max tr(C X)  s.t.  tr(A_k X) = b_k, X ⪰ 0`.
//! Dual:   `min b'y      s.t.  Σ y_k A_k - C = Z ⪰ 0`.
//!
//! Search directions use the HKM scaling (`dX = (τI - XZ - X dZ) Z⁻¹`,
//! symmetrised) with a Mehrotra predictor-corrector step. The Schur complement
//! `M_kl = tr(A_k X A_l Z⁻¹)` is assembled from the sparse constraint entries
//! and factored densely.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::SdpError;
use crate::problem::{SdpProblem, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Relative duality gap `|p - d| / (1 + |p|)` required for `Optimal`.
    pub gap_tol: f64,
    /// Relative primal and dual residual required for `Optimal`.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::MaxIterations => "max-iterations",
            SdpStatus::Infeasible => "infeasible",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    /// Dual multipliers, one per original constraint (zero for removed ones).
    pub y: DVector<f64>,
    pub z: DMatrix<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Indices of constraints dropped as linearly dependent (and consistent).
    pub removed_constraints: Vec<usize>,
}

impl SdpSolution {
    /// The reported optimum: the dual objective, an upper bound for the maximisation.
    pub fn value(&self) -> f64 {
        self.dual_value
    }

    pub fn min_eigenvalue_x(&self) -> f64 {
        min_eigenvalue(&self.x)
    }
}

/// Constraint matrix in "directed" coordinate form: each off-diagonal entry
/// appears at both `(i, j)` and `(j, i)`.
struct Op {
    entries: Vec<(usize, usize, f64)>,
}

impl Op {
    fn apply(&self, w: &DMatrix<f64>) -> f64 {
        // tr(A W) = Σ A_rc W_cr
        self.entries.iter().map(|&(r, c, v)| v * w[(c, r)]).sum()
    }
}

enum Preprocessed {
    Kept(Vec<usize>, Vec<usize>),
    Inconsistent,
}

/// Removes linearly dependent constraints, detecting inconsistent ones.
///
/// Constraints that own a matrix position no other constraint touches are
/// independent of everything else; only the rest go through an incremental
/// Gram-Cholesky test.
fn preprocess(p: &SdpProblem) -> Preprocessed {
    use std::collections::HashMap;

    let k = p.constraints.len();
    let mut usage: HashMap<(usize, usize), usize> = HashMap::new();
    for c in &p.constraints {
        for (i, j, _) in c.a.upper() {
            *usage.entry((i, j)).or_default() += 1;
        }
    }
    let has_private: Vec<bool> = p
        .constraints
        .iter()
        .map(|c| c.a.upper().any(|(i, j, _)| usage[&(i, j)] == 1))
        .collect();
    if has_private.iter().all(|&b| b) {
        return Preprocessed::Kept((0..k).collect(), Vec::new());
    }

    let order: Vec<usize> = (0..k)
        .filter(|&i| has_private[i])
        .chain((0..k).filter(|&i| !has_private[i]))
        .collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut removed = Vec::new();
    // Rows of the lower Cholesky factor of the Gram matrix of `kept`.
    let mut l_rows: Vec<Vec<f64>> = Vec::new();
    for &idx in &order {
        let a = &p.constraints[idx].a;
        let g: Vec<f64> = kept.iter().map(|&j| p.constraints[j].a.inner(a)).collect();
        let mut l = vec![0.0; kept.len()];
        for r in 0..kept.len() {
            let s: f64 = (0..r).map(|c| l_rows[r][c] * l[c]).sum();
            l[r] = (g[r] - s) / l_rows[r][r];
        }
        let gkk = a.inner(a);
        let resid = gkk - l.iter().map(|v| v * v).sum::<f64>();
        if resid > 1e-10 * gkk.max(1.0) {
            let mut row = l;
            row.push(resid.sqrt());
            l_rows.push(row);
            kept.push(idx);
        } else {
            // Dependent: coefficients c solve L' c = l.
            let mut coef = l.clone();
            for r in (0..kept.len()).rev() {
                let s: f64 = (r + 1..kept.len()).map(|c| l_rows[c][r] * coef[c]).sum();
                coef[r] = (coef[r] - s) / l_rows[r][r];
            }
            let predicted: f64 = coef
                .iter()
                .zip(&kept)
                .map(|(c, &j)| c * p.constraints[j].b)
                .sum();
            let b = p.constraints[idx].b;
            if (b - predicted).abs() > 1e-8 * (1.0 + b.abs()) {
                return Preprocessed::Inconsistent;
            }
            removed.push(idx);
        }
    }
    kept.sort_unstable();
    removed.sort_unstable();
    Preprocessed::Kept(kept, removed)
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Largest `α` with `X + α dX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let Some(w) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(w) = l.solve_lower_triangular(&w.transpose()) else {
        return 0.0;
    };
    let lam = min_eigenvalue(&w);
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

struct Workspace<'a> {
    ops: Vec<Op>,
    b: DVector<f64>,
    c: DMatrix<f64>,
    p: &'a SdpProblem,
}

impl Workspace<'_> {
    fn a_apply(&self, w: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.ops.len(), self.ops.iter().map(|op| op.apply(w)))
    }

    fn at_apply(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let m = self.p.dim;
        let mut out = DMatrix::zeros(m, m);
        for (op, &yk) in self.ops.iter().zip(y.iter()) {
            if yk != 0.0 {
                for &(r, c, v) in &op.entries {
                    out[(r, c)] += yk * v;
                }
            }
        }
        out
    }

    /// `M_kl = tr(A_k X A_l Z⁻¹) = Σ a_rc b_st X_cs Zi_tr`.
    fn schur(&self, x: &DMatrix<f64>, zi: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.ops.len();
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            let ai = &self.ops[i].entries;
            for j in i..k {
                let aj = &self.ops[j].entries;
                let mut s = 0.0;
                for &(r, c, v) in ai {
                    for &(s_, t, u) in aj {
                        s += v * u * x[(c, s_)] * zi[(t, r)];
                    }
                }
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        m
    }
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
}

/// Solves a standard-form problem. See the module docs for the algorithm.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    p.validate()?;
    if !(opts.gap_tol > 0.0 && opts.feas_tol > 0.0) {
        return Err(SdpError::InvalidArgument("tolerances must be positive".into()));
    }
    let m = p.dim;
    let n_orig = p.constraints.len();

    let (kept, removed) = match preprocess(p) {
        Preprocessed::Kept(k, r) => (k, r),
        Preprocessed::Inconsistent => {
            return Ok(SdpSolution {
                x: DMatrix::zeros(m, m),
                y: DVector::zeros(n_orig),
                z: DMatrix::zeros(m, m),
                primal_value: f64::NAN,
                dual_value: f64::NAN,
                gap: f64::INFINITY,
                primal_infeasibility: f64::INFINITY,
                dual_infeasibility: f64::INFINITY,
                status: SdpStatus::Infeasible,
                iterations: 0,
                removed_constraints: Vec::new(),
            })
        }
    };

    let ws = Workspace {
        ops: kept
            .iter()
            .map(|&k| Op {
                entries: p.constraints[k].a.directed(),
            })
            .collect(),
        b: DVector::from_iterator(kept.len(), kept.iter().map(|&k| p.constraints[k].b)),
        c: p.objective.to_dense(m),
        p,
    };
    let nk = ws.ops.len();
    let b_norm = ws.b.norm();
    let c_norm = ws.c.norm();

    // Starting point: scaled identities.
    let a_norms: Vec<f64> = kept
        .iter()
        .map(|&k| p.constraints[k].a.frobenius_norm())
        .collect();
    let mf = m as f64;
    let mut xi = 10f64.max(mf.sqrt());
    let mut eta = 10f64.max(mf.sqrt());
    for (k, an) in a_norms.iter().enumerate() {
        xi = xi.max(mf * (1.0 + ws.b[k].abs()) / (1.0 + an));
        eta = eta.max(1.0 + an);
    }
    eta = eta.max(1.0 + c_norm);
    let mut x = DMatrix::<f64>::identity(m, m) * xi;
    let mut z = DMatrix::<f64>::identity(m, m) * eta;
    let mut y = DVector::<f64>::zeros(nk);

    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut gamma = 0.9;

    let report = |x: &DMatrix<f64>, y: &DVector<f64>, z: &DMatrix<f64>| {
        let rp = &ws.b - ws.a_apply(x);
        let rd = &ws.c + z - ws.at_apply(y);
        let pobj = inner(&ws.c, x);
        let dobj = ws.b.dot(y);
        (rp, rd, pobj, dobj)
    };

    loop {
        let (rp, rd, pobj, dobj) = report(&x, &y, &z);
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = rd.norm() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SdpStatus::Optimal;
            break;
        }
        if iterations >= opts.max_iter || stalls >= 3 {
            break;
        }
        // Divergence of a near-feasible dual or primal sequence signals infeasibility.
        if dinf <= opts.feas_tol.sqrt() && dobj < -1e10 * (1.0 + b_norm) {
            status = SdpStatus::Infeasible;
            break;
        }
        if pinf <= opts.feas_tol.sqrt() && pobj > 1e10 * (1.0 + c_norm) {
            status = SdpStatus::Infeasible;
            break;
        }
        iterations += 1;

        let mu = inner(&x, &z) / mf;
        let Some(zchol) = Cholesky::new(z.clone()) else {
            break;
        };
        let Some(xchol) = Cholesky::new(x.clone()) else {
            break;
        };
        let mut zi = zchol.inverse();
        symmetrize(&mut zi);

        let mut schur = ws.schur(&x, &zi);
        let schur_exact = schur.clone();
        let schur_chol = match Cholesky::new(schur.clone()) {
            Some(c) => c,
            None => {
                let reg = 1e-13 * (0..nk).map(|i| schur[(i, i)]).fold(1e-300, f64::max);
                for i in 0..nk {
                    schur[(i, i)] += reg;
                }
                match Cholesky::new(schur) {
                    Some(c) => c,
                    None => break,
                }
            }
        };

        let x_rd_zi = &x * &rd * &zi;
        let direction = |target: f64, corr: Option<&DMatrix<f64>>| -> Direction {
            // R = τ Z⁻¹ - X - corr Z⁻¹ + X Rd Z⁻¹
            let mut r = &zi * target - &x + &x_rd_zi;
            let corr_zi = corr.map(|c| c * &zi);
            if let Some(cz) = &corr_zi {
                r -= cz;
            }
            let rhs = ws.a_apply(&r) - &rp;
            // Near the optimum the Schur matrix is badly conditioned; a few
            // refinement passes keep the primal residual from drifting.
            let mut dy = schur_chol.solve(&rhs);
            for _ in 0..3 {
                let r = &rhs - &schur_exact * &dy;
                if r.norm() <= 1e-15 * rhs.norm() {
                    break;
                }
                dy += schur_chol.solve(&r);
            }
            let dz = ws.at_apply(&dy) - &rd;
            let mut dx = &zi * target - &x - &x * &dz * &zi;
            if let Some(cz) = &corr_zi {
                dx -= cz;
            }
            symmetrize(&mut dx);
            let mut dz = dz;
            symmetrize(&mut dz);
            Direction { dx, dy, dz }
        };

        // Predictor.
        let pred = direction(0.0, None);
        let ap = (max_step(&xchol, &pred.dx)).min(1.0);
        let ad = (max_step(&zchol, &pred.dz)).min(1.0);
        let x_aff = &x + &pred.dx * ap;
        let z_aff = &z + &pred.dz * ad;
        let mu_aff = inner(&x_aff, &z_aff) / mf;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).max(0.0).powi(3).min(1.0)
        } else {
            0.0
        };

        // Corrector.
        let corr = &pred.dx * &pred.dz;
        let dir = direction(sigma * mu, Some(&corr));
        let ap = (gamma * max_step(&xchol, &dir.dx)).min(1.0);
        let ad = (gamma * max_step(&zchol, &dir.dz)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x += &dir.dx * ap;
        symmetrize(&mut x);
        y += &dir.dy * ad;
        z += &dir.dz * ad;
        symmetrize(&mut z);
        if ap.min(ad) > 0.5 {
            // Staying further from the boundary keeps degenerate problems centred.
            gamma = (gamma + 0.03_f64).min(0.95);
        }
    }

    let (rp, rd, pobj, dobj) = report(&x, &y, &z);
    let mut y_full = DVector::zeros(n_orig);
    for (i, &k) in kept.iter().enumerate() {
        y_full[k] = y[i];
    }
    Ok(SdpSolution {
        primal_infeasibility: rp.norm() / (1.0 + b_norm),
        dual_infeasibility: rd.norm() / (1.0 + c_norm),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        primal_value: pobj,
        dual_value: dobj,
        x,
        y: y_full,
        z,
        status,
        iterations,
        removed_constraints: removed,
    })
}

/// Builds the dual slack `Σ y_k A_k - C` of a solution, mostly for diagnostics.
pub fn dual_slack(p: &SdpProblem, y: &DVector<f64>) -> DMatrix<f64> {
    let mut out = -p.objective.to_dense(p.dim);
    for (c, &yk) in p.constraints.iter().zip(y.iter()) {
        c.a.add_scaled_to(&mut out, yk);
    }
    out
}

/// Convenience for callers that only hold a [`SymMatrix`] objective.
pub fn evaluate(objective: &SymMatrix, x: &DMatrix<f64>) -> f64 {
    objective.dot(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_problem(dim: usize) -> SdpProblem {
        let mut p = SdpProblem::new(dim);
        let mut tr = SymMatrix::new();
        for i in 0..dim {
            p.objective.add(i, i, 1.0);
            tr.add(i, i, 1.0);
        }
        p.add_constraint(tr, 1.0);
        p
    }

    #[test]
    fn maximise_trace_under_unit_trace() {
        let sol = solve(&trace_problem(3), &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value() - 1.0).abs() < 1e-6);
        assert!(sol.min_eigenvalue_x() > -1e-8);
    }

    #[test]
    fn largest_eigenvalue() {
        // max tr(C X), tr X = 1 gives λ_max(C).
        let mut p = trace_problem(2);
        p.objective = SymMatrix::new();
        p.objective.add(0, 0, 2.0);
        p.objective.add(0, 1, 1.0);
        p.objective.add(1, 1, 2.0);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value() - 3.0).abs() < 1e-6, "{}", sol.value());
    }

    #[test]
    fn redundant_constraint_is_dropped() {
        let mut p = trace_problem(2);
        let mut tr2 = SymMatrix::new();
        tr2.add(0, 0, 2.0);
        tr2.add(1, 1, 2.0);
        p.add_constraint(tr2, 2.0);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_eq!(sol.removed_constraints, vec![1]);
        assert!((sol.value() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let mut p = trace_problem(2);
        let mut tr2 = SymMatrix::new();
        tr2.add(0, 0, 1.0);
        tr2.add(1, 1, 1.0);
        p.add_constraint(tr2, 2.0);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn negative_diagonal_is_infeasible() {
        let mut p = SdpProblem::new(2);
        p.objective.add(0, 1, 1.0);
        p.fix_entry(0, 0, -1.0);
        p.fix_entry(1, 1, 1.0);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn dual_slack_is_psd_at_optimum() {
        let sol = solve(&trace_problem(4), &SdpOptions::default()).unwrap();
        let zs = dual_slack(&trace_problem(4), &sol.y);
        assert!(min_eigenvalue(&zs) > -1e-7);
    }
}
