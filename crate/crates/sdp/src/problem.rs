//! Standard-form problem data.
//!
//! A problem is `maximize tr(C X)` subject to `tr(A_k X) = b_k` and `X ⪰ 0`,
//! with every matrix symmetric and stored by its upper triangle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use nalgebra::DMatrix;

use crate::error::SdpError;

/// Sparse symmetric matrix stored as its upper triangle.
///
/// An entry `(i, j, v)` with `i < j` stands for both `A[i][j]` and `A[j][i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymMatrix {
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` to `A[i][j]` (and its mirror).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let key = if i <= j { (i, j) } else { (j, i) };
        let slot = self.entries.entry(key).or_insert(0.0);
        *slot += v;
        if *slot == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Upper-triangle entries `(i, j, v)` with `i <= j`, in row-major order.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// All stored positions of the full matrix: off-diagonal entries appear twice.
    pub fn directed(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for (&(i, j), &v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().map(|&(_, j)| j).max()
    }

    /// `tr(A W)` for an arbitrary square `W`.
    pub fn dot(&self, w: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), &v)| {
                if i == j {
                    v * w[(i, i)]
                } else {
                    v * (w[(i, j)] + w[(j, i)])
                }
            })
            .sum()
    }

    /// Frobenius inner product `<A, B>`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(k, &v)| large.entries.get(k).map(|&u| (k, v * u)))
            .map(|(&(i, j), p)| if i == j { p } else { 2.0 * p })
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn to_dense(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        self.add_scaled_to(&mut m, 1.0);
        m
    }

    /// `target += scale * A`.
    pub fn add_scaled_to(&self, target: &mut DMatrix<f64>, scale: f64) {
        for (&(i, j), &v) in &self.entries {
            target[(i, j)] += scale * v;
            if i != j {
                target[(j, i)] += scale * v;
            }
        }
    }
}

/// One equality constraint `tr(A X) = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: SymMatrix,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub dim: usize,
    pub objective: SymMatrix,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            objective: SymMatrix::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, a: SymMatrix, b: f64) {
        self.constraints.push(Constraint { a, b });
    }

    /// Constraint fixing a single entry: `X[i][j] = value`.
    pub fn fix_entry(&mut self, i: usize, j: usize, value: f64) {
        let mut a = SymMatrix::new();
        a.add(i, j, if i == j { 1.0 } else { 0.5 });
        self.add_constraint(a, value);
    }

    /// Constraint tying two entries: `X[i][j] = X[k][l]`.
    pub fn tie_entries(&mut self, (i, j): (usize, usize), (k, l): (usize, usize)) {
        let mut a = SymMatrix::new();
        a.add(i, j, if i == j { 1.0 } else { 0.5 });
        a.add(k, l, if k == l { -1.0 } else { -0.5 });
        self.add_constraint(a, 0.0);
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.dim == 0 {
            return Err(SdpError::InvalidProblem("dimension must be positive".into()));
        }
        let check = |m: &SymMatrix, what: &str| -> Result<(), SdpError> {
            if let Some(j) = m.max_index() {
                if j >= self.dim {
                    return Err(SdpError::InvalidProblem(format!(
                        "{what} references index {j} outside dimension {}",
                        self.dim
                    )));
                }
            }
            if m.upper().any(|(_, _, v)| !v.is_finite()) {
                return Err(SdpError::InvalidProblem(format!("{what} has a non-finite entry")));
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.a, &format!("constraint {k}"))?;
            if !c.b.is_finite() {
                return Err(SdpError::InvalidProblem(format!("constraint {k} has a non-finite right-hand side")));
            }
            if c.a.is_empty() {
                return Err(SdpError::InvalidProblem(format!("constraint {k} has an empty matrix")));
            }
        }
        Ok(())
    }

    /// Objective value `tr(C X)` of a candidate point.
    pub fn objective_value(&self, x: &DMatrix<f64>) -> f64 {
        self.objective.dot(x)
    }

    /// Largest absolute equality residual `|tr(A_k X) - b_k|`.
    pub fn max_residual(&self, x: &DMatrix<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| (c.a.dot(x) - c.b).abs())
            .fold(0.0, f64::max)
    }

    /// Writes the problem in SDPA sparse format.
    ///
    /// SDPA's dual form `max tr(F0 Y) s.t. tr(Fk Y) = ck, Y ⪰ 0` is exactly this
    /// problem with `F0 = C`, `Fk = A_k` and `ck = b_k`. Indices are 1-based.
    pub fn write_sdpa<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.to_sdpa_string().as_bytes())
    }

    pub fn to_sdpa_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\"maximize tr(C X) s.t. tr(A_k X) = b_k, X psd; F0 = C, Fk = A_k");
        let _ = writeln!(s, "{} = mDIM", self.constraints.len());
        let _ = writeln!(s, "1 = nBLOCK");
        let _ = writeln!(s, "{} = bLOCKsTRUCT", self.dim);
        let rhs: Vec<String> = self.constraints.iter().map(|c| format!("{:e}", c.b + 0.0)).collect();
        let _ = writeln!(s, "{}", rhs.join(" "));
        for (i, j, v) in self.objective.upper() {
            let _ = writeln!(s, "0 1 {} {} {:e}", i + 1, j + 1, v);
        }
        for (k, c) in self.constraints.iter().enumerate() {
            for (i, j, v) in c.a.upper() {
                let _ = writeln!(s, "{} 1 {} {} {:e}", k + 1, i + 1, j + 1, v);
            }
        }
        s
    }
}
