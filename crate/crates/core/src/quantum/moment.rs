//! Almost-quantum (1+AB) moment matrix in Collins–Gisin form: each
//! observable keeps the projectors of its first d − 1 outcomes, the last one
//! being the identity minus the others.

use std::collections::HashMap;

use xord_sdp::{solve, DMatrix, SdpOptions, SdpProblem, SymMatrix};

use super::{commutation_graph, BoundReport};
use crate::error::{Error, Result};
use crate::game::LabeledGameGraph;

/// Largest moment matrix accepted.
pub const MAX_WORDS: usize = 200;

/// Projector of outcome `outcome` of observable `vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub vertex: usize,
    pub outcome: usize,
}

pub type Word = Vec<Letter>;

struct Rules<'a> {
    adj: &'a [u64],
}

impl Rules<'_> {
    fn commute(&self, x: usize, y: usize) -> bool {
        x == y || self.adj[x] >> y & 1 == 1
    }

    /// Merges repeated projectors of one observable that can be brought
    /// together; `None` when two such projectors are orthogonal.
    fn reduce(&self, mut w: Word) -> Option<Word> {
        'again: loop {
            for i in 0..w.len() {
                let x = w[i].vertex;
                for j in i + 1..w.len() {
                    if w[j].vertex == x {
                        if w[j].outcome != w[i].outcome {
                            return None;
                        }
                        w.remove(j);
                        continue 'again;
                    }
                    if !self.commute(w[j].vertex, x) {
                        break;
                    }
                }
            }
            return Some(w);
        }
    }

    /// Lexicographically least word of the commutation class.
    fn normal_form(&self, mut rest: Word) -> Word {
        let mut out = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            let mut best: Option<usize> = None;
            for i in 0..rest.len() {
                if (0..i).all(|k| self.commute(rest[k].vertex, rest[i].vertex))
                    && best.map_or(true, |b| rest[i] < rest[b])
                {
                    best = Some(i);
                }
            }
            out.push(rest.remove(best.unwrap()));
        }
        out
    }

    /// Key of the moment ⟨w⟩; moments of a word and its reverse are equal
    /// on a real symmetric matrix.
    fn key(&self, w: Word) -> Option<Word> {
        let w = self.reduce(w)?;
        let mut r = w.clone();
        r.reverse();
        Some(self.normal_form(w).min(self.normal_form(r)))
    }
}

/// Moment matrix indexed by words, each entry naming a distinct moment.
#[derive(Clone, Debug)]
pub struct MomentProblem {
    pub words: Vec<Word>,
    /// Distinct nonzero moments; `moments[0]` is the empty word ⟨1⟩.
    pub moments: Vec<Word>,
    /// `entry[i][j]`: moment at row `i`, column `j`, `None` where the product vanishes.
    pub entry: Vec<Vec<Option<usize>>>,
    /// Objective as coefficients on moments.
    pub objective: Vec<f64>,
    d: usize,
}

impl MomentProblem {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Moment vector of a deterministic assignment.
    pub fn deterministic_moments(&self, values: &[usize]) -> Vec<f64> {
        self.moments
            .iter()
            .map(|w| if w.iter().all(|l| values[l.vertex] == l.outcome) { 1.0 } else { 0.0 })
            .collect()
    }

    /// The moment matrix with the given moments filled in.
    pub fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| self.entry[i][j].map_or(0.0, |k| y[k]))
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, v)| c * v).sum()
    }

    /// Feasibility form over the matrix entries: zeros fixed, equal moments
    /// tied, ⟨1⟩ = 1. Its optimum is γ_{3/2}.
    pub fn entry_form(&self) -> SdpProblem {
        let m = self.dim();
        let mut p = SdpProblem::new(m);
        let mut first: Vec<Option<(usize, usize)>> = vec![None; self.moments.len()];
        for i in 0..m {
            for j in i..m {
                match self.entry[i][j] {
                    None => p.fix_entry(i, j, 0.0),
                    Some(k) => match first[k] {
                        Some(rep) => p.tie_entries(rep, (i, j)),
                        None => first[k] = Some((i, j)),
                    },
                }
            }
        }
        p.fix_entry(0, 0, 1.0);
        for (k, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let (i, j) = first[k].expect("every moment has an entry");
                p.objective.add(i, j, if i == j { c } else { c / 2.0 });
            }
        }
        p
    }

    /// Moment form: the solver's dual variables are the moments other than
    /// ⟨1⟩, its dual slack is the moment matrix and its dual objective is
    /// `c₀ − γ`. A primal point `X` certifies `γ_{3/2} ≤ c₀ + X₀₀`.
    pub fn moment_form(&self) -> SdpProblem {
        let m = self.dim();
        let mut p = SdpProblem::new(m);
        let mut pattern: Vec<SymMatrix> = vec![SymMatrix::new(); self.moments.len()];
        for i in 0..m {
            for j in i..m {
                if let Some(k) = self.entry[i][j] {
                    pattern[k].add(i, j, 1.0);
                }
            }
        }
        for (i, j, v) in pattern[0].upper() {
            p.objective.add(i, j, -v);
        }
        for (k, a) in pattern.into_iter().enumerate().skip(1) {
            p.add_constraint(a, -self.objective[k]);
        }
        p
    }
}

/// Expands the projector of outcome `a` of `x` over Collins–Gisin words.
fn projector(x: usize, a: usize, d: usize) -> Vec<(f64, Word)> {
    if a + 1 < d {
        vec![(1.0, vec![Letter { vertex: x, outcome: a }])]
    } else {
        let mut t = vec![(1.0, Vec::new())];
        t.extend((0..d - 1).map(|b| (-1.0, vec![Letter { vertex: x, outcome: b }])));
        t
    }
}

pub fn moment_problem(g: &LabeledGameGraph) -> Result<MomentProblem> {
    g.require_colored()?;
    let (n, d) = (g.n(), g.d());
    if n > 64 {
        return Err(Error::ResourceLimit("more than 64 observables".into()));
    }
    if d < 2 {
        return Err(Error::InvalidParameter("moment matrix needs d ≥ 2".into()));
    }
    let adj = commutation_graph(g);
    let rules = Rules { adj: &adj };
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| adj[x] >> y & 1 == 1).collect();
    let count = 1 + n * (d - 1) + pairs.len() * (d - 1) * (d - 1);
    if count > MAX_WORDS {
        return Err(Error::ResourceLimit(format!("{count} moment words exceed the limit {MAX_WORDS}")));
    }
    let mut words: Vec<Word> = vec![Vec::new()];
    for x in 0..n {
        for a in 0..d - 1 {
            words.push(vec![Letter { vertex: x, outcome: a }]);
        }
    }
    for &(x, y) in &pairs {
        for a in 0..d - 1 {
            for b in 0..d - 1 {
                words.push(vec![Letter { vertex: x, outcome: a }, Letter { vertex: y, outcome: b }]);
            }
        }
    }
    let m = words.len();
    let mut moments: Vec<Word> = vec![Vec::new()];
    let mut id: HashMap<Word, usize> = HashMap::from([(Vec::new(), 0)]);
    let mut entry = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i..m {
            let mut w: Word = words[i].iter().rev().copied().collect();
            w.extend_from_slice(&words[j]);
            let k = rules.key(w).map(|k| {
                *id.entry(k.clone()).or_insert_with(|| {
                    moments.push(k);
                    moments.len() - 1
                })
            });
            entry[i][j] = k;
            entry[j][i] = k;
        }
    }
    let mut objective = vec![0.0; moments.len()];
    for (x, y, c) in g.colored_edges() {
        for a in 0..d {
            let b = (0..d).find(|&b| g.wins(c, a, b)).expect("permutation has a preimage");
            for (ca, wa) in projector(x, a, d) {
                for (cb, wb) in projector(y, b, d) {
                    let mut w = wa.clone();
                    w.extend_from_slice(&wb);
                    let k = rules.key(w).expect("commuting product of projectors is nonzero");
                    objective[id[&k]] += ca * cb;
                }
            }
        }
    }
    Ok(MomentProblem { words, moments, entry, objective, d })
}

pub fn almost_quantum_value(g: &LabeledGameGraph) -> Result<BoundReport> {
    almost_quantum_value_with(g, &SdpOptions::default())
}

pub fn almost_quantum_value_with(g: &LabeledGameGraph, opts: &SdpOptions) -> Result<BoundReport> {
    let mp = moment_problem(g)?;
    let p = mp.moment_form();
    let s = solve(&p, opts)?;
    Ok(BoundReport {
        value: mp.objective[0] - s.primal_value,
        status: s.status,
        gap: s.gap,
        iterations: s.iterations,
        dim: p.dim,
        constraints: p.constraints.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::classical_value;

    fn cycle(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    fn chsh() -> LabeledGameGraph {
        let mut g = LabeledGameGraph::new_bipartite(4, 2, 2).unwrap();
        for (u, v, c) in [(0, 2, 0), (0, 3, 0), (1, 2, 0), (1, 3, 1)] {
            g.add_edge(u, v, crate::game::EdgeLabel::Colored(c)).unwrap();
        }
        g
    }

    #[test]
    fn reduction_rules() {
        // 0–1 commute, 2 commutes with nobody.
        let adj = vec![0b010, 0b001, 0];
        let r = Rules { adj: &adj };
        let l = |vertex, outcome| Letter { vertex, outcome };
        assert_eq!(r.reduce(vec![l(0, 0), l(1, 0), l(0, 0)]), Some(vec![l(0, 0), l(1, 0)]));
        assert_eq!(r.reduce(vec![l(0, 0), l(1, 0), l(0, 1)]), None);
        assert_eq!(r.reduce(vec![l(0, 0), l(2, 0), l(0, 1)]).map(|w| w.len()), Some(3));
        assert_eq!(r.normal_form(vec![l(1, 0), l(0, 0), l(2, 0)]), vec![l(0, 0), l(1, 0), l(2, 0)]);
        assert_eq!(r.normal_form(vec![l(2, 0), l(1, 0), l(0, 0)]), vec![l(2, 0), l(0, 0), l(1, 0)]);
    }

    #[test]
    fn both_forms_agree() {
        let g = LabeledGameGraph::single_color(5, 2, &cycle(5), 1).unwrap();
        let mp = moment_problem(&g).unwrap();
        let a = solve(&mp.entry_form(), &SdpOptions::default()).unwrap();
        let b = solve(&mp.moment_form(), &SdpOptions::default()).unwrap();
        assert!((a.value() - (mp.objective[0] - b.primal_value)).abs() < 1e-6);
    }

    #[test]
    fn chsh_reaches_tsirelson() {
        let v = almost_quantum_value(&chsh()).unwrap();
        assert!((v.value - (2.0 + 2f64.sqrt())).abs() < 1e-5, "{v:?}");
    }

    #[test]
    fn dashed_pentagon() {
        let g = LabeledGameGraph::single_color(5, 2, &cycle(5), 1).unwrap();
        let v = almost_quantum_value(&g).unwrap();
        assert!((v.value - 2.0 * 5f64.sqrt()).abs() < 1e-4, "{v:?}");
    }

    #[test]
    fn deterministic_points_are_feasible() {
        let g = chsh();
        let mp = moment_problem(&g).unwrap();
        let r = classical_value(&g).unwrap();
        let y = mp.deterministic_moments(&r.witness.values);
        assert!((mp.objective_value(&y) - r.gamma_c as f64).abs() < 1e-12);
        let x = mp.matrix(&y);
        let p = mp.entry_form();
        assert!(p.max_residual(&x) < 1e-12);
        assert!((p.objective_value(&x) - r.gamma_c as f64).abs() < 1e-12);
        // The same point as a dual slack of the moment form.
        let q = mp.moment_form();
        let yd = xord_sdp::DVector::from_iterator(y.len() - 1, y[1..].iter().copied());
        let z = xord_sdp::dual_slack(&q, &yd);
        assert!((z - &x).norm() < 1e-12);
        assert!((mp.objective[0] - q.constraints.iter().zip(&y[1..]).map(|(c, v)| c.b * v).sum::<f64>() - r.gamma_c as f64).abs() < 1e-12);
    }
}
