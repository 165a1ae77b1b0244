//! Orthogonality graph of a game and its weighted Lovász theta.

use xord_sdp::{solve, theta_program, SdpOptions, ThetaProgram};

use super::{commutation_graph, BoundReport};
use crate::error::{Error, Result};
use crate::game::LabeledGameGraph;

/// Largest event count accepted for the theta SDP.
pub const MAX_EVENTS: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub clique: usize,
    /// Outcome of each observable of the clique, in clique order.
    pub outcomes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalityGraph {
    /// Maximal cliques of the commutation graph, sorted vertex lists in lexicographic order.
    pub cliques: Vec<Vec<usize>>,
    pub events: Vec<Event>,
    /// Exclusivity pairs `(i, j)`, `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub weights: Vec<u64>,
}

impl OrthogonalityGraph {
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.events.len();
        let mut a = vec![vec![false; n]; n];
        for &(i, j) in &self.edges {
            a[i][j] = true;
            a[j][i] = true;
        }
        a
    }

    /// Observables of event `e` with their outcomes.
    pub fn observables(&self, e: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let ev = &self.events[e];
        self.cliques[ev.clique].iter().copied().zip(ev.outcomes.iter().copied())
    }
}

/// Bron–Kerbosch with pivoting over adjacency bitsets; isolated vertices
/// are their own cliques.
pub fn maximal_cliques(adj: &[u64]) -> Vec<Vec<usize>> {
    fn bk(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
        if p == 0 {
            if x == 0 {
                out.push(r);
            }
            return;
        }
        let pivot = {
            let px = p | x;
            let mut best = (0, px.trailing_zeros() as usize);
            let mut m = px;
            while m != 0 {
                let u = m.trailing_zeros() as usize;
                m &= m - 1;
                let c = (p & adj[u]).count_ones();
                if c > best.0 {
                    best = (c, u);
                }
            }
            best.1
        };
        let mut cand = p & !adj[pivot];
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            bk(adj, r | 1 << v, p & adj[v], x & adj[v], out);
            p &= !(1 << v);
            x |= 1 << v;
        }
    }
    let n = adj.len();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    bk(adj, 0, all, 0, &mut out);
    let mut cliques: Vec<Vec<usize>> =
        out.into_iter().map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect()).collect();
    cliques.sort();
    cliques
}

pub fn build_orthogonality_graph(g: &LabeledGameGraph) -> Result<OrthogonalityGraph> {
    g.require_colored()?;
    if g.n() > 64 {
        return Err(Error::ResourceLimit("more than 64 observables".into()));
    }
    let d = g.d();
    let cliques = maximal_cliques(&commutation_graph(g));
    let total: f64 = cliques.iter().map(|c| (d as f64).powi(c.len() as i32)).sum();
    if total > MAX_EVENTS as f64 {
        return Err(Error::ResourceLimit(format!("{total} events exceed the limit {MAX_EVENTS}")));
    }
    let mut events = Vec::new();
    for (ci, c) in cliques.iter().enumerate() {
        let k = c.len() as u32;
        for code in 0..d.pow(k) {
            let outcomes = (0..k).map(|i| code / d.pow(i) % d).collect();
            events.push(Event { clique: ci, outcomes });
        }
    }
    let mut weights = vec![0u64; events.len()];
    let first_event: Vec<usize> = {
        let mut start = 0;
        cliques
            .iter()
            .map(|c| {
                let s = start;
                start += d.pow(c.len() as u32);
                s
            })
            .collect()
    };
    for (u, v, c) in g.colored_edges() {
        let ci = cliques
            .iter()
            .position(|cl| cl.binary_search(&u).is_ok() && cl.binary_search(&v).is_ok())
            .expect("every edge lies in a maximal clique");
        let cl = &cliques[ci];
        let (iu, iv) = (cl.binary_search(&u).unwrap(), cl.binary_search(&v).unwrap());
        for e in first_event[ci]..first_event[ci] + d.pow(cl.len() as u32) {
            let o = &events[e].outcomes;
            if g.wins(c, o[iu], o[iv]) {
                weights[e] += 1;
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            let clash = cliques[events[i].clique].iter().zip(&events[i].outcomes).any(|(x, a)| {
                cliques[events[j].clique]
                    .iter()
                    .position(|y| y == x)
                    .map_or(false, |p| events[j].outcomes[p] != *a)
            });
            if clash {
                edges.push((i, j));
            }
        }
    }
    Ok(OrthogonalityGraph { cliques, events, edges, weights })
}

/// θ_w on the events of positive weight; events of weight zero cannot raise
/// the optimum, so they are left out.
/// Constraint budget for a single theta problem.
pub const MAX_THETA_CONSTRAINTS: usize = 6000;

pub fn theta_problem(og: &OrthogonalityGraph) -> Result<ThetaProgram> {
    let keep: Vec<usize> = (0..og.events.len()).filter(|&e| og.weights[e] > 0).collect();
    let mut index = vec![usize::MAX; og.events.len()];
    for (i, &e) in keep.iter().enumerate() {
        index[e] = i;
    }
    let edges: Vec<(usize, usize)> = og
        .edges
        .iter()
        .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
        .map(|&(a, b)| (index[a], index[b]))
        .collect();
    let w: Vec<f64> = keep.iter().map(|&e| og.weights[e] as f64).collect();
    let t = theta_program(keep.len(), &edges, &w)?;
    let m = t.problem.constraints.len();
    if m > MAX_THETA_CONSTRAINTS {
        return Err(Error::ResourceLimit(format!("{m} theta constraints exceed the limit {MAX_THETA_CONSTRAINTS}")));
    }
    Ok(t)
}

pub fn theta_upper_bound(g: &LabeledGameGraph) -> Result<BoundReport> {
    theta_upper_bound_with(g, &SdpOptions::default())
}

pub fn theta_upper_bound_with(g: &LabeledGameGraph, opts: &SdpOptions) -> Result<BoundReport> {
    let og = build_orthogonality_graph(g)?;
    let t = theta_problem(&og)?;
    let s = solve(&t.problem, opts)?;
    let mut r = BoundReport::from_solution(&s, t.problem.dim, t.problem.constraints.len());
    r.value = t.bound(&s);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::EdgeLabel;

    #[test]
    fn figure_eight_commutation_graph() {
        let g = LabeledGameGraph::from_edges(
            4,
            2,
            None,
            [
                (0, 1, EdgeLabel::Colored(0)),
                (1, 2, EdgeLabel::Colored(0)),
                (0, 2, EdgeLabel::Colored(1)),
                (0, 3, EdgeLabel::Colored(0)),
            ],
        )
        .unwrap();
        let og = build_orthogonality_graph(&g).unwrap();
        assert_eq!(og.cliques, vec![vec![0, 1, 2], vec![0, 3]]);
        assert_eq!(og.events.len(), 12);
        // Each edge spreads 2^(k−1) units of weight.
        assert_eq!(og.weights.iter().sum::<u64>(), 3 * 4 + 2);
    }

    #[test]
    fn single_edge_events() {
        let g = LabeledGameGraph::single_color(2, 2, &[(0, 1)], 1).unwrap();
        let og = build_orthogonality_graph(&g).unwrap();
        assert_eq!(og.events.len(), 4);
        // Distinct outcome pairs of one clique always clash somewhere.
        assert_eq!(og.edges.len(), 6);
        assert_eq!(og.weights.iter().filter(|&&w| w == 1).count(), 2);
        let t = theta_upper_bound(&g).unwrap();
        assert!((t.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cliques_include_isolated_vertices() {
        let adj = vec![0b10, 0b01, 0];
        assert_eq!(maximal_cliques(&adj), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn identity_labels_give_edge_count() {
        let e: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let g = LabeledGameGraph::single_color(5, 2, &e, 0).unwrap();
        assert!((theta_upper_bound(&g).unwrap().value - 5.0).abs() < 1e-5);
    }
}
