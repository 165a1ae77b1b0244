//! Exact classical values, cycle classification and edge bipartization.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{Assignment, LabeledGameGraph};
use crate::perm::Permutation;

/// Largest number of assignments `d^n` searched by default.
pub const ASSIGNMENT_BUDGET: f64 = (1u64 << 26) as f64;
pub const CYCLE_BUDGET: usize = 100_000;
pub const MAX_BIPARTIZATION_VERTICES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalReport {
    /// Minimum number of violated colored edges.
    pub beta_c: usize,
    pub gamma_c: usize,
    pub colored_edges: usize,
    pub omega_c: Ratio<u64>,
    /// Lexicographically first assignment attaining `beta_c`.
    pub witness: Assignment,
}

pub fn classical_value(g: &LabeledGameGraph) -> Result<ClassicalReport> {
    classical_value_within(g, ASSIGNMENT_BUDGET)
}

struct Order {
    /// Vertices touching a colored edge, in increasing order.
    active: Vec<usize>,
    /// For the k-th active vertex: `(earlier active index, color)` of its colored edges back.
    back: Vec<Vec<(usize, usize)>>,
}

fn search_order(g: &LabeledGameGraph) -> Order {
    let mut index = vec![usize::MAX; g.n()];
    let mut active = Vec::new();
    for (u, v, _) in g.colored_edges() {
        for x in [u, v] {
            if index[x] == usize::MAX {
                index[x] = 0;
            }
        }
    }
    for v in 0..g.n() {
        if index[v] != usize::MAX {
            index[v] = active.len();
            active.push(v);
        }
    }
    let mut back = vec![Vec::new(); active.len()];
    for (u, v, c) in g.colored_edges() {
        let (a, b) = (index[u].min(index[v]), index[u].max(index[v]));
        back[b].push((a, c));
    }
    Order { active, back }
}

fn dfs(d: usize, ord: &Order, vals: &mut Vec<usize>, partial: usize, best: &AtomicUsize) {
    let k = vals.len();
    if k == ord.active.len() {
        best.fetch_min(partial, Ordering::Relaxed);
        return;
    }
    for x in 0..d {
        let add = ord.back[k].iter().filter(|&&(a, c)| (vals[a] + x) % d != c).count();
        if partial + add >= best.load(Ordering::Relaxed) {
            continue;
        }
        vals.push(x);
        dfs(d, ord, vals, partial + add, best);
        vals.pop();
    }
}

/// First assignment in lexicographic order with at most `bound` contradictions.
fn first_within(d: usize, ord: &Order, vals: &mut Vec<usize>, partial: usize, bound: usize) -> bool {
    let k = vals.len();
    if k == ord.active.len() {
        return true;
    }
    for x in 0..d {
        let add = ord.back[k].iter().filter(|&&(a, c)| (vals[a] + x) % d != c).count();
        if partial + add > bound {
            continue;
        }
        vals.push(x);
        if first_within(d, ord, vals, partial + add, bound) {
            return true;
        }
        vals.pop();
    }
    false
}

/// Exhaustive minimum over all assignments of vertices touching colored
/// edges; fails if `d^active` exceeds `budget`.
pub fn classical_value_within(g: &LabeledGameGraph, budget: f64) -> Result<ClassicalReport> {
    let m = g.require_colored()?;
    let d = g.d();
    let ord = search_order(g);
    let size = (d as f64).powi(ord.active.len() as i32);
    if size > budget {
        return Err(Error::ResourceLimit(format!(
            "{d}^{} assignments exceed the budget of {budget:e}",
            ord.active.len()
        )));
    }
    let best = AtomicUsize::new(m + 1);
    // The first active vertex's value splits the work.
    (0..d).into_par_iter().for_each(|x| {
        let mut vals = vec![x];
        dfs(d, &ord, &mut vals, 0, &best);
    });
    let beta = best.load(Ordering::Relaxed);
    let mut vals = Vec::with_capacity(ord.active.len());
    let found = first_within(d, &ord, &mut vals, 0, beta);
    debug_assert!(found);
    let mut witness = vec![0; g.n()];
    for (k, &v) in ord.active.iter().enumerate() {
        witness[v] = vals[k];
    }
    Ok(ClassicalReport {
        beta_c: beta,
        gamma_c: m - beta,
        colored_edges: m,
        omega_c: Ratio::new((m - beta) as u64, m as u64),
        witness: Assignment { values: witness },
    })
}

/// π_C composed around a closed walk, and its fixed-point count. The walk is
/// rotated to start at its smallest vertex and traversed in the given
/// direction; the permutation maps a value at that vertex to the value forced
/// back onto it after one turn.
pub fn cycle_perm(g: &LabeledGameGraph, cycle: &[usize]) -> Result<(Permutation, usize)> {
    let l = cycle.len();
    if l < 3 {
        return Err(Error::InvalidArgument("a cycle needs at least three vertices".into()));
    }
    let mut seen = vec![false; g.n()];
    for &v in cycle {
        if v >= g.n() || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidArgument(format!("{cycle:?} is not a simple cycle of the graph")));
        }
    }
    let start = (0..l).min_by_key(|&i| cycle[i]).expect("nonempty");
    let mut p = Permutation::identity(g.d());
    for step in 0..l {
        let (a, b) = (cycle[(start + step) % l], cycle[(start + step + 1) % l]);
        let c = g
            .label(a, b)
            .and_then(|lab| lab.color())
            .ok_or_else(|| Error::InvalidArgument(format!("({a},{b}) is not a colored edge")))?;
        p = g.perm(c).compose(&p);
    }
    let fp = p.fixed_points();
    Ok((p, fp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleKind {
    Good,
    Bad,
    Ugly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleInfo {
    /// Starts at the smallest vertex; `vertices[1] < vertices[last]`.
    pub vertices: Vec<usize>,
    pub perm: Permutation,
    pub fixed_points: usize,
}

impl CycleInfo {
    pub fn kind(&self) -> CycleKind {
        if self.fixed_points == self.perm.d() {
            CycleKind::Good
        } else if self.fixed_points == 0 {
            CycleKind::Bad
        } else {
            CycleKind::Ugly
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleReport {
    pub cycles: Vec<CycleInfo>,
    pub xi_good: usize,
    pub xi_bad: usize,
    pub xi_ugly: usize,
}

/// Every simple cycle of the colored subgraph, each once.
pub fn simple_cycles(g: &LabeledGameGraph, budget: usize) -> Result<Vec<Vec<usize>>> {
    let adj: Vec<Vec<usize>> = g
        .colored_neighbors()
        .into_iter()
        .map(|mut a| {
            a.sort_unstable();
            a.into_iter().map(|(v, _)| v).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut on_path = vec![false; g.n()];
    for s in 0..g.n() {
        let mut path = vec![s];
        on_path[s] = true;
        extend_cycles(&adj, s, &mut path, &mut on_path, &mut out, budget)?;
        on_path[s] = false;
    }
    Ok(out)
}

fn extend_cycles(
    adj: &[Vec<usize>],
    s: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    budget: usize,
) -> Result<()> {
    let x = *path.last().expect("path starts at s");
    for &y in &adj[x] {
        if y == s {
            if path.len() >= 3 && path[1] < x {
                if out.len() >= budget {
                    return Err(Error::ResourceLimit(format!("more than {budget} simple cycles")));
                }
                out.push(path.clone());
            }
        } else if y > s && !on_path[y] {
            on_path[y] = true;
            path.push(y);
            extend_cycles(adj, s, path, on_path, out, budget)?;
            path.pop();
            on_path[y] = false;
        }
    }
    Ok(())
}

pub fn classify_cycles(g: &LabeledGameGraph) -> Result<CycleReport> {
    classify_cycles_within(g, CYCLE_BUDGET)
}

pub fn classify_cycles_within(g: &LabeledGameGraph, budget: usize) -> Result<CycleReport> {
    let mut report = CycleReport { cycles: Vec::new(), xi_good: 0, xi_bad: 0, xi_ugly: 0 };
    for vertices in simple_cycles(g, budget)? {
        let (perm, fixed_points) = cycle_perm(g, &vertices)?;
        let info = CycleInfo { vertices, perm, fixed_points };
        match info.kind() {
            CycleKind::Good => report.xi_good += 1,
            CycleKind::Bad => report.xi_bad += 1,
            CycleKind::Ugly => report.xi_ugly += 1,
        }
        // Even cycles over L_d compose to a translation.
        debug_assert!(info.vertices.len() % 2 == 1 || info.kind() != CycleKind::Ugly);
        report.cycles.push(info);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContradictionBounds {
    pub lower: usize,
    pub upper: usize,
}

impl ContradictionBounds {
    pub fn from_report(r: &CycleReport) -> Self {
        if r.xi_ugly == 0 {
            Self { lower: r.xi_bad, upper: r.xi_bad }
        } else {
            Self { lower: r.xi_bad, upper: r.xi_bad + r.xi_ugly - 1 }
        }
    }

    pub fn contains(&self, beta: usize) -> bool {
        self.lower <= beta && beta <= self.upper
    }
}

/// The cycle-count bounds on β_C: `(ξ_b, ξ_b)` without ugly cycles, otherwise
/// `(ξ_b, ξ_b + ξ_u − 1)`. These are reported as stated; they are not
/// guaranteed to bracket β_C (see the crate tests for counterexamples to the
/// lower bound).
pub fn contradiction_bounds(g: &LabeledGameGraph) -> Result<ContradictionBounds> {
    Ok(ContradictionBounds::from_report(&classify_cycles(g)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartization {
    /// `|E| − maxcut` of the colored subgraph.
    pub beta2: usize,
    /// Edges inside a side of the best split.
    pub removed: Vec<(usize, usize)>,
    /// `side[v]` of the best split.
    pub side: Vec<bool>,
}

/// Exact edge bipartization number of the colored subgraph, by enumerating
/// all 2^(n−1) splits in Gray-code order. Labels are ignored: for the dashed
/// color with d = 2 this equals β_C, for other single-color games it is an
/// upper bound.
pub fn edge_bipartization(g: &LabeledGameGraph) -> Result<Bipartization> {
    let n = g.n();
    if n > MAX_BIPARTIZATION_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "{n} vertices exceed the bipartization limit {MAX_BIPARTIZATION_VERTICES}"
        )));
    }
    let edges: Vec<(usize, usize)> = g.colored_edges().map(|(u, v, _)| (u, v)).collect();
    let mut adj = vec![0u32; n];
    for &(u, v) in &edges {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    // Vertex n−1 stays on side 0; flipping vertex i changes the cut by
    // (same-side neighbours) − (other-side neighbours).
    let mut mask = 0u32;
    let mut cut: i64 = 0;
    let mut best_cut = 0i64;
    let mut best_mask = 0u32;
    let free = n.saturating_sub(1);
    for step in 1u64..(1u64 << free) {
        let i = step.trailing_zeros() as usize;
        let same = (!(mask ^ if mask >> i & 1 == 1 { u32::MAX } else { 0 }) & adj[i]).count_ones() as i64;
        let other = (adj[i].count_ones() as i64) - same;
        cut += same - other;
        mask ^= 1 << i;
        if cut > best_cut {
            best_cut = cut;
            best_mask = mask;
        }
    }
    let side: Vec<bool> = (0..n).map(|v| best_mask >> v & 1 == 1).collect();
    let removed: Vec<(usize, usize)> = edges.iter().copied().filter(|&(u, v)| side[u] == side[v]).collect();
    Ok(Bipartization { beta2: removed.len(), removed, side })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::EdgeLabel;

    fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    fn complete_edges(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
    }

    fn bad_triangle() -> LabeledGameGraph {
        LabeledGameGraph::from_edges(
            3,
            2,
            None,
            [(0, 1, EdgeLabel::Colored(0)), (1, 2, EdgeLabel::Colored(0)), (0, 2, EdgeLabel::Colored(1))],
        )
        .unwrap()
    }

    #[test]
    fn c5_and_k5_dashed() {
        let c5 = LabeledGameGraph::single_color(5, 2, &cycle_edges(5), 1).unwrap();
        let r = classical_value(&c5).unwrap();
        assert_eq!((r.beta_c, r.gamma_c), (1, 4));
        assert_eq!(r.omega_c, Ratio::new(4, 5));
        let k5 = LabeledGameGraph::single_color(5, 2, &complete_edges(5), 1).unwrap();
        let r = classical_value(&k5).unwrap();
        assert_eq!((r.beta_c, r.gamma_c), (4, 6));
        assert_eq!(edge_bipartization(&c5).unwrap().beta2, 1);
        assert_eq!(edge_bipartization(&k5).unwrap().beta2, 4);
    }

    #[test]
    fn witness_attains_beta() {
        let k5 = LabeledGameGraph::single_color(5, 2, &complete_edges(5), 1).unwrap();
        let r = classical_value(&k5).unwrap();
        let t = crate::game::evaluate_assignment(&k5, &r.witness).unwrap();
        assert_eq!(t.contradictions, r.beta_c);
        assert_eq!(r.witness.values, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn gray_edges_and_isolated_vertices_are_ignored() {
        let g = LabeledGameGraph::from_edges(
            6,
            3,
            None,
            [(0, 1, EdgeLabel::Colored(1)), (1, 2, EdgeLabel::Gray), (0, 2, EdgeLabel::Colored(2))],
        )
        .unwrap();
        let r = classical_value(&g).unwrap();
        assert_eq!(r.beta_c, 0);
        assert!(classical_value_within(&g, 8.0).is_err());
        assert!(classical_value_within(&g, 27.0).is_ok());
    }

    #[test]
    fn cycle_perm_examples() {
        let id = LabeledGameGraph::single_color(4, 3, &cycle_edges(4), 0).unwrap();
        let (_, fp) = cycle_perm(&id, &[0, 1, 2, 3]).unwrap();
        assert_eq!(fp, 3);
        let (p, fp) = cycle_perm(&bad_triangle(), &[0, 1, 2]).unwrap();
        assert_eq!((p.map(), fp), (&[1usize, 0][..], 0));
        let c5 = LabeledGameGraph::single_color(5, 3, &cycle_edges(5), 2).unwrap();
        let (p, fp) = cycle_perm(&c5, &[2, 3, 4, 0, 1]).unwrap();
        assert_eq!((p, fp), (Permutation::reflection(3, 2), 1));
        assert!(cycle_perm(&c5, &[0, 1, 3]).is_err());
        assert!(cycle_perm(&c5, &[0, 1]).is_err());
    }

    #[test]
    fn cycle_counts() {
        let k4 = LabeledGameGraph::single_color(4, 2, &complete_edges(4), 1).unwrap();
        assert_eq!(simple_cycles(&k4, 100).unwrap().len(), 7);
        let k5 = LabeledGameGraph::single_color(5, 2, &complete_edges(5), 1).unwrap();
        assert_eq!(simple_cycles(&k5, 100).unwrap().len(), 37);
        assert!(simple_cycles(&k5, 10).is_err());
        let tree = LabeledGameGraph::single_color(4, 3, &[(0, 1), (1, 2), (1, 3)], 1).unwrap();
        let r = classify_cycles(&tree).unwrap();
        assert_eq!((r.xi_good, r.xi_bad, r.xi_ugly), (0, 0, 0));
        assert_eq!(classical_value(&tree).unwrap().beta_c, 0);
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(contradiction_bounds(&bad_triangle()).unwrap(), ContradictionBounds { lower: 1, upper: 1 });
        let c5 = LabeledGameGraph::single_color(5, 3, &cycle_edges(5), 0).unwrap();
        let r = classify_cycles(&c5).unwrap();
        assert_eq!((r.xi_bad, r.xi_ugly), (0, 1));
        assert_eq!(contradiction_bounds(&c5).unwrap(), ContradictionBounds { lower: 0, upper: 0 });
        assert_eq!(classical_value(&c5).unwrap().beta_c, 0);
    }

    #[test]
    fn dashed_k4_breaks_the_lower_bound() {
        // Four bad triangles, three good 4-cycles, yet two edges suffice.
        let k4 = LabeledGameGraph::single_color(4, 2, &complete_edges(4), 1).unwrap();
        let r = classify_cycles(&k4).unwrap();
        assert_eq!((r.xi_good, r.xi_bad, r.xi_ugly), (3, 4, 0));
        assert_eq!(classical_value(&k4).unwrap().beta_c, 2);
        assert!(!ContradictionBounds::from_report(&r).contains(2));
    }

    #[test]
    fn bipartization_upper_bounds_single_color_ld() {
        let c5 = LabeledGameGraph::single_color(5, 3, &cycle_edges(5), 1).unwrap();
        assert_eq!(edge_bipartization(&c5).unwrap().beta2, 1);
        assert_eq!(classical_value(&c5).unwrap().beta_c, 0);
        let k33: Vec<_> = (0..3).flat_map(|u| (3..6).map(move |v| (u, v))).collect();
        let b = LabeledGameGraph::single_color(6, 2, &k33, 1).unwrap();
        let r = edge_bipartization(&b).unwrap();
        assert_eq!((r.beta2, r.removed.len()), (0, 0));
    }
}
