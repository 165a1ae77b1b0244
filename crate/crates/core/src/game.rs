//! Labeled game graphs `(G, K)` and the value-independent parts of XOR-d games.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum EdgeLabel {
    /// Index `i` of the winning permutation π_i ∈ L_d.
    Colored(usize),
    /// Commuting pair without a winning constraint.
    Gray,
}

impl EdgeLabel {
    pub fn color(self) -> Option<usize> {
        match self {
            EdgeLabel::Colored(c) => Some(c),
            EdgeLabel::Gray => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: EdgeLabel,
}

/// A simple graph on `0..n` with colored or gray edges, optionally split into
/// two parties. Edges are kept sorted with `u < v`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LabeledGameGraph {
    n: usize,
    d: usize,
    edges: Vec<Edge>,
    /// `Some(side)` for a two-party game; `side[v]` is true for Bob.
    sides: Option<Vec<bool>>,
}

impl LabeledGameGraph {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        Ok(Self { n, d, edges: Vec::new(), sides: None })
    }

    /// Two-party game with Alice on `0..k` and Bob on `k..n`.
    pub fn new_bipartite(n: usize, d: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!("bipartition {k} exceeds vertex count {n}")));
        }
        let mut g = Self::new(n, d)?;
        g.sides = Some((0..n).map(|v| v >= k).collect());
        Ok(g)
    }

    pub fn with_sides(n: usize, d: usize, sides: Option<Vec<bool>>) -> Result<Self> {
        if let Some(s) = &sides {
            if s.len() != n {
                return Err(Error::InvalidArgument("side vector length differs from n".into()));
            }
        }
        let mut g = Self::new(n, d)?;
        g.sides = sides;
        Ok(g)
    }

    pub fn from_edges(
        n: usize,
        d: usize,
        bipartite: Option<usize>,
        edges: impl IntoIterator<Item = (usize, usize, EdgeLabel)>,
    ) -> Result<Self> {
        let mut g = match bipartite {
            Some(k) => Self::new_bipartite(n, d, k)?,
            None => Self::new(n, d)?,
        };
        for (u, v, l) in edges {
            g.add_edge(u, v, l)?;
        }
        Ok(g)
    }

    /// Every edge gets the same color.
    pub fn single_color(n: usize, d: usize, edges: &[(usize, usize)], color: usize) -> Result<Self> {
        Self::from_edges(n, d, None, edges.iter().map(|&(u, v)| (u, v, EdgeLabel::Colored(color))))
    }

    pub fn add_edge(&mut self, u: usize, v: usize, label: EdgeLabel) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidGame(format!("edge ({u},{v}) out of range for n = {}", self.n)));
        }
        if u == v {
            return Err(Error::InvalidGame(format!("loop at vertex {u}")));
        }
        if let EdgeLabel::Colored(c) = label {
            if c >= self.d {
                return Err(Error::InvalidGame(format!("color {c} out of range for d = {}", self.d)));
            }
        }
        if let Some(s) = &self.sides {
            if s[u] == s[v] {
                return Err(Error::InvalidGame(format!("edge ({u},{v}) does not cross the bipartition")));
            }
        }
        let (u, v) = (u.min(v), u.max(v));
        match self.edges.binary_search_by(|e| (e.u, e.v).cmp(&(u, v))) {
            Ok(_) => Err(Error::InvalidGame(format!("duplicate edge ({u},{v})"))),
            Err(pos) => {
                self.edges.insert(pos, Edge { u, v, label });
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sides(&self) -> Option<&[bool]> {
        self.sides.as_deref()
    }

    pub fn is_bipartite_game(&self) -> bool {
        self.sides.is_some()
    }

    /// `Some(k)` if Alice is exactly `0..k`.
    pub fn contiguous_split(&self) -> Option<usize> {
        let s = self.sides.as_ref()?;
        let k = s.iter().take_while(|b| !**b).count();
        s[k..].iter().all(|b| *b).then_some(k)
    }

    pub fn label(&self, u: usize, v: usize) -> Option<EdgeLabel> {
        let (u, v) = (u.min(v), u.max(v));
        self.edges.binary_search_by(|e| (e.u, e.v).cmp(&(u, v))).ok().map(|i| self.edges[i].label)
    }

    pub fn colored_edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges.iter().filter_map(|e| e.label.color().map(|c| (e.u, e.v, c)))
    }

    pub fn colored_edge_count(&self) -> usize {
        self.colored_edges().count()
    }

    pub fn gray_edge_count(&self) -> usize {
        self.edges.len() - self.colored_edge_count()
    }

    /// The winning permutation π_c ∈ L_d.
    pub fn perm(&self, color: usize) -> Permutation {
        Permutation::reflection(self.d, color)
    }

    /// Whether outcomes `a` at `u` and `b` at `v` win on a colored edge of color `c`.
    pub fn wins(&self, c: usize, a: usize, b: usize) -> bool {
        (a + b) % self.d == c
    }

    /// Replace every label, keeping the vertex set and sides.
    pub fn relabeled(&self, labels: &[EdgeLabel]) -> Result<Self> {
        if labels.len() != self.edges.len() {
            return Err(Error::InvalidArgument("label count differs from edge count".into()));
        }
        let mut g = Self { n: self.n, d: self.d, edges: Vec::with_capacity(labels.len()), sides: self.sides.clone() };
        for (e, &l) in self.edges.iter().zip(labels) {
            g.add_edge(e.u, e.v, l)?;
        }
        Ok(g)
    }

    /// The game restricted to colored edges.
    pub fn colored_part(&self) -> Self {
        Self {
            n: self.n,
            d: self.d,
            edges: self.edges.iter().copied().filter(|e| e.label != EdgeLabel::Gray).collect(),
            sides: self.sides.clone(),
        }
    }

    /// Vertex `v` becomes `perm[v]`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n || !is_permutation(perm) {
            return Err(Error::InvalidArgument("not a vertex permutation".into()));
        }
        let sides = self.sides.as_ref().map(|s| {
            let mut t = vec![false; self.n];
            for v in 0..self.n {
                t[perm[v]] = s[v];
            }
            t
        });
        let mut g = Self { n: self.n, d: self.d, edges: Vec::with_capacity(self.edges.len()), sides };
        for e in &self.edges {
            g.add_edge(perm[e.u], perm[e.v], e.label)?;
        }
        Ok(g)
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    /// Neighbors along colored edges, with the edge color.
    pub fn colored_neighbors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v, c) in self.colored_edges() {
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        adj
    }

    /// Connectivity of the graph formed by the colored edges.
    pub fn colored_is_connected(&self) -> bool {
        components(self.n, self.colored_edges().map(|(u, v, _)| (u, v))).iter().all(|&c| c == 0)
    }

    pub fn is_connected(&self) -> bool {
        components(self.n, self.edges.iter().map(|e| (e.u, e.v))).iter().all(|&c| c == 0)
    }

    pub(crate) fn require_colored(&self) -> Result<usize> {
        match self.colored_edge_count() {
            0 => Err(Error::InvalidGame("game has no colored edges".into())),
            m => Ok(m),
        }
    }
}

pub(crate) fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

/// Component index of every vertex; components are numbered by smallest vertex.
pub(crate) fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    let mut index = vec![usize::MAX; n];
    let mut next = 0;
    roots
        .iter()
        .map(|&r| {
            if index[r] == usize::MAX {
                index[r] = next;
                next += 1;
            }
            index[r]
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Assignment {
    pub values: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EdgeTally {
    pub satisfied: usize,
    pub contradictions: usize,
}

pub fn evaluate_assignment(g: &LabeledGameGraph, a: &Assignment) -> Result<EdgeTally> {
    if a.values.len() != g.n {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} values for {} vertices",
            a.values.len(),
            g.n
        )));
    }
    if let Some(x) = a.values.iter().find(|&&x| x >= g.d) {
        return Err(Error::InvalidArgument(format!("value {x} out of range for d = {}", g.d)));
    }
    let mut t = EdgeTally { satisfied: 0, contradictions: 0 };
    for (u, v, c) in g.colored_edges() {
        if g.perm(c).apply(a.values[u]) == a.values[v] {
            t.satisfied += 1;
        } else {
            t.contradictions += 1;
        }
    }
    Ok(t)
}

/// The maximally correlated no-signaling box.
#[derive(Clone, Debug)]
pub struct SuperQuantumBox {
    pub d: usize,
    /// `(u, v, table)` per colored edge, `table[a][b] = P(a, b | u, v)`.
    pub tables: Vec<(usize, usize, Vec<Vec<Ratio<u64>>>)>,
    pub gamma_sq: Ratio<u64>,
}

impl SuperQuantumBox {
    /// Each table is a distribution and the marginal at every vertex is the
    /// same in every edge context.
    pub fn is_consistent(&self, n: usize) -> bool {
        let one = Ratio::from_integer(1u64);
        let mut marginal: Vec<Option<Vec<Ratio<u64>>>> = vec![None; n];
        for (u, v, t) in &self.tables {
            let total: Ratio<u64> = t.iter().flatten().copied().sum();
            if total != one {
                return false;
            }
            let mu: Vec<Ratio<u64>> = (0..self.d).map(|a| t[a].iter().copied().sum()).collect();
            let mv: Vec<Ratio<u64>> = (0..self.d).map(|b| t.iter().map(|row| row[b]).sum()).collect();
            for (x, m) in [(*u, mu), (*v, mv)] {
                match &marginal[x] {
                    Some(prev) if *prev != m => return false,
                    Some(_) => {}
                    None => marginal[x] = Some(m),
                }
            }
        }
        true
    }

    pub fn marginal(&self, x: usize) -> Option<Vec<Ratio<u64>>> {
        self.tables.iter().find_map(|(u, v, t)| {
            if *u == x {
                Some((0..self.d).map(|a| t[a].iter().copied().sum()).collect())
            } else if *v == x {
                Some((0..self.d).map(|b| t.iter().map(|row| row[b]).sum()).collect())
            } else {
                None
            }
        })
    }
}

pub fn super_quantum_value(g: &LabeledGameGraph) -> Result<SuperQuantumBox> {
    g.require_colored()?;
    let d = g.d;
    let p = Ratio::new(1u64, d as u64);
    let mut tables = Vec::new();
    let mut gamma = Ratio::from_integer(0u64);
    for (u, v, c) in g.colored_edges() {
        let pi = g.perm(c);
        let mut t = vec![vec![Ratio::from_integer(0u64); d]; d];
        for (a, row) in t.iter_mut().enumerate() {
            row[pi.apply(a)] = p;
        }
        gamma += (0..d).map(|a| t[a][pi.apply(a)]).sum::<Ratio<u64>>();
        tables.push((u, v, t));
    }
    Ok(SuperQuantumBox { d, tables, gamma_sq: gamma })
}
