//! Canonical labeling of small vertex- and edge-colored graphs.
//!
//! Individualization-refinement: the ordered partition is refined to an
//! equitable one, a vertex of the first smallest non-singleton cell is
//! individualized, and so on down to discrete partitions (leaves). The
//! canonical leaf maximizes the sequence of refinement-trace hashes followed by
//! the adjacency certificate. Automorphisms found between equal leaves prune
//! sibling subtrees in the same orbit.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedGraph {
    n: usize,
    colors: Vec<u32>,
    /// `adj[t][v]`: neighbors of `v` along edges of type `t`.
    adj: Vec<Vec<u64>>,
}

impl TypedGraph {
    pub fn new(n: usize, edge_types: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::ResourceLimit(format!("{n} vertices exceed the labeling limit {MAX_VERTICES}")));
        }
        Ok(Self { n, colors: vec![0; n], adj: vec![vec![0; n]; edge_types.max(1)] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n, 1)?;
        for &(u, v) in edges {
            g.add_edge(u, v, 0);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set_color(&mut self, v: usize, c: u32) {
        self.colors[v] = c;
    }

    pub fn add_edge(&mut self, u: usize, v: usize, t: usize) {
        assert!(u != v && u < self.n && v < self.n);
        for layer in self.adj.iter_mut() {
            layer[u] &= !(1 << v);
            layer[v] &= !(1 << u);
        }
        self.adj[t][u] |= 1 << v;
        self.adj[t][v] |= 1 << u;
    }

    /// Edge type between `u` and `v`, if adjacent.
    pub fn edge_type(&self, u: usize, v: usize) -> Option<usize> {
        self.adj.iter().position(|layer| layer[u] >> v & 1 == 1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj.iter().map(|l| l[v].count_ones() as usize).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if let Some(t) = self.edge_type(u, v) {
                    out.push((u, v, t));
                }
            }
        }
        out
    }

    /// Vertex `order[p]` becomes vertex `p`.
    pub fn relabel(&self, order: &[usize]) -> TypedGraph {
        let mut g = TypedGraph { n: self.n, colors: vec![0; self.n], adj: vec![vec![0; self.n]; self.adj.len()] };
        let mut pos = vec![0; self.n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
            g.colors[p] = self.colors[v];
        }
        for (u, v, t) in self.edges() {
            g.add_edge(pos[u], pos[v], t);
        }
        g
    }

    /// Colors in label order, then one byte per pair `p < q` (0 = no edge).
    pub fn certificate(&self, order: &[usize]) -> Vec<u8> {
        let mut cert = Vec::with_capacity(4 * self.n + self.n * self.n / 2);
        for &v in order {
            cert.extend_from_slice(&self.colors[v].to_be_bytes());
        }
        for p in 0..self.n {
            for q in p + 1..self.n {
                cert.push(self.edge_type(order[p], order[q]).map_or(0, |t| t as u8 + 1));
            }
        }
        cert
    }

    fn initial_partition(&self) -> Vec<u64> {
        let mut cs: Vec<u32> = self.colors.clone();
        cs.sort_unstable();
        cs.dedup();
        cs.iter()
            .map(|&c| (0..self.n).filter(|&v| self.colors[v] == c).fold(0u64, |m, v| m | 1 << v))
            .collect()
    }

    /// Refine to the coarsest equitable partition finer than `cells`,
    /// returning a hash of the refinement trace.
    fn refine(&self, cells: &mut Vec<u64>) -> u64 {
        let mut h = DefaultHasher::new();
        cells.len().hash(&mut h);
        loop {
            let mut changed = false;
            let mut wi = 0;
            while wi < cells.len() {
                let w = cells[wi];
                let mut next = Vec::with_capacity(cells.len() + 4);
                for &x in cells.iter() {
                    if x.count_ones() == 1 {
                        next.push(x);
                        continue;
                    }
                    let mut keyed: Vec<(u64, usize)> = bits(x)
                        .map(|v| {
                            let key = self
                                .adj
                                .iter()
                                .enumerate()
                                .fold(0u64, |k, (t, l)| k | ((l[v] & w).count_ones() as u64) << (7 * t));
                            (key, v)
                        })
                        .collect();
                    keyed.sort_unstable();
                    if keyed.first().map(|f| f.0) == keyed.last().map(|l| l.0) {
                        next.push(x);
                        continue;
                    }
                    changed = true;
                    (wi, next.len()).hash(&mut h);
                    let mut i = 0;
                    while i < keyed.len() {
                        let key = keyed[i].0;
                        let mut piece = 0u64;
                        while i < keyed.len() && keyed[i].0 == key {
                            piece |= 1 << keyed[i].1;
                            i += 1;
                        }
                        (key, piece.count_ones()).hash(&mut h);
                        next.push(piece);
                    }
                }
                *cells = next;
                wi += 1;
            }
            if !changed {
                break;
            }
        }
        // Quotient degrees of the equitable partition.
        for &x in cells.iter() {
            let v = x.trailing_zeros() as usize;
            for &y in cells.iter() {
                for l in &self.adj {
                    (l[v] & y).count_ones().hash(&mut h);
                }
            }
        }
        h.finish()
    }
}

fn bits(mut x: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if x == 0 {
            None
        } else {
            let v = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(v)
        }
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// One canonical leaf, pruning by discovered automorphisms.
    Canonical,
    /// Every leaf with the canonical certificate.
    AllBest,
}

struct Search<'a> {
    g: &'a TypedGraph,
    mode: Mode,
    best_invs: Vec<u64>,
    best_cert: Vec<u8>,
    best_leaves: Vec<Vec<usize>>,
    first: Option<(Vec<usize>, Vec<u8>)>,
    autos: Vec<Vec<usize>>,
    nodes: usize,
    node_budget: usize,
    leaf_budget: usize,
}

fn cmp_prefix(a: &[u64], b: &[u64]) -> std::cmp::Ordering {
    for (i, x) in a.iter().enumerate() {
        match b.get(i) {
            None => return std::cmp::Ordering::Greater,
            Some(y) if x != y => return x.cmp(y),
            _ => {}
        }
    }
    std::cmp::Ordering::Equal
}

impl Search<'_> {
    fn visit(&mut self, mut cells: Vec<u64>, path: &mut Vec<usize>, invs: &mut Vec<u64>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(Error::ResourceLimit(format!("canonical labeling exceeded {} search nodes", self.node_budget)));
        }
        let h = self.g.refine(&mut cells);
        invs.push(h);
        let result = self.visit_refined(cells, path, invs);
        invs.pop();
        result
    }

    fn visit_refined(&mut self, cells: Vec<u64>, path: &mut Vec<usize>, invs: &mut Vec<u64>) -> Result<()> {
        use std::cmp::Ordering::*;
        let have_best = !self.best_leaves.is_empty();
        if have_best && cmp_prefix(invs, &self.best_invs) == Less {
            return Ok(());
        }
        if cells.len() == self.g.n {
            let order: Vec<usize> = cells.iter().map(|c| c.trailing_zeros() as usize).collect();
            let cert = self.g.certificate(&order);
            let ord = if have_best {
                invs.as_slice().cmp(self.best_invs.as_slice()).then_with(|| cert.cmp(&self.best_cert))
            } else {
                Greater
            };
            match ord {
                Greater => {
                    self.best_invs = invs.clone();
                    self.best_cert = cert.clone();
                    self.best_leaves = vec![order.clone()];
                }
                Equal => {
                    self.autos.push(automorphism(&self.best_leaves[0], &order));
                    self.best_leaves.push(order.clone());
                    if self.best_leaves.len() > self.leaf_budget {
                        return Err(Error::ResourceLimit(format!(
                            "more than {} automorphisms",
                            self.leaf_budget
                        )));
                    }
                }
                Less => {}
            }
            match &self.first {
                None => self.first = Some((order, cert)),
                Some((f, fc)) => {
                    if ord != Equal && *fc == cert {
                        self.autos.push(automorphism(f, &order));
                    }
                }
            }
            return Ok(());
        }
        let (ti, target) = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.count_ones() > 1)
            .min_by_key(|(i, c)| (c.count_ones(), *i))
            .map(|(i, c)| (i, *c))
            .expect("non-discrete partition has a non-singleton cell");
        let mut explored: Vec<usize> = Vec::new();
        for v in bits(target) {
            if self.mode == Mode::Canonical && !explored.is_empty() && self.in_explored_orbit(v, &explored, path) {
                continue;
            }
            let mut child = Vec::with_capacity(cells.len() + 1);
            child.extend_from_slice(&cells[..ti]);
            child.push(1 << v);
            child.push(target & !(1 << v));
            child.extend_from_slice(&cells[ti + 1..]);
            path.push(v);
            let r = self.visit(child, path, invs);
            path.pop();
            r?;
            explored.push(v);
        }
        Ok(())
    }

    fn in_explored_orbit(&self, v: usize, explored: &[usize], path: &[usize]) -> bool {
        let n = self.g.n;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut any = false;
        for a in &self.autos {
            if path.iter().any(|&p| a[p] != p) {
                continue;
            }
            any = true;
            for x in 0..n {
                let (r1, r2) = (find(&mut parent, x), find(&mut parent, a[x]));
                if r1 != r2 {
                    parent[r1] = r2;
                }
            }
        }
        if !any {
            return false;
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&w| find(&mut parent, w) == rv)
    }
}

/// The map sending `from[p]` to `to[p]`.
fn automorphism(from: &[usize], to: &[usize]) -> Vec<usize> {
    let mut a = vec![0; from.len()];
    for (p, &v) in from.iter().enumerate() {
        a[v] = to[p];
    }
    a
}

#[derive(Clone, Debug)]
pub struct Canonical {
    /// `order[p]` is the vertex placed at canonical position `p`.
    pub order: Vec<usize>,
    pub certificate: Vec<u8>,
    /// Automorphisms discovered during the search (not necessarily the whole group).
    pub automorphisms: Vec<Vec<usize>>,
}

const DEFAULT_NODE_BUDGET: usize = 5_000_000;

pub fn canonical_labeling(g: &TypedGraph) -> Result<Canonical> {
    let mut s = Search {
        g,
        mode: Mode::Canonical,
        best_invs: Vec::new(),
        best_cert: Vec::new(),
        best_leaves: Vec::new(),
        first: None,
        autos: Vec::new(),
        nodes: 0,
        node_budget: DEFAULT_NODE_BUDGET,
        leaf_budget: usize::MAX,
    };
    if g.n == 0 {
        return Ok(Canonical { order: Vec::new(), certificate: g.certificate(&[]), automorphisms: Vec::new() });
    }
    s.visit(g.initial_partition(), &mut Vec::new(), &mut Vec::new())?;
    Ok(Canonical { order: s.best_leaves.swap_remove(0), certificate: s.best_cert, automorphisms: s.autos })
}

/// The canonical certificate together with every labeling that attains it,
/// i.e. all isomorphisms onto the canonical graph. Fails with a resource
/// limit when more than `max_labelings` exist.
pub fn all_canonical_labelings(g: &TypedGraph, max_labelings: usize) -> Result<(Vec<u8>, Vec<Vec<usize>>)> {
    if g.n == 0 {
        return Ok((g.certificate(&[]), vec![Vec::new()]));
    }
    let mut s = Search {
        g,
        mode: Mode::AllBest,
        best_invs: Vec::new(),
        best_cert: Vec::new(),
        best_leaves: Vec::new(),
        first: None,
        autos: Vec::new(),
        nodes: 0,
        node_budget: max_labelings.saturating_mul(g.n.max(1) * 8).max(DEFAULT_NODE_BUDGET),
        leaf_budget: max_labelings,
    };
    s.visit(g.initial_partition(), &mut Vec::new(), &mut Vec::new())?;
    Ok((s.best_cert, s.best_leaves))
}

pub fn isomorphic(a: &TypedGraph, b: &TypedGraph) -> Result<bool> {
    if a.n != b.n || a.adj.len() != b.adj.len() {
        return Ok(false);
    }
    Ok(canonical_labeling(a)?.certificate == canonical_labeling(b)?.certificate)
}
