//! Switching, the permutation cover KG, and canonical forms of switching classes.
//!
//! Switching vertex `v` by σ renames the outcomes at `v`: an outcome `a` becomes
//! `σ(a)`. A colored edge `{u, v}` with constraint `b_v = π(a_u)` then reads
//! `b_v = σ∘π(a_u)` from `u`'s side. With σ_k(x) = x + k and π_i ∈ L_d this
//! sends color `i` to `i + k`, so a game stays in the XOR-d class exactly when
//! σ is a translation.
//!
//! Canonical forms cover the group generated by vertex permutations,
//! translations at single vertices and, on every connected component of the
//! colored graph, renaming all outcomes by `x ↦ ux` for a unit `u` mod d. The
//! last move is a switching by a non-translation at every vertex of the
//! component at once; it maps L_d to itself and is needed for canonical
//! equality to coincide with KG isomorphism when d ≥ 3.

use std::fmt;

use crate::canon::{all_canonical_labelings, isomorphic, TypedGraph};
use crate::error::{Error, Result};
use crate::game::{components, EdgeLabel, LabeledGameGraph};
use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchOp {
    pub vertex: usize,
    pub sigma: Permutation,
}

impl SwitchOp {
    pub fn translation(vertex: usize, d: usize, k: usize) -> Self {
        Self { vertex, sigma: Permutation::translation(d, k % d) }
    }
}

pub fn switch(g: &LabeledGameGraph, op: &SwitchOp) -> Result<LabeledGameGraph> {
    if op.vertex >= g.n() {
        return Err(Error::InvalidArgument(format!("vertex {} out of range for n = {}", op.vertex, g.n())));
    }
    if op.sigma.d() != g.d() {
        return Err(Error::InvalidArgument(format!("σ acts on {} outcomes, game has {}", op.sigma.d(), g.d())));
    }
    let labels = g
        .edges()
        .iter()
        .map(|e| match e.label {
            EdgeLabel::Colored(c) if e.u == op.vertex || e.v == op.vertex => op
                .sigma
                .compose(&g.perm(c))
                .ld_index()
                .map(EdgeLabel::Colored)
                .ok_or_else(|| Error::Unsupported(format!("switching by {} leaves the XOR-{} class", op.sigma, g.d()))),
            l => Ok(l),
        })
        .collect::<Result<Vec<_>>>()?;
    g.relabeled(&labels)
}

/// Rename outcomes by `x ↦ ux` at every vertex: color `c` becomes `uc`.
pub fn scale_outcomes(g: &LabeledGameGraph, u: usize) -> Result<LabeledGameGraph> {
    let d = g.d();
    if gcd(u % d, d) != 1 {
        return Err(Error::InvalidArgument(format!("{u} is not a unit mod {d}")));
    }
    let labels: Vec<EdgeLabel> = g
        .edges()
        .iter()
        .map(|e| match e.label {
            EdgeLabel::Colored(c) => EdgeLabel::Colored(c * u % d),
            l => l,
        })
        .collect();
    g.relabeled(&labels)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn units(d: usize) -> Vec<usize> {
    (1..d.max(2)).filter(|&u| gcd(u, d) == 1).collect()
}

/// The d-fold permutation cover: vertex `(i, s)` has index `i·d + s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KgGraph {
    pub base_n: usize,
    pub d: usize,
    /// Edges `((i, s), (j, t))` with `i < j`, sorted.
    pub edges: Vec<((usize, usize), (usize, usize))>,
}

impl KgGraph {
    pub fn vertex_count(&self) -> usize {
        self.base_n * self.d
    }

    pub fn index(&self, (i, s): (usize, usize)) -> usize {
        i * self.d + s
    }

    pub fn to_typed_graph(&self) -> Result<TypedGraph> {
        let mut g = TypedGraph::new(self.vertex_count(), 1)?;
        for &(a, b) in &self.edges {
            g.add_edge(self.index(a), self.index(b), 0);
        }
        Ok(g)
    }

    /// The cover as a one-outcome game, the format used for KG files.
    pub fn to_game(&self) -> LabeledGameGraph {
        let mut g = LabeledGameGraph::new(self.vertex_count(), 1).expect("d = 1 is valid");
        for &(a, b) in &self.edges {
            g.add_edge(self.index(a), self.index(b), EdgeLabel::Colored(0)).expect("cover is simple");
        }
        g
    }

    /// Component id of every cover vertex.
    pub fn components(&self) -> Vec<usize> {
        components(self.vertex_count(), self.edges.iter().map(|&(a, b)| (self.index(a), self.index(b))))
    }
}

/// Gray edges are not lifted.
pub fn build_kg(g: &LabeledGameGraph) -> KgGraph {
    let d = g.d();
    let mut edges = Vec::with_capacity(g.colored_edge_count() * d);
    for (i, j, c) in g.colored_edges() {
        let pi = g.perm(c);
        for s in 0..d {
            edges.push(((i, s), (j, pi.apply(s))));
        }
    }
    edges.sort_unstable();
    KgGraph { base_n: g.n(), d, edges }
}

/// Number of components of KG isomorphic to G, i.e. of consistent assignments.
pub fn assignment_number(g: &LabeledGameGraph) -> Result<usize> {
    if g.gray_edge_count() > 0 {
        return Err(Error::Unsupported("assignment number is defined for games without gray edges".into()));
    }
    if !g.colored_is_connected() {
        return Err(Error::Unsupported("assignment number requires a connected graph".into()));
    }
    let kg = build_kg(g);
    let comp = kg.components();
    let n = g.n();
    let d = g.d();
    let mut fibers_hit: Vec<Vec<usize>> = vec![vec![0; n]; n * d];
    for i in 0..n {
        for s in 0..d {
            fibers_hit[comp[i * d + s]][i] += 1;
        }
    }
    let count = fibers_hit.iter().filter(|f| f.iter().all(|&x| x == 1)).count();
    if cfg!(debug_assertions) && (d as f64).powi(n as i32) <= 1e5 {
        debug_assert_eq!(count, brute_force_satisfying(g));
    }
    Ok(count)
}

fn brute_force_satisfying(g: &LabeledGameGraph) -> usize {
    let (n, d) = (g.n(), g.d());
    let total = d.pow(n as u32);
    let edges: Vec<_> = g.colored_edges().collect();
    (0..total)
        .filter(|&code| {
            let a: Vec<usize> = (0..n).map(|i| code / d.pow(i as u32) % d).collect();
            edges.iter().all(|&(u, v, c)| (a[u] + a[v]) % d == c)
        })
        .count()
}

/// Byte encoding of a switching class; see [`canonical_form`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CanonicalForm(pub Vec<u8>);

impl CanonicalForm {
    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::InvalidArgument(format!("bad canonical id: {e}")))?;
        let f = CanonicalForm(bytes);
        f.to_game()?;
        Ok(f)
    }

    /// The canonical representative itself.
    pub fn to_game(&self) -> Result<LabeledGameGraph> {
        let bad = || Error::InvalidArgument("malformed canonical form".into());
        let b = &self.0;
        let (&n, &d, &bip) = match b.as_slice() {
            [n, d, bip, ..] => (n, d, bip),
            _ => return Err(bad()),
        };
        let (n, d) = (n as usize, d as usize);
        let side_len = if bip == 1 { n } else { 0 };
        if bip > 1 || b.len() != 3 + side_len + n * n.saturating_sub(1) / 2 {
            return Err(bad());
        }
        let sides = (bip == 1).then(|| b[3..3 + n].iter().map(|&x| x == 1).collect());
        let mut g = LabeledGameGraph::with_sides(n, d, sides)?;
        let mut k = 3 + side_len;
        for p in 0..n {
            for q in p + 1..n {
                match b[k] {
                    NO_EDGE => {}
                    GRAY => g.add_edge(p, q, EdgeLabel::Gray)?,
                    c => g.add_edge(p, q, EdgeLabel::Colored(c as usize))?,
                }
                k += 1;
            }
        }
        Ok(g)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

const NO_EDGE: u8 = 0xFF;
const GRAY: u8 = 0xFE;

/// Ceiling on labelings × edges examined per canonical form.
pub const CANON_WORK_BUDGET: usize = 200_000_000;

/// How a game maps onto its canonical form: scale colors on each colored
/// component, switch every vertex by a translation, then renumber vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalMap {
    /// `order[p]` is the vertex placed at position `p`.
    pub order: Vec<usize>,
    /// Unit applied at each vertex (constant on colored components).
    pub scale: Vec<usize>,
    /// Translation applied at each vertex after scaling.
    pub shift: Vec<usize>,
}

/// Precomputed isomorphisms for one underlying graph (edge kinds and sides);
/// canonicalizes any labeling of it.
pub struct Canonizer {
    n: usize,
    d: usize,
    bipartite: bool,
    /// Sorted edge list `(u, v, colored?)` of the structure.
    shape: Vec<(usize, usize, bool)>,
    /// `(order, side bits in order)` for every isomorphism onto a canonical graph.
    candidates: Vec<(Vec<usize>, Vec<u8>)>,
}

impl Canonizer {
    pub fn new(g: &LabeledGameGraph) -> Result<Self> {
        let n = g.n();
        let d = g.d();
        if d > 255 || n > 64 {
            return Err(Error::ResourceLimit("canonical forms need n ≤ 64 and d ≤ 255".into()));
        }
        let shape: Vec<(usize, usize, bool)> =
            g.edges().iter().map(|e| (e.u, e.v, e.label != EdgeLabel::Gray)).collect();
        let m = shape.len().max(1);
        let max_labelings = (CANON_WORK_BUDGET / (m * units(d).len())).max(1);
        let swaps: &[bool] = if g.is_bipartite_game() { &[false, true] } else { &[false] };
        let mut candidates = Vec::new();
        for &swap in swaps {
            let mut h = TypedGraph::new(n, 2)?;
            if let Some(s) = g.sides() {
                for v in 0..n {
                    h.set_color(v, (s[v] ^ swap) as u32);
                }
            }
            for &(u, v, colored) in &shape {
                h.add_edge(u, v, if colored { 0 } else { 1 });
            }
            let (_, leaves) = all_canonical_labelings(&h, max_labelings)?;
            for order in leaves {
                let sides = match g.sides() {
                    Some(s) => order.iter().map(|&v| (s[v] ^ swap) as u8).collect(),
                    None => Vec::new(),
                };
                candidates.push((order, sides));
            }
            if candidates.len() > max_labelings {
                return Err(Error::ResourceLimit(format!("more than {max_labelings} automorphisms")));
            }
        }
        Ok(Self { n, d, bipartite: g.is_bipartite_game(), shape, candidates })
    }

    /// Number of isomorphisms tried per labeling.
    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    fn check_shape(&self, g: &LabeledGameGraph) -> Result<()> {
        let same = g.n() == self.n
            && g.d() == self.d
            && g.is_bipartite_game() == self.bipartite
            && g.edges().len() == self.shape.len()
            && g.edges().iter().zip(&self.shape).all(|(e, s)| (e.u, e.v, e.label != EdgeLabel::Gray) == *s);
        if same {
            Ok(())
        } else {
            Err(Error::InvalidArgument("game does not match the canonizer's graph".into()))
        }
    }

    pub fn canonical(&self, g: &LabeledGameGraph) -> Result<CanonicalForm> {
        Ok(self.canonical_with_map(g)?.0)
    }

    pub fn canonical_with_map(&self, g: &LabeledGameGraph) -> Result<(CanonicalForm, CanonicalMap)> {
        self.check_shape(g)?;
        let mut best: Option<(Vec<u8>, CanonicalMap)> = None;
        for (order, sides) in &self.candidates {
            let (bytes, map) = self.encode(g, order, sides);
            if best.as_ref().map_or(true, |(b, _)| bytes < *b) {
                best = Some((bytes, map));
            }
        }
        let (bytes, map) = best.expect("at least one labeling");
        Ok((CanonicalForm(bytes), map))
    }

    fn encode(&self, g: &LabeledGameGraph, order: &[usize], sides: &[u8]) -> (Vec<u8>, CanonicalMap) {
        let (n, d) = (self.n, self.d);
        let mut pos = vec![0; n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        // Colored edges in canonical pair order.
        let mut colored: Vec<(usize, usize, usize)> = g
            .colored_edges()
            .map(|(u, v, c)| {
                let (p, q) = (pos[u].min(pos[v]), pos[u].max(pos[v]));
                (p, q, c)
            })
            .collect();
        colored.sort_unstable();
        let comp = components(n, colored.iter().map(|&(p, q, _)| (p, q)));
        let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut scale_pos = vec![1usize; n];
        let mut shift_pos = vec![0usize; n];
        let mut color_of: Vec<u8> = vec![0; colored.len()];
        for ci in 0..ncomp {
            let idx: Vec<usize> = (0..colored.len()).filter(|&i| comp[colored[i].0] == ci).collect();
            if idx.is_empty() {
                continue;
            }
            let edges: Vec<(usize, usize, usize)> = idx.iter().map(|&i| colored[i]).collect();
            let mut best: Option<(Vec<u8>, usize, Vec<i64>)> = None;
            for u in units(d) {
                let (cols, k) = greedy_switch(d, n, &edges, u);
                if best.as_ref().map_or(true, |(b, _, _)| cols < *b) {
                    best = Some((cols, u, k));
                }
            }
            let (cols, u, k) = best.expect("units are nonempty");
            for (slot, &i) in idx.iter().enumerate() {
                color_of[i] = cols[slot];
            }
            for p in 0..n {
                if comp[p] == ci {
                    scale_pos[p] = u;
                    shift_pos[p] = k[p] as usize;
                }
            }
        }
        let mut bytes = Vec::with_capacity(3 + n + n * n / 2);
        bytes.extend_from_slice(&[n as u8, d as u8, self.bipartite as u8]);
        bytes.extend_from_slice(sides);
        let mut table = vec![NO_EDGE; n * n];
        for &(u, v, colored_kind) in &self.shape {
            if !colored_kind {
                let (p, q) = (pos[u].min(pos[v]), pos[u].max(pos[v]));
                table[p * n + q] = GRAY;
            }
        }
        for (i, &(p, q, _)) in colored.iter().enumerate() {
            table[p * n + q] = color_of[i];
        }
        for p in 0..n {
            for q in p + 1..n {
                bytes.push(table[p * n + q]);
            }
        }
        let mut scale = vec![1; n];
        let mut shift = vec![0; n];
        for v in 0..n {
            scale[v] = scale_pos[pos[v]];
            shift[v] = shift_pos[pos[v]];
        }
        (bytes, CanonicalMap { order: order.to_vec(), scale, shift })
    }
}

/// Lexicographically least color sequence reachable on one connected edge
/// list by vertex translations, colors first multiplied by `u`.
///
/// Every vertex value is tracked as `k_v = s_v·t_r + o_v` with `s_v = ±1` and
/// one free parameter `t_r` per merged block `r`; `t_r` is either free or
/// confined to `{t : 2t = 0}`. The choice made at each edge keeps exactly the
/// translations that realize the minimal prefix, so the greedy result is exact.
fn greedy_switch(d: usize, n: usize, edges: &[(usize, usize, usize)], u: usize) -> (Vec<u8>, Vec<i64>) {
    let dm = d as i64;
    let md = |x: i64| x.rem_euclid(dm);
    let half = if d % 2 == 0 { dm / 2 } else { 0 };
    let inv2 = if d % 2 == 1 { (dm + 1) / 2 } else { 0 };
    let mut root: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut s = vec![1i64; n];
    let mut o = vec![0i64; n];
    let mut confined = vec![false; n];
    let mut out = Vec::with_capacity(edges.len());
    for &(i, j, c) in edges {
        let cu = md((c * u) as i64);
        let (a, b) = (root[i], root[j]);
        let color;
        if a != b {
            let (keep, absorb, x, y) = if !confined[b] {
                (a, b, i, j)
            } else if !confined[a] {
                (b, a, j, i)
            } else {
                (a, b, i, j)
            };
            let moved = std::mem::take(&mut members[absorb]);
            if !confined[absorb] {
                // t_absorb = s_y(−cu − o_x − o_y) − s_y s_x t_keep
                let off = cu + o[x] + o[y];
                let (sx, sy) = (s[x], s[y]);
                for &v in &moved {
                    o[v] = md(o[v] - s[v] * sy * off);
                    s[v] = -s[v] * sy * sx;
                }
                color = 0;
            } else {
                let c0 = md(cu + o[x] + o[y]);
                let m = if half > 0 { c0 % half } else { c0 };
                let delta = m - c0;
                for &v in &moved {
                    o[v] = md(o[v] + s[v] * delta);
                }
                color = m;
            }
            for &v in &moved {
                root[v] = keep;
            }
            members[keep].extend(moved);
        } else {
            let sum = s[i] + s[j];
            let base = md(cu + o[i] + o[j]);
            if sum == 0 || confined[a] {
                color = base;
            } else {
                let sgn = sum / 2;
                let (m, t0) = if d % 2 == 1 {
                    (0, md(-base * sgn * inv2))
                } else {
                    let m = base % 2;
                    (m, md((m - base) * sgn) / 2)
                };
                for &v in &members[a] {
                    o[v] = md(o[v] + s[v] * t0);
                }
                confined[a] = true;
                color = m;
            }
        }
        out.push(color as u8);
    }
    (out, o)
}

pub fn canonical_form(g: &LabeledGameGraph) -> Result<CanonicalForm> {
    Canonizer::new(g)?.canonical(g)
}

#[cfg(test)]
mod decode_tests {
    use super::*;

    #[test]
    fn forms_decode_to_their_class() {
        let mut g = LabeledGameGraph::new_bipartite(4, 3, 2).unwrap();
        for (u, v, c) in [(0, 2, 2), (0, 3, 1), (1, 3, 0)] {
            g.add_edge(u, v, EdgeLabel::Colored(c)).unwrap();
        }
        g.add_edge(1, 2, EdgeLabel::Gray).unwrap();
        let f = canonical_form(&g).unwrap();
        let rep = f.to_game().unwrap();
        assert_eq!(canonical_form(&rep).unwrap(), f);
        assert_eq!(CanonicalForm::from_hex(&f.to_hex()).unwrap(), f);
        assert!(CanonicalForm::from_hex("0302").is_err());
    }
}

/// Apply a canonical map (or any scale/shift/order triple) to a game.
pub fn apply_map(g: &LabeledGameGraph, map: &CanonicalMap) -> Result<LabeledGameGraph> {
    let d = g.d();
    let labels: Vec<EdgeLabel> = g
        .edges()
        .iter()
        .map(|e| match e.label {
            EdgeLabel::Colored(c) => EdgeLabel::Colored((c * map.scale[e.u] + map.shift[e.u] + map.shift[e.v]) % d),
            l => l,
        })
        .collect();
    let mut pos = vec![0; g.n()];
    for (p, &v) in map.order.iter().enumerate() {
        pos[v] = p;
    }
    g.relabeled(&labels)?.permute_vertices(&pos)
}

/// A sequence of moves taking one game to an equivalent one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    /// Unit applied at each vertex first (1 where no scaling is needed).
    pub scale: Vec<usize>,
    /// Translation switchings `(vertex, k)` applied next.
    pub switches: Vec<(usize, usize)>,
    /// Vertex `v` of the first game becomes `vertex_map[v]`.
    pub vertex_map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// How the verdict was reached: `"kg-isomorphism"` or `"orbit-canonical"`.
    pub method: &'static str,
    pub witness: Option<EquivalenceWitness>,
}

/// Equivalence under vertex permutations and switchings. Games without gray
/// edges (and with a connected colored graph when two-party) are compared by
/// KG isomorphism; others by canonical orbit representatives.
pub fn equivalent(g1: &LabeledGameGraph, g2: &LabeledGameGraph) -> Result<Equivalence> {
    if g1.d() != g2.d() {
        return Err(Error::InvalidArgument(format!("games have d = {} and d = {}", g1.d(), g2.d())));
    }
    let kg_applies = |g: &LabeledGameGraph| g.gray_edge_count() == 0 && (!g.is_bipartite_game() || g.colored_is_connected());
    if g1.n() != g2.n() || g1.is_bipartite_game() != g2.is_bipartite_game() {
        return Ok(Equivalence { equivalent: false, method: "orbit-canonical", witness: None });
    }
    let (equivalent, method) = if kg_applies(g1) && kg_applies(g2) {
        let (a, b) = (build_kg(g1).to_typed_graph()?, build_kg(g2).to_typed_graph()?);
        (isomorphic(&a, &b)?, "kg-isomorphism")
    } else {
        (canonical_form(g1)? == canonical_form(g2)?, "orbit-canonical")
    };
    let witness = if equivalent { find_witness(g1, g2).ok().flatten() } else { None };
    Ok(Equivalence { equivalent, method, witness })
}

/// Compose the two canonical maps; `None` when the canonical forms differ.
pub fn find_witness(g1: &LabeledGameGraph, g2: &LabeledGameGraph) -> Result<Option<EquivalenceWitness>> {
    let (f1, m1) = Canonizer::new(g1)?.canonical_with_map(g1)?;
    let (f2, m2) = Canonizer::new(g2)?.canonical_with_map(g2)?;
    if f1 != f2 {
        return Ok(None);
    }
    let (n, d) = (g1.n(), g1.d());
    let inv = |u: usize| (1..d.max(2)).find(|&x| x * u % d == 1).unwrap_or(1);
    let mut pos1 = vec![0; n];
    for (p, &v) in m1.order.iter().enumerate() {
        pos1[v] = p;
    }
    let vertex_map: Vec<usize> = (0..n).map(|v| m2.order[pos1[v]]).collect();
    let mut scale = vec![1; n];
    let mut switches = Vec::new();
    for v in 0..n {
        let w = vertex_map[v];
        let u2i = inv(m2.scale[w]);
        scale[v] = u2i * m1.scale[v] % d.max(1);
        let k = u2i * ((m1.shift[v] + d - m2.shift[w]) % d) % d.max(1);
        if k != 0 {
            switches.push((v, k));
        }
    }
    let w = EquivalenceWitness { scale, switches, vertex_map };
    Ok((apply_witness(g1, &w)? == *g2).then_some(w))
}

pub fn apply_witness(g: &LabeledGameGraph, w: &EquivalenceWitness) -> Result<LabeledGameGraph> {
    let mut shift = vec![0; g.n()];
    for &(v, k) in &w.switches {
        shift[v] = (shift[v] + k) % g.d();
    }
    let d = g.d();
    let labels: Vec<EdgeLabel> = g
        .edges()
        .iter()
        .map(|e| match e.label {
            EdgeLabel::Colored(c) => EdgeLabel::Colored((c * w.scale[e.u] + shift[e.u] + shift[e.v]) % d),
            l => l,
        })
        .collect();
    g.relabeled(&labels)?.permute_vertices(&w.vertex_map)
}
