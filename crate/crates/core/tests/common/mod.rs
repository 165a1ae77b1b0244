//! Oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use itertools::Itertools;
use rand::Rng;
use xord_core::{EdgeLabel, LabeledGameGraph};

#[derive(Clone, Copy, Debug)]
pub enum Slot {
    Empty,
    Gray,
    Color(usize),
}

pub fn build(n: usize, d: usize, slots: &[Slot]) -> LabeledGameGraph {
    let mut g = LabeledGameGraph::new(n, d).unwrap();
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            match slots[k] {
                Slot::Empty => {}
                Slot::Gray => g.add_edge(u, v, EdgeLabel::Gray).unwrap(),
                Slot::Color(c) => g.add_edge(u, v, EdgeLabel::Colored(c)).unwrap(),
            }
            k += 1;
        }
    }
    g
}

/// Random single-party game with the same slot distribution as the proptest
/// strategy: 5 empty, `gray` gray and 4 colored slots per pair.
pub fn random_game<R: Rng>(rng: &mut R, lo: usize, hi: usize, gray: u32) -> LabeledGameGraph {
    loop {
        let n = rng.gen_range(lo..=hi);
        let d = rng.gen_range(2..=3);
        let slots: Vec<Slot> = (0..n * (n - 1) / 2)
            .map(|_| match rng.gen_range(0..9 + gray) {
                r if r < 5 => Slot::Empty,
                r if r < 5 + gray => Slot::Gray,
                _ => Slot::Color(rng.gen_range(0..d)),
            })
            .collect();
        let g = build(n, d, &slots);
        if g.colored_edge_count() > 0 {
            return g;
        }
    }
}

/// Brute-force orbit membership over the whole group.
pub fn in_orbit(a: &LabeledGameGraph, b: &LabeledGameGraph) -> bool {
    let (n, d) = (a.n(), a.d());
    if b.n() != n || b.d() != d || a.edges().len() != b.edges().len() {
        return false;
    }
    let units: Vec<usize> = (1..d).filter(|&u| gcd(u, d) == 1).collect();
    for perm in (0..n).permutations(n) {
        // Vertex v of `a` lands on perm[v] of `b`: edge kinds must match.
        let shape_ok = a.edges().iter().all(|e| match (e.label, b.label(perm[e.u], perm[e.v])) {
            (EdgeLabel::Gray, Some(EdgeLabel::Gray)) => true,
            (EdgeLabel::Colored(_), Some(EdgeLabel::Colored(_))) => true,
            _ => false,
        });
        if !shape_ok {
            continue;
        }
        let colored: Vec<(usize, usize, usize, usize)> = a
            .colored_edges()
            .map(|(u, v, c)| (u, v, c, b.label(perm[u], perm[v]).unwrap().color().unwrap()))
            .collect();
        // Units may differ per colored component; try every unit per edge-component
        // by brute force over all unit assignments to vertices.
        for scale in (0..n).map(|_| units.iter().copied()).multi_cartesian_product() {
            if colored.iter().any(|&(u, v, _, _)| scale[u] != scale[v]) {
                continue;
            }
            for shift in (0..n).map(|_| 0..d).multi_cartesian_product() {
                if colored.iter().all(|&(u, v, c, c2)| (scale[u] * c + shift[u] + shift[v]) % d == c2) {
                    return true;
                }
            }
        }
    }
    false
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Maximum-weight independent set by branch and bound.
pub fn mwis(adj: &[Vec<bool>], w: &[u64]) -> u64 {
    fn go(adj: &[Vec<bool>], w: &[u64], cand: &[usize], cur: u64, best: &mut u64) {
        if cur > *best {
            *best = cur;
        }
        let bound: u64 = cand.iter().map(|&v| w[v]).sum();
        if cand.is_empty() || cur + bound <= *best {
            return;
        }
        let v = cand[0];
        let keep: Vec<usize> = cand[1..].iter().copied().filter(|&u| !adj[v][u]).collect();
        go(adj, w, &keep, cur + w[v], best);
        go(adj, w, &cand[1..], cur, best);
    }
    let mut order: Vec<usize> = (0..w.len()).filter(|&v| w[v] > 0).collect();
    order.sort_by(|&a, &b| w[b].cmp(&w[a]));
    let mut best = 0;
    go(adj, w, &order, 0, &mut best);
    best
}

/// Assignments of the cycle's vertices satisfying every edge on it, by enumeration.
pub fn cycle_assignments(g: &LabeledGameGraph, cycle: &[usize]) -> usize {
    let d = g.d();
    let k = cycle.len();
    let mut count = 0;
    let mut vals = vec![0usize; k];
    'all: loop {
        let ok = (0..k).all(|i| {
            let (u, v) = (cycle[i], cycle[(i + 1) % k]);
            let c = g.label(u, v).unwrap().color().unwrap();
            g.wins(c, vals[i], vals[(i + 1) % k])
        });
        count += ok as usize;
        for slot in vals.iter_mut() {
            *slot += 1;
            if *slot < d {
                continue 'all;
            }
            *slot = 0;
        }
        return count;
    }
}
