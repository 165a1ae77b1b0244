//! Quantum-side bounds: the orthogonality graph with its weighted theta, and
//! the almost-quantum moment matrix.

mod moment;
mod ortho;
mod screen;

pub use moment::{almost_quantum_value, almost_quantum_value_with, moment_problem, Letter, MomentProblem, Word, MAX_WORDS};
pub use ortho::{
    build_orthogonality_graph, maximal_cliques, theta_problem, theta_upper_bound, MAX_THETA_CONSTRAINTS, theta_upper_bound_with, Event,
    OrthogonalityGraph, MAX_EVENTS,
};
pub use screen::{is_chsh3_class, pseudo_telepathy_screen, ScreenReport, Verdict};

use xord_sdp::{SdpSolution, SdpStatus};

use crate::game::LabeledGameGraph;

/// A certified upper bound from one SDP solve.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// Dual objective of the solve.
    pub value: f64,
    pub status: SdpStatus,
    pub gap: f64,
    pub iterations: usize,
    pub dim: usize,
    pub constraints: usize,
}

impl BoundReport {
    fn from_solution(s: &SdpSolution, dim: usize, constraints: usize) -> Self {
        Self { value: s.value(), status: s.status, gap: s.gap, iterations: s.iterations, dim, constraints }
    }
}

/// Adjacency bitsets of the commutation graph: every edge of the game plus,
/// for two-party games, every Alice–Bob pair.
pub fn commutation_graph(g: &LabeledGameGraph) -> Vec<u64> {
    let n = g.n();
    let mut adj = vec![0u64; n];
    for e in g.edges() {
        adj[e.u] |= 1 << e.v;
        adj[e.v] |= 1 << e.u;
    }
    if let Some(s) = g.sides() {
        for u in 0..n {
            for v in 0..n {
                if s[u] != s[v] {
                    adj[u] |= 1 << v;
                }
            }
        }
    }
    adj
}
