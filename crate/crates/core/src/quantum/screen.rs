use std::fmt;

use xord_sdp::SdpStatus;

use super::almost_quantum_value;
use crate::classical::classical_value;
use crate::equivalence::canonical_form;
use crate::error::Result;
use crate::game::{EdgeLabel, LabeledGameGraph};

/// Slack below a perfect score that the relaxation must clear.
pub const PERFECT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ClassicallyWinnable,
    CertifiedNumerically,
    ByTheorem,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ClassicallyWinnable => "classically winnable",
            Verdict::CertifiedNumerically => "no pseudo-telepathy, certified numerically",
            Verdict::ByTheorem => "no pseudo-telepathy by theorem (numerics inconclusive)",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenReport {
    pub beta_c: usize,
    pub gamma_c: usize,
    pub colored_edges: usize,
    /// Absent when the game is classically winnable.
    pub gamma_aq: Option<f64>,
    pub status: Option<SdpStatus>,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
    pub chsh3_class: bool,
}

fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|p| p * p <= d).all(|p| d % p != 0)
}

fn chsh3() -> LabeledGameGraph {
    let mut g = LabeledGameGraph::new_bipartite(4, 3, 2).unwrap();
    for (u, v, c) in [(0, 2, 0), (0, 3, 0), (1, 2, 0), (1, 3, 1)] {
        g.add_edge(u, v, EdgeLabel::Colored(c)).unwrap();
    }
    g
}

/// Whether `g` lies in the switching class of the three-outcome CHSH game,
/// where the almost-quantum value is known not to be tight.
pub fn is_chsh3_class(g: &LabeledGameGraph) -> Result<bool> {
    if g.d() != 3 || g.n() != 4 || !g.is_bipartite_game() || g.colored_edge_count() != 4 || g.gray_edge_count() != 0 {
        return Ok(false);
    }
    Ok(canonical_form(g)? == canonical_form(&chsh3())?)
}

pub fn pseudo_telepathy_screen(g: &LabeledGameGraph) -> Result<ScreenReport> {
    let c = classical_value(g)?;
    let mut warnings = Vec::new();
    if !is_prime(g.d()) {
        warnings.push(format!("d = {} is not prime; the no-go theorem does not apply", g.d()));
    }
    if !g.is_bipartite_game() {
        warnings.push("single-party game; the no-go theorem covers two-party games".into());
    }
    let chsh3_class = is_chsh3_class(g)?;
    let mut report = ScreenReport {
        beta_c: c.beta_c,
        gamma_c: c.gamma_c,
        colored_edges: c.colored_edges,
        gamma_aq: None,
        status: None,
        verdict: Verdict::ClassicallyWinnable,
        warnings,
        chsh3_class,
    };
    if c.beta_c == 0 {
        return Ok(report);
    }
    let aq = almost_quantum_value(g)?;
    report.gamma_aq = Some(aq.value);
    report.status = Some(aq.status);
    report.verdict = if aq.status == SdpStatus::Optimal && aq.value < c.colored_edges as f64 - PERFECT_TOL {
        Verdict::CertifiedNumerically
    } else {
        Verdict::ByTheorem
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_is_certified() {
        let mut g = LabeledGameGraph::new_bipartite(4, 2, 2).unwrap();
        for (u, v, c) in [(0, 2, 0), (0, 3, 0), (1, 2, 0), (1, 3, 1)] {
            g.add_edge(u, v, EdgeLabel::Colored(c)).unwrap();
        }
        let r = pseudo_telepathy_screen(&g).unwrap();
        assert_eq!(r.beta_c, 1);
        assert_eq!(r.verdict, Verdict::CertifiedNumerically);
        assert!(r.warnings.is_empty());
        assert!(!r.chsh3_class);
    }

    #[test]
    fn winnable_and_flags() {
        let g = LabeledGameGraph::single_color(4, 3, &[(0, 1), (1, 2), (2, 3)], 2).unwrap();
        let r = pseudo_telepathy_screen(&g).unwrap();
        assert_eq!(r.verdict, Verdict::ClassicallyWinnable);
        assert_eq!(r.gamma_aq, None);
        let r = pseudo_telepathy_screen(&chsh3()).unwrap();
        assert!(r.chsh3_class);
        assert_eq!(r.verdict, Verdict::CertifiedNumerically);
        let g = LabeledGameGraph::single_color(3, 4, &[(0, 1)], 0).unwrap();
        assert!(pseudo_telepathy_screen(&g).unwrap().warnings[0].contains("not prime"));
    }
}
