use proptest::prelude::*;
use xord_core::classical::{classical_value, classify_cycles, cycle_perm, simple_cycles};
use xord_core::equivalence::{canonical_form, equivalent, find_witness, scale_outcomes, switch, CanonicalForm, SwitchOp};
use xord_core::io::{parse_game, write_game};
use xord_core::quantum::{almost_quantum_value, build_orthogonality_graph, moment_problem, theta_upper_bound};
use xord_core::{super_quantum_value, EdgeLabel, Error, LabeledGameGraph};

mod common;

use common::{build, cycle_assignments, in_orbit, mwis, Slot};

const SLACK: f64 = 1e-6;

/// Single-party games on `lo..=hi` vertices, d ∈ {2, 3}, gray edges with
/// weight `gray` (0 for none), at least one colored edge.
fn games(lo: usize, hi: usize, gray: u32) -> impl Strategy<Value = LabeledGameGraph> {
    (lo..=hi, 2..=3usize)
        .prop_flat_map(move |(n, d)| {
            let slot = (0..9 + gray, 0..d).prop_map(move |(r, c)| match r {
                r if r < 5 => Slot::Empty,
                r if r < 5 + gray => Slot::Gray,
                _ => Slot::Color(c),
            });
            (Just(n), Just(d), prop::collection::vec(slot, n * (n - 1) / 2))
        })
        .prop_map(|(n, d, s)| build(n, d, &s))
        .prop_filter("needs a colored edge", |g| g.colored_edge_count() > 0)
}

/// A game with a random orbit element applied: unit scaling, per-vertex
/// translations and a vertex permutation.
fn with_transform(g: LabeledGameGraph) -> impl Strategy<Value = (LabeledGameGraph, LabeledGameGraph)> {
    let (n, d) = (g.n(), g.d());
    (prop::collection::vec(0..d, n), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 1..d).prop_map(
        move |(shifts, perm, unit)| {
            let unit = if d == 3 { unit } else { 1 };
            let mut h = scale_outcomes(&g, unit).unwrap();
            for (v, &k) in shifts.iter().enumerate() {
                h = switch(&h, &SwitchOp::translation(v, d, k)).unwrap();
            }
            let h = h.permute_vertices(&perm).unwrap();
            (g.clone(), h)
        },
    )
}

/// θ_w, or `None` when the orthogonality graph is over budget.
fn theta(g: &LabeledGameGraph) -> Option<f64> {
    match theta_upper_bound(g) {
        Ok(r) => Some(r.value),
        Err(Error::ResourceLimit(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

/// Every colored edge lies in exactly one maximal clique of the commutation graph.
fn unique_cover(g: &LabeledGameGraph) -> bool {
    let Ok(og) = build_orthogonality_graph(g) else { return false };
    g.edges().iter().filter(|e| matches!(e.label, EdgeLabel::Colored(_))).all(|e| {
        og.cliques.iter().filter(|c| c.contains(&e.u) && c.contains(&e.v)).count() == 1
    })
}


proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn switching_preserves_classical_value((g, h) in games(2, 7, 1).prop_flat_map(with_transform)) {
        prop_assert_eq!(classical_value(&g).unwrap().beta_c, classical_value(&h).unwrap().beta_c);
    }

    #[test]
    fn switching_preserves_relaxations((g, h) in games(2, 6, 1).prop_flat_map(with_transform)) {
        let (a, b) = (almost_quantum_value(&g).unwrap(), almost_quantum_value(&h).unwrap());
        prop_assert!((a.value - b.value).abs() < 1e-5, "{} vs {}", a.value, b.value);
        // The clique carrying each edge's weight follows the vertex order, so
        // θ is only permutation invariant when that choice is forced.
        if unique_cover(&g) {
            if let (Some(a), Some(b)) = (theta(&g), theta(&h)) {
                prop_assert!((a - b).abs() < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn switching_preserves_theta((g, shifts, unit) in games(2, 6, 1).prop_flat_map(|g| {
        let (n, d) = (g.n(), g.d());
        (Just(g), prop::collection::vec(0..d, n), 1..d)
    })) {
        let d = g.d();
        let mut h = scale_outcomes(&g, if d == 3 { unit } else { 1 }).unwrap();
        for (v, &k) in shifts.iter().enumerate() {
            h = switch(&h, &SwitchOp::translation(v, d, k)).unwrap();
        }
        if let (Some(a), Some(b)) = (theta(&g), theta(&h)) {
            prop_assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn equivalence_matches_orbit_search(g in games(2, 4, 1), h in games(2, 4, 1)) {
        prop_assume!(g.d() == h.d());
        let truth = g.n() == h.n() && in_orbit(&g, &h);
        prop_assert_eq!(equivalent(&g, &h).unwrap().equivalent, truth);
        prop_assert_eq!(canonical_form(&g).unwrap() == canonical_form(&h).unwrap(), truth);
    }

    #[test]
    fn transformed_games_are_equivalent((g, h) in games(2, 7, 1).prop_flat_map(with_transform)) {
        let e = equivalent(&g, &h).unwrap();
        prop_assert!(e.equivalent, "{}", e.method);
        prop_assert_eq!(canonical_form(&g).unwrap(), canonical_form(&h).unwrap());
        prop_assert!(find_witness(&g, &h).unwrap().is_some());
    }

    #[test]
    fn relabeled_colors_agree_with_orbit_search((g, h) in games(2, 4, 0).prop_flat_map(|g| {
        let d = g.d();
        let m = g.colored_edge_count();
        (Just(g), prop::collection::vec(0..d, m))
    }).prop_map(|(g, colors)| {
        let mut it = colors.into_iter();
        let labels: Vec<EdgeLabel> = g.edges().iter().map(|_| EdgeLabel::Colored(it.next().unwrap())).collect();
        let h = g.relabeled(&labels).unwrap();
        (g, h)
    })) {
        let truth = in_orbit(&g, &h);
        let e = equivalent(&g, &h).unwrap();
        prop_assert_eq!(e.equivalent, truth, "method {}", e.method);
        prop_assert_eq!(canonical_form(&g).unwrap() == canonical_form(&h).unwrap(), truth);
    }

    #[test]
    fn cycle_fixed_points_count_assignments(g in games(3, 7, 0)) {
        for cycle in simple_cycles(&g, 100_000).unwrap().into_iter().take(30) {
            let (_, fp) = cycle_perm(&g, &cycle).unwrap();
            let count = cycle_assignments(&g, &cycle);
            prop_assert_eq!(fp, count, "cycle {:?}", cycle);
        }
    }

    #[test]
    fn contradiction_upper_bound(g in games(3, 7, 0)) {
        let r = classify_cycles(&g).unwrap();
        let b = classical_value(&g).unwrap().beta_c;
        if r.xi_ugly > 0 {
            prop_assert!(b + 1 <= r.xi_bad + r.xi_ugly);
        }
    }

    #[test]
    fn weighted_independence_number_is_classical(g in games(2, 6, 1)) {
        let og = match build_orthogonality_graph(&g) {
            Ok(og) => og,
            Err(Error::ResourceLimit(_)) => return Err(TestCaseError::reject("orthogonality graph over budget")),
            Err(e) => panic!("{e}"),
        };
        prop_assert_eq!(mwis(&og.adjacency(), &og.weights), classical_value(&g).unwrap().gamma_c as u64);
    }

    #[test]
    fn value_ordering(g in games(2, 7, 1)) {
        let gc = classical_value(&g).unwrap().gamma_c as f64;
        let m = g.colored_edge_count() as f64;
        let aq = almost_quantum_value(&g).unwrap().value;
        prop_assert!(gc <= aq + SLACK && aq <= m + SLACK, "{gc} {aq} {m}");
        if let Some(th) = theta(&g) {
            prop_assert!(gc <= th + SLACK && th <= m + SLACK, "{gc} {th} {m}");
        }
    }

    #[test]
    fn dropping_a_gray_edge_never_lowers_the_relaxation(g in games(3, 6, 3), pick in any::<prop::sample::Index>()) {
        let grays: Vec<(usize, usize)> =
            g.edges().iter().filter(|e| e.label == EdgeLabel::Gray).map(|e| (e.u, e.v)).collect();
        prop_assume!(!grays.is_empty());
        let (u, v) = grays[pick.index(grays.len())];
        let mut h = LabeledGameGraph::new(g.n(), g.d()).unwrap();
        for e in g.edges() {
            if (e.u, e.v) != (u, v) {
                h.add_edge(e.u, e.v, e.label).unwrap();
            }
        }
        let (a, b) = (almost_quantum_value(&g).unwrap().value, almost_quantum_value(&h).unwrap().value);
        prop_assert!(a <= b + SLACK, "{a} > {b}");
    }

    #[test]
    fn deterministic_strategies_embed(g in games(2, 7, 1), seed in any::<u64>()) {
        let mp = moment_problem(&g).unwrap();
        let c = classical_value(&g).unwrap();
        let y = mp.deterministic_moments(&c.witness.values);
        prop_assert!((mp.objective_value(&y) - c.gamma_c as f64).abs() < 1e-9);
        let p = mp.entry_form();
        prop_assert!(p.max_residual(&mp.matrix(&y)) < 1e-12);
        let vals: Vec<usize> = (0..g.n()).map(|v| ((seed >> (2 * v)) as usize) % g.d()).collect();
        let sat = g.colored_edges().filter(|&(u, v, c)| g.wins(c, vals[u], vals[v])).count();
        prop_assert!((mp.objective_value(&mp.deterministic_moments(&vals)) - sat as f64).abs() < 1e-9);
    }

    #[test]
    fn super_quantum_boxes_are_consistent(g in games(2, 7, 1)) {
        let b = super_quantum_value(&g).unwrap();
        prop_assert!(b.is_consistent(g.n()));
        prop_assert_eq!(b.gamma_sq, num_rational::Ratio::from_integer(g.colored_edge_count() as u64));
    }

    #[test]
    fn canonical_forms_decode_into_their_class(g in games(2, 7, 1)) {
        let f = canonical_form(&g).unwrap();
        let rep = f.to_game().unwrap();
        prop_assert_eq!(canonical_form(&rep).unwrap(), f.clone());
        prop_assert_eq!(CanonicalForm::from_hex(&f.to_hex()).unwrap(), f);
    }

    #[test]
    fn game_files_round_trip(g in games(2, 7, 1)) {
        prop_assert_eq!(parse_game(&write_game(&g).unwrap()).unwrap(), g);
    }
}

#[test]
fn contradiction_lower_bound_has_counterexamples() {
    // ξ_b ≤ β_C does not hold in general: one contradicted edge can break
    // several bad cycles at once.
    let mut g = LabeledGameGraph::new(4, 2).unwrap();
    for u in 0..4 {
        for v in u + 1..4 {
            g.add_edge(u, v, EdgeLabel::Colored(1)).unwrap();
        }
    }
    let r = classify_cycles(&g).unwrap();
    assert_eq!((r.xi_good, r.xi_bad, r.xi_ugly), (3, 4, 0));
    assert_eq!(classical_value(&g).unwrap().beta_c, 2);
}
