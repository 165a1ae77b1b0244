use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn games(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name)
}

fn xord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xord")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn game(name: &str) -> String {
    games(name).to_str().unwrap().to_string()
}

#[test]
fn perms_lists_the_involutions() {
    let o = xord(&["perms", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("pi_0: 0 2 1") && s.contains("pi_2: 2 1 0"), "{s}");
    assert!(s.trim_end().ends_with("P1: ok, P2: ok"), "{s}");
}

#[test]
fn classical_pentagon() {
    let o = xord(&["classical", &game("c5_dashed.game")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "beta_c=1 gamma_c=4 omega_c=0.8");
}

#[test]
fn aq_chsh() {
    let o = xord(&["aq", &game("chsh.game")]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("gamma_aq=3.41421 gap="), "{s}");
    assert!(s.contains("status=optimal"));
}

#[test]
fn json_and_text_carry_the_same_numbers() {
    for verb in ["classical", "aq", "theta", "screen"] {
        let f = game("c5_dashed.game");
        let text = stdout(&xord(&[verb, &f]));
        let json: serde_json::Value = serde_json::from_str(&stdout(&xord(&["--format", "json", verb, &f]))).unwrap();
        let head = text.lines().next().unwrap();
        for pair in head.split(' ') {
            let (k, v) = pair.split_once('=').unwrap();
            let shown: f64 = v.parse().unwrap();
            let j = json["values"].get(k).or_else(|| json["solver"].get(k)).unwrap().as_f64().unwrap();
            assert!((shown - j).abs() <= 1e-12, "{verb} {k}: {shown} vs {j}");
        }
        assert_eq!(json["game"]["n"].as_u64(), Some(5));
    }
}

#[test]
fn precision_flag() {
    let s = stdout(&xord(&["--precision", "3", "aq", &game("chsh.game")]));
    assert!(s.starts_with("gamma_aq=3.41 "), "{s}");
}

#[test]
fn tsv_format_has_a_header_row() {
    let s = stdout(&xord(&["--format", "tsv", "classical", &game("chsh.game")]));
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("beta_c\tgamma_c\tomega_c"));
    assert_eq!(lines.next(), Some("1\t3\t0.75"));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.game");
    std::fs::write(&p, "xordgame 2 3\nedge 0 x 1\n").unwrap();
    let o = xord(&["classical", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.game:2:8"));
}

#[test]
fn budget_overrun_exits_3() {
    let o = xord(&["survey", "--n", "7", "--values", "aq,theta", "--sdp-budget", "10"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unconverged_solver_exits_4() {
    let o = xord(&["--gap-tol", "1e-30", "aq", &game("chsh.game")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).starts_with("gamma_aq=3.414"));
}

#[test]
fn kg_output_round_trips() {
    let s = stdout(&xord(&["kg", &game("chsh.game")]));
    let g = xord_core::io::parse_game(&s).unwrap();
    assert_eq!(g.n(), 8);
    assert_eq!(g.colored_edge_count(), 8);
    assert_eq!(xord_core::io::write_game(&g).unwrap(), s);
}

#[test]
fn canon_and_equiv() {
    let a = stdout(&xord(&["canon", &game("k33_beta1.game")]));
    assert!(a.trim().chars().all(|c| c.is_ascii_digit() || ('a'..='f').contains(&c)), "{a}");
    let same = stdout(&xord(&["equiv", &game("chsh.game"), &game("chsh.game")]));
    assert!(same.starts_with("equivalent"), "{same}");
    assert!(same.contains("vertices=0->0"));
    let diff = stdout(&xord(&["equiv", &game("k33_beta0.game"), &game("k33_beta1.game")]));
    assert!(diff.starts_with("not equivalent"), "{diff}");
}

#[test]
fn screen_flags_chsh3() {
    let s = stdout(&xord(&["screen", &game("chsh3.game")]));
    assert!(s.contains("no pseudo-telepathy, certified numerically"));
    assert!(s.contains("CHSH-3"));
}

#[test]
fn cycles_and_bipartize() {
    let s = stdout(&xord(&["cycles", &game("fig8.game")]));
    assert!(s.contains("cycle\tfixed_points\tkind"));
    let s = stdout(&xord(&["bipartize", &game("k5_dashed.game")]));
    assert!(s.starts_with("beta2_c=4"), "{s}");
}

#[test]
fn sdp_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("chsh.dat-s");
    let o = xord(&["aq", &game("chsh.game"), "--dump-sdp", p.to_str().unwrap()]);
    assert!(o.status.success());
    let dump = std::fs::read_to_string(&p).unwrap();
    assert!(dump.contains("= mDIM") && dump.contains("= bLOCKsTRUCT"));
    let theta = stdout(&xord(&["sdp-dump", "--kind", "theta", &game("c5_dashed.game")]));
    assert!(theta.contains("= mDIM"));
}

#[test]
fn survey_resume_completes_a_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.tsv");
    let o = xord(&["survey", "--n", "5", "--values", "classical,aq", "--out", full.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let full_text = std::fs::read_to_string(&full).unwrap();
    assert_eq!(full_text.lines().count(), 12);
    assert!(stdout(&o).starts_with("rows=11 nonclassical=2"), "{}", stdout(&o));

    // Keep a few rows, one of them twice and out of order.
    let lines: Vec<&str> = full_text.lines().collect();
    let part = dir.path().join("part.tsv");
    std::fs::write(&part, format!("{}\n{}\n{}\n{}\n", lines[0], lines[5], lines[2], lines[5])).unwrap();
    let o = xord(&["survey", "--n", "5", "--values", "classical,aq", "--resume", part.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&part).unwrap(), full_text);
}

#[test]
fn survey_over_fixed_games() {
    let o = xord(&["survey", "--games", &game("k33_beta0.game"), "--d", "3", "--mode", "all", "--values", "classical"]);
    assert!(o.status.success());
    let s = stdout(&o);
    // Header plus one row per class.
    assert_eq!(s.lines().count(), 7, "{s}");
}
