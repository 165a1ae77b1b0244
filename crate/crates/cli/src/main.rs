mod fmt;
mod survey;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use xord_core::classical::{classical_value, classify_cycles, edge_bipartization, CycleKind, ContradictionBounds};
use xord_core::equivalence::{build_kg, canonical_form, equivalent};
use xord_core::io::{parse_game, write_game};
use xord_core::quantum::{
    almost_quantum_value_with, build_orthogonality_graph, moment_problem, pseudo_telepathy_screen, theta_problem,
    theta_upper_bound_with,
};
use xord_core::{make_ld, verify_p1p2, Error, LabeledGameGraph};
use xord_sdp::{SdpOptions, SdpProblem, SdpStatus};

use fmt::{game_json, Format, Num, Report, Solver};

#[derive(Parser)]
#[command(name = "xord", version, about = "Classical and quantum values of XOR-d games")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 6, global = true)]
    precision: usize,
    /// Relative duality gap the SDP solver must reach.
    #[arg(long, default_value_t = 1e-7, global = true)]
    gap_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print L_d and check P1/P2.
    Perms { d: usize },
    /// β_C, γ_C, ω_C and an optimal assignment.
    Classical { file: PathBuf },
    /// Every simple cycle with its fixed points and the ξ counts.
    Cycles { file: PathBuf },
    /// Edge bipartization number of the colored subgraph.
    Bipartize { file: PathBuf },
    /// The KG cover as a game file (d = 1).
    Kg { file: PathBuf },
    /// Canonical form as lowercase hex.
    Canon { file: PathBuf },
    /// Decide equivalence under switching and relabeling.
    Equiv { first: PathBuf, second: PathBuf },
    /// Weighted Lovász theta bound of the orthogonality graph.
    Theta {
        file: PathBuf,
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
    },
    /// Almost-quantum (level 1+AB) bound.
    Aq {
        file: PathBuf,
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
    },
    /// Pseudo-telepathy verdict.
    Screen { file: PathBuf },
    /// Exhaustive survey over graphs and labelings, written as TSV.
    Survey(survey::Args),
    /// Write an SDP in sparse SDPA form.
    SdpDump {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "aq")]
        kind: Relaxation,
        /// Output path (standard output when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Relaxation {
    Aq,
    Theta,
}

/// Failure with its exit code.
pub struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    pub fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }

    pub fn core(e: Error, path: Option<&Path>) -> Self {
        let code = match e {
            Error::Parse { .. } => 2,
            Error::ResourceLimit(_) => 3,
            _ => 1,
        };
        let msg = match (&e, path) {
            (Error::Parse { line, col, msg }, Some(p)) => format!("{}:{line}:{col}: {msg}", p.display()),
            _ => e.to_string(),
        };
        Self { code, msg }
    }
}

pub fn load(path: &Path) -> Result<LabeledGameGraph, Fail> {
    let src = std::fs::read_to_string(path).map_err(|e| Fail::new(1, format!("{}: {e}", path.display())))?;
    parse_game(&src).map_err(|e| Fail::core(e, Some(path)))
}

fn core<T>(r: xord_core::Result<T>) -> Result<T, Fail> {
    r.map_err(|e| Fail::core(e, None))
}

fn relaxation_problem(g: &LabeledGameGraph, kind: Relaxation) -> Result<SdpProblem, Fail> {
    match kind {
        Relaxation::Aq => Ok(core(moment_problem(g))?.moment_form()),
        Relaxation::Theta => Ok(core(theta_problem(&core(build_orthogonality_graph(g))?))?.problem),
    }
}

fn dump(g: &LabeledGameGraph, kind: Relaxation, out: Option<&Path>) -> Result<String, Fail> {
    let s = relaxation_problem(g, kind)?.to_sdpa_string();
    match out {
        Some(p) => {
            std::fs::write(p, &s).map_err(|e| Fail::new(1, format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(s),
    }
}

fn run(cli: &Cli) -> Result<(Report, u8), Fail> {
    let opts = SdpOptions { gap_tol: cli.gap_tol, ..SdpOptions::default() };
    let mut r = Report::default();
    let mut code = 0;
    match &cli.command {
        Command::Perms { d } => {
            let ld = core(make_ld(*d))?;
            r.value("d", Num::Int(*d as i64));
            let maps: Vec<Vec<usize>> = ld.perms().iter().map(|p| p.map().to_vec()).collect();
            for (i, m) in maps.iter().enumerate() {
                let m: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                r.lines.push(format!("pi_{i}: {}", m.join(" ")));
            }
            let v = verify_p1p2(&ld);
            let word = |b: bool| if b { "ok" } else { "fails" };
            // After the maps in text, as the verdict on them.
            r.lines.push(format!("P1: {}, P2: {}", word(v.p1), word(v.p2)));
            r.extra.insert("p1".into(), json!(v.p1));
            r.extra.insert("p2".into(), json!(v.p2));
            if let Some(bad) = &v.violation {
                r.lines.push(bad.to_string());
                code = 1;
            }
            r.extra.insert("permutations".into(), json!(maps));
        }
        Command::Classical { file } => {
            let g = load(file)?;
            let c = core(classical_value(&g))?;
            r.game = Some(game_json(&g));
            r.value("beta_c", Num::Int(c.beta_c as i64));
            r.value("gamma_c", Num::Int(c.gamma_c as i64));
            r.value("omega_c", Num::Real(*c.omega_c.numer() as f64 / *c.omega_c.denom() as f64));
            let w: Vec<String> = c.witness.values.iter().map(|x| x.to_string()).collect();
            r.lines.push(format!("witness={}", w.join(" ")));
            r.extra.insert("witness".into(), json!(c.witness.values));
            r.extra.insert("omega_c_exact".into(), json!(c.omega_c.to_string()));
        }
        Command::Cycles { file } => {
            let g = load(file)?;
            let c = core(classify_cycles(&g))?;
            let b = ContradictionBounds::from_report(&c);
            r.game = Some(game_json(&g));
            r.value("xi_good", Num::Int(c.xi_good as i64));
            r.value("xi_bad", Num::Int(c.xi_bad as i64));
            r.value("xi_ugly", Num::Int(c.xi_ugly as i64));
            r.value("bound_lower", Num::Int(b.lower as i64));
            r.value("bound_upper", Num::Int(b.upper as i64));
            let mut rows = Vec::new();
            r.lines.push("cycle\tfixed_points\tkind".into());
            for info in &c.cycles {
                let kind = match info.kind() {
                    CycleKind::Good => "good",
                    CycleKind::Bad => "bad",
                    CycleKind::Ugly => "ugly",
                };
                let vs: Vec<String> = info.vertices.iter().map(|v| v.to_string()).collect();
                r.lines.push(format!("{}\t{}\t{kind}", vs.join("-"), info.fixed_points));
                rows.push(json!({ "vertices": info.vertices, "fixed_points": info.fixed_points, "kind": kind }));
            }
            r.extra.insert("cycles".into(), json!(rows));
        }
        Command::Bipartize { file } => {
            let g = load(file)?;
            let b = core(edge_bipartization(&g))?;
            r.game = Some(game_json(&g));
            r.value("beta2_c", Num::Int(b.beta2 as i64));
            let removed: Vec<String> = b.removed.iter().map(|(u, v)| format!("{u}-{v}")).collect();
            r.lines.push(format!("removed={}", removed.join(" ")));
            r.extra.insert("removed".into(), json!(b.removed));
        }
        Command::Kg { file } => {
            let g = load(file)?;
            let kg = build_kg(&g).to_game();
            if cli.format == Format::Json {
                r.game = Some(game_json(&kg));
            } else {
                return Ok((Report { lines: vec![core(write_game(&kg))?.trim_end().into()], ..r }, 0));
            }
        }
        Command::Canon { file } => {
            let g = load(file)?;
            let hex = core(canonical_form(&g))?.to_hex();
            r.game = Some(game_json(&g));
            r.lines.push(hex.clone());
            r.extra.insert("canonical_id".into(), json!(hex));
        }
        Command::Equiv { first, second } => {
            let (a, b) = (load(first)?, load(second)?);
            let e = core(equivalent(&a, &b))?;
            r.verdicts.push(format!(
                "{} ({})",
                if e.equivalent { "equivalent" } else { "not equivalent" },
                e.method
            ));
            r.extra.insert("equivalent".into(), json!(e.equivalent));
            if let Some(w) = &e.witness {
                let scale: Vec<String> = w.scale.iter().map(|u| u.to_string()).collect();
                let sw: Vec<String> = w.switches.iter().map(|(v, k)| format!("{v}+{k}")).collect();
                let map: Vec<String> = w.vertex_map.iter().enumerate().map(|(v, t)| format!("{v}->{t}")).collect();
                r.lines.push(format!("scale={}", scale.join(" ")));
                r.lines.push(format!("switch={}", sw.join(" ")));
                r.lines.push(format!("vertices={}", map.join(" ")));
                r.extra.insert(
                    "witness".into(),
                    json!({ "scale": w.scale, "switches": w.switches, "vertex_map": w.vertex_map }),
                );
            } else if e.equivalent {
                r.lines.push("no witness found within budget".into());
            }
        }
        Command::Theta { file, dump_sdp } | Command::Aq { file, dump_sdp } => {
            let g = load(file)?;
            let aq = matches!(cli.command, Command::Aq { .. });
            let kind = if aq { Relaxation::Aq } else { Relaxation::Theta };
            if let Some(p) = dump_sdp {
                dump(&g, kind, Some(p))?;
            }
            let b = if aq { core(almost_quantum_value_with(&g, &opts))? } else { core(theta_upper_bound_with(&g, &opts))? };
            r.game = Some(game_json(&g));
            r.value(if aq { "gamma_aq" } else { "theta" }, Num::Real(b.value));
            r.solver = Some(Solver { gap: b.gap, iters: b.iterations, status: b.status.to_string() });
            r.extra.insert("sdp".into(), json!({ "dim": b.dim, "constraints": b.constraints }));
            if b.status != SdpStatus::Optimal {
                r.verdicts.push("solver did not converge; the value is the best bound reached".into());
                code = 4;
            }
        }
        Command::Screen { file } => {
            let g = load(file)?;
            let s = core(pseudo_telepathy_screen(&g))?;
            r.game = Some(game_json(&g));
            r.value("beta_c", Num::Int(s.beta_c as i64));
            r.value("gamma_c", Num::Int(s.gamma_c as i64));
            if let Some(q) = s.gamma_aq {
                r.value("gamma_aq", Num::Real(q));
            }
            r.value("edges", Num::Int(s.colored_edges as i64));
            r.verdicts.push(s.verdict.to_string());
            if s.chsh3_class {
                r.verdicts.push("CHSH-3 class: the almost-quantum bound is not tight here".into());
            }
            for w in &s.warnings {
                r.verdicts.push(format!("warning: {w}"));
            }
            if let Some(st) = s.status.filter(|st| *st != SdpStatus::Optimal) {
                r.verdicts.push(format!("solver status {st}"));
                code = 4;
            }
        }
        Command::Survey(args) => return survey::run(args, cli.format),
        Command::SdpDump { file, kind, out } => {
            let g = load(file)?;
            let s = dump(&g, *kind, out.as_deref())?;
            if !s.is_empty() {
                r.lines.push(s.trim_end().into());
            }
        }
    }
    Ok((r, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, code)) => {
            print!("{}", report.render(cli.format, cli.precision));
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
