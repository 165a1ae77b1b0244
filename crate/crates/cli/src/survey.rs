use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::ValueEnum;
use serde_json::json;
use xord_core::survey::{
    check_budget, plan_survey, run_plan, GraphFilter, GraphSource, LabelingMode, SurveyRow, SurveySpec, ValueSet,
    DEFAULT_SDP_BUDGET, TSV_HEADER,
};

use crate::fmt::{Format, Num, Report};
use crate::{load, Fail};

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    /// Every edge carries `--color`.
    SingleColor,
    /// Every edge ranges over L_d.
    All,
    /// Every edge is gray or ranges over L_d.
    Gray,
}

#[derive(clap::Args)]
pub struct Args {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, value_enum, default_value = "single-color")]
    mode: Mode,
    /// Color index in L_d for single-color mode.
    #[arg(long, default_value_t = 1)]
    color: usize,
    /// Values to compute besides the classical ones: aq, theta.
    #[arg(long, value_delimiter = ',', default_value = "classical,aq")]
    values: Vec<String>,
    /// Use the edge sets of these game files instead of enumerating graphs.
    #[arg(long, num_args = 1..)]
    games: Vec<PathBuf>,
    /// Keep only bipartite graphs and play them as two-party games.
    #[arg(long)]
    bipartite: bool,
    #[arg(long)]
    complete_bipartite: bool,
    #[arg(long, default_value_t = 2)]
    min_degree: usize,
    #[arg(long)]
    allow_disconnected: bool,
    /// TSV output; rows are appended as they finish, then rewritten sorted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Existing TSV whose rows are kept rather than recomputed.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SDP_BUDGET)]
    sdp_budget: usize,
    /// Run even when the planned SDP solves exceed the budget.
    #[arg(long)]
    force: bool,
}

fn io_fail(p: &Path, e: std::io::Error) -> Fail {
    Fail::new(1, format!("{}: {e}", p.display()))
}

fn value_set(names: &[String]) -> Result<ValueSet, Fail> {
    let mut v = ValueSet { almost_quantum: false, theta: false };
    for name in names {
        match name.as_str() {
            "classical" => {}
            "aq" => v.almost_quantum = true,
            "theta" => v.theta = true,
            other => return Err(Fail::new(2, format!("unknown value '{other}' (expected classical, aq, theta)"))),
        }
    }
    Ok(v)
}

fn read_rows(p: &Path) -> Result<Vec<SurveyRow>, Fail> {
    let src = std::fs::read_to_string(p).map_err(|e| io_fail(p, e))?;
    let mut rows = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.is_empty() || line == TSV_HEADER {
            continue;
        }
        let row = SurveyRow::from_tsv(line).map_err(|e| Fail::new(2, format!("{}:{}: {e}", p.display(), i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

fn spec(args: &Args) -> Result<SurveySpec, Fail> {
    let source = if !args.games.is_empty() {
        let games = args.games.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
        GraphSource::Fixed(games)
    } else if !args.n.is_empty() {
        let filter = GraphFilter {
            connected: !args.allow_disconnected,
            min_degree: args.min_degree,
            bipartite: args.bipartite,
            complete_bipartite: args.complete_bipartite,
        };
        GraphSource::Enumerate { n_values: args.n.clone(), filter }
    } else {
        return Err(Fail::new(2, "survey needs --n or --games"));
    };
    let mode = match args.mode {
        Mode::SingleColor => LabelingMode::SingleColor(args.color),
        Mode::All => LabelingMode::AllLd,
        Mode::Gray => LabelingMode::WithGray,
    };
    Ok(SurveySpec {
        source,
        d: args.d,
        mode,
        values: value_set(&args.values)?,
        sdp_budget: args.sdp_budget,
        force: args.force,
    })
}

pub fn run(args: &Args, format: Format) -> Result<(Report, u8), Fail> {
    let spec = spec(args)?;
    let done = match &args.resume {
        Some(p) => read_rows(p)?,
        None => Vec::new(),
    };
    let plan = plan_survey(&spec).map_err(|e| Fail::core(e, None))?;
    check_budget(&spec, &plan).map_err(|e| Fail::core(e, None))?;

    let out = args.out.clone().or_else(|| args.resume.clone());
    let sink = match &out {
        Some(p) => {
            let fresh = !p.exists() || std::fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
            let f = OpenOptions::new().create(true).append(true).open(p).map_err(|e| io_fail(p, e))?;
            let mut w = BufWriter::new(f);
            if fresh {
                writeln!(w, "{TSV_HEADER}").map_err(|e| io_fail(p, e))?;
            }
            Some(Mutex::new(w))
        }
        None => None,
    };
    let result = run_plan(&plan, &spec.values, &done, &|row| {
        if let Some(w) = &sink {
            let mut w = w.lock().unwrap();
            // A failed append only costs a recomputation on resume.
            let _ = writeln!(w, "{}", row.to_tsv()).and_then(|_| w.flush());
        }
    });
    drop(sink);

    let mut tsv = format!("{TSV_HEADER}\n");
    for row in &result.rows {
        tsv.push_str(&row.to_tsv());
        tsv.push('\n');
    }
    let mut r = Report::default();
    match &out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| io_fail(p, e))?);
            f.write_all(tsv.as_bytes()).and_then(|_| f.flush()).map_err(|e| io_fail(p, e))?;
        }
        None if format != Format::Json => r.lines.push(tsv.trim_end().into()),
        None => {}
    }
    let s = &result.summary;
    if out.is_some() || format == Format::Json {
        r.value("rows", Num::Int(s.rows as i64));
        r.value("nonclassical", Num::Int(s.nonclassical as i64));
        r.value("theta_certified", Num::Int(s.theta_certified as i64));
        r.value("failed", Num::Int(s.failed as i64));
        r.value("graphs", Num::Int(plan.graphs as i64));
        r.value("labelings", Num::Int(s.labelings as i64));
        for (g, k) in &s.gap_histogram {
            r.lines.push(format!("gap {g} x{k}"));
        }
        for (b, k) in &s.beta_census {
            r.lines.push(format!("beta_c={b} labelings {k}"));
        }
        let gaps: HashMap<&String, &usize> = s.gap_histogram.iter().collect();
        r.extra.insert("gap_histogram".into(), json!(gaps));
        let census: HashMap<String, u64> = s.beta_census.iter().map(|(b, k)| (b.to_string(), *k)).collect();
        r.extra.insert("beta_census".into(), json!(census));
        if format == Format::Json && out.is_none() {
            r.extra.insert("rows".into(), json!(result.rows.iter().map(|r| r.to_tsv()).collect::<Vec<_>>()));
        }
    }
    let code = if s.failed > 0 { 4 } else { 0 };
    Ok((r, code))
}
