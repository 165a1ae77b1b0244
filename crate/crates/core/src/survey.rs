//! Bulk enumeration of graphs and labelings, and value tables over them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use xord_sdp::SdpStatus;

use crate::canon::{canonical_labeling, TypedGraph};
use crate::classical::classical_value;
use crate::equivalence::{CanonicalForm, Canonizer};
use crate::error::{Error, Result};
use crate::game::{EdgeLabel, LabeledGameGraph};
use crate::quantum::{almost_quantum_value, is_chsh3_class, theta_upper_bound};

pub const MAX_GRAPH_VERTICES: usize = 8;
/// Ceiling on labelings visited per graph.
pub const LABELING_BUDGET: u64 = 1 << 22;
/// SDP solves allowed without an override.
pub const DEFAULT_SDP_BUDGET: usize = 5000;

/// Margin above γ_C for a row to count as nonclassical.
pub const NONCLASSICAL_TOL: f64 = 1e-4;
/// Agreement of θ_w with γ_C that certifies a classical quantum value.
pub const THETA_CERT_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GraphFilter {
    pub connected: bool,
    pub min_degree: usize,
    pub bipartite: bool,
    pub complete_bipartite: bool,
}

impl GraphFilter {
    /// Connected with every degree at least two.
    pub fn standard() -> Self {
        Self { connected: true, min_degree: 2, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || crate::game::components(self.n, self.edges.iter().copied()).iter().all(|&c| c == 0)
    }

    /// Two-coloring with the least vertex of each component on side `false`.
    pub fn two_coloring(&self) -> Option<Vec<bool>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        for s in 0..self.n {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                let su = side[u].unwrap();
                for &v in &adj[u] {
                    match side[v] {
                        None => {
                            side[v] = Some(!su);
                            stack.push(v);
                        }
                        Some(sv) if sv == su => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(Option::unwrap).collect())
    }

    fn accepts(&self, f: &GraphFilter) -> bool {
        if f.connected && !self.is_connected() {
            return false;
        }
        if self.degrees().into_iter().any(|x| x < f.min_degree) {
            return false;
        }
        if f.bipartite || f.complete_bipartite {
            let Some(side) = self.two_coloring() else { return false };
            if f.complete_bipartite {
                let a = side.iter().filter(|&&s| !s).count();
                if !self.is_connected() || self.edges.len() != a * (self.n - a) {
                    return false;
                }
            }
        }
        true
    }
}

fn graph_certificate(n: usize, edges: &[(usize, usize)]) -> Result<(Vec<u8>, Vec<(usize, usize)>)> {
    let tg = TypedGraph::from_edges(n, edges)?;
    let c = canonical_labeling(&tg)?;
    let rep = tg.relabel(&c.order).edges().into_iter().map(|(u, v, _)| (u, v)).collect();
    Ok((c.certificate, rep))
}

/// One graph per isomorphism class on `n` vertices passing `filter`,
/// ordered by edge count and then by canonical certificate.
pub fn enum_graphs(n: usize, filter: &GraphFilter) -> Result<Vec<SimpleGraph>> {
    if n > MAX_GRAPH_VERTICES {
        return Err(Error::ResourceLimit(format!("graph enumeration is limited to n ≤ {MAX_GRAPH_VERTICES}")));
    }
    let mut all = Vec::new();
    let mut level: BTreeMap<Vec<u8>, Vec<(usize, usize)>> = BTreeMap::new();
    let (cert, rep) = graph_certificate(n, &[])?;
    level.insert(cert, rep);
    while !level.is_empty() {
        let next: Vec<(Vec<u8>, Vec<(usize, usize)>)> = level
            .par_iter()
            .map(|(_, edges)| -> Result<Vec<_>> {
                let present: HashSet<(usize, usize)> = edges.iter().copied().collect();
                let mut out = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if !present.contains(&(u, v)) {
                            let mut e = edges.clone();
                            e.push((u, v));
                            out.push(graph_certificate(n, &e)?);
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        all.extend(level.into_values());
        level = next.into_iter().collect();
    }
    Ok(all.into_iter().map(|edges| SimpleGraph { n, edges }).filter(|g| g.accepts(filter)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelingMode {
    /// Every edge carries the given color.
    SingleColor(usize),
    /// Every assignment of colors to edges.
    AllLd,
    /// Every edge either gray or colored, colored edges ranging over L_d.
    WithGray,
}

#[derive(Clone, Debug)]
pub struct LabelingClass {
    pub form: CanonicalForm,
    pub representative: LabeledGameGraph,
    /// Labelings of the input graph falling in this class.
    pub size: u64,
}

/// The game played on `g`: two-party along its two-coloring when `two_party`.
pub fn game_shape(g: &SimpleGraph, d: usize, two_party: bool) -> Result<LabeledGameGraph> {
    let sides = if two_party {
        Some(g.two_coloring().ok_or_else(|| Error::InvalidArgument("graph is not bipartite".into()))?)
    } else {
        None
    };
    LabeledGameGraph::with_sides(g.n, d, sides)
}

/// Equivalence classes among the labelings of `shape`'s edges, in canonical order.
pub fn enum_labelings(shape: &LabeledGameGraph, mode: LabelingMode) -> Result<Vec<LabelingClass>> {
    let d = shape.d();
    let pairs: Vec<(usize, usize)> = shape.edges().iter().map(|e| (e.u, e.v)).collect();
    let m = pairs.len() as u32;
    let per_edge = match mode {
        LabelingMode::SingleColor(c) => {
            if c >= d {
                return Err(Error::InvalidParameter(format!("color {c} out of range 0..{d}")));
            }
            1
        }
        LabelingMode::AllLd => d as u64,
        LabelingMode::WithGray => d as u64 + 1,
    };
    let total = per_edge.checked_pow(m).filter(|&t| t <= LABELING_BUDGET);
    let Some(total) = total else {
        return Err(Error::ResourceLimit(format!("{per_edge}^{m} labelings exceed the budget {LABELING_BUDGET}")));
    };
    let blank = LabeledGameGraph::with_sides(shape.n(), d, shape.sides().map(<[bool]>::to_vec))?;
    let build = |labels: &[EdgeLabel]| -> Result<LabeledGameGraph> {
        let mut g = blank.clone();
        for (&(u, v), &l) in pairs.iter().zip(labels) {
            g.add_edge(u, v, l)?;
        }
        Ok(g)
    };
    // Group labelings by gray pattern so each group shares one canonizer.
    let patterns: Vec<u64> = match mode {
        LabelingMode::WithGray => (0..1u64 << m).collect(),
        _ => vec![0],
    };
    let found: Vec<(CanonicalForm, LabeledGameGraph, u64)> = patterns
        .par_iter()
        .map(|&gray| -> Result<Vec<_>> {
            let colored: Vec<usize> = (0..m as usize).filter(|&i| gray >> i & 1 == 0).collect();
            let mut labels: Vec<EdgeLabel> =
                (0..m as usize).map(|i| if gray >> i & 1 == 1 { EdgeLabel::Gray } else { EdgeLabel::Colored(0) }).collect();
            if let LabelingMode::SingleColor(c) = mode {
                for l in labels.iter_mut() {
                    *l = EdgeLabel::Colored(c);
                }
            }
            let canon = Canonizer::new(&build(&labels)?)?;
            let count = match mode {
                LabelingMode::SingleColor(_) => 1,
                _ => (d as u64).pow(colored.len() as u32),
            };
            let mut seen: HashMap<CanonicalForm, (LabeledGameGraph, u64)> = HashMap::new();
            for code in 0..count {
                if !matches!(mode, LabelingMode::SingleColor(_)) {
                    let mut x = code;
                    for &i in &colored {
                        labels[i] = EdgeLabel::Colored((x % d as u64) as usize);
                        x /= d as u64;
                    }
                }
                let g = build(&labels)?;
                let f = canon.canonical(&g)?;
                seen.entry(f).or_insert_with(|| (g, 0)).1 += 1;
            }
            Ok(seen.into_iter().map(|(f, (g, k))| (f, g, k)).collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    debug_assert_eq!(found.iter().map(|x| x.2).sum::<u64>(), total);
    let mut classes: BTreeMap<CanonicalForm, LabelingClass> = BTreeMap::new();
    for (form, g, k) in found {
        classes
            .entry(form.clone())
            .or_insert_with(|| LabelingClass { form, representative: g, size: 0 })
            .size += k;
    }
    Ok(classes.into_values().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValueSet {
    pub almost_quantum: bool,
    pub theta: bool,
}

impl ValueSet {
    pub fn sdp_count(&self) -> usize {
        self.almost_quantum as usize + self.theta as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    /// Every graph on each vertex count passing the filter; bipartite filters
    /// make the games two-party along the two-coloring.
    Enumerate { n_values: Vec<usize>, filter: GraphFilter },
    /// The edge sets (and sides) of given games; their labels are ignored.
    Fixed(Vec<LabeledGameGraph>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurveySpec {
    pub source: GraphSource,
    pub d: usize,
    pub mode: LabelingMode,
    pub values: ValueSet,
    pub sdp_budget: usize,
    pub force: bool,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub game: LabeledGameGraph,
    pub class_size: u64,
}

#[derive(Clone, Debug)]
pub struct SurveyPlan {
    pub instances: Vec<Instance>,
    pub graphs: usize,
    pub sdp_solves: usize,
}

/// Deduplicates games by canonical form; class sizes of duplicates add up.
pub fn plan_games(games: impl IntoIterator<Item = (LabeledGameGraph, u64)>, values: &ValueSet) -> Result<SurveyPlan> {
    let mut by_id: BTreeMap<String, Instance> = BTreeMap::new();
    let mut graphs = 0;
    for (game, size) in games {
        graphs += 1;
        let id = Canonizer::new(&game)?.canonical(&game)?.to_hex();
        by_id.entry(id.clone()).or_insert_with(|| Instance { id, game, class_size: 0 }).class_size += size;
    }
    let instances: Vec<Instance> = by_id.into_values().collect();
    let sdp_solves = instances.len() * values.sdp_count();
    Ok(SurveyPlan { instances, graphs, sdp_solves })
}

pub fn plan_survey(spec: &SurveySpec) -> Result<SurveyPlan> {
    let mut shapes = Vec::new();
    match &spec.source {
        GraphSource::Enumerate { n_values, filter } => {
            let two_party = filter.bipartite || filter.complete_bipartite;
            for &n in n_values {
                for g in enum_graphs(n, filter)? {
                    let mut s = game_shape(&g, spec.d, two_party)?;
                    for &(u, v) in &g.edges {
                        s.add_edge(u, v, EdgeLabel::Colored(0))?;
                    }
                    shapes.push(s);
                }
            }
        }
        GraphSource::Fixed(games) => {
            for g in games {
                let mut s = LabeledGameGraph::with_sides(g.n(), spec.d, g.sides().map(<[bool]>::to_vec))?;
                for e in g.edges() {
                    s.add_edge(e.u, e.v, EdgeLabel::Colored(0))?;
                }
                shapes.push(s);
            }
        }
    }
    let mut games = Vec::new();
    for s in &shapes {
        for c in enum_labelings(s, spec.mode)? {
            games.push((c.representative, c.size));
        }
    }
    let mut plan = plan_games(games, &spec.values)?;
    plan.graphs = shapes.len();
    Ok(plan)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurveyRow {
    pub canonical_id: String,
    pub n: usize,
    pub edges: usize,
    pub bipartite: bool,
    pub beta_c: Option<usize>,
    pub gamma_c: Option<usize>,
    pub gamma_aq: Option<f64>,
    pub theta: Option<f64>,
    pub flags: Vec<String>,
}

pub const TSV_HEADER: &str = "canonical_id\tn\tedges\tbipartite\tbeta_c\tgamma_c\tgamma_aq\ttheta\tflags";

fn cell<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

impl SurveyRow {
    pub fn nonclassical(&self) -> bool {
        matches!((self.gamma_aq, self.gamma_c), (Some(q), Some(c)) if q > c as f64 + NONCLASSICAL_TOL)
    }

    pub fn gap(&self) -> Option<f64> {
        Some(self.gamma_aq? - self.gamma_c? as f64)
    }

    /// Values are written in shortest round-trip form.
    pub fn to_tsv(&self) -> String {
        let flags = if self.flags.is_empty() { "-".to_string() } else { self.flags.join(",") };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.canonical_id,
            self.n,
            self.edges,
            self.bipartite as u8,
            cell(&self.beta_c),
            cell(&self.gamma_c),
            cell(&self.gamma_aq),
            cell(&self.theta),
            flags
        )
    }

    pub fn from_tsv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        let bad = |msg: &str| Error::InvalidArgument(format!("bad survey row ({msg}): {line}"));
        if f.len() != 9 {
            return Err(bad("expected 9 columns"));
        }
        fn opt<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, ()> {
            if s == "-" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| ())
            }
        }
        CanonicalForm::from_hex(f[0])?;
        Ok(Self {
            canonical_id: f[0].to_string(),
            n: f[1].parse().map_err(|_| bad("n"))?,
            edges: f[2].parse().map_err(|_| bad("edges"))?,
            bipartite: match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("bipartite")),
            },
            beta_c: opt(f[4]).map_err(|_| bad("beta_c"))?,
            gamma_c: opt(f[5]).map_err(|_| bad("gamma_c"))?,
            gamma_aq: opt(f[6]).map_err(|_| bad("gamma_aq"))?,
            theta: opt(f[7]).map_err(|_| bad("theta"))?,
            flags: if f[8] == "-" { Vec::new() } else { f[8].split(',').map(str::to_string).collect() },
        })
    }
}

fn is_complete(g: &LabeledGameGraph) -> bool {
    g.edges().len() == g.n() * g.n().saturating_sub(1) / 2
}

/// All requested values of one game; failures become flags.
pub fn survey_row(id: &str, g: &LabeledGameGraph, values: &ValueSet) -> SurveyRow {
    let mut row = SurveyRow {
        canonical_id: id.to_string(),
        n: g.n(),
        edges: g.colored_edge_count(),
        bipartite: g.is_bipartite_game(),
        beta_c: None,
        gamma_c: None,
        gamma_aq: None,
        theta: None,
        flags: Vec::new(),
    };
    match classical_value(g) {
        Ok(c) => {
            row.beta_c = Some(c.beta_c);
            row.gamma_c = Some(c.gamma_c);
        }
        Err(e) => row.flags.push(format!("classical-error:{}", flag_text(&e))),
    }
    let solver_flag = |name: &str, st: SdpStatus, flags: &mut Vec<String>| {
        if st != SdpStatus::Optimal {
            flags.push(format!("{name}-{st}"));
        }
    };
    if values.almost_quantum {
        match almost_quantum_value(g) {
            Ok(r) => {
                row.gamma_aq = Some(r.value);
                solver_flag("aq", r.status, &mut row.flags);
            }
            Err(e) => row.flags.push(format!("aq-error:{}", flag_text(&e))),
        }
    }
    if values.theta {
        match theta_upper_bound(g) {
            Ok(r) => {
                row.theta = Some(r.value);
                solver_flag("theta", r.status, &mut row.flags);
            }
            Err(e) => row.flags.push(format!("theta-error:{}", flag_text(&e))),
        }
    }
    if row.nonclassical() {
        row.flags.push("nonclassical".into());
    }
    if let (Some(t), Some(c)) = (row.theta, row.gamma_c) {
        if (t - c as f64).abs() <= THETA_CERT_TOL {
            row.flags.push("theta-certified".into());
        }
    }
    if !g.is_bipartite_game() && g.gray_edge_count() == 0 && is_complete(g) {
        row.flags.push("complete-graph".into());
    }
    if is_chsh3_class(g).unwrap_or(false) {
        row.flags.push("chsh3".into());
    }
    row
}

fn flag_text(e: &Error) -> String {
    match e {
        Error::ResourceLimit(_) => "resource-limit".into(),
        Error::Solver(_) => "solver".into(),
        _ => "invalid".into(),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurveySummary {
    pub rows: usize,
    pub nonclassical: usize,
    /// γ_{3/2} − γ_C of nonclassical rows, rounded to 10⁻³.
    pub gap_histogram: BTreeMap<String, usize>,
    pub theta_certified: usize,
    pub failed: usize,
    /// Labelings per β_C, weighted by class size.
    pub beta_census: BTreeMap<usize, u64>,
    pub labelings: u64,
}

impl SurveySummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "rows {}", self.rows).unwrap();
        writeln!(s, "nonclassical {}", self.nonclassical).unwrap();
        for (g, k) in &self.gap_histogram {
            writeln!(s, "gap {g} x{k}").unwrap();
        }
        writeln!(s, "theta-certified {}", self.theta_certified).unwrap();
        writeln!(s, "failed {}", self.failed).unwrap();
        for (b, k) in &self.beta_census {
            let pct = 100.0 * *k as f64 / self.labelings.max(1) as f64;
            writeln!(s, "beta_c={b} labelings {k} ({pct:.2}%)").unwrap();
        }
        s
    }
}

pub fn summarize(rows: &[SurveyRow], class_sizes: &HashMap<String, u64>) -> SurveySummary {
    let mut s = SurveySummary { rows: rows.len(), ..Default::default() };
    for r in rows {
        if r.nonclassical() {
            s.nonclassical += 1;
            *s.gap_histogram.entry(format!("{:.3}", r.gap().unwrap())).or_default() += 1;
        }
        if r.flags.iter().any(|f| f == "theta-certified") {
            s.theta_certified += 1;
        }
        if r.flags.iter().any(|f| f.contains("error") || f.ends_with("max-iterations") || f.ends_with("infeasible")) {
            s.failed += 1;
        }
        if let Some(b) = r.beta_c {
            let k = class_sizes.get(&r.canonical_id).copied().unwrap_or(1);
            *s.beta_census.entry(b).or_default() += k;
            s.labelings += k;
        }
    }
    s
}

#[derive(Clone, Debug)]
pub struct SurveyResult {
    /// Sorted by canonical id.
    pub rows: Vec<SurveyRow>,
    pub summary: SurveySummary,
}

/// Computes rows for every planned instance not already in `done`, calling
/// `sink` as each finishes. Output is ordered by canonical id.
pub fn run_plan(
    plan: &SurveyPlan,
    values: &ValueSet,
    done: &[SurveyRow],
    sink: &(dyn Fn(&SurveyRow) + Sync),
) -> SurveyResult {
    let have: HashMap<&str, &SurveyRow> = done.iter().map(|r| (r.canonical_id.as_str(), r)).collect();
    let fresh: Vec<SurveyRow> = plan
        .instances
        .par_iter()
        .filter(|i| !have.contains_key(i.id.as_str()))
        .map(|i| {
            let r = survey_row(&i.id, &i.game, values);
            sink(&r);
            r
        })
        .collect();
    let mut rows: Vec<SurveyRow> =
        plan.instances.iter().filter_map(|i| have.get(i.id.as_str()).map(|r| (*r).clone())).collect();
    rows.extend(fresh);
    rows.sort_by(|a, b| a.canonical_id.cmp(&b.canonical_id));
    let sizes: HashMap<String, u64> = plan.instances.iter().map(|i| (i.id.clone(), i.class_size)).collect();
    let summary = summarize(&rows, &sizes);
    SurveyResult { rows, summary }
}

pub fn check_budget(spec: &SurveySpec, plan: &SurveyPlan) -> Result<()> {
    if plan.sdp_solves > spec.sdp_budget && !spec.force {
        return Err(Error::ResourceLimit(format!(
            "{} SDP solves planned, budget {}; pass an override to proceed",
            plan.sdp_solves, spec.sdp_budget
        )));
    }
    Ok(())
}

pub fn run_survey(spec: &SurveySpec) -> Result<SurveyResult> {
    let plan = plan_survey(spec)?;
    check_budget(spec, &plan)?;
    Ok(run_plan(&plan, &spec.values, &[], &|_| {}))
}
