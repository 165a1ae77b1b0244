use serde_json::{json, Map, Value};
use xord_core::{EdgeLabel, LabeledGameGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Tsv,
    Json,
}

/// `%g`-style formatting with `p` significant digits.
pub fn sig(x: f64, p: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let p = p.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -5 || exp >= p as i32 {
        let mant = trim(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug)]
pub enum Num {
    Int(i64),
    Real(f64),
}

impl Num {
    fn text(&self, p: usize) -> String {
        match self {
            Num::Int(i) => i.to_string(),
            Num::Real(x) => sig(*x, p),
        }
    }

    /// The JSON value carries exactly the digits shown in text.
    fn json(&self, p: usize) -> Value {
        match self {
            Num::Int(i) => json!(i),
            Num::Real(x) => json!(self.text(p).parse::<f64>().unwrap_or(*x)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solver {
    pub gap: f64,
    pub iters: usize,
    pub status: String,
}

/// What a verb prints. Text shows `values` as `key=value` pairs on one line,
/// then the solver line, verdicts and free-form lines.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub game: Option<Value>,
    pub values: Vec<(String, Num)>,
    pub solver: Option<Solver>,
    pub verdicts: Vec<String>,
    pub lines: Vec<String>,
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn value(&mut self, key: &str, v: Num) -> &mut Self {
        self.values.push((key.into(), v));
        self
    }

    pub fn render(&self, format: Format, p: usize) -> String {
        match format {
            Format::Text => self.text(p),
            Format::Tsv => self.tsv(p),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json(p)).unwrap();
                s.push('\n');
                s
            }
        }
    }

    fn text(&self, p: usize) -> String {
        let mut out = String::new();
        let mut head: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={}", v.text(p))).collect();
        if let Some(s) = &self.solver {
            head.push(format!("gap={}", sig(s.gap, p)));
        }
        if !head.is_empty() {
            out.push_str(&head.join(" "));
            out.push('\n');
        }
        if let Some(s) = &self.solver {
            out.push_str(&format!("status={} iterations={}\n", s.status, s.iters));
        }
        for l in self.verdicts.iter().chain(&self.lines) {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    fn tsv(&self, p: usize) -> String {
        let mut keys: Vec<String> = self.values.iter().map(|(k, _)| k.clone()).collect();
        let mut row: Vec<String> = self.values.iter().map(|(_, v)| v.text(p)).collect();
        if let Some(s) = &self.solver {
            keys.extend(["gap".into(), "iterations".into(), "status".into()]);
            row.extend([sig(s.gap, p), s.iters.to_string(), s.status.clone()]);
        }
        if !self.verdicts.is_empty() {
            keys.push("verdicts".into());
            row.push(self.verdicts.join("; "));
        }
        let mut out = String::new();
        if !keys.is_empty() {
            out = format!("{}\n{}\n", keys.join("\t"), row.join("\t"));
        }
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    pub fn json(&self, p: usize) -> Value {
        let mut top = Map::new();
        if let Some(g) = &self.game {
            top.insert("game".into(), g.clone());
        }
        let values: Map<String, Value> = self.values.iter().map(|(k, v)| (k.clone(), v.json(p))).collect();
        top.insert("values".into(), Value::Object(values));
        if let Some(s) = &self.solver {
            let gap = sig(s.gap, p).parse::<f64>().unwrap_or(s.gap);
            top.insert("solver".into(), json!({ "gap": gap, "iters": s.iters, "status": s.status }));
        }
        top.insert("verdicts".into(), json!(self.verdicts));
        for (k, v) in &self.extra {
            top.insert(k.clone(), v.clone());
        }
        Value::Object(top)
    }
}

pub fn game_json(g: &LabeledGameGraph) -> Value {
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .map(|e| match e.label {
            EdgeLabel::Colored(c) => json!([e.u, e.v, c]),
            EdgeLabel::Gray => json!([e.u, e.v, "gray"]),
        })
        .collect();
    json!({
        "n": g.n(),
        "d": g.d(),
        "alice": g.contiguous_split(),
        "bipartite": g.is_bipartite_game(),
        "colored_edges": g.colored_edge_count(),
        "edges": edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(sig(3.414213562, 6), "3.41421");
        assert_eq!(sig(3.0e-8, 6), "3e-08");
        assert_eq!(sig(0.8, 6), "0.8");
        assert_eq!(sig(6.25, 6), "6.25");
        assert_eq!(sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(sig(-0.000123456, 3), "-0.000123");
        assert_eq!(sig(4.0, 6), "4");
        assert_eq!(sig(0.0, 6), "0");
    }

    #[test]
    fn json_matches_text() {
        let mut r = Report::default();
        r.value("x", Num::Real(std::f64::consts::PI));
        let text = r.render(Format::Text, 6);
        let j = r.json(6);
        let shown: f64 = text.trim().strip_prefix("x=").unwrap().parse().unwrap();
        assert!((j["values"]["x"].as_f64().unwrap() - shown).abs() < 1e-12);
    }
}
