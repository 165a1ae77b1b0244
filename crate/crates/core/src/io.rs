//! Text format for games.
//!
//! ```text
//! xordgame <d> <n>
//! bipartite <k>          # optional: Alice = 0..k, Bob = k..n
//! edge <u> <v> <c>       # c indexes L_d
//! edge <u> <v> gray
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{EdgeLabel, LabeledGameGraph};

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let content = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &content[s..i], col: content[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &content[s..], col: content[..s].chars().count() + 1 });
    }
    out
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

fn number(t: &Token<'_>, line: usize, what: &str) -> Result<usize> {
    t.text.parse().map_err(|_| err(line, t.col, format!("expected {what}, found '{}'", t.text)))
}

pub fn parse_game(src: &str) -> Result<LabeledGameGraph> {
    let mut game: Option<LabeledGameGraph> = None;
    let mut seen_edge = false;
    let mut last_line = 0;
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokens(raw);
        let Some(head) = toks.first() else { continue };
        let end_col = raw.split('#').next().unwrap_or("").trim_end().chars().count() + 1;
        let arg = |i: usize, what: &str| -> Result<&Token<'_>> {
            toks.get(i).ok_or_else(|| err(line, end_col, format!("missing {what}")))
        };
        let no_extra = |k: usize| -> Result<()> {
            match toks.get(k) {
                Some(t) => Err(err(line, t.col, format!("unexpected token '{}'", t.text))),
                None => Ok(()),
            }
        };
        match (head.text, game.as_mut()) {
            ("xordgame", None) => {
                let d = number(arg(1, "outcome count d")?, line, "outcome count d")?;
                let n = number(arg(2, "vertex count n")?, line, "vertex count n")?;
                no_extra(3)?;
                if d == 0 {
                    return Err(err(line, toks[1].col, "d must be positive"));
                }
                game = Some(LabeledGameGraph::new(n, d).map_err(|e| err(line, 1, e.to_string()))?);
            }
            ("xordgame", Some(_)) => return Err(err(line, head.col, "duplicate header")),
            (_, None) => return Err(err(line, head.col, "expected header 'xordgame <d> <n>'")),
            ("bipartite", Some(g)) => {
                if seen_edge {
                    return Err(err(line, head.col, "'bipartite' must precede all edges"));
                }
                if g.is_bipartite_game() {
                    return Err(err(line, head.col, "duplicate 'bipartite' line"));
                }
                let t = arg(1, "split index k")?;
                let k = number(t, line, "split index k")?;
                no_extra(2)?;
                *g = LabeledGameGraph::new_bipartite(g.n(), g.d(), k).map_err(|e| err(line, t.col, e.to_string()))?;
            }
            ("edge", Some(g)) => {
                seen_edge = true;
                let tu = arg(1, "vertex u")?;
                let tv = arg(2, "vertex v")?;
                let tc = arg(3, "color or 'gray'")?;
                no_extra(4)?;
                let u = number(tu, line, "vertex u")?;
                let v = number(tv, line, "vertex v")?;
                for (x, t) in [(u, tu), (v, tv)] {
                    if x >= g.n() {
                        return Err(err(line, t.col, format!("vertex {x} out of range 0..{}", g.n())));
                    }
                }
                if u == v {
                    return Err(err(line, tv.col, format!("loop at vertex {u}")));
                }
                let label = if tc.text == "gray" {
                    EdgeLabel::Gray
                } else {
                    let c = number(tc, line, "color or 'gray'")?;
                    if c >= g.d() {
                        return Err(err(line, tc.col, format!("color {c} out of range 0..{}", g.d())));
                    }
                    EdgeLabel::Colored(c)
                };
                g.add_edge(u, v, label).map_err(|e| err(line, head.col, e.to_string()))?;
            }
            (other, Some(_)) => return Err(err(line, head.col, format!("unknown record '{other}'"))),
        }
    }
    game.ok_or_else(|| err(last_line.max(1), 1, "missing header 'xordgame <d> <n>'"))
}

pub fn write_game(g: &LabeledGameGraph) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "xordgame {} {}", g.d(), g.n()).unwrap();
    if g.is_bipartite_game() {
        let k = g
            .contiguous_split()
            .ok_or_else(|| Error::InvalidArgument("bipartition is not of the form 0..k / k..n".into()))?;
        writeln!(s, "bipartite {k}").unwrap();
    }
    for e in g.edges() {
        match e.label {
            EdgeLabel::Colored(c) => writeln!(s, "edge {} {} {c}", e.u, e.v).unwrap(),
            EdgeLabel::Gray => writeln!(s, "edge {} {} gray", e.u, e.v).unwrap(),
        }
    }
    Ok(s)
}
