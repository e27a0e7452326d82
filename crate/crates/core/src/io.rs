//! Text formats for instances and routings, with line-accurate diagnostics.
//!
//! Instance: `ndpgrid v1` / optional `graph wall` / `side <l>` / `pairs <k>`
//! followed by k lines `s_row s_col t_row t_col`. Routing: `routing v1`, then
//! per routed pair `pair <index> len <m>` followed by m lines `row col`.

use crate::grid::{Coord, GridInstance, GridPath, Routing};
use std::fmt::Write as _;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    At { line: usize, message: String },
    #[error("unexpected end of input at line {0}")]
    Eof(usize),
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::At {
        line,
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Grid,
    Wall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedInstance {
    pub kind: GraphKind,
    pub instance: GridInstance,
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.iter.by_ref() {
            let t = raw.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }
}

fn parse_u32(line: usize, token: &str, what: &str) -> Result<u32, ParseError> {
    token.parse().map_err(|_| ParseError::At {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

/// Strict parse of the instance format.
pub fn parse_instance(text: &str) -> Result<ParsedInstance, ParseError> {
    let mut lines = Lines::new(text);
    let (l1, header) = lines.next().ok_or(ParseError::Eof(1))?;
    if header != "ndpgrid v1" {
        return err(
            l1,
            format!("malformed header `{header}`, expected `ndpgrid v1`"),
        );
    }
    let (mut line, mut cur) = lines.next().ok_or(ParseError::Eof(l1 + 1))?;
    let kind = if cur == "graph wall" {
        let nxt = lines.next().ok_or(ParseError::Eof(line + 1))?;
        line = nxt.0;
        cur = nxt.1;
        GraphKind::Wall
    } else {
        GraphKind::Grid
    };
    let side = match cur.strip_prefix("side ") {
        Some(rest) => parse_u32(line, rest.trim(), "side")?,
        None => return err(line, format!("expected `side <l>`, got `{cur}`")),
    };
    if side < 2 {
        return err(line, format!("side must be at least 2, got {side}"));
    }
    if kind == GraphKind::Wall && side % 2 != 0 {
        return err(
            line,
            format!("wall instances need an even side, got {side}"),
        );
    }
    let (line_k, krow) = lines.next().ok_or(ParseError::Eof(line + 1))?;
    let k = match krow.strip_prefix("pairs ") {
        Some(rest) => parse_u32(line_k, rest.trim(), "pair count")? as usize,
        None => return err(line_k, format!("expected `pairs <k>`, got `{krow}`")),
    };
    let mut pairs = Vec::with_capacity(k);
    let mut last = line_k;
    for i in 0..k {
        let Some((ln, row)) = lines.next() else {
            return err(last + 1, format!("count mismatch at line {}", last + 1));
        };
        last = ln;
        let nums: Vec<&str> = row.split_whitespace().collect();
        if nums.len() != 4 {
            return err(
                ln,
                format!("pair {i}: expected 4 numbers, got {}", nums.len()),
            );
        }
        let vals: Vec<u32> = nums
            .iter()
            .map(|t| parse_u32(ln, t, "coordinate"))
            .collect::<Result<_, _>>()?;
        for (j, &v) in vals.iter().enumerate() {
            if v < 1 || v > side {
                return err(
                    ln,
                    format!("pair {i}: coordinate {} out of range 1..{side}", nums[j]),
                );
            }
        }
        pairs.push((Coord::new(vals[0], vals[1]), Coord::new(vals[2], vals[3])));
    }
    if let Some((ln, extra)) = lines.next() {
        return err(ln, format!("unexpected trailing content `{extra}`"));
    }
    let instance = GridInstance::new(side, pairs, 0).map_err(|e| ParseError::At {
        line: l1,
        message: e.to_string(),
    })?;
    Ok(ParsedInstance { kind, instance })
}

pub fn emit_instance(kind: GraphKind, inst: &GridInstance) -> String {
    let mut out = String::new();
    out.push_str("ndpgrid v1\n");
    if kind == GraphKind::Wall {
        out.push_str("graph wall\n");
    }
    let _ = writeln!(out, "side {}", inst.side);
    let _ = writeln!(out, "pairs {}", inst.pairs.len());
    for &(s, t) in &inst.pairs {
        let _ = writeln!(out, "{} {} {} {}", s.row, s.col, t.row, t.col);
    }
    out
}

pub fn parse_routing(text: &str) -> Result<Routing, ParseError> {
    let mut lines = Lines::new(text);
    let (l1, header) = lines.next().ok_or(ParseError::Eof(1))?;
    if header != "routing v1" {
        return err(
            l1,
            format!("malformed header `{header}`, expected `routing v1`"),
        );
    }
    let mut entries = Vec::new();
    while let Some((ln, row)) = lines.next() {
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "pair" || toks[2] != "len" {
            return err(ln, format!("expected `pair <index> len <m>`, got `{row}`"));
        }
        let index = parse_u32(ln, toks[1], "pair index")? as usize;
        let len = parse_u32(ln, toks[3], "path length")? as usize;
        let mut vertices = Vec::with_capacity(len);
        let mut last = ln;
        for _ in 0..len {
            let Some((vl, vrow)) = lines.next() else {
                return err(last + 1, format!("count mismatch at line {}", last + 1));
            };
            last = vl;
            let nums: Vec<&str> = vrow.split_whitespace().collect();
            if nums.len() != 2 {
                return err(vl, format!("expected `row col`, got `{vrow}`"));
            }
            vertices.push(Coord::new(
                parse_u32(vl, nums[0], "row")?,
                parse_u32(vl, nums[1], "col")?,
            ));
        }
        entries.push((index, GridPath::new(vertices)));
    }
    Ok(Routing::new(entries))
}

pub fn emit_routing(r: &Routing) -> String {
    let mut out = String::from("routing v1\n");
    for (i, path) in &r.entries {
        let _ = writeln!(out, "pair {} len {}", i, path.len());
        for v in &path.vertices {
            let _ = writeln!(out, "{} {}", v.row, v.col);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_roundtrip() {
        let text = "ndpgrid v1\nside 3\npairs 1\n1 1 3 3\n";
        let parsed = parse_instance(text).unwrap();
        assert_eq!(parsed.kind, GraphKind::Grid);
        assert_eq!(parsed.instance.side, 3);
        assert_eq!(emit_instance(GraphKind::Grid, &parsed.instance), text);
    }

    #[test]
    fn count_mismatch_diagnostic() {
        let text = "ndpgrid v1\nside 3\npairs 2\n1 1 3 3\n";
        match parse_instance(text) {
            Err(ParseError::At { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("count mismatch"), "{message}");
            }
            other => panic!("expected count mismatch, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_coordinate() {
        let text = "ndpgrid v1\nside 3\npairs 1\n1 1 4 3\n";
        assert!(matches!(
            parse_instance(text),
            Err(ParseError::At { line: 4, .. })
        ));
    }

    #[test]
    fn wall_header() {
        let text = "ndpgrid v1\ngraph wall\nside 4\npairs 0\n";
        let parsed = parse_instance(text).unwrap();
        assert_eq!(parsed.kind, GraphKind::Wall);
        assert_eq!(emit_instance(GraphKind::Wall, &parsed.instance), text);
    }

    #[test]
    fn routing_roundtrip() {
        let r = Routing::new(vec![(
            0,
            GridPath::new(vec![Coord::new(1, 1), Coord::new(2, 1)]),
        )]);
        let text = emit_routing(&r);
        assert_eq!(parse_routing(&text).unwrap(), r);
    }
}
