//! Line-oriented text format for graph descriptions:
//!
//! ```text
//! # comment
//! axis a
//! edge e a a
//! ray r attach a period 1,0,2
//! ```
//!
//! `edge` joins two declared axes (a loop when they coincide); `ray` hangs a
//! periodic ray off a declared axis, the period listing loop counts.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::bigraph::UndirectedMultigraph;
use crate::ends::{GraphDescription, RayAttachment};
use crate::reduce::RoseTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown axis {name}, line {line}")]
    UnknownAxis { name: String, line: usize },
    #[error("duplicate name {name}, line {line}")]
    Duplicate { name: String, line: usize },
    #[error("empty period, line {line}")]
    EmptyPeriod { line: usize },
    #[error("non-numeric loop count {value}, line {line}")]
    BadLoopCount { value: String, line: usize },
    #[error("unknown keyword {word}, line {line}")]
    UnknownKeyword { word: String, line: usize },
    #[error("malformed {keyword} declaration, line {line}")]
    Malformed { keyword: &'static str, line: usize },
    #[error("no axes declared")]
    Empty,
}

pub fn parse(text: &str) -> Result<GraphDescription, ParseError> {
    let mut base = UndirectedMultigraph::new();
    let mut rays: Vec<RayAttachment> = Vec::new();
    let mut ray_names = BTreeSet::new();
    let axis = |base: &UndirectedMultigraph, name: &str, line: usize| {
        base.vertex_index(name).ok_or_else(|| ParseError::UnknownAxis { name: name.to_string(), line })
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["axis", name] => {
                base.add_vertex(*name).map_err(|_| ParseError::Duplicate { name: name.to_string(), line })?;
            }
            ["axis", ..] => return Err(ParseError::Malformed { keyword: "axis", line }),
            ["edge", name, a, b] => {
                let (a, b) = (axis(&base, a, line)?, axis(&base, b, line)?);
                if base.has_link_named(name) {
                    return Err(ParseError::Duplicate { name: name.to_string(), line });
                }
                base.add_link(*name, a, b).expect("axes checked");
            }
            ["edge", ..] => return Err(ParseError::Malformed { keyword: "edge", line }),
            ["ray", name, "attach", at, "period", period] => {
                let attach = axis(&base, at, line)?;
                if !ray_names.insert(name.to_string()) {
                    return Err(ParseError::Duplicate { name: name.to_string(), line });
                }
                let loops = period
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<u32>().map_err(|_| ParseError::BadLoopCount { value: s.to_string(), line }))
                    .collect::<Result<Vec<_>, _>>()?;
                if loops.is_empty() {
                    return Err(ParseError::EmptyPeriod { line });
                }
                rays.push(RayAttachment::new(*name, attach, &loops));
            }
            ["ray", _, "attach", _, "period"] => return Err(ParseError::EmptyPeriod { line }),
            ["ray", ..] => return Err(ParseError::Malformed { keyword: "ray", line }),
            [word, ..] => return Err(ParseError::UnknownKeyword { word: word.to_string(), line }),
        }
    }
    if base.vertices().is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(if rays.is_empty() { GraphDescription::Finite(base) } else { GraphDescription::RayExtended { base, rays } })
}

pub fn emit(desc: &GraphDescription) -> String {
    let base = desc.base();
    let mut out = String::new();
    for v in base.vertices() {
        writeln!(out, "axis {v}").expect("string write");
    }
    for l in base.links() {
        writeln!(out, "edge {} {} {}", l.name, base.vertices()[l.ends.0], base.vertices()[l.ends.1])
            .expect("string write");
    }
    for r in desc.rays() {
        let period: Vec<String> = r.period.iter().map(|s| s.loops.to_string()).collect();
        writeln!(out, "ray {} attach {} period {}", r.name, base.vertices()[r.attach], period.join(","))
            .expect("string write");
    }
    out
}

/// A rose-tree as a description: core axes joined by tree links `t{i}`,
/// petals `p{i}.{j}`, tails as rays.
pub fn rose_description(r: &RoseTree) -> GraphDescription {
    let mut base = UndirectedMultigraph::new();
    for a in r.axes() {
        let mut name = a.label.clone();
        let mut n = 1;
        while base.vertex_index(&name).is_some() {
            name = format!("{}~{n}", a.label);
            n += 1;
        }
        base.add_vertex(name).expect("fresh name");
    }
    for (i, a) in r.axes().iter().enumerate() {
        if let Some(p) = a.parent {
            base.add_link(format!("t{i}"), p, i).expect("axes exist");
        }
        for j in 0..a.loops {
            base.add_link(format!("p{i}.{j}"), i, i).expect("axes exist");
        }
    }
    let mut names = BTreeSet::new();
    let rays: Vec<RayAttachment> = r
        .tails()
        .iter()
        .map(|t| {
            let mut name = t.label.clone();
            let mut n = 1;
            while !names.insert(name.clone()) {
                name = format!("{}~{n}", t.label);
                n += 1;
            }
            let loops: Vec<u32> = t.template.iter().map(|&x| x as u32).collect();
            RayAttachment::new(name, t.attach, &loops)
        })
        .collect();
    if rays.is_empty() {
        GraphDescription::Finite(base)
    } else {
        GraphDescription::RayExtended { base, rays }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let d = parse("axis a\nedge e a a").unwrap();
        assert!(matches!(&d, GraphDescription::Finite(g) if g.links().len() == 1 && g.links()[0].is_loop()));
        let d = parse("axis a\nray r attach a period 1").unwrap();
        assert_eq!(d.rays()[0].period.len(), 1);
        assert_eq!(d.rays()[0].period[0].loops, 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse("edge e a b").unwrap_err().to_string(), "unknown axis a, line 1");
        assert_eq!(parse("axis a\naxis a").unwrap_err().to_string(), "duplicate name a, line 2");
        assert_eq!(parse("axis a\nedge e a a\nedge e a a").unwrap_err().to_string(), "duplicate name e, line 3");
        assert_eq!(parse("axis a\nray r attach a period").unwrap_err().to_string(), "empty period, line 2");
        assert_eq!(parse("axis a\nray r attach a period ,").unwrap_err().to_string(), "empty period, line 2");
        assert_eq!(
            parse("axis a\n\nray r attach a period 1,x").unwrap_err().to_string(),
            "non-numeric loop count x, line 3"
        );
        assert_eq!(parse("vertex a").unwrap_err().to_string(), "unknown keyword vertex, line 1");
        assert_eq!(parse("# nothing\n").unwrap_err(), ParseError::Empty);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let d = parse("# rose\naxis a   # the only axis\n\nedge x a a\n").unwrap();
        assert_eq!(d.base().links().len(), 1);
    }

    #[test]
    fn emit_round_trips() {
        let text = "axis a\naxis b\nedge x a b\nedge y b b\nray r attach b period 1,0,2\nray s attach a period 0\n";
        let d = parse(text).unwrap();
        assert_eq!(emit(&d), text);
        assert_eq!(parse(&emit(&d)).unwrap(), d);
    }
}
