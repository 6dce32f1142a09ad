//! Plain-text file formats.
//!
//! Rationals are rendered `p/q` with the denominator always explicit;
//! the parser also accepts bare integers. One object per file:
//!
//! * valuations — header `valuations <n>`, then per agent a line
//!   `<id> <b0> <d0> <b1> <d1> ... <bk>` alternating breakpoints and
//!   densities;
//! * graph — first line `<n>`, then one `i j` edge per line, 0-indexed;
//! * allocation — one line per agent: `<id>` followed by
//!   whitespace-separated `lo..hi` interval pairs (a bare `<id>` is an
//!   empty piece);
//! * transcript — one entry per line,
//!   `EVAL <agent> <x> <y> -> <v>` or `CUT <agent> <x> <alpha> -> <y|NONE>`;
//! * adversary instance — header `n m r seed`, the `L:`/`R:`/`U:`
//!   membership lines, then one `<i>: j1 j2 ...` neighborhood line per
//!   `L` agent;
//! * verdict — `key: value` lines naming the refutation type, agent,
//!   `x`, and `epsilon`.
//!
//! Writers emit exactly what parsers read back; generate/parse round
//! trips are identity.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::adversary::{AdversaryInstance, Verdict};
use crate::cake::{Interval, Piece, Valuation};
use crate::fairness::{Allocation, SocialGraph};
use crate::protocol::{Query, QueryKind, Response, Transcript, TranscriptEntry};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("file is empty")]
    Empty,
}

fn bad(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_rat(token: &str, line: usize) -> Result<Rational, FormatError> {
    parse_rational(token).map_err(|e| bad(line, e.to_string()))
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize, FormatError> {
    token
        .parse()
        .map_err(|_| bad(line, format!("expected {what}, got {token:?}")))
}

/// Lines of a file with 1-based numbering, comments (`#`) and blank
/// lines skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

// ---------------------------------------------------------------------
// Valuations

pub fn write_valuations(valuations: &[Valuation]) -> String {
    let mut out = format!("valuations {}\n", valuations.len());
    for (id, v) in valuations.iter().enumerate() {
        write!(out, "{id}").unwrap();
        for (k, b) in v.breakpoints().iter().enumerate() {
            write!(out, " {}", format_rational(b)).unwrap();
            if k < v.densities().len() {
                write!(out, " {}", format_rational(&v.densities()[k])).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_valuations(text: &str) -> Result<Vec<Valuation>, FormatError> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or(FormatError::Empty)?;
    let mut tokens = header.split_whitespace();
    match (tokens.next(), tokens.next(), tokens.next()) {
        (Some("valuations"), Some(n), None) => {
            let n = parse_usize(n, header_no, "agent count")?;
            let mut valuations: Vec<Option<Valuation>> = vec![None; n];
            for (line_no, line) in lines {
                let mut tokens = line.split_whitespace();
                let id = parse_usize(tokens.next().unwrap(), line_no, "agent id")?;
                if id >= n {
                    return Err(bad(line_no, format!("agent id {id} out of range")));
                }
                let rest: Vec<&str> = tokens.collect();
                if rest.len() < 3 || rest.len() % 2 == 0 {
                    return Err(bad(
                        line_no,
                        "expected alternating breakpoints and densities",
                    ));
                }
                let mut breakpoints = Vec::with_capacity(rest.len() / 2 + 1);
                let mut densities = Vec::with_capacity(rest.len() / 2);
                for (k, token) in rest.iter().enumerate() {
                    let value = parse_rat(token, line_no)?;
                    if k % 2 == 0 {
                        breakpoints.push(value);
                    } else {
                        densities.push(value);
                    }
                }
                let valuation = Valuation::new(breakpoints, densities)
                    .map_err(|e| bad(line_no, e.to_string()))?;
                if valuations[id].replace(valuation).is_some() {
                    return Err(bad(line_no, format!("duplicate agent id {id}")));
                }
            }
            valuations
                .into_iter()
                .enumerate()
                .map(|(id, v)| v.ok_or_else(|| bad(0, format!("missing valuation for agent {id}"))))
                .collect()
        }
        _ => Err(bad(header_no, "expected header `valuations <n>`")),
    }
}

// ---------------------------------------------------------------------
// Graphs

pub fn write_graph(graph: &SocialGraph) -> String {
    let mut out = format!("{}\n", graph.n());
    for (i, j) in graph.edges() {
        writeln!(out, "{i} {j}").unwrap();
    }
    out
}

pub fn parse_graph(text: &str) -> Result<SocialGraph, FormatError> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or(FormatError::Empty)?;
    let n = parse_usize(header, header_no, "vertex count")?;
    let mut graph = SocialGraph::new(n).map_err(|e| bad(header_no, e.to_string()))?;
    for (line_no, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(bad(line_no, "expected an `i j` edge"));
        }
        let i = parse_usize(tokens[0], line_no, "vertex")?;
        let j = parse_usize(tokens[1], line_no, "vertex")?;
        graph
            .add_edge(i, j)
            .map_err(|e| bad(line_no, e.to_string()))?;
    }
    Ok(graph)
}

// ---------------------------------------------------------------------
// Pieces and allocations

pub fn write_piece(piece: &Piece) -> String {
    piece
        .intervals()
        .iter()
        .map(|iv| format!("{}..{}", format_rational(iv.lo()), format_rational(iv.hi())))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_piece_tokens<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line_no: usize,
) -> Result<Piece, FormatError> {
    let mut intervals = Vec::new();
    for token in tokens {
        let (lo, hi) = token
            .split_once("..")
            .ok_or_else(|| bad(line_no, format!("expected `lo..hi`, got {token:?}")))?;
        let lo = parse_rat(lo, line_no)?;
        let hi = parse_rat(hi, line_no)?;
        intervals.push(Interval::new(lo, hi).map_err(|e| bad(line_no, e.to_string()))?);
    }
    Ok(Piece::new(intervals))
}

pub fn write_allocation(allocation: &Allocation) -> String {
    let mut out = String::new();
    for (id, piece) in allocation.pieces().iter().enumerate() {
        let serialized = write_piece(piece);
        if serialized.is_empty() {
            writeln!(out, "{id}").unwrap();
        } else {
            writeln!(out, "{id} {serialized}").unwrap();
        }
    }
    out
}

pub fn parse_allocation(text: &str) -> Result<Allocation, FormatError> {
    let mut rows: Vec<(usize, usize, Piece)> = Vec::new();
    for (line_no, line) in content_lines(text) {
        let mut tokens = line.split_whitespace();
        let id = parse_usize(tokens.next().unwrap(), line_no, "agent id")?;
        let piece = parse_piece_tokens(tokens, line_no)?;
        rows.push((id, line_no, piece));
    }
    if rows.is_empty() {
        return Err(FormatError::Empty);
    }
    let n = rows.len();
    let mut pieces: Vec<Option<Piece>> = vec![None; n];
    for (id, line_no, piece) in rows {
        if id >= n {
            return Err(bad(
                line_no,
                format!("agent id {id} out of range for {n} rows"),
            ));
        }
        if pieces[id].replace(piece).is_some() {
            return Err(bad(line_no, format!("duplicate agent id {id}")));
        }
    }
    let pieces: Vec<Piece> = pieces.into_iter().map(|p| p.unwrap()).collect();
    Allocation::new(pieces).map_err(|e| bad(0, e.to_string()))
}

// ---------------------------------------------------------------------
// Transcripts

pub fn write_transcript(transcript: &Transcript) -> String {
    let mut out = String::new();
    for entry in transcript.entries() {
        match (&entry.query.kind, &entry.response) {
            (QueryKind::Eval { x, y }, Response::Value(v)) => writeln!(
                out,
                "EVAL {} {} {} -> {}",
                entry.query.agent,
                format_rational(x),
                format_rational(y),
                format_rational(v)
            )
            .unwrap(),
            (QueryKind::Cut { x, alpha }, Response::CutAt(y)) => writeln!(
                out,
                "CUT {} {} {} -> {}",
                entry.query.agent,
                format_rational(x),
                format_rational(alpha),
                format_rational(y)
            )
            .unwrap(),
            (QueryKind::Cut { x, alpha }, Response::NoSuchCut) => writeln!(
                out,
                "CUT {} {} {} -> NONE",
                entry.query.agent,
                format_rational(x),
                format_rational(alpha)
            )
            .unwrap(),
            _ => unreachable!("transcripts never pair eval with cut responses"),
        }
    }
    out
}

pub fn parse_transcript(text: &str) -> Result<Transcript, FormatError> {
    let mut entries = Vec::new();
    for (line_no, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 6 || tokens[4] != "->" {
            return Err(bad(line_no, "expected `EVAL|CUT agent a b -> response`"));
        }
        let agent = parse_usize(tokens[1], line_no, "agent id")?;
        let first = parse_rat(tokens[2], line_no)?;
        let second = parse_rat(tokens[3], line_no)?;
        let entry = match tokens[0] {
            "EVAL" => TranscriptEntry {
                query: Query::eval(agent, first, second)
                    .map_err(|e| bad(line_no, e.to_string()))?,
                response: Response::Value(parse_rat(tokens[5], line_no)?),
            },
            "CUT" => TranscriptEntry {
                query: Query::cut(agent, first, second)
                    .map_err(|e| bad(line_no, e.to_string()))?,
                response: if tokens[5] == "NONE" {
                    Response::NoSuchCut
                } else {
                    Response::CutAt(parse_rat(tokens[5], line_no)?)
                },
            },
            other => return Err(bad(line_no, format!("unknown entry kind {other:?}"))),
        };
        entries.push(entry);
    }
    Ok(Transcript::from_entries(entries))
}

// ---------------------------------------------------------------------
// Adversary instances

pub fn write_instance(instance: &AdversaryInstance) -> String {
    let ids = |range: std::ops::Range<usize>| {
        range.map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = format!(
        "{} {} {} {}\n",
        instance.n(),
        instance.m(),
        instance.r(),
        instance.seed()
    );
    writeln!(out, "L: {}", ids(instance.left_agents())).unwrap();
    writeln!(out, "R: {}", ids(instance.right_agents())).unwrap();
    writeln!(out, "U: {}", ids(instance.universal_agents())).unwrap();
    for i in instance.left_agents() {
        let neighborhood = instance
            .neighborhood(i)
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "{i}: {neighborhood}").unwrap();
    }
    out
}

pub fn parse_instance(text: &str) -> Result<AdversaryInstance, FormatError> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or(FormatError::Empty)?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 4 {
        return Err(bad(header_no, "expected header `n m r seed`"));
    }
    let n = parse_usize(tokens[0], header_no, "n")?;
    let m = parse_usize(tokens[1], header_no, "m")?;
    let r = parse_usize(tokens[2], header_no, "r")?;
    let seed: u64 = tokens[3]
        .parse()
        .map_err(|_| bad(header_no, "expected integer seed"))?;

    let parse_id_list = |line: &str, line_no: usize| -> Result<Vec<usize>, FormatError> {
        line.split_whitespace()
            .map(|t| parse_usize(t, line_no, "agent id"))
            .collect()
    };
    let mut expect_class = |label: &str| -> Result<Vec<usize>, FormatError> {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| bad(0, format!("missing `{label}` line")))?;
        let rest = line
            .strip_prefix(label)
            .ok_or_else(|| bad(line_no, format!("expected `{label}` line")))?;
        parse_id_list(rest, line_no)
    };
    let l_ids = expect_class("L:")?;
    let r_ids = expect_class("R:")?;
    let u_ids = expect_class("U:")?;

    let expected_l: Vec<usize> = (0..m / 2).collect();
    let expected_r: Vec<usize> = (m / 2..m).collect();
    let expected_u: Vec<usize> = (m..n).collect();
    if m + r != n || l_ids != expected_l || r_ids != expected_r || u_ids != expected_u {
        return Err(bad(
            header_no,
            "membership lines disagree with the header arithmetic",
        ));
    }

    let mut neighborhoods: Vec<Option<BTreeSet<usize>>> = vec![None; m / 2];
    for (line_no, line) in lines {
        let (id, rest) = line
            .split_once(':')
            .ok_or_else(|| bad(line_no, "expected `<i>: j1 j2 ...`"))?;
        let i = parse_usize(id.trim(), line_no, "L agent id")?;
        if i >= m / 2 {
            return Err(bad(line_no, format!("agent {i} is not in L")));
        }
        let neighborhood: BTreeSet<usize> = parse_id_list(rest, line_no)?.into_iter().collect();
        if neighborhoods[i].replace(neighborhood).is_some() {
            return Err(bad(line_no, format!("duplicate neighborhood for {i}")));
        }
    }
    let neighborhoods: Vec<BTreeSet<usize>> = neighborhoods
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| bad(0, format!("missing neighborhood for L agent {i}"))))
        .collect::<Result<_, _>>()?;
    AdversaryInstance::from_parts(n, seed, neighborhoods).map_err(|e| bad(0, e.to_string()))
}

// ---------------------------------------------------------------------
// Verdicts

pub fn write_verdict(verdict: &Verdict) -> String {
    match verdict {
        Verdict::RefutedUniform(w) => format!(
            "verdict: refuted\nmethod: uniform\nagent: {}\nneighbor: {}\n",
            w.source, w.violated_neighbor
        ),
        Verdict::RefutedPerturbation(p) => format!(
            "verdict: refuted\nmethod: perturbation\nagent: {}\nx: {}\nepsilon: {}\n",
            p.agent,
            format_rational(&p.x),
            format_rational(&p.epsilon)
        ),
        Verdict::Unrefuted => "verdict: unrefuted\n".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::UniformOracle;
    use crate::protocol::CountingOracle;
    use crate::rational::{one, rat, zero};

    fn corner_agents() -> Vec<Valuation> {
        vec![
            Valuation::new(vec![zero(), rat(1, 4), one()], vec![rat(4, 1), zero()]).unwrap(),
            Valuation::uniform(),
            Valuation::new(vec![zero(), rat(3, 4), one()], vec![zero(), rat(4, 1)]).unwrap(),
        ]
    }

    #[test]
    fn valuations_round_trip() {
        let vals = corner_agents();
        let text = write_valuations(&vals);
        assert_eq!(parse_valuations(&text).unwrap(), vals);
    }

    #[test]
    fn valuations_accept_bare_integers() {
        let text = "valuations 1\n0 0 4/1 1/4 0/1 1\n";
        let parsed = parse_valuations(text).unwrap();
        assert_eq!(parsed[0], corner_agents()[0]);
    }

    #[test]
    fn valuations_reject_bad_mass() {
        let text = "valuations 1\n0 0/1 2/1 1/1\n";
        assert!(parse_valuations(text).is_err());
    }

    #[test]
    fn graph_round_trip() {
        let g = SocialGraph::from_edges(4, [(0, 1), (1, 2), (0, 3)]).unwrap();
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn allocation_round_trip_with_empty_piece() {
        let a = Allocation::new(vec![
            Piece::new(vec![
                Interval::from_ints(0, 1, 1, 4),
                Interval::from_ints(1, 2, 1, 1),
            ]),
            Piece::empty(),
            Piece::new(vec![Interval::from_ints(1, 4, 1, 2)]),
        ])
        .unwrap();
        let text = write_allocation(&a);
        assert_eq!(parse_allocation(&text).unwrap(), a);
    }

    #[test]
    fn allocation_rejects_gaps() {
        let text = "0 0/1..1/4\n1 1/2..1/1\n";
        assert!(parse_allocation(text).is_err());
    }

    #[test]
    fn transcript_round_trip() {
        let mut oracle = CountingOracle::new(UniformOracle, 3);
        oracle.eval(0, rat(1, 4), rat(3, 4)).unwrap();
        oracle.cut(1, zero(), rat(1, 3)).unwrap();
        oracle.cut(2, rat(4, 5), rat(1, 2)).unwrap();
        let text = write_transcript(oracle.transcript());
        assert!(text.contains("CUT 2 4/5 1/2 -> NONE"));
        assert_eq!(&parse_transcript(&text).unwrap(), oracle.transcript());
    }

    #[test]
    fn transcript_rejects_malformed_lines() {
        assert!(parse_transcript("EVAL 0 1/4 -> 1/2\n").is_err());
        assert!(parse_transcript("POKE 0 1/4 1/2 -> 1/2\n").is_err());
        assert!(parse_transcript("EVAL 0 3/4 1/4 -> 1/2\n").is_err());
    }

    #[test]
    fn instance_round_trip() {
        let inst = AdversaryInstance::build(65, 99).unwrap();
        let text = write_instance(&inst);
        assert!(text.starts_with("65 64 1 99\n"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn instance_rejects_tampering() {
        let inst = AdversaryInstance::build(33, 1).unwrap();
        let text = write_instance(&inst);
        let tampered = text.replace("33 32 1 1", "34 32 1 1");
        assert!(parse_instance(&tampered).is_err());
    }

    #[test]
    fn verdict_rendering() {
        let text = write_verdict(&Verdict::Unrefuted);
        assert_eq!(text, "verdict: unrefuted\n");
    }
}
