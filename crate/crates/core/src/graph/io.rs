//! Plain-text object formats.
//!
//! Multigraph: header `n m`, then `m` lines `u v mult` in sorted order.
//! Pairing: header `n d`, then `d*n/2` lines `u su v sv`.

use std::fmt::Write as _;

use super::{Multigraph, Pairing, Point};
use crate::error::{Error, Result};

pub fn write_multigraph(g: &Multigraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.distinct_pairs());
    for &(u, v, m) in g.edges() {
        let _ = writeln!(out, "{u} {v} {m}");
    }
    out
}

pub fn read_multigraph(text: &str) -> Result<Multigraph> {
    let mut lines = numbered_lines(text);
    let (line_no, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let [n, m] = parse_fields::<2>(header, line_no)?;
    let mut edges = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let (line_no, line) = lines.next().ok_or(Error::Parse {
            line: line_no + edges.len() + 1,
            msg: format!("expected {m} edge lines"),
        })?;
        let [u, v, mult] = parse_fields::<3>(line, line_no)?;
        if mult == 0 {
            return Err(Error::Parse { line: line_no, msg: "multiplicity must be positive".into() });
        }
        edges.push((u as u32, v as u32, mult as u32));
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse { line: line_no, msg: "trailing content".into() });
    }
    let g = Multigraph::from_edges(n as usize, edges.iter().copied())
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    if g.distinct_pairs() != edges.len() {
        return Err(Error::Parse { line: 0, msg: "repeated vertex pair".into() });
    }
    Ok(g)
}

pub fn write_pairing(p: &Pairing) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", p.n(), p.d());
    for &((u, su), (v, sv)) in p.pairs() {
        let _ = writeln!(out, "{u} {su} {v} {sv}");
    }
    out
}

pub fn read_pairing(text: &str) -> Result<Pairing> {
    let mut lines = numbered_lines(text);
    let (line_no, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let [n, d] = parse_fields::<2>(header, line_no)?;
    let count = n * d / 2;
    let mut pairs: Vec<(Point, Point)> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let (line_no, line) = lines.next().ok_or(Error::Parse {
            line: line_no + pairs.len() + 1,
            msg: format!("expected {count} pair lines"),
        })?;
        let [u, su, v, sv] = parse_fields::<4>(line, line_no)?;
        pairs.push(((u as u32, su as u32), (v as u32, sv as u32)));
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse { line: line_no, msg: "trailing content".into() });
    }
    Pairing::new(n as usize, d as u32, pairs).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_fields<const K: usize>(line: &str, line_no: usize) -> Result<[u64; K]> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != K {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected {K} fields, found {}", fields.len()),
        });
    }
    let mut out = [0u64; K];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.parse().map_err(|_| Error::Parse { line: line_no, msg: format!("not an integer: '{f}'") })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_header() {
        let g = Multigraph::empty(3);
        let text = write_multigraph(&g);
        assert_eq!(text, "3 0\n");
        assert_eq!(read_multigraph(&text).unwrap(), g);
    }

    #[test]
    fn k4_has_six_lines() {
        let g = Multigraph::complete(4);
        let text = write_multigraph(&g);
        assert_eq!(text.lines().count(), 7);
        assert_eq!(read_multigraph(&text).unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_multigraph("3 2\n1 2 1\n1 x 1\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, msg: "not an integer: 'x'".into() });
        assert!(matches!(read_multigraph("3 2\n1 2 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(read_multigraph("2 1\n1 2 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_pairing("2 1\n1 1 1 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn pairing_round_trip() {
        let p = Pairing::new(2, 2, vec![((1, 1), (2, 2)), ((1, 2), (2, 1))]).unwrap();
        let text = write_pairing(&p);
        assert_eq!(text, "2 2\n1 1 2 2\n1 2 2 1\n");
        assert_eq!(read_pairing(&text).unwrap(), p);
    }
}
