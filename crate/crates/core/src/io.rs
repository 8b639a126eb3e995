//! Matrix Market coordinate files and one-value-per-line vector files.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Kind, SparseGraph};

pub const MTX_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Parses a coordinate file; line `i j w` is the directed edge `i -> j`
/// (1-indexed).
pub fn read_mtx<R: BufRead>(reader: R, kind: Kind) -> Result<SparseGraph> {
    let mut lines = reader.lines().enumerate();
    let mut size: Option<(usize, usize)> = None;
    let mut trip = Vec::new();
    let mut header_seen = false;
    while let Some((ln, line)) = lines.next() {
        let line = line?;
        let lineno = ln + 1;
        let t = line.trim();
        if t.starts_with("%%") {
            let lower = t.to_ascii_lowercase();
            if !lower.starts_with("%%matrixmarket matrix coordinate") {
                return Err(Error::Parse { line: lineno, msg: format!("unsupported header `{t}`") });
            }
            if !(lower.contains(" real") || lower.contains(" integer")) || !lower.ends_with("general") {
                return Err(Error::Parse { line: lineno, msg: "expected real general coordinates".into() });
            }
            header_seen = true;
            continue;
        }
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if !header_seen {
            return Err(Error::Parse { line: lineno, msg: "missing %%MatrixMarket header".into() });
        }
        let mut it = t.split_whitespace();
        let mut next = |what: &str| {
            it.next().ok_or_else(|| Error::Parse { line: lineno, msg: format!("missing {what}") })
        };
        match size {
            None => {
                let r: usize = parse(next("rows")?, lineno)?;
                let c: usize = parse(next("cols")?, lineno)?;
                let _nnz: usize = parse(next("nnz")?, lineno)?;
                if r != c {
                    return Err(Error::Parse { line: lineno, msg: format!("matrix is {r}x{c}, not square") });
                }
                size = Some((r, c));
            }
            Some((n, _)) => {
                let i: usize = parse(next("row")?, lineno)?;
                let j: usize = parse(next("col")?, lineno)?;
                let w: f64 = parse(next("value")?, lineno)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse { line: lineno, msg: format!("index ({i}, {j}) out of range") });
                }
                trip.push((i - 1, j - 1, w));
            }
        }
    }
    let (n, _) = size.ok_or(Error::Parse { line: 0, msg: "missing size line".into() })?;
    SparseGraph::from_triplets(n, kind, trip)
}

/// Writes canonical entries with shortest round-trip float formatting.
pub fn write_mtx<W: Write>(g: &SparseGraph, mut w: W) -> Result<()> {
    writeln!(w, "{MTX_HEADER}")?;
    writeln!(w, "{} {} {}", g.n(), g.n(), g.nnz())?;
    for (i, j, v) in g.iter() {
        writeln!(w, "{} {} {}", i + 1, j + 1, fmt_f64(v))?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        out.push(parse(t, ln + 1)?);
    }
    Ok(out)
}

pub fn write_vector<W: Write>(v: &[f64], comment: &str, mut w: W) -> Result<()> {
    writeln!(w, "% {comment}")?;
    for x in v {
        writeln!(w, "{}", fmt_f64(*x))?;
    }
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    // `{:?}` is the shortest representation that parses back exactly.
    format!("{v:?}")
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{s}`") })
}
