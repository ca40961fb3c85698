//! Plain-text graph, label and matrix files.
//!
//! Graph file: a header `n d k`, then `n` lines `v label loopweight`, then one
//! line `u v multiplicity` per distinct non-loop edge with `u < v`. Blank
//! lines and lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition, Vertex};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn fields<const N: usize>(line: usize, s: &str) -> Result<[usize; N]> {
    let mut out = [0usize; N];
    let mut it = s.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it.next().ok_or_else(|| parse_err(line, format!("expected {N} fields")))?;
        *slot = tok
            .parse()
            .map_err(|_| parse_err(line, format!("not a nonnegative integer: {tok:?}")))?;
    }
    if it.next().is_some() {
        return Err(parse_err(line, format!("expected {N} fields")));
    }
    Ok(out)
}

fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Err(e) => Some(Err(e.into())),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

/// Writes `g` with the labels of `p`, or a single cluster when `p` is `None`.
pub fn write_graph<W: Write>(mut w: W, g: &Graph, p: Option<&Partition>) -> Result<()> {
    let single;
    let p = match p {
        Some(p) => p,
        None => {
            single = Partition::single(g.n());
            &single
        }
    };
    if p.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: p.n(),
        });
    }
    writeln!(w, "{} {} {}", g.n(), g.d(), p.k())?;
    for v in 0..g.n() {
        writeln!(w, "{v} {} {}", p.label(v), g.loop_weight(v))?;
    }
    for (u, v, m) in g.edges() {
        writeln!(w, "{u} {v} {m}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_graph<R: BufRead>(r: R) -> Result<(Graph, Partition)> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))??;
    let [n, d, k] = fields::<3>(hl, &header)?;
    let mut labels = vec![0u32; n];
    let mut loops = vec![0u32; n];
    for expect in 0..n {
        let (ln, s) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {n} vertex lines")))??;
        let [v, label, lw] = fields::<3>(ln, &s)?;
        if v != expect {
            return Err(parse_err(ln, format!("expected vertex {expect}, found {v}")));
        }
        if label >= k {
            return Err(parse_err(ln, format!("label {label} outside 0..{k}")));
        }
        labels[v] = label as u32;
        loops[v] = u32::try_from(lw).map_err(|_| parse_err(ln, "loop weight overflow"))?;
    }
    let mut entries: Vec<(Vertex, Vertex, u32)> = Vec::new();
    for item in lines {
        let (ln, s) = item?;
        let [u, v, m] = fields::<3>(ln, &s)?;
        if u >= v || v >= n {
            return Err(parse_err(ln, format!("edge ({u}, {v}) must satisfy u < v < {n}")));
        }
        let m = u32::try_from(m).map_err(|_| parse_err(ln, "multiplicity overflow"))?;
        entries.push((u, v, m));
    }
    let g = Graph::from_multiplicities(n, d, &entries, &loops)?;
    let p = Partition::new(labels, k)?;
    Ok((g, p))
}

/// One cluster id per line.
pub fn write_labels<W: Write>(mut w: W, p: &Partition) -> Result<()> {
    for &l in p.labels() {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one label per line; `k` is one more than the largest label.
pub fn read_labels<R: BufRead>(r: R) -> Result<Partition> {
    let mut labels = Vec::new();
    for item in content_lines(r) {
        let (ln, s) = item?;
        let [l] = fields::<1>(ln, &s)?;
        labels.push(u32::try_from(l).map_err(|_| parse_err(ln, "label overflow"))?);
    }
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    Partition::new(labels, k)
}

/// Whitespace-separated rows with round-trip float formatting.
pub fn write_matrix<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for item in content_lines(r) {
        let (ln, s) = item?;
        let row = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(ln, format!("not a number: {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(ln, "ragged matrix row"));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
