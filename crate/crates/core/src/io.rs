//! On-disk formats: edge lists, dense matrices, labels, compatibility
//! matrices, embedding sets and JSON reports.
//!
//! Dense binary layout: the 8-byte magic `NIFDENSE`, then `rows`, `cols` and
//! the element width (always 8) as little-endian `u64`, then `rows * cols`
//! row-major little-endian `f64`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::compat::{CoefficientMask, CompatKind, CompatMatrix};
use crate::embed::{Component, EmbeddingSet, Provenance};
use crate::error::{Error, Result};
use crate::graph::{self, Edge};

pub const DENSE_MAGIC: &[u8; 8] = b"NIFDENSE";
const HEADER_LEN: usize = 32;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Lines with their 1-based numbers, `#` comments and blank lines dropped.
fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((i + 1, body.to_string()));
        }
    }
    Ok(out)
}

/// Undirected edges in canonical order plus `max id + 1`. Self-loops are
/// rejected; duplicate and reversed pairs collapse.
pub fn read_edge_list(path: &Path) -> Result<(Vec<Edge>, usize)> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (line, body) in content_lines(path)? {
        let mut it = body.split_whitespace();
        let mut next = || -> Result<usize> {
            let tok = it.next().ok_or_else(|| parse_err(path, line, "expected two node ids"))?;
            tok.parse().map_err(|_| parse_err(path, line, format!("bad node id {tok:?}")))
        };
        let (u, v) = (next()?, next()?);
        if u == v {
            return Err(parse_err(path, line, format!("self-loop on node {u}")));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push(graph::canonical(u, v));
    }
    edges.sort_unstable();
    edges.dedup();
    Ok((edges, n))
}

pub fn write_edge_list(path: &Path, edges: &[Edge]) -> Result<()> {
    let mut w = create(path)?;
    for &(u, v) in edges {
        writeln!(w, "{u}\t{v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_dense(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = create(path)?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * m.len());
    buf.extend_from_slice(DENSE_MAGIC);
    for x in [m.nrows() as u64, m.ncols() as u64, 8] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_dense_binary(path: &Path) -> Result<DMatrix<f64>> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..8] != DENSE_MAGIC {
        return Err(parse_err(path, 0, "missing NIFDENSE header"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap());
    let (rows, cols, width) = (word(0) as usize, word(1) as usize, word(2));
    if width != 8 {
        return Err(parse_err(path, 0, format!("element width {width}, expected 8")));
    }
    let expect = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| parse_err(path, 0, "matrix size overflows"))?;
    if bytes.len() - HEADER_LEN != expect {
        return Err(parse_err(
            path,
            0,
            format!("{rows}x{cols} needs {expect} payload bytes, found {}", bytes.len() - HEADER_LEN),
        ));
    }
    let payload = &bytes[HEADER_LEN..];
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        let at = 8 * (i * cols + j);
        f64::from_le_bytes(payload[at..at + 8].try_into().unwrap())
    }))
}

/// Comma-separated rows of numbers; `#` comments allowed.
pub fn read_dense_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, body) in content_lines(path)? {
        let row = body
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>().map_err(|_| parse_err(path, line, format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    line,
                    format!("{} columns, previous rows have {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Binary if the file starts with the magic, CSV otherwise.
pub fn read_dense(path: &Path) -> Result<DMatrix<f64>> {
    let mut head = [0u8; 8];
    let n = open(path)?.read(&mut head).map_err(|e| Error::io(path, e))?;
    if n == 8 && &head == DENSE_MAGIC {
        read_dense_binary(path)
    } else {
        read_dense_csv(path)
    }
}

/// One non-negative class id per line, in node order.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    content_lines(path)?
        .into_iter()
        .map(|(line, body)| body.parse().map_err(|_| parse_err(path, line, format!("bad label {body:?}"))))
        .collect()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(open(path)?))?)
}

/// Everything about a compatibility matrix except its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatSidecar {
    pub dim: usize,
    pub kind: CompatKind,
    pub mask_density: f64,
    pub energy_kept: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Active `(a, b)` pairs with `a <= b`.
    pub active: Vec<(usize, usize)>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Values to `path`, metadata to the same stem with a `.json` extension.
pub fn write_compat(path: &Path, h: &CompatMatrix) -> Result<()> {
    write_dense(path, &h.values)?;
    let side = CompatSidecar {
        dim: h.dim,
        kind: h.kind,
        mask_density: h.mask.density(),
        energy_kept: h.energy_kept,
        converged: h.converged,
        iterations: h.iterations,
        active: h.mask.active_pairs(),
    };
    write_json(&sidecar_path(path), &side)
}

pub fn read_compat(path: &Path) -> Result<CompatMatrix> {
    let values = read_dense_binary(path)?;
    let side: CompatSidecar = read_json(&sidecar_path(path))?;
    if values.nrows() != side.dim || values.ncols() != side.dim {
        return Err(parse_err(path, 0, format!("values are not {0}x{0}", side.dim)));
    }
    let mut mask = CoefficientMask::empty(side.dim);
    for &(a, b) in &side.active {
        if a >= side.dim || b >= side.dim {
            return Err(parse_err(path, 0, format!("mask pair ({a}, {b}) out of range")));
        }
        mask.set(a, b, true);
    }
    Ok(CompatMatrix {
        dim: side.dim,
        values,
        mask,
        kind: side.kind,
        energy_kept: side.energy_kept,
        converged: side.converged,
        iterations: side.iterations,
    })
}

/// One `<component>.bin` per block plus `provenance.json`.
pub fn write_embeddings(dir: &Path, emb: &EmbeddingSet) -> Result<()> {
    for c in Component::ALL {
        write_dense(&dir.join(format!("{c}.bin")), emb.get(c))?;
    }
    write_json(&dir.join("provenance.json"), &emb.provenance)
}

pub fn read_embeddings(dir: &Path) -> Result<EmbeddingSet> {
    let provenance: Provenance = read_json(&dir.join("provenance.json"))?;
    let blocks = Component::ALL
        .iter()
        .map(|c| read_dense_binary(&dir.join(format!("{c}.bin"))))
        .collect::<Result<Vec<_>>>()?;
    EmbeddingSet::from_blocks(blocks, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn dense_round_trip_is_bit_exact() {
        let d = tmp();
        let p = d.path().join("m.bin");
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -0.0, f64::MIN_POSITIVE, 1e300, -2.5, 1.0 / 3.0]);
        write_dense(&p, &m).unwrap();
        let back = read_dense(&p).unwrap();
        assert_eq!(back.shape(), (2, 3));
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], b"NIFDENSE");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        // Row-major: second payload value is m[(0, 1)].
        assert_eq!(f64::from_le_bytes(bytes[40..48].try_into().unwrap()).to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let d = tmp();
        let p = d.path().join("m.bin");
        write_dense(&p, &DMatrix::from_element(3, 3, 1.0)).unwrap();
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_dense(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn csv_features() {
        let d = tmp();
        let p = d.path().join("x.csv");
        fs::write(&p, "# header\n1, 2\n3,4.5\n").unwrap();
        assert_eq!(read_dense(&p).unwrap(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.5]));
        fs::write(&p, "1,2\n3\n").unwrap();
        match read_dense(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn edge_list_parsing() {
        let d = tmp();
        let p = d.path().join("g.tsv");
        fs::write(&p, "# comment\n0\t1\n2 1\n1\t0\n\n4\t2 # trailing\n").unwrap();
        let (edges, n) = read_edge_list(&p).unwrap();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 4)]);
        assert_eq!(n, 5);
        fs::write(&p, "0\t1\n3\t3\n").unwrap();
        match read_edge_list(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        fs::write(&p, "0\tx\n").unwrap();
        assert!(read_edge_list(&p).is_err());
    }

    #[test]
    fn labels_and_edges_round_trip() {
        let d = tmp();
        let p = d.path().join("labels.txt");
        write_labels(&p, &[3, 0, 1]).unwrap();
        assert_eq!(read_labels(&p).unwrap(), vec![3, 0, 1]);
        let p = d.path().join("g.tsv");
        write_edge_list(&p, &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(read_edge_list(&p).unwrap(), (vec![(0, 2), (1, 2)], 3));
    }

    #[test]
    fn compat_round_trip() {
        let d = tmp();
        let p = d.path().join("H_U.bin");
        let mut h = CompatMatrix::identity(3);
        h.values[(0, 2)] = 0.25;
        h.values[(2, 0)] = 0.25;
        h.mask = CoefficientMask::empty(3);
        for (a, b) in [(0, 0), (1, 1), (2, 2), (0, 2)] {
            h.mask.set(a, b, true);
        }
        h.kind = CompatKind::NegativeAwareHStar;
        h.energy_kept = 0.97;
        h.iterations = 12;
        write_compat(&p, &h).unwrap();
        let side: CompatSidecar = read_json(&d.path().join("H_U.json")).unwrap();
        assert_eq!(side.active, vec![(0, 0), (0, 2), (1, 1), (2, 2)]);
        let back = read_compat(&p).unwrap();
        assert_eq!(back.values, h.values);
        assert_eq!(back.mask, h.mask);
        assert_eq!(back.kind, h.kind);
        assert_eq!(back.iterations, 12);
    }
}
