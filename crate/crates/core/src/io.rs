//! Text formats.
//!
//! Every file starts with a versioned header line:
//!
//! | kind        | header                                                |
//! |-------------|-------------------------------------------------------|
//! | hypergraph  | `{"format":"hypermagnet-hypergraph","version":1,...}` |
//! | features    | `# hypermagnet-features 1`                            |
//! | labels      | `# hypermagnet-labels 1`                              |
//! | real COO    | `% hypermagnet-coo real 1`                            |
//! | complex COO | `% hypermagnet-coo complex 1`                         |
//! | history     | `# hypermagnet-history 1`                             |
//!
//! Hypergraphs are line-JSON, one hyperedge per line:
//! `{"edge": "<id>", "vertices": ["<vid>", ...], "weight": 1.0, "edvw": [...]}`.
//! A hypergraph file without the header line is also accepted; vertex
//! indices are then assigned in order of first appearance.
//!
//! Floats are written in Rust's shortest round-trip form, so every format
//! reproduces `f64` values exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::edvw::{DocTermCounts, EdvwMatrix};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, IdMap};
use crate::network::History;

pub const FORMAT_VERSION: u32 = 1;

const HYPERGRAPH_FORMAT: &str = "hypermagnet-hypergraph";
const FEATURES_HEADER: &str = "# hypermagnet-features 1";
const LABELS_HEADER: &str = "# hypermagnet-labels 1";
const COO_REAL_HEADER: &str = "% hypermagnet-coo real 1";
const COO_COMPLEX_HEADER: &str = "% hypermagnet-coo complex 1";
const HISTORY_HEADER: &str = "# hypermagnet-history 1";

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Numbered lines of a reader, skipping blank lines.
fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
}

#[derive(Serialize, Deserialize)]
struct HypergraphHeader {
    format: String,
    version: u32,
    n_vertices: usize,
    vertices: Vec<String>,
    #[serde(default)]
    edvw_normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    edge: String,
    vertices: Vec<String>,
    #[serde(default = "unit_weight")]
    weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edvw: Option<Vec<f64>>,
}

fn unit_weight() -> f64 {
    1.0
}

/// Writes a hypergraph (and optionally its EDVW matrix) as line-JSON.
pub fn write_hypergraph<W: Write>(
    mut out: W,
    h: &Hypergraph,
    edvw: Option<&EdvwMatrix>,
) -> Result<()> {
    if let Some(r) = edvw {
        r.check_shape(h)?;
    }
    let header = HypergraphHeader {
        format: HYPERGRAPH_FORMAT.into(),
        version: FORMAT_VERSION,
        n_vertices: h.n_vertices(),
        vertices: h.vertex_ids().names().to_vec(),
        edvw_normalized: edvw.is_some_and(EdvwMatrix::is_normalized),
    };
    serde_json::to_writer(&mut out, &header)?;
    writeln!(out)?;
    let vid = h.vertex_ids();
    for (j, edge) in h.edges().iter().enumerate() {
        let rec = EdgeRecord {
            edge: h.edge_ids().name(j).expect("edge id").to_string(),
            vertices: edge
                .iter()
                .map(|&v| vid.name(v).expect("vertex id").to_string())
                .collect(),
            weight: h.edge_weights()[j],
            edvw: edvw.map(|r| r.column(j).to_vec()),
        };
        serde_json::to_writer(&mut out, &rec)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_hypergraph(path: &Path, h: &Hypergraph, edvw: Option<&EdvwMatrix>) -> Result<()> {
    write_hypergraph(create(path)?, h, edvw)
}

/// Reads line-JSON. The EDVW matrix is returned when every record carries
/// one; a file where only some records do is rejected.
pub fn read_hypergraph<R: BufRead>(
    reader: R,
    name: &str,
) -> Result<(Hypergraph, Option<EdvwMatrix>)> {
    let mut vertex_ids = IdMap::new();
    let mut edge_ids = IdMap::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut columns: Vec<Option<Vec<f64>>> = Vec::new();
    let mut fixed_vertices = false;
    let mut normalized = false;
    let mut first_edvw_line = None;
    for (k, (line_no, line)) in lines(reader).enumerate() {
        let line = line?;
        if k == 0 {
            let value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| parse_err(name, line_no, e.to_string()))?;
            if value.get("format").is_some() {
                let header: HypergraphHeader = serde_json::from_value(value)
                    .map_err(|e| parse_err(name, line_no, e.to_string()))?;
                if header.format != HYPERGRAPH_FORMAT {
                    return Err(parse_err(
                        name,
                        line_no,
                        format!("unknown format {:?}", header.format),
                    ));
                }
                if header.version != FORMAT_VERSION {
                    return Err(parse_err(
                        name,
                        line_no,
                        format!("unsupported version {}", header.version),
                    ));
                }
                if header.vertices.len() != header.n_vertices {
                    return Err(parse_err(
                        name,
                        line_no,
                        "vertex list length differs from n_vertices",
                    ));
                }
                for v in &header.vertices {
                    if vertex_ids.get(v).is_some() {
                        return Err(parse_err(
                            name,
                            line_no,
                            format!("duplicate vertex id {v:?}"),
                        ));
                    }
                    vertex_ids.intern(v);
                }
                fixed_vertices = true;
                normalized = header.edvw_normalized;
                continue;
            }
        }
        let rec: EdgeRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(name, line_no, e.to_string()))?;
        if edge_ids.get(&rec.edge).is_some() {
            return Err(parse_err(
                name,
                line_no,
                format!("duplicate edge id {:?}", rec.edge),
            ));
        }
        if rec.vertices.is_empty() {
            return Err(parse_err(name, line_no, "edge has no vertices"));
        }
        if !(rec.weight.is_finite() && rec.weight > 0.0) {
            return Err(parse_err(
                name,
                line_no,
                format!("nonpositive weight {}", rec.weight),
            ));
        }
        let mut verts = Vec::with_capacity(rec.vertices.len());
        for v in &rec.vertices {
            let idx = if fixed_vertices {
                vertex_ids
                    .get(v)
                    .ok_or_else(|| parse_err(name, line_no, format!("unknown vertex {v:?}")))?
            } else {
                vertex_ids.intern(v)
            };
            if verts.contains(&idx) {
                return Err(parse_err(
                    name,
                    line_no,
                    format!("vertex {v:?} listed twice"),
                ));
            }
            verts.push(idx);
        }
        if let Some(col) = &rec.edvw {
            if col.len() != verts.len() {
                return Err(parse_err(
                    name,
                    line_no,
                    format!("{} edvw values for {} vertices", col.len(), verts.len()),
                ));
            }
            if let Some(w) = col.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(parse_err(
                    name,
                    line_no,
                    format!("nonpositive edvw value {w}"),
                ));
            }
        }
        if first_edvw_line.is_none() {
            first_edvw_line = Some((line_no, rec.edvw.is_some()));
        } else if first_edvw_line.map(|(_, has)| has) != Some(rec.edvw.is_some()) {
            return Err(parse_err(
                name,
                line_no,
                "edvw must be given on every edge or on none",
            ));
        }
        edge_ids.intern(&rec.edge);
        edges.push(verts);
        weights.push(rec.weight);
        columns.push(rec.edvw);
    }
    let h = Hypergraph::from_parts(vertex_ids.len(), edges, weights, vertex_ids, edge_ids)?;
    let edvw = if first_edvw_line.is_some_and(|(_, has)| has) {
        let r = EdvwMatrix::new(
            &h,
            columns.into_iter().map(|c| c.expect("checked")).collect(),
        )?;
        Some(if normalized {
            r.mark_normalized(1e-9)?
        } else {
            r
        })
    } else {
        None
    };
    Ok((h, edvw))
}

pub fn load_hypergraph(path: &Path) -> Result<(Hypergraph, Option<EdvwMatrix>)> {
    read_hypergraph(open(path)?, &display(path))
}

/// Features CSV: `vertex,x0,x1,...`, one row per vertex in index order.
pub fn write_features<W: Write>(mut out: W, ids: &IdMap, features: &Array2<f64>) -> Result<()> {
    if features.nrows() != ids.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} vertices",
            features.nrows(),
            ids.len()
        )));
    }
    writeln!(out, "{FEATURES_HEADER}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    let mut head = vec!["vertex".to_string()];
    head.extend((0..features.ncols()).map(|j| format!("x{j}")));
    w.write_record(&head)?;
    for (i, row) in features.rows().into_iter().enumerate() {
        let mut rec = vec![ids.name(i).expect("vertex id").to_string()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

pub fn save_features(path: &Path, ids: &IdMap, features: &Array2<f64>) -> Result<()> {
    write_features(create(path)?, ids, features)
}

/// Reads the versioned header line and hands the rest to a CSV reader whose
/// reported line numbers are shifted to file lines.
fn csv_body<R: BufRead>(mut reader: R, name: &str, header: &str) -> Result<csv::Reader<R>> {
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != header {
        return Err(parse_err(name, 1, format!("expected header {header:?}")));
    }
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader))
}

fn csv_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize + 1)
}

fn csv_error(name: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize + 1);
    parse_err(name, line, e.to_string())
}

/// Features for the vertices of `ids`; every vertex needs exactly one row.
pub fn read_features<R: BufRead>(reader: R, name: &str, ids: &IdMap) -> Result<Array2<f64>> {
    let mut csv = csv_body(reader, name, FEATURES_HEADER)?;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; ids.len()];
    let mut width = None;
    for rec in csv.records() {
        let rec = rec.map_err(|e| csv_error(name, e))?;
        let line = csv_line(&rec);
        let vid = rec
            .get(0)
            .ok_or_else(|| parse_err(name, line, "empty row"))?;
        let v = ids
            .get(vid)
            .ok_or_else(|| parse_err(name, line, format!("unknown vertex {vid:?}")))?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(name, line, format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(x) = vals.iter().find(|x| !x.is_finite()) {
            return Err(parse_err(name, line, format!("non-finite feature {x}")));
        }
        if *width.get_or_insert(vals.len()) != vals.len() {
            return Err(parse_err(name, line, "row width differs from earlier rows"));
        }
        if rows[v].replace(vals).is_some() {
            return Err(parse_err(
                name,
                line,
                format!("duplicate row for vertex {vid:?}"),
            ));
        }
    }
    let width = width.unwrap_or(0);
    if width == 0 {
        return Err(parse_err(name, 1, "no feature columns"));
    }
    let mut out = Array2::zeros((ids.len(), width));
    for (i, row) in rows.into_iter().enumerate() {
        let row = row.ok_or_else(|| {
            parse_err(
                name,
                0,
                format!("no features for vertex {:?}", ids.name(i).unwrap()),
            )
        })?;
        out.row_mut(i).assign(&ndarray::Array1::from(row));
    }
    Ok(out)
}

pub fn load_features(path: &Path, ids: &IdMap) -> Result<Array2<f64>> {
    read_features(open(path)?, &display(path), ids)
}

/// Labels CSV: `vertex,class`. Unlisted vertices are unlabeled.
pub fn write_labels<W: Write>(
    mut out: W,
    ids: &IdMap,
    labels: &[Option<usize>],
    classes: &[String],
) -> Result<()> {
    writeln!(out, "{LABELS_HEADER}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["vertex", "class"])?;
    for (i, l) in labels.iter().enumerate() {
        if let Some(c) = l {
            let class = classes
                .get(*c)
                .ok_or_else(|| Error::Invalid(format!("class index {c} has no name")))?;
            w.write_record([ids.name(i).expect("vertex id"), class.as_str()])?;
        }
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

pub fn save_labels(
    path: &Path,
    ids: &IdMap,
    labels: &[Option<usize>],
    classes: &[String],
) -> Result<()> {
    write_labels(create(path)?, ids, labels, classes)
}

/// Labels plus class names. Class indices follow the sorted class names so
/// that the mapping does not depend on row order.
pub fn read_labels<R: BufRead>(
    reader: R,
    name: &str,
    ids: &IdMap,
) -> Result<(Vec<Option<usize>>, Vec<String>)> {
    let mut csv = csv_body(reader, name, LABELS_HEADER)?;
    let mut raw: Vec<Option<String>> = vec![None; ids.len()];
    for rec in csv.records() {
        let rec = rec.map_err(|e| csv_error(name, e))?;
        let line = csv_line(&rec);
        if rec.len() != 2 {
            return Err(parse_err(
                name,
                line,
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        let v = ids
            .get(&rec[0])
            .ok_or_else(|| parse_err(name, line, format!("unknown vertex {:?}", &rec[0])))?;
        if raw[v].replace(rec[1].to_string()).is_some() {
            return Err(parse_err(
                name,
                line,
                format!("duplicate label for vertex {:?}", &rec[0]),
            ));
        }
    }
    let mut classes: Vec<String> = raw.iter().flatten().cloned().collect();
    classes.sort();
    classes.dedup();
    let labels = raw
        .iter()
        .map(|c| {
            c.as_ref()
                .map(|c| classes.binary_search(c).expect("collected above"))
        })
        .collect();
    Ok((labels, classes))
}

pub fn load_labels(path: &Path, ids: &IdMap) -> Result<(Vec<Option<usize>>, Vec<String>)> {
    read_labels(open(path)?, &display(path), ids)
}

/// Real coordinate format: header, `rows cols nnz`, then `row col value`.
/// Only nonzero entries are written.
pub fn write_coo<W: Write>(mut out: W, m: &Array2<f64>) -> Result<()> {
    let nnz = m.iter().filter(|x| **x != 0.0).count();
    writeln!(out, "{COO_REAL_HEADER}")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
    for ((i, j), &x) in m.indexed_iter() {
        if x != 0.0 {
            writeln!(out, "{i} {j} {x:?}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_coo(path: &Path, m: &Array2<f64>) -> Result<()> {
    write_coo(create(path)?, m)
}

/// Complex coordinate format: `row col re im`.
pub fn write_complex_coo<W: Write>(mut out: W, m: &Array2<C64>) -> Result<()> {
    let nnz = m.iter().filter(|z| **z != C64::new(0.0, 0.0)).count();
    writeln!(out, "{COO_COMPLEX_HEADER}")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
    for ((i, j), z) in m.indexed_iter() {
        if *z != C64::new(0.0, 0.0) {
            writeln!(out, "{i} {j} {:?} {:?}", z.re, z.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_complex_coo(path: &Path, m: &Array2<C64>) -> Result<()> {
    write_complex_coo(create(path)?, m)
}

/// Parsed coordinate entries before they are placed in a matrix.
struct Coo<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

fn read_coo_entries<R: BufRead, T>(
    reader: R,
    name: &str,
    header: &str,
    n_values: usize,
    make: impl Fn(&[f64]) -> T,
) -> Result<Coo<T>> {
    let mut it = lines(reader);
    let (line_no, first) = it.next().ok_or_else(|| parse_err(name, 1, "empty file"))?;
    if first?.trim_end() != header {
        return Err(parse_err(
            name,
            line_no,
            format!("expected header {header:?}"),
        ));
    }
    let (line_no, dims) = it
        .next()
        .ok_or_else(|| parse_err(name, 2, "missing dimension line"))?;
    let dims = dims?;
    let d: Vec<usize> = dims
        .split_whitespace()
        .map(|s| {
            s.parse()
                .map_err(|e| parse_err(name, line_no, format!("{s:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if d.len() != 3 {
        return Err(parse_err(
            name,
            line_no,
            "dimension line must be `rows cols nnz`",
        ));
    }
    let (rows, cols, nnz) = (d[0], d[1], d[2]);
    let mut entries = Vec::with_capacity(nnz);
    let mut vals = vec![0.0f64; n_values];
    for (line_no, line) in it {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 + n_values {
            return Err(parse_err(
                name,
                line_no,
                format!("expected {} fields, found {}", 2 + n_values, fields.len()),
            ));
        }
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(name, line_no, format!("{s:?}: {e}")))
        };
        let (i, j) = (idx(fields[0])?, idx(fields[1])?);
        if i >= rows || j >= cols {
            return Err(parse_err(
                name,
                line_no,
                format!("entry ({i}, {j}) outside {rows}x{cols}"),
            ));
        }
        for (k, s) in fields[2..].iter().enumerate() {
            vals[k] = s
                .parse()
                .map_err(|e| parse_err(name, line_no, format!("{s:?}: {e}")))?;
            if !vals[k].is_finite() {
                return Err(parse_err(name, line_no, format!("non-finite value {s}")));
            }
        }
        entries.push((i, j, make(&vals)));
    }
    if entries.len() != nnz {
        return Err(parse_err(
            name,
            line_no,
            format!("header declares {nnz} entries, file has {}", entries.len()),
        ));
    }
    Ok(Coo {
        rows,
        cols,
        entries,
    })
}

fn to_dense<T: Clone + Default>(coo: Coo<T>, name: &str) -> Result<Array2<T>> {
    let mut m = Array2::from_elem((coo.rows, coo.cols), T::default());
    let mut seen = std::collections::HashSet::new();
    for (i, j, x) in coo.entries {
        if !seen.insert((i, j)) {
            return Err(parse_err(name, 0, format!("duplicate entry ({i}, {j})")));
        }
        m[[i, j]] = x;
    }
    Ok(m)
}

pub fn read_coo<R: BufRead>(reader: R, name: &str) -> Result<Array2<f64>> {
    to_dense(
        read_coo_entries(reader, name, COO_REAL_HEADER, 1, |v| v[0])?,
        name,
    )
}

pub fn load_coo(path: &Path) -> Result<Array2<f64>> {
    read_coo(open(path)?, &display(path))
}

pub fn read_complex_coo<R: BufRead>(reader: R, name: &str) -> Result<Array2<C64>> {
    to_dense(
        read_coo_entries(reader, name, COO_COMPLEX_HEADER, 2, |v| {
            C64::new(v[0], v[1])
        })?,
        name,
    )
}

pub fn load_complex_coo(path: &Path) -> Result<Array2<C64>> {
    read_complex_coo(open(path)?, &display(path))
}

/// A document × term count matrix in the real coordinate format, read
/// without densifying. Values must be nonnegative integers.
pub fn read_counts<R: BufRead>(reader: R, name: &str) -> Result<DocTermCounts> {
    let coo = read_coo_entries(reader, name, COO_REAL_HEADER, 1, |v| v[0])?;
    let mut docs: Vec<Vec<(usize, u32)>> = vec![Vec::new(); coo.rows];
    for (d, t, x) in coo.entries {
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(parse_err(
                name,
                0,
                format!("count ({d}, {t}) = {x} is not a nonnegative integer"),
            ));
        }
        if x > 0.0 {
            docs[d].push((t, x as u32));
        }
    }
    for (d, doc) in docs.iter_mut().enumerate() {
        doc.sort_unstable();
        if doc.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(parse_err(
                name,
                0,
                format!("duplicate entry in document {d}"),
            ));
        }
    }
    Ok(DocTermCounts {
        n_terms: coo.cols,
        docs,
    })
}

pub fn load_counts(path: &Path) -> Result<DocTermCounts> {
    read_counts(open(path)?, &display(path))
}

/// Per-epoch history of every split: `split,epoch,loss,train_accuracy,test_accuracy`.
pub fn write_history<W: Write>(mut out: W, histories: &[History]) -> Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["split", "epoch", "loss", "train_accuracy", "test_accuracy"])?;
    for (s, h) in histories.iter().enumerate() {
        for r in h {
            w.write_record([
                s.to_string(),
                r.epoch.to_string(),
                r.loss.to_string(),
                r.train_accuracy.to_string(),
                r.test_accuracy.to_string(),
            ])?;
        }
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

pub fn save_history(path: &Path, histories: &[History]) -> Result<()> {
    write_history(create(path)?, histories)
}

pub fn read_history<R: BufRead>(reader: R, name: &str) -> Result<Vec<History>> {
    let mut csv = csv_body(reader, name, HISTORY_HEADER)?;
    let mut out: Vec<History> = Vec::new();
    for rec in csv.records() {
        let rec = rec.map_err(|e| csv_error(name, e))?;
        let line = csv_line(&rec);
        if rec.len() != 5 {
            return Err(parse_err(
                name,
                line,
                format!("expected 5 fields, found {}", rec.len()),
            ));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(name, line, format!("{s:?}: {e}")))
        };
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| parse_err(name, line, format!("{s:?}: {e}")))
        };
        let split = int(&rec[0])?;
        if split > out.len() {
            return Err(parse_err(name, line, format!("split {split} out of order")));
        }
        if split == out.len() {
            out.push(Vec::new());
        }
        out[split].push(crate::network::EpochRecord {
            epoch: int(&rec[1])?,
            loss: real(&rec[2])?,
            train_accuracy: real(&rec[3])?,
            test_accuracy: real(&rec[4])?,
        });
    }
    Ok(out)
}

pub fn load_history(path: &Path) -> Result<Vec<History>> {
    read_history(open(path)?, &display(path))
}
