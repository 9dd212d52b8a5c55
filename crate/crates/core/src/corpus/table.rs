use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::real::{format_real, parse_real};
use crate::error::{Error, Result};

/// Labeled `n x dim` real matrix; row `i` is the vector of `labels[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorTable {
    labels: Vec<String>,
    dim: usize,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

fn check_label(label: &str) -> std::result::Result<(), String> {
    if label.is_empty() {
        Err("empty label".into())
    } else if label.chars().any(char::is_whitespace) {
        Err(format!("label `{label}` contains whitespace"))
    } else {
        Ok(())
    }
}

impl VectorTable {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != rows.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} rows",
                labels.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (label, row) in labels.iter().zip(&rows) {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row `{label}` has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(labels, dim, data)
    }

    /// Builds a table from a matrix whose rows are the vectors.
    pub fn from_matrix(labels: Vec<String>, m: &DMatrix<f64>) -> Result<Self> {
        if labels.len() != m.nrows() {
            return Err(Error::Dimension(format!(
                "{} labels for {} rows",
                labels.len(),
                m.nrows()
            )));
        }
        let mut data = Vec::with_capacity(m.len());
        for row in m.row_iter() {
            data.extend(row.iter().copied());
        }
        Self::from_flat(labels, m.ncols(), data)
    }

    fn from_flat(labels: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Invalid("a vector table needs at least one row".into()));
        }
        if dim == 0 {
            return Err(Error::Invalid("a vector table needs at least one column".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            check_label(label).map_err(Error::Invalid)?;
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate label `{label}`")));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "non-finite value in row `{}`",
                labels[pos / dim]
            )));
        }
        Ok(VectorTable {
            labels,
            dim,
            data,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.position(label).map(|i| self.row(i))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// Looks up a row, failing with [`Error::MissingConcept`].
    pub fn vector(&self, label: &str) -> Result<&[f64]> {
        self.get(label)
            .ok_or_else(|| Error::MissingConcept(label.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.labels
            .iter()
            .enumerate()
            .map(move |(i, l)| (l.as_str(), self.row(i)))
    }

    /// Rows as an `n x dim` matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.data)
    }

    /// The rows of `labels`, in that order.
    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<VectorTable> {
        let mut data = Vec::with_capacity(labels.len() * self.dim);
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            data.extend_from_slice(self.vector(l.as_ref())?);
            out.push(l.as_ref().to_string());
        }
        Self::from_flat(out, self.dim, data)
    }
}

/// Reads a word2vec-style text table.
pub fn read_vector_table(path: impl AsRef<Path>) -> Result<VectorTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_vector_table(BufReader::new(file), &path.display().to_string())
}

/// Parses a table from any reader; `source_name` prefixes error messages.
pub fn parse_vector_table<R: BufRead>(reader: R, source_name: &str) -> Result<VectorTable> {
    let err = |line: usize, msg: String| Error::parse(source_name, line, msg);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| err(1, e.to_string()))?,
        None => return Err(err(1, "empty file, expected `<n> <d>` header".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, dim) = match fields.as_slice() {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) if n >= 1 && d >= 1 => (n, d),
            _ => return Err(err(1, format!("malformed header `{header}`"))),
        },
        _ => return Err(err(1, format!("malformed header `{header}`"))),
    };

    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n.saturating_mul(dim).min(1 << 26));
    let mut seen: HashMap<String, usize> = HashMap::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| err(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if labels.len() == n {
            return Err(err(lineno, format!("more than the {n} rows declared in the header")));
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        if let Some(first) = seen.insert(label.to_string(), lineno) {
            return Err(err(
                lineno,
                format!("duplicate label `{label}` (first seen at line {first})"),
            ));
        }
        let before = data.len();
        for tok in tokens {
            let v = parse_real(tok)
                .ok_or_else(|| err(lineno, format!("`{tok}` is not a finite real")))?;
            data.push(v);
        }
        let got = data.len() - before;
        if got != dim {
            return Err(err(lineno, format!("row has {got} values, expected {dim}")));
        }
        labels.push(label.to_string());
    }
    if labels.len() != n {
        return Err(err(
            labels.len() + 2,
            format!("header declares {n} rows, found {}", labels.len()),
        ));
    }
    VectorTable::from_flat(labels, dim, data)
}

pub fn write_vector_table(table: &VectorTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_table_to(table, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn header_line(table: &VectorTable) -> String {
    format!("{} {}", table.len(), table.dim())
}

fn write_table_to<W: Write>(table: &VectorTable, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{}", header_line(table))?;
    for (label, row) in table.iter() {
        w.write_all(label.as_bytes())?;
        for v in row {
            w.write_all(b" ")?;
            w.write_all(format_real(*v).as_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<VectorTable> {
        parse_vector_table(s.as_bytes(), "mem")
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_small_table() {
        let t = parse("2 3\na 1 0 0\nb 0 1 0").unwrap();
        assert_eq!(t.labels(), ["a", "b"]);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("b").unwrap(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn parses_word2vec_width() {
        let row: Vec<String> = (0..300).map(|i| format!("{}", i as f64 * 0.01)).collect();
        let t = parse(&format!("1 300\nambulance {}\n", row.join(" "))).unwrap();
        assert_eq!(t.dim(), 300);
    }

    #[test]
    fn duplicate_label_reports_line() {
        assert_eq!(line_of(parse("2 2\na 1 0\na 0 1").unwrap_err()), 3);
    }

    #[test]
    fn malformed_inputs_report_lines() {
        assert_eq!(line_of(parse("two 3\na 1 2 3").unwrap_err()), 1);
        assert_eq!(line_of(parse("").unwrap_err()), 1);
        assert_eq!(line_of(parse("2 2\na 1 2\nb 1").unwrap_err()), 3);
        assert_eq!(line_of(parse("1 2\na 1 NaN").unwrap_err()), 2);
        assert_eq!(line_of(parse("1 2\na 1 inf").unwrap_err()), 2);
        assert_eq!(line_of(parse("2 2\na 1 2\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("1 2\na 1 2\nb 3 4").unwrap_err()), 3);
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.vec");
        let t = VectorTable::new(vec!["a".into()], vec![vec![1.5, -2.0]]).unwrap();
        write_vector_table(&t, &path).unwrap();
        assert_eq!(read_vector_table(&path).unwrap(), t);

        let tiny = VectorTable::new(vec!["x".into()], vec![vec![1e-300]]).unwrap();
        write_vector_table(&tiny, &path).unwrap();
        assert_eq!(read_vector_table(&path).unwrap().row(0)[0], 1e-300);
    }

    #[test]
    fn header_records_shape() {
        let t = VectorTable::from_matrix(
            (0..5000).map(|i| format!("c{i}")).collect(),
            &DMatrix::zeros(5000, 9216),
        )
        .unwrap();
        assert_eq!(header_line(&t), "5000 9216");
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert!(VectorTable::new(vec![], vec![]).is_err());
        assert!(VectorTable::new(vec!["a b".into()], vec![vec![1.0]]).is_err());
        assert!(VectorTable::new(vec!["a".into()], vec![vec![f64::NAN]]).is_err());
        assert!(VectorTable::new(vec!["a".into(), "a".into()], vec![vec![1.0], vec![2.0]]).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(rows in proptest::collection::vec(
            proptest::collection::vec(-1e12f64..1e12, 4), 1..8)) {
            let labels: Vec<String> = (0..rows.len()).map(|i| format!("w{i}")).collect();
            let t = VectorTable::new(labels, rows).unwrap();
            let mut out = Vec::new();
            write_table_to(&t, &mut out).unwrap();
            let back = parse_vector_table(out.as_slice(), "mem").unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
