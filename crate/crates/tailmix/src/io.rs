//! Input formats: `x,count` frequency CSV, raw integers, and edge lists.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tailmix_core::FrequencyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    /// `x,count` with a header row.
    FreqCsv,
    /// One nonnegative integer per line.
    Raw,
    /// `source target` per line; the table is of in-degrees.
    Edges,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot open {}", path.display())]
    Open { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Table(#[from] tailmix_core::Error),
}

fn parse_err(line: u64, msg: impl Into<String>) -> IngestError {
    IngestError::Parse { line, msg: msg.into() }
}

fn parse_u64(field: &str, line: u64, what: &str) -> Result<u64, IngestError> {
    field.trim().parse::<u64>().map_err(|_| parse_err(line, format!("{what} {field:?} is not a nonnegative integer")))
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Open { path: path.to_owned(), source })
}

pub fn ingest(path: &Path, format: DataFormat) -> Result<FrequencyTable, IngestError> {
    match format {
        DataFormat::FreqCsv => ingest_frequency_csv(path),
        DataFormat::Raw => ingest_raw(path),
        DataFormat::Edges => ingest_edge_list(path),
    }
}

pub fn ingest_frequency_csv(path: &Path) -> Result<FrequencyTable, IngestError> {
    read_frequency_csv(open(path)?)
}

pub fn ingest_raw(path: &Path) -> Result<FrequencyTable, IngestError> {
    read_raw(BufReader::new(open(path)?))
}

pub fn ingest_edge_list(path: &Path) -> Result<FrequencyTable, IngestError> {
    read_edge_list(BufReader::new(open(path)?))
}

/// Parses `x,count` rows. Zeros go to the zero tally and repeated `x` are summed.
pub fn read_frequency_csv<R: Read>(reader: R) -> Result<FrequencyTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_err(e, 1))?.clone();
    if header.len() != 2 || &header[0] != "x" || &header[1] != "count" {
        return Err(parse_err(1, "expected header `x,count`"));
    }
    let mut pairs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", rec.len())));
        }
        pairs.push((parse_u64(&rec[0], line, "x")?, parse_u64(&rec[1], line, "count")?));
    }
    Ok(FrequencyTable::from_counts(pairs)?)
}

fn csv_err(e: csv::Error, fallback_line: u64) -> IngestError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        kind => parse_err(line, format!("{kind:?}")),
    }
}

/// One integer per line; blank lines are skipped.
pub fn read_raw<R: BufRead>(reader: R) -> Result<FrequencyTable, IngestError> {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        *counts.entry(parse_u64(s, i as u64 + 1, "value")?).or_default() += 1;
    }
    Ok(FrequencyTable::from_counts(counts)?)
}

/// Whitespace-separated `source target` pairs; `#` lines are comments.
/// Nodes seen only as sources have in-degree zero.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<FrequencyTable, IngestError> {
    let mut indeg: HashMap<String, u64> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let mut it = s.split_whitespace();
        let (Some(src), Some(dst), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(i as u64 + 1, "expected two tokens `source target`"));
        };
        indeg.entry(src.to_owned()).or_default();
        *indeg.entry(dst.to_owned()).or_default() += 1;
    }
    let mut table: HashMap<u64, u64> = HashMap::new();
    for d in indeg.into_values() {
        *table.entry(d).or_default() += 1;
    }
    Ok(FrequencyTable::from_counts(table)?)
}

/// Writes `x,count` rows, with a `0,<zeros>` row first when there are zeros.
pub fn write_frequency_csv<W: Write>(table: &FrequencyTable, mut w: W) -> io::Result<()> {
    writeln!(w, "x,count")?;
    if table.zero_count() > 0 {
        writeln!(w, "0,{}", table.zero_count())?;
    }
    for (x, c) in table.entries() {
        writeln!(w, "{x},{c}")?;
    }
    Ok(())
}

pub fn write_raw<W: Write>(table: &FrequencyTable, mut w: W) -> io::Result<()> {
    for _ in 0..table.zero_count() {
        writeln!(w, "0")?;
    }
    for (x, c) in table.entries() {
        for _ in 0..c {
            writeln!(w, "{x}")?;
        }
    }
    Ok(())
}

/// Writes a graph whose in-degree table is `table`.
///
/// Node `z<i>` has in-degree zero and node `v<j>` the `j`-th positive degree.
/// Each zero node sends one edge into the first free in-slot and the rest of
/// the slots are filled with self-loops. This needs at least as many edges
/// as zero nodes, i.e. `zero_count <= Σ x·count`, which holds for any graph
/// where every node touches an edge.
pub fn write_edge_list<W: Write>(table: &FrequencyTable, mut w: W) -> io::Result<()> {
    let edges: u64 = table.entries().map(|(x, c)| x * c).sum();
    if table.zero_count() > edges {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("{} zero-degree nodes but only {edges} edges", table.zero_count()),
        ));
    }
    let mut zeros = 0..table.zero_count();
    let mut node = 0u64;
    for (x, c) in table.entries() {
        for _ in 0..c {
            for _ in 0..x {
                match zeros.next() {
                    Some(z) => writeln!(w, "z{z} v{node}")?,
                    None => writeln!(w, "v{node} v{node}")?,
                }
            }
            node += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(s: &str) -> Result<FrequencyTable, IngestError> {
        read_frequency_csv(s.as_bytes())
    }

    fn pairs(t: &FrequencyTable) -> Vec<(u64, u64)> {
        t.entries().collect()
    }

    #[test]
    fn frequency_csv_basics() {
        let t = csv("x,count\n1,3\n2,2").unwrap();
        assert_eq!(pairs(&t), [(1, 3), (2, 2)]);
        assert_eq!((t.zero_count(), t.n()), (0, 5));

        let t = csv("x,count\r\n0,7\r\n1,3\r\n").unwrap();
        assert_eq!((t.zero_count(), t.n()), (7, 3));

        assert_eq!(pairs(&csv("x,count\n2,1\n2,4").unwrap()), [(2, 5)]);
    }

    #[test]
    fn frequency_csv_errors_carry_line_numbers() {
        match csv("x,count\n1,3\n2,-1\n") {
            Err(IngestError::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(csv("value,n\n1,1\n"), Err(IngestError::Parse { line: 1, .. })));
        assert!(matches!(csv("x,count\n0,4\n"), Err(IngestError::Table(tailmix_core::Error::EmptyTable))));
    }

    #[test]
    fn raw_tabulation() {
        let t = read_raw("3\n1\n\n3\n0\n".as_bytes()).unwrap();
        assert_eq!(pairs(&t), [(1, 1), (3, 2)]);
        assert_eq!(t.zero_count(), 1);
        assert!(matches!(read_raw("".as_bytes()), Err(IngestError::Table(_))));
        assert!(matches!(read_raw("1\n2\nx\n".as_bytes()), Err(IngestError::Parse { line: 3, .. })));
    }

    #[test]
    fn edge_list_in_degrees() {
        let t = read_edge_list("# toy\na b\nc b\nb a\n".as_bytes()).unwrap();
        assert_eq!(pairs(&t), [(1, 1), (2, 1)]);
        assert_eq!(t.zero_count(), 1);

        let t = read_edge_list("a b\na\tb\n".as_bytes()).unwrap();
        assert_eq!(pairs(&t), [(2, 1)]);
        assert_eq!(t.zero_count(), 1);

        assert!(matches!(read_edge_list("# nothing\n".as_bytes()), Err(IngestError::Table(_))));
        assert!(matches!(read_edge_list("a b\na b c\n".as_bytes()), Err(IngestError::Parse { line: 2, .. })));
    }

    #[test]
    fn edge_writer_rejects_unrepresentable_tables() {
        let t = FrequencyTable::from_counts([(0, 3), (1, 2)]).unwrap();
        assert!(write_edge_list(&t, Vec::new()).is_err());
    }
}
