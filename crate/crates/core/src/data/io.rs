use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::{BlendEntry, DataError, Label};
use crate::chem::parse_smiles;

pub const CSV_HEADER: [&str; 5] = ["smiles_a", "smiles_b", "fraction_a", "label", "source_id"];

/// A data row that failed validation. `row` is the 1-based line number.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReject {
    pub row: u64,
    pub reason: String,
}

/// Result of permissive ingestion: accepted entries in file order plus an
/// itemized list of rejected rows.
#[derive(Clone, Debug, Default)]
pub struct LoadReport {
    pub entries: Vec<BlendEntry>,
    pub rejects: Vec<RowReject>,
    pub rows_read: usize,
}

impl LoadReport {
    /// Fails on the first rejected row instead of skipping it.
    pub fn into_strict(self) -> Result<Vec<BlendEntry>, DataError> {
        match self.rejects.into_iter().next() {
            Some(r) => Err(DataError::BadRow {
                row: r.row,
                reason: r.reason,
            }),
            None => Ok(self.entries),
        }
    }
}

pub fn load_entries(path: impl AsRef<Path>) -> Result<LoadReport, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DataError::MissingFile(path.to_path_buf()),
        _ => DataError::Io(e),
    })?;
    read_entries(file)
}

pub fn read_entries(reader: impl Read) -> Result<LoadReport, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != CSV_HEADER {
        return Err(DataError::BadHeader {
            expected: CSV_HEADER.join(","),
            found: found.join(","),
        });
    }

    let mut report = LoadReport::default();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        report.rows_read += 1;
        match parse_row(&record) {
            Ok(entry) => report.entries.push(entry),
            Err(reason) => report.rejects.push(RowReject { row, reason }),
        }
    }
    Ok(report)
}

fn parse_row(record: &csv::StringRecord) -> Result<BlendEntry, String> {
    if record.len() != CSV_HEADER.len() {
        return Err(format!("expected 5 fields, found {}", record.len()));
    }
    let field = |i: usize| record.get(i).unwrap_or("").trim();
    let smiles_a = field(0).to_string();
    let smiles_b = field(1).to_string();
    let fraction_a: f64 = field(2)
        .parse()
        .map_err(|_| format!("fraction_a '{}' is not a number", field(2)))?;
    if !(0.0..=1.0).contains(&fraction_a) {
        return Err(format!("fraction_a {fraction_a} outside [0, 1]"));
    }
    let label: Label = field(3).parse()?;
    parse_smiles(&smiles_a).map_err(|e| format!("smiles_a: {e}"))?;
    parse_smiles(&smiles_b).map_err(|e| format!("smiles_b: {e}"))?;
    Ok(BlendEntry {
        smiles_a,
        smiles_b,
        fraction_a,
        label,
        source_id: field(4).to_string(),
    })
}

/// Writes entries with the dataset header. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_entries(writer: impl Write, entries: &[BlendEntry]) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for e in entries {
        wtr.write_record([
            e.smiles_a.as_str(),
            e.smiles_b.as_str(),
            &e.fraction_a.to_string(),
            e.label.as_str(),
            e.source_id.as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "smiles_a,smiles_b,fraction_a,label,source_id\n";

    #[test]
    fn empty_data_section() {
        let r = read_entries(HEAD.as_bytes()).unwrap();
        assert!(r.entries.is_empty());
        assert!(r.rejects.is_empty());
    }

    #[test]
    fn three_rows_in_order_with_comments() {
        let text = format!(
            "# fractions are of polymer A\n{HEAD}*CC*,*CC(C)*,0.5,compatible,a\n# note\n*CCO*,*CC(Cl)*,0.2,incompatible,b\n*CC*,*CCO*,1,compatible,c\n"
        );
        let r = read_entries(text.as_bytes()).unwrap();
        let ids: Vec<_> = r.entries.iter().map(|e| e.source_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(r.entries[1].label, Label::Incompatible);
        assert_eq!(r.rows_read, 3);
    }

    #[test]
    fn bad_rows_are_itemized() {
        let text = format!(
            "{HEAD}*CC*,*CC*,1.5,compatible,x\n*CC*,*C(C*,0.5,compatible,y\n*CC*,*CC*,0.5,maybe,z\n*CC*,*CC*,0.3,compatible,ok\n*CC*,0.3\n"
        );
        let r = read_entries(text.as_bytes()).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.rejects.len(), 4);
        assert_eq!(r.rows_read, r.entries.len() + r.rejects.len());
        assert_eq!(r.rejects[0].row, 2);
        assert!(r.rejects[0].reason.contains("outside"));
        assert!(r.rejects[1].reason.contains("smiles_b"));
        let err = r.into_strict().unwrap_err();
        assert!(matches!(err, DataError::BadRow { row: 2, .. }));
    }

    #[test]
    fn header_must_match() {
        let err = read_entries("a,b,c\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::BadHeader { .. }));
        assert!(matches!(
            load_entries("/definitely/not/here.csv").unwrap_err(),
            DataError::MissingFile(_)
        ));
    }

    #[test]
    fn write_then_read() {
        let entries = vec![BlendEntry {
            smiles_a: "*CC*".into(),
            smiles_b: "*CC(C(=O)OC)*".into(),
            fraction_a: 0.1 + 0.2,
            label: Label::Incompatible,
            source_id: "t0=0.25;alpha=0.3".into(),
        }];
        let mut buf = Vec::new();
        write_entries(&mut buf, &entries).unwrap();
        let back = read_entries(buf.as_slice()).unwrap().into_strict().unwrap();
        assert_eq!(back, entries);
    }
}
