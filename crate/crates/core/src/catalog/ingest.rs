//! CSV ingestion. RFC-4180 with a header row, UTF-8, no NULLs: every cell
//! must parse as its declared type or ingestion fails with the location.

use super::{CatalogError, ColumnData, ColumnType, TableDef};
use std::path::Path;

/// Reads `file` into typed columns for `table`. The header must match the
/// declared column names in order.
pub fn ingest_csv(table: &TableDef, file: &Path) -> Result<Vec<ColumnData>, CatalogError> {
    let fname = file.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(file)
        .map_err(|e| io_err(&fname, e))?;

    let headers = reader.headers().map_err(|e| io_err(&fname, e))?;
    let expected: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CatalogError::CsvHeader { file: fname });
    }

    let mut columns: Vec<ColumnData> =
        table.columns.iter().map(|c| ColumnData::empty(c.ty)).collect();

    for (idx, record) in reader.records().enumerate() {
        let row = idx as u64 + 1; // 1-based data row, header not counted
        let record = record.map_err(|e| io_err(&fname, e))?;
        if record.len() != table.columns.len() {
            return Err(CatalogError::CsvArity {
                file: fname,
                row,
                expected: table.columns.len(),
                found: record.len(),
            });
        }
        for (col, cell) in table.columns.iter().zip(record.iter()) {
            let slot = &mut columns[table.column_id(&col.name).unwrap().0];
            match (col.ty, slot) {
                (ColumnType::Integer, ColumnData::Int(v)) => {
                    v.push(cell.trim().parse::<i64>().map_err(|_| {
                        cell_err(&fname, row, &col.name, cell, ColumnType::Integer)
                    })?);
                }
                (ColumnType::Float, ColumnData::Float(v)) => {
                    let x = cell.trim().parse::<f64>().map_err(|_| {
                        cell_err(&fname, row, &col.name, cell, ColumnType::Float)
                    })?;
                    if !x.is_finite() {
                        return Err(cell_err(&fname, row, &col.name, cell, ColumnType::Float));
                    }
                    v.push(if x == 0.0 { 0.0 } else { x });
                }
                (ColumnType::String, ColumnData::Str(v)) => v.push(cell.to_string()),
                _ => unreachable!("columns built from the same defs"),
            }
        }
    }
    Ok(columns)
}

fn io_err(file: &str, e: csv::Error) -> CatalogError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CatalogError::CsvIo { file: file.to_string(), source: io },
        other => CatalogError::CsvIo {
            file: file.to_string(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

fn cell_err(file: &str, row: u64, column: &str, cell: &str, ty: ColumnType) -> CatalogError {
    CatalogError::CsvCell {
        file: file.to_string(),
        row,
        column: column.to_string(),
        cell: cell.to_string(),
        ty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ColumnDef, ColumnId};
    use std::fs;

    fn table_ab() -> TableDef {
        TableDef {
            name: "t".into(),
            columns: vec![
                ColumnDef { name: "a".into(), ty: ColumnType::Integer },
                ColumnDef { name: "b".into(), ty: ColumnType::String },
            ],
            filterable: vec![ColumnId(0)],
        }
    }

    #[test]
    fn reads_typed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("t.csv");
        fs::write(&f, "a,b\n1,x\n2,y\n").unwrap();
        let cols = ingest_csv(&table_ab(), &f).unwrap();
        assert_eq!(cols[0], ColumnData::Int(vec![1, 2]));
        assert_eq!(cols[1], ColumnData::Str(vec!["x".into(), "y".into()]));
    }

    #[test]
    fn unparseable_cell_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("t.csv");
        fs::write(&f, "a\nfoo\n").unwrap();
        let table = TableDef {
            name: "t".into(),
            columns: vec![ColumnDef { name: "a".into(), ty: ColumnType::Integer }],
            filterable: vec![],
        };
        match ingest_csv(&table, &f).unwrap_err() {
            CatalogError::CsvCell { row, cell, .. } => {
                assert_eq!(row, 1);
                assert_eq!(cell, "foo");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn header_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("t.csv");
        fs::write(&f, "a,wrong\n").unwrap();
        assert!(matches!(
            ingest_csv(&table_ab(), &f).unwrap_err(),
            CatalogError::CsvHeader { .. }
        ));
    }

    #[test]
    fn arity_mismatch_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("t.csv");
        fs::write(&f, "a,b\n1,x\n2\n").unwrap();
        match ingest_csv(&table_ab(), &f).unwrap_err() {
            CatalogError::CsvArity { row, expected, found, .. } => {
                assert_eq!((row, expected, found), (2, 2, 1));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn large_file_row_count_matches_line_count() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("t.csv");
        let mut body = String::from("a\n");
        for i in 0..100_000 {
            body.push_str(&format!("{i}\n"));
        }
        fs::write(&f, body).unwrap();
        let table = TableDef {
            name: "t".into(),
            columns: vec![ColumnDef { name: "a".into(), ty: ColumnType::Integer }],
            filterable: vec![],
        };
        let cols = ingest_csv(&table, &f).unwrap();
        assert_eq!(cols[0].len(), 100_000);
    }
}
