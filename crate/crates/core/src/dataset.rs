//! Named-column tables and their CSV form.

use std::fs;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read `{path}`: {cause}")]
    Io { path: String, cause: String },
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("CSV has no header row")]
    MissingHeader,
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}: empty cell in column `{column}`")]
    EmptyCell { row: usize, column: String },
    #[error("row {row}: cannot parse `{value}` in numeric column `{column}`")]
    UnparseableCell { row: usize, column: String, value: String },
    #[error("column `{column}` has {found} rows, expected {expected}")]
    LengthMismatch { column: String, expected: usize, found: usize },
    #[error("no column named `{0}`")]
    NoSuchColumn(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Text(_) => None,
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Column::Numeric(v) => v[row].to_string(),
            Column::Text(v) => v[row].clone(),
        }
    }
}

/// A rectangular table with unique column names.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    names: Vec<String>,
    columns: Vec<Column>,
}

impl TabularDataset {
    pub fn new(names: Vec<String>, columns: Vec<Column>) -> Result<Self, DataError> {
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(DataError::DuplicateColumn(n.clone()));
            }
        }
        let expected = columns.first().map_or(0, Column::len);
        for (n, c) in names.iter().zip(&columns) {
            if c.len() != expected {
                return Err(DataError::LengthMismatch { column: n.clone(), expected, found: c.len() });
            }
        }
        Ok(Self { names, columns })
    }

    pub fn from_numeric(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self, DataError> {
        Self::new(names, columns.into_iter().map(Column::Numeric).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Column::len)
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<&Column, DataError> {
        self.index_of(name).map(|i| &self.columns[i]).ok_or_else(|| DataError::NoSuchColumn(name.to_string()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64], DataError> {
        self.column(name)?.as_numeric().ok_or_else(|| DataError::NotNumeric(name.to_string()))
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self, DataError> {
        let cols = names.iter().map(|n| self.column(n).cloned()).collect::<Result<Vec<_>, _>>()?;
        Self::new(names.to_vec(), cols)
    }

    pub fn rename(&mut self, from: &str, to: &str) -> Result<(), DataError> {
        let i = self.index_of(from).ok_or_else(|| DataError::NoSuchColumn(from.to_string()))?;
        if self.index_of(to).is_some_and(|j| j != i) {
            return Err(DataError::DuplicateColumn(to.to_string()));
        }
        self.names[i] = to.to_string();
        Ok(())
    }

    /// CSV text with a header row; numbers in shortest round-trip form.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.names).expect("in-memory write");
        for r in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c.cell(r))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
        let header: Vec<String> = rdr.headers().map_err(|e| DataError::Csv(e.to_string()))?.iter().map(|s| s.trim().to_string()).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(DataError::MissingHeader);
        }
        let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
            if rec.len() != header.len() {
                return Err(DataError::RaggedRow { row, expected: header.len(), found: rec.len() });
            }
            for (j, cell) in rec.iter().enumerate() {
                let cell = cell.trim();
                if cell.is_empty() {
                    return Err(DataError::EmptyCell { row, column: header[j].clone() });
                }
                raw[j].push(cell.to_string());
            }
        }
        let mut columns = Vec::with_capacity(header.len());
        for (name, cells) in header.iter().zip(raw) {
            let parsed: Vec<Option<f64>> = cells.iter().map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
            if parsed.iter().all(Option::is_some) {
                columns.push(Column::Numeric(parsed.into_iter().flatten().collect()));
            } else if parsed.iter().all(Option::is_none) {
                columns.push(Column::Text(cells));
            } else {
                // Mixed numeric and non-numeric cells: report the first stray one.
                let row = parsed.iter().position(Option::is_none).expect("mixed column");
                return Err(DataError::UnparseableCell { row: row + 1, column: name.clone(), value: cells[row].clone() });
            }
        }
        Self::new(header, columns)
    }

    pub fn read_csv(path: &Path) -> Result<Self, DataError> {
        let file = fs::File::open(path).map_err(|e| DataError::Io { path: path.display().to_string(), cause: e.to_string() })?;
        Self::from_csv_reader(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_preserves_values() {
        let d =
            TabularDataset::from_numeric(vec!["a".into(), "b".into()], vec![vec![0.1, 1.0 / 3.0, -2.0], vec![1e-12, 5.0, 7.25]]).unwrap();
        let text = d.to_csv_string();
        assert!(text.starts_with("a,b\n0.1,0.000000000001\n"));
        let back = TabularDataset::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn text_columns_are_kept() {
        let d = TabularDataset::from_csv_reader("t,y\nlow,1\nhigh,2\n".as_bytes()).unwrap();
        assert_eq!(d.column("t").unwrap(), &Column::Text(vec!["low".into(), "high".into()]));
    }

    #[test]
    fn bad_rows_are_row_indexed() {
        let err = TabularDataset::from_csv_reader("a,b\n1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::UnparseableCell { row: 2, .. }), "{err}");
        let err = TabularDataset::from_csv_reader("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::RaggedRow { row: 2, .. }));
        let err = TabularDataset::from_csv_reader("a,b\n1,\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::EmptyCell { row: 1, .. }));
        assert!(matches!(TabularDataset::from_csv_reader("a,a\n1,2\n".as_bytes()), Err(DataError::DuplicateColumn(_))));
    }

    #[test]
    fn missing_file_names_path() {
        let err = TabularDataset::read_csv(Path::new("/nonexistent/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }
}
