//! Tabular numeric results with deterministic CSV and JSON emission.

use serde::Serialize;

/// One table cell. Floats print as shortest round-trip decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v}"),
            Cell::Bool(v) => v.to_string(),
        }
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Emission metadata. The timestamp never enters serialized bytes, so
/// identical (config, seed, version) runs serialize identically.
#[derive(Debug, Clone, Serialize)]
pub struct TableMetadata {
    pub config_hash: String,
    pub version: String,
    #[serde(skip)]
    pub timestamp: std::time::SystemTime,
}

impl TableMetadata {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self {
            config_hash: config_hash.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now(),
        }
    }
}

/// A rectangular table of results.
#[derive(Debug, Clone, Serialize)]
pub struct ResultTable {
    pub metadata: TableMetadata,
    pub schema: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(schema: &[&str], metadata: TableMetadata) -> Self {
        Self { metadata, schema: schema.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.schema.len(), "ragged result row");
        self.rows.push(row);
    }

    /// RFC-4180 text: CRLF line endings, header row first, quoting only where
    /// required.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let write_record = |out: &mut String, fields: &[String]| {
            let encoded: Vec<String> = fields
                .iter()
                .map(|f| {
                    if f.contains(',') || f.contains('"') || f.contains('\n') || f.contains('\r') {
                        format!("\"{}\"", f.replace('"', "\"\""))
                    } else {
                        f.clone()
                    }
                })
                .collect();
            out.push_str(&encoded.join(","));
            out.push_str("\r\n");
        };
        write_record(&mut out, &self.schema);
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::render).collect();
            write_record(&mut out, &fields);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(&["check", "measured", "pass"], TableMetadata::new("abc"));
        t.push(vec!["round, trip".into(), 0.5f64.into(), true.into()]);
        t.push(vec!["plain".into(), 1e-11.into(), false.into()]);
        t
    }

    #[test]
    fn csv_quoting_and_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines[0], "check,measured,pass");
        assert_eq!(lines[1], "\"round, trip\",0.5,true");
        assert_eq!(lines[2], "plain,0.00000000001,false");
    }

    #[test]
    fn emission_is_deterministic() {
        // two tables created at different instants serialize identically
        let a = sample();
        std::thread::sleep(std::time::Duration::from_millis(5));
        let b = sample();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_carries_metadata() {
        let j = sample().to_json();
        assert!(j.contains("config_hash"));
        assert!(j.contains("\"abc\""));
        assert!(!j.contains("timestamp"));
    }
}
