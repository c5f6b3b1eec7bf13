//! CSV text with a provenance comment header.

use serde::Serialize;

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    /// Starts a document whose first line echoes `config` as JSON.
    pub fn new(config: &impl Serialize) -> Self {
        let json = serde_json::to_string(config).expect("config serializes");
        let mut csv = Csv::default();
        csv.comment(&json);
        csv
    }

    pub fn comment(&mut self, line: &str) {
        self.text.push_str("# ");
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn header(&mut self, columns: &[&str]) {
        self.text.push_str(&columns.join(","));
        self.text.push('\n');
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
