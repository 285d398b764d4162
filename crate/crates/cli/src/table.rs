use std::io::Write;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where a row's reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Compared against a published closed form or constant.
    PaperTarget,
    /// Produced and checked by computation alone.
    Computed,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Self::PaperTarget => "paper_target",
            Self::Computed => "computed",
        }
    }
}

/// Ordered rows sharing one set of columns, plus run metadata.
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    provenance: Vec<Provenance>,
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new(), provenance: Vec::new(), meta: Map::new() }
    }

    pub fn push(&mut self, row: Vec<Value>, provenance: Provenance) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
        self.provenance.push(provenance);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_owned(), value.into());
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .zip(&self.provenance)
            .map(|(row, p)| {
                let mut obj: Map<String, Value> =
                    self.columns.iter().map(|c| c.to_string()).zip(row.iter().cloned()).collect();
                obj.insert("provenance".into(), json!(p.as_str()));
                Value::Object(obj)
            })
            .collect();
        json!({ "rows": rows, "meta": self.meta })
    }

    /// Header row first; the provenance column is appended only when
    /// `with_provenance` is set.
    pub fn write_csv(&self, out: impl Write, with_provenance: bool) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.columns.clone();
        if with_provenance {
            header.push("provenance");
        }
        w.write_record(&header)?;
        for (row, p) in self.rows.iter().zip(&self.provenance) {
            let mut rec: Vec<String> = row.iter().map(cell).collect();
            if with_provenance {
                rec.push(p.as_str().into());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render(&self, format: Format, out: &mut dyn Write, with_provenance: bool) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)
            }
            Format::Csv => self.write_csv(out, with_provenance).map_err(std::io::Error::other),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_blanks() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![json!("x,y"), Value::Null], Provenance::Computed);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, true).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,provenance\n\"x,y\",,computed\n");
    }

    #[test]
    fn json_rows_carry_provenance() {
        let mut t = Table::new(&["a"]);
        t.push(vec![json!(1)], Provenance::PaperTarget);
        t.meta("k", 2);
        let v = t.to_json();
        assert_eq!(v["rows"][0]["provenance"], "paper_target");
        assert_eq!(v["meta"]["k"], 2);
    }
}
