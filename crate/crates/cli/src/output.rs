use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

pub const POINT_COLUMNS: [&str; 5] = ["re(z)", "im(z)", "re(value)", "im(value)", "abs_error"];

/// Rows produced by one command, kept in both CSV and JSON shape.
pub struct Output {
    header: Vec<String>,
    csv: Vec<Vec<String>>,
    json: Vec<Value>,
    pub pass: bool,
    pub max_error: f64,
    /// Command-specific summary fields beyond `pass` and `max_error`.
    pub extra: Map<String, Value>,
}

/// Shortest round-trip form, matching the JSON output.
pub fn num(x: f64) -> String {
    cell(&serde_json::json!(x))
}

impl Output {
    pub fn table(columns: &[&str]) -> Self {
        Output {
            header: columns.iter().map(|s| s.to_string()).collect(),
            csv: Vec::new(),
            json: Vec::new(),
            pass: true,
            max_error: 0.0,
            extra: Map::new(),
        }
    }

    /// A pointwise table: the five fixed columns followed by `extra`.
    pub fn pointwise(extra: &[&str]) -> Self {
        let mut cols: Vec<&str> = POINT_COLUMNS.to_vec();
        cols.extend_from_slice(extra);
        Self::table(&cols)
    }

    pub fn push(&mut self, csv: Vec<String>, json: Value) {
        debug_assert_eq!(csv.len(), self.header.len());
        self.csv.push(csv);
        self.json.push(json);
    }

    /// `extra` pairs become trailing CSV cells and additional JSON keys.
    pub fn push_point(&mut self, z: Option<Complex64>, value: Complex64, abs_error: f64, extra: Vec<(&str, Value)>) {
        let mut cells = match z {
            Some(z) => vec![num(z.re), num(z.im)],
            None => vec![String::new(), String::new()],
        };
        cells.extend([num(value.re), num(value.im), num(abs_error)]);
        let mut obj = Map::new();
        obj.insert("z".into(), serde_json::to_value(z).unwrap());
        obj.insert("value".into(), serde_json::to_value(value).unwrap());
        obj.insert("abs_error".into(), serde_json::to_value(abs_error).unwrap());
        for (k, v) in extra {
            cells.push(cell(&v));
            obj.insert(k.to_string(), v);
        }
        self.push(cells, Value::Object(obj));
    }

    pub fn rows(&self) -> usize {
        self.json.len()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.csv {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W, command: &str, config: Value, runtime_ms: Option<u128>) -> anyhow::Result<()> {
        #[derive(Serialize)]
        struct Summary<'a> {
            pass: bool,
            max_error: f64,
            runtime_ms: Option<u128>,
            #[serde(flatten)]
            extra: &'a Map<String, Value>,
        }
        #[derive(Serialize)]
        struct Report<'a> {
            command: &'a str,
            config: Value,
            rows: &'a [Value],
            summary: Summary<'a>,
        }
        let report = Report {
            command,
            config,
            rows: &self.json,
            summary: Summary {
                pass: self.pass,
                max_error: self.max_error,
                runtime_ms,
                extra: &self.extra,
            },
        };
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        Ok(())
    }
}

/// CSV rendering of a JSON scalar; arrays become space-separated lists.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells() {
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(cell(&serde_json::json!([1, 0, 2])), "1 0 2");
        assert_eq!(cell(&Value::Null), "");
    }

    #[test]
    fn pointwise_rows() {
        let mut out = Output::pointwise(&["note"]);
        out.push_point(None, Complex64::new(1.0, -1.0), 0.25, vec![("note", serde_json::json!("a,b"))]);
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "re(z),im(z),re(value),im(value),abs_error,note\n,,1.0,-1.0,0.25,\"a,b\"\n"
        );
    }
}
