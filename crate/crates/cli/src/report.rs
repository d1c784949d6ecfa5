//! Report model and the three output formats.
//!
//! CSV cells carry 17 significant digits, JSON numbers use the shortest
//! round-trip form, tables use fixed-width scientific notation.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Map, Value as Json};

use mwp_core::ProductVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone)]
pub enum Value {
    Number(f64),
    Count(usize),
    Text(String),
    Flag(bool),
    Vector { labels: Vec<String>, values: Vec<f64> },
    Table { columns: Vec<String>, rows: Vec<(String, Vec<f64>)> },
}

impl Value {
    pub fn vector(labels: &[String], values: &[f64]) -> Value {
        Value::Vector { labels: labels.to_vec(), values: values.to_vec() }
    }

    pub fn product(labels: &[String], v: &ProductVector) -> Value {
        Value::vector(labels, &v.components())
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub fields: Vec<(String, Value)>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Section { name: name.to_string(), fields: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn num(self, key: &str, v: f64) -> Self {
        self.with(key, Value::Number(v))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub sections: Vec<Section>,
}

/// Seventeen significant digits; enough to round-trip any f64.
pub fn sci17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn json_number(v: f64) -> Json {
    serde_json::Number::from_f64(v).map_or_else(|| Json::String(format!("{v}")), Json::Number)
}

fn to_json(value: &Value) -> Json {
    match value {
        Value::Number(v) => json_number(*v),
        Value::Count(n) => json!(n),
        Value::Text(s) => json!(s),
        Value::Flag(b) => json!(b),
        Value::Vector { labels, values } => json!({
            "labels": labels,
            "components": values.iter().map(|v| json_number(*v)).collect::<Vec<_>>(),
        }),
        Value::Table { columns, rows } => json!({
            "columns": columns,
            "rows": rows.iter().map(|(label, vals)| json!({
                "label": label,
                "values": vals.iter().map(|v| json_number(*v)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
    }
}

impl Report {
    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
            Format::Table => self.render_table(),
        }
    }

    fn render_json(&self) -> String {
        let mut root = Map::new();
        for section in &self.sections {
            let mut fields = Map::new();
            for (key, value) in &section.fields {
                fields.insert(key.clone(), to_json(value));
            }
            root.insert(section.name.clone(), Json::Object(fields));
        }
        let mut out = serde_json::to_string_pretty(&Json::Object(root)).expect("report serializes");
        out.push('\n');
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "field", "row", "column", "value"]).expect("in-memory write");
        for section in &self.sections {
            for (key, value) in &section.fields {
                let mut rec = |row: &str, col: &str, val: String| {
                    w.write_record([section.name.as_str(), key.as_str(), row, col, val.as_str()])
                        .expect("in-memory write");
                };
                match value {
                    Value::Number(v) => rec("", "", sci17(*v)),
                    Value::Count(n) => rec("", "", n.to_string()),
                    Value::Text(s) => rec("", "", s.clone()),
                    Value::Flag(b) => rec("", "", b.to_string()),
                    Value::Vector { labels, values } => {
                        for (l, v) in labels.iter().zip(values) {
                            rec("", l, sci17(*v));
                        }
                    }
                    Value::Table { columns, rows } => {
                        for (label, vals) in rows {
                            for (c, v) in columns.iter().zip(vals) {
                                rec(label, c, sci17(*v));
                            }
                        }
                    }
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", section.name);
            for (key, value) in &section.fields {
                match value {
                    Value::Number(v) => {
                        let _ = writeln!(out, "  {key:<28}{v:>24.12e}");
                    }
                    Value::Count(n) => {
                        let _ = writeln!(out, "  {key:<28}{n:>24}");
                    }
                    Value::Text(s) => {
                        let _ = writeln!(out, "  {key:<28}{s:>24}");
                    }
                    Value::Flag(b) => {
                        let _ = writeln!(out, "  {key:<28}{b:>24}");
                    }
                    Value::Vector { labels, values } => {
                        let _ = writeln!(out, "  {key}");
                        for (l, v) in labels.iter().zip(values) {
                            let _ = writeln!(out, "    {l:<26}{v:>24.12e}");
                        }
                    }
                    Value::Table { columns, rows } => {
                        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(key.len());
                        let _ = write!(out, "  {key:<width$}");
                        for c in columns {
                            let _ = write!(out, "{c:>22}");
                        }
                        out.push('\n');
                        for (label, vals) in rows {
                            let _ = write!(out, "  {label:<width$}");
                            for v in vals {
                                let _ = write!(out, "{v:>22.12e}");
                            }
                            out.push('\n');
                        }
                    }
                }
            }
        }
        out
    }
}

/// Column-oriented data such as a path trace.
#[derive(Debug, Clone, Default)]
pub struct Frame {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Number(f64),
    Text(String),
}

impl Frame {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(|c| match c {
                        Cell::Number(v) => sci17(*v),
                        Cell::Text(s) => s.clone(),
                    }))
                    .expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
            }
            Format::Json => {
                let rows: Vec<Json> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut m = Map::new();
                        for (c, cell) in self.columns.iter().zip(row) {
                            let v = match cell {
                                Cell::Number(v) => json_number(*v),
                                Cell::Text(s) => json!(s),
                            };
                            m.insert(c.clone(), v);
                        }
                        Json::Object(m)
                    })
                    .collect();
                let mut out = serde_json::to_string_pretty(&Json::Array(rows)).expect("frame serializes");
                out.push('\n');
                out
            }
            Format::Table => {
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|j| {
                        self.rows
                            .iter()
                            .filter_map(|row| match row.get(j) {
                                Some(Cell::Text(s)) => Some(s.len() + 2),
                                _ => None,
                            })
                            .chain([self.columns[j].len() + 2, 22])
                            .max()
                            .unwrap_or(22)
                    })
                    .collect();
                let mut out = String::new();
                for (c, width) in self.columns.iter().zip(&widths) {
                    let _ = write!(out, "{c:>width$}");
                }
                out.push('\n');
                for row in &self.rows {
                    for (cell, width) in row.iter().zip(&widths) {
                        match cell {
                            Cell::Number(v) => {
                                let _ = write!(out, "{v:>width$.12e}");
                            }
                            Cell::Text(s) => {
                                let _ = write!(out, "{s:>width$}");
                            }
                        }
                    }
                    out.push('\n');
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::default();
        r.push(
            Section::new("s")
                .num("x", 0.1)
                .with("v", Value::vector(&["a".into(), "b".into()], &[1.0, -2.5]))
                .with("t", Value::Table { columns: vec!["c".into()], rows: vec![("r".into(), vec![3.0])] })
                .with("ok", Value::Flag(true)),
        );
        r
    }

    #[test]
    fn csv_round_trips_numbers() {
        let text = sample().render(Format::Csv);
        assert!(text.starts_with("section,field,row,column,value\n"));
        assert!(text.contains("s,x,,,1.0000000000000001e-1\n"));
        let cell = text.lines().nth(1).unwrap().rsplit(',').next().unwrap();
        assert_eq!(cell.parse::<f64>().unwrap(), 0.1);
        assert!(text.contains("s,t,r,c,3.0000000000000000e0\n"));
    }

    #[test]
    fn json_keeps_order_and_shortest_form() {
        let text = sample().render(Format::Json);
        let v: Json = serde_json::from_str(&text).unwrap();
        assert_eq!(v["s"]["x"], json!(0.1));
        assert_eq!(v["s"]["v"]["labels"], json!(["a", "b"]));
        assert_eq!(v["s"]["v"]["components"], json!([1.0, -2.5]));
        let keys: Vec<_> = v["s"].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["x", "v", "t", "ok"]);
    }

    #[test]
    fn non_finite_values_survive() {
        let mut r = Report::default();
        r.push(Section::new("s").num("bad", f64::NAN));
        assert!(r.render(Format::Json).contains("\"NaN\""));
        assert!(r.render(Format::Csv).contains("NaN"));
    }

    #[test]
    fn frame_formats() {
        let f = Frame {
            columns: vec!["y".into(), "status".into()],
            rows: vec![vec![Cell::Number(1.0), Cell::Text("ok".into())]],
        };
        assert_eq!(f.render(Format::Csv), "y,status\n1.0000000000000000e0,ok\n");
        let v: Json = serde_json::from_str(&f.render(Format::Json)).unwrap();
        assert_eq!(v[0]["status"], json!("ok"));
    }
}
