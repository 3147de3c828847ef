//! Tabular output shared by every command: CSV with a schema comment line,
//! or a JSON document that also carries the run configuration.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Environment variable naming the default output directory.
pub const OUT_DIR_VAR: &str = "ANYSPEED_OUT_DIR";

/// Significant digits of every floating-point value written.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(value: Option<f64>) -> Cell {
        value.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => format_number(*x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits, trailing zeros removed.
/// Plain notation is used for decimal exponents in `[-5, 12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        return format!("{sign}{}e{exp}", trim_fraction(mantissa));
    }
    let plain = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let point = exp as usize + 1;
        format!("{}.{}", &digits[..point], &digits[point..])
    };
    format!("{sign}{}", trim_fraction(&plain))
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Versioned schema tag, e.g. `sweep/v1`.
    pub schema: String,
    /// File stem used when the output location is a directory.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &str, name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            schema: schema.into(),
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.schema);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# schema: {}", self.schema)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, config: &Value) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("schema".into(), Value::String(self.schema.clone()));
        doc.insert("config".into(), config.clone());
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }

    pub fn write<W: Write>(&self, out: W, format: Format, config: &Value) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, &self.to_json(config))?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}

/// Where the tables of one run go.
#[derive(Debug, Clone, PartialEq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
    Directory(PathBuf),
}

/// `--output` wins; otherwise the environment directory; otherwise stdout.
/// Several tables always go to a directory, one file each.
pub fn destination(output: Option<&Path>, tables: usize) -> Destination {
    let env_dir = std::env::var_os(OUT_DIR_VAR).filter(|v| !v.is_empty()).map(PathBuf::from);
    match (output, tables) {
        (Some(path), 1) => Destination::File(path.to_path_buf()),
        (Some(path), _) => Destination::Directory(path.to_path_buf()),
        (None, _) => match env_dir {
            Some(dir) => Destination::Directory(dir),
            None if tables == 1 => Destination::Stdout,
            None => Destination::Directory(PathBuf::from(".")),
        },
    }
}

/// Writes every table and returns the paths written.
pub fn emit(tables: &[Table], output: Option<&Path>, format: Format, config: &Value) -> Result<Vec<PathBuf>> {
    match destination(output, tables.len()) {
        Destination::Stdout => {
            let stdout = io::stdout();
            for t in tables {
                t.write(stdout.lock(), format, config)?;
            }
            Ok(Vec::new())
        }
        Destination::File(path) => {
            write_file(&tables[0], &path, format, config)?;
            Ok(vec![path])
        }
        Destination::Directory(dir) => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            tables
                .iter()
                .map(|t| {
                    let path = dir.join(format!("{}.{}", t.name, format.extension()));
                    write_file(t, &path, format, config)?;
                    Ok(path)
                })
                .collect()
        }
    }
}

fn write_file(table: &Table, path: &Path, format: Format, config: &Value) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    table.write(io::BufWriter::new(file), format, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(-0.5718234), "-0.5718234");
        assert_eq!(format_number(57.18645209812881), "57.1864520981");
        assert_eq!(format_number(1e-14), "1e-14");
        assert_eq!(format_number(4.797946441907449e-15), "4.79794644191e-15");
        assert_eq!(format_number(0.000123456789012345), "0.000123456789012");
        assert_eq!(format_number(60.0), "60");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_number(0.9999999999996), "1");
    }

    #[test]
    fn formatted_values_round_trip_to_twelve_digits() {
        for x in [1.0 / 3.0, -2.0 / 7.0 * 1e-9, 6.02214076e23, 0.1] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs(), "{x} → {back}");
        }
    }

    #[test]
    fn csv_has_schema_comment_and_blank_cells() {
        let mut t = Table::new("demo/v1", "demo", &["a", "b", "c"]);
        t.push(vec![Cell::Num(0.5), Cell::Empty, Cell::Bool(true)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# schema: demo/v1\na,b,c\n0.5,,true\n");
    }

    #[test]
    fn json_rows_are_keyed_by_header() {
        let mut t = Table::new("demo/v1", "demo", &["x", "tag"]);
        t.push(vec![Cell::Num(1.0 / 3.0), "hi".into()]);
        let doc = t.to_json(&Value::Null);
        assert_eq!(doc["rows"][0]["x"], 0.333333333333);
        assert_eq!(doc["rows"][0]["tag"], "hi");
        assert_eq!(doc["schema"], "demo/v1");
    }
}
