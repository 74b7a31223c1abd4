//! Ordered `key: value` reports.

use std::fmt::Display;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.put(key, fmt_num(value))
    }

    pub fn list(&mut self, key: impl Into<String>, values: &[f64]) -> &mut Self {
        let v: Vec<String> = values.iter().map(|&x| fmt_num(x)).collect();
        self.put(key, v.join(","))
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        if format == Format::Csv {
            out.push_str("key,value\n");
        }
        for (k, v) in &self.lines {
            match format {
                Format::Text => out.push_str(&format!("{k}: {v}\n")),
                Format::Csv => out.push_str(&format!("{k},{}\n", csv_field(v))),
            }
        }
        out
    }
}

/// Shortest round-trip rendering; exponent form outside `[1e-4, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}
