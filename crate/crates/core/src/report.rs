//! Check records, the JSON summary and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

/// `{q, beta, gamma}` echoed into every summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub q: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Params {
    /// `γ = 1/q`, `β = (1 - γ)/2`; no domain check so any run can report it.
    pub fn from_q(q: f64) -> Self {
        let gamma = 1.0 / q;
        Self {
            q,
            beta: (1.0 - gamma) / 2.0,
            gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Distance to the threshold, positive when passing.
    pub worst_slack: Option<f64>,
    pub details: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, worst_slack: Option<f64>, details: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            worst_slack,
            details,
        }
    }

    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64, details: String) -> Self {
        let slack = limit - value;
        Self::new(name, slack >= 0.0, Some(slack), details)
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &str, value: f64, limit: f64, details: String) -> Self {
        let slack = value - limit;
        Self::new(name, slack >= 0.0, Some(slack), details)
    }

    /// A failed check standing in for a computation that errored out.
    pub fn errored(name: &str, err: &crate::Error) -> Self {
        Self::new(name, false, None, format!("error: {err}"))
    }

    /// `PASS name (slack …): details`.
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        match self.worst_slack {
            Some(s) => format!("{status} {} (slack {s:.3e}): {}", self.name, self.details),
            None => format!("{status} {}: {}", self.name, self.details),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub params: Params,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn new(params: Params) -> Self {
        Self {
            params,
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match *self {
            Cell::Int(n) => write!(out, "{n}").unwrap(),
            Cell::Real(x) => out.push_str(&crate::lorentz::fmt_decimal(x)),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n as i64)
    }
}

/// A named CSV table: header plus rows of integer or real cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&'static str]) -> Self {
        Self {
            file_name: file_name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(&self.file_name), self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_lf() {
        let mut t = Table::new("x.csv", &["n", "value"]);
        t.push(vec![3usize.into(), 0.1.into()]);
        assert_eq!(t.to_csv(), "n,value\n3,1.0000000000000001e-1\n");
        let parsed: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(parsed, 0.1);
    }

    #[test]
    fn summary_schema() {
        let mut s = Summary::new(Params::from_q(4.0));
        s.checks.push(Check::at_least("a", 1.0, 0.5, "ok".into()));
        s.checks.push(Check::new("b", false, None, "bad".into()));
        let v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(v["params"]["q"], 4.0);
        assert_eq!(v["params"]["gamma"], 0.25);
        assert_eq!(v["params"]["beta"], 0.375);
        assert_eq!(v["checks"][0]["pass"], true);
        assert_eq!(v["checks"][0]["worst_slack"], 0.5);
        assert!(v["checks"][1]["worst_slack"].is_null());
        assert!(!s.all_pass());
        assert_eq!(s.failed().count(), 1);
    }

    #[test]
    fn check_thresholds() {
        assert!(Check::at_most("x", 1.0, 1.0, String::new()).pass);
        assert!(!Check::at_most("x", 1.5, 1.0, String::new()).pass);
        assert!(!Check::at_least("x", f64::NAN, 1.0, String::new()).pass);
    }
}
