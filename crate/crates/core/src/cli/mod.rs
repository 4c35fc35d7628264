//! Config-driven experiment runners behind the `hpinterp` binary.
//!
//! Every runner returns an [`Outcome`]: one CSV table plus the checks that
//! decide the exit code. Rows come out in grid order, whatever order the
//! worker pool finishes in.

mod config;
mod run;

pub use config::{
    Checks, DecompConfig, InverseConfig, LiftConfig, MeshSource, NormConfig, PropertyConfig, SweepConfig, VariantName,
};
pub use run::{
    check_mesh, export_form, run_decomp_verify, run_equivalence_sweep, run_inverse_sweep, run_lift_verify, run_norm,
    FormKind,
};

use crate::decomp::DecompError;
use crate::fracnorm::NormError;
use crate::hpspace::HpError;
use crate::lifting::LiftError;
use crate::mesh::MeshError;
use crate::polyalg::PolyError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Space(#[from] HpError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// Floats use the shortest representation that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// Numeric values of one column, in row order.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        match self.column(name) {
            Some(c) => self.rows.iter().filter_map(|r| r[c].as_f64()).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// A named threshold test.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, passed: value <= limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, passed: value >= limit }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {:?} (limit {:?})", if self.passed { "PASS" } else { "FAIL" }, self.name, self.value, self.limit)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 2.5e17, -0.0, 6.02214076e23] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(Cell::Float(1.0).render(), "1.0");
    }

    #[test]
    fn csv_quotes_labels() {
        let mut t = Table::new(vec!["property", "max"]);
        t.rows.push(vec!["bc_l2(E={0,1})".into(), 2.0.into()]);
        t.rows.push(vec!["trace".into(), Cell::Empty]);
        assert_eq!(t.to_csv().unwrap(), "property,max\n\"bc_l2(E={0,1})\",2.0\ntrace,\n");
        assert_eq!(t.floats("max"), vec![2.0]);
    }

    #[test]
    fn checks_compare() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_least("b", 0.5, 0.9).passed);
        let o = Outcome { table: Table::new(vec![]), checks: vec![Check::at_most("a", 2.0, 1.0)] };
        assert!(!o.passed());
        assert!(o.checks[0].line().starts_with("FAIL a"));
    }
}
