//! Residual bookkeeping shared by every checker.

use std::fmt;

use num_traits::Zero;

use crate::{KForm, Matrix, Polyvector, RationalExpr, VectorField};

/// Anything that can be tested for exact vanishing and printed.
pub trait Residual {
    fn vanishes(&self) -> bool;
    fn render(&self) -> String;
}

impl Residual for RationalExpr {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for KForm {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for Polyvector {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for VectorField {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for Matrix {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for Vec<RationalExpr> {
    fn vanishes(&self) -> bool {
        self.iter().all(Zero::is_zero)
    }
    fn render(&self) -> String {
        let parts: Vec<String> = self.iter().map(ToString::to_string).collect();
        format!("({})", parts.join(", "))
    }
}

/// Outcome of one named check: how many residuals were evaluated and which
/// of them failed to vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualReport {
    pub name: String,
    pub checked: usize,
    pub nonzero: Vec<(String, String)>,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>) -> Self {
        ResidualReport {
            name: name.into(),
            checked: 0,
            nonzero: Vec::new(),
        }
    }

    pub fn record<R: Residual + ?Sized>(&mut self, label: impl FnOnce() -> String, value: &R) {
        self.checked += 1;
        if !value.vanishes() {
            self.nonzero.push((label(), value.render()));
        }
    }

    /// Record a boolean condition that is not a residual expression.
    pub fn require(&mut self, label: impl Into<String>, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.nonzero.push((label.into(), detail()));
        }
    }

    pub fn passed(&self) -> bool {
        self.nonzero.is_empty()
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.checked += other.checked;
        let prefix = other.name;
        self.nonzero
            .extend(other.nonzero.into_iter().map(|(l, v)| (format!("{prefix}: {l}"), v)));
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "fail" };
        write!(f, "{}: {verdict} ({} residuals", self.name, self.checked)?;
        if !self.passed() {
            write!(f, ", {} nonzero", self.nonzero.len())?;
        }
        write!(f, ")")?;
        for (label, value) in &self.nonzero {
            write!(f, "\n  {label} = {value}")?;
        }
        Ok(())
    }
}

/// A collection of named reports.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckSet {
    pub reports: Vec<ResidualReport>,
}

impl CheckSet {
    pub fn push(&mut self, r: ResidualReport) {
        self.reports.push(r);
    }

    pub fn passed(&self) -> bool {
        self.reports.iter().all(ResidualReport::passed)
    }

    pub fn get(&self, name: &str) -> Option<&ResidualReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

/// Evaluate `eval` on every case (in parallel) and record the results in
/// case order, so the report does not depend on the thread count.
pub fn run_cases<C, R, L, F>(report: &mut ResidualReport, cases: &[C], label: L, eval: F)
where
    C: Sync,
    R: Residual + Send,
    L: Fn(&C) -> String,
    F: Fn(&C) -> R + Sync,
{
    use rayon::prelude::*;
    let results: Vec<R> = cases.par_iter().map(&eval).collect();
    for (c, r) in cases.iter().zip(results) {
        report.record(|| label(c), &r);
    }
}

/// Index pairs for the residual protocol over a list whose first `base`
/// entries are the bare frame and the rest are its coordinate multiples:
/// every pair in which at most one slot is multiplied.
pub fn protocol_pairs(len: usize, base: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..len {
        for j in 0..len {
            if i < base || j < base {
                out.push((i, j));
            }
        }
    }
    out
}
