//! Orbit comparison, approach-region checks and pre-model validation.
//!
//! Every check produces [`CheckLine`]s (`CHECK <name> PASS|FAIL margin=<x>`);
//! reports carry their verdicts and [`Report::verify`] turns a failure into
//! [`Error::Invariant`].

mod compare;
mod premodel;
mod regions;

pub use compare::{
    extend_to_bilateral, orbit_distance_profile, orbit_distance_profile_with, shift_recovery,
    OrbitComparison, ShiftRecovery, EPS_PLATEAU,
};
pub use premodel::{premodel_validate, Intertwiner, PreModel, PremodelReport, PREMODEL_SAMPLES};
pub use regions::{
    region_equivalence_check, sample_tube, tube_covering_check, RegionReport, TubeReport,
    TubeSample,
};

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::fmt15;

/// One line of a check report. A positive margin means the check passed with room to spare.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, passed: bool, margin: f64) -> Self {
        Self {
            name: name.into(),
            passed,
            margin,
        }
    }

    /// Passes when `margin > 0`.
    pub fn from_margin(name: impl Into<String>, margin: f64) -> Self {
        Self::new(name, margin > 0.0, margin)
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} margin={}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            fmt15(self.margin)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, line: CheckLine) {
        self.lines.push(line);
    }

    pub fn extend(&mut self, other: Report) {
        self.lines.extend(other.lines);
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.name == name)
    }

    pub fn verify(&self) -> Result<()> {
        let failed: Vec<String> = self.failures().map(|l| l.to_string()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::Invariant(failed.join("; ")))
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let l = CheckLine::from_margin("julia", 0.25);
        assert_eq!(l.to_string(), "CHECK julia PASS margin=2.50000000000000e-1");
        let l = CheckLine::from_margin("step", -1.0);
        assert_eq!(l.to_string(), "CHECK step FAIL margin=-1.00000000000000e0");
        let mut r = Report::new();
        r.push(CheckLine::from_margin("a", 1.0));
        assert!(r.verify().is_ok());
        r.push(l);
        assert!(matches!(r.verify(), Err(Error::Invariant(_))));
        assert_eq!(r.to_string().lines().count(), 2);
    }
}
