//! Randomized verification suites. Each check runs a fixed number of seeded
//! trials and reports the worst measured quantity against its tolerance.

mod bounds;
mod gen;
mod hamiltonian;
mod mechanism;
mod onestep;
mod optimizer;
mod schur;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use gen::matched_max_distance;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub criterion: u8,
    pub passed: bool,
    pub trials: usize,
    pub violations: usize,
    /// Worst value of the checked quantity, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    fn new(name: &str, criterion: u8, trials: usize, violations: usize, worst: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            criterion,
            passed: violations == 0 && trials > 0,
            trials,
            violations,
            worst,
            tolerance,
            detail: String::new(),
            seconds: 0.0,
        }
    }

    fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Extra condition on top of zero violations, e.g. enough informative trials.
    fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(why);
        }
        self
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] C{} {}: {}/{} violations, worst {:.3e} (tol {:.1e}) in {:.2}s",
            if self.passed { "pass" } else { "FAIL" },
            self.criterion,
            self.name,
            self.violations,
            self.trials,
            self.worst,
            self.tolerance,
            self.seconds
        )?;
        if !self.detail.is_empty() {
            write!(f, " -- {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Schur,
    Hurwitz,
    Optimizer,
    Onestep,
    Hamiltonian,
    Bounds,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Schur, Suite::Hurwitz, Suite::Optimizer, Suite::Onestep, Suite::Hamiltonian, Suite::Bounds];

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Schur => &[1, 2, 10],
            Suite::Hurwitz => &[3],
            Suite::Optimizer => &[4, 5, 6],
            Suite::Onestep => &[7, 11],
            Suite::Hamiltonian => &[9],
            Suite::Bounds => &[8],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Schur => "schur",
            Suite::Hurwitz => "hurwitz",
            Suite::Optimizer => "optimizer",
            Suite::Onestep => "onestep",
            Suite::Hamiltonian => "hamiltonian",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown suite {s}; expected schur, hurwitz, optimizer, onestep, hamiltonian, bounds or all")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn timed(f: impl FnOnce() -> Result<Vec<CheckResult>>) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let mut checks = f()?;
    let secs = start.elapsed().as_secs_f64();
    let n = checks.len().max(1) as f64;
    for c in &mut checks {
        c.seconds = secs / n;
    }
    Ok(checks)
}

/// Every check belonging to one acceptance criterion.
pub fn run_criterion(criterion: u8, seed: u64) -> Result<Vec<CheckResult>> {
    timed(|| match criterion {
        1 => schur::criterion1(seed),
        2 => schur::criterion2(seed),
        3 => schur::criterion3(seed),
        4 => optimizer::criterion4(seed),
        5 => optimizer::criterion5(seed),
        6 => optimizer::criterion6(seed),
        7 => onestep::criterion7(seed),
        8 => bounds::criterion8(seed),
        9 => hamiltonian::criterion9(seed),
        10 => mechanism::criterion10(seed),
        11 => onestep::criterion11(seed),
        other => Err(LabError::Config(format!("no criterion {other}"))),
    })
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for &c in suite.criteria() {
        checks.extend(run_criterion(c, seed)?);
    }
    Ok(SuiteReport { suite, seed, passed: checks.iter().all(|c| c.passed), checks })
}
