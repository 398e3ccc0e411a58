//! Verification reports with a stable JSON form.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "hurewicz-kit/1";

/// Counterexamples kept per check; the counts stay exact.
const MAX_EXAMPLES_PER_CHECK: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Vacuous,
    /// Exploratory checks: recorded, never a failure.
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub passed: u64,
    pub failed: u64,
    pub inconclusive: u64,
    pub note: String,
    #[serde(skip)]
    exploratory: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub check: String,
    pub input: String,
    pub observed: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub suite: String,
    pub params: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub counterexamples: Vec<Counterexample>,
}

impl Report {
    pub fn new(suite: &str) -> Report {
        Report {
            schema: SCHEMA,
            suite: suite.to_string(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            counterexamples: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Report {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Declares a check; its status is settled by [`Report::finish`].
    pub fn declare(&mut self, name: &str, note: &str) {
        self.declare_with(name, note, false);
    }

    /// Declares a check whose negative outcomes are findings, not failures.
    pub fn declare_exploratory(&mut self, name: &str, note: &str) {
        self.declare_with(name, note, true);
    }

    fn declare_with(&mut self, name: &str, note: &str, exploratory: bool) {
        if self.checks.iter().any(|c| c.name == name) {
            return;
        }
        self.checks.push(Check {
            name: name.to_string(),
            status: Status::Vacuous,
            passed: 0,
            failed: 0,
            inconclusive: 0,
            note: note.to_string(),
            exploratory,
        });
    }

    fn entry(&mut self, name: &str) -> &mut Check {
        if !self.checks.iter().any(|c| c.name == name) {
            self.declare(name, "");
        }
        self.checks
            .iter_mut()
            .find(|c| c.name == name)
            .expect("declared")
    }

    pub fn pass(&mut self, name: &str) {
        self.entry(name).passed += 1;
    }

    pub fn pass_n(&mut self, name: &str, n: u64) {
        self.entry(name).passed += n;
    }

    pub fn inconclusive(&mut self, name: &str) {
        self.entry(name).inconclusive += 1;
    }

    pub fn fail(&mut self, name: &str, input: impl Into<String>, observed: impl Into<String>) {
        let c = self.entry(name);
        c.failed += 1;
        let shown = c.failed as usize <= MAX_EXAMPLES_PER_CHECK;
        if shown {
            self.counterexamples.push(Counterexample {
                check: name.to_string(),
                input: input.into(),
                observed: observed.into(),
            });
        }
    }

    pub fn expect(
        &mut self,
        name: &str,
        ok: bool,
        input: impl FnOnce() -> String,
        observed: impl FnOnce() -> String,
    ) {
        if ok {
            self.pass(name);
        } else {
            self.fail(name, input(), observed());
        }
    }

    pub fn finish(mut self) -> Report {
        for c in &mut self.checks {
            c.status = if c.exploratory {
                Status::Info
            } else if c.failed > 0 {
                Status::Fail
            } else if c.passed > 0 {
                Status::Pass
            } else if c.inconclusive > 0 {
                Status::Inconclusive
            } else {
                Status::Vacuous
            };
        }
        self
    }

    /// Failures of non-exploratory checks.
    pub fn failures(&self) -> u64 {
        self.checks
            .iter()
            .filter(|c| !c.exploratory)
            .map(|c| c.failed)
            .sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite {}\n", self.suite);
        for (k, v) in &self.params {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        for c in &self.checks {
            let status = serde_json::to_value(c.status).expect("status serializes");
            out.push_str(&format!(
                "  [{}] {}: {} passed, {} failed, {} inconclusive\n",
                status.as_str().unwrap_or("?"),
                c.name,
                c.passed,
                c.failed,
                c.inconclusive
            ));
        }
        for ce in &self.counterexamples {
            out.push_str(&format!(
                "  counterexample {}: {} -> {}\n",
                ce.check, ce.input, ce.observed
            ));
        }
        out
    }
}
