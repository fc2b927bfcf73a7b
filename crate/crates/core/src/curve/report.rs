use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Allowed but unusual; never fails a report.
    Warn,
    NotApplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Warn => "warn",
            Status::NotApplicable => "n/a",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub rule: String,
    pub status: Status,
    pub detail: String,
    pub residual: Option<f64>,
}

/// Pass/fail verdicts per named rule. Serializes as a JSON list of
/// `{rule, status, detail, residual}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub entries: Vec<ReportEntry>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        rule: &str,
        status: Status,
        detail: impl Into<String>,
        residual: Option<f64>,
    ) {
        self.entries.push(ReportEntry {
            rule: rule.to_string(),
            status,
            detail: detail.into(),
            residual,
        });
    }

    /// Records `rule` as passing when `failures` is empty, failing with the
    /// joined failure list otherwise.
    pub fn verdict(
        &mut self,
        rule: &str,
        failures: Vec<String>,
        ok_detail: &str,
        residual: Option<f64>,
    ) {
        if failures.is_empty() {
            self.push(rule, Status::Pass, ok_detail, residual);
        } else {
            self.push(rule, Status::Fail, failures.join("; "), residual);
        }
    }

    /// Appends entries of `other` whose rule is not yet present.
    pub fn merge(&mut self, other: ValidationReport) {
        for e in other.entries {
            if self.entry(&e.rule).is_none() {
                self.entries.push(e);
            }
        }
    }

    pub fn entry(&self, rule: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.rule == rule)
    }

    pub fn status(&self, rule: &str) -> Option<Status> {
        self.entry(rule).map(|e| e.status)
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .map(|e| e.rule.chars().count())
            .max()
            .unwrap_or(0);
        for e in &self.entries {
            let pad = width - e.rule.chars().count();
            write!(
                f,
                "[{:>4}] {}{}  {}",
                e.status,
                e.rule,
                " ".repeat(pad),
                e.detail
            )?;
            if let Some(r) = e.residual {
                write!(f, " (residual {r:.3e})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
