//! Machine-readable reports: CSV tables and JSON pass/fail summaries.
//!
//! Floats in CSV are serialized with 17 significant digits so equal values
//! always produce byte-identical files.

use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// One named check inside a summary document.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let passed = value <= tolerance;
        Self {
            name: name.into(),
            value,
            tolerance,
            passed,
        }
    }

    pub fn boolean(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
            passed: ok,
        }
    }
}

/// The summary document every subcommand writes.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: String,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl Summary {
    pub fn new(command: &str, checks: Vec<Check>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        Self {
            command: command.to_string(),
            checks,
            all_passed,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }

    /// Print one line per check, then the verdict.
    pub fn print(&self) {
        for c in &self.checks {
            println!(
                "[{}] {}: value {:.3e} (tol {:.3e})",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            );
        }
        println!(
            "{}: {}",
            self.command,
            if self.all_passed {
                "all checks passed"
            } else {
                "CHECKS FAILED"
            }
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_formatting_is_17_digits() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        let x = 0.1 + 0.2;
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits());
    }

    #[test]
    fn summary_verdict() {
        let s = Summary::new(
            "demo",
            vec![Check::new("a", 0.0, 1.0), Check::new("b", 2.0, 1.0)],
        );
        assert!(!s.all_passed);
    }
}
