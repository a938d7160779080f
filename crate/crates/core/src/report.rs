//! Named verification results.
//!
//! Every check records what was computed, what it was compared against, the
//! tolerance that decided the outcome, and a provenance string naming the
//! physical identity being tested (or the literal tag "plumbing").

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceKind {
    Absolute,
    Relative,
}

/// A real or complex check value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckValue {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl CheckValue {
    fn distance(&self, other: &CheckValue) -> f64 {
        let (a, b) = (self.as_complex(), other.as_complex());
        (a - b).norm()
    }

    fn magnitude(&self) -> f64 {
        self.as_complex().norm()
    }

    fn as_complex(&self) -> Complex64 {
        match *self {
            CheckValue::Real(v) => Complex64::new(v, 0.0),
            CheckValue::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

impl From<f64> for CheckValue {
    fn from(v: f64) -> Self {
        CheckValue::Real(v)
    }
}

impl From<Complex64> for CheckValue {
    fn from(z: Complex64) -> Self {
        CheckValue::Complex { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub value: CheckValue,
    pub reference: CheckValue,
    pub tolerance: f64,
    pub kind: ToleranceKind,
    pub pass: bool,
    pub provenance: String,
}

impl CheckEntry {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        reference: f64,
        tolerance: f64,
        kind: ToleranceKind,
        provenance: impl Into<String>,
    ) -> Self {
        Self::build(
            name,
            value.into(),
            reference.into(),
            tolerance,
            kind,
            provenance,
        )
    }

    pub fn complex(
        name: impl Into<String>,
        value: Complex64,
        reference: Complex64,
        tolerance: f64,
        kind: ToleranceKind,
        provenance: impl Into<String>,
    ) -> Self {
        Self::build(
            name,
            value.into(),
            reference.into(),
            tolerance,
            kind,
            provenance,
        )
    }

    fn build(
        name: impl Into<String>,
        value: CheckValue,
        reference: CheckValue,
        tolerance: f64,
        kind: ToleranceKind,
        provenance: impl Into<String>,
    ) -> Self {
        let distance = value.distance(&reference);
        let bound = match kind {
            ToleranceKind::Absolute => tolerance,
            ToleranceKind::Relative => tolerance * reference.magnitude(),
        };
        Self {
            name: name.into(),
            value,
            reference,
            tolerance,
            kind,
            pass: distance <= bound,
            provenance: provenance.into(),
        }
    }

    pub fn deviation(&self) -> f64 {
        self.value.distance(&self.reference)
    }
}

/// An ordered collection of check entries with summary counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
    pub passed: usize,
    pub failed: usize,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: CheckEntry) {
        if entry.pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.entries.push(entry);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = CheckEntry>) {
        for e in entries {
            self.push(e);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Fixed-width human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<52} {:>16} {:>16} {:>13}  {}\n",
            "check", "value", "reference", "tolerance", "status"
        ));
        for e in &self.entries {
            let fmt = |v: &CheckValue| match *v {
                CheckValue::Real(x) => format!("{x:.6e}"),
                CheckValue::Complex { re, im } => format!("{re:.3e}{im:+.3e}i"),
            };
            let kind = match e.kind {
                ToleranceKind::Absolute => "abs",
                ToleranceKind::Relative => "rel",
            };
            out.push_str(&format!(
                "{:<52} {:>16} {:>16} {:>9.1e} {}  {}\n",
                e.name,
                fmt(&e.value),
                fmt(&e.reference),
                e.tolerance,
                kind,
                if e.pass { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }
}
