//! Result records and deterministic serialization.
//!
//! Reports exist to be diffed: the canonical JSON form prints every float
//! with exactly twelve significant digits and omits wall-clock timings, so
//! byte-identical output certifies numerically identical results across
//! runs, machines, and worker counts.

use std::io::Write;

use serde::Serialize;

use crate::counting::CountRecord;
use crate::error::{Error, Result};

/// A named scalar result; complex values carry their imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag: Option<f64>,
}

impl NamedValue {
    pub fn real(name: impl Into<String>, value: f64) -> Self {
        NamedValue {
            name: name.into(),
            value,
            imag: None,
        }
    }

    pub fn complex(name: impl Into<String>, re: f64, im: f64) -> Self {
        NamedValue {
            name: name.into(),
            value: re,
            imag: Some(im),
        }
    }
}

/// A verified numerical identity: two independently computed sides and the
/// tolerance they were compared at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    /// Human-readable formula of the identity instance.
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(anchor: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        IdentityCheck {
            anchor: anchor.into(),
            lhs,
            rhs,
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
        }
    }
}

/// The output of one harness job: an echo of the job parameters plus every
/// count, value, and identity check it produced.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub job: serde_json::Value,
    pub counts: Vec<CountRecord>,
    pub values: Vec<NamedValue>,
    pub checks: Vec<IdentityCheck>,
    /// Total wall-clock seconds; never part of the canonical bytes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl Report {
    pub fn new(job: serde_json::Value) -> Self {
        Report {
            job,
            counts: Vec::new(),
            values: Vec::new(),
            checks: Vec::new(),
            wall_seconds: None,
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Canonical single-line JSON: twelve-significant-digit floats, no
    /// timing fields. Two runs that computed the same numbers produce the
    /// same bytes.
    pub fn canonical_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct CanonicalCount<'a> {
            label: &'a str,
            parameters: &'a [(String, String)],
            count: u128,
        }
        #[derive(Serialize)]
        struct Canonical<'a> {
            job: &'a serde_json::Value,
            counts: Vec<CanonicalCount<'a>>,
            values: &'a [NamedValue],
            checks: &'a [IdentityCheck],
        }
        // serde_json replaces non-finite floats with null before the
        // formatter runs, so validate finiteness explicitly.
        let floats_ok = self
            .values
            .iter()
            .all(|v| v.value.is_finite() && v.imag.map_or(true, f64::is_finite))
            && self
                .checks
                .iter()
                .all(|c| c.lhs.is_finite() && c.rhs.is_finite() && c.tolerance.is_finite());
        if !floats_ok {
            return Err(Error::InvalidInput(
                "non-finite float in canonical report".into(),
            ));
        }
        let shadow = Canonical {
            job: &self.job,
            counts: self
                .counts
                .iter()
                .map(|c| CanonicalCount {
                    label: &c.label,
                    parameters: &c.parameters,
                    count: c.count,
                })
                .collect(),
            values: &self.values,
            checks: &self.checks,
        };
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
        shadow
            .serialize(&mut ser)
            .map_err(|err| Error::InvalidInput(format!("serialization failed: {err}")))?;
        String::from_utf8(out).map_err(|err| Error::InvalidInput(err.to_string()))
    }

    /// Full JSON including timings, pretty-printed for human reading.
    pub fn verbose_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|err| Error::InvalidInput(format!("serialization failed: {err}")))
    }

    /// Flat CSV with one row per count, value, and check.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "kind",
            "name",
            "parameters",
            "count",
            "value",
            "imag",
            "lhs",
            "rhs",
            "tolerance",
            "pass",
        ])?;
        let fmt = |v: f64| format!("{v:.11e}");
        for c in &self.counts {
            let params = c
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                "count",
                &c.label,
                &params,
                &c.count.to_string(),
                "",
                "",
                "",
                "",
                "",
                "",
            ])?;
        }
        for v in &self.values {
            w.write_record([
                "value",
                &v.name,
                "",
                "",
                &fmt(v.value),
                &v.imag.map(fmt).unwrap_or_default(),
                "",
                "",
                "",
                "",
            ])?;
        }
        for c in &self.checks {
            w.write_record([
                "check",
                &c.anchor,
                "",
                "",
                "",
                "",
                &fmt(c.lhs),
                &fmt(c.rhs),
                &fmt(c.tolerance),
                if c.pass { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::InvalidInput(format!("csv write failed: {err}"))
    }
}

/// JSON formatter that prints every float with exactly twelve significant
/// digits in scientific notation, making float bytes reproducible.
struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if !value.is_finite() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "non-finite float in canonical report",
            ));
        }
        write!(writer, "{value:.11e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }
}
