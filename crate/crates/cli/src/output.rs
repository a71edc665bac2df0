use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use spdc_core::{CrystalDatabase, ValidityPolicy};

use crate::args::Common;

/// Provenance header written as `#` lines at the top of every output.
pub struct RunRecord {
    pub command: &'static str,
    pub params: Vec<(&'static str, String)>,
    pub database: String,
    pub checksum: String,
}

impl RunRecord {
    pub fn new(command: &'static str, common: &Common, db: &CrystalDatabase) -> Self {
        let database = match &common.db {
            Some(p) => p.display().to_string(),
            None => "builtin".to_string(),
        };
        RunRecord {
            command,
            params: vec![("validity", policy_name(policy(common)).to_string())],
            database,
            checksum: db.checksum().to_string(),
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl ToString) {
        self.params.push((key, value.to_string()));
    }

    pub fn header(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut s = String::new();
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# params: {}", params.join(" "));
        let _ = writeln!(s, "# database: {} sha256={}", self.database, self.checksum);
        let _ = writeln!(s, "# version: spdc {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            "# timestamp: {}",
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        );
        let _ = writeln!(s, "# units: wavelength um, length mm, frequency THz, delta_k rad/um");
        s
    }
}

pub fn policy(common: &Common) -> ValidityPolicy {
    if common.strict {
        ValidityPolicy::Strict
    } else if common.extrapolate {
        ValidityPolicy::Extrapolate
    } else {
        ValidityPolicy::Grace
    }
}

fn policy_name(p: ValidityPolicy) -> &'static str {
    match p {
        ValidityPolicy::Strict => "strict",
        ValidityPolicy::Grace => "grace",
        ValidityPolicy::Extrapolate => "extrapolate",
    }
}

/// `key: value` lines.
#[derive(Default)]
pub struct Record(String);

impl Record {
    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.0, "{key}: {value}");
        self
    }

    pub fn finish(self) -> String {
        self.0
    }
}

/// Record fields as `#` comment lines, for summaries inside CSV output.
pub fn commented(record: &str) -> String {
    record.lines().map(|l| format!("# {l}\n")).collect()
}

pub fn wl(x: f64) -> String {
    format!("{x:.4}")
}

pub fn period(x: f64) -> String {
    format!("{x:.2}")
}

/// Decimals needed to keep neighbouring grid wavelengths distinct, at least 4.
pub fn wavelength_decimals(step_um: f64) -> usize {
    if step_um > 0.0 && step_um.is_finite() {
        ((-step_um.log10() - 1e-9).ceil() as i64 + 1).clamp(4, 12) as usize
    } else {
        4
    }
}

pub fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("cannot write to standard output")?;
            stdout.flush().context("cannot write to standard output")
        }
    }
}
