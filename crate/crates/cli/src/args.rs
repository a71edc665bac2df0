use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spdc_core::spectrum::DEFAULT_DIP_FLOOR;

pub const DB_ENV: &str = "SPDC_CRYSTAL_DB";

#[derive(Debug, Parser)]
#[command(name = "spdc", version, about = "Broadband GVM phase matching for non-degenerate SPDC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Record,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Crystal database (TOML). Defaults to the built-in database.
    #[arg(long, env = DB_ENV)]
    pub db: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only accept wavelengths inside each model's validity range.
    #[arg(long, conflicts_with = "extrapolate")]
    pub strict: bool,
    /// Evaluate models anywhere, flagging out-of-range use.
    #[arg(long)]
    pub extrapolate: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Disable data parallelism.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refractive and group index over a wavelength range.
    Dispersion(DispersionArgs),
    /// Group-velocity-matched signal, pump and poling period for one idler wavelength.
    GvmSolve(GvmSolveArgs),
    /// Normalized idler spectrum and its bandwidth.
    Spectrum(SpectrumArgs),
    /// GVM signal wavelength across an idler range.
    TuningCurve(TuningCurveArgs),
    /// Recompute the L = 2 mm reference table and compare cell by cell.
    Table1(Table1Args),
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long)]
    pub crystal: String,
    /// pump, signal or idler
    #[arg(long, default_value = "idler")]
    pub role: String,
    /// um
    #[arg(long)]
    pub from: f64,
    /// um
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GvmSolveArgs {
    #[arg(long)]
    pub crystal: String,
    /// Central idler wavelength, um.
    #[arg(long)]
    pub lambda_i: f64,
    /// Odd QPM order.
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detune {
    Fixed(f64),
    Auto,
}

fn parse_detune(s: &str) -> Result<Detune, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Detune::Auto);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Detune::Fixed)
        .ok_or_else(|| format!("expected a number (rad/um) or 'auto', got '{s}'"))
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub crystal: String,
    /// Central idler wavelength, um.
    #[arg(long)]
    pub lambda_i: f64,
    /// Crystal length, mm.
    #[arg(long, default_value_t = 2.0)]
    pub length_mm: f64,
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Grid start, um. Defaults to the idler group-index minimum.
    #[arg(long)]
    pub from: Option<f64>,
    /// Grid end, um. Defaults to the absorption edge or the model range, whichever is lower.
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = spdc_core::spectrum::DEFAULT_GRID_POINTS)]
    pub points: usize,
    /// Additive Delta k offset in rad/um, or 'auto' to optimize it.
    #[arg(long, default_value = "0", value_parser = parse_detune)]
    pub detune: Detune,
    /// Lowest acceptable dip between lobes, relative to the peak (used with --detune auto).
    #[arg(long, default_value_t = DEFAULT_DIP_FLOOR)]
    pub dip_floor: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TuningCurveArgs {
    #[arg(long)]
    pub crystal: String,
    /// um
    #[arg(long)]
    pub from: f64,
    /// um
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub points: usize,
    /// Write failed grid points here instead of standard error.
    #[arg(long)]
    pub failures: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Crystal length, mm.
    #[arg(long, default_value_t = spdc_core::table1::REFERENCE_LENGTH_MM)]
    pub length_mm: f64,
    #[command(flatten)]
    pub common: Common,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detune_values() {
        assert_eq!(parse_detune("auto"), Ok(Detune::Auto));
        assert_eq!(parse_detune("-2e-4"), Ok(Detune::Fixed(-2e-4)));
        assert!(parse_detune("nan").is_err());
        assert!(parse_detune("wide").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
