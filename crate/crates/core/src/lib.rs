//! Group-velocity-matched quasi-phase matching for widely non-degenerate
//! SPDC in periodically poled KTP, MgO:LN and SLT.
//!
//! The crate is organized bottom-up:
//!
//! * [`dispersion`]: Sellmeier models, analytic derivatives, group index.
//! * [`phasematch`]: energy conservation, Delta k, poling periods.
//! * [`gvm`]: signal-idler group-velocity matching and full solutions.
//! * [`spectrum`]: sinc^2 spectra, FWHM, detuning optimizer.
//! * [`database`]: the TOML crystal database.
//! * [`table1`]: the reference L = 2 mm table and its regression check.
//!
//! Grid sweeps run through [`exec::Execution`], which uses rayon when the
//! `parallel` feature is enabled and falls back to sequential iteration
//! otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod database;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod gvm;
pub mod phasematch;
pub mod roots;
pub mod spectrum;
pub mod table1;
pub mod units;

pub use database::CrystalDatabase;
pub use dispersion::{
    group_index_minimum, Role, SellmeierForm, SellmeierModel, ValidityFlag, ValidityPolicy,
    ValidityWarning, Wavelength, GRACE_MARGIN_UM,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use gvm::{solve_signal_for_idler, solve_triplet, tuning_curve, GvmSolution, TuningCurve};
pub use phasematch::{delta_k, poling_period_for, pump_wavelength, CrystalSpec, QpmGrating};
pub use spectrum::{
    fwhm, intensity_at, optimize_detuning, sample_idler_spectrum, signal_spectrum_from_idler,
    Bandwidth, GridSpec, SpectrumSamples,
};
