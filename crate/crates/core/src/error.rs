use thiserror::Error;

use crate::dispersion::Role;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid wavelength {0} um: must be finite and positive")]
    InvalidWavelength(f64),

    #[error("wavelength {wavelength_um} um is outside the admissible range of model '{model}' (bound {bound_um} um)")]
    OutOfValidity {
        model: String,
        wavelength_um: f64,
        bound_um: f64,
    },

    #[error("model '{model}' is non-physical at {wavelength_um} um: {reason} (term {term})")]
    NonPhysical {
        model: String,
        wavelength_um: f64,
        term: usize,
        reason: &'static str,
    },

    #[error("invalid Sellmeier model '{model}': {reason}")]
    InvalidModel { model: String, reason: String },

    #[error("invalid crystal '{crystal}': {reason}")]
    InvalidCrystal { crystal: String, reason: String },

    #[error("energy conservation violated: 1/{lambda_p} != 1/{lambda_s} + 1/{lambda_i} (relative error {relative_error:e})")]
    EnergyConservation {
        lambda_p: f64,
        lambda_s: f64,
        lambda_i: f64,
        relative_error: f64,
    },

    #[error("QPM not required / backward geometry: k_p - k_s - k_i = {mismatch} rad/um is not positive")]
    BackwardQpm { mismatch: f64 },

    #[error("QPM order must be an odd positive integer, got {0}")]
    InvalidOrder(u32),

    #[error("poling period must be finite and positive, got {0} um")]
    InvalidPeriod(f64),

    #[error("no interior minimum of the group index on [{lo}, {hi}] um")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("group index is not unimodal on [{lo}, {hi}] um ({sign_changes} slope sign changes)")]
    NotUnimodal { lo: f64, hi: f64, sign_changes: usize },

    #[error("idler below group-index minimum: {lambda_i} um <= {minimum} um")]
    IdlerBelowMinimum { lambda_i: f64, minimum: f64 },

    #[error("no GVM solution: idler too close to group-index minimum (target n_g {target} below signal branch minimum {branch_min})")]
    NoGvmNearMinimum { target: f64, branch_min: f64 },

    #[error("no GVM solution: idler too far into IR for this crystal's transparency (target n_g {target} above signal branch maximum {branch_max})")]
    NoGvmTransparency { target: f64, branch_max: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too narrow: intensity at the {side} edge is {intensity} >= 0.5")]
    GridTooNarrow { side: &'static str, intensity: f64 },

    #[error("refine grid: intensity step {step} across the half-maximum crossing exceeds 0.05")]
    RefineGrid { step: f64 },

    #[error("spectrum has no sample at peak intensity")]
    NoPeak,

    #[error("crystal length must be finite and positive, got {0} mm")]
    InvalidLength(f64),

    #[error("dip floor must lie in (0, 1], got {0}")]
    InvalidDipFloor(f64),

    #[error("crystal not found: '{name}' (available: {available})")]
    CrystalNotFound { name: String, available: String },

    #[error("unknown role '{0}' (expected pump, signal or idler)")]
    UnknownRole(String),

    #[error("crystal database error: {0}")]
    Database(String),

    #[error("{role} wavelength rejected: {source}")]
    Role {
        role: Role,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short, stable identifier for machine consumption.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidWavelength(_) => "invalid_wavelength",
            Error::OutOfValidity { .. } => "out_of_validity",
            Error::NonPhysical { .. } => "non_physical",
            Error::InvalidModel { .. } => "invalid_model",
            Error::InvalidCrystal { .. } => "invalid_crystal",
            Error::EnergyConservation { .. } => "energy_conservation",
            Error::BackwardQpm { .. } => "backward_qpm",
            Error::InvalidOrder(_) => "invalid_order",
            Error::InvalidPeriod(_) => "invalid_period",
            Error::NoInteriorMinimum { .. } => "no_interior_minimum",
            Error::NotUnimodal { .. } => "not_unimodal",
            Error::IdlerBelowMinimum { .. } => "idler_below_minimum",
            Error::NoGvmNearMinimum { .. } => "no_gvm_near_minimum",
            Error::NoGvmTransparency { .. } => "no_gvm_transparency",
            Error::NoConvergence { .. } => "no_convergence",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridTooNarrow { .. } => "grid_too_narrow",
            Error::RefineGrid { .. } => "refine_grid",
            Error::NoPeak => "no_peak",
            Error::InvalidLength(_) => "invalid_length",
            Error::InvalidDipFloor(_) => "invalid_dip_floor",
            Error::CrystalNotFound { .. } => "crystal_not_found",
            Error::UnknownRole(_) => "unknown_role",
            Error::Database(_) => "database",
            Error::Role { source, .. } => source.kind(),
        }
    }

    pub(crate) fn in_role(self, role: Role) -> Self {
        match self {
            e @ Error::Role { .. } => e,
            e => Error::Role {
                role,
                source: Box::new(e),
            },
        }
    }
}
