//! Signal-idler group-velocity matching and complete phase-matching
//! solutions `(lambda_p, lambda_s0, lambda_i0, Lambda)`.

use std::fmt;

use crate::dispersion::{Role, ValidityPolicy, ValidityWarning, Wavelength};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::phasematch::{
    check_order, complementary_wavelength, delta_k, delta_k_unchecked, poling_period_for,
    pump_wavelength, CrystalSpec, QpmGrating,
};
use crate::roots::{bracketed_root, RootOptions};

/// Group-index residual accepted for a matched pair.
pub const GVM_TOLERANCE: f64 = 1e-10;

/// Solutions whose idler sits closer than this to the group-index minimum
/// are flagged as near-degenerate.
pub const NEAR_DEGENERATE_UM: f64 = 0.05;

/// The signal branch starts this far above the signal model's validity_min.
pub const BRANCH_EDGE_OFFSET_UM: f64 = 0.01;

/// The signal branch stops this far below the signal group-index minimum.
pub const MINIMUM_OFFSET_UM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionWarning {
    Validity { role: Role, warning: ValidityWarning },
    NearDegenerate { separation_um: f64 },
    BeyondAbsorptionEdge { lambda_i_um: f64, edge_um: f64 },
}

impl fmt::Display for SolutionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionWarning::Validity { role, warning } => write!(f, "{role}: {warning}"),
            SolutionWarning::NearDegenerate { separation_um } => write!(
                f,
                "near-degenerate: idler only {separation_um:.4} um above the group-index minimum"
            ),
            SolutionWarning::BeyondAbsorptionEdge { lambda_i_um, edge_um } => write!(
                f,
                "idler {lambda_i_um:.4} um beyond absorption edge {edge_um} um"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvmSolution {
    pub lambda_p: Wavelength,
    pub lambda_s0: Wavelength,
    pub lambda_i0: Wavelength,
    pub grating: QpmGrating,
    pub matched_group_index: f64,
    /// |n_g(signal) - n_g(idler)|
    pub residual_gvm: f64,
    /// |Delta k| at the solution, rad/um
    pub residual_dk: f64,
    pub warnings: Vec<SolutionWarning>,
}

impl GvmSolution {
    /// Delta k at idler wavelength `lambda_i` with the pump and grating held
    /// fixed; the signal follows from energy conservation. No range checks.
    pub fn delta_k_at_idler(&self, crystal: &CrystalSpec, lambda_i: f64) -> Result<f64> {
        let lp = self.lambda_p.um();
        let ls = complementary_wavelength(self.lambda_p, Wavelength::new(lambda_i)?)?.um();
        delta_k_unchecked(crystal, lp, ls, lambda_i, self.grating.wavevector())
    }
}

struct SignalMatch {
    lambda_s: Wavelength,
    target: f64,
    warnings: Vec<SolutionWarning>,
}

fn validity(role: Role, w: Option<ValidityWarning>) -> Option<SolutionWarning> {
    w.map(|warning| SolutionWarning::Validity { role, warning })
}

fn match_signal(crystal: &CrystalSpec, lambda_i0: Wavelength, policy: ValidityPolicy) -> Result<SignalMatch> {
    let mut warnings = Vec::new();
    warnings.extend(validity(Role::Idler, crystal.admit(Role::Idler, lambda_i0, policy)?));

    let (idler_min, _) = crystal.idler_minimum();
    let li = lambda_i0.um();
    if li <= idler_min {
        return Err(Error::IdlerBelowMinimum {
            lambda_i: li,
            minimum: idler_min,
        });
    }
    if li > crystal.absorption_edge() {
        warnings.push(SolutionWarning::BeyondAbsorptionEdge {
            lambda_i_um: li,
            edge_um: crystal.absorption_edge(),
        });
    }
    if li - idler_min < NEAR_DEGENERATE_UM {
        warnings.push(SolutionWarning::NearDegenerate {
            separation_um: li - idler_min,
        });
    }

    let target = crystal.group_index(Role::Idler, lambda_i0, policy)?;
    let signal = crystal.model(Role::Signal);
    let lo = signal.validity_min() + BRANCH_EDGE_OFFSET_UM;
    let hi = crystal.signal_minimum().0 - MINIMUM_OFFSET_UM;
    let residual = |lam: f64| -> Result<f64> {
        Ok(signal
            .derivatives_unchecked(lam)
            .map_err(|e| e.in_role(Role::Signal))?
            .group_index(lam)
            - target)
    };
    let at_hi = residual(hi)?;
    let lambda_s = if at_hi.abs() <= GVM_TOLERANCE {
        hi
    } else if at_hi > 0.0 {
        return Err(Error::NoGvmNearMinimum {
            target,
            branch_min: at_hi + target,
        });
    } else {
        let at_lo = residual(lo)?;
        if at_lo < 0.0 {
            return Err(Error::NoGvmTransparency {
                target,
                branch_max: at_lo + target,
            });
        }
        let opts = RootOptions {
            f_tol: 1e-14,
            x_tol: 1e-15,
            max_iter: 300,
        };
        bracketed_root(residual, lo, hi, opts)?
    };
    let lambda_s = Wavelength::new(lambda_s)?;
    warnings.extend(validity(Role::Signal, crystal.admit(Role::Signal, lambda_s, policy)?));
    Ok(SignalMatch {
        lambda_s,
        target,
        warnings,
    })
}

/// Signal wavelength on the short-wavelength branch whose group index
/// equals that of the idler at `lambda_i0`.
pub fn solve_signal_for_idler(
    crystal: &CrystalSpec,
    lambda_i0: Wavelength,
    policy: ValidityPolicy,
) -> Result<Wavelength> {
    match_signal(crystal, lambda_i0, policy).map(|m| m.lambda_s)
}

/// Full GVM solution for idler `lambda_i0` and QPM order `order`, with
/// Delta k = 0 exactly at the centre.
pub fn solve_triplet(
    crystal: &CrystalSpec,
    lambda_i0: Wavelength,
    order: u32,
    policy: ValidityPolicy,
) -> Result<GvmSolution> {
    check_order(order)?;
    let SignalMatch {
        lambda_s,
        target,
        mut warnings,
    } = match_signal(crystal, lambda_i0, policy)?;
    let lambda_p = pump_wavelength(lambda_s, lambda_i0);
    warnings.extend(validity(Role::Pump, crystal.admit(Role::Pump, lambda_p, policy)?));
    let period = poling_period_for(crystal, lambda_p, lambda_s, lambda_i0, order, policy)?;
    let grating = QpmGrating::new(period, order)?;
    let residual_dk = delta_k(crystal, lambda_p, lambda_s, lambda_i0, grating, policy)?.abs();
    let ng_s = crystal.group_index(Role::Signal, lambda_s, policy)?;
    Ok(GvmSolution {
        lambda_p,
        lambda_s0: lambda_s,
        lambda_i0,
        grating,
        matched_group_index: target,
        residual_gvm: (ng_s - target).abs(),
        residual_dk,
        warnings,
    })
}

/// Evenly spaced idler grid, endpoints included. Zero points gives an
/// empty grid; one point gives `[from]`.
pub fn idler_grid(from_um: f64, to_um: f64, points: usize) -> Result<Vec<Wavelength>> {
    match points {
        0 => Ok(Vec::new()),
        1 => Ok(vec![Wavelength::new(from_um)?]),
        n => (0..n)
            .map(|k| Wavelength::new(from_um + (to_um - from_um) * k as f64 / (n - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningPoint {
    pub lambda_s: Wavelength,
    pub lambda_i: Wavelength,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningFailure {
    pub lambda_i: Wavelength,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TuningCurve {
    /// Matched pairs, in grid order.
    pub points: Vec<TuningPoint>,
    /// Grid points without a solution, in grid order.
    pub failures: Vec<TuningFailure>,
}

/// Signal wavelength for every idler grid point. Grid points are solved
/// independently (concurrently under `Execution::Parallel`).
pub fn tuning_curve(
    crystal: &CrystalSpec,
    grid: &[Wavelength],
    policy: ValidityPolicy,
    exec: Execution,
) -> TuningCurve {
    let solved = exec.map(grid, |&li| (li, solve_signal_for_idler(crystal, li, policy)));
    let mut curve = TuningCurve::default();
    for (lambda_i, res) in solved {
        match res {
            Ok(lambda_s) => curve.points.push(TuningPoint { lambda_s, lambda_i }),
            Err(error) => curve.failures.push(TuningFailure { lambda_i, error }),
        }
    }
    curve
}
