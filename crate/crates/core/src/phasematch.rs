//! Collinear type-0 quasi-phase matching: energy conservation, phase
//! mismatch and poling periods.

use std::f64::consts::TAU;

use crate::dispersion::{
    group_index_minimum, wavevector_from_index, Role, SellmeierModel, ValidityPolicy,
    ValidityWarning, Wavelength, DEFAULT_MINIMUM_BRACKET,
};
use crate::error::{Error, Result};

/// Relative tolerance on 1/lambda_p = 1/lambda_s + 1/lambda_i.
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-9;

/// A crystal with one dispersion model per interacting field.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    name: String,
    pump: SellmeierModel,
    signal: SellmeierModel,
    idler: SellmeierModel,
    absorption_edge: f64,
    signal_minimum: (f64, f64),
    idler_minimum: (f64, f64),
}

impl CrystalSpec {
    pub fn new(
        name: impl Into<String>,
        pump: SellmeierModel,
        signal: SellmeierModel,
        idler: SellmeierModel,
        absorption_edge_um: f64,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidCrystal {
            crystal: name.clone(),
            reason,
        };
        for (role, m) in [(Role::Pump, &pump), (Role::Signal, &signal), (Role::Idler, &idler)] {
            if !m.name().starts_with(name.as_str()) {
                return Err(invalid(format!(
                    "{role} model '{}' does not belong to crystal family '{name}'",
                    m.name()
                )));
            }
        }
        let minimum = |m: &SellmeierModel| {
            group_index_minimum(m, DEFAULT_MINIMUM_BRACKET, ValidityPolicy::Extrapolate)
                .map(|(l, ng)| (l.um(), ng))
                .map_err(|e| invalid(format!("group-index minimum of '{}': {e}", m.name())))
        };
        let signal_minimum = minimum(&signal)?;
        let idler_minimum = minimum(&idler)?;
        if !(absorption_edge_um > idler_minimum.0) {
            return Err(invalid(format!(
                "absorption edge {absorption_edge_um} um must exceed the idler group-index minimum {} um",
                idler_minimum.0
            )));
        }
        Ok(CrystalSpec {
            name,
            pump,
            signal,
            idler,
            absorption_edge: absorption_edge_um,
            signal_minimum,
            idler_minimum,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self, role: Role) -> &SellmeierModel {
        match role {
            Role::Pump => &self.pump,
            Role::Signal => &self.signal,
            Role::Idler => &self.idler,
        }
    }

    pub fn absorption_edge(&self) -> f64 {
        self.absorption_edge
    }

    /// Group-index minimum `(lambda*, n_g*)` of the signal model.
    pub fn signal_minimum(&self) -> (f64, f64) {
        self.signal_minimum
    }

    /// Group-index minimum `(lambda*, n_g*)` of the idler model.
    pub fn idler_minimum(&self) -> (f64, f64) {
        self.idler_minimum
    }

    /// k = 2 pi n / lambda for `role`, after the admissibility check.
    pub fn wavevector(&self, role: Role, lambda: Wavelength, policy: ValidityPolicy) -> Result<f64> {
        self.model(role)
            .wavevector(lambda, policy)
            .map_err(|e| e.in_role(role))
    }

    pub fn group_index(&self, role: Role, lambda: Wavelength, policy: ValidityPolicy) -> Result<f64> {
        self.model(role)
            .group_index(lambda, policy)
            .map_err(|e| e.in_role(role))
    }

    /// Validity flags raised by evaluating `role` at `lambda`.
    pub fn admit(
        &self,
        role: Role,
        lambda: Wavelength,
        policy: ValidityPolicy,
    ) -> Result<Option<ValidityWarning>> {
        self.model(role).admit(lambda, policy).map_err(|e| e.in_role(role))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpmGrating {
    period: f64,
    order: u32,
}

impl QpmGrating {
    pub fn new(period_um: f64, order: u32) -> Result<Self> {
        check_order(order)?;
        if !(period_um.is_finite() && period_um > 0.0) {
            return Err(Error::InvalidPeriod(period_um));
        }
        Ok(QpmGrating {
            period: period_um,
            order,
        })
    }

    pub fn first_order(period_um: f64) -> Result<Self> {
        QpmGrating::new(period_um, 1)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// 2 pi m / Lambda, rad/um.
    pub fn wavevector(&self) -> f64 {
        TAU * self.order as f64 / self.period
    }
}

pub(crate) fn check_order(order: u32) -> Result<()> {
    if order % 2 == 1 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(order))
    }
}

/// 1/lambda_p = 1/lambda_s + 1/lambda_i.
pub fn pump_wavelength(lambda_s: Wavelength, lambda_i: Wavelength) -> Wavelength {
    let lp = 1.0 / (1.0 / lambda_s.um() + 1.0 / lambda_i.um());
    Wavelength::new(lp).expect("positive inputs give a positive pump wavelength")
}

/// The remaining wavelength given the pump and one daughter, e.g. the
/// signal from (pump, idler). Fails if `lambda_other <= lambda_p`.
pub fn complementary_wavelength(lambda_p: Wavelength, lambda_other: Wavelength) -> Result<Wavelength> {
    let inv = 1.0 / lambda_p.um() - 1.0 / lambda_other.um();
    if inv > 0.0 {
        Wavelength::new(1.0 / inv)
    } else {
        Err(Error::InvalidWavelength(if inv == 0.0 { f64::INFINITY } else { 1.0 / inv }))
    }
}

pub fn check_energy_conservation(lambda_p: Wavelength, lambda_s: Wavelength, lambda_i: Wavelength) -> Result<()> {
    let inv_p = 1.0 / lambda_p.um();
    let relative_error = (inv_p - 1.0 / lambda_s.um() - 1.0 / lambda_i.um()).abs() / inv_p;
    if relative_error <= ENERGY_CONSERVATION_TOL {
        Ok(())
    } else {
        Err(Error::EnergyConservation {
            lambda_p: lambda_p.um(),
            lambda_s: lambda_s.um(),
            lambda_i: lambda_i.um(),
            relative_error,
        })
    }
}

/// k_p - k_s - k_i (no grating term), rad/um.
pub fn material_mismatch(
    crystal: &CrystalSpec,
    lambda_p: Wavelength,
    lambda_s: Wavelength,
    lambda_i: Wavelength,
    policy: ValidityPolicy,
) -> Result<f64> {
    check_energy_conservation(lambda_p, lambda_s, lambda_i)?;
    let kp = crystal.wavevector(Role::Pump, lambda_p, policy)?;
    let ks = crystal.wavevector(Role::Signal, lambda_s, policy)?;
    let ki = crystal.wavevector(Role::Idler, lambda_i, policy)?;
    Ok(kp - ks - ki)
}

/// Delta k = k_p - k_s - k_i - 2 pi m / Lambda, rad/um.
pub fn delta_k(
    crystal: &CrystalSpec,
    lambda_p: Wavelength,
    lambda_s: Wavelength,
    lambda_i: Wavelength,
    grating: QpmGrating,
    policy: ValidityPolicy,
) -> Result<f64> {
    Ok(material_mismatch(crystal, lambda_p, lambda_s, lambda_i, policy)? - grating.wavevector())
}

/// Poling period that makes Delta k vanish: Lambda = 2 pi m / (k_p - k_s - k_i).
pub fn poling_period_for(
    crystal: &CrystalSpec,
    lambda_p: Wavelength,
    lambda_s: Wavelength,
    lambda_i: Wavelength,
    order: u32,
    policy: ValidityPolicy,
) -> Result<f64> {
    check_order(order)?;
    let mismatch = material_mismatch(crystal, lambda_p, lambda_s, lambda_i, policy)?;
    if !(mismatch > 0.0) {
        return Err(Error::BackwardQpm { mismatch });
    }
    Ok(TAU * order as f64 / mismatch)
}

/// Same as [`delta_k`] but skipping admissibility checks, for dense sweeps
/// whose points were already admitted.
pub(crate) fn delta_k_unchecked(
    crystal: &CrystalSpec,
    lambda_p: f64,
    lambda_s: f64,
    lambda_i: f64,
    grating_k: f64,
) -> Result<f64> {
    let k = |role: Role, lam: f64| -> Result<f64> {
        let n = crystal
            .model(role)
            .derivatives_unchecked(lam)
            .map_err(|e| e.in_role(role))?
            .n;
        Ok(wavevector_from_index(n, lam))
    };
    Ok(k(Role::Pump, lambda_p)? - k(Role::Signal, lambda_s)? - k(Role::Idler, lambda_i)? - grating_k)
}
