//! Sellmeier dispersion models: refractive index, analytic wavelength
//! derivatives, group index, wavevector, and the group-index minimum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bracketed_root, RootOptions};

/// How far past `validity_max` a model may be evaluated under
/// [`ValidityPolicy::Grace`].
pub const GRACE_MARGIN_UM: f64 = 0.65;

/// Vacuum wavelength in um.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn new(um: f64) -> Result<Self> {
        if um.is_finite() && um > 0.0 {
            Ok(Wavelength(um))
        } else {
            Err(Error::InvalidWavelength(um))
        }
    }

    #[inline]
    pub fn um(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Wavelength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} um", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pump,
    Signal,
    Idler,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Pump, Role::Signal, Role::Idler];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Pump => "pump",
            Role::Signal => "signal",
            Role::Idler => "idler",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pump" | "p" => Ok(Role::Pump),
            "signal" | "s" => Ok(Role::Signal),
            "idler" | "i" => Ok(Role::Idler),
            _ => Err(Error::UnknownRole(s.to_string())),
        }
    }
}

/// Admissibility rule for wavelengths outside a model's validity range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidityPolicy {
    /// Reject anything outside `[validity_min, validity_max]`.
    Strict,
    /// Allow up to [`GRACE_MARGIN_UM`] beyond `validity_max`, flagged.
    #[default]
    Grace,
    /// Evaluate anywhere the formula is physical; out-of-range points are flagged.
    Extrapolate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityFlag {
    /// Beyond `validity_max` but inside the grace margin.
    GraceMargin,
    /// Outside validity and grace; only possible under `Extrapolate`.
    Extrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityWarning {
    pub model: String,
    pub wavelength_um: f64,
    pub flag: ValidityFlag,
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.flag {
            ValidityFlag::GraceMargin => "inside grace margin",
            ValidityFlag::Extrapolated => "extrapolated beyond grace margin",
        };
        write!(f, "{} at {:.4} um: {}", self.model, self.wavelength_um, what)
    }
}

/// Supported Sellmeier functional forms, with x = lambda^2 (lambda in um):
///
/// * `OnePole`:   n^2 = A + B/(x - C) - D x
/// * `TwoPole`:   n^2 = A + B/(x - C) + D/(x - E) - F x
/// * `ThreePole`: n^2 = A + B/(x - C) + D/(x - E) + F/(x - G) - H x
///
/// Forms written as `B lambda^2 / (lambda^2 - C)` are brought into this
/// shape by folding `B` into `A` and using `B*C` as the pole strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellmeierForm {
    OnePole,
    TwoPole,
    ThreePole,
}

impl SellmeierForm {
    pub fn poles(self) -> usize {
        match self {
            SellmeierForm::OnePole => 1,
            SellmeierForm::TwoPole => 2,
            SellmeierForm::ThreePole => 3,
        }
    }

    pub fn arity(self) -> usize {
        2 + 2 * self.poles()
    }

    pub fn id(self) -> &'static str {
        match self {
            SellmeierForm::OnePole => "one_pole",
            SellmeierForm::TwoPole => "two_pole",
            SellmeierForm::ThreePole => "three_pole",
        }
    }
}

/// n and its first two wavelength derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexDerivatives {
    pub n: f64,
    /// dn/dlambda, 1/um
    pub dn: f64,
    /// d2n/dlambda2, 1/um^2
    pub d2n: f64,
}

impl IndexDerivatives {
    #[inline]
    pub fn group_index(&self, lambda_um: f64) -> f64 {
        self.n - lambda_um * self.dn
    }

    /// d n_g / d lambda = -lambda * d2n/dlambda2
    #[inline]
    pub fn group_index_slope(&self, lambda_um: f64) -> f64 {
        -lambda_um * self.d2n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierModel {
    name: String,
    form: SellmeierForm,
    coefficients: Vec<f64>,
    validity_min: f64,
    validity_max: f64,
    source: String,
}

impl SellmeierModel {
    pub fn new(
        name: impl Into<String>,
        form: SellmeierForm,
        coefficients: Vec<f64>,
        validity_min: f64,
        validity_max: f64,
        source: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidModel {
            model: name.clone(),
            reason,
        };
        if coefficients.len() != form.arity() {
            return Err(invalid(format!(
                "form {} expects {} coefficients, got {}",
                form.id(),
                form.arity(),
                coefficients.len()
            )));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!("coefficient {i} is not finite")));
        }
        if !(validity_min.is_finite() && validity_max.is_finite())
            || validity_min <= 0.0
            || validity_min >= validity_max
        {
            return Err(invalid(format!(
                "validity range [{validity_min}, {validity_max}] must satisfy 0 < min < max"
            )));
        }
        let model = SellmeierModel {
            name,
            form,
            coefficients,
            validity_min,
            validity_max,
            source: source.into(),
        };
        // n must be real and >= 1 across the whole validity range.
        const CHECK_POINTS: usize = 1000;
        for k in 0..=CHECK_POINTS {
            let lam = validity_min + (validity_max - validity_min) * k as f64 / CHECK_POINTS as f64;
            let n = model.derivatives_unchecked(lam)?.n;
            if n < 1.0 {
                return Err(Error::InvalidModel {
                    model: model.name.clone(),
                    reason: format!("n = {n} < 1 at {lam} um"),
                });
            }
        }
        Ok(model)
    }

    /// Dispersionless medium with the given index, valid on `[min, max]`.
    pub fn constant(n: f64, validity_min: f64, validity_max: f64) -> Result<Self> {
        SellmeierModel::new(
            format!("constant n={n}"),
            SellmeierForm::OnePole,
            vec![n * n, 0.0, 0.0, 0.0],
            validity_min,
            validity_max,
            "dispersionless",
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn form(&self) -> SellmeierForm {
        self.form
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn validity_min(&self) -> f64 {
        self.validity_min
    }

    pub fn validity_max(&self) -> f64 {
        self.validity_max
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Upper admissible bound under `policy` (infinite for `Extrapolate`).
    pub fn upper_bound(&self, policy: ValidityPolicy) -> f64 {
        match policy {
            ValidityPolicy::Strict => self.validity_max,
            ValidityPolicy::Grace => self.validity_max + GRACE_MARGIN_UM,
            ValidityPolicy::Extrapolate => f64::INFINITY,
        }
    }

    /// Checks `lambda` against the validity range. `Ok(Some(_))` means the
    /// point is admissible but flagged.
    pub fn admit(
        &self,
        lambda: Wavelength,
        policy: ValidityPolicy,
    ) -> Result<Option<ValidityWarning>> {
        let lam = lambda.um();
        let warn = |flag| {
            Ok(Some(ValidityWarning {
                model: self.name.clone(),
                wavelength_um: lam,
                flag,
            }))
        };
        let out = |bound_um| {
            Err(Error::OutOfValidity {
                model: self.name.clone(),
                wavelength_um: lam,
                bound_um,
            })
        };
        if lam >= self.validity_min && lam <= self.validity_max {
            return Ok(None);
        }
        let in_grace = lam > self.validity_max && lam <= self.validity_max + GRACE_MARGIN_UM;
        match policy {
            ValidityPolicy::Strict if lam < self.validity_min => out(self.validity_min),
            ValidityPolicy::Strict => out(self.validity_max),
            ValidityPolicy::Grace if in_grace => warn(ValidityFlag::GraceMargin),
            ValidityPolicy::Grace if lam < self.validity_min => out(self.validity_min),
            ValidityPolicy::Grace => out(self.validity_max + GRACE_MARGIN_UM),
            ValidityPolicy::Extrapolate if in_grace => warn(ValidityFlag::GraceMargin),
            ValidityPolicy::Extrapolate => warn(ValidityFlag::Extrapolated),
        }
    }

    fn terms(&self) -> (f64, impl Iterator<Item = (f64, f64)> + '_, f64) {
        let c = &self.coefficients;
        let poles = c[1..c.len() - 1].chunks_exact(2).map(|p| (p[0], p[1]));
        (c[0], poles, c[c.len() - 1])
    }

    /// n, dn/dlambda and d2n/dlambda2 without any range check. Fails only
    /// on a pole crossing or n^2 <= 0.
    pub fn derivatives_unchecked(&self, lambda_um: f64) -> Result<IndexDerivatives> {
        let x = lambda_um * lambda_um;
        let (a, poles, quad) = self.terms();
        // S(x) = n^2 and its derivatives with respect to x.
        let mut s = a;
        let mut s1 = -quad;
        let mut s2 = 0.0;
        let mut most_negative = (0usize, a);
        for (j, (b, c)) in poles.enumerate() {
            let d = x - c;
            if b != 0.0 && d.abs() <= 1e-12 * c.abs().max(1.0) {
                return Err(self.non_physical(lambda_um, j + 1, "pole crossing"));
            }
            if b == 0.0 {
                continue;
            }
            let term = b / d;
            s += term;
            s1 -= term / d;
            s2 += 2.0 * term / (d * d);
            if term < most_negative.1 {
                most_negative = (j + 1, term);
            }
        }
        let quad_term = -quad * x;
        s += quad_term;
        if quad_term < most_negative.1 {
            most_negative = (self.form.poles() + 1, quad_term);
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(self.non_physical(lambda_um, most_negative.0, "n^2 <= 0"));
        }
        let n = s.sqrt();
        let dn = lambda_um * s1 / n;
        let d2n = s1 / n + 2.0 * x * s2 / n - x * s1 * s1 / (n * n * n);
        Ok(IndexDerivatives { n, dn, d2n })
    }

    fn non_physical(&self, lambda_um: f64, term: usize, reason: &'static str) -> Error {
        Error::NonPhysical {
            model: self.name.clone(),
            wavelength_um: lambda_um,
            term,
            reason,
        }
    }

    pub fn derivatives(&self, lambda: Wavelength, policy: ValidityPolicy) -> Result<IndexDerivatives> {
        self.admit(lambda, policy)?;
        self.derivatives_unchecked(lambda.um())
    }

    pub fn refractive_index(&self, lambda: Wavelength, policy: ValidityPolicy) -> Result<f64> {
        Ok(self.derivatives(lambda, policy)?.n)
    }

    /// Analytic dn/dlambda, 1/um.
    pub fn dn_dlambda(&self, lambda: Wavelength, policy: ValidityPolicy) -> Result<f64> {
        Ok(self.derivatives(lambda, policy)?.dn)
    }

    /// n_g = n - lambda dn/dlambda.
    pub fn group_index(&self, lambda: Wavelength, policy: ValidityPolicy) -> Result<f64> {
        Ok(self.derivatives(lambda, policy)?.group_index(lambda.um()))
    }

    /// k = 2 pi n / lambda, rad/um.
    pub fn wavevector(&self, lambda: Wavelength, policy: ValidityPolicy) -> Result<f64> {
        let n = self.refractive_index(lambda, policy)?;
        Ok(wavevector_from_index(n, lambda.um()))
    }
}

#[inline]
pub(crate) fn wavevector_from_index(n: f64, lambda_um: f64) -> f64 {
    std::f64::consts::TAU * n / lambda_um
}

/// Bracket used when a caller does not supply one.
pub const DEFAULT_MINIMUM_BRACKET: (f64, f64) = (1.0, 3.0);

const UNIMODAL_SCAN_POINTS: usize = 400;

/// Locates the interior minimum of the group index on `bracket`.
///
/// Returns `(lambda*, n_g(lambda*))`. The bracket must contain exactly one
/// sign change of d n_g / d lambda, going from negative to positive.
pub fn group_index_minimum(
    model: &SellmeierModel,
    bracket: (f64, f64),
    policy: ValidityPolicy,
) -> Result<(Wavelength, f64)> {
    let (lo, hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    model.admit(Wavelength::new(lo)?, policy)?;
    model.admit(Wavelength::new(hi)?, policy)?;
    let slope = |lam: f64| -> Result<f64> {
        Ok(model.derivatives_unchecked(lam)?.group_index_slope(lam))
    };

    let mut changes = Vec::new();
    let mut prev_x = lo;
    let mut prev = slope(lo)?;
    for k in 1..=UNIMODAL_SCAN_POINTS {
        let x = lo + (hi - lo) * k as f64 / UNIMODAL_SCAN_POINTS as f64;
        let s = slope(x)?;
        if s != 0.0 && prev != 0.0 && s.signum() != prev.signum() {
            changes.push((prev_x, x, prev < 0.0));
        }
        if s != 0.0 {
            prev = s;
            prev_x = x;
        }
    }
    let (a, b) = match changes.as_slice() {
        [] => return Err(Error::NoInteriorMinimum { lo, hi }),
        [(a, b, true)] => (*a, *b),
        [(_, _, false)] => return Err(Error::NoInteriorMinimum { lo, hi }),
        many => {
            return Err(Error::NotUnimodal {
                lo,
                hi,
                sign_changes: many.len(),
            })
        }
    };
    let opts = RootOptions {
        f_tol: 0.0,
        x_tol: 1e-13,
        max_iter: 200,
    };
    let lam = bracketed_root(slope, a, b, opts)?;
    let ng = model.derivatives_unchecked(lam)?.group_index(lam);
    Ok((Wavelength::new(lam)?, ng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pole() -> SellmeierModel {
        // MgO:LN extraordinary, frozen at 25 C.
        SellmeierModel::new(
            "test",
            SellmeierForm::TwoPole,
            vec![5.756852, 0.098314, 0.0408114, 189.365163, 156.7504, 0.0132],
            0.5,
            4.0,
            "test",
        )
        .unwrap()
    }

    #[test]
    fn wavelength_rejects_nonpositive() {
        assert!(Wavelength::new(0.0).is_err());
        assert!(Wavelength::new(-1.0).is_err());
        assert!(Wavelength::new(f64::NAN).is_err());
        assert!(Wavelength::new(1e-3).is_ok());
    }

    #[test]
    fn arity_is_enforced() {
        let e = SellmeierModel::new("x", SellmeierForm::TwoPole, vec![1.0; 4], 0.5, 1.0, "");
        assert!(matches!(e, Err(Error::InvalidModel { .. })));
        let e = SellmeierModel::new("x", SellmeierForm::OnePole, vec![2.0, 0.0, 0.0, 0.0], 1.0, 1.0, "");
        assert!(matches!(e, Err(Error::InvalidModel { .. })));
    }

    #[test]
    fn constant_model_has_no_dispersion() {
        let m = SellmeierModel::constant(1.7, 0.3, 5.0).unwrap();
        let wl = Wavelength::new(2.0).unwrap();
        let p = ValidityPolicy::Strict;
        assert_eq!(m.dn_dlambda(wl, p).unwrap(), 0.0);
        assert!((m.group_index(wl, p).unwrap() - 1.7).abs() < 1e-15);
    }

    #[test]
    fn unit_wavevector_identity() {
        let m = SellmeierModel::constant(1.0, 0.1, 10.0).unwrap();
        let k = m
            .wavevector(Wavelength::new(std::f64::consts::TAU).unwrap(), ValidityPolicy::Strict)
            .unwrap();
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_is_admissible() {
        let m = two_pole();
        let n = m
            .refractive_index(Wavelength::new(m.validity_min()).unwrap(), ValidityPolicy::Strict)
            .unwrap();
        assert!(n.is_finite() && n > 1.0);
    }

    #[test]
    fn validity_policies() {
        let m = two_pole();
        let at = |x| Wavelength::new(x).unwrap();
        assert!(m.admit(at(4.3), ValidityPolicy::Strict).is_err());
        assert_eq!(
            m.admit(at(4.3), ValidityPolicy::Grace).unwrap().unwrap().flag,
            ValidityFlag::GraceMargin
        );
        assert!(m.admit(at(4.66), ValidityPolicy::Grace).is_err());
        assert!(m.admit(at(0.45), ValidityPolicy::Grace).is_err());
        assert_eq!(
            m.admit(at(4.66), ValidityPolicy::Extrapolate).unwrap().unwrap().flag,
            ValidityFlag::Extrapolated
        );
        match m.admit(at(4.7), ValidityPolicy::Grace) {
            Err(Error::OutOfValidity { bound_um, .. }) => assert!((bound_um - 4.65).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pole_crossing_names_the_term() {
        let m = two_pole();
        // second pole at x = 156.7504 -> lambda = 12.52
        match m.derivatives_unchecked(12.52) {
            Err(Error::NonPhysical { term, .. }) => assert_eq!(term, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_n_squared_is_domain_error() {
        // n^2 = 4 - 0.5 x goes negative past lambda = sqrt(8)
        let m = SellmeierModel::new("q", SellmeierForm::OnePole, vec![4.0, 0.0, 0.0, 0.5], 0.5, 1.0, "")
            .unwrap();
        match m.derivatives_unchecked(3.0) {
            Err(Error::NonPhysical { term, .. }) => assert_eq!(term, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimum_errors() {
        let m = two_pole();
        // Entirely on the normal-dispersion side of the minimum.
        assert!(matches!(
            group_index_minimum(&m, (0.6, 1.2), ValidityPolicy::Grace),
            Err(Error::NoInteriorMinimum { .. })
        ));
        let c = SellmeierModel::constant(2.0, 0.5, 4.0).unwrap();
        assert!(matches!(
            group_index_minimum(&c, (1.0, 3.0), ValidityPolicy::Grace),
            Err(Error::NoInteriorMinimum { .. })
        ));
    }

    #[test]
    fn role_parsing() {
        assert_eq!("Idler".parse::<Role>().unwrap(), Role::Idler);
        assert!("foo".parse::<Role>().is_err());
    }
}
