//! Normalized SPDC spectra for a monochromatic pump, FWHM extraction, and
//! the poling-detuning optimizer.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::dispersion::{Role, ValidityFlag, ValidityPolicy, ValidityWarning, Wavelength};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gvm::{GvmSolution, SolutionWarning};
use crate::phasematch::CrystalSpec;
use crate::roots::{bracketed_root, golden_maximize, RootOptions};
use crate::units::{
    frequency_span_thz, frequency_thz_to_wavelength, wavelength_to_frequency_thz, UM_PER_MM,
};

pub const DEFAULT_GRID_POINTS: usize = 20_001;
pub const HALF_MAX: f64 = 0.5;
/// Largest intensity step allowed across a half-maximum crossing.
pub const MAX_CROSSING_STEP: f64 = 0.05;
pub const DEFAULT_DIP_FLOOR: f64 = 0.5;

/// sinc^2(Delta k L / 2) with Delta k in rad/um and L in mm.
pub fn intensity_at(delta_k: f64, length_mm: f64) -> f64 {
    let x = 0.5 * delta_k * length_mm * UM_PER_MM;
    if x == 0.0 {
        1.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

fn check_length(length_mm: f64) -> Result<()> {
    if length_mm.is_finite() && length_mm > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLength(length_mm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Idler vacuum wavelength, um.
    IdlerWavelength,
    /// Signal vacuum wavelength, um.
    SignalWavelength,
    /// Idler frequency, THz.
    IdlerFrequency,
}

impl AxisKind {
    pub fn is_wavelength(self) -> bool {
        !matches!(self, AxisKind::IdlerFrequency)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMeta {
    pub crystal: String,
    pub length_mm: f64,
    pub period_um: f64,
    pub order: u32,
    pub lambda_p_um: f64,
    /// Additive offset to Delta k, rad/um.
    pub detune_dk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples {
    pub kind: AxisKind,
    /// Strictly monotone.
    pub axis: Vec<f64>,
    /// Normalized to a peak of exactly 1.
    pub intensity: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumSamples {
    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Re-expresses an idler-wavelength spectrum on an ascending idler
    /// frequency axis.
    pub fn to_idler_frequency(&self) -> Result<SpectrumSamples> {
        if self.kind != AxisKind::IdlerWavelength {
            return Err(Error::InvalidGrid("expected an idler wavelength axis".into()));
        }
        let mut pairs: Vec<(f64, f64)> = self
            .axis
            .iter()
            .zip(&self.intensity)
            .map(|(&l, &i)| (wavelength_to_frequency_thz(l), i))
            .collect();
        pairs.reverse();
        let (axis, intensity) = pairs.into_iter().unzip();
        Ok(SpectrumSamples {
            kind: AxisKind::IdlerFrequency,
            axis,
            intensity,
            meta: self.meta.clone(),
        })
    }
}

/// Idler wavelength grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub from_um: f64,
    pub to_um: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(from_um: f64, to_um: f64, points: usize) -> Result<Self> {
        let ok = from_um.is_finite() && to_um.is_finite() && from_um > 0.0 && points >= 1;
        if !ok || (points > 1 && !(to_um > from_um)) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < from < to and points >= 1, got [{from_um}, {to_um}] with {points} points"
            )));
        }
        Ok(GridSpec {
            from_um,
            to_um,
            points,
        })
    }

    /// `[lambda*, min(absorption_edge, validity_max + margin)]` on the idler
    /// axis, [`DEFAULT_GRID_POINTS`] points.
    pub fn default_for(crystal: &CrystalSpec, policy: ValidityPolicy) -> Self {
        let idler = crystal.model(Role::Idler);
        let upper = crystal.absorption_edge().min(idler.upper_bound(policy));
        GridSpec {
            from_um: crystal.idler_minimum().0,
            to_um: upper,
            points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn at(&self, k: usize) -> f64 {
        if self.points == 1 {
            self.from_um
        } else {
            self.from_um + (self.to_um - self.from_um) * k as f64 / (self.points - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedPoint {
    pub lambda_i_um: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpectrum {
    pub samples: SpectrumSamples,
    /// Grid points that could not be evaluated, in grid order.
    pub rejected: Vec<RejectedPoint>,
    /// One entry per (role, flag): the most extreme flagged wavelength.
    pub warnings: Vec<SolutionWarning>,
}

fn flag_rank(flag: ValidityFlag) -> u8 {
    match flag {
        ValidityFlag::GraceMargin => 0,
        ValidityFlag::Extrapolated => 1,
    }
}

/// Samples I(lambda_i) = sinc^2((Delta k + detune_dk) L / 2) at fixed
/// pump wavelength and grating, normalized to the realized peak.
pub fn sample_idler_spectrum(
    crystal: &CrystalSpec,
    solution: &GvmSolution,
    length_mm: f64,
    grid: &GridSpec,
    detune_dk: f64,
    policy: ValidityPolicy,
    exec: Execution,
) -> Result<SampledSpectrum> {
    check_length(length_mm)?;
    let lambda_p = solution.lambda_p;
    let mut extreme: BTreeMap<(u8, u8), SolutionWarning> = BTreeMap::new();
    let mut note = |role: Role, w: Option<ValidityWarning>| {
        if let Some(warning) = w {
            let key = (role as u8, flag_rank(warning.flag));
            let replace = match extreme.get(&key) {
                Some(SolutionWarning::Validity { warning: old, .. }) => {
                    warning.wavelength_um > old.wavelength_um
                }
                _ => true,
            };
            if replace {
                extreme.insert(key, SolutionWarning::Validity { role, warning });
            }
        }
    };
    note(Role::Pump, crystal.admit(Role::Pump, lambda_p, policy)?);

    let point = |k: usize| -> Result<(f64, Option<ValidityWarning>, Option<ValidityWarning>)> {
        let li = Wavelength::new(grid.at(k))?;
        let wi = crystal.admit(Role::Idler, li, policy)?;
        let ls = crate::phasematch::complementary_wavelength(lambda_p, li)?;
        let ws = crystal.admit(Role::Signal, ls, policy)?;
        let dk = solution.delta_k_at_idler(crystal, li.um())?;
        Ok((intensity_at(dk + detune_dk, length_mm), wi, ws))
    };
    let evaluated = exec.map_range(grid.points, point);

    let mut axis = Vec::with_capacity(grid.points);
    let mut intensity = Vec::with_capacity(grid.points);
    let mut rejected = Vec::new();
    for (k, res) in evaluated.into_iter().enumerate() {
        match res {
            Ok((i, wi, ws)) => {
                note(Role::Idler, wi);
                note(Role::Signal, ws);
                axis.push(grid.at(k));
                intensity.push(i);
            }
            Err(error) => rejected.push(RejectedPoint {
                lambda_i_um: grid.at(k),
                error,
            }),
        }
    }
    let peak = intensity.iter().cloned().fold(0.0_f64, f64::max);
    if !(peak > 0.0) {
        return Err(Error::NoPeak);
    }
    for v in &mut intensity {
        *v /= peak;
    }
    Ok(SampledSpectrum {
        samples: SpectrumSamples {
            kind: AxisKind::IdlerWavelength,
            axis,
            intensity,
            meta: SpectrumMeta {
                crystal: crystal.name().to_string(),
                length_mm,
                period_um: solution.grating.period(),
                order: solution.grating.order(),
                lambda_p_um: lambda_p.um(),
                detune_dk,
            },
        },
        rejected,
        warnings: extreme.into_values().collect(),
    })
}

/// Maps an idler spectrum onto the signal axis via 1/lambda_s = 1/lambda_p - 1/lambda_i.
/// Intensities are carried over unchanged; the axis is returned ascending.
pub fn signal_spectrum_from_idler(samples: &SpectrumSamples) -> Result<SpectrumSamples> {
    if samples.kind != AxisKind::IdlerWavelength {
        return Err(Error::InvalidGrid("expected an idler wavelength axis".into()));
    }
    let inv_p = 1.0 / samples.meta.lambda_p_um;
    let mut pairs: Vec<(f64, f64)> = samples
        .axis
        .iter()
        .zip(&samples.intensity)
        .map(|(&li, &i)| (1.0 / (inv_p - 1.0 / li), i))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (axis, intensity) = pairs.into_iter().unzip();
    Ok(SpectrumSamples {
        kind: AxisKind::SignalWavelength,
        axis,
        intensity,
        meta: samples.meta.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    /// um
    pub fwhm_wavelength: f64,
    /// THz
    pub fwhm_frequency: f64,
    /// Outermost half-maximum crossings, in the source axis units.
    pub lo_crossing: f64,
    pub hi_crossing: f64,
    /// Intensity stays >= 0.5 everywhere between the crossings.
    pub contiguous: bool,
    /// Deepest sampled dip between the outermost lobe peaks; 1 for a single lobe.
    pub min_between: f64,
    pub kind: AxisKind,
}

fn interpolate_crossing(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    x0 + (HALF_MAX - y0) * (x1 - x0) / (y1 - y0)
}

/// Full width at half maximum from the outermost 0.5 crossings, located by
/// linear interpolation.
pub fn fwhm(samples: &SpectrumSamples) -> Result<Bandwidth> {
    let (x, y) = (&samples.axis, &samples.intensity);
    if x.is_empty() || !y.iter().any(|&v| v >= 1.0 - 1e-12) {
        return Err(Error::NoPeak);
    }
    let first = y.iter().position(|&v| v >= HALF_MAX).ok_or(Error::NoPeak)?;
    let last = y.iter().rposition(|&v| v >= HALF_MAX).ok_or(Error::NoPeak)?;
    if first == 0 {
        return Err(Error::GridTooNarrow {
            side: "lower",
            intensity: y[0],
        });
    }
    if last == y.len() - 1 {
        return Err(Error::GridTooNarrow {
            side: "upper",
            intensity: y[last],
        });
    }
    for step in [y[first] - y[first - 1], y[last] - y[last + 1]] {
        if step > MAX_CROSSING_STEP {
            return Err(Error::RefineGrid { step });
        }
    }
    let lo = interpolate_crossing(x[first - 1], y[first - 1], x[first], y[first]);
    let hi = interpolate_crossing(x[last + 1], y[last + 1], x[last], y[last]);
    let span = &y[first..=last];
    let left_peak = (0..span.len() - 1).find(|&k| span[k + 1] < span[k]).unwrap_or(span.len() - 1);
    let right_peak = (1..span.len()).rev().find(|&k| span[k - 1] < span[k]).unwrap_or(0);
    let min_between = if left_peak < right_peak {
        span[left_peak..=right_peak].iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        span.iter().cloned().fold(0.0, f64::max)
    };
    let contiguous = span.iter().all(|&v| v >= HALF_MAX);
    let (fwhm_wavelength, fwhm_frequency) = if samples.kind.is_wavelength() {
        (hi - lo, frequency_span_thz(lo, hi))
    } else {
        (
            (frequency_thz_to_wavelength(lo) - frequency_thz_to_wavelength(hi)).abs(),
            hi - lo,
        )
    };
    Ok(Bandwidth {
        fwhm_wavelength,
        fwhm_frequency,
        lo_crossing: lo,
        hi_crossing: hi,
        contiguous,
        min_between,
        kind: samples.kind,
    })
}

/// Shape of Delta k(omega_i) around the centre of a GVM solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Minimum,
    Maximum,
    /// Second derivative vanishes or the point is not an extremum.
    Saddle,
}

/// Frequency step for the curvature probe, THz.
const CURVATURE_STEP_THZ: f64 = 1.0;
/// |Delta k(omega +- h) - Delta k(omega)| below this counts as flat, rad/um.
const FLAT_DK: f64 = 1e-12;
const COARSE_CANDIDATES: usize = 16;

/// Classifies Delta k near omega_i0 with the pump and grating fixed.
pub fn classify_extremum(crystal: &CrystalSpec, solution: &GvmSolution) -> Result<Extremum> {
    let nu0 = wavelength_to_frequency_thz(solution.lambda_i0.um());
    let dk = |nu: f64| solution.delta_k_at_idler(crystal, frequency_thz_to_wavelength(nu));
    let centre = dk(nu0)?;
    let up = dk(nu0 + CURVATURE_STEP_THZ)? - centre;
    let down = dk(nu0 - CURVATURE_STEP_THZ)? - centre;
    Ok(if up.abs() < FLAT_DK || down.abs() < FLAT_DK || up.signum() != down.signum() {
        Extremum::Saddle
    } else if up > 0.0 {
        Extremum::Minimum
    } else {
        Extremum::Maximum
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetuningResult {
    /// Additive Delta k offset, rad/um.
    pub detune_dk: f64,
    pub extremum: Extremum,
    pub bandwidth: Bandwidth,
    pub undetuned: Bandwidth,
    /// Poling period realizing the detuning: 2 pi m / (2 pi m / Lambda - detune_dk).
    pub detuned_period_um: f64,
    pub spectrum: SampledSpectrum,
    pub warnings: Vec<String>,
}

/// Poling period equivalent to an additive Delta k offset.
pub fn detuned_period(period_um: f64, order: u32, detune_dk: f64) -> f64 {
    let gk = TAU * order as f64 / period_um;
    TAU * order as f64 / (gk - detune_dk)
}

/// Largest |detune| keeping the centre intensity sinc^2(detune L / 2) at or above `dip_floor`.
fn max_detune_for_floor(length_mm: f64, dip_floor: f64) -> Result<f64> {
    if dip_floor >= 1.0 {
        return Ok(0.0);
    }
    let half_len_um = 0.5 * length_mm * UM_PER_MM;
    let sinc2 = |x: f64| if x == 0.0 { 1.0 } else { (x.sin() / x).powi(2) };
    let x = bracketed_root(
        |x| Ok(sinc2(x) - dip_floor),
        0.0,
        std::f64::consts::PI,
        RootOptions::default(),
    )?;
    Ok(x / half_len_um)
}

/// Picks the Delta k offset that maximizes the frequency FWHM while the
/// inter-lobe dip stays at or above `dip_floor` (relative to the peak).
///
/// The sign is opposite to the extremum type: a minimum of Delta k is
/// shifted down, a maximum up. Saddles return zero detuning.
#[allow(clippy::too_many_arguments)]
pub fn optimize_detuning(
    crystal: &CrystalSpec,
    solution: &GvmSolution,
    length_mm: f64,
    dip_floor: f64,
    grid: &GridSpec,
    policy: ValidityPolicy,
    exec: Execution,
) -> Result<DetuningResult> {
    check_length(length_mm)?;
    if !(dip_floor > 0.0 && dip_floor <= 1.0) {
        return Err(Error::InvalidDipFloor(dip_floor));
    }
    let spectrum_for = |detune: f64| {
        sample_idler_spectrum(crystal, solution, length_mm, grid, detune, policy, exec)
    };
    let base = spectrum_for(0.0)?;
    let undetuned = fwhm(&base.samples)?;
    let extremum = classify_extremum(crystal, solution)?;
    let mut warnings = Vec::new();

    let sign = match extremum {
        Extremum::Minimum => -1.0,
        Extremum::Maximum => 1.0,
        Extremum::Saddle => 0.0,
    };
    let s_max = if sign == 0.0 {
        warnings.push("saddle/flat: Delta k has no extremum at the centre, detuning skipped".into());
        0.0
    } else {
        max_detune_for_floor(length_mm, dip_floor)?
    };

    // Objective: frequency FWHM of a feasible detuned spectrum, -inf otherwise.
    let score = |s: f64| -> (f64, Option<String>) {
        if s == 0.0 {
            return (undetuned.fwhm_frequency, None);
        }
        match spectrum_for(sign * s).and_then(|sp| fwhm(&sp.samples)) {
            Ok(bw) if bw.min_between >= dip_floor - 1e-9 => (bw.fwhm_frequency, None),
            Ok(bw) => (
                f64::NEG_INFINITY,
                Some(format!("dip {:.4} below floor at detune {:e}", bw.min_between, sign * s)),
            ),
            Err(e) => (f64::NEG_INFINITY, Some(format!("detune {:e}: {e}", sign * s))),
        }
    };

    let mut best = (0.0, undetuned.fwhm_frequency);
    if s_max > 0.0 {
        let candidates: Vec<f64> = (0..=COARSE_CANDIDATES)
            .map(|k| s_max * k as f64 / COARSE_CANDIDATES as f64)
            .collect();
        let scored = exec.map(&candidates, |&s| score(s));
        let mut failure = None;
        let mut best_k = 0;
        for (k, (v, why)) in scored.into_iter().enumerate() {
            if v > best.1 {
                best = (candidates[k], v);
                best_k = k;
            }
            if failure.is_none() {
                failure = why;
            }
        }
        let lo = candidates[best_k.saturating_sub(1)];
        let hi = candidates[(best_k + 1).min(COARSE_CANDIDATES)];
        let (s, v) = golden_maximize(|s| score(s).0, lo, hi, s_max * 1e-6, 60);
        if v > best.1 {
            best = (s, v);
        }
        if let Some(why) = failure {
            warnings.push(format!("optimizer bracket exhausted, best found returned ({why})"));
        }
    }

    let detune_dk = sign * best.0;
    let spectrum = if detune_dk == 0.0 { base } else { spectrum_for(detune_dk)? };
    let bandwidth = fwhm(&spectrum.samples)?;
    Ok(DetuningResult {
        detune_dk,
        extremum,
        bandwidth,
        undetuned,
        detuned_period_um: detuned_period(
            solution.grating.period(),
            solution.grating.order(),
            detune_dk,
        ),
        spectrum,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn meta() -> SpectrumMeta {
        SpectrumMeta {
            crystal: "test".into(),
            length_mm: 2.0,
            period_um: 20.0,
            order: 1,
            lambda_p_um: 0.66,
            detune_dk: 0.0,
        }
    }

    fn triangle(points: usize) -> SpectrumSamples {
        // Peak 1 at x = 3, zero at 2 and 4: half max at 2.5 and 3.5.
        let axis: Vec<f64> = (0..points).map(|k| 1.5 + 3.0 * k as f64 / (points - 1) as f64).collect();
        let intensity = axis.iter().map(|&x| (1.0 - (x - 3.0f64).abs()).max(0.0)).collect();
        SpectrumSamples {
            kind: AxisKind::IdlerWavelength,
            axis,
            intensity,
            meta: meta(),
        }
    }

    #[test]
    fn sinc_values() {
        assert_eq!(intensity_at(0.0, 2.0), 1.0);
        let l = 2.0;
        let dk_for = |x: f64| 2.0 * x / (l * UM_PER_MM);
        assert!(intensity_at(dk_for(PI), l) < 1e-30);
        assert!((intensity_at(dk_for(PI / 2.0), l) - (2.0 / PI).powi(2)).abs() < 1e-15);
        assert_eq!(intensity_at(0.3, l), intensity_at(-0.3, l));
    }

    #[test]
    fn triangle_crossings_are_exact() {
        let bw = fwhm(&triangle(301)).unwrap();
        assert!((bw.lo_crossing - 2.5).abs() < 1e-12);
        assert!((bw.hi_crossing - 3.5).abs() < 1e-12);
        assert!((bw.fwhm_wavelength - 1.0).abs() < 1e-12);
        assert_eq!(bw.min_between, 1.0);
        assert!(bw.contiguous);
        assert!((bw.fwhm_frequency - frequency_span_thz(2.5, 3.5)).abs() < 1e-12);
    }

    #[test]
    fn fwhm_error_paths() {
        let mut narrow = triangle(301);
        narrow.axis.truncate(170);
        narrow.intensity.truncate(170);
        assert!(matches!(fwhm(&narrow), Err(Error::GridTooNarrow { side: "upper", .. })));

        assert!(matches!(fwhm(&triangle(13)), Err(Error::RefineGrid { .. })));

        let mut flat = triangle(301);
        flat.intensity.iter_mut().for_each(|v| *v *= 0.9);
        assert_eq!(fwhm(&flat), Err(Error::NoPeak));
    }

    #[test]
    fn frequency_axis_fwhm_matches_wavelength_axis() {
        let s = triangle(3001);
        let a = fwhm(&s).unwrap();
        let b = fwhm(&s.to_idler_frequency().unwrap()).unwrap();
        assert!((a.fwhm_frequency - b.fwhm_frequency).abs() < 1e-9);
        assert!((a.fwhm_wavelength - b.fwhm_wavelength).abs() < 1e-9);
    }

    #[test]
    fn double_lobe_is_not_contiguous() {
        let axis: Vec<f64> = (0..2001).map(|k| k as f64 / 2000.0).collect();
        let intensity = axis
            .iter()
            .map(|&x| {
                let a = (-(x - 0.4).powi(2) / 0.002).exp();
                let b = (-(x - 0.6).powi(2) / 0.002).exp();
                a.max(b)
            })
            .collect();
        let s = SpectrumSamples {
            kind: AxisKind::IdlerWavelength,
            axis,
            intensity,
            meta: meta(),
        };
        let bw = fwhm(&s).unwrap();
        assert!(!bw.contiguous);
        assert!((bw.min_between - (-5.0f64).exp()).abs() < 1e-12);
        assert!(bw.lo_crossing < 0.4 && bw.hi_crossing > 0.6);
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(3.0, 2.0, 10).is_err());
        assert!(GridSpec::new(3.0, 4.0, 0).is_err());
        assert!(GridSpec::new(3.0, 3.0, 1).is_ok());
    }

    #[test]
    fn floor_of_one_forbids_detuning() {
        assert_eq!(max_detune_for_floor(2.0, 1.0).unwrap(), 0.0);
        let s = max_detune_for_floor(2.0, 0.5).unwrap();
        assert!((intensity_at(s, 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detuned_period_round_trip() {
        let p = detuned_period(20.45, 1, -1e-3);
        assert!(p < 20.45);
        assert!((TAU / p - (TAU / 20.45 + 1e-3)).abs() < 1e-15);
        assert_eq!(detuned_period(20.45, 1, 0.0), 20.45);
    }
}
