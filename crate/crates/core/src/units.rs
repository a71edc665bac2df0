//! Unit conventions: vacuum wavelength in um, wavevector in rad/um,
//! frequency in THz, crystal length in mm.

/// Speed of light in vacuum, m/s (exact).
pub const C0_M_PER_S: f64 = 299_792_458.0;

/// Speed of light expressed in um * THz, so that nu[THz] = C0_UM_THZ / lambda[um].
pub const C0_UM_THZ: f64 = C0_M_PER_S * 1e-6;

pub const UM_PER_MM: f64 = 1000.0;

#[inline]
pub fn wavelength_to_frequency_thz(lambda_um: f64) -> f64 {
    C0_UM_THZ / lambda_um
}

#[inline]
pub fn frequency_thz_to_wavelength(nu_thz: f64) -> f64 {
    C0_UM_THZ / nu_thz
}

/// Exact frequency span between two vacuum wavelengths.
#[inline]
pub fn frequency_span_thz(lambda_a_um: f64, lambda_b_um: f64) -> f64 {
    C0_UM_THZ * (1.0 / lambda_a_um - 1.0 / lambda_b_um).abs()
}
