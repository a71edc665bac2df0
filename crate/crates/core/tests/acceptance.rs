//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdc_core::dispersion::DEFAULT_MINIMUM_BRACKET;
use spdc_core::table1::{reproduce_table1, Column, Tolerances, REFERENCE_LENGTH_MM, REFERENCE_ROWS};
use spdc_core::units::{frequency_span_thz, frequency_thz_to_wavelength, wavelength_to_frequency_thz};
use spdc_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn wl(x: f64) -> Wavelength {
    Wavelength::new(x).unwrap()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        out.pass = false;
    }
    out.detail = format!("{} [{:.0} ms, limit {} ms]", out.detail, elapsed.as_secs_f64() * 1e3, limit.as_millis());
    out
}

const TABLE_COLUMNS: [Column; 7] = [
    Column::LambdaP,
    Column::LambdaS0,
    Column::Period,
    Column::FwhmI,
    Column::FwhmS,
    Column::LambdaIMin,
    Column::LambdaIMax,
];

fn table1_reproduction(db: &CrystalDatabase) -> Outcome {
    let report = reproduce_table1(db, REFERENCE_LENGTH_MM, Tolerances::DEFAULT, Execution::default());
    let mut misses = Vec::new();
    let mut checked = 0;
    for row in &report.rows {
        let label = format!("{} {}", row.reference.crystal, row.reference.lambda_i0);
        match &row.computed {
            Err(reason) => misses.push(format!("{label}: {reason}")),
            Ok(_) => {
                for col in TABLE_COLUMNS {
                    let cell = row.cell(col).unwrap();
                    checked += 1;
                    if !cell.pass {
                        misses.push(format!(
                            "{label} {} = {:.4} (ref {})",
                            col.name(),
                            cell.computed,
                            cell.reference
                        ));
                    }
                }
            }
        }
    }
    Outcome {
        pass: misses.is_empty(),
        detail: format!(
            "{}/{} cells within tolerance{}{}",
            checked - misses.len(),
            REFERENCE_ROWS.len() * TABLE_COLUMNS.len(),
            if misses.is_empty() { "" } else { "; misses: " },
            misses.join("; ")
        ),
    }
}

fn group_index_minima(db: &CrystalDatabase) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, expected) in [("KTP", 1.81), ("SLT", 1.81), ("MgO:LN", 1.92)] {
        let model = db.get(name).unwrap().model(Role::Idler);
        match group_index_minimum(model, DEFAULT_MINIMUM_BRACKET, ValidityPolicy::Extrapolate) {
            Ok((l, _)) => {
                pass &= (l.um() - expected).abs() <= 0.02;
                parts.push(format!("{name} {:.4} (ref {expected})", l.um()));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn idler_spectrum(c: &CrystalSpec, sol: &GvmSolution, length_mm: f64) -> Result<SampledSpectrum> {
    let grid = GridSpec::new(c.idler_minimum().0, c.absorption_edge(), 20_001)?;
    sample_idler_spectrum(c, sol, length_mm, &grid, 0.0, ValidityPolicy::Extrapolate, Execution::default())
}

use spdc_core::spectrum::SampledSpectrum;

fn frequency_bandwidth(db: &CrystalDatabase) -> Outcome {
    let c = db.get("KTP").unwrap();
    let measured = solve_triplet(c, wl(3.85), 1, ValidityPolicy::Extrapolate)
        .and_then(|sol| idler_spectrum(c, &sol, 2.0))
        .and_then(|sp| fwhm(&sp.samples));
    let span = frequency_span_thz(3.25, 4.45);
    let span_ok = (span - 25.0).abs() <= 0.5;
    match measured {
        Ok(bw) => Outcome {
            pass: (bw.fwhm_frequency - 15.0).abs() <= 1.5 && span_ok,
            detail: format!(
                "KTP 3.85 um, 2 mm: {:.2} THz (15 +- 1.5), half max {:.3}-{:.3} um; 3.25-4.45 um = {:.2} THz (25 +- 0.5)",
                bw.fwhm_frequency, bw.lo_crossing, bw.hi_crossing, span
            ),
        },
        Err(e) => Outcome {
            pass: false,
            detail: format!("KTP 3.85 um: {e}"),
        },
    }
}

fn signal_idler_mapping() -> Outcome {
    let lp = wl(0.660);
    let map = |li: f64| spdc_core::phasematch::complementary_wavelength(lp, wl(li)).unwrap().um();
    let (hi, lo) = (map(3.47), map(4.20));
    Outcome {
        pass: (lo - 0.783).abs() <= 0.001 && (hi - 0.815).abs() <= 0.001,
        detail: format!("3.47-4.20 um idler -> {:.1}-{:.1} nm signal (783-815 +- 1)", lo * 1e3, hi * 1e3),
    }
}

/// Central difference of Delta k in idler frequency, rad/um per THz.
fn dk_slope(c: &CrystalSpec, sol: &GvmSolution, nu: f64) -> Result<f64> {
    let h = 0.05;
    let dk = |nu: f64| sol.delta_k_at_idler(c, frequency_thz_to_wavelength(nu));
    Ok((dk(nu + h)? - dk(nu - h)?) / (2.0 * h))
}

fn table_solutions(db: &CrystalDatabase) -> Vec<(String, Result<(CrystalSpec, GvmSolution)>)> {
    REFERENCE_ROWS
        .iter()
        .map(|r| {
            let label = format!("{} {}", r.crystal, r.lambda_i0);
            let solved = db.get(r.crystal).and_then(|c| {
                let sol = solve_triplet(c, wl(r.lambda_i0), 1, ValidityPolicy::Extrapolate)?;
                Ok((c.clone(), sol))
            });
            (label, solved)
        })
        .collect()
}

fn flatness(db: &CrystalDatabase) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for (label, solved) in table_solutions(db) {
        let ratio = solved.and_then(|(c, sol)| {
            let nu0 = wavelength_to_frequency_thz(sol.lambda_i0.um());
            let centre = dk_slope(&c, &sol, nu0)?.abs();
            let side = dk_slope(&c, &sol, nu0 - 5.0)?.abs().min(dk_slope(&c, &sol, nu0 + 5.0)?.abs());
            Ok(centre / side)
        });
        match ratio {
            Ok(r) if r <= 0.1 => worst = worst.max(r),
            Ok(r) => misses.push(format!("{label}: ratio {r:.3e}")),
            Err(e) => misses.push(format!("{label}: {e}")),
        }
    }
    Outcome {
        pass: misses.is_empty(),
        detail: if misses.is_empty() {
            format!("9 solutions, worst |slope(w0)| / |slope(w0 +- 5 THz)| = {worst:.2e}")
        } else {
            misses.join("; ")
        },
    }
}

fn detuning_properties(db: &CrystalDatabase) -> Outcome {
    let floor = spdc_core::spectrum::DEFAULT_DIP_FLOOR;
    let mut misses = Vec::new();
    let mut gains = Vec::new();
    for (label, solved) in table_solutions(db) {
        let checked = solved.and_then(|(c, sol)| {
            let grid = GridSpec::new(c.idler_minimum().0, c.absorption_edge(), 20_001)?;
            let r = optimize_detuning(&c, &sol, 2.0, floor, &grid, ValidityPolicy::Extrapolate, Execution::default())?;
            let mut problems = Vec::new();
            if r.bandwidth.fwhm_frequency < r.undetuned.fwhm_frequency {
                problems.push("bandwidth below undetuned".to_string());
            }
            if r.bandwidth.min_between < floor - 1e-9 {
                problems.push(format!("dip {:.3}", r.bandwidth.min_between));
            }
            // Zero crossings of the detuned mismatch along the idler axis.
            let li0 = sol.lambda_i0.um();
            let values: Vec<(f64, f64)> = (0..grid.points)
                .map(|k| {
                    let li = grid.at(k);
                    sol.delta_k_at_idler(&c, li).map(|dk| (li, dk + r.detune_dk))
                })
                .collect::<Result<_>>()?;
            let crossings: Vec<f64> = values
                .windows(2)
                .filter(|w| w[0].1.signum() != w[1].1.signum())
                .map(|w| w[0].0)
                .collect();
            let straddle = crossings.len() == 2 && crossings[0] < li0 && crossings[1] > li0;
            if !straddle {
                problems.push(format!("Delta k zeros at {crossings:.3?}"));
            }
            gains.push(r.bandwidth.fwhm_frequency / r.undetuned.fwhm_frequency);
            Ok(problems)
        });
        match checked {
            Ok(p) if p.is_empty() => {}
            Ok(p) => misses.push(format!("{label}: {}", p.join(", "))),
            Err(e) => misses.push(format!("{label}: {e}")),
        }
    }
    let min_gain = gains.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: misses.is_empty(),
        detail: if misses.is_empty() {
            format!("9 solutions, dip floor {floor}, smallest bandwidth gain x{min_gain:.3}")
        } else {
            misses.join("; ")
        },
    }
}

fn numerical_hygiene(db: &CrystalDatabase) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_fd: f64 = 0.0;
    let mut models = Vec::new();
    for c in db.crystals() {
        for role in Role::ALL {
            let m = c.model(role);
            if !models.iter().any(|x: &SellmeierModel| x.name() == m.name()) {
                models.push(m.clone());
            }
        }
    }
    for m in &models {
        for _ in 0..1000 {
            let l = rng.gen_range(m.validity_min() + 1e-3..m.validity_max() - 1e-3);
            let h = 1e-4;
            let n = |x: f64| m.refractive_index(wl(x), ValidityPolicy::Strict).unwrap();
            let fd = (n(l + h) - n(l - h)) / (2.0 * h);
            let exact = m.dn_dlambda(wl(l), ValidityPolicy::Strict).unwrap();
            worst_fd = worst_fd.max(((fd - exact) / exact).abs());
        }
    }
    let worst_zero = (1..=5)
        .map(|n| intensity_at(2.0 * n as f64 * PI / 2000.0, 2.0))
        .fold(0.0, f64::max);
    let mut worst_trip: f64 = 0.0;
    for _ in 0..1000 {
        let c = &db.crystals()[rng.gen_range(0..db.crystals().len())];
        let (ls, li) = (wl(rng.gen_range(0.7..1.05)), wl(rng.gen_range(2.5..4.0)));
        let lp = pump_wavelength(ls, li);
        let order = [1, 3, 5][rng.gen_range(0..3)];
        let period = poling_period_for(c, lp, ls, li, order, ValidityPolicy::Grace).unwrap();
        let dk = delta_k(c, lp, ls, li, QpmGrating::new(period, order).unwrap(), ValidityPolicy::Grace).unwrap();
        worst_trip = worst_trip.max(dk.abs());
    }
    Outcome {
        pass: worst_fd < 1e-6 && worst_zero < 1e-12 && worst_trip < 1e-12,
        detail: format!(
            "dn/dlambda rel err {worst_fd:.1e} over {} models x 1000 pts; sinc^2 zeros {worst_zero:.1e}; round trip {worst_trip:.1e} rad/um",
            models.len()
        ),
    }
}

fn main() {
    // libtest-style flags (e.g. --nocapture, filters) are accepted and ignored.
    let db = CrystalDatabase::builtin();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 table reproduction", timed(Duration::from_secs(5), || table1_reproduction(&db))),
        ("2 group-index minima", timed(Duration::from_secs(1), || group_index_minima(&db))),
        ("3 frequency bandwidth", frequency_bandwidth(&db)),
        ("4 signal-idler mapping", signal_idler_mapping()),
        ("5 GVM flatness", flatness(&db)),
        ("6 detuning properties", detuning_properties(&db)),
        ("7 numerical hygiene", numerical_hygiene(&db)),
    ];
    let mut failed = 0;
    for (name, outcome) in &criteria {
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
