use std::f64::consts::TAU;

use proptest::prelude::*;
use spdc_core::phasematch::complementary_wavelength;
use spdc_core::*;

const P: ValidityPolicy = ValidityPolicy::Grace;

fn wl(x: f64) -> Wavelength {
    Wavelength::new(x).unwrap()
}

fn db() -> CrystalDatabase {
    CrystalDatabase::builtin()
}

/// (pump, signal, idler) from a signal and idler wavelength.
fn triple(ls: f64, li: f64) -> (Wavelength, Wavelength, Wavelength) {
    (pump_wavelength(wl(ls), wl(li)), wl(ls), wl(li))
}

#[test]
fn published_poling_period_for_mgoln() {
    let db = db();
    for (name, ls, li, expected) in [("MgO:LN", 0.829, 4.25, 18.34), ("MgO:LN", 1.094, 3.3, 23.12)] {
        let c = db.get(name).unwrap();
        let (p, s, i) = triple(ls, li);
        let period = poling_period_for(c, p, s, i, 1, P).unwrap();
        assert!((period - expected).abs() <= 0.05, "{name}: {period}");
    }
}

#[test]
fn published_mgoln_row_is_phase_matched() {
    let db = db();
    let c = db.get("MgO:LN").unwrap();
    let (p, s, i) = triple(0.939, 3.8);
    let dk = delta_k(c, p, s, i, QpmGrating::first_order(20.52).unwrap(), P).unwrap();
    assert!(intensity_at(dk, 2.0) > 0.5, "dk = {dk}");
}

#[test]
fn third_order_grating_with_triple_period_is_equivalent() {
    let db = db();
    let c = db.get("KTP").unwrap();
    let (p, s, i) = triple(0.795, 3.85);
    let first = delta_k(c, p, s, i, QpmGrating::new(20.45, 1).unwrap(), P).unwrap();
    let third = delta_k(c, p, s, i, QpmGrating::new(3.0 * 20.45, 3).unwrap(), P).unwrap();
    assert!((first - third).abs() < 1e-14);
}

#[test]
fn period_scales_with_order() {
    let db = db();
    for c in db.crystals() {
        let (p, s, i) = triple(0.9, 3.6);
        let one = poling_period_for(c, p, s, i, 1, P).unwrap();
        let three = poling_period_for(c, p, s, i, 3, P).unwrap();
        assert!((three / one - 3.0).abs() < 1e-15);
        assert!(matches!(poling_period_for(c, p, s, i, 2, P), Err(Error::InvalidOrder(2))));
    }
}

#[test]
fn swapping_labels_and_models_keeps_delta_k() {
    let db = db();
    let ktp = db.get("KTP").unwrap();
    let swapped = CrystalSpec::new(
        "KTP",
        ktp.model(Role::Pump).clone(),
        ktp.model(Role::Idler).clone(),
        ktp.model(Role::Signal).clone(),
        ktp.absorption_edge(),
    )
    .unwrap();
    let g = QpmGrating::first_order(20.0).unwrap();
    let (p, s, i) = triple(0.8, 3.8);
    let a = delta_k(ktp, p, s, i, g, ValidityPolicy::Extrapolate).unwrap();
    let b = delta_k(&swapped, p, i, s, g, ValidityPolicy::Extrapolate).unwrap();
    assert_eq!(a, b);
}

#[test]
fn delta_k_is_continuous_along_the_idler_axis() {
    let db = db();
    for c in db.crystals() {
        let lp = wl(0.7);
        let g = QpmGrating::first_order(20.0).unwrap();
        let lo = c.idler_minimum().0;
        let hi = c.model(Role::Idler).validity_max();
        let n = 2000;
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let li = wl(lo + (hi - lo) * k as f64 / (n - 1) as f64);
                let ls = complementary_wavelength(lp, li).unwrap();
                delta_k(c, lp, ls, li, g, ValidityPolicy::Extrapolate).unwrap()
            })
            .collect();
        assert!(values.iter().all(|v| v.is_finite()));
        let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let mut sorted = steps.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let largest = *sorted.last().unwrap();
        assert!(largest < 50.0 * median.max(1e-9), "{}: jump {largest} vs median {median}", c.name());
    }
}

#[test]
fn energy_conservation_is_checked() {
    let db = db();
    let c = db.get("KTP").unwrap();
    let g = QpmGrating::first_order(20.45).unwrap();
    // Table precision is not enough: the tripwire is relative 1e-9.
    let e = delta_k(c, wl(0.659), wl(0.795), wl(3.85), g, P);
    assert!(matches!(e, Err(Error::EnergyConservation { .. })));
}

#[test]
fn backward_geometry_is_reported() {
    let mgoln = db().get("MgO:LN").unwrap().clone();
    let vacuum_pump = SellmeierModel::new("X.vacuum", SellmeierForm::OnePole, vec![1.0, 0.0, 0.0, 0.0], 0.3, 5.0, "")
        .unwrap();
    let rename = |m: &SellmeierModel| {
        SellmeierModel::new(
            "X.e",
            m.form(),
            m.coefficients().to_vec(),
            m.validity_min(),
            m.validity_max(),
            m.source(),
        )
        .unwrap()
    };
    let x = CrystalSpec::new(
        "X",
        vacuum_pump,
        rename(mgoln.model(Role::Signal)),
        rename(mgoln.model(Role::Idler)),
        5.0,
    )
    .unwrap();
    let (p, s, i) = triple(0.9, 3.5);
    assert!(matches!(
        poling_period_for(&x, p, s, i, 1, P),
        Err(Error::BackwardQpm { .. })
    ));
}

#[test]
fn crystal_family_is_enforced() {
    let db = db();
    let ktp = db.get("KTP").unwrap();
    let slt = db.get("SLT").unwrap();
    let e = CrystalSpec::new(
        "KTP",
        ktp.model(Role::Pump).clone(),
        slt.model(Role::Signal).clone(),
        ktp.model(Role::Idler).clone(),
        4.5,
    );
    assert!(matches!(e, Err(Error::InvalidCrystal { .. })));
    let e = CrystalSpec::new(
        "KTP",
        ktp.model(Role::Pump).clone(),
        ktp.model(Role::Signal).clone(),
        ktp.model(Role::Idler).clone(),
        1.5,
    );
    assert!(matches!(e, Err(Error::InvalidCrystal { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn poling_period_round_trip(which in 0usize..3, ls in 0.7f64..1.05, li in 2.5f64..4.0, order in prop::sample::select(vec![1u32, 3, 5])) {
        let db = db();
        let c = &db.crystals()[which];
        let (p, s, i) = triple(ls, li);
        let period = poling_period_for(c, p, s, i, order, P).unwrap();
        let g = QpmGrating::new(period, order).unwrap();
        prop_assert!(delta_k(c, p, s, i, g, P).unwrap().abs() < 1e-12);
        prop_assert!((g.wavevector() - TAU * order as f64 / period).abs() < 1e-15);
    }
}
