use std::fmt::Write as _;

use spdc_core::gvm::idler_grid;
use spdc_core::spectrum::{SampledSpectrum, DEFAULT_DIP_FLOOR};
use spdc_core::table1::{reproduce_table1, Column, Tolerance, Tolerances};
use spdc_core::{
    fwhm, optimize_detuning, sample_idler_spectrum, solve_triplet, CrystalDatabase,
    Execution, GridSpec, Role, Wavelength,
};

use crate::args::{
    Common, Detune, DispersionArgs, Format, GvmSolveArgs, SpectrumArgs, Table1Args, TuningCurveArgs,
};
use crate::output::{commented, period, policy, wavelength_decimals, wl, write_output, Record, RunRecord};
use crate::Failure;

fn load_db(common: &Common) -> Result<CrystalDatabase, Failure> {
    Ok(match &common.db {
        Some(path) => CrystalDatabase::load(path)?,
        None => CrystalDatabase::builtin(),
    })
}

fn exec(common: &Common) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn joined_or_none(items: impl IntoIterator<Item = String>) -> String {
    let v: Vec<String> = items.into_iter().collect();
    if v.is_empty() {
        "none".to_string()
    } else {
        v.join("; ")
    }
}

pub fn dispersion(a: &DispersionArgs) -> Result<(), Failure> {
    let db = load_db(&a.common)?;
    let crystal = db.get(&a.crystal)?;
    let role: Role = a.role.parse()?;
    let model = crystal.model(role);
    let policy = policy(&a.common);
    if !(a.from.is_finite() && a.to.is_finite()) || a.to < a.from {
        return Err(Failure::Usage(format!("need --from <= --to, got {} and {}", a.from, a.to)));
    }
    let grid: Vec<f64> = if a.from == a.to {
        vec![a.from]
    } else if a.points < 2 {
        return Err(Failure::Usage("a range needs --points >= 2".into()));
    } else {
        (0..a.points)
            .map(|k| a.from + (a.to - a.from) * k as f64 / (a.points - 1) as f64)
            .collect()
    };
    let mut warnings = Vec::new();
    for end in [a.from, a.to] {
        if let Some(w) = model.admit(Wavelength::new(end)?, policy)? {
            warnings.push(w.to_string());
        }
    }
    let rows = exec(&a.common).map(&grid, |&l| {
        let d = model.derivatives(Wavelength::new(l)?, policy)?;
        Ok::<_, spdc_core::Error>((l, d.n, d.group_index(l)))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut run = RunRecord::new("dispersion", &a.common, &db);
    run.param("crystal", crystal.name());
    run.param("role", role);
    run.param("model", model.name());
    run.param("from_um", a.from);
    run.param("to_um", a.to);
    run.param("points", grid.len());
    let mut text = run.header();
    for w in &warnings {
        let _ = writeln!(text, "# warning: {w}");
    }
    let step = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let d = wavelength_decimals(step);
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            text.push_str("lambda_um,n,n_group\n");
            for (l, n, ng) in rows {
                let _ = writeln!(text, "{l:.d$},{n:.8},{ng:.8}");
            }
        }
        Format::Record => {
            for (l, n, ng) in rows {
                let mut r = Record::default();
                r.field("lambda_um", format!("{l:.d$}")).field("n", format!("{n:.8}")).field("n_group", format!("{ng:.8}"));
                text.push_str(&r.finish());
                text.push('\n');
            }
        }
    }
    write_output(a.common.out.as_deref(), &text)?;
    Ok(())
}

pub fn gvm_solve(a: &GvmSolveArgs) -> Result<(), Failure> {
    let db = load_db(&a.common)?;
    let crystal = db.get(&a.crystal)?;
    let sol = solve_triplet(crystal, Wavelength::new(a.lambda_i)?, a.order, policy(&a.common))?;

    let mut run = RunRecord::new("gvm-solve", &a.common, &db);
    run.param("crystal", crystal.name());
    run.param("lambda_i_um", a.lambda_i);
    run.param("order", a.order);
    let fields = [
        ("lambda_p_um", wl(sol.lambda_p.um())),
        ("lambda_s0_um", wl(sol.lambda_s0.um())),
        ("lambda_i0_um", wl(sol.lambda_i0.um())),
        ("poling_period_um", period(sol.grating.period())),
        ("order", sol.grating.order().to_string()),
        ("matched_group_index", format!("{:.6}", sol.matched_group_index)),
        ("residual_gvm", format!("{:.3e}", sol.residual_gvm)),
        ("residual_dk_rad_per_um", format!("{:.3e}", sol.residual_dk)),
        ("warnings", joined_or_none(sol.warnings.iter().map(|w| w.to_string()))),
    ];
    let mut text = run.header();
    match a.common.format.unwrap_or(Format::Record) {
        Format::Record => {
            let mut r = Record::default();
            for (k, v) in &fields {
                r.field(k, v);
            }
            text.push_str(&r.finish());
        }
        Format::Csv => {
            let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let values: Vec<String> = fields.iter().map(|(_, v)| csv_field(v)).collect();
            let _ = writeln!(text, "{}\n{}", keys.join(","), values.join(","));
        }
    }
    write_output(a.common.out.as_deref(), &text)?;
    Ok(())
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), Failure> {
    let db = load_db(&a.common)?;
    let crystal = db.get(&a.crystal)?;
    let policy = policy(&a.common);
    let exec = exec(&a.common);
    let sol = solve_triplet(crystal, Wavelength::new(a.lambda_i)?, a.order, policy)?;
    let default = GridSpec::default_for(crystal, policy);
    let grid = GridSpec::new(
        a.from.unwrap_or(default.from_um),
        a.to.unwrap_or(default.to_um),
        a.points,
    )?;

    let mut summary = Record::default();
    let (sampled, bandwidth): (SampledSpectrum, _) = match a.detune {
        Detune::Fixed(d) => {
            let sampled = sample_idler_spectrum(crystal, &sol, a.length_mm, &grid, d, policy, exec)?;
            let bw = fwhm(&sampled.samples)?;
            summary.field("detune_dk_rad_per_um", format!("{d:e}"));
            summary.field(
                "detuned_period_um",
                format!("{:.4}", spdc_core::spectrum::detuned_period(sol.grating.period(), sol.grating.order(), d)),
            );
            (sampled, bw)
        }
        Detune::Auto => {
            let r = optimize_detuning(crystal, &sol, a.length_mm, a.dip_floor, &grid, policy, exec)?;
            summary.field("detune_dk_rad_per_um", format!("{:e}", r.detune_dk));
            summary.field("detuned_period_um", format!("{:.4}", r.detuned_period_um));
            summary.field("extremum", format!("{:?}", r.extremum).to_lowercase());
            summary.field("dip_floor", a.dip_floor);
            summary.field("undetuned_fwhm_thz", format!("{:.3}", r.undetuned.fwhm_frequency));
            for w in &r.warnings {
                summary.field("optimizer_note", w);
            }
            (r.spectrum, r.bandwidth)
        }
    };
    let inv_p = 1.0 / sol.lambda_p.um();
    let to_signal = |l: f64| 1.0 / (inv_p - 1.0 / l);
    let (s_min, s_max) = (to_signal(bandwidth.hi_crossing), to_signal(bandwidth.lo_crossing));
    summary
        .field("lambda_i0_um", wl(sol.lambda_i0.um()))
        .field("lambda_s0_um", wl(sol.lambda_s0.um()))
        .field("lambda_p_um", wl(sol.lambda_p.um()))
        .field("poling_period_um", period(sol.grating.period()))
        .field("order", sol.grating.order())
        .field("length_mm", a.length_mm)
        .field("lambda_i_min_um", wl(bandwidth.lo_crossing))
        .field("lambda_i_max_um", wl(bandwidth.hi_crossing))
        .field("fwhm_i_um", wl(bandwidth.fwhm_wavelength))
        .field("fwhm_thz", format!("{:.3}", bandwidth.fwhm_frequency))
        .field("lambda_s_min_um", wl(s_min))
        .field("lambda_s_max_um", wl(s_max))
        .field("fwhm_s_um", wl(s_max - s_min))
        .field("contiguous", bandwidth.contiguous)
        .field("dip", format!("{:.4}", bandwidth.min_between))
        .field("grid_points", grid.points)
        .field("rejected_points", sampled.rejected.len())
        .field(
            "warnings",
            joined_or_none(
                sol.warnings
                    .iter()
                    .chain(&sampled.warnings)
                    .map(|w| w.to_string()),
            ),
        );
    let summary = summary.finish();

    let mut run = RunRecord::new("spectrum", &a.common, &db);
    run.param("crystal", crystal.name());
    run.param("lambda_i_um", a.lambda_i);
    run.param("length_mm", a.length_mm);
    run.param("order", a.order);
    run.param("from_um", grid.from_um);
    run.param("to_um", grid.to_um);
    run.param("points", grid.points);
    match a.detune {
        Detune::Fixed(d) => run.param("detune", d),
        Detune::Auto => run.param("detune", "auto"),
    }
    if a.detune == Detune::Auto || a.dip_floor != DEFAULT_DIP_FLOOR {
        run.param("dip_floor", a.dip_floor);
    }
    let mut text = run.header();
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            text.push_str(&commented(&summary));
            text.push_str("lambda_i_um,intensity\n");
            let step = if grid.points > 1 { grid.at(1) - grid.at(0) } else { 0.0 };
            let d = wavelength_decimals(step);
            for (l, i) in sampled.samples.axis.iter().zip(&sampled.samples.intensity) {
                let _ = writeln!(text, "{l:.d$},{i:.8}");
            }
        }
        Format::Record => text.push_str(&summary),
    }
    write_output(a.common.out.as_deref(), &text)?;
    Ok(())
}

pub fn tuning_curve(a: &TuningCurveArgs) -> Result<(), Failure> {
    let db = load_db(&a.common)?;
    let crystal = db.get(&a.crystal)?;
    if !(a.from.is_finite() && a.to.is_finite()) {
        return Err(Failure::Usage("--from and --to must be finite".into()));
    }
    let grid = idler_grid(a.from, a.to, a.points)?;
    let curve = spdc_core::tuning_curve(crystal, &grid, policy(&a.common), exec(&a.common));

    let mut run = RunRecord::new("tuning-curve", &a.common, &db);
    run.param("crystal", crystal.name());
    run.param("from_um", a.from);
    run.param("to_um", a.to);
    run.param("points", a.points);
    let step = if grid.len() > 1 { (grid[1].um() - grid[0].um()).abs() } else { 0.0 };
    let d = wavelength_decimals(step);
    let mut text = run.header();
    let _ = writeln!(text, "# failed_points: {}", curve.failures.len());
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            text.push_str("lambda_s_um,lambda_i_um\n");
            for p in &curve.points {
                let _ = writeln!(text, "{:.d$},{:.d$}", p.lambda_s.um(), p.lambda_i.um());
            }
        }
        Format::Record => {
            for p in &curve.points {
                let mut r = Record::default();
                r.field("lambda_s_um", format!("{:.d$}", p.lambda_s.um()))
                    .field("lambda_i_um", format!("{:.d$}", p.lambda_i.um()));
                text.push_str(&r.finish());
                text.push('\n');
            }
        }
    }
    write_output(a.common.out.as_deref(), &text)?;

    if !curve.failures.is_empty() {
        let mut report = String::from("lambda_i_um,kind,message\n");
        for f in &curve.failures {
            let _ = writeln!(
                report,
                "{:.d$},{},{}",
                f.lambda_i.um(),
                f.error.kind(),
                csv_field(&f.error.to_string())
            );
        }
        match &a.failures {
            Some(path) => write_output(Some(path), &report)?,
            None => eprint!("{report}"),
        }
    }
    Ok(())
}

fn tolerance_text(t: Tolerance) -> String {
    match t {
        Tolerance::Absolute(v) => format!("+-{v}"),
        Tolerance::Relative(v) => format!("+-{}%", v * 100.0),
    }
}

fn cell_value(column: Column, v: f64) -> String {
    if column == Column::Period {
        period(v)
    } else {
        wl(v)
    }
}

pub fn table1(a: &Table1Args) -> Result<(), Failure> {
    let db = load_db(&a.common)?;
    let report = reproduce_table1(&db, a.length_mm, Tolerances::DEFAULT, exec(&a.common));

    let mut run = RunRecord::new("table1", &a.common, &db);
    run.param("length_mm", a.length_mm);
    let mut text = run.header();
    let passed = report.rows.iter().filter(|r| r.pass()).count();
    match a.common.format.unwrap_or(Format::Record) {
        Format::Record => {
            for row in &report.rows {
                let mut r = Record::default();
                r.field("row", format!("{} {}", row.reference.crystal, row.reference.lambda_i0));
                r.field("status", if row.pass() { "PASS" } else { "FAIL" });
                match &row.computed {
                    Err(reason) => {
                        r.field("reason", reason);
                    }
                    Ok(computed) => {
                        for cell in &row.cells {
                            r.field(
                                cell.column.name(),
                                format!(
                                    "computed={} reference={} abs_dev={:+.4} rel_dev={:+.2}% tol={} {}",
                                    cell_value(cell.column, cell.computed),
                                    cell.reference,
                                    cell.abs_dev,
                                    cell.rel_dev * 100.0,
                                    tolerance_text(cell.tolerance),
                                    if cell.pass { "PASS" } else { "FAIL" }
                                ),
                            );
                        }
                        r.field("fwhm_thz", format!("{:.3}", computed.fwhm_frequency));
                        r.field("warnings", joined_or_none(row.warnings.iter().cloned()));
                    }
                }
                text.push_str(&r.finish());
                text.push('\n');
            }
            let _ = writeln!(
                text,
                "overall: {} ({passed} of {} rows pass)",
                if report.all_pass() { "PASS" } else { "FAIL" },
                report.rows.len()
            );
        }
        Format::Csv => {
            text.push_str("crystal,lambda_i0_um,column,computed,reference,abs_dev,rel_dev,tolerance,pass,note\n");
            for row in &report.rows {
                let (c, l) = (row.reference.crystal, row.reference.lambda_i0);
                match &row.computed {
                    Err(reason) => {
                        let _ = writeln!(text, "{c},{l},,,,,,,FAIL,{}", csv_field(reason));
                    }
                    Ok(_) => {
                        for cell in &row.cells {
                            let _ = writeln!(
                                text,
                                "{c},{l},{},{},{},{:.4},{:.4},{},{},",
                                cell.column.name(),
                                cell_value(cell.column, cell.computed),
                                cell.reference,
                                cell.abs_dev,
                                cell.rel_dev,
                                tolerance_text(cell.tolerance),
                                if cell.pass { "PASS" } else { "FAIL" }
                            );
                        }
                    }
                }
            }
        }
    }
    write_output(a.common.out.as_deref(), &text)?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Regression(format!(
            "{} of {} rows outside tolerance",
            report.rows.len() - passed,
            report.rows.len()
        )))
    }
}
