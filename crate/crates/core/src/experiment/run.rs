use serde_json::json;

use super::config::*;
use super::registry::ExperimentKind;
use super::report::{PlotData, Relation, Report, ReportRow};
use crate::curve_engine::{
    calibrate, default_battery, discrepancy, nondivergence_fraction, translate_curve,
    w_invariance_defect, EmpiricalMeasure, TranslateOptions,
};
use crate::degenerate::{degenerate_experiment, DegenerateReferences};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::lattice::haar_sample;
use crate::rep_theory::{
    b_det_check, b_det_exponent, good_function_fit, rational, verify_corollary, verify_direct_sum,
    verify_lemma_sl2,
};
use crate::seeding::derive;
use crate::torus::equidistribution_sweep;

// sub-task labels for derived seeds
const HAAR_REFERENCE: u64 = 1;
const HAAR_TEST: u64 = 2;

fn io(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("cannot format output: {e}"))
}

fn fmt_list<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Runs a validated configuration. Module errors are wrapped with the
/// experiment name.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let kind = config.kind();
    let wrap = |e: Error| match e {
        Error::Experiment { .. } => e,
        other => Error::Experiment {
            experiment: kind.name().to_string(),
            source: Box::new(other),
        },
    };
    config.validate().map_err(wrap)?;
    match config {
        ExperimentConfig::Equidistribution(c) => equidistribution(c),
        ExperimentConfig::Nondivergence(c) => nondivergence(c),
        ExperimentConfig::WInvariance(c) => w_invariance(c),
        ExperimentConfig::Torus(c) => torus(c),
        ExperimentConfig::Rep(c) => rep(c),
        ExperimentConfig::GoodFunction(c) => good(c),
        ExperimentConfig::Degenerate(c) => degenerate(c),
        ExperimentConfig::HaarCalibration(c) => haar_calibration(c),
    }
    .map_err(wrap)
}

fn equidistribution(c: &EquidistributionConfig) -> Result<Report> {
    let kind = c.experiment;
    let curve = c.curve.build()?.with_id(kind.name());
    let haar = haar_sample(c.lattice, c.haar.count, derive(c.seed, HAAR_REFERENCE), c.haar.height_cap)?;
    let mut battery = default_battery(c.lattice);
    calibrate(&mut battery, &haar)?;
    drop(haar);
    let base = GroupElement::identity(c.lattice.model());
    let options = TranslateOptions {
        rule: c.rule,
        ..TranslateOptions::default()
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut fractions = Vec::new();
    let last = c.t.len() - 1;
    for (i, &t) in c.t.iter().enumerate() {
        let m = translate_curve(&curve, &base, c.lattice, t, c.count, c.seed, &options)?;
        let r = discrepancy(&m, &battery)?;
        let param = format!("t={t}");
        let row = if i == last {
            ReportRow::check(kind, &param, "discrepancy", r.max_defect, Relation::Below, c.tolerances.discrepancy)
        } else {
            ReportRow::info(kind, &param, "discrepancy", r.max_defect)
        };
        rows.push(row.with_error_bar(r.error_bar));
        if let Some(limit) = c.tolerances.error_bar {
            rows.push(ReportRow::check(kind, &param, "error_bar", r.error_bar, Relation::AtMost, limit));
        }
        if let Some(n) = &c.nondivergence {
            let f = nondivergence_fraction(&m, n.level)?;
            rows.push(ReportRow::check(
                kind,
                &param,
                format!("nondivergence_fraction(Y={})", n.level),
                f,
                Relation::AtLeast,
                n.min_fraction,
            ));
            fractions.push(f);
        }
        reports.push(r);
    }
    if let Some(bars) = c.tolerances.monotone_bars {
        for w in reports.windows(2) {
            let excess = w[1].max_defect - w[0].max_defect - bars * w[0].error_bar.hypot(w[1].error_bar);
            rows.push(ReportRow::check(
                kind,
                format!("t={}..{}", w[0].t, w[1].t),
                "monotone_excess",
                excess,
                Relation::AtMost,
                0.0,
            ));
        }
    }
    let mut header = vec!["t", "discrepancy", "error_bar"];
    if !fractions.is_empty() {
        header.push("nondivergence_fraction");
    }
    let trend: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = fmt_list(&[r.t, r.max_defect, r.error_bar]);
            if let Some(f) = fractions.get(i) {
                row.push(f.to_string());
            }
            row
        })
        .collect();
    let per_observable: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| {
            r.per_observable.iter().map(move |o| {
                let mut row = vec![r.t.to_string(), o.name.clone()];
                row.extend(fmt_list(&[o.empirical, o.reference, o.difference, o.error_bar]));
                row
            })
        })
        .collect();
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "discrepancy": reports, "nondivergence_fraction": fractions }),
        plots: vec![
            PlotData::table("discrepancy_vs_t.csv", &header, &trend).map_err(io)?,
            PlotData::table(
                "observables_vs_t.csv",
                &["t", "observable", "empirical", "reference", "difference", "error_bar"],
                &per_observable,
            )
            .map_err(io)?,
        ],
    })
}

fn nondivergence(c: &NondivergenceConfig) -> Result<Report> {
    let kind = c.experiment;
    let curve = c.curve.build()?.with_id(kind.name());
    let base = GroupElement::identity(c.lattice.model());
    let options = TranslateOptions {
        rule: c.rule,
        ..TranslateOptions::default()
    };
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for &t in &c.t {
        let m = translate_curve(&curve, &base, c.lattice, t, c.count, c.seed, &options)?;
        let f = nondivergence_fraction(&m, c.tolerances.level)?;
        rows.push(ReportRow::check(
            kind,
            format!("t={t}"),
            format!("nondivergence_fraction(Y={})", c.tolerances.level),
            f,
            Relation::AtLeast,
            c.tolerances.min_fraction,
        ));
        plot.push(fmt_list(&[t, f]));
    }
    let min = rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "level": c.tolerances.level, "min_fraction": min }),
        plots: vec![PlotData::table("nondivergence_vs_t.csv", &["t", "fraction"], &plot).map_err(io)?],
    })
}

fn w_invariance(c: &WInvarianceConfig) -> Result<Report> {
    let kind = c.experiment;
    let curve = c.curve.build()?.with_id(kind.name());
    let base = GroupElement::identity(c.lattice.model());
    let battery = default_battery(c.lattice);
    let reports = c
        .t
        .iter()
        .map(|&t| w_invariance_defect(&curve, &base, c.lattice, t, c.t0, &battery, c.count, c.seed, c.rule))
        .collect::<Result<Vec<_>>>()?;
    let last = reports.len() - 1;
    let mut rows: Vec<ReportRow> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let param = format!("t={}", r.t);
            let row = if i == last {
                ReportRow::check(kind, param, "defect", r.defect, Relation::Below, c.tolerances.defect)
            } else {
                ReportRow::info(kind, param, "defect", r.defect)
            };
            row.with_error_bar(r.error_bar)
        })
        .collect();
    let (first, end) = (&reports[0], &reports[last]);
    let excess = end.defect - first.defect + c.tolerances.trend_bars * first.error_bar.hypot(end.error_bar);
    rows.push(ReportRow::check(
        kind,
        format!("t={}..{}", first.t, end.t),
        "trend_excess",
        excess,
        Relation::Below,
        0.0,
    ));
    let plot: Vec<Vec<String>> = reports
        .iter()
        .map(|r| fmt_list(&[r.t, r.defect, r.error_bar, r.dropped_fraction]))
        .collect();
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "t0": c.t0, "defects": reports }),
        plots: vec![PlotData::table(
            "defect_vs_t.csv",
            &["t", "defect", "error_bar", "dropped_fraction"],
            &plot,
        )
        .map_err(io)?],
    })
}

fn torus(c: &TorusConfig) -> Result<Report> {
    let kind = c.experiment;
    let sweep = equidistribution_sweep(&c.curve, &c.alpha, c.m_max)?;
    let rows = sweep
        .iter()
        .map(|r| {
            let param = format!("alpha={}", r.alpha);
            if r.alpha >= c.tolerances.from_alpha {
                ReportRow::check(kind, param, "max_abs_coeff", r.max_abs, Relation::Below, c.tolerances.max_coeff)
            } else {
                ReportRow::info(kind, param, "max_abs_coeff", r.max_abs)
            }
        })
        .collect();
    let mut contents = Vec::new();
    crate::torus::write_sweep_csv(&sweep, &mut contents).map_err(io)?;
    let maxima: Vec<Vec<String>> = sweep
        .iter()
        .map(|r| vec![r.alpha.to_string(), r.count.to_string(), r.max_abs.to_string()])
        .collect();
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "m_max": c.m_max, "sweep": sweep }),
        plots: vec![
            PlotData {
                file_name: "coefficients_vs_alpha.csv".into(),
                contents,
            },
            PlotData::table("max_coeff_vs_alpha.csv", &["alpha", "count", "max_abs_coeff"], &maxima).map_err(io)?,
        ],
    })
}

fn rep(c: &RepConfig) -> Result<Report> {
    let kind = c.experiment;
    let mut rows = Vec::new();
    let mut determinant = Vec::new();
    let mut plot = Vec::new();
    for m in 1..=c.det_m_max {
        for &[p, q] in &c.det_t {
            let ok = b_det_check(m, &rational(p, q))?;
            let t = if q == 1 { p.to_string() } else { format!("{p}/{q}") };
            rows.push(ReportRow::check(
                kind,
                format!("m={m},t={t}"),
                "det_mismatch",
                if ok { 0.0 } else { 1.0 },
                Relation::AtMost,
                0.0,
            ));
            let label = if ok { "pass" } else { "fail" };
            determinant.push(json!({ "m": m, "t": t, "exponent": b_det_exponent(m), "det_check": label }));
        }
    }
    let mut lemma = Vec::new();
    for m in 1..=c.lemma_m_max {
        for &t in &c.t {
            let r = verify_lemma_sl2(m, t, c.trials, c.seed)?;
            rows.push(ReportRow::check(
                kind,
                format!("m={m},t={t}"),
                "lemma_violations",
                r.violations as f64,
                Relation::AtMost,
                0.0,
            ));
            plot.push(vec![
                "lemma".into(),
                m.to_string(),
                t.to_string(),
                String::new(),
                r.trials.to_string(),
                r.violations.to_string(),
            ]);
            lemma.push(r);
        }
    }
    let mut corollary = Vec::new();
    for m in 1..=c.lemma_m_max {
        let r = verify_corollary(m, &c.alphas, &c.t, c.trials, c.seed)?;
        rows.push(ReportRow::check(
            kind,
            format!("m={m}"),
            "corollary_violations",
            r.violations as f64,
            Relation::AtMost,
            0.0,
        ));
        plot.push(vec![
            "corollary".into(),
            m.to_string(),
            String::new(),
            fmt_list(&c.alphas).join(" "),
            (r.trials * c.t.len() * c.alphas.len()).to_string(),
            r.violations.to_string(),
        ]);
        corollary.push(r);
    }
    let mut direct_sum = Vec::new();
    for summands in &c.direct_sums {
        for &t in &c.t {
            let r = verify_direct_sum(summands, t, c.trials, c.seed)?;
            let label = fmt_list(summands).join("+");
            rows.push(ReportRow::check(
                kind,
                format!("m={label},t={t}"),
                "direct_sum_violations",
                r.violations as f64,
                Relation::AtMost,
                0.0,
            ));
            plot.push(vec![
                "direct_sum".into(),
                label,
                t.to_string(),
                String::new(),
                r.trials.to_string(),
                r.violations.to_string(),
            ]);
            direct_sum.push(r);
        }
    }
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({
            "determinant": determinant,
            "lemma": lemma,
            "corollary": corollary,
            "direct_sum": direct_sum,
        }),
        plots: vec![PlotData::table(
            "violations.csv",
            &["check", "m", "t", "alphas", "trials", "violations"],
            &plot,
        )
        .map_err(io)?],
    })
}

fn good(c: &GoodFunctionConfig) -> Result<Report> {
    let kind = c.experiment;
    let interval = (c.interval[0], c.interval[1]);
    let mut rows = Vec::new();
    let mut details = Vec::new();
    let mut plot = Vec::new();
    for f in &c.families {
        let r = good_function_fit(&f.polys, interval, c.subintervals, &c.rho)?;
        let violations = r
            .checks
            .iter()
            .filter(|k| !(k.relative_measure <= r.fitted_c * k.rho.powf(r.fitted_alpha) * (1.0 + 1e-12)))
            .count();
        rows.push(ReportRow::check(kind, &f.name, "fitted_alpha", r.fitted_alpha, Relation::AtLeast, f.min_alpha));
        rows.push(ReportRow::info(kind, &f.name, "fitted_c", r.fitted_c));
        rows.push(ReportRow::check(kind, &f.name, "bound_violations", violations as f64, Relation::AtMost, 0.0));
        for k in &r.checks {
            plot.push(vec![
                f.name.clone(),
                k.family_index.to_string(),
                k.interval.0.to_string(),
                k.interval.1.to_string(),
                k.rho.to_string(),
                k.relative_measure.to_string(),
                (r.fitted_c * k.rho.powf(r.fitted_alpha)).to_string(),
            ]);
        }
        details.push(json!({
            "name": f.name,
            "fitted_c": r.fitted_c,
            "fitted_alpha": r.fitted_alpha,
            "worst_interval": r.worst_interval,
            "degree": r.degree,
            "checks": r.checks.len(),
        }));
    }
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "families": details }),
        plots: vec![PlotData::table(
            "sublevel_measures.csv",
            &["family", "polynomial", "a", "b", "rho", "relative_measure", "bound"],
            &plot,
        )
        .map_err(io)?],
    })
}

fn degenerate(c: &DegenerateConfig) -> Result<Report> {
    let kind = c.experiment;
    let curve = c.curve.build()?.with_id(kind.name());
    let references = DegenerateReferences::build(c.haar.count, derive(c.seed, HAAR_REFERENCE), c.haar.height_cap)?;
    let reports = c
        .t
        .iter()
        .map(|&t| degenerate_experiment(&curve, t, c.count, c.seed, &references))
        .collect::<Result<Vec<_>>>()?;
    let last = reports.len() - 1;
    let tol = &c.tolerances;
    let mut rows = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let param = format!("t={}", r.t);
        rows.push(ReportRow::check(
            kind,
            &param,
            "max_plane_distance",
            r.max_plane_distance,
            Relation::AtMost,
            tol.plane_distance,
        ));
        if i == last {
            rows.push(
                ReportRow::check(kind, &param, "modular_discrepancy", r.modular_discrepancy, Relation::Below, tol.modular_discrepancy)
                    .with_error_bar(r.modular_error_bar),
            );
            rows.push(ReportRow::check(
                kind,
                &param,
                "picard_separation_sigma",
                r.picard_separation_sigma,
                Relation::Above,
                tol.separation_sigma,
            ));
        } else {
            rows.push(ReportRow::info(kind, &param, "modular_discrepancy", r.modular_discrepancy).with_error_bar(r.modular_error_bar));
            rows.push(ReportRow::info(kind, &param, "picard_separation_sigma", r.picard_separation_sigma));
        }
    }
    let plot: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            fmt_list(&[
                r.t,
                r.max_plane_distance,
                r.modular_discrepancy,
                r.modular_error_bar,
                r.empirical_plane_mean,
                r.picard_plane_mean,
                r.picard_separation_sigma,
            ])
        })
        .collect();
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "reports": reports }),
        plots: vec![PlotData::table(
            "degenerate_vs_t.csv",
            &[
                "t",
                "max_plane_distance",
                "modular_discrepancy",
                "modular_error_bar",
                "empirical_plane_mean",
                "picard_plane_mean",
                "separation_sigma",
            ],
            &plot,
        )
        .map_err(io)?],
    })
}

fn haar_calibration(c: &HaarCalibrationConfig) -> Result<Report> {
    let kind = c.experiment;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    let mut details = Vec::new();
    for (i, &lattice) in c.lattices.iter().enumerate() {
        let label = i as u64 * 16;
        let reference = haar_sample(
            lattice,
            c.reference.count,
            derive(c.seed, label + HAAR_REFERENCE),
            c.reference.height_cap,
        )?;
        let mut battery = default_battery(lattice);
        calibrate(&mut battery, &reference)?;
        drop(reference);
        let test = haar_sample(lattice, c.count, derive(c.seed, label + HAAR_TEST), c.reference.height_cap)?;
        let report = discrepancy(&EmpiricalMeasure::from_haar(&test)?, &battery)?;
        for o in &report.per_observable {
            let sigma = if o.error_bar > 0.0 {
                o.difference / o.error_bar
            } else if o.difference <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            rows.push(
                ReportRow::check(kind, format!("{lattice}:{}", o.name), "discrepancy_sigma", sigma, Relation::AtMost, c.tolerances.sigma)
                    .with_error_bar(o.error_bar),
            );
            plot.push(vec![
                lattice.to_string(),
                o.name.clone(),
                o.empirical.to_string(),
                o.reference.to_string(),
                o.difference.to_string(),
                o.error_bar.to_string(),
                sigma.to_string(),
            ]);
        }
        details.push(json!({ "lattice": lattice, "report": report }));
    }
    Ok(Report {
        experiment: kind,
        seed: c.seed,
        rows,
        details: json!({ "lattices": details }),
        plots: vec![PlotData::table(
            "calibration.csv",
            &["lattice", "observable", "empirical", "reference", "difference", "error_bar", "sigma"],
            &plot,
        )
        .map_err(io)?],
    })
}

/// Runs the built-in configuration of `kind` with the given seed.
pub fn run_default(kind: ExperimentKind, seed: u64) -> Result<Report> {
    let mut config = ExperimentConfig::default_for(kind);
    config.set_seed(seed);
    run_experiment(&config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut config = ExperimentConfig::default_for(kind);
        match &mut config {
            ExperimentConfig::Equidistribution(c) => {
                c.count = 2000;
                c.haar.count = 20_000;
                c.t = vec![1.0, 2.0];
            }
            ExperimentConfig::Nondivergence(c) => {
                c.count = 2000;
                c.t = vec![0.0, 4.0];
            }
            ExperimentConfig::WInvariance(c) => {
                c.count = 2000;
                c.t = vec![1.0, 2.0];
            }
            ExperimentConfig::Torus(c) => c.alpha = vec![5.0, 10.0],
            ExperimentConfig::Rep(c) => {
                c.det_m_max = 4;
                c.lemma_m_max = 3;
                c.trials = 200;
                c.direct_sums = vec![vec![1, 2]];
            }
            ExperimentConfig::GoodFunction(c) => c.families.truncate(2),
            ExperimentConfig::Degenerate(c) => {
                c.count = 2000;
                c.haar.count = 20_000;
                c.t = vec![2.0];
            }
            ExperimentConfig::HaarCalibration(c) => {
                c.count = 5000;
                c.reference.count = 20_000;
            }
        }
        config
    }

    #[test]
    fn every_experiment_runs_at_small_scale() {
        for kind in ExperimentKind::ALL {
            let report = run_experiment(&small(kind)).unwrap_or_else(|e| panic!("{kind}: {e}"));
            assert_eq!(report.experiment, kind);
            assert!(!report.rows.is_empty(), "{kind}");
            assert!(report.rows.iter().all(|r| r.is_consistent()), "{kind}");
            assert!(!report.plots.is_empty(), "{kind}");
        }
    }

    #[test]
    fn rep_details_carry_det_labels() {
        let report = run_experiment(&small(ExperimentKind::RepVerification)).unwrap();
        let det = report.details["determinant"].as_array().unwrap();
        assert_eq!(det.len(), 4 * 8);
        assert!(det.iter().all(|d| d["det_check"] == "pass"));
        assert!(report.pass());
    }

    #[test]
    fn invalid_configs_fail_before_running() {
        let mut config = small(ExperimentKind::TorusSweep);
        if let ExperimentConfig::Torus(c) = &mut config {
            c.alpha = vec![2.0, 1.0];
        }
        let err = run_experiment(&config).unwrap_err().to_string();
        assert!(err.contains("torus_sweep") && err.contains("alpha"), "{err}");
    }
}
