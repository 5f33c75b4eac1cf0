use super::{Report, RunContext, ScenarioConfig};
use crate::degree::{ess_inf_witness, vmo_degree};
use crate::error::{Result, StageExt};
use crate::io::{write_ess_inf_csv, write_frame_diagnostics_json, write_winding_json, write_zak_csv};
use crate::zak::{frame_diagnostics, qp_residual, zak_transform};

/// Threshold below which `min |F_ε|` counts as the forced zero.
const ESS_INF_THRESHOLD: f64 = 0.1;

pub(super) fn run(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut Report) -> Result<()> {
    let n = cfg.resolution;
    let grid = format!("{n}x{n}");
    let label = cfg.signal.label();
    report.resolution("zak", grid.clone());
    report.tolerance("refine_tol", cfg.refine_tol);
    report.tolerance("ess_inf_threshold", ESS_INF_THRESHOLD);

    let f = cfg.signal.build(1.0 / n as f64, 0.0, &ctx.base_dir).stage("make_signal")?;
    let z = zak_transform(&f, n).stage("zak_transform")?;
    let diag = frame_diagnostics(&z, cfg.refine_tol);
    let residual = qp_residual(&f, &z).stage("qp_residual")?;
    let unitarity = (z.l2_norm() - f.l2_norm()).abs() / f.l2_norm();
    let degree = vmo_degree(&z, &cfg.eps, cfg.points_per_side).stage("vmo_degree")?;
    let ess = ess_inf_witness(&z, &cfg.eps, ESS_INF_THRESHOLD, cfg.points_per_side).stage("ess_inf_witness")?;

    for (name, v) in [
        ("min_abs", diag.min_abs),
        ("argmin_x", diag.argmin[0]),
        ("argmin_y", diag.argmin[1]),
        ("max_abs", diag.max_abs),
        ("A", diag.lower_bound_a),
        ("B", diag.upper_bound_b),
    ] {
        report.metric("frame_diagnostics", &label, grid.clone(), name, v);
    }
    report.metric("qp_residual", &label, grid.clone(), "residual", residual);
    report.metric("zak_transform", &label, grid.clone(), "unitarity_error", unitarity);
    report.metric("vmo_degree", &label, grid.clone(), "degree", degree.degree as f64);
    for w in &degree.per_eps {
        let eps = w.eps.unwrap_or(f64::NAN);
        let res = format!("{grid} eps={eps}");
        report.metric("winding_number", &label, res.clone(), "winding", w.winding as f64);
        report.metric("winding_number", &label, res, "min_modulus_on_path", w.min_modulus_on_path);
    }
    for row in &ess.rows {
        let res = format!("{grid} eps={}", row.eps);
        report.metric("ess_inf_witness", &label, res.clone(), "min_mod", row.min_mod);
        report.metric("qp_defect", &label, res, "defect", row.defect);
    }

    write_zak_csv(ctx.output(report, "zak.csv"), &z, &label)?;
    report.outputs.push("zak.json".into());
    write_frame_diagnostics_json(ctx.output(report, "frame.json"), &diag)?;
    if let Some(finest) = degree.per_eps.last() {
        write_winding_json(ctx.output(report, "winding.json"), finest)?;
    }
    write_ess_inf_csv(ctx.output(report, "ess_inf.csv"), &ess)?;

    report.check(
        "quasi_periodic_winding",
        degree.degree == 1,
        format!("degree {} on the unit square for every eps", degree.degree),
    );
    report.check("qp_residual", residual < 1e-12, format!("residual {residual:e}"));
    report.check("unitarity", unitarity < 1e-3, format!("relative error {unitarity:e}"));
    report.check(
        "frame_bounds_ordered",
        diag.lower_bound_a <= diag.upper_bound_b,
        format!("A = {}, B = {}", diag.lower_bound_a, diag.upper_bound_b),
    );
    Ok(())
}
