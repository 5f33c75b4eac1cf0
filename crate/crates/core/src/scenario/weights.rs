use super::{Report, RunContext, ScenarioConfig};
use crate::error::{Result, StageExt};
use crate::io::write_weight_table;
use crate::oscillation::{conjugate, weight_mass, weight_row, DyadicCube, WEIGHT_REL_TOL};

const DEFAULT_P: [f64; 3] = [1.25, 1.5, 2.0];
const REACH: i64 = 8;
const LATE_K0: (i32, i32) = (8, 12);
const LATE_VARIATION: f64 = 0.1;
const ORACLE_TOL: f64 = 0.01;
const ORACLE_CELLS: usize = 20_000;

/// The cube `[2, 3) × [0, 1)` at scale 1.
pub(crate) fn reference_cube() -> DyadicCube {
    DyadicCube::new(0, (2, 0))
}

/// `w₂` mass over the tripled reference cube with the `ξ₂` integral in closed
/// form, `∫ dy / (a + y²) = atan(y / √a) / √a`, and a midpoint rule in `ξ₁`.
pub(crate) fn reference_mass_p2() -> f64 {
    let (x0, x1, y0, y1) = reference_cube().tripled();
    let h = (x1 - x0) / ORACLE_CELLS as f64;
    let total: f64 = (0..ORACLE_CELLS)
        .map(|i| {
            let x = x0 + (i as f64 + 0.5) * h;
            let a = 1.0 + x * x;
            let r = a.sqrt();
            ((y1 / r).atan() - (y0 / r).atan()) / r
        })
        .sum();
    (total * h).sqrt()
}

pub(super) fn run(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut Report) -> Result<()> {
    let ps = if cfg.p_values.is_empty() {
        DEFAULT_P.to_vec()
    } else {
        cfg.p_values.clone()
    };
    let (lo, hi) = cfg.k0_range;
    report.resolution("k0", format!("{lo}..={hi}"));
    report.resolution("anchor_reach", REACH.to_string());
    report.tolerance("weight_rel_tol", WEIGHT_REL_TOL);
    report.tolerance("late_variation", LATE_VARIATION);
    report.tolerance("oracle_tol", ORACLE_TOL);

    let mut rows = Vec::new();
    for &p in &ps {
        let mut column = Vec::new();
        for k0 in lo..=hi {
            let row = weight_row(k0, p, REACH).stage(&format!("weight_row k0={k0} p={p}"))?;
            report.metric("weight_row", &format!("p={p}"), format!("k0={k0}"), "max_mass", row.max_mass);
            column.push(row);
        }
        let late: Vec<f64> = column
            .iter()
            .filter(|r| r.k0 >= LATE_K0.0 && r.k0 <= LATE_K0.1)
            .map(|r| r.max_mass)
            .collect();
        if lo <= LATE_K0.0 && hi >= LATE_K0.1 {
            let max = late.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = late.iter().cloned().fold(f64::INFINITY, f64::min);
            let variation = (max - min) / max;
            report.check(
                format!("late_k0_variation_p{p}"),
                variation < LATE_VARIATION,
                format!("variation {variation:e} over k0 = {}..={}", LATE_K0.0, LATE_K0.1),
            );
        }
        if conjugate(p)? > 2.0 && column.len() > 1 {
            let decreasing = column.windows(2).all(|w| w[1].decay_term < w[0].decay_term);
            report.check(
                format!("decay_term_decreasing_p{p}"),
                decreasing,
                format!("2^(k0(2-p')) over k0 = {lo}..={hi}"),
            );
        }
        rows.extend(column);
    }
    write_weight_table(ctx.output(report, "weight_table.csv"), &rows)?;

    if ps.contains(&2.0) && lo <= 0 && hi >= 0 {
        let mass = weight_mass(&reference_cube(), 2.0)?;
        let oracle = reference_mass_p2();
        let rel = (mass - oracle).abs() / oracle;
        report.metric("weight_mass", "J* p=2", "k0=0", "mass", mass);
        report.metric("weight_mass", "J* p=2", format!("midpoint {ORACLE_CELLS}"), "oracle", oracle);
        report.check("reference_cube_oracle", rel < ORACLE_TOL, format!("mass {mass}, oracle {oracle}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_frozen_value() {
        assert!((reference_mass_p2() - 1.1663896883868803).abs() < 1e-8);
    }
}
