use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Report, RunContext, ScenarioConfig};
use crate::error::{Error, Result, StageExt};
use crate::oscillation::{embedding_ratio, PlanarField};
use crate::synth::random_band_limited;

const DEFAULT_P: [f64; 4] = [1.25, 1.5, 2.0, 3.0];
const EXTENT: f64 = 4.0;
const BAND: f64 = 3.0;
const MODES: usize = 8;
const DOUBLING_FACTOR: f64 = 2.0;
const SCALING_TOL: f64 = 1e-9;

fn field(seed: u64, n: usize) -> Result<PlanarField> {
    random_band_limited(&mut ChaCha8Rng::seed_from_u64(seed), n, EXTENT, BAND, MODES)
}

/// Ratios for every field at one resolution, indexed `[field][p]`.
fn ratios(seeds: &[u64], n: usize, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    seeds
        .par_iter()
        .map(|&s| {
            let f = field(s, n)?;
            let range = f.scale_range();
            ps.iter().map(|&p| embedding_ratio(&f, p, range)).collect()
        })
        .collect()
}

pub(super) fn run(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut Report) -> Result<()> {
    if cfg.count == 0 || cfg.planar_resolutions.is_empty() {
        return Err(Error::InvalidArgument("need at least one field and one planar resolution".into()));
    }
    let ps = if cfg.p_values.is_empty() {
        DEFAULT_P.to_vec()
    } else {
        cfg.p_values.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.count).map(|_| rng.next_u64()).collect();
    let grids: Vec<String> = cfg.planar_resolutions.iter().map(|n| format!("{n}x{n}")).collect();
    report.resolution("planar", grids.join(", "));
    report.resolution("torus_extent", EXTENT.to_string());
    report.tolerance("doubling_factor", DOUBLING_FACTOR);
    report.tolerance("scaling_tol", SCALING_TOL);

    let mut table = Vec::new();
    for &n in &cfg.planar_resolutions {
        let r = ratios(&seeds, n, &ps).stage(&format!("embedding_ratio at {n}x{n}"))?;
        table.push(r);
    }

    let path = ctx.output(report, "embedding_ratios.csv");
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["p", "resolution", "max_ratio", "mean_ratio"])?;
    let mut maxima = vec![vec![0.0; ps.len()]; table.len()];
    for (ri, (r, grid)) in table.iter().zip(&grids).enumerate() {
        for (pi, p) in ps.iter().enumerate() {
            let col: Vec<f64> = r.iter().map(|row| row[pi]).collect();
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            maxima[ri][pi] = max;
            w.write_record([p.to_string(), cfg.planar_resolutions[ri].to_string(), max.to_string(), mean.to_string()])?;
            report.metric("embedding_ratio", &format!("p={p}"), grid.clone(), "max_ratio", max);
            report.metric("embedding_ratio", &format!("p={p}"), grid.clone(), "mean_ratio", mean);
            report.check(
                format!("finite_p{p}_{grid}"),
                max.is_finite() && max > 0.0,
                format!("max ratio {max}"),
            );
        }
    }
    w.flush()?;

    for ri in 1..maxima.len() {
        for (pi, p) in ps.iter().enumerate() {
            let (a, b) = (maxima[ri - 1][pi], maxima[ri][pi]);
            let change = (a / b).max(b / a);
            report.check(
                format!("doubling_p{p}_{}_to_{}", grids[ri - 1], grids[ri]),
                change < DOUBLING_FACTOR,
                format!("max ratio {a} -> {b}"),
            );
        }
    }

    let n0 = cfg.planar_resolutions[0];
    let f = field(seeds[0], n0)?;
    let g = f.scaled(Complex64::new(10.0, 0.0));
    let mut worst: f64 = 0.0;
    for &p in &ps {
        let a = embedding_ratio(&f, p, f.scale_range())?;
        let b = embedding_ratio(&g, p, g.scale_range())?;
        worst = worst.max((a - b).abs() / a);
    }
    report.metric("embedding_ratio", "field 0 scaled by 10", grids[0].clone(), "relative_change", worst);
    report.check("scaling_invariance", worst < SCALING_TOL, format!("relative change {worst:e}"));
    Ok(())
}
