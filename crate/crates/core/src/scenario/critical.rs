use rayon::prelude::*;

use super::{Report, RunContext, ScenarioConfig, SignalSpec};
use crate::error::{Result, StageExt};
use crate::oscillation::conjugate;
use crate::signal::{fourier_transform, weighted_norm, SobolevSpec};
use crate::zak::{frame_diagnostics, zak_transform};

/// Grid densities `N = 2^6 … 2^12` over which norms are tracked.
const WINDOW_EXPONENTS: std::ops::RangeInclusive<u32> = 6..=12;
const PAD: f64 = 1.0;
const DEFAULT_P: [f64; 5] = [1.25, 1.5, 2.0, 3.0, 4.0];
/// Squared increments below this fraction of the squared norm count as converged.
const INCREMENT_FLOOR: f64 = 1e-10;
/// Ratio of the last two squared increments above which a norm is divergent.
const DIVERGENT_RATIO: f64 = 0.75;
const ZERO_TOL: f64 = 1e-3;

fn default_families() -> Vec<SignalSpec> {
    let mut v = vec![SignalSpec::Box, SignalSpec::Hat];
    v.extend((3..=6).map(|order| SignalSpec::Bspline { order }));
    v.push(SignalSpec::Gaussian);
    v.push(SignalSpec::SmoothedBox { transition: 0.5 });
    v
}

/// Norm values across the windows, finest last.
#[derive(Clone, Debug)]
struct Growth {
    norms: Vec<f64>,
}

impl Growth {
    fn last(&self) -> f64 {
        *self.norms.last().expect("at least one window")
    }

    /// Squared-norm increments between consecutive windows.
    fn increments(&self) -> Vec<f64> {
        self.norms.windows(2).map(|w| w[1] * w[1] - w[0] * w[0]).collect()
    }

    /// Growth of the squared norm per window doubling at the largest window.
    fn slope(&self) -> f64 {
        *self.increments().last().expect("at least two windows")
    }

    fn divergent(&self) -> bool {
        let d = self.increments();
        let (d0, d1) = (d[d.len() - 2], d[d.len() - 1]);
        d1 > INCREMENT_FLOOR * self.last().powi(2) && d1 > DIVERGENT_RATIO * d0
    }
}

struct FamilyResult {
    spec: SignalSpec,
    min_abs: f64,
    /// Per exponent: (norm of f at order p/2, norm of f̂ at order p'/2).
    rows: Vec<(f64, Growth, Growth)>,
    half_order: Growth,
}

fn sweep_family(spec: &SignalSpec, cfg: &ScenarioConfig, ps: &[f64], ctx: &RunContext) -> Result<FamilyResult> {
    let n = cfg.resolution;
    let f = spec.build(1.0 / n as f64, 0.0, &ctx.base_dir).stage("make_signal")?;
    let z = zak_transform(&f, n).stage("zak_transform")?;
    let min_abs = frame_diagnostics(&z, cfg.refine_tol).min_abs;

    let orders = ps
        .iter()
        .map(|&p| Ok((SobolevSpec::new(p / 2.0)?, SobolevSpec::new(conjugate(p)? / 2.0)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut f_norms = vec![Vec::new(); ps.len()];
    let mut fhat_norms = vec![Vec::new(); ps.len()];
    let mut half = Vec::new();
    let half_spec = SobolevSpec::new(0.5)?;
    for e in WINDOW_EXPONENTS {
        let g = spec.build(1.0 / (1u64 << e) as f64, PAD, &ctx.base_dir).stage("make_signal")?;
        let gh = fourier_transform(&g);
        let ghh = fourier_transform(&gh);
        for (i, (sf, sh)) in orders.iter().enumerate() {
            f_norms[i].push(weighted_norm(&gh, |xi| sf.weight(xi)));
            fhat_norms[i].push(weighted_norm(&ghh, |t| sh.weight(t)));
        }
        half.push(weighted_norm(&gh, |xi| half_spec.weight(xi)));
    }
    let rows = ps
        .iter()
        .zip(f_norms.into_iter().zip(fhat_norms))
        .map(|(&p, (a, b))| (p, Growth { norms: a }, Growth { norms: b }))
        .collect();
    Ok(FamilyResult {
        spec: spec.clone(),
        min_abs,
        rows,
        half_order: Growth { norms: half },
    })
}

pub(super) fn run(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut Report) -> Result<()> {
    let families = if cfg.families.is_empty() {
        default_families()
    } else {
        cfg.families.clone()
    };
    let ps = if cfg.p_values.is_empty() {
        DEFAULT_P.to_vec()
    } else {
        cfg.p_values.clone()
    };
    let n = cfg.resolution;
    report.resolution("zak", format!("{n}x{n}"));
    report.resolution(
        "sobolev_windows",
        format!("N = 2^{}..2^{}, pad {PAD}", WINDOW_EXPONENTS.start(), WINDOW_EXPONENTS.end()),
    );
    report.tolerance("refine_tol", cfg.refine_tol);
    report.tolerance("zero_tol", ZERO_TOL);
    report.tolerance("increment_floor", INCREMENT_FLOOR);
    report.tolerance("divergent_ratio", DIVERGENT_RATIO);

    let results = families
        .par_iter()
        .map(|spec| sweep_family(spec, cfg, &ps, ctx).stage(&format!("sweep {}", spec.label())))
        .collect::<Result<Vec<_>>>()?;

    let path = ctx.output(report, "critical_sweep.csv");
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "family",
        "param",
        "p",
        "norm_f",
        "norm_fhat",
        "min_abs_zak",
        "norm_f_divergent",
        "norm_fhat_divergent",
    ])?;
    let finest = format!("N = 2^{}", WINDOW_EXPONENTS.end());
    for r in &results {
        let label = r.spec.label();
        report.metric("frame_diagnostics", &label, format!("{n}x{n}"), "min_abs_zak", r.min_abs);
        let mut joint_finite = Vec::new();
        for (p, gf, gh) in &r.rows {
            let (df, dh) = (gf.divergent(), gh.divergent());
            w.write_record([
                r.spec.family().to_string(),
                r.spec.param(),
                p.to_string(),
                gf.last().to_string(),
                gh.last().to_string(),
                r.min_abs.to_string(),
                df.to_string(),
                dh.to_string(),
            ])?;
            report.metric("sobolev_norm", &label, format!("{finest} p={p}"), "norm_f", gf.last());
            report.metric("sobolev_norm", &label, format!("{finest} p={p}"), "norm_fhat", gh.last());
            if df {
                report.metric("sobolev_norm", &label, format!("{finest} p={p}"), "norm_f_sq_growth_per_doubling", gf.slope());
            }
            if dh {
                report.metric("sobolev_norm", &label, format!("{finest} p={p}"), "norm_fhat_sq_growth_per_doubling", gh.slope());
            }
            if !df && !dh {
                joint_finite.push(*p);
            }
        }
        if !joint_finite.is_empty() {
            report.check(
                format!("balian_low_{label}"),
                r.min_abs < ZERO_TOL,
                format!("joint norms finite at p = {joint_finite:?}, min |Zf| = {:e}", r.min_abs),
            );
        }
        if r.spec == SignalSpec::Box {
            report.check(
                "box_orthonormal",
                (r.min_abs - 1.0).abs() < 1e-12 && joint_finite.is_empty(),
                format!("min |Zf| = {}, joint finite at p = {joint_finite:?}", r.min_abs),
            );
            for (e, v) in WINDOW_EXPONENTS.zip(&r.half_order.norms) {
                report.metric("sobolev_norm", &label, format!("N = 2^{e} s=0.5"), "norm_f", *v);
            }
            report.metric("sobolev_norm", &label, format!("{finest} s=0.5"), "norm_f_sq_growth_per_doubling", r.half_order.slope());
            let monotone = r.half_order.norms.windows(2).all(|p| p[1] > p[0]);
            report.check(
                "box_half_order_growth",
                monotone && r.half_order.divergent(),
                format!("s = 1/2 norms {:?}", r.half_order.norms),
            );
        }
    }
    w.flush()?;
    Ok(())
}
