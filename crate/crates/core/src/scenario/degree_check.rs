use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DegreeField, Report, RunContext, ScenarioConfig, SignalSpec};
use crate::degree::{mollify, qp_defect, telescoping, vmo_degree, winding_on_unit_square, MollifyBase};
use crate::error::{Error, Result, StageExt};
use crate::oscillation::PlanarField;
use crate::synth::perturbed_hat;
use crate::zak::{zak_transform, ZakField};

/// Window for `defect(ε/2) / defect(ε)` under linear scaling.
const HALVING_WINDOW: (f64, f64) = (0.4, 0.6);
/// Random fields drawn per accepted field before giving up.
const ATTEMPTS_PER_FIELD: usize = 4;
/// A random field is counted when `min |F_ε|` on the path exceeds this
/// multiple of `qp_defect`, so the quasi-periodic phase fixes the winding.
const DEFECT_MARGIN: f64 = 1.0;

fn default_fields() -> Vec<DegreeField> {
    vec![
        DegreeField::Zak { signal: SignalSpec::Hat },
        DegreeField::Zak {
            signal: SignalSpec::Gaussian,
        },
        DegreeField::PeriodicConstant,
        DegreeField::RandomGabor { count: 20, amplitude: 0.3 },
    ]
}

fn periodic_constant(n: usize) -> Result<PlanarField> {
    PlanarField::from_fn((0.0, 0.0), 1.0 / n as f64, n, n, Some(1.0), |_, _| Complex64::new(1.0, 0.0))
}

fn expect_degree(
    base: &impl MollifyBase,
    label: &str,
    expected: i64,
    cfg: &ScenarioConfig,
    report: &mut Report,
) -> Result<()> {
    let n = cfg.resolution;
    let d = vmo_degree(base, &cfg.eps, cfg.points_per_side).stage(&format!("vmo_degree {label}"))?;
    for w in &d.per_eps {
        let res = format!("{n}x{n} eps={}", w.eps.unwrap_or(f64::NAN));
        report.metric("winding_number", label, res.clone(), "winding", w.winding as f64);
        report.metric("winding_number", label, res, "min_modulus_on_path", w.min_modulus_on_path);
    }
    report.metric("vmo_degree", label, format!("{n}x{n}"), "degree", d.degree as f64);
    report.check(
        format!("degree_{label}"),
        d.degree == expected,
        format!("degree {} at every eps, expected {expected}", d.degree),
    );
    Ok(())
}

fn defect_and_telescoping(z: &ZakField, label: &str, cfg: &ScenarioConfig, report: &mut Report) -> Result<()> {
    let n = cfg.resolution;
    let mut defects = Vec::new();
    let mut telescoping_ok = true;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for &eps in &cfg.eps {
        let m = mollify(z, eps, None).stage("mollify")?;
        let q = qp_defect(&m).stage("qp_defect")?;
        let t = telescoping(&m, cfg.points_per_side).stage("telescoping")?;
        let res = format!("{n}x{n} eps={eps}");
        report.metric("qp_defect", label, res.clone(), "defect", q.defect);
        report.metric("qp_defect", label, res.clone(), "y_periodicity", q.y_periodicity);
        report.metric("telescoping", label, res.clone(), "residual", t.residual);
        report.metric("telescoping", label, res, "bound", t.bound);
        telescoping_ok &= t.residual < t.bound;
        if t.residual / t.bound > worst.0 / worst.1.max(f64::MIN_POSITIVE) {
            worst = (t.residual, t.bound);
        }
        defects.push(q.defect);
    }
    let ratios: Vec<f64> = defects.windows(2).map(|w| w[1] / w[0]).collect();
    for (w, r) in cfg.eps.windows(2).zip(&ratios) {
        report.metric("qp_defect", label, format!("{n}x{n} eps={}/{}", w[1], w[0]), "halving_ratio", *r);
    }
    report.check(
        format!("defect_linear_{label}"),
        ratios.iter().all(|r| (HALVING_WINDOW.0..=HALVING_WINDOW.1).contains(r)),
        format!("halving ratios {ratios:?}"),
    );
    report.check(
        format!("telescoping_{label}"),
        telescoping_ok,
        format!("worst residual {:e} against bound {:e}", worst.0, worst.1),
    );
    Ok(())
}

/// Winding per `ε` of one random field, or `None` when at some `ε` the path
/// modulus does not exceed [`DEFECT_MARGIN`] times the quasi-periodicity defect.
fn random_windings(z: &ZakField, cfg: &ScenarioConfig) -> Result<Option<Vec<i64>>> {
    let mut out = Vec::new();
    for &eps in &cfg.eps {
        let m = mollify(z, eps, None)?;
        match winding_on_unit_square(m.field(), cfg.points_per_side) {
            Ok(w) if w.min_modulus_on_path > DEFECT_MARGIN * qp_defect(&m)?.defect => out.push(w.winding),
            Ok(_) | Err(Error::ZeroNearPath { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

fn random_gabor(count: usize, amplitude: f64, cfg: &ScenarioConfig, report: &mut Report) -> Result<()> {
    let n = cfg.resolution;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..count * ATTEMPTS_PER_FIELD).map(|_| rng.next_u64()).collect();
    let results = seeds
        .par_iter()
        .map(|&s| {
            let f = perturbed_hat(&mut ChaCha8Rng::seed_from_u64(s), n, amplitude)?;
            random_windings(&zak_transform(&f, n)?, cfg)
        })
        .collect::<Result<Vec<_>>>()
        .stage("random_gabor")?;
    let accepted: Vec<Vec<i64>> = results.into_iter().flatten().take(count).collect();
    if let Some(bad) = accepted.iter().find(|w| w.iter().any(|&v| v != w[0])) {
        return Err(Error::DegreeInstability(format!("random field windings {bad:?} differ across eps")).in_stage("random_gabor"));
    }
    let ones = accepted.iter().filter(|w| w[0] == 1).count();
    report.metric("vmo_degree", "random_gabor", format!("{n}x{n}"), "accepted", accepted.len() as f64);
    report.metric("vmo_degree", "random_gabor", format!("{n}x{n}"), "degree_one", ones as f64);
    report.check(
        "degree_random_gabor",
        accepted.len() == count && ones == count,
        format!("{ones} of {} accepted fields wind once, {count} requested", accepted.len()),
    );
    Ok(())
}

pub(super) fn run(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut Report) -> Result<()> {
    let fields = if cfg.fields.is_empty() {
        default_fields()
    } else {
        cfg.fields.clone()
    };
    let n = cfg.resolution;
    report.resolution("zak", format!("{n}x{n}"));
    report.resolution("eps", format!("{:?}", cfg.eps));
    report.resolution("points_per_side", cfg.points_per_side.to_string());
    report.tolerance("halving_window_lo", HALVING_WINDOW.0);
    report.tolerance("halving_window_hi", HALVING_WINDOW.1);
    report.tolerance("modulus_safety", crate::degree::MODULUS_SAFETY);
    report.tolerance("defect_margin", DEFECT_MARGIN);

    for field in &fields {
        match field {
            DegreeField::Zak { signal } => {
                let label = signal.label();
                let f = signal.build(1.0 / n as f64, 0.0, &ctx.base_dir).stage("make_signal")?;
                let z = zak_transform(&f, n).stage("zak_transform")?;
                expect_degree(&z, &label, 1, cfg, report)?;
                defect_and_telescoping(&z, &label, cfg, report)?;
            }
            DegreeField::PeriodicConstant => {
                let c = periodic_constant(n)?;
                expect_degree(&c, "periodic_constant", 0, cfg, report)?;
            }
            DegreeField::RandomGabor { count, amplitude } => random_gabor(*count, *amplitude, cfg, report)?,
        }
    }
    Ok(())
}
