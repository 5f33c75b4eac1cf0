//! One line per acceptance criterion, with the measured numbers.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use blt_core::degree::{mollify, qp_defect, telescoping, DEFAULT_EPS};
use blt_core::oscillation::{bmo_direct, bmo_lp, vmo_modulus, window_field, PlanarField, Rect};
use blt_core::scenario::{self, DegreeField, Report, Scenario, ScenarioConfig, SignalSpec};
use blt_core::signal::{make_signal, SampledSignal, SignalKind};
use blt_core::synth::{random_band_limited, random_gabor_signal};
use blt_core::zak::{frame_diagnostics, frame_ratio, zak_fourier_check, zak_transform, ZakField};
use blt_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 256;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn signal(kind: SignalKind, n: usize) -> SampledSignal {
    make_signal(&kind, 1.0 / n as f64, 0.0).unwrap()
}

fn zak(kind: SignalKind, n: usize) -> ZakField {
    zak_transform(&signal(kind, n), n).unwrap()
}

fn run(cfg: ScenarioConfig, out: &Path) -> Report {
    scenario::run(cfg, None, Some(out.to_path_buf()), None, Path::new(".")).unwrap()
}

fn check(r: &Report, name: &str) -> bool {
    r.check_named(name).is_some_and(|c| c.passed)
}

fn analyze(kind: SpecKind, out: &Path) -> (Report, Duration) {
    let mut cfg = ScenarioConfig::new(Scenario::Analyze);
    cfg.signal = kind.0;
    let t = Instant::now();
    let r = run(cfg, out);
    (r, t.elapsed())
}

struct SpecKind(SignalSpec);

fn near_centre(x: f64, y: f64, tol: f64) -> bool {
    (x - 0.5).abs() <= tol && (y - 0.5).abs() <= tol
}

fn orthonormal_basis(dir: &Path) -> Outcome {
    let (r, t) = analyze(SpecKind(SignalSpec::Box), &dir.join("box"));
    let z = zak(SignalKind::Box, N);
    let dev = z.values().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    let (a, b) = (r.value("box", "A").unwrap(), r.value("box", "B").unwrap());
    let pass = dev < 1e-12 && (a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && t < Duration::from_secs(1);
    outcome(pass, format!("max ||Zf| - 1| = {dev:.1e}, A = {a}, B = {b}, analyze {t:.2?}"))
}

fn hat_witness(dir: &Path) -> Outcome {
    let (r, t) = analyze(SpecKind(SignalSpec::Hat), &dir.join("hat"));
    let min = r.value("hat", "min_abs").unwrap();
    let (x, y) = (r.value("hat", "argmin_x").unwrap(), r.value("hat", "argmin_y").unwrap());
    let z = zak(SignalKind::Hat, N);
    let mut dev: f64 = 0.0;
    for j in 0..N {
        for k in 0..N {
            let (x, y) = (j as f64 / N as f64, k as f64 / N as f64);
            let closed = x + (1.0 - x) * Complex64::from_polar(1.0, -std::f64::consts::TAU * y);
            dev = dev.max((z.get(j, k) - closed).norm());
        }
    }
    let pass = min < 1e-6 && near_centre(x, y, 1.0 / N as f64) && dev < 1e-12 && t < Duration::from_secs(1);
    outcome(pass, format!("min |Zf| = {min:.1e} at ({x}, {y}), closed-form deviation {dev:.1e}, analyze {t:.2?}"))
}

fn gaussian_witness(dir: &Path) -> Outcome {
    let (r, t) = analyze(SpecKind(SignalSpec::Gaussian), &dir.join("gaussian"));
    let z = zak(SignalKind::Gaussian, N);
    let grid_min = z.values().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let refined = r.value("gaussian", "min_abs").unwrap();
    let (x, y) = (r.value("gaussian", "argmin_x").unwrap(), r.value("gaussian", "argmin_y").unwrap());
    let centre = z.get(N / 2, N / 2).norm();
    let pass = grid_min < 1e-3
        && refined < 1e-6
        && near_centre(x, y, 1.0 / N as f64)
        && centre < 1e-12
        && t < Duration::from_secs(5);
    outcome(
        pass,
        format!("grid min {grid_min:.1e}, refined {refined:.1e} at ({x}, {y}), |Zg(1/2,1/2)| = {centre:.1e}, analyze {t:.2?}"),
    )
}

fn winding_law(dir: &Path) -> Outcome {
    let mut cfg = ScenarioConfig::new(Scenario::DegreeCheck);
    cfg.fields = vec![
        DegreeField::Zak { signal: SignalSpec::Hat },
        DegreeField::Zak {
            signal: SignalSpec::Gaussian,
        },
        DegreeField::PeriodicConstant,
        DegreeField::RandomGabor {
            count: 20,
            amplitude: 0.3,
        },
    ];
    let t = Instant::now();
    let r = run(cfg, &dir.join("degree"));
    let t = t.elapsed();
    let names = ["degree_hat", "degree_gaussian", "degree_periodic_constant", "degree_random_gabor"];
    let pass = names.iter().all(|n| check(&r, n)) && t < Duration::from_secs(10);
    let detail: Vec<String> = names
        .iter()
        .map(|n| r.check_named(n).map(|c| c.detail.clone()).unwrap_or_default())
        .collect();
    outcome(pass, format!("{}; {t:.2?}", detail.join("; ")))
}

fn generators() -> Vec<SignalKind> {
    vec![
        SignalKind::Box,
        SignalKind::Hat,
        SignalKind::Bspline { order: 3 },
        SignalKind::Bspline { order: 4 },
        SignalKind::Bspline { order: 5 },
        SignalKind::Bspline { order: 6 },
        SignalKind::Gaussian,
        SignalKind::SmoothedBox { transition: 0.5 },
    ]
}

fn unitarity(_: &Path) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact: f64 = 0.0;
    for kind in generators() {
        let f = signal(kind.clone(), N);
        let e = (zak_transform(&f, N).unwrap().l2_norm() - f.l2_norm()).abs() / f.l2_norm();
        worst = worst.max(e);
        if matches!(kind, SignalKind::Box | SignalKind::Hat) {
            exact = exact.max(e);
        }
    }
    outcome(worst < 1e-3 && exact < 1e-12, format!("worst {worst:.1e}, box/hat {exact:.1e}"))
}

fn zak_fourier(_: &Path) -> Outcome {
    let c = zak_fourier_check(&signal(SignalKind::Gaussian, 64), 64).unwrap();
    outcome(c.deviation < 1e-6, format!("max deviation {:.1e} at 64x64", c.deviation))
}

fn frame_sandwich(_: &Path) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [SignalKind::Box, SignalKind::Hat] {
        let g = signal(kind.clone(), 64);
        let d = frame_diagnostics(&zak_transform(&g, 64).unwrap(), 1e-10);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for seed in 0..10 {
            let x = random_gabor_signal(&mut ChaCha8Rng::seed_from_u64(seed), 64, 4, 3).unwrap();
            let r = frame_ratio(&g, &x, None).unwrap().ratio;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        pass &= lo >= d.lower_bound_a - 1e-3 && hi <= d.upper_bound_b + 1e-3;
        if kind == SignalKind::Box {
            pass &= (lo - 1.0).abs() < 1e-4 && (hi - 1.0).abs() < 1e-4;
        }
        parts.push(format!("{kind:?}: ratios in [{lo:.6}, {hi:.6}], bounds [{:.3}, {:.3}]", d.lower_bound_a, d.upper_bound_b));
    }
    outcome(pass, parts.join("; "))
}

fn weight_uniformity(dir: &Path) -> Outcome {
    let mut cfg = ScenarioConfig::new(Scenario::WeightTable);
    cfg.p_values = vec![1.25, 1.5, 2.0];
    cfg.k0_range = (0, 12);
    let t = Instant::now();
    let r = run(cfg, &dir.join("weights"));
    let t = t.elapsed();
    let names = ["late_k0_variation_p1.25", "late_k0_variation_p1.5", "late_k0_variation_p2", "reference_cube_oracle"];
    let pass = names.iter().all(|n| check(&r, n)) && t < Duration::from_secs(30);
    let detail: Vec<String> = names
        .iter()
        .map(|n| r.check_named(n).map(|c| c.detail.clone()).unwrap_or_default())
        .collect();
    outcome(pass, format!("{}; {t:.2?}", detail.join("; ")))
}

fn embedding_survey(dir: &Path) -> Outcome {
    let mut cfg = ScenarioConfig::new(Scenario::SweepEmbedding);
    cfg.count = 100;
    cfg.p_values = vec![1.25, 1.5, 2.0, 3.0];
    let r = run(cfg, &dir.join("embedding"));
    let max = r
        .metrics
        .iter()
        .filter(|m| m.name == "max_ratio")
        .map(|m| m.value)
        .fold(0.0, f64::max);
    let scaling = r.check_named("scaling_invariance").map(|c| c.detail.clone()).unwrap_or_default();
    outcome(r.passed, format!("largest max ratio {max:.4}, {} checks, {scaling}", r.checks.len()))
}

fn half_plane() -> PlanarField {
    PlanarField::from_fn((-2.0, -2.0), 1.0 / 64.0, 256, 256, None, |x, _| {
        Complex64::new(if x >= 0.0 { 1.0 } else { 0.0 }, 0.0)
    })
    .unwrap()
}

fn oscillation_estimators(_: &Path) -> Outcome {
    let mut fields = Vec::new();
    for kind in [SignalKind::Box, SignalKind::Hat, SignalKind::Gaussian] {
        let z = zak(kind, 32);
        fields.push(window_field(&z, Rect::square(-1.0, 2.0), 0.5, Some(8.0)).unwrap());
    }
    for seed in 0..10 {
        fields.push(random_band_limited(&mut ChaCha8Rng::seed_from_u64(seed), 64, 4.0, 3.0, 8).unwrap());
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in &fields {
        let range = f.scale_range();
        let ratio = bmo_direct(f, range).unwrap() / bmo_lp(f, 3, range).unwrap();
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let hp = half_plane();
    let profile = vmo_modulus(&hp, (-4, 1)).unwrap();
    let hp_dev = profile.values.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let zh = window_field(&zak(SignalKind::Hat, 512), Rect::square(-1.0, 2.0), 0.5, None).unwrap();
    // scales below the unit period
    let p = vmo_modulus(&zh, (zh.scale_range().0, -1)).unwrap();
    let decreasing = p.values.windows(2).all(|w| w[1] <= w[0]);
    let decay = p.decay_ratio().unwrap();
        let pass = lo >= 1.0 / 20.0 && hi <= 20.0 && hp_dev < 1e-3 && decreasing && decay < 0.25;
    outcome(
        pass,
        format!(
            "direct/LP ratios in [{lo:.3}, {hi:.3}] over {} fields, half-plane |ω - 1/2| <= {hp_dev:.1e}, windowed Z_hat decay {decay:.3}",
            fields.len()
        ),
    )
}

fn mollification_defect(_: &Path) -> Outcome {
    let mut linear = true;
    let mut telescoped = true;
    let mut parts = Vec::new();
    for kind in [SignalKind::Hat, SignalKind::Gaussian] {
        let z = zak(kind.clone(), N);
        let mut defects = Vec::new();
        for eps in DEFAULT_EPS {
            let m = mollify(&z, eps, None).unwrap();
            defects.push(qp_defect(&m).unwrap().defect);
            let t = telescoping(&m, 64).unwrap();
            telescoped &= t.residual < t.bound;
        }
        let ratios: Vec<f64> = defects.windows(2).map(|w| w[1] / w[0]).collect();
        linear &= ratios.iter().all(|r| (0.4..=0.6).contains(r));
        parts.push(format!("{kind:?} halving ratios {:.3}, {:.3}", ratios[0], ratios[1]));
    }
    outcome(
        linear && telescoped,
        format!("{}; linear scaling {linear}, telescoping residual below bound {telescoped}", parts.join("; ")),
    )
}

fn critical_sweep(dir: &Path) -> Outcome {
    let t = Instant::now();
    let r = run(ScenarioConfig::new(Scenario::SweepCritical), &dir.join("critical"));
    let t = t.elapsed();
    let witnesses = r.checks.iter().filter(|c| c.name.starts_with("balian_low_")).count();
    let pass = r.passed && check(&r, "box_orthonormal") && check(&r, "box_half_order_growth") && witnesses > 0;
    outcome(pass, format!("{} checks, {witnesses} finite-norm families vanish, box min 1 with monotone s = 1/2 growth; {t:.2?}", r.checks.len()))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: [(&str, fn(&Path) -> Outcome); 12] = [
        ("orthonormal basis: |Z box| = 1, A = B = 1", orthonormal_basis),
        ("hat witness: refined zero at (1/2, 1/2), closed form", hat_witness),
        ("gaussian witness: zero at (1/2, 1/2)", gaussian_witness),
        ("quasi-periodic winding law", winding_law),
        ("unitarity of the Zak transform", unitarity),
        ("Zak-Fourier commutation", zak_fourier),
        ("frame-ratio sandwich", frame_sandwich),
        ("weight uniformity in k0", weight_uniformity),
        ("embedding survey", embedding_survey),
        ("oscillation estimators", oscillation_estimators),
        ("mollification defect scaling and telescoping", mollification_defect),
        ("critical sweep narrative", critical_sweep),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(|| f(dir.path())))
            .unwrap_or_else(|_| outcome(false, "panicked"));
        if !o.passed {
            failed += 1;
        }
        println!("[{}] {:>2}. {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    let total = start.elapsed();
    println!("acceptance: {} of {} criteria passed in {total:.2?}", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
