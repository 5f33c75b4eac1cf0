use blt_core::oscillation::{conjugate, lp_project, spq_norm, weight_mass, DyadicCube, LPPartition, PlanarField};
use blt_core::signal::{make_signal, SignalKind};
use blt_core::synth::random_band_limited;
use blt_core::zak::zak_transform;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 128;
const SIDE: f64 = 8.0;
const P_GRID: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

/// Largest measured `avg_Q |P_k F|² / ‖P_k F‖²_{S_{p,p'}}` over the fields below.
const FROZEN_PIECE_CONSTANT: f64 = 0.0093893159;

fn fields() -> Vec<PlanarField> {
    (0..20)
        .map(|s| random_band_limited(&mut ChaCha8Rng::seed_from_u64(s), N, SIDE, 3.5, 12).unwrap())
        .collect()
}

fn freq(i: usize) -> f64 {
    let k = if i >= N / 2 { i as i64 - N as i64 } else { i as i64 };
    k as f64 / SIDE
}

/// `Σ_{ξ ∈ supp ψ_k} w(ξ)^{-1} Δξ²`, which bounds `sup |P_k F|² / ‖P_k F‖²` by Cauchy–Schwarz.
fn cauchy_schwarz_constant(k: i32, p: f64) -> f64 {
    let q = conjugate(p).unwrap();
    let dxi = 1.0 / SIDE;
    let mut c = 0.0;
    for i in 0..N {
        for j in 0..N {
            let (a, b) = (freq(i), freq(j));
            if LPPartition::psi(k, a.hypot(b)) > 0.0 {
                c += dxi * dxi / (1.0 + a.abs().powf(p) + b.abs().powf(q));
            }
        }
    }
    c
}

/// Largest average of `|G|²` over the mesh cubes of the given side.
fn max_cube_energy(g: &PlanarField, side: f64) -> f64 {
    let m = (side / g.step()).round() as usize;
    let mut best: f64 = 0.0;
    for a in 0..N / m {
        for b in 0..N / m {
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    acc += g.get(a * m + i, b * m + j).norm_sqr();
                }
            }
            best = best.max(acc / (m * m) as f64);
        }
    }
    best
}

#[test]
fn per_piece_estimate_holds_with_one_constant() {
    let fields = fields();
    let mut empirical: f64 = 0.0;
    for p in P_GRID {
        let q = conjugate(p).unwrap();
        for k in 0..=2 {
            // cubes of side 2^{-k0} with k = k0 + 3
            let side = 2f64.powi(3 - k);
            let bound = cauchy_schwarz_constant(k, p);
            for f in &fields {
                let g = lp_project(f, k).unwrap();
                let s = spq_norm(&g, p, q).unwrap().powi(2);
                let avg = max_cube_energy(&g, side);
                assert!(avg <= bound * s, "k = {k}, p = {p}: {avg} > {bound} * {s}");
                empirical = empirical.max(avg / s);
            }
        }
    }
    assert!(
        (empirical - FROZEN_PIECE_CONSTANT).abs() < 1e-8,
        "empirical constant drifted to {empirical}"
    );
}

/// `∫∫_{3J*} (1 + ξ₁² + ξ₂²)^{-1}` with the inner integral in closed form.
fn reference_mass_p2(cells: usize) -> f64 {
    let h = 3.0 / cells as f64;
    let total: f64 = (0..cells)
        .map(|i| {
            let a = 1.0 + (1.0 + (i as f64 + 0.5) * h).powi(2);
            let r = a.sqrt();
            ((2.0 / r).atan() - (-1.0 / r).atan()) / r
        })
        .sum();
    (total * h).sqrt()
}

/// Tensor midpoint rule with `ξ₂` outermost.
fn reference_mass(p: f64, cells: usize) -> f64 {
    let q = conjugate(p).unwrap();
    let h = 3.0 / cells as f64;
    let mut total = 0.0;
    for j in 0..cells {
        let y = -1.0 + (j as f64 + 0.5) * h;
        let wy = y.abs().powf(q);
        for i in 0..cells {
            let x = 1.0 + (i as f64 + 0.5) * h;
            total += 1.0 / (1.0 + x.powf(p) + wy);
        }
    }
    (total * h * h).sqrt()
}

#[test]
fn reference_cube_mass_matches_dual_quadrature() {
    let j_star = DyadicCube::new(0, (2, 0));
    assert_eq!(j_star.tripled(), (1.0, 4.0, -1.0, 2.0));
    let m2 = weight_mass(&j_star, 2.0).unwrap();
    // an independent adaptive double quadrature gives 1.1663896883868803
    assert!((m2 - 1.1663896883868803).abs() < 1e-6);
    assert!((m2 - reference_mass_p2(20_000)).abs() / m2 < 1e-6);
    for p in [1.25, 1.5, 3.0] {
        let m = weight_mass(&j_star, p).unwrap();
        let oracle = reference_mass(p, 1500);
        assert!((m - oracle).abs() / oracle < 1e-4, "p = {p}: {m} vs {oracle}");
    }
}

#[test]
fn gaussian_zak_vanishes_at_the_centre() {
    let g = make_signal(&SignalKind::Gaussian, 1.0 / 256.0, 0.0).unwrap();
    let z = zak_transform(&g, 256).unwrap();
    assert!(z.get(128, 128).norm() < 1e-12);
    // terms ℓ and 1 − ℓ cancel: g(1/2 − ℓ) = g(ℓ − 1/2) with opposite signs
    let pairs: f64 = (0..8)
        .map(|l| {
            let a = blt_core::signal::gaussian(0.5 - l as f64) * if l % 2 == 0 { 1.0 } else { -1.0 };
            let b = blt_core::signal::gaussian(0.5 - (1 - l) as f64) * if (1 - l) % 2 == 0 { 1.0 } else { -1.0 };
            a + b
        })
        .map(f64::abs)
        .fold(0.0, f64::max);
    assert!(pairs < 1e-15);
}
