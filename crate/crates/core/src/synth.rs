//! Seeded random test fields.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oscillation::PlanarField;
use crate::signal::{bspline, SampledSignal, Domain};

fn normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `f(t) = Σ_{n < translates} Σ_{|a| ≤ modulations} c_{n,a} e^{2πiat} B₃(t − n)` with
/// standard complex normal coefficients, sampled at density `n_grid` on
/// `[0, translates + 2)`. Its Zak transform is a continuous quasi-periodic field.
pub fn random_gabor_signal(
    rng: &mut impl Rng,
    n_grid: usize,
    translates: usize,
    modulations: usize,
) -> Result<SampledSignal> {
    if translates == 0 || n_grid < 8 {
        return Err(Error::InvalidArgument(
            "need at least one translate and density 8".into(),
        ));
    }
    let mut coeffs = Vec::new();
    for n in 0..translates {
        for a in -(modulations as i64)..=modulations as i64 {
            coeffs.push((n as f64, a as f64, normal(rng)));
        }
    }
    let len = (translates + 2) * n_grid;
    let samples = (0..len)
        .map(|i| {
            let t = i as f64 / n_grid as f64;
            coeffs
                .iter()
                .map(|&(n, a, c)| c * Complex64::from_polar(bspline(3, t - n), TAU * a * t))
                .sum()
        })
        .collect();
    SampledSignal::new(0.0, 1.0 / n_grid as f64, samples, Domain::Time)
}

/// The hat `B₂` plus `amplitude` times a [`random_gabor_signal`] with two
/// translates and modulations `|a| ≤ 1`, sampled on `[0, 4)`.
pub fn perturbed_hat(rng: &mut impl Rng, n_grid: usize, amplitude: f64) -> Result<SampledSignal> {
    let g = random_gabor_signal(rng, n_grid, 2, 1)?;
    let samples = g
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| z * amplitude + bspline(2, g.time_of(i)))
        .collect();
    SampledSignal::new(g.start(), g.step(), samples, Domain::Time)
}

/// Periodic field on the torus `[0, extent)²` sampled on an `n × n` grid: a sum of
/// `modes` characters `e^{2πi⟨ξ, x⟩}` with lattice frequencies `|ξ| ≤ band` and
/// standard complex normal amplitudes, plus a normal constant.
pub fn random_band_limited(
    rng: &mut impl Rng,
    n: usize,
    extent: f64,
    band: f64,
    modes: usize,
) -> Result<PlanarField> {
    let kmax = (band * extent).floor() as i64;
    if kmax < 1 || (2 * kmax) as usize >= n {
        return Err(Error::InvalidArgument(format!(
            "band {band} must hold a lattice frequency and stay below the grid Nyquist frequency"
        )));
    }
    let mut terms = vec![(0.0, 0.0, normal(rng))];
    while terms.len() <= modes {
        let a = rng.random_range(-kmax..=kmax);
        let b = rng.random_range(-kmax..=kmax);
        if (a * a + b * b) as f64 > (band * extent).powi(2) || (a, b) == (0, 0) {
            continue;
        }
        terms.push((a as f64 / extent, b as f64 / extent, normal(rng)));
    }
    PlanarField::from_fn((0.0, 0.0), extent / n as f64, n, n, Some(extent), |x, y| {
        terms
            .iter()
            .map(|&(a, b, c)| c * Complex64::from_polar(1.0, TAU * (a * x + b * y)))
            .sum()
    })
}
