use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::cubes::mesh_blocks;
use super::field::PlanarField;
use crate::error::{Error, Result};
use crate::smooth::radial_cutoff;

/// Default `c` in the Littlewood–Paley description of BMO.
pub const LP_OFFSET: i32 = 3;

/// Dyadic radial partition `ψ_k(ξ) = χ(|ξ|/2^k) − χ(|ξ|/2^{k−1})` with
/// `χ = radial_cutoff`, so `supp ψ_k ⊂ {2^{k−1} ≤ |ξ| ≤ 2^{k+1}}`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LPPartition {
    pub k_range: (i32, i32),
    pub cutoff_profile: String,
}

impl LPPartition {
    pub fn new(k_range: (i32, i32)) -> Result<Self> {
        if k_range.0 > k_range.1 {
            return Err(Error::InvalidArgument(format!("empty band range {k_range:?}")));
        }
        Ok(Self {
            k_range,
            cutoff_profile: "1 - S(r - 1), S(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})".into(),
        })
    }

    pub fn psi(k: i32, r: f64) -> f64 {
        radial_cutoff(r / 2f64.powi(k)) - radial_cutoff(r / 2f64.powi(k - 1))
    }

    /// Symbol of everything below band `k`: `Σ_{k' < k} ψ_{k'} = χ(|ξ|/2^{k−1})`.
    pub fn below(k: i32, r: f64) -> f64 {
        radial_cutoff(r / 2f64.powi(k - 1))
    }

    /// Low remainder plus every band in range; equals 1 for `r ≤ 2^{k_hi}`.
    pub fn total(&self, r: f64) -> f64 {
        let (lo, hi) = self.k_range;
        Self::below(lo, r) + (lo..=hi).map(|k| Self::psi(k, r)).sum::<f64>()
    }
}

fn torus(f: &PlanarField) -> Result<(usize, f64)> {
    match f.periodic_extent() {
        Some(t) => Ok((f.nx(), t)),
        None => Err(Error::InvalidArgument(
            "spectral operations need a field with a periodic extent".into(),
        )),
    }
}

fn signed(a: usize, n: usize) -> f64 {
    if a < n / 2 {
        a as f64
    } else {
        a as f64 - n as f64
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(b, row)| {
        for (a, v) in row.iter_mut().enumerate() {
            *v = data[a * n + b];
        }
    });
    out
}

/// Unnormalized 2D DFT of an `n × n` array stored row-major by x index.
fn fft2(data: &mut Vec<Complex64>, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    data.par_chunks_mut(n).for_each(|row| fft.process(row));
    let mut t = transpose(data, n);
    t.par_chunks_mut(n).for_each(|row| fft.process(row));
    *data = transpose(&t, n);
}

/// Spectrum of a periodic field together with its frequency grid.
pub(crate) struct Spectrum {
    pub n: usize,
    pub dxi: f64,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &PlanarField) -> Result<Self> {
        let (n, t) = torus(f)?;
        let mut coeffs = f.values().to_vec();
        fft2(&mut coeffs, n, false);
        Ok(Self {
            n,
            dxi: 1.0 / t,
            coeffs,
        })
    }

    pub fn freq(&self, idx: usize) -> (f64, f64) {
        let (a, b) = (idx / self.n, idx % self.n);
        (signed(a, self.n) * self.dxi, signed(b, self.n) * self.dxi)
    }

    /// Inverse transform of `coeffs · symbol(ξ)`.
    pub fn synthesize(&self, symbol: impl Fn(f64, f64) -> f64 + Sync) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let (x, y) = self.freq(i);
                let s = symbol(x, y);
                if s == 0.0 {
                    Complex64::default()
                } else {
                    c * s
                }
            })
            .collect();
        fft2(&mut data, self.n, true);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// Largest radial frequency on the grid.
    pub fn max_radius(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi * std::f64::consts::SQRT_2
    }
}

/// Fourier multiplier with symbol `ψ_k` on the torus of the field.
pub fn lp_project(f: &PlanarField, k: i32) -> Result<PlanarField> {
    let (n, t) = torus(f)?;
    let nyquist = n as f64 / (2.0 * t);
    if 2f64.powi(k + 1) > nyquist {
        return Err(Error::InvalidArgument(format!(
            "band 2^{} exceeds the Nyquist frequency {nyquist}",
            k + 1
        )));
    }
    let spec = Spectrum::of(f)?;
    Ok(f.with_values(spec.synthesize(|x, y| LPPartition::psi(k, x.hypot(y)))))
}

/// Fourier multiplier with symbol `Σ_{k' < k} ψ_{k'}`.
pub fn lp_remainder(f: &PlanarField, k: i32) -> Result<PlanarField> {
    let spec = Spectrum::of(f)?;
    Ok(f.with_values(spec.synthesize(|x, y| LPPartition::below(k, x.hypot(y)))))
}

/// `sup_Q ( ⨍_Q Σ_{k ≥ c − log₂ ℓ(Q)} |P_k F|² )^{1/2}` over dyadic cubes with
/// side `2^j`, `j` in `scale_range`.
pub fn bmo_lp(f: &PlanarField, c: i32, scale_range: (i32, i32)) -> Result<f64> {
    let (j0, j1) = scale_range;
    if j0 > j1 {
        return Err(Error::InvalidArgument(format!("empty scale range ({j0}, {j1})")));
    }
    let spec = Spectrum::of(f)?;
    let k_hi = spec.max_radius().log2().floor() as i32 + 1;
    let k_lo = c - j1;
    let mut energy = vec![0.0f64; f.values().len()];
    let mut best = 0.0f64;
    for k in (k_lo..=k_hi.max(k_lo)).rev() {
        if k <= k_hi {
            let piece = spec.synthesize(|x, y| LPPartition::psi(k, x.hypot(y)));
            energy
                .par_iter_mut()
                .zip(piece.par_iter())
                .for_each(|(e, v)| *e += v.norm_sqr());
        }
        let j = c - k;
        if (j0..=j1).contains(&j) {
            let side = 2f64.powi(j);
            let blocks = mesh_blocks(f, side, 0.0);
            if blocks.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "no dyadic cube of side 2^{j} fits the field"
                )));
            }
            let sup = blocks
                .par_iter()
                .map(|b| b.cells().map(|i| energy[i]).sum::<f64>() / (b.m * b.m) as f64)
                .reduce(|| 0.0, f64::max);
            best = best.max(sup.sqrt());
        }
    }
    Ok(best)
}

/// `( Σ_ξ |F̂(ξ)|² (1 + |ξ₁|^p + |ξ₂|^q) Δξ² )^{1/2}` with `F̂ = step² · DFT`.
pub fn spq_norm(f: &PlanarField, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "exponents must be positive and finite, got ({p}, {q})"
        )));
    }
    let spec = Spectrum::of(f)?;
    let h2 = f.step() * f.step();
    let terms: Vec<f64> = spec
        .coeffs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let (x, y) = spec.freq(i);
            (c * h2).norm_sqr() * (1.0 + x.abs().powf(p) + y.abs().powf(q))
        })
        .collect();
    let sum: f64 = terms.iter().sum();
    Ok((sum * spec.dxi * spec.dxi).sqrt())
}

/// Conjugate exponent `p / (p − 1)`.
pub fn conjugate(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent must lie in (1, ∞), got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// `bmo_lp(F, 3, ·) / ‖F‖_{S_{p,p'}}`.
pub fn embedding_ratio(f: &PlanarField, p: f64, scale_range: (i32, i32)) -> Result<f64> {
    let norm = spq_norm(f, p, conjugate(p)?)?;
    if norm == 0.0 {
        return Err(Error::InvalidArgument("embedding ratio of the zero field".into()));
    }
    Ok(bmo_lp(f, LP_OFFSET, scale_range)? / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mode(n: usize, t: f64, k: (f64, f64)) -> PlanarField {
        PlanarField::from_fn((0.0, 0.0), t / n as f64, n, n, Some(t), |x, y| {
            Complex64::from_polar(1.0, 2.0 * PI * (k.0 * x + k.1 * y))
        })
        .unwrap()
    }

    fn max_diff(a: &PlanarField, b: &PlanarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn partition_of_unity() {
        let part = LPPartition::new((-4, 6)).unwrap();
        for i in 1..2000 {
            let r = i as f64 * 64.0 / 2000.0;
            assert!((part.total(r) - 1.0).abs() < 1e-10, "r = {r}");
        }
        for k in -2..4 {
            assert_eq!(LPPartition::psi(k, 2f64.powi(k)), 1.0);
            assert_eq!(LPPartition::psi(k, 2f64.powi(k + 1)), 0.0);
            assert_eq!(LPPartition::psi(k, 2f64.powi(k - 1) * 0.99), 0.0);
        }
    }

    #[test]
    fn projection_of_single_modes() {
        let f = mode(64, 4.0, (2.0, 0.0));
        let p = lp_project(&f, 1).unwrap();
        assert!(max_diff(&p, &f) < 1e-12);
        let g = mode(64, 4.0, (4.0, 1.0));
        let zero = lp_project(&g, 1).unwrap();
        assert!(zero.max_abs() < 1e-10);
        assert!(lp_project(&f, 3).is_err());
    }

    #[test]
    fn projections_resum_to_the_field() {
        let n = 64;
        let f = PlanarField::from_fn((0.0, 0.0), 4.0 / n as f64, n, n, Some(4.0), |x, y| {
            let a = Complex64::from_polar(0.7, 2.0 * PI * (0.25 * x - 1.5 * y));
            let b = Complex64::from_polar(0.2, 2.0 * PI * (2.0 * x + 1.75 * y) + 0.3);
            a + b + 0.5
        })
        .unwrap();
        let mut acc = lp_remainder(&f, -1).unwrap();
        for k in -1..=2 {
            let piece = lp_project(&f, k).unwrap();
            acc = acc.with_values(
                acc.values()
                    .iter()
                    .zip(piece.values())
                    .map(|(a, b)| a + b)
                    .collect(),
            );
        }
        assert!(max_diff(&acc, &f) < 1e-8);
    }

    #[test]
    fn spq_of_single_coefficient() {
        let f = mode(16, 1.0, (3.0, 5.0));
        assert!((spq_norm(&f, 2.0, 2.0).unwrap() - 35f64.sqrt()).abs() < 1e-10);
        assert!((spq_norm(&f, 1.0, 3.0).unwrap() - (1.0 + 3.0 + 125.0f64).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn lp_bmo_of_constants_and_modes() {
        let n = 128;
        let c = PlanarField::from_fn((0.0, 0.0), 8.0 / n as f64, n, n, Some(8.0), |_, _| {
            Complex64::new(1.0, 0.0)
        })
        .unwrap();
        assert!(bmo_lp(&c, 3, (-2, 2)).unwrap() < 1e-12);
        assert_eq!(embedding_ratio(&c, 1.5, (-2, 2)).unwrap(), 0.0);

        // a unit mode at |ξ| = 2 lives in bands 0, 1, 2 only; cubes with
        // 3 − j ≤ 1 see it with full amplitude
        let f = mode(n, 8.0, (2.0, 0.0));
        let v = bmo_lp(&f, 3, (2, 2)).unwrap();
        assert!((0.25..=4.0).contains(&v), "{v}");
        assert!((v - 1.0).abs() < 1e-10);
        let zero = PlanarField::from_fn((0.0, 0.0), 0.0625, n, n, Some(8.0), |_, _| {
            Complex64::default()
        })
        .unwrap();
        assert!(embedding_ratio(&zero, 1.5, (-2, 2)).is_err());
    }

    #[test]
    fn embedding_ratio_is_homogeneous() {
        let n = 64;
        let f = PlanarField::from_fn((0.0, 0.0), 4.0 / n as f64, n, n, Some(4.0), |x, y| {
            Complex64::new((2.0 * PI * x / 4.0).sin() * (PI * y).cos(), 0.3 * (PI * x).cos())
        })
        .unwrap();
        let r1 = embedding_ratio(&f, 1.5, (-2, 1)).unwrap();
        let r2 = embedding_ratio(&f.scaled(Complex64::new(2.0, 0.0)), 1.5, (-2, 1)).unwrap();
        assert!((r1 - r2).abs() <= 1e-9 * r1);
    }
}
