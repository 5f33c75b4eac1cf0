//! One-dimensional sampled signals: generators, the continuum-scaled Fourier
//! transform, Sobolev norms and the Wiener-amalgam decay functional.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth::smooth_step;

/// Below this magnitude the gaussian generator is truncated.
pub const GAUSSIAN_TRUNCATION: f64 = 1e-16;

/// Which side of the Fourier transform a signal lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Time,
    Frequency,
}

impl Domain {
    fn flipped(self) -> Self {
        match self {
            Domain::Time => Domain::Frequency,
            Domain::Frequency => Domain::Time,
        }
    }
}

/// Generator families understood by [`make_signal`].
#[derive(Clone, Debug, PartialEq)]
pub enum SignalKind {
    /// Indicator of `[0, 1)`.
    Box,
    /// Cardinal B-spline of order 2 on `[0, 2]`.
    Hat,
    /// Cardinal B-spline of the given order on `[0, order]`.
    Bspline { order: u32 },
    /// `2^{1/4} e^{-π t²}`, truncated where it drops below [`GAUSSIAN_TRUNCATION`].
    Gaussian,
    /// Indicator of `[0, 1)` with both edges replaced by a smooth step of the given width.
    SmoothedBox { transition: f64 },
    /// Explicit samples; `start` is the time of the first sample.
    Custom { start: f64, samples: Vec<Complex64> },
}

/// Closed form of a generator, kept so that the defining sums can be
/// re-evaluated off the sampling grid.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Generator {
    Bspline(u32),
    Gaussian,
    SmoothedBox(f64),
}

impl Generator {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Generator::Bspline(order) => bspline(order, t),
            Generator::Gaussian => gaussian(t),
            Generator::SmoothedBox(tau) => smoothed_box(tau, t),
        }
    }
}

/// Cardinal B-spline `B_n` (support `[0, n]`) by the Cox–de Boor recursion.
pub fn bspline(order: u32, t: f64) -> f64 {
    if t < 0.0 || t >= order as f64 {
        return 0.0;
    }
    if order == 1 {
        return 1.0;
    }
    let n = order as f64;
    (t * bspline(order - 1, t) + (n - t) * bspline(order - 1, t - 1.0)) / (n - 1.0)
}

/// The L²-normalized gaussian `2^{1/4} e^{-π t²}`.
pub fn gaussian(t: f64) -> f64 {
    2f64.powf(0.25) * (-PI * t * t).exp()
}

fn smoothed_box(tau: f64, t: f64) -> f64 {
    smooth_step((t + tau / 2.0) / tau) - smooth_step((t - 1.0 + tau / 2.0) / tau)
}

/// Half-width of the support of the truncated gaussian.
pub fn gaussian_radius() -> f64 {
    ((0.25 * 2f64.ln() - GAUSSIAN_TRUNCATION.ln()) / PI).sqrt()
}

/// Returns `N` when `step == 1/N` for an integer `N`.
pub fn grid_density(step: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Grid(format!("step {step} must be positive and finite")));
    }
    let n = (1.0 / step).round();
    if n < 1.0 || ((n * step) - 1.0).abs() > 1e-9 {
        return Err(Error::Grid(format!("1/step = {} is not an integer", 1.0 / step)));
    }
    Ok(n as usize)
}

/// A compactly supported complex function sampled on a uniform grid.
///
/// Sample `i` holds the value at `start + i·step`; the signal is zero outside
/// the window `[start, start + len·step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    start: f64,
    step: f64,
    samples: Vec<Complex64>,
    domain: Domain,
    generator: Option<Generator>,
}

impl SampledSignal {
    pub fn new(start: f64, step: f64, samples: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        if !start.is_finite() {
            return Err(Error::InvalidArgument("start must be finite".into()));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("a signal needs at least one sample".into()));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("samples must be finite".into()));
        }
        Ok(Self {
            start,
            step,
            samples,
            domain,
            generator: None,
        })
    }

    /// Time-domain signal from real samples.
    pub fn from_real(start: f64, step: f64, samples: &[f64]) -> Result<Self> {
        Self::new(
            start,
            step,
            samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            Domain::Time,
        )
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// End of the support window (exclusive).
    pub fn end(&self) -> f64 {
        self.start + self.samples.len() as f64 * self.step
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// `start / step` as an exact integer, if the window is grid aligned.
    pub fn start_index(&self) -> Option<i64> {
        let s = self.start / self.step;
        let r = s.round();
        ((s - r).abs() < 1e-6).then_some(r as i64)
    }

    /// Same samples, reinterpreted on the other side of the transform.
    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for z in &mut out.samples {
            *z *= factor;
        }
        out
    }

    /// Value at an arbitrary time.
    ///
    /// Uses the closed form when the signal came from a known generator and
    /// linear interpolation between samples otherwise. Zero outside the window.
    pub fn eval(&self, t: f64) -> Complex64 {
        if t < self.start || t >= self.end() {
            return Complex64::new(0.0, 0.0);
        }
        if let Some(g) = &self.generator {
            return Complex64::new(g.eval(t), 0.0);
        }
        let pos = (t - self.start) / self.step;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let a = self.samples[i.min(self.len() - 1)];
        let b = self.samples.get(i + 1).copied().unwrap_or_default();
        a * (1.0 - frac) + b * frac
    }

    /// Discrete L² norm `(Σ |f|² step)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.step).sqrt()
    }

    /// Extends the window with `before` zeros on the left and `after` on the right.
    pub fn padded(&self, before: usize, after: usize) -> Self {
        let mut samples = vec![Complex64::default(); before];
        samples.extend_from_slice(&self.samples);
        samples.resize(samples.len() + after, Complex64::default());
        Self {
            start: self.start - before as f64 * self.step,
            samples,
            ..self.clone()
        }
    }
}

/// Builds a generator sampled at `step = 1/N` (`N >= 8`), with the support
/// window widened by `pad` on both sides.
///
/// Box, hat, B-spline and smoothed-box generators are normalized so that their
/// integer translates sum to one; the gaussian carries its own L² normalization.
pub fn make_signal(kind: &SignalKind, step: f64, pad: f64) -> Result<SampledSignal> {
    let n = grid_density(step)?;
    if n < 8 {
        return Err(Error::Grid(format!("grid density 1/step = {n} must be at least 8")));
    }
    if !(pad.is_finite() && pad >= 0.0) {
        return Err(Error::InvalidArgument(format!("pad must be non-negative, got {pad}")));
    }
    let nf = n as f64;
    let pad_samples = (pad * nf - 1e-9).ceil().max(0.0) as i64;

    let (first, last, generator): (i64, i64, Option<Generator>) = match kind {
        SignalKind::Box => (0, n as i64 - 1, Some(Generator::Bspline(1))),
        SignalKind::Hat => (0, 2 * n as i64 - 1, Some(Generator::Bspline(2))),
        SignalKind::Bspline { order } => {
            if *order < 1 {
                return Err(Error::InvalidArgument("B-spline order must be at least 1".into()));
            }
            (0, *order as i64 * n as i64 - 1, Some(Generator::Bspline(*order)))
        }
        SignalKind::Gaussian => {
            let m = (gaussian_radius() * nf).floor() as i64;
            (-m, m, Some(Generator::Gaussian))
        }
        SignalKind::SmoothedBox { transition } => {
            if !(transition.is_finite() && *transition > 0.0 && *transition <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "smoothed box transition must lie in (0, 1], got {transition}"
                )));
            }
            let lo = (-transition / 2.0 * nf).floor() as i64;
            let hi = ((1.0 + transition / 2.0) * nf).ceil() as i64;
            (lo, hi, Some(Generator::SmoothedBox(*transition)))
        }
        SignalKind::Custom { start, samples } => {
            let sig = SampledSignal::new(*start, step, samples.clone(), Domain::Time)?;
            let p = pad_samples as usize;
            return Ok(sig.padded(p, p));
        }
    };

    let first = first - pad_samples;
    let last = last + pad_samples;
    let gen = generator.expect("closed-form generator");
    let samples = (first..=last)
        .map(|i| Complex64::new(gen.eval(i as f64 / nf), 0.0))
        .collect();
    let mut sig = SampledSignal::new(first as f64 / nf, step, samples, Domain::Time)?;
    sig.generator = Some(gen);
    Ok(sig)
}

/// Continuum-scaled discrete Fourier transform.
///
/// Approximates `f̂(ξ) = ∫ f(t) e^{-2πiξt} dt` on the centered frequency grid
/// `ξ_k = k / (L·step)`, `k = -⌊L/2⌋, …, L - 1 - ⌊L/2⌋`.
pub fn fourier_transform(f: &SampledSignal) -> SampledSignal {
    let l = f.len();
    let mut buf = f.samples.clone();
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);

    let dxi = 1.0 / (l as f64 * f.step);
    let kmin = -((l / 2) as i64);
    let s0 = f.start / f.step;
    let s0_int = (s0 - s0.round()).abs() < 1e-6;
    let lf = l as f64;

    let samples = (0..l)
        .map(|m| {
            let k = kmin + m as i64;
            let idx = k.rem_euclid(l as i64) as usize;
            let turns = if s0_int {
                ((k as i128 * s0.round() as i128).rem_euclid(l as i128)) as f64 / lf
            } else {
                (k as f64 * s0).rem_euclid(lf) / lf
            };
            buf[idx] * f.step * Complex64::from_polar(1.0, -2.0 * PI * turns)
        })
        .collect();

    SampledSignal {
        start: kmin as f64 * dxi,
        step: dxi,
        samples,
        domain: f.domain.flipped(),
        generator: None,
    }
}

/// Sobolev smoothness order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevSpec {
    pub s: f64,
}

impl SobolevSpec {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidArgument(format!("Sobolev order must be >= 0, got {s}")));
        }
        Ok(Self { s })
    }

    /// Spectral weight `(1 + |ξ|²)^s`.
    pub fn weight(&self, xi: f64) -> f64 {
        (1.0 + xi * xi).powf(self.s)
    }
}

/// `(Σ_ξ |f̂(ξ)|² (1 + |ξ|²)^s Δξ)^{1/2}` over the discrete frequency grid.
pub fn sobolev_norm(f: &SampledSignal, spec: SobolevSpec) -> f64 {
    let fh = fourier_transform(f);
    weighted_norm(&fh, |xi| spec.weight(xi))
}

/// `(Σ |g(t)|² w(t) step)^{1/2}`, evaluated at the grid times of `g`.
pub fn weighted_norm(g: &SampledSignal, weight: impl Fn(f64) -> f64) -> f64 {
    let sum: f64 = g
        .samples
        .iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * weight(g.time_of(i)))
        .sum();
    (sum * g.step).sqrt()
}

/// `Σ_k sup_{x ∈ [k, k+1]} |f(x)|`.
///
/// Cells meeting the sample hull in a single point are skipped, so a jump at
/// the window edge does not count twice.
pub fn decay_functional(f: &SampledSignal) -> f64 {
    let t_first = f.time_of(0);
    let t_last = f.time_of(f.len() - 1);
    let k_lo = t_first.floor() as i64;
    let k_hi = t_last.ceil() as i64;
    let tol = 1e-9 * f.step;
    let mut total = 0.0;
    for k in k_lo..k_hi.max(k_lo + 1) {
        let (a, b) = (k as f64, (k + 1) as f64);
        let overlap = b.min(t_last) - a.max(t_first);
        let single_sample = f.len() == 1 && t_first >= a && t_first < b;
        if overlap <= tol && !single_sample {
            continue;
        }
        let sup = f
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let t = f.time_of(*i);
                t >= a - tol && t <= b + tol
            })
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        total += sup;
    }
    total
}

/// Offset in samples of `g`'s window relative to `f`'s, checking that both
/// live on the same grid.
pub(crate) fn grid_offset(f: &SampledSignal, g: &SampledSignal) -> Result<i64> {
    if (f.step - g.step).abs() > 1e-12 * f.step {
        return Err(Error::StepMismatch(f.step, g.step));
    }
    let off = (g.start - f.start) / f.step;
    let r = off.round();
    if (off - r).abs() > 1e-6 {
        return Err(Error::Grid("signal windows are not aligned on a common grid".into()));
    }
    Ok(r as i64)
}

/// Riemann-sum inner product `Σ f(t) conj(g(t)) step`.
pub fn l2_inner(f: &SampledSignal, g: &SampledSignal) -> Result<Complex64> {
    let off = grid_offset(f, g)?;
    let mut acc = Complex64::default();
    for (j, gz) in g.samples.iter().enumerate() {
        let i = j as i64 + off;
        if i >= 0 && (i as usize) < f.len() {
            acc += f.samples[i as usize] * gz.conj();
        }
    }
    Ok(acc * f.step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[Complex64], b: impl Fn(usize) -> Complex64) -> f64 {
        a.iter()
            .enumerate()
            .map(|(i, z)| (z - b(i)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn box_samples() {
        let f = make_signal(&SignalKind::Box, 1.0 / 64.0, 0.0).unwrap();
        assert_eq!(f.len(), 64);
        assert_eq!(f.start(), 0.0);
        assert!(f.samples().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn hat_samples() {
        let f = make_signal(&SignalKind::Hat, 1.0 / 64.0, 0.0).unwrap();
        assert_eq!(f.len(), 128);
        for (i, z) in f.samples().iter().enumerate() {
            let t = i as f64 / 64.0;
            assert_eq!(z.re, t.min(2.0 - t));
        }
    }

    #[test]
    fn gaussian_window() {
        // 2^{1/4} e^{-πt²} = 1e-16  ⇔  t = sqrt((ln 2^{1/4} + 16 ln 10)/π)
        let oracle = ((0.25 * 2f64.ln() + 16.0 * 10f64.ln()) / PI).sqrt();
        assert!((gaussian_radius() - oracle).abs() < 1e-12);
        assert!((oracle - 3.4325).abs() < 1e-3);
        let f = make_signal(&SignalKind::Gaussian, 1.0 / 64.0, 0.0).unwrap();
        assert!(f.start() > -3.5 && f.start() < -3.4);
        assert!(f.end() > 3.4 && f.end() < 3.5);
        assert!(f.samples().iter().all(|z| z.re >= GAUSSIAN_TRUNCATION));
    }

    #[test]
    fn rejects_non_integer_density() {
        assert!(matches!(
            make_signal(&SignalKind::Box, 0.3, 0.0),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            make_signal(&SignalKind::Box, 0.25, 0.0),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn padding_extends_window() {
        let f = make_signal(&SignalKind::Box, 1.0 / 16.0, 1.0).unwrap();
        assert_eq!(f.len(), 48);
        assert_eq!(f.start(), -1.0);
        assert_eq!(f.start_index(), Some(-16));
    }

    #[test]
    fn bspline_partition_of_unity() {
        for order in 1..=6 {
            for i in 0..50 {
                let x = i as f64 / 50.0;
                let s: f64 = (-8..8).map(|k| bspline(order, x - k as f64)).sum();
                assert!((s - 1.0).abs() < 1e-12, "order {order}");
            }
        }
    }

    #[test]
    fn box_transform_matches_sinc() {
        let step = 1.0 / 256.0;
        let f = make_signal(&SignalKind::Box, step, 0.0).unwrap();
        let fh = fourier_transform(&f);
        let exact = |xi: f64| {
            if xi == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -PI * xi) * ((PI * xi).sin() / (PI * xi))
            }
        };
        assert!(max_err(fh.samples(), |i| exact(fh.time_of(i))) < 1e-3);
        assert_eq!(fh.domain(), Domain::Frequency);

        // A finer grid with a padded window, near the origin.
        let step = 1.0 / 4096.0;
        let f = make_signal(&SignalKind::Box, step, 1.5).unwrap();
        let fh = fourier_transform(&f);
        let err = fh
            .samples()
            .iter()
            .enumerate()
            .filter(|(i, _)| fh.time_of(*i).abs() <= 8.0)
            .map(|(i, z)| (z - exact(fh.time_of(i))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn gaussian_is_self_dual() {
        let f = make_signal(&SignalKind::Gaussian, 1.0 / 256.0, 0.0).unwrap();
        let fh = fourier_transform(&f);
        let err = max_err(fh.samples(), |i| Complex64::new(gaussian(fh.time_of(i)), 0.0));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn zero_transforms_to_zero() {
        let f = SampledSignal::from_real(0.0, 1.0 / 32.0, &[0.0; 32]).unwrap();
        assert!(fourier_transform(&f).samples().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn sobolev_order_zero_is_l2() {
        let f = make_signal(&SignalKind::Box, 1.0 / 64.0, 0.0).unwrap();
        let n = sobolev_norm(&f, SobolevSpec::new(0.0).unwrap());
        assert!((n - 1.0).abs() < 1e-3);
    }

    /// Trapezoid quadrature of `(1 + ξ²)|ĝ(ξ)|²` with `ĝ = 2^{1/4}e^{-πξ²}`.
    fn gaussian_h1_oracle() -> f64 {
        let (a, m) = (8.0, 160_000);
        let h = 2.0 * a / m as f64;
        let sum: f64 = (0..=m)
            .map(|i| {
                let xi = -a + i as f64 * h;
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                w * (1.0 + xi * xi) * gaussian(xi).powi(2)
            })
            .sum();
        (sum * h).sqrt()
    }

    #[test]
    fn gaussian_h1_norm() {
        let oracle = gaussian_h1_oracle();
        // frozen from the quadrature oracle; equals sqrt(1 + 1/(4π))
        assert!((oracle - 1.039027).abs() < 1e-6, "{oracle}");
        let f = make_signal(&SignalKind::Gaussian, 1.0 / 64.0, 0.0).unwrap();
        let n = sobolev_norm(&f, SobolevSpec::new(1.0).unwrap());
        assert!((n - oracle).abs() < 1e-3, "{n}");
    }

    #[test]
    fn box_half_order_grows_with_window() {
        let spec = SobolevSpec::new(0.5).unwrap();
        let norms: Vec<f64> = (6..=12)
            .map(|e| {
                let f = make_signal(&SignalKind::Box, 1.0 / (1u64 << e) as f64, 1.0).unwrap();
                sobolev_norm(&f, spec)
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[1] > w[0], "{norms:?}");
        }
        // log divergence: increments of the squared norm do not decay
        let inc: Vec<f64> = norms.windows(2).map(|w| w[1] * w[1] - w[0] * w[0]).collect();
        assert!(inc.last().unwrap() / inc[inc.len() - 2] > 0.75, "{inc:?}");
    }

    #[test]
    fn decay_values() {
        let step = 1.0 / 64.0;
        let b = make_signal(&SignalKind::Box, step, 0.0).unwrap();
        assert!((decay_functional(&b) - 1.0).abs() < 1e-15);
        let h = make_signal(&SignalKind::Hat, step, 0.0).unwrap();
        assert!((decay_functional(&h) - 2.0).abs() < 1e-15);
    }

    /// Direct summation of per-cell suprema of the closed form on a 1/1024 grid.
    fn gaussian_decay_oracle() -> f64 {
        (-5i64..5)
            .map(|k| {
                (0..=1024)
                    .map(|i| gaussian(k as f64 + i as f64 / 1024.0))
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    #[test]
    fn gaussian_decay() {
        let oracle = gaussian_decay_oracle();
        assert!((oracle - 2.481203).abs() < 1e-5, "{oracle}");
        let g = make_signal(&SignalKind::Gaussian, 1.0 / 1024.0, 0.0).unwrap();
        assert!((decay_functional(&g) - oracle).abs() < 1e-9);
    }

    #[test]
    fn inner_products() {
        let step = 1.0 / 1024.0;
        let b = make_signal(&SignalKind::Box, step, 0.0).unwrap();
        let h = make_signal(&SignalKind::Hat, step, 0.0).unwrap();
        assert!((l2_inner(&b, &b).unwrap() - 1.0).norm() < 1e-12);
        assert!((l2_inner(&b, &h).unwrap() - 0.5).norm() < 1e-3);
        let zero = SampledSignal::from_real(3.0, step, &[0.0; 10]).unwrap();
        assert_eq!(l2_inner(&b, &zero).unwrap(), Complex64::default());
        let coarse = make_signal(&SignalKind::Box, 1.0 / 64.0, 0.0).unwrap();
        assert!(matches!(l2_inner(&b, &coarse), Err(Error::StepMismatch(..))));
    }

    #[test]
    fn eval_interpolates_custom_samples() {
        let f = SampledSignal::from_real(0.0, 0.5, &[0.0, 1.0, 0.0]).unwrap();
        assert!((f.eval(0.25).re - 0.5).abs() < 1e-15);
        assert_eq!(f.eval(-0.1).re, 0.0);
    }
}
