//! Finite Zak transform, its quasi-periodic extension and Gabor frame
//! diagnostics at the critical lattice `ℤ × ℤ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{fourier_transform, grid_density, grid_offset, SampledSignal};

/// Threshold below which a transformed signal counts as compactly supported.
pub const TAIL_THRESHOLD: f64 = 1e-12;

/// Discarded modulation energy (relative to `‖x‖²`) above which a frame
/// ratio carries a warning.
pub const FRAME_TAIL_TOLERANCE: f64 = 1e-6;

/// Safety factor applied to [`FRAME_TAIL_TOLERANCE`] when `m_max` is chosen automatically.
pub const FRAME_TAIL_SAFETY: f64 = 10.0;

#[inline]
fn cis_turns(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * turns)
}

/// `e^{2πi·a/b}` with the fraction reduced exactly.
#[inline]
pub(crate) fn cis_ratio(a: i64, b: i64) -> Complex64 {
    cis_turns(a.rem_euclid(b) as f64 / b as f64)
}

/// Samples of `Zf` on the grid `(j/nx, k/ny)` of the fundamental square `[0,1)²`.
#[derive(Clone, Debug)]
pub struct ZakField {
    nx: usize,
    ny: usize,
    values: Vec<Complex64>,
    source_step: f64,
    source: Option<Arc<SampledSignal>>,
}

impl ZakField {
    /// Field from explicit samples, indexed `j * ny + k`.
    pub fn from_values(nx: usize, ny: usize, values: Vec<Complex64>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument("Zak grids need nx, ny >= 2".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        Ok(Self {
            nx,
            ny,
            values,
            source_step: 1.0 / nx as f64,
            source: None,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn source_step(&self) -> f64 {
        self.source_step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn source(&self) -> Option<&SampledSignal> {
        self.source.as_deref()
    }

    /// Value at grid point `(j/nx, k/ny)` of the fundamental square.
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.ny + k]
    }

    /// Value of the quasi-periodic extension at `(i/nx, k/ny)` for any integers.
    pub fn value_at_index(&self, i: i64, k: i64) -> Complex64 {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let m = i.div_euclid(nx);
        let j = i.rem_euclid(nx) as usize;
        let kk = k.rem_euclid(ny);
        let v = self.values[j * self.ny + kk as usize];
        if m == 0 {
            v
        } else {
            v * cis_ratio(m * kk, ny)
        }
    }

    /// Discrete `L²(Q₀)` norm.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (s / (self.nx * self.ny) as f64).sqrt()
    }

    /// Evaluates the defining sum `Σ_ℓ e^{2πiℓy} f(x − ℓ)` at an arbitrary point.
    /// Requires the field to remember its source signal.
    pub fn eval_direct(&self, x: f64, y: f64) -> Option<Complex64> {
        let f = self.source.as_deref()?;
        let lo = (x - f.end()).ceil() as i64;
        let hi = (x - f.start()).floor() as i64;
        let mut acc = Complex64::default();
        for l in lo..=hi {
            let v = f.eval(x - l as f64);
            if v != Complex64::default() {
                acc += v * cis_turns((l as f64 * y).rem_euclid(1.0));
            }
        }
        Some(acc)
    }
}

/// Finite Zak transform of a compactly supported signal on an `nx × ny` grid
/// with `nx = 1/step`.
///
/// Sample classes `ℓ mod ny` are pre-summed per column and resolved with one
/// length-`ny` DFT, which is exact because the phase is `ny`-periodic in `ℓ`.
pub fn zak_transform(f: &SampledSignal, ny: usize) -> Result<ZakField> {
    let nx = grid_density(f.step())?;
    if ny < 2 {
        return Err(Error::InvalidArgument(format!("ny must be at least 2, got {ny}")));
    }
    let s0 = f
        .start_index()
        .ok_or_else(|| Error::Grid("signal window does not start on the 1/nx lattice".into()))?;

    let mut values = vec![Complex64::default(); nx * ny];
    for (i, v) in f.samples().iter().enumerate() {
        let t = s0 + i as i64;
        let j = t.rem_euclid(nx as i64) as usize;
        let l = -t.div_euclid(nx as i64);
        values[j * ny + l.rem_euclid(ny as i64) as usize] += v;
    }

    let fft = FftPlanner::new().plan_fft_inverse(ny);
    values
        .par_chunks_mut(ny)
        .for_each(|column| fft.process(column));

    Ok(ZakField {
        nx,
        ny,
        values,
        source_step: f.step(),
        source: Some(Arc::new(f.clone())),
    })
}

/// Evaluates the quasi-periodic extension at a grid point `(x, y)` anywhere in the plane.
pub fn extend(z: &ZakField, x: f64, y: f64) -> Result<Complex64> {
    let (fx, fy) = (x * z.nx as f64, y * z.ny as f64);
    let (i, k) = (fx.round(), fy.round());
    if (fx - i).abs() > 1e-9 || (fy - k).abs() > 1e-9 {
        return Err(Error::OffGrid { x, y });
    }
    Ok(z.value_at_index(i as i64, k as i64))
}

/// Max deviation between the defining sum on `[1,2) × [0,1)` and the
/// quasi-periodic extension of `z`.
pub fn qp_residual(f: &SampledSignal, z: &ZakField) -> Result<f64> {
    let nx = grid_density(f.step())? as i64;
    if nx != z.nx as i64 {
        return Err(Error::Grid("signal and Zak field use different x-grids".into()));
    }
    let s0 = f
        .start_index()
        .ok_or_else(|| Error::Grid("signal window does not start on the 1/nx lattice".into()))?;
    let ny = z.ny as i64;
    let len = f.len() as i64;
    let residual = (0..nx)
        .into_par_iter()
        .map(|j| {
            let t = nx + j;
            // ℓ with t − ℓ·nx inside the window
            let terms: Vec<(i64, Complex64)> = (-(len / nx) - 2..=len / nx + 2)
                .filter_map(|q| {
                    let idx = t - q * nx - s0;
                    (0..len).contains(&idx).then(|| (q, f.samples()[idx as usize]))
                })
                .collect();
            (0..ny)
                .map(|k| {
                    let direct: Complex64 = terms
                        .iter()
                        .map(|&(l, v)| v * cis_ratio(l * k, ny))
                        .sum();
                    (direct - z.value_at_index(t, k)).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(residual)
}

/// Outcome of the Zak–Fourier commutation check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZakFourierCheck {
    /// `max |Zf̂(x,y) − e^{2πixy} Zf(−y,x)|` over the grid.
    pub deviation: f64,
    /// Largest `|f̂|` in the outermost unit of the frequency window.
    pub fhat_tail: f64,
    /// Set when `fhat_tail` exceeds [`TAIL_THRESHOLD`].
    pub tail_warning: bool,
}

/// Checks `Zf̂(x,y) = e^{2πixy} Zf(−y,x)` on the `n × n` grid.
///
/// The signal must be sampled at `step = 1/n` and fit in a window of `n`
/// time units, so that `f̂` lands on the same grid.
pub fn zak_fourier_check(f: &SampledSignal, n: usize) -> Result<ZakFourierCheck> {
    let nx = grid_density(f.step())?;
    if nx != n {
        return Err(Error::Grid(format!("signal step 1/{nx} does not match grid 1/{n}")));
    }
    let total = n * n;
    if f.len() > total {
        return Err(Error::InvalidArgument(format!(
            "signal window of {} samples exceeds the {total}-sample period",
            f.len()
        )));
    }
    let before = (total - f.len()) / 2;
    let padded = f.padded(before, total - f.len() - before);
    let fhat = fourier_transform(&padded);

    let zf = zak_transform(&padded, n)?;
    let zfh = zak_transform(&fhat, n)?;

    let fhat_tail = fhat.samples()[..n]
        .iter()
        .chain(&fhat.samples()[total - n..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);

    let (ni, nn) = (n as i64, total as i64);
    let deviation = (0..ni)
        .into_par_iter()
        .map(|j| {
            (0..ni)
                .map(|k| {
                    let rhs = cis_ratio(j * k, nn) * zf.value_at_index(-k, j);
                    (zfh.get(j as usize, k as usize) - rhs).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    Ok(ZakFourierCheck {
        deviation,
        fhat_tail,
        tail_warning: fhat_tail > TAIL_THRESHOLD,
    })
}

/// Frame bounds read off `|Zf|`: `A = min|Zf|²`, `B = max|Zf|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub min_abs: f64,
    pub argmin: [f64; 2],
    pub max_abs: f64,
    #[serde(rename = "A")]
    pub lower_bound_a: f64,
    #[serde(rename = "B")]
    pub upper_bound_b: f64,
    pub refined: bool,
}

const MAX_REFINEMENTS: usize = 64;

/// Grid extrema of `|Zf|`, with the minimum refined by repeated factor-2
/// subdivision of the defining sum around the argmin until the minimum
/// changes by less than `refine_tol`.
///
/// Refinement needs the source signal; fields built from raw values report
/// the grid minimum with `refined = false`.
pub fn frame_diagnostics(z: &ZakField, refine_tol: f64) -> FrameDiagnostics {
    let (mut min_abs, mut arg, mut max_abs) = (f64::INFINITY, 0usize, 0.0f64);
    for (idx, v) in z.values.iter().enumerate() {
        let a = v.norm();
        if a < min_abs {
            min_abs = a;
            arg = idx;
        }
        max_abs = max_abs.max(a);
    }
    let mut x0 = (arg / z.ny) as f64 / z.nx as f64;
    let mut y0 = (arg % z.ny) as f64 / z.ny as f64;

    let mut refined = false;
    if z.source.is_some() {
        let (mut hx, mut hy) = (1.0 / z.nx as f64, 1.0 / z.ny as f64);
        for _ in 0..MAX_REFINEMENTS {
            hx /= 2.0;
            hy /= 2.0;
            let mut best = (min_abs, x0, y0);
            for a in -2..=2 {
                for b in -2..=2 {
                    let (x, y) = (x0 + a as f64 * hx, y0 + b as f64 * hy);
                    let v = z.eval_direct(x, y).expect("source present").norm();
                    if v < best.0 {
                        best = (v, x, y);
                    }
                }
            }
            let change = min_abs - best.0;
            (min_abs, x0, y0) = best;
            if change < refine_tol {
                refined = true;
                break;
            }
        }
    }

    FrameDiagnostics {
        min_abs,
        argmin: [x0, y0],
        max_abs,
        lower_bound_a: min_abs * min_abs,
        upper_bound_b: max_abs * max_abs,
        refined,
    }
}

/// `⟨f, e^{2πim·} g(· − n)⟩`.
pub fn gabor_coefficient(f: &SampledSignal, g: &SampledSignal, m: i64, n: i64) -> Result<Complex64> {
    let density = grid_density(f.step())? as i64;
    let off = grid_offset(f, g)?;
    let g0 = g
        .start_index()
        .ok_or_else(|| Error::Grid("window does not start on the grid".into()))?;
    let mut acc = Complex64::default();
    for (j, gv) in g.samples().iter().enumerate() {
        let i = j as i64 + off + n * density;
        if i < 0 || i as usize >= f.len() {
            continue;
        }
        let t_index = g0 + j as i64 + n * density;
        let modulation = cis_ratio(m * t_index, density);
        acc += f.samples()[i as usize] * (modulation * gv).conj();
    }
    Ok(acc * f.step())
}

/// Normalized frame sum of a test vector against the Gabor system of `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRatio {
    pub ratio: f64,
    pub m_max: usize,
    /// Discarded modulation energy relative to `‖x‖²`.
    pub tail: f64,
    pub warning: bool,
}

/// `Σ_{|m| ≤ m_max, n} |⟨x, e^{2πim·} g(· − n)⟩|² / ‖x‖²`.
///
/// On a grid of density `N` the modulations `m` and `m + N` coincide, so at
/// most `N` distinct modulations exist; keeping all of them gives the full
/// frame sum. With `m_max = None` the cutoff is the smallest one whose
/// discarded energy is below `FRAME_TAIL_TOLERANCE / FRAME_TAIL_SAFETY`.
pub fn frame_ratio(g: &SampledSignal, x: &SampledSignal, m_max: Option<usize>) -> Result<FrameRatio> {
    let density = grid_density(x.step())?;
    let off = grid_offset(x, g)?;
    let x0 = x
        .start_index()
        .ok_or_else(|| Error::Grid("window does not start on the grid".into()))?;
    let norm2 = x.l2_norm().powi(2);
    if norm2 == 0.0 {
        return Err(Error::InvalidArgument("frame ratio of the zero vector is undefined".into()));
    }

    let d = density as i64;
    let n_lo = ((x.start() - g.end()) - 1.0).floor() as i64;
    let n_hi = ((x.end() - g.start()) + 1.0).ceil() as i64;
    let fft = FftPlanner::new().plan_fft_forward(density);

    // energy[m] summed over all translates n
    let energy: Vec<f64> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| {
            let mut folded = vec![Complex64::default(); density];
            let mut any = false;
            for (i, xv) in x.samples().iter().enumerate() {
                let gi = i as i64 - off - n * d;
                if gi < 0 || gi as usize >= g.len() {
                    continue;
                }
                any = true;
                let r = (x0 + i as i64).rem_euclid(d) as usize;
                folded[r] += xv * g.samples()[gi as usize].conj();
            }
            if any {
                fft.process(&mut folded);
            }
            folded
                .iter()
                .map(|c| (c * x.step()).norm_sqr())
                .collect::<Vec<f64>>()
        })
        .reduce(
            || vec![0.0; density],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );

    let total: f64 = energy.iter().sum();
    let kept_up_to = |mm: usize| -> f64 {
        if 2 * mm + 1 >= density {
            return total;
        }
        let mut s = energy[0];
        for m in 1..=mm {
            s += energy[m] + energy[density - m];
        }
        s
    };

    let m_used = match m_max {
        Some(mm) => mm.min(density / 2),
        None => {
            let target = FRAME_TAIL_TOLERANCE / FRAME_TAIL_SAFETY * norm2;
            (0..=density / 2)
                .find(|&mm| total - kept_up_to(mm) <= target)
                .unwrap_or(density / 2)
        }
    };
    let kept = kept_up_to(m_used);
    let tail = ((total - kept) / norm2).max(0.0);
    Ok(FrameRatio {
        ratio: kept / norm2,
        m_max: m_used,
        tail,
        warning: tail > FRAME_TAIL_TOLERANCE,
    })
}
