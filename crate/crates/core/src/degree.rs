//! Cube-averaged (mollified) planar fields, winding numbers along closed
//! paths and the quasi-periodicity defect of the averages.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oscillation::{GridField, PlanarField, Rect};
use crate::zak::ZakField;

/// Default averaging scales.
pub const DEFAULT_EPS: [f64; 3] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
/// Largest accepted phase increment between consecutive path samples.
pub const MAX_PHASE_STEP: f64 = FRAC_PI_2;
/// Path modulus must exceed this multiple of the interpolation error bound.
pub const MODULUS_SAFETY: f64 = 10.0;
/// Paths are shifted by this many grid cells when they pass too close to a zero.
pub const PATH_SHIFT_CELLS: f64 = 2.0;
const MAX_BISECTIONS: u32 = 40;

/// Region sampled by [`mollify`] unless told otherwise: the unit square with a
/// quarter-unit collar, extended one unit to the right for the defect check.
pub fn default_region() -> Rect {
    Rect {
        x0: -0.25,
        x1: 2.25,
        y0: -0.25,
        y1: 1.25,
    }
}

/// Cube averages `F_ε(x, y) = ⨍_{Q_ε(x, y)} F` of a grid field, `Q_ε` the cube
/// of side `ε` centred at `(x, y)`, evaluated at the base grid points of a region.
#[derive(Clone, Debug)]
pub struct MollifiedField {
    epsilon: f64,
    quasi_periodic: bool,
    field: PlanarField,
}

impl MollifiedField {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn field(&self) -> &PlanarField {
        &self.field
    }

    /// Whether the base obeys `F(x+1, y) = e^{2πiy} F(x, y)`.
    pub fn is_quasi_periodic(&self) -> bool {
        self.quasi_periodic
    }
}

/// Base fields that [`mollify`] accepts.
pub trait MollifyBase: GridField {
    fn quasi_periodic(&self) -> bool;
}

impl MollifyBase for ZakField {
    fn quasi_periodic(&self) -> bool {
        true
    }
}

impl MollifyBase for PlanarField {
    fn quasi_periodic(&self) -> bool {
        false
    }
}

/// Weights of the cells `[(d − ½)h, (d + ½)h]` inside `[−ε/2, ε/2]`, divided by `ε`.
fn cell_weights(eps: f64, h: f64) -> (i64, Vec<f64>) {
    let half = eps / 2.0;
    let r = (half / h + 0.5).ceil() as i64;
    let w = (-r..=r)
        .map(|d| {
            let lo = ((d as f64 - 0.5) * h).max(-half);
            let hi = ((d as f64 + 0.5) * h).min(half);
            (hi - lo).max(0.0) / eps
        })
        .collect();
    (r, w)
}

fn aligned(coord: f64, h: f64) -> Result<i64> {
    let s = coord / h;
    if (s - s.round()).abs() > 1e-6 {
        return Err(Error::Grid(format!("{coord} is not on the grid of step {h}")));
    }
    Ok(s.round() as i64)
}

/// Averages `base` over cubes of side `epsilon` at every base grid point of
/// `region` (edges included). Samples stand for the cells centred on them, so
/// each average is an exact cell-area weighted sum.
pub fn mollify(base: &impl MollifyBase, epsilon: f64, region: Option<Rect>) -> Result<MollifiedField> {
    let h = base.grid_step()?;
    if !(epsilon.is_finite() && epsilon >= 2.0 * h * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} is below two grid cells of size {h}"
        )));
    }
    let region = region.unwrap_or_else(default_region);
    let (i0, i1) = (aligned(region.x0, h)?, aligned(region.x1, h)?);
    let (j0, j1) = (aligned(region.y0, h)?, aligned(region.y1, h)?);
    if i1 <= i0 || j1 <= j0 {
        return Err(Error::InvalidArgument("empty mollification region".into()));
    }
    let (r, w) = cell_weights(epsilon, h);
    let (nx, ny) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
    let (px, py) = (nx + 2 * r as usize, ny + 2 * r as usize);

    // base samples on the padded block, rows by x
    let rows: Vec<Vec<Complex64>> = (0..px)
        .into_par_iter()
        .map(|a| {
            (0..py)
                .map(|b| base.sample(i0 - r + a as i64, j0 - r + b as i64))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // average along y, then along x
    let along_y: Vec<Vec<Complex64>> = rows
        .par_iter()
        .map(|row| {
            (0..ny)
                .map(|b| {
                    w.iter()
                        .enumerate()
                        .map(|(d, wd)| row[b + d] * wd)
                        .sum::<Complex64>()
                })
                .collect()
        })
        .collect();
    let values: Vec<Complex64> = (0..nx)
        .into_par_iter()
        .flat_map_iter(|a| {
            let along_y = &along_y;
            let w = &w;
            (0..ny).map(move |b| {
                w.iter()
                    .enumerate()
                    .map(|(d, wd)| along_y[a + d][b] * wd)
                    .sum::<Complex64>()
            })
        })
        .collect();

    let field = PlanarField::new((i0 as f64 * h, j0 as f64 * h), h, nx, ny, values, None)?;
    Ok(MollifiedField {
        epsilon,
        quasi_periodic: base.quasi_periodic(),
        field,
    })
}

/// Samples a grid field on the base grid points of `region` without averaging.
pub fn sample_region(base: &impl GridField, region: Rect) -> Result<PlanarField> {
    let h = base.grid_step()?;
    let (i0, i1) = (aligned(region.x0, h)?, aligned(region.x1, h)?);
    let (j0, j1) = (aligned(region.y0, h)?, aligned(region.y1, h)?);
    let (nx, ny) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
    let mut values = Vec::with_capacity(nx * ny);
    for a in 0..nx as i64 {
        for b in 0..ny as i64 {
            values.push(base.sample(i0 + a, j0 + b)?);
        }
    }
    PlanarField::new((i0 as f64 * h, j0 as f64 * h), h, nx, ny, values, None)
}

/// Quasi-periodicity defects of a mollified field on the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QpDefect {
    /// `max |F_ε(x+1, y) − e^{2πiy} F_ε(x, y)|` over grid points of `[0, 1)²`.
    pub defect: f64,
    /// `max |F_ε(x, y+1) − F_ε(x, y)|` for `x` in `[0, 1)` and every sampled pair.
    pub y_periodicity: f64,
}

/// Measures `Φ_ε` and the y-periodicity defect on grid points of `[0, 1)²`.
pub fn qp_defect(m: &MollifiedField) -> Result<QpDefect> {
    let f = &m.field;
    let h = f.step();
    let n = aligned(1.0, h)? as usize;
    let (ox, oy) = f.origin_index()?;
    if ox > 0 || oy > 0 {
        return Err(Error::OutsideDomain("mollified region must contain the origin".into()));
    }
    let (sx, sy) = ((-ox) as usize, (-oy) as usize);
    if sx + 2 * n > f.nx() - 1 || sy + n >= f.ny() {
        return Err(Error::OutsideDomain(
            "mollified region must reach x = 2 and y = 1".into(),
        ));
    }
    let (defect, y_periodicity) = (0..n)
        .into_par_iter()
        .map(|a| {
            let (mut d, mut p) = (0.0f64, 0.0f64);
            for b in 0..n {
                let v = f.get(sx + a, sy + b);
                let phase = Complex64::from_polar(1.0, TAU * b as f64 / n as f64);
                d = d.max((f.get(sx + a + n, sy + b) - phase * v).norm());
            }
            // every pair (y, y + 1) inside the sampled region
            for b in 0..f.ny() - n {
                p = p.max((f.get(sx + a, b + n) - f.get(sx + a, b)).norm());
            }
            (d, p)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    Ok(QpDefect {
        defect,
        y_periodicity,
    })
}

/// Outcome of phase tracking along a closed path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingResult {
    pub winding: i64,
    pub min_modulus_on_path: f64,
    pub max_phase_step: f64,
    pub path_points: usize,
    /// Largest bilinear interpolation error estimate met on the path.
    pub interpolation_error: f64,
    /// Total unwrapped phase divided by `2π`.
    pub turns: f64,
    pub eps: Option<f64>,
    pub shift: f64,
}

struct Tracker<'a> {
    f: &'a PlanarField,
    total: f64,
    min_mod: f64,
    max_step: f64,
    points: usize,
    interp: f64,
}

impl Tracker<'_> {
    fn value(&mut self, p: (f64, f64)) -> Result<Complex64> {
        let v = self.f.interpolate(p.0, p.1)?;
        self.min_mod = self.min_mod.min(v.norm());
        self.interp = self.interp.max(interpolation_bound(self.f, p));
        self.points += 1;
        Ok(v)
    }

    /// Phase change from `a` to `b`, bisecting until every step is below the guard.
    fn segment(&mut self, a: (f64, f64), va: Complex64, b: (f64, f64), vb: Complex64, depth: u32) -> Result<f64> {
        if va.norm() == 0.0 || vb.norm() == 0.0 {
            return Err(Error::ZeroNearPath {
                min_modulus: 0.0,
                threshold: 0.0,
            });
        }
        let step = (vb / va).arg();
        if step.abs() < MAX_PHASE_STEP {
            self.max_step = self.max_step.max(step.abs());
            return Ok(step);
        }
        if depth >= MAX_BISECTIONS {
            return Err(Error::Refinement(format!(
                "phase step {step:.3} between ({:.6}, {:.6}) and ({:.6}, {:.6}) survives {MAX_BISECTIONS} bisections",
                a.0, a.1, b.0, b.1
            )));
        }
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let vm = self.value(mid)?;
        Ok(self.segment(a, va, mid, vm, depth + 1)? + self.segment(mid, vm, b, vb, depth + 1)?)
    }

    /// Walks the polyline `a → b` in `points` equal steps.
    fn walk(&mut self, a: (f64, f64), va: Complex64, b: (f64, f64), points: usize) -> Result<Complex64> {
        let (mut prev, mut vprev) = (a, va);
        for q in 1..=points {
            let u = q as f64 / points as f64;
            let p = if q == points {
                b
            } else {
                (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1))
            };
            let v = self.value(p)?;
            self.total += self.segment(prev, vprev, p, v, 0)?;
            prev = p;
            vprev = v;
        }
        Ok(vprev)
    }
}

/// Second-difference estimate of the bilinear interpolation error near `p`.
fn interpolation_bound(f: &PlanarField, p: (f64, f64)) -> f64 {
    let h = f.step();
    let (ox, oy) = f.origin();
    let ci = ((p.0 - ox) / h).floor() as i64;
    let cj = ((p.1 - oy) / h).floor() as i64;
    let (nx, ny) = (f.nx() as i64, f.ny() as i64);
    let at = |i: i64, j: i64| (i >= 0 && j >= 0 && i < nx && j < ny).then(|| f.get(i as usize, j as usize));
    let mut worst = 0.0f64;
    for (i, j) in [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)] {
        let Some(c) = at(i, j) else { continue };
        let mut second = 0.0;
        if let (Some(l), Some(r)) = (at(i - 1, j), at(i + 1, j)) {
            second += (l - c * 2.0 + r).norm();
        }
        if let (Some(d), Some(u)) = (at(i, j - 1), at(i, j + 1)) {
            second += (d - c * 2.0 + u).norm();
        }
        worst = worst.max(second / 8.0);
    }
    worst
}

/// Winding number about 0 of `F` along the closed polyline through `path`
/// (the last vertex joins the first), read by bilinear interpolation.
pub fn winding_number(f: &PlanarField, path: &[(f64, f64)], points_per_side: usize) -> Result<WindingResult> {
    if path.len() < 3 || points_per_side == 0 {
        return Err(Error::InvalidArgument(
            "a closed path needs 3 vertices and at least one point per side".into(),
        ));
    }
    let mut t = Tracker {
        f,
        total: 0.0,
        min_mod: f64::INFINITY,
        max_step: 0.0,
        points: 0,
        interp: 0.0,
    };
    let mut v = t.value(path[0])?;
    for s in 0..path.len() {
        v = t.walk(path[s], v, path[(s + 1) % path.len()], points_per_side)?;
    }
    // the starting point was counted twice
    t.points -= 1;
    let threshold = MODULUS_SAFETY * t.interp;
    if t.min_mod <= threshold {
        return Err(Error::ZeroNearPath {
            min_modulus: t.min_mod,
            threshold,
        });
    }
    let turns = t.total / TAU;
    let winding = turns.round();
    if (turns - winding).abs() >= 0.05 {
        return Err(Error::Refinement(format!("unwrapped phase {turns:.4} turns is not integral")));
    }
    Ok(WindingResult {
        winding: winding as i64,
        min_modulus_on_path: t.min_mod,
        max_phase_step: t.max_step,
        path_points: t.points,
        interpolation_error: t.interp,
        turns,
        eps: None,
        shift: 0.0,
    })
}

/// Counterclockwise boundary of `[s, 1+s]²`.
pub fn unit_square_path(shift: f64) -> Vec<(f64, f64)> {
    vec![
        (shift, shift),
        (1.0 + shift, shift),
        (1.0 + shift, 1.0 + shift),
        (shift, 1.0 + shift),
    ]
}

/// Winding of `F` along the boundary of the unit square. When the path runs
/// too close to a zero, the square is moved by two grid cells diagonally
/// (first up, then down) and the count is repeated.
pub fn winding_on_unit_square(f: &PlanarField, points_per_side: usize) -> Result<WindingResult> {
    let delta = PATH_SHIFT_CELLS * f.step();
    let mut last = None;
    for shift in [0.0, delta, -delta] {
        match winding_number(f, &unit_square_path(shift), points_per_side) {
            Ok(mut w) => {
                w.shift = shift;
                return Ok(w);
            }
            Err(e @ Error::ZeroNearPath { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Winding of each `F_ε`, which must agree across the list.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub per_eps: Vec<WindingResult>,
}

/// Common winding of the mollified fields `F_ε` on the unit square for every
/// `ε` in the decreasing list.
pub fn vmo_degree(base: &impl MollifyBase, eps_list: &[f64], points_per_side: usize) -> Result<DegreeReport> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("epsilon list must be nonempty and decreasing".into()));
    }
    let per_eps = eps_list
        .par_iter()
        .map(|&eps| {
            let m = mollify(base, eps, None)?;
            let mut w = winding_on_unit_square(m.field(), points_per_side)
                .map_err(|e| Error::DegreeInstability(format!("winding undefined at eps = {eps}: {e}")))?;
            w.eps = Some(eps);
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let degree = per_eps[0].winding;
    if let Some(bad) = per_eps.iter().find(|w| w.winding != degree) {
        return Err(Error::DegreeInstability(format!(
            "winding {} at eps = {} but {} at eps = {}",
            degree,
            eps_list[0],
            bad.winding,
            bad.eps.unwrap_or(f64::NAN)
        )));
    }
    Ok(DegreeReport { degree, per_eps })
}

/// Unwrapped phase along the segment from `a` to `b`.
fn edge_phase(f: &PlanarField, a: (f64, f64), b: (f64, f64), points: usize) -> Result<f64> {
    let mut t = Tracker {
        f,
        total: 0.0,
        min_mod: f64::INFINITY,
        max_step: 0.0,
        points: 0,
        interp: 0.0,
    };
    let va = t.value(a)?;
    t.walk(a, va, b, points)?;
    Ok(t.total)
}

/// Edge-by-edge bookkeeping of the log branch of `F_ε` around `∂Q₀`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Telescoping {
    /// Phase increments along the bottom, right, top and left edges.
    pub edges: [f64; 4],
    /// `Im Ψ(0,0)` and `Im Ψ(0,1)` with `Ψ(0,y) = log(F_ε(1,y) / (e^{2πiy} F_ε(0,y)))`.
    pub psi: [f64; 2],
    /// `|Σ edges − 2π − (Im Ψ(0,1) − Im Ψ(0,0))|`.
    pub residual: f64,
    /// `2 · defect / min |F_ε|` on the path.
    pub bound: f64,
    pub defect: f64,
    pub min_modulus: f64,
}

/// Checks that the four edge increments of the log branch add up to
/// `2π + Im Ψ(0,1) − Im Ψ(0,0)`, the quasi-periodic phase plus the defect terms.
pub fn telescoping(m: &MollifiedField, points_per_side: usize) -> Result<Telescoping> {
    let f = m.field();
    let corners = unit_square_path(0.0);
    let mut edges = [0.0; 4];
    for (s, e) in edges.iter_mut().enumerate() {
        *e = edge_phase(f, corners[s], corners[(s + 1) % 4], points_per_side)?;
    }
    let psi_at = |y: f64| -> Result<f64> {
        let right = f.interpolate(1.0, y)?;
        let left = f.interpolate(0.0, y)?;
        Ok((right / (Complex64::from_polar(1.0, TAU * y) * left)).arg())
    };
    let psi = [psi_at(0.0)?, psi_at(1.0)?];
    let residual = (edges.iter().sum::<f64>() - TAU - (psi[1] - psi[0])).abs();
    let w = winding_number(f, &corners, points_per_side)?;
    let defect = qp_defect(m)?.defect;
    Ok(Telescoping {
        edges,
        psi,
        residual,
        bound: 2.0 * defect / w.min_modulus_on_path,
        defect,
        min_modulus: w.min_modulus_on_path,
    })
}

/// One line of the essential-infimum report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssInfRow {
    pub eps: f64,
    pub min_mod: f64,
    pub x: f64,
    pub y: f64,
    pub winding: Option<i64>,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssInfReport {
    pub rows: Vec<EssInfRow>,
    pub threshold: f64,
    /// Some `ε` has winding `+1` together with `min |F_ε| < threshold`: the
    /// forced zero is visible at this resolution.
    pub forced_zero: bool,
}

/// Minimum of `|F_ε|` over grid points of `[0, 1)²` for each `ε`, paired with
/// the winding of `F_ε` on the unit square (absent when it cannot be defined).
pub fn ess_inf_witness(z: &ZakField, eps_list: &[f64], threshold: f64, points_per_side: usize) -> Result<EssInfReport> {
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let m = mollify(z, eps, None)?;
            let f = m.field();
            let (ox, oy) = f.origin_index()?;
            let n = aligned(1.0, f.step())? as usize;
            let (sx, sy) = ((-ox) as usize, (-oy) as usize);
            let (mut best, mut at) = (f64::INFINITY, (0.0, 0.0));
            for a in 0..n {
                for b in 0..n {
                    let v = f.get(sx + a, sy + b).norm();
                    if v < best {
                        best = v;
                        at = (f.x_of(sx + a), f.y_of(sy + b));
                    }
                }
            }
            let winding = winding_on_unit_square(f, points_per_side).ok().map(|w| w.winding);
            Ok(EssInfRow {
                eps,
                min_mod: best,
                x: at.0,
                y: at.1,
                winding,
                defect: qp_defect(&m)?.defect,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let forced_zero = rows.iter().any(|r| r.winding == Some(1) && r.min_mod < threshold);
    Ok(EssInfReport {
        rows,
        threshold,
        forced_zero,
    })
}
