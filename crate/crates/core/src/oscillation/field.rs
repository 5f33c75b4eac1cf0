use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smooth::plateau;
use crate::zak::ZakField;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            x0: lo,
            x1: hi,
            y0: lo,
            y1: hi,
        }
    }

    pub fn grown(&self, by: f64) -> Self {
        Self {
            x0: self.x0 - by,
            x1: self.x1 + by,
            y0: self.y0 - by,
            y1: self.y1 + by,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Fields that can be sampled at absolute grid indices, i.e. at
/// `(i·h, j·h)` for a fixed step `h`, including outside their stored window
/// when an extension rule exists.
pub trait GridField: Sync {
    fn grid_step(&self) -> Result<f64>;

    fn sample(&self, i: i64, j: i64) -> Result<Complex64>;
}

impl GridField for ZakField {
    fn grid_step(&self) -> Result<f64> {
        if self.nx() != self.ny() {
            return Err(Error::Grid(format!(
                "planar operations need a square Zak grid, got {}x{}",
                self.nx(),
                self.ny()
            )));
        }
        Ok(1.0 / self.nx() as f64)
    }

    fn sample(&self, i: i64, j: i64) -> Result<Complex64> {
        Ok(self.value_at_index(i, j))
    }
}

fn aligned_index(coord: f64, step: f64, what: &str) -> Result<i64> {
    let s = coord / step;
    let r = s.round();
    if (s - r).abs() > 1e-6 {
        return Err(Error::Grid(format!("{what} {coord} is not a multiple of the step {step}")));
    }
    Ok(r as i64)
}

/// Complex samples on a uniform planar grid.
///
/// Sample `(ix, iy)` sits at `origin + (ix, iy)·step` and stands for the cell
/// of side `step` starting there. With `periodic_extent = Some(T)` the grid is
/// square, `T = n·step`, and the field is read as living on the torus of side `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarField {
    origin: (f64, f64),
    step: f64,
    nx: usize,
    ny: usize,
    values: Vec<Complex64>,
    periodic_extent: Option<f64>,
}

impl PlanarField {
    pub fn new(
        origin: (f64, f64),
        step: f64,
        nx: usize,
        ny: usize,
        values: Vec<Complex64>,
        periodic_extent: Option<f64>,
    ) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument("planar fields need at least 2x2 samples".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("field values must be finite".into()));
        }
        if let Some(t) = periodic_extent {
            if nx != ny || ((t - step * nx as f64).abs() > 1e-9 * t) {
                return Err(Error::InvalidArgument(format!(
                    "periodic extent {t} must equal step*n for a square grid"
                )));
            }
        }
        Ok(Self {
            origin,
            step,
            nx,
            ny,
            values,
            periodic_extent,
        })
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(
        origin: (f64, f64),
        step: f64,
        nx: usize,
        ny: usize,
        periodic_extent: Option<f64>,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                values.push(f(origin.0 + ix as f64 * step, origin.1 + iy as f64 * step));
            }
        }
        Self::new(origin, step, nx, ny, values, periodic_extent)
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn periodic_extent(&self) -> Option<f64> {
        self.periodic_extent
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.ny + iy]
    }

    pub fn x_of(&self, ix: usize) -> f64 {
        self.origin.0 + ix as f64 * self.step
    }

    pub fn y_of(&self, iy: usize) -> f64 {
        self.origin.1 + iy as f64 * self.step
    }

    /// Covered rectangle `[origin, origin + n·step)`.
    pub fn bounds(&self) -> Rect {
        Rect {
            x0: self.origin.0,
            x1: self.origin.0 + self.nx as f64 * self.step,
            y0: self.origin.1,
            y1: self.origin.1 + self.ny as f64 * self.step,
        }
    }

    /// `(Σ |F|² step²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.step * self.step).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    /// Grid index of the origin on the absolute lattice `step·ℤ²`.
    pub fn origin_index(&self) -> Result<(i64, i64)> {
        Ok((
            aligned_index(self.origin.0, self.step, "origin x")?,
            aligned_index(self.origin.1, self.step, "origin y")?,
        ))
    }

    /// Bilinear interpolation at an arbitrary point inside the grid hull
    /// (or anywhere, on a torus).
    pub fn interpolate(&self, x: f64, y: f64) -> Result<Complex64> {
        let fx = (x - self.origin.0) / self.step;
        let fy = (y - self.origin.1) / self.step;
        let (i0, j0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - i0, fy - j0);
        let (i0, j0) = (i0 as i64, j0 as i64);
        let fetch = |i: i64, j: i64| -> Result<Complex64> {
            match self.periodic_extent {
                Some(_) => Ok(self.get(
                    i.rem_euclid(self.nx as i64) as usize,
                    j.rem_euclid(self.ny as i64) as usize,
                )),
                None => {
                    // points on the last grid line need no right neighbour
                    let clamp = |v: i64, n: usize, t: f64| {
                        if v == n as i64 && t == 0.0 {
                            Some(n - 1)
                        } else if (0..n as i64).contains(&v) {
                            Some(v as usize)
                        } else {
                            None
                        }
                    };
                    match (clamp(i, self.nx, tx), clamp(j, self.ny, ty)) {
                        (Some(a), Some(b)) => Ok(self.get(a, b)),
                        _ => Err(Error::OutsideDomain(format!(
                            "({x}, {y}) is outside the sampled rectangle"
                        ))),
                    }
                }
            }
        };
        let v00 = fetch(i0, j0)?;
        let v10 = if tx > 0.0 { fetch(i0 + 1, j0)? } else { v00 };
        let v01 = if ty > 0.0 { fetch(i0, j0 + 1)? } else { v00 };
        let v11 = if tx > 0.0 && ty > 0.0 {
            fetch(i0 + 1, j0 + 1)?
        } else if tx > 0.0 {
            v10
        } else {
            v01
        };
        Ok((v00 * (1.0 - tx) + v10 * tx) * (1.0 - ty) + (v01 * (1.0 - tx) + v11 * tx) * ty)
    }

    /// Dyadic exponent range `(j_min, j_max)` of cubes that fit the grid: side
    /// at least two cells, at most half the shorter edge (the whole torus
    /// when the field is periodic).
    pub fn scale_range(&self) -> (i32, i32) {
        let j_min = (2.0 * self.step).log2().ceil() as i32;
        let short = (self.nx.min(self.ny) as f64) * self.step;
        let j_max = match self.periodic_extent {
            Some(t) => t.log2().floor() as i32,
            None => (short / 2.0).log2().floor() as i32,
        };
        (j_min, j_max.max(j_min))
    }
}

impl GridField for PlanarField {
    fn grid_step(&self) -> Result<f64> {
        self.origin_index()?;
        Ok(self.step)
    }

    fn sample(&self, i: i64, j: i64) -> Result<Complex64> {
        let (ox, oy) = self.origin_index()?;
        let (li, lj) = (i - ox, j - oy);
        if self.periodic_extent.is_some() {
            return Ok(self.get(
                li.rem_euclid(self.nx as i64) as usize,
                lj.rem_euclid(self.ny as i64) as usize,
            ));
        }
        if li < 0 || lj < 0 || li >= self.nx as i64 || lj >= self.ny as i64 {
            return Err(Error::OutsideDomain(format!(
                "grid index ({i}, {j}) is outside the field"
            )));
        }
        Ok(self.get(li as usize, lj as usize))
    }
}

/// Quasi-periodic extension of `z` on `inner` grown by `transition`, multiplied by
/// a smooth cutoff that is 1 on `inner` and vanishes outside the grown rectangle.
///
/// With `torus_side = Some(T)` the result is zero-padded to a square torus of
/// side `T`, centred on the grown rectangle, ready for spectral operations.
pub fn window_field(
    z: &ZakField,
    inner: Rect,
    transition: f64,
    torus_side: Option<f64>,
) -> Result<PlanarField> {
    if !(transition.is_finite() && transition > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transition must be positive, got {transition}"
        )));
    }
    let h = z.grid_step()?;
    let outer = inner.grown(transition);
    let ix0 = aligned_index(outer.x0, h, "window edge")?;
    let ix1 = aligned_index(outer.x1, h, "window edge")?;
    let iy0 = aligned_index(outer.y0, h, "window edge")?;
    let iy1 = aligned_index(outer.y1, h, "window edge")?;

    let (ox, oy, nx, ny) = match torus_side {
        None => (ix0, iy0, (ix1 - ix0) as usize, (iy1 - iy0) as usize),
        Some(t) => {
            let n = aligned_index(t, h, "torus side")?;
            if n < ix1 - ix0 || n < iy1 - iy0 {
                return Err(Error::InvalidArgument(format!(
                    "torus side {t} is smaller than the windowed rectangle"
                )));
            }
            let ox = ix0 - (n - (ix1 - ix0)) / 2;
            let oy = iy0 - (n - (iy1 - iy0)) / 2;
            (ox, oy, n as usize, n as usize)
        }
    };

    let mut values = Vec::with_capacity(nx * ny);
    for a in 0..nx as i64 {
        let x = (ox + a) as f64 * h;
        let wx = plateau(x, inner.x0, inner.x1, transition);
        for b in 0..ny as i64 {
            let y = (oy + b) as f64 * h;
            let w = wx * plateau(y, inner.y0, inner.y1, transition);
            values.push(if w == 0.0 {
                Complex64::default()
            } else {
                z.value_at_index(ox + a, oy + b) * w
            });
        }
    }
    PlanarField::new(
        (ox as f64 * h, oy as f64 * h),
        h,
        nx,
        ny,
        values,
        torus_side.map(|_| nx as f64 * h),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_signal, SignalKind};
    use crate::zak::{extend, zak_transform};

    fn zak(kind: SignalKind, n: usize) -> ZakField {
        zak_transform(&make_signal(&kind, 1.0 / n as f64, 0.0).unwrap(), n).unwrap()
    }

    #[test]
    fn windowed_box_keeps_phases_inside() {
        let z = zak(SignalKind::Box, 16);
        let f = window_field(&z, Rect::square(-1.0, 2.0), 0.5, None).unwrap();
        assert_eq!(f.nx(), 64);
        for ix in 0..f.nx() {
            for iy in 0..f.ny() {
                let (x, y) = (f.x_of(ix), f.y_of(iy));
                let v = f.get(ix, iy);
                assert!(v.norm() <= 1.0 + 1e-15);
                if (-1.0..=2.0).contains(&x) && (-1.0..=2.0).contains(&y) {
                    assert!((v - extend(&z, x, y).unwrap()).norm() < 1e-14);
                }
            }
        }
        // collar decays to zero at the outer edge
        assert!(f.get(0, 32).norm() < 1e-12);
    }

    #[test]
    fn window_l2_bound() {
        let z = zak(SignalKind::Hat, 16);
        let f = window_field(&z, Rect::square(-1.0, 2.0), 0.5, None).unwrap();
        // ‖φ Z‖ ≤ ‖φ‖_∞ ‖Z‖_{L²(covered unit cells)}, and |Z| is periodic in modulus
        let covered_cells: f64 = 16.0; // [-1.5, 2.5)² meets 4×4 unit cells
        assert!(f.l2_norm() <= z.l2_norm() * covered_cells.sqrt() + 1e-12);
    }

    #[test]
    fn torus_embedding() {
        let z = zak(SignalKind::Gaussian, 16);
        let f = window_field(&z, Rect::square(-1.0, 2.0), 0.5, Some(8.0)).unwrap();
        assert_eq!(f.nx(), 128);
        assert_eq!(f.periodic_extent(), Some(8.0));
        assert!(f.get(0, 0).norm() == 0.0);
        // centre of the inner square is untouched by the cutoff
        let (ox, oy) = f.origin_index().unwrap();
        let v = f.sample(8, 8).unwrap();
        assert!((v - z.value_at_index(8, 8)).norm() < 1e-15);
        assert_eq!((ox, oy), (-56, -56));
    }

    #[test]
    fn misaligned_window_is_rejected() {
        let z = zak(SignalKind::Box, 16);
        assert!(window_field(&z, Rect::square(-1.0, 2.0), 0.01, None).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_affine_fields() {
        let f = PlanarField::from_fn((0.0, 0.0), 0.125, 9, 9, None, |x, y| {
            Complex64::new(2.0 * x - y, x + 3.0 * y)
        })
        .unwrap();
        let v = f.interpolate(0.3, 0.71).unwrap();
        assert!((v - Complex64::new(0.6 - 0.71, 0.3 + 2.13)).norm() < 1e-14);
        assert!(f.interpolate(1.0, 1.0).is_ok());
        assert!(f.interpolate(1.2, 0.0).is_err());
    }
}
