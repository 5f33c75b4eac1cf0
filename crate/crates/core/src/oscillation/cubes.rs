use num_complex::Complex64;
use rayon::prelude::*;

use super::field::PlanarField;
use crate::error::{Error, Result};

/// Square `[a₁s, (a₁+1)s) × [a₂s, (a₂+1)s)` with `s = 2^scale_exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DyadicCube {
    pub scale_exp: i32,
    pub anchor: (i64, i64),
}

impl DyadicCube {
    pub fn new(scale_exp: i32, anchor: (i64, i64)) -> Self {
        Self { scale_exp, anchor }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.scale_exp)
    }

    /// Lower-left corner.
    pub fn corner(&self) -> (f64, f64) {
        let s = self.side();
        (self.anchor.0 as f64 * s, self.anchor.1 as f64 * s)
    }

    /// Concentric cube of triple side, as `(x0, x1, y0, y1)`.
    pub fn tripled(&self) -> (f64, f64, f64, f64) {
        let s = self.side();
        let (x, y) = self.corner();
        (x - s, x + 2.0 * s, y - s, y + 2.0 * s)
    }

    /// Euclidean distance from the origin to the closed cube.
    pub fn distance_to_origin(&self) -> f64 {
        let s = self.side();
        let gap = |a: i64| {
            if a >= 0 {
                a as f64 * s
            } else {
                (-(a + 1)) as f64 * s
            }
        };
        gap(self.anchor.0).hypot(gap(self.anchor.1))
    }
}

/// Values of an oscillation modulus `ω(a)` at decreasing scales `a`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OscillationProfile {
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
}

impl OscillationProfile {
    /// `ω(finest) / ω(coarsest)`, or `None` when the coarse value is zero.
    pub fn decay_ratio(&self) -> Option<f64> {
        let first = *self.values.first()?;
        let last = *self.values.last()?;
        (first > 0.0).then(|| last / first)
    }
}

/// A grid-aligned square block of a field; indices wrap on a torus.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Block {
    pub ix: usize,
    pub iy: usize,
    pub m: usize,
    nx: usize,
    ny: usize,
}

impl Block {
    /// Flat indices `ix * ny + iy` of the cells, row by row.
    pub fn cells(self) -> impl Iterator<Item = usize> {
        (self.ix..self.ix + self.m).flat_map(move |a| {
            let row = (a % self.nx) * self.ny;
            (self.iy..self.iy + self.m).map(move |c| row + c % self.ny)
        })
    }
}

fn index_of(coord: f64, origin: f64, step: f64) -> Option<i64> {
    let s = (coord - origin) / step;
    let r = s.round();
    ((s - r).abs() < 1e-6).then_some(r as i64)
}

pub(crate) fn block_for(f: &PlanarField, x0: f64, y0: f64, side: f64) -> Result<Block> {
    let h = f.step();
    let (ox, oy) = f.origin();
    let outside = || {
        Error::OutsideDomain(format!(
            "cube at ({x0}, {y0}) of side {side} does not fit the field grid"
        ))
    };
    let (nx, ny) = (f.nx() as i64, f.ny() as i64);
    let mut ix = index_of(x0, ox, h).ok_or_else(outside)?;
    let mut iy = index_of(y0, oy, h).ok_or_else(outside)?;
    let m = index_of(side, 0.0, h).ok_or_else(outside)?;
    if f.periodic_extent().is_some() {
        if m < 1 || m > nx {
            return Err(outside());
        }
        ix = ix.rem_euclid(nx);
        iy = iy.rem_euclid(ny);
    } else if m < 1 || ix < 0 || iy < 0 || ix + m > nx || iy + m > ny {
        return Err(outside());
    }
    Ok(Block {
        ix: ix as usize,
        iy: iy as usize,
        m: m as usize,
        nx: nx as usize,
        ny: ny as usize,
    })
}

fn block_oscillation(f: &PlanarField, b: Block) -> f64 {
    let v = f.values();
    let count = (b.m * b.m) as f64;
    let mean = b.cells().map(|i| v[i]).sum::<Complex64>() / count;
    b.cells().map(|i| (v[i] - mean).norm()).sum::<f64>() / count
}

/// `⨍_Q |F − ⨍_Q F|` by cell quadrature.
pub fn mean_oscillation(f: &PlanarField, q: &DyadicCube) -> Result<f64> {
    let (x0, y0) = q.corner();
    Ok(block_oscillation(f, block_for(f, x0, y0, q.side())?))
}

/// `⨍_Q |F − median_Q F|`, with the componentwise median.
pub fn median_oscillation(f: &PlanarField, q: &DyadicCube) -> Result<f64> {
    let (x0, y0) = q.corner();
    let b = block_for(f, x0, y0, q.side())?;
    let v = f.values();
    let mut re: Vec<f64> = b.cells().map(|i| v[i].re).collect();
    let mut im: Vec<f64> = b.cells().map(|i| v[i].im).collect();
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let med = Complex64::new(median(&mut re), median(&mut im));
    Ok(b.cells().map(|i| (v[i] - med).norm()).sum::<f64>() / (b.m * b.m) as f64)
}

/// Every cube of side `s` inside the field, on the dyadic mesh (`shift = 0`)
/// or on the mesh shifted by `(s/2, s/2)`. On a torus whose side is a multiple
/// of `s` the mesh is taken modulo the torus, so cubes may wrap.
pub(crate) fn mesh_blocks(f: &PlanarField, side: f64, shift: f64) -> Vec<Block> {
    let bounds = f.bounds();
    let first = |lo: f64| ((lo - shift) / side - 1e-9).ceil() as i64;
    let last = |lo: f64, hi: f64| match f.periodic_extent() {
        Some(t) if ((t / side) - (t / side).round()).abs() < 1e-9 => {
            first(lo) + (t / side).round() as i64 - 1
        }
        _ => ((hi - shift) / side + 1e-9).floor() as i64 - 1,
    };
    let mut out = Vec::new();
    for a in first(bounds.x0)..=last(bounds.x0, bounds.x1) {
        for b in first(bounds.y0)..=last(bounds.y0, bounds.y1) {
            let (x0, y0) = (a as f64 * side + shift, b as f64 * side + shift);
            if let Ok(block) = block_for(f, x0, y0, side) {
                out.push(block);
            }
        }
    }
    out
}

fn check_scales(f: &PlanarField, (j0, j1): (i32, i32)) -> Result<()> {
    if j0 > j1 {
        return Err(Error::InvalidArgument(format!("empty scale range ({j0}, {j1})")));
    }
    let side0 = 2f64.powi(j0);
    if side0 < f.step() * (1.0 - 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "scale 2^{j0} is below the grid step {}",
            f.step()
        )));
    }
    if mesh_blocks(f, 2f64.powi(j1), 0.0).is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no dyadic cube of side 2^{j1} fits the field"
        )));
    }
    Ok(())
}

fn scale_sup(f: &PlanarField, j: i32) -> f64 {
    let side = 2f64.powi(j);
    let mut blocks = mesh_blocks(f, side, 0.0);
    if ((side / 2.0) / f.step()).fract().abs() < 1e-9 {
        blocks.extend(mesh_blocks(f, side, side / 2.0));
    }
    blocks
        .par_iter()
        .map(|&b| block_oscillation(f, b))
        .reduce(|| 0.0, f64::max)
}

/// Largest mean oscillation over dyadic and half-shifted dyadic cubes with
/// side `2^j`, `j` in `scale_range`.
pub fn bmo_direct(f: &PlanarField, scale_range: (i32, i32)) -> Result<f64> {
    check_scales(f, scale_range)?;
    Ok((scale_range.0..=scale_range.1)
        .map(|j| scale_sup(f, j))
        .fold(0.0, f64::max))
}

/// Per-scale supremum of the mean oscillation, coarse to fine.
pub fn vmo_modulus(f: &PlanarField, scale_range: (i32, i32)) -> Result<OscillationProfile> {
    check_scales(f, scale_range)?;
    let js: Vec<i32> = (scale_range.0..=scale_range.1).rev().collect();
    Ok(OscillationProfile {
        scales: js.iter().map(|&j| 2f64.powi(j)).collect(),
        values: js.iter().map(|&j| scale_sup(f, j)).collect(),
    })
}
