use rayon::prelude::*;

use super::cubes::DyadicCube;
use super::spectral::conjugate;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Relative tolerance of the outer integral in [`weight_mass`].
pub const WEIGHT_REL_TOL: f64 = 1e-4;
const INNER_REL_TOL: f64 = 1e-9;

/// Mesh cubes of side `2^k0` inside `[−extent, extent]²` whose closure stays in
/// `{|ξ| ≥ 2^{k0+1}}`. These are the cubes that can meet the support of `P_k f`
/// for `k ≥ k0 + 3` while their triples stay away from the origin.
pub fn admissible_cubes(k0: i32, extent: f64) -> Vec<DyadicCube> {
    all_cubes(k0, extent)
        .into_iter()
        .filter(|c| is_admissible(c))
        .collect()
}

/// Mesh cubes inside the extent that fail the admissibility test.
pub fn inadmissible_cubes(k0: i32, extent: f64) -> Vec<DyadicCube> {
    all_cubes(k0, extent)
        .into_iter()
        .filter(|c| !is_admissible(c))
        .collect()
}

pub fn is_admissible(c: &DyadicCube) -> bool {
    c.distance_to_origin() >= 2f64.powi(c.scale_exp + 1)
}

fn all_cubes(k0: i32, extent: f64) -> Vec<DyadicCube> {
    let m = (extent / 2f64.powi(k0)).floor() as i64;
    let mut out = Vec::new();
    for a in -m..m {
        for b in -m..m {
            out.push(DyadicCube::new(k0, (a, b)));
        }
    }
    out
}

fn split_at_zero(a: f64, b: f64) -> Vec<(f64, f64)> {
    if a < 0.0 && b > 0.0 {
        vec![(a, 0.0), (0.0, b)]
    } else {
        vec![(a, b)]
    }
}

/// `( ∫∫_{3J} (1 + |ξ₁|^p + |ξ₂|^{p'})^{−1} dξ )^{1/2}`.
pub fn weight_mass(j: &DyadicCube, p: f64) -> Result<f64> {
    let q = conjugate(p)?;
    let (x0, x1, y0, y1) = j.tripled();
    let inner = |x: f64| {
        let ax = 1.0 + x.abs().powf(p);
        split_at_zero(y0, y1)
            .into_iter()
            .map(|(a, b)| integrate(|y| 1.0 / (ax + y.abs().powf(q)), a, b, INNER_REL_TOL))
            .sum::<f64>()
    };
    let total: f64 = split_at_zero(x0, x1)
        .into_iter()
        .map(|(a, b)| integrate(inner, a, b, WEIGHT_REL_TOL))
        .sum();
    Ok(total.sqrt())
}

/// Largest weight mass over admissible cubes at scale `2^k0`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct WeightRow {
    pub k0: i32,
    pub p: f64,
    pub max_mass: f64,
    pub argmax_cube: DyadicCube,
    /// `2^{k0 (2 − p')}`.
    pub decay_term: f64,
}

/// Sweeps the admissible cubes with anchors in `[0, reach)²`. The weight and
/// the admissibility test are invariant under `a ↦ −a − 1` in each coordinate,
/// so this quadrant carries the maximum.
pub fn weight_row(k0: i32, p: f64, reach: i64) -> Result<WeightRow> {
    let q = conjugate(p)?;
    if reach < 3 {
        return Err(Error::InvalidArgument(format!(
            "reach must be at least 3 cubes, got {reach}"
        )));
    }
    let cubes: Vec<DyadicCube> = (0..reach)
        .flat_map(|a| (0..reach).map(move |b| DyadicCube::new(k0, (a, b))))
        .filter(is_admissible)
        .collect();
    let masses = cubes
        .par_iter()
        .map(|c| weight_mass(c, p))
        .collect::<Result<Vec<f64>>>()?;
    let (mut best, mut arg) = (f64::NEG_INFINITY, cubes[0]);
    for (c, m) in cubes.iter().zip(masses) {
        if m > best {
            best = m;
            arg = *c;
        }
    }
    Ok(WeightRow {
        k0,
        p,
        max_mass: best,
        argmax_cube: arg,
        decay_term: 2f64.powf(k0 as f64 * (2.0 - q)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cube_is_admissible() {
        let adm = admissible_cubes(0, 16.0);
        assert!(adm.contains(&DyadicCube::new(0, (2, 0))));
        assert!(!adm.contains(&DyadicCube::new(0, (0, 0))));
        let bad = inadmissible_cubes(0, 16.0);
        assert_eq!(bad.len(), 16);
        assert_eq!(inadmissible_cubes(5, 512.0).len(), bad.len());
        for c in &bad {
            assert!((-2..2).contains(&c.anchor.0) && (-2..2).contains(&c.anchor.1));
        }
    }

    #[test]
    fn mass_is_bounded_by_volume() {
        for &(k0, a, p) in &[(0, (2, 0), 2.0), (3, (1, 4), 1.25), (-2, (-3, 5), 4.0)] {
            let c = DyadicCube::new(k0, a);
            let m = weight_mass(&c, p).unwrap();
            assert!(m > 0.0 && m <= 3.0 * c.side());
        }
        assert!(weight_mass(&DyadicCube::new(0, (2, 0)), 1.0).is_err());
    }

    #[test]
    fn isotropic_mass_exceeds_inscribed_disc() {
        // 3J = [-2, 1)² contains the unit disc, where the p = 2 integral is π ln 2
        let c = DyadicCube::new(0, (-1, -1));
        let square = weight_mass(&c, 2.0).unwrap().powi(2);
        assert!(square > std::f64::consts::PI * 2f64.ln());
    }
}
