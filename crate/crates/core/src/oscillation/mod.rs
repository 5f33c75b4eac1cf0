//! Planar oscillation functionals: windowed Zak fields, mean oscillation over
//! dyadic cubes, Littlewood–Paley pieces, `S_{p,q}` norms and the weight bound
//! on admissible frequency cubes.

mod cubes;
mod field;
mod spectral;
mod weight;

pub use cubes::{bmo_direct, mean_oscillation, median_oscillation, vmo_modulus, DyadicCube, OscillationProfile};
pub use field::{window_field, GridField, PlanarField, Rect};
pub use spectral::{
    bmo_lp, conjugate, embedding_ratio, lp_project, lp_remainder, spq_norm, LPPartition, LP_OFFSET,
};
pub use weight::{
    admissible_cubes, inadmissible_cubes, is_admissible, weight_mass, weight_row, WeightRow, WEIGHT_REL_TOL,
};
