//! Smooth transition profiles built from `exp(-1/t)`.

/// The `C^∞` step: 0 for `u <= 0`, 1 for `u >= 1`, and
/// `e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})` in between.
///
/// Satisfies `smooth_step(u) + smooth_step(1 - u) == 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Radial cutoff equal to 1 on `[0, 1]` and 0 on `[2, ∞)`.
pub fn radial_cutoff(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

/// One-dimensional plateau: 1 on `[lo, hi]`, 0 outside `(lo - transition, hi + transition)`.
pub fn plateau(t: f64, lo: f64, hi: f64, transition: f64) -> f64 {
    if t < lo {
        smooth_step((t - (lo - transition)) / transition)
    } else if t > hi {
        smooth_step(((hi + transition) - t) / transition)
    } else {
        1.0
    }
}
