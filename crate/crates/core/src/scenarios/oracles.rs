//! Closed-form references for the built-in systems.
//!
//! Nothing here calls into the numerical pipeline; values are plain rows
//! so tests compare against independent arithmetic.

/// `e^{At}` for `A = [[0, √10], [-√10, -2]]` (eigenvalues `-1 ± 3i`).
pub fn rotating_expm(t: f64) -> [[f64; 2]; 2] {
    let s10 = 10f64.sqrt();
    let (c, s) = ((3.0 * t).cos(), (3.0 * t).sin());
    let f = (-t).exp() / 3.0;
    [[f * (3.0 * c + s), f * s10 * s], [-f * s10 * s, f * (3.0 * c - s)]]
}

/// Constant weight of the rotating system.
pub fn rotating_weight() -> [[f64; 2]; 2] {
    let off = 10f64.sqrt() / 20.0;
    [[0.6, off], [off, 0.5]]
}

/// `(λ_min, λ_max)` of [`rotating_weight`]: `11/20 ∓ √11/20`.
pub fn rotating_weight_eigenvalues() -> (f64, f64) {
    let r = 11f64.sqrt() / 20.0;
    (0.55 - r, 0.55 + r)
}

/// Fundamental matrix of `A(t) = [[-1, e^{-t}], [0, -3]]` with `X(0) = I`.
pub fn ltv_fundamental(t: f64) -> [[f64; 2]; 2] {
    [[(-t).exp(), (-t).exp() / 3.0 - (-4.0 * t).exp() / 3.0], [0.0, (-3.0 * t).exp()]]
}

/// `Φ(t, τ) = X(t) X⁻¹(τ)`.
pub fn ltv_transition(t: f64, tau: f64) -> [[f64; 2]; 2] {
    [
        [(tau - t).exp(), (-t).exp() / 3.0 - (3.0 * tau - 4.0 * t).exp() / 3.0],
        [0.0, (3.0 * tau - 3.0 * t).exp()],
    ]
}

pub fn ltv_weight(t: f64) -> [[f64; 2]; 2] {
    let e = (-t).exp();
    [[0.5, e / 10.0], [e / 10.0, e * e / 40.0 + 1.0 / 6.0]]
}

/// `(λ_min, λ_max)` of [`ltv_weight`].
pub fn ltv_weight_eigenvalues(t: f64) -> (f64, f64) {
    let e2 = (-2.0 * t).exp();
    let p2 = (2.0 * t).exp();
    let root = (336.0 * p2 + 1600.0 * p2 * p2 + 9.0).sqrt();
    (e2 / 80.0 - e2 / 240.0 * root + 1.0 / 3.0, e2 / 80.0 + e2 / 240.0 * root + 1.0 / 3.0)
}

fn rho(t: f64) -> f64 {
    let s6 = 6f64.sqrt();
    let e = 100.0 * (2.0 * t).exp();
    ((e + 3.0 * s6 + 10.5) / (e - 3.0 * s6 + 10.5)).sqrt()
}

/// `(-½∫_0^t dτ/λ_min[H], -½∫_0^t dτ/λ_max[H])` from the antiderivatives
/// in `ρ(t)`, with the printed integration constants.
pub fn ltv_half_exponents(t: f64) -> (f64, f64) {
    let s6 = 6f64.sqrt();
    let r = rho(t);
    let lo = 1.5 * (r - 1.0).ln() - 2.5 * (2.0 * s6 / 5.0 - r + 1.4).ln()
        + 0.5 * ((r + 1.0) * (2.0 * s6 - r + 5.0)).ln()
        + 3.2375954052;
    let hi = 1.5 * (r + 1.0).ln() - 2.5 * (2.0 * s6 / 5.0 + r + 1.4).ln()
        + 0.5 * ((r - 1.0) * (2.0 * s6 + r + 5.0)).ln()
        + 2.1447615497;
    (lo, hi)
}

/// `‖A(t)‖` for the time-varying system, from the eigenvalues of `AᵀA`.
pub fn ltv_induced_norm(t: f64) -> f64 {
    let e2 = (-2.0 * t).exp();
    let p2 = (2.0 * t).exp();
    let root = ((4.0 * p2 + 1.0) * (16.0 * p2 + 1.0)).sqrt();
    (e2 / 2.0 + e2 / 2.0 * root + 5.0).sqrt()
}
