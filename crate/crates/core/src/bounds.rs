//! Solution envelopes and decay certificates.
//!
//! Every envelope is sampled on a [`TimeGrid`] and is linear in the size
//! of the initial state. Integrals over the grid use composite Simpson
//! quadrature on each interval.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::{eigen_envelope, WeightTrajectory};
use crate::matrix::{induced_norm2, weighted_vec_norm, SymMatrix};
use crate::ode::{transition_matrices, OdeOptions, SystemSpec, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Euclidean,
    /// `‖x(t)‖_{H(t)}` with the weight moving along the grid.
    WeightedHt,
    /// `‖x(t)‖_H` for one fixed weight.
    WeightedFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Rugh,
    LemmaL,
    Main,
    MainWeighted,
    Readable,
}

/// Lower and upper curves for a solution norm.
#[derive(Debug, Clone)]
pub struct BoundEnvelope {
    pub grid: TimeGrid,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub norm_kind: NormKind,
    pub source: BoundSource,
}

impl BoundEnvelope {
    /// Largest relative excursion of `norms` outside `[lower, upper]`;
    /// non-positive when every sample is enclosed.
    pub fn worst_violation(&self, norms: &[f64]) -> f64 {
        assert_eq!(norms.len(), self.lower.len(), "norms must be sampled on the envelope grid");
        norms
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (lo - v).max(v - hi) / v.abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, norms: &[f64], rel_tol: f64) -> bool {
        self.worst_violation(norms) <= rel_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    FromHExtremes,
    DecayFit,
    Corollary,
    User,
}

/// Constants with `‖Φ(t, τ)‖ ≤ γ e^{-λ(t-τ)}` for `t ≥ τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub gamma: f64,
    pub lambda: f64,
    pub method: CertificateMethod,
}

impl Certificate {
    pub fn user(gamma: f64, lambda: f64) -> Result<Self> {
        if !(gamma > 0.0 && lambda > 0.0 && gamma.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "certificate needs finite gamma > 0 and lambda > 0, got ({gamma}, {lambda})"
            )));
        }
        Ok(Certificate {
            gamma,
            lambda,
            method: CertificateMethod::User,
        })
    }

    pub fn envelope(&self, dt: f64) -> f64 {
        self.gamma * (-self.lambda * dt).exp()
    }
}

/// Outcome of the log-measure test
/// `∫_τ^t λ_max[Aᵀ + A] ds ≤ γ̃ - λ̃ (t - τ)` over grid pairs `t ≥ τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryCriterion {
    pub gamma_tilde: f64,
    pub lambda_tilde: f64,
    pub satisfied: bool,
    pub worst_margin: f64,
    /// `(e^{γ̃/2}, λ̃/2)` when satisfied.
    pub certificate: Option<Certificate>,
}

/// `coeff · ‖x0‖ · e^{-rate (t - t0)}` on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadableEstimate {
    pub lower_coeff: f64,
    pub lower_rate: f64,
    pub upper_coeff: f64,
    pub upper_rate: f64,
}

/// `1/(2L) ≤ inf λ_min[H]` and `sup λ_max[H] ≤ γ²/(2λ) + tail`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub inf_lmin: f64,
    pub sup_lmax: f64,
    pub upper: f64,
    pub holds: bool,
}

fn check_x0_norm(x0_norm: f64) -> Result<()> {
    if !(x0_norm >= 0.0) || !x0_norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial norm must be finite and non-negative, got {x0_norm}"
        )));
    }
    Ok(())
}

/// Running integral from the first sample, Simpson on every interval with
/// the given node and midpoint values.
fn cumulative_simpson(samples: &[f64], nodes: &[f64], mids: &[f64]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(samples.len());
    acc.push(0.0);
    let mut s = 0.0;
    for k in 0..samples.len() - 1 {
        let h = samples[k + 1] - samples[k];
        s += h * (nodes[k] + 4.0 * mids[k] + nodes[k + 1]) / 6.0;
        acc.push(s);
    }
    acc
}

/// Extreme eigenvalues of `Aᵀ(t) + A(t)`.
fn symmetric_part_extremes(spec: &SystemSpec, t: f64) -> Result<(f64, f64)> {
    spec.eval_a(t)?.symmetric_sum().extreme_eigenvalues()
}

/// Envelope from the extreme eigenvalues of `Aᵀ + A`:
/// `‖x0‖ e^{½∫λ_min} ≤ ‖x(t)‖ ≤ ‖x0‖ e^{½∫λ_max}`.
pub fn rugh_bounds(spec: &SystemSpec, x0_norm: f64, grid: &TimeGrid) -> Result<BoundEnvelope> {
    check_x0_norm(x0_norm)?;
    let samples = grid.samples();
    let nodes: Vec<(f64, f64)> = samples.iter().map(|t| symmetric_part_extremes(spec, *t)).collect::<Result<_>>()?;
    let mids: Vec<(f64, f64)> = grid
        .midpoints()
        .iter()
        .map(|t| symmetric_part_extremes(spec, *t))
        .collect::<Result<_>>()?;
    let split = |v: &[(f64, f64)]| -> (Vec<f64>, Vec<f64>) { v.iter().copied().unzip() };
    let (node_lo, node_hi) = split(&nodes);
    let (mid_lo, mid_hi) = split(&mids);
    let int_lo = cumulative_simpson(samples, &node_lo, &mid_lo);
    let int_hi = cumulative_simpson(samples, &node_hi, &mid_hi);
    Ok(BoundEnvelope {
        grid: grid.clone(),
        lower: int_lo.iter().map(|i| x0_norm * (0.5 * i).exp()).collect(),
        upper: int_hi.iter().map(|i| x0_norm * (0.5 * i).exp()).collect(),
        norm_kind: NormKind::Euclidean,
        source: BoundSource::Rugh,
    })
}

/// `sup ‖A(t)‖` over grid samples and interval midpoints.
pub fn sup_induced_norm(spec: &SystemSpec, grid: &TimeGrid) -> Result<f64> {
    let mut sup = 0.0f64;
    for t in grid.samples().iter().chain(&grid.midpoints()) {
        sup = sup.max(induced_norm2(&spec.eval_a(*t)?)?);
    }
    Ok(sup)
}

/// `‖x0‖ e^{-L(t-t0)} ≤ ‖x(t)‖ ≤ ‖x0‖ e^{L(t-t0)}` for `L ≥ sup ‖A(t)‖`.
pub fn lemma_l_bounds(x0_norm: f64, grid: &TimeGrid, l: f64) -> Result<BoundEnvelope> {
    check_x0_norm(x0_norm)?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("L must be finite and positive, got {l}")));
    }
    let t0 = grid.t0();
    let samples = grid.samples();
    Ok(BoundEnvelope {
        grid: grid.clone(),
        lower: samples.iter().map(|t| x0_norm * (-l * (t - t0)).exp()).collect(),
        upper: samples.iter().map(|t| x0_norm * (l * (t - t0)).exp()).collect(),
        norm_kind: NormKind::Euclidean,
        source: BoundSource::LemmaL,
    })
}

/// Running integrals `(∫ dτ/λ_min[H], ∫ dτ/λ_max[H])` from the first
/// sample; each midpoint eigenvalue is the mean of its neighbours.
pub fn inverse_eigen_integrals(w: &WeightTrajectory) -> (Vec<f64>, Vec<f64>) {
    let samples = w.grid.samples();
    let run = |lam: &[f64]| {
        let nodes: Vec<f64> = lam.iter().map(|v| 1.0 / v).collect();
        let mids: Vec<f64> = lam.windows(2).map(|p| 2.0 / (p[0] + p[1])).collect();
        cumulative_simpson(samples, &nodes, &mids)
    };
    (run(&w.lmin), run(&w.lmax))
}

/// Euclidean envelope from the weight `H`:
///
/// ```text
/// √(λ_min[H(t0)] / λ_max[H(t)]) ‖x0‖ e^{-½∫dτ/λ_min}
///     ≤ ‖x(t)‖ ≤ √(λ_max[H(t0)] / λ_min[H(t)]) ‖x0‖ e^{-½∫dτ/λ_max}
/// ```
pub fn main_bounds_euclidean(w: &WeightTrajectory, x0_norm: f64) -> Result<BoundEnvelope> {
    check_x0_norm(x0_norm)?;
    let (i_min, i_max) = inverse_eigen_integrals(w);
    let (lmin0, lmax0) = (w.lmin[0], w.lmax[0]);
    let lower = (0..w.grid.len())
        .map(|k| (lmin0 / w.lmax[k]).sqrt() * x0_norm * (-0.5 * i_min[k]).exp())
        .collect();
    let upper = (0..w.grid.len())
        .map(|k| (lmax0 / w.lmin[k]).sqrt() * x0_norm * (-0.5 * i_max[k]).exp())
        .collect();
    Ok(BoundEnvelope {
        grid: w.grid.clone(),
        lower,
        upper,
        norm_kind: NormKind::Euclidean,
        source: BoundSource::Main,
    })
}

/// Envelope for `‖x(t)‖_{H(t)}`:
/// `‖x0‖_{H(t0)} e^{-½∫dτ/λ_min} ≤ ‖x(t)‖_{H(t)} ≤ ‖x0‖_{H(t0)} e^{-½∫dτ/λ_max}`.
pub fn main_bounds_weighted(w: &WeightTrajectory, x0: &[f64]) -> Result<BoundEnvelope> {
    if x0.len() != w.n() {
        return Err(Error::Dimension {
            expected: w.n(),
            got: x0.len(),
        });
    }
    let start = weighted_vec_norm(x0, &w.h_samples[0])?;
    let (i_min, i_max) = inverse_eigen_integrals(w);
    Ok(BoundEnvelope {
        grid: w.grid.clone(),
        lower: i_min.iter().map(|i| start * (-0.5 * i).exp()).collect(),
        upper: i_max.iter().map(|i| start * (-0.5 * i).exp()).collect(),
        norm_kind: if w.horizon.is_none() {
            NormKind::WeightedFixed
        } else {
            NormKind::WeightedHt
        },
        source: BoundSource::MainWeighted,
    })
}

/// Grid-uniform version of [`main_bounds_euclidean`] with constant
/// coefficients and exponential rates.
pub fn readable_bounds(w: &WeightTrajectory, x0_norm: f64) -> Result<(ReadableEstimate, BoundEnvelope)> {
    check_x0_norm(x0_norm)?;
    let env = eigen_envelope(w);
    let est = ReadableEstimate {
        lower_coeff: (env.inf_lmin / env.sup_lmax).sqrt(),
        lower_rate: 1.0 / (2.0 * env.inf_lmin),
        upper_coeff: (env.sup_lmax / env.inf_lmin).sqrt(),
        upper_rate: 1.0 / (2.0 * env.sup_lmax),
    };
    let t0 = w.grid.t0();
    let samples = w.grid.samples();
    let envelope = BoundEnvelope {
        grid: w.grid.clone(),
        lower: samples
            .iter()
            .map(|t| est.lower_coeff * x0_norm * (-est.lower_rate * (t - t0)).exp())
            .collect(),
        upper: samples
            .iter()
            .map(|t| est.upper_coeff * x0_norm * (-est.upper_rate * (t - t0)).exp())
            .collect(),
        norm_kind: NormKind::Euclidean,
        source: BoundSource::Readable,
    };
    Ok((est, envelope))
}

/// Bracket `(λ_min[H1]/λ_max[H2], λ_max[H1]/λ_min[H2])` for
/// `‖x‖²_{H1} / ‖x‖²_{H2}`.
pub fn norm_conversion_bounds(h1: &SymMatrix, h2: &SymMatrix) -> Result<(f64, f64)> {
    let d1 = h1.require_pd()?;
    let d2 = h2.require_pd()?;
    Ok((d1.min() / d2.max(), d1.max() / d2.min()))
}

/// Log-measure test on all grid pairs, in one pass over the grid.
pub fn corollary_check(
    spec: &SystemSpec,
    grid: &TimeGrid,
    gamma_tilde: f64,
    lambda_tilde: f64,
) -> Result<CorollaryCriterion> {
    if !(lambda_tilde > 0.0) || !lambda_tilde.is_finite() || !gamma_tilde.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "corollary needs finite gamma_tilde and lambda_tilde > 0, got ({gamma_tilde}, {lambda_tilde})"
        )));
    }
    let samples = grid.samples();
    let lam_max = |t: f64| symmetric_part_extremes(spec, t).map(|(_, hi)| hi + lambda_tilde);
    // S_j = ∫_{t0}^{t_j} (λ_max + λ̃); the worst pair ending at j starts at the smallest earlier S_i
    let mut s = 0.0f64;
    let mut s_min = 0.0f64;
    let mut worst = gamma_tilde;
    let mut fa = lam_max(samples[0])?;
    for k in 0..samples.len() - 1 {
        let (a, b) = (samples[k], samples[k + 1]);
        let fm = lam_max(0.5 * (a + b))?;
        let fb = lam_max(b)?;
        s += (b - a) * (fa + 4.0 * fm + fb) / 6.0;
        worst = worst.min(gamma_tilde - s + s_min);
        s_min = s_min.min(s);
        fa = fb;
    }
    let satisfied = worst >= 0.0;
    Ok(CorollaryCriterion {
        gamma_tilde,
        lambda_tilde,
        satisfied,
        worst_margin: worst,
        certificate: satisfied.then(|| Certificate {
            gamma: (gamma_tilde / 2.0).exp(),
            lambda: lambda_tilde / 2.0,
            method: CertificateMethod::Corollary,
        }),
    })
}

/// `γ = √(sup λ_max / inf λ_min)`, `λ = 1 / (2 sup λ_max)`.
pub fn certificate_from_h(w: &WeightTrajectory) -> Certificate {
    let env = eigen_envelope(w);
    Certificate {
        gamma: (env.sup_lmax / env.inf_lmin).sqrt(),
        lambda: 1.0 / (2.0 * env.sup_lmax),
        method: CertificateMethod::FromHExtremes,
    }
}

pub fn sandwich(w: &WeightTrajectory, l: f64, cert: &Certificate) -> Sandwich {
    let env = eigen_envelope(w);
    let lower = 1.0 / (2.0 * l);
    let upper = cert.gamma * cert.gamma / (2.0 * cert.lambda) + w.tail_bound;
    Sandwich {
        lower,
        inf_lmin: env.inf_lmin,
        sup_lmax: env.sup_lmax,
        upper,
        holds: lower <= env.inf_lmin && env.sup_lmax <= upper,
    }
}

/// Number of grid points per axis used by [`verify_certificate`].
pub const VERIFY_POINTS: usize = 20;

/// `max ‖Φ(t, τ)‖ - γ e^{-λ(t-τ)}` over pairs `t ≥ τ` from `times`.
pub fn verify_certificate_at(spec: &SystemSpec, cert: &Certificate, times: &[f64], opts: &OdeOptions) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for (i, &tau) in times.iter().enumerate() {
        let later = &times[i..];
        for (t, phi) in later.iter().zip(transition_matrices(spec, tau, later, opts)?) {
            worst = worst.max(induced_norm2(&phi)? - cert.envelope(t - tau));
        }
    }
    Ok(worst)
}

/// [`verify_certificate_at`] on [`VERIFY_POINTS`] evenly spread grid samples.
pub fn verify_certificate(spec: &SystemSpec, cert: &Certificate, grid: &TimeGrid, opts: &OdeOptions) -> Result<f64> {
    let samples = grid.samples();
    let m = VERIFY_POINTS.min(samples.len());
    let times: Vec<f64> = if m < 2 {
        samples.to_vec()
    } else {
        (0..m).map(|i| samples[i * (samples.len() - 1) / (m - 1)]).collect()
    };
    verify_certificate_at(spec, cert, &times, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::{gramian_lti, gramian_ltv};
    use crate::matrix::Matrix;
    use crate::ode::solve_ivp;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rotating() -> SystemSpec {
        let s10 = 10f64.sqrt();
        SystemSpec::constant(Matrix::from_rows(&[[0.0, s10], [-s10, -2.0]]).unwrap())
    }

    fn ltv_example() -> SystemSpec {
        SystemSpec::from_expressions(&[["-1", "exp(-t)"], ["0", "-3"]]).unwrap()
    }

    #[test]
    fn rugh_rotating_example_is_exact() {
        let grid = TimeGrid::uniform(0.0, 4.0, 41).unwrap();
        let env = rugh_bounds(&rotating(), 5.0, &grid).unwrap();
        for (k, t) in grid.samples().iter().enumerate() {
            assert_abs_diff_eq!(env.lower[k], 5.0 * (-2.0 * t).exp(), epsilon = 1e-14);
            assert_eq!(env.upper[k], 5.0);
        }
    }

    #[test]
    fn rugh_negative_identity_collapses() {
        let grid = TimeGrid::uniform(0.0, 3.0, 31).unwrap();
        let env = rugh_bounds(&SystemSpec::constant(Matrix::identity(2).scale(-1.0)), 2.0, &grid).unwrap();
        for (k, t) in grid.samples().iter().enumerate() {
            assert_abs_diff_eq!(env.lower[k], 2.0 * (-t).exp(), epsilon = 1e-14);
            assert_eq!(env.lower[k], env.upper[k]);
        }
    }

    #[test]
    fn lemma_l_examples() {
        let grid = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
        let env = lemma_l_bounds(1.0, &grid, 1.0).unwrap();
        assert_eq!(env.lower[0], 1.0);
        assert_eq!(env.upper[0], 1.0);
        assert!(lemma_l_bounds(1.0, &grid, 0.0).is_err());

        let l = sup_induced_norm(&ltv_example(), &grid).unwrap();
        assert_abs_diff_eq!(l, 3.1796, epsilon = 1e-4);
    }

    #[test]
    fn rugh_is_tighter_than_lemma_l() {
        let spec = ltv_example();
        let grid = TimeGrid::uniform(0.0, 5.0, 101).unwrap();
        let l = sup_induced_norm(&spec, &grid).unwrap();
        let r = rugh_bounds(&spec, 1.0, &grid).unwrap();
        let m = lemma_l_bounds(1.0, &grid, l).unwrap();
        for k in 0..grid.len() {
            assert!(r.lower[k] >= m.lower[k] && r.upper[k] <= m.upper[k]);
        }
    }

    #[test]
    fn constant_weight_collapses_prefactors() {
        let grid = TimeGrid::uniform(0.0, 3.0, 31).unwrap();
        let w = WeightTrajectory::constant(grid.clone(), SymMatrix::diag(&[0.25, 0.25])).unwrap();
        let env = main_bounds_euclidean(&w, 3.0).unwrap();
        for (k, t) in grid.samples().iter().enumerate() {
            assert_abs_diff_eq!(env.lower[k], 3.0 * (-2.0 * t).exp(), epsilon = 1e-13);
            assert_abs_diff_eq!(env.upper[k], env.lower[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn weighted_rotating_example() {
        let spec = rotating();
        let h = gramian_lti(&spec.as_constant().unwrap()).unwrap();
        let grid = TimeGrid::uniform(0.0, 3.0, 61).unwrap();
        let w = WeightTrajectory::constant(grid.clone(), h.clone()).unwrap();
        let x0 = [-4.0, 3.0];
        let env = main_bounds_weighted(&w, &x0).unwrap();
        let start = weighted_vec_norm(&x0, &h).unwrap();
        let s11 = 11f64.sqrt();
        for (k, t) in grid.samples().iter().enumerate() {
            assert_abs_diff_eq!(env.lower[k], start * (-10.0 * t / (11.0 - s11)).exp(), epsilon = 1e-12);
            assert_abs_diff_eq!(env.upper[k], start * (-10.0 * t / (11.0 + s11)).exp(), epsilon = 1e-12);
        }
        assert_eq!(env.lower[0], env.upper[0]);
        let traj = solve_ivp(&spec, &x0, &grid, &OdeOptions::with_tolerances(1e-11, 1e-14)).unwrap();
        assert!(env.contains(&w.weighted_norms(&traj).unwrap(), 1e-8));
    }

    /// `ẋ = -x / (1 + t)` has `x(t) = x0 / (1 + t)`, and its weight is
    /// `∫_t^∞ ((1+t)/(1+τ))² dτ = 1 + t`, so both sides of the envelope
    /// coincide with the solution.
    #[test]
    fn scalar_time_varying_envelope_is_exact() {
        let grid = TimeGrid::uniform(0.0, 4.0, 401).unwrap();
        let samples = grid.samples().iter().map(|t| SymMatrix::diag(&[1.0 + t])).collect();
        let w = WeightTrajectory::from_samples(grid.clone(), samples, None, 0.0).unwrap();
        let env = main_bounds_euclidean(&w, 2.0).unwrap();
        for (k, t) in grid.samples().iter().enumerate() {
            let exact = 2.0 / (1.0 + t);
            assert_abs_diff_eq!(env.lower[k], exact, epsilon = 1e-7);
            assert_abs_diff_eq!(env.upper[k], exact, epsilon = 1e-7);
        }
    }

    #[test]
    fn ltv_envelopes_contain_solution() {
        let spec = ltv_example();
        let grid = TimeGrid::uniform(0.0, 5.0, 501).unwrap();
        let opts = OdeOptions::with_tolerances(1e-11, 1e-14);
        let w = gramian_ltv(&spec, &grid, 25.0, &opts).unwrap();
        let x0 = [2.0, -1.0];
        let traj = solve_ivp(&spec, &x0, &grid, &opts).unwrap();
        let x0n = crate::ode::euclidean_norm(&x0);
        let norms = traj.norms_i();
        assert!(main_bounds_euclidean(&w, x0n).unwrap().contains(&norms, 1e-6));
        assert!(readable_bounds(&w, x0n).unwrap().1.contains(&norms, 1e-6));
        assert!(rugh_bounds(&spec, x0n, &grid).unwrap().contains(&norms, 1e-6));
        let wn = w.weighted_norms(&traj).unwrap();
        assert!(main_bounds_weighted(&w, &x0).unwrap().contains(&wn, 1e-6));
    }

    #[test]
    fn readable_ltv_constants() {
        let grid = TimeGrid::uniform(0.0, 5.0, 101).unwrap();
        let w = gramian_ltv(&ltv_example(), &grid, 25.0, &OdeOptions::default()).unwrap();
        let (est, _) = readable_bounds(&w, 1.0).unwrap();
        assert_abs_diff_eq!(est.lower_coeff, 0.5531, epsilon = 1e-3);
        assert_abs_diff_eq!(est.upper_coeff, 1.8075, epsilon = 1e-3);
        assert_abs_diff_eq!(est.lower_rate, 3.0845, epsilon = 1e-3);
        assert_abs_diff_eq!(est.upper_rate, 0.9441, epsilon = 1e-3);
    }

    #[test]
    fn norm_conversion_examples() {
        let (lo, hi) = norm_conversion_bounds(&SymMatrix::diag(&[4.0, 1.0]), &SymMatrix::identity(2)).unwrap();
        assert_eq!((lo, hi), (1.0, 4.0));
        let h = SymMatrix::new(Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap()).unwrap();
        let (lo, hi) = norm_conversion_bounds(&h, &h).unwrap();
        assert!(lo < 1.0 && hi > 1.0);
        assert!(norm_conversion_bounds(&SymMatrix::diag(&[1.0, -1.0]), &h).is_err());
    }

    #[test]
    fn corollary_examples() {
        let grid = TimeGrid::uniform(0.0, 10.0, 101).unwrap();
        let neg_id = SystemSpec::constant(Matrix::identity(2).scale(-1.0));
        let c = corollary_check(&neg_id, &grid, 0.0, 2.0).unwrap();
        assert!(c.satisfied);
        assert_eq!(c.worst_margin, 0.0);
        let cert = c.certificate.unwrap();
        assert_eq!((cert.gamma, cert.lambda), (1.0, 1.0));

        let diag = SystemSpec::constant(Matrix::diag(&[-1.0, -3.0]));
        assert!(corollary_check(&diag, &grid, 0.0, 2.0).unwrap().satisfied);

        let c = corollary_check(&rotating(), &grid, 1.0, 1.0).unwrap();
        assert!(!c.satisfied);
        assert_abs_diff_eq!(c.worst_margin, 1.0 - 10.0, epsilon = 1e-12);
        assert!(c.certificate.is_none());
        assert!(corollary_check(&rotating(), &grid, 1.0, 0.0).is_err());
    }

    /// Brute-force margin over all grid pairs.
    fn corollary_pairs(spec: &SystemSpec, grid: &TimeGrid, gt: f64, lt: f64) -> f64 {
        let s = grid.samples();
        let f = |t: f64| spec.eval_a(t).unwrap().symmetric_sum().extreme_eigenvalues().unwrap().1;
        let mut running = vec![0.0];
        for k in 0..s.len() - 1 {
            let (a, b) = (s[k], s[k + 1]);
            let v = (b - a) * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)) / 6.0;
            running.push(running[k] + v);
        }
        let mut worst = f64::INFINITY;
        for i in 0..s.len() {
            for j in i..s.len() {
                worst = worst.min(gt - lt * (s[j] - s[i]) - (running[j] - running[i]));
            }
        }
        worst
    }

    #[test]
    fn corollary_matches_pairwise_sweep() {
        let spec = SystemSpec::from_expressions(&[["-1 + 2*sin(t)", "1"], ["0", "-2"]]).unwrap();
        let grid = TimeGrid::uniform(0.0, 12.0, 241).unwrap();
        for (gt, lt) in [(0.5, 0.1), (3.0, 0.5), (10.0, 0.05)] {
            let fast = corollary_check(&spec, &grid, gt, lt).unwrap().worst_margin;
            assert_abs_diff_eq!(fast, corollary_pairs(&spec, &grid, gt, lt), epsilon = 1e-10);
        }
    }

    #[test]
    fn certificate_examples() {
        let grid = TimeGrid::uniform(0.0, 1.0, 3).unwrap();
        let c = certificate_from_h(&WeightTrajectory::constant(grid.clone(), SymMatrix::identity(2)).unwrap());
        assert_eq!((c.gamma, c.lambda), (1.0, 0.5));

        let h = gramian_lti(&rotating().as_constant().unwrap()).unwrap();
        let c = certificate_from_h(&WeightTrajectory::constant(grid, h).unwrap());
        let s11 = 11f64.sqrt();
        let (lo, hi) = ((11.0 - s11) / 20.0, (11.0 + s11) / 20.0);
        assert_abs_diff_eq!(c.gamma, (hi / lo).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.lambda, 1.0 / (2.0 * hi), epsilon = 1e-12);
        assert_abs_diff_eq!(c.gamma, 1.36495, epsilon = 1e-3);
        assert_abs_diff_eq!(c.lambda, 0.698490, epsilon = 1e-5);
    }

    #[test]
    fn ltv_certificate_verifies() {
        let spec = ltv_example();
        let grid = TimeGrid::uniform(0.0, 5.0, 101).unwrap();
        let opts = OdeOptions::default();
        let w = gramian_ltv(&spec, &grid, 25.0, &opts).unwrap();
        let c = certificate_from_h(&w);
        assert_abs_diff_eq!(c.gamma, 1.8075, epsilon = 1e-3);
        assert_abs_diff_eq!(c.lambda, 0.9441, epsilon = 1e-3);
        assert!(verify_certificate(&spec, &c, &grid, &opts).unwrap() <= 1e-6 * c.gamma);

        let weaker = Certificate { gamma: 2.0 * c.gamma, ..c };
        assert!(verify_certificate(&spec, &weaker, &grid, &opts).unwrap() <= 0.0);
        let stronger = Certificate { lambda: 10.0 * c.lambda, ..c };
        assert!(verify_certificate(&spec, &stronger, &grid, &opts).unwrap() > 0.0);

        let s = sandwich(&w, sup_induced_norm(&spec, &grid).unwrap(), &c);
        assert!(s.holds, "{s:?}");
        assert_abs_diff_eq!(s.lower, 0.15725, epsilon = 1e-5);
    }

    #[test]
    fn zero_initial_state_gives_zero_envelopes() {
        let grid = TimeGrid::uniform(0.0, 1.0, 11).unwrap();
        let r = rugh_bounds(&rotating(), 0.0, &grid).unwrap();
        assert!(r.lower.iter().chain(&r.upper).all(|v| *v == 0.0));
        assert!(rugh_bounds(&rotating(), -1.0, &grid).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn envelopes_are_homogeneous(c in 0.01f64..100.0) {
            let spec = ltv_example();
            let grid = TimeGrid::uniform(0.0, 2.0, 21).unwrap();
            let w = WeightTrajectory::from_samples(
                grid.clone(),
                grid.samples().iter().map(|t| {
                    let e = (-t).exp();
                    SymMatrix::new(Matrix::from_rows(&[[0.5, e / 10.0], [e / 10.0, e * e / 40.0 + 1.0 / 6.0]]).unwrap()).unwrap()
                }).collect(),
                None,
                0.0,
            ).unwrap();
            let x0 = [0.7, -1.3];
            let xc = [0.7 * c, -1.3 * c];
            let pairs = [
                (rugh_bounds(&spec, 1.0, &grid).unwrap(), rugh_bounds(&spec, c, &grid).unwrap()),
                (lemma_l_bounds(1.0, &grid, 2.0).unwrap(), lemma_l_bounds(c, &grid, 2.0).unwrap()),
                (main_bounds_euclidean(&w, 1.0).unwrap(), main_bounds_euclidean(&w, c).unwrap()),
                (main_bounds_weighted(&w, &x0).unwrap(), main_bounds_weighted(&w, &xc).unwrap()),
            ];
            for (one, scaled) in &pairs {
                for k in 0..grid.len() {
                    prop_assert!((scaled.lower[k] - c * one.lower[k]).abs() <= 1e-13 * scaled.lower[k].max(1e-300));
                    prop_assert!((scaled.upper[k] - c * one.upper[k]).abs() <= 1e-13 * scaled.upper[k].max(1e-300));
                }
            }
        }

        #[test]
        fn conversion_bracket_holds(
            a in prop::collection::vec(-1.0f64..1.0, 9),
            b in prop::collection::vec(-1.0f64..1.0, 9),
            xs in prop::collection::vec(-1.0f64..1.0, 3 * 50),
        ) {
            let pd = |v: &[f64]| {
                let m = Matrix::from_row_major(3, v.to_vec()).unwrap();
                SymMatrix::symmetrize(&(&m.transpose() * &m) + &Matrix::identity(3).scale(0.1))
            };
            let (h1, h2) = (pd(&a), pd(&b));
            let (lo, hi) = norm_conversion_bounds(&h1, &h2).unwrap();
            for x in xs.chunks(3) {
                let q2 = h2.quadratic_form(x);
                if q2 < 1e-12 { continue; }
                let r = h1.quadratic_form(x) / q2;
                prop_assert!(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12));
            }
        }
    }
}
