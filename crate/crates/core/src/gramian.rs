//! The weight matrix `H(t) = ∫_t^∞ Φᵀ(τ, t) Φ(τ, t) dτ`.
//!
//! For constant `A` this is the solution of the algebraic Lyapunov
//! equation `AᵀH + HA = -I`. For time-varying `A` it is obtained from one
//! backward sweep of `Ḣ = -AᵀH - HA - I` started from `H(T) = 0` at a
//! finite horizon `T`, which yields `∫_t^T ΦᵀΦ dτ`: an under-approximation
//! of the true weight whose defect is reported as `tail_bound`.

use crate::bounds::{certificate_from_h, Certificate, CertificateMethod};
use crate::error::{Error, Result};
use crate::matrix::{induced_norm2, lu_solve, pd_tol, Matrix, SymMatrix};
use crate::ode::{derivative_weights, integrate, transition_matrices, OdeOptions, SystemSpec, TimeGrid, Trajectory};

/// `H(t)` sampled on a grid together with its extreme eigenvalues.
#[derive(Debug, Clone)]
pub struct WeightTrajectory {
    pub grid: TimeGrid,
    pub h_samples: Vec<SymMatrix>,
    pub lmin: Vec<f64>,
    pub lmax: Vec<f64>,
    /// Truncation horizon of the backward sweep; `None` for the exact
    /// constant-coefficient weight.
    pub horizon: Option<f64>,
    /// Estimated upper bound on `‖H_true(t) - H(t)‖` over the grid.
    pub tail_bound: f64,
}

impl WeightTrajectory {
    /// Validates every sample as positive definite and records its
    /// extreme eigenvalues.
    pub fn from_samples(
        grid: TimeGrid,
        h_samples: Vec<SymMatrix>,
        horizon: Option<f64>,
        tail_bound: f64,
    ) -> Result<Self> {
        if h_samples.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: h_samples.len(),
            });
        }
        let mut lmin = Vec::with_capacity(grid.len());
        let mut lmax = Vec::with_capacity(grid.len());
        for (t, h) in grid.samples().iter().zip(&h_samples) {
            let d = h.eig()?;
            if d.min() <= pd_tol(h.as_matrix().trace()) {
                return Err(Error::NotUas(format!(
                    "weight matrix lost positive definiteness at t = {t} (smallest eigenvalue {:.3e})",
                    d.min()
                )));
            }
            lmin.push(d.min());
            lmax.push(d.max());
        }
        Ok(WeightTrajectory {
            grid,
            h_samples,
            lmin,
            lmax,
            horizon,
            tail_bound,
        })
    }

    /// The same weight `h` at every sample.
    pub fn constant(grid: TimeGrid, h: SymMatrix) -> Result<Self> {
        let samples = vec![h; grid.len()];
        Self::from_samples(grid, samples, None, 0.0)
    }

    pub fn n(&self) -> usize {
        self.h_samples[0].n()
    }

    /// `‖x(t_k)‖_{H(t_k)}` along a trajectory sampled on the same grid.
    pub fn weighted_norms(&self, traj: &Trajectory) -> Result<Vec<f64>> {
        traj.norms_h(&self.h_samples)
    }
}

/// Per-sample extreme eigenvalues and their grid extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEnvelope {
    pub lmin: Vec<f64>,
    pub lmax: Vec<f64>,
    pub inf_lmin: f64,
    pub sup_lmax: f64,
}

pub fn eigen_envelope(w: &WeightTrajectory) -> EigenEnvelope {
    EigenEnvelope {
        lmin: w.lmin.clone(),
        lmax: w.lmax.clone(),
        inf_lmin: w.lmin.iter().copied().fold(f64::INFINITY, f64::min),
        sup_lmax: w.lmax.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // packed upper triangle, row by row
    i * n - i * (i + 1) / 2 + j
}

/// Solves `AᵀH + HA = -I` for symmetric `H`; the solution is positive
/// definite exactly when `A` is Hurwitz.
pub fn gramian_lti(a: &Matrix) -> Result<SymMatrix> {
    let n = a.n();
    let m = n * (n + 1) / 2;
    let mut coeffs = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..n {
        for j in i..n {
            let row = sym_index(n, i, j);
            // (AᵀH)_ij = Σ_k A_ki H_kj,  (HA)_ij = Σ_k H_ik A_kj
            for k in 0..n {
                coeffs[row * m + sym_index(n, k, j)] += a[(k, i)];
                coeffs[row * m + sym_index(n, i, k)] += a[(k, j)];
            }
            if i == j {
                rhs[row] = -1.0;
            }
        }
    }
    let sol = lu_solve(coeffs, m, rhs, 1).map_err(|e| match e {
        Error::Singular => Error::NotUas("Lyapunov equation is singular (A has eigenvalues λi + λj = 0)".into()),
        other => other,
    })?;
    let h = SymMatrix::symmetrize(Matrix::from_fn(n, |i, j| sol[sym_index(n, i, j)]));
    let d = h.eig()?;
    if d.min() <= pd_tol(h.as_matrix().trace()) {
        return Err(Error::NotUas(format!(
            "Lyapunov solution is not positive definite (smallest eigenvalue {:.3e}); A is not Hurwitz",
            d.min()
        )));
    }
    Ok(h)
}

/// `‖AᵀH + HA + I‖_F`.
pub fn algebraic_lyapunov_residual(a: &Matrix, h: &SymMatrix) -> f64 {
    let ath = &a.transpose() * h.as_matrix();
    let r = &(&ath + &ath.transpose()) + &Matrix::identity(a.n());
    r.frobenius_norm()
}

/// Backward sweep of `Ḣ = -AᵀH - HA - I` from `H(horizon) = 0`, sampled
/// on `grid`. Every sample must be positive definite.
pub fn gramian_ltv(spec: &SystemSpec, grid: &TimeGrid, horizon: f64, opts: &OdeOptions) -> Result<WeightTrajectory> {
    if !(horizon > grid.t_end()) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon ({horizon}) must be finite and exceed the grid end ({})",
            grid.t_end()
        )));
    }
    if grid.t0() < spec.t0() {
        return Err(Error::InvalidArgument(format!(
            "grid starts at {} before the system's t0 = {}",
            grid.t0(),
            spec.t0()
        )));
    }
    let n = spec.n();
    let outputs: Vec<f64> = grid.samples().iter().rev().copied().collect();
    let states = integrate(
        |t, y, dy| {
            let a = spec.eval_a(t)?;
            // G = AᵀH; dH/dt = -(G + Gᵀ) - I stays exactly symmetric
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += a[(k, i)] * y[k * n + j];
                    }
                    dy[i * n + j] = s;
                }
            }
            for i in 0..n {
                for j in i..n {
                    let v = -(dy[i * n + j] + dy[j * n + i]) - if i == j { 1.0 } else { 0.0 };
                    dy[i * n + j] = v;
                    dy[j * n + i] = v;
                }
            }
            Ok(())
        },
        horizon,
        &vec![0.0; n * n],
        &outputs,
        opts,
        |_, y| {
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 0.5 * (y[i * n + j] + y[j * n + i]);
                    y[i * n + j] = v;
                    y[j * n + i] = v;
                }
            }
        },
    )?;
    let h_samples: Vec<SymMatrix> = states
        .into_iter()
        .rev()
        .map(|y| Matrix::from_row_major(n, y).map(SymMatrix::symmetrize))
        .collect::<Result<_>>()?;

    let mut w = WeightTrajectory::from_samples(grid.clone(), h_samples, Some(horizon), 0.0)?;
    let cert = certificate_from_h(&w);
    w.tail_bound = tail_bound(&cert, horizon - grid.t_end());
    Ok(w)
}

/// `γ² e^{-2λ gap} / (2λ)`: the weight contributed by `∫_{t+gap}^∞` under
/// the decay certificate `(γ, λ)`.
pub fn tail_bound(cert: &Certificate, gap: f64) -> f64 {
    cert.gamma * cert.gamma * (-2.0 * cert.lambda * gap).exp() / (2.0 * cert.lambda)
}

/// Pilot estimate of the decay of `‖Φ(t, t_start)‖` over `[t_start, t_start + window]`.
///
/// The rate is the negated least-squares slope of `ln ‖Φ‖` over the second
/// half of the window; `γ` is the smallest constant making the fitted
/// exponential dominate every sampled norm. A non-positive rate is
/// reported as a non-UAS system.
pub fn decay_fit(spec: &SystemSpec, t_start: f64, window: f64, opts: &OdeOptions) -> Result<Certificate> {
    const SAMPLES: usize = 41;
    let times: Vec<f64> = (0..SAMPLES)
        .map(|k| t_start + window * k as f64 / (SAMPLES - 1) as f64)
        .collect();
    let phis = transition_matrices(spec, t_start, &times, opts)?;
    let norms: Vec<f64> = phis.iter().map(induced_norm2).collect::<Result<_>>()?;
    if norms.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::NotUas("transition matrix became singular or overflowed".into()));
    }

    let tail = &times[SAMPLES / 2..];
    let logs: Vec<f64> = norms[SAMPLES / 2..].iter().map(|v| v.ln()).collect();
    let mt = tail.iter().sum::<f64>() / tail.len() as f64;
    let ml = logs.iter().sum::<f64>() / logs.len() as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in tail.iter().zip(&logs) {
        sxy += (t - mt) * (l - ml);
        sxx += (t - mt) * (t - mt);
    }
    let lambda = -sxy / sxx;
    if !(lambda > 0.0) {
        return Err(Error::NotUas(format!(
            "no exponential decay of the transition matrix over [{t_start}, {}] (fitted rate {lambda:.3e})",
            t_start + window
        )));
    }
    let gamma = times
        .iter()
        .zip(&norms)
        .map(|(t, v)| v * (lambda * (t - t_start)).exp())
        .fold(1.0, f64::max);
    Ok(Certificate {
        gamma,
        lambda,
        method: CertificateMethod::DecayFit,
    })
}

/// Pilot window used by [`default_horizon`].
pub const PILOT_WINDOW: f64 = 20.0;
/// Cap on the horizon extension `5 / λ_est` beyond the grid end.
pub const MAX_HORIZON_EXTENSION: f64 = 1e4;

/// `t_end + max(10, 5 / λ_est)` with `λ_est` from [`decay_fit`].
pub fn default_horizon(spec: &SystemSpec, grid: &TimeGrid, opts: &OdeOptions) -> Result<f64> {
    let pilot = decay_fit(spec, grid.t0(), PILOT_WINDOW, opts)?;
    Ok(grid.t_end() + (5.0 / pilot.lambda).clamp(10.0, MAX_HORIZON_EXTENSION))
}

/// `H` on the grid: the exact constant weight when `A` does not depend on
/// `t`, otherwise the backward sweep up to `horizon` (or
/// [`default_horizon`]).
pub fn weight_trajectory(
    spec: &SystemSpec,
    grid: &TimeGrid,
    horizon: Option<f64>,
    opts: &OdeOptions,
) -> Result<WeightTrajectory> {
    match spec.as_constant() {
        Some(a) => WeightTrajectory::constant(grid.clone(), gramian_lti(&a)?),
        None => {
            let horizon = match horizon {
                Some(h) => h,
                None => default_horizon(spec, grid, opts)?,
            };
            gramian_ltv(spec, grid, horizon, opts)
        }
    }
}

/// Largest `‖Ḣ + AᵀH + HA + I‖_F` over interior samples, with `Ḣ` from
/// finite differences on the grid (see [`derivative_weights`]).
pub fn lyapunov_residual(spec: &SystemSpec, w: &WeightTrajectory) -> Result<f64> {
    let samples = w.grid.samples();
    if samples.len() < 3 {
        return Err(Error::Grid("residual needs at least 3 samples".into()));
    }
    let n = w.n();
    let mut worst = 0.0f64;
    for k in 0..samples.len() {
        let Some(stencil) = derivative_weights(samples, k) else {
            continue;
        };
        let mut hdot = Matrix::zeros(n);
        for (j, c) in stencil {
            hdot = &hdot + &w.h_samples[j].as_matrix().scale(c);
        }
        let a = spec.eval_a(samples[k])?;
        let h = w.h_samples[k].as_matrix();
        let ath = &a.transpose() * h;
        let r = &(&(&hdot + &ath) + &ath.transpose()) + &Matrix::identity(n);
        worst = worst.max(r.frobenius_norm());
    }
    Ok(worst)
}

/// Largest `|d/dt ‖x‖²_{H(t)} + ‖x‖²_I|` over interior samples of a
/// trajectory; zero for exact data.
pub fn dissipation_residual(w: &WeightTrajectory, traj: &Trajectory) -> Result<f64> {
    let samples = w.grid.samples();
    if traj.grid.samples() != samples {
        return Err(Error::Grid("trajectory and weight grids differ".into()));
    }
    let energy: Vec<f64> = traj
        .states
        .iter()
        .zip(&w.h_samples)
        .map(|(x, h)| h.quadratic_form(x))
        .collect();
    let mut worst = 0.0f64;
    for k in 0..samples.len() {
        let Some(stencil) = derivative_weights(samples, k) else {
            continue;
        };
        let de: f64 = stencil.iter().map(|(j, c)| c * energy[*j]).sum();
        let xx: f64 = traj.states[k].iter().map(|v| v * v).sum();
        worst = worst.max((de + xx).abs());
    }
    Ok(worst)
}
