//! Linear systems `ẋ = A(t) x`: how `A(t)` is described, time grids, and
//! the solution trajectories and transition matrices obtained by
//! integrating them.

mod dopri;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::matrix::{Matrix, SymMatrix};

pub use dopri::{integrate, OdeOptions};

/// Strictly increasing sample times, at least two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Grid(format!("need at least 2 samples, got {}", samples.len())));
        }
        if samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::Grid("sample times must be finite".into()));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Grid(format!(
                "sample times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(TimeGrid { samples })
    }

    /// `num` evenly spaced samples on `[t0, t_end]`, both ends included.
    pub fn uniform(t0: f64, t_end: f64, num: usize) -> Result<Self> {
        if num < 2 {
            return Err(Error::Grid(format!("need at least 2 samples, got {num}")));
        }
        if !(t_end > t0) {
            return Err(Error::Grid(format!("t_end ({t_end}) must exceed t0 ({t0})")));
        }
        let h = (t_end - t0) / (num - 1) as f64;
        let mut samples: Vec<f64> = (0..num).map(|k| t0 + k as f64 * h).collect();
        samples[num - 1] = t_end;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.samples[0]
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    /// Interval midpoints `(t_k + t_{k+1}) / 2`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.samples.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// How `A(t)` is given.
#[derive(Debug, Clone)]
pub enum SystemKind {
    Constant(Matrix),
    /// Row-major `n x n` entries.
    Expression(Arc<[Expr]>),
    /// A named built-in system; `system` holds its concrete description.
    Builtin { id: String, system: Box<SystemSpec> },
}

/// A continuous matrix function `A(t)` on `[t0, ∞)`.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    n: usize,
    t0: f64,
    kind: SystemKind,
}

impl SystemSpec {
    pub fn constant(a: Matrix) -> Self {
        SystemSpec {
            n: a.n(),
            t0: 0.0,
            kind: SystemKind::Constant(a),
        }
    }

    /// Parses a square table of entry expressions.
    pub fn from_expressions<R: AsRef<[S]>, S: AsRef<str>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("system matrix must have at least one row".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, src) in row.iter().enumerate() {
                let e = crate::expr::parse(src.as_ref()).map_err(|source| Error::Entry {
                    row: i,
                    col: j,
                    t: f64::NAN,
                    source: Box::new(source),
                })?;
                entries.push(e);
            }
        }
        Ok(SystemSpec {
            n,
            t0: 0.0,
            kind: SystemKind::Expression(entries.into()),
        })
    }

    pub fn builtin(id: impl Into<String>, system: SystemSpec) -> Self {
        SystemSpec {
            n: system.n,
            t0: system.t0,
            kind: SystemKind::Builtin {
                id: id.into(),
                system: Box::new(system),
            },
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        if let SystemKind::Builtin { system, .. } = &mut self.kind {
            system.t0 = t0;
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn builtin_id(&self) -> Option<&str> {
        match &self.kind {
            SystemKind::Builtin { id, .. } => Some(id),
            _ => None,
        }
    }

    /// The constant matrix if `A` does not depend on `t`.
    pub fn as_constant(&self) -> Option<Matrix> {
        match &self.kind {
            SystemKind::Constant(a) => Some(a.clone()),
            SystemKind::Expression(es) => {
                if es.iter().all(Expr::is_constant) {
                    self.eval_a(self.t0).ok()
                } else {
                    None
                }
            }
            SystemKind::Builtin { system, .. } => system.as_constant(),
        }
    }

    /// `A(t)`.
    pub fn eval_a(&self, t: f64) -> Result<Matrix> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("A(t) requested at non-finite t = {t}")));
        }
        if t < self.t0 - 1e-12 * self.t0.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "A(t) requested at t = {t} before t0 = {}",
                self.t0
            )));
        }
        match &self.kind {
            SystemKind::Constant(a) => Ok(a.clone()),
            SystemKind::Expression(es) => {
                let n = self.n;
                let mut data = Vec::with_capacity(n * n);
                for (k, e) in es.iter().enumerate() {
                    let v = e.eval(t).map_err(|source| Error::Entry {
                        row: k / n,
                        col: k % n,
                        t,
                        source: Box::new(source),
                    })?;
                    data.push(v);
                }
                Matrix::from_row_major(n, data)
            }
            SystemKind::Builtin { system, .. } => system.eval_a(t),
        }
    }
}

/// Sampled solution of `ẋ = A(t) x`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Euclidean norm of each state.
    pub fn norms_i(&self) -> Vec<f64> {
        self.states.iter().map(|x| euclidean_norm(x)).collect()
    }

    /// `‖x(t_k)‖_{H_k}` for one weight per sample.
    pub fn norms_h(&self, weights: &[SymMatrix]) -> Result<Vec<f64>> {
        if weights.len() != self.states.len() {
            return Err(Error::Dimension {
                expected: self.states.len(),
                got: weights.len(),
            });
        }
        self.states
            .iter()
            .zip(weights)
            .map(|(x, h)| crate::matrix::weighted_vec_norm(x, h))
            .collect()
    }
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Weights of the finite-difference first derivative at sample `k`, using
/// the Lagrange interpolant through samples `k-2..=k+2` (fourth order), or
/// `k-1..=k+1` when the grid has fewer than five samples. Returns `None`
/// where the stencil does not fit.
pub fn derivative_weights(samples: &[f64], k: usize) -> Option<Vec<(usize, f64)>> {
    let half = if samples.len() >= 5 { 2 } else { 1 };
    if k < half || k + half >= samples.len() {
        return None;
    }
    let nodes: Vec<usize> = (k - half..=k + half).collect();
    let xc = samples[k];
    let weights = nodes
        .iter()
        .map(|&j| {
            let w = if j == k {
                nodes.iter().filter(|&&m| m != k).map(|&m| 1.0 / (xc - samples[m])).sum()
            } else {
                let num: f64 = nodes
                    .iter()
                    .filter(|&&m| m != j && m != k)
                    .map(|&m| xc - samples[m])
                    .product();
                let den: f64 = nodes
                    .iter()
                    .filter(|&&m| m != j)
                    .map(|&m| samples[j] - samples[m])
                    .product();
                num / den
            };
            (j, w)
        })
        .collect();
    Some(weights)
}

/// `A(t)` for the given system.
pub fn eval_a(spec: &SystemSpec, t: f64) -> Result<Matrix> {
    spec.eval_a(t)
}

/// Integrates `ẋ = A(t) x`, `x(grid.t0) = x0`, sampling on the grid.
pub fn solve_ivp(spec: &SystemSpec, x0: &[f64], grid: &TimeGrid, opts: &OdeOptions) -> Result<Trajectory> {
    if x0.len() != spec.n() {
        return Err(Error::Dimension {
            expected: spec.n(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "initial state" });
    }
    let samples = grid.samples();
    let states = integrate(
        |t, x, dx| {
            let a = spec.eval_a(t)?;
            dx.copy_from_slice(&a.mul_vec(x));
            Ok(())
        },
        samples[0],
        x0,
        samples,
        opts,
        |_, _| {},
    )?;
    Ok(Trajectory {
        grid: grid.clone(),
        states,
    })
}

/// `Φ(t, τ)` for every `t` in `times` (non-decreasing, all `≥ tau`),
/// integrated forward from the identity at `tau` as one stacked system.
pub fn transition_matrices(spec: &SystemSpec, tau: f64, times: &[f64], opts: &OdeOptions) -> Result<Vec<Matrix>> {
    let n = spec.n();
    if tau < spec.t0() {
        return Err(Error::InvalidArgument(format!(
            "tau = {tau} precedes t0 = {}",
            spec.t0()
        )));
    }
    if let Some(&t) = times.iter().find(|&&t| t < tau) {
        return Err(Error::InvalidArgument(format!("t = {t} precedes tau = {tau}")));
    }
    let id = Matrix::identity(n);
    let states = integrate(
        |t, y, dy| {
            let a = spec.eval_a(t)?;
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += a[(i, k)] * y[k * n + j];
                    }
                    dy[i * n + j] = s;
                }
            }
            Ok(())
        },
        tau,
        id.as_slice(),
        times,
        opts,
        |_, _| {},
    )?;
    states.into_iter().map(|y| Matrix::from_row_major(n, y)).collect()
}

/// `Φ(t, τ)` for `t ≥ τ ≥ t0`.
pub fn transition_matrix(spec: &SystemSpec, t: f64, tau: f64, opts: &OdeOptions) -> Result<Matrix> {
    Ok(transition_matrices(spec, tau, &[t], opts)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::expm;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ltv_example() -> SystemSpec {
        SystemSpec::from_expressions(&[["-1", "exp(-t)"], ["0", "-3"]]).unwrap()
    }

    fn phi_closed_form(t: f64, tau: f64) -> Matrix {
        Matrix::from_rows(&[
            [(tau - t).exp(), (-t).exp() / 3.0 - (3.0 * tau - 4.0 * t).exp() / 3.0],
            [0.0, (3.0 * tau - 3.0 * t).exp()],
        ])
        .unwrap()
    }

    #[test]
    fn derivative_stencil_is_exact_for_quartics() {
        let samples = [0.0, 0.1, 0.25, 0.3, 0.45, 0.6];
        let f = |t: f64| 1.0 - 2.0 * t + 3.0 * t.powi(2) - t.powi(3) + 0.5 * t.powi(4);
        let df = |t: f64| -2.0 + 6.0 * t - 3.0 * t.powi(2) + 2.0 * t.powi(3);
        for k in 2..4 {
            let w = derivative_weights(&samples, k).unwrap();
            let got: f64 = w.iter().map(|(j, c)| c * f(samples[*j])).sum();
            assert_abs_diff_eq!(got, df(samples[k]), epsilon = 1e-12);
        }
        assert!(derivative_weights(&samples, 1).is_none());
        assert!(derivative_weights(&samples, 4).is_none());
        let short = [0.0, 0.5, 1.0];
        let w = derivative_weights(&short, 1).unwrap();
        let got: f64 = w.iter().map(|(j, c)| c * short[*j].powi(2)).sum();
        assert_abs_diff_eq!(got, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(TimeGrid::uniform(1.0, 1.0, 5).is_err());
        let g = TimeGrid::uniform(0.0, 5.0, 501).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g.t_end(), 5.0);
        assert_abs_diff_eq!(g.samples()[100], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_a_examples() {
        let spec = ltv_example();
        assert_eq!(spec.eval_a(0.0).unwrap(), Matrix::from_rows(&[[-1.0, 1.0], [0.0, -3.0]]).unwrap());
        let far = spec.eval_a(50.0).unwrap();
        assert!(far.max_abs_diff(&Matrix::from_rows(&[[-1.0, 0.0], [0.0, -3.0]]).unwrap()) < 1e-20);
        let c = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let cs = SystemSpec::constant(c.clone());
        assert_eq!(cs.eval_a(0.0).unwrap(), c);
        assert_eq!(cs.eval_a(123.4).unwrap(), c);
        assert!(spec.eval_a(-1.0).is_err());
    }

    #[test]
    fn entry_errors_carry_position() {
        let spec = SystemSpec::from_expressions(&[["-1", "sqrt(1-t)"], ["0", "-3"]]).unwrap();
        match spec.eval_a(2.0) {
            Err(Error::Entry { row, col, t, .. }) => {
                assert_eq!((row, col), (0, 1));
                assert_eq!(t, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            SystemSpec::from_expressions(&[["-1", "2t"], ["0", "-3"]]),
            Err(Error::Entry { row: 0, col: 1, .. })
        ));
        assert!(SystemSpec::from_expressions(&[vec!["1", "2"]]).is_err());
    }

    #[test]
    fn lti_trajectory_matches_exponential() {
        let s10 = 10f64.sqrt();
        let a = Matrix::from_rows(&[[0.0, s10], [-s10, -2.0]]).unwrap();
        let spec = SystemSpec::constant(a.clone());
        let grid = TimeGrid::uniform(0.0, 6.0, 121).unwrap();
        let x0 = [-4.0, 3.0];
        let traj = solve_ivp(&spec, &x0, &grid, &OdeOptions::default()).unwrap();
        for (t, x) in grid.samples().iter().zip(&traj.states) {
            let want = expm(&a, *t).unwrap().mul_vec(&x0);
            assert_abs_diff_eq!(x[0], want[0], epsilon = 1e-8);
            assert_abs_diff_eq!(x[1], want[1], epsilon = 1e-8);
        }
    }

    #[test]
    fn ltv_trajectory_matches_closed_form() {
        let spec = ltv_example();
        let grid = TimeGrid::uniform(0.0, 5.0, 101).unwrap();
        let x0 = [2.0, -1.0];
        let traj = solve_ivp(&spec, &x0, &grid, &OdeOptions::default()).unwrap();
        for (t, x) in grid.samples().iter().zip(&traj.states) {
            let want = phi_closed_form(*t, 0.0).mul_vec(&x0);
            assert_abs_diff_eq!(x[0], want[0], epsilon = 1e-8);
            assert_abs_diff_eq!(x[1], want[1], epsilon = 1e-8);
        }
        let norms = traj.norms_i();
        assert_eq!(norms[3], euclidean_norm(&traj.states[3]));
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let traj = solve_ivp(
            &ltv_example(),
            &[0.0, 0.0],
            &TimeGrid::uniform(0.0, 3.0, 7).unwrap(),
            &OdeOptions::default(),
        )
        .unwrap();
        assert!(traj.states.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let r = solve_ivp(
            &ltv_example(),
            &[1.0],
            &TimeGrid::uniform(0.0, 1.0, 3).unwrap(),
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::Dimension { expected: 2, got: 1 })));
    }

    #[test]
    fn transition_matrix_examples() {
        let spec = ltv_example();
        let opts = OdeOptions::default();
        assert_eq!(transition_matrix(&spec, 1.5, 1.5, &opts).unwrap(), Matrix::identity(2));
        for &(t, tau) in &[(1.0, 0.0), (3.0, 0.5), (5.0, 2.0), (0.7, 0.2)] {
            let got = transition_matrix(&spec, t, tau, &opts).unwrap();
            assert!(got.max_abs_diff(&phi_closed_form(t, tau)) < 1e-8, "({t}, {tau})");
        }
        assert!(transition_matrix(&spec, 0.0, 1.0, &opts).is_err());
    }

    #[test]
    fn constant_transition_is_exponential() {
        let a = Matrix::from_rows(&[[-0.5, 2.0, 0.0], [-1.0, -0.3, 0.4], [0.2, 0.0, -1.0]]).unwrap();
        let spec = SystemSpec::constant(a.clone());
        let got = transition_matrix(&spec, 3.0, 1.0, &OdeOptions::default()).unwrap();
        assert!(got.max_abs_diff(&expm(&a, 2.0).unwrap()) < 1e-8);
    }

    #[test]
    fn forward_finite_difference_residual_is_second_order() {
        let spec = ltv_example();
        let opts = OdeOptions::with_tolerances(1e-12, 1e-14);
        let (t, tau) = (1.3, 0.4);
        let phi = transition_matrix(&spec, t, tau, &opts).unwrap();
        let a_phi = &spec.eval_a(t).unwrap() * &phi;
        let residual = |h: f64| {
            let next = transition_matrix(&spec, t + h, tau, &opts).unwrap();
            (&(&next - &phi) - &a_phi.scale(h)).frobenius_norm()
        };
        let (r1, r2) = (residual(1e-2), residual(5e-3));
        // halving h divides an O(h²) residual by ~4
        assert!(r1 < 1e-3 && (r1 / r2 - 4.0).abs() < 0.2, "{r1} {r2}");
    }

    #[test]
    fn adjoint_relation_in_second_argument() {
        // d/dt Φ(τ, t) = -Φ(τ, t) A(t)
        let spec = ltv_example();
        let opts = OdeOptions::with_tolerances(1e-12, 1e-15);
        let (tau, t, h) = (4.0, 1.2, 1e-4);
        let plus = transition_matrix(&spec, tau, t + h, &opts).unwrap();
        let minus = transition_matrix(&spec, tau, t - h, &opts).unwrap();
        let fd = (&plus - &minus).scale(0.5 / h);
        let want = (&transition_matrix(&spec, tau, t, &opts).unwrap() * &spec.eval_a(t).unwrap()).scale(-1.0);
        assert!(fd.max_abs_diff(&want) < 1e-6, "{fd:?} vs {want:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn composition(tau in 0.0f64..2.0, d1 in 0.0f64..2.0, d2 in 0.0f64..2.0) {
            let spec = ltv_example();
            let opts = OdeOptions::default();
            let s = tau + d1;
            let t = s + d2;
            let direct = transition_matrix(&spec, t, tau, &opts).unwrap();
            let composed = &transition_matrix(&spec, t, s, &opts).unwrap()
                * &transition_matrix(&spec, s, tau, &opts).unwrap();
            prop_assert!(direct.max_abs_diff(&composed) < 1e-7);
        }

        #[test]
        fn linearity(
            a in prop::collection::vec(-2.0f64..2.0, 2),
            b in prop::collection::vec(-2.0f64..2.0, 2),
        ) {
            let spec = ltv_example();
            let grid = TimeGrid::uniform(0.0, 2.0, 11).unwrap();
            let opts = OdeOptions::default();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ta = solve_ivp(&spec, &a, &grid, &opts).unwrap();
            let tb = solve_ivp(&spec, &b, &grid, &opts).unwrap();
            let ts = solve_ivp(&spec, &sum, &grid, &opts).unwrap();
            for k in 0..grid.len() {
                for i in 0..2 {
                    let lin = ta.states[k][i] + tb.states[k][i];
                    let scale = euclidean_norm(&ts.states[k]).max(1e-3);
                    prop_assert!((ts.states[k][i] - lin).abs() <= 1e-9 * scale.max(1.0));
                }
            }
        }

        #[test]
        fn homogeneity(alpha in -3.0f64..3.0) {
            let spec = ltv_example();
            let grid = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
            let opts = OdeOptions::default();
            let base = solve_ivp(&spec, &[1.0, -0.5], &grid, &opts).unwrap();
            let scaled = solve_ivp(&spec, &[alpha, -0.5 * alpha], &grid, &opts).unwrap();
            for (x, y) in base.states.iter().zip(&scaled.states) {
                for i in 0..2 {
                    prop_assert!((alpha * x[i] - y[i]).abs() <= 1e-8 * alpha.abs().max(1.0));
                }
            }
        }
    }
}
