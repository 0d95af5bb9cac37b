//! Built-in systems and a seeded generator of random stable systems.

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ode::SystemSpec;

pub const BUILTIN_IDS: [&str; 2] = ["example1_lti", "example3_ltv"];

type RowsAt = fn(f64) -> [[f64; 2]; 2];
type PairAt = fn(f64) -> (f64, f64);
type PhiAt = fn(f64, f64) -> [[f64; 2]; 2];

/// A system together with whatever closed-form references are known.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub spec: SystemSpec,
    /// `Φ(t, τ)`.
    pub oracle_phi: Option<PhiAt>,
    pub oracle_h: Option<RowsAt>,
    /// `(λ_min[H(t)], λ_max[H(t)])`.
    pub oracle_eigs: Option<PairAt>,
    /// `(-½∫_{t0}^t dτ/λ_min, -½∫_{t0}^t dτ/λ_max)`.
    pub oracle_half_exponents: Option<PairAt>,
    pub reference_x0: Vec<f64>,
    pub known_constants: Vec<(&'static str, f64)>,
}

impl Scenario {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.known_constants.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    /// Closed-form solution `Φ(t, t0) x0`, when `Φ` is known.
    pub fn oracle_state(&self, t: f64, x0: &[f64]) -> Option<Vec<f64>> {
        let phi = (self.oracle_phi?)(t, self.spec.t0());
        Some(phi.iter().map(|row| row[0] * x0[0] + row[1] * x0[1]).collect())
    }
}

fn rotating_phi(t: f64, tau: f64) -> [[f64; 2]; 2] {
    oracles::rotating_expm(t - tau)
}

fn rotating_h(_: f64) -> [[f64; 2]; 2] {
    oracles::rotating_weight()
}

fn rotating_eigs(_: f64) -> (f64, f64) {
    oracles::rotating_weight_eigenvalues()
}

fn rotating_half_exponents(t: f64) -> (f64, f64) {
    let (lo, hi) = oracles::rotating_weight_eigenvalues();
    (-0.5 * t / lo, -0.5 * t / hi)
}

pub fn builtin(id: &str) -> Result<Scenario> {
    match id {
        "example1_lti" => {
            let s10 = 10f64.sqrt();
            let a = Matrix::from_rows(&[[0.0, s10], [-s10, -2.0]])?;
            let (lo, hi) = oracles::rotating_weight_eigenvalues();
            Ok(Scenario {
                id: id.into(),
                spec: SystemSpec::builtin(id, SystemSpec::constant(a)),
                oracle_phi: Some(rotating_phi),
                oracle_h: Some(rotating_h),
                oracle_eigs: Some(rotating_eigs),
                oracle_half_exponents: Some(rotating_half_exponents),
                reference_x0: vec![-4.0, 3.0],
                known_constants: vec![
                    ("L", (12.0 + 44f64.sqrt()).sqrt()),
                    ("gamma", (hi / lo).sqrt()),
                    ("lambda", 1.0 / (2.0 * hi)),
                    ("lambda_min_H", lo),
                    ("lambda_max_H", hi),
                ],
            })
        }
        "example3_ltv" => {
            let spec = SystemSpec::from_expressions(&[["-1", "exp(-t)"], ["0", "-3"]])?;
            Ok(Scenario {
                id: id.into(),
                spec: SystemSpec::builtin(id, spec),
                oracle_phi: Some(oracles::ltv_transition),
                oracle_h: Some(oracles::ltv_weight),
                oracle_eigs: Some(oracles::ltv_weight_eigenvalues),
                oracle_half_exponents: Some(oracles::ltv_half_exponents),
                reference_x0: vec![2.0, -1.0],
                known_constants: vec![
                    ("L", 3.1796),
                    ("gamma", 1.8075),
                    ("lambda", 0.9441),
                    ("lambda_min_H0", 0.1621),
                    ("lambda_max_H0", 0.5296),
                    ("readable_lower_coeff", 0.5531),
                    ("readable_lower_rate", 3.0845),
                    ("readable_upper_coeff", 1.8075),
                    ("readable_upper_rate", 0.9441),
                ],
            })
        }
        other => Err(Error::UnknownScenario {
            id: other.into(),
            available: BUILTIN_IDS.join(", "),
        }),
    }
}

pub const MAX_RANDOM_DIM: usize = 8;

/// A Hurwitz matrix `Q(-D + S)Q⁻¹` with `D = diag(d_i)`, `d_i ∈ [0.2, 3]`,
/// `S` skew-symmetric and `Q` unit upper triangular. The spectrum of
/// `-D + S` has real parts at most `-min d_i`, and the similarity keeps
/// it; `Q` makes the result non-normal, so `Aᵀ + A` can be indefinite.
pub fn random_uas(n: usize, seed: u64) -> Result<Scenario> {
    if !(1..=MAX_RANDOM_DIM).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "random_uas dimension must be in 1..={MAX_RANDOM_DIM}, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..=3.0)).collect();
    let mut core = Matrix::diag(&d).scale(-1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = rng.gen_range(-1.0..=1.0);
            core[(i, j)] += s;
            core[(j, i)] -= s;
        }
    }
    let mut q = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            q[(i, j)] = rng.gen_range(-1.5..=1.5);
        }
    }
    let a = &(&q * &core) * &q.inverse()?;
    let id = format!("random_uas_{n}_{seed}");
    let reference_x0 = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    Ok(Scenario {
        spec: SystemSpec::builtin(id.clone(), SystemSpec::constant(a)),
        id,
        oracle_phi: None,
        oracle_h: None,
        oracle_eigs: None,
        oracle_half_exponents: None,
        reference_x0,
        known_constants: vec![("spectral_abscissa_bound", -d.iter().copied().fold(f64::INFINITY, f64::min))],
    })
}
