//! Weight matrix of a constant system and the envelopes it gives.
//!
//! ```text
//! cargo run --example lti_weight_matrix
//! ```

use stabound::bounds::{certificate_from_h, main_bounds_weighted, rugh_bounds};
use stabound::gramian::{algebraic_lyapunov_residual, gramian_lti, WeightTrajectory};
use stabound::matrix::{expm, sym_eig};
use stabound::ode::euclidean_norm;
use stabound::{Matrix, SystemSpec, TimeGrid};

fn main() -> stabound::Result<()> {
    let s10 = 10f64.sqrt();
    let a = Matrix::from_rows(&[[0.0, s10], [-s10, -2.0]])?;
    let h = gramian_lti(&a)?;
    let d = sym_eig(&h)?;
    println!("H = {h:?}");
    println!("residual |A'H + HA + I| = {:.2e}", algebraic_lyapunov_residual(&a, &h));
    println!("eigenvalues of H: {:.6} {:.6}", d.min(), d.max());

    let grid = TimeGrid::uniform(0.0, 6.0, 13)?;
    let w = WeightTrajectory::constant(grid.clone(), h)?;
    let cert = certificate_from_h(&w);
    println!("|Phi(t, s)| <= {:.5} exp(-{:.5} (t - s))", cert.gamma, cert.lambda);

    let x0 = [-4.0, 3.0];
    let rugh = rugh_bounds(&SystemSpec::constant(a.clone()), euclidean_norm(&x0), &grid)?;
    let weighted = main_bounds_weighted(&w, &x0)?;
    println!("\n{:>5} {:>10} {:>10} {:>10} | {:>10} {:>10} {:>10}", "t", "rugh_lo", "|x|", "rugh_hi", "H_lo", "|x|_H", "H_hi");
    for (k, t) in grid.samples().iter().enumerate() {
        let x = expm(&a, *t)?.mul_vec(&x0);
        let xh = stabound::matrix::weighted_vec_norm(&x, &w.h_samples[k])?;
        println!(
            "{t:>5.2} {:>10.5} {:>10.5} {:>10.5} | {:>10.5} {:>10.5} {:>10.5}",
            rugh.lower[k],
            euclidean_norm(&x),
            rugh.upper[k],
            weighted.lower[k],
            xh,
            weighted.upper[k]
        );
    }
    Ok(())
}
