//! All four envelopes around one trajectory of the time-varying example.

use stabound::bounds::{lemma_l_bounds, main_bounds_euclidean, main_bounds_weighted, rugh_bounds, sup_induced_norm};
use stabound::gramian::gramian_ltv;
use stabound::ode::{euclidean_norm, solve_ivp};
use stabound::scenarios::builtin;
use stabound::{OdeOptions, TimeGrid};

fn main() -> stabound::Result<()> {
    let s = builtin("example3_ltv")?;
    let grid = TimeGrid::uniform(0.0, 5.0, 501)?;
    let opts = OdeOptions::with_tolerances(1e-11, 1e-14);
    let x0 = s.reference_x0.clone();
    let x0n = euclidean_norm(&x0);

    let w = gramian_ltv(&s.spec, &grid, 25.0, &opts)?;
    let traj = solve_ivp(&s.spec, &x0, &grid, &opts)?;
    let norms = traj.norms_i();
    let weighted_norms = w.weighted_norms(&traj)?;

    let l = sup_induced_norm(&s.spec, &grid)?;
    let envs = [
        ("rugh", rugh_bounds(&s.spec, x0n, &grid)?, &norms),
        ("lemma L", lemma_l_bounds(x0n, &grid, l)?, &norms),
        ("main", main_bounds_euclidean(&w, x0n)?, &norms),
        ("main, H(t) norm", main_bounds_weighted(&w, &x0)?, &weighted_norms),
    ];
    for (name, env, v) in &envs {
        println!("{name:>16}: worst relative violation {:+.2e}", env.worst_violation(v));
    }

    println!("\n{:>4} {:>11} {:>11} {:>11} {:>11} {:>11}", "t", "lemma_lo", "main_lo", "|x|", "main_hi", "rugh_hi");
    for k in (0..grid.len()).step_by(50) {
        println!(
            "{:>4.1} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
            grid.samples()[k],
            envs[1].1.lower[k],
            envs[2].1.lower[k],
            norms[k],
            envs[2].1.upper[k],
            envs[0].1.upper[k]
        );
    }
    Ok(())
}
