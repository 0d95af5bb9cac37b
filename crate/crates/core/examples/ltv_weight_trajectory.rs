//! Backward Lyapunov sweep for a time-varying system, compared with the
//! closed form of its weight.

use stabound::gramian::{default_horizon, eigen_envelope, gramian_ltv, lyapunov_residual};
use stabound::scenarios::builtin;
use stabound::{OdeOptions, TimeGrid};

fn main() -> stabound::Result<()> {
    let s = builtin("example3_ltv")?;
    let grid = TimeGrid::uniform(0.0, 5.0, 501)?;
    let opts = OdeOptions::default();

    let horizon = default_horizon(&s.spec, &grid, &opts)?;
    println!("default horizon: {horizon:.2}");
    let w = gramian_ltv(&s.spec, &grid, 25.0, &opts)?;
    println!("horizon 25, tail bound {:.2e}", w.tail_bound);
    println!("Lyapunov residual {:.2e}", lyapunov_residual(&s.spec, &w)?);

    let oracle = s.oracle_h.unwrap();
    println!("\n{:>4} {:>12} {:>12} {:>12} {:>10}", "t", "H11", "H12", "H22", "max err");
    for k in (0..grid.len()).step_by(50) {
        let t = grid.samples()[k];
        let h = &w.h_samples[k];
        let want = oracle(t);
        let err = (0..4).map(|i| (h[(i / 2, i % 2)] - want[i / 2][i % 2]).abs()).fold(0.0, f64::max);
        println!("{t:>4.1} {:>12.8} {:>12.8} {:>12.8} {err:>10.1e}", h[(0, 0)], h[(0, 1)], h[(1, 1)]);
    }

    let env = eigen_envelope(&w);
    println!("\ninf lambda_min = {:.4}, sup lambda_max = {:.4}", env.inf_lmin, env.sup_lmax);
    Ok(())
}
