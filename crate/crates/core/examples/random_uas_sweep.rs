// Random stable systems: how often the symmetric part is indefinite, and
// how much the weight-based bound improves on the symmetric-part bound.

use stabound::bounds::{main_bounds_euclidean, rugh_bounds};
use stabound::gramian::{gramian_lti, WeightTrajectory};
use stabound::scenarios::random_uas;
use stabound::TimeGrid;

fn main() -> stabound::Result<()> {
    let seeds: u64 = std::env::var("STABOUND_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(40);
    let grid = TimeGrid::uniform(0.0, 10.0, 101)?;
    println!("{:>5} {:>2} {:>12} {:>12} {:>12}", "seed", "n", "lmax[A'+A]", "rugh_hi(10)", "main_hi(10)");
    let mut indefinite = 0;
    for seed in 0..seeds {
        let n = 2 + (seed as usize % 3);
        let s = random_uas(n, seed)?;
        let a = s.spec.as_constant().unwrap();
        let (_, hi) = a.symmetric_sum().extreme_eigenvalues()?;
        if hi > 0.0 {
            indefinite += 1;
        }
        let w = WeightTrajectory::constant(grid.clone(), gramian_lti(&a)?)?;
        let rugh = rugh_bounds(&s.spec, 1.0, &grid)?;
        let main = main_bounds_euclidean(&w, 1.0)?;
        println!(
            "{seed:>5} {n:>2} {hi:>12.4} {:>12.3e} {:>12.3e}",
            rugh.upper.last().unwrap(),
            main.upper.last().unwrap()
        );
    }
    println!("\n{indefinite} of {seeds} have an indefinite symmetric part");
    Ok(())
}
