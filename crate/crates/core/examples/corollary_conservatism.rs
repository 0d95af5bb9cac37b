//! The log-measure sufficient condition rejects the rotating system for
//! every constant tried, although the system decays exponentially.

use stabound::bounds::corollary_check;
use stabound::scenarios::builtin;
use stabound::{Matrix, SystemSpec, TimeGrid};

fn main() -> stabound::Result<()> {
    let rotating = builtin("example1_lti")?.spec;
    let grid = TimeGrid::uniform(0.0, 1e10, 201)?;
    println!("{:>10} {:>10} {:>14}", "gamma~", "lambda~", "worst margin");
    for gt in [0.0, 10.0, 1e6] {
        for lt in [1e-3, 0.1, 10.0] {
            let c = corollary_check(&rotating, &grid, gt, lt)?;
            println!("{gt:>10.0e} {lt:>10.0e} {:>14.4e}  {}", c.worst_margin, if c.satisfied { "ok" } else { "fails" });
        }
    }

    let contracting = SystemSpec::constant(Matrix::diag(&[-1.0, -3.0]));
    let c = corollary_check(&contracting, &TimeGrid::uniform(0.0, 10.0, 101)?, 0.0, 2.0)?;
    let cert = c.certificate.expect("satisfied");
    println!("\ndiag(-1, -3): satisfied, gamma {} lambda {}", cert.gamma, cert.lambda);
    Ok(())
}
