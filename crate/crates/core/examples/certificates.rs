//! Decay certificates from three sources, each checked against sampled
//! transition matrices.

use stabound::bounds::{certificate_from_h, readable_bounds, sandwich, sup_induced_norm, verify_certificate, Certificate};
use stabound::gramian::{decay_fit, gramian_ltv, PILOT_WINDOW};
use stabound::scenarios::builtin;
use stabound::{OdeOptions, TimeGrid};

fn show(name: &str, c: &Certificate, margin: f64) {
    println!("{name:>12}: gamma {:.4}, lambda {:.4}, verify margin {margin:+.3e}", c.gamma, c.lambda);
}

fn main() -> stabound::Result<()> {
    let s = builtin("example3_ltv")?;
    let grid = TimeGrid::uniform(0.0, 5.0, 201)?;
    let opts = OdeOptions::default();
    let w = gramian_ltv(&s.spec, &grid, 25.0, &opts)?;

    let from_h = certificate_from_h(&w);
    show("from H", &from_h, verify_certificate(&s.spec, &from_h, &grid, &opts)?);

    let fit = decay_fit(&s.spec, 0.0, PILOT_WINDOW, &opts)?;
    show("decay fit", &fit, verify_certificate(&s.spec, &fit, &grid, &opts)?);

    let greedy = Certificate::user(1.0, 2.0)?;
    show("too strong", &greedy, verify_certificate(&s.spec, &greedy, &grid, &opts)?);

    let (est, _) = readable_bounds(&w, 1.0)?;
    println!(
        "\n{:.4} |x0| e^(-{:.4} t) <= |x(t)| <= {:.4} |x0| e^(-{:.4} t)",
        est.lower_coeff, est.lower_rate, est.upper_coeff, est.upper_rate
    );

    let sw = sandwich(&w, sup_induced_norm(&s.spec, &grid)?, &from_h);
    println!("1/(2L) = {:.5} <= {:.5} .. {:.5} <= {:.5}", sw.lower, sw.inf_lmin, sw.sup_lmax, sw.upper);
    Ok(())
}
