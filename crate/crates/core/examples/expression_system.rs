//! A system typed as expressions in `t`, run through the whole pipeline.

use stabound::analysis::{load_system, run_analyze, AnalysisConfig};

fn main() {
    let json = r#"{
        "kind": "expression",
        "A": [["-2 + sin(t)", "1"],
              ["-1",          "-2 + 0.5*cos(2*t)"]]
    }"#;
    let spec = load_system(json, 0).expect("valid system");
    let cfg = AnalysisConfig::new(spec, None, 10.0, 401)
        .and_then(|c| c.with_x0(vec![1.0, 1.0]))
        .expect("valid config");

    match run_analyze(&cfg) {
        Ok(a) => {
            let r = &a.report;
            println!("horizon {:?}, tail bound {:.2e}", r.horizon, r.tail_bound);
            println!("gamma {:.4}, lambda {:.4}, verify margin {:+.2e}", r.certificate.gamma, r.certificate.lambda, r.verify_margin);
            println!("Lyapunov residual {:.2e}", r.lyapunov_residual.unwrap());
            for e in &r.envelopes {
                println!("{:?}: min margins {:+.3e} / {:+.3e}", e.source, e.min_lower_margin.unwrap(), e.min_upper_margin.unwrap());
            }
        }
        Err(e) => eprintln!("{e}"),
    }

    let broken = load_system(r#"{"kind":"expression","A":[["-1","exp(t"],["0","-1"]]}"#, 0);
    println!("\nparse error: {}", broken.unwrap_err());
}
