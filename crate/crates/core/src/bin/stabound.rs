use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stabound::analysis::{
    exit_code, load_system, parse_vector, run_analyze, run_corollary, seed_from_env, AnalysisConfig, DEFAULT_SAMPLES,
};
use stabound::Error;

#[derive(Parser)]
#[command(name = "stabound", version, about = "Solution-norm envelopes and stability certificates for x' = A(t) x")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build H(t), evaluate every envelope and the certificate.
    Analyze(Common),
    /// Test the log-measure sufficient condition on grid pairs.
    Corollary {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        gamma_tilde: f64,
        #[arg(long)]
        lambda_tilde: f64,
    },
}

#[derive(Args)]
struct Common {
    /// `builtin:<id>`, inline JSON, or a path to a JSON file.
    #[arg(long)]
    system: String,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Truncation horizon for time-varying systems.
    #[arg(long)]
    horizon: Option<f64>,
    /// Initial state, e.g. "2,-1".
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out_report: Option<PathBuf>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<AnalysisConfig, Error> {
        let system = load_system(&self.system, seed_from_env()?)?;
        let mut cfg = AnalysisConfig::new(system, self.t0, self.t_end, self.samples)?.with_tolerances(self.rtol, self.atol)?;
        if let Some(h) = self.horizon {
            cfg = cfg.with_horizon(h)?;
        }
        if let Some(x0) = &self.x0 {
            cfg = cfg.with_x0(parse_vector(x0)?)?;
        }
        Ok(cfg)
    }
}

fn fail(context: &str, e: &Error) -> ExitCode {
    eprintln!("stabound: {context}{e}");
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(common) => {
            let cfg = match common.config() {
                Ok(c) => c,
                Err(e) => return fail("", &e),
            };
            let analysis = match run_analyze(&cfg) {
                Ok(a) => a,
                Err(e) => return fail(&format!("{}: ", e.stage), &e.source),
            };
            if let Err(e) = analysis.write_outputs(common.out_csv.as_deref(), common.out_report.as_deref()) {
                return fail(&format!("{}: ", e.stage), &e.source);
            }
            if common.out_report.is_none() {
                println!("{}", analysis.report.to_json());
            }
            ExitCode::SUCCESS
        }
        Command::Corollary {
            common,
            gamma_tilde,
            lambda_tilde,
        } => {
            let cfg = match common.config() {
                Ok(c) => c,
                Err(e) => return fail("", &e),
            };
            match run_corollary(&cfg, gamma_tilde, lambda_tilde) {
                Ok(c) => {
                    let verdict = if c.satisfied { "satisfied" } else { "not satisfied" };
                    println!("{verdict} (gamma_tilde = {gamma_tilde}, lambda_tilde = {lambda_tilde}, worst margin = {:.6e})", c.worst_margin);
                    if let Some(cert) = c.certificate {
                        println!("implied certificate: gamma = {:.6}, lambda = {:.6}", cert.gamma, cert.lambda);
                    }
                    if let Some(p) = &common.out_report {
                        let json = serde_json::to_string_pretty(&c).expect("criterion serializes");
                        if let Err(e) = std::fs::write(p, json + "\n") {
                            return fail("output: ", &Error::from(e));
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&format!("{}: ", e.stage), &e.source),
            }
        }
    }
}
