//! End-to-end pipeline: load a system, build `H`, evaluate every envelope,
//! and emit CSV rows and a JSON report.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{
    certificate_from_h, corollary_check, lemma_l_bounds, main_bounds_euclidean, main_bounds_weighted,
    readable_bounds, rugh_bounds, sandwich, sup_induced_norm, verify_certificate, BoundEnvelope, BoundSource,
    Certificate, CorollaryCriterion, NormKind, ReadableEstimate, Sandwich,
};
use crate::error::{Error, Result};
use crate::gramian::{dissipation_residual, lyapunov_residual, weight_trajectory, WeightTrajectory};
use crate::matrix::{weighted_vec_norm, Matrix};
use crate::ode::{euclidean_norm, solve_ivp, OdeOptions, SystemKind, SystemSpec, TimeGrid, Trajectory};
use crate::scenarios;

pub const CSV_HEADER: [&str; 11] = [
    "t",
    "norm_x_I",
    "lower_rugh",
    "upper_rugh",
    "lower_main",
    "upper_main",
    "norm_x_H",
    "lower_main_H",
    "upper_main_H",
    "lambda_min_H",
    "lambda_max_H",
];

pub const SEED_ENV: &str = "STABOUND_SEED";
pub const DEFAULT_SAMPLES: usize = 501;

#[derive(Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SystemJson {
    Constant {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        t0: Option<f64>,
    },
    Expression {
        #[serde(rename = "A")]
        a: Vec<Vec<EntryJson>>,
        t0: Option<f64>,
    },
    Builtin {
        id: String,
        t0: Option<f64>,
    },
}

/// Resolves `example1_lti`, `example3_ltv`, `random_uas` or `random_uas:<n>`.
pub fn builtin_system(id: &str, seed: u64) -> Result<SystemSpec> {
    if let Some(rest) = id.strip_prefix("random_uas") {
        let n = match rest.strip_prefix(':') {
            Some(n) => n
                .parse()
                .map_err(|_| Error::Config(format!("bad dimension in `{id}`; expected random_uas:<n>")))?,
            None if rest.is_empty() => 2,
            None => {
                return Err(Error::UnknownScenario {
                    id: id.into(),
                    available: format!("{}, random_uas[:n]", scenarios::BUILTIN_IDS.join(", ")),
                })
            }
        };
        return Ok(scenarios::random_uas(n, seed)?.spec);
    }
    scenarios::builtin(id).map(|s| s.spec).map_err(|e| match e {
        Error::UnknownScenario { id, available } => Error::UnknownScenario {
            id,
            available: format!("{available}, random_uas[:n]"),
        },
        other => other,
    })
}

/// Parses the system JSON schema; `origin` names the source in errors.
pub fn parse_system_json(text: &str, origin: &str, seed: u64) -> Result<SystemSpec> {
    let parsed: SystemJson = serde_json::from_str(text).map_err(|e| {
        Error::Config(format!("{origin}: line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let (spec, t0) = match parsed {
        SystemJson::Constant { a, t0 } => {
            let m = Matrix::from_rows(&a).map_err(|e| Error::Config(format!("{origin}: A: {e}")))?;
            (SystemSpec::constant(m), t0)
        }
        SystemJson::Expression { a, t0 } => {
            let rows: Vec<Vec<String>> = a
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|e| match e {
                            EntryJson::Number(v) => format!("{v:e}"),
                            EntryJson::Text(s) => s,
                        })
                        .collect()
                })
                .collect();
            let spec = SystemSpec::from_expressions(&rows).map_err(|e| Error::Config(format!("{origin}: A: {e}")))?;
            (spec, t0)
        }
        SystemJson::Builtin { id, t0 } => (builtin_system(&id, seed)?, t0),
    };
    Ok(match t0 {
        Some(t0) if t0.is_finite() => spec.with_t0(t0),
        Some(t0) => return Err(Error::Config(format!("{origin}: t0 must be finite, got {t0}"))),
        None => spec,
    })
}

/// Loads `builtin:<id>`, inline JSON, or a path to a JSON file.
pub fn load_system(arg: &str, seed: u64) -> Result<SystemSpec> {
    if let Some(id) = arg.strip_prefix("builtin:") {
        return builtin_system(id, seed);
    }
    if arg.trim_start().starts_with('{') {
        return parse_system_json(arg, "inline system", seed);
    }
    let path = PathBuf::from(arg);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read system file {}: {e}", path.display())))?;
    parse_system_json(&text, &path.display().to_string(), seed)
}

/// Comma-separated reals, e.g. `"-4,3"`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("`{c}` is not a finite number in vector `{s}`")))
        })
        .collect()
}

/// `STABOUND_SEED`, defaulting to 0.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub system: SystemSpec,
    pub grid: TimeGrid,
    pub horizon: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub ode: OdeOptions,
    pub corollary: Option<(f64, f64)>,
}

impl AnalysisConfig {
    /// Uniform grid of `samples` points on `[t0, t_end]`, defaulting `t0`
    /// to the system's initial time.
    pub fn new(system: SystemSpec, t0: Option<f64>, t_end: f64, samples: usize) -> Result<Self> {
        let t0 = t0.unwrap_or(system.t0());
        if t0 < system.t0() {
            return Err(Error::Config(format!(
                "t0 = {t0} precedes the system's initial time {}",
                system.t0()
            )));
        }
        if samples < 2 {
            return Err(Error::Config(format!("need at least 2 samples, got {samples}")));
        }
        if !(t_end > t0) {
            return Err(Error::Config(format!("t_end ({t_end}) must exceed t0 ({t0})")));
        }
        let grid = TimeGrid::uniform(t0, t_end, samples).map_err(|e| Error::Config(e.to_string()))?;
        Ok(AnalysisConfig {
            system,
            grid,
            horizon: None,
            x0: None,
            ode: OdeOptions::default(),
            corollary: None,
        })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > self.grid.t_end()) || !horizon.is_finite() {
            return Err(Error::Config(format!(
                "horizon ({horizon}) must be finite and exceed t_end ({})",
                self.grid.t_end()
            )));
        }
        self.horizon = Some(horizon);
        Ok(self)
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.system.n() {
            return Err(Error::Config(format!(
                "x0 has {} components but the system has dimension {}",
                x0.len(),
                self.system.n()
            )));
        }
        self.x0 = Some(x0);
        Ok(self)
    }

    pub fn with_tolerances(mut self, rtol: Option<f64>, atol: Option<f64>) -> Result<Self> {
        if let Some(r) = rtol {
            self.ode.rtol = r;
        }
        if let Some(a) = atol {
            self.ode.atol = a;
        }
        self.ode.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(self)
    }

    pub fn with_corollary(mut self, gamma_tilde: f64, lambda_tilde: f64) -> Self {
        self.corollary = Some((gamma_tilde, lambda_tilde));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Weight,
    Envelopes,
    Trajectory,
    Certificate,
    Corollary,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Weight => "weight matrix",
            Stage::Envelopes => "envelopes",
            Stage::Trajectory => "trajectory",
            Stage::Certificate => "certificate",
            Stage::Corollary => "corollary",
            Stage::Output => "output",
        })
    }
}

/// A pipeline error tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// `0` ok, `2` configuration or input error, `3` not UAS, `1` anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotUas(_) => 3,
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::Grid(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::UnknownScenario { .. }
        | Error::Dimension { .. } => 2,
        Error::Entry { t, .. } if t.is_nan() => 2,
        _ => 1,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSummary {
    pub source: BoundSource,
    pub norm_kind: NormKind,
    pub lower_at_end: f64,
    pub upper_at_end: f64,
    /// `min_k (‖x‖ - lower) / ‖x‖` when a trajectory is available.
    pub min_lower_margin: Option<f64>,
    /// `min_k (upper - ‖x‖) / ‖x‖`.
    pub min_upper_margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub system: String,
    pub n: usize,
    pub t0: f64,
    pub t_end: f64,
    pub samples: usize,
    pub x0: Option<Vec<f64>>,
    pub certificate: Certificate,
    #[serde(rename = "L")]
    pub l: f64,
    pub horizon: Option<f64>,
    pub tail_bound: f64,
    pub lyapunov_residual: Option<f64>,
    pub dissipation_residual: Option<f64>,
    pub readable: ReadableEstimate,
    pub sandwich: Sandwich,
    pub verify_margin: f64,
    pub envelopes: Vec<EnvelopeSummary>,
    pub quadrature: &'static str,
    pub corollary: Option<CorollaryCriterion>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub weight: WeightTrajectory,
    pub trajectory: Option<Trajectory>,
    pub rugh: BoundEnvelope,
    pub lemma_l: BoundEnvelope,
    pub main: BoundEnvelope,
    pub main_weighted: BoundEnvelope,
    pub readable: BoundEnvelope,
    pub report: AnalysisReport,
}

fn describe(spec: &SystemSpec) -> String {
    match spec.kind() {
        SystemKind::Builtin { id, .. } => format!("builtin:{id}"),
        SystemKind::Constant(_) => format!("constant {0}x{0}", spec.n()),
        SystemKind::Expression(_) => format!("expression {0}x{0}", spec.n()),
    }
}

fn summarize(env: &BoundEnvelope, norms: Option<&[f64]>) -> EnvelopeSummary {
    let margins = norms.map(|v| {
        v.iter()
            .zip(env.lower.iter().zip(&env.upper))
            .map(|(x, (lo, hi))| {
                let s = x.abs().max(f64::MIN_POSITIVE);
                ((x - lo) / s, (hi - x) / s)
            })
            .fold((f64::INFINITY, f64::INFINITY), |(a, b), (c, d)| (a.min(c), b.min(d)))
    });
    EnvelopeSummary {
        source: env.source,
        norm_kind: env.norm_kind,
        lower_at_end: *env.lower.last().unwrap(),
        upper_at_end: *env.upper.last().unwrap(),
        min_lower_margin: margins.map(|m| m.0),
        min_upper_margin: margins.map(|m| m.1),
    }
}

pub fn run_analyze(cfg: &AnalysisConfig) -> std::result::Result<Analysis, StageError> {
    let spec = &cfg.system;
    let grid = &cfg.grid;
    let w = weight_trajectory(spec, grid, cfg.horizon, &cfg.ode).at(Stage::Weight)?;

    let trajectory = match &cfg.x0 {
        Some(x0) => Some(solve_ivp(spec, x0, grid, &cfg.ode).at(Stage::Trajectory)?),
        None => None,
    };
    let x0_norm = cfg.x0.as_deref().map_or(1.0, euclidean_norm);
    // without x0 the weighted envelope is normalised to ‖x0‖_{H(t0)} = 1
    let weighted_x0 = match &cfg.x0 {
        Some(x0) => x0.clone(),
        None => {
            let mut e1 = vec![0.0; spec.n()];
            e1[0] = 1.0;
            let s = weighted_vec_norm(&e1, &w.h_samples[0]).at(Stage::Envelopes)?;
            e1[0] = 1.0 / s;
            e1
        }
    };

    let l = sup_induced_norm(spec, grid).at(Stage::Envelopes)?;
    let rugh = rugh_bounds(spec, x0_norm, grid).at(Stage::Envelopes)?;
    let lemma_l = lemma_l_bounds(x0_norm, grid, l.max(f64::MIN_POSITIVE)).at(Stage::Envelopes)?;
    let main = main_bounds_euclidean(&w, x0_norm).at(Stage::Envelopes)?;
    let main_weighted = main_bounds_weighted(&w, &weighted_x0).at(Stage::Envelopes)?;
    let (readable_est, readable) = readable_bounds(&w, x0_norm).at(Stage::Envelopes)?;

    let cert = certificate_from_h(&w);
    let verify_margin = verify_certificate(spec, &cert, grid, &cfg.ode).at(Stage::Certificate)?;
    let lyap = if grid.len() >= 3 {
        Some(lyapunov_residual(spec, &w).at(Stage::Certificate)?)
    } else {
        None
    };
    let (dissipation, norms_i, norms_h) = match &trajectory {
        Some(traj) => (
            (grid.len() >= 3)
                .then(|| dissipation_residual(&w, traj))
                .transpose()
                .at(Stage::Trajectory)?,
            Some(traj.norms_i()),
            Some(w.weighted_norms(traj).at(Stage::Trajectory)?),
        ),
        None => (None, None, None),
    };
    let corollary = match cfg.corollary {
        Some((gt, lt)) => Some(corollary_check(spec, grid, gt, lt).at(Stage::Corollary)?),
        None => None,
    };

    let envelopes = vec![
        summarize(&rugh, norms_i.as_deref()),
        summarize(&lemma_l, norms_i.as_deref()),
        summarize(&main, norms_i.as_deref()),
        summarize(&main_weighted, norms_h.as_deref()),
        summarize(&readable, norms_i.as_deref()),
    ];
    let report = AnalysisReport {
        system: describe(spec),
        n: spec.n(),
        t0: grid.t0(),
        t_end: grid.t_end(),
        samples: grid.len(),
        x0: cfg.x0.clone(),
        certificate: cert,
        l,
        horizon: w.horizon,
        tail_bound: w.tail_bound,
        lyapunov_residual: lyap,
        dissipation_residual: dissipation,
        readable: readable_est,
        sandwich: sandwich(&w, l, &cert),
        verify_margin,
        envelopes,
        quadrature: "composite Simpson per grid interval, eigenvalue curves interpolated linearly; error O(dt^2)",
        corollary,
    };
    Ok(Analysis {
        weight: w,
        trajectory,
        rugh,
        lemma_l,
        main,
        main_weighted,
        readable,
        report,
    })
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl Analysis {
    /// CSV with [`CSV_HEADER`]; norm columns are empty without `x0`.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        wtr.write_record(CSV_HEADER).map_err(csv_err)?;
        let norms_i = self.trajectory.as_ref().map(|t| t.norms_i());
        let norms_h = match &self.trajectory {
            Some(t) => Some(self.weight.weighted_norms(t)?),
            None => None,
        };
        let opt = |v: Option<&Vec<f64>>, k: usize| v.map(|v| fmt_value(v[k])).unwrap_or_default();
        for (k, t) in self.weight.grid.samples().iter().enumerate() {
            wtr.write_record([
                fmt_value(*t),
                opt(norms_i.as_ref(), k),
                fmt_value(self.rugh.lower[k]),
                fmt_value(self.rugh.upper[k]),
                fmt_value(self.main.lower[k]),
                fmt_value(self.main.upper[k]),
                opt(norms_h.as_ref(), k),
                fmt_value(self.main_weighted.lower[k]),
                fmt_value(self.main_weighted.upper[k]),
                fmt_value(self.weight.lmin[k]),
                fmt_value(self.weight.lmax[k]),
            ])
            .map_err(csv_err)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    pub fn write_outputs(&self, csv_path: Option<&Path>, report_path: Option<&Path>) -> std::result::Result<(), StageError> {
        if let Some(p) = csv_path {
            let csv = self.to_csv().at(Stage::Output)?;
            std::fs::write(p, csv).map_err(Error::from).at(Stage::Output)?;
        }
        if let Some(p) = report_path {
            std::fs::write(p, self.report.to_json() + "\n").map_err(Error::from).at(Stage::Output)?;
        }
        Ok(())
    }
}

/// The log-measure test on the configured grid.
pub fn run_corollary(cfg: &AnalysisConfig, gamma_tilde: f64, lambda_tilde: f64) -> std::result::Result<CorollaryCriterion, StageError> {
    corollary_check(&cfg.system, &cfg.grid, gamma_tilde, lambda_tilde).at(Stage::Corollary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_sources() {
        let s = load_system(r#"{"kind":"constant","A":[[-1,0],[0,-2]]}"#, 0).unwrap();
        assert_eq!(s.as_constant().unwrap(), Matrix::diag(&[-1.0, -2.0]));
        let s = load_system(r#"{"kind":"expression","A":[["-1","exp(-t)"],[0,-3]],"t0":1}"#, 0).unwrap();
        assert_eq!(s.t0(), 1.0);
        assert_eq!(s.eval_a(1.0).unwrap()[(0, 1)], (-1f64).exp());
        let s = load_system(r#"{"kind":"builtin","id":"example3_ltv"}"#, 0).unwrap();
        assert_eq!(s.builtin_id(), Some("example3_ltv"));
        assert_eq!(load_system("builtin:random_uas:3", 5).unwrap().n(), 3);
        assert_eq!(load_system("builtin:random_uas", 5).unwrap().n(), 2);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_system("{\"kind\":\"constant\",\n\"A\":[[1,]]}", 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert_eq!(exit_code(&err), 2);
        assert_eq!(exit_code(&load_system("builtin:nope", 0).unwrap_err()), 2);
        assert_eq!(exit_code(&load_system("/nonexistent/sys.json", 0).unwrap_err()), 2);
        let bad_expr = load_system(r#"{"kind":"expression","A":[["exp(","0"],["0","-1"]]}"#, 0).unwrap_err();
        assert_eq!(exit_code(&bad_expr), 2);
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("-4, 3").unwrap(), vec![-4.0, 3.0]);
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("1,nan").is_err());
    }

    #[test]
    fn config_validation() {
        let spec = builtin_system("example1_lti", 0).unwrap();
        assert!(AnalysisConfig::new(spec.clone(), None, 0.0, 10).is_err());
        assert!(AnalysisConfig::new(spec.clone(), None, 1.0, 1).is_err());
        let cfg = AnalysisConfig::new(spec, None, 1.0, 11).unwrap();
        assert!(cfg.clone().with_horizon(0.5).is_err());
        assert!(cfg.clone().with_x0(vec![1.0]).is_err());
        assert!(cfg.with_tolerances(Some(-1.0), None).is_err());
    }

    #[test]
    fn analyze_without_state_has_empty_norm_columns() {
        let spec = builtin_system("example3_ltv", 0).unwrap();
        let cfg = AnalysisConfig::new(spec, None, 2.0, 21).unwrap();
        let a = run_analyze(&cfg).unwrap();
        let csv = a.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 11);
        assert_eq!(first[1], "");
        assert_eq!(first[6], "");
        assert_eq!(first[7].parse::<f64>().unwrap(), 1.0);
        assert!(a.report.envelopes.iter().all(|e| e.min_lower_margin.is_none()));
    }

    #[test]
    fn not_uas_maps_to_three() {
        let spec = load_system(r#"{"kind":"constant","A":[[0.1,0],[0,-1]]}"#, 0).unwrap();
        let cfg = AnalysisConfig::new(spec, None, 1.0, 11).unwrap();
        let err = run_analyze(&cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Weight);
        assert_eq!(exit_code(&err.source), 3);
    }
}
