//! Experiment runner behind the command-line interface: problem generation,
//! batched solves and certificate sweeps, and the CSV/JSON/SVG artifacts.

mod config;
mod matrix_io;
mod output;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{compare_solvers, Comparison, CompareSettings, NewtonSettings, RgdSettings};
use crate::certificates::{certificate_sweep, CertificateKind, CertificateReport};
use crate::error::{Error, Result};
use crate::geometry::haar_sample;
use crate::linalg::{Mat, SquareMatrix};
use crate::objective::ProcrustesProblem;
use crate::solver::{solve, start_registry, step_rule_registry, SolveOptions, SolveTrace, TerminationReason};

pub use config::{ExperimentConfig, Outputs};
pub use matrix_io::{
    format_matrix, ingest_matrix, parse_csv, parse_matrix_market, write_matrix, MatrixFormat,
};
pub use output::{csv_row, render_svg, to_json, Curve, Panel, CSV_HEADER};

/// Relative slack allowed above an envelope before a row counts as a violation.
pub const ENVELOPE_SLACK: f64 = 1e-6;
/// Largest `|X - X*|_F` a comparison accepts.
pub const AGREEMENT_TOL: f64 = 1e-7;

/// Process exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Success,
    Usage,
    Numerical,
    Io,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::Usage => 1,
            Self::Numerical => 2,
            Self::Io => 3,
        }
    }

    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::Io(_) => Self::Io,
            Error::Config(_)
            | Error::UnknownStrategy { .. }
            | Error::Parse { .. }
            | Error::NotSquare { .. }
            | Error::Json(_)
            | Error::NonFiniteInput
            | Error::ZeroMatrix
            | Error::DimensionMismatch { .. } => Self::Usage,
            _ => Self::Numerical,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `C = U diag(σ) Vᵀ` with Haar `U`, `V`; deterministic in `(seed, trial)`.
pub fn generate_problem(cfg: &ExperimentConfig, trial: usize) -> Result<ProcrustesProblem> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    generate_with(cfg, &mut rng)
}

fn generate_with(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<ProcrustesProblem> {
    let u = haar_sample(cfg.n, rng);
    let v = haar_sample(cfg.n, rng);
    let s = nalgebra::DVector::from_vec(cfg.singular_values());
    ProcrustesProblem::from_matrix(u.matrix() * Mat::from_diagonal(&s) * v.matrix().transpose())
}

/// The problem and generator for one trial. An ingested matrix is shared by
/// every trial; only the starting points then differ.
fn trial_problem(
    cfg: &ExperimentConfig,
    input: Option<&SquareMatrix>,
    trial: usize,
) -> Result<(ProcrustesProblem, ChaCha8Rng)> {
    let mut rng = trial_rng(cfg.seed, trial);
    let p = match input {
        Some(c) => ProcrustesProblem::new(c.clone())?,
        None => generate_with(cfg, &mut rng)?,
    };
    Ok((p, rng))
}

fn sweep_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.seed.wrapping_mul(1_000_003).wrapping_add(trial as u64)
}

fn check_input(cfg: &ExperimentConfig, input: Option<&SquareMatrix>) -> Result<()> {
    cfg.validate()?;
    if let Some(c) = input {
        if c.dim() != cfg.n {
            return Err(Error::Config(format!(
                "input matrix is {0}x{0} but n = {1}",
                c.dim(),
                cfg.n
            )));
        }
    }
    Ok(())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// A trace row that rose above its envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvelopeViolation {
    pub envelope: &'static str,
    pub t: usize,
    /// 1-based line of the offending row in the trace CSV.
    pub csv_line: usize,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateSummary {
    pub checked: usize,
    pub failures: usize,
    pub vacuous: usize,
    pub failed: Vec<CertificateReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialSummary {
    pub trial: usize,
    pub error: Option<String>,
    pub singular: Option<bool>,
    pub iterations: Option<usize>,
    pub termination: Option<TerminationReason>,
    pub initial_distance: Option<f64>,
    pub envelope_eta: Option<f64>,
    pub final_residual: Option<f64>,
    pub final_f_gap: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub envelope_violations: Vec<EnvelopeViolation>,
    pub certificates: Option<CertificateSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialSummary>,
    pub failed_trials: usize,
    pub envelope_violations: usize,
    pub certificate_failures: usize,
    pub status: ExitStatus,
}

/// Everything a run produces, before it is written anywhere.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub traces: Vec<Option<SolveTrace>>,
    pub csv: String,
    pub json: String,
    pub svg: String,
}

impl ExperimentOutcome {
    pub fn status(&self) -> ExitStatus {
        self.summary.status
    }
}

struct TrialRun {
    summary: TrialSummary,
    trace: Option<SolveTrace>,
}

fn empty_trial(trial: usize, error: String) -> TrialSummary {
    TrialSummary {
        trial,
        error: Some(error),
        singular: None,
        iterations: None,
        termination: None,
        initial_distance: None,
        envelope_eta: None,
        final_residual: None,
        final_f_gap: None,
        final_grad_norm: None,
        envelope_violations: Vec::new(),
        certificates: None,
    }
}

fn summarize_certificates(reports: Vec<CertificateReport>) -> CertificateSummary {
    let checked = reports.len();
    let vacuous = reports.iter().filter(|r| r.vacuous).count();
    let failed: Vec<_> = reports.into_iter().filter(|r| !r.passed).collect();
    CertificateSummary {
        checked,
        failures: failed.len(),
        vacuous,
        failed,
    }
}

fn run_trial(cfg: &ExperimentConfig, input: Option<&SquareMatrix>, trial: usize) -> TrialRun {
    match try_run_trial(cfg, input, trial) {
        Ok(run) => run,
        Err(e) => TrialRun {
            summary: empty_trial(trial, e.to_string()),
            trace: None,
        },
    }
}

fn try_run_trial(
    cfg: &ExperimentConfig,
    input: Option<&SquareMatrix>,
    trial: usize,
) -> Result<TrialRun> {
    let (p, mut rng) = trial_problem(cfg, input, trial)?;
    let rule = step_rule_registry().get(&cfg.step_policy)?;
    let start = start_registry().get(&cfg.start_strategy)?;
    let x0 = start.start(&p, cfg.radius, &mut rng)?;
    let mut opts = SolveOptions::defaults_for(&p);
    opts.max_iters = cfg.max_iters;
    opts.oracle = cfg.oracle;
    opts.user_eta = cfg.eta;
    if let Some(tol) = cfg.grad_tol {
        opts.grad_tol = tol;
    }
    let res = solve(&p, &x0, rule.as_ref(), &opts)?;
    let last = res.trace.rows.last().expect("a solve records at least one row");
    let certificates = if cfg.certify {
        Some(summarize_certificates(certificate_sweep(
            &p,
            cfg.cert_samples,
            cfg.cert_radius,
            sweep_seed(cfg, trial),
        )?))
    } else {
        None
    };
    let summary = TrialSummary {
        trial,
        error: None,
        singular: Some(p.is_singular()),
        iterations: Some(res.iterations),
        termination: Some(res.termination),
        initial_distance: res.trace.initial_distance,
        envelope_eta: res.trace.envelope_eta,
        final_residual: (cfg.oracle && !p.is_singular())
            .then(|| (res.x.matrix() - p.x_star().matrix()).norm()),
        final_f_gap: Some(last.f_gap),
        final_grad_norm: Some(last.grad_norm),
        envelope_violations: Vec::new(),
        certificates,
    };
    Ok(TrialRun {
        summary,
        trace: Some(res.trace),
    })
}

/// Rows of `trace` above either envelope; the linear envelope only applies to
/// invertible `C`. `first_line` is the CSV line of the trace's first row.
pub fn envelope_violations(
    trace: &SolveTrace,
    singular: bool,
    first_line: usize,
) -> Vec<EnvelopeViolation> {
    let mut out = Vec::new();
    for (k, row) in trace.rows.iter().enumerate() {
        if let (Some(d), Some(bound), false) = (row.dist_to_star, row.linear_envelope, singular) {
            if d * d > bound * (1.0 + ENVELOPE_SLACK) {
                out.push(EnvelopeViolation {
                    envelope: "linear",
                    t: row.t,
                    csv_line: first_line + k,
                    observed: d * d,
                    bound,
                });
            }
        }
        if let Some(bound) = row.sublinear_envelope {
            if row.f_gap > bound * (1.0 + ENVELOPE_SLACK) {
                out.push(EnvelopeViolation {
                    envelope: "sublinear",
                    t: row.t,
                    csv_line: first_line + k,
                    observed: row.f_gap,
                    bound,
                });
            }
        }
    }
    out
}

fn convergence_panels(traces: &[Option<SolveTrace>]) -> Vec<Panel> {
    let mut dist = Panel {
        title: "squared distance to X* (solid) and linear envelope (dashed)".into(),
        curves: Vec::new(),
    };
    let mut gap = Panel {
        title: "f(X_t) - f* (solid) and sublinear envelope (dashed)".into(),
        curves: Vec::new(),
    };
    for (trial, trace) in traces.iter().enumerate() {
        let Some(trace) = trace else { continue };
        let series = |f: &dyn Fn(&crate::solver::TraceRow) -> Option<f64>| -> Vec<(usize, f64)> {
            trace.rows.iter().filter_map(|r| f(r).map(|v| (r.t, v))).collect()
        };
        let push = |panel: &mut Panel, label: &str, dashed: bool, points: Vec<(usize, f64)>| {
            if !points.is_empty() {
                panel.curves.push(Curve {
                    label: format!("trial {trial}: {label}"),
                    trial,
                    dashed,
                    points,
                });
            }
        };
        push(&mut dist, "dist²", false, series(&|r| r.dist_to_star.map(|d| d * d)));
        push(&mut dist, "linear envelope", true, series(&|r| r.linear_envelope));
        push(&mut gap, "f gap", false, series(&|r| Some(r.f_gap)));
        push(&mut gap, "sublinear envelope", true, series(&|r| r.sublinear_envelope));
    }
    if dist.curves.is_empty() {
        vec![gap]
    } else {
        vec![dist, gap]
    }
}

/// Runs every trial (up to `jobs` at once) and renders the artifacts.
/// Trial failures are recorded in the summary, not returned as errors.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    input: Option<&SquareMatrix>,
    jobs: usize,
) -> Result<ExperimentOutcome> {
    check_input(cfg, input)?;
    let runs: Vec<TrialRun> = thread_pool(jobs)?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, input, t))
            .collect()
    });

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut line = 2;
    let mut trials = Vec::with_capacity(runs.len());
    let mut traces = Vec::with_capacity(runs.len());
    for mut run in runs {
        if let Some(trace) = &run.trace {
            run.summary.envelope_violations =
                envelope_violations(trace, run.summary.singular.unwrap_or(false), line);
            for row in &trace.rows {
                csv.push_str(&csv_row(run.summary.trial, row));
                csv.push('\n');
            }
            line += trace.rows.len();
        }
        trials.push(run.summary);
        traces.push(run.trace);
    }

    let failed_trials = trials.iter().filter(|t| t.error.is_some()).count();
    let envelope_violations: usize = trials.iter().map(|t| t.envelope_violations.len()).sum();
    let certificate_failures: usize = trials
        .iter()
        .filter_map(|t| t.certificates.as_ref())
        .map(|c| c.failures)
        .sum();
    let status = if failed_trials + envelope_violations + certificate_failures > 0 {
        ExitStatus::Numerical
    } else {
        ExitStatus::Success
    };
    let summary = ExperimentSummary {
        config: cfg.clone(),
        trials,
        failed_trials,
        envelope_violations,
        certificate_failures,
        status,
    };
    let json = to_json(&summary)?;
    let svg = render_svg(&convergence_panels(&traces));
    Ok(ExperimentOutcome {
        summary,
        traces,
        csv,
        json,
        svg,
    })
}

fn write_artifact(path: Option<&Path>, contents: &str) -> Result<()> {
    if let Some(path) = path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, contents)?;
    }
    Ok(())
}

/// Writes the CSV, JSON and SVG artifacts to the configured paths.
pub fn write_outputs(outputs: &Outputs, csv: &str, json: &str, svg: Option<&str>) -> Result<()> {
    write_artifact(outputs.csv_path.as_deref(), csv)?;
    write_artifact(outputs.json_path.as_deref(), json)?;
    if let Some(svg) = svg {
        write_artifact(outputs.svg_path.as_deref(), svg)?;
    }
    Ok(())
}

pub const CERTIFICATE_CSV_HEADER: &str = "trial,kind,sample_point,lhs,rhs,slack,passed,vacuous";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KindSummary {
    pub kind: CertificateKind,
    pub checked: usize,
    pub failures: usize,
    pub min_slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifyTrial {
    pub trial: usize,
    pub error: Option<String>,
    pub singular: Option<bool>,
    pub kinds: Vec<KindSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifySummary {
    pub config: ExperimentConfig,
    pub trials: Vec<CertifyTrial>,
    pub certificate_failures: usize,
    pub failed_trials: usize,
    pub status: ExitStatus,
}

#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub summary: CertifySummary,
    pub reports: Vec<Vec<CertificateReport>>,
    pub csv: String,
    pub json: String,
}

fn kind_summaries(reports: &[CertificateReport]) -> Vec<KindSummary> {
    let mut out: Vec<KindSummary> = Vec::new();
    for r in reports {
        let entry = match out.iter_mut().find(|k| k.kind == r.kind) {
            Some(e) => e,
            None => {
                out.push(KindSummary {
                    kind: r.kind,
                    checked: 0,
                    failures: 0,
                    min_slack: None,
                });
                out.last_mut().expect("just pushed")
            }
        };
        entry.checked += 1;
        entry.failures += usize::from(!r.passed);
        entry.min_slack = Some(entry.min_slack.map_or(r.slack, |m| m.min(r.slack)));
    }
    out
}

/// Certificate sweeps only, one per trial problem.
pub fn run_certify(
    cfg: &ExperimentConfig,
    input: Option<&SquareMatrix>,
    jobs: usize,
) -> Result<CertifyOutcome> {
    check_input(cfg, input)?;
    let results: Vec<Result<(bool, Vec<CertificateReport>)>> = thread_pool(jobs)?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let (p, _) = trial_problem(cfg, input, t)?;
                let reports = certificate_sweep(&p, cfg.cert_samples, cfg.cert_radius, sweep_seed(cfg, t))?;
                Ok((p.is_singular(), reports))
            })
            .collect()
    });

    let mut csv = String::from(CERTIFICATE_CSV_HEADER);
    csv.push('\n');
    let mut trials = Vec::new();
    let mut all = Vec::new();
    for (t, res) in results.into_iter().enumerate() {
        match res {
            Ok((singular, reports)) => {
                for r in &reports {
                    let _ = std::fmt::Write::write_fmt(
                        &mut csv,
                        format_args!(
                            "{t},{},\"{}\",{:.16e},{:.16e},{:.16e},{},{}\n",
                            r.kind, r.sample_point, r.lhs, r.rhs, r.slack, r.passed, r.vacuous
                        ),
                    );
                }
                trials.push(CertifyTrial {
                    trial: t,
                    error: None,
                    singular: Some(singular),
                    kinds: kind_summaries(&reports),
                });
                all.push(reports);
            }
            Err(e) => {
                trials.push(CertifyTrial {
                    trial: t,
                    error: Some(e.to_string()),
                    singular: None,
                    kinds: Vec::new(),
                });
                all.push(Vec::new());
            }
        }
    }
    let certificate_failures = all.iter().flatten().filter(|r| !r.passed).count();
    let failed_trials = trials.iter().filter(|t| t.error.is_some()).count();
    let status = if certificate_failures + failed_trials > 0 {
        ExitStatus::Numerical
    } else {
        ExitStatus::Success
    };
    let summary = CertifySummary {
        config: cfg.clone(),
        trials,
        certificate_failures,
        failed_trials,
        status,
    };
    let json = to_json(&summary)?;
    Ok(CertifyOutcome {
        summary,
        reports: all,
        csv,
        json,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareSummary {
    pub config: ExperimentConfig,
    pub trials: Vec<Comparison>,
    pub disagreements: usize,
    pub status: ExitStatus,
}

/// Gradient descent, Newton and the SVD oracle side by side on each trial
/// problem. Wall times make this output non-reproducible byte for byte.
pub fn run_compare(cfg: &ExperimentConfig, input: Option<&SquareMatrix>) -> Result<CompareSummary> {
    check_input(cfg, input)?;
    let settings = CompareSettings {
        rgd: RgdSettings {
            step: cfg.step_policy.clone(),
            start: cfg.start_strategy.clone(),
            radius: cfg.radius,
            eta: cfg.eta,
            grad_tol: cfg.grad_tol,
            max_iters: cfg.max_iters,
            seed: cfg.seed,
        },
        newton: NewtonSettings::default(),
    };
    let mut trials = Vec::new();
    for t in 0..cfg.trials {
        let (p, _) = trial_problem(cfg, input, t)?;
        let settings = CompareSettings {
            rgd: RgdSettings {
                seed: sweep_seed(cfg, t),
                ..settings.rgd.clone()
            },
            ..settings.clone()
        };
        trials.push(compare_solvers(p.c(), &settings)?);
    }
    let disagreements = trials
        .iter()
        .flat_map(|c| c.entries.iter().map(move |e| (c.singular, e)))
        .filter(|(singular, e)| {
            let excluded = *singular && e.method == "newton";
            !excluded && (e.note.is_some() || e.residual.is_some_and(|r| r > AGREEMENT_TOL))
        })
        .count();
    Ok(CompareSummary {
        config: cfg.clone(),
        trials,
        disagreements,
        status: if disagreements > 0 {
            ExitStatus::Numerical
        } else {
            ExitStatus::Success
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;

    #[test]
    fn generated_spectrum_matches_request() {
        let cfg = ExperimentConfig {
            n: 6,
            cond_number: Some(1e3),
            seed: 4,
            ..Default::default()
        };
        let p = generate_problem(&cfg, 2).unwrap();
        let s = singular_values(p.c()).unwrap();
        for (a, b) in s.iter().zip(cfg.singular_values()) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} {b}");
        }
        assert!((p.sigma_min() - 1e-3).abs() < 1e-12);
        let q = generate_problem(&cfg, 2).unwrap();
        assert_eq!(p.c(), q.c());
        assert_ne!(p.c(), generate_problem(&cfg, 3).unwrap().c());
    }

    #[test]
    fn orthogonal_and_singular_spectra() {
        let cfg = ExperimentConfig {
            n: 4,
            ..Default::default()
        };
        let p = generate_problem(&cfg, 0).unwrap();
        assert!(crate::linalg::orthogonality_residual(p.c()) < 1e-13);
        let cfg = ExperimentConfig {
            n: 3,
            spectrum: Some(vec![2.0, 1.0, 0.0]),
            ..Default::default()
        };
        assert!(generate_problem(&cfg, 0).unwrap().is_singular());
    }

    #[test]
    fn smoke_run_produces_all_artifacts() {
        let out = run_experiment(&ExperimentConfig::default(), None, 1).unwrap();
        assert_eq!(out.status(), ExitStatus::Success);
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        let rows = out.traces[0].as_ref().unwrap().rows.len();
        assert_eq!(lines.len(), rows + 1);
        assert!(out.json.contains("\"trials\""));
        assert!(out.svg.starts_with("<svg"));
    }

    #[test]
    fn oversized_step_reports_violation_rows() {
        let cfg = ExperimentConfig {
            n: 3,
            step_policy: "fixed".into(),
            eta: Some(1.9),
            radius: 0.5,
            max_iters: 50,
            ..Default::default()
        };
        let out = run_experiment(&cfg, None, 1).unwrap();
        assert_eq!(out.status(), ExitStatus::Numerical);
        let v = &out.summary.trials[0].envelope_violations;
        assert!(!v.is_empty());
        let lines: Vec<&str> = out.csv.lines().collect();
        let row = lines[v[0].csv_line - 1];
        assert!(row.starts_with(&format!("0,{},", v[0].t)), "{row}");
    }

    #[test]
    fn trial_errors_are_recorded() {
        let cfg = ExperimentConfig {
            n: 3,
            step_policy: "certified".into(),
            start_strategy: "haar".into(),
            trials: 4,
            ..Default::default()
        };
        let out = run_experiment(&cfg, None, 2).unwrap();
        // Haar starts are usually farther than π from the optimum, where the
        // certified step is undefined.
        assert!(out.summary.failed_trials > 0);
        assert_eq!(out.status(), ExitStatus::Numerical);
        assert_eq!(out.summary.trials.len(), 4);
        assert!(out.summary.trials.iter().enumerate().all(|(i, t)| t.trial == i));
    }

    #[test]
    fn non_oracle_runs_leave_distance_cells_empty() {
        let cfg = ExperimentConfig {
            n: 3,
            oracle: false,
            step_policy: "practical".into(),
            start_strategy: "identity".into(),
            ..Default::default()
        };
        let out = run_experiment(&cfg, None, 1).unwrap();
        for line in out.csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 10);
            assert!(cells[5].is_empty() && cells[6].is_empty() && cells[9].is_empty());
        }
    }

    #[test]
    fn certify_run_passes() {
        let cfg = ExperimentConfig {
            n: 4,
            trials: 2,
            cert_samples: 20,
            cond_number: Some(10.0),
            ..Default::default()
        };
        let out = run_certify(&cfg, None, 1).unwrap();
        assert_eq!(out.summary.status, ExitStatus::Success);
        assert_eq!(out.csv.lines().count(), 1 + 2 * 20 * 9);
    }

    #[test]
    fn compare_run_agrees() {
        let cfg = ExperimentConfig {
            n: 4,
            cond_number: Some(5.0),
            ..Default::default()
        };
        let out = run_compare(&cfg, None).unwrap();
        assert_eq!(out.status, ExitStatus::Success, "{out:?}");
    }

    #[test]
    fn input_dimension_must_match() {
        let cfg = ExperimentConfig::default();
        let c = SquareMatrix::identity(3);
        assert!(matches!(run_experiment(&cfg, Some(&c), 1), Err(Error::Config(_))));
    }

    #[test]
    fn exit_status_mapping() {
        assert_eq!(ExitStatus::from_error(&Error::Config("x".into())).code(), 1);
        assert_eq!(
            ExitStatus::from_error(&Error::Io(std::io::Error::other("x"))).code(),
            3
        );
        assert_eq!(ExitStatus::from_error(&Error::NoConvergence { iterations: 1 }).code(), 2);
    }
}
