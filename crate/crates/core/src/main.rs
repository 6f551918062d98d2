use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orthopolar::harness::{
    format_matrix, generate_problem, ingest_matrix, run_certify, run_compare, run_experiment,
    to_json, write_outputs, ExitStatus, ExperimentConfig, MatrixFormat, Outputs,
};
use orthopolar::linalg::SquareMatrix;
use orthopolar::Result;

#[derive(Parser, Debug)]
#[command(name = "orthopolar", version, about = "Polar factors by Riemannian gradient descent on O(n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run gradient descent trials and write trace.csv, summary.json and convergence.svg.
    Solve(RunArgs),
    /// Sweep the landscape certificates and write certificates.csv and certificates.json.
    Certify(RunArgs),
    /// Compare gradient descent, Newton and the SVD oracle; writes comparison.json.
    Compare(RunArgs),
    /// Write a generated problem matrix.
    Gen(GenArgs),
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated singular values, nonincreasing.
    #[arg(long, value_delimiter = ',')]
    spectrum: Option<Vec<f64>>,
    #[arg(long)]
    cond_number: Option<f64>,
    #[arg(long)]
    sigma_max: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// identity, haar, perturb or distance.
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// certified, adaptive, practical or fixed.
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Run without knowledge of the optimum (no distances or envelopes).
    #[arg(long)]
    no_oracle: bool,
    /// Also sweep certificates on every trial problem.
    #[arg(long)]
    certify: bool,
    #[arg(long)]
    cert_samples: Option<usize>,
    #[arg(long)]
    cert_radius: Option<f64>,
    /// Use this matrix instead of generated problems.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: csv or mm. Guessed from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for artifacts whose paths the config leaves unset.
    #[arg(long, env = "ORTHOPOLAR_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Trials run at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format: csv or mm. Guessed from the output extension when omitted.
    #[arg(long)]
    out_format: Option<String>,
}

fn format_for(explicit: Option<&str>, path: Option<&Path>) -> Result<MatrixFormat> {
    match (explicit, path) {
        (Some(f), _) => f.parse(),
        (None, Some(p)) => Ok(MatrixFormat::from_path(p)),
        (None, None) => Ok(MatrixFormat::Csv),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<(ExperimentConfig, Option<SquareMatrix>)> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = &self.$flag { cfg.$field = v.clone(); })*
            };
        }
        set!(n => n, sigma_max => sigma_max, trials => trials, seed => seed, start => start_strategy,
             radius => radius, step => step_policy, max_iters => max_iters,
             cert_samples => cert_samples, cert_radius => cert_radius);
        if self.spectrum.is_some() {
            cfg.spectrum = self.spectrum.clone();
        }
        if self.cond_number.is_some() {
            cfg.cond_number = self.cond_number;
            cfg.spectrum = None;
        }
        if self.eta.is_some() {
            cfg.eta = self.eta;
        }
        if self.grad_tol.is_some() {
            cfg.grad_tol = self.grad_tol;
        }
        if self.no_oracle {
            cfg.oracle = false;
        }
        if self.certify {
            cfg.certify = true;
        }
        let input = match &self.input {
            Some(path) => {
                let m = ingest_matrix(path, format_for(self.format.as_deref(), Some(path))?)?;
                if self.n.is_none() {
                    cfg.n = m.dim();
                }
                Some(m)
            }
            None => None,
        };
        cfg.validate()?;
        Ok((cfg, input))
    }
}

impl RunArgs {
    fn outputs(&self, cfg: &ExperimentConfig, names: [&str; 3]) -> Outputs {
        let pick = |flag: &Option<PathBuf>, configured: &Option<PathBuf>, name: &str| {
            flag.clone()
                .or_else(|| configured.clone())
                .or_else(|| (!name.is_empty()).then(|| self.out_dir.join(name)))
        };
        Outputs {
            csv_path: pick(&self.csv, &cfg.outputs.csv_path, names[0]),
            json_path: pick(&self.json, &cfg.outputs.json_path, names[1]),
            svg_path: pick(&self.svg, &cfg.outputs.svg_path, names[2]),
        }
    }
}

fn run(cli: Cli) -> Result<ExitStatus> {
    match cli.command {
        Command::Solve(args) => {
            let (cfg, input) = args.config.resolve()?;
            let outputs = args.outputs(&cfg, ["trace.csv", "summary.json", "convergence.svg"]);
            let out = run_experiment(&cfg, input.as_ref(), args.jobs)?;
            write_outputs(&outputs, &out.csv, &out.json, Some(&out.svg))?;
            let s = &out.summary;
            eprintln!(
                "{} trial(s): {} failed, {} envelope violation(s), {} certificate failure(s)",
                s.trials.len(),
                s.failed_trials,
                s.envelope_violations,
                s.certificate_failures
            );
            for t in &s.trials {
                if let Some(e) = &t.error {
                    eprintln!("trial {}: {e}", t.trial);
                }
                for v in &t.envelope_violations {
                    eprintln!(
                        "trial {}: {} envelope violated at t = {} (CSV line {})",
                        t.trial, v.envelope, v.t, v.csv_line
                    );
                }
            }
            Ok(out.status())
        }
        Command::Certify(args) => {
            let (cfg, input) = args.config.resolve()?;
            let outputs = args.outputs(&cfg, ["certificates.csv", "certificates.json", ""]);
            let out = run_certify(&cfg, input.as_ref(), args.jobs)?;
            write_outputs(&outputs, &out.csv, &out.json, None)?;
            eprintln!(
                "{} certificate failure(s), {} failed trial(s)",
                out.summary.certificate_failures, out.summary.failed_trials
            );
            Ok(out.summary.status)
        }
        Command::Compare(args) => {
            let (cfg, input) = args.config.resolve()?;
            let outputs = args.outputs(&cfg, ["", "comparison.json", ""]);
            let out = run_compare(&cfg, input.as_ref())?;
            write_outputs(&Outputs { csv_path: None, ..outputs }, "", &to_json(&out)?, None)?;
            for c in &out.trials {
                for e in &c.entries {
                    eprintln!(
                        "{:>8}: iterations {:>7}  |X - X*|_F {}  {}",
                        e.method,
                        e.iterations.map_or("-".into(), |i| i.to_string()),
                        e.residual.map_or("-".into(), |r| format!("{r:.3e}")),
                        e.note.as_deref().unwrap_or("")
                    );
                }
            }
            Ok(out.status)
        }
        Command::Gen(args) => {
            let (cfg, _) = args.config.resolve()?;
            let p = generate_problem(&cfg, args.trial)?;
            let format = format_for(args.out_format.as_deref(), args.output.as_deref())?;
            let text = format_matrix(p.c().as_matrix(), format);
            match &args.output {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(ExitStatus::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let status = match run(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::from_error(&e)
        }
    };
    ExitCode::from(status.code() as u8)
}
