use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weissbench::lorentz::{self, LorentzIndex, StepFunction};
use weissbench::report::{Check, Params, Summary, Table};
use weissbench::suites::{self, SuiteConfig, SuiteOutput};

const CHECK_FAILED: u8 = 1;
const CONFIG_INVALID: u8 = 2;
const IO_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "weissbench", version, about = "Verification suites for weighted admissibility of diagonal semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// L^{p,q} norm of a step function read from CSV (`breakpoint,value`).
    LorentzNorm(LorentzArgs),
    /// Decay samples t^{1/2}|CT(t)x|/|x| of the witness orbit.
    Orbit(ScenarioArgs),
    /// Weiss quotients of the witness over the right half-plane.
    WeissScan(ScenarioArgs),
    /// Coefficients, orbit bound and the endpoint divergence profile.
    Counterexample(ScenarioArgs),
    /// Gram diagonal, non-Besselian ratio and Hilbertian estimate.
    BesselCheck(ScenarioArgs),
    /// Every suite in order.
    FullReport(ScenarioArgs),
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Secondary Lorentz index of the witness, in (2, ∞).
    #[arg(long, default_value_t = 4.0)]
    q: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 1e-8)]
    eps_min: f64,
    #[arg(long, env = "WEISSBENCH_OUTPUT_DIR", default_value = "weissbench-output")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug)]
struct LorentzArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    p: f64,
    /// Secondary index; `inf` selects the weak norm.
    #[arg(long)]
    q: String,
    #[arg(long, env = "WEISSBENCH_OUTPUT_DIR", default_value = "weissbench-output")]
    output_dir: PathBuf,
}

enum Failure {
    Config(String),
    Io(String),
}

impl ScenarioArgs {
    fn config(&self) -> Result<SuiteConfig, Failure> {
        if !(self.q > 2.0 && self.q.is_finite()) {
            return Err(Failure::Config(format!("--q must lie in (2, inf), got {}", self.q)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Failure::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Failure::Config(format!("--tau must lie in (0, 1], got {}", self.tau)));
        }
        if !(self.eps_min > 0.0 && self.eps_min < self.tau) {
            return Err(Failure::Config(format!(
                "--eps-min must lie in (0, tau), got {}",
                self.eps_min
            )));
        }
        Ok(SuiteConfig {
            q: self.q,
            tol: self.tol,
            tau: self.tau,
            eps_min: self.eps_min,
            seed: self.seed,
        })
    }
}

fn parse_secondary_index(q: &str) -> Result<f64, Failure> {
    match q.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other
            .parse()
            .map_err(|_| Failure::Config(format!("--q must be a number or inf, got {q:?}"))),
    }
}

fn io_failure(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {err}", path.display()))
}

/// Writes every table, then the summary; returns the summary.
fn emit(dir: &Path, params: Params, out: SuiteOutput) -> Result<Summary, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    for table in &out.tables {
        table
            .write_to(dir)
            .map_err(|e| io_failure(&dir.join(&table.file_name), e))?;
    }
    let summary = Summary {
        params,
        checks: out.checks,
    };
    let path = dir.join("summary.json");
    let json = summary.to_json().map_err(|e| io_failure(&path, e))?;
    fs::write(&path, json).map_err(|e| io_failure(&path, e))?;
    Ok(summary)
}

fn lorentz_norm(args: &LorentzArgs) -> Result<Summary, Failure> {
    let q = parse_secondary_index(&args.q)?;
    let idx = if q.is_infinite() {
        LorentzIndex::weak(args.p)
    } else {
        LorentzIndex::new(args.p, q)
    }
    .map_err(|e| Failure::Config(e.to_string()))?;
    let text = fs::read_to_string(&args.input).map_err(|e| io_failure(&args.input, e))?;
    let f = StepFunction::from_csv(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.input.display())))?;
    let norm = lorentz::lorentz_norm(&f, idx);
    println!("{norm}");

    let mut table = Table::new("lorentz_norm.csv", &["p", "q", "norm"]);
    table.push(vec![args.p.into(), q.into(), norm.into()]);
    let check = Check::new(
        "lorentz_norm_finite",
        norm.is_finite(),
        None,
        format!("||f||_(p,q) = {norm} over {} cells", f.values().len()),
    );
    let out = SuiteOutput {
        tables: vec![table],
        checks: vec![check],
    };
    emit(&args.output_dir, Params::from_q(q), out)
}

fn scenario(args: &ScenarioArgs, suite: fn(&SuiteConfig) -> SuiteOutput) -> Result<Summary, Failure> {
    let cfg = args.config()?;
    emit(&args.output_dir, Params::from_q(cfg.q), suite(&cfg))
}

fn run(cli: &Cli) -> Result<Summary, Failure> {
    match &cli.command {
        Command::LorentzNorm(a) => lorentz_norm(a),
        Command::Orbit(a) => scenario(a, suites::orbit_suite),
        Command::WeissScan(a) => scenario(a, |cfg| {
            let mut out = suites::weiss_scan_suite(cfg);
            out.append(suites::orthonormal_suite(cfg));
            out
        }),
        Command::Counterexample(a) => scenario(a, suites::counterexample_suite),
        Command::BesselCheck(a) => scenario(a, suites::bessel_suite),
        Command::FullReport(a) => scenario(a, suites::full_report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            if !matches!(cli.command, Command::LorentzNorm(_)) {
                for check in &summary.checks {
                    println!("{}", check.line());
                }
            }
            if summary.all_pass() {
                ExitCode::SUCCESS
            } else {
                for check in summary.failed() {
                    eprintln!("failed: {}", check.line());
                }
                ExitCode::from(CHECK_FAILED)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(CONFIG_INVALID)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(IO_ERROR)
        }
    }
}
