use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qrw_core::generators::{Budget, GKSLData};
use qrw_core::lab::appendix::appendix_a_suite;
use qrw_core::lab::checks::{decomposition_suite, dilation_check, multiplicativity_check};
use qrw_core::lab::config::{GeneratorDescriptor, SweepConfig};
use qrw_core::lab::example7::example7_suite;
use qrw_core::lab::report::{CheckLine, SuiteReport};
use qrw_core::lab::sweep::convergence_sweep;
use qrw_core::random::WMode;
use qrw_core::QrwError;

const DECOMPOSITION_TOL: f64 = 1e-11;

#[derive(Parser)]
#[command(name = "qrw", version, about = "Quantum random walks on toy Fock space and their cocycle limits")]
struct Cli {
    /// Tolerance for dilation and homomorphism checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Largest toy-space dimension d_h·d_khat^n that may be materialized.
    #[arg(long, global = true, default_value_t = 4096)]
    max_dim: usize,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for CSV and JSON output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Walk elements against cocycle elements over an h grid.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Closed forms, moments, positions and asymmetric products of the scalar example.
    Example7 {
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
    },
    /// Compressed dilation semigroup against the GKSL exponential.
    Dilate {
        /// Generator descriptor of kind gksl or random_gksl.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 1.0])]
        t_grid: Vec<f64>,
    },
    /// Discrete Wiener–Itô residuals for seeded random generators.
    Decompose {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        d_h: usize,
        #[arg(long, default_value_t = 1)]
        d_k: usize,
        #[arg(long, default_value_t = 0.5)]
        h: f64,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
    /// Exact simplex-minus-boxes integrals against the displayed estimate.
    AppendixA {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        m_max: usize,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
    },
    /// Homomorphism deviations of repeated-interaction walks.
    Multhom {
        /// Generator descriptor of kind gksl or random_gksl.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01])]
        h: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        m_max: usize,
    },
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<QrwError> for Failure {
    fn from(e: QrwError) -> Self {
        match e {
            QrwError::Budget { .. } | QrwError::TruncationCap { .. } => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

struct Output<'a> {
    dir: Option<&'a Path>,
}

impl Output<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let Some(dir) = self.dir else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }
}

fn gksl_source(config: Option<&Path>, seed: u64) -> Result<GKSLData, Failure> {
    let desc = match config {
        Some(p) => GeneratorDescriptor::from_path(p)?,
        None => GeneratorDescriptor::RandomGksl { d_h: 2, d_k: 1, scale: 0.5, w: WMode::Random, seed: None },
    };
    desc.gksl_data(seed).ok_or_else(|| {
        let name = config.map(|p| p.display().to_string()).unwrap_or_default();
        Failure::Input(format!("{name}: descriptor must be of kind gksl or random_gksl"))
    })
}

fn run(cli: &Cli) -> Outcome {
    let out = Output { dir: cli.out.as_deref() };
    let budget = Budget::new(cli.max_dim);
    match &cli.cmd {
        Cmd::Converge { config } => {
            let cfg = SweepConfig::from_path(config)?;
            cfg.validate_dims(cli.seed).map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            let rep = convergence_sweep(&cfg, cli.seed)?;
            let csv = rep.to_csv();
            out.write("converge.csv", &csv)?;
            out.json("converge.json", &rep)?;
            println!("h,sup");
            for s in &rep.sup {
                println!("{},{}", s.h, s.sup_abs_err);
            }
            let tol = rep.tol.map_or_else(|| "-".to_string(), |t| format!("{t:e}"));
            println!("monotone={} final_sup={:e} tol={tol}", rep.monotone, rep.final_sup);
            println!("{}", if rep.passed { "PASS converge" } else { "FAIL converge" });
            Ok(rep.passed)
        }
        Cmd::Example7 { c, h, tmax } => {
            let rep = example7_suite(*c, *h, *tmax)?;
            out.json("example7.json", &rep)?;
            print!("{}", rep.summary());
            Ok(rep.passed())
        }
        Cmd::Dilate { config, t_grid } => {
            let data = gksl_source(config.as_deref(), cli.seed)?;
            let mut rep = dilation_check(&data, t_grid, cli.tol)?;
            rep.seed = Some(cli.seed);
            out.json("dilate.json", &rep)?;
            print!("{}", rep.summary());
            Ok(rep.passed())
        }
        Cmd::Decompose { count, d_h, d_k, h, n_max } => {
            let rows = decomposition_suite(*count, *d_h, *d_k, *h, *n_max, cli.seed, budget)?;
            let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
            let mut rep = SuiteReport::new("decompose");
            rep.seed = Some(cli.seed);
            rep.push(CheckLine::within("max_residual", worst, DECOMPOSITION_TOL));
            let mut csv = String::from("instance,n,residual\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{}\n", r.instance, r.n, r.residual));
            }
            out.write("decompose.csv", &csv)?;
            out.json("decompose.json", &serde_json::json!({ "report": rep, "rows": rows }))?;
            print!("{}", rep.summary());
            Ok(rep.passed())
        }
        Cmd::AppendixA { count, m_max, t_max } => {
            let (rows, rep) = appendix_a_suite(*count, *m_max, *t_max, cli.seed)?;
            let mut csv = String::from("instance,m,h,t,exact,bound,corrected_bound\n");
            for r in &rows {
                let x = &r.result;
                csv.push_str(&format!("{},{},{},{},{},{},{}\n", r.instance, x.m, x.h, x.t, x.exact, x.bound, x.corrected_bound));
            }
            out.write("appendix_a.csv", &csv)?;
            out.json("appendix_a.json", &serde_json::json!({ "report": rep, "rows": rows }))?;
            print!("{}", rep.summary());
            Ok(rep.check("exact_below_bound").is_some_and(|c| c.passed))
        }
        Cmd::Multhom { config, h, m_max } => {
            let data = gksl_source(config.as_deref(), cli.seed)?;
            let reports = h
                .iter()
                .map(|&h| multiplicativity_check(&data, h, *m_max, cli.tol, cli.seed, budget))
                .collect::<Result<Vec<_>, _>>()?;
            out.json("multhom.json", &reports)?;
            for r in &reports {
                println!("# {}", r.suite);
                print!("{}", r.summary());
            }
            Ok(reports.iter().all(SuiteReport::passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qrw: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("qrw: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("qrw: {msg}");
            ExitCode::from(3)
        }
    }
}
