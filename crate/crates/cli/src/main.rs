//! stable-info: tables, bound checks and benchmarks for generalized power
//! measures under alpha-stable noise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use serde_json::json;

use stable_info::bounds::{giie_mix_sweep, BoundReport, MixRow};
use stable_info::capacity::{
    capacity_stable, cost_constraint_mc, optimal_input_scale, optimal_output_check, ChannelSpec,
};
use stable_info::estimate::{run_estimator, Estimator, RunSpec};
use stable_info::sweeps::{self, Case};
use stable_info::{Error, RandomLaw};

use config::{Format, RunConfig};

#[derive(Parser)]
#[command(name = "stable-info", version, about = "Generalized power, alpha-Fisher information and bounds for stable noise")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct GlobalArgs {
    /// Configuration file (key = value); defaults to $STABLE_INFO_CONFIG
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    show_config: bool,
    /// FFT grid size (power of two)
    #[arg(long, global = true)]
    n_points: Option<usize>,
    /// Grid half-width in units of the law's scale
    #[arg(long, global = true)]
    extent_factor: Option<f64>,
    /// Seed for Monte Carlo commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file; `-` for standard output
    #[arg(long, short, global = true)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// alpha-power of test laws over a range of orders
    PowerTable {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Laws such as `gaussian:1.414`, `laplace:1+sas:1.5:0.5`
        #[arg(long, value_delimiter = ',')]
        laws: Option<Vec<String>>,
    },
    /// J_alpha of the stable family S(r, r^(-1/r))
    JalphaTable {
        #[arg(long, value_delimiter = ',')]
        rs: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// N_alpha J_alpha of the stable family against kappa_alpha
    GiieTable {
        #[arg(long, value_delimiter = ',')]
        rs: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// N_alpha J_alpha of S(alpha, alpha^(-1/alpha)) + N(0, sigma^2) over sigma
    GiieMix {
        #[arg(long, default_value_t = 1.8)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// Entropy-of-sum upper bound; runs the standard matrix without --law
    SumBound {
        #[arg(long)]
        law: Option<String>,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,2")]
        gamma: Vec<f64>,
    },
    /// Generalized de Bruijn identity; runs the standard matrix without --law
    DebruijnCheck {
        #[arg(long)]
        law: Option<String>,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.5")]
        eta: Vec<f64>,
    },
    /// Capacity of the additive stable noise channel (JSON)
    Capacity {
        /// Noise characteristic exponent, in (0, 2]
        #[arg(long)]
        alpha: f64,
        /// Noise dispersion
        #[arg(long)]
        gamma_n: f64,
        /// Cap on the output alpha-power
        #[arg(long = "A")]
        a: f64,
        /// Dimension
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Monte Carlo samples for the cost-constraint check
        #[arg(long, default_value_t = 10_000)]
        mc_samples: usize,
    },
    /// Monte Carlo location-estimation benchmark against the Cramer-Rao bound (JSON)
    CrbBench {
        /// Noise characteristic exponent
        #[arg(long)]
        alpha: f64,
        /// Noise dispersion
        #[arg(long, default_value_t = 1.0)]
        gamma_n: f64,
        /// ml_identity, sample_mean, sample_median or myriad
        #[arg(long, default_value = "ml_identity")]
        estimator: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Samples per trial
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Myriad tuning constant; defaults to gamma_n
        #[arg(long = "K")]
        k: Option<f64>,
        /// Also write the raw errors as CSV
        #[arg(long)]
        errors_csv: Option<PathBuf>,
    },
    /// kappa_alpha over a range of orders
    KappaTable {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Every check family, summarized as JSON
    Suite {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

enum Failure {
    Violation(String),
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Config(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) => Failure::Config(e.to_string()),
            Error::Constraint(_) => Failure::Violation(e.to_string()),
            Error::Numeric(_) | Error::Method(_) => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    let path = g.config.clone().or_else(|| std::env::var_os("STABLE_INFO_CONFIG").map(PathBuf::from));
    if let Some(p) = path {
        cfg.apply_file(&p).map_err(Failure::Config)?;
    }
    let mut set = |k: &str, v: Option<String>| v.map(|v| cfg.set(k, &v)).transpose().map_err(Failure::Config);
    set("grid.n_points", g.n_points.map(|v| v.to_string()))?;
    set("grid.extent_factor", g.extent_factor.map(|v| v.to_string()))?;
    set("seed", g.seed.map(|v| v.to_string()))?;
    set("output.format", g.format.clone())?;
    set("output.path", g.output.clone())?;
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn sink(cfg: &RunConfig) -> io::Result<Box<dyn Write>> {
    Ok(if cfg.path == "-" { Box::new(io::stdout().lock()) } else { Box::new(File::create(&cfg.path)?) })
}

fn write_rows<T: Serialize>(rows: &[T], cfg: &RunConfig) -> Outcome {
    let mut out = sink(cfg)?;
    match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(|e| Failure::Config(format!("csv: {e}")))?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Failure::Config(format!("json: {e}")))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, cfg: &RunConfig) -> Outcome {
    let mut out = sink(cfg)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Config(format!("json: {e}")))?;
    writeln!(out)?;
    Ok(())
}

/// Mixture rows with the kappa column named after the order, e.g. `kappa_18`.
fn write_mix(rows: &[MixRow], alpha: f64, cfg: &RunConfig) -> Outcome {
    let kappa_col = format!("kappa_{}", alpha.to_string().replace('.', ""));
    match cfg.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| {
                    let mut m = serde_json::Map::new();
                    m.insert("sigma".into(), json!(r.sigma));
                    m.insert("product".into(), json!(r.product));
                    m.insert(kappa_col.clone(), json!(r.kappa));
                    m
                })
                .collect();
            write_json(&v, cfg)
        }
        Format::Csv => {
            let csv_err = |e: csv::Error| Failure::Config(format!("csv: {e}"));
            let mut w = csv::Writer::from_writer(sink(cfg)?);
            w.write_record(["sigma", "product", kappa_col.as_str()]).map_err(csv_err)?;
            for r in rows {
                w.write_record([r.sigma.to_string(), r.product.to_string(), r.kappa.to_string()]).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn parse_law(s: &str) -> Result<RandomLaw, Failure> {
    s.parse::<RandomLaw>().map_err(Failure::from)
}

/// Fails with a violation when any slack is below the tolerance.
fn check_slacks(slacks: impl IntoIterator<Item = f64>, tol: f64, what: &str) -> Outcome {
    let bad = slacks.into_iter().filter(|s| !(*s >= -tol)).count();
    if bad > 0 {
        Err(Failure::Violation(format!("{bad} {what} row(s) violate the bound")))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct SumBoundRow {
    law: String,
    alpha: f64,
    gamma: f64,
    h_sum_numeric: f64,
    h_sum_bound: f64,
    slack: f64,
}

#[derive(Serialize)]
struct DebruijnRow {
    law: String,
    alpha: f64,
    gamma: f64,
    eta: f64,
    dh_deta: f64,
    gamma_alpha_j: f64,
    relative_error: f64,
}

fn reports(results: Vec<stable_info::Result<BoundReport>>) -> Result<Vec<BoundReport>, Failure> {
    results.into_iter().map(|r| r.map_err(Failure::from)).collect()
}

fn run(cli: Cli) -> Outcome {
    let cfg = resolve_config(&cli.global)?;
    if cli.global.show_config {
        print!("{cfg}");
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Failure::Config("no command given; see --help".into()));
    };
    let grid = cfg.grid();
    match command {
        Command::PowerTable { alphas, laws } => {
            let alphas = alphas.unwrap_or_else(sweeps::power_alphas);
            let laws = match laws {
                Some(l) => l.iter().map(|s| parse_law(s)).collect::<Result<Vec<_>, _>>()?,
                None => sweeps::power_laws(),
            };
            let rows = sweeps::power_table(&alphas, &laws, &cfg.power());
            write_rows(&rows, &cfg)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            if failed > 0 {
                return Err(Failure::Numeric(format!("{failed} row(s) failed")));
            }
        }
        Command::JalphaTable { rs, alphas } => {
            let rs = rs.unwrap_or_else(sweeps::stable_exponents);
            let alphas = alphas.unwrap_or_else(|| vec![1.2, 1.4, 1.6, 1.8, 2.0]);
            write_rows(&sweeps::jalpha_table(&rs, &alphas, &grid)?, &cfg)?;
        }
        Command::GiieTable { rs, alphas } => {
            let rs = rs.unwrap_or_else(sweeps::stable_exponents);
            let alphas = alphas.unwrap_or_else(|| vec![1.2, 1.4, 1.6, 1.8]);
            let rows = sweeps::giie_table(&rs, &alphas, &grid)?;
            write_rows(&rows, &cfg)?;
            check_slacks(rows.iter().map(|r| r.slack), cfg.slack_tol, "giie")?;
        }
        Command::GiieMix { alpha, sigmas } => {
            let sigmas = sigmas.unwrap_or_else(sweeps::mix_sigmas);
            let rows = giie_mix_sweep(alpha, &sigmas, &grid)?;
            write_mix(&rows, alpha, &cfg)?;
            if let Some(s) = sweeps::mix_argmin(&rows) {
                info!("smallest product at sigma = {s}");
            }
            check_slacks(rows.iter().map(|r| r.product - r.kappa), cfg.slack_tol, "giie-mix")?;
        }
        Command::SumBound { law, alpha, gamma } => {
            let cases: Vec<Case> = match law {
                Some(l) => {
                    let law = parse_law(&l)?;
                    gamma
                        .iter()
                        .map(|&g| Case { laws: vec![law.clone()], alpha, gamma: g, equality: false })
                        .collect()
                }
                None => sweeps::sum_bound_matrix(),
            };
            let reps = reports(sweeps::run_sum_bound(&cases, &grid))?;
            let rows: Vec<SumBoundRow> = cases
                .iter()
                .zip(&reps)
                .map(|(c, r)| SumBoundRow {
                    law: c.laws[0].to_string(),
                    alpha: c.alpha,
                    gamma: c.gamma,
                    h_sum_numeric: r.lhs,
                    h_sum_bound: r.rhs,
                    slack: r.slack,
                })
                .collect();
            write_rows(&rows, &cfg)?;
            check_slacks(rows.iter().map(|r| r.slack), cfg.slack_tol, "sum-bound")?;
        }
        Command::DebruijnCheck { law, alpha, gamma, eta } => {
            let cases: Vec<(Case, f64)> = match law {
                Some(l) => {
                    let law = parse_law(&l)?;
                    eta.iter().map(|&e| (Case { laws: vec![law.clone()], alpha, gamma, equality: true }, e)).collect()
                }
                None => sweeps::debruijn_matrix(),
            };
            let reps = reports(sweeps::run_debruijn(&cases, &grid))?;
            let rows: Vec<DebruijnRow> = cases
                .iter()
                .zip(&reps)
                .map(|((c, e), r)| DebruijnRow {
                    law: c.laws[0].to_string(),
                    alpha: c.alpha,
                    gamma: c.gamma,
                    eta: *e,
                    dh_deta: r.lhs,
                    gamma_alpha_j: r.rhs,
                    relative_error: r.relative_error.unwrap_or(f64::NAN),
                })
                .collect();
            write_rows(&rows, &cfg)?;
            let bad = rows.iter().filter(|r| !(r.relative_error < 2e-2)).count();
            if bad > 0 {
                return Err(Failure::Violation(format!("{bad} de Bruijn row(s) exceed 2% relative error")));
            }
        }
        Command::Capacity { alpha, gamma_n, a, d, mc_samples } => return capacity(&cfg, alpha, gamma_n, a, d, mc_samples),
        Command::CrbBench { alpha, gamma_n, estimator, trials, n, k, errors_csv } => {
            let mut est: Estimator = estimator.parse()?;
            if let (Estimator::Myriad(_), Some(k)) = (est, k) {
                est = Estimator::Myriad(Some(k));
            }
            let spec = RunSpec { seed: cfg.seed, ..RunSpec::new(est, alpha, gamma_n, trials, n) };
            let run = run_estimator(&spec)?;
            if let Some(path) = errors_csv {
                let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Config(format!("csv: {e}")))?;
                w.write_record(["trial", "error"]).map_err(|e| Failure::Config(format!("csv: {e}")))?;
                for (i, e) in run.errors.iter().enumerate() {
                    w.write_record([i.to_string(), e.to_string()]).map_err(|e| Failure::Config(format!("csv: {e}")))?;
                }
                w.flush()?;
            }
            let holds = run.error_alpha_power >= run.crb * 0.98;
            write_json(
                &json!({
                    "estimator": run.estimator.to_string(),
                    "alpha": alpha,
                    "gamma_n": gamma_n,
                    "trials": run.trials,
                    "samples_per_trial": run.samples_per_trial,
                    "seed": run.seed,
                    "error_alpha_power": run.error_alpha_power,
                    "crb": run.crb,
                    "ratio": run.ratio(),
                    "bound_holds": holds,
                    "diagnostics": run.diagnostics,
                }),
                &cfg,
            )?;
            if !holds {
                return Err(Failure::Violation("error alpha-power below the Cramer-Rao bound".into()));
            }
        }
        Command::KappaTable { alphas } => {
            let alphas = alphas.unwrap_or_else(|| (0..9).map(|k| (12 + k) as f64 / 10.0).collect());
            write_rows(&sweeps::kappa_table(&alphas)?, &cfg)?;
        }
        Command::Suite { trials } => {
            let opts = sweeps::SuiteOptions {
                grid,
                power: cfg.power(),
                slack_tol: cfg.slack_tol,
                seed: cfg.seed,
                trials,
            };
            let report = sweeps::run_suite(&opts);
            write_json(&report, &cfg)?;
            for r in report.reproductions.iter().filter(|r| !r.passed) {
                info!("reproduction mismatch: {} {} (value {})", r.family, r.name, r.value);
            }
            if report.violations > 0 {
                return Err(Failure::Violation(format!("{} check(s) failed", report.violations)));
            }
        }
    }
    Ok(())
}

fn capacity(cfg: &RunConfig, alpha: f64, gamma_n: f64, a: f64, d: usize, mc_samples: usize) -> Outcome {
    let spec = ChannelSpec::new(alpha, gamma_n, a, d)?;
    let c = capacity_stable(&spec)?;
    let gx = optimal_input_scale(&spec)?;
    let pn = spec.noise_power();
    let mut checks = serde_json::Map::new();
    let mut ok = true;

    let px = alpha.powf(1.0 / alpha) * gx;
    let gap = (px.powf(alpha) + pn.powf(alpha) - a.powf(alpha)).abs() / a.powf(alpha);
    checks.insert("power_addition".into(), json!({ "relative_error": gap, "passed": gap < 1e-12 }));
    ok &= gap < 1e-12;

    if d == 1 {
        let out = optimal_output_check(&spec, &cfg.power())?;
        let rel = (out.output_alpha_power - a).abs() / a;
        let dh = (out.output_entropy - out.max_entropy).abs();
        checks.insert(
            "output".into(),
            json!({
                "alpha_power": out.output_alpha_power,
                "alpha_power_relative_error": rel,
                "entropy": out.output_entropy,
                "max_entropy": out.max_entropy,
                "passed": rel < 1e-2 && dh < cfg.entropy_tol,
            }),
        );
        ok &= rel < 1e-2 && dh < cfg.entropy_tol;
        if gx > 0.0 && mc_samples >= 2 {
            let cc = cost_constraint_mc(&spec, mc_samples, cfg.seed)?;
            let rel = cc.relative_error();
            checks.insert(
                "cost_constraint".into(),
                json!({
                    "mean_divergence": cc.mean_divergence,
                    "std_error": cc.std_error,
                    "target": cc.target,
                    "relative_error": rel,
                    "samples": cc.samples,
                    "passed": rel < 2e-2,
                }),
            );
            ok &= rel < 2e-2;
        }
    }
    write_json(
        &json!({
            "alpha": alpha,
            "gamma_n": gamma_n,
            "A": a,
            "d": d,
            "C_nats": c,
            "gamma_x_star": gx,
            "p_alpha_N": pn,
            "checks": checks,
        }),
        cfg,
    )?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Violation("a capacity consistency check failed".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("stable-info: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
