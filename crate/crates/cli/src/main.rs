//! `carnot`: harmonicity checks, Heisenberg-type classification, gauge-ball
//! quadrature, and a group-law scratchpad, with bit-stable JSON/CSV reports.
//!
//! Exit codes: 0 = check passed, 1 = check failed, 2 = usage/config error.

mod cfgfile;
mod emit;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use carnot_core::gauges::{GammaKernel, GaugeRho};
use carnot_core::group::{multiply, Point};
use carnot_core::operators::OperatorSpec;
use carnot_core::quadrature::{ball_p_measure, omega_p, IntegrandNorm, McEstimate, RNG_NAME};
use carnot_core::verify::{
    verify_counterexample_with, verify_harmonic, verify_htype_transition, ResidualReport,
    FLOOR_INF_N, TOL_INF_RHO, TOL_P_GAMMA,
};
use carnot_core::{GroupConfig, LawConvention, MetricMode};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "carnot", version, about = "Calculus on anisotropic Heisenberg groups")]
struct Cli {
    /// Config file with `key = value` lines; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for quadrature and verification (wall time only;
    /// results are identical for any count).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Orthonormal,
    MainAssumption,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Bch,
    Doubled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    /// The homogeneous gauge.
    Rho,
    /// The fundamental-solution kernel (power/log of the gauge).
    Gamma,
    /// The counterexample norm on R^5.
    N,
    /// N^-4, the counterexample's 2-harmonic power.
    U2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OperatorArg {
    PLaplace,
    Infinity,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegrandArg {
    /// Metric-correct gradient norm (default).
    Metric,
    /// Plain Euclidean norm of the horizontal gradient.
    Orthonormal,
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// Half the horizontal dimension (inferred from --L when omitted).
    #[arg(long)]
    n: Option<usize>,

    /// Comma-separated anisotropy constants L_1,...,L_n (each nonzero).
    #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
    l: Option<Vec<f64>>,

    /// Inner product on the horizontal basis.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,

    /// Group-law convention for the center term.
    #[arg(long, value_enum)]
    law: Option<LawArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the group as Heisenberg-type under both metric modes.
    CheckHtype {
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Verify a harmonicity claim on seeded unit-gauge points.
    Verify {
        #[command(flatten)]
        group: GroupArgs,
        /// Which closed-form field to test.
        #[arg(long, value_enum)]
        field: Option<FieldArg>,
        /// Which operator to apply.
        #[arg(long, value_enum)]
        operator: Option<OperatorArg>,
        /// Exponent of the p-Laplacian (and of the gamma kernel).
        #[arg(long)]
        p: Option<f64>,
        /// Number of sample points.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Residual tolerance (near-zero checks) or exceedance floor.
        #[arg(long)]
        tol: Option<f64>,
        /// Counterexample anisotropy L_1 (fields N and u2; L_2 = 2 L_1).
        #[arg(long = "L1", allow_hyphen_values = true)]
        l1: Option<f64>,
    },
    /// Monte Carlo estimate of omega_p = |B_1|_p (or |B_r|_p with --r).
    Omega {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Ball radius (default 1).
        #[arg(long)]
        r: Option<f64>,
        /// Gradient norm used in the integrand.
        #[arg(long, value_enum)]
        integrand: Option<IntegrandArg>,
    },
    /// Multiply two group elements under the chosen law convention.
    Mul {
        #[command(flatten)]
        group: GroupArgs,
        /// First factor as flat coordinates x1,...,x2n,t.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Option<Vec<f64>>,
        /// Second factor as flat coordinates x1,...,x2n,t.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Option<Vec<f64>>,
    },
}

/// Any failure before a verdict is a usage/config error (exit 2).
struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

type CmdResult<T> = Result<T, ConfigError>;

/// Values from the config file, parsed on demand; flags take precedence.
struct FileValues(BTreeMap<String, String>);

impl FileValues {
    fn get<T: FromStr>(&self, key: &str) -> CmdResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| ConfigError(format!("config key `{}`: {}", key, e))),
        }
    }

    fn get_list(&self, key: &str) -> CmdResult<Option<Vec<f64>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map(Some)
                .map_err(|e| ConfigError(format!("config key `{}`: {}", key, e))),
        }
    }

    fn get_enum<T: ValueEnum + Clone>(&self, key: &str) -> CmdResult<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => T::from_str(raw, true)
                .map(Some)
                .map_err(|e| ConfigError(format!("config key `{}`: {}", key, e))),
        }
    }
}

fn resolve_seed(flag: Option<u64>, file: &FileValues) -> CmdResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file.get::<u64>("seed")? {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var("CARNOT_SEED") {
        return raw
            .parse::<u64>()
            .map_err(|e| ConfigError(format!("CARNOT_SEED: {}", e)));
    }
    Ok(DEFAULT_SEED)
}

fn resolve_group(args: &GroupArgs, file: &FileValues) -> CmdResult<GroupConfig> {
    let l = match &args.l {
        Some(l) => l.clone(),
        None => file
            .get_list("L")?
            .ok_or(ConfigError("missing anisotropy constants: pass --L".into()))?,
    };
    let n = args.n.map(Ok).unwrap_or_else(|| {
        file.get::<usize>("n")
            .map(|v| v.unwrap_or(l.len()))
            .map_err(|e| e)
    })?;
    if n != l.len() {
        return Err(ConfigError(format!(
            "--n {} conflicts with {} anisotropy constants",
            n,
            l.len()
        )));
    }
    let metric = match args.metric.or(file.get_enum::<MetricArg>("metric")?) {
        Some(MetricArg::Orthonormal) => MetricMode::Orthonormal,
        Some(MetricArg::MainAssumption) | None => MetricMode::MainAssumption,
    };
    let law = match args.law.or(file.get_enum::<LawArg>("law")?) {
        Some(LawArg::Doubled) => LawConvention::Doubled,
        Some(LawArg::Bch) | None => LawConvention::BchDerived,
    };
    Ok(GroupConfig::new(l, metric, law)?)
}

enum Report {
    Residual(ResidualReport),
    Estimate {
        check_name: String,
        config: GroupConfig,
        estimate: McEstimate,
    },
    Product {
        config: GroupConfig,
        product: Point,
    },
}

impl Report {
    fn passed(&self) -> bool {
        match self {
            Report::Residual(r) => r.passed(),
            Report::Estimate { estimate, .. } => estimate.value.is_finite(),
            Report::Product { .. } => true,
        }
    }

    fn to_json(&self) -> Value {
        let value = match self {
            Report::Residual(r) => serde_json::to_value(r).expect("serializable"),
            Report::Estimate {
                check_name,
                config,
                estimate,
            } => json!({
                "check_name": check_name,
                "config": config,
                "summary": estimate,
                "verdict": if estimate.value.is_finite() { "Pass" } else { "Fail" },
                "seed": estimate.seed,
                "rng_name": estimate.rng_name,
            }),
            Report::Product { config, product } => json!({
                "check_name": "mul",
                "config": config,
                "summary": { "product": product.to_flat() },
                "verdict": "Pass",
                "seed": 0,
                "rng_name": RNG_NAME,
            }),
        };
        emit::wrap_report(value)
    }

    fn to_csv(&self) -> String {
        match self {
            Report::Residual(r) => emit::report_to_csv(r),
            Report::Estimate { estimate, .. } => emit::estimate_to_csv(estimate),
            Report::Product { product, .. } => {
                let coords: Vec<String> =
                    product.to_flat().iter().copied().map(emit::fmt_f64).collect();
                format!("product\n{}\n", coords.join(","))
            }
        }
    }
}

fn run(cli: &Cli) -> CmdResult<Report> {
    let file = FileValues(match &cli.config {
        Some(path) => cfgfile::load(path)?,
        None => BTreeMap::new(),
    });

    if let Some(threads) = cli.threads.or(file.get::<usize>("threads")?) {
        // Ignore the error when a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match &cli.command {
        Command::CheckHtype { group } => {
            let cfg = resolve_group(group, &file)?;
            let mut report = verify_htype_transition(cfg.anisotropy())?;
            // The verdict answers "is THIS group H-type" for the requested
            // metric; the transition diagnostics stay in the report.
            let requested = carnot_core::lie::is_heisenberg_type(&cfg);
            report.check_name = format!(
                "htype:{:?}:L={:?}",
                cfg.metric_mode,
                cfg.anisotropy()
            );
            report.config = cfg;
            if !requested.is_htype {
                report.verdict = carnot_core::verify::Verdict::Fail;
            }
            Ok(Report::Residual(report))
        }
        Command::Verify {
            group,
            field,
            operator,
            p,
            points,
            seed,
            tol,
            l1,
        } => {
            let field = field
                .or(file.get_enum::<FieldArg>("field")?)
                .ok_or(ConfigError("missing --field (rho|gamma|n|u2)".into()))?;
            let operator = operator.or(file.get_enum::<OperatorArg>("operator")?);
            let p = match p {
                Some(v) => Some(*v),
                None => file.get::<f64>("p")?,
            };
            let points = match points {
                Some(v) => *v,
                None => file.get::<usize>("points")?.unwrap_or(500),
            };
            let seed = resolve_seed(*seed, &file)?;
            let tol = match tol {
                Some(v) => Some(*v),
                None => file.get::<f64>("tol")?,
            };
            let l1 = match l1 {
                Some(v) => *v,
                None => file.get::<f64>("L1")?.unwrap_or(1.0),
            };

            match field {
                FieldArg::Rho | FieldArg::Gamma => {
                    let cfg = resolve_group(group, &file)?;
                    let spec = match operator {
                        Some(OperatorArg::PLaplace) => OperatorSpec::p_laplace(
                            p.ok_or(ConfigError("p-laplace requires --p".into()))?,
                        )?,
                        Some(OperatorArg::Infinity) => OperatorSpec::InfinityLaplace,
                        None => match field {
                            FieldArg::Rho => OperatorSpec::InfinityLaplace,
                            _ => OperatorSpec::p_laplace(
                                p.ok_or(ConfigError("field gamma requires --p".into()))?,
                            )?,
                        },
                    };
                    let tol = tol.unwrap_or(match spec {
                        OperatorSpec::InfinityLaplace => TOL_INF_RHO,
                        OperatorSpec::PLaplace { .. } => TOL_P_GAMMA,
                    });
                    let report = match field {
                        FieldArg::Rho => verify_harmonic(
                            &GaugeRho::new(cfg.clone()),
                            spec,
                            &cfg,
                            points,
                            seed,
                            tol,
                        )?,
                        _ => {
                            let kernel = GammaKernel::new(
                                p.ok_or(ConfigError("field gamma requires --p".into()))?,
                                cfg.clone(),
                            )?;
                            verify_harmonic(&kernel, spec, &cfg, points, seed, tol)?
                        }
                    };
                    Ok(Report::Residual(report))
                }
                FieldArg::N | FieldArg::U2 => {
                    if matches!(
                        (field, operator),
                        (FieldArg::N, Some(OperatorArg::PLaplace))
                            | (FieldArg::U2, Some(OperatorArg::Infinity))
                    ) {
                        return Err(ConfigError(
                            "counterexample checks: field n pairs with --operator infinity, \
                             field u2 with --operator p-laplace"
                                .into(),
                        ));
                    }
                    let tol_h2 = if field == FieldArg::U2 {
                        tol.unwrap_or(TOL_P_GAMMA)
                    } else {
                        TOL_P_GAMMA
                    };
                    let floor = if field == FieldArg::N {
                        tol.unwrap_or(FLOOR_INF_N)
                    } else {
                        FLOOR_INF_N
                    };
                    let (h2, hinf) =
                        verify_counterexample_with(l1, points, seed, tol_h2, floor)?;
                    Ok(Report::Residual(match field {
                        FieldArg::N => hinf,
                        _ => h2,
                    }))
                }
            }
        }
        Command::Omega {
            group,
            p,
            samples,
            seed,
            r,
            integrand,
        } => {
            let cfg = resolve_group(group, &file)?;
            let p = match p {
                Some(v) => *v,
                None => file.get::<f64>("p")?.unwrap_or(2.0),
            };
            let samples = match samples {
                Some(v) => *v,
                None => file.get::<u64>("samples")?.unwrap_or(1_000_000),
            };
            let seed = resolve_seed(*seed, &file)?;
            let r = match r {
                Some(v) => Some(*v),
                None => file.get::<f64>("r")?,
            };
            let norm = match integrand.or(file.get_enum::<IntegrandArg>("integrand")?) {
                Some(IntegrandArg::Orthonormal) => IntegrandNorm::Orthonormal,
                _ => IntegrandNorm::Metric,
            };
            let (check_name, estimate) = match r {
                Some(r) => (
                    format!("ball_p_measure:p={}:r={}", p, r),
                    ball_p_measure(r, p, &cfg, samples, seed, norm)?,
                ),
                None => (format!("omega_p:p={}", p), omega_p(p, &cfg, samples, seed, norm)?),
            };
            Ok(Report::Estimate {
                check_name,
                config: cfg,
                estimate,
            })
        }
        Command::Mul { group, a, b } => {
            let cfg = resolve_group(group, &file)?;
            let a = a
                .clone()
                .or(file.get_list("a")?)
                .ok_or(ConfigError("missing --a coordinates".into()))?;
            let b = b
                .clone()
                .or(file.get_list("b")?)
                .ok_or(ConfigError("missing --b coordinates".into()))?;
            let pa = Point::from_flat(&a)?;
            let pb = Point::from_flat(&b)?;
            let product = multiply(&pa, &pb, &cfg)?;
            Ok(Report::Product {
                config: cfg,
                product,
            })
        }
    }
}

fn emit_report(cli: &Cli, report: &Report) -> CmdResult<()> {
    let file = FileValues(match &cli.config {
        Some(path) => cfgfile::load(path)?,
        None => BTreeMap::new(),
    });
    let format = cli
        .format
        .or(file.get_enum::<FormatArg>("format")?)
        .unwrap_or(FormatArg::Json);
    let text = match format {
        FormatArg::Json => emit::to_json_string(&report.to_json()),
        FormatArg::Csv => report.to_csv(),
    };
    let output = match &cli.output {
        Some(path) => Some(path.clone()),
        None => file.get::<PathBuf>("output")?,
    };
    match output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {}", path.display(), e)))?,
        None => print!("{}", text),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(ConfigError(msg)) => {
            eprintln!("error: {}", msg);
            return ExitCode::from(2);
        }
    };
    if let Err(ConfigError(msg)) = emit_report(&cli, &report) {
        eprintln!("error: {}", msg);
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
