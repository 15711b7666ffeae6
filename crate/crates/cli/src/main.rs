//! `panel-power`: panel unit-root statistics, local asymptotic power,
//! Edgeworth expansions and Monte Carlo experiments from the command line.
//!
//! Every command resolves its flags into a [`config::RunConfig`], validates
//! it, runs it and emits JSON or CSV. Each artifact starts with the tool
//! version, the seed (if any) and the full resolved configuration.
//! Without `--output`, results go to `$PANEL_POWER_OUTPUT_DIR/<command>.<ext>`
//! when that variable is set and to stdout otherwise.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use panel_power::fredholm::ImhofSpec;
use panel_power::io::round_sig;
use panel_power::montecarlo::{alpha_for, SimulationSpec, Table2Grid, DEFAULT_SIGMA_SQ_RANGE};
use panel_power::power::CurveDesign;
use panel_power::quadrature::QuadratureSpec;
use panel_power::{CDistribution, DeterministicCase, Error, TestVariant, VarianceDivisor};
use serde_json::{json, Value};

use crate::commands::{execute, Report};
use crate::config::*;

/// Environment variable naming the default output directory.
const OUTPUT_DIR_ENV: &str = "PANEL_POWER_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "panel-power", version, about = "Panel unit-root tests and their local asymptotic power")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file (defaults to $PANEL_POWER_OUTPUT_DIR/<command>.<ext>, then stdout).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute panel statistics on a long-format CSV panel.
    Test {
        /// CSV file with header `unit,time,value`.
        #[arg(long)]
        input: PathBuf,
        /// Statistic (repeatable); defaults to every statistic of --case.
        #[arg(long = "variant")]
        variants: Vec<TestVariant>,
        /// Deterministic case: none, intercept or intercept-trend.
        #[arg(long)]
        case: Option<DeterministicCase>,
        /// Divide residual sums of squares by degrees of freedom instead of T − 1.
        #[arg(long)]
        df_adjust: bool,
    },
    /// Local asymptotic power of one statistic.
    Power {
        #[arg(long)]
        variant: TestVariant,
        /// Distribution of c: uniform:a:b, chi2:k or point:c.
        #[arg(long)]
        dist: CDistribution,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Local power of all eight statistics under the four reference distributions.
    PowerTable {
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Local power against a grid of c values.
    PowerCurve {
        /// Statistic (repeatable); defaults to all eight.
        #[arg(long = "variant")]
        variants: Vec<TestVariant>,
        /// homogeneous (c_i = c) or uniform (c_i ~ U[0, 2c]).
        #[arg(long, default_value = "homogeneous", value_parser = parse_design)]
        design: CurveDesign,
        #[arg(long, default_value_t = 10.0)]
        c_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Exact moments of the unit t-ratio and of the quadratic functionals.
    Moments {
        #[arg(long)]
        case: DeterministicCase,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
    /// One-term Edgeworth CDF of a statistic.
    Edgeworth {
        #[arg(long)]
        variant: TestVariant,
        /// Evaluation point (repeatable).
        #[arg(long = "x", required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        /// Number of units N.
        #[arg(long = "n")]
        n_units: u64,
        /// Local alternative distribution of c; omit for the null.
        #[arg(long)]
        dist: Option<CDistribution>,
        /// Also compare with this many simulated panels.
        #[arg(long)]
        check_reps: Option<usize>,
        /// Periods of the simulated panels.
        #[arg(long, default_value_t = 250)]
        check_periods: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Simulated rejection rates under a local-to-unity DGP.
    Simulate {
        /// Statistic (repeatable); all must share one deterministic case.
        #[arg(long = "variant", required = true)]
        variants: Vec<TestVariant>,
        #[arg(long = "n")]
        n_units: usize,
        #[arg(long = "t")]
        n_periods: usize,
        #[arg(long, default_value = "point:0")]
        dist: CDistribution,
        /// Rate alpha in rho_i = 1 - c_i/(N^alpha T); defaults by variant.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        /// Draw no unit effects.
        #[arg(long)]
        no_effects: bool,
        #[arg(long)]
        df_adjust: bool,
    },
    /// Simulated local power of Z, Zmu and Ztau over the N x T grid.
    Table2 {
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// desk (N in {25, 100}, T = 50) or full.
        #[arg(long, default_value = "desk", value_parser = parse_grid)]
        grid: Table2Grid,
        #[arg(long)]
        df_adjust: bool,
    },
    /// Limiting CDF of T(rho_hat - 1) by characteristic-function inversion.
    DfCdf {
        /// Determinant index 1..=4 (1: no deterministics, 2: intercept).
        #[arg(long)]
        model: usize,
        #[arg(long = "x", required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c: f64,
        /// Long-run to short-run variance ratio.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = ImhofSpec::default().tol)]
        tol: f64,
    },
    /// Run a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct QuadratureArgs {
    #[arg(long, default_value_t = QuadratureSpec::default().abs_tol)]
    abs_tol: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().x_max)]
    x_max: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().panels)]
    panels: usize,
}

fn parse_design(s: &str) -> Result<CurveDesign, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown design '{s}'"))
}

fn parse_grid(s: &str) -> Result<Table2Grid, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown grid '{s}'"))
}

fn divisor(df_adjust: bool) -> VarianceDivisor {
    if df_adjust {
        VarianceDivisor::DegreesOfFreedom
    } else {
        VarianceDivisor::Pairs
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, Error> {
    let command = match cli.command {
        Command::Test {
            input,
            variants,
            case,
            df_adjust,
        } => CommandConfig::Test(TestConfig {
            input,
            variants,
            case,
            divisor: divisor(df_adjust),
        }),
        Command::Power { variant, dist, level } => CommandConfig::Power(PowerConfig {
            variant,
            distribution: dist,
            level,
        }),
        Command::PowerTable { level } => CommandConfig::PowerTable(PowerTableConfig { level }),
        Command::PowerCurve {
            variants,
            design,
            c_max,
            points,
            level,
        } => CommandConfig::PowerCurve(PowerCurveConfig {
            variants,
            design,
            c_max,
            points,
            level,
        }),
        Command::Moments { case, c, quadrature } => CommandConfig::Moments(MomentsConfig {
            case,
            c,
            quadrature: QuadratureSpec {
                abs_tol: quadrature.abs_tol,
                x_max: quadrature.x_max,
                panels: quadrature.panels,
            },
        }),
        Command::Edgeworth {
            variant,
            x,
            n_units,
            dist,
            check_reps,
            check_periods,
            seed,
        } => CommandConfig::Edgeworth(EdgeworthConfig {
            variant,
            x,
            n_units,
            distribution: dist,
            check: check_reps.map(|reps| EdgeworthCheck {
                n_periods: check_periods,
                reps,
                seed,
            }),
        }),
        Command::Simulate {
            variants,
            n_units,
            n_periods,
            dist,
            alpha,
            reps,
            seed,
            level,
            no_effects,
            df_adjust,
        } => {
            let case = variants[0].case();
            if let Some(v) = variants.iter().find(|v| v.case() != case) {
                return Err(Error::InvalidInput(format!(
                    "variants of one run must share a deterministic case ({} vs {v})",
                    variants[0]
                )));
            }
            CommandConfig::Simulate(SimulateConfig {
                spec: SimulationSpec {
                    n_units,
                    n_periods,
                    case,
                    c_dist: dist,
                    alpha_rate: alpha.unwrap_or_else(|| alpha_for(variants[0])),
                    sigma_sq_range: DEFAULT_SIGMA_SQ_RANGE,
                    effects: !no_effects,
                    seed,
                    reps,
                    divisor: divisor(df_adjust),
                },
                variants,
                level,
            })
        }
        Command::Table2 {
            reps,
            seed,
            grid,
            df_adjust,
        } => CommandConfig::Table2(Table2Config {
            reps,
            seed,
            grid,
            divisor: divisor(df_adjust),
        }),
        Command::DfCdf { model, x, c, r, tol } => CommandConfig::DfCdf(DfCdfConfig {
            model,
            x,
            c,
            r,
            imhof: ImhofSpec {
                tol,
                ..ImhofSpec::default()
            },
        }),
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("config {}: {e}", config.display())))?;
            if cli.common.output.is_some() {
                cfg.output = cli.common.output;
            }
            return Ok(cfg);
        }
    };
    Ok(RunConfig {
        format: cli.common.format,
        output: cli.common.output,
        command,
    })
}

/// Replace every non-integer JSON number by its 9-significant-digit rounding.
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn render(cfg: &RunConfig, report: Report) -> Result<String, Error> {
    let config = serde_json::to_value(cfg).expect("config serialises");
    match cfg.format {
        Format::Json => {
            let mut doc = json!({
                "tool": "panel-power",
                "version": env!("CARGO_PKG_VERSION"),
                "command": cfg.command_name(),
                "seed": cfg.seed(),
                "config": config,
                "result": report.result,
            });
            round_numbers(&mut doc);
            Ok(serde_json::to_string_pretty(&doc).expect("JSON values serialise") + "\n")
        }
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!("# panel-power {}\n", env!("CARGO_PKG_VERSION")));
            out.push_str(&format!("# command: {}\n", cfg.command_name()));
            let seed = cfg.seed().map_or("none".to_string(), |s| s.to_string());
            out.push_str(&format!("# seed: {seed}\n"));
            out.push_str(&format!("# config: {config}\n"));
            for note in &report.notes {
                out.push_str(&format!("# {note}\n"));
            }
            let mut wtr = csv::Writer::from_writer(Vec::new());
            let table_err = |e: csv::Error| Error::Io(e.to_string());
            wtr.write_record(&report.header).map_err(table_err)?;
            for row in &report.rows {
                wtr.write_record(row).map_err(table_err)?;
            }
            let bytes = wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).expect("CSV output is UTF-8"));
            Ok(out)
        }
    }
}

fn destination(cfg: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &cfg.output {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty())?;
    let ext = match cfg.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    Some(Path::new(&dir).join(format!("{}.{ext}", cfg.command_name())))
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = resolve(cli)?;
    cfg.validate()?;
    let report = execute(&cfg)?;
    let text = render(&cfg, report)?;
    match destination(&cfg) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidModel(_) => "invalid-model",
        Error::Domain { .. } => "domain",
        Error::Quadrature(_) => "quadrature",
        Error::DegenerateRegression { .. } => "degenerate-regression",
        Error::UnsupportedVariant(_) => "unsupported-variant",
        Error::EmptyRun => "empty-run",
        Error::Parse { .. } => "parse",
        Error::RaggedPanel { .. } => "ragged-panel",
        Error::DuplicateCell { .. } => "duplicate-cell",
        Error::InvalidInput(_) => "invalid-input",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } });
            eprintln!("{doc}");
            ExitCode::FAILURE
        }
    }
}
