//! Fully resolved run configuration, shared by command-line parsing and
//! JSON config files.

use std::path::PathBuf;

use panel_power::fredholm::ImhofSpec;
use panel_power::montecarlo::{SimulationSpec, Table2Grid};
use panel_power::power::CurveDesign;
use panel_power::quadrature::QuadratureSpec;
use panel_power::{CDistribution, DeterministicCase, Error, Result, TestVariant, VarianceDivisor};
use serde::{Deserialize, Serialize};

/// Output encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One JSON document with provenance and result.
    #[default]
    Json,
    /// CSV table preceded by `#` provenance lines.
    Csv,
}

/// Everything needed to run one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output encoding.
    #[serde(default)]
    pub format: Format,
    /// Output file; `None` writes to the default directory or stdout.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Command and its parameters.
    pub command: CommandConfig,
}

/// Parameters of each command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandConfig {
    /// Panel statistics on a CSV panel.
    Test(TestConfig),
    /// Local asymptotic power of one statistic.
    Power(PowerConfig),
    /// Local power of every statistic under the reference distributions.
    PowerTable(PowerTableConfig),
    /// Local power as a function of `c`.
    PowerCurve(PowerCurveConfig),
    /// Exact moments of the unit t-ratio and of the quadratic functionals.
    Moments(MomentsConfig),
    /// Edgeworth CDF values.
    Edgeworth(EdgeworthConfig),
    /// Simulated rejection rates.
    Simulate(SimulateConfig),
    /// Simulated IPS power grid.
    Table2(Table2Config),
    /// Limiting CDF of the normalised Dickey–Fuller coefficient.
    DfCdf(DfCdfConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub input: PathBuf,
    /// Statistics to compute; empty means every statistic of `case`
    /// (or every supported statistic when `case` is absent).
    #[serde(default)]
    pub variants: Vec<TestVariant>,
    #[serde(default)]
    pub case: Option<DeterministicCase>,
    #[serde(default)]
    pub divisor: VarianceDivisor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub variant: TestVariant,
    pub distribution: CDistribution,
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTableConfig {
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerCurveConfig {
    /// Statistics to trace; empty means all eight.
    #[serde(default)]
    pub variants: Vec<TestVariant>,
    pub design: CurveDesign,
    pub c_max: f64,
    pub points: usize,
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub case: DeterministicCase,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeworthConfig {
    pub variant: TestVariant,
    pub x: Vec<f64>,
    pub n_units: u64,
    /// Local alternative; `None` evaluates the null expansion.
    #[serde(default)]
    pub distribution: Option<CDistribution>,
    /// Optional comparison with simulated panels.
    #[serde(default)]
    pub check: Option<EdgeworthCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeworthCheck {
    pub n_periods: usize,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub spec: SimulationSpec,
    pub variants: Vec<TestVariant>,
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table2Config {
    pub reps: usize,
    pub seed: u64,
    pub grid: Table2Grid,
    #[serde(default)]
    pub divisor: VarianceDivisor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfCdfConfig {
    pub model: usize,
    pub x: Vec<f64>,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_ratio")]
    pub r: f64,
    #[serde(default)]
    pub imhof: ImhofSpec,
}

fn default_level() -> f64 {
    0.05
}

fn default_ratio() -> f64 {
    1.0
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("level must lie in (0, 1) (got {level})")))
    }
}

fn check_points(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidInput(format!("at least one {name} value is required")));
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} must be finite (got {x})")));
    }
    Ok(())
}

impl RunConfig {
    /// Check every parameter before any work is done.
    pub fn validate(&self) -> Result<()> {
        match &self.command {
            CommandConfig::Test(c) => {
                for v in &c.variants {
                    if matches!(v, TestVariant::LlcT23 | TestVariant::LlcT33) {
                        return Err(Error::UnsupportedVariant(v.id().to_string()));
                    }
                    if let Some(case) = c.case {
                        if v.case() != case {
                            return Err(Error::InvalidInput(format!(
                                "variant {v} belongs to case {}, not {case}",
                                v.case()
                            )));
                        }
                    }
                }
                Ok(())
            }
            CommandConfig::Power(c) => {
                check_level(c.level)?;
                c.distribution.validate()
            }
            CommandConfig::PowerTable(c) => check_level(c.level),
            CommandConfig::PowerCurve(c) => {
                check_level(c.level)?;
                if !(c.c_max.is_finite() && c.c_max > 0.0) || c.points < 2 {
                    return Err(Error::InvalidInput(
                        "power curve needs c_max > 0 and at least 2 points".into(),
                    ));
                }
                Ok(())
            }
            CommandConfig::Moments(c) => {
                if !c.c.is_finite() {
                    return Err(Error::InvalidInput(format!("c must be finite (got {})", c.c)));
                }
                c.quadrature.validate()
            }
            CommandConfig::Edgeworth(c) => {
                check_points("x", &c.x)?;
                if c.n_units == 0 {
                    return Err(Error::InvalidInput("N must be at least 1".into()));
                }
                if let Some(d) = &c.distribution {
                    d.validate()?;
                }
                if let Some(check) = &c.check {
                    if check.reps == 0 {
                        return Err(Error::EmptyRun);
                    }
                }
                Ok(())
            }
            CommandConfig::Simulate(c) => {
                check_level(c.level)?;
                if c.variants.is_empty() {
                    return Err(Error::InvalidInput("at least one variant is required".into()));
                }
                c.spec.validate()
            }
            CommandConfig::Table2(c) => {
                if c.reps == 0 {
                    return Err(Error::EmptyRun);
                }
                Ok(())
            }
            CommandConfig::DfCdf(c) => {
                if !(1..=4).contains(&c.model) {
                    return Err(Error::InvalidModel(c.model));
                }
                check_points("x", &c.x)?;
                if !(c.c.is_finite() && c.r.is_finite() && c.r > 0.0) {
                    return Err(Error::InvalidInput("c must be finite and r positive".into()));
                }
                Ok(())
            }
        }
    }

    /// Seed of the run, if it uses random numbers.
    pub fn seed(&self) -> Option<u64> {
        match &self.command {
            CommandConfig::Simulate(c) => Some(c.spec.seed),
            CommandConfig::Table2(c) => Some(c.seed),
            CommandConfig::Edgeworth(c) => c.check.as_ref().map(|k| k.seed),
            _ => None,
        }
    }

    /// Command name as typed on the command line.
    pub fn command_name(&self) -> &'static str {
        match &self.command {
            CommandConfig::Test(_) => "test",
            CommandConfig::Power(_) => "power",
            CommandConfig::PowerTable(_) => "power-table",
            CommandConfig::PowerCurve(_) => "power-curve",
            CommandConfig::Moments(_) => "moments",
            CommandConfig::Edgeworth(_) => "edgeworth",
            CommandConfig::Simulate(_) => "simulate",
            CommandConfig::Table2(_) => "table2",
            CommandConfig::DfCdf(_) => "df-cdf",
        }
    }
}
