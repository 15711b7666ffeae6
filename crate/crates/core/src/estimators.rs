//! Unit-level Dickey–Fuller regressions and the pooled (LLC) and averaged
//! (IPS) panel statistics built from them.
//!
//! Every unit regression uses the pairs `(z_{t−1}, z_t)` for `t = 2..T`,
//! so the first pair is discarded. Deterministic terms are partialled out
//! over the same sample (time mean `t̄ = (T+2)/2` in the trend case). By
//! default residual variances use the divisor `T − 1` without a
//! degrees-of-freedom adjustment; [`VarianceDivisor::DegreesOfFreedom`]
//! selects the usual OLS divisor instead.

use serde::{Deserialize, Serialize};

use crate::case::DeterministicCase;
use crate::error::{Error, Result};
use crate::panel::PanelDataset;
use crate::power::{norm_cdf, Tail, TestVariant};
use crate::sawa::NullMomentTable;

/// Levels at which every [`TestOutcome`] reports a decision.
pub const REPORT_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Divisor of the residual sum of squares in `σ̂ᵢ²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceDivisor {
    /// `T − 1`, the number of fitted pairs.
    #[default]
    Pairs,
    /// `T − 1 − k` with `k` fitted coefficients (1, 2 or 3 by case).
    DegreesOfFreedom,
}

impl VarianceDivisor {
    fn denominator(self, periods: usize, case: DeterministicCase) -> f64 {
        let pairs = periods as f64 - 1.0;
        match self {
            VarianceDivisor::Pairs => pairs,
            VarianceDivisor::DegreesOfFreedom => {
                pairs
                    - match case {
                        DeterministicCase::None => 1.0,
                        DeterministicCase::Intercept => 2.0,
                        DeterministicCase::InterceptTrend => 3.0,
                    }
            }
        }
    }
}

/// Result of one unit regression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitRegression {
    /// Autoregressive coefficient.
    pub rho_hat: f64,
    /// t-ratio of `ρ̂ − 1`.
    pub t_stat: f64,
    /// Residual standard deviation.
    pub sigma_hat: f64,
    /// Deterministic terms partialled out.
    pub case: DeterministicCase,
    /// `Σ x̃²`, the detrended lagged level sum of squares.
    pub sxx: f64,
    /// `Σ x̃ ỹ` with `y = z_t`.
    pub sxy: f64,
}

/// Remove the deterministic terms of `case` from `v`, whose entries belong
/// to times `2..=T`.
fn partial_out(v: &mut [f64], case: DeterministicCase) {
    if case == DeterministicCase::None {
        return;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter_mut().for_each(|x| *x -= mean);
    if case == DeterministicCase::InterceptTrend {
        let tbar = (n + 1.0) / 2.0;
        let mut stt = 0.0;
        let mut stv = 0.0;
        for (k, x) in v.iter().enumerate() {
            let dt = k as f64 + 1.0 - tbar;
            stt += dt * dt;
            stv += dt * x;
        }
        let beta = stv / stt;
        for (k, x) in v.iter_mut().enumerate() {
            *x -= beta * (k as f64 + 1.0 - tbar);
        }
    }
}

fn unit_regression(
    series: &[f64],
    case: DeterministicCase,
    divisor: VarianceDivisor,
    unit: usize,
) -> Result<UnitRegression> {
    let periods = series.len().saturating_sub(1);
    if periods < crate::panel::MIN_PERIODS {
        return Err(Error::InvalidInput(format!(
            "unit {unit}: need at least {} periods (got {periods})",
            crate::panel::MIN_PERIODS
        )));
    }
    let raw_scale: f64 = series.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut x: Vec<f64> = series[1..periods].to_vec();
    let mut y: Vec<f64> = series[2..=periods].to_vec();
    partial_out(&mut x, case);
    partial_out(&mut y, case);
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    if sxx <= 1e-24 * raw_scale {
        return Err(Error::DegenerateRegression {
            unit,
            reason: "lagged level has no variation after removing deterministic terms".into(),
        });
    }
    let rho = sxy / sxx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - rho * a).powi(2)).sum();
    if rss <= 1e-24 * raw_scale {
        return Err(Error::DegenerateRegression {
            unit,
            reason: "residual variance is zero".into(),
        });
    }
    let sigma = (rss / divisor.denominator(periods, case)).sqrt();
    Ok(UnitRegression {
        rho_hat: rho,
        t_stat: (rho - 1.0) * sxx.sqrt() / sigma,
        sigma_hat: sigma,
        case,
        sxx,
        sxy,
    })
}

/// Dickey–Fuller regression of one unit's series `z_0, …, z_T`.
pub fn unit_ols(series: &[f64], case: DeterministicCase) -> Result<UnitRegression> {
    unit_regression(series, case, VarianceDivisor::Pairs, 0)
}

/// [`unit_ols`] with an explicit variance divisor.
pub fn unit_ols_with(
    series: &[f64],
    case: DeterministicCase,
    divisor: VarianceDivisor,
) -> Result<UnitRegression> {
    unit_regression(series, case, divisor, 0)
}

/// Decision of a test at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    /// Significance level.
    pub level: f64,
    /// True when the null is rejected.
    pub reject: bool,
}

/// A computed panel statistic with its normal p-value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// Test statistic.
    pub variant: TestVariant,
    /// Value of the statistic.
    pub statistic: f64,
    /// One-sided `N(0, 1)` p-value on the variant's tail.
    pub p_value: f64,
    /// Decisions at [`REPORT_LEVELS`].
    pub reject_at: Vec<Decision>,
    /// Number of units.
    pub n_units: usize,
    /// Number of periods.
    pub n_periods: usize,
}

impl TestOutcome {
    /// Wrap a statistic value.
    pub fn new(variant: TestVariant, statistic: f64, n_units: usize, n_periods: usize) -> Self {
        let p_value = match variant.tail() {
            Tail::Left => norm_cdf(statistic),
            Tail::Right => 1.0 - norm_cdf(statistic),
        };
        TestOutcome {
            variant,
            statistic,
            p_value,
            reject_at: REPORT_LEVELS
                .iter()
                .map(|&level| Decision {
                    level,
                    reject: p_value < level,
                })
                .collect(),
            n_units,
            n_periods,
        }
    }

    /// True when the test rejects at `level`.
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

fn unit_regressions(
    panel: &PanelDataset,
    case: DeterministicCase,
    divisor: VarianceDivisor,
) -> Result<Vec<UnitRegression>> {
    panel
        .all_series()
        .iter()
        .enumerate()
        .map(|(i, s)| unit_regression(s, case, divisor, i))
        .collect()
}

/// Pooled `δ̂` and the studentising sum `S = Σᵢ Σₜ x̃²/σ̂ᵢ²`.
fn pooled_delta(regs: &[UnitRegression]) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for r in regs {
        let w = 1.0 / (r.sigma_hat * r.sigma_hat);
        // Σ x̃ Δ̃y = Σ x̃ ỹ − Σ x̃².
        num += (r.sxy - r.sxx) * w;
        den += r.sxx * w;
    }
    (num / den, den)
}

/// Pooled t-statistic for `variant ∈ {t1, t21, t22, t31, t32}`.
pub fn llc_statistic(panel: &PanelDataset, variant: TestVariant) -> Result<TestOutcome> {
    if !variant.is_llc() {
        return Err(Error::UnsupportedVariant(variant.id().to_string()));
    }
    panel_statistic(panel, variant)
}

fn llc_from_regressions(regs: &[UnitRegression], variant: TestVariant, periods: usize) -> f64 {
    let (delta, s) = pooled_delta(regs);
    let n = regs.len() as f64;
    let t = periods as f64;
    let root = s.sqrt();
    match variant {
        TestVariant::LlcT1 => delta * root,
        TestVariant::LlcT21 => 5f64.sqrt() / 2.0 * delta * root + (15.0 * n / 8.0).sqrt(),
        TestVariant::LlcT22 => (10.0f64 / 17.0).sqrt() * (delta + 3.0 / t) * root,
        TestVariant::LlcT31 => (448.0f64 / 277.0).sqrt() * delta * root + (1680.0 * n / 277.0).sqrt(),
        TestVariant::LlcT32 => (112.0f64 / 193.0).sqrt() * (delta + 15.0 / (2.0 * t)) * root,
        _ => unreachable!("checked by the caller"),
    }
}

fn ips_from_regressions(regs: &[UnitRegression], case: DeterministicCase, table: &NullMomentTable) -> f64 {
    let n = regs.len() as f64;
    let mean = regs.iter().map(|r| r.t_stat).sum::<f64>() / n;
    let row = table.get(case);
    n.sqrt() * (mean - row.mean) / row.sd
}

/// Averaged t-statistic `√N (mean tᵢ − E t₀)/√Var t₀` for `case`.
pub fn ips_statistic(panel: &PanelDataset, case: DeterministicCase) -> Result<TestOutcome> {
    ips_statistic_with(panel, case, NullMomentTable::shared())
}

/// [`ips_statistic`] with an explicit null moment table.
pub fn ips_statistic_with(
    panel: &PanelDataset,
    case: DeterministicCase,
    table: &NullMomentTable,
) -> Result<TestOutcome> {
    let regs = unit_regressions(panel, case, VarianceDivisor::Pairs)?;
    Ok(TestOutcome::new(
        TestVariant::ips_for(case),
        ips_from_regressions(&regs, case, table),
        panel.n_units(),
        panel.n_periods(),
    ))
}

/// Any supported statistic on a panel.
pub fn panel_statistic(panel: &PanelDataset, variant: TestVariant) -> Result<TestOutcome> {
    Ok(panel_statistics(panel, &[variant])?.remove(0))
}

/// Several statistics on one panel, sharing the unit regressions of each
/// deterministic case.
pub fn panel_statistics(panel: &PanelDataset, variants: &[TestVariant]) -> Result<Vec<TestOutcome>> {
    panel_statistics_with(panel, variants, VarianceDivisor::Pairs)
}

/// [`panel_statistics`] with an explicit variance divisor.
pub fn panel_statistics_with(
    panel: &PanelDataset,
    variants: &[TestVariant],
    divisor: VarianceDivisor,
) -> Result<Vec<TestOutcome>> {
    let mut out = Vec::with_capacity(variants.len());
    let mut cache: Vec<(DeterministicCase, Vec<UnitRegression>)> = Vec::new();
    for &variant in variants {
        if matches!(variant, TestVariant::LlcT23 | TestVariant::LlcT33) {
            return Err(Error::UnsupportedVariant(variant.id().to_string()));
        }
        let case = variant.case();
        let idx = match cache.iter().position(|(c, _)| *c == case) {
            Some(i) => i,
            None => {
                cache.push((case, unit_regressions(panel, case, divisor)?));
                cache.len() - 1
            }
        };
        let regs = &cache[idx].1;
        let stat = if variant.is_ips() {
            ips_from_regressions(regs, case, NullMomentTable::shared())
        } else {
            llc_from_regressions(regs, variant, panel.n_periods())
        };
        out.push(TestOutcome::new(variant, stat, panel.n_units(), panel.n_periods()));
    }
    Ok(out)
}
