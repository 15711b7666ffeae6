//! One-term Edgeworth expansions of the LLC and IPS statistics in the
//! cross-sectional dimension `N`.
//!
//! The expansions are not forced to be monotone in `x`; for small `N` a
//! one-term expansion can dip slightly. Only the final value is clamped to
//! `[0, 1]`.
//!
//! Under the local alternative the expansions describe the statistic
//! recentred by its drift, so they stay close to `Φ` rather than to the
//! shifted normal.

use serde::{Deserialize, Serialize};

use crate::case::DeterministicCase;
use crate::error::{Error, Result};
use crate::montecarlo::{ks_distance, statistic_draws, SimulationSpec};
use crate::power::{c_moments, drift, norm_cdf, norm_pdf, CDistribution, CMomentSummary, TestVariant};
use crate::sawa::{shared_local_coefficients, NullMomentTable};

/// Null or local hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// Unit roots in every unit.
    Null,
    /// Local-to-unity alternative with the given c-moments.
    Local,
}

/// One evaluation point of an Edgeworth CDF.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthQuery {
    /// Test statistic.
    pub variant: TestVariant,
    /// Evaluation point.
    pub x: f64,
    /// Number of cross-section units.
    pub n: u64,
    /// Moments of the local parameters (ignored under the null).
    pub moments: CMomentSummary,
    /// Hypothesis.
    pub hypothesis: Hypothesis,
}

impl EdgeworthQuery {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if !self.x.is_finite() {
            return Err(Error::InvalidInput("x must be finite".into()));
        }
        self.moments.validate()
    }
}

/// Coefficients `a·φ(x) + b·(x²−1)φ(x)` of the `N^{−1/2}` null term and
/// the `N^{−1}` local terms of a pooled statistic.
struct LlcCoefficients {
    null_phi: f64,
    null_h2: f64,
    local_phi: f64,
    local_h2: f64,
}

fn llc_coefficients(variant: TestVariant, m: &CMomentSummary) -> Result<LlcCoefficients> {
    let s30 = 30f64.sqrt();
    let s1020 = 1020f64.sqrt();
    let r277 = (105.0f64 / 277.0).sqrt();
    let r193 = (105.0f64 / 193.0).sqrt();
    Ok(match variant {
        TestVariant::LlcT1 => LlcCoefficients {
            null_phi: 2f64.sqrt() / 3.0,
            null_h2: 0.0,
            local_phi: -(2f64.sqrt()) / 12.0 * m.cbar,
            local_h2: 0.0,
        },
        TestVariant::LlcT21 => LlcCoefficients {
            null_phi: 3.0 * s30 / 40.0,
            null_h2: -3.0 * s30 / 560.0,
            local_phi: -3.0 * s30 / 160.0 * m.cbar,
            local_h2: -11.0 * s30 / 17920.0 * m.cbar,
        },
        TestVariant::LlcT22 => LlcCoefficients {
            null_phi: s1020 / 85.0,
            null_h2: -27.0 * s1020 / 20230.0,
            local_phi: -3.0 * s1020 / 680.0 * m.cbar,
            local_h2: 13.0 * s1020 / 20230.0 * m.cbar,
        },
        // The (x²−1) local term carries no c-moment factor, unlike every
        // sibling expansion; it is kept as stated.
        TestVariant::LlcT31 => LlcCoefficients {
            null_phi: 33.0 / 56.0 * r277,
            null_h2: -491.0 / 15512.0 * r277,
            local_phi: -59.0 / 3136.0 * r277 * m.c2bar,
            local_h2: 118445.0 / 9555392.0 * r277,
        },
        TestVariant::LlcT32 => LlcCoefficients {
            null_phi: 11.0 / 28.0 * r193,
            null_h2: -397.0 / 5404.0 * r193,
            local_phi: -151.0 / 9408.0 * r193 * m.c2bar,
            local_h2: 84829.0 / 6657728.0 * r193 * m.c2bar,
        },
        other => return Err(Error::UnsupportedVariant(other.id().to_string())),
    })
}

/// Edgeworth CDF of a pooled statistic.
///
/// The local expansion of `t1` carries an `N^{−1}` term that lies inside
/// the stated `O(N^{−1})` remainder; it is included as displayed.
pub fn llc_edgeworth(q: &EdgeworthQuery) -> Result<f64> {
    q.validate()?;
    let zero = CMomentSummary::zero();
    let m = match q.hypothesis {
        Hypothesis::Null => &zero,
        Hypothesis::Local => &q.moments,
    };
    let k = llc_coefficients(q.variant, m)?;
    let n = q.n as f64;
    let phi = norm_pdf(q.x);
    let h2 = q.x * q.x - 1.0;
    let mut f = norm_cdf(q.x) + n.powf(-0.5) * (k.null_phi + k.null_h2 * h2) * phi;
    if q.hypothesis == Hypothesis::Local {
        f += (k.local_phi + k.local_h2 * h2) * phi / n;
    }
    Ok(f.clamp(0.0, 1.0))
}

/// `λ/6` for the averaged statistic of `case` under the null.
pub fn ips_null_coefficient(case: DeterministicCase) -> f64 {
    NullMomentTable::shared().get(case).skewness / 6.0
}

/// Coefficient `κ` of the local term `+κ · c̄ N^{−1}(x²−1)φ(x)`
/// (`c̄²` in the trend case) of the averaged statistic.
///
/// It is `−(1/6)` times the first-order change of the third central moment
/// of the unit t-ratio, scaled by the null variance.
pub fn ips_local_coefficient(case: DeterministicCase) -> f64 {
    let row = NullMomentTable::shared().get(case);
    let idx = match case {
        DeterministicCase::None => 0,
        DeterministicCase::Intercept => 1,
        DeterministicCase::InterceptTrend => 2,
    };
    let [d1, d2, d3] = shared_local_coefficients()[idx];
    let (m1, m2) = (row.mean, row.second);
    let d_third_central = d3 - 3.0 * (d2 * m1 + m2 * d1) + 6.0 * m1 * m1 * d1;
    -d_third_central / row.var().powf(1.5) / 6.0
}

/// Edgeworth CDF of an averaged statistic.
pub fn ips_edgeworth(q: &EdgeworthQuery) -> Result<f64> {
    q.validate()?;
    if !q.variant.is_ips() {
        return Err(Error::UnsupportedVariant(q.variant.id().to_string()));
    }
    let case = q.variant.case();
    let n = q.n as f64;
    let phi = norm_pdf(q.x);
    let h2 = q.x * q.x - 1.0;
    let mut f = norm_cdf(q.x) - ips_null_coefficient(case) * n.powf(-0.5) * h2 * phi;
    if q.hypothesis == Hypothesis::Local {
        let c = match case {
            DeterministicCase::InterceptTrend => q.moments.c2bar,
            _ => q.moments.cbar,
        };
        f += ips_local_coefficient(case) * c / n * h2 * phi;
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Edgeworth CDF of any supported statistic.
pub fn edgeworth_cdf(q: &EdgeworthQuery) -> Result<f64> {
    if q.variant.is_ips() {
        ips_edgeworth(q)
    } else {
        llc_edgeworth(q)
    }
}

/// Kolmogorov distances of the Edgeworth and normal approximations from
/// a simulated finite-sample distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthDiagnostic {
    /// Test statistic.
    pub variant: TestVariant,
    /// Number of units.
    pub n_units: usize,
    /// Number of periods.
    pub n_periods: usize,
    /// Distribution of `cᵢ` (a point mass at zero under the null).
    pub distribution: CDistribution,
    /// Number of replications.
    pub reps: usize,
    /// Run seed.
    pub seed: u64,
    /// Distance between the empirical CDF and the Edgeworth CDF.
    pub edgeworth_distance: f64,
    /// Distance between the empirical CDF and `Φ`.
    pub normal_distance: f64,
}

/// Compare the Edgeworth CDF of `variant` with `reps` simulated panels of
/// size `n_units × n_periods`.
///
/// With `c_dist = None` the panels are drawn under the null. Otherwise the
/// simulated statistic is recentred by its asymptotic drift and compared
/// with the local expansion.
pub fn edgeworth_vs_exact(
    variant: TestVariant,
    n_units: usize,
    n_periods: usize,
    c_dist: Option<CDistribution>,
    reps: usize,
    seed: u64,
) -> Result<EdgeworthDiagnostic> {
    if reps == 0 {
        return Err(Error::EmptyRun);
    }
    let distribution = c_dist.unwrap_or(CDistribution::PointMass { c: 0.0 });
    let (hypothesis, moments) = match c_dist {
        None => (Hypothesis::Null, CMomentSummary::zero()),
        Some(d) => (Hypothesis::Local, c_moments(&d)?),
    };
    let shift = match hypothesis {
        Hypothesis::Null => 0.0,
        Hypothesis::Local => drift(variant, &moments),
    };
    let spec = SimulationSpec::for_variant(variant, n_units, n_periods, distribution, seed, reps);
    let draws: Vec<f64> = statistic_draws(&spec, variant)?.into_iter().map(|s| s - shift).collect();
    let query = |x: f64| EdgeworthQuery {
        variant,
        x,
        n: n_units as u64,
        moments,
        hypothesis,
    };
    // Evaluate once up front so unsupported variants surface as errors.
    edgeworth_cdf(&query(0.0))?;
    let edgeworth_distance = ks_distance(&draws, |x| edgeworth_cdf(&query(x)).unwrap_or(f64::NAN));
    Ok(EdgeworthDiagnostic {
        variant,
        n_units,
        n_periods,
        distribution,
        reps,
        seed,
        edgeworth_distance,
        normal_distance: ks_distance(&draws, norm_cdf),
    })
}
