//! Exact local asymptotic power of the pooled (LLC) and averaged (IPS)
//! panel unit-root tests.
//!
//! Under the local alternative every statistic converges to `N(0, 1)`
//! shifted by a nonrandom drift that depends on the cross-sectional
//! moments of the local parameters `cᵢ`. Power at level `α` is then
//! `Φ(Φ^{−1}(α) − drift)` for left-tailed tests.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::case::DeterministicCase;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::sawa::{drift_integral, DriftIntegral, NullMomentTable, DRIFT_LITERALS};

fn std_normal() -> &'static Normal {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::standard())
}

/// Standard normal CDF `Φ`.
pub fn norm_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Standard normal density `φ`.
pub fn norm_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

/// Standard normal quantile `Φ^{−1}`, polished by one Newton step.
pub fn norm_quantile(p: f64) -> f64 {
    let x = std_normal().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    x - (norm_cdf(x) - p) / norm_pdf(x)
}

/// Rejection region of a test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Reject for small values.
    Left,
    /// Reject for large values.
    Right,
}

/// Every test statistic whose local power the crate evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestVariant {
    /// Pooled t, no deterministic terms.
    LlcT1,
    /// Pooled t with intercepts, additive mean correction.
    LlcT21,
    /// Pooled t with intercepts, bias-corrected coefficient.
    LlcT22,
    /// Pooled t with trends, additive mean correction.
    LlcT31,
    /// Pooled t with trends, bias-corrected coefficient.
    LlcT32,
    /// Intercept case, alternative correction with power on the right tail.
    LlcT23,
    /// Trend case, alternative correction with power on the right tail.
    LlcT33,
    /// Averaged t, no deterministic terms.
    IpsZ,
    /// Averaged t with intercepts.
    IpsZmu,
    /// Averaged t with trends.
    IpsZtau,
}

impl TestVariant {
    /// All ten variants.
    pub const ALL: [TestVariant; 10] = [
        TestVariant::LlcT1,
        TestVariant::LlcT21,
        TestVariant::LlcT22,
        TestVariant::LlcT31,
        TestVariant::LlcT32,
        TestVariant::LlcT23,
        TestVariant::LlcT33,
        TestVariant::IpsZ,
        TestVariant::IpsZmu,
        TestVariant::IpsZtau,
    ];

    /// The eight columns of the theoretical power table.
    pub const TABLE: [TestVariant; 8] = [
        TestVariant::LlcT1,
        TestVariant::LlcT21,
        TestVariant::LlcT22,
        TestVariant::LlcT31,
        TestVariant::LlcT32,
        TestVariant::IpsZ,
        TestVariant::IpsZmu,
        TestVariant::IpsZtau,
    ];

    /// Stable identifier used on the command line and in output files.
    pub fn id(self) -> &'static str {
        match self {
            TestVariant::LlcT1 => "llc-t1",
            TestVariant::LlcT21 => "llc-t21",
            TestVariant::LlcT22 => "llc-t22",
            TestVariant::LlcT31 => "llc-t31",
            TestVariant::LlcT32 => "llc-t32",
            TestVariant::LlcT23 => "llc-t23",
            TestVariant::LlcT33 => "llc-t33",
            TestVariant::IpsZ => "ips-z",
            TestVariant::IpsZmu => "ips-zmu",
            TestVariant::IpsZtau => "ips-ztau",
        }
    }

    /// Rejection tail.
    pub fn tail(self) -> Tail {
        match self {
            TestVariant::LlcT23 | TestVariant::LlcT33 => Tail::Right,
            _ => Tail::Left,
        }
    }

    /// Deterministic case the statistic is built for.
    pub fn case(self) -> DeterministicCase {
        match self {
            TestVariant::LlcT1 | TestVariant::IpsZ => DeterministicCase::None,
            TestVariant::LlcT21 | TestVariant::LlcT22 | TestVariant::LlcT23 | TestVariant::IpsZmu => {
                DeterministicCase::Intercept
            }
            _ => DeterministicCase::InterceptTrend,
        }
    }

    /// True for the pooled statistics.
    pub fn is_llc(self) -> bool {
        !self.is_ips()
    }

    /// True for the averaged statistics.
    pub fn is_ips(self) -> bool {
        matches!(self, TestVariant::IpsZ | TestVariant::IpsZmu | TestVariant::IpsZtau)
    }

    /// The averaged statistic for a case.
    pub fn ips_for(case: DeterministicCase) -> TestVariant {
        match case {
            DeterministicCase::None => TestVariant::IpsZ,
            DeterministicCase::Intercept => TestVariant::IpsZmu,
            DeterministicCase::InterceptTrend => TestVariant::IpsZtau,
        }
    }
}

impl fmt::Display for TestVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        TestVariant::ALL
            .into_iter()
            .find(|v| v.id() == lower)
            .ok_or_else(|| Error::InvalidInput(format!("unknown test variant '{s}'")))
    }
}

/// Cross-sectional moments of the local parameters `cᵢ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CMomentSummary {
    /// Mean of `cᵢ`.
    pub cbar: f64,
    /// Mean of `cᵢ²`.
    pub c2bar: f64,
    /// Mean of `cᵢ³`.
    pub c3bar: f64,
    /// Mean of `cᵢ⁴`.
    pub c4bar: f64,
}

impl CMomentSummary {
    /// The null hypothesis: every moment zero.
    pub fn zero() -> Self {
        CMomentSummary::default()
    }

    /// Check non-negativity and the Jensen inequalities.
    pub fn validate(&self) -> Result<()> {
        let slack = 1e-12 * (1.0 + self.c4bar.abs());
        let ok = self.cbar >= 0.0
            && self.c2bar >= 0.0
            && self.c3bar >= 0.0
            && self.c4bar >= 0.0
            && self.c2bar + slack >= self.cbar * self.cbar
            && self.c4bar + slack >= self.c2bar * self.c2bar;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("inconsistent c-moments {self:?}")))
        }
    }
}

/// Cross-sectional distribution of the local parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CDistribution {
    /// `U[a, b]`.
    Uniform {
        /// Lower end.
        a: f64,
        /// Upper end.
        b: f64,
    },
    /// `χ²(k)`.
    ChiSquare {
        /// Degrees of freedom.
        k: u32,
    },
    /// Every `cᵢ` equal to `c`.
    PointMass {
        /// The common value.
        c: f64,
    },
}

impl CDistribution {
    /// The four designs of the theoretical and simulated power tables.
    pub const TABLE: [CDistribution; 4] = [
        CDistribution::Uniform { a: 0.0, b: 1.0 },
        CDistribution::Uniform { a: 0.0, b: 8.0 },
        CDistribution::ChiSquare { k: 1 },
        CDistribution::ChiSquare { k: 6 },
    ];

    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CDistribution::Uniform { a, b } => a >= 0.0 && b > a && b.is_finite(),
            CDistribution::ChiSquare { k } => k >= 1,
            CDistribution::PointMass { c } => c >= 0.0 && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid c distribution {self}")))
        }
    }

    /// Draw one `cᵢ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CDistribution::Uniform { a, b } => Uniform::new(a, b).expect("validated bounds").sample(rng),
            CDistribution::ChiSquare { k } => ChiSquared::new(f64::from(k)).expect("k >= 1").sample(rng),
            CDistribution::PointMass { c } => c,
        }
    }
}

impl fmt::Display for CDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CDistribution::Uniform { a, b } => write!(f, "U[{a},{b}]"),
            CDistribution::ChiSquare { k } => write!(f, "chi2({k})"),
            CDistribution::PointMass { c } => write!(f, "point({c})"),
        }
    }
}

impl FromStr for CDistribution {
    type Err = Error;

    /// Parses `uniform:a:b`, `chi2:k` or `point:c`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse c distribution '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let dist = match parts.as_slice() {
            ["uniform", a, b] => CDistribution::Uniform { a: num(a)?, b: num(b)? },
            ["chi2", k] => CDistribution::ChiSquare {
                k: k.trim().parse().map_err(|_| bad())?,
            },
            ["point", c] => CDistribution::PointMass { c: num(c)? },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// First four raw moments of a c-distribution.
pub fn c_moments(dist: &CDistribution) -> Result<CMomentSummary> {
    dist.validate()?;
    Ok(match *dist {
        CDistribution::Uniform { a, b } => {
            let raw = |n: i32| (b.powi(n + 1) - a.powi(n + 1)) / (f64::from(n + 1) * (b - a));
            CMomentSummary {
                cbar: raw(1),
                c2bar: raw(2),
                c3bar: raw(3),
                c4bar: raw(4),
            }
        }
        CDistribution::ChiSquare { k } => {
            let k = f64::from(k);
            CMomentSummary {
                cbar: k,
                c2bar: k * (k + 2.0),
                c3bar: k * (k + 2.0) * (k + 4.0),
                c4bar: k * (k + 2.0) * (k + 4.0) * (k + 6.0),
            }
        }
        CDistribution::PointMass { c } => CMomentSummary {
            cbar: c,
            c2bar: c * c,
            c3bar: c.powi(3),
            c4bar: c.powi(4),
        },
    })
}

/// Drift integrals at the default quadrature settings, computed once, with
/// the reference values as fallback.
pub fn shared_drift_integrals() -> &'static [f64; 3] {
    static VALUES: OnceLock<[f64; 3]> = OnceLock::new();
    VALUES.get_or_init(|| {
        let spec = QuadratureSpec::default();
        let mut out = [0.0; 3];
        for (i, (which, literal)) in DRIFT_LITERALS.iter().enumerate() {
            out[i] = drift_integral(*which, &spec).unwrap_or(*literal);
        }
        out
    })
}

fn drift_integral_value(which: DriftIntegral) -> f64 {
    let values = shared_drift_integrals();
    match which {
        DriftIntegral::Z => values[0],
        DriftIntegral::Zmu => values[1],
        DriftIntegral::Ztau => values[2],
    }
}

/// Signed mean shift of the limiting normal under the local alternative.
pub fn drift(variant: TestVariant, m: &CMomentSummary) -> f64 {
    let table = NullMomentTable::shared();
    match variant {
        TestVariant::LlcT1 => -m.cbar / std::f64::consts::SQRT_2,
        TestVariant::LlcT21 => -(15.0f64 / 2.0).sqrt() / 8.0 * m.cbar,
        TestVariant::LlcT22 => -0.5 * (15.0f64 / 17.0).sqrt() * m.cbar,
        TestVariant::LlcT31 => -(105.0f64 / 277.0).sqrt() / 14.0 * m.c2bar,
        TestVariant::LlcT32 => -(15.0f64).sqrt() / 56.0 * (112.0f64 / 193.0).sqrt() * m.c2bar,
        TestVariant::LlcT23 => 3.0f64.sqrt() / 12.0 * m.c2bar,
        TestVariant::LlcT33 => 15.0f64.sqrt() / 720.0 * m.c4bar,
        TestVariant::IpsZ | TestVariant::IpsZmu => {
            let case = variant.case();
            -drift_integral_value(DriftIntegral::for_case(case)) * m.cbar / table.get(case).sd
        }
        TestVariant::IpsZtau => {
            let case = variant.case();
            -drift_integral_value(DriftIntegral::Ztau) * m.c2bar / table.get(case).sd
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("level must lie in (0, 1) (got {level})")))
    }
}

/// Limiting rejection probability at `level`.
pub fn local_power(variant: TestVariant, m: &CMomentSummary, level: f64) -> Result<f64> {
    check_level(level)?;
    m.validate()?;
    let d = drift(variant, m);
    if d == 0.0 {
        return Ok(level);
    }
    Ok(match variant.tail() {
        Tail::Left => norm_cdf(norm_quantile(level) - d),
        Tail::Right => 1.0 - norm_cdf(norm_quantile(1.0 - level) - d),
    })
}

/// One cell of the theoretical power table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    /// Distribution of the `cᵢ`.
    pub distribution: CDistribution,
    /// Test statistic.
    pub variant: TestVariant,
    /// Limiting power.
    pub power: f64,
}

/// Theoretical power of the eight table variants under the four table
/// designs, row by row.
pub fn power_table(level: f64) -> Result<Vec<PowerCell>> {
    let mut cells = Vec::with_capacity(32);
    for dist in CDistribution::TABLE {
        let m = c_moments(&dist)?;
        for variant in TestVariant::TABLE {
            cells.push(PowerCell {
                distribution: dist,
                variant,
                power: local_power(variant, &m, level)?,
            });
        }
    }
    Ok(cells)
}

/// How the `cᵢ` are spread around a grid value `c` in [`power_curve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveDesign {
    /// `cᵢ ≡ c`.
    Homogeneous,
    /// `cᵢ ~ U[0, 2c]`, so that `c̄ = c`.
    Uniform,
}

/// Power along a grid of local parameters.
pub fn power_curve(
    variant: TestVariant,
    c_grid: &[f64],
    design: CurveDesign,
    level: f64,
) -> Result<Vec<(f64, f64)>> {
    c_grid
        .iter()
        .map(|&c| {
            let dist = match design {
                CurveDesign::Uniform if c > 0.0 => CDistribution::Uniform { a: 0.0, b: 2.0 * c },
                _ => CDistribution::PointMass { c },
            };
            Ok((c, local_power(variant, &c_moments(&dist)?, level)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_examples() {
        assert_eq!(drift(TestVariant::LlcT1, &CMomentSummary::zero()), 0.0);
        let one = c_moments(&CDistribution::PointMass { c: 1.0 }).unwrap();
        assert!((drift(TestVariant::IpsZ, &one) + 0.58198749 / 0.98111424).abs() < 1e-6);
        let six = c_moments(&CDistribution::PointMass { c: 6.0 }).unwrap();
        assert!((drift(TestVariant::LlcT21, &six) + 2.05396).abs() < 1e-5);
    }

    #[test]
    fn moment_examples() {
        let u = c_moments(&CDistribution::Uniform { a: 0.0, b: 1.0 }).unwrap();
        assert!((u.cbar - 0.5).abs() < 1e-15 && (u.c2bar - 1.0 / 3.0).abs() < 1e-15);
        let x = c_moments(&CDistribution::ChiSquare { k: 1 }).unwrap();
        assert_eq!((x.cbar, x.c2bar, x.c3bar, x.c4bar), (1.0, 3.0, 15.0, 105.0));
        let p = c_moments(&CDistribution::PointMass { c: 2.0 }).unwrap();
        assert_eq!((p.cbar, p.c2bar, p.c3bar, p.c4bar), (2.0, 4.0, 8.0, 16.0));
    }

    #[test]
    fn power_examples() {
        let u8 = c_moments(&CDistribution::Uniform { a: 0.0, b: 8.0 }).unwrap();
        assert!((local_power(TestVariant::LlcT1, &u8, 0.05).unwrap() - 0.8817).abs() < 5e-4);
        let curve = power_curve(TestVariant::IpsZmu, &[0.0, 8.0], CurveDesign::Homogeneous, 0.05).unwrap();
        assert_eq!(curve[0].1, 0.05);
        assert!((curve[1].1 - 0.7211).abs() < 1e-3);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            assert!((norm_cdf(norm_quantile(p)) - p).abs() < 1e-14, "p = {p}");
        }
        assert!((norm_quantile(0.05) + 1.6448536269514729).abs() < 1e-10);
    }

    #[test]
    fn parse_round_trip() {
        for v in TestVariant::ALL {
            assert_eq!(v.id().parse::<TestVariant>().unwrap(), v);
        }
        assert_eq!("chi2:6".parse::<CDistribution>().unwrap(), CDistribution::ChiSquare { k: 6 });
        assert!("uniform:3:1".parse::<CDistribution>().is_err());
    }
}
