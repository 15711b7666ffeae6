//! Moments of ratios `U^p / V^q` from the joint m.g.f., the null moments of
//! the unit-level Dickey–Fuller t-ratio, and the drift integrals that set
//! the local power of the averaged t-ratio tests.
//!
//! Every integral over `v ∈ [0, ∞)` is taken in the variable `x = √(2v)`,
//! which removes the `v^{−1/2}` endpoint singularity.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::case::DeterministicCase;
use crate::error::{Error, Result};
use crate::fredholm::{mgf_dv0_with, u_derivatives_with, uv_moments, Bracket};
use crate::kernels::{kappa_c, kappa_m, kappa_s, KernelPoly, Poly};
use crate::quadrature::{semi_infinite, QuadratureSpec};

/// Reference values `(E t₀, √Var t₀)` per case, used as a cross-check and
/// as a fallback for the computed table.
pub const NULL_MOMENT_LITERALS: [(DeterministicCase, f64, f64); 3] = [
    (DeterministicCase::None, -0.42309565, 0.98111424),
    (DeterministicCase::Intercept, -1.53296244, 0.84025086),
    (DeterministicCase::InterceptTrend, -2.18135582, 0.74990847),
];

/// Reference values of the three drift integrals.
pub const DRIFT_LITERALS: [(DriftIntegral, f64); 3] = [
    (DriftIntegral::Z, 0.58198749),
    (DriftIntegral::Zmu, 0.23431142),
    (DriftIntegral::Ztau, 0.02854706),
];

/// `Γ(q)`, closed form at half-integers up to 2.
fn gamma(q: f64) -> f64 {
    if q == 0.5 {
        PI.sqrt()
    } else if q == 1.0 || q == 2.0 {
        1.0
    } else if q == 1.5 {
        0.5 * PI.sqrt()
    } else {
        statrs::function::gamma::gamma(q)
    }
}

/// `(x²/2)^{q−1} x`, the Jacobian of `v^{q−1} dv` under `v = x²/2`.
fn jacobian(q: f64, x: f64) -> f64 {
    if q == 0.5 {
        std::f64::consts::SQRT_2
    } else if q == 1.0 {
        x
    } else {
        (0.5 * x * x).powf(q - 1.0) * x
    }
}

fn check_order(name: &str, value: usize, max: usize) -> Result<()> {
    if value > max {
        Err(Error::InvalidInput(format!("{name} = {value} exceeds the supported maximum {max}")))
    } else {
        Ok(())
    }
}

/// `E(U^p / V^q) = Γ(q)^{−1} ∫₀^∞ v^{q−1} ∂_u^p ψ(u, −v)|_{u=0} dv` for the
/// limiting pair of `case` at local parameter `c`, with `p ≤ 3`.
pub fn sawa_ratio_moment(
    case: DeterministicCase,
    p: usize,
    q: f64,
    c: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_order("p", p, 3)?;
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("q must be positive (got {q})")));
    }
    let bracket = Bracket::for_case(case, c);
    let integral = semi_infinite(
        |x| Ok(jacobian(q, x) * u_derivatives_with(&bracket, 0.5 * x * x)?.order(p)),
        spec,
    )?;
    Ok(integral / gamma(q))
}

/// `E(V^{n−α}) = (−1)^n Γ(α)^{−1} ∫₀^∞ v^{α−1} ∂_v^n [ψ(0, −v)] dv` for
/// `n ∈ {0, 1}`.
pub fn sawa_v_moment(
    case: DeterministicCase,
    n: usize,
    alpha: f64,
    c: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let bracket = Bracket::for_case(case, c);
    v_moment_from(n, alpha, spec, |v| match n {
        0 => Ok(u_derivatives_with(&bracket, v)?.psi),
        _ => mgf_dv0_with(&bracket, v),
    })
}

fn v_moment_from<F>(n: usize, alpha: f64, spec: &QuadratureSpec, mut phi: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_order("n", n, 1)?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive (got {alpha})")));
    }
    let sign = if n == 1 { -1.0 } else { 1.0 };
    let integral = semi_infinite(|x| Ok(jacobian(alpha, x) * phi(0.5 * x * x)?), spec)?;
    Ok(sign * integral / gamma(alpha))
}

/// `E(V̄^{n−α})` for the cross-sectional mean `V̄` of `units` independent
/// copies of `V`, whose Laplace transform is `ψ(0, −v/N)^N`.
///
/// `units = None` takes the limit `N → ∞`, where `V̄` concentrates at `E V`
/// and the transform is `exp(−v E V)`.
pub fn pooled_v_moment(
    case: DeterministicCase,
    n: usize,
    alpha: f64,
    c: f64,
    units: Option<u64>,
    spec: &QuadratureSpec,
) -> Result<f64> {
    match units {
        None => {
            let mean = uv_moments(case, c).mean_v;
            v_moment_from(n, alpha, spec, |v| {
                let e = (-v * mean).exp();
                Ok(if n == 0 { e } else { -mean * e })
            })
        }
        Some(0) => Err(Error::InvalidInput("units must be at least 1".into())),
        Some(units) => {
            let bracket = Bracket::for_case(case, c);
            let nf = units as f64;
            v_moment_from(n, alpha, spec, |v| {
                let psi = u_derivatives_with(&bracket, v / nf)?.psi;
                Ok(if n == 0 {
                    psi.powf(nf)
                } else {
                    psi.powf(nf - 1.0) * mgf_dv0_with(&bracket, v / nf)?
                })
            })
        }
    }
}

/// `E(t^k)` for the limiting t-ratio `U / √V` of `case` at local
/// parameter `c`, computed from exact m.g.f. derivatives.
pub fn exact_t_moment(case: DeterministicCase, k: usize, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidInput(format!("moment order must be 1, 2 or 3 (got {k})")));
    }
    sawa_ratio_moment(case, k, 0.5 * k as f64, c, spec)
}

/// `(zκ_s + 2κ_c − 2)/z²`, which equals `(κ_s + 2κ_m)/z`.
fn kernel_q() -> KernelPoly {
    KernelPoly::new(2, Poly::new(&[0.0, 1.0]), Poly::new(&[2.0]), Poly::new(&[-2.0]))
}

/// `[(z² − 24z)κ_s + (8z − 24)κ_c + 24 + 4z]/z⁴`.
fn kernel_g() -> KernelPoly {
    KernelPoly::new(
        4,
        Poly::new(&[0.0, -24.0, 1.0]),
        Poly::new(&[-24.0, 8.0]),
        Poly::new(&[24.0, 4.0]),
    )
}

/// `[(33z − z²)κ_s + (48 − 9z)κ_c − 48]/z³`.
fn kernel_h() -> KernelPoly {
    KernelPoly::new(
        3,
        Poly::new(&[0.0, 33.0, -1.0]),
        Poly::new(&[48.0, -9.0]),
        Poly::new(&[-48.0]),
    )
}

/// Null moment `E(t₀^k)`, `k ∈ {1, 2, 3}`, from the closed-form `x`
/// integrands specialised to `c = 0`.
pub fn null_t_moment(case: DeterministicCase, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidInput(format!("moment order must be 1, 2 or 3 (got {k})")));
    }
    let a1 = -1.0 / (2.0 * PI).sqrt();
    let a2 = 0.25;
    let a3 = -std::f64::consts::SQRT_2 / (8.0 * PI.sqrt());
    let q = kernel_q();
    let g = kernel_g();
    semi_infinite(
        |x| {
            let z = -x * x;
            let val = match case {
                DeterministicCase::None => {
                    let cz = kappa_c(z);
                    let r = kappa_s(z) / cz;
                    let w = cz.powf(-0.5);
                    match k {
                        1 => a1 * w * (1.0 - r),
                        2 => a2 * x * w * (1.0 - 2.0 * r + 3.0 * r * r),
                        _ => a3 * x * x * w * (1.0 - r * (3.0 - r * (9.0 - 15.0 * r))),
                    }
                }
                DeterministicCase::Intercept => {
                    let s = kappa_s(z);
                    let w = s.powf(-0.5);
                    match k {
                        1 => a1 * w,
                        2 => a2 * x * w * (1.0 - 4.0 * q.eval(z) / s),
                        _ => a3 * x * x * w * (1.0 - 12.0 * q.eval(z) / s),
                    }
                }
                DeterministicCase::InterceptTrend => {
                    let f = -q.eval(z);
                    let w = (12.0 * f).powf(-0.5);
                    match k {
                        1 => a1 * w,
                        2 => a2 * x * w * (1.0 + 4.0 * g.eval(z) / f),
                        _ => a3 * x * x * w * (1.0 + 12.0 * g.eval(z) / f),
                    }
                }
            };
            Ok(val)
        },
        spec,
    )
}

/// Null moments of the limiting t-ratio for one case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullMoments {
    /// `E t₀`.
    pub mean: f64,
    /// `√Var t₀`.
    pub sd: f64,
    /// `E t₀²`.
    pub second: f64,
    /// `E t₀³`.
    pub third: f64,
    /// Skewness `λ = E(t₀ − E t₀)³ / Var^{3/2}`.
    pub skewness: f64,
}

impl NullMoments {
    /// Assemble from the raw moments.
    pub fn from_raw(mean: f64, second: f64, third: f64) -> Self {
        let var = second - mean * mean;
        NullMoments {
            mean,
            sd: var.sqrt(),
            second,
            third,
            skewness: (third - 3.0 * second * mean + 2.0 * mean.powi(3)) / var.powf(1.5),
        }
    }

    /// Variance.
    pub fn var(&self) -> f64 {
        self.sd * self.sd
    }
}

/// Null moments for the three deterministic cases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullMomentTable {
    /// No deterministic terms.
    pub none: NullMoments,
    /// Intercept.
    pub intercept: NullMoments,
    /// Intercept and trend.
    pub trend: NullMoments,
}

impl NullMomentTable {
    /// Compute every entry by quadrature.
    pub fn compute(spec: &QuadratureSpec) -> Result<Self> {
        let row = |case| -> Result<NullMoments> {
            Ok(NullMoments::from_raw(
                null_t_moment(case, 1, spec)?,
                null_t_moment(case, 2, spec)?,
                null_t_moment(case, 3, spec)?,
            ))
        };
        Ok(NullMomentTable {
            none: row(DeterministicCase::None)?,
            intercept: row(DeterministicCase::Intercept)?,
            trend: row(DeterministicCase::InterceptTrend)?,
        })
    }

    /// The table at the default quadrature settings, computed once.
    ///
    /// Falls back to the reference mean and standard deviation (with zero
    /// higher moments) if the quadrature fails.
    pub fn shared() -> &'static NullMomentTable {
        static TABLE: OnceLock<NullMomentTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            NullMomentTable::compute(&QuadratureSpec::default()).unwrap_or_else(|_| NullMomentTable::literals())
        })
    }

    /// Reference mean and standard deviation; higher moments are filled in
    /// from them with zero skewness.
    pub fn literals() -> Self {
        let row = |i: usize| {
            let (_, mean, sd) = NULL_MOMENT_LITERALS[i];
            let second = sd * sd + mean * mean;
            NullMoments {
                mean,
                sd,
                second,
                third: mean.powi(3) + 3.0 * mean * sd * sd,
                skewness: 0.0,
            }
        };
        NullMomentTable {
            none: row(0),
            intercept: row(1),
            trend: row(2),
        }
    }

    /// Entry for one case.
    pub fn get(&self, case: DeterministicCase) -> &NullMoments {
        match case {
            DeterministicCase::None => &self.none,
            DeterministicCase::Intercept => &self.intercept,
            DeterministicCase::InterceptTrend => &self.trend,
        }
    }
}

/// The three named drift integrals of the averaged t-ratio tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DriftIntegral {
    /// No deterministic terms.
    Z,
    /// Intercept.
    Zmu,
    /// Intercept and trend.
    Ztau,
}

impl DriftIntegral {
    /// The case the integral belongs to.
    pub fn case(self) -> DeterministicCase {
        match self {
            DriftIntegral::Z => DeterministicCase::None,
            DriftIntegral::Zmu => DeterministicCase::Intercept,
            DriftIntegral::Ztau => DeterministicCase::InterceptTrend,
        }
    }

    /// The integral for a case.
    pub fn for_case(case: DeterministicCase) -> Self {
        match case {
            DeterministicCase::None => DriftIntegral::Z,
            DeterministicCase::Intercept => DriftIntegral::Zmu,
            DeterministicCase::InterceptTrend => DriftIntegral::Ztau,
        }
    }
}

/// Magnitude of the first-order shift of `E t` under the local alternative:
/// `−dE t/dc` at `c = 0` for `Z` and `Zmu`, `−½ d²E t/dc²` for `Ztau`.
pub fn drift_integral(variant: DriftIntegral, spec: &QuadratureSpec) -> Result<f64> {
    let b = 1.0 / (2.0 * (2.0 * PI).sqrt());
    let q = kernel_q();
    let h = kernel_h();
    semi_infinite(
        |x| {
            let z = -x * x;
            Ok(match variant {
                DriftIntegral::Z => {
                    let cz = kappa_c(z);
                    let r = kappa_s(z) / cz;
                    b * cz.powf(-0.5) * (1.0 - 2.0 * r + 3.0 * r * r)
                }
                DriftIntegral::Zmu => {
                    let s = kappa_s(z);
                    b * s.powf(-0.5) * (1.0 + 2.0 * kappa_m(z) / s)
                }
                DriftIntegral::Ztau => {
                    let f = -q.eval(z);
                    2.0 * b * (12.0 * f).powf(-1.5) * h.eval(z)
                }
            })
        },
        spec,
    )
}

/// Null value and first-order local coefficient of `E(t^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMoment {
    /// `E(t₀^k)`.
    pub null: f64,
    /// Coefficient of `c` (of `c²` in the trend case).
    pub coefficient: f64,
    /// `null + coefficient · c` (`· c²` in the trend case).
    pub expanded: f64,
}

/// Power of `c` that multiplies the first local coefficient of `case`.
pub fn local_power_of_c(case: DeterministicCase) -> i32 {
    match case {
        DeterministicCase::InterceptTrend => 2,
        _ => 1,
    }
}

/// First-order expansion of `E(t^k)` in the local parameter.
///
/// The coefficient is the `c`-derivative at zero of the exact moment (half
/// the second derivative in the trend case, whose first derivative
/// vanishes), from central differences with two Richardson steps.
pub fn local_t_moment(
    case: DeterministicCase,
    k: usize,
    c: f64,
    spec: &QuadratureSpec,
) -> Result<LocalMoment> {
    if !(c >= 0.0) {
        return Err(Error::InvalidInput(format!("c must be non-negative (got {c})")));
    }
    let null = exact_t_moment(case, k, 0.0, spec)?;
    let power = local_power_of_c(case);
    let h0 = 0.2;
    let mut level: Vec<f64> = Vec::with_capacity(3);
    for i in 0..3 {
        let h = h0 / f64::from(1 << i);
        let fp = exact_t_moment(case, k, h, spec)?;
        let fm = exact_t_moment(case, k, -h, spec)?;
        level.push(if power == 1 {
            (fp - fm) / (2.0 * h)
        } else {
            0.5 * (fp - 2.0 * null + fm) / (h * h)
        });
    }
    let r1 = [(4.0 * level[1] - level[0]) / 3.0, (4.0 * level[2] - level[1]) / 3.0];
    let coefficient = (16.0 * r1[1] - r1[0]) / 15.0;
    Ok(LocalMoment {
        null,
        coefficient,
        expanded: null + coefficient * c.powi(power),
    })
}

/// Local coefficients of `E t`, `E t²`, `E t³` for every case, computed once.
pub fn shared_local_coefficients() -> &'static [[f64; 3]; 3] {
    static TABLE: OnceLock<[[f64; 3]; 3]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let spec = QuadratureSpec::default();
        let mut out = [[0.0; 3]; 3];
        for (i, case) in DeterministicCase::ALL.iter().enumerate() {
            for k in 1..=3 {
                out[i][k - 1] = local_t_moment(*case, k, 0.0, &spec)
                    .map(|m| m.coefficient)
                    .unwrap_or(f64::NAN);
            }
        }
        out
    })
}
