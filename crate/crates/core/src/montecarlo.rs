//! Seeded, parallel Monte Carlo experiments: local-to-unity panels,
//! rejection rates, the IPS local power grid, Brownian functionals and
//! Dickey–Fuller coefficient draws.
//!
//! # Random streams
//!
//! Every random quantity is taken from a ChaCha8 generator keyed by the
//! run seed (expanded with `seed_from_u64`). The replication index selects
//! the ChaCha stream and the unit index selects a block of `2^36` words
//! inside that stream, so the draws of unit `i` in replication `r` are a
//! fixed function of `(seed, r, i)`. Within a unit the order is `cᵢ`,
//! `σᵢ²`, `b₀ᵢ`, `b₁ᵢ`, then `e_{i1}, …, e_{iT}`. Replications run on the
//! rayon pool and are reduced in replication order, so results do not
//! depend on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case::DeterministicCase;
use crate::error::{Error, Result};
use crate::estimators::{panel_statistics_with, unit_ols, VarianceDivisor};
use crate::panel::{PanelDataset, MIN_PERIODS};
use crate::power::{CDistribution, TestVariant};

/// Number of words reserved for one unit inside a replication stream.
const UNIT_WORD_SHIFT: u32 = 36;

/// Default range of the innovation variances `σᵢ²`.
pub const DEFAULT_SIGMA_SQ_RANGE: (f64, f64) = (0.5, 1.5);

/// Design of a local-to-unity panel experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    /// Number of units `N`.
    pub n_units: usize,
    /// Number of periods `T`; each series has `T + 1` observations.
    pub n_periods: usize,
    /// Deterministic terms of the DGP and of the fitted regressions.
    pub case: DeterministicCase,
    /// Distribution of the local parameters `cᵢ`.
    pub c_dist: CDistribution,
    /// Exponent `α` in `ρᵢ = 1 − cᵢ/(N^α T)`; either `1/2` or `1/4`.
    pub alpha_rate: f64,
    /// Uniform range of `σᵢ²`.
    pub sigma_sq_range: (f64, f64),
    /// Add the unit effects of `case` (`b₀ᵢ`, plus `b₁ᵢ t` with a trend).
    pub effects: bool,
    /// Run seed.
    pub seed: u64,
    /// Number of replications.
    pub reps: usize,
    /// Residual variance divisor of the fitted unit regressions.
    #[serde(default)]
    pub divisor: VarianceDivisor,
}

impl SimulationSpec {
    /// Design with the default variance range and effects switched on.
    pub fn new(
        n_units: usize,
        n_periods: usize,
        case: DeterministicCase,
        c_dist: CDistribution,
        alpha_rate: f64,
        seed: u64,
        reps: usize,
    ) -> Self {
        SimulationSpec {
            n_units,
            n_periods,
            case,
            c_dist,
            alpha_rate,
            sigma_sq_range: DEFAULT_SIGMA_SQ_RANGE,
            effects: true,
            seed,
            reps,
            divisor: VarianceDivisor::default(),
        }
    }

    /// Design matched to `variant`: its deterministic case and the rate
    /// `α` of [`alpha_for`].
    pub fn for_variant(
        variant: TestVariant,
        n_units: usize,
        n_periods: usize,
        c_dist: CDistribution,
        seed: u64,
        reps: usize,
    ) -> Self {
        Self::new(n_units, n_periods, variant.case(), c_dist, alpha_for(variant), seed, reps)
    }

    /// Check the design invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_units < 4 || self.n_periods < MIN_PERIODS {
            return Err(Error::InvalidInput(format!(
                "need N >= 4 and T >= {MIN_PERIODS} (got N={}, T={})",
                self.n_units, self.n_periods
            )));
        }
        if self.reps == 0 {
            return Err(Error::EmptyRun);
        }
        if self.alpha_rate != 0.5 && self.alpha_rate != 0.25 {
            return Err(Error::InvalidInput(format!(
                "alpha_rate must be 0.5 or 0.25 (got {})",
                self.alpha_rate
            )));
        }
        let (lo, hi) = self.sigma_sq_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
            return Err(Error::InvalidInput(format!("invalid sigma^2 range ({lo}, {hi})")));
        }
        self.c_dist.validate()
    }

    fn base_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Rate `α` used with `variant`: `1/4` for the trend case, `1/2` otherwise.
pub fn alpha_for(variant: TestVariant) -> f64 {
    match variant.case() {
        DeterministicCase::InterceptTrend => 0.25,
        _ => 0.5,
    }
}

fn substream(base: &ChaCha8Rng, stream: u64, block: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(block) << UNIT_WORD_SHIFT);
    rng
}

/// One simulated panel. Replication `rep_index` is reproducible on its own.
pub fn simulate_panel(spec: &SimulationSpec, rep_index: usize) -> Result<PanelDataset> {
    spec.validate()?;
    if rep_index >= spec.reps {
        return Err(Error::InvalidInput(format!(
            "replication {rep_index} out of range (reps = {})",
            spec.reps
        )));
    }
    Ok(simulate_unchecked(spec, &spec.base_rng(), rep_index))
}

fn simulate_unchecked(spec: &SimulationSpec, base: &ChaCha8Rng, rep: usize) -> PanelDataset {
    let t_len = spec.n_periods;
    let scale = (spec.n_units as f64).powf(spec.alpha_rate) * t_len as f64;
    let (lo, hi) = spec.sigma_sq_range;
    let values = (0..spec.n_units)
        .map(|unit| {
            let mut rng = substream(base, rep as u64, unit as u64);
            let c = spec.c_dist.sample(&mut rng);
            let sigma = if hi > lo { rng.random_range(lo..hi) } else { lo }.sqrt();
            let b0: f64 = StandardNormal.sample(&mut rng);
            let b1: f64 = StandardNormal.sample(&mut rng);
            let (b0, b1) = match (spec.effects, spec.case) {
                (false, _) | (true, DeterministicCase::None) => (0.0, 0.0),
                (true, DeterministicCase::Intercept) => (b0, 0.0),
                (true, DeterministicCase::InterceptTrend) => (b0, b1),
            };
            let rho = 1.0 - c / scale;
            let mut y = 0.0;
            let mut z = Vec::with_capacity(t_len + 1);
            z.push(b0);
            for t in 1..=t_len {
                let e: f64 = StandardNormal.sample(&mut rng);
                y = rho * y + sigma * e;
                z.push(b0 + b1 * t as f64 + y);
            }
            z
        })
        .collect();
    PanelDataset::from_series(values).expect("simulated panels are rectangular and finite")
}

/// Estimated rejection probability of one test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    /// Test statistic.
    pub variant: TestVariant,
    /// Nominal level.
    pub level: f64,
    /// Fraction of replications that rejected.
    pub rate: f64,
    /// `√(rate (1 − rate)/reps)`.
    pub mc_std_err: f64,
    /// Number of replications.
    pub reps: usize,
    /// Run seed.
    pub seed: u64,
}

impl RejectionReport {
    fn from_count(variant: TestVariant, level: f64, rejections: usize, reps: usize, seed: u64) -> Self {
        let rate = rejections as f64 / reps as f64;
        RejectionReport {
            variant,
            level,
            rate,
            mc_std_err: (rate * (1.0 - rate) / reps as f64).sqrt(),
            reps,
            seed,
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

/// Rejection rate of `variant` at `level` over `spec.reps` panels.
///
/// The statistic is fitted with `variant`'s deterministic case, which
/// need not equal the DGP case of `spec`.
pub fn rejection_rate(spec: &SimulationSpec, variant: TestVariant, level: f64) -> Result<RejectionReport> {
    Ok(rejection_rates(spec, &[variant], level)?.remove(0))
}

/// Rejection rates of several statistics computed on the same panels.
pub fn rejection_rates(
    spec: &SimulationSpec,
    variants: &[TestVariant],
    level: f64,
) -> Result<Vec<RejectionReport>> {
    spec.validate()?;
    check_level(level)?;
    if variants.is_empty() {
        return Err(Error::InvalidInput("no test variants requested".into()));
    }
    let base = spec.base_rng();
    let decisions: Vec<Vec<bool>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let panel = simulate_unchecked(spec, &base, rep);
            let outcomes = panel_statistics_with(&panel, variants, spec.divisor)?;
            Ok(outcomes.iter().map(|o| o.rejects(level)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(variants
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let count = decisions.iter().filter(|d| d[k]).count();
            RejectionReport::from_count(v, level, count, spec.reps, spec.seed)
        })
        .collect())
}

/// Simulated values of `variant` over the replications of `spec`, in
/// replication order.
pub fn statistic_draws(spec: &SimulationSpec, variant: TestVariant) -> Result<Vec<f64>> {
    spec.validate()?;
    let base = spec.base_rng();
    (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let panel = simulate_unchecked(spec, &base, rep);
            Ok(panel_statistics_with(&panel, &[variant], spec.divisor)?[0].statistic)
        })
        .collect()
}

/// Cross-section sizes of the IPS power grid.
pub const TABLE2_UNITS: [usize; 3] = [25, 100, 1000];
/// Time dimensions of the IPS power grid.
pub const TABLE2_PERIODS: [usize; 3] = [50, 100, 250];
/// Statistics of the IPS power grid, in column order.
pub const TABLE2_VARIANTS: [TestVariant; 3] = [TestVariant::IpsZ, TestVariant::IpsZmu, TestVariant::IpsZtau];

/// Which part of the IPS power grid to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Table2Grid {
    /// All `N × T` combinations.
    Full,
    /// `N ∈ {25, 100}` with `T = 50`.
    Desk,
}

impl Table2Grid {
    /// `(N, T)` pairs in row-major order.
    pub fn sizes(self) -> Vec<(usize, usize)> {
        let units: &[usize] = match self {
            Table2Grid::Full => &TABLE2_UNITS,
            Table2Grid::Desk => &TABLE2_UNITS[..2],
        };
        let periods: &[usize] = match self {
            Table2Grid::Full => &TABLE2_PERIODS,
            Table2Grid::Desk => &TABLE2_PERIODS[..1],
        };
        units.iter().flat_map(|&n| periods.iter().map(move |&t| (n, t))).collect()
    }
}

/// One cell of the IPS power grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table2Cell {
    /// Number of units.
    pub n_units: usize,
    /// Number of periods.
    pub n_periods: usize,
    /// Distribution of `cᵢ`.
    pub distribution: CDistribution,
    /// Rate `α`.
    pub alpha_rate: f64,
    /// Rejection report at the 5% level.
    pub report: RejectionReport,
}

/// Simulated 5% rejection rates of `Z`, `Zμ` and `Zτ` under the local
/// alternatives of [`CDistribution::TABLE`].
///
/// Every cell uses the same `seed`; cells differ through `N`, `T`, the
/// distribution and the deterministic case.
pub fn replicate_table2(reps: usize, seed: u64, grid: Table2Grid) -> Result<Vec<Table2Cell>> {
    replicate_table2_with(reps, seed, grid, VarianceDivisor::default())
}

/// [`replicate_table2`] with an explicit variance divisor.
pub fn replicate_table2_with(
    reps: usize,
    seed: u64,
    grid: Table2Grid,
    divisor: VarianceDivisor,
) -> Result<Vec<Table2Cell>> {
    let mut cells = Vec::new();
    for (n, t) in grid.sizes() {
        for dist in CDistribution::TABLE {
            for variant in TABLE2_VARIANTS {
                let mut spec = SimulationSpec::for_variant(variant, n, t, dist, seed, reps);
                spec.divisor = divisor;
                let report = rejection_rate(&spec, variant, 0.05)?;
                cells.push(Table2Cell {
                    n_units: n,
                    n_periods: t,
                    distribution: dist,
                    alpha_rate: spec.alpha_rate,
                    report,
                });
            }
        }
    }
    Ok(cells)
}

/// Functionals of a standard Brownian motion `W` on `[0, 1]`.
///
/// With `W^μ = W − ∫W`, `G(r) = ∫₀ʳW − ∫₀¹∫₀ᵗW` and
/// `H(r) = ∫₀ʳ(r−s)W(s)ds − ∫₀¹∫₀ᵗ(t−s)W(s)ds dt`:
/// `A = ∫(W^μ)²`, `B₁ = ∫G dW`, `B₂ = ∫W^μ dW`, `B₃ = ∫G²`,
/// `B₄ = ∫W^μ G`, `B₅ = ∫(r−½)W^μ`, `B₆ = ∫(r−½)G`, `B₇ = ∫W^μ H`,
/// `B₈ = ∫(r−½)dW`, `B₉ = ∫(r−½)H` and `B₁₀ = ∫H dW`.
/// `U(case)`, `V(case)` and `TRatio(case)` are the Dickey–Fuller numerator
/// `∫W^d dW`, denominator `∫(W^d)²` and ratio `U/√V` for the detrended
/// process `W^d` of `case`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrownianFunctional {
    /// `A`.
    A,
    /// `B₁ … B₁₀`, indexed from 1.
    B(u8),
    /// `A − 12B₅²`.
    AMinus12B5Sq,
    /// `B₁ − 12B₆B₈`.
    B1Minus12B6B8,
    /// `B₃ − 12B₆²`.
    B3Minus12B6Sq,
    /// `B₄ − 12B₅B₆`.
    B4Minus12B5B6,
    /// `B₇ − 12B₅B₉`.
    B7Minus12B5B9,
    /// `B₁₀ − 12B₉B₈`.
    B10Minus12B9B8,
    /// Dickey–Fuller numerator.
    U(DeterministicCase),
    /// Dickey–Fuller denominator.
    V(DeterministicCase),
    /// Dickey–Fuller t-ratio `U/√V`.
    TRatio(DeterministicCase),
}

impl BrownianFunctional {
    fn validate(self) -> Result<()> {
        match self {
            BrownianFunctional::B(k) if !(1..=10).contains(&k) => {
                Err(Error::InvalidInput(format!("B index must be 1..=10 (got {k})")))
            }
            _ => Ok(()),
        }
    }
}

/// Monte Carlo mean of a functional with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    /// Functional.
    pub functional: BrownianFunctional,
    /// Sample mean.
    pub mean: f64,
    /// Standard error of the mean.
    pub std_err: f64,
}

/// Functional values of one discretised path.
struct PathValues {
    a: f64,
    b: [f64; 11],
    u: [f64; 3],
    v: [f64; 3],
}

fn case_slot(case: DeterministicCase) -> usize {
    match case {
        DeterministicCase::None => 0,
        DeterministicCase::Intercept => 1,
        DeterministicCase::InterceptTrend => 2,
    }
}

impl PathValues {
    fn get(&self, f: BrownianFunctional) -> f64 {
        let b = &self.b;
        match f {
            BrownianFunctional::A => self.a,
            BrownianFunctional::B(k) => b[k as usize],
            BrownianFunctional::AMinus12B5Sq => self.a - 12.0 * b[5] * b[5],
            BrownianFunctional::B1Minus12B6B8 => b[1] - 12.0 * b[6] * b[8],
            BrownianFunctional::B3Minus12B6Sq => b[3] - 12.0 * b[6] * b[6],
            BrownianFunctional::B4Minus12B5B6 => b[4] - 12.0 * b[5] * b[6],
            BrownianFunctional::B7Minus12B5B9 => b[7] - 12.0 * b[5] * b[9],
            BrownianFunctional::B10Minus12B9B8 => b[10] - 12.0 * b[9] * b[8],
            BrownianFunctional::U(c) => self.u[case_slot(c)],
            BrownianFunctional::V(c) => self.v[case_slot(c)],
            BrownianFunctional::TRatio(c) => self.u[case_slot(c)] / self.v[case_slot(c)].sqrt(),
        }
    }
}

/// Trapezoid rule on the uniform grid of `f.len() − 1` steps.
fn trapezoid(f: &[f64], dt: f64) -> f64 {
    let n = f.len() - 1;
    (f[1..n].iter().sum::<f64>() + 0.5 * (f[0] + f[n])) * dt
}

/// Running trapezoid integral `∫₀^{r_k} f`.
fn cumulative(f: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dt;
        out.push(acc);
    }
    out
}

/// Left-point sum `Σ f(r_k)(W(r_{k+1}) − W(r_k))`.
fn ito_sum(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w.windows(2)).map(|(fk, d)| fk * (d[1] - d[0])).sum()
}

fn path_values(w: &[f64]) -> PathValues {
    let n = w.len() - 1;
    let dt = 1.0 / n as f64;
    let r: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let int_w = trapezoid(w, dt);
    let wmu: Vec<f64> = w.iter().map(|x| x - int_w).collect();
    let i1 = cumulative(w, dt);
    let g_mean = trapezoid(&i1, dt);
    let g: Vec<f64> = i1.iter().map(|x| x - g_mean).collect();
    let j = cumulative(&i1, dt);
    let h_mean = trapezoid(&j, dt);
    let h: Vec<f64> = j.iter().map(|x| x - h_mean).collect();
    let half: Vec<f64> = r.iter().map(|x| x - 0.5).collect();
    let prod = |a: &[f64], b: &[f64]| -> f64 {
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        trapezoid(&p, dt)
    };

    // Detrended W: residual of the least-squares fit on (1, r) in L².
    let int_rw = prod(&r, w);
    let slope = 12.0 * (int_rw - 0.5 * int_w);
    let wtau: Vec<f64> = wmu.iter().zip(&half).map(|(x, hh)| x - slope * hh).collect();

    let mut b = [0.0; 11];
    b[1] = ito_sum(&g, w);
    b[2] = ito_sum(&wmu, w);
    b[3] = prod(&g, &g);
    b[4] = prod(&wmu, &g);
    b[5] = prod(&half, &wmu);
    b[6] = prod(&half, &g);
    b[7] = prod(&wmu, &h);
    b[8] = 0.5 * w[n] - int_w;
    b[9] = prod(&half, &h);
    b[10] = ito_sum(&h, w);
    let a = prod(&wmu, &wmu);
    PathValues {
        a,
        b,
        u: [ito_sum(w, w), b[2], ito_sum(&wtau, w)],
        v: [prod(w, w), a, prod(&wtau, &wtau)],
    }
}

const ORACLE_CHUNK: usize = 256;

/// Monte Carlo means of several Brownian functionals from one set of paths.
///
/// Paths use `steps` Gaussian increments on a uniform grid; stochastic
/// integrals are left-point sums and time integrals use the trapezoid rule.
/// Path `k` draws from stream `k` of the generator keyed by `seed`.
pub fn brownian_oracle_many(
    functionals: &[BrownianFunctional],
    paths: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<OracleEstimate>> {
    if paths < 2 || steps < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 paths and 2 steps (got {paths}, {steps})"
        )));
    }
    for f in functionals {
        f.validate()?;
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let k = functionals.len();
    let sd = (1.0 / steps as f64).sqrt();
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..paths.div_ceil(ORACLE_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut sum = vec![0.0; k];
            let mut sum_sq = vec![0.0; k];
            let mut w = vec![0.0; steps + 1];
            for path in chunk * ORACLE_CHUNK..((chunk + 1) * ORACLE_CHUNK).min(paths) {
                let mut rng = substream(&base, path as u64, 0);
                for i in 1..=steps {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    w[i] = w[i - 1] + sd * e;
                }
                let values = path_values(&w);
                for (j, f) in functionals.iter().enumerate() {
                    let x = values.get(*f);
                    sum[j] += x;
                    sum_sq[j] += x * x;
                }
            }
            (sum, sum_sq)
        })
        .collect();
    let p = paths as f64;
    Ok(functionals
        .iter()
        .enumerate()
        .map(|(j, &functional)| {
            let s: f64 = chunks.iter().map(|c| c.0[j]).sum();
            let s2: f64 = chunks.iter().map(|c| c.1[j]).sum();
            let mean = s / p;
            let var = ((s2 - p * mean * mean) / (p - 1.0)).max(0.0);
            OracleEstimate {
                functional,
                mean,
                std_err: (var / p).sqrt(),
            }
        })
        .collect())
}

/// Monte Carlo mean of one Brownian functional.
pub fn brownian_oracle(
    functional: BrownianFunctional,
    paths: usize,
    steps: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    Ok(brownian_oracle_many(&[functional], paths, steps, seed)?.remove(0))
}

/// Draws of the normalised coefficient `T(ρ̂ − 1)` from autoregressions
/// `y_t = (1 − c/T) y_{t−1} + e_t`, `y_0 = 0`, fitted by OLS over
/// `t = 1..T` with the deterministic terms of `case`.
pub fn simulate_df_coefficient(
    case: DeterministicCase,
    c: f64,
    periods: usize,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if periods < MIN_PERIODS || paths == 0 || !c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "need T >= {MIN_PERIODS}, paths >= 1 and finite c (got T={periods}, paths={paths}, c={c})"
        )));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let rho = 1.0 - c / periods as f64;
    (0..paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = substream(&base, path as u64, 0);
            // Prepend y_{-1} = 0 so the fitted pairs (y_{t−1}, y_t) start at t = 1.
            let mut y = vec![0.0; periods + 2];
            for t in 2..=periods + 1 {
                let e: f64 = StandardNormal.sample(&mut rng);
                y[t] = rho * y[t - 1] + e;
            }
            let reg = unit_ols(&y, case)?;
            Ok(periods as f64 * (reg.rho_hat - 1.0))
        })
        .collect()
}

/// Kolmogorov distance between the empirical CDF of `sample` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov distance estimate using `grid` evaluations of `cdf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsBound {
    /// Largest discrepancy observed at the grid points.
    pub at_grid: f64,
    /// Upper bound on the distance over the whole line.
    pub upper: f64,
}

/// Bound the Kolmogorov distance between the empirical CDF of `sample`
/// and a continuous increasing `cdf` that is costly to evaluate.
///
/// `cdf` is evaluated at `grid + 1` empirical quantiles. Monotonicity of
/// both functions bounds the gap between consecutive grid points, so
/// `upper` is a rigorous bound and exceeds the true distance by at most
/// roughly `1/grid`.
pub fn ks_distance_bound<F: FnMut(f64) -> Result<f64>>(
    sample: &[f64],
    grid: usize,
    mut cdf: F,
) -> Result<KsBound> {
    if sample.is_empty() || grid == 0 {
        return Err(Error::EmptyRun);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;
    let mut at_grid: f64 = 0.0;
    let mut upper: f64 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=grid {
        let mut idx = ((k * (n - 1)) as f64 / grid as f64).round() as usize;
        // Step to the last copy of a tied value so `idx + 1` counts all of them.
        while idx + 1 < n && sorted[idx + 1] == sorted[idx] {
            idx += 1;
        }
        let x = sorted[idx];
        let lo = sorted.partition_point(|v| *v < x) as f64 / nf;
        let hi = (idx + 1) as f64 / nf;
        let f = cdf(x)?;
        at_grid = at_grid.max((f - lo).abs()).max((f - hi).abs());
        upper = match prev {
            None => upper.max(f),
            Some((f_prev, hi_prev)) => upper.max(f - hi_prev).max(lo - f_prev),
        };
        prev = Some((f, hi));
    }
    if let Some((f_last, _)) = prev {
        upper = upper.max(1.0 - f_last);
    }
    Ok(KsBound {
        at_grid,
        upper: upper.max(at_grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_spec(case: DeterministicCase, n: usize, t: usize, reps: usize) -> SimulationSpec {
        SimulationSpec::new(n, t, case, CDistribution::PointMass { c: 0.0 }, 0.5, 7, reps)
    }

    #[test]
    fn panels_are_reproducible() {
        let spec = null_spec(DeterministicCase::InterceptTrend, 6, 20, 3);
        let a = simulate_panel(&spec, 2).unwrap();
        let b = simulate_panel(&spec, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_panel(&spec, 1).unwrap());
        assert!(simulate_panel(&spec, 3).is_err());
    }

    #[test]
    fn innovations_have_unit_moments() {
        let mut spec = SimulationSpec::new(
            25,
            50,
            DeterministicCase::None,
            CDistribution::PointMass { c: 0.0 },
            0.5,
            42,
            1,
        );
        spec.sigma_sq_range = (1.0, 1.0);
        let panel = simulate_panel(&spec, 0).unwrap();
        let e: Vec<f64> = panel
            .all_series()
            .iter()
            .flat_map(|z| z.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>())
            .collect();
        let n = e.len() as f64;
        let mean = e.iter().sum::<f64>() / n;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let tol = 4.0 / n.sqrt();
        assert!(mean.abs() < tol, "{mean}");
        assert!((var - 1.0).abs() < tol * 2f64.sqrt(), "{var}");
    }

    #[test]
    fn path_functionals_on_a_linear_path() {
        // W(r) = r: closed forms of a few functionals.
        let n = 2000;
        let w: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let v = path_values(&w);
        assert!((v.a - 1.0 / 12.0).abs() < 1e-6);
        assert!((v.b[8] - 0.0).abs() < 1e-12);
        assert!((v.v[0] - 1.0 / 3.0).abs() < 1e-6);
        assert!(v.v[2].abs() < 1e-10);
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_small() {
        let sample: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_distance(&sample, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn ks_bound_brackets_exact_distance() {
        let sample: Vec<f64> = (0..5000).map(|i| ((i as f64 + 0.5) / 5000.0).powf(1.1)).collect();
        let exact = ks_distance(&sample, |x| x.clamp(0.0, 1.0));
        let b = ks_distance_bound(&sample, 100, |x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!(b.at_grid <= exact + 1e-12);
        assert!(b.upper >= exact);
        assert!(b.upper <= exact + 0.011);
    }

    #[test]
    fn rejection_rate_rejects_bad_inputs() {
        let spec = null_spec(DeterministicCase::None, 10, 20, 0);
        assert!(matches!(
            rejection_rate(&spec, TestVariant::IpsZ, 0.05),
            Err(Error::EmptyRun)
        ));
        let spec = null_spec(DeterministicCase::None, 10, 20, 5);
        assert!(rejection_rate(&spec, TestVariant::IpsZ, 1.5).is_err());
        assert!(rejection_rate(&spec, TestVariant::LlcT23, 0.05).is_err());
    }
}
