//! Entire trigonometric kernels of `z = μ²` and removable-singularity
//! combinations of them.
//!
//! Every Fredholm determinant used by the crate is a rational combination of
//! `cos μ` and `sin μ / μ` with powers of `μ² = z` in the denominators. The
//! functions below evaluate these pieces as entire functions of `z`, so the
//! point `z = 0` and the hyperbolic branch `z < 0` need no special casing by
//! callers.
//!
//! Notation used throughout:
//!
//! * `κ_c(z) = cos √z`
//! * `κ_s(z) = sin √z / √z`
//! * `κ_m(z) = (κ_c(z) − 1) / z`
//! * `κ_d(z) = (κ_s(z) − κ_c(z)) / z`
//!
//! and the tails `T_c^{(m)}(z) = (κ_c(z) − Σ_{k<m} a_k z^k) / z^m` (similarly
//! `T_s^{(m)}`), where `a_k` are the Taylor coefficients of the kernel.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Below this modulus the four base kernels use their Taylor series.
pub const BASE_CROSSOVER: f64 = 0.25;
/// Number of Taylor terms used by the base kernels inside [`BASE_CROSSOVER`].
pub const BASE_TERMS: usize = 12;
/// Below this modulus the tail kernels `T^{(m)}`, `m ≥ 1`, use their series.
pub const TAIL_CROSSOVER: f64 = 16.0;
const TAIL_MAX_TERMS: usize = 120;

/// Scalar types the kernels accept: `f64` and `Complex64`.
pub trait KernelScalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Closed-form `cos √z` (`cosh √−z` on the negative real axis).
    fn cos_sqrt(self) -> Self;
    /// Closed-form `sin √z / √z`; only called away from `z = 0`.
    fn sinc_sqrt(self) -> Self;
    /// Absolute value or complex modulus.
    fn modulus(self) -> f64;
    /// True when every component is finite.
    fn is_finite_scalar(self) -> bool;
}

impl KernelScalar for f64 {
    fn cos_sqrt(self) -> f64 {
        if self >= 0.0 {
            self.sqrt().cos()
        } else {
            (-self).sqrt().cosh()
        }
    }

    fn sinc_sqrt(self) -> f64 {
        if self >= 0.0 {
            let s = self.sqrt();
            s.sin() / s
        } else {
            let s = (-self).sqrt();
            s.sinh() / s
        }
    }

    fn modulus(self) -> f64 {
        self.abs()
    }

    fn is_finite_scalar(self) -> bool {
        self.is_finite()
    }
}

/// Principal square root computed componentwise.
///
/// The polar form used by `Complex64::sqrt` rounds away imaginary parts far
/// below the real part, which breaks complex-step derivatives near the
/// negative real axis.
fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, z.im);
    }
    let t = ((z.re.abs() + z.norm()) / 2.0).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

impl KernelScalar for Complex64 {
    fn cos_sqrt(self) -> Complex64 {
        principal_sqrt(self).cos()
    }

    fn sinc_sqrt(self) -> Complex64 {
        let s = principal_sqrt(self);
        s.sin() / s
    }

    fn modulus(self) -> f64 {
        self.norm()
    }

    fn is_finite_scalar(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Which of the two base kernels a series or tail refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Cos,
    Sin,
}

impl Kind {
    /// Offset in the factorial: `(2k)!` for cos, `(2k+1)!` for sin.
    fn shift(self) -> usize {
        match self {
            Kind::Cos => 0,
            Kind::Sin => 1,
        }
    }
}

/// Taylor coefficient `a_k` of `κ_c` or `κ_s`.
fn taylor_coef(kind: Kind, k: usize) -> f64 {
    let mut a = 1.0;
    for i in 0..k {
        let j = 2 * i + kind.shift();
        a *= -1.0 / (((j + 1) * (j + 2)) as f64);
    }
    a
}

/// Taylor coefficient `a_k` of `κ_c`, that is `(−1)^k / (2k)!`.
pub fn cos_coef(k: usize) -> f64 {
    taylor_coef(Kind::Cos, k)
}

/// Taylor coefficient `a_k` of `κ_s`, that is `(−1)^k / (2k+1)!`.
pub fn sin_coef(k: usize) -> f64 {
    taylor_coef(Kind::Sin, k)
}

/// `Σ_{k≥0} a_{k+m} z^k` with either a fixed number of terms or until the
/// terms fall below double precision relative to the running sum.
fn tail_series<S: KernelScalar>(kind: Kind, m: usize, z: S, fixed_terms: Option<usize>) -> S {
    let mut term = S::from(taylor_coef(kind, m));
    let mut sum = term;
    let max_terms = fixed_terms.unwrap_or(TAIL_MAX_TERMS);
    for k in 0..max_terms.saturating_sub(1) {
        let j = 2 * (k + m) + kind.shift();
        term = term * (-z) / S::from(((j + 1) * (j + 2)) as f64);
        sum = sum + term;
        if fixed_terms.is_none() && term.modulus() <= 1e-17 * sum.modulus() {
            break;
        }
    }
    sum
}

/// `cos √z` as an entire function of `z`.
pub fn kappa_c<S: KernelScalar>(z: S) -> S {
    if z.modulus() <= BASE_CROSSOVER {
        tail_series(Kind::Cos, 0, z, Some(BASE_TERMS))
    } else {
        z.cos_sqrt()
    }
}

/// `sin √z / √z` as an entire function of `z` (value 1 at the origin).
pub fn kappa_s<S: KernelScalar>(z: S) -> S {
    if z.modulus() <= BASE_CROSSOVER {
        tail_series(Kind::Sin, 0, z, Some(BASE_TERMS))
    } else {
        z.sinc_sqrt()
    }
}

/// `(cos √z − 1) / z` (value −1/2 at the origin).
pub fn kappa_m<S: KernelScalar>(z: S) -> S {
    if z.modulus() <= BASE_CROSSOVER {
        tail_series(Kind::Cos, 1, z, Some(BASE_TERMS))
    } else {
        (z.cos_sqrt() - S::from(1.0)) / z
    }
}

/// `(κ_s(z) − κ_c(z)) / z` (value 1/3 at the origin).
pub fn kappa_d<S: KernelScalar>(z: S) -> S {
    if z.modulus() <= BASE_CROSSOVER {
        // Coefficient of z^k is (−1)^k (2k+2) / (2k+3)!.
        let mut sum = S::from(0.0);
        let mut power = S::from(1.0);
        let mut inv_fact = 1.0 / 6.0;
        for k in 0..BASE_TERMS {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum = sum + power * S::from(sign * (2 * k + 2) as f64 * inv_fact);
            power = power * z;
            inv_fact /= ((2 * k + 4) * (2 * k + 5)) as f64;
        }
        sum
    } else {
        (z.sinc_sqrt() - z.cos_sqrt()) / z
    }
}

/// Tail `T_c^{(m)}(z) = (κ_c(z) − Σ_{k<m} a_k z^k) / z^m`.
pub fn kappa_c_tail<S: KernelScalar>(m: usize, z: S) -> S {
    tail(Kind::Cos, m, z)
}

/// Tail `T_s^{(m)}(z) = (κ_s(z) − Σ_{k<m} a_k z^k) / z^m`.
pub fn kappa_s_tail<S: KernelScalar>(m: usize, z: S) -> S {
    tail(Kind::Sin, m, z)
}

fn tail<S: KernelScalar>(kind: Kind, m: usize, z: S) -> S {
    if m == 0 {
        return match kind {
            Kind::Cos => kappa_c(z),
            Kind::Sin => kappa_s(z),
        };
    }
    if z.modulus() <= TAIL_CROSSOVER {
        return tail_series(kind, m, z, None);
    }
    let mut t = match kind {
        Kind::Cos => z.cos_sqrt(),
        Kind::Sin => z.sinc_sqrt(),
    };
    for j in 0..m {
        t = (t - S::from(taylor_coef(kind, j))) / z;
    }
    t
}

/// `z^p` for a small non-negative integer power.
fn powu<S: KernelScalar>(z: S, p: usize) -> S {
    let mut r = S::from(1.0);
    for _ in 0..p {
        r = r * z;
    }
    r
}

/// Dense real polynomial in `z`, coefficients in increasing degree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    /// Polynomial from its coefficients `c₀, c₁, …`.
    pub fn new(coeffs: &[f64]) -> Self {
        Poly(coeffs.to_vec())
    }

    /// The constant polynomial.
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Poly(vec![0.0, 1.0])
    }

    /// Coefficient of `z^k` (zero beyond the stored degree).
    pub fn coef(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    /// Horner evaluation at a real or complex point.
    pub fn eval<S: KernelScalar>(&self, z: S) -> S {
        self.0
            .iter()
            .rev()
            .fold(S::from(0.0), |acc, &c| acc * z + S::from(c))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Multiply by a scalar.
    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Poly {
        let mut v = vec![0.0; k];
        v.extend_from_slice(&self.0);
        Poly(v)
    }

    /// `self · z` minus a multiple of itself, used by differentiation rules.
    fn times_z(&self) -> Poly {
        self.shift(1)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly((0..n).map(|k| self.coef(k) + rhs.coef(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly((0..n).map(|k| self.coef(k) - rhs.coef(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Poly::default();
        }
        let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// An entire function written as
/// `z^{−n} [A(z) κ_s(z) + C(z) κ_c(z) + E(z)]`
/// with polynomials `A`, `C`, `E`.
///
/// The expression is assumed entire, so its Laurent part at `z = 0` cancels.
/// [`KernelPoly::eval`] drops that part term by term and evaluates each
/// surviving piece with the tail kernels, which removes the cancellation
/// near the origin. [`KernelPoly::laurent_residual`] reports the dropped
/// coefficients so a caller can confirm the assumption.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KernelPoly {
    /// Power `n` of the common denominator `z^n`.
    pub order: usize,
    /// Multiplier `A(z)` of `κ_s`.
    pub sin: Poly,
    /// Multiplier `C(z)` of `κ_c`.
    pub cos: Poly,
    /// Free polynomial `E(z)`.
    pub constant: Poly,
}

/// Tail kernels of one argument, shared by all terms of a [`KernelPoly`].
struct KernelTable<S> {
    z: S,
    sin_tails: Vec<S>,
    cos_tails: Vec<S>,
}

impl<S: KernelScalar> KernelTable<S> {
    fn new(z: S, order: usize) -> Self {
        KernelTable {
            z,
            sin_tails: (0..=order).map(|m| kappa_s_tail(m, z)).collect(),
            cos_tails: (0..=order).map(|m| kappa_c_tail(m, z)).collect(),
        }
    }

    /// `z^p κ` for `p ≥ 0`, the tail `T^{(−p)}` otherwise.
    fn term(&self, kind: Kind, p: isize) -> S {
        let tails = match kind {
            Kind::Cos => &self.cos_tails,
            Kind::Sin => &self.sin_tails,
        };
        if p >= 0 {
            powu(self.z, p as usize) * tails[0]
        } else {
            tails[(-p) as usize]
        }
    }
}

impl KernelPoly {
    /// Build from the denominator power and the three multipliers.
    pub fn new(order: usize, sin: Poly, cos: Poly, constant: Poly) -> Self {
        KernelPoly {
            order,
            sin,
            cos,
            constant,
        }
    }

    /// Evaluate the entire function at `z`.
    pub fn eval<S: KernelScalar>(&self, z: S) -> S {
        let n = self.order as isize;
        let table = KernelTable::new(z, self.order);
        let mut acc = S::from(0.0);
        for (j, &a) in self.sin.0.iter().enumerate() {
            if a != 0.0 {
                acc = acc + S::from(a) * table.term(Kind::Sin, j as isize - n);
            }
        }
        for (j, &a) in self.cos.0.iter().enumerate() {
            if a != 0.0 {
                acc = acc + S::from(a) * table.term(Kind::Cos, j as isize - n);
            }
        }
        for (j, &a) in self.constant.0.iter().enumerate().skip(self.order) {
            if a != 0.0 {
                acc = acc + S::from(a) * powu(z, j - self.order);
            }
        }
        acc
    }

    /// Direct evaluation of `z^{−n}[A κ_s + C κ_c + E]` without removing the
    /// Laurent part. Only accurate away from the origin; used for validation.
    pub fn eval_direct<S: KernelScalar>(&self, z: S) -> S {
        let f = self.sin.eval(z) * kappa_s(z) + self.cos.eval(z) * kappa_c(z) + self.constant.eval(z);
        f / powu(z, self.order)
    }

    /// Coefficients of `z^{−1}, …, z^{−n}` that [`KernelPoly::eval`] drops.
    /// All of them vanish when the expression is genuinely entire.
    pub fn laurent_residual(&self) -> Vec<f64> {
        let n = self.order;
        let mut res = vec![0.0; n + 1];
        let mut collect = |poly: &Poly, kind: Option<Kind>| {
            for (j, &a) in poly.0.iter().enumerate().take(n) {
                match kind {
                    Some(kind) => {
                        for k in 0..(n - j) {
                            // a · a_k z^{k + j − n}; index by the negative power.
                            res[n - j - k] += a * taylor_coef(kind, k);
                        }
                    }
                    None => res[n - j] += a,
                }
            }
        };
        collect(&self.sin, Some(Kind::Sin));
        collect(&self.cos, Some(Kind::Cos));
        collect(&self.constant, None);
        res.remove(0);
        res
    }

    /// The `z`-derivative, again in kernel form with denominator `z^{n+1}`.
    pub fn derivative(&self) -> KernelPoly {
        let n = self.order as f64;
        let a = &self.sin;
        let c = &self.cos;
        let e = &self.constant;
        // d/dz z^{−n} F = z^{−n−1} (z F' − n F), with κ_c' = −κ_s/2 and
        // z κ_s' = (κ_c − κ_s)/2.
        let sin = &(&a.derivative().times_z() - &a.scale(n + 0.5)) - &c.times_z().scale(0.5);
        let cos = &(&c.derivative().times_z() - &c.scale(n)) + &a.scale(0.5);
        let constant = &e.derivative().times_z() - &e.scale(n);
        KernelPoly::new(self.order + 1, sin, cos, constant)
    }

    /// Multiply by a scalar.
    pub fn scale(&self, s: f64) -> KernelPoly {
        KernelPoly::new(self.order, self.sin.scale(s), self.cos.scale(s), self.constant.scale(s))
    }

    /// Rewrite with a larger denominator power `z^order`.
    pub fn with_order(&self, order: usize) -> KernelPoly {
        assert!(order >= self.order, "cannot lower the denominator power");
        let k = order - self.order;
        KernelPoly::new(order, self.sin.shift(k), self.cos.shift(k), self.constant.shift(k))
    }

    /// Sum of two kernel polynomials.
    pub fn plus(&self, other: &KernelPoly) -> KernelPoly {
        let order = self.order.max(other.order);
        let a = self.with_order(order);
        let b = other.with_order(order);
        KernelPoly::new(order, &a.sin + &b.sin, &a.cos + &b.cos, &a.constant + &b.constant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn spec_examples() {
        use std::f64::consts::PI;
        assert_eq!(kappa_c(0.0), 1.0);
        assert!((kappa_c(PI * PI) + 1.0).abs() < 1e-15);
        assert!(rel(kappa_c(-1.0), 1.0_f64.cosh()) < 1e-15);
        assert_eq!(kappa_s(0.0), 1.0);
        assert!(kappa_s(PI * PI).abs() < 1e-15);
        assert!(rel(kappa_s(-4.0), 2.0_f64.sinh() / 2.0) < 1e-15);
        assert_eq!(kappa_m(0.0), -0.5);
        assert!(rel(kappa_m(PI * PI), -2.0 / (PI * PI)) < 1e-14);
        assert!(rel(kappa_m(-1.0), -(1.0_f64.cosh() - 1.0)) < 1e-14);
        assert!((kappa_d(0.0) - 1.0 / 3.0).abs() < 1e-16);
        assert!(rel(kappa_d(PI * PI), 1.0 / (PI * PI)) < 1e-14);
        assert!(rel(kappa_d(-1.0), (-1.0_f64).exp()) < 1e-14);
    }

    #[test]
    fn tails_match_definition_away_from_zero() {
        for &z in &[-40.0, -17.0, -3.0, 2.0, 9.0, 20.0, 50.0] {
            for m in 0..6 {
                let direct_c = (0..m).fold(kappa_c(z), |t, k| t - cos_coef(k) * z.powi(k as i32)) / z.powi(m as i32);
                let direct_s = (0..m).fold(kappa_s(z), |t, k| t - sin_coef(k) * z.powi(k as i32)) / z.powi(m as i32);
                assert!(rel(kappa_c_tail(m, z), direct_c) < 1e-9, "c m={m} z={z}");
                assert!(rel(kappa_s_tail(m, z), direct_s) < 1e-9, "s m={m} z={z}");
            }
        }
    }

    #[test]
    fn tails_continuous_across_crossover() {
        for m in 1..7 {
            for &sign in &[1.0, -1.0] {
                let lo = kappa_s_tail(m, sign * TAIL_CROSSOVER * (1.0 - 1e-12));
                let hi = kappa_s_tail(m, sign * TAIL_CROSSOVER * (1.0 + 1e-12));
                assert!(rel(lo, hi) < 1e-10, "m={m} sign={sign}: {lo} vs {hi}");
            }
        }
    }

    #[test]
    fn kernel_poly_matches_direct_and_is_smooth_at_zero() {
        // (κ_s + 2κ_m)/z written as (z κ_s + 2 κ_c − 2)/z².
        let q = KernelPoly::new(2, Poly::new(&[0.0, 1.0]), Poly::new(&[2.0]), Poly::new(&[-2.0]));
        assert!(q.laurent_residual().iter().all(|r| r.abs() < 1e-15));
        for &z in &[-30.0, -5.0, 3.0, 25.0] {
            assert!(rel(q.eval(z), q.eval_direct(z)) < 1e-11);
        }
        assert!((q.eval(0.0) + 1.0 / 12.0).abs() < 1e-15);
        let dq = q.derivative();
        let h = 1e-5;
        for &z in &[-20.0, -1.0, 0.0, 0.7, 10.0] {
            let fd = (q.eval(z + h) - q.eval(z - h)) / (2.0 * h);
            assert!((dq.eval(z) - fd).abs() < 1e-8 * (1.0 + fd.abs()), "z={z}");
        }
    }

    #[test]
    fn principal_sqrt_keeps_tiny_imaginary_parts() {
        for &(re, im) in &[(-7.0, -1e-20), (-7.0, 1e-20), (4.0, 1e-20), (3.0, -2.0), (-3.0, 2.0), (0.0, -1.0)] {
            let z = Complex64::new(re, im);
            let s = principal_sqrt(z);
            assert!((s * s - z).norm() <= 1e-15 * z.norm());
            assert!((s - z.sqrt()).norm() <= 1e-15 * s.norm());
            if re < 0.0 && im.abs() < 1e-10 {
                let want = im / (2.0 * (-re).sqrt());
                assert!((s.re - want.abs()).abs() <= 1e-15 * want.abs());
            }
        }
    }

    #[test]
    fn complex_argument_agrees_with_real_on_axis() {
        for &z in &[-9.0, -0.1, 0.0, 0.2, 7.0] {
            let zc = Complex64::new(z, 0.0);
            assert!((kappa_c(zc).re - kappa_c(z)).abs() < 1e-13 * (1.0 + kappa_c(z).abs()));
            assert!((kappa_s_tail(3, zc).re - kappa_s_tail(3, z)).abs() < 1e-15);
        }
    }
}
