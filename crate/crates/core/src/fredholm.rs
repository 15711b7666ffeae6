//! Fredholm determinants of the local-to-unity covariance kernels, the joint
//! moment generating functions they induce, and Imhof inversion of the
//! limiting distribution of `T(ρ̂ − 1)`.
//!
//! With `u = −λ` and `v = λx`, every determinant is written as
//! `D_j = e^{−c} B_j(u, z)` where `z = 2v − c²` and
//! `B_j = P₀(z) + u P₁(z) + u² P₂(z)`.
//! Each `P_k` is a [`KernelPoly`], so evaluation is exact through `z = 0` and
//! across to the hyperbolic branch `z < 0`. The joint m.g.f. of the limiting
//! pair `(U, V)` is `ψ(u, v) = e^{−u/2} D^{−1/2} = e^{(c−u)/2} B^{−1/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::case::DeterministicCase;
use crate::error::{Error, Result};
use crate::kernels::{KernelPoly, KernelScalar, Poly};
use crate::quadrature::{gl_nodes, GL_ORDER};

/// The determinant bracket `B_j(u, z)` for a fixed `c`, together with the
/// first two `z`-derivatives of its `u`-coefficients.
#[derive(Clone, Debug)]
pub struct Bracket {
    model: usize,
    c: f64,
    coeffs: [KernelPoly; 3],
    first: [KernelPoly; 3],
    second: [KernelPoly; 3],
}

/// Values of `B`, `∂_u B`, `∂_u² B` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketValue<S> {
    /// `B`.
    pub b: S,
    /// `∂B/∂u`.
    pub bu: S,
    /// `∂²B/∂u²`.
    pub buu: S,
}

fn k(x: f64) -> Poly {
    Poly::constant(x)
}

impl Bracket {
    /// Build the bracket of determinant `model ∈ {1, 2, 3, 4}` at `c`.
    pub fn new(model: usize, c: f64) -> Result<Self> {
        let c2 = c * c;
        let c3 = c2 * c;
        let c4 = c2 * c2;
        let c5 = c4 * c;
        let z = Poly::z();
        // v = (z + c²)/2
        let v = Poly::new(&[0.5 * c2, 0.5]);
        let v2 = &v * &v;
        let zero = KernelPoly::default;
        let coeffs = match model {
            1 => [
                KernelPoly::new(0, k(c), k(1.0), Poly::default()),
                KernelPoly::new(0, k(-1.0), Poly::default(), Poly::default()),
                zero(),
            ],
            2 => {
                let p0 = KernelPoly::new(
                    2,
                    &(&v.scale(2.0) - &k(c3)) * &z,
                    &z.scale(-c2) - &v.scale(4.0 * c),
                    v.scale(4.0 * c),
                );
                let p2 = KernelPoly::new(2, z.clone(), k(2.0), k(-2.0));
                [p0, p2.scale(c2), p2]
            }
            3 => {
                let a = c2 + 3.0 * c + 3.0;
                let p0 = KernelPoly::new(
                    2,
                    &z.scale(-c3) + &v.scale(6.0 * (c + 1.0)),
                    &z.scale(-c2) - &v.scale(6.0 * (c + 1.0)),
                    Poly::default(),
                );
                let p1 = KernelPoly::new(2, &z.scale(a) - &k(3.0 * a), k(3.0 * a), Poly::default());
                [p0, p1, zero()]
            }
            4 => {
                let z2 = &z * &z;
                let p0 = KernelPoly::new(
                    4,
                    &(&(&k(c5) - &v.scale(8.0 * (c2 - 3.0 * c - 3.0))) * &z2)
                        - &(&v2 * &z).scale(96.0 * (c + 1.0)),
                    &(&v2.scale(-96.0 * (c + 1.0)) + &z2.scale(c4)) + &(&v * &z).scale(16.0 * c3),
                    &v2.scale(96.0 * (c + 1.0)) + &(&v * &z).scale(8.0 * c2 * (c + 3.0)),
                );
                let p1 = KernelPoly::new(
                    4,
                    &z2.scale(-c4) + &z.scale(24.0 * c4),
                    &k(24.0 * c4) - &z.scale(8.0 * c4),
                    &k(-24.0 * c4) - &z.scale(4.0 * c4),
                );
                let w = &v.scale(8.0) + &k(12.0 * (c + 1.0));
                let p2 = KernelPoly::new(
                    4,
                    &z2.scale(-4.0 * (c2 + 3.0 * c + 27.0)) + &(&w * &z).scale(24.0),
                    &w.scale(24.0) - &z.scale(32.0 * (c2 + 3.0 * c + 6.0)),
                    &w.scale(-24.0) - &z.scale(16.0 * (c2 + 3.0 * c - 3.0)),
                );
                [p0, p1, p2]
            }
            other => return Err(Error::InvalidModel(other)),
        };
        let first = [coeffs[0].derivative(), coeffs[1].derivative(), coeffs[2].derivative()];
        let second = [first[0].derivative(), first[1].derivative(), first[2].derivative()];
        Ok(Bracket {
            model,
            c,
            coeffs,
            first,
            second,
        })
    }

    /// Bracket of the determinant carrying `case`.
    pub fn for_case(case: DeterministicCase, c: f64) -> Self {
        Bracket::new(case.model_index(), c).expect("case model indices are valid")
    }

    /// Determinant index `j`.
    pub fn model(&self) -> usize {
        self.model
    }

    /// Local parameter `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// The three `u`-coefficients `P₀, P₁, P₂` in kernel form.
    pub fn coefficients(&self) -> &[KernelPoly; 3] {
        &self.coeffs
    }

    /// `P₀(z), P₁(z), P₂(z)`.
    pub fn u_coefficients<S: KernelScalar>(&self, z: S) -> [S; 3] {
        [self.coeffs[0].eval(z), self.coeffs[1].eval(z), self.coeffs[2].eval(z)]
    }

    /// `P_k'(z)` for `k = 0, 1, 2`.
    pub fn u_coefficients_dz<S: KernelScalar>(&self, z: S) -> [S; 3] {
        [self.first[0].eval(z), self.first[1].eval(z), self.first[2].eval(z)]
    }

    /// `P_k''(z)` for `k = 0, 1, 2`.
    pub fn u_coefficients_dzz<S: KernelScalar>(&self, z: S) -> [S; 3] {
        [self.second[0].eval(z), self.second[1].eval(z), self.second[2].eval(z)]
    }

    /// `B`, `∂_u B` and `∂_u² B` at `(u, z)`.
    pub fn eval<S: KernelScalar>(&self, u: S, z: S) -> BracketValue<S> {
        let [p0, p1, p2] = self.u_coefficients(z);
        BracketValue {
            b: p0 + u * (p1 + u * p2),
            bu: p1 + S::from(2.0) * u * p2,
            buu: S::from(2.0) * p2,
        }
    }

    /// `z = 2v − c²` for a given `v`.
    pub fn z_of_v<S: KernelScalar>(&self, v: S) -> S {
        S::from(2.0) * v - S::from(self.c * self.c)
    }
}

/// Fredholm determinant `D_j(λ; c, x)` for `j ∈ {1, 2, 3, 4}` at complex `λ`.
pub fn fredholm_det(j: usize, lambda: Complex64, c: f64, x: f64) -> Result<Complex64> {
    let bracket = Bracket::new(j, c)?;
    Ok(det_with(&bracket, lambda, x))
}

fn det_with(bracket: &Bracket, lambda: Complex64, x: f64) -> Complex64 {
    let v = lambda * x;
    let z = bracket.z_of_v(v);
    (-bracket.c).exp() * bracket.eval(-lambda, z).b
}

/// The naive determinant `D₁` written with `cos μ` and `sin μ / μ` directly.
/// Used as an independent check of the kernel form.
pub fn fredholm_det1_direct(lambda: Complex64, c: f64, x: f64) -> Complex64 {
    let mu = (2.0 * lambda * x - c * c).sqrt();
    let sinc = if mu.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { mu.sin() / mu };
    (-c).exp() * (mu.cos() + (c + lambda) * sinc)
}

fn check_domain(b: f64, u: f64, v: f64, c: f64) -> Result<()> {
    if b > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { u, v, c, value: b })
    }
}

/// Joint m.g.f. `ψ(u, v) = E exp(uU + vV)` of the limiting pair for `case`.
pub fn joint_mgf(case: DeterministicCase, u: f64, v: f64, c: f64) -> Result<f64> {
    let bracket = Bracket::for_case(case, c);
    let z = bracket.z_of_v(v);
    let b = bracket.eval(u, z).b;
    check_domain(b, u, v, c)?;
    Ok((0.5 * (c - u)).exp() / b.sqrt())
}

/// `ψ` and its first three `u`-derivatives at `(0, −v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UDerivatives {
    /// `ψ(0, −v)`.
    pub psi: f64,
    /// `∂ψ/∂u`.
    pub du: f64,
    /// `∂²ψ/∂u²`.
    pub duu: f64,
    /// `∂³ψ/∂u³`.
    pub duuu: f64,
}

impl UDerivatives {
    /// Derivative of order `p ∈ 0..=3`.
    pub fn order(&self, p: usize) -> f64 {
        match p {
            0 => self.psi,
            1 => self.du,
            2 => self.duu,
            3 => self.duuu,
            _ => panic!("u-derivatives are available up to order 3"),
        }
    }
}

/// `ψ` and its `u`-derivatives at `(0, −v)`, from a prebuilt bracket.
pub fn u_derivatives_with(bracket: &Bracket, v: f64) -> Result<UDerivatives> {
    let c = bracket.c;
    let z = bracket.z_of_v(-v);
    let [p0, p1, p2] = bracket.u_coefficients(z);
    check_domain(p0, 0.0, -v, c)?;
    // Ratios keep the hyperbolic growth of P_k out of every power.
    let r1 = p1 / p0;
    let r2 = 2.0 * p2 / p0;
    let lu = -0.5 - 0.5 * r1;
    let luu = -0.5 * (r2 - r1 * r1);
    let luuu = -0.5 * (-3.0 * r1 * r2 + 2.0 * r1 * r1 * r1);
    let psi = (0.5 * c).exp() / p0.sqrt();
    Ok(UDerivatives {
        psi,
        du: psi * lu,
        duu: psi * (luu + lu * lu),
        duuu: psi * (luuu + 3.0 * lu * luu + lu * lu * lu),
    })
}

/// `∂ψ(u, −v)/∂u` at `u = 0`.
pub fn mgf_du0(case: DeterministicCase, v: f64, c: f64) -> Result<f64> {
    Ok(u_derivatives_with(&Bracket::for_case(case, c), v)?.du)
}

/// `d/dv [ψ(0, −v)]`.
pub fn mgf_dv0(case: DeterministicCase, v: f64, c: f64) -> Result<f64> {
    mgf_dv0_with(&Bracket::for_case(case, c), v)
}

/// `d/dv [ψ(0, −v)]` from a prebuilt bracket.
pub fn mgf_dv0_with(bracket: &Bracket, v: f64) -> Result<f64> {
    let z = bracket.z_of_v(-v);
    let p0 = bracket.coeffs[0].eval(z);
    check_domain(p0, 0.0, -v, bracket.c)?;
    let dp0 = bracket.first[0].eval(z);
    // dz/dv = −2 and d(P₀^{−1/2}) = −½ P₀^{−3/2} dP₀.
    Ok((0.5 * bracket.c).exp() / p0.sqrt() * dp0 / p0)
}

/// Complex-step derivative `∂ψ(u, −v)/∂u` at `u = 0`, an independent check
/// of [`mgf_du0`].
pub fn mgf_du0_complex_step(case: DeterministicCase, v: f64, c: f64) -> f64 {
    const H: f64 = 1e-20;
    let bracket = Bracket::for_case(case, c);
    let u = Complex64::new(0.0, H);
    let z = Complex64::new(bracket.z_of_v(-v), 0.0);
    let b = bracket.eval(u, z).b;
    let psi = (0.5 * (Complex64::new(c, 0.0) - u)).exp() / b.sqrt();
    psi.im / H
}

/// Complex-step derivative `d/dv [ψ(0, −v)]`, an independent check of
/// [`mgf_dv0`] that exercises the complex kernels.
pub fn mgf_dv0_complex_step(case: DeterministicCase, v: f64, c: f64) -> f64 {
    const H: f64 = 1e-20;
    let bracket = Bracket::for_case(case, c);
    let vv = Complex64::new(-v, -H);
    let z = bracket.z_of_v(vv);
    let b = bracket.eval(Complex64::new(0.0, 0.0), z).b;
    let psi = Complex64::new((0.5 * c).exp(), 0.0) / b.sqrt();
    psi.im / H
}

/// Means and variances of the limiting pair `(U, V)` at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UvMoments {
    /// `E U`.
    pub mean_u: f64,
    /// `Var U`.
    pub var_u: f64,
    /// `E V`.
    pub mean_v: f64,
    /// `Var V`.
    pub var_v: f64,
}

/// Moments of `(U, V)` from derivatives of `ψ` at the origin.
pub fn uv_moments(case: DeterministicCase, c: f64) -> UvMoments {
    let bracket = Bracket::for_case(case, c);
    let z = -c * c;
    let [p0, p1, p2] = bracket.u_coefficients(z);
    let [d0, _, _] = bracket.u_coefficients_dz(z);
    let [dd0, _, _] = bracket.u_coefficients_dzz(z);
    let r1 = p1 / p0;
    let r2 = 2.0 * p2 / p0;
    let lu = -0.5 - 0.5 * r1;
    let luu = -0.5 * (r2 - r1 * r1);
    let k = (0.5 * c).exp();
    // ψ(0, v) = k P₀(2v − c²)^{−1/2}; ψ(0, 0) = 1.
    let psi_z = -0.5 * k * p0.powf(-1.5) * d0;
    let psi_zz = k * (0.75 * p0.powf(-2.5) * d0 * d0 - 0.5 * p0.powf(-1.5) * dd0);
    let mean_v = 2.0 * psi_z;
    let second_v = 4.0 * psi_zz;
    UvMoments {
        mean_u: lu,
        var_u: luu,
        mean_v,
        var_v: second_v - mean_v * mean_v,
    }
}

/// Settings for [`imhof_cdf`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImhofSpec {
    /// Target absolute error of the CDF.
    pub tol: f64,
    /// Hard upper limit of the θ range.
    pub theta_cap: f64,
    /// Maximum number of panel-width halvings.
    pub max_halvings: usize,
}

impl Default for ImhofSpec {
    fn default() -> Self {
        ImhofSpec {
            tol: 1e-7,
            theta_cap: 1e7,
            max_halvings: 6,
        }
    }
}

/// Integral of `Im(e^{irθ} D(2iθ)^{−1/2})/θ` on `[0, Θ]`, with Θ chosen by
/// the envelope rule, using panels scaled by `scale`.
fn imhof_integral(bracket: &Bracket, x: f64, r: f64, spec: &ImhofSpec, scale: f64) -> Result<f64> {
    let w_first = scale * 0.25 / (1.0 + x.abs());
    let w_max = scale * (PI / r).min(1.0);
    let nodes = gl_nodes();
    let mut phase_prev = 0.0_f64;
    let mut lo = 0.0;
    let mut width = w_first;
    let mut total = 0.0;
    loop {
        let hi = lo + width;
        let half = 0.5 * width;
        let mid = lo + half;
        let mut sum = 0.0;
        for &(t, w) in nodes.iter().take(GL_ORDER) {
            let theta = mid + half * t;
            let d = det_with(bracket, Complex64::new(0.0, 2.0 * theta), x);
            let mut phase = d.arg();
            // Continuous branch of arg D along increasing θ.
            let turns = ((phase_prev - phase) / (2.0 * PI)).round();
            phase += turns * 2.0 * PI;
            phase_prev = phase;
            let modulus = d.norm().powf(-0.5);
            let angle = r * theta - 0.5 * phase;
            sum += w * modulus * angle.sin() / theta;
        }
        total += half * sum;
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite Imhof integrand".into()));
        }
        lo = hi;
        width = (width * 1.5).min(w_max);
        if lo >= 1.0 {
            let d = det_with(bracket, Complex64::new(0.0, 2.0 * lo), x);
            let envelope = d.norm().powf(-0.5) / lo;
            if envelope < 0.1 * spec.tol {
                return Ok(total);
            }
        }
        if lo > spec.theta_cap {
            return Err(Error::Quadrature(format!(
                "Imhof envelope still above {:e} at θ = {}",
                0.1 * spec.tol,
                spec.theta_cap
            )));
        }
    }
}

/// Limiting CDF `P(T(ρ̂ − 1) ≤ x)` for determinant `j` at local parameter
/// `c`, with long-run variance ratio `r` (`r = 1` for i.i.d. errors).
///
/// The inversion integral is evaluated on panels in θ that grow
/// geometrically from the origin up to a width tied to the period of
/// `e^{irθ}`. The range is truncated once the envelope `|D(2iθ)|^{−1/2}/θ`
/// drops below `tol/10`, and panel widths are halved until two successive
/// results agree to `tol`.
pub fn imhof_cdf(j: usize, x: f64, c: f64, r: f64, spec: &ImhofSpec) -> Result<f64> {
    if !(r > 0.0) || !x.is_finite() || !c.is_finite() {
        return Err(Error::InvalidInput(format!("imhof_cdf needs r > 0 and finite x, c (r={r})")));
    }
    let bracket = Bracket::new(j, c)?;
    let mut scale = 1.0;
    let mut prev = imhof_integral(&bracket, x, r, spec, scale)?;
    for _ in 0..spec.max_halvings {
        scale *= 0.5;
        let next = imhof_integral(&bracket, x, r, spec, scale)?;
        if (next - prev).abs() < spec.tol {
            return Ok((0.5 + next / PI).clamp(0.0, 1.0));
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "Imhof integral did not settle to {:e} after {} halvings",
        spec.tol, spec.max_halvings
    )))
}
