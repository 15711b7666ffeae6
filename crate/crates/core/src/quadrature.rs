//! Composite Gauss–Legendre rules on finite and semi-infinite ranges.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Points per Gauss–Legendre panel.
pub const GL_ORDER: usize = 16;

/// Largest upper limit the semi-infinite integrator will extend to.
const X_MAX_CAP: f64 = 600.0;
/// Maximum number of panel doublings before giving up.
const MAX_DOUBLINGS: usize = 6;

/// Settings for every integral over `x ∈ [0, ∞)` in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Target absolute error.
    pub abs_tol: f64,
    /// Initial truncation point in `x = √(2v)` units.
    pub x_max: f64,
    /// Initial number of Gauss–Legendre panels on `[0, x_max]`.
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            x_max: 60.0,
            panels: 256,
        }
    }
}

impl QuadratureSpec {
    /// Check the field invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.x_max > 0.0) || self.panels < 8 {
            return Err(Error::InvalidInput(format!(
                "quadrature spec needs abs_tol > 0, x_max > 0, panels >= 8 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Nodes and weights of the rule on `[−1, 1]`, sorted by node.
pub fn gl_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero order"));
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// One Gauss–Legendre panel on `[a, b]`.
pub fn gl_panel<F>(f: &mut F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for &(x, w) in gl_nodes() {
        sum += w * f(mid + half * x)?;
    }
    Ok(half * sum)
}

/// Composite rule with `panels` equal panels on `[a, b]`.
pub fn composite<F>(f: &mut F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        sum += gl_panel(f, a + k as f64 * h, a + (k + 1) as f64 * h)?;
    }
    Ok(sum)
}

/// Integral on `[a, b]`, doubling the panel count until two successive
/// results differ by less than `tol`.
pub fn refine<F>(f: &mut F, a: f64, b: f64, panels: usize, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut n = panels.max(1);
    let mut prev = composite(f, a, b, n)?;
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let next = composite(f, a, b, n)?;
        if !next.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")));
        }
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "no agreement to {tol:e} on [{a}, {b}] after {MAX_DOUBLINGS} doublings"
    )))
}

/// Integral on `[0, ∞)` of a function that decays at least exponentially.
///
/// The range `[0, x_max]` is refined by panel doubling. Further blocks
/// `[X, 2X]` are added while their contribution exceeds the tolerance, up to
/// an upper limit of 600.
pub fn semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    let mut total = refine(&mut f, 0.0, spec.x_max, spec.panels, spec.abs_tol)?;
    let density = spec.panels as f64 / spec.x_max;
    let mut lo = spec.x_max;
    loop {
        let hi = (2.0 * lo).min(X_MAX_CAP);
        if hi <= lo {
            return Err(Error::Quadrature(format!(
                "integrand tail still above {:e} at x = {X_MAX_CAP}",
                spec.abs_tol
            )));
        }
        let panels = ((hi - lo) * density).ceil() as usize;
        let block = refine(&mut f, lo, hi, panels, spec.abs_tol)?;
        total += block;
        if block.abs() < 0.1 * spec.abs_tol {
            return Ok(total);
        }
        lo = hi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_polynomial_integrals() {
        let spec = QuadratureSpec::default();
        let v = semi_infinite(|x| Ok((-x).exp()), &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let g = semi_infinite(|x| Ok(x * x * (-x * x / 2.0).exp()), &spec).unwrap();
        assert!((g - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        let p = composite(&mut |x: f64| Ok(x.powi(7)), 0.0, 2.0, 1).unwrap();
        assert!((p - 32.0).abs() < 1e-12);
    }

    #[test]
    fn slow_tail_is_extended() {
        let spec = QuadratureSpec::default();
        let v = semi_infinite(|x| Ok((-x / 12.0).exp()), &spec).unwrap();
        assert!((v - 12.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = QuadratureSpec { panels: 2, ..Default::default() };
        assert!(semi_infinite(|_| Ok(0.0), &spec).is_err());
    }
}
