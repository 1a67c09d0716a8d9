//! Koornwinder's integral representation of normalised Jacobi polynomials,
//! used as an independent oracle for the recurrence.
//!
//! For beta >= 0 and alpha > beta:
//!
//! p_n(cos 2θ) = 2Γ(α+1) / (√π Γ(α-β) Γ(β+1/2))
//!     ∫_0^1 ∫_0^π Re(cos²θ - r² sin²θ + i r cos φ sin 2θ)^n
//!     (1-r²)^{α-β-1} r^{2β+1} sin^{2β} φ dφ dr.
//!
//! For beta = -1/2 the one-dimensional limit is
//!
//! p_n(cos 2θ) = 2Γ(α+1) / (√π Γ(α+1/2))
//!     ∫_0^1 Re(cos²θ - x² sin²θ + 2 i x cos θ sin θ)^n (1-x²)^{α-1/2} dx.
//!
//! In both cases the integrand is a polynomial in the substituted variables
//! (u = r², x = cos φ), so Gauss–Jacobi rules with enough nodes are exact.

use super::quadrature::gauss_jacobi_rule;
use crate::error::{Error, Result};
use crate::scalar::ln_gamma;

/// Re((a + i b)^n).
fn re_pow(a: f64, b: f64, n: usize) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..n {
        let r = re * a - im * b;
        im = re * b + im * a;
        re = r;
    }
    re
}

/// p_n^{(alpha,beta)}(cos 2 theta) from the integral representation.
pub fn koornwinder_p_n(alpha: f64, beta: f64, n: usize, theta: f64) -> Result<f64> {
    if n > 20 {
        return Err(Error::InvalidParams("the integral oracle is limited to n <= 20".into()));
    }
    let (s, c) = theta.sin_cos();
    let m = n + 2;
    if beta == -0.5 {
        if !(alpha > -0.5) {
            return Err(Error::InvalidParams("the one-dimensional form needs alpha > -1/2".into()));
        }
        // Even integrand: half of the symmetric integral over (-1, 1).
        let rule = gauss_jacobi_rule::<f64>(alpha - 0.5, alpha - 0.5, m)?;
        let integral = 0.5 * rule.integrate(|x| re_pow(c * c - x * x * s * s, 2.0 * x * c * s, n));
        let k = 2.0 * (ln_gamma(alpha + 1.0) - ln_gamma(alpha + 0.5)).exp() / std::f64::consts::PI.sqrt();
        return Ok(k * integral);
    }
    if beta < 0.0 {
        return Err(Error::InvalidParams("the two-dimensional form needs beta >= 0".into()));
    }
    if !(alpha > beta) {
        return Err(Error::InvalidParams("the two-dimensional form needs alpha > beta".into()));
    }
    // u = r^2 on (0,1): weight (1-u)^{α-β-1} u^β du / 2, mapped to y in (-1,1).
    let ru = gauss_jacobi_rule::<f64>(alpha - beta - 1.0, beta, m)?;
    // x = cos φ: weight (1-x²)^{β-1/2} dx.
    let rx = gauss_jacobi_rule::<f64>(beta - 0.5, beta - 0.5, m)?;
    let scale_u = 0.5 * 2f64.powf(-(alpha - beta - 1.0) - beta - 1.0);
    let mut total = 0.0;
    for (&y, &wu) in ru.nodes.iter().zip(&ru.weights) {
        let u = (1.0 + y) / 2.0;
        let r = u.sqrt();
        let a = c * c - u * s * s;
        let inner: f64 = rx
            .nodes
            .iter()
            .zip(&rx.weights)
            .map(|(&x, &wx)| wx * re_pow(a, r * x * 2.0 * s * c, n))
            .sum();
        total += wu * inner;
    }
    let k = 2.0 * (ln_gamma(alpha + 1.0) - ln_gamma(alpha - beta) - ln_gamma(beta + 0.5)).exp()
        / std::f64::consts::PI.sqrt();
    Ok(k * scale_u * total)
}
