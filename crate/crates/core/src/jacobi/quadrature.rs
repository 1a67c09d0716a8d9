//! Gauss–Jacobi quadrature: nodes from the eigenvalues of the Jacobi matrix,
//! refined by Newton's method in the working precision; weights from the
//! derivative formula, normalised to the total mass of the weight.

use crate::error::{Error, Result};
use crate::scalar::{ln_gamma, Real};

/// An m-point Gauss rule for (1-t)^alpha (1+t)^beta on (-1, 1).
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Sum of w_i f(x_i).
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// Total mass 2^{a+b+1} Gamma(a+1) Gamma(b+1) / Gamma(a+b+2).
pub fn weight_mass<T: Real>(alpha: T, beta: T) -> T {
    let one = T::one();
    ((alpha + beta + one) * T::LN_2() + ln_gamma(alpha + one) + ln_gamma(beta + one)
        - ln_gamma(alpha + beta + T::lit(2.0)))
    .exp()
}

/// Eigenvalues of the symmetric tridiagonal matrix (diag `d`, off-diagonal
/// `e[1..]`) by the implicit QL method; returned in increasing order.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 1 {
        return Ok(d);
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence("tridiagonal eigenvalue iteration".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// P_m(x) and P_{m-1}(x) by the recurrence.
fn pm_pair<T: Real>(alpha: T, beta: T, m: usize, x: T) -> (T, T) {
    let v = super::eval_all(alpha, beta, m, x);
    (v[m], v[m - 1])
}

/// Derivative of P_m from P_m and P_{m-1}:
/// (2m+a+b)(1-x^2) P_m' = m[(a-b) - (2m+a+b)x] P_m + 2(m+a)(m+b) P_{m-1}.
fn pm_derivative<T: Real>(alpha: T, beta: T, m: usize, x: T, pm: T, pm1: T) -> T {
    let mf = T::from_usize(m).expect("order");
    let two = T::lit(2.0);
    let c = two * mf + alpha + beta;
    let num = mf * ((alpha - beta) - c * x) * pm + two * (mf + alpha) * (mf + beta) * pm1;
    num / (c * (T::one() - x * x))
}

/// m-point Gauss–Jacobi rule with nodes and weights in precision `T`.
#[allow(clippy::needless_range_loop)]
pub fn gauss_jacobi_rule<T: Real>(alpha: f64, beta: f64, m: usize) -> Result<QuadratureRule<T>> {
    if m == 0 {
        return Err(Error::InvalidParams("quadrature order must be at least 1".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidParams(format!("Jacobi weight needs alpha, beta > -1 (got {alpha}, {beta})")));
    }
    // Monic Jacobi matrix in double precision for starting values.
    let (a, b) = (alpha, beta);
    let ab = a + b;
    let mut diag = Vec::with_capacity(m);
    let mut off = vec![0.0; m];
    for k in 0..m {
        let kf = k as f64;
        let d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        diag.push(d);
        if k >= 1 {
            let e2 = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab)
                    / ((2.0 * kf + ab) * (2.0 * kf + ab) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
            };
            off[k] = e2.sqrt();
        }
    }
    let guesses = tridiagonal_eigenvalues(diag, off)?;
    let at = T::lit(alpha);
    let bt = T::lit(beta);
    let mut nodes = Vec::with_capacity(m);
    let mut raw = Vec::with_capacity(m);
    let tol = T::epsilon() * T::lit(4.0);
    for g in guesses {
        let mut x = T::lit(g.clamp(-1.0 + 1e-300, 1.0 - 1e-16));
        let mut deriv = T::one();
        let mut converged = false;
        for _ in 0..12 {
            let (pm, pm1) = pm_pair(at, bt, m, x);
            deriv = pm_derivative(at, bt, m, x, pm, pm1);
            let dx = pm / deriv;
            x = x - dx;
            if dx.abs() <= tol * (T::one() + x.abs()) {
                converged = true;
                let (pm, pm1) = pm_pair(at, bt, m, x);
                deriv = pm_derivative(at, bt, m, x, pm, pm1);
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(format!("Newton refinement of Gauss-Jacobi node near {g}")));
        }
        nodes.push(x);
        raw.push(T::one() / ((T::one() - x * x) * deriv * deriv));
    }
    for w in nodes.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Convergence("Gauss-Jacobi nodes are not strictly increasing".into()));
        }
    }
    let total = raw.iter().fold(T::zero(), |acc, &w| acc + w);
    let mass = weight_mass(at, bt);
    let weights = raw.into_iter().map(|w| w / total * mass).collect();
    Ok(QuadratureRule { alpha, beta, nodes, weights })
}
