//! Jacobi polynomials, eigenspace dimensions, Gauss–Jacobi rules and the
//! Koornwinder integral representation.

mod koornwinder;
mod quadrature;

use num_traits::{FromPrimitive, Num};

use crate::scalar::Real;
use crate::spaces::Space;

pub use koornwinder::koornwinder_p_n;
pub use quadrature::{gauss_jacobi_rule, QuadratureRule};

/// Parameters (alpha, beta) of the weight (1-t)^alpha (1+t)^beta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        JacobiParams { alpha, beta }
    }

    pub fn of(space: &Space) -> Self {
        JacobiParams { alpha: space.alpha, beta: space.beta }
    }
}

/// Values P_0(t), ..., P_N(t) by the three-term recurrence.
pub fn eval_all<T: Real>(alpha: T, beta: T, nmax: usize, t: T) -> Vec<T> {
    let mut out = Vec::with_capacity(nmax + 1);
    eval_into(alpha, beta, nmax, t, &mut out);
    out
}

/// As [`eval_all`], writing into a reusable buffer.
pub fn eval_into<T: Real>(alpha: T, beta: T, nmax: usize, t: T, out: &mut Vec<T>) {
    out.clear();
    let one = T::one();
    let two = T::lit(2.0);
    out.push(one);
    if nmax == 0 {
        return;
    }
    let ab = alpha + beta;
    out.push(((ab + two) * t + (alpha - beta)) / two);
    let a2b2 = alpha * alpha - beta * beta;
    for n in 1..nmax {
        let nf = T::from_usize(n).expect("index");
        let c = two * nf + ab;
        let a1 = two * (nf + one) * (nf + ab + one) * c;
        let a2 = (c + one) * a2b2;
        let a3 = c * (c + one) * (c + two);
        let a4 = two * (nf + alpha) * (nf + beta) * (c + two);
        let next = ((a2 + a3 * t) * out[n] - a4 * out[n - 1]) / a1;
        out.push(next);
    }
}

/// P_n(1) = (alpha+1)_n / n! for n = 0..=N.
pub fn values_at_one<T: Real>(alpha: T, nmax: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut v = T::one();
    out.push(v);
    for n in 1..=nmax {
        let nf = T::from_usize(n).expect("index");
        v = v * (alpha + nf) / nf;
        out.push(v);
    }
    out
}

/// Normalised values p_n(t) = P_n(t) / P_n(1).
pub fn eval_normalized<T: Real>(alpha: T, beta: T, nmax: usize, t: T) -> Vec<T> {
    let p = eval_all(alpha, beta, nmax, t);
    let one = values_at_one(alpha, nmax);
    p.into_iter().zip(one).map(|(a, b)| a / b).collect()
}

/// Dimension m_n of the n-th eigenspace,
/// m_n = (2n+a+b+1) (a+b+2)_{n-1} (a+1)_n / (n! (b+1)_n) for n >= 1, m_0 = 1.
///
/// Written without the division by a+b+1 so that it stays finite when
/// a+b+1 = 0. Generic over any numeric type, so exact rationals can be used.
pub fn dim_m_n_generic<T: Num + Clone + FromPrimitive>(alpha: T, beta: T, n: usize) -> T {
    if n == 0 {
        return T::one();
    }
    let c = |k: usize| T::from_usize(k).expect("index");
    let two = c(2);
    let mut v = two.clone() * c(n) + alpha.clone() + beta.clone() + T::one();
    // (a+b+2)_{n-1}
    for k in 0..n - 1 {
        v = v * (alpha.clone() + beta.clone() + two.clone() + c(k));
    }
    for k in 0..n {
        v = v * (alpha.clone() + T::one() + c(k));
        v = v / (c(k + 1) * (beta.clone() + T::one() + c(k)));
    }
    v
}

/// m_n in the working precision.
pub fn dim_m_n<T: Real>(alpha: T, beta: T, n: usize) -> T {
    dim_m_n_generic(alpha, beta, n)
}

/// Eigenvalue lambda_n = 4 kappa^2 n (n + alpha + beta + 1) of the Laplacian.
pub fn lambda_n(space: &Space, n: usize) -> f64 {
    let nf = n as f64;
    4.0 * space.kappa * space.kappa * nf * (nf + space.alpha + space.beta + 1.0)
}

/// Squared norm h_n = int P_n^2 (1-t)^a (1+t)^b dt (unnormalised weight).
pub fn norm_sq<T: Real>(alpha: T, beta: T, n: usize) -> T {
    use crate::scalar::ln_gamma;
    let one = T::one();
    let nf = T::from_usize(n).expect("index");
    let ab = alpha + beta;
    let ln = (ab + one) * T::LN_2() + ln_gamma(nf + alpha + one) + ln_gamma(nf + beta + one)
        - ln_gamma(nf + ab + one)
        - ln_gamma(nf + one);
    ln.exp() / (T::lit(2.0) * nf + ab + one)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values() {
        let p = eval_all(0.0f64, 0.0, 2, 0.0);
        assert!((p[2] + 0.5).abs() < 1e-15);
        let p = eval_all(2.0f64, 0.0, 1, 1.0);
        assert_eq!(p[1], 3.0);
    }

    #[test]
    fn explicit_sum_oracle() {
        // p_n(cos 2 theta) = sum_m (-1)^{n-m} C(n,m) (b+m+1)...(b+n) / ((a+1)...(a+n-m))
        //                    * ((1+t)/2)^m ((1-t)/2)^{n-m}
        let (a, b, n, t) = (1.0f64, 0.5f64, 5usize, 0.3f64);
        let mut sum = 0.0;
        for m in 0..=n {
            let binom = (0..m).fold(1.0, |acc, k| acc * (n - k) as f64 / (k + 1) as f64);
            let num: f64 = ((m + 1)..=n).map(|k| b + k as f64).product();
            let den: f64 = (1..=(n - m)).map(|k| a + k as f64).product();
            let sign = if (n - m) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * num / den * ((1.0 + t) / 2.0).powi(m as i32) * ((1.0 - t) / 2.0).powi((n - m) as i32);
        }
        let p = eval_all(a, b, n, t)[n];
        let pn1 = values_at_one(a, n)[n];
        assert!((p - sum * pn1).abs() < 1e-12, "{p} vs {}", sum * pn1);
    }

    #[test]
    fn normalized_symmetry() {
        let v = eval_normalized(3.0f64, 1.0, 2, -1.0)[2];
        // P_n^{(a,b)}(-t) = (-1)^n P_n^{(b,a)}(t)
        let sym = eval_all(1.0f64, 3.0, 2, 1.0)[2] / values_at_one(3.0f64, 2)[2];
        assert!((v - sym).abs() < 1e-12);
        let ones = eval_normalized(2.5f64, -0.5, 10, 1.0);
        assert!(ones.iter().all(|x| (x - 1.0).abs() < 1e-13));
    }

    #[test]
    fn dimensions_and_eigenvalues() {
        assert!((dim_m_n(0.0f64, 0.0, 1) - 3.0).abs() < 1e-14);
        assert!((dim_m_n(1.0f64, 0.0, 1) - 8.0).abs() < 1e-14);
        assert_eq!(dim_m_n(0.7f64, 0.1, 0), 1.0);
        // S^1 (alpha = beta = -1/2): m_n = 2 for n >= 1.
        assert!((dim_m_n(-0.5f64, -0.5, 3) - 2.0).abs() < 1e-14);
        let s2 = Space::parse("S2").unwrap();
        let cp2 = Space::parse("CP2").unwrap();
        assert_eq!(lambda_n(&s2, 0), 0.0);
        assert!((lambda_n(&s2, 1) - 2.0).abs() < 1e-15);
        assert!((lambda_n(&cp2, 1) - 12.0).abs() < 1e-15);
    }
}
