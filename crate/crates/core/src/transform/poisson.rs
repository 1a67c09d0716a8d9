//! Gauss hypergeometric function on [0, 1) and the Poisson kernel of the
//! Jacobi expansion in its series and closed forms.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spaces::Space;

/// Iteration cap for the hypergeometric and Poisson series.
const MAX_TERMS: usize = 2_000_000;

/// Arguments of 2F1(a, b; c; z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyp2F1Args {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Sum of the hypergeometric series, stopping when the remaining terms are
/// below the working precision (or the series terminates).
fn series<T: Real>(a: T, b: T, c: T, z: T) -> Result<T> {
    let mut term = T::one();
    let mut sum = T::one();
    let eps = T::epsilon();
    for k in 0..MAX_TERMS {
        let kf = T::from_usize(k).expect("index");
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + T::one())) * z;
        if term == T::zero() {
            return Ok(sum);
        }
        sum = sum + term;
        // Past the largest term the ratio tends to z, so the tail is bounded
        // by |term| z / (1 - z) once the ratio is below one.
        let ratio = ((a + kf + T::one()) * (b + kf + T::one()) / ((c + kf + T::one()) * (kf + T::lit(2.0))) * z).abs();
        if ratio < T::one() && term.abs() * ratio / (T::one() - ratio) <= eps * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Convergence(format!("hypergeometric series did not converge in {MAX_TERMS} terms")))
}

/// 2F1(a, b; c; z) for z in [0, 1).
///
/// For c - a - b < 0 and z > 1/2 the Euler transformation
/// 2F1(a, b; c; z) = (1 - z)^{c-a-b} 2F1(c-a, c-b; c; z) is applied first;
/// the transformed series has positive parameter excess and its terms decay
/// faster. Accuracy degrades as z approaches 1 because the number of terms
/// grows like 1 / (1 - z).
pub fn hyp2f1<T: Real>(args: Hyp2F1Args) -> Result<T> {
    hyp2f1_at(args.a, args.b, args.c, T::lit(args.z))
}

fn hyp2f1_at<T: Real>(a: f64, b: f64, c: f64, z: T) -> Result<T> {
    if !(z >= T::zero() && z < T::one()) {
        return Err(Error::Range(format!("2F1 needs z in [0, 1), got {}", z.to_f64_lossy())));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::InvalidParams(format!("2F1 is undefined for c = {c}")));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    let (at, bt, ct) = (T::lit(a), T::lit(b), T::lit(c));
    let excess = c - a - b;
    if excess < 0.0 && z > T::lit(0.5) {
        let f = series(ct - at, ct - bt, ct, z)?;
        return Ok((T::one() - z).powf(T::lit(excess)) * f);
    }
    series(at, bt, ct, z)
}

/// Poisson kernel through its closed form,
/// (1-r) / (1+r)^{a+b+2} 2F1((a+b+2)/2, (a+b+3)/2; b+1; 2r(1+t)/(1+r)^2).
pub fn poisson_closed<T: Real>(space: &Space, r: f64, theta: f64) -> Result<T> {
    check_r(r)?;
    let (a, b) = (space.alpha, space.beta);
    let t = T::lit(space.t_from_theta(theta)?);
    let (one, rt) = (T::one(), T::lit(r));
    let z = T::lit(2.0) * rt * (one + t) / ((one + rt) * (one + rt));
    let f = hyp2f1_at((a + b + 2.0) / 2.0, (a + b + 3.0) / 2.0, b + 1.0, z)?;
    Ok((one - rt) / (one + rt).powf(T::lit(a + b + 2.0)) * f)
}

/// Poisson kernel through its series sum_n (m_n / P_n(1)) r^n P_n(t), where
/// m_n / P_n(1) = (2n+a+b+1) (a+b+2)_{n-1} / (b+1)_n.
///
/// Returns the sum and the number of terms used. The terms alternate in sign
/// away from t = 1 and grow like n^{a+b+1} r^n, so for r near 1 and large a + b
/// double precision loses several digits; use `Qd` there.
pub fn poisson_series<T: Real>(space: &Space, r: f64, theta: f64) -> Result<(T, usize)> {
    check_r(r)?;
    let t = T::lit(space.t_from_theta(theta)?);
    let (a, b) = (T::lit(space.alpha), T::lit(space.beta));
    let (one, two) = (T::one(), T::lit(2.0));
    let rt = T::lit(r);
    let mut sum = one;
    if r == 0.0 {
        return Ok((sum, 1));
    }
    // Running pieces: ratio = (a+b+2)_{n-1} / (b+1)_n, rn = r^n, P_{n-1}, P_n.
    let mut ratio = one / (b + one);
    let mut rn = rt;
    let (mut p_prev, mut p) = (one, ((a + b + two) * t + (a - b)) / two);
    let tail_factor = rt / (one - rt);
    let mut small = 0;
    for n in 1..MAX_TERMS {
        let nf = T::from_usize(n).expect("index");
        let coef = (two * nf + a + b + one) * ratio;
        let term = coef * rn * p;
        sum = sum + term;
        // Envelope of the terms: coef * r^n * P_n(1) with |P_n| <= P_n(1)
        // for a >= b >= -1/2 up to polynomial factors; stop after several
        // consecutive terms whose envelope tail is negligible.
        if (coef * rn).abs() * tail_factor * (nf + one).powf(a.max(b).max(T::zero())) <= T::epsilon() * sum.abs() {
            small += 1;
            if small >= 4 {
                return Ok((sum, n + 1));
            }
        } else {
            small = 0;
        }
        // Advance to n + 1.
        ratio = ratio * (a + b + one + nf) / (b + one + nf);
        rn = rn * rt;
        let c = two * nf + a + b;
        let a1 = two * (nf + one) * (nf + a + b + one) * c;
        let a2 = (c + one) * (a * a - b * b);
        let a3 = c * (c + one) * (c + two);
        let a4 = two * (nf + a) * (nf + b) * (c + two);
        let next = ((a2 + a3 * t) * p - a4 * p_prev) / a1;
        p_prev = p;
        p = next;
    }
    Err(Error::Convergence("Poisson series did not converge".into()))
}

/// Poisson kernel P_r at geodesic distance `theta`, from the closed form.
pub fn poisson_kernel(space: &Space, r: f64, theta: f64) -> Result<f64> {
    poisson_closed::<f64>(space, r, theta)
}

fn check_r(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Range(format!("the Poisson kernel needs 0 <= r < 1, got {r}")));
    }
    Ok(())
}
