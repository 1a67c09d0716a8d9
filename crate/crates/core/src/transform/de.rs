//! Double-exponential (tanh-sinh) quadrature of the coefficient integrals in
//! the angle phi = kappa theta on (0, pi/2).
//!
//! With the substitution phi = (pi/4)(1 + tanh((pi/2) sinh u)) the distance of
//! a node to the nearer endpoint is `L q / (1 + q)` with q = exp(-pi sinh|u|)
//! and L = pi/2, which is computed directly so that no cancellation occurs
//! near either endpoint. Levels halve the step and reuse all previous nodes.

use rayon::prelude::*;

use super::RawCoefficients;
use crate::jacobi;
use crate::kernels::{Kernel, ZonalArg};
use crate::scalar::Real;
use crate::spaces::Space;

/// Nodes evaluated per parallel task; fixed so that the reduction order, and
/// hence every rounding, is independent of the thread count.
const CHUNK: usize = 32;

/// Coarsest level at which convergence is tested.
const MIN_LEVEL: usize = 4;

struct Integrand<'a, T> {
    space: &'a Space,
    kernel: &'a Kernel,
    nmax: usize,
    alpha: T,
    beta: T,
    c_nu: T,
    exponent: T,
    pow_left: T,
    pow_right: T,
    log_kernel: bool,
}

impl<'a, T: Real> Integrand<'a, T> {
    fn new(space: &'a Space, kernel: &'a Kernel, nmax: usize) -> Self {
        let log_kernel = kernel.log_flag();
        // Logarithmic kernels are evaluated directly; only algebraic
        // behaviour is moved into the chi power.
        let e = if log_kernel { 0.0 } else { kernel.endpoint_exponent() };
        Integrand {
            space,
            kernel,
            nmax,
            alpha: T::lit(space.alpha),
            beta: T::lit(space.beta),
            c_nu: space.nu_constant::<T>(),
            exponent: T::lit(e),
            pow_left: T::lit(2.0 * space.alpha + 1.0 - 2.0 * e),
            pow_right: T::lit(2.0 * space.beta + 1.0),
            log_kernel,
        }
    }

    /// Density-weighted kernel value at `x`, without the polynomial factor.
    fn weight(&self, x: &ZonalArg<T>) -> T {
        let g = if self.log_kernel {
            self.kernel.eval(self.space, x)
        } else {
            self.kernel.eval_factored(self.space, x) * T::lit(2.0).powf(-self.exponent)
        };
        let left = if x.chi > T::zero() { x.chi.powf(self.pow_left) } else { T::zero() };
        let right = if self.pow_right == T::zero() { T::one() } else { x.c.powf(self.pow_right) };
        self.c_nu * g * left * right
    }

    /// Adds `scale * weight * P_n(t)` to `acc[n]` and its modulus to `abs[n]`.
    fn accumulate(&self, x: &ZonalArg<T>, scale: T, buf: &mut Vec<T>, acc: &mut [T], abs: &mut [T]) {
        let w = self.weight(x) * scale;
        if w == T::zero() || !w.is_finite() {
            return;
        }
        jacobi::eval_into(self.alpha, self.beta, self.nmax, x.t, buf);
        for n in 0..=self.nmax {
            let v = w * buf[n];
            acc[n] = acc[n] + v;
            abs[n] = abs[n] + v.abs();
        }
    }
}

/// Cut-off distance to an endpoint where the integrand behaves like
/// delta^gamma: the neglected mass is below 10^{-(digits+8)}.
fn cutoff(gamma: f64, digits: u32) -> f64 {
    let d = 10f64.powf(-(digits as f64 + 8.0) / (gamma + 1.0));
    d.clamp(1e-300, 1e-3)
}

/// Largest |u| whose node lies farther than `delta` from the endpoint.
fn u_limit(delta: f64) -> f64 {
    let l = std::f64::consts::FRAC_PI_2;
    let r = delta / l;
    let q = r / (1.0 - r);
    (-q.ln() / std::f64::consts::PI).asinh()
}

/// Node at u: the zonal argument and the weight d phi / d u.
fn node<T: Real>(kappa: f64, u: f64) -> (ZonalArg<T>, T) {
    let ut = T::lit(u);
    let q = (-T::PI() * ut.abs().sinh()).exp();
    let l = T::FRAC_PI_2();
    let one = T::one();
    let delta = l * q / (one + q);
    let w = l * T::PI() * ut.cosh() * q / ((one + q) * (one + q));
    let x = if u < 0.0 {
        ZonalArg::from_phi_left(kappa, delta)
    } else {
        ZonalArg::from_phi_right(kappa, delta)
    };
    (x, w)
}

fn sum_nodes<T: Real>(f: &Integrand<'_, T>, us: &[f64]) -> (Vec<T>, Vec<T>) {
    let n1 = f.nmax + 1;
    let partial: Vec<(Vec<T>, Vec<T>)> = us
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![T::zero(); n1];
            let mut abs = vec![T::zero(); n1];
            let mut buf = Vec::with_capacity(n1);
            for &u in chunk {
                let (x, w) = node::<T>(f.space.kappa, u);
                f.accumulate(&x, w, &mut buf, &mut acc, &mut abs);
            }
            (acc, abs)
        })
        .collect();
    let mut acc = vec![T::zero(); n1];
    let mut abs = vec![T::zero(); n1];
    for (a, b) in partial {
        for n in 0..n1 {
            acc[n] = acc[n] + a[n];
            abs[n] = abs[n] + b[n];
        }
    }
    (acc, abs)
}

/// Integrals of F P_n d nu for n = 0..=nmax, before the m_n / P_n(1)^2
/// prefactor, with per-entry error estimates.
pub(crate) fn integrate<T: Real>(
    space: &Space,
    kernel: &Kernel,
    nmax: usize,
    digits: u32,
    max_level: usize,
) -> RawCoefficients<T> {
    let f = Integrand::<T>::new(space, kernel, nmax);
    let n1 = nmax + 1;
    let gamma_l = f.pow_left.to_f64_lossy();
    let gamma_r = f.pow_right.to_f64_lossy();
    let (delta_l, delta_r) = (cutoff(gamma_l, digits), cutoff(gamma_r, digits));
    let (ul, ur) = (u_limit(delta_l), u_limit(delta_r));
    let inside = |u: f64| if u < 0.0 { -u <= ul } else { u <= ur };

    let tol = 10f64.powi(-(digits as i32)).max(1e3 * T::epsilon().to_f64_lossy());
    let mut values = vec![T::zero(); n1];
    let mut abs = vec![T::zero(); n1];
    let mut diff = vec![f64::INFINITY; n1];
    let mut level = 0;
    for lv in 0..=max_level {
        let h = (0.5f64).powi(lv as i32);
        let kmax = (ul.max(ur) / h).ceil() as i64;
        let us: Vec<f64> = (-kmax..=kmax)
            .filter(|k| lv == 0 || k % 2 != 0)
            .map(|k| k as f64 * h)
            .filter(|&u| inside(u))
            .collect();
        let (s, a) = sum_nodes(&f, &us);
        let ht = T::lit(h);
        let half = T::lit(0.5);
        let next: Vec<T> = (0..n1)
            .map(|n| if lv == 0 { ht * s[n] } else { half * values[n] + ht * s[n] })
            .collect();
        abs = (0..n1)
            .map(|n| if lv == 0 { ht * a[n] } else { half * abs[n] + ht * a[n] })
            .collect();
        if lv > 0 {
            diff = (0..n1).map(|n| (next[n] - values[n]).abs().to_f64_lossy()).collect();
        }
        values = next;
        level = lv;
        if lv >= MIN_LEVEL && (0..n1).all(|n| diff[n] <= tol * abs[n].to_f64_lossy().max(tol)) {
            break;
        }
    }

    // Mass beyond the cut-offs, from the endpoint behaviour delta^gamma.
    let mut tail = vec![0.0; n1];
    let mut buf = Vec::with_capacity(n1);
    for (x, delta, gamma) in [
        (ZonalArg::from_phi_left(space.kappa, T::lit(delta_l)), delta_l, gamma_l),
        (ZonalArg::from_phi_right(space.kappa, T::lit(delta_r)), delta_r, gamma_r),
    ] {
        let mut acc = vec![T::zero(); n1];
        let mut a = vec![T::zero(); n1];
        f.accumulate(&x, T::lit(delta / (gamma + 1.0)), &mut buf, &mut acc, &mut a);
        for n in 0..n1 {
            tail[n] += a[n].to_f64_lossy();
        }
    }

    let eps = T::epsilon().to_f64_lossy();
    let errors = (0..n1)
        .map(|n| diff[n] + tail[n] + 64.0 * eps * abs[n].to_f64_lossy())
        .collect();
    RawCoefficients { values, errors, detail: level }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass() {
        for name in ["S2", "RP2", "OP2", "RP3"] {
            let sp = Space::parse(name).unwrap();
            let r = integrate::<f64>(&sp, &Kernel::cos_power(0), 2, 15, 10);
            assert!((r.values[0] - 1.0).abs() < 1e-14, "{name}: {}", r.values[0]);
            assert!(r.values[1].abs() < 1e-14);
        }
    }

    #[test]
    fn node_geometry() {
        let (x, w) = node::<f64>(1.0, 0.0);
        assert!((x.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((w - std::f64::consts::PI * std::f64::consts::PI / 8.0).abs() < 1e-15);
        let d = 1e-30;
        let u = u_limit(d);
        let (x, _) = node::<f64>(1.0, -u);
        assert!((x.chi / d - 1.0).abs() < 1e-9);
    }
}
