//! Gauss–Jacobi evaluation of the coefficient integrals with the endpoint
//! behaviour absorbed into the quadrature weight.
//!
//! The angle range is split at phi = pi/4. On the near half the variable is
//! chi = sin phi, and the factor chi^{2 alpha + 1 - 2e} (e the endpoint
//! exponent of the kernel) becomes the Jacobi weight. On the far half the
//! variable is c = cos phi with weight c^{2 beta + 1}. What remains on each
//! half is analytic on the closed interval, so the rules converge
//! geometrically even when the kernel is singular at t = 1.

use super::RawCoefficients;
use crate::error::{Error, Result};
use crate::jacobi::{self, gauss_jacobi_rule};
use crate::kernels::{Kernel, ZonalArg};
use crate::scalar::Real;
use crate::spaces::Space;

/// Node count used for a requested precision and degree.
pub(crate) fn default_nodes(nmax: usize, digits: u32) -> usize {
    nmax + (1.2 * digits as f64).ceil() as usize + 8
}

fn integrate_once<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, m: usize) -> Result<(Vec<T>, Vec<T>)> {
    let n1 = nmax + 1;
    let e = kernel.endpoint_exponent();
    let gamma_a = 2.0 * space.alpha + 1.0 - 2.0 * e;
    let gamma_b = 2.0 * space.beta + 1.0;
    let (at, bt) = (T::lit(space.alpha), T::lit(space.beta));
    let c_nu = space.nu_constant::<T>();
    let two = T::lit(2.0);
    // Both halves map (-1, 1) onto (0, 1/sqrt 2) by y = (1 + x) / (2 sqrt 2).
    let map = T::SQRT_2() / T::lit(4.0);
    let mut acc = vec![T::zero(); n1];
    let mut abs = vec![T::zero(); n1];
    let mut buf = Vec::with_capacity(n1);

    let rule_a = gauss_jacobi_rule::<T>(0.0, gamma_a, m)?;
    let scale_a = c_nu * two.powf(T::lit(-1.5 * (gamma_a + 1.0))) * two.powf(T::lit(-e));
    let pow_c = T::lit(space.beta);
    for (&x, &w) in rule_a.nodes.iter().zip(&rule_a.weights) {
        let z = ZonalArg::from_chi(space.kappa, (T::one() + x) * map);
        let c2 = z.c * z.c;
        let g = kernel.eval_factored(space, &z) * c2.powf(pow_c);
        add(at, bt, nmax, &z, w * g * scale_a, &mut buf, &mut acc, &mut abs);
    }

    let rule_b = gauss_jacobi_rule::<T>(0.0, gamma_b, m)?;
    let scale_b = c_nu * two.powf(T::lit(-1.5 * (gamma_b + 1.0)));
    for (&x, &w) in rule_b.nodes.iter().zip(&rule_b.weights) {
        let z = ZonalArg::from_cos(space.kappa, (T::one() + x) * map);
        let s2 = z.chi * z.chi;
        let g = kernel.eval(space, &z) * s2.powf(at);
        add(at, bt, nmax, &z, w * g * scale_b, &mut buf, &mut acc, &mut abs);
    }
    Ok((acc, abs))
}

#[allow(clippy::too_many_arguments)]
fn add<T: Real>(at: T, bt: T, nmax: usize, z: &ZonalArg<T>, w: T, buf: &mut Vec<T>, acc: &mut [T], abs: &mut [T]) {
    jacobi::eval_into(at, bt, nmax, z.t, buf);
    for n in 0..=nmax {
        let v = w * buf[n];
        acc[n] = acc[n] + v;
        abs[n] = abs[n] + v.abs();
    }
}

/// Integrals of F P_n d nu with `m` and `2m` nodes per half; the difference
/// is the error estimate.
pub(crate) fn integrate<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, m: usize) -> Result<RawCoefficients<T>> {
    if kernel.log_flag() {
        return Err(Error::Unsupported(
            "Gauss-Jacobi coefficients need an algebraic endpoint singularity; logarithmic kernels use the DE method"
                .into(),
        ));
    }
    let gamma_a = 2.0 * space.alpha + 1.0 - 2.0 * kernel.endpoint_exponent();
    if gamma_a <= -1.0 {
        return Err(Error::NonIntegrable { sigma: kernel.sigma(), limit: space.alpha + 1.0 });
    }
    let (coarse, _) = integrate_once::<T>(space, kernel, nmax, m)?;
    let (fine, abs) = integrate_once::<T>(space, kernel, nmax, 2 * m)?;
    let eps = T::epsilon().to_f64_lossy();
    let errors = (0..=nmax)
        .map(|n| (fine[n] - coarse[n]).abs().to_f64_lossy() + 64.0 * eps * abs[n].to_f64_lossy())
        .collect();
    Ok(RawCoefficients { values: fine, errors, detail: 2 * m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_orthogonality() {
        for name in ["S2", "RP2", "OP2", "RP3"] {
            let sp = Space::parse(name).unwrap();
            let r = integrate::<f64>(&sp, &Kernel::cos_power(0), 3, 20).unwrap();
            assert!((r.values[0] - 1.0).abs() < 1e-14, "{name}: {}", r.values[0]);
            assert!(r.values[3].abs() < 1e-14);
        }
    }

    #[test]
    fn log_kernels_rejected() {
        let sp = Space::parse("S2").unwrap();
        assert!(integrate::<f64>(&sp, &Kernel::riesz_geodesic(0.0), 3, 20).is_err());
    }
}
