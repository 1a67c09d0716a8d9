//! Energies E_F(mu) = int int F(t(x, y)) d mu(x) d mu(y) for the normalised
//! invariant measure, for finitely supported signed measures, and for the
//! perturbed densities 1 + eps P_n(t(x, z)), with Monte Carlo checks of the
//! Funk–Hecke relation.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi;
use crate::kernels::{Kernel, ZonalArg};
use crate::spaces::{stream_rng, Point, Space};
use crate::transform::certify_coefficients;

/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Samples per random stream; fixed so results do not depend on threads.
const BATCH: usize = 8192;

/// How an energy value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyMethod {
    Quadrature,
    Mc,
    ClosedForm,
}

/// Serializable energy value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: f64,
    /// Standard error of a Monte Carlo estimate.
    pub stderr: Option<f64>,
    /// Deterministic error bound of a quadrature or closed-form value.
    pub error: Option<f64>,
    pub method: EnergyMethod,
}

/// Energy of the invariant measure from two independent computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformEnergy {
    /// Coefficient of degree zero (certified transform).
    pub energy: f64,
    pub error: f64,
    /// Direct quadrature of F against mu on t in (-1, 1).
    pub quadrature: f64,
    pub quadrature_error: f64,
}

impl UniformEnergy {
    /// Whether the two computations agree within their combined error.
    pub fn consistent(&self) -> bool {
        (self.energy - self.quadrature).abs() <= self.error + self.quadrature_error
    }
}

/// Tanh-sinh quadrature of F(t) (1-t)^alpha (1+t)^beta / Z over (-1, 1), in
/// double precision, with endpoint distances formed without cancellation.
fn uniform_quadrature(space: &Space, kernel: &Kernel) -> (f64, f64) {
    let log_kernel = kernel.log_flag();
    let e = if log_kernel { 0.0 } else { kernel.endpoint_exponent() };
    let (a, b) = (space.alpha, space.beta);
    let z: f64 = space.measure_z();
    let integrand = |u: f64| -> f64 {
        let q = (-std::f64::consts::PI * u.abs().sinh()).exp();
        let near = 2.0 * q / (1.0 + q);
        let far = 2.0 - near;
        let (omt, opt) = if u >= 0.0 { (near, far) } else { (far, near) };
        if omt <= 0.0 || opt <= 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 {
            ZonalArg::from_one_minus_t(space.kappa, omt)
        } else {
            ZonalArg::from_cos(space.kappa, (opt / 2.0).sqrt())
        };
        let w = std::f64::consts::FRAC_PI_2 * u.cosh() * omt * opt;
        let f = if log_kernel {
            kernel.eval(space, &x) * omt.powf(a)
        } else {
            kernel.eval_factored(space, &x) * omt.powf(a - e)
        };
        f * opt.powf(b) * w / z
    };
    let umax = 6.5;
    let mut prev = f64::NAN;
    let mut value = 0.0;
    let mut abs = 0.0;
    for level in 0..=10 {
        let h = 0.5f64.powi(level);
        let k = (umax / h) as i64;
        let (mut s, mut sa) = (0.0, 0.0);
        for i in -k..=k {
            if level > 0 && i % 2 == 0 {
                continue;
            }
            let v = integrand(i as f64 * h);
            if v.is_finite() {
                s += v;
                sa += v.abs();
            }
        }
        let (v, va) = if level == 0 { (h * s, h * sa) } else { (0.5 * value + h * s, 0.5 * abs + h * sa) };
        prev = value;
        value = v;
        abs = va;
        if level >= 4 && (value - prev).abs() <= 1e-15 * abs {
            break;
        }
    }
    // Mass inside the last node at each end: the integrand behaves like
    // delta^gamma with delta = 2 exp(-pi sinh umax).
    let delta = 2.0 * (-std::f64::consts::PI * umax.sinh()).exp();
    let tail_r = if a - e + 1.0 > 0.0 { delta.powf(a - e + 1.0) / (a - e + 1.0) } else { f64::INFINITY };
    let tail_l = delta.powf(b + 1.0) / (b + 1.0);
    let err = (value - prev).abs() + 64.0 * f64::EPSILON * abs + (tail_r + tail_l) * abs.max(1.0);
    (value, err)
}

/// Energy of the normalised invariant measure, computed as the degree-zero
/// coefficient and by direct quadrature of F d mu.
pub fn energy_uniform(space: &Space, kernel: &Kernel, digits: u32) -> Result<UniformEnergy> {
    kernel.check_integrable(space)?;
    let report = certify_coefficients(space, kernel, 0, digits)?;
    let (quadrature, quadrature_error) = uniform_quadrature(space, kernel);
    Ok(UniformEnergy {
        energy: report.entries[0].value_f64(),
        error: report.entries[0].error,
        quadrature,
        quadrature_error,
    })
}

/// Finitely supported signed measure sum_i w_i delta_{x_i}.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub space: Space,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure; `None` gives uniform weights 1/N.
    pub fn new(space: Space, points: Vec<Point>, weights: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParams("a discrete measure needs at least one point".into()));
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::InvalidParams(format!("{} weights for {} points", w.len(), points.len())));
                }
                if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
                    return Err(Error::InvalidParams(format!("weight {bad} is not finite")));
                }
                w
            }
            None => vec![1.0 / points.len() as f64; points.len()],
        };
        Ok(DiscreteMeasure { space, points, weights })
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Whether the weights sum to one within 1e-12.
    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }
}

/// sum_{i,j} w_i w_j F(t(x_i, x_j)), with or without the diagonal i = j.
///
/// Kernels that are unbounded at t = 1 only admit the off-diagonal sum.
pub fn energy_discrete(measure: &DiscreteMeasure, kernel: &Kernel, include_diagonal: bool) -> Result<f64> {
    if include_diagonal && kernel.is_singular() {
        return Err(Error::InvalidParams(format!(
            "kernel {kernel} is singular at t = 1; only the off-diagonal energy is defined"
        )));
    }
    let space = &measure.space;
    let k = measure.points.len();
    let mut total = 0.0;
    let mut comp = 0.0;
    for i in 0..k {
        for j in 0..k {
            let v = if i == j {
                if !include_diagonal {
                    continue;
                }
                kernel.eval_t(space, 1.0)
            } else {
                let t = space.distance_t(&measure.points[i], &measure.points[j])?;
                kernel.eval_t(space, t)
            };
            // Compensated summation.
            let y = measure.weights[i] * measure.weights[j] * v - comp;
            let s = total + y;
            comp = (s - total) - y;
            total = s;
        }
    }
    Ok(total)
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

/// Monte Carlo mean of `f` over `samples` draws, in batches with one random
/// stream each, reduced in batch order.
fn mc_mean<F>(samples: usize, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidParams("Monte Carlo needs at least two samples".into()));
    }
    let batches = samples.div_ceil(BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(f(&mut rng)?);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = m.m2 / (m.count - 1.0);
    Ok(McEstimate { mean: m.mean, stderr: (var / m.count).sqrt(), samples })
}

/// Parameters of the density 1 + eps P_n(t(x, z)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    pub n: usize,
    pub epsilon: f64,
}

impl PerturbSpec {
    /// Parses `n=<int>,eps=<float>`.
    pub fn parse(text: &str) -> Result<PerturbSpec> {
        let err = |token: &str| Error::Parse { pos: 0, token: token.into(), expected: "n=<int>,eps=<float>".into() };
        let (mut n, mut eps) = (None, None);
        for part in text.split(',') {
            match part.split_once('=') {
                Some(("n", v)) => n = Some(v.trim().parse::<usize>().map_err(|_| err(part))?),
                Some(("eps", v)) => eps = Some(v.trim().parse::<f64>().map_err(|_| err(part))?),
                _ => return Err(err(part)),
            }
        }
        match (n, eps) {
            (Some(n), Some(epsilon)) => Ok(PerturbSpec { n, epsilon }),
            _ => Err(err(text)),
        }
    }

    /// Checks n >= 1, eps >= 0 and 1 + eps P_n >= 0 on a grid of t.
    pub fn validate(&self, space: &Space) -> Result<()> {
        if self.n == 0 || !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParams(format!("perturbation needs n >= 1 and eps >= 0, got {self:?}")));
        }
        let grid = 2000;
        for i in 0..=grid {
            let t = -1.0 + 2.0 * i as f64 / grid as f64;
            let p = jacobi::eval_all(space.alpha, space.beta, self.n, t)[self.n];
            if 1.0 + self.epsilon * p < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "eps = {} makes the density 1 + eps P_{}(t) negative at t = {t}",
                    self.epsilon, self.n
                )));
            }
        }
        Ok(())
    }
}

/// Energy of the perturbed measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedEnergy {
    /// E_F(sigma) + eps^2 P_n(1)^3 / m_n^2 F^(n).
    pub closed_form: f64,
    pub closed_form_error: f64,
    /// E_F(sigma) = F^(0).
    pub base_energy: f64,
    pub mc: Option<McEstimate>,
}

/// Energy of d mu_z = (1 + eps P_n(t(x, z))) d sigma(x). The closed form
/// comes from certified coefficients; with `samples > 0` a Monte Carlo
/// estimate over pairs (x, y) drawn from sigma is added.
pub fn energy_perturbed(
    space: &Space,
    kernel: &Kernel,
    spec: PerturbSpec,
    digits: u32,
    samples: usize,
    seed: u64,
) -> Result<PerturbedEnergy> {
    spec.validate(space)?;
    let report = certify_coefficients(space, kernel, spec.n, digits)?;
    let pn1 = jacobi::values_at_one(space.alpha, spec.n)[spec.n];
    let mn = jacobi::dim_m_n(space.alpha, space.beta, spec.n);
    let factor = spec.epsilon * spec.epsilon * pn1 * pn1 * pn1 / (mn * mn);
    let (c0, cn) = (&report.entries[0], &report.entries[spec.n]);
    let closed_form = c0.value_f64() + factor * cn.value_f64();
    let closed_form_error = c0.error + factor * cn.error;
    let mc = if samples > 0 {
        let z = space.base_point()?;
        let (a, b, n, eps) = (space.alpha, space.beta, spec.n, spec.epsilon);
        Some(mc_mean(samples, seed, |rng| {
            let x = space.sample_point(rng)?;
            let y = space.sample_point(rng)?;
            let px = jacobi::eval_all(a, b, n, space.distance_t(&x, &z)?)[n];
            let py = jacobi::eval_all(a, b, n, space.distance_t(&y, &z)?)[n];
            let f = kernel.eval_t(space, space.distance_t(&x, &y)?);
            Ok(f * (1.0 + eps * px) * (1.0 + eps * py))
        })?)
    } else {
        None
    };
    Ok(PerturbedEnergy { closed_form, closed_form_error, base_energy: c0.value_f64(), mc })
}

/// Monte Carlo check of int P_n(t(x, z)) P_n(t(y, z)) d sigma(z) =
/// (P_n(1) / m_n) P_n(t(x, y)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunkHecke {
    pub lhs: McEstimate,
    pub rhs: f64,
}

impl FunkHecke {
    pub fn agrees(&self, k: f64) -> bool {
        self.lhs.agrees_with(self.rhs, k)
    }
}

/// Both sides of the Funk–Hecke relation for points `x`, `y`.
pub fn funk_hecke_mc(space: &Space, n: usize, x: &Point, y: &Point, samples: usize, seed: u64) -> Result<FunkHecke> {
    if n > 12 {
        return Err(Error::InvalidParams(format!("Funk-Hecke check supports n <= 12, got {n}")));
    }
    if !space.has_point_model() {
        return Err(Error::Unsupported(format!("no point model for {}", space.name())));
    }
    let (a, b) = (space.alpha, space.beta);
    let pn1 = jacobi::values_at_one(a, n)[n];
    let rhs = pn1 / jacobi::dim_m_n(a, b, n) * jacobi::eval_all(a, b, n, space.distance_t(x, y)?)[n];
    let lhs = mc_mean(samples, seed, |rng| {
        let z = space.sample_point(rng)?;
        let px = jacobi::eval_all(a, b, n, space.distance_t(x, &z)?)[n];
        let py = jacobi::eval_all(a, b, n, space.distance_t(y, &z)?)[n];
        Ok(px * py)
    })?;
    Ok(FunkHecke { lhs, rhs })
}
