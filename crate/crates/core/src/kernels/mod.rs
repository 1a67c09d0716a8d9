//! Zonal kernels F(t) with singularity metadata at t = 1.

mod parse;

pub use parse::GRAMMAR as KERNEL_GRAMMAR;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi;
use crate::scalar::Real;
use crate::spaces::Space;

/// Metric used by distance-based kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Geodesic,
    Chordal,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::Geodesic => "geodesic",
            Metric::Chordal => "chordal",
        }
    }
}

/// The point at which a zonal kernel is evaluated, carrying every
/// representation of the distance so that kernels can pick the accurate one.
///
/// With phi = kappa * theta: `chi = sin phi`, `c = cos phi`,
/// `omt = 1 - t = 2 chi^2`, `opt = 1 + t = 2 c^2`.
#[derive(Clone, Copy, Debug)]
pub struct ZonalArg<T> {
    pub theta: T,
    pub chi: T,
    pub c: T,
    pub t: T,
    pub omt: T,
    pub opt: T,
}

impl<T: Real> ZonalArg<T> {
    fn assemble(kappa: f64, phi: T, chi: T, c: T) -> Self {
        let two = T::lit(2.0);
        let omt = two * chi * chi;
        let opt = two * c * c;
        let t = if omt < T::one() { T::one() - omt } else { opt - T::one() };
        ZonalArg { theta: phi / T::lit(kappa), chi, c, t, omt, opt }
    }

    /// From phi = kappa theta measured from the near end (t close to 1).
    pub fn from_phi_left(kappa: f64, phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        Self::assemble(kappa, phi, s, c)
    }

    /// From the distance `delta` of phi to the far end pi/2 (t close to -1).
    pub fn from_phi_right(kappa: f64, delta: T) -> Self {
        let (s, c) = delta.sin_cos();
        Self::assemble(kappa, T::FRAC_PI_2() - delta, c, s)
    }

    /// From chi = sin(kappa theta), accurate for chi up to about 1/sqrt 2.
    pub fn from_chi(kappa: f64, chi: T) -> Self {
        let c = ((T::one() - chi) * (T::one() + chi)).sqrt();
        Self::assemble(kappa, chi.atan2(c), chi, c)
    }

    /// From c = cos(kappa theta), accurate for c up to about 1/sqrt 2.
    pub fn from_cos(kappa: f64, c: T) -> Self {
        let chi = ((T::one() - c) * (T::one() + c)).sqrt();
        Self::assemble(kappa, chi.atan2(c), chi, c)
    }

    /// From the zonal variable t.
    pub fn from_t(kappa: f64, t: T) -> Self {
        let half = T::lit(0.5);
        let chi = ((T::one() - t) * half).sqrt();
        let c = ((T::one() + t) * half).sqrt();
        let mut a = Self::assemble(kappa, chi.atan2(c), chi, c);
        a.t = t;
        a
    }

    /// From 1 - t, for points close to t = 1.
    pub fn from_one_minus_t(kappa: f64, omt: T) -> Self {
        let half = T::lit(0.5);
        let chi = (omt * half).sqrt();
        let c = ((T::lit(2.0) - omt) * half).sqrt();
        let mut a = Self::assemble(kappa, chi.atan2(c), chi, c);
        a.omt = omt;
        a
    }
}

/// A user-supplied double-precision kernel with declared singularity data.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub sigma: f64,
    pub log_flag: bool,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("sigma", &self.sigma)
            .field("log_flag", &self.log_flag)
            .finish()
    }
}

/// Zonal kernel as a function of t = cos(2 kappa theta).
#[derive(Clone, Debug)]
pub enum Kernel {
    /// sgn(s) d^{-s} with s != 0.
    Riesz { metric: Metric, s: f64 },
    /// -log d.
    Log { metric: Metric },
    /// exp(-lambda d^2).
    Gaussian { metric: Metric, lambda: f64 },
    /// ((1+t)/2)^n = cos^{2n}(kappa theta).
    CosPower { n: usize },
    /// P_n^{(a,b)}(t); `None` uses the parameters of the space.
    Jacobi { n: usize, params: Option<(f64, f64)> },
    Product(Box<Kernel>, Box<Kernel>),
    LinComb(Vec<(f64, Kernel)>),
    Custom(CustomKernel),
}

/// Parity information used to detect exactly vanishing coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Parity {
    None,
    /// F(t) = odd function + constant: even coefficients n >= 2 vanish when alpha = beta.
    OddPlusConst,
}

impl Kernel {
    /// Riesz kernel; s = 0 gives the logarithmic kernel.
    pub fn riesz(metric: Metric, s: f64) -> Kernel {
        if s == 0.0 {
            Kernel::Log { metric }
        } else {
            Kernel::Riesz { metric, s }
        }
    }

    pub fn riesz_geodesic(s: f64) -> Kernel {
        Kernel::riesz(Metric::Geodesic, s)
    }

    pub fn riesz_chordal(s: f64) -> Kernel {
        Kernel::riesz(Metric::Chordal, s)
    }

    pub fn gaussian(metric: Metric, lambda: f64) -> Result<Kernel> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!("Gaussian kernel needs lambda > 0, got {lambda}")));
        }
        Ok(Kernel::Gaussian { metric, lambda })
    }

    pub fn cos_power(n: usize) -> Kernel {
        Kernel::CosPower { n }
    }

    pub fn jacobi_unit(n: usize, params: Option<(f64, f64)>) -> Kernel {
        Kernel::Jacobi { n, params }
    }

    pub fn product(a: Kernel, b: Kernel) -> Kernel {
        Kernel::Product(Box::new(a), Box::new(b))
    }

    pub fn linear_combination(terms: Vec<(f64, Kernel)>) -> Kernel {
        Kernel::LinComb(terms)
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: f64,
        log_flag: bool,
    ) -> Kernel {
        Kernel::Custom(CustomKernel { name: name.into(), f: Arc::new(f), sigma, log_flag })
    }

    /// Parses a kernel descriptor such as `riesz-geodesic:s=0.5` or
    /// `lincomb(2*cospow:n=0+3*jacobi:n=1)`.
    pub fn parse(text: &str) -> Result<Kernel> {
        parse::parse_kernel(text)
    }

    /// Algebraic singularity exponent: (1-t)^sigma F(t) is continuous at t = 1.
    pub fn sigma(&self) -> f64 {
        match self {
            Kernel::Riesz { s, .. } => s.max(0.0) / 2.0,
            Kernel::Product(a, b) => a.sigma() + b.sigma(),
            Kernel::LinComb(terms) => terms.iter().map(|(_, k)| k.sigma()).fold(0.0, f64::max),
            Kernel::Custom(c) => c.sigma,
            _ => 0.0,
        }
    }

    /// Whether the kernel has a logarithmic singularity at t = 1.
    pub fn log_flag(&self) -> bool {
        match self {
            Kernel::Log { .. } => true,
            Kernel::Product(a, b) => a.log_flag() || b.log_flag(),
            Kernel::LinComb(terms) => terms.iter().any(|(_, k)| k.log_flag()),
            Kernel::Custom(c) => c.log_flag,
            _ => false,
        }
    }

    /// Whether F is unbounded at t = 1.
    pub fn is_singular(&self) -> bool {
        self.sigma() > 0.0 || self.log_flag()
    }

    /// Checks integrability against mu_{alpha,beta}: sigma < alpha + 1.
    pub fn check_integrable(&self, space: &Space) -> Result<()> {
        let sigma = self.sigma();
        if sigma >= space.alpha + 1.0 {
            return Err(Error::NonIntegrable { sigma, limit: space.alpha + 1.0 });
        }
        Ok(())
    }

    /// Kernel value F(t).
    pub fn eval<T: Real>(&self, space: &Space, x: &ZonalArg<T>) -> T {
        match self {
            Kernel::Riesz { metric, s } => {
                let d = distance(*metric, x);
                let st = T::lit(*s);
                if *s > 0.0 {
                    d.powf(-st)
                } else {
                    -d.powf(-st)
                }
            }
            Kernel::Log { metric } => -distance(*metric, x).ln(),
            Kernel::Gaussian { metric, lambda } => {
                let d = distance(*metric, x);
                (-T::lit(*lambda) * d * d).exp()
            }
            Kernel::CosPower { n } => (x.c * x.c).powi(*n as i32),
            Kernel::Jacobi { n, params } => {
                let (a, b) = params.unwrap_or((space.alpha, space.beta));
                jacobi::eval_all(T::lit(a), T::lit(b), *n, x.t)[*n]
            }
            Kernel::Product(a, b) => a.eval(space, x) * b.eval(space, x),
            Kernel::LinComb(terms) => terms
                .iter()
                .fold(T::zero(), |acc, (c, k)| acc + T::lit(*c) * k.eval(space, x)),
            Kernel::Custom(c) => T::lit((c.f)(x.t.to_f64_lossy())),
        }
    }

    /// Regularised value (1-t)^sigma F(t), continuous up to t = 1 for
    /// algebraic singularities.
    pub fn eval_regularized<T: Real>(&self, space: &Space, x: &ZonalArg<T>) -> T {
        match self {
            Kernel::Riesz { metric, s } if *s > 0.0 => {
                let st = T::lit(*s);
                let sqrt2 = T::SQRT_2();
                match metric {
                    Metric::Chordal => sqrt2.powf(st),
                    Metric::Geodesic => {
                        let ratio = if x.theta > T::zero() {
                            sqrt2 * x.chi / x.theta
                        } else {
                            sqrt2 * T::lit(space.kappa)
                        };
                        ratio.powf(st)
                    }
                }
            }
            Kernel::Product(a, b) => a.eval_regularized(space, x) * b.eval_regularized(space, x),
            Kernel::LinComb(terms) => {
                let sigma = self.sigma();
                terms.iter().fold(T::zero(), |acc, (c, k)| {
                    let gap = sigma - k.sigma();
                    let v = k.eval_regularized(space, x);
                    let v = if gap > 0.0 { v * x.omt.powf(T::lit(gap)) } else { v };
                    acc + T::lit(*c) * v
                })
            }
            Kernel::Custom(c) => {
                let v = (c.f)(x.t.to_f64_lossy());
                if c.sigma > 0.0 {
                    T::lit(x.omt.to_f64_lossy().powf(c.sigma) * v)
                } else {
                    T::lit(v)
                }
            }
            _ => self.eval(space, x),
        }
    }

    /// Exponent e of the endpoint factorisation F(t) = (1-t)^{-e} G(t) with G
    /// smooth up to t = 1. Unlike [`Kernel::sigma`] it is negative for Riesz
    /// kernels with s < 0, whose values vanish like a fractional power.
    pub fn endpoint_exponent(&self) -> f64 {
        match self {
            Kernel::Riesz { s, .. } => s / 2.0,
            Kernel::Product(a, b) => a.endpoint_exponent() + b.endpoint_exponent(),
            Kernel::LinComb(terms) if !terms.is_empty() => {
                terms.iter().map(|(_, k)| k.endpoint_exponent()).fold(f64::NEG_INFINITY, f64::max)
            }
            Kernel::Custom(c) => c.sigma,
            _ => 0.0,
        }
    }

    /// The smooth factor G = (1-t)^e F for e = [`Kernel::endpoint_exponent`].
    pub fn eval_factored<T: Real>(&self, space: &Space, x: &ZonalArg<T>) -> T {
        match self {
            Kernel::Riesz { metric, s } => {
                let st = T::lit(*s);
                let ratio = match metric {
                    Metric::Chordal => T::SQRT_2(),
                    Metric::Geodesic if x.theta > T::zero() => T::SQRT_2() * x.chi / x.theta,
                    Metric::Geodesic => T::SQRT_2() * T::lit(space.kappa),
                };
                let v = ratio.powf(st);
                if *s > 0.0 {
                    v
                } else {
                    -v
                }
            }
            Kernel::Product(a, b) => a.eval_factored(space, x) * b.eval_factored(space, x),
            Kernel::LinComb(terms) => {
                let e = self.endpoint_exponent();
                terms.iter().fold(T::zero(), |acc, (c, k)| {
                    let gap = e - k.endpoint_exponent();
                    let v = k.eval_factored(space, x);
                    let v = if gap != 0.0 { v * x.omt.powf(T::lit(gap)) } else { v };
                    acc + T::lit(*c) * v
                })
            }
            Kernel::Custom(c) => {
                let v = (c.f)(x.t.to_f64_lossy());
                T::lit(x.omt.to_f64_lossy().powf(c.sigma) * v)
            }
            _ => self.eval(space, x),
        }
    }

    /// Double-precision convenience: F at the zonal variable t.
    pub fn eval_t(&self, space: &Space, t: f64) -> f64 {
        self.eval(space, &ZonalArg::from_t(space.kappa, t))
    }

    /// Degree if the kernel is a polynomial in t.
    pub fn poly_degree(&self) -> Option<usize> {
        match self {
            Kernel::CosPower { n } | Kernel::Jacobi { n, .. } => Some(*n),
            Kernel::Riesz { metric: Metric::Chordal, s } if *s < 0.0 => {
                let m = -s / 2.0;
                if m.fract() == 0.0 && m <= 1e6 {
                    Some(m as usize)
                } else {
                    None
                }
            }
            Kernel::Product(a, b) => Some(a.poly_degree()? + b.poly_degree()?),
            Kernel::LinComb(terms) => {
                let mut d = 0;
                for (_, k) in terms {
                    d = d.max(k.poly_degree()?);
                }
                Some(d)
            }
            _ => None,
        }
    }

    fn parity(&self, space: &Space) -> Parity {
        match self {
            Kernel::Riesz { metric: Metric::Geodesic, s } if *s == -1.0 && space.alpha == space.beta => {
                Parity::OddPlusConst
            }
            _ => Parity::None,
        }
    }

    /// Whether the n-th coefficient on `space` vanishes for structural
    /// reasons (polynomial degree, orthogonality, parity).
    pub fn exact_zero(&self, space: &Space, n: usize) -> bool {
        if let Some(d) = self.poly_degree() {
            if n > d {
                return true;
            }
        }
        match self {
            Kernel::Jacobi { n: k, params } => {
                let same = match params {
                    None => true,
                    Some((a, b)) => *a == space.alpha && *b == space.beta,
                };
                same && n != *k
            }
            Kernel::LinComb(terms) => !terms.is_empty() && terms.iter().all(|(_, k)| k.exact_zero(space, n)),
            _ => self.parity(space) == Parity::OddPlusConst && n >= 2 && n.is_multiple_of(2),
        }
    }

    /// Canonical descriptor (parseable by [`Kernel::parse`] except for custom kernels).
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

fn distance<T: Real>(metric: Metric, x: &ZonalArg<T>) -> T {
    match metric {
        Metric::Geodesic => x.theta,
        Metric::Chordal => x.chi,
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Riesz { metric, s } => write!(f, "riesz-{}:s={}", metric.tag(), s),
            Kernel::Log { metric } => write!(f, "log-{}", metric.tag()),
            Kernel::Gaussian { metric, lambda } => write!(f, "gauss-{}:lambda={}", metric.tag(), lambda),
            Kernel::CosPower { n } => write!(f, "cospow:n={n}"),
            Kernel::Jacobi { n, params: None } => write!(f, "jacobi:n={n}"),
            Kernel::Jacobi { n, params: Some((a, b)) } => write!(f, "jacobi:n={n},alpha={a},beta={b}"),
            Kernel::Product(a, b) => write!(f, "product({a},{b})"),
            Kernel::LinComb(terms) => {
                f.write_str("lincomb(")?;
                for (i, (c, k)) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{c}*{k}")?;
                }
                f.write_str(")")
            }
            Kernel::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}
