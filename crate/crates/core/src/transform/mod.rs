//! Jacobi coefficients of zonal kernels with certified signs, series
//! synthesis, and the Poisson kernel.
//!
//! The coefficient of degree n is
//! F^(n) = m_n / P_n(1)^2 * int F(t) P_n(t) d mu(t),
//! computed by two independent quadratures (double-exponential in the angle,
//! and Gauss–Jacobi with the endpoint singularity in the weight).

mod de;
mod gj;
mod poisson;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi;
use crate::kernels::Kernel;
use crate::scalar::{Qd, Real};
use crate::spaces::Space;

pub use poisson::{hyp2f1, poisson_closed, poisson_kernel, poisson_series, Hyp2F1Args};

/// Default highest degree.
pub const DEFAULT_NMAX: usize = 32;
/// Default number of decimal digits targeted by certification.
pub const DEFAULT_DIGITS: u32 = 50;
/// Deepest double-exponential level.
pub const DEFAULT_MAX_LEVEL: usize = 12;
/// Highest supported precision in decimal digits (quad-double).
pub const PRECISION_CAP: u32 = 62;

/// Quadrature output before sign certification: integrals already scaled by
/// m_n / P_n(1)^2.
#[derive(Clone, Debug)]
pub(crate) struct RawCoefficients<T> {
    pub values: Vec<T>,
    pub errors: Vec<f64>,
    /// DE level reached, or the Gauss–Jacobi node count.
    pub detail: usize,
}

/// Certified sign of a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "undecided")]
    Undecided,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Undecided => "undecided",
        }
    }

    fn of(value: Qd, error: f64) -> Sign {
        let v = value.to_f64_lossy();
        if v > error {
            Sign::Positive
        } else if v < -error {
            Sign::Negative
        } else {
            Sign::Undecided
        }
    }
}

/// Which integrators to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    De,
    Gj,
    Both,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::De => "de",
            Method::Gj => "gj",
            Method::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "de" => Ok(Method::De),
            "gj" => Ok(Method::Gj),
            "both" => Ok(Method::Both),
            _ => Err(Error::Parse { pos: 0, token: s.into(), expected: "de, gj or both".into() }),
        }
    }
}

/// Space summary embedded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceInfo {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub dim: f64,
}

impl SpaceInfo {
    pub fn of(space: &Space) -> Self {
        SpaceInfo { name: space.name(), alpha: space.alpha, beta: space.beta, kappa: space.kappa, dim: space.dim() }
    }
}

/// One coefficient with its error bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub n: usize,
    #[serde(with = "decimal_qd")]
    pub value: Qd,
    #[serde(with = "decimal_f64")]
    pub error: f64,
    pub m_n: f64,
    pub lambda_n: f64,
    pub sign: Sign,
}

impl CoefficientEntry {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64_lossy()
    }

    /// Certified non-negative: the value is at least minus its error bound.
    pub fn nonnegative(&self) -> bool {
        self.value_f64() >= -self.error
    }
}

/// Integration settings actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    /// Deepest double-exponential level reached, if the method ran.
    pub de_level: Option<usize>,
    /// Gauss–Jacobi nodes per half interval in the finer rule, if the method ran.
    pub gj_nodes: Option<usize>,
    /// Arithmetic of the final pass (`f64` or `qd`).
    pub precision: String,
    /// Targeted decimal digits.
    pub digits: u32,
}

/// Coefficients F^(0..=N) of a kernel on a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub space: SpaceInfo,
    pub kernel: String,
    #[serde(rename = "N")]
    pub nmax: usize,
    pub entries: Vec<CoefficientEntry>,
    pub method: Method,
    pub levels: Levels,
    /// Degrees whose sign stayed undecided at the precision cap.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undecided_at_cap: Vec<usize>,
}

impl CoefficientReport {
    pub fn values_f64(&self) -> Vec<f64> {
        self.entries.iter().map(CoefficientEntry::value_f64).collect()
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.entries.iter().map(|e| e.sign).collect()
    }

    pub fn has_undecided(&self) -> bool {
        self.entries.iter().any(|e| e.sign == Sign::Undecided)
    }

    /// Smallest n >= `from` with a certified negative coefficient.
    pub fn first_negative(&self, from: usize) -> Option<usize> {
        self.entries.iter().find(|e| e.n >= from && e.sign == Sign::Negative).map(|e| e.n)
    }
}

mod decimal_qd {
    use super::Qd;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Qd, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_decimal(40))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Qd, D::Error> {
        let text = String::deserialize(d)?;
        Qd::parse_decimal(&text).ok_or_else(|| D::Error::custom(format!("bad decimal '{text}'")))
    }
}

mod decimal_f64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:.6e}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| D::Error::custom(format!("bad decimal '{text}'")))
    }
}

/// Scales raw integrals by m_n / P_n(1)^2.
fn apply_prefactor<T: Real>(space: &Space, raw: &mut RawCoefficients<T>) {
    let (a, b) = (T::lit(space.alpha), T::lit(space.beta));
    let ones = jacobi::values_at_one(a, raw.values.len().saturating_sub(1));
    for (n, (v, e)) in raw.values.iter_mut().zip(raw.errors.iter_mut()).enumerate() {
        let f = jacobi::dim_m_n(a, b, n) / (ones[n] * ones[n]);
        *v = *v * f;
        *e *= f.to_f64_lossy().abs() * (1.0 + 1e-12);
    }
}

fn to_qd<T: Real>(x: T) -> Qd {
    // Peel off leading doubles; exact for f64 and Qd inputs.
    let mut acc = Qd::ZERO;
    let mut rest = x;
    for _ in 0..4 {
        let hi = rest.to_f64_lossy();
        if hi == 0.0 || !hi.is_finite() {
            break;
        }
        acc += Qd::from(hi);
        rest = rest - T::lit(hi);
    }
    acc
}

fn run_de<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, digits: u32, max_level: usize) -> RawCoefficients<T> {
    let mut raw = de::integrate::<T>(space, kernel, nmax, digits, max_level);
    apply_prefactor(space, &mut raw);
    raw
}

fn run_gj<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, m: usize) -> Result<RawCoefficients<T>> {
    let mut raw = gj::integrate::<T>(space, kernel, nmax, m)?;
    apply_prefactor(space, &mut raw);
    Ok(raw)
}

/// Certification options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub nmax: usize,
    pub digits: u32,
    pub method: Method,
    pub max_level: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { nmax: DEFAULT_NMAX, digits: DEFAULT_DIGITS, method: Method::Both, max_level: DEFAULT_MAX_LEVEL }
    }
}

/// Result of one pass at a fixed precision.
struct Pass {
    values: Vec<Qd>,
    errors: Vec<f64>,
    de_level: Option<usize>,
    gj_nodes: Option<usize>,
    method: Method,
}

fn pass<T: Real>(space: &Space, kernel: &Kernel, opts: &CertifyOptions, digits: u32) -> Result<Pass> {
    let use_gj = match opts.method {
        Method::De => false,
        Method::Gj => true,
        Method::Both => !kernel.log_flag(),
    };
    let use_de = opts.method != Method::Gj;
    let de = use_de.then(|| run_de::<T>(space, kernel, opts.nmax, digits, opts.max_level));
    let gj = if use_gj {
        Some(run_gj::<T>(space, kernel, opts.nmax, gj::default_nodes(opts.nmax, digits))?)
    } else {
        None
    };
    let n1 = opts.nmax + 1;
    let (values, errors) = match (&de, &gj) {
        (Some(d), Some(g)) => (0..n1)
            .map(|n| {
                let gap = (d.values[n] - g.values[n]).abs().to_f64_lossy();
                (to_qd(d.values[n]), d.errors[n].max(g.errors[n]) + gap)
            })
            .unzip(),
        (Some(r), None) | (None, Some(r)) => (0..n1).map(|n| (to_qd(r.values[n]), r.errors[n])).unzip(),
        (None, None) => unreachable!("at least one method runs"),
    };
    let method = match (use_de, use_gj) {
        (true, true) => Method::Both,
        (true, false) => Method::De,
        _ => Method::Gj,
    };
    Ok(Pass {
        values,
        errors,
        de_level: de.map(|r| r.detail),
        gj_nodes: gj.map(|r| r.detail),
        method,
    })
}

/// Precision tiers tried in order: double precision when it can meet the
/// target, then quad-double at the target, then quad-double at the cap.
fn tiers(digits: u32) -> Vec<(bool, u32)> {
    let mut t = Vec::new();
    if digits <= f64::DIGITS {
        t.push((false, digits));
        t.push((true, 32));
    } else {
        t.push((true, digits));
    }
    if digits < PRECISION_CAP {
        t.push((true, PRECISION_CAP));
    }
    t
}

/// Computes F^(0..=N) and certifies each sign, escalating precision while
/// some sign is undecided.
pub fn certify_with(space: &Space, kernel: &Kernel, opts: &CertifyOptions) -> Result<CoefficientReport> {
    if opts.digits > PRECISION_CAP {
        return Err(Error::PrecisionCap { requested: opts.digits, cap: PRECISION_CAP });
    }
    kernel.check_integrable(space)?;
    if opts.method == Method::Gj && kernel.log_flag() {
        return Err(Error::Unsupported("the Gauss-Jacobi method does not handle logarithmic kernels".into()));
    }
    let n1 = opts.nmax + 1;
    let zero: Vec<bool> = (0..n1).map(|n| kernel.exact_zero(space, n)).collect();
    let mut entries: Vec<Option<CoefficientEntry>> = vec![None; n1];
    let mut last = None;
    for (extended, digits) in tiers(opts.digits) {
        let p = if extended {
            pass::<Qd>(space, kernel, opts, digits)?
        } else {
            pass::<f64>(space, kernel, opts, digits)?
        };
        for n in 0..n1 {
            if entries[n].as_ref().is_some_and(|e| e.sign != Sign::Undecided) {
                continue;
            }
            let (value, sign) = if zero[n] { (Qd::ZERO, Sign::Zero) } else { (p.values[n], Sign::of(p.values[n], p.errors[n])) };
            entries[n] = Some(CoefficientEntry {
                n,
                value,
                error: p.errors[n],
                m_n: jacobi::dim_m_n(space.alpha, space.beta, n),
                lambda_n: jacobi::lambda_n(space, n),
                sign,
            });
        }
        last = Some((p, if extended { Qd::NAME } else { f64::NAME }, digits));
        if entries.iter().all(|e| e.as_ref().is_some_and(|e| e.sign != Sign::Undecided)) {
            break;
        }
    }
    let (p, precision, digits) = last.expect("at least one tier");
    let entries: Vec<CoefficientEntry> = entries.into_iter().map(|e| e.expect("filled")).collect();
    let undecided_at_cap = entries.iter().filter(|e| e.sign == Sign::Undecided).map(|e| e.n).collect();
    Ok(CoefficientReport {
        space: SpaceInfo::of(space),
        kernel: kernel.descriptor(),
        nmax: opts.nmax,
        entries,
        method: p.method,
        levels: Levels { de_level: p.de_level, gj_nodes: p.gj_nodes, precision: precision.into(), digits },
        undecided_at_cap,
    })
}

/// [`certify_with`] using both methods and the default DE depth.
pub fn certify_coefficients(space: &Space, kernel: &Kernel, nmax: usize, digits: u32) -> Result<CoefficientReport> {
    certify_with(space, kernel, &CertifyOptions { nmax, digits, ..CertifyOptions::default() })
}

fn single_method_report<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, raw: RawCoefficients<T>, method: Method) -> CoefficientReport {
    let entries = (0..=nmax)
        .map(|n| {
            let value = to_qd(raw.values[n]);
            let sign = if kernel.exact_zero(space, n) { Sign::Zero } else { Sign::of(value, raw.errors[n]) };
            CoefficientEntry {
                n,
                value,
                error: raw.errors[n],
                m_n: jacobi::dim_m_n(space.alpha, space.beta, n),
                lambda_n: jacobi::lambda_n(space, n),
                sign,
            }
        })
        .collect();
    let (de_level, gj_nodes) = match method {
        Method::Gj => (None, Some(raw.detail)),
        _ => (Some(raw.detail), None),
    };
    CoefficientReport {
        space: SpaceInfo::of(space),
        kernel: kernel.descriptor(),
        nmax,
        entries,
        method,
        levels: Levels { de_level, gj_nodes, precision: T::NAME.into(), digits: T::DIGITS },
        undecided_at_cap: Vec::new(),
    }
}

/// Coefficients by double-exponential quadrature in the angle, refining up
/// to `max_level` (step 2^-level). Values that are structurally zero keep
/// their computed value but are marked with sign 0.
pub fn coefficients_de<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, max_level: usize) -> Result<CoefficientReport> {
    kernel.check_integrable(space)?;
    let raw = run_de::<T>(space, kernel, nmax, T::DIGITS, max_level);
    Ok(single_method_report(space, kernel, nmax, raw, Method::De))
}

/// Coefficients by Gauss–Jacobi quadrature with `m_nodes` and `2 m_nodes`
/// nodes on each half of the angle range.
pub fn coefficients_gj<T: Real>(space: &Space, kernel: &Kernel, nmax: usize, m_nodes: usize) -> Result<CoefficientReport> {
    kernel.check_integrable(space)?;
    let raw = run_gj::<T>(space, kernel, nmax, m_nodes.max(1))?;
    Ok(single_method_report(space, kernel, nmax, raw, Method::Gj))
}

/// Largest geometric decay rate accepted for an undamped (r = 1) tail bound.
const MAX_TAIL_RATIO: f64 = 0.9;

/// Partial sum of sum_n F^(n) r^n P_n(t) with an estimate of the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Synthesis {
    pub value: f64,
    pub tail: f64,
}

/// Sums the expansion of a report at `t`, damped by r^n.
///
/// For r < 1 the tail is bounded geometrically from the last terms. For r = 1
/// the sum is only returned when the trailing coefficients are zero within
/// their error bounds or shrink fast enough for a ratio-test bound.
pub fn synthesize(report: &CoefficientReport, t: f64, r: f64) -> Result<Synthesis> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Range(format!("damping factor r must lie in [0, 1], got {r}")));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Range(format!("t must lie in [-1, 1], got {t}")));
    }
    let (a, b) = (report.space.alpha, report.space.beta);
    let nmax = report.nmax;
    let p = jacobi::eval_all(a, b, nmax, t);
    let ones = jacobi::values_at_one(a, nmax);
    let mut value = 0.0;
    let mut rn = 1.0;
    let mut envelope = Vec::with_capacity(nmax + 1);
    let mut err_sum = 0.0;
    for e in &report.entries {
        value += e.value_f64() * rn * p[e.n];
        envelope.push(e.value_f64().abs() * rn * ones[e.n]);
        err_sum += e.error * rn * ones[e.n];
        rn *= r;
    }
    let trailing = report.entries.iter().rev().take(4.min(nmax + 1));
    let negligible = trailing.clone().all(|e| e.sign == Sign::Zero || e.value_f64().abs() <= e.error);
    if negligible {
        return Ok(Synthesis { value, tail: err_sum });
    }
    // Geometric decay rate of the envelope over the last few degrees.
    let last = envelope[nmax];
    let k = nmax.min(4);
    let ratio = if k > 0 && envelope[nmax - k] > 0.0 { (last / envelope[nmax - k]).powf(1.0 / k as f64) } else { r };
    if r < 1.0 {
        let q = if ratio < 1.0 { ratio.max(r) } else { r };
        return Ok(Synthesis { value, tail: last * q / (1.0 - q) + err_sum });
    }
    if ratio <= MAX_TAIL_RATIO {
        Ok(Synthesis { value, tail: last * ratio / (1.0 - ratio) + err_sum })
    } else {
        Err(Error::DivergentTail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Float;

    fn sp(s: &str) -> Space {
        Space::parse(s).unwrap()
    }

    #[test]
    fn constant_kernel() {
        for name in ["S2", "CP2", "RP3"] {
            let r = coefficients_de::<f64>(&sp(name), &Kernel::cos_power(0), 6, 10).unwrap();
            assert!((r.entries[0].value_f64() - 1.0).abs() < 1e-14);
            assert!(r.entries[1..].iter().all(|e| e.value_f64().abs() < 1e-14 && e.sign == Sign::Zero));
        }
    }

    #[test]
    fn chordal_oracle_f64() {
        let s2 = sp("S2");
        let k = Kernel::riesz_chordal(1.0);
        let de = coefficients_de::<f64>(&s2, &k, 20, 12).unwrap();
        let gj = coefficients_gj::<f64>(&s2, &k, 20, 40).unwrap();
        for n in 0..=20 {
            assert!((de.entries[n].value_f64() - 2.0).abs() < 1e-12, "de n={n}: {}", de.entries[n].value_f64());
            assert!((gj.entries[n].value_f64() - 2.0).abs() < 1e-12, "gj n={n}: {}", gj.entries[n].value_f64());
        }
    }

    #[test]
    fn certification_escalates_and_signs() {
        let rp4 = sp("RP4");
        let r = certify_coefficients(&rp4, &Kernel::riesz_geodesic(0.0), 10, 30).unwrap();
        assert_eq!(r.entries[8].sign, Sign::Negative);
        assert_eq!(r.first_negative(1), Some(8));
        assert!(r.entries[1..8].iter().all(|e| e.sign == Sign::Positive));
    }

    #[test]
    fn precision_cap() {
        let e = certify_coefficients(&sp("S2"), &Kernel::cos_power(1), 4, 80).unwrap_err();
        assert!(matches!(e, Error::PrecisionCap { requested: 80, cap: 62 }));
    }

    #[test]
    fn report_json_round_trip() {
        let r = certify_coefficients(&sp("CP2"), &Kernel::riesz_chordal(1.0), 4, 20).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"N\":4"));
        let back: CoefficientReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.entries.len(), 5);
        for (a, b) in back.entries.iter().zip(&r.entries) {
            assert!((a.value - b.value).abs().hi() < 1e-38 * b.value.abs().hi().max(1e-30));
            assert_eq!(a.sign, b.sign);
        }
    }

    #[test]
    fn synthesis() {
        let s2 = sp("S2");
        let p2 = certify_coefficients(&s2, &Kernel::jacobi_unit(2, None), 8, 15).unwrap();
        let v = synthesize(&p2, 0.5, 1.0).unwrap();
        assert!((v.value - (-0.125)).abs() < 1e-13, "{v:?}");
        let k = certify_coefficients(&s2, &Kernel::riesz_chordal(1.0), 32, 15).unwrap();
        let v = synthesize(&k, 0.0, 0.0).unwrap();
        assert!((v.value - 2.0).abs() < 1e-12);
        assert!(synthesize(&k, 0.3, 1.0).is_err());
    }
}
