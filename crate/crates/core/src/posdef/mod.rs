//! Positive definiteness from certified coefficient signs: classification,
//! Riesz exponent scans, the large-dimension check across projective spaces,
//! and the logarithmic-kernel table.
//!
//! A kernel is positive definite when all coefficients are non-negative and
//! conditionally positive definite when all coefficients of degree n >= 1
//! are; strictness corresponds to strictly positive coefficients. Every
//! verdict here only covers the degrees that were computed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi;
use crate::kernels::{Kernel, Metric};
use crate::spaces::{Family, Space};
use crate::transform::{certify_coefficients, CoefficientReport, Sign};

/// Which definiteness notion to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pd,
    Cpd,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "pd" => Ok(Mode::Pd),
            "cpd" => Ok(Mode::Cpd),
            _ => Err(Error::Parse { pos: 0, token: s.into(), expected: "pd or cpd".into() }),
        }
    }
}

/// Outcome of a classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "strictly-PD")]
    StrictlyPd,
    #[serde(rename = "PD-not-strict")]
    PdNotStrict,
    /// Coefficients of degree n >= 1 are strictly positive; positive
    /// definiteness either fails at n = 0 or was not examined.
    #[serde(rename = "strictly-CPD-only")]
    StrictlyCpdOnly,
    #[serde(rename = "CPD-not-strict")]
    CpdNotStrict,
    #[serde(rename = "not-CPD")]
    NotCpd,
    #[serde(rename = "undecided")]
    Undecided,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::StrictlyPd => "strictly-PD",
            Classification::PdNotStrict => "PD-not-strict",
            Classification::StrictlyCpdOnly => "strictly-CPD-only",
            Classification::CpdNotStrict => "CPD-not-strict",
            Classification::NotCpd => "not-CPD",
            Classification::Undecided => "undecided",
        }
    }

    /// Conditionally positive definite up to the checked degree.
    pub fn is_cpd(self) -> bool {
        !matches!(self, Classification::NotCpd | Classification::Undecided)
    }
}

/// Classification with its witness and the finite-degree caveat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdVerdict {
    pub classification: Classification,
    pub mode: Mode,
    /// Degree responsible for the verdict: the first negative, zero or
    /// undecided coefficient, as applicable.
    pub witness: Option<usize>,
    pub n_checked: usize,
    pub caveat: String,
}

/// Maps certified signs to a verdict.
///
/// A certified negative coefficient at some n >= 1 decides not-CPD even if
/// other entries are undecided.
pub fn classify_signs(signs: &[Sign], mode: Mode) -> PdVerdict {
    let nmax = signs.len().saturating_sub(1);
    let verdict = |classification, witness| PdVerdict {
        classification,
        mode,
        witness,
        n_checked: nmax,
        caveat: format!("checked for degrees n <= {nmax} only"),
    };
    let find = |s: Sign| signs.iter().enumerate().skip(1).find(|(_, &x)| x == s).map(|(n, _)| n);
    if let Some(n) = find(Sign::Negative) {
        return verdict(Classification::NotCpd, Some(n));
    }
    if let Some(n) = find(Sign::Undecided) {
        return verdict(Classification::Undecided, Some(n));
    }
    let zero = find(Sign::Zero);
    let head = signs.first().copied().unwrap_or(Sign::Positive);
    match mode {
        Mode::Cpd => match zero {
            None => verdict(Classification::StrictlyCpdOnly, None),
            Some(n) => verdict(Classification::CpdNotStrict, Some(n)),
        },
        Mode::Pd => match (head, zero) {
            (Sign::Undecided, _) => verdict(Classification::Undecided, Some(0)),
            (Sign::Negative, None) => verdict(Classification::StrictlyCpdOnly, Some(0)),
            (Sign::Negative, Some(n)) => verdict(Classification::CpdNotStrict, Some(n)),
            (Sign::Positive, None) => verdict(Classification::StrictlyPd, None),
            (Sign::Zero, _) => verdict(Classification::PdNotStrict, Some(0)),
            (Sign::Positive, Some(n)) => verdict(Classification::PdNotStrict, Some(n)),
        },
    }
}

/// Classifies a coefficient report.
pub fn classify(report: &CoefficientReport, mode: Mode) -> PdVerdict {
    classify_signs(&report.signs(), mode)
}

/// One grid point of a Riesz scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub s: f64,
    pub verdict: Classification,
    pub first_negative_n: Option<usize>,
}

/// Bracket of the coefficient-sign transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Largest exponent certified not-CPD.
    pub lower: f64,
    /// Smallest exponent above `lower` certified CPD.
    pub upper: f64,
    pub estimate: f64,
}

/// Result of a Riesz exponent scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub space: String,
    pub metric: Metric,
    pub nmax: usize,
    pub digits: u32,
    pub points: Vec<ScanPoint>,
    /// Points added by bisection, in evaluation order.
    pub bisection: Vec<ScanPoint>,
    pub transition: Option<Transition>,
    pub tolerance: f64,
}

/// Settings for [`scan_riesz`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub s_min: f64,
    pub s_max: f64,
    pub step: f64,
    pub nmax: usize,
    pub bisect_tol: f64,
    pub digits: u32,
}

fn scan_point(space: &Space, metric: Metric, s: f64, nmax: usize, digits: u32) -> Result<ScanPoint> {
    // Exponents within rounding of zero are the logarithmic kernel.
    let s = if s.abs() < 1e-12 { 0.0 } else { s };
    let report = certify_coefficients(space, &Kernel::riesz(metric, s), nmax, digits)?;
    let v = classify(&report, Mode::Cpd);
    Ok(ScanPoint { s, verdict: v.classification, first_negative_n: report.first_negative(1) })
}

/// Certifies Riesz kernels sgn(s) d^{-s} over a grid of exponents and
/// bisects the transition between not-CPD and CPD.
pub fn scan_riesz(space: &Space, metric: Metric, opts: &ScanOptions) -> Result<ScanResult> {
    let ScanOptions { s_min, s_max, step, nmax, bisect_tol, digits } = *opts;
    if !(step > 0.0) || !(s_max >= s_min) {
        return Err(Error::InvalidParams(format!("empty scan grid: s from {s_min} to {s_max} step {step}")));
    }
    let d = 2.0 * space.alpha + 2.0;
    if s_max >= d {
        return Err(Error::NonIntegrable { sigma: s_max / 2.0, limit: space.alpha + 1.0 });
    }
    let count = ((s_max - s_min) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| ((s_min + i as f64 * step) * 1e12).round() / 1e12).collect();
    let points = grid
        .par_iter()
        .map(|&s| scan_point(space, metric, s, nmax, digits))
        .collect::<Result<Vec<_>>>()?;
    if points.iter().all(|p| p.verdict == Classification::Undecided) {
        return Err(Error::Convergence("every scan point is undecided at the precision cap".into()));
    }
    let lower = points.iter().rev().find(|p| p.verdict == Classification::NotCpd).map(|p| p.s);
    let upper = lower.and_then(|lo| points.iter().find(|p| p.s > lo && p.verdict.is_cpd()).map(|p| p.s));
    let mut bisection = Vec::new();
    let transition = match (lower, upper) {
        (Some(mut lo), Some(mut hi)) => {
            while hi - lo > bisect_tol {
                let mid = 0.5 * (lo + hi);
                let p = scan_point(space, metric, mid, nmax, digits)?;
                let verdict = p.verdict;
                bisection.push(p);
                match verdict {
                    Classification::NotCpd => lo = mid,
                    Classification::Undecided => break,
                    _ => hi = mid,
                }
            }
            Some(Transition { lower: lo, upper: hi, estimate: 0.5 * (lo + hi) })
        }
        _ => None,
    };
    Ok(ScanResult {
        space: space.name(),
        metric,
        nmax,
        digits,
        points,
        bisection,
        transition,
        tolerance: bisect_tol,
    })
}

/// Verdict of the check across projective spaces of growing dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum AllSpacesVerdict {
    ConsistentWithAllSpacesPd,
    NotPdForLargeAlpha { alpha: f64, n: usize },
    Undecided,
}

/// Normalised coefficients a_n = F^(n) P_n(1) for one alpha.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha: f64,
    pub a: Vec<f64>,
    pub errors: Vec<f64>,
    pub signs: Vec<Sign>,
}

/// Report of [`all_spaces_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllSpacesReport {
    pub kernel: String,
    pub beta: f64,
    pub nmax: usize,
    pub rows: Vec<AlphaRow>,
    /// Extrapolated limits of a_n as alpha grows, assuming a_n(alpha) =
    /// b_n + c_n / alpha over the two largest alphas.
    pub limits: Vec<f64>,
    pub verdict: AllSpacesVerdict,
}

/// Default alpha sweep.
pub const DEFAULT_ALPHAS: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

/// Computes a_n^{(alpha, beta)} for the kernel on the parameter spaces
/// (alpha, beta, kappa = 1) for each alpha, with large-alpha limits.
pub fn all_spaces_check(kernel: &Kernel, beta: f64, alphas: &[f64], nmax: usize, digits: u32) -> Result<AllSpacesReport> {
    if alphas.is_empty() {
        return Err(Error::InvalidParams("alpha list is empty".into()));
    }
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let space = Space::custom(alpha, beta, 1.0)?;
            let report = certify_coefficients(&space, kernel, nmax, digits)?;
            let ones = jacobi::values_at_one(alpha, nmax);
            Ok(AlphaRow {
                alpha,
                a: report.entries.iter().map(|e| e.value_f64() * ones[e.n]).collect(),
                errors: report.entries.iter().map(|e| e.error * ones[e.n]).collect(),
                signs: report.signs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let limits = match rows.len() {
        1 => rows[0].a.clone(),
        k => {
            let (r1, r2) = (&rows[k - 2], &rows[k - 1]);
            (0..=nmax).map(|n| (r2.alpha * r2.a[n] - r1.alpha * r1.a[n]) / (r2.alpha - r1.alpha)).collect()
        }
    };
    let witness = rows.iter().find_map(|r| r.signs.iter().position(|&s| s == Sign::Negative).map(|n| (r.alpha, n)));
    let verdict = match witness {
        Some((alpha, n)) => AllSpacesVerdict::NotPdForLargeAlpha { alpha, n },
        None if rows.iter().any(|r| r.signs.contains(&Sign::Undecided)) => AllSpacesVerdict::Undecided,
        None => AllSpacesVerdict::ConsistentWithAllSpacesPd,
    };
    Ok(AllSpacesReport { kernel: kernel.descriptor(), beta, nmax, rows, limits, verdict })
}

/// One row of the logarithmic-kernel table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub space: String,
    pub alpha: f64,
    pub beta: f64,
    /// First certified negative coefficient of degree n >= 1.
    pub first_negative_n: Option<usize>,
    pub verdict: Classification,
    /// Degrees n >= 1 with certified negative coefficients.
    pub negative: Vec<usize>,
    pub report: CoefficientReport,
}

/// Spaces of the logarithmic-kernel table.
pub fn table1_spaces() -> Vec<Space> {
    [(Family::RP, 3), (Family::RP, 4), (Family::RP, 5), (Family::CP, 3), (Family::CP, 4), (Family::HP, 3), (Family::OP, 3)]
        .into_iter()
        .map(|(f, d)| Space::catalog(f, d).expect("catalog space"))
        .collect()
}

/// Certifies the coefficients of -log(theta) on RP2, RP3, RP4, CP2, CP3, HP2
/// and OP2 and classifies them (positive definiteness mode).
pub fn table1(nmax: usize, digits: u32) -> Result<Vec<Table1Row>> {
    let kernel = Kernel::Log { metric: Metric::Geodesic };
    table1_spaces()
        .par_iter()
        .map(|space| {
            let report = certify_coefficients(space, &kernel, nmax, digits)?;
            let verdict = classify(&report, Mode::Pd);
            let negative = report.entries.iter().filter(|e| e.n >= 1 && e.sign == Sign::Negative).map(|e| e.n).collect();
            Ok(Table1Row {
                space: space.name(),
                alpha: space.alpha,
                beta: space.beta,
                first_negative_n: report.first_negative(1),
                verdict: verdict.classification,
                negative,
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sign::*;

    #[test]
    fn sign_mapping() {
        let all_pos = vec![Positive; 33];
        assert_eq!(classify_signs(&all_pos, Mode::Pd).classification, Classification::StrictlyPd);
        let mut s = all_pos.clone();
        s[0] = Negative;
        assert_eq!(classify_signs(&s, Mode::Cpd).classification, Classification::StrictlyCpdOnly);
        assert_eq!(classify_signs(&s, Mode::Pd).classification, Classification::StrictlyCpdOnly);
        s[5] = Zero;
        assert_eq!(classify_signs(&s, Mode::Cpd).classification, Classification::CpdNotStrict);
        s[7] = Undecided;
        let v = classify_signs(&s, Mode::Cpd);
        assert_eq!((v.classification, v.witness), (Classification::Undecided, Some(7)));
        s[9] = Negative;
        let v = classify_signs(&s, Mode::Pd);
        assert_eq!((v.classification, v.witness), (Classification::NotCpd, Some(9)));
        assert!(v.caveat.contains("32"));
        let mut p = all_pos;
        p[3] = Zero;
        assert_eq!(classify_signs(&p, Mode::Pd).classification, Classification::PdNotStrict);
    }

    #[test]
    fn scan_grid_validation() {
        let s2 = Space::parse("S2").unwrap();
        let bad = ScanOptions { s_min: 0.0, s_max: 2.5, step: 0.5, nmax: 4, bisect_tol: 0.1, digits: 15 };
        assert!(scan_riesz(&s2, Metric::Geodesic, &bad).is_err());
        let empty = ScanOptions { step: 0.0, s_max: 1.0, ..bad };
        assert!(scan_riesz(&s2, Metric::Geodesic, &empty).is_err());
    }
}
