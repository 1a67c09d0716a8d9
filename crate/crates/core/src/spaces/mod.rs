//! Compact two-point homogeneous spaces, their Jacobi parameters, distance
//! variables and the zonal probability measures.

mod points;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ln_gamma, Real};

pub use points::{read_points, read_weights, stream_rng, write_points, Isometry, Point};

/// Family of a two-point homogeneous space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Sphere,
    RP,
    CP,
    HP,
    OP,
    Custom,
}

/// Scalar field of a concrete point model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    /// Real dimension of the field.
    pub fn real_dim(self) -> usize {
        match self {
            Field::R => 1,
            Field::C => 2,
            Field::H => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Field::R => "R",
            Field::C => "C",
            Field::H => "H",
        }
    }

    pub fn from_tag(s: &str) -> Option<Field> {
        match s {
            "R" => Some(Field::R),
            "C" => Some(Field::C),
            "H" => Some(Field::H),
            _ => None,
        }
    }
}

/// A space X_{alpha,beta} with its geometric normalisation `kappa`.
///
/// `d` is the index in S^{d-1} or FP^{d-1}; it is zero for custom spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub family: Family,
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Space {
    /// Builds a catalog space `S^{d-1}` or `FP^{d-1}` from its family and `d`.
    pub fn catalog(family: Family, d: usize) -> Result<Space> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d must be at least 2, got {d}")));
        }
        let df = d as f64;
        let (alpha, beta, kappa) = match family {
            Family::Sphere => ((df - 3.0) / 2.0, (df - 3.0) / 2.0, 0.5),
            Family::RP => ((df - 3.0) / 2.0, -0.5, 1.0),
            Family::CP => (df - 2.0, 0.0, 1.0),
            Family::HP => (2.0 * (df - 1.0) - 1.0, 1.0, 1.0),
            Family::OP => {
                if d != 3 {
                    return Err(Error::InvalidParams("the octonionic projective space exists only as OP2".into()));
                }
                (7.0, 3.0, 1.0)
            }
            Family::Custom => return Err(Error::InvalidParams("use Space::custom for custom parameters".into())),
        };
        Ok(Space { family, d, alpha, beta, kappa })
    }

    /// A custom space with `alpha > beta > -1` and `kappa` in {1/2, 1}.
    pub fn custom(alpha: f64, beta: f64, kappa: f64) -> Result<Space> {
        if !(beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("need alpha, beta > -1 (got alpha={alpha}, beta={beta})")));
        }
        if !(alpha > beta) {
            return Err(Error::InvalidParams(format!("custom spaces need alpha > beta (got alpha={alpha}, beta={beta})")));
        }
        if kappa != 0.5 && kappa != 1.0 {
            return Err(Error::InvalidParams(format!("kappa must be 0.5 or 1, got {kappa}")));
        }
        Ok(Space { family: Family::Custom, d: 0, alpha, beta, kappa })
    }

    /// Parses `S<k>`, `RP<k>`, `CP<k>`, `HP<k>`, `OP2` or
    /// `custom:alpha=<f>,beta=<f>,kappa=<0.5|1>`.
    pub fn parse(spec: &str) -> Result<Space> {
        let s = spec.trim();
        if let Some(rest) = s.strip_prefix("custom:") {
            let mut alpha = None;
            let mut beta = None;
            let mut kappa = None;
            for part in rest.split(',') {
                let (k, v) = part.split_once('=').ok_or_else(|| Error::UnknownSpace(spec.into()))?;
                let v: f64 = v.trim().parse().map_err(|_| Error::Parse {
                    pos: 0,
                    token: v.to_string(),
                    expected: "a floating-point number".into(),
                })?;
                match k.trim() {
                    "alpha" => alpha = Some(v),
                    "beta" => beta = Some(v),
                    "kappa" => kappa = Some(v),
                    _ => return Err(Error::UnknownSpace(spec.into())),
                }
            }
            return match (alpha, beta, kappa) {
                (Some(a), Some(b), Some(k)) => Space::custom(a, b, k),
                _ => Err(Error::UnknownSpace(spec.into())),
            };
        }
        let (family, digits) = if let Some(r) = s.strip_prefix("RP") {
            (Family::RP, r)
        } else if let Some(r) = s.strip_prefix("CP") {
            (Family::CP, r)
        } else if let Some(r) = s.strip_prefix("HP") {
            (Family::HP, r)
        } else if let Some(r) = s.strip_prefix("OP") {
            (Family::OP, r)
        } else if let Some(r) = s.strip_prefix('S') {
            (Family::Sphere, r)
        } else {
            return Err(Error::UnknownSpace(spec.into()));
        };
        let k: usize = digits.parse().map_err(|_| Error::UnknownSpace(spec.into()))?;
        Space::catalog(family, k + 1)
    }

    /// Real dimension D = 2 alpha + 2.
    pub fn dim(&self) -> f64 {
        2.0 * self.alpha + 2.0
    }

    /// Diameter pi / (2 kappa).
    pub fn diameter(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.kappa)
    }

    /// Field of the concrete point model, if one exists.
    pub fn field(&self) -> Option<Field> {
        match self.family {
            Family::Sphere | Family::RP => Some(Field::R),
            Family::CP => Some(Field::C),
            Family::HP => Some(Field::H),
            Family::OP | Family::Custom => None,
        }
    }

    /// Whether uniform sampling of points is available.
    pub fn has_point_model(&self) -> bool {
        self.field().is_some()
    }

    /// Canonical name, parseable by [`Space::parse`].
    pub fn name(&self) -> String {
        let k = self.d.saturating_sub(1);
        match self.family {
            Family::Sphere => format!("S{k}"),
            Family::RP => format!("RP{k}"),
            Family::CP => format!("CP{k}"),
            Family::HP => format!("HP{k}"),
            Family::OP => "OP2".into(),
            Family::Custom => format!("custom:alpha={},beta={},kappa={}", self.alpha, self.beta, self.kappa),
        }
    }

    /// Zonal variable t = cos(2 kappa theta).
    pub fn t_from_theta(&self, theta: f64) -> Result<f64> {
        let diam = self.diameter();
        if !(theta >= 0.0 && theta <= diam * (1.0 + 1e-15)) {
            return Err(Error::Range(format!("theta = {theta} outside [0, {diam}]")));
        }
        Ok((2.0 * self.kappa * theta.min(diam)).cos())
    }

    /// Geodesic distance for a zonal variable t.
    pub fn theta_from_t(&self, t: f64) -> Result<f64> {
        let t = clamp_unit(t)?;
        // atan2 of the half-angle pair is accurate at both ends.
        let chi = ((1.0 - t) / 2.0).sqrt();
        let c = ((1.0 + t) / 2.0).sqrt();
        Ok(chi.atan2(c) / self.kappa)
    }

    /// Normalising constant Z = 2^{alpha+beta+1} B(alpha+1, beta+1) of mu.
    pub fn measure_z<T: Real>(&self) -> T {
        let a = T::lit(self.alpha);
        let b = T::lit(self.beta);
        let one = T::one();
        let ln = (a + b + one) * T::LN_2() + ln_gamma(a + one) + ln_gamma(b + one) - ln_gamma(a + b + T::lit(2.0));
        ln.exp()
    }

    /// Density of the probability measure mu_{alpha,beta} on t in (-1, 1).
    pub fn measure_density(&self, t: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::Range(format!("t = {t} outside [-1, 1]")));
        }
        if (t == 1.0 && self.alpha < 0.0) || (t == -1.0 && self.beta < 0.0) {
            return Err(Error::Range(format!("density is infinite at the endpoint t = {t}")));
        }
        let z: f64 = self.measure_z();
        Ok((1.0 - t).powf(self.alpha) * (1.0 + t).powf(self.beta) / z)
    }

    /// Constant C in d nu = C kappa sin^{2a+1}(kappa theta) cos^{2b+1}(kappa theta) d theta.
    pub fn nu_constant<T: Real>(&self) -> T {
        let a = T::lit(self.alpha);
        let b = T::lit(self.beta);
        let one = T::one();
        let two = T::lit(2.0);
        two * (ln_gamma(a + b + two) - ln_gamma(a + one) - ln_gamma(b + one)).exp()
    }

    /// CDF of mu_{alpha,beta}: the regularised incomplete beta function
    /// I_{(1+t)/2}(beta+1, alpha+1), computed by quadrature of the density.
    pub fn measure_cdf(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        // With u = (1+t)/2 the density is proportional to u^beta (1-u)^alpha.
        // Integrate on the shorter side with a tanh-sinh rule to handle the
        // endpoint singularity.
        let u = (1.0 + t) / 2.0;
        let a = self.alpha;
        let b = self.beta;
        let norm = (ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
        let f = |x: f64| x.powf(b) * (1.0 - x).powf(a);
        let g = |x: f64| x.powf(a) * (1.0 - x).powf(b);
        if u <= 0.5 {
            tanh_sinh_0(f, u) / norm
        } else {
            1.0 - tanh_sinh_0(g, 1.0 - u) / norm
        }
    }

    /// Catalog spaces used throughout the test suites.
    pub fn catalog_all() -> Vec<Space> {
        ["S2", "S4", "RP2", "RP3", "RP4", "CP2", "CP3", "HP2", "OP2"]
            .iter()
            .map(|n| Space::parse(n).expect("catalog name"))
            .collect()
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Clamps tiny excursions outside [-1, 1] and rejects larger ones.
pub fn clamp_unit(t: f64) -> Result<f64> {
    if t > 1.0 {
        if t - 1.0 <= 1e-15 {
            return Ok(1.0);
        }
        return Err(Error::Range(format!("t = {t} exceeds 1")));
    }
    if t < -1.0 {
        if -1.0 - t <= 1e-15 {
            return Ok(-1.0);
        }
        return Err(Error::Range(format!("t = {t} below -1")));
    }
    if t.is_nan() {
        return Err(Error::Range("t is NaN".into()));
    }
    Ok(t)
}

/// Chordal distance chi = sin(kappa theta) = sqrt((1-t)/2).
pub fn chi_from_t(t: f64) -> Result<f64> {
    let t = clamp_unit(t)?;
    Ok(((1.0 - t) / 2.0).sqrt())
}

/// Integral of `f` over (0, u) with a tanh-sinh rule in double precision.
fn tanh_sinh_0(f: impl Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    let kmax = (4.5 / h) as i64;
    for k in -kmax..=kmax {
        let v = k as f64 * h;
        let q = (-std::f64::consts::PI * v.sinh().abs()).exp();
        let delta = u * q / (1.0 + q);
        let w = u * std::f64::consts::PI * v.cosh() * q / ((1.0 + q) * (1.0 + q));
        let x = if v <= 0.0 { delta } else { u - delta };
        if x <= 0.0 || x >= 1.0 {
            continue;
        }
        let fx = f(x);
        if fx.is_finite() {
            sum += w * fx;
        }
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_parameters() {
        let s2 = Space::parse("S2").unwrap();
        assert_eq!((s2.alpha, s2.beta, s2.kappa, s2.dim()), (0.0, 0.0, 0.5, 2.0));
        let cp3 = Space::parse("CP3").unwrap();
        assert_eq!((cp3.alpha, cp3.beta, cp3.kappa, cp3.dim()), (2.0, 0.0, 1.0, 6.0));
        let op2 = Space::parse("OP2").unwrap();
        assert_eq!((op2.alpha, op2.beta, op2.kappa, op2.dim()), (7.0, 3.0, 1.0, 16.0));
        let rp3 = Space::parse("RP3").unwrap();
        assert_eq!((rp3.alpha, rp3.beta, rp3.dim()), (0.5, -0.5, 3.0));
        let hp2 = Space::parse("HP2").unwrap();
        assert_eq!((hp2.alpha, hp2.beta, hp2.dim()), (3.0, 1.0, 8.0));
    }

    #[test]
    fn dimension_matches_field_count() {
        for (name, real_dim) in [("S4", 4.0), ("RP4", 4.0), ("CP3", 6.0), ("HP2", 8.0), ("OP2", 16.0)] {
            assert_eq!(Space::parse(name).unwrap().dim(), real_dim, "{name}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Space::parse("XP2"), Err(Error::UnknownSpace(_))));
        assert!(Space::parse("S0").is_err());
        assert!(Space::parse("OP3").is_err());
        assert!(Space::parse("custom:alpha=1,beta=-1,kappa=1").is_err());
        assert!(Space::parse("custom:alpha=1,beta=0,kappa=0.7").is_err());
        let c = Space::parse("custom:alpha=2.5,beta=-0.5,kappa=1").unwrap();
        assert_eq!(Space::parse(&c.name()).unwrap(), c);
    }

    #[test]
    fn theta_t_conversions() {
        let s2 = Space::parse("S2").unwrap();
        let rp2 = Space::parse("RP2").unwrap();
        assert_eq!(s2.t_from_theta(0.0).unwrap(), 1.0);
        assert!((s2.t_from_theta(std::f64::consts::PI).unwrap() + 1.0).abs() < 1e-15);
        assert!((rp2.t_from_theta(std::f64::consts::FRAC_PI_2).unwrap() + 1.0).abs() < 1e-15);
        assert!(rp2.t_from_theta(2.0).is_err());
        assert!(s2.theta_from_t(1.5).is_err());
        assert!((chi_from_t(0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-16);
        assert_eq!(chi_from_t(1.0).unwrap(), 0.0);
        assert_eq!(chi_from_t(-1.0).unwrap(), 1.0);
    }

    #[test]
    fn density_values() {
        let s2 = Space::parse("S2").unwrap();
        assert!((s2.measure_density(0.3).unwrap() - 0.5).abs() < 1e-15);
        let cp2 = Space::parse("CP2").unwrap();
        assert!((cp2.measure_density(0.0).unwrap() - 0.5).abs() < 1e-15);
        let rp2 = Space::parse("RP2").unwrap();
        assert!(rp2.measure_density(-1.0).is_err());
        assert!((rp2.measure_cdf(1.0) - 1.0).abs() < 1e-15);
        assert!((cp2.measure_cdf(0.0) - 0.75).abs() < 1e-12);
    }
}
