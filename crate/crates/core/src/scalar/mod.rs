//! Scalar abstraction shared by all numerical routines.
//!
//! Everything numerical in the crate is generic over [`Real`], implemented for
//! `f32`, `f64` and the quad-double type [`Qd`].

mod qd;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use qd::Qd;

/// Floating-point scalar used by the numerical core.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Approximate number of significant decimal digits.
    const DIGITS: u32;
    /// Short tag used in reports.
    const NAME: &'static str;

    /// Converts an `f64` literal (exactly representable values stay exact).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// `p / q` rounded once in the working precision.
    #[inline]
    fn ratio(p: i64, q: i64) -> Self {
        Self::from_i64(p).expect("integer") / Self::from_i64(q).expect("integer")
    }

    /// Leading `f64` approximation.
    fn to_f64_lossy(self) -> f64;

    /// Scientific-notation decimal string with `digits` significant digits.
    fn to_decimal(self, digits: usize) -> String;

    /// Parses a decimal literal to the working precision.
    fn parse_decimal(s: &str) -> Option<Self>;
}

impl Real for f64 {
    const DIGITS: u32 = 15;
    const NAME: &'static str = "f64";
    fn to_f64_lossy(self) -> f64 {
        self
    }
    fn to_decimal(self, digits: usize) -> String {
        format!("{:.*e}", digits.clamp(1, 17) - 1, self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Real for f32 {
    const DIGITS: u32 = 6;
    const NAME: &'static str = "f32";
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
    fn to_decimal(self, digits: usize) -> String {
        format!("{:.*e}", digits.clamp(1, 9) - 1, self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Real for Qd {
    const DIGITS: u32 = 62;
    const NAME: &'static str = "qd";
    fn to_f64_lossy(self) -> f64 {
        self.0[0] + self.0[1]
    }
    fn to_decimal(self, digits: usize) -> String {
        Qd::to_decimal(self, digits.min(64))
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        Qd::parse_decimal(s)
    }
}

/// Even-index Bernoulli numbers B_2 .. B_34 as exact fractions.
const BERNOULLI: [(i64, i64); 17] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
    (-7709321041217, 510),
    (2577687858367, 6),
];

/// Natural logarithm of the Gamma function for `x > 0`.
///
/// Uses the Stirling series after shifting the argument upward. Double and
/// single precision arguments are evaluated in quad-double and rounded once,
/// so the result is correctly rounded in practice.
pub fn ln_gamma<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "ln_gamma requires a positive argument");
    if T::DIGITS <= 15 {
        let r = ln_gamma_stirling(Qd::from_f64(x.to_f64_lossy()));
        return T::lit(r.to_f64_lossy());
    }
    ln_gamma_stirling(x)
}

fn ln_gamma_stirling<T: Real>(x: T) -> T {
    let shift_to = 160.0;
    let terms = 17;
    let mut z = x;
    let mut ln_prod = T::zero();
    let mut prod = T::one();
    while z.to_f64_lossy() < shift_to {
        prod = prod * z;
        if prod.to_f64_lossy() > 1e200 {
            ln_prod = ln_prod + prod.ln();
            prod = T::one();
        }
        z = z + T::one();
    }
    ln_prod = ln_prod + prod.ln();
    let half = T::lit(0.5);
    let ln_2pi = (T::PI() * T::lit(2.0)).ln();
    let mut s = (z - half) * z.ln() - z + half * ln_2pi;
    let z2 = z * z;
    let mut zp = z;
    for (j, &(p, q)) in BERNOULLI.iter().take(terms).enumerate() {
        let k = 2 * (j as i64 + 1);
        s = s + T::ratio(p, q * k * (k - 1)) / zp;
        zp = zp * z2;
    }
    s - ln_prod
}

/// Gamma function for `x > 0`.
pub fn gamma<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}

/// Pochhammer symbol `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer<T: Real>(a: T, n: usize) -> T {
    let mut p = T::one();
    let mut x = a;
    for _ in 0..n {
        p = p * x;
        x = x + T::one();
    }
    p
}

/// Beta function B(a, b) for positive arguments.
pub fn beta<T: Real>(a: T, b: T) -> T {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}
