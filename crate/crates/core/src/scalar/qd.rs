//! Quad-double arithmetic: an unevaluated sum of four non-overlapping `f64`
//! components, giving roughly 62 significant decimal digits.
//!
//! The basic error-free transformations and the renormalisation follow the
//! classic Hida–Li–Bailey algorithms. Transcendental functions use argument
//! reduction followed by Taylor series or Newton iterations.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use std::sync::OnceLock;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

/// Quad-double number. Components are ordered by decreasing magnitude and
/// satisfy `|x[i+1]| <= ulp(x[i]) / 2` after every public operation.
#[derive(Clone, Copy, Default)]
pub struct Qd(pub [f64; 4]);

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
const SPLIT_THRESH: f64 = 6.696_928_794_914_17e299; // 2^996

#[inline]
fn split(a: f64) -> (f64, f64) {
    if !(-SPLIT_THRESH..=SPLIT_THRESH).contains(&a) {
        let a = a * 3.725_290_298_461_914e-9; // 2^-28
        let t = SPLITTER * a;
        let hi = t - (t - a);
        let lo = a - hi;
        (hi * 268_435_456.0, lo * 268_435_456.0)
    } else {
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[inline]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

#[inline]
fn three_sum2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    (a, t2 + t3)
}

fn renorm4(c0: f64, c1: f64, c2: f64, c3: f64) -> Qd {
    if c0.is_infinite() || c0.is_nan() {
        return Qd([c0, 0.0, 0.0, 0.0]);
    }
    let (s0, c3) = quick_two_sum(c2, c3);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);
    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
        }
    }
    Qd([s0, s1, s2, s3])
}

fn renorm5(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Qd {
    if c0.is_infinite() || c0.is_nan() {
        return Qd([c0, 0.0, 0.0, 0.0]);
    }
    let (s0, c4) = quick_two_sum(c3, c4);
    let (s0, c3) = quick_two_sum(c2, s0);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);
    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                (s2, s3) = quick_two_sum(s2, c4);
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    Qd([s0, s1, s2, s3])
}

/// Accumulates `c` into the pair `(a, b)`; returns a finished component when
/// one can be released.
#[inline]
fn quick_three_accum(a: &mut f64, b: &mut f64, c: f64) -> f64 {
    let (s, bb) = two_sum(*b, c);
    let (s, aa) = two_sum(*a, s);
    *a = aa;
    *b = bb;
    let za = *a != 0.0;
    let zb = *b != 0.0;
    if za && zb {
        return s;
    }
    if !zb {
        *b = *a;
        *a = s;
    } else {
        *a = s;
    }
    0.0
}

macro_rules! qd_const {
    ($name:ident, $a:expr, $b:expr, $c:expr, $d:expr) => {
        pub const $name: Qd = Qd([$a, $b, $c, $d]);
    };
}

// The leading words of these constants coincide with the f64 constants by
// construction; the trailing words carry the extra precision.
#[allow(clippy::approx_constant)]
impl Qd {
    qd_const!(ZERO, 0.0, 0.0, 0.0, 0.0);
    qd_const!(ONE, 1.0, 0.0, 0.0, 0.0);
    qd_const!(PI_C, 3.141592653589793, 1.2246467991473532e-16, -2.9947698097183397e-33, 1.1124542208633653e-49);
    qd_const!(TWO_PI_C, 6.283185307179586, 2.4492935982947064e-16, -5.989539619436679e-33, 2.2249084417267306e-49);
    qd_const!(FRAC_PI_2_C, 1.5707963267948966, 6.123233995736766e-17, -1.4973849048591698e-33, 5.562271104316826e-50);
    qd_const!(FRAC_PI_3_C, 1.0471975511965979, -1.072081766451091e-16, -9.982566032394464e-34, -7.6956153601821505e-50);
    qd_const!(FRAC_PI_4_C, 0.7853981633974483, 3.061616997868383e-17, -7.486924524295849e-34, 2.781135552158413e-50);
    qd_const!(FRAC_PI_6_C, 0.5235987755982989, -5.360408832255455e-17, -4.991283016197232e-34, -3.8478076800910752e-50);
    qd_const!(FRAC_PI_8_C, 0.39269908169872414, 1.5308084989341915e-17, -3.7434622621479246e-34, 1.3905677760792066e-50);
    qd_const!(FRAC_1_PI_C, 0.3183098861837907, -1.9678676675182486e-17, -1.0721436282893004e-33, 8.053563926594112e-50);
    qd_const!(FRAC_2_PI_C, 0.6366197723675814, -3.935735335036497e-17, -2.1442872565786008e-33, 1.6107127853188224e-49);
    qd_const!(FRAC_2_SQRT_PI_C, 1.1283791670955126, 1.533545961316588e-17, -4.765684596693686e-34, -2.007794661655263e-50);
    qd_const!(SQRT_2_C, 1.4142135623730951, -9.667293313452913e-17, 4.1386753086994136e-33, 4.935546991468351e-50);
    qd_const!(FRAC_1_SQRT_2_C, 0.7071067811865476, -4.833646656726457e-17, 2.0693376543497068e-33, 2.4677734957341755e-50);
    qd_const!(E_C, 2.718281828459045, 1.4456468917292502e-16, -2.1277171080381768e-33, 1.5156301598412191e-49);
    qd_const!(LN_2_C, 0.6931471805599453, 2.3190468138462996e-17, 5.707708438416212e-34, -3.5824322106018114e-50);
    qd_const!(LN_10_C, 2.302585092994046, -2.1707562233822494e-16, -9.984262454465777e-33, -4.023357454450206e-49);
    qd_const!(LOG2_E_C, 1.4426950408889634, 2.0355273740931033e-17, -1.0614659956117258e-33, -1.3836716780181402e-50);
    qd_const!(LOG10_E_C, 0.4342944819032518, 1.098319650216765e-17, 3.717181233110959e-34, 7.734484346504299e-51);
    qd_const!(LOG10_2_C, 0.3010299956639812, -2.8037281277851704e-18, 5.471948402314639e-35, 5.1051389831070925e-51);
    qd_const!(LOG2_10_C, 3.321928094887362, 1.661617516973592e-16, 1.2215512178458181e-32, 5.9551189702782496e-49);

    /// Unit roundoff of the format (2^-209).
    pub const EPS: f64 = 1.215_432_671_457_254_2e-63;

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Qd([x, 0.0, 0.0, 0.0])
    }

    /// Leading component.
    #[inline]
    pub fn hi(self) -> f64 {
        self.0[0]
    }

    /// Exact sum of two doubles.
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (s, e) = two_sum(a, b);
        Qd([s, e, 0.0, 0.0])
    }

    /// Exact product of two doubles.
    pub fn from_prod(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Qd([p, e, 0.0, 0.0])
    }

    fn add_qd(self, b: Qd) -> Qd {
        let a = &self.0;
        let b = &b.0;
        let (mut i, mut j, mut k) = (0usize, 0usize, 0usize);
        let mut x = [0.0f64; 4];
        let pick = |i: &mut usize, j: &mut usize| -> f64 {
            if *i < 4 && (*j >= 4 || a[*i].abs() > b[*j].abs()) {
                *i += 1;
                a[*i - 1]
            } else {
                *j += 1;
                b[*j - 1]
            }
        };
        let u0 = pick(&mut i, &mut j);
        let v0 = pick(&mut i, &mut j);
        let (mut u, mut v) = quick_two_sum(u0, v0);
        while k < 4 {
            if i >= 4 && j >= 4 {
                x[k] = u;
                if k < 3 {
                    k += 1;
                    x[k] = v;
                }
                break;
            }
            let t = pick(&mut i, &mut j);
            let s = quick_three_accum(&mut u, &mut v, t);
            if s != 0.0 {
                x[k] = s;
                k += 1;
            }
        }
        for &ak in &a[i.min(4)..] {
            x[3] += ak;
        }
        for &bk in &b[j.min(4)..] {
            x[3] += bk;
        }
        renorm4(x[0], x[1], x[2], x[3])
    }

    fn add_f64(self, b: f64) -> Qd {
        let a = &self.0;
        let (c0, e) = two_sum(a[0], b);
        let (c1, e) = two_sum(a[1], e);
        let (c2, e) = two_sum(a[2], e);
        let (c3, e) = two_sum(a[3], e);
        renorm5(c0, c1, c2, c3, e)
    }

    fn mul_qd(self, b: Qd) -> Qd {
        let a = &self.0;
        let b = &b.0;
        let (p0, q0) = two_prod(a[0], b[0]);
        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);
        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);
        let (p1, p2, q0) = three_sum(p1, p2, q0);
        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (mut s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;
        s1 += a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5;
        renorm5(p0, p1, s0, s1, s2)
    }

    fn mul_f64(self, b: f64) -> Qd {
        let a = &self.0;
        let (p0, q0) = two_prod(a[0], b);
        let (p1, q1) = two_prod(a[1], b);
        let (p2, q2) = two_prod(a[2], b);
        let p3 = a[3] * b;
        let s0 = p0;
        let (s1, s2) = two_sum(q0, p1);
        let (s2, q1, p2) = three_sum(s2, q1, p2);
        let (q1, q2) = three_sum2(q1, q2, p3);
        let s3 = q1;
        let s4 = q2 + p2;
        renorm5(s0, s1, s2, s3, s4)
    }

    fn div_qd(self, b: Qd) -> Qd {
        let q0 = self.0[0] / b.0[0];
        let mut r = self - b.mul_f64(q0);
        let q1 = r.0[0] / b.0[0];
        r -= b.mul_f64(q1);
        let q2 = r.0[0] / b.0[0];
        r -= b.mul_f64(q2);
        let q3 = r.0[0] / b.0[0];
        r -= b.mul_f64(q3);
        let q4 = r.0[0] / b.0[0];
        renorm5(q0, q1, q2, q3, q4)
    }

    /// Multiplication by a power of two (exact).
    #[inline]
    pub fn mul_pwr2(self, p: f64) -> Qd {
        Qd([self.0[0] * p, self.0[1] * p, self.0[2] * p, self.0[3] * p])
    }

    #[inline]
    pub fn sqr(self) -> Qd {
        self * self
    }

    fn ldexp(self, e: i32) -> Qd {
        // Split the scaling so that intermediate factors stay representable.
        let mut r = self;
        let mut e = e;
        while e != 0 {
            let step = e.clamp(-1000, 1000);
            let f = 2f64.powi(step);
            r = r.mul_pwr2(f);
            e -= step;
        }
        r
    }

    fn is_zero_qd(self) -> bool {
        self.0[0] == 0.0
    }

    /// Nearest integer (ties away from zero) as a quad-double.
    fn nint(self) -> Qd {
        let x0 = self.0[0].round();
        if x0 == self.0[0] {
            // Leading component is integral; round the tail.
            let x1 = self.0[1].round();
            if x1 == self.0[1] {
                let x2 = self.0[2].round();
                if x2 == self.0[2] {
                    let x3 = self.0[3].round();
                    return renorm4(x0, x1, x2, x3);
                }
                let x2r = if (x2 - self.0[2]).abs() == 0.5 && self.0[3] < 0.0 { x2 - 1.0 } else { x2 };
                return renorm4(x0, x1, x2r, 0.0);
            }
            let x1r = if (x1 - self.0[1]).abs() == 0.5 && self.0[2] < 0.0 { x1 - 1.0 } else { x1 };
            return renorm4(x0, x1r, 0.0, 0.0);
        }
        if (x0 - self.0[0]).abs() == 0.5 && self.0[1] < 0.0 {
            return Qd::from_f64(x0 - 1.0);
        }
        Qd::from_f64(x0)
    }

    fn floor_qd(self) -> Qd {
        let mut x = [self.0[0].floor(), 0.0, 0.0, 0.0];
        if x[0] == self.0[0] {
            x[1] = self.0[1].floor();
            if x[1] == self.0[1] {
                x[2] = self.0[2].floor();
                if x[2] == self.0[2] {
                    x[3] = self.0[3].floor();
                }
            }
            return renorm4(x[0], x[1], x[2], x[3]);
        }
        Qd(x)
    }

    fn inv_fact() -> &'static [Qd] {
        static TABLE: OnceLock<Vec<Qd>> = OnceLock::new();
        TABLE.get_or_init(|| {
            let mut v = Vec::with_capacity(60);
            let mut f = Qd::ONE;
            v.push(Qd::ONE);
            for k in 1..60u32 {
                f = f.mul_f64(k as f64);
                v.push(Qd::ONE / f);
            }
            v
        })
    }

    fn exp_qd(self) -> Qd {
        if self.0[0] <= -745.0 {
            return Qd::ZERO;
        }
        if self.0[0] >= 709.8 {
            return Qd::from_f64(f64::INFINITY);
        }
        if self.is_zero_qd() {
            return Qd::ONE;
        }
        let m = (self.0[0] / Qd::LN_2_C.0[0] + 0.5).floor();
        let k = 512.0;
        let r = (self - Qd::LN_2_C.mul_f64(m)).mul_pwr2(1.0 / k);
        let inv = Qd::inv_fact();
        // exp(r) - 1 by Taylor series.
        let mut s = r;
        let mut p = r;
        for f in inv.iter().skip(2) {
            p *= r;
            let t = p * *f;
            s += t;
            if t.0[0].abs() <= Qd::EPS * s.0[0].abs() {
                break;
            }
        }
        // (1+s)^2 - 1 = s(s+2), applied log2(k) times.
        for _ in 0..9 {
            s = s.mul_pwr2(2.0) + s.sqr();
        }
        (s + 1.0).ldexp(m as i32)
    }

    fn ln_qd(self) -> Qd {
        if self.0[0] < 0.0 || self.0[0].is_nan() {
            return Qd::from_f64(f64::NAN);
        }
        if self.is_zero_qd() {
            return Qd::from_f64(f64::NEG_INFINITY);
        }
        if self.0[0].is_infinite() {
            return self;
        }
        if self.0[0] == 1.0 && self.0[1] == 0.0 {
            return Qd::ZERO;
        }
        let mut x = Qd::from_f64(self.0[0].ln());
        for _ in 0..3 {
            x = x + self * (-x).exp_qd() - 1.0;
        }
        x
    }

    /// sin and cos of |r| <= pi/4 via Taylor series at r/8 and three
    /// double-angle steps.
    fn sin_cos_reduced(r: Qd) -> (Qd, Qd) {
        if r.is_zero_qd() {
            return (Qd::ZERO, Qd::ONE);
        }
        let x = r.mul_pwr2(0.125);
        let x2 = x.sqr();
        let inv = Qd::inv_fact();
        let mut s = x;
        let mut term = x;
        let mut k = 3;
        while k < inv.len() {
            term = -(term * x2);
            let t = term * inv[k];
            s += t;
            if t.0[0].abs() <= Qd::EPS * s.0[0].abs() {
                break;
            }
            k += 2;
        }
        // 1 - cos(x) by series, to keep the double-angle steps accurate.
        let mut omc = x2.mul_pwr2(0.5);
        let mut term = x2;
        let mut k = 4;
        while k < inv.len() {
            term = -(term * x2);
            let t = term * inv[k];
            omc += t;
            if t.0[0].abs() <= Qd::EPS * omc.0[0].abs() {
                break;
            }
            k += 2;
        }
        let mut c = Qd::ONE - omc;
        for _ in 0..3 {
            // sin 2x = 2 s c, 1 - cos 2x = 2 s^2
            let s2 = (s * c).mul_pwr2(2.0);
            omc = s.sqr().mul_pwr2(2.0);
            s = s2;
            c = Qd::ONE - omc;
        }
        (s, c)
    }

    fn sin_cos_qd(self) -> (Qd, Qd) {
        if self.is_zero_qd() {
            return (Qd::ZERO, Qd::ONE);
        }
        if !self.0[0].is_finite() {
            return (Qd::from_f64(f64::NAN), Qd::from_f64(f64::NAN));
        }
        let z = (self / Qd::TWO_PI_C).nint();
        let r = self - Qd::TWO_PI_C * z;
        let j = (r.0[0] / Qd::FRAC_PI_2_C.0[0]).round();
        let r = r - Qd::FRAC_PI_2_C.mul_f64(j);
        let (s, c) = Qd::sin_cos_reduced(r);
        match (j as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn atan2_qd(self, x: Qd) -> Qd {
        let y = self;
        if x.is_zero_qd() {
            if y.is_zero_qd() {
                return Qd::ZERO;
            }
            return if y.0[0] > 0.0 { Qd::FRAC_PI_2_C } else { -Qd::FRAC_PI_2_C };
        }
        if y.is_zero_qd() {
            return if x.0[0] > 0.0 { Qd::ZERO } else { Qd::PI_C };
        }
        let r = (x.sqr() + y.sqr()).sqrt_qd();
        let xx = x / r;
        let yy = y / r;
        let mut z = Qd::from_f64(y.0[0].atan2(x.0[0]));
        for _ in 0..3 {
            let (sz, cz) = z.sin_cos_qd();
            if xx.0[0].abs() > yy.0[0].abs() {
                z += (yy - sz) / cz;
            } else {
                z -= (xx - cz) / sz;
            }
        }
        z
    }

    fn sqrt_qd(self) -> Qd {
        if self.is_zero_qd() {
            return Qd::ZERO;
        }
        if self.0[0] < 0.0 {
            return Qd::from_f64(f64::NAN);
        }
        if self.0[0].is_infinite() {
            return self;
        }
        let mut x = Qd::from_f64(1.0 / self.0[0].sqrt());
        let h = self.mul_pwr2(0.5);
        for _ in 0..3 {
            x += x * (Qd::from_f64(0.5) - h * x.sqr());
        }
        self * x
    }

    fn powi_qd(self, n: i32) -> Qd {
        if n == 0 {
            return Qd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Qd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            Qd::ONE / acc
        } else {
            acc
        }
    }

    /// Scientific-notation decimal string with `digits` significant digits,
    /// formatted like Rust's `{:e}` output (e.g. `-1.25e-3`).
    pub fn to_decimal(self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.0[0].is_nan() {
            return "NaN".into();
        }
        if self.0[0].is_infinite() {
            return if self.0[0] > 0.0 { "inf".into() } else { "-inf".into() };
        }
        if self.is_zero_qd() {
            return if digits == 1 { "0e0".into() } else { format!("0.{}e0", "0".repeat(digits - 1)) };
        }
        let neg = self.0[0] < 0.0;
        let x = self.abs();
        let mut e = x.0[0].log10().floor() as i32;
        let mut r = x / Qd::from_f64(10.0).powi_qd(e);
        if r.0[0] >= 10.0 {
            r /= 10.0;
            e += 1;
        }
        if r.0[0] < 1.0 {
            r *= 10.0;
            e -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = r.0[0].floor().clamp(0.0, 9.0);
            ds.push(d as u8);
            r = (r - d) * 10.0;
        }
        // Round half up on the guard digit.
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::with_capacity(digits + 8);
        if neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if digits > 1 {
            s.push('.');
            for d in &ds[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push('e');
        s.push_str(&e.to_string());
        s
    }

    /// Parses a decimal literal such as `-1.2345e-20` to full precision.
    pub fn parse_decimal(text: &str) -> Option<Qd> {
        let t = text.trim();
        let (neg, body) = match t.as_bytes().first()? {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        match body.to_ascii_lowercase().as_str() {
            "inf" | "infinity" => {
                return Some(Qd::from_f64(if neg { f64::NEG_INFINITY } else { f64::INFINITY }))
            }
            "nan" => return Some(Qd::from_f64(f64::NAN)),
            _ => {}
        }
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(p) => (&body[..p], body[p + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let mut r = Qd::ZERO;
        let mut seen_digit = false;
        let mut frac_digits = 0i32;
        let mut in_frac = false;
        for ch in mant.chars() {
            match ch {
                '0'..='9' => {
                    r = r * 10.0 + (ch as u8 - b'0') as f64;
                    seen_digit = true;
                    if in_frac {
                        frac_digits += 1;
                    }
                }
                '.' if !in_frac => in_frac = true,
                _ => return None,
            }
        }
        if !seen_digit {
            return None;
        }
        let e10 = exp - frac_digits;
        if e10 != 0 {
            let p = Qd::from_f64(10.0).powi_qd(e10.abs());
            r = if e10 > 0 { r * p } else { r / p };
        }
        Some(if neg { -r } else { r })
    }
}

impl fmt::Debug for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Qd({})", self.to_decimal(64))
    }
}

impl fmt::Display for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map(|p| p + 1).unwrap_or(62);
        f.write_str(&self.to_decimal(digits))
    }
}

impl PartialEq for Qd {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Qd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        for i in 0..4 {
            match self.0[i].partial_cmp(&other.0[i])? {
                Ordering::Equal => continue,
                o => return Some(o),
            }
        }
        Some(Ordering::Equal)
    }
}

impl From<f64> for Qd {
    fn from(x: f64) -> Self {
        Qd::from_f64(x)
    }
}

impl From<i32> for Qd {
    fn from(x: i32) -> Self {
        Qd::from_f64(x as f64)
    }
}

impl Neg for Qd {
    type Output = Qd;
    fn neg(self) -> Qd {
        Qd([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

macro_rules! bin_ops {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $qq:ident, $qf:ident) => {
        impl $tr for Qd {
            type Output = Qd;
            #[inline]
            fn $m(self, rhs: Qd) -> Qd {
                $qq(self, rhs)
            }
        }
        impl $tr<f64> for Qd {
            type Output = Qd;
            #[inline]
            fn $m(self, rhs: f64) -> Qd {
                $qf(self, rhs)
            }
        }
        impl $atr for Qd {
            #[inline]
            fn $am(&mut self, rhs: Qd) {
                *self = $qq(*self, rhs);
            }
        }
        impl $atr<f64> for Qd {
            #[inline]
            fn $am(&mut self, rhs: f64) {
                *self = $qf(*self, rhs);
            }
        }
    };
}

#[inline]
fn add_qq(a: Qd, b: Qd) -> Qd {
    a.add_qd(b)
}
#[inline]
fn add_qf(a: Qd, b: f64) -> Qd {
    a.add_f64(b)
}
#[inline]
fn sub_qq(a: Qd, b: Qd) -> Qd {
    a.add_qd(-b)
}
#[inline]
fn sub_qf(a: Qd, b: f64) -> Qd {
    a.add_f64(-b)
}
#[inline]
fn mul_qq(a: Qd, b: Qd) -> Qd {
    a.mul_qd(b)
}
#[inline]
fn mul_qf(a: Qd, b: f64) -> Qd {
    a.mul_f64(b)
}
#[inline]
fn div_qq(a: Qd, b: Qd) -> Qd {
    a.div_qd(b)
}
#[inline]
fn div_qf(a: Qd, b: f64) -> Qd {
    a.div_qd(Qd::from_f64(b))
}
#[inline]
fn rem_qq(a: Qd, b: Qd) -> Qd {
    let q = (a / b).trunc();
    a - b * q
}
#[inline]
fn rem_qf(a: Qd, b: f64) -> Qd {
    rem_qq(a, Qd::from_f64(b))
}

bin_ops!(Add, add, AddAssign, add_assign, add_qq, add_qf);
bin_ops!(Sub, sub, SubAssign, sub_assign, sub_qq, sub_qf);
bin_ops!(Mul, mul, MulAssign, mul_assign, mul_qq, mul_qf);
bin_ops!(Div, div, DivAssign, div_assign, div_qq, div_qf);
bin_ops!(Rem, rem, RemAssign, rem_assign, rem_qq, rem_qf);

impl Zero for Qd {
    fn zero() -> Self {
        Qd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0[0] == 0.0
    }
}

impl One for Qd {
    fn one() -> Self {
        Qd::ONE
    }
}

impl Num for Qd {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        Qd::parse_decimal(s).ok_or_else(|| format!("invalid decimal literal '{s}'"))
    }
}

impl ToPrimitive for Qd {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        let v = t.0[0] + t.0[1];
        if v.is_finite() && v.abs() < 9.2e18 {
            Some(t.0[0] as i64 + t.0[1] as i64 + t.0[2] as i64)
        } else {
            None
        }
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        if t.0[0] < 0.0 || !t.0[0].is_finite() || t.0[0] >= 1.8e19 {
            None
        } else {
            Some((t.0[0] as i128 + t.0[1] as i128 + t.0[2] as i128) as u64)
        }
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0[0] + self.0[1])
    }
}

impl FromPrimitive for Qd {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(renorm4(hi, lo, 0.0, 0.0))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(renorm4(hi, lo, 0.0, 0.0))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Qd::from_f64(n))
    }
}

impl NumCast for Qd {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        if let Some(i) = n.to_i64() {
            if let Some(f) = n.to_f64() {
                if f == i as f64 {
                    return <Qd as FromPrimitive>::from_i64(i);
                }
            }
        }
        n.to_f64().map(Qd::from_f64)
    }
}

impl FloatConst for Qd {
    fn E() -> Self {
        Qd::E_C
    }
    fn FRAC_1_PI() -> Self {
        Qd::FRAC_1_PI_C
    }
    fn FRAC_1_SQRT_2() -> Self {
        Qd::FRAC_1_SQRT_2_C
    }
    fn FRAC_2_PI() -> Self {
        Qd::FRAC_2_PI_C
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Qd::FRAC_2_SQRT_PI_C
    }
    fn FRAC_PI_2() -> Self {
        Qd::FRAC_PI_2_C
    }
    fn FRAC_PI_3() -> Self {
        Qd::FRAC_PI_3_C
    }
    fn FRAC_PI_4() -> Self {
        Qd::FRAC_PI_4_C
    }
    fn FRAC_PI_6() -> Self {
        Qd::FRAC_PI_6_C
    }
    fn FRAC_PI_8() -> Self {
        Qd::FRAC_PI_8_C
    }
    fn LN_10() -> Self {
        Qd::LN_10_C
    }
    fn LN_2() -> Self {
        Qd::LN_2_C
    }
    fn LOG10_E() -> Self {
        Qd::LOG10_E_C
    }
    fn LOG2_E() -> Self {
        Qd::LOG2_E_C
    }
    fn PI() -> Self {
        Qd::PI_C
    }
    fn SQRT_2() -> Self {
        Qd::SQRT_2_C
    }
    fn TAU() -> Self {
        Qd::TWO_PI_C
    }
    fn LOG10_2() -> Self {
        Qd::LOG10_2_C
    }
    fn LOG2_10() -> Self {
        Qd::LOG2_10_C
    }
}

impl Float for Qd {
    fn nan() -> Self {
        Qd::from_f64(f64::NAN)
    }
    fn infinity() -> Self {
        Qd::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Qd::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Qd::from_f64(-0.0)
    }
    fn min_value() -> Self {
        Qd::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Self {
        // Smallest value that still carries full quad-double precision.
        Qd::from_f64(1.6259745436952323e-260)
    }
    fn max_value() -> Self {
        Qd::from_f64(f64::MAX)
    }
    fn epsilon() -> Self {
        Qd::from_f64(Qd::EPS)
    }
    fn is_nan(self) -> bool {
        self.0[0].is_nan()
    }
    fn is_infinite(self) -> bool {
        self.0[0].is_infinite()
    }
    fn is_finite(self) -> bool {
        self.0[0].is_finite()
    }
    fn is_normal(self) -> bool {
        self.0[0].is_normal()
    }
    fn classify(self) -> FpCategory {
        self.0[0].classify()
    }
    fn floor(self) -> Self {
        self.floor_qd()
    }
    fn ceil(self) -> Self {
        -(-self).floor_qd()
    }
    fn round(self) -> Self {
        self.nint()
    }
    fn trunc(self) -> Self {
        if self.0[0] >= 0.0 {
            self.floor_qd()
        } else {
            -(-self).floor_qd()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        if self.0[0].is_nan() {
            self
        } else if self.0[0].is_sign_negative() {
            -Qd::ONE
        } else {
            Qd::ONE
        }
    }
    fn is_sign_positive(self) -> bool {
        self.0[0].is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.0[0].is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Qd::ONE / self
    }
    fn powi(self, n: i32) -> Self {
        self.powi_qd(n)
    }
    fn powf(self, n: Self) -> Self {
        if n.is_zero_qd() {
            return Qd::ONE;
        }
        if self.is_zero_qd() {
            return if n.0[0] > 0.0 { Qd::ZERO } else { Qd::infinity() };
        }
        let ni = n.trunc();
        if ni == n && n.0[0].abs() < 1024.0 {
            return self.powi_qd(n.0[0] as i32);
        }
        (n * self.ln_qd()).exp_qd()
    }
    fn sqrt(self) -> Self {
        self.sqrt_qd()
    }
    fn exp(self) -> Self {
        self.exp_qd()
    }
    fn exp2(self) -> Self {
        (self * Qd::LN_2_C).exp_qd()
    }
    fn ln(self) -> Self {
        self.ln_qd()
    }
    fn log(self, base: Self) -> Self {
        self.ln_qd() / base.ln_qd()
    }
    fn log2(self) -> Self {
        self.ln_qd() * Qd::LOG2_E_C
    }
    fn log10(self) -> Self {
        self.ln_qd() * Qd::LOG10_E_C
    }
    fn max(self, other: Self) -> Self {
        if self >= other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self <= other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self <= other {
            Qd::ZERO
        } else {
            self - other
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero_qd() {
            return self;
        }
        let a = self.abs();
        let mut x = Qd::from_f64(a.0[0].cbrt());
        for _ in 0..3 {
            // Newton step for x^3 = a.
            x = x - (x * x * x - a) / (x * x * 3.0);
        }
        if self.0[0] < 0.0 {
            -x
        } else {
            x
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self.sqr() + other.sqr()).sqrt_qd()
    }
    fn sin(self) -> Self {
        self.sin_cos_qd().0
    }
    fn cos(self) -> Self {
        self.sin_cos_qd().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos_qd();
        s / c
    }
    fn asin(self) -> Self {
        let a = self.abs();
        if a.0[0] > 1.0 {
            return Qd::nan();
        }
        let c = ((Qd::ONE - self) * (Qd::ONE + self)).sqrt_qd();
        self.atan2_qd(c)
    }
    fn acos(self) -> Self {
        let a = self.abs();
        if a.0[0] > 1.0 {
            return Qd::nan();
        }
        let s = ((Qd::ONE - self) * (Qd::ONE + self)).sqrt_qd();
        s.atan2_qd(self)
    }
    fn atan(self) -> Self {
        self.atan2_qd(Qd::ONE)
    }
    fn atan2(self, other: Self) -> Self {
        self.atan2_qd(other)
    }
    fn sin_cos(self) -> (Self, Self) {
        self.sin_cos_qd()
    }
    fn exp_m1(self) -> Self {
        if self.0[0].abs() < 0.25 {
            // Direct series avoids the cancellation in exp(x) - 1.
            let inv = Qd::inv_fact();
            let mut s = self;
            let mut p = self;
            for f in inv.iter().skip(2) {
                p *= self;
                let t = p * *f;
                s += t;
                if t.0[0].abs() <= Qd::EPS * s.0[0].abs() {
                    break;
                }
            }
            s
        } else {
            self.exp_qd() - 1.0
        }
    }
    fn ln_1p(self) -> Self {
        if self.0[0].abs() < 0.25 {
            // Newton on exp_m1(y) = x.
            let mut y = Qd::from_f64(self.0[0].ln_1p());
            for _ in 0..3 {
                let e = y.exp_m1();
                y -= (e - self) / (e + 1.0);
            }
            y
        } else {
            (self + 1.0).ln_qd()
        }
    }
    fn sinh(self) -> Self {
        if self.0[0].abs() < 0.25 {
            let e = self.exp_m1();
            // sinh x = (e^x - e^-x)/2 = (em1 + em1/(em1+1))/2
            (e + e / (e + 1.0)).mul_pwr2(0.5)
        } else {
            let e = self.exp_qd();
            (e - Qd::ONE / e).mul_pwr2(0.5)
        }
    }
    fn cosh(self) -> Self {
        let e = self.exp_qd();
        (e + Qd::ONE / e).mul_pwr2(0.5)
    }
    fn tanh(self) -> Self {
        if self.0[0].abs() > 40.0 {
            return self.signum();
        }
        let e = self.mul_pwr2(2.0).exp_m1();
        e / (e + 2.0)
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = if a.0[0] < 0.5 {
            // log1p form keeps accuracy near zero.
            (a + a.sqr() / (Qd::ONE + (a.sqr() + 1.0).sqrt_qd())).ln_1p()
        } else {
            (a + (a.sqr() + 1.0).sqrt_qd()).ln_qd()
        };
        if self.0[0] < 0.0 {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        if self.0[0] < 1.0 {
            return Qd::nan();
        }
        (self + (self.sqr() - 1.0).sqrt_qd()).ln_qd()
    }
    fn atanh(self) -> Self {
        if self.0[0].abs() >= 1.0 {
            return if self.abs() == Qd::ONE { self.signum() * Qd::infinity() } else { Qd::nan() };
        }
        (self.mul_pwr2(2.0) / (Qd::ONE - self)).ln_1p().mul_pwr2(0.5)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.0[0].integer_decode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Qd, reference: &str, rel: f64) {
        let r = Qd::parse_decimal(reference).unwrap();
        let err = ((a - r) / r).abs();
        assert!(err.0[0] < rel, "got {a} want {reference} rel err {:e}", err.0[0]);
    }

    #[test]
    fn arithmetic_identities() {
        let third = Qd::ONE / Qd::from_f64(3.0);
        let back = third * 3.0;
        assert!((back - 1.0).abs().0[0] < 1e-63);
        let x = Qd::parse_decimal("1.2345678901234567890123456789012345678901234567890123456789").unwrap();
        let y = x.sqrt().sqr();
        assert!(((y - x) / x).abs().0[0] < 1e-62);
    }

    #[test]
    fn constants_match_reference() {
        close(Qd::PI_C, "3.14159265358979323846264338327950288419716939937510582097494459", 1e-62);
        close(Qd::from_f64(2.0).sqrt(), "1.41421356237309504880168872420969807856967187537694807317667974", 1e-62);
        close(Qd::ONE.exp(), "2.71828182845904523536028747135266249775724709369995957496696763", 1e-62);
        close(Qd::from_f64(2.0).ln(), "0.693147180559945309417232121458176568075500134360255254120680009", 1e-62);
    }

    #[test]
    fn transcendental_values() {
        // Reference values computed with mpmath at 80 digits.
        close(Qd::from_f64(0.5).sin(), "0.479425538604203000273287935215571388081803367940600675188616613", 1e-61);
        close(Qd::from_f64(0.5).cos(), "0.877582561890372716116281582603829651991645197109744052997610868", 1e-61);
        close(Qd::from_f64(10.0).sin(), "-0.544021110889369813404747661851377281683643012916223891574184012", 1e-60);
        close(Qd::from_f64(0.3).atan(), "0.291456794477867081810072285422280699777521513308109961458396224211", 1e-61);
        close(Qd::from_f64(0.25).acos(), "1.31811607165281796574566425464604046984639096659071471685354851741", 1e-61);
        close(Qd::from_f64(-3.5).exp(), "0.030197383422318500739786292363619845071660532247657006671340223085", 1e-61);
        close(Qd::from_f64(1e-20).ln(), "-46.0517018598809137352065576394777140043743421575994396342139131276", 1e-61);
        close(Qd::from_f64(2.5).powf(Qd::from_f64(1.75)), "4.97044205479406665733667297266783268808161819155297536464894152858", 1e-60);
        close(Qd::from_f64(1e-10).sinh(), "1.00000000000000003643386398216440824601437555217712832352290557e-10", 1e-60);
    }

    #[test]
    fn decimal_round_trip() {
        let x = Qd::PI_C * Qd::parse_decimal("1e-37").unwrap();
        let s = x.to_decimal(60);
        let y = Qd::parse_decimal(&s).unwrap();
        assert!(((x - y) / x).abs().0[0] < 1e-59);
        assert_eq!(Qd::from_f64(-0.00125).to_decimal(3), "-1.25e-3");
        assert_eq!(Qd::from_f64(9.9996).to_decimal(4), "1.000e1");
    }

    #[test]
    fn ordering_and_rounding() {
        let a = Qd::from_sum(1.0, 1e-30);
        assert!(a > Qd::ONE);
        assert_eq!(a.floor(), Qd::ONE);
        assert_eq!((-a).floor(), Qd::from_f64(-2.0));
        assert_eq!(Qd::from_f64(2.5).round(), Qd::from_f64(3.0));
    }
}
