//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion over all of them.

use std::f64::consts::{FRAC_PI_2, PI};

use num_traits::ToPrimitive;
use statrs::function::gamma::ln_gamma;

use zonalpd::energy::{energy_discrete, energy_perturbed, energy_uniform, funk_hecke_mc, DiscreteMeasure, PerturbSpec};
use zonalpd::jacobi::{eval_all, eval_normalized, gauss_jacobi_rule, values_at_one, QuadratureRule};
use zonalpd::kernels::{Kernel, Metric};
use zonalpd::posdef::{scan_riesz, table1, ScanOptions};
use zonalpd::spaces::{stream_rng, Field, Point};
use zonalpd::transform::{
    certify_coefficients, coefficients_de, coefficients_gj, poisson_closed, poisson_series, Sign, DEFAULT_MAX_LEVEL,
};
use zonalpd::{Qd, Real, Space};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sp(name: &str) -> Space {
    Space::parse(name).unwrap()
}

fn catalog() -> Vec<Space> {
    ["S2", "S4", "RP2", "RP3", "RP4", "CP2", "CP3", "HP2", "OP2"].iter().map(|s| sp(s)).collect()
}

fn d_of(space: &Space) -> f64 {
    2.0 * space.alpha + 2.0
}

fn criterion_1() -> Outcome {
    let rows = table1(16, 50).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    let expected_negative = [("RP4", 8), ("CP3", 6), ("HP2", 10), ("OP2", 8)];
    for (name, n) in expected_negative {
        let row = rows.iter().find(|r| r.space == name).unwrap();
        let e = &row.report.entries[n];
        let ok = e.sign == Sign::Negative && e.value_f64() + e.error < 0.0;
        pass &= ok;
        notes.push(format!("{name} c_{n} = {:.3e} (err {:.1e})", e.value_f64(), e.error));
    }
    for name in ["RP2", "RP3", "CP2"] {
        let row = rows.iter().find(|r| r.space == name).unwrap();
        let ok = row.report.entries[1..].iter().all(|e| e.sign == Sign::Positive);
        pass &= ok;
        notes.push(format!("{name} c_1..c_16 {}", if ok { "all +" } else { "not all +" }));
    }
    outcome(pass, notes.join("; "))
}

fn criterion_2() -> Outcome {
    let run = |name: &str| {
        let opts = ScanOptions { s_min: -1.0, s_max: 0.0, step: 0.05, nmax: 48, bisect_tol: 0.01, digits: 15 };
        scan_riesz(&sp(name), Metric::Geodesic, &opts).unwrap().transition.map(|t| t.estimate)
    };
    let rp2 = run("RP2");
    let rp3 = run("RP3");
    let in_range = |v: Option<f64>, lo: f64, hi: f64| v.is_some_and(|x| (lo..=hi).contains(&x));
    let pass = in_range(rp2, -0.64, -0.54) && in_range(rp3, -0.175, -0.075);
    outcome(pass, format!("RP2 transition {rp2:?} in [-0.64, -0.54]; RP3 transition {rp3:?} in [-0.175, -0.075]"))
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for space in catalog() {
        let top = (d_of(&space) - 0.5).min(4.0);
        for s in [-2.0, -1.0, 0.0, 1.0, top] {
            let r = certify_coefficients(&space, &Kernel::riesz_chordal(s), 32, 30).unwrap();
            checked += 1;
            if let Some(e) = r.entries[1..].iter().find(|e| !e.nonnegative()) {
                failures.push(format!("{} s={s} n={}", space.name(), e.n));
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} (space, s) pairs, failures: {failures:?}"))
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    for space in [sp("S2"), sp("S4")] {
        for s in [-1.0, 0.0, 0.5, d_of(&space) - 0.1] {
            let r = certify_coefficients(&space, &Kernel::riesz_geodesic(s), 32, 30).unwrap();
            if let Some(e) = r.entries[1..].iter().find(|e| !e.nonnegative()) {
                failures.push(format!("{} s={s} n={}", space.name(), e.n));
            }
        }
    }
    let cp2 = certify_coefficients(&sp("CP2"), &Kernel::riesz_geodesic(-1.0), 32, 30).unwrap();
    let negative = cp2.first_negative(1);
    let pass = failures.is_empty() && negative.is_some();
    outcome(pass, format!("sphere failures {failures:?}; CP2 s=-1 first certified negative n = {negative:?}"))
}

fn criterion_5() -> Outcome {
    let s2 = sp("S2");
    let k = Kernel::riesz_chordal(1.0);
    let r = certify_coefficients(&s2, &k, 20, 30).unwrap();
    let worst = r.entries.iter().map(|e| (e.value_f64() - 2.0).abs()).fold(0.0, f64::max);
    let e = energy_uniform(&s2, &k, 30).unwrap();
    let pass = worst < 1e-10 && (e.energy - 2.0).abs() < 1e-10 && (e.quadrature - 2.0).abs() < 1e-10;
    outcome(pass, format!("max |c_n - 2| = {worst:.1e}; energy {} (direct quadrature {})", e.energy, e.quadrature))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for space in catalog() {
        for metric in [Metric::Geodesic, Metric::Chordal] {
            for s in [0.5, 1.0, 1.5] {
                let k = Kernel::riesz(metric, s);
                let de = coefficients_de::<f64>(&space, &k, 16, DEFAULT_MAX_LEVEL).unwrap();
                let gj = coefficients_gj::<f64>(&space, &k, 16, 48).unwrap();
                for (a, b) in de.entries.iter().zip(&gj.entries) {
                    let diff = (a.value_f64() - b.value_f64()).abs();
                    worst = worst.max(diff);
                    if diff > a.error + b.error || diff > 1e-9 {
                        failures.push(format!("{} {k} n={} diff {diff:.1e}", space.name(), a.n));
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("worst |DE - GJ| = {worst:.2e}; failures {failures:?}"))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0;
    for (i, name) in ["S2", "RP2", "CP2", "HP2"].iter().enumerate() {
        let space = sp(name);
        let mut rng = stream_rng(1000 + i as u64, 0);
        let x = space.sample_point(&mut rng).unwrap();
        let y = space.sample_point(&mut rng).unwrap();
        for n in 1..=8 {
            let fh = funk_hecke_mc(&space, n, &x, &y, 1_000_000, 77 + n as u64).unwrap();
            checks += 1;
            if !fh.agrees(3.0) {
                failures.push(format!("{name} n={n}: {:.3e} +- {:.1e} vs {:.3e}", fh.lhs.mean, fh.lhs.stderr, fh.rhs));
            }
        }
    }
    let s2 = sp("S2");
    let e1 = Point::new(Field::R, vec![1.0, 0.0, 0.0]).unwrap();
    let e2 = Point::new(Field::R, vec![0.0, 1.0, 0.0]).unwrap();
    let perp = funk_hecke_mc(&s2, 1, &e1, &e2, 1_000_000, 5).unwrap();
    let same = funk_hecke_mc(&s2, 1, &e1, &e1, 1_000_000, 6).unwrap();
    let exact = perp.rhs == 0.0 && (same.rhs - 1.0 / 3.0).abs() < 1e-15 && perp.agrees(3.0) && same.agrees(3.0);
    if !exact {
        failures.push(format!("exact cases: perp {perp:?}, same {same:?}"));
    }
    outcome(failures.is_empty(), format!("{checks} random checks plus 2 exact; failures {failures:?}"))
}

fn criterion_8() -> Outcome {
    let s2 = sp("S2");
    let a = energy_perturbed(&s2, &Kernel::jacobi_unit(1, None), PerturbSpec { n: 1, epsilon: 0.1 }, 30, 1_000_000, 11)
        .unwrap();
    let cp2 = sp("CP2");
    let b = energy_perturbed(&cp2, &Kernel::riesz_chordal(1.0), PerturbSpec { n: 2, epsilon: 0.05 }, 30, 1_000_000, 12)
        .unwrap();
    let (ma, mb) = (a.mc.unwrap(), b.mc.unwrap());
    let exact = (a.closed_form - 1.0 / 900.0).abs() < 1e-15;
    let pass = exact && ma.agrees_with(a.closed_form, 3.0) && mb.agrees_with(b.closed_form, 3.0);
    outcome(
        pass,
        format!(
            "S2: closed {:.6e} vs MC {:.3e} +- {:.1e}; CP2: closed {:.6} vs MC {:.6} +- {:.1e}",
            a.closed_form, ma.mean, ma.stderr, b.closed_form, mb.mean, mb.stderr
        ),
    )
}

fn criterion_9() -> Outcome {
    // (alpha, beta) = (0,0), (1,0), (3,1), (7,3), (1,-1/2).
    let spaces = ["S2", "CP2", "HP2", "OP2", "RP4"];
    let mut worst: f64 = 0.0;
    let mut mass_err: f64 = 0.0;
    for name in spaces {
        let space = sp(name);
        let (a, b) = (space.alpha, space.beta);
        let diam = FRAC_PI_2 / space.kappa;
        for r in [0.3, 0.5, 0.9] {
            for j in 0..20 {
                let theta = diam * j as f64 / 19.0;
                let closed = poisson_closed::<f64>(&space, r, theta).unwrap();
                // The alternating series cancels heavily near r = 1, so it is summed in double-double.
                let (series, _) = poisson_series::<Qd>(&space, r, theta).unwrap();
                let series = series.to_f64_lossy();
                worst = worst.max((closed - series).abs() / closed.abs().max(1.0));
            }
            let rule: QuadratureRule<f64> = gauss_jacobi_rule(a, b, 200).unwrap();
            let mass: f64 = rule.weights.iter().sum();
            let integral =
                rule.integrate(|t| poisson_closed::<f64>(&space, r, space.theta_from_t(t).unwrap()).unwrap()) / mass;
            mass_err = mass_err.max((integral - 1.0).abs());
        }
    }
    outcome(
        worst < 1e-10 && mass_err < 1e-10,
        format!("max relative series/closed gap {worst:.1e}; max |int P_r dmu - 1| {mass_err:.1e}"),
    )
}

/// Integral of (1+t)^k against (1-t)^a (1+t)^b: 2^{a+b+1+k} B(b+k+1, a+1),
/// with the Beta function advanced from k = 0 by its exact ratio recurrence.
fn moment(a: f64, b: f64, k: usize) -> f64 {
    let base = ((a + b + 1.0) * 2f64.ln() + ln_gamma(b + 1.0) + ln_gamma(a + 1.0) - ln_gamma(a + b + 2.0)).exp();
    (0..k).fold(base, |m, j| m * 2.0 * (b + 1.0 + j as f64) / (a + b + 2.0 + j as f64))
}

/// Squared norm of P_n under the probability measure mu, from Gamma functions.
fn norm_oracle(a: f64, b: f64, n: usize) -> f64 {
    let nf = n as f64;
    let h = ((a + b + 1.0) * 2f64.ln() + ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0))
    .exp()
        / (2.0 * nf + a + b + 1.0);
    h / moment(a, b, 0)
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, ok: bool, note: String| {
        pass &= ok;
        notes.push(format!("{name} {} ({note})", if ok { "ok" } else { "FAILED" }));
    };

    // Quadrature exactness.
    let mut worst: f64 = 0.0;
    for space in catalog() {
        for m in [4, 10, 20] {
            let rule: QuadratureRule<f64> = gauss_jacobi_rule(space.alpha, space.beta, m).unwrap();
            let mass: f64 = rule.weights.iter().sum();
            for k in 0..2 * m {
                // Relative to the total mass, so the error of the Gamma-function
                // normalisation does not enter.
                let q = rule.integrate(|t| (1.0 + t).powi(k as i32)) / mass;
                let exact = moment(space.alpha, space.beta, k) / moment(space.alpha, space.beta, 0);
                worst = worst.max((q / exact - 1.0).abs());
            }
        }
    }
    record("quadrature exactness", worst <= 1e-13, format!("max rel err {worst:.1e}"));

    // Orthogonality and normalisation.
    let (mut off, mut norm): (f64, f64) = (0.0, 0.0);
    for space in catalog() {
        let (a, b) = (space.alpha, space.beta);
        let rule: QuadratureRule<f64> = gauss_jacobi_rule(a, b, 30).unwrap();
        let mass: f64 = rule.weights.iter().sum();
        let vals: Vec<Vec<f64>> = rule.nodes.iter().map(|&t| eval_all(a, b, 24, t)).collect();
        let at_one = values_at_one(a, 24);
        for n in 0..=24 {
            for k in 0..=24 {
                let ip: f64 = rule.weights.iter().zip(&vals).map(|(w, v)| w * v[n] * v[k]).sum::<f64>() / mass;
                if n != k {
                    off = off.max(ip.abs());
                } else {
                    let oracle = norm_oracle(a, b, n);
                    let mn = zonalpd::jacobi::dim_m_n(a, b, n);
                    norm = norm.max((ip / oracle - 1.0).abs()).max((at_one[n] * at_one[n] / mn / oracle - 1.0).abs());
                }
            }
        }
    }
    record("orthogonality", off < 1e-11 && norm < 1e-10, format!("max off-diagonal {off:.1e}, max norm rel err {norm:.1e}"));

    // Bounds on normalised Jacobi polynomials away from theta = 0.
    let mut violations = 0;
    let mut bound2_cases = 0;
    for (a, b) in [(5.0, 0.0), (8.0, 1.0), (10.0, 3.0), (6.0, -0.5)] {
        let mut theta0 = 0.3;
        while theta0 <= FRAC_PI_2 {
            for i in 0..=20 {
                let theta = theta0 + (FRAC_PI_2 - theta0) * i as f64 / 20.0;
                let p = eval_normalized(a, b, 40, (2.0 * theta).cos());
                for (n, pn) in p.iter().enumerate().skip(1) {
                    let nf = n as f64;
                    let s2 = theta0.sin().powi(2);
                    let b1 = (ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - (a - b) * (nf * s2).ln()).exp();
                    if pn.abs() > b1 * (1.0 + 1e-12) {
                        violations += 1;
                    }
                    let side = a - b - 1.0 - nf * theta0.tan().powi(2);
                    if side > 0.0 {
                        bound2_cases += 1;
                        let b2 = (ln_gamma(a + 1.0) - ln_gamma(a - b) + 2.0 * nf * theta0.cos().ln()
                            - (b + 1.0) * side.ln())
                        .exp();
                        if pn.abs() > b2 * (1.0 + 1e-12) {
                            violations += 1;
                        }
                    }
                }
            }
            theta0 += 0.05;
        }
    }
    record("pn bounds", violations == 0, format!("{violations} violations, {bound2_cases} cases of the second bound"));

    // Convergence of p_n^{(alpha, -1/2)}(cos 2 theta) to cos^{2n} theta.
    let alphas = [10.0, 20.0, 40.0, 80.0, 160.0];
    let sup = |a: f64, n: usize| {
        (0..=180)
            .map(|i| {
                let theta = FRAC_PI_2 * i as f64 / 180.0;
                (eval_normalized(a, -0.5, n, (2.0 * theta).cos())[n] - theta.cos().powi(2 * n as i32)).abs()
            })
            .fold(0.0, f64::max)
    };
    let mut monotone = true;
    let mut last_max: f64 = 0.0;
    for n in 1..=6 {
        let s: Vec<f64> = alphas.iter().map(|&a| sup(a, n)).collect();
        monotone &= s.windows(2).all(|w| w[1] < w[0]);
        last_max = last_max.max(s[4]);
    }
    record("uniform limit", monotone && last_max < 0.02, format!("max sup at alpha=160 is {last_max:.4}"));

    // Products of positive definite kernels.
    let pairs = [
        ("S2", Kernel::product(Kernel::riesz_chordal(1.0), Kernel::cos_power(2))),
        ("CP2", Kernel::product(Kernel::riesz_chordal(0.5), Kernel::riesz_chordal(0.5))),
    ];
    let mut bad = Vec::new();
    for (name, k) in &pairs {
        let r = certify_coefficients(&sp(name), k, 16, 30).unwrap();
        if r.entries.iter().any(|e| !e.nonnegative()) {
            bad.push(format!("{name} {k}"));
        }
    }
    record("Schur products", bad.is_empty(), format!("failing pairs {bad:?}"));

    // Four equally spaced points on a closed geodesic of RP2.
    let rp2 = sp("RP2");
    let pts: Vec<Point> = (0..4)
        .map(|k| {
            let a = k as f64 * PI / 4.0;
            Point::new(Field::R, vec![a.cos(), a.sin(), 0.0]).unwrap()
        })
        .collect();
    let m = DiscreteMeasure::new(rp2, pts, Some(vec![0.25, -0.25, 0.25, -0.25])).unwrap();
    let theta_sq = Kernel::linear_combination(vec![(-1.0, Kernel::riesz_geodesic(-2.0))]);
    let form = energy_discrete(&m, &theta_sq, false).unwrap();
    let riesz = energy_discrete(&m, &Kernel::riesz_geodesic(-2.0), false).unwrap();
    let ok = form > 0.0 && (form - PI * PI / 32.0).abs() < 1e-14 && riesz < 0.0;
    record("four-point obstruction", ok, format!("sum w w theta^2 = {form:.6}, energy of -theta^2 = {riesz:.6}"));

    outcome(pass, notes.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("logarithmic kernel signs on projective spaces", criterion_1),
        ("geodesic Riesz transition scans", criterion_2),
        ("chordal Riesz conditional positivity", criterion_3),
        ("geodesic Riesz on spheres and CP2", criterion_4),
        ("Legendre generating-function oracle", criterion_5),
        ("DE and Gauss-Jacobi agreement", criterion_6),
        ("Funk-Hecke Monte Carlo", criterion_7),
        ("perturbed energy identity", criterion_8),
        ("Poisson kernel representations", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64().to_f32().unwrap_or(f32::NAN);
        println!("{} criterion {}: {name}: {} [{secs:.1} s]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
