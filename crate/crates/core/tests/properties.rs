use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use zonalpd::energy::{energy_discrete, energy_perturbed, energy_uniform, DiscreteMeasure, PerturbSpec};
use zonalpd::kernels::{Kernel, Metric};
use zonalpd::spaces::{stream_rng, Isometry};
use zonalpd::transform::certify_coefficients;
use zonalpd::Space;

fn sp(name: &str) -> Space {
    Space::parse(name).unwrap()
}

const SAMPLED: [&str; 7] = ["S2", "S4", "RP2", "RP3", "RP4", "CP2", "HP2"];

#[test]
fn sampled_distances_follow_the_beta_law() {
    // u = (1 + t) / 2 of a uniform point against a fixed one is Beta(beta+1, alpha+1).
    let n = 20_000;
    for (i, name) in SAMPLED.iter().enumerate() {
        let space = sp(name);
        let z = space.base_point().unwrap();
        let mut rng = stream_rng(4242, i as u64);
        let mut u: Vec<f64> = (0..n)
            .map(|_| (1.0 + space.distance_t(&space.sample_point(&mut rng).unwrap(), &z).unwrap()) / 2.0)
            .collect();
        u.sort_by(f64::total_cmp);
        let law = Beta::new(space.beta + 1.0, space.alpha + 1.0).unwrap();
        let d = u
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = law.cdf(x);
                (f - k as f64 / n as f64).abs().max(((k + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // Critical value at level 0.001.
        assert!(d < 1.95 / (n as f64).sqrt(), "{name}: KS statistic {d}");
    }
}

#[test]
fn mean_of_t_on_cp2() {
    let space = sp("CP2");
    let z = space.base_point().unwrap();
    let mut rng = stream_rng(7, 0);
    let n = 200_000;
    let ts: Vec<f64> =
        (0..n).map(|_| space.distance_t(&space.sample_point(&mut rng).unwrap(), &z).unwrap()).collect();
    let mean = ts.iter().sum::<f64>() / n as f64;
    let var = ts.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = (space.beta - space.alpha) / (space.alpha + space.beta + 2.0);
    assert!((want + 1.0 / 3.0).abs() < 1e-15);
    assert!((mean - want).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
}

#[test]
fn uniform_energy_matches_the_zeroth_coefficient() {
    let mut zoo = Vec::new();
    for metric in [Metric::Geodesic, Metric::Chordal] {
        zoo.push(Kernel::riesz(metric, 0.5));
        zoo.push(Kernel::riesz(metric, 1.0));
        zoo.push(Kernel::riesz(metric, 0.0));
    }
    for name in ["S2", "S4", "RP2", "RP3", "RP4", "CP2", "CP3", "HP2", "OP2"] {
        let space = sp(name);
        for k in &zoo {
            let e = energy_uniform(&space, k, 20).unwrap();
            assert!(e.consistent(), "{name} {k}: {e:?}");
            assert!((e.energy - e.quadrature).abs() < 1e-10, "{name} {k}: {e:?}");
        }
    }
}

#[test]
fn invariant_measure_minimises_energy_for_cpd_kernels() {
    let k = Kernel::riesz_chordal(1.0);
    for name in ["S2", "RP2", "CP2", "HP2"] {
        let space = sp(name);
        for n in 1..=16 {
            let e = energy_perturbed(&space, &k, PerturbSpec { n, epsilon: 0.01 }, 20, 0, 0).unwrap();
            assert!(e.closed_form - e.base_energy >= -e.closed_form_error, "{name} n={n}: {e:?}");
        }
    }
}

#[test]
fn negative_coefficients_lower_the_energy() {
    let log = Kernel::riesz_geodesic(0.0);
    for (name, n) in [("CP3", 6), ("RP4", 8), ("HP2", 10)] {
        let space = sp(name);
        let e = energy_perturbed(&space, &log, PerturbSpec { n, epsilon: 0.05 }, 30, 0, 0).unwrap();
        assert!(e.closed_form + e.closed_form_error < e.base_energy, "{name}: {e:?}");
    }
}

#[test]
fn jacobi_kernels_have_unit_coefficients() {
    for name in ["S2", "RP3", "CP3", "OP2"] {
        let space = sp(name);
        for k in [0, 3, 7] {
            let r = certify_coefficients(&space, &Kernel::jacobi_unit(k, None), 10, 20).unwrap();
            for e in &r.entries {
                let want = if e.n == k { 1.0 } else { 0.0 };
                assert!((e.value_f64() - want).abs() < 1e-12, "{name} k={k} n={}: {}", e.n, e.value_f64());
            }
        }
    }
}

fn space_strategy() -> impl Strategy<Value = Space> {
    prop::sample::select(SAMPLED.to_vec()).prop_map(sp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_mass_energy_of_cpd_kernel_is_nonnegative(
        space in space_strategy(),
        seed in any::<u64>(),
        raw in prop::collection::vec(-1.0f64..1.0, 2..=12),
    ) {
        let mut rng = stream_rng(seed, 0);
        let points = (0..raw.len()).map(|_| space.sample_point(&mut rng).unwrap()).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let weights = raw.iter().map(|w| w - mean).collect();
        let m = DiscreteMeasure::new(space, points, Some(weights)).unwrap();
        for k in [Kernel::riesz_chordal(-1.0), Kernel::riesz_chordal(-2.0)] {
            let e = energy_discrete(&m, &k, true).unwrap();
            prop_assert!(e >= -1e-10, "{} {k}: {e}", m.space.name());
        }
    }

    #[test]
    fn distances_are_isometry_invariant(space in space_strategy(), seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 1);
        let x = space.sample_point(&mut rng).unwrap();
        let y = space.sample_point(&mut rng).unwrap();
        let g = Isometry::random(&space, 6, &mut rng).unwrap();
        let before = space.distance_t(&x, &y).unwrap();
        let after = space.distance_t(&g.apply(&x), &g.apply(&y)).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.abs().max(1e-3));
    }

    #[test]
    fn perturbation_at_zero_strength_is_the_base_energy(n in 1usize..8, s in 0.1f64..1.5) {
        let space = sp("S4");
        let e = energy_perturbed(&space, &Kernel::riesz_chordal(s), PerturbSpec { n, epsilon: 0.0 }, 15, 0, 0).unwrap();
        prop_assert_eq!(e.closed_form, e.base_energy);
    }
}
