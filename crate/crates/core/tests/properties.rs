//! Structural properties of the map, its fixed points and its stability tests.

use fracmap::model::{fixed_point, vector_field};
use fracmap::stability::{classify, interior_char_coeffs, jacobian, Classification};
use fracmap::thresholds::thresholds;
use fracmap::{
    basic_reproduction_number, fixed_points, step, Discretization, FixedPointKind, ModelParams,
    State,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example2() -> ModelParams {
    ModelParams::new(15.0, 40.0, 0.006, 14.5, 0.0019, 16.0, 11.1, 6.0).unwrap()
}

fn example3() -> ModelParams {
    ModelParams::new(22.0, 300.0, 0.06, 15.5, 2.3, 15.0, 10.0, 8.3).unwrap()
}

prop_compose! {
    fn any_params()(
        r in 0.1f64..30.0,
        k in 1.0f64..500.0,
        lambda in 1e-4f64..0.2,
        m in 0.1f64..20.0,
        mu in 1e-3f64..5.0,
        a in 0.1f64..30.0,
        theta in 0.01f64..20.0,
        d in 0.01f64..10.0,
    ) -> ModelParams {
        ModelParams::new(r, k, lambda, m, mu, a, theta, d).unwrap()
    }
}

/// Parameters for which the interior point exists, drawn by rejection.
fn interior_params(rng: &mut impl Rng) -> ModelParams {
    loop {
        let p = ModelParams::new(
            rng.gen_range(0.5..30.0),
            rng.gen_range(10.0..400.0),
            rng.gen_range(1e-3..0.1),
            rng.gen_range(0.5..20.0),
            rng.gen_range(1e-3..3.0),
            rng.gen_range(1.0..30.0),
            rng.gen_range(0.5..15.0),
            rng.gen_range(0.05..9.0),
        )
        .unwrap();
        if fixed_point(&p, FixedPointKind::Interior).exists {
            return p;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fixed_point_residual(p in any_params(), alpha in 0.05f64..=1.0, s in 1e-3f64..2.0) {
        let dsc = Discretization::new(alpha, s).unwrap();
        for fp in fixed_points(&p).into_iter().filter(|f| f.exists) {
            let next = step(&p, &dsc, &fp.coords);
            let res = next.dist(&fp.coords) / (1.0 + fp.coords.max_abs());
            prop_assert!(res < 1e-12, "{} residual {}", fp.kind, res);
        }
    }

    #[test]
    fn existence_logic(p in any_params()) {
        let fps = fixed_points(&p);
        let r0 = basic_reproduction_number(&p);
        prop_assert!(fps[0].exists && fps[1].exists);
        prop_assert_eq!(fps[2].exists, r0 > 1.0);
        if fps[3].exists {
            prop_assert!(fps[2].exists);
            let c = fps[3].coords;
            prop_assert!(c.x > 0.0 && c.y > 0.0 && c.z > 0.0);
        }
    }

    #[test]
    fn euler_equivalence(p in any_params(), s in 1e-3f64..1.0,
                         x in 0.0f64..100.0, y in 0.0f64..100.0, z in 0.0f64..100.0) {
        let st = State::new(x, y, z);
        let f = vector_field(&p, &st);
        let euler = State::new(st.x + s * f.x, st.y + s * f.y, st.z + s * f.z);
        let dsc = Discretization::new(1.0, s).unwrap();
        prop_assert_eq!(step(&p, &dsc, &st), euler);
    }

    #[test]
    fn origin_never_sink(p in any_params(), alpha in 0.05f64..=1.0, s in 1e-4f64..5.0) {
        let dsc = Discretization::new(alpha, s).unwrap();
        let r = classify(&p, &dsc, &fixed_points(&p)[0]).unwrap();
        prop_assert_ne!(r.classification, Classification::Sink);
        prop_assert!(r.moduli[0] > 1.0);
    }

    #[test]
    fn coefficient_increasing_in_step(alpha in 0.05f64..=1.0, s in 1e-4f64..5.0, ds in 1e-6f64..1.0) {
        let a = Discretization::new(alpha, s).unwrap().rho();
        let b = Discretization::new(alpha, s + ds).unwrap().rho();
        prop_assert!(b > a && a > 0.0);
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 300 {
        let p = interior_params(&mut rng);
        let dsc = Discretization::new(rng.gen_range(0.1..=1.0), rng.gen_range(1e-3..0.5)).unwrap();
        let e = fixed_point(&p, FixedPointKind::Interior).coords;
        let st = State::new(
            e.x * rng.gen_range(0.5..1.5),
            e.y * rng.gen_range(0.5..1.5),
            e.z * rng.gen_range(0.5..1.5),
        );
        let j = jacobian(&p, &dsc, &st).unwrap();
        let base = st.to_array();
        for col in 0..3 {
            let h = 1e-6 * base[col].abs().max(1.0);
            let (mut plus, mut minus) = (base, base);
            plus[col] += h;
            minus[col] -= h;
            let fp = step(&p, &dsc, &plus.into()).to_array();
            let fm = step(&p, &dsc, &minus.into()).to_array();
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                let an = j.entries[row][col];
                // scale by the column's largest entry so near-zero entries are judged fairly
                let scale = (0..3)
                    .map(|r| j.entries[r][col].abs())
                    .fold(0.0, f64::max)
                    .max(1e-12);
                assert!(
                    (fd - an).abs() / scale < 1e-6,
                    "entry ({row},{col}): fd {fd} analytic {an}"
                );
            }
        }
        checked += 1;
    }
}

#[test]
fn jury_agrees_with_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut stable, mut attempts) = (0, 0, 0);
    while checked < 2000 {
        attempts += 1;
        assert!(attempts < 100_000);
        let p = interior_params(&mut rng);
        let alpha = rng.gen_range(0.1..=1.0);
        let bound = match thresholds(&p, alpha).unwrap().interior_bound() {
            Some(b) => b,
            None => continue,
        };
        let s = bound * rng.gen_range(0.01f64..2.0);
        let dsc = Discretization::new(alpha, s).unwrap();
        let c = interior_char_coeffs(&p, &dsc).unwrap();
        let jury = c.jury();
        let e = fixed_point(&p, FixedPointKind::Interior);
        let report = classify(&p, &dsc, &e).unwrap();
        let near_boundary = jury.iter().any(|j| j.margin.abs() < 1e-8)
            || report.moduli.iter().any(|m| (m - 1.0).abs() < 1e-8);
        if near_boundary {
            continue;
        }
        let jury_ok = jury.iter().all(|j| j.holds());
        let eig_ok = report.moduli.iter().all(|&m| m < 1.0);
        assert_eq!(
            jury_ok, eig_ok,
            "params {p:?} alpha {alpha} s {s} moduli {:?}",
            report.moduli
        );
        checked += 1;
        stable += eig_ok as usize;
    }
    // both verdicts must actually be exercised
    assert!(stable > 200 && stable < 1800, "stable = {stable}");
}

#[test]
fn interior_bound_increases_with_order() {
    let alphas = [0.3, 0.4, 0.45, 0.55, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95];
    for p in [example2(), example3()] {
        let sets: Vec<_> = alphas.iter().map(|&a| thresholds(&p, a).unwrap()).collect();
        for w in sets.windows(2) {
            assert!(w[1].s8.unwrap() > w[0].s8.unwrap());
            assert!(w[1].s9.value().unwrap() > w[0].s9.value().unwrap());
            assert!(w[1].interior_bound().unwrap() > w[0].interior_bound().unwrap());
        }
    }
}

#[test]
fn classification_switches_at_interior_bound() {
    let p = example2();
    let bound = thresholds(&p, 0.8).unwrap().interior_bound().unwrap();
    let e = fixed_point(&p, FixedPointKind::Interior);
    let at = |s: f64| classify(&p, &Discretization::new(0.8, s).unwrap(), &e).unwrap();
    assert_eq!(at(bound - 5e-5).classification, Classification::Sink);
    assert_ne!(at(bound + 5e-5).classification, Classification::Sink);
}
