//! Characteristic cubic, root finding and the Matignon criterion.

use std::f64::consts::PI;

use ecoepi_core::stability::{sign_case_checks, MatignonStatus, SignCase};
use ecoepi_core::{
    characteristic_cubic, classify_equilibrium, cubic_roots, equilibria, jacobian, matignon_check,
    rhs, CubicCharacteristic, EigenSpectrum, EquilibriumKind, ModelParams, Preset, StabilityLabel,
    State,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Weierstrass iteration, independent of the companion-matrix solver.
fn durand_kerner(a1: f64, a2: f64, a3: f64) -> [Complex64; 3] {
    let p = |z: Complex64| ((z + a1) * z + a2) * z + a3;
    let seed = Complex64::new(0.4, 0.9);
    let radius = 1.0 + a1.abs().max(a2.abs()).max(a3.abs());
    let mut z = [seed * radius, seed.powu(2) * radius, seed.powu(3) * radius];
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..3 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * radius {
            break;
        }
    }
    z
}

fn random_cubic(rng: &mut StdRng) -> CubicCharacteristic {
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    CubicCharacteristic::from_coefficients(
        scale * rng.gen_range(-5.0..5.0),
        scale * scale * rng.gen_range(-5.0..5.0),
        scale * scale * scale * rng.gen_range(-5.0..5.0),
    )
}

fn random_spectrum(rng: &mut StdRng) -> EigenSpectrum {
    let mut re = || rng.gen_range(-3.0..3.0);
    let (a, b, c) = (re(), re(), re());
    if rng.gen_bool(0.5) {
        EigenSpectrum::from_eigenvalues([a, b, c].map(|x| Complex64::new(x, 0.0)))
    } else {
        let im = c.abs() + 0.01;
        EigenSpectrum::from_eigenvalues([
            Complex64::new(a, 0.0),
            Complex64::new(b, im),
            Complex64::new(b, -im),
        ])
    }
}

#[test]
fn roots_agree_with_durand_kerner() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..1000 {
        let cubic = random_cubic(&mut rng);
        let ours = cubic_roots(&cubic).eigenvalues;
        let reference = durand_kerner(cubic.a1, cubic.a2, cubic.a3);
        let scale = ours.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        for z in reference {
            let nearest = ours
                .iter()
                .map(|w| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 1e-6 * scale, "{cubic:?}: {z} not among {ours:?}");
        }
    }
}

#[test]
fn discriminant_identity_on_random_cubics() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..1000 {
        let cubic = random_cubic(&mut rng);
        let roots = cubic_roots(&cubic);
        let gap = (cubic.discriminant - roots.root_discriminant()).abs();
        assert!(
            gap <= 1e-6 * cubic.discriminant_scale(),
            "{cubic:?}: {} vs {}",
            cubic.discriminant,
            roots.root_discriminant()
        );
    }
}

#[test]
fn discriminant_sign_lemma() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..1000 {
        let cubic = random_cubic(&mut rng);
        let roots = cubic_roots(&cubic);
        let d = roots.root_discriminant();
        if !roots.all_real() {
            assert!(d <= 0.0, "{cubic:?}: complex pair with D = {d}");
        } else if !roots.has_repeated(1e-6) {
            assert!(d > 0.0, "{cubic:?}: distinct real roots with D = {d}");
        }
    }
}

#[test]
fn matignon_is_monotone_in_alpha() {
    let mut rng = StdRng::seed_from_u64(14);
    let grid: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
    for _ in 0..1000 {
        let spectrum = random_spectrum(&mut rng);
        for &alpha in grid.iter().rev() {
            let status = matignon_check(&spectrum, alpha).unwrap().status;
            if status == MatignonStatus::Stable {
                // stable here implies stable for every smaller order
                for &lower in grid.iter().filter(|&&a| a < alpha) {
                    assert_eq!(
                        matignon_check(&spectrum, lower).unwrap().status,
                        MatignonStatus::Stable,
                        "{spectrum:?} at {lower}"
                    );
                }
                break;
            }
        }
    }
}

#[test]
fn integer_order_matches_real_parts() {
    let mut rng = StdRng::seed_from_u64(15);
    let mut compared = 0;
    for _ in 0..1000 {
        let spectrum = random_spectrum(&mut rng);
        let outcome = matignon_check(&spectrum, 1.0).unwrap();
        if outcome.margin.abs() < 1e-9 || outcome.zero_eigenvalue {
            continue;
        }
        compared += 1;
        let stable = outcome.status == MatignonStatus::Stable;
        assert_eq!(stable, spectrum.max_real_part() < 0.0, "{spectrum:?}");
    }
    assert!(compared > 950);
}

#[test]
fn critical_order_matches_status() {
    let s = EigenSpectrum::from_eigenvalues([
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ]);
    for alpha in [0.3, 0.9, 0.999] {
        assert_eq!(
            matignon_check(&s, alpha).unwrap().status,
            MatignonStatus::Stable
        );
    }
    let at_one = matignon_check(&s, 1.0).unwrap();
    assert_eq!(at_one.status, MatignonStatus::Marginal);
    assert!((at_one.critical_order - 1.0).abs() < 1e-15);

    let angle = 0.4 * PI;
    let z = Complex64::from_polar(1.0, angle);
    let s = EigenSpectrum::from_eigenvalues([Complex64::new(-2.0, 0.0), z, z.conj()]);
    let o = matignon_check(&s, 0.7).unwrap();
    assert!((o.critical_order - 0.8).abs() < 1e-12);
    assert_eq!(o.status, MatignonStatus::Stable);
    assert_eq!(
        matignon_check(&s, 0.9).unwrap().status,
        MatignonStatus::Unstable
    );
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(16);
    let h = 1e-6;
    for preset in Preset::ALL {
        let p = preset.params();
        for _ in 0..20 {
            let x = State::new(
                rng.gen_range(0.0..60.0),
                rng.gen_range(0.0..60.0),
                rng.gen_range(0.0..60.0),
            );
            let j = jacobian(&p, x).unwrap();
            for col in 0..3 {
                let mut up = x.to_array();
                let mut down = x.to_array();
                up[col] += h;
                down[col] -= h;
                let fu = rhs(&p, State::new(up[0], up[1], up[2])).unwrap();
                let fd = rhs(&p, State::new(down[0], down[1], down[2])).unwrap();
                for row in 0..3 {
                    let fd_entry = (fu[row] - fd[row]) / (2.0 * h);
                    assert!(
                        (j[(row, col)] - fd_entry).abs() < 1e-5,
                        "{preset} at {x}: J[{row},{col}] = {} vs {fd_entry}",
                        j[(row, col)]
                    );
                }
            }
        }
    }
}

fn interior(params: &ModelParams) -> ecoepi_core::Equilibrium {
    equilibria(params)
        .unwrap()
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::EStar)
        .unwrap()
}

#[test]
fn example1_cubic_and_verdict() {
    let p = Preset::Example1.params();
    let e = interior(&p);
    let c = characteristic_cubic(&p, e.coords).unwrap();
    assert!((c.discriminant - 0.0077).abs() < 5e-4);
    assert!((c.a1 - 1.0879).abs() < 5e-4);
    assert!((c.a3 - 0.0028).abs() < 5e-4);
    assert!((c.routh_product - 0.2909).abs() < 5e-4);
    for alpha in [0.6, 0.75, 0.85, 0.95, 1.0] {
        let v = classify_equilibrium(&p, &e, alpha).unwrap();
        assert!(v.label.is_stable(), "alpha {alpha}: {}", v.label);
        assert_eq!(v.sign_case, Some(SignCase::I));
        assert_eq!(v.case_agrees, Some(true));
    }
}

#[test]
fn unstable_example_cubic_and_verdicts() {
    let p = Preset::Example1Unstable.params();
    let e = interior(&p);
    let c = characteristic_cubic(&p, e.coords).unwrap();
    assert!((c.discriminant + 463.8995).abs() < 0.05);
    assert!((c.a1 + 0.9276).abs() < 5e-4);
    assert!((c.a2 + 0.5775).abs() < 5e-4);

    let v = classify_equilibrium(&p, &e, 0.85).unwrap();
    assert!(!v.label.is_stable());
    assert_eq!(v.sign_case, Some(SignCase::III));
    assert_eq!(v.case_agrees, Some(true));

    // case (ii) needs A1, A2 >= 0, which fails here; the eigenvalues decide
    let v = classify_equilibrium(&p, &e, 0.6).unwrap();
    let ii = v
        .sign_cases
        .iter()
        .find(|c| c.case == SignCase::II)
        .unwrap();
    assert!(!ii.holds);
    assert!(ii.failed.contains(&"A1 >= 0") && ii.failed.contains(&"A2 >= 0"));
    assert!((v.critical_order - 0.5089).abs() < 5e-4);
    assert_eq!(v.label.is_stable(), 0.6 < v.critical_order);
    assert!(classify_equilibrium(&p, &e, 0.5).unwrap().label.is_stable());
}

#[test]
fn boundary_equilibria() {
    let p = Preset::Example1.params();
    let eqs = equilibria(&p).unwrap();
    let e0 = classify_equilibrium(&p, &eqs[0], 0.9).unwrap();
    assert_eq!(e0.label, StabilityLabel::Unstable);
    let e1 = classify_equilibrium(&p, &eqs[1], 0.9).unwrap();
    assert!(!e1.label.is_stable());

    let ex2 = Preset::Example2.params();
    let e2 = &equilibria(&ex2).unwrap()[2];
    let v = classify_equilibrium(&ex2, e2, 0.9).unwrap();
    assert!(v.label.is_stable());

    let ex3 = Preset::Example3.params();
    let e1 = &equilibria(&ex3).unwrap()[1];
    assert!(classify_equilibrium(&ex3, e1, 0.9)
        .unwrap()
        .label
        .is_stable());
    let missing = &equilibria(&ex3).unwrap()[3];
    assert!(classify_equilibrium(&ex3, missing, 0.9).is_err());
}

#[test]
fn routh_hurwitz_case_always_agrees() {
    let mut rng = StdRng::seed_from_u64(17);
    let mut tally = [[0usize; 2]; 4];
    let mut checked = 0;
    while checked < 1000 {
        let d = rng.gen_range(0.01..0.3);
        let p = ModelParams::new(
            rng.gen_range(0.5..5.0),
            rng.gen_range(10.0..200.0),
            rng.gen_range(0.005..0.2),
            rng.gen_range(0.1..1.0),
            rng.gen_range(0.05..0.5),
            rng.gen_range(1.0..30.0),
            rng.gen_range(d..1.0),
            d,
        )
        .unwrap();
        let e = interior(&p);
        if !e.exists {
            continue;
        }
        checked += 1;
        let alpha = rng.gen_range(0.05..=1.0);
        let v = classify_equilibrium(&p, &e, alpha).unwrap();
        let cubic = v.cubic.unwrap();
        assert_eq!(v.sign_cases, sign_case_checks(&cubic, alpha));
        if let (Some(case), Some(agrees)) = (v.sign_case, v.case_agrees) {
            tally[case as usize][usize::from(agrees)] += 1;
            if case == SignCase::I && v.matignon.margin.abs() > 1e-9 {
                assert!(agrees, "{p:?} alpha {alpha}: {:?}", v.notes);
            }
        }
    }
    for (case, [disagree, agree]) in SignCase::ALL.iter().zip(tally) {
        println!("case {case}: {agree} agree, {disagree} disagree");
    }
}
