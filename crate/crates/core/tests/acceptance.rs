//! Acceptance suite. Each test checks one criterion at its stated tolerance
//! and prints a single PASS/FAIL line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use gjms_core::asymptotic::{mk_surface_integral, DEFAULT_RADII};
use gjms_core::calculus::{covariance_study, second_term_study};
use gjms_core::moebius::stays_clear_of_poles;
use gjms_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn d(n: usize, k: usize) -> DimPair {
    DimPair::new(n, k).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn verdict(id: u32, name: &str, pass: bool, elapsed: Duration, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {tag} {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_moebius_identity() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    while trials < 1000 {
        let n = rng.random_range(2..6);
        let map = MoebiusMap::random(n, 5, &mut rng);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if !(stays_clear_of_poles(&map, &x, 0.25) && stays_clear_of_poles(&map, &y, 0.25)) {
            continue;
        }
        let r = moebius_identity_residual(&map, &x, &y).unwrap();
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        worst = worst.max(r.abs() / (1.0 + d2));
        trials += 1;
    }
    let elapsed = t.elapsed();
    let pass = worst < 1e-12 && elapsed < Duration::from_secs(1);
    verdict(1, "moebius identity", pass, elapsed, format!("{trials} trials, max scaled residual {worst:.3e}"));
}

#[test]
fn criterion_02_dirac_constant() {
    let t = Instant::now();
    let test = ScalarField::cutoff(1.0, 10);
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, k) in [(3, 1), (5, 1), (5, 2), (7, 2)] {
        let dims = d(n, k);
        let exact = gjms_constant(dims) * test.eval(&vec![0.0; n]);
        let errs: Vec<f64> = (0..3)
            .map(|level| {
                let v = dirac_pairing(dims, &test, &DiracGrid::level(dims, 1.5, level)).unwrap();
                rel(v, exact)
            })
            .collect();
        let monotone = errs.windows(2).all(|w| w[1] < w[0]);
        pass &= monotone && errs[2] < 1e-3;
        detail.push(format!("{dims}: {:.2e}/{:.2e}/{:.2e}", errs[0], errs[1], errs[2]));
    }
    let elapsed = t.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    verdict(2, "dirac constant", pass, elapsed, detail.join(", "));
}

#[test]
fn criterion_03_mass_cross_validation() {
    let t = Instant::now();
    let cases = [
        (lens_group(2, &[1, 1]).unwrap(), d(3, 1)),
        (lens_group(3, &[1, 1]).unwrap(), d(3, 1)),
        (lens_group(7, &[1, 2]).unwrap(), d(3, 1)),
        (lens_group(2, &[1, 1, 1]).unwrap(), d(5, 2)),
    ];
    let mut worst: f64 = 0.0;
    for (i, (g, dims)) in cases.iter().enumerate() {
        for xi in sample_sphere_points(g.ambient(), 5, 300 + i as u64) {
            let exact = mass_closed_form(g, &xi, *dims).unwrap().value;
            let limit = mass_via_limit(g, &xi, *dims, &space_forms::DEFAULT_LIMIT_RADII).unwrap().value;
            worst = worst.max(rel(limit, exact));
        }
    }
    let elapsed = t.elapsed();
    let pass = worst < 1e-6 && elapsed < Duration::from_secs(30);
    verdict(3, "mass cross-validation", pass, elapsed, format!("max relative deviation {worst:.3e}"));
}

#[test]
fn criterion_04_sphere_zero_and_positivity() {
    let t = Instant::now();
    let mut pass = true;
    for (ambient, dims) in [(4, d(3, 1)), (6, d(5, 1)), (6, d(5, 2))] {
        for xi in sample_sphere_points(ambient, 10, 400) {
            pass &= mass_closed_form(&SpaceFormGroup::trivial(ambient), &xi, dims).unwrap().value == 0.0;
        }
    }
    let zero_ok = pass;
    let groups = [
        (lens_group(2, &[1, 1]).unwrap(), d(3, 1)),
        (lens_group(3, &[1, 1]).unwrap(), d(3, 1)),
        (lens_group(5, &[1, 2]).unwrap(), d(3, 1)),
        (lens_group(7, &[1, 2]).unwrap(), d(3, 1)),
        (lens_group(8, &[1, 3]).unwrap(), d(3, 1)),
        (lens_group(2, &[1, 1, 1]).unwrap(), d(5, 1)),
        (lens_group(2, &[1, 1, 1]).unwrap(), d(5, 2)),
        (lens_group(3, &[1, 1, 1]).unwrap(), d(5, 2)),
        (lens_group(4, &[1, 1, 3]).unwrap(), d(5, 2)),
    ];
    let mut min_mass = f64::INFINITY;
    for (i, (g, dims)) in groups.iter().enumerate() {
        for xi in sample_sphere_points(g.ambient(), 20, 410 + i as u64) {
            min_mass = min_mass.min(mass_closed_form(g, &xi, *dims).unwrap().value);
        }
    }
    pass &= min_mass > 0.0;
    verdict(
        4,
        "sphere mass zero and positivity",
        pass,
        t.elapsed(),
        format!("trivial group exactly zero: {zero_ok}, min mass over nontrivial groups {min_mass:.6e}"),
    );
}

#[test]
fn criterion_05_covering_identity() {
    let t = Instant::now();
    let dims = d(3, 1);
    let l4 = lens_group(4, &[1, 1]).unwrap();
    let minus = l4.subgroup(&[&l4.elements()[1] * &l4.elements()[1]]).unwrap();
    let l8 = lens_group(8, &[1, 1]).unwrap();
    let g = l8.elements()[1].clone();
    let g2 = &g * &g;
    let g4 = &g2 * &g2;
    let chain = [
        SpaceFormGroup::trivial(4),
        l8.subgroup(&[g4]).unwrap(),
        l8.subgroup(&[g2]).unwrap(),
        l8.clone(),
    ];
    let mut pairs = vec![(minus, l4)];
    for i in 0..chain.len() {
        for j in i + 1..chain.len() {
            pairs.push((chain[i].clone(), chain[j].clone()));
        }
    }
    let mut worst: f64 = 0.0;
    for (sub, full) in &pairs {
        for xi in sample_sphere_points(4, 10, 500) {
            worst = worst.max(covering_mass_residual(sub, full, &xi, dims).unwrap());
        }
    }
    let pass = worst < 1e-12;
    verdict(5, "covering identity", pass, t.elapsed(), format!("{} pairs, max residual {worst:.3e}", pairs.len()));
}

#[test]
fn criterion_06_conformal_covariance() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_order = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a: Vec<f64> = (0..5).map(|_| rng.random_range(-0.3..0.3)).collect();
        let b = rng.random_range(0.2..0.8);
        let f = ScalarField::round_chart(5);
        let phi = ScalarField::new("phi", move |x| 1.0 + 0.3 * a[0] * x[0] + a[1] * x[1] * x[2] + 0.1 * b * (x[3] * x[3]));
        let c = rng.random_range(0.3..1.0);
        let u = ScalarField::new("u", move |x| (c * x[0] - x[3]).cos() * (-x.iter().map(|v| v * v).sum::<f64>()).exp());
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-0.3..0.3)).collect();
        for k in [1, 2] {
            let s = covariance_study(k, &f, &phi, &u, &x, 0.05).unwrap();
            min_order = min_order.min(s.observed_order);
            worst = worst.max(s.relative_extrapolated());
        }
    }
    let elapsed = t.elapsed();
    let pass = min_order >= 3.0 && worst < 1e-5 && elapsed < Duration::from_secs(60);
    verdict(
        6,
        "conformal covariance",
        pass,
        elapsed,
        format!("min observed order {min_order:.2}, max extrapolated/scale {worst:.3e}"),
    );
}

#[test]
fn criterion_07_second_term_zeroth_order() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let s = rng.random_range(0.5..1.5);
        let g = rng.random_range(-0.5..0.5);
        let f = ScalarField::round_chart(5).linear_combination(s, &ScalarField::gaussian(1.0), g);
        let c1 = rng.random_range(0.2..1.0);
        let u = ScalarField::poly(vec![1.0, c1, 0.1]);
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = ScalarField::new("exp", move |x| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().exp());
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-0.2..0.2)).collect();
        let study = second_term_study(&f, &u, &v, &x, 0.04).unwrap();
        let r = gjms_second_term_residual(&f, &u, &v, &x, 5).unwrap();
        assert_eq!(r, study.extrapolated.abs());
        worst = worst.max(study.relative_extrapolated());
    }
    let pass = worst < 1e-4;
    verdict(7, "second-term zeroth order", pass, t.elapsed(), format!("max extrapolated/scale {worst:.3e}"));
}

#[test]
fn criterion_08_mass_relation_at_desk_scale() {
    let t = Instant::now();
    let rp3 = lens_group(2, &[1, 1]).unwrap();
    let xi3 = sample_sphere_points(4, 1, 8).remove(0);
    let a = thm51_check(&rp3, d(3, 1), &DEFAULT_RADII, &xi3).unwrap();
    let rp5 = lens_group(2, &[1, 1, 1]).unwrap();
    let xi5 = sample_sphere_points(6, 1, 8).remove(0);
    let b = thm51_check(&rp5, d(5, 2), &DEFAULT_RADII, &xi5).unwrap();
    let (e1, e2) = (rel(a.mk, 1.0 / PI), rel(b.mk, 1.0 / (2.0 * PI * PI)));
    let elapsed = t.elapsed();
    let pass = e1 < 0.01
        && a.residual.abs() < 0.01
        && e2 < 0.02
        && b.residual.abs() < 0.02
        && elapsed < Duration::from_secs(300);
    verdict(
        8,
        "mass relation at desk scale",
        pass,
        elapsed,
        format!(
            "RP3 m1 {:.6} (rel err {e1:.2e}, residual {:.2e}); RP5 m2 {:.6} (rel err {e2:.2e}, residual {:.2e})",
            a.mk, a.residual, b.mk, b.residual
        ),
    );
}

#[test]
fn criterion_09_lower_order_blowup_has_no_m2() {
    let t = Instant::now();
    let rp5 = lens_group(2, &[1, 1, 1]).unwrap();
    let frame = ChartFrame::new(sample_sphere_points(6, 1, 9).remove(0));
    let p1 = blowup_profile(&rp5, frame.clone(), d(5, 1)).unwrap();
    let p2 = blowup_profile(&rp5, frame, d(5, 2)).unwrap();
    let m1 = mk_surface_integral(&p1, &DEFAULT_RADII).unwrap().report.value;
    let m2 = mk_surface_integral(&p2, &DEFAULT_RADII).unwrap().report.value;
    let ratio = (m1 / m2).abs();
    let elapsed = t.elapsed();
    let pass = ratio < 0.02 && elapsed < Duration::from_secs(300);
    verdict(
        9,
        "order-2 mass of the order-1 blow-up",
        pass,
        elapsed,
        format!("m2 via k=1 factor {m1:.3e}, via k=2 factor {m2:.6e}, ratio {ratio:.3e}"),
    );
}

#[test]
fn criterion_10_hj_scalar_curvature() {
    let t = Instant::now();
    let l7 = lens_group(7, &[1, 2]).unwrap();
    let samples = hj_scan(&l7, 2000, 42).unwrap();
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.scalar_curvature), hi.max(s.scalar_curvature)));
    let rp3 = lens_group(2, &[1, 1]).unwrap();
    let target = 384.0 * PI * PI;
    let rp3_err = hj_scan(&rp3, 200, 42)
        .unwrap()
        .iter()
        .map(|s| rel(s.scalar_curvature, target))
        .fold(0.0, f64::max);
    let elapsed = t.elapsed();
    let pass = lo < 0.0 && hi > 0.0 && rp3_err < 1e-5 && elapsed < Duration::from_secs(60);
    verdict(
        10,
        "HJ scalar curvature",
        pass,
        elapsed,
        format!("L(7;1,2) scal in [{lo:.6e}, {hi:.6e}], RP3 max rel deviation from 384 pi^2 {rp3_err:.3e}"),
    );
}
