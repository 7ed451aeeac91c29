//! Execution of a [`CommandPlan`]. Computation errors become failed
//! checks; nothing here panics on bad numerics.

use std::f64::consts::PI;
use std::fmt::Display;
use std::time::Instant;

use gjms_core::asymptotic::{mk_surface_integral, DEFAULT_RADII};
use gjms_core::calculus::{covariance_study, second_term_study};
use gjms_core::moebius::stays_clear_of_poles;
use gjms_core::space_forms::DEFAULT_LIMIT_RADII;
use gjms_core::{
    blowup_profile, covering_mass_residual, dirac_pairing, gjms_constant, gjms_constant_exact,
    gjms_second_term_residual, hj_scan, lens_group, mass_closed_form, mass_via_limit, moebius_identity_residual,
    sample_sphere_points, thm51_check, ChartFrame, DimPair, DiracGrid, MoebiusMap, ScalarField, SpaceFormGroup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::plan::{CommandPlan, Space, Task, DIRAC_CASES};
use crate::report::{maybe_seconds, Cell, Check, Table, VerificationReport};

/// What each check is testing.
pub mod anchor {
    pub const CONSTANT: &str = "closed form of the flat Green constant";
    pub const MOEBIUS: &str = "distance identity under Moebius maps";
    pub const DIRAC: &str = "normalization of the flat Green function";
    pub const MASS_LIMIT: &str = "mass as the constant term of the Green function";
    pub const SPHERE_ZERO: &str = "zero mass on the round sphere";
    pub const POSITIVE: &str = "positive mass on nontrivial space forms";
    pub const INVARIANT: &str = "mass is a function on the quotient";
    pub const COVERING: &str = "mass of a covering space";
    pub const COVARIANCE: &str = "conformal covariance of the GJMS operators";
    pub const SECOND_TERM: &str = "zeroth-order term of the Paneitz operator";
    pub const MASS_RELATION: &str = "mass against the asymptotic mass of the blow-up";
    pub const LOWER_ORDER: &str = "order-2 mass of the conformal Laplacian blow-up";
    pub const HJ_SIGN: &str = "sign change of the canonical metric's scalar curvature";
    pub const HJ_RP3: &str = "constant scalar curvature of the canonical metric on RP3";
    pub const OUTPUT: &str = "report output";
}

/// Checks, top-level JSON fields and an optional table from one task.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
    pub table: Option<Table>,
}

impl Outcome {
    fn failed(name: &str, anchor: &'static str, err: impl Display) -> Self {
        Self { checks: vec![Check::error(name, anchor, err)], ..Self::default() }
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.data.insert(key.to_string(), value.into());
    }
}

/// Runs the plan, writing the CSV table if one was requested.
pub fn run_plan(plan: &CommandPlan) -> VerificationReport {
    let t = Instant::now();
    let mut outcome = execute(&plan.task, plan.seed, plan.timings);
    let mut table = outcome.table.take();
    if let (Some(path), Some(tab)) = (&plan.csv, &table) {
        match tab.save_csv(path) {
            Ok(()) => outcome.set("csv", path.display().to_string()),
            Err(e) => outcome.checks.push(Check::error(format!("write {}", path.display()), anchor::OUTPUT, e)),
        }
        table = None;
    }
    let mut report = VerificationReport::new(plan.task.name(), plan.seed, outcome.checks);
    report.data = outcome.data;
    report.table = table;
    report.wall_seconds = maybe_seconds(plan.timings, t.elapsed());
    report
}

pub fn execute(task: &Task, seed: u64, timings: bool) -> Outcome {
    let t = Instant::now();
    let mut out = match task {
        Task::Constants { dims } => constants(*dims),
        Task::Mass { space, dims, samples } => mass(space, *dims, *samples, seed),
        Task::MassLimit { space, dims, samples, radii } => mass_limit(space, *dims, *samples, radii, seed),
        Task::HjScan { space, samples } => hj(space, *samples, seed),
        Task::VerifyMoebius { trials } => moebius(*trials, seed),
        Task::VerifyDirac { cases, levels } => dirac(cases, *levels),
        Task::VerifyCovariance { points } => covariance(*points, seed),
        Task::VerifyProp21 { triples } => second_term(*triples, seed),
        Task::VerifyCovering { points } => covering(*points, seed),
        Task::VerifyThm51 { space, dims, radii } => mass_relation(space, *dims, radii, seed),
        Task::Report => return full_report(seed, timings),
    };
    if let Some(s) = maybe_seconds(timings, t.elapsed()) {
        out.checks.iter_mut().for_each(|c| c.wall_seconds = Some(s));
    }
    out
}

fn coord_columns(ambient: usize) -> impl Iterator<Item = String> {
    (0..ambient).map(|i| format!("x{i}"))
}

fn constants(dims: DimPair) -> Outcome {
    let c = gjms_constant(dims);
    let exact = gjms_constant_exact(dims);
    let mut out = Outcome::default();
    out.set("n", dims.n());
    out.set("k", dims.k());
    out.set("c_nk", c);
    out.set("exact", exact.to_string());
    out.checks.push(Check::relative("c_nk matches its exact form", anchor::CONSTANT, exact.value(), c, 1e-14));
    let mut table = Table::new(["n", "k", "c_nk"]);
    table.push(vec![dims.n().into(), dims.k().into(), c.into()]);
    out.table = Some(table);
    out
}

fn mass(space: &Space, dims: DimPair, samples: usize, seed: u64) -> Outcome {
    let g = &space.group;
    let points = sample_sphere_points(g.ambient(), samples, seed);
    let mut table = Table::new(coord_columns(g.ambient()).chain(["mass".to_string()]));
    let mut values = Vec::with_capacity(samples);
    let mut worst_invariance: f64 = 0.0;
    for p in &points {
        let a = match mass_closed_form(g, p, dims) {
            Ok(r) => r.value,
            Err(e) => return Outcome::failed("closed-form mass", anchor::POSITIVE, e),
        };
        for h in g.elements() {
            match mass_closed_form(g, &p.transformed(h), dims) {
                Ok(b) => worst_invariance = worst_invariance.max((a - b.value).abs() / a.abs().max(f64::MIN_POSITIVE)),
                Err(e) => return Outcome::failed("closed-form mass", anchor::INVARIANT, e),
            }
        }
        table.push_nums(p.coords().iter().copied().chain([a]));
        values.push(a);
    }
    let (lo, hi) = min_max(&values);
    let mut out = Outcome::default();
    out.set("space", space.label());
    out.set("n", dims.n());
    out.set("k", dims.k());
    out.set("samples", samples);
    out.set("min_mass", lo);
    out.set("max_mass", hi);
    if g.is_trivial() {
        out.checks.push(Check::holds("mass vanishes identically", anchor::SPHERE_ZERO, values.iter().all(|&a| a == 0.0)));
    } else {
        out.checks.push(
            Check::holds("mass positive at every sample", anchor::POSITIVE, lo > 0.0).with_note(format!("min {lo:e}")),
        );
    }
    out.checks.push(Check::below("mass invariant under the group", anchor::INVARIANT, worst_invariance, 1e-12));
    out.table = Some(table);
    out
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn mass_limit(space: &Space, dims: DimPair, samples: usize, radii: &[f64], seed: u64) -> Outcome {
    let g = &space.group;
    let green_scale = 1.0 / gjms_constant(dims);
    let mut table = Table::new(
        coord_columns(g.ambient())
            .chain(["closed_form", "limit", "relative_deviation", "error_estimate"].map(String::from)),
    );
    let mut worst: f64 = 0.0;
    for p in sample_sphere_points(g.ambient(), samples, seed) {
        let exact = match mass_closed_form(g, &p, dims) {
            Ok(r) => r.value,
            Err(e) => return Outcome::failed("closed-form mass", anchor::MASS_LIMIT, e),
        };
        let limit = match mass_via_limit(g, &p, dims, radii) {
            Ok(r) => r,
            Err(e) => return Outcome::failed("limit extraction", anchor::MASS_LIMIT, e),
        };
        // the sphere has zero mass, so measure against the Green scale there
        let denom = if exact != 0.0 { exact.abs() } else { green_scale };
        let dev = (limit.value - exact).abs() / denom;
        worst = worst.max(dev);
        table.push_nums(p.coords().iter().copied().chain([exact, limit.value, dev, limit.error_estimate]));
    }
    let mut out = Outcome::default();
    out.set("space", space.label());
    out.set("n", dims.n());
    out.set("k", dims.k());
    out.set("radii", radii.to_vec());
    out.set("max_relative_deviation", worst);
    out.checks.push(Check::below("limit extraction matches the closed form", anchor::MASS_LIMIT, worst, 1e-6));
    out.table = Some(table);
    out
}

fn is_lens(space: &Space, p: u64, q: &[i64]) -> bool {
    space.spec.p == p && space.spec.q == q
}

fn hj(space: &Space, samples: usize, seed: u64) -> Outcome {
    let g = &space.group;
    let scan = match hj_scan(g, samples, seed) {
        Ok(s) => s,
        Err(e) => return Outcome::failed("canonical metric scan", anchor::POSITIVE, e),
    };
    let mut table = Table::new(coord_columns(4).chain(["mass", "scalar_curvature"].map(String::from)));
    for s in &scan {
        table.push_nums(s.point.iter().copied().chain([s.mass, s.scalar_curvature]));
    }
    let scal: Vec<f64> = scan.iter().map(|s| s.scalar_curvature).collect();
    let masses: Vec<f64> = scan.iter().map(|s| s.mass).collect();
    let (lo, hi) = min_max(&scal);
    let (mlo, mhi) = min_max(&masses);
    let mut out = Outcome::default();
    out.set("space", space.label());
    out.set("samples", samples);
    out.set("min_scalar_curvature", lo);
    out.set("max_scalar_curvature", hi);
    out.set("min_mass", mlo);
    out.set("max_mass", mhi);
    out.checks.push(Check::holds("mass positive at every sample", anchor::POSITIVE, mlo > 0.0));
    if is_lens(space, 7, &[1, 2]) {
        out.checks.push(
            Check::holds("scalar curvature takes both signs", anchor::HJ_SIGN, lo < 0.0 && hi > 0.0)
                .with_note(format!("range [{lo:e}, {hi:e}]")),
        );
    }
    if g.order() == 2 {
        let target = 384.0 * PI * PI;
        let worst = scal.iter().map(|s| (s - target).abs() / target).fold(0.0, f64::max);
        out.checks.push(
            Check::below("scalar curvature equals 384 pi^2", anchor::HJ_RP3, worst, 1e-5)
                .with_note("observed is the worst relative deviation"),
        );
    }
    out.table = Some(table);
    out
}

fn moebius(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(["trial", "n", "scaled_residual"]);
    let mut worst: f64 = 0.0;
    let mut rejected = 0usize;
    let mut done = 0;
    while done < trials {
        let n = rng.random_range(2..6);
        let map = MoebiusMap::random(n, 5, &mut rng);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if !(stays_clear_of_poles(&map, &x, 0.25) && stays_clear_of_poles(&map, &y, 0.25)) {
            rejected += 1;
            continue;
        }
        let r = match moebius_identity_residual(&map, &x, &y) {
            Ok(r) => r,
            Err(e) => return Outcome::failed("distance identity", anchor::MOEBIUS, e),
        };
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        let scaled = r.abs() / (1.0 + d2);
        worst = worst.max(scaled);
        table.push_nums([done as f64, n as f64, scaled]);
        done += 1;
    }
    let mut out = Outcome::default();
    out.set("trials", trials);
    out.set("rejected_near_pole", rejected);
    out.set("max_scaled_residual", worst);
    out.checks.push(Check::below("max |residual| / (1 + |x − y|²)", anchor::MOEBIUS, worst, 1e-12));
    out.table = Some(table);
    out
}

/// Test function of the pairing and the half-width of its integration ball.
const DIRAC_TEST: (f64, u32, f64) = (1.0, 10, 1.5);

type LevelRuns = Vec<gjms_core::Result<(DiracGrid, f64)>>;

fn dirac(cases: &[DimPair], levels: usize) -> Outcome {
    let (radius, power, half_width) = DIRAC_TEST;
    let test = ScalarField::cutoff(radius, power);
    let runs: Vec<(DimPair, LevelRuns)> = cases
        .par_iter()
        .map(|&dims| {
            let vals = (0..levels)
                .map(|level| {
                    let grid = DiracGrid::level(dims, half_width, level);
                    dirac_pairing(dims, &test, &grid).map(|v| (grid, v))
                })
                .collect();
            (dims, vals)
        })
        .collect();
    let mut out = Outcome::default();
    let mut table = Table::new(["n", "k", "level", "radial_panels", "angular", "step", "value", "exact", "relative_error"]);
    let mut summary = Vec::new();
    for (dims, vals) in runs {
        let exact = gjms_constant(dims) * test.eval(&vec![0.0; dims.n()]);
        let mut errs = Vec::new();
        for (level, v) in vals.into_iter().enumerate() {
            match v {
                Ok((grid, v)) => {
                    let err = (v - exact).abs() / exact;
                    errs.push(err);
                    table.push_nums([
                        dims.n() as f64,
                        dims.k() as f64,
                        level as f64,
                        grid.radial_panels as f64,
                        grid.angular as f64,
                        grid.step,
                        v,
                        exact,
                        err,
                    ]);
                }
                Err(e) => {
                    out.checks.push(Check::error(format!("{dims} level {level}"), anchor::DIRAC, e));
                }
            }
        }
        if errs.len() == levels {
            let monotone = errs.windows(2).all(|w| w[1] < w[0]);
            out.checks.push(Check::holds(format!("{dims} error decreases with refinement"), anchor::DIRAC, monotone));
            out.checks.push(Check::below(format!("{dims} relative error at the finest level"), anchor::DIRAC, errs[levels - 1], 1e-3));
        }
        summary.push(json!({ "n": dims.n(), "k": dims.k(), "relative_errors": errs }));
    }
    out.set("test_function", test.name().to_string());
    out.set("cases", summary);
    out.table = Some(table);
    out
}

type FieldTriple = (ScalarField, ScalarField, ScalarField, Vec<f64>);

/// Seeded conformal factors `φ`, test functions `u` and points in ℝ⁵.
fn covariance_samples(points: usize, seed: u64) -> Vec<FieldTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..points)
        .map(|_| {
            let a: Vec<f64> = (0..2).map(|_| rng.random_range(-0.3..0.3)).collect();
            let b = rng.random_range(0.2..0.8);
            let phi = ScalarField::new("phi", move |x| 1.0 + 0.3 * a[0] * x[0] + a[1] * x[1] * x[2] + 0.1 * b * x[3] * x[3]);
            let c = rng.random_range(0.3..1.0);
            let u = ScalarField::new("u", move |x| {
                (c * x[0] - x[3]).cos() * (-x.iter().map(|v| v * v).sum::<f64>()).exp()
            });
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-0.3..0.3)).collect();
            (ScalarField::round_chart(5), phi, u, x)
        })
        .collect()
}

fn covariance(points: usize, seed: u64) -> Outcome {
    let samples = covariance_samples(points, seed);
    let studies: Vec<_> = samples
        .par_iter()
        .map(|(f, phi, u, x)| [1, 2].map(|k| covariance_study(k, f, phi, u, x, 0.05)))
        .collect();
    let mut out = Outcome::default();
    let mut table = Table::new(
        ["point", "k"]
            .map(String::from)
            .into_iter()
            .chain(coord_columns(5))
            .chain(["coarse", "fine", "observed_order", "extrapolated", "scale"].map(String::from)),
    );
    for k in [1, 2] {
        let mut min_order = f64::INFINITY;
        let mut worst: f64 = 0.0;
        for (i, (study, (_, _, _, x))) in studies.iter().zip(&samples).enumerate() {
            match &study[k - 1] {
                Ok(s) => {
                    min_order = min_order.min(s.observed_order);
                    worst = worst.max(s.relative_extrapolated());
                    table.push_nums(
                        [i as f64, k as f64]
                            .into_iter()
                            .chain(x.iter().copied())
                            .chain([s.coarse, s.fine, s.observed_order, s.extrapolated, s.scale]),
                    );
                }
                Err(e) => out.checks.push(Check::error(format!("k={k} point {i}"), anchor::COVARIANCE, e)),
            }
        }
        out.checks.push(Check::at_least(format!("k={k} minimum observed order"), anchor::COVARIANCE, min_order, 3.0));
        out.checks.push(Check::below(
            format!("k={k} extrapolated residual / operator scale"),
            anchor::COVARIANCE,
            worst,
            1e-5,
        ));
    }
    out.set("points", points);
    out.set("coarse_step", 0.05);
    out.table = Some(table);
    out
}

fn second_term_samples(triples: usize, seed: u64) -> Vec<FieldTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..triples)
        .map(|_| {
            let s = rng.random_range(0.5..1.5);
            let g = rng.random_range(-0.5..0.5);
            let f = ScalarField::round_chart(5).linear_combination(s, &ScalarField::gaussian(1.0), g);
            let c1 = rng.random_range(0.2..1.0);
            let u = ScalarField::poly(vec![1.0, c1, 0.1]);
            let w: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = ScalarField::new("exp", move |x| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().exp());
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-0.2..0.2)).collect();
            (f, u, v, x)
        })
        .collect()
}

fn second_term(triples: usize, seed: u64) -> Outcome {
    let samples = second_term_samples(triples, seed);
    let studies: Vec<_> = samples
        .par_iter()
        .map(|(f, u, v, x)| second_term_study(f, u, v, x, 0.04))
        .collect();
    let mut out = Outcome::default();
    let mut table = Table::new(["triple", "coarse", "fine", "observed_order", "extrapolated", "scale"]);
    let mut worst: f64 = 0.0;
    for (i, (study, (f, u, v, x))) in studies.iter().zip(&samples).enumerate() {
        match study {
            Ok(s) => {
                worst = worst.max(s.relative_extrapolated());
                table.push_nums([i as f64, s.coarse, s.fine, s.observed_order, s.extrapolated, s.scale]);
            }
            Err(e) => out.checks.push(Check::error(format!("triple {i}"), anchor::SECOND_TERM, e)),
        }
        if i == 0 {
            // the public entry point runs the same study
            if let (Ok(r), Ok(s)) = (gjms_second_term_residual(f, u, v, x, 5), study) {
                out.checks.push(Check::absolute(
                    "residual entry point agrees with the study",
                    anchor::SECOND_TERM,
                    s.extrapolated.abs(),
                    r,
                    0.0,
                ));
            }
        }
    }
    out.checks.push(Check::below("extrapolated remainder / operator scale", anchor::SECOND_TERM, worst, 1e-4));
    out.set("triples", triples);
    out.set("coarse_step", 0.04);
    out.table = Some(table);
    out
}

/// `{±Id} ⊂ L(4;1,1)` and every pair in the chain `1 ⊂ C₂ ⊂ C₄ ⊂ L(8;1,1)`.
fn covering_pairs() -> gjms_core::Result<Vec<(SpaceFormGroup, SpaceFormGroup)>> {
    let l4 = lens_group(4, &[1, 1])?;
    let minus = l4.subgroup(&[&l4.elements()[1] * &l4.elements()[1]])?;
    let l8 = lens_group(8, &[1, 1])?;
    let g = l8.elements()[1].clone();
    let g2 = &g * &g;
    let g4 = &g2 * &g2;
    let chain = [SpaceFormGroup::trivial(4), l8.subgroup(&[g4])?, l8.subgroup(&[g2])?, l8];
    let mut pairs = vec![(minus, l4)];
    for i in 0..chain.len() {
        for j in i + 1..chain.len() {
            pairs.push((chain[i].clone(), chain[j].clone()));
        }
    }
    Ok(pairs)
}

fn covering(points: usize, seed: u64) -> Outcome {
    let dims = DimPair::new(3, 1).expect("valid pair");
    let pairs = match covering_pairs() {
        Ok(p) => p,
        Err(e) => return Outcome::failed("subgroup construction", anchor::COVERING, e),
    };
    let xs = sample_sphere_points(4, points, seed);
    let mut table = Table::new(["sub", "full", "point", "residual"]);
    let mut worst: f64 = 0.0;
    for (sub, full) in &pairs {
        for (i, xi) in xs.iter().enumerate() {
            match covering_mass_residual(sub, full, xi, dims) {
                Ok(r) => {
                    worst = worst.max(r.abs());
                    table.push(vec![
                        Cell::Text(format!("order {}", sub.order())),
                        Cell::Text(full.label().to_string()),
                        i.into(),
                        r.into(),
                    ]);
                }
                Err(e) => return Outcome::failed("covering residual", anchor::COVERING, e),
            }
        }
    }
    let mut out = Outcome::default();
    out.set("pairs", pairs.len());
    out.set("points", points);
    out.set("max_residual", worst);
    out.checks.push(Check::below("covering residual", anchor::COVERING, worst, 1e-12));
    out.table = Some(table);
    out
}

fn mass_relation(space: &Space, dims: DimPair, radii: &[f64], seed: u64) -> Outcome {
    let g = &space.group;
    let xi = sample_sphere_points(g.ambient(), 1, seed).remove(0);
    let check = match thm51_check(g, dims, radii, &xi) {
        Ok(c) => c,
        Err(e) => return Outcome::failed("asymptotic mass", anchor::MASS_RELATION, e),
    };
    let tol = if dims.k() == 1 { 0.01 } else { 0.02 };
    let mut out = Outcome::default();
    out.checks.push(Check::below("relative residual of the mass relation", anchor::MASS_RELATION, check.residual, tol));
    let known = match (dims.k(), is_lens(space, 2, &[1, 1]), is_lens(space, 2, &[1, 1, 1])) {
        (1, true, _) => Some(1.0 / PI),
        (2, _, true) => Some(1.0 / (2.0 * PI * PI)),
        _ => None,
    };
    if let Some(expected) = known {
        out.checks.push(Check::relative(
            format!("asymptotic mass of order {}", dims.k()),
            anchor::MASS_RELATION,
            expected,
            check.mk,
            tol,
        ));
    }
    let mut table = Table::new(["radius", "flux"]);
    for &(r, f) in &check.surface.per_radius {
        table.push_nums([r, f]);
    }
    out.set("space", space.label());
    out.set("n", dims.n());
    out.set("k", dims.k());
    out.set("point", xi.coords().to_vec());
    out.set("mass", check.mass);
    out.set("asymptotic_mass", check.mk);
    out.set("residual", check.residual);
    out.set("raw_flux", check.surface.raw_flux);
    out.set("round_flux", check.surface.round_flux);
    out.set("chart_mass", check.surface.chart_mass);
    out.set("flux_over_16pi", check.surface.adm_normalized);
    out.set("warnings", check.surface.report.warnings.clone());
    out.table = Some(table);
    out
}

fn lower_order_blowup(seed: u64) -> Outcome {
    let run = || -> gjms_core::Result<(f64, f64)> {
        let rp5 = lens_group(2, &[1, 1, 1])?;
        let frame = ChartFrame::new(sample_sphere_points(6, 1, seed).remove(0));
        let p1 = blowup_profile(&rp5, frame.clone(), DimPair::new(5, 1)?)?;
        let p2 = blowup_profile(&rp5, frame, DimPair::new(5, 2)?)?;
        Ok((
            mk_surface_integral(&p1, &DEFAULT_RADII)?.report.value,
            mk_surface_integral(&p2, &DEFAULT_RADII)?.report.value,
        ))
    };
    match run() {
        Ok((m1, m2)) => {
            let mut out = Outcome::default();
            out.set("m2_of_order1_blowup", m1);
            out.set("m2_of_order2_blowup", m2);
            out.checks.push(Check::below(
                "|m2 of the k=1 blow-up| / m2 of the k=2 blow-up",
                anchor::LOWER_ORDER,
                (m1 / m2).abs(),
                0.02,
            ));
            out
        }
        Err(e) => Outcome::failed("order-2 masses on RP5", anchor::LOWER_ORDER, e),
    }
}

type Suite = (String, Box<dyn Fn() -> Outcome + Send + Sync>);

fn space(p: u64, q: &[i64]) -> Space {
    let spec = gjms_core::LensSpec { p, q: q.to_vec() };
    let group = spec.group().expect("fixed suite spaces act freely");
    Space { spec, group }
}

fn dims(n: usize, k: usize) -> DimPair {
    DimPair::new(n, k).expect("fixed suite dimensions are valid")
}

fn suites(seed: u64) -> Vec<Suite> {
    let mut s: Vec<Suite> = vec![
        ("verify moebius".into(), Box::new(move || moebius(1000, seed))),
        (
            "verify dirac".into(),
            Box::new(|| dirac(&DIRAC_CASES.map(|(n, k)| dims(n, k)), 3)),
        ),
    ];
    for (p, q, n, k) in [(2, vec![1, 1], 3, 1), (3, vec![1, 1], 3, 1), (7, vec![1, 2], 3, 1), (2, vec![1, 1, 1], 5, 2)] {
        let sp = space(p, &q);
        s.push((
            format!("mass-limit {} k={k}", sp.label()),
            Box::new(move || mass_limit(&sp, dims(n, k), 5, &DEFAULT_LIMIT_RADII, seed)),
        ));
    }
    for (p, q, n, k) in [
        (1, vec![1, 1], 3, 1),
        (1, vec![1, 1, 1], 5, 2),
        (2, vec![1, 1], 3, 1),
        (3, vec![1, 1], 3, 1),
        (5, vec![1, 2], 3, 1),
        (7, vec![1, 2], 3, 1),
        (2, vec![1, 1, 1], 5, 1),
        (2, vec![1, 1, 1], 5, 2),
        (3, vec![1, 1, 1], 5, 2),
    ] {
        let sp = space(p, &q);
        s.push((format!("mass {} k={k}", sp.label()), Box::new(move || mass(&sp, dims(n, k), 20, seed))));
    }
    s.push(("verify covering".into(), Box::new(move || covering(10, seed))));
    s.push(("verify covariance".into(), Box::new(move || covariance(20, seed))));
    s.push(("verify prop21".into(), Box::new(move || second_term(10, seed))));
    for (p, q, n, k) in [(2, vec![1, 1], 3, 1), (2, vec![1, 1, 1], 5, 2)] {
        let sp = space(p, &q);
        s.push((
            format!("verify thm51 {} k={k}", sp.label()),
            Box::new(move || mass_relation(&sp, dims(n, k), &DEFAULT_RADII, seed)),
        ));
    }
    s.push(("lower-order blow-up L(2;1,1,1)".into(), Box::new(move || lower_order_blowup(seed))));
    for (p, q) in [(7, vec![1, 2]), (2, vec![1, 1])] {
        let sp = space(p, &q);
        s.push((format!("hj-scan {}", sp.label()), Box::new(move || hj(&sp, 2000, seed))));
    }
    s
}

/// Every suite, run in parallel and assembled in a fixed order.
fn full_report(seed: u64, timings: bool) -> Outcome {
    let results: Vec<(String, Outcome, f64)> = suites(seed)
        .into_par_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let out = f();
            (name, out, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut out = Outcome::default();
    let mut table = Table::new(["suite", "check", "anchor", "comparison", "expected", "observed", "tolerance", "pass"]);
    let opt = |v: Option<f64>| v.map(Cell::Num).unwrap_or_else(|| Cell::Text(String::new()));
    for (name, sub, secs) in results {
        for mut c in sub.checks {
            table.push(vec![
                name.as_str().into(),
                c.name.as_str().into(),
                c.anchor.into(),
                serde_json::to_value(c.comparison).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default().into(),
                opt(c.expected),
                opt(c.observed),
                opt(c.tolerance),
                if c.pass { 1.0 } else { 0.0 }.into(),
            ]);
            c.name = format!("{name}: {}", c.name);
            if timings {
                c.wall_seconds = Some(secs);
            }
            out.checks.push(c);
        }
        out.data.insert(name, Value::Object(sub.data));
    }
    out.table = Some(table);
    out
}
