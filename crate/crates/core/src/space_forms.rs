//! Spherical space forms `Γ\Sⁿ`: finite rotation groups acting freely,
//! GJMS masses of their round metrics, the covering identity, and the
//! canonical metric `A^{2/(n−2k)} g` built from the mass.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{gjms_constant, DimPair};
use crate::error::{GjmsError, Result};
use crate::field::ScalarField;
use crate::green::{chart_transport_factor, conformal_transport_green, green_space_form, ChartPullback, GreenKernel};
use crate::moebius::{ChartFrame, SpherePoint};
use crate::numerics::{dist, neville_to_zero, Stencil};

const MATCH_TOL: f64 = 1e-10;
const FREE_TOL: f64 = 1e-8;
/// Largest group [`SpaceFormGroup::generated_by`] will enumerate.
pub const MAX_GROUP_ORDER: usize = 10_000;

/// Explicit list of orthogonal `(n+1)×(n+1)` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceFormGroup {
    ambient: usize,
    elements: Vec<DMatrix<f64>>,
    label: String,
}

fn same(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    (a - b).amax() <= MATCH_TOL
}

fn is_identity(a: &DMatrix<f64>) -> bool {
    same(a, &DMatrix::identity(a.nrows(), a.ncols()))
}

impl SpaceFormGroup {
    /// Wraps an element list without checking the group axioms; see
    /// [`validate_group`].
    pub fn from_elements(elements: Vec<DMatrix<f64>>, label: impl Into<String>) -> Result<Self> {
        let ambient = elements
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| GjmsError::InvalidInput("empty element list".into()))?;
        for m in &elements {
            if m.nrows() != ambient || m.ncols() != ambient {
                return Err(GjmsError::DimensionMismatch { expected: ambient, got: m.nrows().max(m.ncols()) });
            }
        }
        Ok(Self { ambient, elements, label: label.into() })
    }

    pub fn trivial(ambient: usize) -> Self {
        Self { ambient, elements: vec![DMatrix::identity(ambient, ambient)], label: "trivial".into() }
    }

    /// Closure of `generators` under multiplication.
    pub fn generated_by(ambient: usize, generators: &[DMatrix<f64>], label: impl Into<String>) -> Result<Self> {
        let mut elements = vec![DMatrix::identity(ambient, ambient)];
        let mut frontier = elements.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for g in generators {
                    if g.nrows() != ambient || g.ncols() != ambient {
                        return Err(GjmsError::DimensionMismatch { expected: ambient, got: g.nrows() });
                    }
                    let p = g * a;
                    if !elements.iter().any(|e| same(e, &p)) {
                        elements.push(p.clone());
                        next.push(p);
                        if elements.len() > MAX_GROUP_ORDER {
                            return Err(GjmsError::InvalidInput(format!(
                                "generated group exceeds {MAX_GROUP_ORDER} elements"
                            )));
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(Self { ambient, elements, label: label.into() })
    }

    /// Subgroup generated by some of this group's elements.
    pub fn subgroup(&self, generators: &[DMatrix<f64>]) -> Result<Self> {
        let label = format!("subgroup of {}", self.label);
        let sub = Self::generated_by(self.ambient, generators, label)?;
        sub.check_subgroup_of(self)?;
        Ok(sub)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Dimension n of the sphere acted upon.
    pub fn sphere_dim(&self) -> usize {
        self.ambient - 1
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.iter().all(is_identity)
    }

    pub fn non_identity(&self) -> impl Iterator<Item = &DMatrix<f64>> {
        self.elements.iter().filter(|m| !is_identity(m))
    }

    pub fn contains(&self, m: &DMatrix<f64>) -> bool {
        self.elements.iter().any(|e| same(e, m))
    }

    pub fn check_subgroup_of(&self, full: &SpaceFormGroup) -> Result<()> {
        if self.ambient != full.ambient {
            return Err(GjmsError::DimensionMismatch { expected: full.ambient, got: self.ambient });
        }
        match self.elements.iter().position(|m| !full.contains(m)) {
            Some(i) => Err(GjmsError::NotSubgroup(format!(
                "element {i} of {} is not in {}",
                self.label, full.label
            ))),
            None => Ok(()),
        }
    }

    /// Representatives `s` of the cosets `Γ_sub · s` other than `Γ_sub`.
    pub fn coset_representatives(&self, full: &SpaceFormGroup) -> Result<Vec<DMatrix<f64>>> {
        self.check_subgroup_of(full)?;
        let mut reps: Vec<DMatrix<f64>> = Vec::new();
        for g in &full.elements {
            if self.contains(g) {
                continue;
            }
            let covered = reps.iter().any(|r| self.contains(&(g * r.transpose())));
            if !covered {
                reps.push(g.clone());
            }
        }
        Ok(reps)
    }
}

impl fmt::Display for SpaceFormGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (order {}, acting on S^{})", self.label, self.order(), self.sphere_dim())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cyclic group of order `p` generated by the block rotation with angles
/// `2π q_i / p`, acting on `S^{2m−1}`.
pub fn lens_group(p: u64, q: &[i64]) -> Result<SpaceFormGroup> {
    if p == 0 || q.is_empty() {
        return Err(GjmsError::InvalidInput("lens space needs p ≥ 1 and at least one q".into()));
    }
    for &qi in q {
        if gcd(qi.unsigned_abs(), p) != 1 {
            return Err(GjmsError::NonFreeAction(format!("gcd({qi}, {p}) ≠ 1")));
        }
    }
    let ambient = 2 * q.len();
    let elements = (0..p)
        .map(|j| {
            let mut m = DMatrix::zeros(ambient, ambient);
            for (b, &qi) in q.iter().enumerate() {
                // reduce the angle before the trigonometry
                let turn = ((qi as i128 * j as i128).rem_euclid(p as i128)) as f64 / p as f64;
                let (s, c) = (2.0 * std::f64::consts::PI * turn).sin_cos();
                m[(2 * b, 2 * b)] = c;
                m[(2 * b, 2 * b + 1)] = -s;
                m[(2 * b + 1, 2 * b)] = s;
                m[(2 * b + 1, 2 * b + 1)] = c;
            }
            m
        })
        .collect();
    let qs: Vec<String> = q.iter().map(i64::to_string).collect();
    Ok(SpaceFormGroup { ambient, elements, label: format!("L({};{})", p, qs.join(",")) })
}

/// Parsed `L(p;q1,...,qm)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LensSpec {
    pub p: u64,
    pub q: Vec<i64>,
}

impl LensSpec {
    pub fn group(&self) -> Result<SpaceFormGroup> {
        lens_group(self.p, &self.q)
    }

    pub fn sphere_dim(&self) -> usize {
        2 * self.q.len() - 1
    }
}

impl FromStr for LensSpec {
    type Err = GjmsError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GjmsError::Parse(format!("expected L(p;q1,...,qm), got {s:?}"));
        let inner = s
            .trim()
            .strip_prefix("L(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (p, qs) = inner.split_once(';').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q = qs
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if p == 0 || q.is_empty() {
            return Err(bad());
        }
        Ok(Self { p, q })
    }
}

impl fmt::Display for LensSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.q.iter().map(i64::to_string).collect();
        write!(f, "L({};{})", self.p, qs.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupValidation {
    pub order: usize,
    pub has_identity: bool,
    pub closed: bool,
    /// Worst distance from a product to the nearest listed element.
    pub closure_residual: f64,
    pub inverses: bool,
    pub inverse_residual: f64,
    pub orthogonal: bool,
    pub orthogonality_residual: f64,
    pub orientation: bool,
    pub determinant_residual: f64,
    pub free: bool,
    /// Smallest `|det(γ − Id)|` over non-identity elements.
    pub min_free_determinant: f64,
}

impl GroupValidation {
    pub fn ok(&self) -> bool {
        self.has_identity && self.closed && self.inverses && self.orthogonal && self.orientation && self.free
    }
}

fn nearest(elements: &[DMatrix<f64>], m: &DMatrix<f64>) -> f64 {
    elements.iter().map(|e| (e - m).amax()).fold(f64::INFINITY, f64::min)
}

pub fn validate_group(group: &SpaceFormGroup) -> GroupValidation {
    let els = &group.elements;
    let id = DMatrix::identity(group.ambient, group.ambient);
    let closure_residual = els
        .iter()
        .flat_map(|a| els.iter().map(move |b| nearest(els, &(a * b))))
        .fold(0.0, f64::max);
    let inverse_residual = els.iter().map(|a| nearest(els, &a.transpose())).fold(0.0, f64::max);
    let orthogonality_residual = els.iter().map(|a| (a.transpose() * a - &id).amax()).fold(0.0, f64::max);
    let determinant_residual = els.iter().map(|a| (a.determinant() - 1.0).abs()).fold(0.0, f64::max);
    let min_free_determinant = group
        .non_identity()
        .map(|a| (a - &id).determinant().abs())
        .fold(f64::INFINITY, f64::min);
    GroupValidation {
        order: els.len(),
        has_identity: els.iter().any(is_identity),
        closed: closure_residual <= MATCH_TOL,
        closure_residual,
        inverses: inverse_residual <= MATCH_TOL,
        inverse_residual,
        orthogonal: orthogonality_residual <= MATCH_TOL,
        orthogonality_residual,
        orientation: determinant_residual <= MATCH_TOL,
        determinant_residual,
        free: min_free_determinant > FREE_TOL,
        min_free_determinant,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MassMethod {
    ClosedForm,
    LimitExtraction,
    SurfaceIntegral,
}

impl fmt::Display for MassMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassMethod::ClosedForm => "closed_form",
            MassMethod::LimitExtraction => "limit_extraction",
            MassMethod::SurfaceIntegral => "surface_integral",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassReport {
    pub value: f64,
    pub method: MassMethod,
    pub error_estimate: f64,
    /// Constant term in the flat chart before the `w(0)²` rescaling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart_value: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MassReport {
    pub fn closed_form(value: f64) -> Self {
        Self { value, method: MassMethod::ClosedForm, error_estimate: 0.0, chart_value: None, warnings: Vec::new() }
    }
}

fn check_dims(group: &SpaceFormGroup, xi: &SpherePoint, dims: DimPair) -> Result<()> {
    if group.ambient != dims.n() + 1 {
        return Err(GjmsError::DimensionMismatch { expected: dims.n() + 1, got: group.ambient });
    }
    if xi.coords().len() != group.ambient {
        return Err(GjmsError::DimensionMismatch { expected: group.ambient, got: xi.coords().len() });
    }
    Ok(())
}

fn check_mass_range(dims: DimPair) -> Result<()> {
    if dims.mass_range() {
        Ok(())
    } else {
        Err(GjmsError::InvalidDims {
            n: dims.n(),
            k: dims.k(),
            reason: "the mass is the constant Green term only for 2k+1 ≤ n ≤ 2k+3",
        })
    }
}

/// `c_{n,k}⁻¹ Σ_{γ≠Id} |(γ − Id)ξ|^{2k−n}`.
pub fn mass_closed_form(group: &SpaceFormGroup, xi: &SpherePoint, dims: DimPair) -> Result<MassReport> {
    check_dims(group, xi, dims)?;
    check_mass_range(dims)?;
    Ok(MassReport::closed_form(closed_form_sum(group, xi.coords(), dims)))
}

fn closed_form_sum(group: &SpaceFormGroup, xi: &[f64], dims: DimPair) -> f64 {
    let e = dims.green_exponent();
    let v = nalgebra::DVector::from_column_slice(xi);
    let sum: f64 = group
        .non_identity()
        .map(|g| {
            let gx = g * &v;
            dist(gx.as_slice(), xi).powf(e)
        })
        .sum();
    sum / gjms_constant(dims)
}

pub const DEFAULT_LIMIT_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Limit extraction with both the chart-level constant and the round mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitExtraction {
    pub report: MassReport,
    pub chart_constant: f64,
    pub transport_scale: f64,
    /// `(r, D(r))` samples.
    pub samples: Vec<(f64, f64)>,
}

/// Constant term of the quotient Green function at the chart centre `ξ`,
/// extracted from `G(0, x) − c_{n,k}⁻¹ r^{2k−n}` as `r → 0`.
///
/// The difference is even in `x` after averaging over `±x`, so the table is
/// extrapolated in `r²`.
pub fn mass_via_limit(group: &SpaceFormGroup, xi: &SpherePoint, dims: DimPair, radii: &[f64]) -> Result<MassReport> {
    Ok(mass_via_limit_scaled(group, xi, dims, radii, 1.0)?.report)
}

/// As [`mass_via_limit`], with the chart transport factor multiplied by
/// `scale`; the chart is then the flat metric `scale^{4/(n−2k)} eucl`.
pub fn mass_via_limit_scaled(
    group: &SpaceFormGroup,
    xi: &SpherePoint,
    dims: DimPair,
    radii: &[f64],
    scale: f64,
) -> Result<LimitExtraction> {
    check_dims(group, xi, dims)?;
    check_mass_range(dims)?;
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0 && r < 0.5)) {
        return Err(GjmsError::InvalidInput(format!(
            "limit radii must be decreasing, positive and below 0.5, got {radii:?}"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(GjmsError::NonPositiveFactor(scale));
    }
    let n = dims.n();
    let kernel = ChartPullback {
        kernel: GreenKernel::space_form(group.clone(), dims),
        frame: ChartFrame::new(xi.clone()),
    };
    let w = chart_transport_factor(dims);
    let factor = if scale == 1.0 {
        w
    } else {
        ScalarField::new("scaled chart weight", move |x| scale * w.eval(x))
    };
    let c = gjms_constant(dims);
    let metric_scale = scale.powf(2.0 / dims.weight() as f64);
    let origin = vec![0.0; n];
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut acc = 0.0;
        for sign in [1.0, -1.0] {
            let mut x = vec![0.0; n];
            x[0] = sign * r;
            acc += conformal_transport_green(&kernel, &factor, &origin, &x)?;
        }
        let singular = (metric_scale * r).powf(dims.green_exponent()) / c;
        samples.push((r, acc / 2.0 - singular));
    }
    let ts: Vec<f64> = samples.iter().map(|(r, _)| r * r).collect();
    let ds: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let ex = neville_to_zero(&ts, &ds);
    let w0 = factor.eval(&origin);
    let mut warnings = Vec::new();
    if !ex.monotone {
        warnings.push("extrapolation corrections are not decreasing".to_string());
    }
    let report = MassReport {
        value: w0 * w0 * ex.value,
        method: MassMethod::LimitExtraction,
        error_estimate: w0 * w0 * ex.error_estimate,
        chart_value: Some(ex.value),
        warnings,
    };
    Ok(LimitExtraction { report, chart_constant: ex.value, transport_scale: scale, samples })
}

/// `A(full) − A(sub) − Σ_s G_sub(ξ, sξ)` over non-trivial cosets `Γ_sub s`.
pub fn covering_mass_residual(sub: &SpaceFormGroup, full: &SpaceFormGroup, xi: &SpherePoint, dims: DimPair) -> Result<f64> {
    let reps = sub.coset_representatives(full)?;
    let a_full = mass_closed_form(full, xi, dims)?.value;
    let a_sub = mass_closed_form(sub, xi, dims)?.value;
    let mut fiber = 0.0;
    for s in &reps {
        fiber += green_space_form(sub, dims, xi, &xi.transformed(s))?;
    }
    Ok(a_full - a_sub - fiber)
}

/// `A^{2/(n−2k)}` at the class of `ξ`.
pub fn hj_metric_factor(group: &SpaceFormGroup, xi: &SpherePoint, dims: DimPair) -> Result<f64> {
    let a = mass_closed_form(group, xi, dims)?.value;
    if !(a > 0.0) {
        return Err(GjmsError::MetricUndefined { mass: a });
    }
    Ok(a.powf(2.0 / dims.weight() as f64))
}

/// Ambient step for the degree-0 extension in [`hj_scalar_curvature`].
pub const HJ_STEP: f64 = 1e-3;

/// Scalar curvature of `A² g_round` on a quotient of S³ (conformal Laplacian
/// mass), at the class of `ξ`.
pub fn hj_scalar_curvature(group: &SpaceFormGroup, xi: &SpherePoint) -> Result<f64> {
    let dims = DimPair::new(3, 1)?;
    check_dims(group, xi, dims)?;
    let a = hj_metric_factor(group, xi, dims)?.sqrt();
    // w = ln A extended to ℝ⁴ as a function of y/|y|
    let w = |y: &[f64]| {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: Vec<f64> = y.iter().map(|v| v / r).collect();
        closed_form_sum(group, &u, dims).ln()
    };
    let (grad, trace) = Stencil::new(HJ_STEP).gradient_and_trace_hessian(&w, xi.coords());
    let lap = -trace;
    let grad2: f64 = grad.iter().map(|g| g * g).sum();
    Ok((6.0 + 4.0 * lap - 2.0 * grad2) / (a * a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HjSample {
    pub point: Vec<f64>,
    pub mass: f64,
    pub scalar_curvature: f64,
}

/// Seeded uniform sample of S^{ambient−1}.
pub fn sample_sphere_points(ambient: usize, count: usize, seed: u64) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| SpherePoint::random(ambient, &mut rng)).collect()
}

/// Mass and scalar curvature of the canonical metric at seeded points;
/// evaluated in parallel, returned in sample order.
pub fn hj_scan(group: &SpaceFormGroup, samples: usize, seed: u64) -> Result<Vec<HjSample>> {
    let dims = DimPair::new(3, 1)?;
    let points = sample_sphere_points(group.ambient(), samples, seed);
    points
        .par_iter()
        .map(|p| {
            Ok(HjSample {
                point: p.coords().to_vec(),
                mass: mass_closed_form(group, p, dims)?.value,
                scalar_curvature: hj_scalar_curvature(group, p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn d(n: usize, k: usize) -> DimPair {
        DimPair::new(n, k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lens_construction() {
        let rp3 = lens_group(2, &[1, 1]).unwrap();
        assert_eq!(rp3.order(), 2);
        assert!((&rp3.elements()[1] + DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
        let l7 = lens_group(7, &[1, 2]).unwrap();
        let v = validate_group(&l7);
        assert!(v.ok(), "{v:?}");
        assert_eq!(v.order, 7);
        assert!(matches!(lens_group(4, &[2, 1]), Err(GjmsError::NonFreeAction(_))));
        assert!(validate_group(&lens_group(5, &[1, 2]).unwrap()).ok());
    }

    #[test]
    fn validation_flags_defects() {
        let l5 = lens_group(5, &[1, 2]).unwrap();
        let mut missing = l5.elements().to_vec();
        missing.pop();
        let v = validate_group(&SpaceFormGroup::from_elements(missing, "broken").unwrap());
        assert!(!v.closed && !v.ok());

        let mut flipped = l5.elements().to_vec();
        let mut r = DMatrix::<f64>::identity(4, 4);
        r[(0, 0)] = -1.0;
        flipped.push(r);
        let v = validate_group(&SpaceFormGroup::from_elements(flipped, "reflected").unwrap());
        assert!(!v.orientation);

        let fixed = lens_group(4, &[1, 1]).unwrap().elements()[2].clone();
        let mut rot = DMatrix::<f64>::identity(4, 4);
        rot.view_mut((0, 0), (2, 2)).copy_from(&fixed.view((0, 0), (2, 2)));
        let g = SpaceFormGroup::generated_by(4, &[rot], "fixes a circle").unwrap();
        assert!(!validate_group(&g).free);
    }

    #[test]
    fn lens_spec_parsing() {
        let s: LensSpec = "L(7;1,2)".parse().unwrap();
        assert_eq!(s, LensSpec { p: 7, q: vec![1, 2] });
        assert_eq!(s.to_string(), "L(7;1,2)");
        assert_eq!(s.sphere_dim(), 3);
        for bad in ["L(7,2)", "L(;1)", "M(2;1,1)", "L(2;1,x)", "L(0;1)"] {
            assert!(bad.parse::<LensSpec>().is_err(), "{bad}");
        }
        assert!(matches!("L(4;2,1)".parse::<LensSpec>().unwrap().group(), Err(GjmsError::NonFreeAction(_))));
    }

    #[test]
    fn closed_form_examples() {
        let xi = SpherePoint::basis(4, 0);
        assert_eq!(mass_closed_form(&SpaceFormGroup::trivial(4), &xi, d(3, 1)).unwrap().value, 0.0);
        let rp3 = lens_group(2, &[1, 1]).unwrap();
        assert!(rel(mass_closed_form(&rp3, &xi, d(3, 1)).unwrap().value, 1.0 / (8.0 * PI)) < 1e-15);
        let l3 = lens_group(3, &[1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let p = SpherePoint::random(4, &mut rng);
            let a = mass_closed_form(&l3, &p, d(3, 1)).unwrap().value;
            assert!(rel(a, 1.0 / (2.0 * 3f64.sqrt() * PI)) < 1e-14);
        }
        let rp5 = lens_group(2, &[1, 1, 1]).unwrap();
        let a = mass_closed_form(&rp5, &SpherePoint::basis(6, 2), d(5, 2)).unwrap().value;
        assert!(rel(a, 1.0 / (32.0 * PI * PI)) < 1e-15);
        assert!(matches!(
            mass_closed_form(&rp3, &SpherePoint::basis(6, 0), d(5, 2)),
            Err(GjmsError::DimensionMismatch { .. })
        ));
        let s7 = SpaceFormGroup::trivial(8);
        assert!(matches!(
            mass_closed_form(&s7, &SpherePoint::basis(8, 0), d(7, 1)),
            Err(GjmsError::InvalidDims { .. })
        ));
    }

    #[test]
    fn limit_extraction_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cases = [
            (lens_group(2, &[1, 1]).unwrap(), d(3, 1)),
            (lens_group(7, &[1, 2]).unwrap(), d(3, 1)),
            (lens_group(2, &[1, 1, 1]).unwrap(), d(5, 2)),
        ];
        for (g, dims) in &cases {
            let xi = SpherePoint::random(g.ambient(), &mut rng);
            let exact = mass_closed_form(g, &xi, *dims).unwrap().value;
            let lim = mass_via_limit(g, &xi, *dims, &DEFAULT_LIMIT_RADII).unwrap();
            assert!(rel(lim.value, exact) < 1e-6, "{g}: {} vs {exact}", lim.value);
            assert_eq!(lim.method, MassMethod::LimitExtraction);
            assert!(lim.error_estimate.is_finite());
        }
        let triv = mass_via_limit(&SpaceFormGroup::trivial(4), &SpherePoint::basis(4, 1), d(3, 1), &DEFAULT_LIMIT_RADII)
            .unwrap();
        assert!(triv.value.abs() < 1e-10);
        assert!(mass_via_limit(&cases[0].0, &SpherePoint::basis(4, 0), d(3, 1), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn limit_extraction_homothety() {
        let g = lens_group(7, &[1, 2]).unwrap();
        let xi = SpherePoint::new(vec![0.3, -0.2, 0.8, 0.1]).unwrap();
        let dims = d(3, 1);
        let base = mass_via_limit_scaled(&g, &xi, dims, &DEFAULT_LIMIT_RADII, 1.0).unwrap();
        for c in [0.5, 3.0] {
            let s = mass_via_limit_scaled(&g, &xi, dims, &DEFAULT_LIMIT_RADII, c).unwrap();
            assert!(rel(s.chart_constant, base.chart_constant / (c * c)) < 1e-8);
            assert!(rel(s.report.value, base.report.value) < 1e-8);
        }
    }

    #[test]
    fn round_mass_is_chart_constant_times_center_weight() {
        let g = lens_group(2, &[1, 1]).unwrap();
        let lim = mass_via_limit_scaled(&g, &SpherePoint::basis(4, 0), d(3, 1), &DEFAULT_LIMIT_RADII, 1.0).unwrap();
        assert!(rel(lim.chart_constant, 1.0 / (4.0 * PI)) < 1e-8);
        assert!(rel(lim.report.value, 1.0 / (8.0 * PI)) < 1e-8);
    }

    #[test]
    fn covering_identity() {
        let dims = d(3, 1);
        let full = lens_group(4, &[1, 1]).unwrap();
        let sub = full.subgroup(&[full.elements()[2].clone()]).unwrap();
        assert_eq!(sub.order(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let xi = SpherePoint::random(4, &mut rng);
            assert!(covering_mass_residual(&sub, &full, &xi, dims).unwrap().abs() < 1e-12);
            assert_eq!(covering_mass_residual(&full, &full, &xi, dims).unwrap(), 0.0);
            let triv = SpaceFormGroup::trivial(4);
            assert!(covering_mass_residual(&triv, &full, &xi, dims).unwrap().abs() < 1e-15);
        }
        let other = lens_group(3, &[1, 1]).unwrap();
        assert!(matches!(
            covering_mass_residual(&other, &full, &SpherePoint::basis(4, 0), dims),
            Err(GjmsError::NotSubgroup(_))
        ));
    }

    #[test]
    fn coset_count() {
        let full = lens_group(8, &[1, 1]).unwrap();
        let g = full.elements()[1].clone();
        let sub = full.subgroup(&[&g * &g]).unwrap();
        assert_eq!(sub.order(), 4);
        assert_eq!(sub.coset_representatives(&full).unwrap().len(), 1);
    }

    #[test]
    fn hj_factor_examples() {
        let dims = d(3, 1);
        let xi = SpherePoint::basis(4, 0);
        let rp3 = lens_group(2, &[1, 1]).unwrap();
        assert!(rel(hj_metric_factor(&rp3, &xi, dims).unwrap(), (1.0 / (8.0 * PI)).powi(2)) < 1e-14);
        assert!(matches!(
            hj_metric_factor(&SpaceFormGroup::trivial(4), &xi, dims),
            Err(GjmsError::MetricUndefined { .. })
        ));
        let l7 = lens_group(7, &[1, 2]).unwrap();
        let a = hj_metric_factor(&l7, &SpherePoint::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap(), dims).unwrap();
        let b = hj_metric_factor(&l7, &SpherePoint::new(vec![0.6, 0.0, 0.8, 0.0]).unwrap(), dims).unwrap();
        assert!(a > 0.0 && b > 0.0 && rel(a, b) > 1e-3);
    }

    #[test]
    fn hj_curvature_on_projective_space_is_constant() {
        let rp3 = lens_group(2, &[1, 1]).unwrap();
        let samples = hj_scan(&rp3, 100, 11).unwrap();
        let target = 384.0 * PI * PI;
        for s in &samples {
            assert!(rel(s.scalar_curvature, target) < 1e-6, "{}", s.scalar_curvature);
        }
    }

    #[test]
    fn hj_scan_is_reproducible() {
        let l5 = lens_group(5, &[1, 2]).unwrap();
        assert_eq!(hj_scan(&l5, 16, 4).unwrap(), hj_scan(&l5, 16, 4).unwrap());
    }

    proptest! {
        #[test]
        fn mass_positive_and_invariant(seed in 0u64..2_000, p in 2u64..12) {
            let g = lens_group(p, &[1, if p > 2 && gcd(p, 3) == 1 { 3 } else { 1 }]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xi = SpherePoint::random(4, &mut rng);
            let a = mass_closed_form(&g, &xi, d(3, 1)).unwrap().value;
            prop_assert!(a > 0.0);
            for h in g.elements() {
                let b = mass_closed_form(&g, &xi.transformed(h), d(3, 1)).unwrap().value;
                prop_assert!((a - b).abs() < 1e-13 * a);
            }
        }

        #[test]
        fn covering_vanishes_on_lens_chain(seed in 0u64..2_000) {
            let full = lens_group(8, &[1, 3]).unwrap();
            let g = full.elements()[1].clone();
            let g2 = &g * &g;
            let g4 = &g2 * &g2;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xi = SpherePoint::random(4, &mut rng);
            let dims = d(3, 1);
            let s4 = full.subgroup(&[g4]).unwrap();
            let s2 = full.subgroup(&[g2]).unwrap();
            prop_assert!(covering_mass_residual(&s4, &s2, &xi, dims).unwrap().abs() < 1e-12);
            prop_assert!(covering_mass_residual(&s2, &full, &xi, dims).unwrap().abs() < 1e-12);
            prop_assert!(covering_mass_residual(&s4, &full, &xi, dims).unwrap().abs() < 1e-12);
        }
    }
}
