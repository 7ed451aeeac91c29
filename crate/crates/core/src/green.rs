//! Green functions of `P_k` on flat space, the round sphere and sphere
//! quotients, and their transport under conformal changes.
//!
//! All kernels are closed forms. The sphere kernel is the chordal power
//! `c_{n,k}⁻¹ |p − q|^{2k−n}`; a quotient kernel sums it over the group.

use std::sync::Arc;

use crate::constants::{gjms_constant, DimPair};
use crate::error::{GjmsError, Result};
use crate::field::ScalarField;
use crate::moebius::{chordal_distance, ChartFrame, SpherePoint};
use crate::numerics::{dist, dot};
use crate::space_forms::SpaceFormGroup;

/// Below this separation the kernel power is dominated by roundoff.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

fn check_separation(distance: f64) -> Result<()> {
    if distance < SINGULAR_THRESHOLD {
        Err(GjmsError::Singularity { distance, threshold: SINGULAR_THRESHOLD })
    } else {
        Ok(())
    }
}

pub fn green_flat(dims: DimPair, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != dims.n() || y.len() != dims.n() {
        return Err(GjmsError::DimensionMismatch { expected: dims.n(), got: x.len().max(y.len()) });
    }
    let d = dist(x, y);
    check_separation(d)?;
    Ok(d.powf(dims.green_exponent()) / gjms_constant(dims))
}

pub fn green_sphere(dims: DimPair, p: &SpherePoint, q: &SpherePoint) -> Result<f64> {
    check_ambient(dims, p)?;
    check_ambient(dims, q)?;
    let d = chordal_distance(p, q);
    check_separation(d)?;
    Ok(d.powf(dims.green_exponent()) / gjms_constant(dims))
}

/// Covering sum `Σ_γ G_sphere(x, γ·y)` over the lifts `x`, `y`.
pub fn green_space_form(group: &SpaceFormGroup, dims: DimPair, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    check_ambient(dims, x)?;
    if group.ambient() != dims.n() + 1 {
        return Err(GjmsError::DimensionMismatch { expected: dims.n() + 1, got: group.ambient() });
    }
    group
        .elements()
        .iter()
        .map(|g| green_sphere(dims, x, &y.transformed(g)))
        .sum()
}

fn check_ambient(dims: DimPair, p: &SpherePoint) -> Result<()> {
    if p.coords().len() != dims.n() + 1 {
        return Err(GjmsError::DimensionMismatch { expected: dims.n() + 1, got: p.coords().len() });
    }
    Ok(())
}

/// A two-point kernel on some coordinate space.
pub trait Kernel: Send + Sync {
    fn dims(&self) -> DimPair;
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64>;
}

#[derive(Debug, Clone)]
pub enum Geometry {
    Flat,
    Sphere,
    SpaceForm(Arc<SpaceFormGroup>),
}

impl Geometry {
    pub fn tag(&self) -> &'static str {
        match self {
            Geometry::Flat => "flat",
            Geometry::Sphere => "sphere",
            Geometry::SpaceForm(_) => "space_form",
        }
    }
}

/// Closed-form Green kernel. Flat kernels take points of ℝⁿ; sphere and
/// quotient kernels take ambient coordinates of (lifted) sphere points.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub geometry: Geometry,
    pub dims: DimPair,
}

impl GreenKernel {
    pub fn flat(dims: DimPair) -> Self {
        Self { geometry: Geometry::Flat, dims }
    }

    pub fn sphere(dims: DimPair) -> Self {
        Self { geometry: Geometry::Sphere, dims }
    }

    pub fn space_form(group: SpaceFormGroup, dims: DimPair) -> Self {
        Self { geometry: Geometry::SpaceForm(Arc::new(group)), dims }
    }
}

impl Kernel for GreenKernel {
    fn dims(&self) -> DimPair {
        self.dims
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.geometry {
            Geometry::Flat => green_flat(self.dims, x, y),
            Geometry::Sphere => green_sphere(self.dims, &SpherePoint::new(x.to_vec())?, &SpherePoint::new(y.to_vec())?),
            Geometry::SpaceForm(g) => {
                green_space_form(g, self.dims, &SpherePoint::new(x.to_vec())?, &SpherePoint::new(y.to_vec())?)
            }
        }
    }
}

/// `G(x, y) / (φ(x) φ(y))`, the kernel of `P_k` for `φ^{4/(n−2k)} g`.
pub fn conformal_transport_green<K: Kernel + ?Sized>(
    kernel: &K,
    factor: &ScalarField,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let (fx, fy) = (factor.eval(x), factor.eval(y));
    for v in [fx, fy] {
        if !(v > 0.0) {
            return Err(GjmsError::NonPositiveFactor(v));
        }
    }
    Ok(kernel.eval(x, y)? / (fx * fy))
}

/// A sphere or quotient kernel read in a stereographic chart (no
/// conformal transport: the values are those of the round kernel).
#[derive(Debug, Clone)]
pub struct ChartPullback {
    pub kernel: GreenKernel,
    pub frame: ChartFrame,
}

impl Kernel for ChartPullback {
    fn dims(&self) -> DimPair {
        self.kernel.dims
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let p = self.frame.from_chart(x)?;
        let q = self.frame.from_chart(y)?;
        self.kernel.eval(p.coords(), q.coords())
    }
}

/// The factor `w(x) = ((1+|x|²)/2)^{(n−2k)/2}` for which
/// `eucl = w^{4/(n−2k)} g_round` in the chart.
pub fn chart_transport_factor(dims: DimPair) -> ScalarField {
    let e = dims.weight() as f64 / 2.0;
    ScalarField::new(format!("chart_weight{dims}"), move |x| ((1.0 + dot(x, x)) / 2.0).powf(e))
}

/// Green function of `P_k` for the flat chart metric on a quotient, with the
/// identity term of the covering sum written directly as the flat kernel
/// (to which it is identically equal) so that no cancellation occurs near
/// the pole.
#[derive(Debug, Clone)]
pub struct FlatChartGreen {
    dims: DimPair,
    frame: ChartFrame,
    others: Vec<nalgebra::DMatrix<f64>>,
    weight: ScalarField,
}

impl FlatChartGreen {
    pub fn new(group: &SpaceFormGroup, dims: DimPair, frame: ChartFrame) -> Result<Self> {
        if group.ambient() != dims.n() + 1 || frame.dim() != dims.n() {
            return Err(GjmsError::DimensionMismatch { expected: dims.n() + 1, got: group.ambient() });
        }
        Ok(Self {
            dims,
            frame,
            others: group.non_identity().cloned().collect(),
            weight: chart_transport_factor(dims),
        })
    }

    pub fn frame(&self) -> &ChartFrame {
        &self.frame
    }

    /// `w(0)`, the transport factor at the chart centre.
    pub fn center_weight(&self) -> f64 {
        self.weight.eval(&vec![0.0; self.dims.n()])
    }

    /// Smooth part: the kernel minus the flat singular term.
    pub fn regular_part(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let p = self.frame.from_chart(x)?;
        let q = self.frame.from_chart(y)?;
        let mut sum = 0.0;
        for g in &self.others {
            sum += green_sphere(self.dims, &p, &q.transformed(g))?;
        }
        Ok(sum / (self.weight.eval(x) * self.weight.eval(y)))
    }
}

impl Kernel for FlatChartGreen {
    fn dims(&self) -> DimPair {
        self.dims
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(green_flat(self.dims, x, y)? + self.regular_part(x, y)?)
    }
}
