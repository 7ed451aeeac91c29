//! Curvature and GJMS operators of conformally flat metrics `e^{2f} eucl`
//! on chart domains, by nested fourth-order finite differences.
//!
//! Only first and second derivatives of `f` enter the curvature, through
//! the conformal transformation laws over a flat base:
//!
//! ```text
//! Ric  = −(n−2)(∇²f − df⊗df) + (Δ₀f − (n−2)|df|²) δ
//! Scal = e^{−2f} (2(n−1) Δ₀f − (n−1)(n−2) |df|²)
//! Δ_g u = −e^{−2f} (Σ∂ᵢ²u + (n−2)⟨df, du⟩)
//! ```
//!
//! with `Δ₀ = −Σ∂ᵢ²`. Higher derivatives are obtained by applying the same
//! stencils to closures that themselves evaluate stencils.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::DimPair;
use crate::error::{GjmsError, Result};
use crate::field::ScalarField;
use crate::numerics::{composite_gauss_legendre, dot, observed_order, SphereQuadrature, Stencil};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvaturePack {
    pub scal: f64,
    pub ric: Vec<Vec<f64>>,
    pub schouten: Vec<Vec<f64>>,
    pub j: f64,
    /// `e^{2f}` at the point, the metric is this multiple of `δ`.
    pub metric_factor: f64,
}

impl CurvaturePack {
    /// `|P|²_g = e^{−4f} Σ P_ij²`.
    pub fn schouten_norm2(&self) -> f64 {
        let s: f64 = self.schouten.iter().flatten().map(|v| v * v).sum();
        s / (self.metric_factor * self.metric_factor)
    }

    /// `tr_g P`, which equals `J` exactly.
    pub fn schouten_trace(&self) -> f64 {
        (0..self.schouten.len()).map(|i| self.schouten[i][i]).sum::<f64>() / self.metric_factor
    }
}

/// Finite-difference calculus on ℝⁿ with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartCalculus {
    n: usize,
    stencil: Stencil,
}

type Field<'a> = dyn Fn(&[f64]) -> f64 + 'a;

impl ChartCalculus {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 3 {
            return Err(GjmsError::InvalidInput(format!("chart dimension {n} < 3")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(GjmsError::InvalidInput(format!("step {h}")));
        }
        Ok(Self { n, stencil: Stencil::new(h) })
    }

    pub fn step(&self) -> f64 {
        self.stencil.h
    }

    pub fn halved(&self) -> Self {
        Self { n: self.n, stencil: self.stencil.halved() }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn check(&self, fields: &[&ScalarField], x: &[f64], levels: usize) -> Result<()> {
        if x.len() != self.n {
            return Err(GjmsError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let reach = levels as f64 * self.stencil.reach();
        fields.iter().try_for_each(|f| f.check_stencil(x, reach))
    }

    /// Curvature of `e^{2f} eucl` from the 2-jet of `f`.
    fn pack(&self, f: &Field, y: &[f64]) -> CurvaturePack {
        let n = self.n;
        let nf = self.nf();
        let g = self.stencil.gradient(f, y);
        let hess = self.stencil.hessian(f, y);
        let lap0 = -(0..n).map(|i| hess[i][i]).sum::<f64>();
        let df2 = dot(&g, &g);
        let e2f = (2.0 * f(y)).exp();
        let ric: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let diag = if i == j { lap0 - (nf - 2.0) * df2 } else { 0.0 };
                        -(nf - 2.0) * (hess[i][j] - g[i] * g[j]) + diag
                    })
                    .collect()
            })
            .collect();
        let scal = (2.0 * (nf - 1.0) * lap0 - (nf - 1.0) * (nf - 2.0) * df2) / e2f;
        let j = scal / (2.0 * (nf - 1.0));
        let schouten = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let gab = if a == b { e2f } else { 0.0 };
                        (ric[a][b] - j * gab) / (nf - 2.0)
                    })
                    .collect()
            })
            .collect();
        CurvaturePack { scal, ric, schouten, j, metric_factor: e2f }
    }

    /// `J` alone, from the gradient and the Laplacian of `f`.
    fn j_at(&self, f: &Field, y: &[f64]) -> f64 {
        let (g, tr) = self.stencil.gradient_and_trace_hessian(f, y);
        (-tr - 0.5 * (self.nf() - 2.0) * dot(&g, &g)) * (-2.0 * f(y)).exp()
    }

    fn scal_at(&self, f: &Field, y: &[f64]) -> f64 {
        2.0 * (self.nf() - 1.0) * self.j_at(f, y)
    }

    /// `Δ_g u` for `g = e^{2f} eucl`.
    fn lap_g(&self, f: &Field, u: &Field, y: &[f64]) -> f64 {
        let (du, tr) = self.stencil.gradient_and_trace_hessian(u, y);
        let df = self.stencil.gradient(f, y);
        -(-2.0 * f(y)).exp() * (tr + (self.nf() - 2.0) * dot(&df, &du))
    }

    /// `δω = −∇^i ω_i` for a 1-form given by components.
    fn codifferential(&self, f: &Field, omega: &dyn Fn(&[f64], usize) -> f64, y: &[f64]) -> f64 {
        let div0 = self.stencil.divergence(omega, y);
        let df = self.stencil.gradient(f, y);
        let contraction: f64 = (0..self.n).map(|k| df[k] * omega(y, k)).sum();
        -(-2.0 * f(y)).exp() * (div0 + (self.nf() - 2.0) * contraction)
    }

    fn q2_raw(&self, f: &Field, y: &[f64]) -> f64 {
        let nf = self.nf();
        let pack = self.pack(f, y);
        let j_field = |z: &[f64]| self.j_at(f, z);
        self.lap_g(f, &j_field, y) + 0.5 * nf * pack.j * pack.j - 2.0 * pack.schouten_norm2()
    }

    /// Component `i` of `T du` with `T = (n−2)J g − 4P` (index raised).
    fn t_du(&self, f: &Field, u: &Field, y: &[f64], i: usize) -> f64 {
        let pack = self.pack(f, y);
        let du = self.stencil.gradient(u, y);
        let pdu: f64 = (0..self.n).map(|j| pack.schouten[i][j] * du[j]).sum();
        (self.nf() - 2.0) * pack.j * du[i] - 4.0 * pdu / pack.metric_factor
    }

    fn paneitz_raw(&self, k: usize, f: &Field, u: &Field, y: &[f64]) -> Result<f64> {
        let nf = self.nf();
        match k {
            1 => Ok(self.lap_g(f, u, y) + (nf - 2.0) / (4.0 * (nf - 1.0)) * self.scal_at(f, y) * u(y)),
            2 => {
                if self.n < 5 {
                    return Err(GjmsError::InvalidDims { n: self.n, k, reason: "P₂ needs n ≥ 5" });
                }
                let lap_u = |z: &[f64]| self.lap_g(f, u, z);
                let bilap = self.lap_g(f, &lap_u, y);
                let omega = |z: &[f64], i: usize| self.t_du(f, u, z, i);
                let divergence = self.codifferential(f, &omega, y);
                Ok(bilap + divergence + 0.5 * (nf - 4.0) * self.q2_raw(f, y) * u(y))
            }
            _ => Err(GjmsError::Unsupported(format!("P_{k}: only k = 1, 2 have closed forms"))),
        }
    }

    pub fn curvature(&self, f: &ScalarField, x: &[f64]) -> Result<CurvaturePack> {
        self.check(&[f], x, 1)?;
        Ok(self.pack(&f.as_fn(), x))
    }

    /// `Q₂ = Δ_g J + (n/2) J² − 2|P|²`.
    pub fn q2(&self, f: &ScalarField, x: &[f64]) -> Result<f64> {
        if self.n < 5 {
            return Err(GjmsError::InvalidDims { n: self.n, k: 2, reason: "Q₂ needs n ≥ 5" });
        }
        self.check(&[f], x, 2)?;
        Ok(self.q2_raw(&f.as_fn(), x))
    }

    /// `Δ_g u` at `x`.
    pub fn laplacian(&self, f: &ScalarField, u: &ScalarField, x: &[f64]) -> Result<f64> {
        self.check(&[f, u], x, 1)?;
        Ok(self.lap_g(&f.as_fn(), &u.as_fn(), x))
    }

    /// `P₁u = Δu + (n−2)/(4(n−1)) Scal u` or
    /// `P₂u = Δ²u + δ(T du) + ((n−4)/2) Q₂ u`.
    pub fn paneitz(&self, k: usize, f: &ScalarField, u: &ScalarField, x: &[f64]) -> Result<f64> {
        self.check(&[f, u], x, k)?;
        self.paneitz_raw(k, &f.as_fn(), &u.as_fn(), x)
    }

    /// Signed `P̃u − φ^{−(n+2k)/(n−2k)} P(φu)` for `g̃ = φ^{4/(n−2k)} g`.
    pub fn covariance_defect(
        &self,
        k: usize,
        f: &ScalarField,
        phi: &ScalarField,
        u: &ScalarField,
        x: &[f64],
    ) -> Result<(f64, f64)> {
        let dims = DimPair::new(self.n, k)?;
        let p0 = phi.eval(x);
        if !(p0 > 0.0) {
            return Err(GjmsError::NonPositiveFactor(p0));
        }
        let w = dims.weight() as f64;
        let f_tilde = f.plus_scaled_log(phi, 2.0 / w);
        let phi_u = phi.times(u);
        let lhs = self.paneitz(k, &f_tilde, u, x)?;
        let rhs = p0.powf(-(self.nf() + 2.0 * k as f64) / w) * self.paneitz(k, f, &phi_u, x)?;
        Ok((lhs - rhs, lhs.abs().max(rhs.abs())))
    }

    /// `R(w) = P₂w − [Δ²w + 2Tw + (n/2)JΔw − (2−n/2)Δ(Jw)]`, with
    /// `Tw = 2P^{ij}∇²_{ij}w + ⟨dJ, dw⟩`.
    ///
    /// The `Δ²w` terms are the same computation on both sides and are
    /// left out of both.
    fn second_term_remainder(&self, f: &Field, w: &Field, y: &[f64]) -> f64 {
        let n = self.n;
        let nf = self.nf();
        let s = &self.stencil;
        let pack = self.pack(f, y);
        let e2f = pack.metric_factor;
        let j_field = |z: &[f64]| self.j_at(f, z);

        let omega = |z: &[f64], i: usize| self.t_du(f, w, z, i);
        let p2_tail = self.codifferential(f, &omega, y) + 0.5 * (nf - 4.0) * self.q2_raw(f, y) * w(y);

        let df = s.gradient(f, y);
        let dw = s.gradient(w, y);
        let hw = s.hessian(w, y);
        let dfdw = dot(&df, &dw);
        let mut p_hess = 0.0;
        for a in 0..n {
            for b in 0..n {
                let christoffel = df[b] * dw[a] + df[a] * dw[b] - if a == b { dfdw } else { 0.0 };
                p_hess += pack.schouten[a][b] * (hw[a][b] - christoffel);
            }
        }
        let dj = s.gradient(&j_field, y);
        let t_w = 2.0 * p_hess / (e2f * e2f) + dot(&dj, &dw) / e2f;
        let jw = |z: &[f64]| j_field(z) * w(z);
        let lap_w = self.lap_g(f, w, y);
        let lap_jw = self.lap_g(f, &jw, y);
        p2_tail - (2.0 * t_w + 0.5 * nf * pack.j * lap_w - (2.0 - 0.5 * nf) * lap_jw)
    }

    /// Signed `R(u)/u − R(v)/v` and the operator scale `max |P₂w / w|`.
    pub fn second_term_defect(&self, f: &ScalarField, u: &ScalarField, v: &ScalarField, x: &[f64]) -> Result<(f64, f64)> {
        self.check(&[f, u, v], x, 2)?;
        let (u0, v0) = (u.eval(x), v.eval(x));
        if u0.abs() < 1e-12 || v0.abs() < 1e-12 {
            return Err(GjmsError::VanishingTestFunction);
        }
        let ff = f.as_fn();
        let ru = self.second_term_remainder(&ff, &u.as_fn(), x);
        let rv = self.second_term_remainder(&ff, &v.as_fn(), x);
        let pu = self.paneitz_raw(2, &ff, &u.as_fn(), x)?;
        let pv = self.paneitz_raw(2, &ff, &v.as_fn(), x)?;
        Ok((ru / u0 - rv / v0, (pu / u0).abs().max((pv / v0).abs())))
    }
}

/// Two-step study of a defect that vanishes in the continuum limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStudy {
    pub coarse_step: f64,
    pub coarse: f64,
    pub fine: f64,
    /// `log₂(|coarse| / |fine|)`.
    pub observed_order: f64,
    /// `(16·fine − coarse) / 15`.
    pub extrapolated: f64,
    pub scale: f64,
}

impl StepStudy {
    fn from_pair(h: f64, coarse: (f64, f64), fine: (f64, f64)) -> Self {
        Self {
            coarse_step: h,
            coarse: coarse.0,
            fine: fine.0,
            observed_order: observed_order(coarse.0, fine.0, 2.0),
            extrapolated: (16.0 * fine.0 - coarse.0) / 15.0,
            scale: fine.1,
        }
    }

    pub fn relative_extrapolated(&self) -> f64 {
        self.extrapolated.abs() / self.scale
    }
}

pub fn covariance_study(
    k: usize,
    f: &ScalarField,
    phi: &ScalarField,
    u: &ScalarField,
    x: &[f64],
    h: f64,
) -> Result<StepStudy> {
    let c = ChartCalculus::new(x.len(), h)?;
    let coarse = c.covariance_defect(k, f, phi, u, x)?;
    let fine = c.halved().covariance_defect(k, f, phi, u, x)?;
    Ok(StepStudy::from_pair(h, coarse, fine))
}

pub fn second_term_study(f: &ScalarField, u: &ScalarField, v: &ScalarField, x: &[f64], h: f64) -> Result<StepStudy> {
    let c = ChartCalculus::new(x.len(), h)?;
    let coarse = c.second_term_defect(f, u, v, x)?;
    let fine = c.halved().second_term_defect(f, u, v, x)?;
    Ok(StepStudy::from_pair(h, coarse, fine))
}

fn calc(n: usize, x: &[f64]) -> Result<ChartCalculus> {
    if x.len() != n {
        return Err(GjmsError::DimensionMismatch { expected: n, got: x.len() });
    }
    ChartCalculus::new(n, DEFAULT_STEP)
}

pub fn conformal_curvature(f: &ScalarField, x: &[f64], n: usize) -> Result<CurvaturePack> {
    calc(n, x)?.curvature(f, x)
}

pub fn q2_curvature(f: &ScalarField, x: &[f64], n: usize) -> Result<f64> {
    calc(n, x)?.q2(f, x)
}

pub fn paneitz_apply(k: usize, f: &ScalarField, u: &ScalarField, x: &[f64], n: usize) -> Result<f64> {
    calc(n, x)?.paneitz(k, f, u, x)
}

/// Absolute covariance defect at the default step.
pub fn covariance_residual(
    k: usize,
    f: &ScalarField,
    phi: &ScalarField,
    u: &ScalarField,
    x: &[f64],
    n: usize,
) -> Result<f64> {
    Ok(calc(n, x)?.covariance_defect(k, f, phi, u, x)?.0.abs())
}

/// Step-extrapolated `|R(u)/u − R(v)/v|` over the default steps `{h, h/2}`.
pub fn gjms_second_term_residual(f: &ScalarField, u: &ScalarField, v: &ScalarField, x: &[f64], n: usize) -> Result<f64> {
    if n < 5 {
        return Err(GjmsError::InvalidDims { n, k: 2, reason: "P₂ needs n ≥ 5" });
    }
    calc(n, x)?;
    Ok(second_term_study(f, u, v, x, 4.0 * DEFAULT_STEP)?.extrapolated.abs())
}

/// Polar quadrature for [`dirac_pairing`] on the ball inscribed in
/// `[−half_width, half_width]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracGrid {
    pub half_width: f64,
    pub radial_panels: usize,
    pub radial_order: usize,
    /// Angular rule parameter of [`SphereQuadrature`].
    pub angular: usize,
    pub step: f64,
}

impl DiracGrid {
    /// Refinement level `level = 0, 1, 2, ...` for a test supported in the
    /// unit ball. The angular rule grows slowly in high dimension, where
    /// its node count is `2 m^{n−1}`.
    pub fn level(dims: DimPair, half_width: f64, level: usize) -> Self {
        let base_angular = if dims.n() <= 5 { 3 } else { 2 };
        Self {
            half_width,
            radial_panels: 4 << level,
            radial_order: 8,
            angular: base_angular + level.min(1),
            step: 0.04 / (1 << level) as f64,
        }
    }
}

/// `Δ₀ᵏ u` by nested stencils.
fn lap0_power(s: &Stencil, u: &Field, k: usize, x: &[f64]) -> f64 {
    if k == 0 {
        return u(x);
    }
    let inner = |y: &[f64]| lap0_power(s, u, k - 1, y);
    -s.gradient_and_trace_hessian(&inner, x).1
}

/// `∫ r^{2k−n} Δ₀ᵏ(test) dx`, which equals `c_{n,k} test(0)` for tests
/// supported in the ball. Integrated in polar coordinates, where the
/// Jacobian turns the weight into the smooth `r^{2k−1}`.
pub fn dirac_pairing(dims: DimPair, test: &ScalarField, grid: &DiracGrid) -> Result<f64> {
    let n = dims.n();
    let k = dims.k();
    let s = Stencil::new(grid.step);
    let l = grid.half_width;
    let sphere = SphereQuadrature::new(n - 1, grid.angular);

    // support check: the test and its stencil neighbourhood vanish near r = L
    let reach = 2.0 * k as f64 * s.reach();
    let scale = test.eval(&vec![0.0; n]).abs().max(1.0);
    for r in [l - reach, l - 0.5 * reach, l] {
        for (theta, _) in sphere.iter() {
            let y: Vec<f64> = theta.iter().map(|t| r * t).collect();
            if test.eval(&y).abs() > 1e-12 * scale {
                return Err(GjmsError::SupportTouchesBoundary);
            }
        }
    }

    let radial = composite_gauss_legendre(grid.radial_panels, grid.radial_order, 0.0, l);
    let u = test.as_fn();
    let shells: Vec<f64> = radial
        .par_iter()
        .map(|&(r, wr)| {
            let mut acc = 0.0;
            let mut y = vec![0.0; n];
            for (theta, wt) in sphere.iter() {
                y.iter_mut().zip(theta).for_each(|(a, t)| *a = r * t);
                acc += wt * lap0_power(&s, &u, k, &y);
            }
            wr * r.powi(2 * k as i32 - 1) * acc
        })
        .collect();
    Ok(shells.iter().sum())
}
