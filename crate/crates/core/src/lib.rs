//! Green functions and conformal masses of GJMS operators.
//!
//! Conventions used throughout:
//! * `Δ = −Σ ∂ᵢ²` is the nonnegative Laplacian, and `δ = −∇^i` is the
//!   divergence on 1-forms, so `δd = Δ` on functions.
//! * A dimension pair `(n, k)` has `n > 2k`; `P_k` has order `2k` and its
//!   Green function is singular like `c_{n,k}⁻¹ r^{2k−n}`.
//! * Stereographic charts have the conformal factor `2/(1+|x|²)`.

pub mod asymptotic;
pub mod calculus;
pub mod constants;
pub mod error;
pub mod field;
pub mod green;
pub mod moebius;
pub mod numerics;
pub mod space_forms;

pub use asymptotic::{
    adm_integral, asymptotic_flatness, blowup_profile, mk_surface_integral, thm51_check, BlowupProfile, SurfaceMass,
    Thm51Check,
};
pub use calculus::{
    conformal_curvature, covariance_residual, dirac_pairing, gjms_second_term_residual, paneitz_apply, q2_curvature,
    ChartCalculus, CurvaturePack, DiracGrid,
};
pub use constants::{
    gjms_constant, gjms_constant_exact, homogeneous_invertibility, radial_power_coefficient, vol_sphere, DimPair,
    HomogeneityDegree, PiMultiple,
};
pub use error::{GjmsError, Result};
pub use field::{BoxDomain, ScalarField};
pub use green::{
    chart_transport_factor, conformal_transport_green, green_flat, green_space_form, green_sphere, ChartPullback,
    FlatChartGreen, Geometry, GreenKernel, Kernel,
};
pub use moebius::{
    chordal_distance, moebius_apply, moebius_identity_residual, round_factor, ChartFrame, MoebiusMap, Move,
    SpherePoint,
};
pub use numerics::{Extrapolation, SphereQuadrature, Stencil};
pub use space_forms::{
    covering_mass_residual, hj_metric_factor, hj_scalar_curvature, hj_scan, lens_group, mass_closed_form,
    mass_via_limit, mass_via_limit_scaled, sample_sphere_points, validate_group, GroupValidation, HjSample, LensSpec,
    MassMethod, MassReport, SpaceFormGroup,
};
