//! Numerical building blocks shared by the geometry modules.

pub mod fd;
pub mod quadrature;
pub mod richardson;

pub use fd::Stencil;
pub use quadrature::{composite_gauss_legendre, gauss_legendre, SphereQuadrature};
pub use richardson::{neville_to_zero, observed_order, richardson, Extrapolation};

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
