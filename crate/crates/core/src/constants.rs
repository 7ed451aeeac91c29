//! Constants of the flat model: sphere volumes, the Green-function
//! normalization `c_{n,k}`, and the action of the coordinate Laplacian
//! powers on homogeneous radial functions.
//!
//! Sign convention, used everywhere in this crate: the Laplacian is the
//! geometer's positive operator `Δ = -Σ ∂ᵢ²`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GjmsError, Result};

/// Dimension `n` together with the operator order index `k` of `P_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimPair {
    n: usize,
    k: usize,
}

impl DimPair {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 3 {
            return Err(GjmsError::InvalidDims { n, k, reason: "n must be at least 3" });
        }
        if k < 1 {
            return Err(GjmsError::InvalidDims { n, k, reason: "k must be at least 1" });
        }
        if n <= 2 * k {
            return Err(GjmsError::InvalidDims { n, k, reason: "n must exceed 2k" });
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// True when `2k+1 <= n <= 2k+3`, where the Green function has a
    /// finite constant term.
    pub fn mass_range(&self) -> bool {
        2 * self.k < self.n && self.n <= 2 * self.k + 3
    }

    /// `n - 2k`, always positive.
    pub fn weight(&self) -> usize {
        self.n - 2 * self.k
    }

    /// The singular exponent `2k - n` of the Green function.
    pub fn green_exponent(&self) -> f64 {
        -(self.weight() as f64)
    }
}

impl fmt::Display for DimPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, k={})", self.n, self.k)
    }
}

/// Degree of homogeneity of a function on `ℝⁿ∖{0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityDegree(pub f64);

impl HomogeneityDegree {
    pub fn is_integer(&self) -> bool {
        (self.0 - self.0.round()).abs() < 1e-12
    }
}

/// A rational multiple of a power of π, `num/den · π^pi_power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiMultiple {
    pub num: u128,
    pub den: u128,
    pub pi_power: u32,
}

impl PiMultiple {
    fn new(num: u128, den: u128, pi_power: u32) -> Self {
        let g = gcd(num, den);
        Self { num: num / g, den: den / g, pi_power }
    }

    fn scale(self, factor: u128) -> Self {
        Self::new(self.num * factor, self.den, self.pi_power)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64 * PI.powi(self.pi_power as i32)
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "{}/{}", self.num, self.den)?;
        }
        match self.pi_power {
            0 => Ok(()),
            1 => write!(f, "*pi"),
            p => write!(f, "*pi^{p}"),
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// `Γ(two_x / 2)` for positive half-integers and integers, by the
/// recursion `Γ(x+1) = xΓ(x)` from `Γ(1) = 1`, `Γ(1/2) = √π`.
pub fn half_integer_gamma(two_x: u32) -> f64 {
    assert!(two_x > 0, "gamma argument must be positive");
    let mut two_x = two_x;
    let mut acc = 1.0;
    while two_x > 2 {
        two_x -= 2;
        acc *= two_x as f64 / 2.0;
    }
    if two_x == 1 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// Volume of the unit `d`-sphere `2π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn vol_sphere(d: usize) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / half_integer_gamma(d as u32 + 1)
}

/// Exact form of [`vol_sphere`].
pub fn vol_sphere_exact(d: usize) -> PiMultiple {
    if d % 2 == 1 {
        // d + 1 = 2m: 2π^m / (m-1)!
        let m = (d as u32).div_ceil(2);
        let fact: u128 = (1..m as u128).product();
        PiMultiple::new(2, fact, m)
    } else {
        // d = 2m: 2^{m+1} π^m / (2m-1)!!
        let m = d as u32 / 2;
        let double_fact: u128 = (1..2 * m as u128).step_by(2).product();
        PiMultiple::new(1u128 << (m + 1), double_fact, m)
    }
}

/// Integer factor `2^{k-1}(k-1)!(n-2)(n-4)⋯(n-2k)` of `c_{n,k}`.
fn gjms_integer_factor(dims: DimPair) -> u128 {
    let k = dims.k() as u128;
    let n = dims.n() as u128;
    let pow2 = 1u128 << (k - 1);
    let fact: u128 = (1..k).product();
    let prod: u128 = (1..=k).map(|j| n - 2 * j).product();
    pow2 * fact * prod
}

/// `c_{n,k} = Vol(S^{n-1}) 2^{k-1}(k-1)!(n-2)(n-4)⋯(n-2k)`, the
/// normalization for which `Δ₀ᵏ r^{2k-n} = c_{n,k} δ₀` on `ℝⁿ`.
pub fn gjms_constant(dims: DimPair) -> f64 {
    vol_sphere(dims.n() - 1) * gjms_integer_factor(dims) as f64
}

pub fn gjms_constant_exact(dims: DimPair) -> PiMultiple {
    vol_sphere_exact(dims.n() - 1).scale(gjms_integer_factor(dims))
}

/// `C` such that `Δ₀ᵏ r^α = C r^{α-2k}` away from the origin.
///
/// One factor per Laplacian: `Δ₀ r^β = -β(β+n-2) r^{β-2}`.
pub fn radial_power_coefficient(dims: DimPair, deg: HomogeneityDegree) -> f64 {
    radial_power_coefficient_nk(dims.n(), dims.k(), deg.0)
}

pub(crate) fn radial_power_coefficient_nk(n: usize, k: usize, alpha: f64) -> f64 {
    let n = n as f64;
    (0..k)
        .map(|j| {
            let beta = alpha - 2.0 * j as f64;
            -(beta * (beta + n - 2.0))
        })
        .product()
}

/// Whether `Δ₀ᵏ` is invertible on functions homogeneous of degree `α`:
/// iff `α` is not an integer or `2k - n < α < 0`.
pub fn homogeneous_invertibility(dims: DimPair, deg: HomogeneityDegree) -> bool {
    if !deg.is_integer() {
        return true;
    }
    let lower = dims.green_exponent();
    deg.0 > lower && deg.0 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dims(n: usize, k: usize) -> DimPair {
        DimPair::new(n, k).unwrap()
    }

    #[test]
    fn dim_pair_validation() {
        assert!(DimPair::new(4, 2).is_err());
        assert!(DimPair::new(2, 0).is_err());
        assert!(DimPair::new(5, 0).is_err());
        assert!(dims(5, 2).mass_range());
        assert!(dims(7, 2).mass_range());
        assert!(!dims(8, 2).mass_range());
        assert!(dims(3, 1).mass_range());
        assert!(!dims(6, 1).mass_range());
    }

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(vol_sphere(1), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(vol_sphere(2), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(vol_sphere(4), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(vol_sphere(0), 2.0, max_relative = 1e-15);
        for d in 0..12 {
            assert_relative_eq!(vol_sphere(d), vol_sphere_exact(d).value(), max_relative = 1e-14);
        }
        assert_eq!(vol_sphere_exact(4).to_string(), "8/3*pi^2");
        assert_eq!(vol_sphere_exact(3).to_string(), "2*pi^2");
    }

    #[test]
    fn gamma_recursion() {
        assert_relative_eq!(half_integer_gamma(1), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(half_integer_gamma(2), 1.0);
        assert_relative_eq!(half_integer_gamma(10), 24.0);
        assert_relative_eq!(half_integer_gamma(5), 0.75 * PI.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn gjms_constant_values() {
        assert_relative_eq!(gjms_constant(dims(3, 1)), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(gjms_constant(dims(5, 2)), 16.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(gjms_constant(dims(5, 1)), 8.0 * PI * PI, max_relative = 1e-15);
        assert_eq!(gjms_constant_exact(dims(5, 2)).to_string(), "16*pi^2");
        assert_eq!(gjms_constant_exact(dims(3, 1)).to_string(), "4*pi");
        // Vol(S⁶) = 16π³/15, times 2·1·5·3 = 30
        assert_eq!(gjms_constant_exact(dims(7, 2)).to_string(), "32*pi^3");
    }

    #[test]
    fn radial_coefficients() {
        assert_eq!(radial_power_coefficient(dims(3, 1), HomogeneityDegree(-1.0)), 0.0);
        assert_eq!(radial_power_coefficient(dims(5, 2), HomogeneityDegree(-1.0)), 0.0);
        assert_eq!(radial_power_coefficient(dims(5, 1), HomogeneityDegree(2.0)), -10.0);
    }

    #[test]
    fn invertibility() {
        let d = dims(5, 2);
        assert!(homogeneous_invertibility(d, HomogeneityDegree(-0.5)));
        assert!(!homogeneous_invertibility(d, HomogeneityDegree(1.0)));
        assert!(!homogeneous_invertibility(d, HomogeneityDegree(-1.0)));
        assert!(homogeneous_invertibility(d, HomogeneityDegree(2.5)));
        assert!(!homogeneous_invertibility(d, HomogeneityDegree(0.0)));
    }

    fn valid_dims() -> impl Strategy<Value = DimPair> {
        (1usize..5, 1usize..6).prop_map(|(k, extra)| DimPair::new(2 * k + extra, k).unwrap())
    }

    proptest! {
        #[test]
        fn constant_positive(d in valid_dims()) {
            prop_assert!(gjms_constant(d) > 0.0);
            prop_assert!((gjms_constant(d) / gjms_constant_exact(d).value() - 1.0).abs() < 1e-13);
        }

        #[test]
        fn kernel_degree_is_annihilated(d in valid_dims()) {
            let c = radial_power_coefficient(d, HomogeneityDegree(d.green_exponent()));
            prop_assert_eq!(c, 0.0);
        }

        #[test]
        fn coefficient_composes(n in 3usize..12, k1 in 1usize..4, k2 in 1usize..4, alpha in -8.0f64..8.0) {
            let whole = radial_power_coefficient_nk(n, k1 + k2, alpha);
            let split = radial_power_coefficient_nk(n, k2, alpha)
                * radial_power_coefficient_nk(n, k1, alpha - 2.0 * k2 as f64);
            prop_assert!((whole - split).abs() <= 1e-9 * (1.0 + whole.abs()));
        }

        #[test]
        fn kernel_implies_not_invertible(d in valid_dims(), a in -14i32..10) {
            let deg = HomogeneityDegree(a as f64);
            if radial_power_coefficient(d, deg) == 0.0 {
                prop_assert!(!homogeneous_invertibility(d, deg));
            }
        }
    }
}
