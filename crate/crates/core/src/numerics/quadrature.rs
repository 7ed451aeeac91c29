//! Gauss rules on intervals and product rules on spheres.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};

/// `(node, weight)` pairs of the `m`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(m).expect("rule needs at least one node"));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_gauss_legendre(panels: usize, m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let width = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * width;
            gauss_legendre(m, lo, lo + width)
        })
        .collect()
}

/// Product quadrature on the unit sphere `Sᵈ ⊂ ℝ^{d+1}`.
///
/// Hyperspherical coordinates: `d - 1` polar angles, each integrated by a
/// Gauss–Jacobi rule in `t = cos θ` that absorbs the `sin^j θ` measure
/// factor, and one azimuth integrated by the uniform rule with `2m` nodes.
/// Exact for polynomials of degree `< 2m` in the ambient coordinates.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(dim: usize, m: usize) -> Self {
        assert!(dim >= 1, "sphere dimension must be at least 1");
        assert!(m >= 1);
        let azimuth: Vec<(f64, f64)> = (0..2 * m)
            .map(|j| (PI * j as f64 / m as f64, PI / m as f64))
            .collect();
        // polar rules for sin^{j} θ with j = dim-1, ..., 1
        let polar: Vec<Vec<(f64, f64)>> = (1..dim)
            .rev()
            .map(|j| {
                let alpha = (j as f64 - 1.0) / 2.0;
                let a = FiniteAboveNegOneF64::try_from(alpha).expect("exponent above -1");
                GaussJacobi::new(NonZeroUsize::new(m).unwrap(), a, a)
                    .as_node_weight_pairs()
                    .to_vec()
            })
            .collect();

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut stack: Vec<(Vec<f64>, f64, f64)> = vec![(Vec::new(), 1.0, 1.0)];
        // each entry: coordinates fixed so far, running product of sines, weight
        for rule in &polar {
            let mut next = Vec::with_capacity(stack.len() * rule.len());
            for (coords, sines, w) in &stack {
                for &(t, wt) in rule {
                    let s = (1.0 - t * t).max(0.0).sqrt();
                    let mut c = coords.clone();
                    c.push(sines * t);
                    next.push((c, sines * s, w * wt));
                }
            }
            stack = next;
        }
        for (coords, sines, w) in &stack {
            for &(phi, wp) in &azimuth {
                let mut c = coords.clone();
                c.push(sines * phi.cos());
                c.push(sines * phi.sin());
                nodes.push(c);
                weights.push(w * wp);
            }
        }
        Self { dim, nodes, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.nodes.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }
}
