//! Fourth-order central finite differences on closures `ℝⁿ → ℝ`.
//!
//! Every routine here is generic over the field closure so that stencils
//! can be nested (a Laplacian of a Laplacian, a divergence of a covector
//! field built from a Hessian) without boxing.

// Stencils are combined with integer weights and a single division, so
// constants differentiate to exactly zero.

/// `(f(−2h) − 8f(−h) + 8f(h) − f(2h)) / 12h` from the four samples.
#[inline]
fn d1(m2: f64, m1: f64, p1: f64, p2: f64, h: f64) -> f64 {
    ((m2 - p2) + 8.0 * (p1 - m1)) / (12.0 * h)
}

/// `(−f(−2h) + 16f(−h) − 30f(0) + 16f(h) − f(2h)) / 12h²`.
#[inline]
fn d2(m2: f64, m1: f64, c: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (16.0 * (m1 + p1) - (m2 + p2) - 30.0 * c) / (12.0 * h * h)
}

const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub h: f64,
}

impl Stencil {
    pub fn new(h: f64) -> Self {
        assert!(h > 0.0 && h.is_finite(), "stencil step must be positive");
        Self { h }
    }

    pub fn halved(&self) -> Self {
        Self { h: self.h / 2.0 }
    }

    /// Largest coordinate offset any single-level stencil reaches.
    pub fn reach(&self) -> f64 {
        2.0 * self.h
    }

    pub fn partial<F: Fn(&[f64]) -> f64 + ?Sized>(&self, f: &F, x: &[f64], i: usize) -> f64 {
        let mut y = x.to_vec();
        let mut v = [0.0; 4];
        for (slot, a) in v.iter_mut().zip(OFFSETS) {
            y[i] = x[i] + a * self.h;
            *slot = f(&y);
        }
        d1(v[0], v[1], v[2], v[3], self.h)
    }

    pub fn gradient<F: Fn(&[f64]) -> f64 + ?Sized>(&self, f: &F, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|i| self.partial(f, x, i)).collect()
    }

    /// Derivative along `dir` (not necessarily unit) through a 1-D stencil.
    pub fn directional<F: Fn(&[f64]) -> f64 + ?Sized>(&self, f: &F, x: &[f64], dir: &[f64]) -> f64 {
        let mut y = x.to_vec();
        let mut v = [0.0; 4];
        for (slot, a) in v.iter_mut().zip(OFFSETS) {
            for ((yi, xi), di) in y.iter_mut().zip(x).zip(dir) {
                *yi = xi + a * self.h * di;
            }
            *slot = f(&y);
        }
        d1(v[0], v[1], v[2], v[3], self.h)
    }

    /// Gradient and `Σ ∂ᵢ² f` sharing the axis evaluations.
    pub fn gradient_and_trace_hessian<F: Fn(&[f64]) -> f64 + ?Sized>(
        &self,
        f: &F,
        x: &[f64],
    ) -> (Vec<f64>, f64) {
        let n = x.len();
        let f0 = f(x);
        let mut y = x.to_vec();
        let mut grad = vec![0.0; n];
        let mut trace = 0.0;
        for i in 0..n {
            let mut v = [0.0; 4];
            for (slot, a) in v.iter_mut().zip(OFFSETS) {
                y[i] = x[i] + a * self.h;
                *slot = f(&y);
            }
            y[i] = x[i];
            grad[i] = d1(v[0], v[1], v[2], v[3], self.h);
            trace += d2(v[0], v[1], f0, v[2], v[3], self.h);
        }
        (grad, trace)
    }

    /// Full Hessian: diagonal by the 5-point stencil, off-diagonal by the
    /// tensor product of first-derivative stencils.
    pub fn hessian<F: Fn(&[f64]) -> f64 + ?Sized>(&self, f: &F, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut hess = vec![vec![0.0; n]; n];
        let mut y = x.to_vec();
        let f0 = f(x);
        for i in 0..n {
            let mut v = [0.0; 4];
            for (slot, a) in v.iter_mut().zip(OFFSETS) {
                y[i] = x[i] + a * self.h;
                *slot = f(&y);
            }
            y[i] = x[i];
            hess[i][i] = d2(v[0], v[1], f0, v[2], v[3], self.h);
            for j in (i + 1)..n {
                // first differences in j of first differences in i
                let mut outer = [0.0; 4];
                for (slot, a) in outer.iter_mut().zip(OFFSETS) {
                    y[i] = x[i] + a * self.h;
                    let mut inner = [0.0; 4];
                    for (s, b) in inner.iter_mut().zip(OFFSETS) {
                        y[j] = x[j] + b * self.h;
                        *s = f(&y);
                    }
                    y[j] = x[j];
                    *slot = d1(inner[0], inner[1], inner[2], inner[3], self.h);
                }
                y[i] = x[i];
                hess[i][j] = d1(outer[0], outer[1], outer[2], outer[3], self.h);
                hess[j][i] = hess[i][j];
            }
        }
        hess
    }

    /// Divergence `Σ ∂ᵢ Vᵢ` of a vector field given component-wise.
    pub fn divergence<V: Fn(&[f64], usize) -> f64 + ?Sized>(&self, v: &V, x: &[f64]) -> f64 {
        let mut y = x.to_vec();
        let mut acc = 0.0;
        for i in 0..x.len() {
            let mut s = [0.0; 4];
            for (slot, a) in s.iter_mut().zip(OFFSETS) {
                y[i] = x[i] + a * self.h;
                *slot = v(&y, i);
            }
            y[i] = x[i];
            acc += d1(s[0], s[1], s[2], s[3], self.h);
        }
        acc
    }
}
