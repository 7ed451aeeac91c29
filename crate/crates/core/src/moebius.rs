//! Round spheres, stereographic charts and Möbius transformations of ℝⁿ.
//!
//! The stereographic chart centred at `c` projects from `-c`, so that
//! `c ↦ 0`, `-c ↦ ∞`, and the round metric pulls back to
//! `F(x)² · eucl` with `F(x) = 2 / (1 + |x|²)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{GjmsError, Result};
use crate::numerics::{dist, dot, norm};

/// A unit vector of ℝ^{n+1}, i.e. a point of the round sphere Sⁿ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `coords`; fails on the zero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if !(r > 0.0 && r.is_finite()) || coords.len() < 2 {
            return Err(GjmsError::InvalidInput(format!(
                "cannot normalize {coords:?} onto a sphere"
            )));
        }
        Ok(Self { coords: coords.into_iter().map(|v| v / r).collect() })
    }

    /// The basis vector `e_i` of ℝ^{ambient}.
    pub fn basis(ambient: usize, i: usize) -> Self {
        let mut coords = vec![0.0; ambient];
        coords[i] = 1.0;
        Self { coords }
    }

    /// Uniformly distributed point of S^{ambient-1}.
    pub fn random<R: Rng + ?Sized>(ambient: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<f64> = (0..ambient).map(|_| rng.sample(StandardNormal)).collect();
            if norm(&v) > 1e-6 {
                return Self::new(v).expect("nonzero sample");
            }
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Dimension of the sphere (one less than the ambient dimension).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn antipode(&self) -> Self {
        Self { coords: self.coords.iter().map(|v| -v).collect() }
    }

    pub fn transformed(&self, m: &DMatrix<f64>) -> Self {
        let v = m * DVector::from_column_slice(&self.coords);
        Self { coords: v.iter().copied().collect() }
    }
}

/// Euclidean distance between the embedded points.
pub fn chordal_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    dist(&p.coords, &q.coords)
}

/// Unsquared conformal factor `F(x) = 2 / (1 + |x|²)` of the chart.
pub fn round_factor(x: &[f64]) -> f64 {
    2.0 / (1.0 + dot(x, x))
}

/// Stereographic chart sending `center` to the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartFrame {
    center: SpherePoint,
    /// Orthonormal basis of the tangent hyperplane `center^⊥`.
    tangent: Vec<Vec<f64>>,
}

impl ChartFrame {
    pub fn new(center: SpherePoint) -> Self {
        let c = center.coords();
        let dim = c.len();
        // Householder reflection exchanging e_0 and ±c; its remaining
        // columns span c^⊥.
        let mut v = c.to_vec();
        if c[0] > 0.0 {
            v[0] += 1.0;
        } else {
            v[0] -= 1.0;
        }
        let vv = dot(&v, &v);
        let tangent = (1..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        delta - 2.0 * v[j] * v[i] / vv
                    })
                    .collect()
            })
            .collect();
        Self { center, tangent }
    }

    pub fn center(&self) -> &SpherePoint {
        &self.center
    }

    /// Chart dimension n.
    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    pub fn to_chart(&self, p: &SpherePoint) -> Result<Vec<f64>> {
        if p.coords.len() != self.center.coords.len() {
            return Err(GjmsError::DimensionMismatch {
                expected: self.center.coords.len(),
                got: p.coords.len(),
            });
        }
        let denom = 1.0 + dot(p.coords(), self.center.coords());
        if denom < 1e-12 {
            return Err(GjmsError::ChartPole);
        }
        Ok(self.tangent.iter().map(|e| dot(e, p.coords()) / denom).collect())
    }

    pub fn from_chart(&self, x: &[f64]) -> Result<SpherePoint> {
        if x.len() != self.dim() {
            return Err(GjmsError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let r2 = dot(x, x);
        let s = 1.0 / (1.0 + r2);
        let mut coords: Vec<f64> = self.center.coords.iter().map(|c| (1.0 - r2) * s * c).collect();
        for (xi, e) in x.iter().zip(&self.tangent) {
            for (p, ej) in coords.iter_mut().zip(e) {
                *p += 2.0 * s * xi * ej;
            }
        }
        SpherePoint::new(coords)
    }
}

/// A primitive conformal map of ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub enum Move {
    /// `x ↦ Q x + t` with `Q` orthogonal.
    Isometry { q: DMatrix<f64>, t: Vec<f64> },
    /// `x ↦ λ x`, `λ > 0`.
    Dilation(f64),
    /// `x ↦ x / |x|²`.
    Inversion,
}

/// Composition of primitive moves, applied first to last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MoebiusMap {
    moves: Vec<Move>,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(moves: Vec<Move>) -> Result<Self> {
        for (i, m) in moves.iter().enumerate() {
            match m {
                Move::Isometry { q, t } => {
                    if !q.is_square() || q.nrows() != t.len() {
                        return Err(GjmsError::InvalidInput(format!(
                            "stage {i}: isometry of shape {}x{} with translation of length {}",
                            q.nrows(),
                            q.ncols(),
                            t.len()
                        )));
                    }
                    let defect = (q.transpose() * q - DMatrix::identity(q.nrows(), q.nrows())).amax();
                    if defect > 1e-12 {
                        return Err(GjmsError::InvalidInput(format!(
                            "stage {i}: matrix is not orthogonal (|QᵀQ - I| = {defect:e})"
                        )));
                    }
                }
                Move::Dilation(l) if !(*l > 0.0 && l.is_finite()) => {
                    return Err(GjmsError::InvalidInput(format!("stage {i}: dilation {l}")));
                }
                _ => {}
            }
        }
        Ok(Self { moves })
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn then(mut self, m: Move) -> Result<Self> {
        self.moves.push(m);
        Self::new(self.moves)
    }

    /// Random composition of `stages` moves on ℝⁿ; rotations come from
    /// the QR factorization of a Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, stages: usize, rng: &mut R) -> Self {
        let moves = (0..stages)
            .map(|_| match rng.random_range(0..3) {
                0 => {
                    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let q = g.qr().q();
                    let t = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    Move::Isometry { q, t }
                }
                1 => Move::Dilation(rng.random_range(0.5..2.0)),
                _ => Move::Inversion,
            })
            .collect();
        Self { moves }
    }
}

/// Image `h(x)` and conformal factor `φ(x)` with `h* eucl = φ² eucl`.
pub fn moebius_apply(map: &MoebiusMap, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut y = x.to_vec();
    let mut factor = 1.0;
    for (stage, m) in map.moves.iter().enumerate() {
        match m {
            Move::Isometry { q, t } => {
                if q.nrows() != y.len() {
                    return Err(GjmsError::DimensionMismatch { expected: q.nrows(), got: y.len() });
                }
                let v = q * DVector::from_column_slice(&y);
                y = v.iter().zip(t).map(|(a, b)| a + b).collect();
            }
            Move::Dilation(l) => {
                y.iter_mut().for_each(|v| *v *= l);
                factor *= l;
            }
            Move::Inversion => {
                let r2 = dot(&y, &y);
                if r2 < 1e-24 {
                    return Err(GjmsError::InversionPole { stage });
                }
                y.iter_mut().for_each(|v| *v /= r2);
                factor /= r2;
            }
        }
    }
    Ok((y, factor))
}

/// `|h(x) − h(y)|² − φ(x)φ(y)|x − y|²`.
pub fn moebius_identity_residual(map: &MoebiusMap, x: &[f64], y: &[f64]) -> Result<f64> {
    let (hx, fx) = moebius_apply(map, x)?;
    let (hy, fy) = moebius_apply(map, y)?;
    let lhs = dist(&hx, &hy).powi(2);
    let rhs = fx * fy * dist(x, y).powi(2);
    Ok(lhs - rhs)
}

/// Every intermediate point stays at distance ≥ `margin` from the
/// inversion pole when `map` is applied to `x`.
pub fn stays_clear_of_poles(map: &MoebiusMap, x: &[f64], margin: f64) -> bool {
    let mut y = x.to_vec();
    for m in &map.moves {
        match m {
            Move::Isometry { q, t } => {
                let v = q * DVector::from_column_slice(&y);
                y = v.iter().zip(t).map(|(a, b)| a + b).collect();
            }
            Move::Dilation(l) => y.iter_mut().for_each(|v| *v *= l),
            Move::Inversion => {
                let r2 = dot(&y, &y);
                if r2.sqrt() < margin {
                    return false;
                }
                y.iter_mut().for_each(|v| *v /= r2);
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chart_center_and_equator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for ambient in [3, 4, 6] {
            let c = SpherePoint::random(ambient, &mut rng);
            let frame = ChartFrame::new(c.clone());
            let x = frame.to_chart(&c).unwrap();
            assert!(norm(&x) < 1e-15);
            // a point orthogonal to the centre lands on the unit sphere
            let mut v = SpherePoint::random(ambient, &mut rng).coords().to_vec();
            let cv = dot(&v, c.coords());
            v.iter_mut().zip(c.coords()).for_each(|(a, b)| *a -= cv * b);
            let p = SpherePoint::new(v).unwrap();
            assert!((norm(&frame.to_chart(&p).unwrap()) - 1.0).abs() < 1e-12);
            assert_eq!(frame.to_chart(&c.antipode()), Err(GjmsError::ChartPole));
        }
    }

    #[test]
    fn chart_round_trip_and_pole_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let frame = ChartFrame::new(SpherePoint::basis(5, 0));
        for _ in 0..100 {
            let p = SpherePoint::random(5, &mut rng);
            let back = frame.from_chart(&frame.to_chart(&p).unwrap()).unwrap();
            assert!(chordal_distance(&p, &back) < 1e-12);
        }
        let origin = frame.from_chart(&[0.0; 4]).unwrap();
        assert_eq!(origin.coords(), SpherePoint::basis(5, 0).coords());
        let far = frame.from_chart(&[1e6, 0.0, 0.0, 0.0]).unwrap();
        assert!(chordal_distance(&far, &frame.center().antipode()) < 1e-5);
    }

    #[test]
    fn factor_values() {
        assert_eq!(round_factor(&[0.0, 0.0, 0.0]), 2.0);
        assert_eq!(round_factor(&[0.0, 1.0, 0.0]), 1.0);
        assert!((round_factor(&[3.0, 0.0, 0.0]) - 0.2).abs() < 1e-16);
    }

    #[test]
    fn chordal_examples() {
        let p = SpherePoint::basis(4, 0);
        let q = SpherePoint::basis(4, 2);
        assert_eq!(chordal_distance(&p, &p), 0.0);
        assert_eq!(chordal_distance(&p, &p.antipode()), 2.0);
        assert!((chordal_distance(&p, &q) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn primitive_moves() {
        let x = [2.0, 0.0, 0.0];
        let (y, f) = moebius_apply(&MoebiusMap::identity(), &x).unwrap();
        assert_eq!((y.as_slice(), f), (&x[..], 1.0));
        let inv = MoebiusMap::new(vec![Move::Inversion]).unwrap();
        let (y, f) = moebius_apply(&inv, &x).unwrap();
        assert_eq!((y, f), (vec![0.5, 0.0, 0.0], 0.25));
        let dil = MoebiusMap::new(vec![Move::Dilation(3.0)]).unwrap();
        let (y, f) = moebius_apply(&dil, &[1.0, -2.0]).unwrap();
        assert_eq!((y, f), (vec![3.0, -6.0], 3.0));
        assert_eq!(
            moebius_apply(&inv, &[0.0, 0.0, 0.0]),
            Err(GjmsError::InversionPole { stage: 0 })
        );
    }

    #[test]
    fn inversion_identity_by_hand() {
        let inv = MoebiusMap::new(vec![Move::Inversion]).unwrap();
        let (hx, fx) = moebius_apply(&inv, &[2.0, 0.0, 0.0]).unwrap();
        let (hy, fy) = moebius_apply(&inv, &[0.0, 1.0, 0.0]).unwrap();
        assert!((dist(&hx, &hy).powi(2) - 1.25).abs() < 1e-15);
        assert!((fx * fy * 5.0 - 1.25).abs() < 1e-15);
        let r = moebius_identity_residual(&inv, &[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn rejects_non_orthogonal() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(MoebiusMap::new(vec![Move::Isometry { q, t: vec![0.0, 0.0] }]).is_err());
        assert!(MoebiusMap::new(vec![Move::Dilation(-1.0)]).is_err());
    }

    #[test]
    fn factor_is_product_along_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let map = MoebiusMap::random(3, 5, &mut rng);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            if !stays_clear_of_poles(&map, &x, 0.1) {
                continue;
            }
            let mut y = x.clone();
            let mut prod = 1.0;
            for m in map.moves() {
                let single = MoebiusMap::new(vec![m.clone()]).unwrap();
                let (next, f) = moebius_apply(&single, &y).unwrap();
                prod *= f;
                y = next;
            }
            let (img, f) = moebius_apply(&map, &x).unwrap();
            assert!((f - prod).abs() <= 1e-14 * f);
            assert!(dist(&img, &y) < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn chordal_squared_is_two_minus_two_dot(seed in 0u64..10_000, ambient in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = SpherePoint::random(ambient, &mut rng);
            let q = SpherePoint::random(ambient, &mut rng);
            let d2 = chordal_distance(&p, &q).powi(2);
            prop_assert!((d2 - (2.0 - 2.0 * dot(p.coords(), q.coords()))).abs() < 1e-14);
        }

        #[test]
        fn stereographic_pull_back(seed in 0u64..10_000, ambient in 3usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let frame = ChartFrame::new(SpherePoint::random(ambient, &mut rng));
            let p = SpherePoint::random(ambient, &mut rng);
            let q = SpherePoint::random(ambient, &mut rng);
            let x = frame.to_chart(&p).unwrap();
            let y = frame.to_chart(&q).unwrap();
            prop_assume!(norm(&x) < 1e3 && norm(&y) < 1e3);
            let lhs = chordal_distance(&p, &q).powi(2);
            let rhs = round_factor(&x) * round_factor(&y) * dist(&x, &y).powi(2);
            prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs));
        }

        #[test]
        fn random_compositions_preserve_identity(seed in 0u64..100_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..6);
            let map = MoebiusMap::random(n, 5, &mut rng);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            prop_assume!(stays_clear_of_poles(&map, &x, 0.25) && stays_clear_of_poles(&map, &y, 0.25));
            let r = moebius_identity_residual(&map, &x, &y).unwrap();
            prop_assert!(r.abs() < 1e-12 * (1.0 + dist(&x, &y).powi(2)));
        }
    }
}
