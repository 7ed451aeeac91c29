//! Richardson extrapolation and convergence-order estimates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Difference between the two most refined levels of the table.
    pub error_estimate: f64,
    /// True when successive table corrections shrink.
    pub monotone: bool,
}

/// Richardson table for samples `values[i]` taken at a geometric sequence
/// of steps `steps[i]` (coarse to fine), eliminating the error powers
/// `orders` in turn.
///
/// With `m` samples at most `m - 1` orders are used.
pub fn richardson(steps: &[f64], values: &[f64], orders: &[f64]) -> Extrapolation {
    assert_eq!(steps.len(), values.len());
    assert!(!values.is_empty());
    let mut level: Vec<f64> = values.to_vec();
    let mut bests = vec![*values.last().unwrap()];
    for &p in orders {
        if level.len() < 2 {
            break;
        }
        let next: Vec<f64> = level
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let ratio = (steps[i] / steps[i + 1]).powf(p);
                w[1] + (w[1] - w[0]) / (ratio - 1.0)
            })
            .collect();
        bests.push(*next.last().unwrap());
        level = next;
    }
    finish(&bests)
}

/// Polynomial (Neville) extrapolation of `values(t)` to `t = 0` using all
/// samples; `ts` should be ordered coarse to fine.
pub fn neville_to_zero(ts: &[f64], values: &[f64]) -> Extrapolation {
    assert_eq!(ts.len(), values.len());
    assert!(!values.is_empty());
    let mut p = values.to_vec();
    let m = p.len();
    let mut bests = vec![values[m - 1]];
    for span in 1..m {
        for i in 0..(m - span) {
            let (ti, tj) = (ts[i], ts[i + span]);
            p[i] = (tj * p[i] - ti * p[i + 1]) / (tj - ti);
        }
        bests.push(p[0]);
    }
    finish(&bests)
}

fn finish(bests: &[f64]) -> Extrapolation {
    let value = *bests.last().unwrap();
    let error_estimate = if bests.len() >= 2 {
        (bests[bests.len() - 1] - bests[bests.len() - 2]).abs()
    } else {
        0.0
    };
    let corrections: Vec<f64> = bests.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let monotone = corrections.windows(2).all(|w| w[1] <= w[0] * 1.000_001 + 1e-300);
    Extrapolation { value, error_estimate, monotone }
}

/// Observed order `log(e_coarse / e_fine) / log(ratio)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> f64 {
    (e_coarse.abs() / e_fine.abs()).ln() / ratio.ln()
}
