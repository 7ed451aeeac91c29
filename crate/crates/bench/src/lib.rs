//! Fixed inputs shared by the benchmarks.

use gjms_core::{lens_group, sample_sphere_points, ChartFrame, DimPair, SpaceFormGroup, SpherePoint};

pub const SEED: u64 = 42;

pub fn dims(n: usize, k: usize) -> DimPair {
    DimPair::new(n, k).expect("benchmark dimensions are valid")
}

/// `L(p;q)` for a benchmark; the parameters are fixed and act freely.
pub fn lens(p: u64, q: &[i64]) -> SpaceFormGroup {
    lens_group(p, q).expect("benchmark lens spaces act freely")
}

pub fn points(ambient: usize, count: usize) -> Vec<SpherePoint> {
    sample_sphere_points(ambient, count, SEED)
}

pub fn frame(ambient: usize) -> ChartFrame {
    ChartFrame::new(points(ambient, 1).remove(0))
}
