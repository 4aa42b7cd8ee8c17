//! The component-wise midpoint stays in the hull of a point set in one and
//! two dimensions, but not in three.

use anyhow::Result;
use consensus_dyn::algorithms::{component_midpoint_update, component_midpoint_update_unchecked};
use consensus_dyn::geometry::{convex_hull, Point};
use consensus_dyn::rng::derived_rng;
use rand::Rng;

pub const PLANAR_SAMPLES: usize = 100;

#[derive(Debug, PartialEq)]
pub struct Findings {
    pub spatial_midpoint: Vec<f64>,
    pub spatial_inside: bool,
    pub planar_inside: usize,
    pub planar_total: usize,
    pub linear_inside: usize,
    pub linear_total: usize,
}

/// Number of `samples` random sets in `[0, 1]^d` (3 to 12 points) whose
/// component-wise midpoint lies in their hull.
fn sample(d: usize, samples: usize, seed: u64) -> Result<usize> {
    let mut inside = 0;
    for i in 0..samples {
        let mut rng = derived_rng(seed, &[d as u64, i as u64]);
        let m = rng.random_range(3..=12);
        let pts: Vec<Point> = (0..m)
            .map(|_| Point::new((0..d).map(|_| rng.random::<f64>()).collect()))
            .collect::<consensus_dyn::Result<_>>()?;
        let mid = component_midpoint_update(&pts)?;
        if convex_hull(&pts)?.contains_default(&mid) {
            inside += 1;
        }
    }
    Ok(inside)
}

pub fn findings(seed: u64) -> Result<Findings> {
    let units: Vec<Point> = (0..3)
        .map(|i| Point::new((0..3).map(|k| if k == i { 1.0 } else { 0.0 }).collect()))
        .collect::<consensus_dyn::Result<_>>()?;
    let mid = component_midpoint_update_unchecked(&units);
    let spatial_inside = convex_hull(&units)?.contains_default(&mid);
    Ok(Findings {
        spatial_midpoint: mid.into_coords(),
        spatial_inside,
        planar_inside: sample(2, PLANAR_SAMPLES, seed)?,
        planar_total: PLANAR_SAMPLES,
        linear_inside: sample(1, PLANAR_SAMPLES, seed)?,
        linear_total: PLANAR_SAMPLES,
    })
}

pub fn cmd_counterexample(seed: u64) -> Result<()> {
    let f = findings(seed)?;
    println!("R^3: hull of the unit vectors e1, e2, e3");
    println!("  component-wise midpoint: {:?}", f.spatial_midpoint);
    println!("  outside hull: {}", !f.spatial_inside);
    println!("R^2: random sets, seed {seed}");
    println!("  midpoint inside hull: {}/{}", f.planar_inside, f.planar_total);
    println!("R^1: random sets, seed {seed}");
    println!("  midpoint inside hull: {}/{}", f.linear_inside, f.linear_total);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dichotomy() {
        let f = findings(3).unwrap();
        assert_eq!(f.spatial_midpoint, [0.5, 0.5, 0.5]);
        assert!(!f.spatial_inside);
        assert_eq!(f.planar_inside, f.planar_total);
        assert_eq!(f.linear_inside, f.linear_total);
    }
}
