//! Monte Carlo centroid estimate by rejection sampling of the bounding box.
//! Shares only hull membership with the exact path.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hull::convex_hull;
use super::point::{component_extrema, Point};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

pub const MIN_SAMPLES: usize = 10_000;
pub const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Point,
    /// Standard error of the mean, per component.
    pub std_err: Vec<f64>,
    pub accepted: usize,
    pub samples: usize,
}

pub fn centroid_oracle_mc(points: &[Point], samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "oracle needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let poly = convex_hull(points)?;
    if !poly.is_full_dimensional() {
        return Err(Error::InvalidArgument(format!(
            "oracle needs a full-dimensional hull (affine dim {} < {})",
            poly.dim_affine(),
            poly.dim_ambient()
        )));
    }
    let d = poly.dim_ambient();
    let (lo, hi) = component_extrema(poly.vertices())?;
    let mut rng = seeded_rng(seed);

    // Welford accumulators
    let mut mean = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    let mut accepted = 0usize;
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        for i in 0..d {
            x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
        }
        let p = Point::new(x.clone())?;
        if !poly.contains(&p, 0.0) {
            continue;
        }
        accepted += 1;
        for i in 0..d {
            let delta = x[i] - mean[i];
            mean[i] += delta / accepted as f64;
            m2[i] += delta * (x[i] - mean[i]);
        }
    }
    let rate = accepted as f64 / samples as f64;
    if rate < MIN_ACCEPTANCE || accepted < 2 {
        return Err(Error::OracleUnreliable {
            rate,
            min: MIN_ACCEPTANCE,
        });
    }
    let std_err = m2
        .iter()
        .map(|s| (s / (accepted - 1) as f64 / accepted as f64).sqrt())
        .collect();
    Ok(McEstimate {
        mean: Point::new(mean)?,
        std_err,
        accepted,
        samples,
    })
}
