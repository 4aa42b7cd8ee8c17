//! Computational geometry in `R^d`: hulls, membership, centroids.

mod centroid;
mod distance;
mod exact;
mod hull;
mod linalg;
mod oracle;
mod point;

pub use centroid::{build_hyperpyramid, centroid, CentroidResult};
pub use hull::{convex_hull, convex_hull_with, HalfSpace, Polytope, Tolerances};
pub use oracle::{centroid_oracle_mc, McEstimate, MIN_ACCEPTANCE, MIN_SAMPLES};
pub use point::{component_extrema, pt, Point};

/// Realized safeness of `x` along each component of `points`:
/// `min((x_i - m_i), (M_i - x_i)) / (M_i - m_i)`, or `None` where the
/// range is at most `floor`.
pub fn realized_alpha(points: &[Point], x: &Point, floor: f64) -> crate::Result<Vec<Option<f64>>> {
    let (lo, hi) = component_extrema(points)?;
    Ok((0..x.dim())
        .map(|i| {
            let range = hi[i] - lo[i];
            (range > floor).then(|| ((x[i] - lo[i]).min(hi[i] - x[i])) / range)
        })
        .collect())
}
