//! Exact centroids of vertex-defined polytopes.
//!
//! The hull is fanned from the average of its vertices: every boundary
//! simplex together with that interior point spans a `k`-simplex whose
//! volume is `|det| / k!` and whose centroid is the mean of its `k + 1`
//! corners. Lower-dimensional hulls are handled in their affine chart, so
//! the mass is uniform with respect to the hull's own dimension.

use serde::{Deserialize, Serialize};

use super::hull::{convex_hull, Polytope};
use super::linalg::{determinant, sub};
use super::point::Point;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidResult {
    pub centroid: Point,
    /// Volume measured in the hull's affine dimension (0 for a point).
    pub volume: f64,
}

/// Centroid of the uniform mass distribution on `poly`.
pub fn centroid(poly: &Polytope) -> Result<CentroidResult> {
    let k = poly.dim_affine();
    let (reduced_centroid, volume) = match k {
        0 => {
            return Ok(CentroidResult {
                centroid: poly.vertices()[0].clone(),
                volume: 0.0,
            })
        }
        1 => {
            let a = poly.reduced[0][0];
            let b = poly.reduced[1][0];
            (vec![0.5 * (a + b)], (b - a).abs())
        }
        _ => fan_centroid(&poly.reduced, &poly.boundary, k)?,
    };
    let lifted = poly.frame.lift(&reduced_centroid);
    Ok(CentroidResult {
        centroid: Point::new(lifted)
            .map_err(|e| Error::Geometry(format!("centroid not finite: {e}")))?,
        volume,
    })
}

fn fan_centroid(verts: &[Vec<f64>], boundary: &[Vec<usize>], k: usize) -> Result<(Vec<f64>, f64)> {
    let mut apex = vec![0.0; k];
    for v in verts {
        apex.iter_mut().zip(v).for_each(|(a, b)| *a += b);
    }
    apex.iter_mut().for_each(|a| *a /= verts.len() as f64);

    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let mut total = 0.0;
    let mut moment = vec![0.0; k];
    for facet in boundary {
        let rows: Vec<Vec<f64>> = facet.iter().map(|&i| sub(&verts[i], &apex)).collect();
        let vol = determinant(&rows).abs() / factorial;
        // simplex centroid is apex + mean of the edge vectors over k+1 corners
        for (j, m) in moment.iter_mut().enumerate() {
            let s: f64 = facet.iter().map(|&i| verts[i][j]).sum::<f64>() + apex[j];
            *m += vol * s / (k + 1) as f64;
        }
        total += vol;
    }
    if !(total > 0.0) {
        return Err(Error::Geometry(format!(
            "zero-volume fan over {} boundary simplices in dimension {k}",
            boundary.len()
        )));
    }
    Ok((moment.into_iter().map(|m| m / total).collect(), total))
}

/// Pyramid with apex at the origin over the `(d-1)`-cube of side `theta`
/// centred on the first axis at `x_1 = length`.
pub fn build_hyperpyramid(d: usize, length: f64, theta: f64) -> Result<Polytope> {
    if d == 0 || !(length > 0.0) || !(theta > 0.0) || !length.is_finite() || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "hyperpyramid needs d >= 1, L > 0, theta > 0 (got {d}, {length}, {theta})"
        )));
    }
    let mut pts = vec![Point::origin(d)];
    for mask in 0..1usize << (d - 1) {
        let mut c = vec![length];
        for j in 0..d - 1 {
            c.push(if mask >> j & 1 == 1 { theta / 2.0 } else { -theta / 2.0 });
        }
        pts.push(Point::new(c)?);
    }
    convex_hull(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn simplex_centroid_is_vertex_mean() {
        for d in 1..=5 {
            let mut pts = vec![Point::origin(d)];
            for i in 0..d {
                let mut c = vec![0.0; d];
                c[i] = 1.0 + i as f64;
                pts.push(pt(&c));
            }
            let r = centroid(&convex_hull(&pts).unwrap()).unwrap();
            assert_close(r.centroid.coords(), Point::mean(&pts).coords(), 1e-12);
        }
    }

    #[test]
    fn unit_square() {
        let sq = [pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[1.0, 1.0]), pt(&[0.0, 1.0])];
        let r = centroid(&convex_hull(&sq).unwrap()).unwrap();
        assert_close(r.centroid.coords(), &[0.5, 0.5], 1e-15);
        assert!((r.volume - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hulls() {
        let r = centroid(&convex_hull(&[pt(&[1.0, 2.0, 3.0])]).unwrap()).unwrap();
        assert_eq!(r.centroid, pt(&[1.0, 2.0, 3.0]));
        assert_eq!(r.volume, 0.0);

        // collinear: the segment midpoint, not the vertex mean
        let pts = [pt(&[0.0, 0.0]), pt(&[0.1, 0.1]), pt(&[2.0, 2.0])];
        let r = centroid(&convex_hull(&pts).unwrap()).unwrap();
        assert_close(r.centroid.coords(), &[1.0, 1.0], 1e-12);
        assert!((r.volume - 8f64.sqrt()).abs() < 1e-12);

        // a planar square embedded in R^3
        let sq = [
            pt(&[0.0, 0.0, 1.0]),
            pt(&[1.0, 0.0, 1.0]),
            pt(&[1.0, 1.0, 1.0]),
            pt(&[0.0, 1.0, 1.0]),
            pt(&[0.9, 0.9, 1.0]),
        ];
        let r = centroid(&convex_hull(&sq).unwrap()).unwrap();
        assert_close(r.centroid.coords(), &[0.5, 0.5, 1.0], 1e-12);
        assert!((r.volume - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperpyramid_construction() {
        let tri = build_hyperpyramid(2, 1.0, 1.0).unwrap();
        assert_eq!(
            tri.vertices(),
            &[pt(&[0.0, 0.0]), pt(&[1.0, -0.5]), pt(&[1.0, 0.5])]
        );
        let p3 = build_hyperpyramid(3, 1.0, 2.0).unwrap();
        assert_eq!(p3.vertices().len(), 5);
        assert!(p3.vertices().contains(&pt(&[1.0, -1.0, 1.0])));
        assert!(build_hyperpyramid(0, 1.0, 1.0).is_err());
        assert!(build_hyperpyramid(2, 0.0, 1.0).is_err());
        assert!(build_hyperpyramid(2, 1.0, -1.0).is_err());
    }

    #[test]
    fn hyperpyramid_first_component() {
        for d in 1..=6 {
            for &l in &[1.0, 2.5] {
                let c = centroid(&build_hyperpyramid(d, l, 1.0).unwrap()).unwrap();
                let expected = l * d as f64 / (d as f64 + 1.0);
                assert!((c.centroid[0] - expected).abs() < 1e-12, "d = {d}");
                for j in 1..d {
                    assert!(c.centroid[j].abs() < 1e-12);
                }
            }
        }
        let c = centroid(&build_hyperpyramid(3, 1.0, 1.0).unwrap()).unwrap();
        assert!((c.centroid[0] - 0.75).abs() < 1e-12);
    }
}
