//! Convex hulls of finite point sets in `R^d`.
//!
//! The hull is computed in the affine hull of the input: points are
//! deduplicated, the affine dimension `k` is found by Gram-Schmidt with a
//! scale-relative tolerance, and for `k >= 2` an incremental farthest-point
//! (quickhull-style) construction produces a simplicial boundary. Vertices
//! that are not extreme (they sit inside a face) are removed afterwards, so
//! [`Polytope::vertices`] is always the frame of the input.
//!
//! Visibility during construction uses exact orientation signs behind a
//! float filter. Membership first tries the float half-spaces, then an exact
//! test against the boundary, then the distance to the hull.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::distance::within_distance;
use super::exact::orientation;
use super::linalg::{dot, hyperplane_normal, norm, orthonormal_basis, sub};
use super::point::Point;
use crate::error::{Error, Result};

/// Scale-relative tolerances. Each is multiplied by the diameter of the
/// point set it is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Points closer than this are merged.
    pub dup: f64,
    /// Residual below which a direction does not add affine rank.
    pub rank: f64,
    /// Slack for hull membership.
    pub membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dup: 1e-9,
            rank: 1e-9,
            membership: 1e-9,
        }
    }
}

/// Half-space `normal · x <= offset`, with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

/// Affine chart of the hull: `x = origin + basisᵀ y`. `basis == None`
/// means the hull is full-dimensional and the chart is the identity.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct AffineFrame {
    origin: Vec<f64>,
    basis: Option<Vec<Vec<f64>>>,
}

impl AffineFrame {
    pub(crate) fn reduce(&self, x: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => x.to_vec(),
            Some(b) => {
                let rel = sub(x, &self.origin);
                b.iter().map(|e| dot(e, &rel)).collect()
            }
        }
    }

    pub(crate) fn lift(&self, y: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => y.to_vec(),
            Some(b) => {
                let mut x = self.origin.clone();
                for (e, &c) in b.iter().zip(y) {
                    for (xi, ei) in x.iter_mut().zip(e) {
                        *xi += c * ei;
                    }
                }
                x
            }
        }
    }

    /// Distance from `x` to the affine hull.
    fn residual(&self, x: &[f64]) -> f64 {
        match &self.basis {
            None => 0.0,
            Some(_) => norm(&sub(x, &self.lift(&self.reduce(x)))),
        }
    }
}

/// The convex hull of a finite point set, represented by its frame.
#[derive(Clone, Debug)]
pub struct Polytope {
    vertices: Vec<Point>,
    dim_ambient: usize,
    dim_affine: usize,
    pub(crate) frame: AffineFrame,
    /// Vertices in frame coordinates, parallel to `vertices`.
    pub(crate) reduced: Vec<Vec<f64>>,
    /// Simplicial boundary facets (indices into `vertices`), for `k >= 2`.
    pub(crate) boundary: Vec<Vec<usize>>,
    /// Supporting half-spaces in frame coordinates.
    halfspaces: Vec<HalfSpace>,
    /// Error bound of each half-space's float distance.
    bands: Vec<f64>,
    /// Exact orientation sign, relative to each boundary simplex, of points
    /// outside it.
    outer: Vec<i8>,
    scale: f64,
    tol: Tolerances,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim_ambient == other.dim_ambient
            && self.dim_affine == other.dim_affine
            && self.vertices == other.vertices
    }
}

impl Polytope {
    /// Extreme points of the hull, in lexicographic order.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn dim_affine(&self) -> usize {
        self.dim_affine
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim_affine == self.dim_ambient
    }

    /// Diameter of the bounding box of the input set.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Supporting half-spaces of a full-dimensional hull (triangulated, so
    /// coplanar facets may repeat a normal). `None` for lower-dimensional hulls.
    pub fn facets(&self) -> Option<&[HalfSpace]> {
        (self.is_full_dimensional() && self.dim_affine >= 1).then_some(&self.halfspaces[..])
    }

    /// Number of simplices in the boundary triangulation.
    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// `true` iff `x` is within `tol` of the hull: within `tol` of the affine
    /// hull, and within `tol` of the hull inside it.
    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        if x.dim() != self.dim_ambient {
            return false;
        }
        let c = x.coords();
        if self.dim_affine == 0 {
            return x.distance(&self.vertices[0]) <= tol;
        }
        if self.frame.residual(c) > tol {
            return false;
        }
        let y = self.frame.reduce(c);
        let mag = norm(&y);
        let mut unsure = false;
        for (h, band) in self.halfspaces.iter().zip(&self.bands) {
            let err = band + 8.0 * f64::EPSILON * (mag + h.offset.abs());
            let s = h.signed_distance(&y);
            if s > tol + err {
                return false;
            }
            unsure |= s > tol - err;
        }
        !unsure || self.contains_exactly(&y) || within_distance(&self.reduced, &y, tol)
    }

    /// Exact membership of frame coordinates `y` in the hull of the stored
    /// vertices, for `k >= 2`.
    fn contains_exactly(&self, y: &[f64]) -> bool {
        !self.boundary.is_empty()
            && self.boundary.iter().zip(&self.outer).all(|(f, &o)| {
                let corners: Vec<&[f64]> = f.iter().map(|&i| self.reduced[i].as_slice()).collect();
                orientation(&corners, &[y]) != o
            })
    }

    /// Membership with the polytope's own relative tolerance.
    pub fn contains_default(&self, x: &Point) -> bool {
        self.contains(x, self.membership_slack())
    }

    /// Absolute slack used by [`Polytope::contains_default`].
    pub fn membership_slack(&self) -> f64 {
        let unit = if self.scale > 0.0 {
            self.scale
        } else {
            self.vertices[0]
                .coords()
                .iter()
                .fold(1.0f64, |m, c| m.max(c.abs()))
        };
        self.tol.membership * unit
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeLiteral {
    dim: usize,
    vertices: Vec<Point>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeLiteral {
            dim: self.dim_ambient,
            vertices: self.vertices.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = PolytopeLiteral::deserialize(d)?;
        if lit.vertices.iter().any(|v| v.dim() != lit.dim) {
            return Err(serde::de::Error::custom("vertex dimension mismatch"));
        }
        convex_hull(&lit.vertices).map_err(serde::de::Error::custom)
    }
}

/// Convex hull with default tolerances.
pub fn convex_hull(points: &[Point]) -> Result<Polytope> {
    convex_hull_with(points, &Tolerances::default())
}

pub fn convex_hull_with(points: &[Point], tol: &Tolerances) -> Result<Polytope> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("convex hull of empty set".into()))?;
    let d = first.dim();
    if points.iter().any(|p| p.dim() != d) {
        return Err(Error::InvalidArgument("mixed point dimensions".into()));
    }

    let scale = bbox_diameter(points);
    let distinct = dedup(points, tol.dup * scale);
    let origin = distinct[0].coords().to_vec();
    if distinct.len() == 1 || d == 0 {
        return Ok(Polytope {
            vertices: vec![distinct[0].clone()],
            dim_ambient: d,
            dim_affine: 0,
            frame: AffineFrame {
                origin,
                basis: Some(Vec::new()),
            },
            reduced: vec![Vec::new()],
            boundary: Vec::new(),
            halfspaces: Vec::new(),
            bands: Vec::new(),
            outer: Vec::new(),
            scale,
            tol: *tol,
        });
    }

    let spans: Vec<Vec<f64>> = distinct[1..]
        .iter()
        .map(|p| sub(p.coords(), &origin))
        .collect();
    let basis = orthonormal_basis(&spans, tol.rank * scale);
    let k = basis.len();
    let frame = if k == d {
        AffineFrame {
            origin: vec![0.0; d],
            basis: None,
        }
    } else {
        AffineFrame {
            origin,
            basis: Some(basis),
        }
    };
    let reduced: Vec<Vec<f64>> = distinct.iter().map(|p| frame.reduce(p.coords())).collect();

    if k == 1 {
        let (lo, hi) = (0..reduced.len()).fold((0, 0), |(lo, hi), i| {
            (
                if reduced[i][0] < reduced[lo][0] { i } else { lo },
                if reduced[i][0] > reduced[hi][0] { i } else { hi },
            )
        });
        let mut idx = [lo, hi];
        idx.sort_unstable();
        let (a, b) = (reduced[lo][0], reduced[hi][0]);
        return Ok(Polytope {
            vertices: idx.iter().map(|&i| distinct[i].clone()).collect(),
            dim_ambient: d,
            dim_affine: 1,
            frame,
            reduced: idx.iter().map(|&i| reduced[i].clone()).collect(),
            boundary: Vec::new(),
            halfspaces: vec![
                HalfSpace {
                    normal: vec![-1.0],
                    offset: -a,
                },
                HalfSpace {
                    normal: vec![1.0],
                    offset: b,
                },
            ],
            bands: vec![0.0, 0.0],
            outer: Vec::new(),
            scale,
            tol: *tol,
        });
    }

    let eps = tol.rank * scale;
    let mut facets = simplicial_hull(&reduced, eps)?;
    let mut used = used_vertices(&facets);
    let extreme: Vec<usize> = used
        .iter()
        .copied()
        .filter(|&v| is_extreme(v, &facets, k))
        .collect();
    let mut pool: Vec<usize> = (0..reduced.len()).collect();
    if extreme.len() < used.len() {
        let frame_pts: Vec<Vec<f64>> = extreme.iter().map(|&i| reduced[i].clone()).collect();
        facets = simplicial_hull(&frame_pts, eps)?;
        pool = extreme;
        used = used_vertices(&facets);
    }

    // `used` is sorted, and `distinct` is in lexicographic order
    let position: HashMap<usize, usize> = used.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    let vertices = used.iter().map(|&i| distinct[pool[i]].clone()).collect();
    let reduced_v = used.iter().map(|&i| reduced[pool[i]].clone()).collect();
    let boundary = facets
        .iter()
        .map(|f| f.verts.iter().map(|v| position[v]).collect())
        .collect();
    let bands = facets.iter().map(|f| f.band).collect();
    let outer = facets.iter().map(|f| f.outer).collect();
    let halfspaces = facets.into_iter().map(|f| f.plane).collect();
    Ok(Polytope {
        vertices,
        dim_ambient: d,
        dim_affine: k,
        frame,
        reduced: reduced_v,
        boundary,
        halfspaces,
        bands,
        outer,
        scale,
        tol: *tol,
    })
}

fn bbox_diameter(points: &[Point]) -> f64 {
    let d = points[0].dim();
    (0..d)
        .map(|i| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[i]), hi.max(p[i]))
            });
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt()
}

/// Sorts lexicographically and drops points within `radius` of a kept one.
fn dedup(points: &[Point], radius: f64) -> Vec<Point> {
    let mut sorted: Vec<&Point> = points.iter().collect();
    sorted.sort_by(|a, b| a.lex_cmp(b));
    let mut kept: Vec<Point> = Vec::new();
    for p in sorted {
        if !kept.iter().any(|q| q.distance(p) <= radius) {
            kept.push(p.clone());
        }
    }
    kept
}

#[derive(Clone, Debug)]
struct RawFacet {
    /// Sorted vertex indices.
    verts: Vec<usize>,
    /// Outward unit normal.
    plane: HalfSpace,
    /// Float distances within this band are decided exactly.
    band: f64,
    /// Exact orientation sign of points strictly outside.
    outer: i8,
}

/// Relative accuracy demanded of float distances before they are trusted.
const FILTER: f64 = 1e-12;

impl RawFacet {
    fn corners<'a>(&self, pts: &'a [Vec<f64>]) -> Vec<&'a [f64]> {
        self.verts.iter().map(|&i| pts[i].as_slice()).collect()
    }

    /// Float distance of `x` beyond the facet, measured from its first corner.
    fn distance(&self, pts: &[Vec<f64>], x: &[f64]) -> f64 {
        dot(&self.plane.normal, &sub(x, &pts[self.verts[0]]))
    }

    /// `true` iff `x` lies strictly outside, decided exactly.
    fn sees(&self, pts: &[Vec<f64>], x: &[f64]) -> bool {
        let d = self.distance(pts, x);
        if d > self.band {
            true
        } else if d < -self.band {
            false
        } else {
            orientation(&self.corners(pts), &[x]) == self.outer
        }
    }
}

fn used_vertices(facets: &[RawFacet]) -> Vec<usize> {
    let mut used: Vec<usize> = facets.iter().flat_map(|f| f.verts.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    used
}

/// A boundary vertex is extreme iff the normals of its incident facets span
/// the whole space; a point inside a face only sees normals orthogonal to it.
fn is_extreme(v: usize, facets: &[RawFacet], k: usize) -> bool {
    let normals: Vec<Vec<f64>> = facets
        .iter()
        .filter(|f| f.verts.contains(&v))
        .map(|f| f.plane.normal.clone())
        .collect();
    orthonormal_basis(&normals, 1e-9).len() == k
}

/// Reference point strictly inside the hull under construction: the
/// centroid of the initial simplex.
struct Interior<'a> {
    simplex: Vec<&'a [f64]>,
    mean: Vec<f64>,
}

fn make_facet(verts: Vec<usize>, pts: &[Vec<f64>], inside: &Interior, scale: f64) -> Result<RawFacet> {
    let corners: Vec<&[f64]> = verts.iter().map(|&i| pts[i].as_slice()).collect();
    let k = corners.len();
    let (mut normal, len) = hyperplane_normal(&corners);
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::Geometry(format!("degenerate facet {verts:?}")));
    }
    let edge_scale: f64 = corners[1..]
        .iter()
        .map(|c| norm(&sub(c, corners[0])))
        .product();
    let band = FILTER * (edge_scale / len).max(1.0) * scale;
    normal.iter_mut().for_each(|c| *c /= len);
    // the cofactor normal satisfies n·(x - p_0) = (-1)^(k-1) det[edges; x - p_0]
    let cofactor_sign: i8 = if k % 2 == 1 { 1 } else { -1 };
    let d_int = dot(&normal, &sub(&inside.mean, corners[0]));
    let interior_side = if d_int > band {
        1
    } else if d_int < -band {
        -1
    } else {
        let s = orientation(&corners, &inside.simplex) * cofactor_sign;
        if s == 0 {
            return Err(Error::Geometry(format!("facet {verts:?} passes through the interior")));
        }
        s
    };
    if interior_side > 0 {
        normal.iter_mut().for_each(|c| *c = -*c);
    }
    let outer = -interior_side * cofactor_sign;
    let offset = dot(&normal, corners[0]);
    Ok(RawFacet {
        verts,
        plane: HalfSpace { normal, offset },
        band,
        outer,
    })
}

/// Simplicial hull of points spanning `R^k` (k >= 2). Returns facets whose
/// vertex indices refer to `pts`. Visibility is decided with exact
/// orientation signs, so thin inputs cannot produce a non-convex boundary.
fn simplicial_hull(pts: &[Vec<f64>], eps: f64) -> Result<Vec<RawFacet>> {
    let k = pts[0].len();
    let scale = (0..k)
        .map(|i| {
            let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[i]), hi.max(p[i]))
            });
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt();

    // initial simplex: greedily maximise the distance to the current span
    let mut chosen = vec![0usize];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k {
        let (best, resid) = (0..pts.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| {
                let mut r = sub(&pts[i], &pts[0]);
                for e in &basis {
                    let c = dot(&r, e);
                    r.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
                }
                (i, r)
            })
            .max_by(|a, b| norm(&a.1).total_cmp(&norm(&b.1)))
            .ok_or_else(|| Error::Geometry("too few points for initial simplex".into()))?;
        let rn = norm(&resid);
        if rn <= eps {
            return Err(Error::Geometry(
                "affine rank dropped while building initial simplex".into(),
            ));
        }
        basis.push(resid.into_iter().map(|x| x / rn).collect());
        chosen.push(best);
    }
    let simplex: Vec<&[f64]> = chosen.iter().map(|&i| pts[i].as_slice()).collect();
    if orientation(&simplex[..k], &simplex[k..]) == 0 {
        return Err(Error::Geometry("initial simplex is flat".into()));
    }
    let mut mean = vec![0.0; k];
    for p in &simplex {
        mean.iter_mut().zip(p.iter()).for_each(|(a, b)| *a += b);
    }
    mean.iter_mut().for_each(|a| *a /= (k + 1) as f64);
    let inside = Interior { simplex, mean };

    let mut facets = Vec::with_capacity(k + 1);
    for omit in 0..=k {
        let mut verts: Vec<usize> = chosen
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != omit)
            .map(|(_, &i)| i)
            .collect();
        verts.sort_unstable();
        facets.push(make_facet(verts, pts, &inside, scale)?);
    }

    let mut done = vec![false; pts.len()];
    for &i in &chosen {
        done[i] = true;
    }
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..pts.len() {
            if done[i] {
                continue;
            }
            let h = facets
                .iter()
                .filter(|f| f.sees(pts, &pts[i]))
                .map(|f| f.distance(pts, &pts[i]))
                .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
            match h {
                // inside the current hull, hence inside every later one
                None => done[i] = true,
                Some(h) if best.is_none_or(|(_, bh)| h > bh) => best = Some((i, h)),
                Some(_) => {}
            }
        }
        let Some((apex, _)) = best else { break };
        done[apex] = true;

        let (visible, kept): (Vec<RawFacet>, Vec<RawFacet>) = facets
            .into_iter()
            .partition(|f| f.sees(pts, &pts[apex]));
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in &visible {
            for skip in 0..k {
                let ridge: Vec<usize> = f
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &v)| v)
                    .collect();
                *ridges.entry(ridge).or_default() += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort_unstable();
        facets = kept;
        for mut ridge in horizon {
            ridge.push(apex);
            ridge.sort_unstable();
            facets.push(make_facet(ridge, pts, &inside, scale)?);
        }
    }
    check_closed(&facets, k)?;
    Ok(facets)
}

/// Every ridge of a closed simplicial boundary is shared by exactly two facets.
fn check_closed(facets: &[RawFacet], k: usize) -> Result<()> {
    let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
    for f in facets {
        for skip in 0..k {
            let ridge: Vec<usize> = f
                .verts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &v)| v)
                .collect();
            *ridges.entry(ridge).or_default() += 1;
        }
    }
    match ridges.iter().find(|&(_, &c)| c != 2) {
        Some((r, c)) => Err(Error::Geometry(format!(
            "hull boundary not closed: ridge {r:?} shared by {c} facets"
        ))),
        None => Ok(()),
    }
}
