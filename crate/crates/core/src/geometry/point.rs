use std::cmp::Ordering;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position in `R^d`. Coordinates are always finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(Point(coords))
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Lexicographic order on coordinates.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.0.len().cmp(&other.0.len()))
    }

    pub fn translated(&self, v: &[f64]) -> Point {
        Point(self.0.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    /// Arithmetic mean of a non-empty slice of points of equal dimension.
    pub fn mean(points: &[Point]) -> Point {
        let d = points[0].dim();
        let mut acc = vec![0.0; d];
        for p in points {
            for (a, c) in acc.iter_mut().zip(&p.0) {
                *a += c;
            }
        }
        let k = points.len() as f64;
        Point(acc.into_iter().map(|a| a / k).collect())
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// Builds a point from literal coordinates. Panics on non-finite input.
pub fn pt(coords: &[f64]) -> Point {
    Point::new(coords.to_vec()).expect("finite coordinates")
}

/// Component-wise minimum `m` and maximum `M` over a non-empty point set.
pub fn component_extrema(points: &[Point]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("component_extrema of empty set".into()))?;
    let mut lo = first.0.clone();
    let mut hi = first.0.clone();
    for p in &points[1..] {
        if p.dim() != lo.len() {
            return Err(Error::InvalidArgument("mixed point dimensions".into()));
        }
        for (i, &c) in p.0.iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    Ok((lo, hi))
}
