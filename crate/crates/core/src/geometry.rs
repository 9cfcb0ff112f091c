//! Dominance tests and corner derivation in the folded offset space.
//!
//! Every point is mapped to its per-dimension absolute offset from a fixed
//! query point, so all orthants around the query collapse onto one. The
//! functions here are the plain folded-space kernel; the engines use the
//! orthant-aware predicates in [`crate::region`], which agree with these
//! whenever the compared points share an orthant of the query.

use crate::error::{Error, Result};

/// A product, customer or candidate: `D` finite attribute values plus an id
/// unique within its collection.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub id: u64,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(id: u64, coords: impl Into<Vec<f64>>) -> Self {
        Point {
            id,
            coords: coords.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Checks the `D >= 2`, all-finite invariant.
    pub fn validate(&self) -> Result<()> {
        if self.coords.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "point {} has dimension {}, need at least 2",
                self.id,
                self.coords.len()
            )));
        }
        if let Some(bad) = self.coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "point {} has non-finite coordinate {bad}",
                self.id
            )));
        }
        Ok(())
    }
}

/// Per-dimension absolute offsets from a query point. All coordinates are
/// non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedPoint(pub Vec<f64>);

impl TransformedPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Axis-aligned box with `lo[i] <= hi[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: impl Into<Vec<f64>>, hi: impl Into<Vec<f64>>) -> Self {
        let (lo, hi) = (lo.into(), hi.into());
        debug_assert_eq!(lo.len(), hi.len());
        debug_assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
        Rect { lo, hi }
    }

    pub fn from_coords(coords: &[f64]) -> Self {
        Rect {
            lo: coords.to_vec(),
            hi: coords.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn expand_to_coords(&mut self, coords: &[f64]) {
        for (i, &v) in coords.iter().enumerate() {
            if v < self.lo[i] {
                self.lo[i] = v;
            }
            if v > self.hi[i] {
                self.hi[i] = v;
            }
        }
    }

    pub fn expand_to_rect(&mut self, other: &Rect) {
        for i in 0..self.lo.len() {
            if other.lo[i] < self.lo[i] {
                self.lo[i] = other.lo[i];
            }
            if other.hi[i] > self.hi[i] {
                self.hi[i] = other.hi[i];
            }
        }
    }

    pub fn contains_coords(&self, coords: &[f64]) -> bool {
        coords
            .iter()
            .enumerate()
            .all(|(i, &v)| self.lo[i] <= v && v <= self.hi[i])
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        (0..self.lo.len()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l + (h - l) / 2.0)
            .collect()
    }

    /// Euclidean distance from `q` to the nearest point of the box.
    pub fn mindist(&self, q: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (i, &qi) in q.iter().enumerate() {
            let d = if qi < self.lo[i] {
                self.lo[i] - qi
            } else if qi > self.hi[i] {
                qi - self.hi[i]
            } else {
                0.0
            };
            sum += d * d;
        }
        sum.sqrt()
    }
}

/// Optimistic and pessimistic dominance frontiers of a box w.r.t. a query.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerSet {
    pub min_corner: TransformedPoint,
    pub minmax_corners: Vec<TransformedPoint>,
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn transform(x: &Point, q: &Point) -> Result<TransformedPoint> {
    check_dims(q.dim(), x.dim())?;
    Ok(TransformedPoint(
        x.coords
            .iter()
            .zip(&q.coords)
            .map(|(a, b)| (a - b).abs())
            .collect(),
    ))
}

pub fn midpoint(x: &TransformedPoint) -> TransformedPoint {
    TransformedPoint(x.0.iter().map(|v| v / 2.0).collect())
}

/// `a` is no larger than `b` everywhere and strictly smaller somewhere.
pub fn dominates(a: &TransformedPoint, b: &TransformedPoint) -> bool {
    dominates_coords(&a.0, &b.0)
}

pub(crate) fn dominates_coords(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Whether `p` is at least as close as `p2` to `c` in every attribute and
/// strictly closer in one.
pub fn dynamically_dominates(p: &Point, p2: &Point, c: &Point) -> Result<bool> {
    check_dims(c.dim(), p.dim())?;
    check_dims(c.dim(), p2.dim())?;
    Ok(dynamically_dominates_coords(&p.coords, &p2.coords, &c.coords))
}

pub(crate) fn dynamically_dominates_coords(p: &[f64], p2: &[f64], c: &[f64]) -> bool {
    let mut strict = false;
    for i in 0..c.len() {
        let a = (p[i] - c[i]).abs();
        let b = (p2[i] - c[i]).abs();
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

pub fn corner_set(r: &Rect, q: &Point) -> Result<CornerSet> {
    check_dims(q.dim(), r.dim())?;
    let d = q.dim();
    let mut min_corner = Vec::with_capacity(d);
    let mut max_offset = Vec::with_capacity(d);
    for i in 0..d {
        let (lo, hi, qi) = (r.lo[i], r.hi[i], q.coords[i]);
        let (a, b) = ((lo - qi).abs(), (hi - qi).abs());
        min_corner.push(if lo <= qi && qi <= hi { 0.0 } else { a.min(b) });
        max_offset.push(a.max(b));
    }
    let minmax_corners = (0..d)
        .map(|j| {
            let mut c = max_offset.clone();
            c[j] = min_corner[j];
            TransformedPoint(c)
        })
        .collect();
    Ok(CornerSet {
        min_corner: TransformedPoint(min_corner),
        minmax_corners,
    })
}

/// Whether `m` dominates the min-corner of `r`, which implies it dominates
/// every folded point inside `r`.
pub fn rect_fully_dominated(m: &TransformedPoint, r: &Rect, q: &Point) -> Result<bool> {
    check_dims(q.dim(), m.0.len())?;
    let corners = corner_set(r, q)?;
    Ok(dominates(m, &corners.min_corner))
}
