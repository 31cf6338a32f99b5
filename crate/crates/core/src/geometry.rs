//! Polygon value types and planar primitives.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum distance between consecutive vertices.
pub const VERTEX_EPS: f64 = 1e-12;
/// Distance under which a point counts as lying on the boundary.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Maps any angle onto `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Axis-aligned envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = BBox {
            min: first,
            max: first,
        };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }
}

/// A simple polygon given by its vertices in traversal order (either orientation).
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPolygon {
    vertices: Vec<Point>,
}

impl CartesianPolygon {
    /// Validates vertex count, finiteness, distinct consecutive vertices and
    /// non-zero area.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need length >= 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i].distance(vertices[j]) <= VERTEX_EPS {
                return Err(Error::InvalidPolygon(format!(
                    "vertices {i} and {j} coincide"
                )));
            }
        }
        let poly = Self { vertices };
        if poly.signed_area() == 0.0 {
            return Err(Error::DegeneratePolygon);
        }
        Ok(poly)
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterates `(a, b)` over the closed edge loop.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    /// Shoelace area, positive for counter-clockwise traversal.
    pub fn signed_area(&self) -> f64 {
        let o = self.vertices[0];
        let twice: f64 = self
            .edges()
            .map(|(a, b)| (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y))
            .sum();
        0.5 * twice
    }

    /// Area-weighted centroid. Independent of orientation.
    pub fn geometric_centroid(&self) -> Point {
        let o = self.vertices[0];
        let (mut cx, mut cy, mut twice_area) = (0.0, 0.0, 0.0);
        for (a, b) in self.edges() {
            let (ax, ay) = (a.x - o.x, a.y - o.y);
            let (bx, by) = (b.x - o.x, b.y - o.y);
            let cross = ax * by - bx * ay;
            twice_area += cross;
            cx += (ax + bx) * cross;
            cy += (ay + by) * cross;
        }
        let scale = 1.0 / (3.0 * twice_area);
        Point::new(o.x + cx * scale, o.y + cy * scale)
    }

    pub fn vertex_mean(&self) -> Point {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.vertices).expect("polygon has vertices")
    }

    /// Even-odd containment; points within [`BOUNDARY_EPS`] of an edge count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self
            .edges()
            .any(|(a, b)| point_segment_distance(p, a, b) <= BOUNDARY_EPS)
        {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

pub fn point_in_polygon(p: Point, poly: &CartesianPolygon) -> bool {
    poly.contains(p)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// How the polar origin of a ground-truth polygon is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OriginMode {
    #[default]
    Centroid,
    BboxCenter,
    VertexMean,
}

impl OriginMode {
    pub fn origin_of(self, poly: &CartesianPolygon) -> Point {
        match self {
            OriginMode::Centroid => poly.geometric_centroid(),
            OriginMode::BboxCenter => poly.bbox().center(),
            OriginMode::VertexMean => poly.vertex_mean(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarVertex {
    pub angle: f64,
    pub radius: f64,
}

/// Origin plus `k >= 3` vertices with strictly increasing angles in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPolygon {
    origin: Point,
    vertices: Vec<PolarVertex>,
}

impl PolarPolygon {
    pub fn new(origin: Point, vertices: Vec<PolarVertex>) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidPolygon("origin is not finite".into()));
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need length >= 3 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.radius.is_finite() && v.radius > 0.0) {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {i} radius {} is not positive",
                    v.radius
                )));
            }
            if !(0.0..TAU).contains(&v.angle) {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {i} angle {} outside [0, 2pi)",
                    v.angle
                )));
            }
            if i > 0 && v.angle <= vertices[i - 1].angle {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {i} angle is not strictly increasing"
                )));
            }
        }
        Ok(Self { origin, vertices })
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn vertices(&self) -> &[PolarVertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.angle).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.radius).collect()
    }

    /// Places every vertex at `origin + r·(cos a, sin a)`.
    pub fn to_cartesian(&self) -> CartesianPolygon {
        let o = self.origin;
        CartesianPolygon::from_vertices_unchecked(
            self.vertices
                .iter()
                .map(|v| {
                    Point::new(
                        o.x + v.radius * v.angle.cos(),
                        o.y + v.radius * v.angle.sin(),
                    )
                })
                .collect(),
        )
    }
}

/// Expresses `poly` in polar form about `origin`.
///
/// The polygon must be star-shaped about `origin`: walking the boundary
/// counter-clockwise, every edge must advance the polar angle by a value in
/// `(0, π)`. Vertices are rotated (never re-sorted) so angles ascend.
pub fn to_polar(poly: &CartesianPolygon, origin: Point) -> Result<PolarPolygon> {
    if !poly.contains(origin) {
        return Err(Error::OriginOutside {
            x: origin.x,
            y: origin.y,
        });
    }
    let mut pts: Vec<Point> = poly.vertices().to_vec();
    let reversed = poly.signed_area() < 0.0;
    if reversed {
        pts.reverse();
    }
    let n = pts.len();
    let mut polar = Vec::with_capacity(n);
    for (i, p) in pts.iter().enumerate() {
        let (dx, dy) = (p.x - origin.x, p.y - origin.y);
        let radius = dx.hypot(dy);
        if radius <= VERTEX_EPS {
            return Err(Error::InvalidPolygon(format!(
                "vertex {i} coincides with the origin"
            )));
        }
        polar.push(PolarVertex {
            angle: normalize_angle(dy.atan2(dx)),
            radius,
        });
    }
    let mut winding = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let mut delta = polar[j].angle - polar[i].angle;
        if delta <= -PI {
            delta += TAU;
        } else if delta > PI {
            delta -= TAU;
        }
        if !(delta > 0.0 && delta < PI) {
            let vertex = if reversed { n - 1 - j } else { j };
            return Err(Error::NotStarShaped { vertex });
        }
        winding += delta;
    }
    if (winding - TAU).abs() > 1e-9 {
        return Err(Error::NotStarShaped { vertex: 0 });
    }
    let start = (0..n)
        .min_by(|&a, &b| polar[a].angle.total_cmp(&polar[b].angle))
        .expect("non-empty");
    polar.rotate_left(start);
    PolarPolygon::new(origin, polar).map_err(|_| Error::NotStarShaped { vertex: start })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> CartesianPolygon {
        CartesianPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    fn l_shape() -> CartesianPolygon {
        CartesianPolygon::from_xy(&[
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (0.0, 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn signed_area_examples() {
        assert_eq!(unit_square().signed_area(), 1.0);
        assert_eq!(unit_square().reversed().signed_area(), -1.0);
        let tri = CartesianPolygon::from_xy(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)]).unwrap();
        assert_eq!(tri.signed_area(), 2.0);
    }

    #[test]
    fn centroid_and_means() {
        assert_eq!(unit_square().geometric_centroid(), Point::new(0.5, 0.5));
        let tri = CartesianPolygon::from_xy(&[(0.0, 0.0), (3.0, 0.0), (0.0, 3.0)]).unwrap();
        let c = tri.geometric_centroid();
        assert!((c.x - 1.0).abs() < 1e-15 && (c.y - 1.0).abs() < 1e-15);
        assert_eq!(tri.vertex_mean(), Point::new(1.0, 1.0));
        assert_eq!(unit_square().vertex_mean(), Point::new(0.5, 0.5));
        assert_eq!(l_shape().vertex_mean(), Point::new(1.0, 1.0));
    }

    #[test]
    fn bbox_examples() {
        let bb = unit_square().bbox();
        assert_eq!((bb.center(), bb.width(), bb.height()), (Point::new(0.5, 0.5), 1.0, 1.0));
        let bb = l_shape().bbox();
        assert_eq!((bb.center(), bb.width(), bb.height()), (Point::new(1.0, 1.0), 2.0, 2.0));
        let tri = CartesianPolygon::from_xy(&[(1.0, 1.0), (4.0, 1.0), (1.0, 5.0)]).unwrap();
        let bb = tri.bbox();
        assert_eq!((bb.center(), bb.width(), bb.height()), (Point::new(2.5, 3.0), 3.0, 4.0));
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(matches!(
            CartesianPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0)]),
            Err(Error::InvalidPolygon(_))
        ));
        assert!(matches!(
            CartesianPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
            Err(Error::DegeneratePolygon)
        ));
        assert!(CartesianPolygon::from_xy(&[(0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(CartesianPolygon::from_xy(&[(0.0, f64::NAN), (1.0, 0.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn point_in_polygon_examples() {
        assert!(unit_square().contains(Point::new(0.5, 0.5)));
        assert!(!l_shape().contains(Point::new(1.5, 1.5)));
        // boundary is inside
        assert!(unit_square().contains(Point::new(1.0, 0.3)));
        assert!(unit_square().contains(Point::new(0.0, 0.0)));
        assert!(!unit_square().contains(Point::new(1.0 + 1e-9, 0.3)));
    }

    #[test]
    fn bbox_center_can_fall_outside() {
        let notch = CartesianPolygon::from_xy(&[
            (0.0, 0.0),
            (3.0, 0.0),
            (3.0, 1.0),
            (1.0, 1.0),
            (1.0, 3.0),
            (0.0, 3.0),
        ])
        .unwrap();
        let c = notch.bbox().center();
        assert_eq!(c, Point::new(1.5, 1.5));
        assert!(!point_in_polygon(c, &notch));
        // Thin arms push the centroid (1.1, 1.1) outside as well.
        assert_eq!(notch.geometric_centroid(), Point::new(1.1, 1.1));
        assert!(!notch.contains(notch.geometric_centroid()));
    }

    #[test]
    fn to_polar_square() {
        let p = to_polar(&unit_square(), Point::new(0.5, 0.5)).unwrap();
        let expected = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0];
        for (v, a) in p.vertices().iter().zip(expected) {
            assert!((v.angle - a).abs() < 1e-15);
            assert!((v.radius - 0.5f64.sqrt()).abs() < 1e-15);
        }
        // clockwise input gives the same polar form
        let q = to_polar(&unit_square().reversed(), Point::new(0.5, 0.5)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn to_polar_hexagon() {
        let hex: Vec<Point> = (0..6)
            .map(|i| {
                let a = PI / 3.0 * i as f64 + 0.1;
                Point::new(3.0 + 2.0 * a.cos(), -1.0 + 2.0 * a.sin())
            })
            .collect();
        let p = to_polar(&CartesianPolygon::new(hex).unwrap(), Point::new(3.0, -1.0)).unwrap();
        assert_eq!(p.len(), 6);
        for w in p.vertices().windows(2) {
            assert!((w[1].angle - w[0].angle - PI / 3.0).abs() < 1e-12);
        }
        assert!(p.vertices().iter().all(|v| (v.radius - 2.0).abs() < 1e-12));
    }

    #[test]
    fn to_polar_errors() {
        assert!(matches!(
            to_polar(&unit_square(), Point::new(2.0, 2.0)),
            Err(Error::OriginOutside { .. })
        ));
        // L-shape about a point in its lower arm sees the upper arm fold back
        let r = to_polar(&l_shape(), Point::new(1.8, 0.2));
        assert!(matches!(r, Err(Error::NotStarShaped { .. })), "{r:?}");
        assert!(to_polar(&unit_square(), Point::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn polar_polygon_invariants() {
        let v = |angle, radius| PolarVertex { angle, radius };
        let o = Point::new(0.0, 0.0);
        assert!(PolarPolygon::new(o, vec![v(0.0, 1.0), v(1.0, 1.0), v(2.0, 1.0)]).is_ok());
        assert!(PolarPolygon::new(o, vec![v(0.0, 1.0), v(1.0, 1.0)]).is_err());
        assert!(PolarPolygon::new(o, vec![v(0.0, 1.0), v(1.0, 0.0), v(2.0, 1.0)]).is_err());
        assert!(PolarPolygon::new(o, vec![v(0.0, 1.0), v(1.0, 1.0), v(1.0, 1.0)]).is_err());
        assert!(PolarPolygon::new(o, vec![v(0.0, 1.0), v(1.0, 1.0), v(TAU, 1.0)]).is_err());
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(-PI / 2.0), 1.5 * PI);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_eq!(normalize_angle(-1e-300), 0.0);
    }
}
