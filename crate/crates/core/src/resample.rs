//! Dense resampling of polygons along uniformly spaced rays.
//!
//! Ray `j` of `m` leaves the origin at angle `phase + 2πj/m` (normalized to
//! `[0, 2π)`). Three routes compute the boundary distance along each ray:
//!
//! * [`resample_triangle`] walks angle-sorted polar vertices and places the
//!   ray point on the bracketing edge by triangle similarity. Differentiable
//!   and generic over [`Scalar`]; used for predictions.
//! * [`resample_vector`] intersects every ray with every edge parametrically.
//!   Order-free and valid for concave shapes; used for ground truth.
//! * [`resample_oracle`] solves each ray/edge pair as a 2×2 linear system by
//!   Cramer's rule. Reference only.

use std::f64::consts::TAU;
use std::thread;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, CartesianPolygon, Point, PolarPolygon, PolarVertex, VERTEX_EPS};
use crate::scalar::{BranchLog, Scalar};

/// Smallest accepted ray count for a profile.
pub const MIN_RAYS: usize = 3;
/// Angular distance under which a ray is treated as passing through a vertex.
pub const COINCIDENCE_EPS: f64 = 1e-12;
/// Below this `|v2·v3|` a segment is parallel to the ray.
pub const PARALLEL_EPS: f64 = 1e-12;
/// Slack on the segment parameter so a ray through a vertex still hits one
/// of the two adjacent edges after rounding.
pub const SEGMENT_EPS: f64 = 1e-12;

/// `m` radii sampled at uniform angles about an origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRadialProfile {
    origin: Point,
    radii: Vec<f64>,
    phase: f64,
}

impl DenseRadialProfile {
    pub fn new(origin: Point, radii: Vec<f64>, phase: f64) -> Result<Self> {
        if radii.len() < MIN_RAYS {
            return Err(Error::InvalidConfig(format!(
                "profile needs at least {MIN_RAYS} rays, got {}",
                radii.len()
            )));
        }
        if !phase.is_finite() || !origin.is_finite() {
            return Err(Error::NonFinite("profile origin or phase".into()));
        }
        if let Some(j) = radii.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "profile radius {j} is not positive: {}",
                radii[j]
            )));
        }
        Ok(Self {
            origin,
            radii,
            phase,
        })
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn m(&self) -> usize {
        self.radii.len()
    }

    pub fn ray_angle(&self, j: usize) -> f64 {
        ray_angle(self.phase, j, self.m())
    }

    /// Polygon with one vertex per ray point.
    pub fn to_polar_polygon(&self) -> Result<PolarPolygon> {
        let mut vertices: Vec<PolarVertex> = (0..self.m())
            .map(|j| PolarVertex {
                angle: self.ray_angle(j),
                radius: self.radii[j],
            })
            .collect();
        vertices.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        PolarPolygon::new(self.origin, vertices)
    }

    pub fn to_cartesian(&self) -> CartesianPolygon {
        let o = self.origin;
        CartesianPolygon::from_vertices_unchecked(
            (0..self.m())
                .map(|j| {
                    let a = self.ray_angle(j);
                    Point::new(o.x + self.radii[j] * a.cos(), o.y + self.radii[j] * a.sin())
                })
                .collect(),
        )
    }
}

/// One ray/segment intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegmentHit {
    pub point: Point,
    /// Distance along the unit ray direction, `>= 0`.
    pub t1: f64,
    /// Fraction along the segment, in `[0, 1]`.
    pub t2: f64,
    /// Index of the polygon edge that was hit (0 for a lone segment).
    pub segment_index: usize,
}

pub fn ray_angle(phase: f64, j: usize, m: usize) -> f64 {
    normalize_angle(phase + TAU * j as f64 / m as f64)
}

fn check_ray_count(m: usize) -> Result<()> {
    if m < MIN_RAYS {
        return Err(Error::InvalidConfig(format!(
            "need at least {MIN_RAYS} rays, got {m}"
        )));
    }
    Ok(())
}

/// Ray angles plus the index of the smallest one; walking from there visits
/// the rays in ascending angle order.
fn rays_ascending(phase: f64, m: usize) -> (Vec<f64>, usize) {
    let angles: Vec<f64> = (0..m).map(|j| ray_angle(phase, j, m)).collect();
    let start = (0..m)
        .min_by(|&a, &b| angles[a].total_cmp(&angles[b]))
        .unwrap_or(0);
    (angles, start)
}

/// Triangle-similarity resampling of a polar polygon given as vertex angles
/// (strictly increasing in `[0, 2π)`) and radii, relative to its origin.
///
/// For ray angle θ bracketed by vertices A (angle a_A ≤ θ) and B (θ < a_B):
/// `w = |OA| sin α / (|OB| sin β)` with α = θ − a_A, β = a_B − θ, the ray
/// point is `P = (A + wB) / (1 + w)` and the radius is `|OP|`. The pair
/// (last, first) closes the loop across 2π. Brackets are found by one merge
/// pass over both sorted lists.
pub fn triangle_radii<S: Scalar>(
    angles: &[S],
    radii: &[S],
    m: usize,
    phase: f64,
    log: &mut BranchLog,
) -> Result<Vec<S>> {
    check_ray_count(m)?;
    let k = angles.len();
    if k < 3 || radii.len() != k {
        return Err(Error::InvalidConfig(format!(
            "need matching angle/radius lists of length >= 3, got {} and {}",
            k,
            radii.len()
        )));
    }
    let xs: Vec<S> = angles.iter().zip(radii).map(|(&a, &r)| r * a.cos()).collect();
    let ys: Vec<S> = angles.iter().zip(radii).map(|(&a, &r)| r * a.sin()).collect();

    let (rays, start) = rays_ascending(phase, m);
    let mut out: Vec<Option<S>> = vec![None; m];
    let mut p = 0usize;
    for s in 0..m {
        let j = (start + s) % m;
        let theta = rays[j];
        while p < k && angles[p].value() <= theta {
            p += 1;
        }
        let (ia, ib, alpha, beta) = if p == 0 || p == k {
            let (ia, ib) = (k - 1, 0);
            let alpha = if p == k {
                -angles[ia] + theta
            } else {
                -angles[ia] + (theta + TAU)
            };
            let beta = if p == 0 {
                angles[ib] - theta
            } else {
                angles[ib] + (TAU - theta)
            };
            (ia, ib, alpha, beta)
        } else {
            (p - 1, p, -angles[p - 1] + theta, angles[p] - theta)
        };

        let radius = if alpha.value() < COINCIDENCE_EPS {
            log.push((ia as u64) << 2 | 1);
            radii[ia]
        } else if beta.value() < COINCIDENCE_EPS {
            log.push((ia as u64) << 2 | 2);
            radii[ib]
        } else {
            log.push((ia as u64) << 2);
            let w = (radii[ia] * alpha.sin()) / (radii[ib] * beta.sin());
            let denom = w + 1.0;
            let px = (xs[ia] + w * xs[ib]) / denom;
            let py = (ys[ia] + w * ys[ib]) / denom;
            (px * px + py * py).sqrt()
        };
        if !(radius.value().is_finite() && radius.value() > 0.0) {
            return Err(Error::DegenerateBracket { ray: j });
        }
        out[j] = Some(radius);
    }
    Ok(out.into_iter().map(|r| r.expect("every ray visited")).collect())
}

pub fn resample_triangle(poly: &PolarPolygon, m: usize, phase: f64) -> Result<DenseRadialProfile> {
    let radii = triangle_radii(
        &poly.angles(),
        &poly.radii(),
        m,
        phase,
        &mut BranchLog::disabled(),
    )?;
    DenseRadialProfile::new(poly.origin(), radii, phase)
}

/// Parametric intersection of the ray `o + t1·(cos θ, sin θ)` with the
/// segment `a + t2·(b − a)`.
///
/// With v1 the ray direction, v2 = b − a, v3 = (−v1.y, v1.x), v4 = o − a:
/// `t1 = (v2 × v4) / (v2·v3)` and `t2 = (v4·v3) / (v2·v3)`. The cross
/// product is signed; taking its magnitude flips t1 for segments oriented
/// clockwise relative to the ray.
pub fn ray_segment_intersect(o: Point, ray_angle: f64, a: Point, b: Point) -> Result<Option<RaySegmentHit>> {
    if a.distance(b) <= VERTEX_EPS {
        return Err(Error::DegenerateSegment);
    }
    Ok(intersect_dir(o, (ray_angle.cos(), ray_angle.sin()), a, b))
}

#[inline]
fn intersect_dir(o: Point, v1: (f64, f64), a: Point, b: Point) -> Option<RaySegmentHit> {
    let v2 = (b.x - a.x, b.y - a.y);
    let v3 = (-v1.1, v1.0);
    let v4 = (o.x - a.x, o.y - a.y);
    let denom = v2.0 * v3.0 + v2.1 * v3.1;
    if denom.abs() < PARALLEL_EPS {
        return None;
    }
    let t1 = (v2.0 * v4.1 - v2.1 * v4.0) / denom;
    let t2 = (v4.0 * v3.0 + v4.1 * v3.1) / denom;
    if t1 >= 0.0 && (-SEGMENT_EPS..=1.0 + SEGMENT_EPS).contains(&t2) {
        Some(RaySegmentHit {
            point: Point::new(o.x + t1 * v1.0, o.y + t1 * v1.1),
            t1,
            t2: t2.clamp(0.0, 1.0),
            segment_index: 0,
        })
    } else {
        None
    }
}

fn check_origin(poly: &CartesianPolygon, origin: Point) -> Result<()> {
    if !poly.contains(origin) {
        return Err(Error::OriginOutside {
            x: origin.x,
            y: origin.y,
        });
    }
    Ok(())
}

/// Outermost boundary crossing along every ray (vector approach).
pub fn resample_vector(
    poly: &CartesianPolygon,
    origin: Point,
    m: usize,
    phase: f64,
) -> Result<DenseRadialProfile> {
    check_ray_count(m)?;
    check_origin(poly, origin)?;
    let radii = (0..m)
        .map(|j| {
            let theta = ray_angle(phase, j, m);
            let dir = (theta.cos(), theta.sin());
            outermost_hit(poly, origin, dir)
                .map(|hit| hit.t1)
                .filter(|&t| t > VERTEX_EPS)
                .ok_or(Error::NoHit { ray: j })
        })
        .collect::<Result<Vec<_>>>()?;
    DenseRadialProfile::new(origin, radii, phase)
}

/// Every boundary crossing of one ray, in edge order.
pub fn ray_hits(poly: &CartesianPolygon, origin: Point, ray_angle: f64) -> Vec<RaySegmentHit> {
    let dir = (ray_angle.cos(), ray_angle.sin());
    poly.edges()
        .enumerate()
        .filter_map(|(i, (a, b))| {
            intersect_dir(origin, dir, a, b).map(|hit| RaySegmentHit {
                segment_index: i,
                ..hit
            })
        })
        .collect()
}

fn outermost_hit(poly: &CartesianPolygon, origin: Point, dir: (f64, f64)) -> Option<RaySegmentHit> {
    let mut best: Option<RaySegmentHit> = None;
    for (i, (a, b)) in poly.edges().enumerate() {
        if let Some(hit) = intersect_dir(origin, dir, a, b) {
            if best.is_none_or(|h| hit.t1 > h.t1) {
                best = Some(RaySegmentHit {
                    segment_index: i,
                    ..hit
                });
            }
        }
    }
    best
}

/// Brute-force reference: Cramer's rule on `o + t1·d = a + t2·(b − a)`.
pub fn resample_oracle(
    poly: &CartesianPolygon,
    origin: Point,
    m: usize,
    phase: f64,
) -> Result<DenseRadialProfile> {
    check_ray_count(m)?;
    check_origin(poly, origin)?;
    let mut radii = Vec::with_capacity(m);
    for j in 0..m {
        let theta = ray_angle(phase, j, m);
        let (dx, dy) = (theta.cos(), theta.sin());
        let mut best: Option<f64> = None;
        for (a, b) in poly.edges() {
            let (ex, ey) = (b.x - a.x, b.y - a.y);
            let (rx, ry) = (a.x - origin.x, a.y - origin.y);
            // | dx  -ex | |t1|   |rx|
            // | dy  -ey | |t2| = |ry|
            let det = dx * (-ey) - (-ex) * dy;
            if det.abs() < PARALLEL_EPS {
                continue;
            }
            let t1 = (rx * (-ey) - (-ex) * ry) / det;
            let t2 = (dx * ry - dy * rx) / det;
            if t1 >= 0.0 && (-SEGMENT_EPS..=1.0 + SEGMENT_EPS).contains(&t2) && best.is_none_or(|b| t1 > b) {
                best = Some(t1);
            }
        }
        match best {
            Some(t) if t > VERTEX_EPS => radii.push(t),
            _ => return Err(Error::NoHit { ray: j }),
        }
    }
    DenseRadialProfile::new(origin, radii, phase)
}

/// Triangle resampling of many polygons; element-wise identical to
/// calling [`resample_triangle`] on each.
pub fn resample_batch(polys: &[PolarPolygon], m: usize, phase: f64) -> Result<Vec<DenseRadialProfile>> {
    const PARALLEL_THRESHOLD: usize = 32;
    let one = |(index, p): (usize, &PolarPolygon)| {
        resample_triangle(p, m, phase).map_err(|e| Error::Batch {
            index,
            source: Box::new(e),
        })
    };
    if polys.len() < PARALLEL_THRESHOLD {
        return polys.iter().enumerate().map(one).collect();
    }
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(polys.len());
    let chunk = polys.len().div_ceil(workers);
    let parts: Vec<Result<Vec<DenseRadialProfile>>> = thread::scope(|scope| {
        let handles: Vec<_> = polys
            .chunks(chunk)
            .enumerate()
            .map(|(c, slice)| {
                scope.spawn(move || {
                    slice
                        .iter()
                        .enumerate()
                        .map(|(i, p)| one((c * chunk + i, p)))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("resampling worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(polys.len());
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}
