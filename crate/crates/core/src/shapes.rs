//! Parametric and random test shapes.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::geometry::{CartesianPolygon, Point};

fn build(vertices: Vec<Point>) -> CartesianPolygon {
    CartesianPolygon::new(vertices).expect("generated shape is a valid polygon")
}

/// Regular polygon with `k` vertices on a circle, counter-clockwise.
pub fn regular_polygon(k: usize, radius: f64, center: Point, rotation: f64) -> CartesianPolygon {
    assert!(k >= 3 && radius > 0.0);
    build(
        (0..k)
            .map(|i| {
                let a = rotation + TAU * i as f64 / k as f64;
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect(),
    )
}

/// Star with `points` tips alternating between `outer` and `inner` radius.
pub fn star(points: usize, outer: f64, inner: f64, center: Point, rotation: f64) -> CartesianPolygon {
    assert!(points >= 2 && outer > 0.0 && inner > 0.0);
    let n = 2 * points;
    build(
        (0..n)
            .map(|i| {
                let a = rotation + TAU * i as f64 / n as f64;
                let r = if i % 2 == 0 { outer } else { inner };
                Point::new(center.x + r * a.cos(), center.y + r * a.sin())
            })
            .collect(),
    )
}

/// L with the corner at `corner`: a `width` x `height` box minus its upper
/// right part, leaving arms of thickness `tx` (vertical) and `ty` (horizontal).
pub fn lshape(corner: Point, width: f64, height: f64, tx: f64, ty: f64) -> CartesianPolygon {
    assert!(0.0 < tx && tx < width && 0.0 < ty && ty < height);
    let Point { x, y } = corner;
    build(vec![
        Point::new(x, y),
        Point::new(x + width, y),
        Point::new(x + width, y + ty),
        Point::new(x + tx, y + ty),
        Point::new(x + tx, y + height),
        Point::new(x, y + height),
    ])
}

/// Long thin band whose long sides zigzag out of phase, like a crosswalk
/// stripe seen in perspective. Twelve vertices, centroid at the origin.
pub fn zigzag_band(half_len: f64, half_thick: f64, amp: f64, tip: f64) -> CartesianPolygon {
    let xs = [-half_len, -half_len / 2.0, 0.0, half_len / 2.0, half_len];
    let mut v = Vec::with_capacity(12);
    for (i, &x) in xs.iter().enumerate() {
        let dip = if i % 2 == 1 { amp } else { 0.0 };
        v.push(Point::new(x, -half_thick - dip));
    }
    v.push(Point::new(half_len + tip, 0.0));
    for (i, &x) in xs.iter().enumerate().rev() {
        let rise = if i % 2 == 0 { amp } else { 0.0 };
        v.push(Point::new(x, half_thick + rise));
    }
    v.push(Point::new(-half_len - tip, 0.0));
    let poly = build(v);
    let c = poly.geometric_centroid();
    poly.translated(-c.x, -c.y)
}

/// Rotates `poly` about the plane origin.
pub fn rotated(poly: &CartesianPolygon, angle: f64) -> CartesianPolygon {
    let (s, c) = angle.sin_cos();
    build(
        poly.vertices()
            .iter()
            .map(|v| Point::new(c * v.x - s * v.y, s * v.x + c * v.y))
            .collect(),
    )
}

/// The slightly skewed zigzag band used by the demo and the fixed-ray
/// comparison.
pub fn crosswalk() -> CartesianPolygon {
    rotated(&zigzag_band(4.0, 0.5, 0.15, 0.0), 0.1)
}

/// The five-pointed star used by the demo and the fitting checks.
pub fn demo_star() -> CartesianPolygon {
    star(5, 2.0, 0.85, Point::new(0.0, 0.0), PI / 2.0)
}

/// `k` sorted angles whose consecutive gaps (including the wrap) are all
/// between `min_gap` and `PI - min_gap`.
fn sorted_angles<R: Rng>(rng: &mut R, k: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
        a.sort_by(f64::total_cmp);
        let ok = (0..k).all(|i| {
            let gap = if i + 1 < k { a[i + 1] - a[i] } else { a[0] + TAU - a[k - 1] };
            gap >= min_gap && gap <= PI - min_gap
        });
        if ok {
            return a;
        }
    }
}

/// Random polygon that is star-shaped (usually concave) about `center`.
pub fn random_star_shaped<R: Rng>(rng: &mut R, k: usize, center: Point) -> CartesianPolygon {
    let angles = sorted_angles(rng, k, 1e-3);
    build(
        angles
            .into_iter()
            .map(|a| {
                let r = rng.gen_range(0.3..3.0);
                Point::new(center.x + r * a.cos(), center.y + r * a.sin())
            })
            .collect(),
    )
}

/// Random convex polygon: points on a rotated ellipse around `center`.
pub fn random_convex<R: Rng>(rng: &mut R, k: usize, center: Point) -> CartesianPolygon {
    let (ax, ay) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
    let rot = rng.gen_range(0.0..TAU);
    let (s, c) = rot.sin_cos();
    let angles = sorted_angles(rng, k, 1e-3);
    build(
        angles
            .into_iter()
            .map(|a| {
                let (x, y) = (ax * a.cos(), ay * a.sin());
                Point::new(center.x + c * x - s * y, center.y + s * x + c * y)
            })
            .collect(),
    )
}

/// Random L whose centroid lies inside it, so it can be encoded about the
/// centroid. Thinner arms put the bounding-box centre outside.
pub fn random_lshape<R: Rng>(rng: &mut R) -> CartesianPolygon {
    loop {
        let w = rng.gen_range(2.0..4.0);
        let h = rng.gen_range(2.0..4.0);
        let tx = w * rng.gen_range(0.42..0.62);
        let ty = h * rng.gen_range(0.42..0.62);
        let corner = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let poly = lshape(corner, w, h, tx, ty);
        let c = poly.geometric_centroid();
        if c.x < corner.x + tx - 1e-3 && c.y < corner.y + ty - 1e-3 {
            return poly;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_in_polygon, to_polar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures_are_star_shaped_about_their_centroid() {
        for poly in [demo_star(), crosswalk(), lshape(Point::new(0.0, 0.0), 3.0, 3.0, 1.3, 1.3)] {
            let c = poly.geometric_centroid();
            assert!(to_polar(&poly, c).is_ok(), "{poly:?}");
            assert!(poly.signed_area() > 0.0);
        }
        assert_eq!(crosswalk().len(), 12);
    }

    #[test]
    fn crosswalk_is_thin_and_long() {
        let bb = crosswalk().bbox();
        assert!(bb.width() > 3.0 * bb.height());
    }

    #[test]
    fn lshape_bbox_center_can_be_outside() {
        let l = lshape(Point::new(0.0, 0.0), 3.0, 3.0, 1.3, 1.3);
        assert!(!point_in_polygon(l.bbox().center(), &l));
        assert!(point_in_polygon(l.geometric_centroid(), &l));
    }

    #[test]
    fn random_shapes_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 3..30 {
            let c = Point::new(0.5, -0.25);
            assert!(to_polar(&random_star_shaped(&mut rng, k, c), c).is_ok());
            let convex = random_convex(&mut rng, k, c);
            assert!(to_polar(&convex, c).is_ok());
            assert!(convex.signed_area() > 0.0);
        }
        for _ in 0..50 {
            let l = random_lshape(&mut rng);
            assert!(to_polar(&l, l.geometric_centroid()).is_ok());
        }
    }
}
