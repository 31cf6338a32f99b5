use polarfit_core::geometry::{point_in_polygon, to_polar};
use polarfit_core::shapes::{random_convex, random_star_shaped};
use polarfit_core::{CartesianPolygon, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rotate_list(p: &CartesianPolygon, s: usize) -> CartesianPolygon {
    let v = p.vertices();
    let n = v.len();
    CartesianPolygon::new((0..n).map(|i| v[(i + s) % n]).collect()).unwrap()
}

/// Winding number by summing signed angles; independent of the crossing test.
fn winding_number(p: Point, poly: &CartesianPolygon) -> i32 {
    let total: f64 = poly
        .edges()
        .map(|(a, b)| {
            let (ax, ay) = (a.x - p.x, a.y - p.y);
            let (bx, by) = (b.x - p.x, b.y - p.y);
            (ax * by - ay * bx).atan2(ax * bx + ay * by)
        })
        .sum();
    (total / std::f64::consts::TAU).round() as i32
}

/// Area-weighted centroid estimated on a fine midpoint lattice.
fn lattice_centroid(poly: &CartesianPolygon, n: usize) -> Point {
    let bb = poly.bbox();
    let (dx, dy) = (bb.width() / n as f64, bb.height() / n as f64);
    let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
    for i in 0..n {
        for j in 0..n {
            let p = Point::new(bb.min.x + (i as f64 + 0.5) * dx, bb.min.y + (j as f64 + 0.5) * dy);
            if winding_number(p, poly) != 0 {
                sx += p.x;
                sy += p.y;
                count += 1;
            }
        }
    }
    Point::new(sx / count as f64, sy / count as f64)
}

fn shape(seed: u64, k: usize, convex: bool) -> (CartesianPolygon, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let p = if convex {
        random_convex(&mut rng, k, c)
    } else {
        random_star_shaped(&mut rng, k, c)
    };
    (p, c)
}

proptest! {
    #[test]
    fn reversal_flips_area_sign(seed in any::<u64>(), k in 3usize..30, convex in any::<bool>()) {
        let (p, _) = shape(seed, k, convex);
        let a = p.signed_area();
        let r = p.reversed().signed_area();
        prop_assert!((a + r).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a > 0.0 && r < 0.0);
    }

    #[test]
    fn centroid_ignores_starting_vertex(seed in any::<u64>(), k in 3usize..30, s in 0usize..30) {
        let (p, _) = shape(seed, k, false);
        let c0 = p.geometric_centroid();
        let c1 = rotate_list(&p, s % k).geometric_centroid();
        prop_assert!(c0.distance(c1) <= 1e-12 * (1.0 + c0.x.abs().max(c0.y.abs())));
    }

    #[test]
    fn convex_centroid_is_inside(seed in any::<u64>(), k in 3usize..40) {
        let (p, _) = shape(seed, k, true);
        prop_assert!(point_in_polygon(p.geometric_centroid(), &p));
    }

    #[test]
    fn containment_matches_winding_number(seed in any::<u64>(), k in 3usize..25, qx in -6.0f64..6.0, qy in -6.0f64..6.0) {
        let (p, c) = shape(seed, k, false);
        let q = Point::new(c.x + qx, c.y + qy);
        let near_edge = p.edges().any(|(a, b)| polarfit_core::geometry::point_segment_distance(q, a, b) < 1e-9);
        prop_assume!(!near_edge);
        prop_assert_eq!(point_in_polygon(q, &p), winding_number(q, &p) != 0);
    }

    #[test]
    fn polar_round_trip(seed in any::<u64>(), k in 3usize..40, reverse in any::<bool>()) {
        let (p, c) = shape(seed, k, false);
        let input = if reverse { p.reversed() } else { p.clone() };
        let back = to_polar(&input, c).unwrap().to_cartesian();
        prop_assert_eq!(back.len(), k);
        // Same vertex cycle, counter-clockwise, up to the starting vertex.
        let v = p.vertices();
        let start = v.iter().position(|q| q.distance(back.vertices()[0]) < 1e-9).unwrap();
        for (i, q) in back.vertices().iter().enumerate() {
            prop_assert!(q.distance(v[(start + i) % k]) <= 1e-12 * (1.0 + c.x.abs() + c.y.abs() + 3.0));
        }
    }
}

#[test]
fn centroid_matches_lattice_estimate() {
    for seed in 0..20 {
        let (p, _) = shape(seed, 3 + seed as usize % 12, seed % 2 == 0);
        let exact = p.geometric_centroid();
        let approx = lattice_centroid(&p, 400);
        let scale = p.bbox().width().max(p.bbox().height());
        assert!(exact.distance(approx) < 5e-3 * scale, "{exact} vs {approx}");
    }
}

#[test]
fn notch_bbox_center_is_outside() {
    let notch = CartesianPolygon::from_xy(&[(0.0, 0.0), (3.0, 0.0), (3.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)]).unwrap();
    assert!(!point_in_polygon(notch.bbox().center(), &notch));
    assert_eq!(winding_number(notch.bbox().center(), &notch), 0);
}
