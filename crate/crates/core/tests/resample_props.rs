use std::f64::consts::TAU;

use polarfit_core::geometry::to_polar;
use polarfit_core::resample::{ray_hits, ray_segment_intersect};
use polarfit_core::shapes::{random_convex, random_star_shaped};
use polarfit_core::{resample_oracle, resample_triangle, resample_vector, CartesianPolygon, DenseRadialProfile, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn max_diff(a: &DenseRadialProfile, b: &DenseRadialProfile) -> f64 {
    a.radii().iter().zip(b.radii()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn three_way_agreement_on_convex(seed in any::<u64>(), k in 3usize..40, m in 3usize..400, phase in -7.0f64..7.0) {
        let (p, c) = shape(seed, k, true);
        let tri = resample_triangle(&to_polar(&p, c).unwrap(), m, phase).unwrap();
        let vec = resample_vector(&p, c, m, phase).unwrap();
        let ora = resample_oracle(&p, c, m, phase).unwrap();
        prop_assert!(max_diff(&vec, &ora) <= 1e-9);
        prop_assert!(max_diff(&tri, &ora) <= 1e-9);
        prop_assert!(max_diff(&tri, &vec) <= 1e-9);
    }

    #[test]
    fn vector_matches_oracle_on_concave(seed in any::<u64>(), k in 3usize..40, m in 3usize..400, phase in 0.0f64..TAU) {
        let (p, c) = shape(seed, k, false);
        let vec = resample_vector(&p, c, m, phase).unwrap();
        let ora = resample_oracle(&p, c, m, phase).unwrap();
        prop_assert!(max_diff(&vec, &ora) <= 1e-9);
    }

    #[test]
    fn resampling_is_idempotent(seed in any::<u64>(), k in 3usize..30, m in 8usize..200, phase in 0.0f64..TAU) {
        let (p, c) = shape(seed, k, false);
        let prof = resample_vector(&p, c, m, phase).unwrap();
        let again = resample_triangle(&prof.to_polar_polygon().unwrap(), m, phase).unwrap();
        for (a, b) in prof.radii().iter().zip(again.radii()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn hits_respect_parameter_ranges(seed in any::<u64>(), k in 3usize..30, theta in 0.0f64..TAU) {
        let (p, c) = shape(seed, k, false);
        let hits = ray_hits(&p, c, theta);
        prop_assert!(!hits.is_empty());
        for h in hits {
            prop_assert!(h.t1 >= 0.0);
            prop_assert!((0.0..=1.0).contains(&h.t2));
        }
    }

    #[test]
    fn segment_hit_lies_on_both(ox in -2.0f64..2.0, oy in -2.0f64..2.0, theta in 0.0f64..TAU,
                                ax in -3.0f64..3.0, ay in -3.0f64..3.0, bx in -3.0f64..3.0, by in -3.0f64..3.0) {
        let (o, a, b) = (Point::new(ox, oy), Point::new(ax, ay), Point::new(bx, by));
        prop_assume!(a.distance(b) > 1e-6);
        if let Some(h) = ray_segment_intersect(o, theta, a, b).unwrap() {
            let on_ray = Point::new(o.x + h.t1 * theta.cos(), o.y + h.t1 * theta.sin());
            let on_seg = Point::new(a.x + h.t2 * (b.x - a.x), a.y + h.t2 * (b.y - a.y));
            prop_assert!(on_ray.distance(on_seg) <= 1e-9 * (1.0 + h.t1));
        }
    }
}

#[test]
fn refinement_area_is_monotone_on_convex() {
    for seed in 0..50 {
        let (p, c) = shape(seed, 5 + seed as usize % 20, true);
        let area = p.signed_area();
        let mut prev_gap = f64::INFINITY;
        for m in [16, 32, 64, 128] {
            let induced = resample_vector(&p, c, m, 0.0).unwrap().to_cartesian().signed_area();
            let gap = area - induced;
            assert!(gap >= -1e-12, "induced polygon larger than original at m = {m}");
            assert!(gap <= prev_gap + 1e-12, "gap grew at m = {m}: {gap} > {prev_gap}");
            prev_gap = gap;
        }
    }
}

#[test]
fn rays_through_vertices_still_hit() {
    // Straight down passes through an inner vertex of the star.
    let star = polarfit_core::shapes::demo_star().translated(0.2, 0.0);
    let o = Point::new(0.2, 0.0);
    let v = resample_vector(&star, o, 64, 0.0).unwrap();
    let r = resample_oracle(&star, o, 64, 0.0).unwrap();
    assert!(max_diff(&v, &r) < 1e-9);
    assert!((v.radii()[48] - 0.85).abs() < 1e-9);
}
