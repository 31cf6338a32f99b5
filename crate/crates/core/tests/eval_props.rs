use polarfit_core::eval::{evaluate, hungarian_assign, polygon_iou, IoUMatrix};
use polarfit_core::shapes::{random_convex, random_star_shaped};
use polarfit_core::{CartesianPolygon, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best total over every injection of the smaller side into the larger.
fn brute_force(m: &IoUMatrix) -> f64 {
    fn go(m: &IoUMatrix, row: usize, used: &mut Vec<bool>, transpose: bool) -> f64 {
        let (rows, cols) = if transpose { (m.cols(), m.rows()) } else { (m.rows(), m.cols()) };
        if row == rows {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..cols {
            if !used[c] {
                used[c] = true;
                let v = if transpose { m.get(c, row) } else { m.get(row, c) };
                best = best.max(v + go(m, row + 1, used, transpose));
                used[c] = false;
            }
        }
        best
    }
    let transpose = m.rows() > m.cols();
    let cols = if transpose { m.rows() } else { m.cols() };
    go(m, 0, &mut vec![false; cols], transpose)
}

fn total(m: &IoUMatrix, pairs: &[(usize, usize)]) -> f64 {
    // Sum in row order, as the brute force does.
    let mut pairs = pairs.to_vec();
    if m.rows() > m.cols() {
        pairs.sort_by_key(|&(_, j)| j);
    }
    pairs.iter().map(|&(i, j)| m.get(i, j)).sum()
}

fn dyadic_matrix(seed: u64, rows: usize, cols: usize) -> IoUMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(0..=64) as f64 / 64.0).collect();
    IoUMatrix::new(rows, cols, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn hungarian_is_optimal(seed in any::<u64>(), rows in 1usize..=7, cols in 1usize..=7) {
        let m = dyadic_matrix(seed, rows, cols);
        let pairs = hungarian_assign(&m);
        prop_assert_eq!(pairs.len(), rows.min(cols));
        let mut seen_r = vec![false; rows];
        let mut seen_c = vec![false; cols];
        for &(i, j) in &pairs {
            prop_assert!(!seen_r[i] && !seen_c[j]);
            seen_r[i] = true;
            seen_c[j] = true;
        }
        prop_assert_eq!(total(&m, &pairs), brute_force(&m));
    }
}

fn poly(seed: u64) -> CartesianPolygon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let k = rng.gen_range(3..12);
    if rng.gen_bool(0.5) {
        random_convex(&mut rng, k, c)
    } else {
        random_star_shaped(&mut rng, k, c)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iou_symmetric_and_bounded(a in any::<u64>(), b in any::<u64>()) {
        let (p, q) = (poly(a), poly(b));
        let x = polygon_iou(&p, &q, 128).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert_eq!(x, polygon_iou(&q, &p, 128).unwrap());
    }

    #[test]
    fn joint_translation_moves_iou_little(a in any::<u64>(), b in any::<u64>(), tx in -10.0f64..10.0, ty in -10.0f64..10.0) {
        let (p, q) = (poly(a), poly(b));
        let grid = 256;
        let x = polygon_iou(&p, &q, grid).unwrap();
        let y = polygon_iou(&p.translated(tx, ty), &q.translated(tx, ty), grid).unwrap();
        prop_assert!((x - y).abs() < 2.0 / grid as f64);
    }

    #[test]
    fn grid_doubling_converges_on_convex(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_convex(&mut rng, 8, Point::new(0.0, 0.0));
        let q = random_convex(&mut rng, 6, Point::new(0.4, 0.2));
        for grid in [128, 256] {
            let a = polygon_iou(&p, &q, grid).unwrap();
            let b = polygon_iou(&p, &q, 2 * grid).unwrap();
            prop_assert!((a - b).abs() < 4.0 / grid as f64);
        }
    }

    #[test]
    fn evaluate_is_permutation_invariant(seeds in proptest::collection::vec(any::<u64>(), 1..5), shift in 0usize..5, thr in 0.05f64..0.95) {
        let preds: Vec<_> = seeds.iter().map(|&s| poly(s)).collect();
        let gts: Vec<_> = seeds.iter().map(|&s| poly(s.wrapping_add(1)).translated(0.1, 0.0)).collect();
        let a = evaluate(&preds, &gts, thr, 128).unwrap();
        let mut p2 = preds.clone();
        p2.rotate_left(shift % preds.len());
        let mut g2 = gts.clone();
        g2.reverse();
        let b = evaluate(&p2, &g2, thr, 128).unwrap();
        prop_assert_eq!((a.precision, a.recall, a.f1), (b.precision, b.recall, b.f1));
        let (pr, rc) = (a.precision, a.recall);
        let f1 = if pr + rc > 0.0 { 2.0 * pr * rc / (pr + rc) } else { 0.0 };
        prop_assert!((a.f1 - f1).abs() <= 1e-12);
        prop_assert!(a.assignments.iter().all(|x| x.iou >= thr));
    }
}

#[test]
fn shifted_unit_square_is_one_third() {
    let a = CartesianPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
    let x = polygon_iou(&a, &a.translated(0.5, 0.0), 512).unwrap();
    assert!((x - 1.0 / 3.0).abs() < 5e-3);
}
