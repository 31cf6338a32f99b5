//! Shared fixtures for the benchmarks.

use polarfit_core::fit::{fit_decoder, FitConfig};
use polarfit_core::gradient::GroundTruth;
use polarfit_core::{
    shapes, to_polar, CartesianPolygon, DecoderConfig, GridCell, LossWeights, OriginMode, Point, PolarPolygon,
    RegressionVector,
};

/// Star-shaped target with `k` vertices around the origin.
pub fn star_target(k: usize) -> CartesianPolygon {
    shapes::star(k / 2, 2.0, 0.9, Point::new(0.0, 0.0), 0.1)
}

pub fn polar_star(k: usize) -> PolarPolygon {
    to_polar(&star_target(k), Point::new(0.0, 0.0)).expect("star is star-shaped")
}

/// Everything one loss-and-gradient evaluation needs.
pub struct GradientCase {
    pub f: RegressionVector,
    pub cell: GridCell,
    pub cfg: DecoderConfig,
    pub gt: GroundTruth,
    pub weights: LossWeights,
}

pub fn gradient_case(k: usize, m: usize) -> GradientCase {
    let target = star_target(24);
    let fit_cfg = FitConfig {
        k,
        m,
        ..Default::default()
    };
    let (cell, cfg) = fit_decoder(&target, &fit_cfg).expect("valid config");
    let gt = GroundTruth::encode(&target, m, 0.0, OriginMode::Centroid).expect("encodable target");
    GradientCase {
        f: RegressionVector::zeros(k).expect("k >= 3"),
        cell,
        cfg,
        gt,
        weights: LossWeights::default(),
    }
}
