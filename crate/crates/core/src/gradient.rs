//! Loss and gradient of the decode → resample → loss pipeline with respect
//! to the regression vector.

use std::f64::consts::TAU;

use crate::autodiff::{Gradient, Tape};
use crate::codec::{decode_with, DecoderConfig, GridCell, RegressionVector};
use crate::error::{Error, Result};
use crate::geometry::{CartesianPolygon, OriginMode, Point};
use crate::loss::{regression_loss_with, LossBreakdown, LossWeights};
use crate::resample::{resample_vector, DenseRadialProfile};
use crate::scalar::BranchLog;

/// Minimum angular distance between a ray and a decoded vertex below which
/// an input is flagged as sitting on a resampling branch boundary.
pub const SINGULAR_GAP: f64 = 1e-6;

/// Everything the loss needs to know about the target.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub origin: Point,
    pub profile: DenseRadialProfile,
    pub width: f64,
    pub height: f64,
}

impl GroundTruth {
    pub fn new(origin: Point, profile: DenseRadialProfile, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ground-truth extent must be positive, got {width} x {height}"
            )));
        }
        Ok(Self {
            origin,
            profile,
            width,
            height,
        })
    }

    /// Origin from `origin_mode`, profile by vector resampling, extent from the bbox.
    pub fn encode(target: &CartesianPolygon, m: usize, phase: f64, origin_mode: OriginMode) -> Result<Self> {
        let origin = origin_mode.origin_of(target);
        let profile = resample_vector(target, origin, m, phase)?;
        let bb = target.bbox();
        Self::new(origin, profile, bb.width(), bb.height())
    }
}

/// Plain (untaped) loss at `f`.
pub fn loss_value(
    f: &[f64],
    cell: &GridCell,
    cfg: &DecoderConfig,
    gt: &GroundTruth,
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    loss_with_branches(f, cell, cfg, gt, weights, &mut BranchLog::disabled())
}

/// Plain loss at `f`, recording branch decisions into `log`.
pub fn loss_with_branches(
    f: &[f64],
    cell: &GridCell,
    cfg: &DecoderConfig,
    gt: &GroundTruth,
    weights: &LossWeights,
    log: &mut BranchLog,
) -> Result<LossBreakdown> {
    let decoded = decode_with(f, cell, cfg, log)?;
    let terms = regression_loss_with(&decoded, gt.origin, &gt.profile, gt.width, gt.height, weights, log)?;
    Ok(terms.breakdown())
}

#[derive(Debug, Clone)]
pub struct GradientEval {
    pub loss: LossBreakdown,
    /// Derivatives with respect to the trainable prefix of the input.
    pub gradient: Gradient,
    /// Smallest angular distance between any ray and any decoded vertex.
    pub min_ray_gap: f64,
    /// True when `min_ray_gap <= SINGULAR_GAP`: the one-sided branch was used.
    pub near_singular: bool,
    pub tape_len: usize,
}

/// Loss and gradient at `f` where only `f[..trainable]` are variables; the
/// remaining entries are held constant.
pub fn loss_and_gradient(
    f: &[f64],
    trainable: usize,
    cell: &GridCell,
    cfg: &DecoderConfig,
    gt: &GroundTruth,
    weights: &LossWeights,
) -> Result<GradientEval> {
    if trainable > f.len() {
        return Err(Error::InvalidConfig(format!(
            "{trainable} trainable entries requested from a vector of {}",
            f.len()
        )));
    }
    let tape = Tape::new();
    let vars: Vec<_> = f
        .iter()
        .enumerate()
        .map(|(j, &v)| if j < trainable { tape.input(v) } else { tape.constant(v) })
        .collect();
    let mut log = BranchLog::disabled();
    let decoded = decode_with(&vars, cell, cfg, &mut log)?;
    let min_ray_gap = {
        let angles: Vec<f64> = decoded.angles.iter().map(|a| crate::scalar::Scalar::value(*a)).collect();
        min_ray_vertex_gap(&angles, gt.profile.m(), gt.profile.phase())
    };
    let terms = regression_loss_with(&decoded, gt.origin, &gt.profile, gt.width, gt.height, weights, &mut log)?;
    let loss = terms.breakdown();
    if !loss.total.is_finite() {
        return Err(Error::NonFinite("regression loss".into()));
    }
    let adjoints = tape.backward(terms.total);
    let gradient = adjoints.gradient(&vars[..trainable]);
    if !gradient.is_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    Ok(GradientEval {
        loss,
        gradient,
        min_ray_gap,
        near_singular: min_ray_gap <= SINGULAR_GAP,
        tape_len: tape.len(),
    })
}

/// Total regression loss and its gradient with respect to every entry of `f`.
pub fn grad_regression_loss(
    f: &RegressionVector,
    cell: &GridCell,
    cfg: &DecoderConfig,
    gt: &GroundTruth,
    weights: &LossWeights,
) -> Result<(f64, Gradient)> {
    let eval = loss_and_gradient(f.values(), f.values().len(), cell, cfg, gt, weights)?;
    Ok((eval.loss.total, eval.gradient))
}

/// Smallest circular distance between a vertex angle and the nearest ray.
pub fn min_ray_vertex_gap(angles: &[f64], m: usize, phase: f64) -> f64 {
    let spacing = TAU / m as f64;
    angles
        .iter()
        .map(|&a| {
            let d = (a - phase).rem_euclid(spacing);
            d.min(spacing - d)
        })
        .fold(f64::INFINITY, f64::min)
}
