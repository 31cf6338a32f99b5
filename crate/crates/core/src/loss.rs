//! Shape regression loss: origin term, polar IoU term and smoothness term.
//!
//! All terms are computed on dense radial profiles so prediction and ground
//! truth need not share a vertex count.

use serde::Serialize;

use crate::codec::DecodedPolygon;
use crate::error::{Error, Result};
use crate::geometry::{Point, PolarPolygon};
use crate::resample::{triangle_radii, DenseRadialProfile};
use crate::scalar::{BranchLog, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub origin: f64,
    pub polar_iou: f64,
    pub smoothness: f64,
    /// Wrap the smoothness differences around the profile end.
    pub circular_smoothness: bool,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            origin: 1.0,
            polar_iou: 1.0,
            smoothness: 0.1,
            circular_smoothness: false,
        }
    }
}

impl LossWeights {
    pub fn new(origin: f64, polar_iou: f64, smoothness: f64) -> Result<Self> {
        let w = Self {
            origin,
            polar_iou,
            smoothness,
            circular_smoothness: false,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ws = [self.origin, self.polar_iou, self.smoothness];
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "loss weights must be finite and non-negative, got {ws:?}"
            )));
        }
        if ws.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidConfig("loss weights are all zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub origin: f64,
    pub polar_iou: f64,
    pub smoothness: f64,
    pub total: f64,
}

/// Loss terms in an arbitrary scalar context.
#[derive(Debug, Clone, Copy)]
pub struct LossTerms<S> {
    pub origin: S,
    pub polar_iou: S,
    pub smoothness: S,
    pub total: S,
}

impl<S: Scalar> LossTerms<S> {
    pub fn breakdown(&self) -> LossBreakdown {
        LossBreakdown {
            origin: self.origin.value(),
            polar_iou: self.polar_iou.value(),
            smoothness: self.smoothness.value(),
            total: self.total.value(),
        }
    }
}

/// Smooth-L1 of a difference, transition at |d| = 1.
pub fn smooth_l1_of<S: Scalar>(diff: S, log: &mut BranchLog) -> S {
    let d = diff.abs();
    if d.value() < 1.0 {
        log.push(0);
        d * d * 0.5
    } else {
        log.push(1);
        d - 0.5
    }
}

pub fn smooth_l1(x: f64, y: f64) -> f64 {
    smooth_l1_of(x - y, &mut BranchLog::disabled())
}

pub fn origin_loss_with<S: Scalar>(
    pred: (S, S),
    gt: Point,
    gt_w: f64,
    gt_h: f64,
    log: &mut BranchLog,
) -> S {
    smooth_l1_of(pred.0 - gt.x, log) / gt_w + smooth_l1_of(pred.1 - gt.y, log) / gt_h
}

pub fn origin_loss(pred: Point, gt: Point, gt_w: f64, gt_h: f64) -> Result<f64> {
    check_extent(gt_w, gt_h)?;
    Ok(origin_loss_with((pred.x, pred.y), gt, gt_w, gt_h, &mut BranchLog::disabled()))
}

fn check_extent(w: f64, h: f64) -> Result<()> {
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ground-truth extent must be positive, got {w} x {h}"
        )));
    }
    Ok(())
}

/// `ln(Σ max(r, r̂) / Σ min(r, r̂))`; ties send the gradient to the prediction.
pub fn polar_iou_loss_with<S: Scalar>(pred: &[S], gt: &[f64], log: &mut BranchLog) -> S {
    let mut sum_max: Option<S> = None;
    let mut sum_min: Option<S> = None;
    for (&r, &g) in pred.iter().zip(gt) {
        let g = r.constant_like(g);
        let hi = r.max(g);
        let lo = r.min(g);
        log.push(u64::from(r.value() >= g.value()));
        sum_max = Some(sum_max.map_or(hi, |s| s + hi));
        sum_min = Some(sum_min.map_or(lo, |s| s + lo));
    }
    match (sum_max, sum_min) {
        (Some(hi), Some(lo)) => (hi / lo).ln(),
        _ => panic!("polar IoU of empty profiles"),
    }
}

pub fn polar_iou_loss_radii(pred: &[f64], gt: &[f64]) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::ProfileMismatch(format!(
            "ray counts differ or are zero: {} vs {}",
            pred.len(),
            gt.len()
        )));
    }
    if pred.iter().chain(gt).any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::ProfileMismatch("radii must be positive".into()));
    }
    Ok(polar_iou_loss_with(pred, gt, &mut BranchLog::disabled()))
}

pub fn polar_iou_loss(pred: &DenseRadialProfile, gt: &DenseRadialProfile) -> Result<f64> {
    check_comparable(pred, gt)?;
    polar_iou_loss_radii(pred.radii(), gt.radii())
}

fn check_comparable(pred: &DenseRadialProfile, gt: &DenseRadialProfile) -> Result<()> {
    if pred.m() != gt.m() {
        return Err(Error::ProfileMismatch(format!(
            "ray counts differ: {} vs {}",
            pred.m(),
            gt.m()
        )));
    }
    if pred.phase() != gt.phase() {
        return Err(Error::ProfileMismatch(format!(
            "ray phases differ: {} vs {}",
            pred.phase(),
            gt.phase()
        )));
    }
    Ok(())
}

/// Mean absolute first difference plus mean absolute second difference.
///
/// Non-circular: first differences over `i ∈ [1, m−1]`, second differences
/// over `i ∈ [1, m−2]`. Circular: both over all `m` positions with wrap.
pub fn smoothness_with<S: Scalar>(r: &[S], circular: bool, log: &mut BranchLog) -> S {
    let m = r.len();
    let mut first: Option<S> = None;
    let mut second: Option<S> = None;
    let mut acc = |slot: &mut Option<S>, v: S| {
        log.push(u64::from(v.value() >= 0.0));
        let a = v.abs();
        *slot = Some(slot.map_or(a, |s| s + a));
    };
    if circular {
        for i in 0..m {
            let prev = r[(i + m - 1) % m];
            let next = r[(i + 1) % m];
            acc(&mut first, r[i] - prev);
            acc(&mut second, next - r[i] * 2.0 + prev);
        }
        let n = m as f64;
        first.expect("m >= 3") / n + second.expect("m >= 3") / n
    } else {
        for i in 1..m {
            acc(&mut first, r[i] - r[i - 1]);
        }
        for i in 1..m - 1 {
            acc(&mut second, r[i + 1] - r[i] * 2.0 + r[i - 1]);
        }
        first.expect("m >= 3") / (m - 1) as f64 + second.expect("m >= 3") / (m - 2) as f64
    }
}

pub fn smoothness_loss_radii(radii: &[f64], circular: bool) -> Result<f64> {
    if radii.len() < 3 {
        return Err(Error::ProfileMismatch(format!(
            "smoothness needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    Ok(smoothness_with(radii, circular, &mut BranchLog::disabled()))
}

pub fn smoothness_loss(pred: &DenseRadialProfile) -> f64 {
    smoothness_with(pred.radii(), false, &mut BranchLog::disabled())
}

/// Full loss of a decoded prediction against a ground-truth profile.
///
/// The prediction is resampled about its own origin with the ground truth's
/// ray count and phase. `total = w1·origin + w2·polar_iou + w3·smoothness`.
pub fn regression_loss_with<S: Scalar>(
    pred: &DecodedPolygon<S>,
    gt_origin: Point,
    gt_profile: &DenseRadialProfile,
    gt_w: f64,
    gt_h: f64,
    weights: &LossWeights,
    log: &mut BranchLog,
) -> Result<LossTerms<S>> {
    check_extent(gt_w, gt_h)?;
    weights.validate()?;
    let radii = triangle_radii(&pred.angles, &pred.radii, gt_profile.m(), gt_profile.phase(), log)?;
    let origin = origin_loss_with(pred.origin, gt_origin, gt_w, gt_h, log);
    let polar_iou = polar_iou_loss_with(&radii, gt_profile.radii(), log);
    let smoothness = smoothness_with(&radii, weights.circular_smoothness, log);
    let total = origin * weights.origin + polar_iou * weights.polar_iou + smoothness * weights.smoothness;
    Ok(LossTerms {
        origin,
        polar_iou,
        smoothness,
        total,
    })
}

pub fn regression_loss(
    pred: &PolarPolygon,
    gt_origin: Point,
    gt_profile: &DenseRadialProfile,
    gt_w: f64,
    gt_h: f64,
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    let decoded = DecodedPolygon {
        origin: (pred.origin().x, pred.origin().y),
        radii: pred.radii(),
        angles: pred.angles(),
    };
    let terms = regression_loss_with(
        &decoded,
        gt_origin,
        gt_profile,
        gt_w,
        gt_h,
        weights,
        &mut BranchLog::disabled(),
    )?;
    let b = terms.breakdown();
    if !b.total.is_finite() {
        return Err(Error::NonFinite("regression loss".into()));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{E, LN_2, TAU};

    use super::*;
    use crate::geometry::PolarVertex;

    fn profile(radii: Vec<f64>) -> DenseRadialProfile {
        DenseRadialProfile::new(Point::new(0.0, 0.0), radii, 0.0).unwrap()
    }

    #[test]
    fn smooth_l1_examples() {
        assert_eq!(smooth_l1(3.7, 3.7), 0.0);
        assert_eq!(smooth_l1(0.0, 0.5), 0.125);
        assert_eq!(smooth_l1(0.0, 3.0), 2.5);
        assert_eq!(smooth_l1(1.0, 0.0), 0.5);
    }

    #[test]
    fn origin_loss_examples() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(origin_loss(Point::new(2.0, 1.0), Point::new(2.0, 1.0), 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(origin_loss(Point::new(0.5, 0.0), o, 1.0, 1.0).unwrap(), 0.125);
        assert_eq!(origin_loss(Point::new(3.0, 0.0), o, 2.0, 1.0).unwrap(), 1.25);
        assert!(origin_loss(o, o, 0.0, 1.0).is_err());
    }

    #[test]
    fn polar_iou_examples() {
        let gt = profile(vec![1.0, 2.0, 3.0, 1.5]);
        assert_eq!(polar_iou_loss(&gt, &gt).unwrap(), 0.0);
        let doubled = profile(gt.radii().iter().map(|r| r * 2.0).collect());
        assert!((polar_iou_loss(&doubled, &gt).unwrap() - LN_2).abs() < 1e-15);
        assert!((polar_iou_loss_radii(&[1.0, 2.0], &[2.0, 1.0]).unwrap() - LN_2).abs() < 1e-15);
        for c in [1.0, 2.0, E, 10.0] {
            let scaled: Vec<f64> = gt.radii().iter().map(|r| r * c).collect();
            let l = polar_iou_loss_radii(&scaled, gt.radii()).unwrap();
            assert!((l - c.ln()).abs() < 1e-15, "{c}: {l}");
        }
    }

    #[test]
    fn polar_iou_rejects_mismatch() {
        let a = profile(vec![1.0; 8]);
        let b = profile(vec![1.0; 9]);
        assert!(matches!(polar_iou_loss(&a, &b), Err(Error::ProfileMismatch(_))));
        let c = DenseRadialProfile::new(Point::new(0.0, 0.0), vec![1.0; 8], 0.1).unwrap();
        assert!(matches!(polar_iou_loss(&a, &c), Err(Error::ProfileMismatch(_))));
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(smoothness_loss(&profile(vec![2.5; 16])), 0.0);
        let ramp = smoothness_loss_radii(&[0.0, 1.0, 2.0, 3.0, 4.0], false).unwrap();
        assert_eq!(ramp, 1.0);
        let alt = smoothness_loss_radii(&[1.0, 2.0, 1.0, 2.0, 1.0], false).unwrap();
        assert_eq!(alt, 3.0);
        // wrapping the ramp adds the 4 -> 0 jump
        let wrapped = smoothness_loss_radii(&[0.0, 1.0, 2.0, 3.0, 4.0], true).unwrap();
        assert!((wrapped - (8.0 / 5.0 + 10.0 / 5.0)).abs() < 1e-15);
        assert!(smoothness_loss_radii(&[1.0, 2.0], false).is_err());
    }

    #[test]
    fn regression_loss_scaled_circle() {
        let m = 64;
        let k = 256;
        let circle = |r: f64| {
            let v = (0..k)
                .map(|i| PolarVertex {
                    angle: TAU * i as f64 / k as f64,
                    radius: r,
                })
                .collect();
            PolarPolygon::new(Point::new(1.0, 2.0), v).unwrap()
        };
        let gt = crate::resample::resample_triangle(&circle(1.0), m, 0.0).unwrap();
        let w = LossWeights::default();
        let same = regression_loss(&circle(1.0), Point::new(1.0, 2.0), &gt, 2.0, 2.0, &w).unwrap();
        assert_eq!(same.total, 0.0);
        let big = regression_loss(&circle(2.0), Point::new(1.0, 2.0), &gt, 2.0, 2.0, &w).unwrap();
        assert_eq!(big.origin, 0.0);
        assert!((big.polar_iou - LN_2).abs() < 1e-12);
        assert!(big.smoothness < 1e-12);
        assert!((big.total - (w.polar_iou * big.polar_iou + w.smoothness * big.smoothness)).abs() < 1e-12);
    }

    #[test]
    fn weights_validation() {
        assert!(LossWeights::new(0.0, 0.0, 0.0).is_err());
        assert!(LossWeights::new(-1.0, 1.0, 0.0).is_err());
        assert!(LossWeights::new(0.0, 1.0, 0.0).is_ok());
    }
}
