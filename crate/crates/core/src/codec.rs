//! Regression vector ⇄ polar polygon.
//!
//! Layout of a regression vector for `k` vertices (exactly `2 + 2k` entries):
//!
//! | slice          | meaning             |
//! |----------------|---------------------|
//! | `f[0..2]`      | origin logits       |
//! | `f[2..2+k]`    | radius logits       |
//! | `f[2+k..2+2k]` | angle logits        |

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{CartesianPolygon, OriginMode, Point, PolarPolygon, PolarVertex};
use crate::resample::{self, DenseRadialProfile};
use crate::scalar::{BranchLog, Scalar, LOGIT_CLAMP};

/// Largest representable angle below 2π; the stored angle of a vertex that
/// decodes to exactly 2π.
pub const TAU_BELOW: f64 = 6.283_185_307_179_585;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionVector {
    values: Vec<f64>,
}

impl RegressionVector {
    pub fn new(values: Vec<f64>, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidConfig(format!("k must be >= 3, got {k}")));
        }
        if values.len() != 2 + 2 * k {
            return Err(Error::InvalidConfig(format!(
                "regression vector for k = {k} needs {} entries, got {}",
                2 + 2 * k,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("regression vector entry".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0.0; 2 + 2 * k], k)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        (self.values.len() - 2) / 2
    }
}

/// Cell the origin offset is decoded against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub gx: f64,
    pub gy: f64,
    pub sx: f64,
    pub sy: f64,
}

impl GridCell {
    pub fn new(gx: f64, gy: f64, sx: f64, sy: f64) -> Result<Self> {
        if !(sx > 0.0 && sy > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid cell size must be positive, got ({sx}, {sy})"
            )));
        }
        Ok(Self { gx, gy, sx, sy })
    }

    /// Cell spanning the bounding box of `poly`.
    pub fn covering(poly: &CartesianPolygon) -> Self {
        let bb = poly.bbox();
        Self {
            gx: bb.min.x,
            gy: bb.min.y,
            sx: bb.width(),
            sy: bb.height(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleMode {
    /// Softmax-normalized cumulative sum of angle deltas.
    #[default]
    Cumsum,
    /// One vertex per uniform angular bin, offset by a sigmoid.
    BinOffset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub k: usize,
    pub mu: f64,
    pub angle_mode: AngleMode,
}

impl DecoderConfig {
    pub fn new(k: usize, mu: f64, angle_mode: AngleMode) -> Result<Self> {
        let cfg = Self { k, mu, angle_mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::InvalidConfig(format!("k must be >= 3, got {}", self.k)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("mu must be > 0, got {}", self.mu)));
        }
        Ok(())
    }
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            k: 24,
            mu: 1.0,
            angle_mode: AngleMode::Cumsum,
        }
    }
}

/// Decoded polygon parameters, relative to `origin`.
#[derive(Debug, Clone)]
pub struct DecodedPolygon<S> {
    pub origin: (S, S),
    pub radii: Vec<S>,
    pub angles: Vec<S>,
}

impl DecodedPolygon<f64> {
    pub fn into_polar(self) -> Result<PolarPolygon> {
        let vertices = self
            .angles
            .iter()
            .zip(&self.radii)
            .map(|(&angle, &radius)| PolarVertex { angle, radius })
            .collect();
        PolarPolygon::new(Point::new(self.origin.0, self.origin.1), vertices)
    }
}

pub fn decode_origin_with<S: Scalar>(f0: S, f1: S, cell: &GridCell) -> (S, S) {
    (f0.sigmoid() * cell.sx + cell.gx, f1.sigmoid() * cell.sy + cell.gy)
}

pub fn decode_radii_with<S: Scalar>(f: &[S], mu: f64) -> Result<Vec<S>> {
    f.iter()
        .map(|&fi| {
            let r = fi.clamp_abs(LOGIT_CLAMP).exp() * mu;
            if r.value().is_finite() && r.value() > 0.0 {
                Ok(r)
            } else {
                Err(Error::Overflow("radius"))
            }
        })
        .collect()
}

/// Raw cumulative angles; the last entry is exactly 2π.
pub fn decode_angles_cumsum_with<S: Scalar>(f: &[S]) -> Result<Vec<S>> {
    let weights: Vec<S> = f.iter().map(|&fi| fi.clamp_abs(LOGIT_CLAMP).exp()).collect();
    let mut cumulative = Vec::with_capacity(f.len());
    let mut running: Option<S> = None;
    for &w in &weights {
        let next = match running {
            None => w,
            Some(acc) => acc + w,
        };
        cumulative.push(next);
        running = Some(next);
    }
    let Some(total) = running else {
        return Ok(Vec::new());
    };
    if !total.value().is_finite() {
        return Err(Error::Overflow("angle weights"));
    }
    Ok(cumulative.into_iter().map(|c| (c / total) * TAU).collect())
}

pub fn decode_angles_bin_offset_with<S: Scalar>(f: &[S]) -> Vec<S> {
    let bin = TAU / f.len() as f64;
    f.iter()
        .enumerate()
        .map(|(i, &fi)| (fi.sigmoid() + i as f64) * bin)
        .collect()
}

/// Maps raw decoded angles onto strictly increasing values in `[0, 2π)`.
///
/// Only saturated logits (or the cumulative decoder's final 2π) trigger a
/// replacement; replaced entries become constants.
fn canonicalize_angles<S: Scalar>(angles: &mut [S], log: &mut BranchLog) {
    let Some(last) = angles.len().checked_sub(1) else {
        return;
    };
    if angles[last].value() >= TAU_BELOW {
        angles[last] = angles[last].constant_like(TAU_BELOW);
        log.push(1);
    } else {
        log.push(0);
    }
    for i in (0..last).rev() {
        let upper = angles[i + 1].value();
        if angles[i].value() >= upper {
            angles[i] = angles[i].constant_like(upper.next_down().max(0.0));
            log.push(1);
        } else {
            log.push(0);
        }
    }
}

/// Decodes `f` (length `2 + 2k`) in any scalar context.
pub fn decode_with<S: Scalar>(
    f: &[S],
    cell: &GridCell,
    cfg: &DecoderConfig,
    log: &mut BranchLog,
) -> Result<DecodedPolygon<S>> {
    cfg.validate()?;
    let k = cfg.k;
    if f.len() != 2 + 2 * k {
        return Err(Error::InvalidConfig(format!(
            "regression vector for k = {k} needs {} entries, got {}",
            2 + 2 * k,
            f.len()
        )));
    }
    let origin = decode_origin_with(f[0], f[1], cell);
    let radii = decode_radii_with(&f[2..2 + k], cfg.mu)?;
    let mut angles = match cfg.angle_mode {
        AngleMode::Cumsum => decode_angles_cumsum_with(&f[2 + k..])?,
        AngleMode::BinOffset => decode_angles_bin_offset_with(&f[2 + k..]),
    };
    canonicalize_angles(&mut angles, log);
    Ok(DecodedPolygon {
        origin,
        radii,
        angles,
    })
}

pub fn decode_origin(f0: f64, f1: f64, cell: &GridCell) -> Point {
    let (x, y) = decode_origin_with(f0, f1, cell);
    Point::new(x, y)
}

pub fn decode_radii(f: &[f64], mu: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(Error::InvalidConfig(format!("mu must be > 0, got {mu}")));
    }
    decode_radii_with(f, mu)
}

/// Cumulative angles ending at exactly 2π. Entries that round onto their
/// successor (from saturated logits) are nudged down to keep the output
/// strictly increasing.
pub fn decode_angles_cumsum(f: &[f64]) -> Result<Vec<f64>> {
    let mut a = decode_angles_cumsum_with(f)?;
    for i in (0..a.len().saturating_sub(1)).rev() {
        if a[i] >= a[i + 1] {
            a[i] = a[i + 1].next_down();
        }
    }
    Ok(a)
}

pub fn decode_angles_bin_offset(f: &[f64]) -> Vec<f64> {
    decode_angles_bin_offset_with(f)
}

pub fn decode(f: &RegressionVector, cell: &GridCell, cfg: &DecoderConfig) -> Result<PolarPolygon> {
    decode_with(f.values(), cell, cfg, &mut BranchLog::disabled())?.into_polar()
}

/// Ground-truth regression targets: centroid origin plus a dense profile
/// from the vector approach with rays starting at angle 0.
pub fn encode_ground_truth(gt: &CartesianPolygon, m: usize) -> Result<(Point, DenseRadialProfile)> {
    encode_ground_truth_with(gt, m, 0.0, OriginMode::Centroid)
}

pub fn encode_ground_truth_with(
    gt: &CartesianPolygon,
    m: usize,
    phase: f64,
    origin_mode: OriginMode,
) -> Result<(Point, DenseRadialProfile)> {
    let origin = origin_mode.origin_of(gt);
    let profile = resample::resample_vector(gt, origin, m, phase)?;
    Ok((origin, profile))
}
