//! Randomized comparison of taped gradients against central differences.
//!
//! Trials whose central-difference stencil straddles a branch boundary of
//! the piecewise loss (ray bracket change, max/min swap, smooth-L1 kink,
//! sign change inside the smoothness term) are redrawn: there the two
//! routes legitimately disagree. Inputs within [`BRANCH_MARGIN`] of such a
//! boundary are redrawn as well.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autodiff::finite_difference;
use crate::codec::{decode_with, AngleMode, DecoderConfig, GridCell};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gradient::{loss_and_gradient, loss_with_branches, min_ray_vertex_gap, GroundTruth};
use crate::loss::LossWeights;
use crate::resample::{triangle_radii, DenseRadialProfile};
use crate::scalar::BranchLog;

/// Distance to a branch boundary under which an input is excluded.
pub const BRANCH_MARGIN: f64 = 1e-6;
/// Components with `|g| <` this are compared in absolute terms.
pub const NEAR_ZERO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckConfig {
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub eps: f64,
    /// Relative tolerance.
    pub tolerance: f64,
    /// Absolute tolerance for near-zero components.
    pub abs_tolerance: f64,
    pub seed: u64,
    pub angle_mode: AngleMode,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            k: 12,
            m: 90,
            trials: 100,
            eps: 1e-5,
            tolerance: 1e-4,
            abs_tolerance: 1e-7,
            seed: 0,
            angle_mode: AngleMode::Cumsum,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GradcheckReport {
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    /// Draws rejected for sitting on or near a branch boundary.
    pub excluded: usize,
    pub components: usize,
    pub max_rel_error: f64,
    pub max_abs_error_near_zero: f64,
    pub failures: usize,
    pub passed: bool,
}

struct Trial {
    f: Vec<f64>,
    cell: GridCell,
    cfg: DecoderConfig,
    gt: GroundTruth,
}

fn draw_trial(rng: &mut ChaCha8Rng, k: usize, m: usize, angle_mode: AngleMode) -> Result<Trial> {
    let cell = GridCell::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(1.0..4.0),
        rng.gen_range(1.0..4.0),
    )?;
    let mu = rng.gen_range(0.5..2.0);
    let cfg = DecoderConfig::new(k, mu, angle_mode)?;
    let mut f = Vec::with_capacity(2 + 2 * k);
    f.push(rng.gen_range(-1.5..1.5));
    f.push(rng.gen_range(-1.5..1.5));
    f.extend((0..k).map(|_| rng.gen_range(-0.4..0.4)));
    f.extend((0..k).map(|_| rng.gen_range(-0.5..0.5)));
    let phase = rng.gen_range(0.0..TAU / m as f64);
    let gt_origin = Point::new(
        cell.gx + rng.gen_range(0.0..cell.sx),
        cell.gy + rng.gen_range(0.0..cell.sy),
    );
    let radii = (0..m).map(|_| mu * rng.gen_range(-0.5f64..0.5).exp()).collect();
    let profile = DenseRadialProfile::new(gt_origin, radii, phase)?;
    let gt = GroundTruth::new(gt_origin, profile, rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0))?;
    Ok(Trial { f, cell, cfg, gt })
}

/// Smallest distance from `trial.f` to a branch boundary, measured in the
/// quantity that switches.
fn branch_distance(trial: &Trial) -> Result<f64> {
    let Trial { f, cell, cfg, gt } = trial;
    let decoded = decode_with(f, cell, cfg, &mut BranchLog::disabled())?;
    let mut dist = min_ray_vertex_gap(&decoded.angles, gt.profile.m(), gt.profile.phase());
    let radii = triangle_radii(
        &decoded.angles,
        &decoded.radii,
        gt.profile.m(),
        gt.profile.phase(),
        &mut BranchLog::disabled(),
    )?;
    for (r, g) in radii.iter().zip(gt.profile.radii()) {
        dist = dist.min((r - g).abs());
    }
    dist = dist
        .min(((decoded.origin.0 - gt.origin.x).abs() - 1.0).abs())
        .min(((decoded.origin.1 - gt.origin.y).abs() - 1.0).abs());
    for w in radii.windows(2) {
        dist = dist.min((w[1] - w[0]).abs());
    }
    for w in radii.windows(3) {
        dist = dist.min((w[2] - 2.0 * w[1] + w[0]).abs());
    }
    Ok(dist)
}

/// True when every point of the central-difference stencil takes the same
/// branches as the centre.
fn stencil_is_smooth(trial: &Trial, weights: &LossWeights, eps: f64) -> Result<bool> {
    let Trial { f, cell, cfg, gt } = trial;
    let signature = |x: &[f64]| -> Result<BranchLog> {
        let mut log = BranchLog::recording();
        loss_with_branches(x, cell, cfg, gt, weights, &mut log)?;
        Ok(log)
    };
    let centre = signature(f)?;
    let mut probe = f.clone();
    for j in 0..f.len() {
        for step in [eps, -eps] {
            probe[j] = f[j] + step;
            if signature(&probe)? != centre {
                return Ok(false);
            }
        }
        probe[j] = f[j];
    }
    Ok(true)
}

pub fn run(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    if cfg.k < 3 || cfg.m < 3 || cfg.trials == 0 {
        return Err(Error::InvalidConfig(format!(
            "gradcheck needs k >= 3, m >= 3 and at least one trial (k = {}, m = {}, trials = {})",
            cfg.k, cfg.m, cfg.trials
        )));
    }
    if !(cfg.eps > 0.0 && cfg.tolerance > 0.0) {
        return Err(Error::InvalidConfig("eps and tolerance must be positive".into()));
    }
    let weights = LossWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = GradcheckReport {
        k: cfg.k,
        m: cfg.m,
        trials: 0,
        excluded: 0,
        components: 0,
        max_rel_error: 0.0,
        max_abs_error_near_zero: 0.0,
        failures: 0,
        passed: false,
    };
    let max_draws = cfg.trials * 1000;
    let mut draws = 0;
    while report.trials < cfg.trials {
        draws += 1;
        if draws > max_draws {
            return Err(Error::InvalidConfig(format!(
                "could not find {} smooth-region trials in {max_draws} draws",
                cfg.trials
            )));
        }
        let trial = draw_trial(&mut rng, cfg.k, cfg.m, cfg.angle_mode)?;
        if branch_distance(&trial)? <= BRANCH_MARGIN || !stencil_is_smooth(&trial, &weights, cfg.eps)? {
            report.excluded += 1;
            continue;
        }
        let eval = loss_and_gradient(&trial.f, trial.f.len(), &trial.cell, &trial.cfg, &trial.gt, &weights)?;
        let fd = finite_difference(
            |x| {
                loss_with_branches(x, &trial.cell, &trial.cfg, &trial.gt, &weights, &mut BranchLog::disabled())
                    .map(|l| l.total)
                    .unwrap_or(f64::NAN)
            },
            &trial.f,
            cfg.eps,
        )?;
        for (&g, &h) in eval.gradient.values().iter().zip(fd.values()) {
            report.components += 1;
            let abs_err = (g - h).abs();
            let ok = if g.abs() < NEAR_ZERO {
                report.max_abs_error_near_zero = report.max_abs_error_near_zero.max(abs_err);
                abs_err <= cfg.abs_tolerance || abs_err <= cfg.tolerance * h.abs()
            } else {
                let rel = abs_err / h.abs().max(g.abs());
                report.max_rel_error = report.max_rel_error.max(rel);
                rel <= cfg.tolerance
            };
            if !ok {
                report.failures += 1;
            }
        }
        report.trials += 1;
    }
    report.passed = report.failures == 0;
    Ok(report)
}
