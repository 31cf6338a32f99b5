//! Gradient-descent fitting of a polar polygon to a target shape.

use serde::Serialize;

use crate::codec::{decode_with, AngleMode, DecoderConfig, GridCell};
use crate::error::{Error, Result};
use crate::geometry::{CartesianPolygon, OriginMode, PolarPolygon};
use crate::gradient::{loss_and_gradient, GroundTruth};
use crate::loss::{LossBreakdown, LossWeights};
use crate::scalar::BranchLog;

/// Number of iterations over which loss improvement is measured.
pub const CONVERGENCE_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitAngleMode {
    #[default]
    Cumsum,
    BinOffset,
    /// Angles frozen at uniform spacing; only origin and radii move.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    #[default]
    Adam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub m: usize,
    pub max_iters: usize,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub weights: LossWeights,
    pub angle_mode: FitAngleMode,
    pub origin_mode: OriginMode,
    /// Recorded for reproducibility; fitting itself draws no random numbers.
    pub seed: u64,
    /// Stop once the loss improved by less than this over the last
    /// [`CONVERGENCE_WINDOW`] iterations. Zero disables the check.
    pub convergence_tol: f64,
    /// Angle of the first ray.
    pub phase: f64,
    /// 1-based iterations whose polygon is kept in the trace.
    pub snapshot_iters: Vec<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k: 24,
            m: 360,
            max_iters: 500,
            optimizer: Optimizer::Adam,
            learning_rate: 0.05,
            weights: LossWeights::default(),
            angle_mode: FitAngleMode::Cumsum,
            origin_mode: OriginMode::Centroid,
            seed: 0,
            convergence_tol: 0.0,
            phase: 0.0,
            snapshot_iters: Vec::new(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::InvalidConfig(format!("k must be >= 3, got {}", self.k)));
        }
        if self.m < self.k {
            return Err(Error::InvalidConfig(format!(
                "m must be >= k, got m = {} and k = {}",
                self.m, self.k
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidConfig("convergence_tol must be >= 0".into()));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidConfig("phase must be finite".into()));
        }
        self.weights.validate()
    }

    /// Entries of the regression vector that the optimizer updates.
    pub fn param_count(&self) -> usize {
        match self.angle_mode {
            FitAngleMode::Fixed => 2 + self.k,
            _ => 2 + 2 * self.k,
        }
    }
}

/// First and second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// One bias-corrected Adam update.
pub fn adam_step(params: &[f64], grad: &[f64], state: &AdamState, lr: f64) -> (Vec<f64>, AdamState) {
    assert_eq!(params.len(), grad.len());
    assert_eq!(params.len(), state.m.len());
    let t = state.t + 1;
    let m: Vec<f64> = state
        .m
        .iter()
        .zip(grad)
        .map(|(m, g)| ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * g)
        .collect();
    let v: Vec<f64> = state
        .v
        .iter()
        .zip(grad)
        .map(|(v, g)| ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * g * g)
        .collect();
    let c1 = 1.0 - ADAM_BETA1.powi(t as i32);
    let c2 = 1.0 - ADAM_BETA2.powi(t as i32);
    let next = params
        .iter()
        .zip(m.iter().zip(&v))
        .map(|(p, (m, v))| p - lr * (m / c1) / ((v / c2).sqrt() + ADAM_EPS))
        .collect();
    (next, AdamState { m, v, t })
}

pub fn sgd_step(params: &[f64], grad: &[f64], lr: f64) -> Vec<f64> {
    params.iter().zip(grad).map(|(p, g)| p - lr * g).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    /// 1-based; the loss is that of the parameters before this iteration's update.
    pub iteration: usize,
    pub loss: LossBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub polygon: PolarPolygon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub records: Vec<IterRecord>,
    pub snapshots: Vec<Snapshot>,
    pub param_count: usize,
    pub converged: bool,
}

impl FitTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn first(&self) -> &IterRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("a fit runs at least one iteration")
    }
}

/// The decoding setup a fit uses for `target`: bbox cell, `mu` of half the
/// mean bbox extent.
pub fn fit_decoder(target: &CartesianPolygon, cfg: &FitConfig) -> Result<(GridCell, DecoderConfig)> {
    let cell = GridCell::covering(target);
    let mu = (cell.sx + cell.sy) / 4.0;
    let angle_mode = match cfg.angle_mode {
        FitAngleMode::BinOffset => AngleMode::BinOffset,
        FitAngleMode::Cumsum | FitAngleMode::Fixed => AngleMode::Cumsum,
    };
    Ok((cell, DecoderConfig::new(cfg.k, mu, angle_mode)?))
}

/// Fits a `cfg.k`-vertex polar polygon to `target`, starting from the
/// all-zero regression vector (a regular polygon of radius `mu` in the
/// middle of the target's bounding box).
pub fn fit(target: &CartesianPolygon, cfg: &FitConfig) -> Result<(PolarPolygon, FitTrace)> {
    cfg.validate()?;
    let gt = GroundTruth::encode(target, cfg.m, cfg.phase, cfg.origin_mode)?;
    let (cell, dcfg) = fit_decoder(target, cfg)?;
    let trainable = cfg.param_count();
    let mut f = vec![0.0; 2 + 2 * cfg.k];
    let mut adam = AdamState::new(trainable);
    let mut trace = FitTrace {
        records: Vec::with_capacity(cfg.max_iters),
        snapshots: Vec::new(),
        param_count: trainable,
        converged: false,
    };
    let mut polygon = None;
    for iteration in 1..=cfg.max_iters {
        let diverged = |e: Error| match e {
            Error::InvalidConfig(_) => e,
            _ => Error::Divergence { iteration },
        };
        let eval = loss_and_gradient(&f, trainable, &cell, &dcfg, &gt, &cfg.weights).map_err(diverged)?;
        let current = decode_with(&f, &cell, &dcfg, &mut BranchLog::disabled())
            .and_then(|d| d.into_polar())
            .map_err(diverged)?;
        trace.records.push(IterRecord {
            iteration,
            loss: eval.loss,
        });
        if cfg.snapshot_iters.contains(&iteration) {
            trace.snapshots.push(Snapshot {
                iteration,
                polygon: current.clone(),
            });
        }
        polygon = Some(current);
        if cfg.convergence_tol > 0.0 && trace.records.len() > CONVERGENCE_WINDOW {
            let n = trace.records.len();
            let improvement = trace.records[n - 1 - CONVERGENCE_WINDOW].loss.total - trace.records[n - 1].loss.total;
            if improvement.abs() < cfg.convergence_tol {
                trace.converged = true;
                break;
            }
        }
        if iteration == cfg.max_iters {
            break;
        }
        let grad = eval.gradient.values();
        let next = match cfg.optimizer {
            Optimizer::Adam => {
                let (next, state) = adam_step(&f[..trainable], grad, &adam, cfg.learning_rate);
                adam = state;
                next
            }
            Optimizer::Sgd => sgd_step(&f[..trainable], grad, cfg.learning_rate),
        };
        if next.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { iteration });
        }
        f[..trainable].copy_from_slice(&next);
    }
    Ok((polygon.expect("at least one iteration ran"), trace))
}
