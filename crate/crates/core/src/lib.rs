//! Polar polygon geometry with a differentiable decode, resample and loss
//! pipeline, gradient-descent shape fitting and polygon IoU evaluation.

pub mod autodiff;
pub mod codec;
pub mod error;
pub mod eval;
pub mod fit;
pub mod geometry;
pub mod gradcheck;
pub mod gradient;
pub mod io;
pub mod loss;
pub mod resample;
pub mod scalar;
pub mod shapes;

pub use autodiff::{Gradient, Tape, Var};
pub use codec::{decode, AngleMode, DecoderConfig, GridCell, RegressionVector};
pub use error::{Error, Result};
pub use eval::{evaluate, hungarian_assign, polygon_iou, IoUMatrix, MatchReport};
pub use fit::{fit, FitAngleMode, FitConfig, FitTrace, Optimizer};
pub use geometry::{to_polar, BBox, CartesianPolygon, OriginMode, Point, PolarPolygon, PolarVertex};
pub use gradcheck::{GradcheckConfig, GradcheckReport};
pub use gradient::{grad_regression_loss, GroundTruth};
pub use loss::{regression_loss, LossBreakdown, LossWeights};
pub use resample::{resample_oracle, resample_triangle, resample_vector, DenseRadialProfile};
pub use scalar::Scalar;
