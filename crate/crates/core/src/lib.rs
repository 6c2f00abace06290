//! Parametric integration by magic point empirical interpolation.
//!
//! An offline greedy phase ([`eim::train`]) picks magic parameters and magic
//! points from a discrete parameter cloud and domain grid and builds a
//! reusable quadrature rule. Online, the integral of any member of the family
//! costs `M` integrand evaluations.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod eim;
pub mod family;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod scalar;

pub use eim::{
    train, EimError, MagicModel, MagicPoint, ModelParts, QuadratureRule, StopReason, TrainConfig,
    TrainingReport,
};
pub use family::{
    DiscreteDomain, DomainError, FnFamily, Interval, ParameterCloud, ParametricFamily, ValueKind,
};
pub use quadrature::{integrate_adaptive, integrate_complex, QuadConfig, QuadError, QuadResult};
