//! Transfer operators of iterated contraction systems, exact 1-Wasserstein
//! transport on finitely supported measures, and the contraction and
//! stability estimates for the dual normalized operator.
//!
//! The pieces, bottom up:
//!
//! - [`space`]: compact metric spaces (circle, interval, symbolic, planar
//!   regions) with snowflake and scale-truncated metric transforms.
//! - [`ics`], [`multiset`], [`sequence`]: iterated contraction systems with
//!   their branch pairings, admissible sequences and the distance `d∞`.
//! - [`potential`], [`grid`], [`transfer`]: potentials, the transfer operator,
//!   its RPF eigendata and the normalized Markov operator `ℙ`.
//! - [`measure`], [`transport`]: discrete measures and exact `W₁`.
//! - [`contraction`]: the dual operator `ℙ*`, theoretical constants, measured
//!   contraction rates, Gibbs measures and spectral-gap decay.
//! - [`stability`]: perturbation bounds for Gibbs measures, entropy and
//!   maximal-entropy measures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
pub mod error;
pub mod grid;
pub mod ics;
pub mod measure;
pub mod multiset;
pub mod potential;
pub mod sequence;
pub mod space;
pub mod stability;
pub mod transfer;
pub mod transport;

pub use error::{Error, Result};
pub use grid::Grid;
pub use ics::{AffineMap, Ics, Perturbation, SystemSpec};
pub use measure::DiscreteMeasure;
pub use multiset::MultiSet;
pub use potential::{Potential, PotentialSpec};
pub use space::{PhaseSpace, Point, Region, SpaceKind};
pub use transfer::{EigenData, NormalizedOperator, TransferOperator};
pub use transport::{w1, wasserstein1, TransportPlan, W1Solution};
