//! Topological-alignment jump process and its kinetic limit.
//!
//! * [`kernel`]: rank-weight kernels, `A`, `e_K(N)`, `α_N`
//! * [`rank`]: configurations, neighbor ranks, interaction rows `π_{i,·}`
//! * [`sim`]: exact event-driven simulation of the N-particle process
//! * [`kinetic`]: 1D phase-space solver for the limiting equation
//! * [`chaos`]: empirical marginals, distances, correlation defects, bounds
//! * [`study`], [`commands`], [`config`], [`io`]: orchestration and file formats

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod kernel;
pub mod kinetic;
pub mod rank;
pub mod sim;
pub mod study;

pub use error::{Error, Result};
