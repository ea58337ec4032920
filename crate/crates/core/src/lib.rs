//! Two-timescale secrecy beamforming for RIS-assisted SWIPT.
//!
//! A base station with `n_s` antennas serves one information user (IU) and
//! `m` energy users (EUs) through a reconfigurable intelligent surface with
//! `n_r` passive elements. The EUs harvest RF energy but are also treated as
//! potential eavesdroppers. The crate provides
//!
//! * [`scenario`]: geometry, Rician channel generation, effective channels and
//!   CSI impairments,
//! * [`metrics`]: SINRs, harvested power, worst-case and smoothed secrecy rate,
//! * [`cvxcore`]: a dense log-barrier solver for the convex beamforming
//!   subproblem and feasibility restoration,
//! * [`shortterm`]: the CCCP-BCD transmit beamforming algorithm,
//! * [`longterm`]: stochastic SCA updates of the RIS phase shifts,
//! * [`heuristic`]: the low-complexity statistical phase design,
//! * [`baselines`]: benchmark schemes,
//! * [`harness`]: the frame/slot simulation loop, sweeps and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cvxcore;
mod error;
pub mod harness;
pub mod heuristic;
pub mod linalg;
pub mod longterm;
pub mod metrics;
pub mod scenario;
pub mod shortterm;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use metrics::BeamformingSolution;
pub use scenario::{ChannelSample, ChannelStats, EffectiveChannels, PhaseShifts, SystemConfig};
