// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Sparse control pulses for Heisenberg spin chains.
//!
//! Pulses on the first spin of a chain are optimized with BFGS against
//! `G = (1 − μ)·P − μ·F`, where `F` is the gate fidelity and `P` the
//! normalized L1 norm of the pulses. Robustness against an environment qubit
//! coupled in proportion to the pulse magnitude is measured by the trace
//! distance between Choi matrices.

pub mod channels;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod objective;
pub mod optimizer;

pub use error::{Error, Result};
pub use linalg::{Axis, ComplexMatrix};
pub use model::{BasisState, ChainSpec, ControlSequence, GateKind, TargetGate};
pub use objective::{ObjectiveConfig, Surrogate};
pub use optimizer::{OptimizationResult, OptimizerConfig};
