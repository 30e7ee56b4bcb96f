// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Choi matrices of unitary and environment-coupled channels, and the
//! distance comparison between optimized and target gates.
//!
//! The Choi matrix is normalized to unit trace:
//! `J(Φ) = (1/n)·Σ_{i,j} Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, with the channel output as the
//! left tensor factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, ComplexMatrix};
use crate::model::{target_unitary, ChainOperators, ChainSpec, ControlSequence, TargetGate};
use crate::objective::ObjectiveConfig;
use crate::optimizer::{optimize_controls, OptimizationResult, OptimizerConfig};

pub const CHOI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    system_dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Assembles the Choi matrix from the images `Φ(|i⟩⟨j|)`.
    fn from_images(system_dim: usize, image: impl Fn(usize, usize) -> ComplexMatrix) -> Self {
        let n = system_dim;
        let norm = 1.0 / n as f64;
        let mut matrix = ComplexMatrix::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let out = image(i, j);
                for a in 0..n {
                    for b in 0..n {
                        matrix[(a * n + i, b * n + j)] = out[(a, b)] * norm;
                    }
                }
            }
        }
        Self { system_dim, matrix }
    }

    /// Hermitian, positive semidefinite and trace one, all within `tol`.
    pub fn is_valid_state(&self, tol: f64) -> bool {
        self.matrix.is_hermitian(tol)
            && (self.matrix.trace() - Complex64::new(1.0, 0.0)).norm() <= tol
            && self.matrix.is_positive_semidefinite(tol)
    }
}

pub fn choi_of_unitary(u: &ComplexMatrix) -> Result<ChoiMatrix> {
    let deviation = u.unitarity_deviation();
    if deviation > CHOI_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let n = u.dim();
    let columns: Vec<Vec<Complex64>> = (0..n).map(|i| u.column(i)).collect();
    Ok(ChoiMatrix::from_images(n, |i, j| {
        ComplexMatrix::outer(&columns[i], &columns[j])
    }))
}

/// Choi matrix of `ρ ↦ Tr_env[U_ext (ρ ⊗ |0⟩⟨0|) U_ext†]` where `U_ext` is the
/// evolution with the environment qubit attached.
pub fn choi_of_env_channel(spec: &ChainSpec, seq: &ControlSequence) -> Result<ChoiMatrix> {
    if !spec.env_enabled {
        return Err(Error::EnvironmentDisabled);
    }
    seq.validate()?;
    let u_ext = ChainOperators::new(spec)?.propagate_with_env(seq)?;
    Ok(choi_of_dilation(&u_ext))
}

/// Choi matrix of the channel obtained from a system+qubit unitary, with the
/// environment qubit starting in `|0⟩` and traced out at the end.
pub fn choi_of_dilation(u_ext: &ComplexMatrix) -> ChoiMatrix {
    let n = u_ext.dim() / 2;
    // Kraus operators K_e[a, i] = ⟨a, e| U_ext |i, 0⟩
    let kraus: Vec<ComplexMatrix> = (0..2)
        .map(|e| ComplexMatrix::from_fn(n, |a, i| u_ext[(2 * a + e, 2 * i)]))
        .collect();
    ChoiMatrix::from_images(n, |i, j| {
        let mut out = ComplexMatrix::zeros(n);
        for k in &kraus {
            for a in 0..n {
                for b in 0..n {
                    out[(a, b)] += k[(a, i)] * k[(b, j)].conj();
                }
            }
        }
        out
    })
}

/// Trace norm of the difference of two Choi matrices, in `[0, 2]`.
pub fn choi_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64> {
    if a.system_dim != b.system_dim {
        return Err(Error::DimensionMismatch {
            left: a.system_dim,
            right: b.system_dim,
        });
    }
    trace_norm(&(&a.matrix - &b.matrix))
}

/// Distances of one optimized sequence from the target gate's Choi matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDistances {
    pub without_env: f64,
    pub with_env: f64,
}

pub fn channel_distances(
    spec: &ChainSpec,
    target: &TargetGate,
    seq: &ControlSequence,
) -> Result<ChannelDistances> {
    let reference = choi_of_unitary(&target_unitary(target))?;
    let ops = ChainOperators::new(&ChainSpec {
        env_enabled: true,
        ..spec.clone()
    })?;
    let closed = choi_of_unitary(&ops.propagate(seq))?;
    let open = choi_of_dilation(&ops.propagate_with_env(seq)?);
    Ok(ChannelDistances {
        without_env: choi_distance(&reference, &closed)?,
        with_env: choi_distance(&reference, &open)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub target: String,
    pub mu_used: f64,
    pub gamma: f64,
    pub seed: u64,
    pub dist_no_env_mu1: f64,
    #[serde(rename = "dist_no_env_muL")]
    pub dist_no_env_mu_l: f64,
    pub dist_env_mu1: f64,
    #[serde(rename = "dist_env_muL")]
    pub dist_env_mu_l: f64,
    pub fidelity_mu1: f64,
    #[serde(rename = "fidelity_muL")]
    pub fidelity_mu_l: f64,
    pub penalty_mu1: f64,
    #[serde(rename = "penalty_muL")]
    pub penalty_mu_l: f64,
}

/// Both optimized runs behind a [`RobustnessReport`].
#[derive(Debug, Clone)]
pub struct RobustnessRun {
    pub report: RobustnessReport,
    pub unconstrained: OptimizationResult,
    pub constrained: OptimizationResult,
}

/// Optimizes pulses with `μ = 1` and with `μ = mu_constrained`, then measures
/// each against the target with and without the environment qubit.
pub fn robustness_experiment(
    spec: &ChainSpec,
    target: &TargetGate,
    template: &ControlSequence,
    mu_constrained: f64,
    obj: &ObjectiveConfig,
    opt: &OptimizerConfig,
) -> Result<RobustnessRun> {
    let spec = ChainSpec {
        env_enabled: true,
        ..spec.clone()
    };
    let closed_spec = ChainSpec {
        env_enabled: false,
        ..spec.clone()
    };
    let runs: Vec<OptimizationResult> = [1.0, mu_constrained]
        .iter()
        .map(|&mu| {
            let cfg = obj.clone().with_mu(mu);
            optimize_controls(&closed_spec, target, template, &cfg, opt)
        })
        .collect::<Result<_>>()?;
    let [unconstrained, constrained]: [OptimizationResult; 2] =
        runs.try_into().expect("two optimization runs");
    let d1 = channel_distances(&spec, target, &unconstrained.best_seq)?;
    let dl = channel_distances(&spec, target, &constrained.best_seq)?;
    let report = RobustnessReport {
        target: target.to_string(),
        mu_used: mu_constrained,
        gamma: spec.gamma,
        seed: opt.seed,
        dist_no_env_mu1: d1.without_env,
        dist_no_env_mu_l: dl.without_env,
        dist_env_mu1: d1.with_env,
        dist_env_mu_l: dl.with_env,
        fidelity_mu1: unconstrained.fidelity,
        fidelity_mu_l: constrained.fidelity,
        penalty_mu1: unconstrained.penalty,
        penalty_mu_l: constrained.penalty,
    };
    Ok(RobustnessRun {
        report,
        unconstrained,
        constrained,
    })
}
