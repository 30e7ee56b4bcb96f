// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Gate fidelity, L1 pulse penalty and the combined functional
//! `G = (1 − μ)·P − μ·F`, with exact gradients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::{expi_divided_difference, reconstruct, ComplexMatrix};
use crate::model::{target_unitary, ChainOperators, ChainSpec, ControlSequence, TargetGate};

/// Stand-in for `d|x|/dx` used by the penalty gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    Signum,
    Fractional,
    FermiDirac,
}

impl std::str::FromStr for Surrogate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "signum" | "sign" => Ok(Self::Signum),
            "fractional" => Ok(Self::Fractional),
            "fermi_dirac" | "fermidirac" => Ok(Self::FermiDirac),
            _ => Err(Error::InvalidConfig(format!("unknown surrogate {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    /// Weight of the fidelity term.
    pub mu: f64,
    pub surrogate: Surrogate,
    /// Fractional derivative order.
    pub alpha: f64,
    /// Fermi-Dirac temperature.
    pub kt: f64,
    /// Below this `|Tr(U_T†U)|` the fidelity gradient is taken as zero.
    pub grad_phase_epsilon: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            mu: 0.2,
            surrogate: Surrogate::Fractional,
            alpha: 0.99,
            kt: 0.01,
            grad_phase_epsilon: 1e-12,
        }
    }
}

impl ObjectiveConfig {
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_surrogate(mut self, surrogate: Surrogate) -> Self {
        self.surrogate = surrogate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidConfig(format!(
                "mu must lie in [0, 1], got {}",
                self.mu
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.kt > 0.0 && self.kt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kT must be positive, got {}",
                self.kt
            )));
        }
        if self.grad_phase_epsilon.is_nan() || self.grad_phase_epsilon < 0.0 {
            return Err(Error::InvalidConfig(
                "grad_phase_epsilon must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// `|Tr(U_T†·U)| / dim`
pub fn fidelity(target: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64> {
    if target.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: target.dim(),
            right: u.dim(),
        });
    }
    Ok(trace_overlap(target, u).norm() / u.dim() as f64)
}

/// `Tr(A†·B)` without forming the product.
pub fn trace_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.as_dmatrix()
        .iter()
        .zip(b.as_dmatrix().iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// `(Σ|hx| + Σ|hy|) / (2·n·b)`
pub fn penalty(seq: &ControlSequence) -> f64 {
    let total: f64 = seq.hx.iter().chain(&seq.hy).map(|h| h.abs()).sum();
    total / (2.0 * seq.n() as f64 * seq.bound)
}

pub fn surrogate_abs_derivative(x: f64, cfg: &ObjectiveConfig) -> f64 {
    match cfg.surrogate {
        Surrogate::Signum => sign(x),
        Surrogate::Fractional => sign(x) * x.abs().powf(1.0 - cfg.alpha) / gamma(2.0 - cfg.alpha),
        // 2·(1/2 − 1/(e^{x/kT} + 1)) in its overflow-free tanh form
        Surrogate::FermiDirac => (x / (2.0 * cfg.kt)).tanh(),
    }
}

/// Antiderivative of [`surrogate_abs_derivative`] vanishing at zero.
///
/// This is the smooth |x| whose exact derivative is the surrogate; it is the
/// function finite differences of the gradient are checked against.
pub fn surrogate_abs(x: f64, cfg: &ObjectiveConfig) -> f64 {
    let a = x.abs();
    match cfg.surrogate {
        Surrogate::Signum => a,
        Surrogate::Fractional => a.powf(2.0 - cfg.alpha) / gamma(3.0 - cfg.alpha),
        // 2kT·ln cosh(x / 2kT), written to avoid overflow
        Surrogate::FermiDirac => {
            a + 2.0 * cfg.kt * ((-a / cfg.kt).exp().ln_1p() - std::f64::consts::LN_2)
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Penalty with `|h|` replaced by [`surrogate_abs`].
pub fn smoothed_penalty(seq: &ControlSequence, cfg: &ObjectiveConfig) -> f64 {
    let total: f64 = seq
        .hx
        .iter()
        .chain(&seq.hy)
        .map(|&h| surrogate_abs(h, cfg))
        .sum();
    total / (2.0 * seq.n() as f64 * seq.bound)
}

pub fn combine(mu: f64, penalty: f64, fidelity: f64) -> f64 {
    (1.0 - mu) * penalty - mu * fidelity
}

pub fn functional_g(
    spec: &ChainSpec,
    seq: &ControlSequence,
    target: &TargetGate,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    Ok(ControlObjective::new(spec, target, seq, cfg)?
        .evaluate(seq)
        .g)
}

pub fn gradient_g(
    spec: &ChainSpec,
    seq: &ControlSequence,
    target: &TargetGate,
    cfg: &ObjectiveConfig,
) -> Result<Vec<f64>> {
    Ok(ControlObjective::new(spec, target, seq, cfg)?
        .gradient(seq)
        .1)
}

/// The `(G, F, P)` triple at one pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub g: f64,
    pub fidelity: f64,
    pub penalty: f64,
}

/// `G` for one chain/target pair, reusable across many pulse sequences with
/// the timing and bound of `template`.
#[derive(Debug, Clone)]
pub struct ControlObjective {
    ops: ChainOperators,
    target: ComplexMatrix,
    template: ControlSequence,
    cfg: ObjectiveConfig,
}

impl ControlObjective {
    pub fn new(
        spec: &ChainSpec,
        target: &TargetGate,
        template: &ControlSequence,
        cfg: &ObjectiveConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        template.validate()?;
        if target.n_qubits != spec.n_qubits {
            return Err(Error::DimensionMismatch {
                left: target.n_qubits,
                right: spec.n_qubits,
            });
        }
        Ok(Self {
            ops: ChainOperators::new(spec)?,
            target: target_unitary(target),
            template: template.clone(),
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &ObjectiveConfig {
        &self.cfg
    }

    pub fn operators(&self) -> &ChainOperators {
        &self.ops
    }

    pub fn template(&self) -> &ControlSequence {
        &self.template
    }

    pub fn sequence(&self, flat: &[f64]) -> ControlSequence {
        self.template.with_flat(flat)
    }

    pub fn evaluate(&self, seq: &ControlSequence) -> Evaluation {
        let u = self.ops.propagate(seq);
        let fidelity = trace_overlap(&self.target, &u).norm() / u.dim() as f64;
        let penalty = penalty(seq);
        Evaluation {
            g: combine(self.cfg.mu, penalty, fidelity),
            fidelity,
            penalty,
        }
    }

    /// Exact `∂F/∂h` for every pulse, laid out `[hx..., hy...]`, together with `F`.
    pub fn fidelity_gradient(&self, seq: &ControlSequence) -> (f64, Vec<f64>) {
        let n = seq.n();
        let dim = self.ops.dim();
        let dt = seq.dt;

        let mut eigen = Vec::with_capacity(n);
        let mut forward = Vec::with_capacity(n + 1);
        forward.push(ComplexMatrix::identity(dim));
        let mut slices = Vec::with_capacity(n);
        for (hx, hy) in seq.pulses() {
            let (values, vectors) = self.ops.slice_hamiltonian(hx, hy).eigh_unchecked();
            let phases: Vec<Complex64> = values
                .iter()
                .map(|&l| Complex64::from_polar(1.0, -dt * l))
                .collect();
            let u = reconstruct(&vectors, &phases);
            let next = &u * forward.last().expect("non-empty");
            forward.push(next);
            slices.push(u);
            eigen.push((values, vectors));
        }

        let target_dag = self.target.dagger();
        let z = (&target_dag * &forward[n]).trace();
        let fid = z.norm() / dim as f64;
        let mut grad = vec![0.0; 2 * n];
        if z.norm() < self.cfg.grad_phase_epsilon {
            return (fid, grad);
        }
        let scale = z.conj() / (z.norm() * dim as f64);

        // back = U_T† · U_n ··· U_{j+1}
        let mut back = target_dag;
        for j in (0..n).rev() {
            let (values, vectors) = &eigen[j];
            let v_dag = vectors.dagger();
            let b = &forward[j] * &back;
            let m = &(&v_dag * &b) * vectors;
            let xs = &(&v_dag * &self.ops.control_x) * vectors;
            let ys = &(&v_dag * &self.ops.control_y) * vectors;
            let phases: Vec<Complex64> = values
                .iter()
                .map(|&l| Complex64::from_polar(1.0, -dt * l))
                .collect();
            let (mut dzx, mut dzy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for k in 0..dim {
                for l in 0..dim {
                    let gap = values[k] - values[l];
                    let kernel = if (gap * dt).abs() > 1e-3 {
                        (phases[k] - phases[l]) / gap
                    } else {
                        expi_divided_difference(values[k], values[l], dt)
                    };
                    let w = m[(l, k)] * kernel;
                    dzx += w * xs[(k, l)];
                    dzy += w * ys[(k, l)];
                }
            }
            grad[j] = (scale * dzx).re;
            grad[n + j] = (scale * dzy).re;
            back = &back * &slices[j];
        }
        (fid, grad)
    }

    /// Returns the evaluation at `seq` and `∂G/∂h` with the configured surrogate.
    pub fn gradient(&self, seq: &ControlSequence) -> (Evaluation, Vec<f64>) {
        let mu = self.cfg.mu;
        let n = seq.n();
        let (fidelity, mut grad) = if mu > 0.0 {
            self.fidelity_gradient(seq)
        } else {
            (self.evaluate(seq).fidelity, vec![0.0; 2 * n])
        };
        let norm = 2.0 * n as f64 * seq.bound;
        for (g, h) in grad.iter_mut().zip(seq.hx.iter().chain(&seq.hy)) {
            *g = (1.0 - mu) * surrogate_abs_derivative(*h, &self.cfg) / norm - mu * *g;
        }
        let penalty = penalty(seq);
        let eval = Evaluation {
            g: combine(mu, penalty, fidelity),
            fidelity,
            penalty,
        };
        (eval, grad)
    }
}
