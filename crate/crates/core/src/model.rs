// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Heisenberg chain with Zeeman control on the first spin.
//!
//! Qubit 1 is the leftmost tensor factor (most significant bit of a basis
//! index). The optional environment qubit is appended after qubit N. Slice 1
//! acts first, so a sequence propagates to `U = U_n ··· U_2 · U_1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    embed_single_site, expm_hermitian_times_minus_i, kron, pauli, Axis, ComplexMatrix, ONE, ZERO,
};

pub const DEFAULT_GAMMA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_qubits: usize,
    pub coupling: f64,
    pub env_enabled: bool,
    pub gamma: f64,
}

impl ChainSpec {
    /// Chain with `J = 1` and no environment qubit.
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            coupling: 1.0,
            env_enabled: false,
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn with_environment(mut self, gamma: f64) -> Self {
        self.env_enabled = true;
        self.gamma = gamma;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidConfig(
                "chain needs at least one qubit".into(),
            ));
        }
        if self.n_qubits > 10 {
            return Err(Error::InvalidConfig(format!(
                "{} qubits is beyond dense simulation range",
                self.n_qubits
            )));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "coupling J must be positive, got {}",
                self.coupling
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Piecewise-constant pulse pairs `(hx[i], hy[i])`, each held for `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence {
    pub dt: f64,
    pub bound: f64,
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
}

impl ControlSequence {
    pub fn new(hx: Vec<f64>, hy: Vec<f64>, dt: f64, bound: f64) -> Result<Self> {
        let seq = Self { dt, bound, hx, hy };
        seq.validate()?;
        Ok(seq)
    }

    pub fn zeros(n: usize, dt: f64, bound: f64) -> Result<Self> {
        Self::new(vec![0.0; n], vec![0.0; n], dt, bound)
    }

    /// Builds a sequence from the flat layout `[hx..., hy...]`.
    pub fn from_flat(flat: &[f64], dt: f64, bound: f64) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::InvalidConfig(
                "flat pulse vector must have even length".into(),
            ));
        }
        let n = flat.len() / 2;
        Self::new(flat[..n].to_vec(), flat[n..].to_vec(), dt, bound)
    }

    pub fn n(&self) -> usize {
        self.hx.len()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n() as f64
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.hx.iter().chain(&self.hy).copied().collect()
    }

    /// Same timing and bound, pulses taken from `[hx..., hy...]`.
    pub fn with_flat(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), 2 * self.n());
        let n = self.n();
        Self {
            dt: self.dt,
            bound: self.bound,
            hx: flat[..n].to_vec(),
            hy: flat[n..].to_vec(),
        }
    }

    pub fn pulses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.hx.iter().copied().zip(self.hy.iter().copied())
    }

    pub fn validate(&self) -> Result<()> {
        if self.hx.is_empty() {
            return Err(Error::InvalidConfig("need at least one pulse".into()));
        }
        if self.hx.len() != self.hy.len() {
            return Err(Error::InvalidConfig(format!(
                "hx has {} pulses but hy has {}",
                self.hx.len(),
                self.hy.len()
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bound must be positive, got {}",
                self.bound
            )));
        }
        if let Some(h) = self
            .hx
            .iter()
            .chain(&self.hy)
            .find(|h| h.is_nan() || h.abs() > self.bound)
        {
            return Err(Error::InvalidConfig(format!(
                "pulse amplitude {h} exceeds bound {}",
                self.bound
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Not,
    Swap,
}

/// `NOT_N` flips the last qubit; `SWAP_N` exchanges the last two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetGate {
    pub kind: GateKind,
    pub n_qubits: usize,
}

impl TargetGate {
    pub fn new(kind: GateKind, n_qubits: usize) -> Result<Self> {
        let min = match kind {
            GateKind::Not => 1,
            GateKind::Swap => 2,
        };
        if n_qubits < min {
            return Err(Error::InvalidConfig(format!(
                "{kind:?} needs at least {min} qubits"
            )));
        }
        Ok(Self { kind, n_qubits })
    }

    pub fn not(n_qubits: usize) -> Self {
        Self::new(GateKind::Not, n_qubits).expect("NOT needs at least one qubit")
    }

    pub fn swap(n_qubits: usize) -> Self {
        Self::new(GateKind::Swap, n_qubits).expect("SWAP needs at least two qubits")
    }
}

impl fmt::Display for TargetGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::Not => write!(f, "not{}", self.n_qubits),
            GateKind::Swap => write!(f, "swap{}", self.n_qubits),
        }
    }
}

impl FromStr for TargetGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let (kind, digits) = if let Some(rest) = lower.strip_prefix("not") {
            (GateKind::Not, rest)
        } else if let Some(rest) = lower.strip_prefix("swap") {
            (GateKind::Swap, rest)
        } else {
            return Err(Error::InvalidConfig(format!("unknown target {s:?}")));
        };
        let n = digits
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("target {s:?} lacks a qubit count")))?;
        if n > 10 {
            return Err(Error::InvalidConfig(format!("target {s:?} is too large")));
        }
        Self::new(kind, n)
    }
}

/// Computational basis state written as a bit string, qubit 1 first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState(Vec<bool>);

impl BasisState {
    pub fn parse(label: &str, n_qubits: usize) -> Result<Self> {
        let invalid = || Error::InvalidBasisLabel {
            label: label.to_string(),
            n_qubits,
        };
        if label.len() != n_qubits {
            return Err(invalid());
        }
        label
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(invalid()),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &bit| (acc << 1) | bit as usize)
    }

    pub fn to_vector(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; 1 << self.n_qubits()];
        v[self.index()] = ONE;
        v
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0
            .iter()
            .try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

fn heisenberg_bond(i: usize, j: usize, n_sites: usize) -> ComplexMatrix {
    Axis::ALL
        .iter()
        .map(|&axis| {
            let s = pauli(axis);
            let a = embed_single_site(&s, i, n_sites).expect("site in range");
            let b = embed_single_site(&s, j, n_sites).expect("site in range");
            &a * &b
        })
        .fold(ComplexMatrix::zeros(1 << n_sites), |acc, term| &acc + &term)
}

/// `J·Σ_{i<N} σ⃗^i·σ⃗^{i+1}`; the zero matrix for a single spin.
pub fn drift_hamiltonian(spec: &ChainSpec) -> ComplexMatrix {
    let n = spec.n_qubits;
    (1..n)
        .map(|i| heisenberg_bond(i, i + 1, n))
        .fold(ComplexMatrix::zeros(1 << n), |acc, term| &acc + &term)
        .scale_real(spec.coupling)
}

/// `hx·σx^1 + hy·σy^1` on an `n_qubits` chain.
pub fn control_hamiltonian(hx: f64, hy: f64, n_qubits: usize) -> ComplexMatrix {
    let x = embed_single_site(&pauli(Axis::X), 1, n_qubits).expect("site 1 exists");
    let y = embed_single_site(&pauli(Axis::Y), 1, n_qubits).expect("site 1 exists");
    &x.scale_real(hx) + &y.scale_real(hy)
}

/// Precomputed operators for repeated propagation of one chain.
#[derive(Debug, Clone)]
pub struct ChainOperators {
    pub drift: ComplexMatrix,
    pub control_x: ComplexMatrix,
    pub control_y: ComplexMatrix,
    env: Option<EnvOperators>,
}

#[derive(Debug, Clone)]
struct EnvOperators {
    drift: ComplexMatrix,
    control_x: ComplexMatrix,
    control_y: ComplexMatrix,
    /// `Σ_{i≤N} σ⃗^i·σ⃗^{N+1}`
    coupling: ComplexMatrix,
    gamma: f64,
}

impl ChainOperators {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_qubits;
        let drift = drift_hamiltonian(spec);
        let control_x = embed_single_site(&pauli(Axis::X), 1, n)?;
        let control_y = embed_single_site(&pauli(Axis::Y), 1, n)?;
        let env = spec.env_enabled.then(|| {
            let id2 = ComplexMatrix::identity(2);
            let coupling = (1..=n)
                .map(|i| heisenberg_bond(i, n + 1, n + 1))
                .fold(ComplexMatrix::zeros(1 << (n + 1)), |acc, term| &acc + &term);
            EnvOperators {
                drift: kron(&drift, &id2),
                control_x: kron(&control_x, &id2),
                control_y: kron(&control_y, &id2),
                coupling,
                gamma: spec.gamma,
            }
        });
        Ok(Self {
            drift,
            control_x,
            control_y,
            env,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn slice_hamiltonian(&self, hx: f64, hy: f64) -> ComplexMatrix {
        &(&self.drift + &self.control_x.scale_real(hx)) + &self.control_y.scale_real(hy)
    }

    pub fn env_slice_hamiltonian(&self, hx: f64, hy: f64) -> Result<ComplexMatrix> {
        let env = self.env.as_ref().ok_or(Error::EnvironmentDisabled)?;
        let h = &(&env.drift + &env.control_x.scale_real(hx)) + &env.control_y.scale_real(hy);
        Ok(&h + &env.coupling.scale_real(env.gamma * (hx.abs() + hy.abs())))
    }

    /// Propagator of each slice, in time order.
    pub fn slice_propagators(&self, seq: &ControlSequence) -> Vec<ComplexMatrix> {
        seq.pulses()
            .map(|(hx, hy)| {
                expm_hermitian_times_minus_i(&self.slice_hamiltonian(hx, hy), seq.dt)
                    .expect("slice Hamiltonian is Hermitian by construction")
            })
            .collect()
    }

    pub fn propagate(&self, seq: &ControlSequence) -> ComplexMatrix {
        self.slice_propagators(seq)
            .iter()
            .fold(ComplexMatrix::identity(self.dim()), |acc, u| u * &acc)
    }

    pub fn propagate_with_env(&self, seq: &ControlSequence) -> Result<ComplexMatrix> {
        let dim = self
            .env
            .as_ref()
            .ok_or(Error::EnvironmentDisabled)?
            .drift
            .dim();
        seq.pulses()
            .try_fold(ComplexMatrix::identity(dim), |acc, (hx, hy)| {
                let u = expm_hermitian_times_minus_i(&self.env_slice_hamiltonian(hx, hy)?, seq.dt)?;
                Ok(&u * &acc)
            })
    }
}

/// Full Hamiltonian with the environment qubit appended as site N+1.
pub fn env_hamiltonian(spec: &ChainSpec, hx: f64, hy: f64) -> Result<ComplexMatrix> {
    if !spec.env_enabled {
        return Err(Error::EnvironmentDisabled);
    }
    ChainOperators::new(spec)?.env_slice_hamiltonian(hx, hy)
}

pub fn propagate(spec: &ChainSpec, seq: &ControlSequence) -> Result<ComplexMatrix> {
    seq.validate()?;
    Ok(ChainOperators::new(spec)?.propagate(seq))
}

pub fn propagate_with_env(spec: &ChainSpec, seq: &ControlSequence) -> Result<ComplexMatrix> {
    if !spec.env_enabled {
        return Err(Error::EnvironmentDisabled);
    }
    seq.validate()?;
    ChainOperators::new(spec)?.propagate_with_env(seq)
}

pub fn target_unitary(target: &TargetGate) -> ComplexMatrix {
    let n = target.n_qubits;
    match target.kind {
        GateKind::Not => kron(&ComplexMatrix::identity(1 << (n - 1)), &pauli(Axis::X)),
        GateKind::Swap => {
            let swap = ComplexMatrix::from_real_rows(&[
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ]);
            kron(&ComplexMatrix::identity(1 << (n - 2)), &swap)
        }
    }
}

/// Per-qubit Bloch vectors sampled at every slice boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectories {
    /// `n + 1` sample times, starting at 0.
    pub times: Vec<f64>,
    /// `bloch[j][q]` is qubit `q + 1` at `times[j]`.
    pub bloch: Vec<Vec<[f64; 3]>>,
    /// Norm of the global state at each sample.
    pub state_norms: Vec<f64>,
}

impl BlochTrajectories {
    pub fn final_vectors(&self) -> &[[f64; 3]] {
        self.bloch.last().expect("at least the initial sample")
    }
}

/// Bloch vector of qubit `q` (1-based) of a pure `n_qubits` state.
pub fn reduced_bloch_vector(state: &[Complex64], q: usize, n_qubits: usize) -> [f64; 3] {
    let mask = 1usize << (n_qubits - q);
    let (mut p0, mut p1, mut coherence) = (0.0, 0.0, ZERO);
    for (idx, amp) in state.iter().enumerate() {
        if idx & mask == 0 {
            p0 += amp.norm_sqr();
            coherence += amp * state[idx | mask].conj();
        } else {
            p1 += amp.norm_sqr();
        }
    }
    [2.0 * coherence.re, -2.0 * coherence.im, p0 - p1]
}

pub fn bloch_trajectories(
    spec: &ChainSpec,
    seq: &ControlSequence,
    initial: &BasisState,
) -> Result<BlochTrajectories> {
    seq.validate()?;
    let n = spec.n_qubits;
    if initial.n_qubits() != n {
        return Err(Error::InvalidBasisLabel {
            label: initial.to_string(),
            n_qubits: n,
        });
    }
    let ops = ChainOperators::new(spec)?;
    let mut state = initial.to_vector();
    let sample = |state: &[Complex64]| -> (Vec<[f64; 3]>, f64) {
        let norm = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (
            (1..=n).map(|q| reduced_bloch_vector(state, q, n)).collect(),
            norm,
        )
    };
    let mut out = BlochTrajectories {
        times: Vec::with_capacity(seq.n() + 1),
        bloch: Vec::with_capacity(seq.n() + 1),
        state_norms: Vec::with_capacity(seq.n() + 1),
    };
    let (b, norm) = sample(&state);
    out.times.push(0.0);
    out.bloch.push(b);
    out.state_norms.push(norm);
    for (j, u) in ops.slice_propagators(seq).iter().enumerate() {
        state = u.apply(&state);
        let (b, norm) = sample(&state);
        out.times.push((j + 1) as f64 * seq.dt);
        out.bloch.push(b);
        out.state_norms.push(norm);
    }
    Ok(out)
}
