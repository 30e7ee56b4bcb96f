// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Reference implementations used as test oracles. Everything here is built
//! directly on nalgebra, without going through the library's own routines.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinctrl::ComplexMatrix;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sx() -> M {
    M::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sy() -> M {
    M::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sz() -> M {
    M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

/// Kronecker product by explicit index arithmetic.
pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    M::from_fn(ra * rb, ca * cb, |r, col| {
        a[(r / rb, col / cb)] * b[(r % rb, col % cb)]
    })
}

/// `ops[0] ⊗ ops[1] ⊗ …`
pub fn kron_all(ops: &[M]) -> M {
    ops.iter()
        .skip(1)
        .fold(ops[0].clone(), |acc, m| kron(&acc, m))
}

/// Tensor product with `op` placed on the listed sites (0-based) and
/// identities elsewhere.
pub fn on_sites(n: usize, placed: &[(usize, &M)]) -> M {
    let factors: Vec<M> = (0..n)
        .map(|s| {
            placed
                .iter()
                .find(|(site, _)| *site == s)
                .map(|(_, op)| (*op).clone())
                .unwrap_or_else(|| eye(2))
        })
        .collect();
    kron_all(&factors)
}

/// Heisenberg drift `J Σ σ⃗ⁱ·σ⃗ⁱ⁺¹` from explicit Kronecker terms.
pub fn drift(n: usize, j: f64) -> M {
    let mut h = M::zeros(1 << n, 1 << n);
    for i in 0..n.saturating_sub(1) {
        for p in [sx(), sy(), sz()] {
            h += on_sites(n, &[(i, &p), (i + 1, &p)]) * c(j, 0.0);
        }
    }
    h
}

pub fn control(n: usize, hx: f64, hy: f64) -> M {
    on_sites(n, &[(0, &sx())]) * c(hx, 0.0) + on_sites(n, &[(0, &sy())]) * c(hy, 0.0)
}

/// System plus one environment qubit, coupled to every chain site with
/// strength `gamma (|hx| + |hy|)`.
pub fn env_hamiltonian(n: usize, j: f64, gamma: f64, hx: f64, hy: f64) -> M {
    let mut h = kron(&(drift(n, j) + control(n, hx, hy)), &eye(2));
    let g = gamma * (hx.abs() + hy.abs());
    for i in 0..n {
        for p in [sx(), sy(), sz()] {
            h += on_sites(n + 1, &[(i, &p), (n, &p)]) * c(g, 0.0);
        }
    }
    h
}

/// `exp(−i t H)` by scaling and squaring of a Taylor series.
pub fn expm_taylor(h: &M, t: f64) -> M {
    let dim = h.nrows();
    let a = h * c(0.0, -t);
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil() as i32 + 4).max(0) as u32;
    let scaled = &a * c(0.5f64.powi(squarings as i32), 0.0);
    let mut term = eye(dim);
    let mut sum = eye(dim);
    for k in 1..=30 {
        term = &term * &scaled * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `U_n ⋯ U_1` with every slice exponentiated by the Taylor oracle.
pub fn propagate(n: usize, j: f64, hx: &[f64], hy: &[f64], dt: f64) -> M {
    hx.iter().zip(hy).fold(eye(1 << n), |u, (&x, &y)| {
        expm_taylor(&(drift(n, j) + control(n, x, y)), dt) * u
    })
}

pub fn propagate_env(n: usize, j: f64, gamma: f64, hx: &[f64], hy: &[f64], dt: f64) -> M {
    hx.iter().zip(hy).fold(eye(1 << (n + 1)), |u, (&x, &y)| {
        expm_taylor(&env_hamiltonian(n, j, gamma, x, y), dt) * u
    })
}

/// Traces out the last qubit by summing explicit blocks `(I ⊗ ⟨e|) m (I ⊗ |e⟩)`.
pub fn partial_trace_last(m: &M) -> M {
    let half = m.nrows() / 2;
    let mut out = M::zeros(half, half);
    for e in 0..2 {
        let mut ket = M::zeros(2, 1);
        ket[(e, 0)] = c(1.0, 0.0);
        let proj = kron(&eye(half), &ket);
        out += proj.adjoint() * m * &proj;
    }
    out
}

fn unit(n: usize, i: usize, j: usize) -> M {
    let mut m = M::zeros(n, n);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// `(1/n) Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|`
pub fn choi(n: usize, channel: impl Fn(&M) -> M) -> M {
    let mut out = M::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let e = unit(n, i, j);
            out += kron(&channel(&e), &e);
        }
    }
    out / c(n as f64, 0.0)
}

pub fn choi_unitary(u: &M) -> M {
    choi(u.nrows(), |rho| u * rho * u.adjoint())
}

/// Choi matrix of `ρ ↦ Tr_env[U (ρ ⊗ |0⟩⟨0|) U†]`.
pub fn choi_dilation(u_ext: &M) -> M {
    let n = u_ext.nrows() / 2;
    let env0 = unit(2, 0, 0);
    choi(n, |rho| {
        partial_trace_last(&(u_ext * kron(rho, &env0) * u_ext.adjoint()))
    })
}

/// Trace norm as the sum of singular values.
pub fn trace_norm_svd(m: &M) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> M {
    let a = M::from_fn(dim, dim, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> M {
    expm_taylor(&random_hermitian(dim, rng), 2.0)
}

pub fn random_density(dim: usize, rng: &mut impl Rng) -> M {
    let a = M::from_fn(dim, dim, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let p = &a * a.adjoint();
    let tr = p.trace();
    p / tr
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn to_lib(m: &M) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(m.clone())
}

pub fn from_lib(m: &ComplexMatrix) -> M {
    m.as_dmatrix().clone()
}

pub fn random_pulses(len: usize, amp: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-amp..amp)).collect()
}

/// `(1 − μ)·P̃ − μ·F` where `P̃` uses the antiderivative of the surrogate and
/// `F` comes from the Taylor propagator.
pub fn smoothed_g(
    n: usize,
    target: &spinctrl::TargetGate,
    seq: &spinctrl::ControlSequence,
    cfg: &spinctrl::ObjectiveConfig,
) -> f64 {
    let u = propagate(n, 1.0, &seq.hx, &seq.hy, seq.dt);
    let ut = from_lib(&spinctrl::model::target_unitary(target));
    let f = (ut.adjoint() * u).trace().norm() / (1 << n) as f64;
    (1.0 - cfg.mu) * spinctrl::objective::smoothed_penalty(seq, cfg) - cfg.mu * f
}

/// Central differences of [`smoothed_g`] with step `1e-6`.
pub fn finite_difference(
    n: usize,
    target: &spinctrl::TargetGate,
    seq: &spinctrl::ControlSequence,
    cfg: &spinctrl::ObjectiveConfig,
) -> Vec<f64> {
    let x = seq.to_flat();
    let h = 1e-6;
    (0..x.len())
        .map(|k| {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += h;
            minus[k] -= h;
            let gp = smoothed_g(n, target, &seq.with_flat(&plus), cfg);
            let gm = smoothed_g(n, target, &seq.with_flat(&minus), cfg);
            (gp - gm) / (2.0 * h)
        })
        .collect()
}

/// Largest relative error over coordinates with `|analytic| > 1e-8`.
pub fn worst_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .filter(|(a, _)| a.abs() > 1e-8)
        .map(|(a, b)| (a - b).abs() / a.abs())
        .fold(0.0, f64::max)
}
