// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Box-constrained BFGS with a strong-Wolfe line search, and the multi-restart
//! pulse optimization driver built on it.
//!
//! Bounds are `|x_i| ≤ b` for every coordinate. The search direction is cut
//! back so that a step never leaves the box: coordinates pinned at a bound
//! with the gradient pushing outward are frozen, and the step length is capped
//! at the first bound crossing. Any step that lands on a bound, or that fails
//! the curvature test `sᵀy > 1e-12`, resets the inverse Hessian to identity.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChainSpec, ControlSequence, TargetGate};
use crate::objective::{ControlObjective, Evaluation, ObjectiveConfig};

const CURVATURE_EPS: f64 = 1e-12;
const MAX_BISECTIONS: usize = 50;
const MAX_EXPANSIONS: usize = 60;

/// A differentiable scalar function of a real vector.
pub trait Objective {
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.value_and_gradient(x).0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }
}

/// Adapts a pair of closures to [`Objective`].
pub struct FnObjective<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        ((self.value)(x), (self.gradient)(x))
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop once the projected gradient's infinity norm is at or below this.
    pub grad_tol: f64,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub restarts: usize,
    /// Initial pulses are drawn uniformly from `[-init_amplitude, init_amplitude]`.
    pub init_amplitude: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-6,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            restarts: 8,
            init_amplitude: 0.5,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "Wolfe constants must satisfy 0 < c1 < c2 < 1, got c1={} c2={}",
                self.wolfe_c1, self.wolfe_c2
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.grad_tol.is_nan() || self.grad_tol < 0.0 {
            return Err(Error::InvalidConfig("grad_tol must be non-negative".into()));
        }
        if !(self.init_amplitude >= 0.0 && self.init_amplitude.is_finite()) {
            return Err(Error::InvalidConfig(
                "init_amplitude must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Objective value at the start point and after every accepted step.
    pub values: Vec<f64>,
    /// `resets[k]` is true when the inverse Hessian was reset after step `k`.
    pub resets: Vec<bool>,
    pub termination: Termination,
}

struct Box {
    bound: f64,
}

impl Box {
    fn clamp(&self, x: &mut [f64]) {
        for v in x {
            *v = v.clamp(-self.bound, self.bound);
        }
    }

    fn at_upper(&self, v: f64) -> bool {
        v >= self.bound
    }

    fn at_lower(&self, v: f64) -> bool {
        v <= -self.bound
    }

    /// Zeroes components of `d` that would push a pinned coordinate out of the box.
    fn restrict(&self, x: &[f64], d: &mut [f64]) {
        for (xi, di) in x.iter().zip(d.iter_mut()) {
            if (self.at_upper(*xi) && *di > 0.0) || (self.at_lower(*xi) && *di < 0.0) {
                *di = 0.0;
            }
        }
    }

    fn max_step(&self, x: &[f64], d: &[f64]) -> f64 {
        x.iter()
            .zip(d)
            .filter(|(_, &di)| di != 0.0)
            .map(|(&xi, &di)| {
                if di > 0.0 {
                    (self.bound - xi) / di
                } else {
                    (-self.bound - xi) / di
                }
            })
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    fn projected_gradient(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(g)
            .map(|(&xi, &gi)| {
                if (self.at_upper(xi) && gi < 0.0) || (self.at_lower(xi) && gi > 0.0) {
                    0.0
                } else {
                    gi
                }
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
}

/// Dense symmetric inverse-Hessian approximation.
struct InverseHessian {
    n: usize,
    data: Vec<f64>,
    identity: bool,
}

impl InverseHessian {
    fn identity(n: usize) -> Self {
        let mut h = Self {
            n,
            data: vec![0.0; n * n],
            identity: true,
        };
        h.reset(1.0);
        h
    }

    fn reset(&mut self, scale: f64) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            self.data[i * self.n + i] = scale;
        }
        self.identity = true;
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| dot(row, g))
            .collect()
    }

    /// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`
    fn update(&mut self, s: &[f64], y: &[f64], sy: f64) {
        let n = self.n;
        if self.identity {
            // Rescale the identity so the first step has the right length.
            let yy = dot(y, y);
            self.reset(sy / yy);
        }
        let rho = 1.0 / sy;
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        let coef = (1.0 + rho * yhy) * rho;
        for i in 0..n {
            for j in 0..n {
                self.data[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
            }
        }
        self.identity = false;
    }
}

struct LineSearchPoint {
    alpha: f64,
    x: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
}

struct LineSearch<'a, O: Objective> {
    objective: &'a O,
    bounds: &'a Box,
    x: &'a [f64],
    d: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
}

impl<O: Objective> LineSearch<'_, O> {
    fn eval(&self, alpha: f64) -> LineSearchPoint {
        let mut x: Vec<f64> = self
            .x
            .iter()
            .zip(self.d)
            .map(|(xi, di)| xi + alpha * di)
            .collect();
        self.bounds.clamp(&mut x);
        let (value, gradient) = self.objective.value_and_gradient(&x);
        LineSearchPoint {
            alpha,
            x,
            value,
            gradient,
        }
    }

    fn armijo(&self, p: &LineSearchPoint) -> bool {
        p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &LineSearchPoint) -> bool {
        dot(&p.gradient, self.d).abs() <= -self.c2 * self.slope0
    }

    /// Bracketing phase; the trial step doubles until a bracket is found or
    /// the box edge is reached.
    fn run(&self, alpha_max: f64) -> Option<LineSearchPoint> {
        if alpha_max <= 0.0 {
            return None;
        }
        let mut prev: Option<LineSearchPoint> = None;
        let mut alpha = alpha_max.min(1.0);
        for _ in 0..MAX_EXPANSIONS {
            let p = self.eval(alpha);
            if !p.value.is_finite() {
                return self.zoom(prev, p.alpha);
            }
            let worse_than_prev = prev.as_ref().is_some_and(|q| p.value >= q.value);
            if !self.armijo(&p) || worse_than_prev {
                return self.zoom(prev, p.alpha);
            }
            if self.curvature(&p) {
                return Some(p);
            }
            if dot(&p.gradient, self.d) >= 0.0 {
                let hi = prev.as_ref().map_or(0.0, |q| q.alpha);
                return self.zoom(Some(p), hi);
            }
            if alpha >= alpha_max {
                return Some(p);
            }
            alpha = (2.0 * alpha).min(alpha_max);
            prev = Some(p);
        }
        prev
    }

    /// Bisection between `lo` (an accepted point, or the origin when `None`)
    /// and `hi`. Falls back to `lo` when the curvature test never passes.
    fn zoom(&self, mut lo: Option<LineSearchPoint>, mut hi: f64) -> Option<LineSearchPoint> {
        for _ in 0..MAX_BISECTIONS {
            let lo_alpha = lo.as_ref().map_or(0.0, |p| p.alpha);
            let lo_value = lo.as_ref().map_or(self.f0, |p| p.value);
            let alpha = 0.5 * (lo_alpha + hi);
            if alpha == lo_alpha || alpha == hi {
                break;
            }
            let p = self.eval(alpha);
            if !self.armijo(&p) || p.value >= lo_value || !p.value.is_finite() {
                hi = alpha;
                continue;
            }
            if self.curvature(&p) {
                return Some(p);
            }
            if dot(&p.gradient, self.d) * (hi - lo_alpha) >= 0.0 {
                hi = lo_alpha;
            }
            lo = Some(p);
        }
        lo
    }
}

/// Minimizes `objective` over the box `|x_i| ≤ bound`.
pub fn bfgs_minimize<O: Objective>(
    objective: &O,
    x0: &[f64],
    bound: f64,
    cfg: &OptimizerConfig,
) -> Result<BfgsOutcome> {
    bfgs_minimize_observed(objective, x0, bound, cfg, |_, _| {})
}

/// [`bfgs_minimize`], calling `observer(x, f)` at the start point and after
/// every accepted step.
pub fn bfgs_minimize_observed<O: Objective>(
    objective: &O,
    x0: &[f64],
    bound: f64,
    cfg: &OptimizerConfig,
    mut observer: impl FnMut(&[f64], f64),
) -> Result<BfgsOutcome> {
    cfg.validate()?;
    if bound.is_nan() || bound <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "box bound must be positive, got {bound}"
        )));
    }
    let bounds = Box { bound };
    let mut x = x0.to_vec();
    bounds.clamp(&mut x);
    let (mut f, mut g) = objective.value_and_gradient(&x);
    let mut hess = InverseHessian::identity(x.len());
    let mut values = vec![f];
    let mut resets = Vec::new();
    observer(&x, f);

    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        if inf_norm(&bounds.projected_gradient(&x, &g)) <= cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let mut d: Vec<f64> = hess.apply(&g).into_iter().map(|v| -v).collect();
        bounds.restrict(&x, &mut d);
        let slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            hess.reset(1.0);
            d = g.iter().map(|v| -v).collect();
            bounds.restrict(&x, &mut d);
        }
        let search = LineSearch {
            objective,
            bounds: &bounds,
            x: &x,
            d: &d,
            f0: f,
            slope0: dot(&g, &d),
            c1: cfg.wolfe_c1,
            c2: cfg.wolfe_c2,
        };
        let alpha_max = bounds.max_step(&x, &d);
        let Some(step) = search.run(alpha_max) else {
            if hess.identity {
                termination = Termination::LineSearchFailed;
                break;
            }
            // Retry once along steepest descent before giving up.
            hess.reset(1.0);
            continue;
        };
        iterations += 1;

        let hit_bound =
            step.alpha >= alpha_max
                || step.x.iter().zip(&x).any(|(new, old)| {
                    (bounds.at_upper(*new) || bounds.at_lower(*new)) && new != old
                });
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.gradient.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let reset = hit_bound || sy <= CURVATURE_EPS;
        if reset {
            hess.reset(1.0);
        } else {
            hess.update(&s, &y, sy);
        }
        x = step.x;
        f = step.value;
        g = step.gradient;
        values.push(f);
        resets.push(reset);
        observer(&x, f);
    }

    Ok(BfgsOutcome {
        x,
        value: f,
        iterations,
        values,
        resets,
        termination,
    })
}

impl Objective for ControlObjective {
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (eval, grad) = self.gradient(&self.sequence(x));
        (eval.g, grad)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(&self.sequence(x)).g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_seq: ControlSequence,
    pub fidelity: f64,
    pub penalty: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub iterations_used: usize,
    pub restart_index: usize,
    pub seed: u64,
    pub termination: Termination,
    /// `(G, F, P)` at the start point and after each accepted step of the
    /// winning restart.
    pub trace: Vec<Evaluation>,
}

/// Seeds the RNG for one restart; each restart gets its own ChaCha stream.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

pub fn initial_pulses(seed: u64, restart: usize, len: usize, amplitude: f64) -> Vec<f64> {
    let mut rng = restart_rng(seed, restart);
    (0..len)
        .map(|_| {
            if amplitude > 0.0 {
                rng.gen_range(-amplitude..=amplitude)
            } else {
                0.0
            }
        })
        .collect()
}

/// Remembers the `(G, F, P)` of every point evaluated since the last accepted
/// step, so the trace needs no extra propagation.
struct Recording<'a> {
    inner: &'a ControlObjective,
    seen: RefCell<Vec<(Vec<f64>, Evaluation)>>,
}

impl Objective for Recording<'_> {
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (eval, grad) = self.inner.gradient(&self.inner.sequence(x));
        self.seen.borrow_mut().push((x.to_vec(), eval));
        (eval.g, grad)
    }
}

impl Recording<'_> {
    fn take(&self, x: &[f64]) -> Evaluation {
        let mut seen = self.seen.borrow_mut();
        let found = seen.iter().find(|(p, _)| p == x).map(|(_, e)| *e);
        seen.clear();
        found.unwrap_or_else(|| self.inner.evaluate(&self.inner.sequence(x)))
    }
}

fn single_restart(
    objective: &ControlObjective,
    opt: &OptimizerConfig,
    restart: usize,
) -> Result<OptimizationResult> {
    let template = objective.template();
    let x0 = initial_pulses(opt.seed, restart, 2 * template.n(), opt.init_amplitude);
    let recording = Recording {
        inner: objective,
        seen: RefCell::new(Vec::new()),
    };
    let mut trace = Vec::new();
    let outcome = bfgs_minimize_observed(&recording, &x0, template.bound, opt, |x, _| {
        trace.push(recording.take(x));
    })?;
    let best_seq = objective.sequence(&outcome.x);
    let eval = objective.evaluate(&best_seq);
    Ok(OptimizationResult {
        best_seq,
        fidelity: eval.fidelity,
        penalty: eval.penalty,
        g: eval.g,
        iterations_used: outcome.iterations,
        restart_index: restart,
        seed: opt.seed,
        termination: outcome.termination,
        trace,
    })
}

/// Runs `opt.restarts` independent BFGS runs and keeps the lowest final `G`
/// (ties go to the lower restart index).
pub fn optimize_controls(
    spec: &ChainSpec,
    target: &TargetGate,
    template: &ControlSequence,
    obj: &ObjectiveConfig,
    opt: &OptimizerConfig,
) -> Result<OptimizationResult> {
    opt.validate()?;
    if opt.init_amplitude > template.bound {
        return Err(Error::InvalidConfig(format!(
            "init_amplitude {} exceeds the pulse bound {}",
            opt.init_amplitude, template.bound
        )));
    }
    let objective = ControlObjective::new(spec, target, template, obj)?;
    let runs: Vec<OptimizationResult> = (0..opt.restarts)
        .into_par_iter()
        .map(|r| single_restart(&objective, opt, r))
        .collect::<Result<_>>()?;
    Ok(runs
        .into_iter()
        .reduce(|best, next| if next.g < best.g { next } else { best })
        .expect("at least one restart"))
}
