// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use spinctrl::objective::{gradient_g, ControlObjective};
use spinctrl::{ChainSpec, ControlSequence, ObjectiveConfig, Surrogate, TargetGate};

fn assert_matches(analytic: &[f64], numeric: &[f64], label: &str) {
    for (k, (a, b)) in analytic.iter().zip(numeric).enumerate() {
        if a.abs() > 1e-8 {
            let rel = (a - b).abs() / a.abs();
            assert!(
                rel < 1e-5,
                "{label}: coordinate {k}: analytic {a}, numeric {b}, rel {rel}"
            );
        }
    }
}

#[test]
fn fermi_dirac_two_qubit_instance() {
    let mut r = rng(60);
    let seq = ControlSequence::new(
        random_pulses(4, 2.0, &mut r),
        random_pulses(4, 2.0, &mut r),
        0.2,
        10.0,
    )
    .unwrap();
    let cfg = ObjectiveConfig::default()
        .with_surrogate(Surrogate::FermiDirac)
        .with_mu(0.3);
    let target = TargetGate::swap(2);
    let analytic = gradient_g(&ChainSpec::new(2), &seq, &target, &cfg).unwrap();
    assert_matches(
        &analytic,
        &finite_difference(2, &target, &seq, &cfg),
        "fermi_dirac",
    );
}

#[test]
fn random_instances_match_finite_differences() {
    let mut r = rng(61);
    for case in 0..10 {
        let n = 1 + case % 3;
        let len = 2 + case % 7;
        let seq = ControlSequence::new(
            random_pulses(len, 3.0, &mut r),
            random_pulses(len, 3.0, &mut r),
            0.2,
            10.0,
        )
        .unwrap();
        let surrogate = if case % 2 == 0 {
            Surrogate::Fractional
        } else {
            Surrogate::FermiDirac
        };
        let cfg = ObjectiveConfig::default()
            .with_surrogate(surrogate)
            .with_mu(0.2 + 0.07 * case as f64);
        let target = if n >= 2 && case % 4 == 1 {
            TargetGate::swap(n)
        } else {
            TargetGate::not(n)
        };
        let analytic = gradient_g(&ChainSpec::new(n), &seq, &target, &cfg).unwrap();
        assert_matches(
            &analytic,
            &finite_difference(n, &target, &seq, &cfg),
            &format!("case {case}"),
        );
    }
}

#[test]
fn fermi_dirac_gradient_matches_true_functional_for_large_pulses() {
    // Away from zero the Fermi-Dirac surrogate equals sgn to machine precision.
    let mut r = rng(62);
    let pulses = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        random_pulses(6, 2.0, r)
            .into_iter()
            .map(|h| h + 1.5 * h.signum())
            .collect()
    };
    let seq = ControlSequence::new(pulses(&mut r), pulses(&mut r), 0.2, 10.0).unwrap();
    let cfg = ObjectiveConfig::default().with_surrogate(Surrogate::FermiDirac);
    let target = TargetGate::not(3);
    let objective = ControlObjective::new(&ChainSpec::new(3), &target, &seq, &cfg).unwrap();
    let (_, analytic) = objective.gradient(&seq);
    let x = seq.to_flat();
    let numeric: Vec<f64> = (0..x.len())
        .map(|k| {
            let (mut p, mut m) = (x.clone(), x.clone());
            p[k] += 1e-6;
            m[k] -= 1e-6;
            (objective.evaluate(&seq.with_flat(&p)).g - objective.evaluate(&seq.with_flat(&m)).g)
                / 2e-6
        })
        .collect();
    assert_matches(&analytic, &numeric, "true G");
}

#[test]
fn fidelity_gradient_vanishes_at_exact_gate() {
    let dt = 0.2;
    let seq = ControlSequence::new(vec![FRAC_PI_2 / dt], vec![0.0], dt, 10.0).unwrap();
    let objective = ControlObjective::new(
        &ChainSpec::new(1),
        &TargetGate::not(1),
        &seq,
        &ObjectiveConfig::default(),
    )
    .unwrap();
    let (f, grad) = objective.fidelity_gradient(&seq);
    assert!((f - 1.0).abs() < 1e-12);
    for g in &grad {
        assert!(g.abs() < 1e-7, "{grad:?}");
    }
    // The finite-difference oracle agrees that F is stationary.
    let plus = seq.with_flat(&[seq.hx[0] + 1e-5, 0.0]);
    let minus = seq.with_flat(&[seq.hx[0] - 1e-5, 0.0]);
    let fd = (objective.evaluate(&plus).fidelity - objective.evaluate(&minus).fidelity) / 2e-5;
    assert!(fd.abs() < 1e-7);
}
