// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use proptest::prelude::*;
use spinctrl::channels::{choi_of_env_channel, choi_of_unitary, CHOI_TOL};
use spinctrl::linalg::{
    expm_hermitian_times_minus_i, kron as lib_kron, partial_trace_last_qubit, trace_norm,
};
use spinctrl::model::{propagate as lib_propagate, target_unitary};
use spinctrl::objective::{fidelity, penalty, surrogate_abs_derivative};
use spinctrl::optimizer::{bfgs_minimize, optimize_controls, Objective};
use spinctrl::{
    ChainSpec, ComplexMatrix, ControlSequence, ObjectiveConfig, OptimizerConfig, Surrogate,
    TargetGate,
};

fn hermitian(dim: usize, seed: u64) -> M {
    random_hermitian(dim, &mut rng(seed))
}

fn int_matrix(vals: &[i8], dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |r, cc| {
        c(
            vals[r * dim + cc] as f64,
            vals[(r * dim + cc + 1) % vals.len()] as f64,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expm_is_unitary(exp in 1usize..=5, seed in any::<u64>(), t in -3.0f64..3.0) {
        let h = to_lib(&hermitian(1 << exp, seed));
        let u = expm_hermitian_times_minus_i(&h, t).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-9);
    }

    #[test]
    fn kron_is_associative(a in prop::collection::vec(-4i8..4, 4), b in prop::collection::vec(-4i8..4, 4),
                           d in prop::collection::vec(-4i8..4, 4)) {
        let (a, b, d) = (int_matrix(&a, 2), int_matrix(&b, 2), int_matrix(&d, 2));
        prop_assert_eq!(lib_kron(&lib_kron(&a, &b), &d), lib_kron(&a, &lib_kron(&b, &d)));
    }

    #[test]
    fn partial_trace_is_linear(seed in any::<u64>(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let mut r = rng(seed);
        let a = random_hermitian(8, &mut r) + random_unitary(8, &mut r);
        let b = random_hermitian(8, &mut r);
        let combo = &a * c(x, 0.5) + &b * c(y, 0.0);
        let lhs = partial_trace_last_qubit(&to_lib(&combo)).unwrap();
        let pa = from_lib(&partial_trace_last_qubit(&to_lib(&a)).unwrap());
        let pb = from_lib(&partial_trace_last_qubit(&to_lib(&b)).unwrap());
        prop_assert!(max_diff(&from_lib(&lhs), &(pa * c(x, 0.5) + pb * c(y, 0.0))) < 1e-12);
    }

    #[test]
    fn trace_norm_is_a_norm(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_hermitian(4, &mut r);
        let b = random_hermitian(4, &mut r);
        let d = random_hermitian(4, &mut r);
        let n = |m: &M| trace_norm(&to_lib(m)).unwrap();
        prop_assert!(n(&a) >= 0.0);
        prop_assert!(n(&M::zeros(4, 4)).abs() < 1e-12);
        prop_assert!(n(&(&a + &b + &d)) <= n(&a) + n(&b) + n(&d) + 1e-12);
        prop_assert!(n(&(&a + &b)) <= n(&a) + n(&b) + 1e-12);
    }

    #[test]
    fn fidelity_is_bounded_and_symmetric(seed in any::<u64>(), exp in 1usize..=4) {
        let mut r = rng(seed);
        let u = to_lib(&random_unitary(1 << exp, &mut r));
        let v = to_lib(&random_unitary(1 << exp, &mut r));
        let f = fidelity(&u, &v).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - fidelity(&v, &u).unwrap()).abs() < 1e-12);
        let phased = u.scale(c(seed as f64 % 7.0, 0.0).exp() / c(seed as f64 % 7.0, 0.0).exp().norm() * c(0.0, 1.0));
        prop_assert!((fidelity(&u, &phased).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_is_absolutely_homogeneous(seed in any::<u64>(), scale in -1.0f64..1.0) {
        let mut r = rng(seed);
        let hx = random_pulses(8, 5.0, &mut r);
        let hy = random_pulses(8, 5.0, &mut r);
        let seq = ControlSequence::new(hx.clone(), hy.clone(), 0.2, 10.0).unwrap();
        let scaled = ControlSequence::new(
            hx.iter().map(|h| h * scale).collect(),
            hy.iter().map(|h| h * scale).collect(),
            0.2,
            10.0,
        ).unwrap();
        let p = penalty(&seq);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((penalty(&scaled) - scale.abs() * p).abs() < 1e-14);
    }

    #[test]
    fn surrogates_are_odd_and_bounded(x in -1.0f64..=1.0) {
        for s in [Surrogate::Signum, Surrogate::Fractional, Surrogate::FermiDirac] {
            let cfg = ObjectiveConfig::default().with_surrogate(s);
            let f = surrogate_abs_derivative(x, &cfg);
            prop_assert_eq!(f, -surrogate_abs_derivative(-x, &cfg));
            if s == Surrogate::Fractional {
                // |x|^(1−α)/Γ(2−α) grows monotonically up to its value at |x| = 1.
                let edge = surrogate_abs_derivative(1.0, &cfg);
                prop_assert!(f.abs() <= edge);
                prop_assert!(surrogate_abs_derivative(x.abs() * 0.5, &cfg) <= f.abs());
            } else {
                prop_assert!((-1.0..=1.0).contains(&f));
            }
        }
    }

    #[test]
    fn fermi_dirac_approaches_signum(x in 0.1f64..50.0, negative in any::<bool>()) {
        let x = if negative { -x } else { x };
        let sig = surrogate_abs_derivative(x, &ObjectiveConfig::default().with_surrogate(Surrogate::Signum));
        let fd = surrogate_abs_derivative(x, &ObjectiveConfig::default().with_surrogate(Surrogate::FermiDirac));
        prop_assert!((sig - fd).abs() < 0.01);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn propagators_are_unitary(n in 1usize..=4, len in 1usize..=64, seed in any::<u64>()) {
        let mut r = rng(seed);
        let seq = ControlSequence::new(random_pulses(len, 10.0, &mut r), random_pulses(len, 10.0, &mut r), 0.2, 10.0)
            .unwrap();
        let u = lib_propagate(&ChainSpec::new(n), &seq).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-8);
    }

    #[test]
    fn choi_matrices_are_states(n in 1usize..=3, len in 1usize..=16, seed in any::<u64>(), gamma in 0.0f64..0.5) {
        let mut r = rng(seed);
        let seq = ControlSequence::new(random_pulses(len, 5.0, &mut r), random_pulses(len, 5.0, &mut r), 0.2, 10.0)
            .unwrap();
        let spec = ChainSpec::new(n).with_environment(gamma);
        prop_assert!(choi_of_unitary(&lib_propagate(&spec, &seq).unwrap()).unwrap().is_valid_state(CHOI_TOL));
        prop_assert!(choi_of_env_channel(&spec, &seq).unwrap().is_valid_state(CHOI_TOL));
    }

    #[test]
    fn optimizer_respects_box_and_descends(seed in 0u64..1000, bound in 0.5f64..3.0) {
        // Quartic bowl whose unconstrained minimum lies partly outside the box.
        let centre = [2.5, -0.3, 4.0, -3.5];
        let obj = spinctrl::optimizer::FnObjective {
            value: move |x: &[f64]| x.iter().zip(&centre).map(|(a, b)| (a - b).powi(4) + (a - b).powi(2)).sum::<f64>(),
            gradient: move |x: &[f64]| {
                x.iter().zip(&centre).map(|(a, b)| 4.0 * (a - b).powi(3) + 2.0 * (a - b)).collect::<Vec<f64>>()
            },
        };
        let mut r = rng(seed);
        let x0 = random_pulses(4, bound, &mut r);
        let out = bfgs_minimize(&obj, &x0, bound, &OptimizerConfig::default()).unwrap();
        prop_assert!(out.x.iter().all(|x| x.abs() <= bound));
        for w in out.values.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!((out.value - obj.value(&out.x)).abs() < 1e-12);
    }
}

#[test]
fn optimization_trace_is_monotone_and_feasible() {
    let target = TargetGate::swap(2);
    let template = ControlSequence::zeros(16, 0.2, 5.0).unwrap();
    let opt = OptimizerConfig {
        restarts: 3,
        seed: 5,
        init_amplitude: 2.0,
        ..Default::default()
    };
    let res = optimize_controls(
        &ChainSpec::new(2),
        &target,
        &template,
        &ObjectiveConfig::default(),
        &opt,
    )
    .unwrap();
    assert!(res
        .best_seq
        .hx
        .iter()
        .chain(&res.best_seq.hy)
        .all(|h| h.abs() <= 5.0));
    for w in res.trace.windows(2) {
        assert!(w[1].g <= w[0].g, "{} > {}", w[1].g, w[0].g);
    }
    let last = res.trace.last().unwrap();
    assert_eq!(last.g, res.g);
    let u = lib_propagate(&ChainSpec::new(2), &res.best_seq).unwrap();
    assert_eq!(
        fidelity(&target_unitary(&target), &u).unwrap(),
        res.fidelity
    );
}
