// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Structural invariants of the node dynamics and the protocols.

use std::f64::consts::{FRAC_PI_2, PI};

use cntqi::dynamics::{integrate_cascade, integrate_node};
use cntqi::protocols::{
    default_grid, emit_photon, transfer_qubit, ProtocolOptions, QubitAmplitudes,
};
use cntqi::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn packet(gamma_us2: f64) -> (Wavepacket, NodeParams) {
    let packet = Wavepacket::Gaussian(Gaussian::new(gamma_us2, 0.0).unwrap());
    (packet, NodeParams::from_mhz(5.0, 1.3))
}

fn emission_setup(gamma_us2: f64, params: &NodeParams) -> (TimeGrid, Envelope) {
    let (p, _) = packet(gamma_us2);
    let grid = default_grid(&p, 0.0, &[params], 0.0, None).unwrap();
    let target = p.sample(&grid).unwrap();
    (grid, target)
}

/// Control that stays off until `t_on`, then follows `value`.
fn delayed_control(grid: TimeGrid, t_on: f64, value: C64) -> Envelope {
    Envelope::from_fn(grid, |t| if t < t_on { C64::new(0.0, 0.0) } else { value }).unwrap()
}

fn max_gap(a: &[NodeState], b: &[NodeState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            (x.beta_q - y.beta_q)
                .norm()
                .max((x.beta_r - y.beta_r).norm())
                .max((x.beta_c - y.beta_c).norm())
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dynamics_are_linear_in_the_initial_state(
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
        lam in 0.5f64..6.0,
        gq in 0.0f64..0.5,
    ) {
        let params = NodeParams::from_mhz(1.0, 1.0).with_decoherence(gq, 0.2, 0.1);
        let grid = TimeGrid::with_max_step(0.0, 2.0, 1e-3).unwrap();
        let control = Envelope::constant(grid, C64::new(lam, 0.3));
        let input = Envelope::zeros(grid);
        let c = C64::new(re, im);
        let start = NodeState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.3), C64::new(0.1, -0.2));
        let scaled = NodeState::new(c * start.beta_q, c * start.beta_r, c * start.beta_c);
        let a = integrate_node(start, &params, &control, &input, &grid).unwrap();
        let b = integrate_node(scaled, &params, &control, &input, &grid).unwrap();
        let expect: Vec<NodeState> = a
            .states
            .iter()
            .map(|s| NodeState::new(c * s.beta_q, c * s.beta_r, c * s.beta_c))
            .collect();
        prop_assert!(max_gap(&b.states, &expect) < 1e-12 * (1.0 + c.norm()));
    }

    #[test]
    fn emission_is_deterministic(gamma_us2 in 0.3f64..1.5, theta in 0.2f64..FRAC_PI_2) {
        let (_, params) = packet(gamma_us2);
        let (grid, target) = emission_setup(gamma_us2, &params);
        let opts = ProtocolOptions::default();
        let a = emit_photon(QubitAmplitudes::excited(), theta, &params, &target, &grid, &opts).unwrap();
        let b = emit_photon(QubitAmplitudes::excited(), theta, &params, &target, &grid, &opts).unwrap();
        prop_assert_eq!(a.nodes[0].control.samples(), b.nodes[0].control.samples());
        prop_assert_eq!(a.nodes[0].alpha_out.samples(), b.nodes[0].alpha_out.samples());
        prop_assert_eq!(a.fidelity.to_bits(), b.fidelity.to_bits());
    }

    #[test]
    fn fiber_delay_shifts_the_receiver_by_whole_samples(k in 1usize..40, lam in 1.0f64..8.0) {
        let params = NodeParams::from_mhz(1.0, 1.0);
        let grid = TimeGrid::with_max_step(0.0, 3.0, 1e-3).unwrap();
        let c1 = delayed_control(grid, 0.05, C64::new(lam, 0.0));
        let c2 = Envelope::zeros(grid);
        let initials = [NodeState::excited(), NodeState::ZERO];
        let base = integrate_cascade(initials, &params, &params, [&c1, &c2], 0.0, &grid).unwrap();
        let delay = k as f64 * grid.dt();
        let late = integrate_cascade(initials, &params, &params, [&c1, &c2], delay, &grid).unwrap();
        let n = grid.len();
        prop_assert!(max_gap(&late.node2.states[k..], &base.node2.states[..n - k]) < 1e-12);
        prop_assert!(max_gap(&late.node2.states[..k], &vec![NodeState::ZERO; k]) == 0.0);
    }

    #[test]
    fn global_phase_does_not_change_fidelity(
        polar in 0.0f64..PI,
        azimuth in 0.0f64..(2.0 * PI),
        phase in 0.0f64..(2.0 * PI),
    ) {
        let (_, params) = packet(0.666);
        let params = params.with_decoherence(0.05, 0.05, 0.05);
        let (grid, target) = emission_setup(0.666, &params);
        let q = QubitAmplitudes::bloch(polar, azimuth);
        let opts = ProtocolOptions::default();
        let a = emit_photon(q, FRAC_PI_2, &params, &target, &grid, &opts).unwrap();
        let b = emit_photon(q.with_global_phase(phase), FRAC_PI_2, &params, &target, &grid, &opts).unwrap();
        prop_assert!((a.fidelity - b.fidelity).abs() < 1e-12);
    }

    #[test]
    fn more_decoherence_never_helps(
        base in 0.0f64..0.3,
        extra in 0.001f64..0.3,
        which in 0usize..3,
    ) {
        let (_, clean) = packet(0.666);
        let (grid, target) = emission_setup(0.666, &clean);
        let control = emit_photon(
            QubitAmplitudes::excited(), FRAC_PI_2, &clean, &target, &grid, &ProtocolOptions::default(),
        ).unwrap().nodes[0].control.clone();
        let mut rates = [base; 3];
        let low = clean.with_decoherence(rates[0], rates[1], rates[2]);
        rates[which] += extra;
        let high = clean.with_decoherence(rates[0], rates[1], rates[2]);
        let input = Envelope::zeros(grid);
        let run = |p: &NodeParams| integrate_node(NodeState::excited(), p, &control, &input, &grid).unwrap();
        let (a, b) = (run(&low), run(&high));
        let fa = protocols::fidelity_wavepacket(&a.alpha_out, &target).unwrap();
        let fb = protocols::fidelity_wavepacket(&b.alpha_out, &target).unwrap();
        prop_assert!(b.emitted_energy() <= a.emitted_energy() + 1e-12);
        prop_assert!(fb <= fa + 1e-12, "fidelity rose from {fa} to {fb}");
    }

    #[test]
    fn budget_residual_is_fourth_order_small(
        gamma_us2 in 0.3f64..1.5,
        gq in 0.0f64..0.5,
        gr in 0.0f64..0.5,
        gc in 0.0f64..0.5,
    ) {
        let (_, params) = packet(gamma_us2);
        let params = params.with_decoherence(gq, gr, gc);
        let (grid, target) = emission_setup(gamma_us2, &params);
        let r = emit_photon(
            QubitAmplitudes::excited(), FRAC_PI_2, &params, &target, &grid, &ProtocolOptions::default(),
        ).unwrap();
        let bound = 10.0 * grid.dt().powi(4) * grid.duration();
        prop_assert!(r.budget_residual < bound, "residual {} vs {bound}", r.budget_residual);
    }

    #[test]
    fn closed_loop_reproduces_random_gaussians(
        gamma_us2 in 0.1f64..2.0,
        theta in 0.1f64..FRAC_PI_2,
        gamma_mhz in 2.0f64..8.0,
        g_mhz in 0.8f64..2.0,
    ) {
        let params = NodeParams::from_mhz(gamma_mhz, g_mhz);
        let (grid, target) = emission_setup(gamma_us2, &params);
        let run = emit_photon(
            QubitAmplitudes::excited(), theta, &params, &target, &grid, &ProtocolOptions::default(),
        );
        let r = match run {
            Err(Error::Infeasible { .. }) => return Ok(()),
            other => other.unwrap(),
        };
        let want = target.scaled(C64::new(theta.sin(), 0.0));
        prop_assert!(r.nodes[0].alpha_out.l2_distance(&want).unwrap() < 1e-6);
        prop_assert!((r.nodes[0].final_state().beta_q - theta.cos()).norm() < 1e-6);
    }

    #[test]
    fn rk4_error_shrinks_fourth_order(lam in 2.0f64..10.0, g_mhz in 0.5f64..2.0) {
        let params = NodeParams::from_mhz(1.0, g_mhz).with_decoherence(0.1, 0.1, 0.1);
        let final_state = |n: usize| {
            let grid = TimeGrid::new(0.0, 2.0, n).unwrap();
            let control = Envelope::constant(grid, C64::new(lam, 0.0));
            let input = Envelope::zeros(grid);
            integrate_node(NodeState::excited(), &params, &control, &input, &grid)
                .unwrap()
                .final_state()
        };
        let (a, b, c) = (final_state(100), final_state(200), final_state(400));
        let d1 = max_gap(&[a], &[b]);
        let d2 = max_gap(&[b], &[c]);
        prop_assert!(d2 > 0.0 && d1 / d2 > 12.0, "step-halving ratio {}", d1 / d2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lossless_transfer_preserves_any_bloch_vector(polar in 0.0f64..PI, azimuth in 0.0f64..(2.0 * PI)) {
        let (p, params) = packet(0.666);
        let grid = default_grid(&p, 0.0, &[&params], 0.0, None).unwrap();
        let target = p.sample(&grid).unwrap();
        let q = QubitAmplitudes::bloch(polar, azimuth);
        let r = transfer_qubit(q, &params, &params, &target, 0.0, &grid, &ProtocolOptions::default()).unwrap();
        prop_assert!(r.fidelity > 1.0 - 1e-6, "fidelity {}", r.fidelity);
    }
}
