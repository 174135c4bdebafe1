//! Eigen-decomposition, path tracking and bracket densities.

use egedyn::linalg::{CMatrix, C64};
use egedyn::parallel;
use egedyn::process::{replica_path, Hermiticity, Initial, MatrixState, SimConfig};
use egedyn::rng::{domain, Stream};
use egedyn::spectral::frame::{decompose, overlap_det, overlap_eigvec};
use egedyn::spectral::{simulate_replica, Trajectory};
use egedyn::suites::{frozen_state, random_test_matrix};
use egedyn::two_by_two::closed_form_overlaps;
use egedyn::verify::derivatives::fd_convergence_order;
use egedyn::verify::qv::{realized_and_theory, verify_qv, QVKind, QVTarget};
use proptest::prelude::*;

#[test]
fn coarse_tracking_agrees_with_fine_tracking() {
    let fine_cfg = SimConfig::new(4, 0.3, 1e-4, 2000, 17).unwrap();
    let states: Vec<MatrixState> = replica_path(&fine_cfg, 0).unwrap().collect();
    let fine = Trajectory::from_states(&fine_cfg, states.clone()).unwrap();
    let coarse_cfg = SimConfig { dt: 2e-4, steps: 1000, ..fine_cfg.clone() };
    let coarse = Trajectory::from_states(&coarse_cfg, states.into_iter().step_by(2)).unwrap();
    assert_eq!(coarse.len(), 1001);
    for (s, c) in coarse.paths.iter().enumerate() {
        assert_eq!(c, &fine.paths[2 * s], "labels diverge at coarse step {s}");
    }
    assert_eq!(fine.ambiguous_steps, 0);
}

#[test]
fn paths_move_continuously() {
    let cfg = SimConfig::new(5, 0.0, 1e-4, 500, 3).unwrap();
    let tr = simulate_replica(&cfg, 0).unwrap();
    for (s, w) in tr.paths.windows(2).enumerate() {
        let jump = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(jump < 0.5 * tr.min_gaps[s], "step {s}: jump {jump} vs gap {}", tr.min_gaps[s]);
    }
}

fn sampled(n: usize, tau: f64, seed: u64) -> MatrixState {
    let mut s = Stream::new(seed, domain("overlap-props"), n as u64);
    let j = random_test_matrix(n, &mut s).unwrap();
    let h = Hermiticity::new(tau).unwrap();
    let (a, b) = h.weights();
    // mix the Hermitian and anti-Hermitian parts by the requested τ
    let herm = (&j + &j.adjoint()).scale_real(0.5 * a);
    let anti = (&j - &j.adjoint()).scale_real(0.5 * b);
    MatrixState::new(0.0, &herm + &anti).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_invariants(n in 2usize..=6, tau in -0.9f64..0.9, seed in 0u64..10_000) {
        let state = sampled(n, tau, seed);
        let Ok(frame) = decompose(&state) else { return Ok(()) };
        prop_assume!(frame.min_gap > 1e-3 * state.j.frobenius());
        prop_assert!(frame.biorthogonality_error() <= 1e-9);
        let o = &frame.overlaps;
        for i in 0..n {
            prop_assert!(o[(i, i)].re >= 1.0 - 1e-9, "O_ii = {}", o[(i, i)]);
            prop_assert!(o[(i, i)].im.abs() <= 1e-9 * o[(i, i)].re);
            let row: C64 = (0..n).map(|j| o[(i, j)]).sum();
            prop_assert!((row - C64::new(1.0, 0.0)).norm() <= 1e-8 * o[(i, i)].re);
            for j in 0..n {
                prop_assert!((o[(i, j)] - o[(j, i)].conj()).norm() <= 1e-9 * o[(i, i)].re.max(o[(j, j)].re));
                let det_form = overlap_det(&state, &frame.eigenvalues, i, j).unwrap();
                let scale = (o[(i, i)].re * o[(j, j)].re).sqrt().max(1.0);
                prop_assert!((det_form - overlap_eigvec(&frame, i, j)).norm() <= 1e-7 * scale);
            }
        }
    }

    #[test]
    fn closed_form_2x2(tau in -0.95f64..0.95, seed in 0u64..10_000) {
        let state = sampled(2, tau, seed);
        let Ok(cf) = closed_form_overlaps(&state) else { return Ok(()) };
        let frame = decompose(&state).unwrap();
        let m = egedyn::spectral::match_eigenvalues(&[cf.lambda1, cf.lambda2], &frame.eigenvalues);
        let f = frame.permuted(&m.perm);
        let scale = cf.o11.max(1.0);
        prop_assert!((f.overlaps[(0, 0)].re - cf.o11).abs() <= 1e-10 * scale);
        prop_assert!((f.overlaps[(1, 1)].re - cf.o22).abs() <= 1e-10 * scale);
        prop_assert!((f.overlaps[(0, 1)] - C64::new(cf.o12, 0.0)).norm() <= 1e-10 * scale);
        prop_assert!((cf.o11 - cf.o22).abs() <= 1e-12 * scale);
        prop_assert!((cf.o11 + cf.o12 - 1.0).abs() <= 1e-12 * scale);
    }
}

#[test]
fn normal_matrices_have_unit_overlaps() {
    for tau in [1.0, -1.0] {
        let state = sampled(5, tau, 4);
        let f = decompose(&state).unwrap();
        assert!((&f.overlaps - &CMatrix::identity(5)).max_abs() <= 1e-8);
    }
}

#[test]
fn finite_differences_converge_at_second_order() {
    let cfg = SimConfig::new(3, 0.5, 1e-3, 10, 8).unwrap();
    let state = frozen_state(&cfg, "fd-order", 0).unwrap();
    let fit = fd_convergence_order(&state, cfg.tau, 0, &[4e-3, 2e-3, 1e-3, 5e-4]).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.2, "order {}", fit.slope);
}

#[test]
fn zero_tau_real_and_imaginary_brackets() {
    let cfg = SimConfig::new(3, 0.0, 1e-4, 500, 31)
        .unwrap()
        .with_initial(Initial::SampledSimple { scale: 1.0 })
        .unwrap();
    let trs = parallel::replicas(100, |r| simulate_replica(&cfg, r)).unwrap();
    for i in 0..3 {
        let rr = QVTarget::new(QVKind::RR, i, i);
        let ii = QVTarget::new(QVKind::II, i, i);
        for tr in &trs {
            // identical theory at τ = 0
            assert_eq!(realized_and_theory(tr, &rr).1, realized_and_theory(tr, &ii).1);
        }
        for t in [rr, ii, QVTarget::new(QVKind::RI, i, i), QVTarget::new(QVKind::ComplexHolomorphic, i, i)] {
            let r = verify_qv(&trs, t).unwrap();
            assert!(r.pass, "{}", r.one_line());
        }
        let diff: Vec<f64> = trs
            .iter()
            .map(|tr| realized_and_theory(tr, &rr).0.re - realized_and_theory(tr, &ii).0.re)
            .collect();
        let (m, se) = egedyn::stats::mean_stderr(&diff);
        assert!(m.abs() < 4.0 * se, "RR - II = {m} +- {se}");
    }
}
