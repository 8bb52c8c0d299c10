//! Library results against the independent oracles: direct double
//! quadrature, the image-sum thermal correlation, the non-secular master
//! equation and the exact few-mode bath.

mod common;

use std::f64::consts::PI;

use berry_decoherence::coefficients::{
    compute_coefficients, compute_coefficients_from_kernel, compute_coefficients_multinoise,
};
use berry_decoherence::evolution::{fidelity, propagate_reduced, single_cycle_closed_form};
use berry_decoherence::frames::{frame_angles, initial_state, RotatingFrame};
use berry_decoherence::oracle::{tcl2_nonsecular, FewModeBath, FewModeSolver};
use berry_decoherence::{BathSpec, DriveParams, TimeGrid};
use common::close;

fn drive(b: f64, theta: f64, omega0: f64) -> DriveParams {
    DriveParams::new(b, theta, omega0).unwrap()
}

fn tilde_start(d: &DriveParams) -> berry_decoherence::DensityMatrix2 {
    RotatingFrame::new(d).unwrap().to_rotated(&initial_state(d), 0.0)
}

#[test]
fn thermal_coefficients_match_direct_quadrature() {
    let d = drive(100.0, PI / 3.0, 2.0);
    let bath = BathSpec::from_lambda_norm(2.0, 20.0, 1.0).unwrap();
    let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
    let v = compute_coefficients(&d, &bath, &g).unwrap().final_values();
    let alpha = frame_angles(&d).unwrap().alpha;
    let o = common::direct_coefficients(d.b, alpha, g.t_max, 4 * g.intervals(), |s| {
        common::kappa_thermal_series(bath.lambda, bath.cutoff, bath.temperature, s, 4000)
    });
    for (name, a, b) in [("n", v.n, o[0]), ("m", v.m, o[1]), ("l", v.l, o[2]), ("k", v.k, o[3])] {
        assert!(close(a, b, 1e-4, 1e-8), "{name}: library {a} vs oracle {b}");
    }
}

#[test]
fn halving_the_step_barely_moves_the_coefficients() {
    for cutoff in [2.0, 20.0] {
        let d = drive(100.0, PI / 4.0, 2.0);
        let bath = BathSpec::from_lambda_norm(2.0, cutoff, 0.0).unwrap();
        let g = TimeGrid::for_cycle(d.period(), d.b, cutoff).unwrap();
        let a = compute_coefficients(&d, &bath, &g).unwrap().final_values();
        let b = compute_coefficients(&d, &bath, &g.refined(2)).unwrap().final_values();
        for (x, y) in [(a.n, b.n), (a.m, b.m), (a.l, b.l), (a.k, b.k)] {
            assert!(close(x, y, 1e-5, 1e-10), "cutoff {cutoff}: {x} vs {y}");
        }
    }
}

#[test]
fn equatorial_cycles_share_coefficients() {
    // θ = π/2 makes sin²α and cos²α identical for ±Ω₀
    let d = drive(100.0, PI / 2.0, 2.0);
    let bath = BathSpec::from_lambda_norm(2.0, 2.0, 0.0).unwrap();
    let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
    let a = compute_coefficients(&d, &bath, &g).unwrap();
    let b = compute_coefficients(&d.reversed(), &bath, &g).unwrap();
    for (x, y) in a.l.iter().zip(&b.l).chain(a.n.iter().zip(&b.n)).chain(a.k.iter().zip(&b.k)) {
        assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
    }
}

#[test]
fn multinoise_dephasing_dominates_single_bath_everywhere() {
    for theta in [PI / 6.0, PI / 4.0, PI / 3.0] {
        let d = drive(100.0, theta, 2.0);
        let bath = BathSpec::from_lambda_norm(2.0, 2.0, 0.0).unwrap();
        let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
        let multi = compute_coefficients_multinoise(&d, &bath, &g).unwrap();
        let single = compute_coefficients(&d, &bath, &g).unwrap();
        assert!(multi.l.iter().zip(&single.l).all(|(a, b)| a >= b));
    }
}

#[test]
fn nonsecular_pure_dephasing_matches_coefficients() {
    let d = drive(20.0, 0.0, 1.0);
    let bath = BathSpec::from_lambda_norm(0.5, 2.0, 0.0).unwrap();
    let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
    let rho0 = tilde_start(&d);
    let traj = tcl2_nonsecular(&d, &bath, &rho0, &g).unwrap();
    let c = compute_coefficients(&d, &bath, &g).unwrap();
    for (j, s) in traj.states.iter().enumerate() {
        let predicted = (-c.l[j]).exp() * rho0.c01.norm();
        assert!((s.c01.norm() - predicted).abs() < 1e-4, "t = {}: {} vs {predicted}", traj.times[j], s.c01.norm());
    }
}

#[test]
fn nonsecular_trace_is_preserved() {
    let d = drive(20.0, PI / 4.0, 1.0);
    let bath = BathSpec::from_lambda_norm(0.5, 2.0, 0.0).unwrap();
    let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
    let traj = tcl2_nonsecular(&d, &bath, &tilde_start(&d), &g).unwrap();
    assert!(traj.max_trace_drift <= 1e-8 * g.t_max, "drift {}", traj.max_trace_drift);
    assert!(traj.error_estimate < 1e-6);
}

#[test]
fn population_relaxation_tracks_the_nonsecular_solution() {
    let d = drive(100.0, PI / 4.0, 2.0);
    let bath = BathSpec::from_lambda_norm(2.0, 2.0, 0.0).unwrap();
    let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
    let rho0 = tilde_start(&d);
    let traj = tcl2_nonsecular(&d, &bath, &rho0, &g).unwrap();
    let c = compute_coefficients(&d, &bath, &g).unwrap();
    let worst = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (s.p00 - propagate_reduced(&rho0, &c, t).state.p00).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "population gap {worst}");
}

#[test]
fn few_mode_truncation_is_converged() {
    let d = drive(20.0, PI / 4.0, 1.0);
    let bath = BathSpec::from_lambda_norm(0.25, 2.0, 0.0).unwrap();
    let rho0 = tilde_start(&d);
    let times: Vec<f64> = (0..=20).map(|i| d.period() * i as f64 / 20.0).collect();
    let run = |n_max| {
        let fm = FewModeBath::ohmic(&bath, 4, n_max, 5.0).unwrap();
        FewModeSolver::new(&d, &fm).unwrap().trajectory_interaction(&rho0, &times)
    };
    let (a, b) = (run(3), run(4));
    let worst = a.iter().zip(&b).map(|(x, y)| x.trace_distance(y)).fold(0.0, f64::max);
    assert!(worst < 1e-3, "n_max 3 vs 4 differ by {worst}");
}

#[test]
fn few_mode_thermal_decay_follows_discrete_coefficients() {
    let d = drive(20.0, PI / 4.0, 1.0);
    let bath = BathSpec::from_lambda_norm(0.1, 2.0, 0.3).unwrap();
    let fm = FewModeBath::ohmic(&bath, 3, 2, 5.0).unwrap();
    let solver = FewModeSolver::new(&d, &fm).unwrap();
    let g = TimeGrid::for_cycle(d.period(), d.b, bath.cutoff).unwrap();
    let kappa: Vec<_> = g.times().iter().map(|&s| fm.correlation(s)).collect();
    let c = compute_coefficients_from_kernel(&d, &kappa, &g).unwrap();
    let zeta = frame_angles(&d).unwrap().zeta;
    let rho0 = tilde_start(&d);
    let idx: Vec<usize> = (0..=50).map(|i| i * g.intervals() / 50).collect();
    let times: Vec<f64> = idx.iter().map(|&j| g.time(j)).collect();
    let states = solver.trajectory_interaction(&rho0, &times);
    for (s, &j) in states.iter().zip(&idx) {
        let f = fidelity(s, &rho0);
        let p = single_cycle_closed_form(zeta, &c.sample(j));
        assert!((f - p).abs() < 0.05, "t = {}: exact {f} vs predicted {p}", g.time(j));
    }
}
