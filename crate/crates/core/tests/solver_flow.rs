use std::f64::consts::PI;

use curveflow::discrete::GridFrames;
use curveflow::geometry::HeightField;
use curveflow::refcurve::{AngleProfile, CurvilinearMap, ReferenceCurve};
use curveflow::solver::{
    advance, advance_or_refit, assemble_linear, measure_contraction, picard_solve, FlowState, PicardOptions, Scheme,
    SolverConfig,
};
use curveflow::FlowError;
use proptest::prelude::*;

fn map(alpha: f64, n: usize) -> CurvilinearMap {
    CurvilinearMap::new(ReferenceCurve::with_chord(AngleProfile::near_arc(alpha, 8), 2.0, n).unwrap())
}

fn perturbed(alpha: f64, n: usize, eps: f64) -> FlowState {
    let m = map(alpha, n);
    let e = eps * m.k0;
    FlowState::new(m, HeightField::from_fn(n, |s| e * (2.0 * PI * s).cos()).with_slopes([0.0; 2])).unwrap()
}

fn run(mut st: FlowState, cfg: &SolverConfig, steps: usize) -> FlowState {
    for _ in 0..steps {
        st = advance(&st, cfg).unwrap();
    }
    st
}

/// Runs to `t_end`, reparametrizing on bound violations. Returns the history
/// split into segments between reparametrizations.
fn run_segments(mut st: FlowState, cfg: &SolverConfig, t_end: f64) -> Vec<Vec<curveflow::solver::Diagnostics>> {
    let mut segments = vec![vec![*st.last()]];
    while st.t() < t_end - 1e-12 {
        let (next, rep) = advance_or_refit(&st, cfg).unwrap();
        st = next;
        if rep.is_some() {
            segments.push(Vec::new());
        }
        segments.last_mut().unwrap().push(*st.last());
    }
    segments
}

fn arc_map(alpha: f64, n: usize) -> CurvilinearMap {
    CurvilinearMap::new(ReferenceCurve::with_chord(AngleProfile::linear(alpha), 2.0, n).unwrap())
}

fn step_change(a: &FlowState, b: &FlowState) -> f64 {
    a.height.values.iter().zip(&b.height.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn right_angle_arc_is_stationary() {
    let st = FlowState::new(arc_map(PI / 2.0, 128), HeightField::zeros(128)).unwrap();
    let next = advance(&st, &SolverConfig::default()).unwrap();
    assert!(step_change(&st, &next) < 1e-8);
}

#[test]
fn relaxed_arc_is_stationary() {
    // away from π/2 the discrete equilibrium sits O(h²) off the arc
    let cfg = SolverConfig { dt: 1e-2, ..SolverConfig::default() };
    let st = run(FlowState::new(arc_map(PI / 4.0, 128), HeightField::zeros(128)).unwrap(), &cfg, 40);
    assert!(st.height.sup_norm() < 1e-4);
    let next = advance(&st, &SolverConfig::default()).unwrap();
    assert!(step_change(&st, &next) < 1e-8);
}

#[test]
fn length_decreases_and_area_is_conserved() {
    for alpha in [PI / 4.0, PI / 2.0, 2.0 * PI / 3.0] {
        let segments = run_segments(perturbed(alpha, 128, 0.1), &SolverConfig::default(), 0.2);
        for seg in &segments {
            let a0 = seg[0].area;
            for w in seg.windows(2) {
                assert!(w[1].energy <= w[0].energy + 1e-10, "α = {alpha}");
                assert!((w[1].area - w[0].area).abs() <= 1e-8 * a0.abs());
            }
            assert!(seg.iter().all(|d| (d.area - a0).abs() <= 1e-6 * a0.abs()));
            assert!(seg.iter().all(|d| d.angle_res[0] < 1e-10 && d.angle_res[1] < 1e-10));
            if alpha == PI / 2.0 {
                assert!(seg.windows(2).all(|w| w[1].length <= w[0].length + 1e-10));
            }
        }
        if alpha != PI / 2.0 {
            assert!(segments.len() > 1, "α = {alpha} should need a new reference");
        }
    }
}

#[test]
fn incompatible_initial_data_is_rejected() {
    let m = map(PI / 2.0, 64);
    let h = HeightField::zeros(64).with_slopes([0.1, 0.0]);
    assert!(matches!(FlowState::new(m, h), Err(FlowError::Compatibility { endpoint: 0, .. })));
}

#[test]
fn frozen_picard_is_a_single_linear_solve() {
    let st = perturbed(PI / 2.0, 64, 0.1);
    let opts = PicardOptions { frozen: true, ..PicardOptions::default() };
    let r = picard_solve(&st.map, &st.height, 0.01, 1e-3, &opts).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.trajectory.len(), 11);
}

#[test]
fn nonlinear_picard_converges() {
    let st = perturbed(PI / 2.0, 64, 0.1);
    let r = picard_solve(&st.map, &st.height, 0.01, 1e-3, &PicardOptions::default()).unwrap();
    assert!(r.iterations > 1 && r.iterations < 50);
    assert!(r.updates.last().unwrap() < &1e-12);
}

#[test]
fn linear_operator_has_a_fourth_difference_interior() {
    let n = 256;
    let m = map(PI / 2.0, n);
    let op = assemble_linear(&m, &HeightField::zeros(n), 1e-3).unwrap();
    let j = &op.jacobian;
    let i = n / 2;
    let centre = j.get(i, i);
    assert!(centre < 0.0, "dissipative diagonal");
    let row: Vec<f64> = (i - 2..=i + 2).map(|k| 6.0 * j.get(i, k) / centre).collect();
    for (r, e) in row.iter().zip([1.0, -4.0, 6.0, -4.0, 1.0]) {
        assert!((r - e).abs() < 1e-2, "{row:?}");
    }
}

fn d2_norm(u: &[f64], h: f64) -> f64 {
    (1..u.len() - 1).map(|i| ((u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h)).powi(2) * h).sum::<f64>().sqrt()
}

#[test]
fn linear_scheme_is_dissipative() {
    // with F = 0 the step is u = (I − dt A)⁻¹ v about the equilibrium arc
    let n = 128;
    let m = arc_map(PI / 2.0, n);
    let grid = GridFrames::new(&m, n);
    for dt in [1e-4, 1e-2] {
        let op = assemble_linear(&m, &HeightField::zeros(n), dt).unwrap();
        for k in 1..8 {
            let mut v: Vec<f64> = (0..=n).map(|i| (k as f64 * PI * i as f64 / n as f64).cos()).collect();
            grid.constrain(&mut v);
            let u = op.solve(&grid, &v[1..n]);
            assert!(d2_norm(&u, grid.h) <= d2_norm(&v, grid.h) * (1.0 + 1e-12), "dt {dt}, mode {k}");
        }
    }
}

#[test]
fn crank_nicolson_keeps_the_invariants() {
    let cfg = SolverConfig { scheme: Scheme::CrankNicolson, ..SolverConfig::default() };
    let st = run(perturbed(PI / 2.0, 128, 0.1), &cfg, 40);
    let h = &st.history;
    assert!(h.windows(2).all(|w| w[1].length <= w[0].length + 1e-10));
    assert!((h.last().unwrap().area - h[0].area).abs() <= 1e-8 * h[0].area);
}

#[test]
fn contraction_of_the_arc_is_zero_not_nan() {
    let m = map(PI / 2.0, 64);
    let r = measure_contraction(&m, &HeightField::zeros(64), &[0.01, 0.005], 3, 1e-3, 0.9, 1).unwrap();
    assert!(r.c_list.iter().all(|c| c.is_finite()));
}

#[test]
fn contraction_is_reproducible() {
    let st = perturbed(PI / 2.0, 64, 0.1);
    let a = measure_contraction(&st.map, &st.height, &[0.02, 0.01], 4, 1e-3, 0.9, 7).unwrap();
    let b = measure_contraction(&st.map, &st.height, &[0.02, 0.01], 4, 1e-3, 0.9, 7).unwrap();
    assert_eq!(a.c_list, b.c_list);
    assert!(a.c_list.iter().all(|c| *c > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn flow_conserves_area_and_dissipates_energy(
        alpha in 0.5f64..2.2, eps in -0.2f64..0.2, k in 1usize..4,
    ) {
        let n = 64;
        let m = map(alpha, n);
        let e = eps * m.k0;
        let h = HeightField::from_fn(n, |s| e * (k as f64 * PI * s).cos()).with_slopes([0.0; 2]);
        for seg in run_segments(FlowState::new(m, h).unwrap(), &SolverConfig::default(), 0.01) {
            for w in seg.windows(2) {
                prop_assert!(w[1].energy <= w[0].energy + 1e-10);
                prop_assert!((w[1].area - w[0].area).abs() <= 1e-8 * seg[0].area.abs());
            }
        }
    }
}

fn trajectory_end(n: usize, dt: f64, t_end: f64) -> Vec<f64> {
    let cfg = SolverConfig { dt, ..SolverConfig::default() };
    run(perturbed(PI / 3.0, n, 0.1), &cfg, (t_end / dt).round() as usize).height.values
}

/// Sup difference at the nodes the coarse grid shares with the fine one.
fn coarse_diff(a: &[f64], b: &[f64]) -> f64 {
    let r = (b.len() - 1) / (a.len() - 1);
    a.iter().enumerate().map(|(i, x)| (x - b[i * r]).abs()).fold(0.0, f64::max)
}

#[test]
fn self_convergence_orders() {
    let t = 0.02;
    let space: Vec<Vec<f64>> =
        [(32, 4e-3), (64, 1e-3), (128, 2.5e-4)].iter().map(|&(n, dt)| trajectory_end(n, dt, t)).collect();
    let (e0, e1) = (coarse_diff(&space[0], &space[1]), coarse_diff(&space[1], &space[2]));
    assert!((e0 / e1).log2() >= 1.8, "spatial {e0:.3e} {e1:.3e}");
    let time: Vec<Vec<f64>> = [4e-3, 2e-3, 1e-3].iter().map(|&dt| trajectory_end(64, dt, t)).collect();
    let (e0, e1) = (coarse_diff(&time[0], &time[1]), coarse_diff(&time[1], &time[2]));
    assert!((e0 / e1).log2() >= 0.9, "temporal {e0:.3e} {e1:.3e}");
}

#[test]
fn picard_count_does_not_grow_as_the_horizon_shrinks() {
    let st = perturbed(PI / 2.0, 64, 0.2);
    let counts: Vec<usize> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&t| picard_solve(&st.map, &st.height, t, 1e-3, &PicardOptions::default()).unwrap().iterations)
        .collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}
