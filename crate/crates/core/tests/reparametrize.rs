use std::f64::consts::PI;

use curveflow::geometry::HeightField;
use curveflow::refcurve::{AngleProfile, CurvilinearMap, ReferenceCurve};
use curveflow::solver::{advance, reparametrize, FlowState, SolverConfig};
use curveflow::FlowError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn map(alpha: f64, n: usize) -> CurvilinearMap {
    CurvilinearMap::new(ReferenceCurve::with_chord(AngleProfile::near_arc(alpha, 8), 2.0, n).unwrap())
}

fn state(alpha: f64, n: usize, f: impl Fn(f64) -> f64) -> FlowState {
    FlowState::new(map(alpha, n), HeightField::from_fn(n, f).with_slopes([0.0; 2])).unwrap()
}

fn max_frac(st: &FlowState) -> f64 {
    let f = st.last().bound_frac;
    f[0].max(f[1])
}

#[test]
fn flat_state_is_left_alone() {
    let st = state(PI / 3.0, 64, |_| 0.0);
    let (next, rep) = reparametrize(&st).unwrap();
    assert_eq!(rep.frac_before, [0.0, 0.0]);
    assert_eq!(rep.hausdorff, 0.0);
    assert_eq!(next.height.values, st.height.values);
    assert_eq!(next.reparam_count, 0);
}

/// Runs with a raised threshold until the step reports a violation.
fn push_to_threshold(mut st: FlowState, threshold: f64) -> FlowState {
    let cfg = SolverConfig { bound_threshold: threshold, ..SolverConfig::default() };
    for _ in 0..2000 {
        match advance(&st, &cfg) {
            Ok(next) => st = next,
            Err(FlowError::BoundViolation { .. }) => return st,
            Err(e) => panic!("{e}"),
        }
    }
    panic!("no violation within 2000 steps");
}

#[test]
fn long_run_state_is_refitted_within_guarantees() {
    for alpha in [PI / 4.0, PI / 3.0, 2.0 * PI / 3.0] {
        let k0 = map(alpha, 128).k0;
        let st = push_to_threshold(state(alpha, 128, |s| 0.1 * k0 * (2.0 * PI * s).cos()), 0.7);
        assert!(max_frac(&st) > 0.6, "α = {alpha}: {:?}", st.last().bound_frac);
        let (next, rep) = reparametrize(&st).unwrap();
        assert!(rep.frac_after[0] < 1.0 / 3.0, "α = {alpha}: {rep:?}");
        assert!(rep.frac_after[1] < 2.0 / 3.0, "α = {alpha}: {rep:?}");
        assert!(rep.hausdorff < 1e-8);
        assert_eq!(next.reparam_count, 1);
        // the refitted state keeps flowing with the same invariants
        let cont = advance(&next, &SolverConfig::default()).unwrap();
        assert!(cont.last().energy <= next.last().energy + 1e-10);
    }
}

#[test]
fn refit_preserves_the_geometry() {
    let k0 = map(PI / 2.0, 128).k0;
    let st = state(PI / 2.0, 128, |s| 0.6 * k0 * (PI * s).cos());
    let (next, rep) = reparametrize(&st).unwrap();
    let (a, b) = (st.last(), next.last());
    assert!(rep.frac_after[0] < 1.0 / 3.0, "{rep:?}");
    // nodes stay on the curve, so polygon length and area move only at O(h²)
    assert!((a.area - b.area).abs() < 1e-4 * a.area);
    assert!((a.length - b.length).abs() < 1e-4 * a.length);
    assert!(b.angle_res[0] < 1e-10 && b.angle_res[1] < 1e-10);
}

#[test]
fn adversarial_heights_refit_or_fail_loudly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 128;
    let k0 = map(PI / 2.0, n).k0;
    let mut outcomes = [0usize; 2];
    for trial in 0..8 {
        let k = rng.gen_range(12..40) as f64;
        let amp = 0.66 * k0 * if trial % 2 == 0 { 1.0 } else { 0.3 };
        let phase: f64 = rng.gen_range(0.0..PI);
        let st = state(PI / 2.0, n, |s| amp * (k * PI * s + phase).cos() * (1.0 - (2.0 * s - 1.0).powi(8)));
        match reparametrize(&st) {
            Ok((next, rep)) => {
                assert!(rep.hausdorff < 1e-8, "{rep:?}");
                assert!(rep.frac_after[0] < 1.0 / 3.0, "{rep:?}");
                assert!(next.height.values.iter().all(|v| v.is_finite()));
                outcomes[0] += 1;
            }
            Err(FlowError::RefitFailed(msg)) => {
                assert!(!msg.is_empty());
                outcomes[1] += 1;
            }
            Err(e) => panic!("unexpected error kind: {e}"),
        }
    }
    assert_eq!(outcomes[0] + outcomes[1], 8);
}
