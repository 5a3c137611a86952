use curveflow::norms::{
    embed_probe, embedding_theta, exponent_residual, lp_mu_norm, mu_tilde, product_estimate_probe, slobodetskii_norm,
    slobodetskii_seminorm, sobolev_k_norm, sobolev_k_norm_with, strich_norm, theta_k2_q6, theta_sum_k23,
    WeightedSignal,
};
use curveflow::FlowError;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn graded(f: impl Fn(f64) -> f64, t_end: f64, m: usize, mu: f64) -> WeightedSignal {
    WeightedSignal::graded(f, t_end, m, 2.0, mu).unwrap()
}

#[test]
fn lebesgue_closed_forms() {
    assert!(rel(lp_mu_norm(&graded(|_| 1.0, 1.0, 32, 1.0)).value, 1.0) < 1e-12);
    assert!(rel(lp_mu_norm(&graded(|_| 1.0, 1.0, 32, 0.875)).value, 0.894427191) < 1e-9);
    assert!(rel(lp_mu_norm(&graded(|t| t, 1.0, 32, 0.875)).value, 0.554700196) < 1e-9);
}

#[test]
fn sobolev_closed_forms() {
    let c = graded(|_| 3.0, 1.0, 32, 0.9);
    assert!(rel(sobolev_k_norm(&c, 1).unwrap().value, lp_mu_norm(&c).value) < 1e-12);
    assert!(rel(sobolev_k_norm(&graded(|t| t, 1.0, 32, 1.0), 1).unwrap().value, 1.154700538) < 1e-9);
}

#[test]
fn difference_derivatives_match_analytic_ones() {
    let m = 10_000;
    let u = graded(f64::sin, 1.0, m, 0.9);
    let du = graded(f64::cos, 1.0, m, 0.9);
    let fd = sobolev_k_norm(&u, 1).unwrap().value;
    let exact = sobolev_k_norm_with(&u, &[du]).unwrap().value;
    assert!(rel(fd, exact) < 1e-6, "{fd} vs {exact}");
}

#[test]
fn too_few_samples_for_the_stencil() {
    let u = graded(|t| t, 1.0, 3, 1.0);
    assert!(sobolev_k_norm(&u, 2).is_err());
}

#[test]
fn seminorm_closed_forms() {
    assert_eq!(slobodetskii_seminorm(&graded(|_| 2.0, 1.0, 16, 0.9), 0.5).unwrap().value, 0.0);
    let v = slobodetskii_seminorm(&graded(|t| t, 1.0, 16, 1.0), 0.125).unwrap().value;
    assert!(rel(v, (16.0f64 / 77.0).sqrt()) < 1e-9);
    assert!(slobodetskii_seminorm(&graded(|t| t, 1.0, 16, 1.0), 1.0).is_err());
}

#[test]
fn seminorm_is_self_consistent_under_refinement() {
    let coarse = slobodetskii_seminorm(&graded(|t| t, 1.0, 16, 0.875), 0.125).unwrap();
    let fine = slobodetskii_seminorm(&graded(|t| t, 1.0, 64, 0.875), 0.125).unwrap();
    assert!((coarse.value - fine.value).abs() < 1e-6);
    assert!((coarse.value - fine.value).abs() <= coarse.error + fine.error + 1e-12 * fine.value);
}

#[test]
fn strich_examples() {
    let zero = graded(|_| 0.0, 1.0, 8, 1.0);
    assert_eq!(strich_norm(&zero, 0.625, &[0.0]).unwrap().value, 0.0);
    let one = graded(|_| 1.0, 1.0, 8, 1.0);
    assert!(rel(strich_norm(&one, 0.625, &[1.0]).unwrap().value, 2.0) < 1e-12);
    let u = graded(|t| t, 1.0, 8, 0.875);
    assert!(matches!(strich_norm(&u, 0.125, &[0.0]), Err(FlowError::TraceUndefined { .. })));
}

/// ‖t‖ in W^s_{2,1}(0, T), from the closed-form L₂ norm and seminorm.
fn linear_norm(s: f64, t: f64) -> f64 {
    (t.powi(3) / 3.0).sqrt() + (t.powf(3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s))).sqrt()
}

#[test]
fn product_probe_matches_closed_form() {
    let t_list = [1.0, 0.5, 0.25, 0.125];
    let f: &dyn Fn(f64) -> f64 = &|t| t;
    let g: &dyn Fn(f64) -> f64 = &|_| 1.0;
    let p = product_estimate_probe(&[f], &[g], &t_list, 1.0, 16).unwrap();
    assert!(!p.with_trace);
    for (t, r) in t_list.iter().zip(&p.ratios) {
        let exact = linear_norm(0.125, *t) / (linear_norm(0.625, *t) * t.sqrt());
        assert!(rel(*r, exact) < 1e-8, "T = {t}: {r} vs {exact}");
    }
}

#[test]
fn product_probe_degenerate_and_trace_cases() {
    let zero: &dyn Fn(f64) -> f64 = &|_| 0.0;
    let g: &dyn Fn(f64) -> f64 = &|t| 1.0 + t;
    let p = product_estimate_probe(&[zero], &[g], &[1.0, 0.5], 0.9, 16).unwrap();
    assert_eq!(p.ratios, vec![0.0, 0.0]);
    let f: &dyn Fn(f64) -> f64 = &|t| 1.0 + t;
    let p = product_estimate_probe(&[f], &[g], &[1.0, 0.5], 0.9, 16).unwrap();
    assert!(p.with_trace);
    assert!(p.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
}

#[test]
fn embedding_constant_stays_bounded() {
    let mu = 0.9;
    let theta = theta_k2_q6(mu);
    let u = |_t: f64, x: f64| x * x * (1.0 - x) * (1.0 - x);
    let r = embed_probe(&u, mu, 2, 6.0, theta, &[1.0, 0.5, 0.25, 0.125], 16).unwrap();
    assert!(r.lhs.iter().zip(&r.rhs).all(|(l, h)| l.is_finite() && *h > 0.0));
    assert!(r.max_constant() < 10.0, "{:?}", r.constants);
    assert!(matches!(embed_probe(&u, mu, 2, 6.0, theta + 0.01, &[1.0], 8), Err(FlowError::ExponentRelation { .. })));
}

#[test]
fn exponent_bookkeeping() {
    assert!((theta_sum_k23(0.875) - 1.0).abs() < 1e-15);
    for mu in [0.88, 0.9, 0.95, 1.0] {
        assert!(theta_sum_k23(mu) < 1.0);
        let th = theta_k2_q6(mu);
        assert!((1.0 / 6.0 - 1e-15..1.0 / 3.0).contains(&th), "μ = {mu}: θ = {th}");
        assert!((embedding_theta(2, 6.0, mu) - th).abs() < 1e-14);
        assert!(exponent_residual(2, 6.0, mu, th).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_thetas_add_up(mu in 0.876f64..1.0, inv_q1 in 0.01f64..0.49) {
        let t1 = embedding_theta(2, 1.0 / inv_q1, mu);
        let t2 = embedding_theta(3, 1.0 / (0.5 - inv_q1), mu);
        prop_assert!((t1 + t2 - theta_sum_k23(mu)).abs() < 1e-12);
        let (m1, m2) = (mu_tilde(mu, t1), mu_tilde(mu, t2));
        let lhs = 1.0 - mu - ((1.0 - m1) + (1.0 - m2));
        prop_assert!((lhs - (1.0 - (t1 + t2)) * (1.0 - mu)).abs() < 1e-14);
    }

    #[test]
    fn seminorm_is_homogeneous(c in -5.0f64..5.0, s in 0.05f64..0.95, mu in 0.6f64..1.0) {
        let u = graded(|t| t * t - 0.3 * t, 1.0, 12, mu);
        let cu = graded(|t| c * (t * t - 0.3 * t), 1.0, 12, mu);
        let a = slobodetskii_seminorm(&u, s).unwrap().value;
        let b = slobodetskii_seminorm(&cu, s).unwrap().value;
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn unit_weight_is_unweighted(a in -2.0f64..2.0, b in -2.0f64..2.0, t_end in 0.1f64..2.0) {
        // ‖a + bt‖² on (0, T) in closed form
        let u = graded(|t| a + b * t, t_end, 10, 1.0);
        let exact = (a * a * t_end + a * b * t_end.powi(2) + b * b * t_end.powi(3) / 3.0).sqrt();
        prop_assert!((lp_mu_norm(&u).value - exact).abs() < 1e-8 * (1.0 + exact));
        let semi = slobodetskii_norm(&u, 0.125).unwrap().value - lp_mu_norm(&u).value;
        let exact_semi = b.abs() * (t_end.powf(2.75) * 16.0 / 77.0).sqrt();
        prop_assert!((semi - exact_semi).abs() < 1e-8 * (1.0 + exact_semi));
    }

    #[test]
    fn lebesgue_norm_grows_with_the_horizon(mu in 0.55f64..1.0, t_end in 0.1f64..2.0, k in 1.0f64..6.0) {
        let f = |t: f64| (k * t).sin() + 0.2;
        let short = lp_mu_norm(&graded(f, t_end, 24, mu)).value;
        let long = lp_mu_norm(&graded(f, 1.5 * t_end, 36, mu)).value;
        prop_assert!(long >= short * (1.0 - 1e-6));
    }
}
