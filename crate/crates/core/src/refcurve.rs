//! Reference curves Φ*, the cutoff η and the curvilinear map Ψ.
//!
//! A reference curve is built from a tangent-angle profile θ(σ) given as a
//! finite cosine series, so that θ′ vanishes at both ends (zero endpoint
//! curvature) and the profile extends evenly past the endpoints.
//! Φ*(σ) = Φ*(0) + L ∫₀^σ (cos θ, sin θ), hence |∂σΦ*| = L exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::fd;
use crate::jet::{Jet, Jet2};
use crate::quad;

/// Rotation by +π/2.
pub fn rot(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

/// C⁴ smoothstep x⁵(126 − 420x + 540x² − 315x³ + 70x⁴).
const SMOOTHSTEP: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

/// ‖η′‖_C: the smoothstep slope peaks at 630/256 and the bands have width 1/6.
pub const ETA_PRIME_MAX: f64 = 6.0 * 630.0 / 256.0;

pub fn smoothstep_jet(x: Jet) -> Jet {
    let v = x.value();
    if v <= 0.0 {
        Jet::ZERO
    } else if v >= 1.0 {
        Jet::constant(1.0)
    } else {
        x.poly(&SMOOTHSTEP)
    }
}

/// Cutoff η as a jet in σ. Outside [0, 1] it continues with the end plateaus.
pub fn eta_jet(sigma: f64) -> Jet {
    let x = |a: f64| Jet::from_derivs(&[6.0 * (sigma - a), 6.0]);
    if sigma < 1.0 / 6.0 {
        Jet::constant(-1.0)
    } else if sigma < 2.0 / 6.0 {
        smoothstep_jet(x(1.0 / 6.0)) - Jet::constant(1.0)
    } else if sigma < 4.0 / 6.0 {
        Jet::ZERO
    } else if sigma < 5.0 / 6.0 {
        smoothstep_jet(x(4.0 / 6.0))
    } else {
        Jet::constant(1.0)
    }
}

/// k-th derivative of η at σ, for k ≤ 4.
pub fn eta_eval(sigma: f64, order: usize) -> f64 {
    assert!(order <= 4, "η derivatives are provided up to order 4");
    eta_jet(sigma).d(order)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// θ = α[cos πσ + (A − 1)(cos πσ − cos 3πσ)/4].
    Cosine { amplitude: f64 },
    /// Fejér-smoothed cosine series of the arc profile α(1 − 2σ).
    NearArc { modes: usize },
    /// The exact arc profile α(1 − 2σ); violates the zero-curvature conditions.
    Linear,
    /// Cosine series obtained by refitting an evolved curve.
    Fitted,
}

/// Tangent-angle profile θ(σ) = Σ_k c_k cos(kπσ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    pub kind: ProfileKind,
    pub alpha: f64,
    pub coeffs: Vec<f64>,
}

impl AngleProfile {
    pub fn cosine(alpha: f64, amplitude: f64) -> Self {
        let e = (amplitude - 1.0) / 4.0;
        AngleProfile {
            kind: ProfileKind::Cosine { amplitude },
            alpha,
            coeffs: vec![0.0, alpha * (1.0 + e), 0.0, -alpha * e],
        }
    }

    pub fn near_arc(alpha: f64, modes: usize) -> Self {
        let kmax = 2 * modes - 1;
        let mut coeffs = vec![0.0; kmax + 1];
        for k in (1..=kmax).step_by(2) {
            let kf = k as f64;
            coeffs[k] = 8.0 / (PI * PI * kf * kf) * (1.0 - kf / (2 * modes + 1) as f64);
        }
        let s: f64 = coeffs.iter().sum();
        for c in coeffs.iter_mut() {
            *c *= alpha / s;
        }
        AngleProfile { kind: ProfileKind::NearArc { modes }, alpha, coeffs }
    }

    pub fn linear(alpha: f64) -> Self {
        AngleProfile { kind: ProfileKind::Linear, alpha, coeffs: Vec::new() }
    }

    pub fn fitted(alpha: f64, coeffs: Vec<f64>) -> Self {
        AngleProfile { kind: ProfileKind::Fitted, alpha, coeffs }
    }

    pub fn theta_jet(&self, sigma: f64) -> Jet {
        if self.kind == ProfileKind::Linear {
            return Jet::from_derivs(&[self.alpha * (1.0 - 2.0 * sigma), -2.0 * self.alpha]);
        }
        let x = PI * sigma;
        let (s1, c1) = x.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        let mut d = [0.0; 6];
        for (k, &a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                let ns = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = ns;
            }
            if a == 0.0 {
                continue;
            }
            let w = k as f64 * PI;
            let (w2, w3) = (w * w, w * w * w);
            d[0] += a * c;
            d[1] -= a * w * s;
            d[2] -= a * w2 * c;
            d[3] += a * w3 * s;
            d[4] += a * w2 * w2 * c;
            d[5] -= a * w2 * w3 * s;
        }
        Jet::from_derivs(&d)
    }

    pub fn theta(&self, sigma: f64) -> f64 {
        self.theta_jet(sigma).value()
    }
}

const SIG_MIN: f64 = -0.5;
const PANELS_PER_UNIT: usize = 512;
const PANELS: usize = 2 * PANELS_PER_UNIT;

/// Reference curve with its sampled data on a uniform grid of N + 1 nodes.
#[derive(Clone, Debug, Serialize)]
pub struct ReferenceCurve {
    pub alpha: f64,
    pub length: f64,
    pub profile: AngleProfile,
    pub origin: [f64; 2],
    pub n: usize,
    pub sigma: Vec<f64>,
    pub phi: Vec<[f64; 2]>,
    pub kappa: Vec<f64>,
    pub tau: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    #[serde(skip)]
    cum: Vec<[f64; 2]>,
    #[serde(skip)]
    kappa_max: f64,
}

/// θ(σ) = α cos(πσ) scaled by `amplitude` on the deviation from the pure
/// cosine, with L = 1.
pub fn build_reference_from_angle(alpha: f64, amplitude: f64, n: usize) -> Result<ReferenceCurve> {
    check_alpha(alpha)?;
    ReferenceCurve::new(AngleProfile::cosine(alpha, amplitude), 1.0, n, None)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(FlowError::InvalidAlpha(alpha));
    }
    Ok(())
}

impl ReferenceCurve {
    /// Validated construction. `origin` defaults to the position that centers
    /// the chord on σ ↦ x = 0.
    pub fn new(profile: AngleProfile, length: f64, n: usize, origin: Option<[f64; 2]>) -> Result<Self> {
        check_alpha(profile.alpha)?;
        if n < 16 || !n.is_multiple_of(2) {
            return Err(FlowError::InvalidParameter(format!("N = {n} must be even and ≥ 16")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(FlowError::InvalidParameter(format!("length {length} must be positive")));
        }
        let c = Self::new_unchecked(profile, length, n, origin);
        let a = c.alpha;
        let t0 = c.profile.theta(0.0);
        let t1 = c.profile.theta(1.0);
        if (t0 - a).abs() > 1e-12 || (t1 + a).abs() > 1e-12 {
            return Err(FlowError::InvalidParameter(format!(
                "profile endpoint angles ({t0}, {t1}) differ from (α, −α)"
            )));
        }
        let y1 = c.phi[n][1] - c.origin[1];
        if y1.abs() > 1e-10 * length {
            return Err(FlowError::InvalidParameter(format!("profile does not close on the axis (Δy = {y1:.3e})")));
        }
        let fine = 8 * n;
        for i in 1..fine {
            let s = i as f64 / fine as f64;
            if c.phi_at(s)[1] <= 0.0 {
                return Err(FlowError::AxisCrossing { sigma: s });
            }
        }
        Ok(c)
    }

    /// Construction without the endpoint and axis checks (used to build
    /// deliberately invalid curves for validation tests).
    pub fn new_unchecked(profile: AngleProfile, length: f64, n: usize, origin: Option<[f64; 2]>) -> Self {
        let mut cum = vec![[0.0; 2]; PANELS + 1];
        let w = 1.0 / PANELS_PER_UNIT as f64;
        let zero = PANELS_PER_UNIT / 2;
        for p in zero..PANELS {
            let lo = SIG_MIN + p as f64 * w;
            let inc = panel_integral(&profile, lo, lo + w);
            cum[p + 1] = [cum[p][0] + inc[0], cum[p][1] + inc[1]];
        }
        for p in (0..zero).rev() {
            let lo = SIG_MIN + p as f64 * w;
            let inc = panel_integral(&profile, lo, lo + w);
            cum[p] = [cum[p + 1][0] - inc[0], cum[p + 1][1] - inc[1]];
        }
        let mut c = ReferenceCurve {
            alpha: profile.alpha,
            length,
            profile,
            origin: [0.0, 0.0],
            n,
            sigma: Vec::new(),
            phi: Vec::new(),
            kappa: Vec::new(),
            tau: Vec::new(),
            normal: Vec::new(),
            cum,
            kappa_max: 0.0,
        };
        c.origin = origin.unwrap_or([-0.5 * c.chord_unshifted(), 0.0]);
        for i in 0..=n {
            let s = i as f64 / n as f64;
            let th = c.profile.theta_jet(s);
            let (sn, cs) = (th.value().sin(), th.value().cos());
            c.sigma.push(s);
            c.phi.push(c.phi_at(s));
            c.kappa.push(th.d(1) / length);
            c.tau.push([cs, sn]);
            c.normal.push([-sn, cs]);
        }
        let fine = 16 * n;
        c.kappa_max =
            (0..=fine).map(|i| c.profile.theta_jet(i as f64 / fine as f64).d(1).abs() / length).fold(0.0, f64::max);
        c
    }

    /// Validated construction with the length chosen to give the requested chord.
    pub fn with_chord(profile: AngleProfile, chord: f64, n: usize) -> Result<Self> {
        let unit = Self::new_unchecked(profile.clone(), 1.0, 16, None);
        let c1 = unit.chord_unshifted();
        if c1 <= 0.0 {
            return Err(FlowError::InvalidParameter("profile has non-positive chord".into()));
        }
        Self::new(profile, chord / c1, n, None)
    }

    fn chord_unshifted(&self) -> f64 {
        self.length * self.cum_at(1.0)[0]
    }

    fn cum_at(&self, sigma: f64) -> [f64; 2] {
        let w = 1.0 / PANELS_PER_UNIT as f64;
        let p = (((sigma - SIG_MIN) / w).floor().max(0.0) as usize).min(PANELS - 1);
        let lo = SIG_MIN + p as f64 * w;
        let inc = panel_integral(&self.profile, lo, sigma);
        [self.cum[p][0] + inc[0], self.cum[p][1] + inc[1]]
    }

    /// Φ*(σ); valid for σ ∈ [−1/2, 3/2] (the profile continues evenly).
    pub fn phi_at(&self, sigma: f64) -> [f64; 2] {
        let c = self.cum_at(sigma);
        [self.origin[0] + self.length * c[0], self.origin[1] + self.length * c[1]]
    }

    pub fn theta_jet(&self, sigma: f64) -> Jet {
        self.profile.theta_jet(sigma)
    }

    pub fn kappa_at(&self, sigma: f64) -> f64 {
        self.profile.theta_jet(sigma).d(1) / self.length
    }

    /// Φ* as a jet in σ.
    pub fn phi_jet(&self, sigma: f64) -> Jet2 {
        let th = self.theta_jet(sigma);
        let (s, c) = th.sin_cos();
        let p = self.phi_at(sigma);
        Jet2(integrate_jet(p[0], c.scale(self.length)), integrate_jet(p[1], s.scale(self.length)))
    }

    /// ‖κ_Λ‖_C sampled on a grid 16× finer than the node grid.
    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn chord(&self) -> f64 {
        self.phi[self.n][0] - self.phi[0][0]
    }

    /// Signed area between Φ* and the axis, ∫ y dx.
    pub fn area(&self) -> f64 {
        quad::integrate(0.0, 1.0, 256, |s| {
            let y = self.phi_at(s)[1];
            y * self.length * self.profile.theta(s).cos()
        })
    }
}

fn integrate_jet(v0: f64, d: Jet) -> Jet {
    let mut c = [0.0; crate::jet::ORDER];
    c[0] = v0;
    for k in 1..crate::jet::ORDER {
        c[k] = d.0[k - 1] / k as f64;
    }
    Jet(c)
}

fn panel_integral(p: &AngleProfile, a: f64, b: f64) -> [f64; 2] {
    let mut s = [0.0; 2];
    if b == a {
        return s;
    }
    for (x, w) in quad::gl8(a, b) {
        let th = p.theta(x);
        s[0] += w * th.cos();
        s[1] += w * th.sin();
    }
    s
}

/// One line of a validation report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks the four reference-curve invariants on the stored samples.
pub fn validate_reference(curve: &ReferenceCurve, tol: f64) -> ValidationReport {
    let n = curve.n;
    let h = 1.0 / n as f64;
    let xs: Vec<f64> = curve.phi.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = curve.phi.iter().map(|p| p[1]).collect();
    let mut speed_dev: f64 = 0.0;
    for i in 0..=n {
        let dx = fd::uniform_derivative(&xs, h, i, 1, 11);
        let dy = fd::uniform_derivative(&ys, h, i, 1, 11);
        speed_dev = speed_dev.max(((dx * dx + dy * dy).sqrt() - curve.length).abs() / curve.length);
    }
    let a = curve.alpha;
    let axis = ys[0].abs().max(ys[n].abs());
    let t0 = curve.tau[0];
    let t1 = curve.tau[n];
    let tang = ((t0[0] - a.cos()).hypot(t0[1] - a.sin())).max((t1[0] - a.cos()).hypot(t1[1] + a.sin()));
    let curv = curve.kappa[0].abs().max(curve.kappa[n].abs());
    let mk = |name, r: f64| Check { name, residual: r, pass: r < tol };
    ValidationReport {
        checks: vec![
            mk("arc-length parametrization", speed_dev),
            mk("endpoints on axis", axis),
            mk("endpoint tangents", tang),
            mk("endpoint curvature", curv),
        ],
    }
}

/// Ψ(σ, q) = Φ*(σ) + q (n_Λ + cot α η τ_Λ) together with the tube half-width
/// d = (2/3) K₀ and the smallness constants K₀, K₁.
#[derive(Clone, Debug)]
pub struct CurvilinearMap {
    pub reference: ReferenceCurve,
    pub cot_alpha: f64,
    pub k0: f64,
    pub k1: f64,
    pub d: f64,
}

/// Jets in σ of Φ* and of the fiber direction v = Ψq.
#[derive(Clone, Copy, Debug)]
pub struct Frames {
    pub phi: Jet2,
    pub v: Jet2,
}

impl Frames {
    /// Ψ(·, q) as a jet in σ.
    pub fn psi(&self, q: f64) -> Jet2 {
        self.phi + self.v.scale(q)
    }

    /// W(σ, q) = ⟨Ψq, RΨσ⟩ = W₀ + W₁ q.
    pub fn w_coeffs(&self) -> (f64, f64) {
        let d1 = self.phi.d(1);
        let v = self.v.value();
        let dv = self.v.d(1);
        (d1[0] * v[1] - d1[1] * v[0], dv[0] * v[1] - dv[1] * v[0])
    }
}

pub fn cot_exact(alpha: f64) -> f64 {
    if alpha == PI / 2.0 {
        0.0
    } else {
        alpha.cos() / alpha.sin()
    }
}

impl CurvilinearMap {
    pub fn new(reference: ReferenceCurve) -> Self {
        let alpha = reference.alpha;
        let cot = cot_exact(alpha);
        let chat = 2f64.sqrt() * alpha.sin();
        let km = reference.kappa_max();
        let k0 = if km > 0.0 {
            1.0 / (2.0 * km * (1.0 + cot * cot + chat * cot.abs() * ETA_PRIME_MAX))
        } else {
            f64::INFINITY
        };
        let k1 = if cot == 0.0 { f64::INFINITY } else { reference.length / (12.0 * cot.abs()) };
        CurvilinearMap { reference, cot_alpha: cot, k0, k1, d: 2.0 * k0 / 3.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.reference.alpha
    }

    pub fn length(&self) -> f64 {
        self.reference.length
    }

    pub fn frames(&self, sigma: f64) -> Frames {
        let phi = self.reference.phi_jet(sigma);
        let th = self.reference.theta_jet(sigma);
        let (s, c) = th.sin_cos();
        let tau = Jet2(c, s);
        let nrm = Jet2(-s, c);
        let v = if self.cot_alpha == 0.0 { nrm } else { nrm + tau.scale_jet(eta_jet(sigma).scale(self.cot_alpha)) };
        Frames { phi, v }
    }

    /// ∂σ^i ∂q^j Ψ(σ, q).
    pub fn psi_eval(&self, sigma: f64, q: f64, i: usize, j: usize) -> Result<[f64; 2]> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(FlowError::InvalidParameter(format!("σ = {sigma} outside [0, 1]")));
        }
        if q.abs() >= self.d {
            return Err(FlowError::OutsideTube { node: 0, rho: q, d: self.d });
        }
        if i + j > 4 {
            return Err(FlowError::InvalidParameter(format!("order {i}+{j} exceeds 4")));
        }
        let f = self.frames(sigma);
        Ok(match j {
            0 => f.psi(q).d(i),
            1 => f.v.d(i),
            _ => [0.0, 0.0],
        })
    }

    /// ⟨Ψq, RΨσ⟩(σ, q).
    pub fn inner_w(&self, sigma: f64, q: f64) -> f64 {
        let (w0, w1) = self.frames(sigma).w_coeffs();
        w0 + w1 * q
    }

    /// Closed form L[1 − q(κ_Λ − cot α η′/L + cot²α η² κ_Λ)] of ⟨Ψq, RΨσ⟩.
    pub fn inner_w_closed_form(&self, sigma: f64, q: f64) -> f64 {
        let l = self.length();
        let k = self.reference.kappa_at(sigma);
        let e = eta_jet(sigma);
        let c = self.cot_alpha;
        l * (1.0 - q * (k - c * e.d(1) / l + c * c * e.value() * e.value() * k))
    }

    /// Lower bound L[1 − |q| ‖κ_Λ‖(1 + Ĉ|cot α η′| + cot²α)], Ĉ = √2 sin α.
    pub fn inner_w_lower_bound(&self, sigma: f64, q: f64) -> f64 {
        let c = self.cot_alpha;
        let chat = 2f64.sqrt() * self.alpha().sin();
        self.length()
            * (1.0 - q.abs() * self.reference.kappa_max() * (1.0 + chat * (c * eta_jet(sigma).d(1)).abs() + c * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_plateaus_and_joins() {
        assert_eq!(eta_eval(0.1, 0), -1.0);
        assert_eq!(eta_eval(0.5, 0), 0.0);
        assert_eq!(eta_eval(0.5, 1), 0.0);
        assert_eq!(eta_eval(0.95, 2), 0.0);
        // one-sided limits at the joins are the smoothstep ends
        let x = |v: f64| Jet::from_derivs(&[v, 1.0]).poly(&SMOOTHSTEP);
        for k in 1..=4 {
            assert_eq!(x(0.0).d(k), 0.0);
            assert!(x(1.0).d(k).abs() < 1e-12, "order {k}: {}", x(1.0).d(k));
        }
        assert!((x(1.0).value() - 1.0).abs() < 1e-15);
        for i in 0..=600 {
            assert!(eta_eval(i as f64 / 600.0, 1) >= 0.0);
        }
    }

    #[test]
    fn cosine_reference_endpoint_data() {
        let c = build_reference_from_angle(PI / 2.0, 1.0, 256).unwrap();
        assert!(c.tau[0][0].abs() < 1e-15 && (c.tau[0][1] - 1.0).abs() < 1e-15);
        assert!(c.phi[0][1].abs() < 1e-12 && c.phi[256][1].abs() < 1e-12);
        assert!(c.kappa[0].abs() < 1e-12 && c.kappa[256].abs() < 1e-12);
    }

    #[test]
    fn near_arc_profile_is_monotone() {
        let p = AngleProfile::near_arc(PI / 3.0, 8);
        assert!((p.theta(0.0) - PI / 3.0).abs() < 1e-14);
        for i in 0..=400 {
            assert!(p.theta_jet(i as f64 / 400.0).d(1) <= 1e-12);
        }
    }
}
