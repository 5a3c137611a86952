//! Rebuilding the reference curve from an evolved state.
//!
//! The current curve is resampled by arc length. Near each end the odd part
//! of its tangent angle (the part carrying the endpoint curvature) is blended
//! out with the C⁴ smoothstep, first over the outer sixths, and the result is
//! fitted by a cosine series. The curve is then re-expressed as heights over
//! the new reference.

use std::sync::Arc;

use std::f64::consts::PI;

use serde::Serialize;

use crate::banded::BandMatrix;
use crate::discrete::GridFrames;
use crate::error::{FlowError, Result};
use crate::fd;
use crate::geometry::HeightField;
use crate::jet::Jet;
use crate::quad::{gl8, integrate};
use crate::refcurve::{smoothstep_jet, AngleProfile, CurvilinearMap, ReferenceCurve};
use crate::solver::{bound_fractions, FlowState};

/// Largest admissible displacement of the curve.
pub const HAUSDORFF_TOL: f64 = 1e-8;

/// End blending widths tried in order; narrower ones only when the heights
/// over the wider blend break the K₀/3 bound.
pub const BLEND_WIDTHS: [f64; 4] = [1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 48.0];
const MIN_BLEND_CELLS: f64 = 4.0;

#[derive(Clone, Debug, Serialize)]
pub struct RefitReport {
    pub frac_before: [f64; 2],
    pub frac_after: [f64; 2],
    /// Largest distance from a new node to the previous curve.
    pub hausdorff: f64,
    pub modes: usize,
    /// Width in normalized arc length of the end blending that was used.
    pub blend_width: f64,
}

/// The evolved curve σ ↦ Ψ(σ, ρ(σ)) with ρ interpolated locally (degree 5).
struct ContinuousCurve<'a> {
    map: &'a CurvilinearMap,
    values: &'a [f64],
    h: f64,
}

impl ContinuousCurve<'_> {
    fn rho(&self, sigma: f64) -> (f64, f64) {
        let n = self.values.len() - 1;
        let j0 = ((sigma / self.h).floor() as isize - 2).clamp(0, n as isize - 5) as usize;
        let x: Vec<f64> = (j0..j0 + 6).map(|j| j as f64 * self.h).collect();
        let w = fd::weights(sigma, &x, 1);
        let mut r = (0.0, 0.0);
        for k in 0..6 {
            r.0 += w[0][k] * self.values[j0 + k];
            r.1 += w[1][k] * self.values[j0 + k];
        }
        r
    }

    /// (point, derivative in σ).
    fn eval(&self, sigma: f64) -> ([f64; 2], [f64; 2]) {
        let (r, dr) = self.rho(sigma);
        let f = self.map.frames(sigma);
        let p = f.psi(r);
        let v = f.v.value();
        let d = p.d(1);
        (p.value(), [d[0] + dr * v[0], d[1] + dr * v[1]])
    }

    fn speed(&self, sigma: f64) -> f64 {
        let d = self.eval(sigma).1;
        d[0].hypot(d[1])
    }
}

fn smoothstep(x: f64) -> f64 {
    smoothstep_jet(Jet::constant(x)).value()
}

/// Cumulative arc length on a uniform panel grid, with the σ ↦ s inverse.
struct ArcTable {
    sig: Vec<f64>,
    cum: Vec<f64>,
}

impl ArcTable {
    fn new(c: &ContinuousCurve, panels: usize) -> Self {
        let sig: Vec<f64> = (0..=panels).map(|j| j as f64 / panels as f64).collect();
        let mut cum = vec![0.0];
        for j in 0..panels {
            let s: f64 = gl8(sig[j], sig[j + 1]).iter().map(|(x, w)| w * c.speed(*x)).sum();
            cum.push(cum[j] + s);
        }
        ArcTable { sig, cum }
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// σ with s(σ) = `target`.
    fn invert(&self, c: &ContinuousCurve, target: f64) -> f64 {
        let p = self.cum.partition_point(|v| *v <= target).clamp(1, self.cum.len() - 1) - 1;
        let lo = self.sig[p];
        let frac = (target - self.cum[p]) / (self.cum[p + 1] - self.cum[p]);
        let mut x = lo + frac * (self.sig[p + 1] - lo);
        for _ in 0..20 {
            let s: f64 = self.cum[p] + gl8(lo, x).iter().map(|(y, w)| w * c.speed(*y)).sum::<f64>();
            let dx = (s - target) / c.speed(x);
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        x
    }
}

/// Least-squares fit of f(x) ≈ Σ cₖ xᵏ (k = 1..5) over x < `width`;
/// returns the odd coefficients (c₁, c₃, c₅).
fn odd_part(samples: &[(f64, f64)], width: f64) -> Result<[f64; 3]> {
    let pts: Vec<&(f64, f64)> = samples.iter().filter(|(x, _)| *x < width).collect();
    if pts.len() < 8 {
        return Err(FlowError::RefitFailed(format!("blend width {width:.4} under-resolved")));
    }
    // scaled monomials (x/width)^k keep the normal equations well conditioned
    let mut ata = BandMatrix::zeros(5, 4, 4);
    let mut atb = vec![0.0; 5];
    for (x, f) in pts {
        let u = x / width;
        let basis: Vec<f64> = (1..=5).map(|k| u.powi(k)).collect();
        for i in 0..5 {
            atb[i] += basis[i] * f;
            for j in 0..5 {
                ata.add(i, j, basis[i] * basis[j]);
            }
        }
    }
    let c = ata.factor()?.solve(&atb);
    Ok([c[0] / width, c[2] / width.powi(3), c[4] / width.powi(5)])
}

/// Cosine coefficients a_k of a function sampled at s_j = j/M, k = 0..=K.
fn cosine_fit(samples: &[f64], modes: usize) -> Vec<f64> {
    let m = samples.len() - 1;
    let mf = m as f64;
    (0..=modes)
        .map(|k| {
            let mut s = 0.5 * (samples[0] + samples[m] * if k % 2 == 0 { 1.0 } else { -1.0 });
            for (j, v) in samples.iter().enumerate().take(m).skip(1) {
                s += v * (PI * (k * j) as f64 / mf).cos();
            }
            let a = 2.0 * s / mf;
            if k == 0 || k == m {
                0.5 * a
            } else {
                a
            }
        })
        .collect()
}

fn profile_theta(a: &[f64], s: f64) -> f64 {
    a.iter().enumerate().map(|(k, c)| c * (k as f64 * PI * s).cos()).sum()
}

/// Adjusts a₀, a₁ for θ(0) = θ₀, θ(1) = θ₁ and then a₀, a₂ (by the bump
/// b(1 − cos 2πs), which keeps the end values) for ∫ sin θ = 0.
fn close_profile(a: &mut Vec<f64>, th0: f64, th1: f64) -> Result<()> {
    if a.len() < 3 {
        a.resize(3, 0.0);
    }
    let rest0: f64 = a[2..].iter().sum();
    let rest1: f64 = a[2..].iter().enumerate().map(|(k, c)| if k % 2 == 0 { *c } else { -c }).sum();
    a[0] = 0.5 * ((th0 - rest0) + (th1 - rest1));
    a[1] = 0.5 * ((th0 - rest0) - (th1 - rest1));
    for _ in 0..50 {
        let f = integrate(0.0, 1.0, 64, |s| profile_theta(a, s).sin());
        if f.abs() < 1e-15 {
            return Ok(());
        }
        let df = integrate(0.0, 1.0, 64, |s| profile_theta(a, s).cos() * (1.0 - (2.0 * PI * s).cos()));
        if df.abs() < 1e-12 {
            break;
        }
        let b = -f / df;
        a[0] += b;
        a[2] -= b;
        if b.abs() < 1e-16 {
            return Ok(());
        }
    }
    let f = integrate(0.0, 1.0, 64, |s| profile_theta(a, s).sin());
    if f.abs() < 1e-12 {
        Ok(())
    } else {
        Err(FlowError::RefitFailed(format!("cannot close the fitted profile (∫ sin θ = {f:.3e})")))
    }
}

fn solve2(m: [[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([(r[0] * m[1][1] - r[1] * m[0][1]) / det, (m[0][0] * r[1] - m[1][0] * r[0]) / det])
}

/// Distance from `p` to the curve near parameter `start`.
fn distance_to_curve(c: &ContinuousCurve, p: [f64; 2], start: f64) -> f64 {
    let mut s = start;
    for _ in 0..30 {
        let (q, d) = c.eval(s);
        let g = d[0] * (q[0] - p[0]) + d[1] * (q[1] - p[1]);
        let step = g / (d[0] * d[0] + d[1] * d[1]);
        s -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let q = c.eval(s).0;
    (q[0] - p[0]).hypot(q[1] - p[1])
}

/// Rebuilds the reference curve from the current state. A state with ρ ≡ 0
/// is returned unchanged.
pub fn reparametrize(state: &FlowState) -> Result<(FlowState, RefitReport)> {
    let n = state.grid.n;
    let values = &state.height.values;
    let frac_before = bound_fractions(&state.map, &state.grid, values);
    if values.iter().all(|v| *v == 0.0) {
        let rep = RefitReport { frac_before, frac_after: frac_before, hausdorff: 0.0, modes: 0, blend_width: 0.0 };
        return Ok((state.clone(), rep));
    }
    let map = &state.map;
    let curve = ContinuousCurve { map, values, h: state.grid.h };
    let table = ArcTable::new(&curve, 8 * n);
    let total = table.total();

    // tangent angle against normalized arc length
    let m = 4 * n;
    let th0 = map.reference.profile.theta(0.0);
    let th1 = map.reference.profile.theta(1.0);
    let mut theta = Vec::with_capacity(m + 1);
    let mut sig_of_s = Vec::with_capacity(m + 1);
    let mut prev = th0;
    for j in 0..=m {
        let sg = table.invert(&curve, j as f64 / m as f64 * total);
        sig_of_s.push(sg);
        let d = curve.eval(sg).1;
        let mut t = d[1].atan2(d[0]);
        while t - prev > PI {
            t -= 2.0 * PI;
        }
        while prev - t > PI {
            t += 2.0 * PI;
        }
        prev = t;
        theta.push(t);
    }
    let modes = (n / 2).max(8);
    let p = state.grid.points(values);
    let chord = p[n][0] - p[0][0];
    let mut last_err = FlowError::RefitFailed("no blending window fits the grid".into());
    for width in BLEND_WIDTHS.iter().copied().filter(|w| *w >= MIN_BLEND_CELLS * state.grid.h) {
        match fit_and_express(state, &curve, &theta, &sig_of_s, chord, p[0], [th0, th1], width, modes) {
            Ok((next, hausdorff)) => {
                let frac_after = bound_fractions(&next.map, &next.grid, &next.height.values);
                let rep = RefitReport { frac_before, frac_after, hausdorff, modes, blend_width: width };
                return Ok((next, rep));
            }
            Err(e @ FlowError::RefitFailed(_)) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

const END_ITER: usize = 8;
const END_TOL: f64 = 1e-14;
const END_STEP: f64 = 1e-2;

struct Expressed {
    map: CurvilinearMap,
    grid: GridFrames,
    rho: Vec<f64>,
    sstar: Vec<f64>,
}

impl Expressed {
    /// ρ₀ − (4ρ₁ − ρ₂)/3 at both ends.
    fn end_residual(&self) -> [f64; 2] {
        let r = &self.rho;
        let n = r.len() - 1;
        [r[0] - (4.0 * r[1] - r[2]) / 3.0, r[n] - (4.0 * r[n - 1] - r[n - 2]) / 3.0]
    }
}

/// Builds the reference from cosine coefficients and intersects each new
/// fibre with the old curve: Ψ_new(σᵢ, q) = c(σ*).
fn express(
    state: &FlowState,
    curve: &ContinuousCurve,
    sig_of_s: &[f64],
    chord: f64,
    origin: [f64; 2],
    a: Vec<f64>,
) -> Result<Expressed> {
    let n = state.grid.n;
    let m = sig_of_s.len() - 1;
    let cos_int = integrate(0.0, 1.0, 64, |s| profile_theta(&a, s).cos());
    if !(cos_int > 0.0) {
        return Err(FlowError::RefitFailed("fitted profile has no positive chord".into()));
    }
    let reference = ReferenceCurve::new(AngleProfile::fitted(state.map.alpha(), a), chord / cos_int, n, Some(origin))
        .map_err(|e| FlowError::RefitFailed(e.to_string()))?;
    let map = CurvilinearMap::new(reference);
    let grid = GridFrames::new(&map, n);
    let mut rho = vec![0.0; n + 1];
    let mut sstar = vec![0.0; n + 1];
    for i in 0..=n {
        let si = i as f64 / n as f64;
        let base = grid.phi[i];
        let v = grid.v[i];
        let mut x = [sig_of_s[(i * m) / n], 0.0];
        let mut converged = false;
        for _ in 0..40 {
            let (c, dc) = curve.eval(x[0]);
            let g = [base[0] + x[1] * v[0] - c[0], base[1] + x[1] * v[1] - c[1]];
            if g[0].hypot(g[1]) < 1e-15 * (1.0 + chord.abs()) {
                converged = true;
                break;
            }
            let jm = [[-dc[0], v[0]], [-dc[1], v[1]]];
            let Some(dx) = solve2(jm, g) else { break };
            x[0] -= dx[0];
            x[1] -= dx[1];
            if dx[0].abs() < 1e-16 && dx[1].abs() < 1e-16 {
                converged = true;
                break;
            }
        }
        if !converged || !x[1].is_finite() {
            return Err(FlowError::RefitFailed(format!("no fibre intersection at σ = {si:.4}")));
        }
        rho[i] = x[1];
        sstar[i] = x[0];
    }
    Ok(Expressed { map, grid, rho, sstar })
}

/// Blends θ to the end values over `width`, fits, and re-expresses the curve.
#[allow(clippy::too_many_arguments)]
fn fit_and_express(
    state: &FlowState,
    curve: &ContinuousCurve,
    theta: &[f64],
    sig_of_s: &[f64],
    chord: f64,
    origin: [f64; 2],
    ends: [f64; 2],
    width: f64,
    modes: usize,
) -> Result<(FlowState, f64)> {
    let n = state.grid.n;
    let m = theta.len() - 1;
    // remove the odd Taylor part at each end so the even extension is smooth
    let s_of = |j: usize| j as f64 / m as f64;
    let left = odd_part(&(0..=m).map(|j| (s_of(j), theta[j] - ends[0])).collect::<Vec<_>>(), width)?;
    let right = odd_part(&(0..=m).rev().map(|j| (1.0 - s_of(j), theta[j] - ends[1])).collect::<Vec<_>>(), width)?;
    let odd = |c: &[f64; 3], x: f64| x * (c[0] + x * x * (c[1] + x * x * c[2]));
    let blended: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let s = s_of(j);
            let mut v = *t;
            if s < width {
                v -= (1.0 - smoothstep(s / width)) * odd(&left, s);
            }
            if 1.0 - s < width {
                v -= (1.0 - smoothstep((1.0 - s) / width)) * odd(&right, 1.0 - s);
            }
            v
        })
        .collect();
    let base = cosine_fit(&blended, modes);
    // even end corrections β s²(1 − S(s/w)), tuned so the intersection heights
    // already satisfy the discrete end condition
    let bump = |x: f64| if x < width { x * x * (1.0 - smoothstep(x / width)) } else { 0.0 };
    let psi = [
        cosine_fit(&(0..=m).map(|j| bump(s_of(j))).collect::<Vec<_>>(), modes),
        cosine_fit(&(0..=m).map(|j| bump(1.0 - s_of(j))).collect::<Vec<_>>(), modes),
    ];
    let build = |beta: [f64; 2]| -> Result<Expressed> {
        let mut a: Vec<f64> = (0..base.len()).map(|k| base[k] + beta[0] * psi[0][k] + beta[1] * psi[1][k]).collect();
        close_profile(&mut a, ends[0], ends[1])?;
        express(state, curve, sig_of_s, chord, origin, a)
    };
    let mut beta = [0.0; 2];
    let mut ex = build(beta)?;
    for _ in 0..END_ITER {
        let r = ex.end_residual();
        if r[0].abs().max(r[1].abs()) < END_TOL {
            break;
        }
        let mut jac = [[0.0; 2]; 2];
        for e in 0..2 {
            let mut b = beta;
            b[e] += END_STEP;
            let rp = build(b)?.end_residual();
            jac[0][e] = (rp[0] - r[0]) / END_STEP;
            jac[1][e] = (rp[1] - r[1]) / END_STEP;
        }
        let Some(d) = solve2(jac, r) else { break };
        beta = [beta[0] - d[0], beta[1] - d[1]];
        ex = build(beta)?;
    }
    let Expressed { map: new_map, grid, mut rho, sstar } = ex;
    grid.constrain(&mut rho);
    let new_points = grid.points(&rho);
    let hausdorff = (0..=n).map(|i| distance_to_curve(curve, new_points[i], sstar[i])).fold(0.0, f64::max);
    let sup = rho.iter().fold(0.0f64, |s, r| s.max(r.abs()));
    if !(sup < new_map.k0 / 3.0) {
        return Err(FlowError::RefitFailed(format!(
            "new heights too large: ‖ρ‖ = {sup:.3e} ≥ K₀/3 = {:.3e}",
            new_map.k0 / 3.0
        )));
    }
    if !(hausdorff < HAUSDORFF_TOL) {
        return Err(FlowError::RefitFailed(format!("curve displaced by {hausdorff:.3e}")));
    }
    let slopes = grid.end_slopes(&rho);
    let height = HeightField::from_values(rho).with_slopes(slopes).with_time(state.t());
    let mut next = FlowState {
        height,
        map: Arc::new(new_map),
        grid: Arc::new(grid),
        history: state.history.clone(),
        reparam_count: state.reparam_count + 1,
        segment_area0: 0.0,
    };
    let d = next.diagnostics(0, 0.0)?;
    next.segment_area0 = d.area;
    next.history.push(d);
    Ok((next, hausdorff))
}
