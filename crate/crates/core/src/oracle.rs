//! Independent ground truth: finite-difference geometry of sampled curves and
//! a direct front-tracking discretization of V = −∂ssκ with endpoints sliding
//! on the axis.

use serde::Serialize;

use crate::banded::BandMatrix;
use crate::error::{FlowError, Result};
use crate::fd;
use crate::geometry::{evaluate, menger, HeightField, Stencil};
use crate::jet::{Jet, Jet2};
use crate::refcurve::CurvilinearMap;

/// Polygon with nodes xᵢ, i = 0..M, endpoints on the axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParametricCurve {
    pub alpha: f64,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCurvature {
    pub kappa: Vec<f64>,
    pub ks: Vec<f64>,
    pub kss: Vec<f64>,
}

fn index_derivative(f: &[f64], i: usize, m: usize, order: usize) -> f64 {
    let n = f.len();
    let centered = if m <= 2 { order + 1 } else { order + 3 };
    let half = centered / 2;
    if i >= half && i + half < n {
        fd::uniform_derivative(f, 1.0, i, m, centered)
    } else {
        fd::uniform_derivative(f, 1.0, i, m, m + order)
    }
}

/// Every segment within a factor `ratio` of the mean.
fn check_spacing(points: &[[f64; 2]], ratio: f64) -> Result<()> {
    let segs: Vec<f64> = points.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).collect();
    let mean = segs.iter().sum::<f64>() / segs.len() as f64;
    for (i, s) in segs.iter().enumerate() {
        if !(*s >= mean / ratio && *s <= ratio * mean) {
            return Err(FlowError::DegenerateSpacing { node: i });
        }
    }
    Ok(())
}

/// κ, ∂sκ, ∂s²κ of sampled points by second-order differences in the node index.
pub fn oracle_curvature(points: &[[f64; 2]]) -> Result<OracleCurvature> {
    oracle_curvature_order(points, 2)
}

/// Same as [`oracle_curvature`] with a selectable (even) order of the stencils.
///
/// The derivatives x′, …, x⁗ of the samples with respect to the node index are
/// taken pointwise (centered where the stencil fits, one-sided otherwise) and
/// combined through κ = x′ × x″/|x′|³, ∂s = |x′|⁻¹ ∂; no difference quotient is
/// applied to an already differenced quantity.
pub fn oracle_curvature_order(points: &[[f64; 2]], order: usize) -> Result<OracleCurvature> {
    let m = points.len();
    if m < 9 {
        return Err(FlowError::InvalidParameter(format!("{m} points, need at least 9")));
    }
    check_spacing(points, 1e12)?;
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let mut out = OracleCurvature { kappa: vec![0.0; m], ks: vec![0.0; m], kss: vec![0.0; m] };
    for i in 0..m {
        let mut dx = [0.0; 5];
        let mut dy = [0.0; 5];
        dx[0] = xs[i];
        dy[0] = ys[i];
        for k in 1..=4 {
            dx[k] = index_derivative(&xs, i, k, order);
            dy[k] = index_derivative(&ys, i, k, order);
        }
        let x = Jet2(Jet::from_derivs(&dx), Jet::from_derivs(&dy));
        let d1 = x.deriv();
        let d2 = d1.deriv();
        let speed = d1.dot(&d1).sqrt().recip();
        let kappa = d1.cross(&d2) * speed * speed * speed;
        let ks = kappa.deriv() * speed;
        let kss = ks.deriv() * speed;
        out.kappa[i] = kappa.value();
        out.ks[i] = ks.value();
        out.kss[i] = kss.value();
    }
    Ok(out)
}

/// Circular arc of the given chord meeting the axis at angle α, with `m + 1`
/// equally spaced nodes traversed from left to right.
pub fn equilibrium_arc(alpha: f64, chord: f64, m: usize) -> ParametricCurve {
    let r = chord / (2.0 * alpha.sin());
    let cy = -r * alpha.cos();
    let points = (0..=m)
        .map(|i| {
            let u = i as f64 / m as f64;
            let phi = std::f64::consts::FRAC_PI_2 + alpha - 2.0 * alpha * u;
            [r * phi.cos(), cy + r * phi.sin()]
        })
        .map(|mut p| {
            if p[1].abs() < 1e-15 * chord {
                p[1] = 0.0;
            }
            p
        })
        .collect::<Vec<_>>();
    let mut c = ParametricCurve { alpha, points };
    c.points[0][1] = 0.0;
    c.points[m][1] = 0.0;
    c
}

/// Equilibrium arc with the interior nodes pushed radially by ε R sin(2πj/M).
pub fn perturbed_arc(alpha: f64, chord: f64, m: usize, eps: f64) -> ParametricCurve {
    let mut c = equilibrium_arc(alpha, chord, m);
    let r = chord / (2.0 * alpha.sin());
    let centre = [0.5 * (c.points[0][0] + c.points[m][0]), -r * alpha.cos()];
    for j in 1..m {
        let p = c.points[j];
        let f = 1.0 + eps * (2.0 * std::f64::consts::PI * j as f64 / m as f64).sin();
        c.points[j] = [centre[0] + f * (p[0] - centre[0]), centre[1] + f * (p[1] - centre[1])];
    }
    c
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Solve (I + dt ℓ̄⁻⁴ δ⁴) δ = dt V instead of the explicit update.
    pub semi_implicit: bool,
    /// Relaxation factor of the tangential redistribution (0 disables it).
    pub redistribute: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { semi_implicit: false, redistribute: 0.5 }
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

impl ParametricCurve {
    pub fn m(&self) -> usize {
        self.points.len() - 1
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| norm(sub(w[1], w[0]))).collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Signed area ∫ y dx between the polygon and the axis.
    pub fn area(&self) -> f64 {
        self.points.windows(2).map(|w| 0.5 * (w[0][1] + w[1][1]) * (w[1][0] - w[0][0])).sum()
    }

    /// Nodal curvature: circumcircle curvature, with the end nodes using a ghost
    /// reflected across the prescribed normal line.
    pub fn nodal_curvature(&self) -> Vec<f64> {
        let p = &self.points;
        let m = self.m();
        let (ca, sa) = (self.alpha.cos(), self.alpha.sin());
        let ghost = |x0: [f64; 2], x1: [f64; 2], t: [f64; 2]| {
            let d = sub(x1, x0);
            let s = 2.0 * (d[0] * t[0] + d[1] * t[1]);
            [x0[0] + d[0] - s * t[0], x0[1] + d[1] - s * t[1]]
        };
        let mut k = vec![0.0; m + 1];
        for i in 1..m {
            k[i] = menger(p[i - 1], p[i], p[i + 1]);
        }
        k[0] = menger(ghost(p[0], p[1], [ca, sa]), p[0], p[1]);
        k[m] = menger(p[m - 1], p[m], ghost(p[m], p[m - 1], [ca, -sa]));
        k
    }

    /// Normal velocity V = −∂s²κ per node, with ∂sκ = 0 imposed at the ends.
    pub fn velocity(&self) -> Vec<f64> {
        let m = self.m();
        let k = self.nodal_curvature();
        let l = self.segment_lengths();
        let flux: Vec<f64> = (0..m).map(|i| (k[i + 1] - k[i]) / l[i]).collect();
        let mut v = vec![0.0; m + 1];
        v[0] = -flux[0] / (0.5 * l[0]);
        v[m] = flux[m - 1] / (0.5 * l[m - 1]);
        for i in 1..m {
            let w = 0.5 * norm(sub(self.points[i + 1], self.points[i - 1]));
            v[i] = -(flux[i] - flux[i - 1]) / w;
        }
        v
    }

    /// Largest step of the explicit scheme, ℓ_min⁴/8.
    pub fn explicit_limit(&self) -> f64 {
        let lmin = self.segment_lengths().into_iter().fold(f64::INFINITY, f64::min);
        lmin.powi(4) / 8.0
    }
}

/// One step of the front-tracking scheme.
pub fn oracle_step(curve: &ParametricCurve, dt: f64, opts: &OracleOptions) -> Result<ParametricCurve> {
    check_spacing(&curve.points, 2.0)?;
    let m = curve.m();
    if !opts.semi_implicit && dt > curve.explicit_limit() {
        return Err(FlowError::Stability { dt, limit: curve.explicit_limit() });
    }
    let v = curve.velocity();
    let mut delta: Vec<f64> = v.iter().map(|x| dt * x).collect();
    if opts.semi_implicit {
        let lbar = curve.length() / m as f64;
        let c = dt / lbar.powi(4);
        let mut a = BandMatrix::zeros(m + 1, 2, 2);
        let refl = |j: isize| -> usize {
            let j = if j < 0 { -j } else { j };
            let j = if j > m as isize { 2 * m as isize - j } else { j };
            j as usize
        };
        for i in 0..=m {
            a.add(i, i, 1.0);
            for (o, w) in [(-2isize, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)] {
                a.add(i, refl(i as isize + o), c * w);
            }
        }
        delta = a.factor()?.solve(&delta);
    }
    let p = &curve.points;
    let mut out = p.clone();
    for i in 1..m {
        let t = sub(p[i + 1], p[i - 1]);
        let tn = norm(t);
        let n = [-t[1] / tn, t[0] / tn];
        out[i] = [p[i][0] + delta[i] * n[0], p[i][1] + delta[i] * n[1]];
    }
    let sin_first = (p[1][1] - p[0][1]) / norm(sub(p[1], p[0]));
    let sin_last = (p[m][1] - p[m - 1][1]) / norm(sub(p[m], p[m - 1]));
    out[0][0] -= delta[0] / sin_first;
    out[m][0] -= delta[m] / sin_last;
    out[0][1] = 0.0;
    out[m][1] = 0.0;
    if opts.redistribute > 0.0 {
        let base = out.clone();
        for i in 1..m {
            let target = arc_midpoint(base[i - 1], base[i], base[i + 1]);
            out[i][0] += opts.redistribute * (target[0] - base[i][0]);
            out[i][1] += opts.redistribute * (target[1] - base[i][1]);
        }
    }
    Ok(ParametricCurve { alpha: curve.alpha, points: out })
}

/// Midpoint of the arc from `a` to `c` on the circle through `a`, `b`, `c`.
fn arc_midpoint(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let mid = [0.5 * (a[0] + c[0]), 0.5 * (a[1] + c[1])];
    let ch = sub(c, a);
    let s = 0.5 * norm(ch);
    let n = [-ch[1] / (2.0 * s), ch[0] / (2.0 * s)];
    let k = menger(a, b, c).abs();
    let ks = (k * s).min(1.0);
    let sag = k * s * s / (1.0 + (1.0 - ks * ks).sqrt());
    let side = if (b[0] - mid[0]) * n[0] + (b[1] - mid[1]) * n[1] >= 0.0 { 1.0 } else { -1.0 };
    [mid[0] + side * sag * n[0], mid[1] + side * sag * n[1]]
}

/// Runs `steps` oracle steps.
pub fn oracle_run(curve: &ParametricCurve, dt: f64, steps: usize, opts: &OracleOptions) -> Result<ParametricCurve> {
    let mut c = curve.clone();
    for _ in 0..steps {
        c = oracle_step(&c, dt, opts)?;
    }
    Ok(c)
}

/// Circular arc meeting the axis at angle α: centre (cx, −R cos α), radius R.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArcFit {
    pub cx: f64,
    pub radius: f64,
    /// max over the samples of the distance to the arc.
    pub max_distance: f64,
}

/// Least-squares α-arc through the points (Gauss–Newton on (cx, R)).
pub fn best_fit_arc(points: &[[f64; 2]], alpha: f64) -> ArcFit {
    let c = alpha.cos();
    let chord = points[points.len() - 1][0] - points[0][0];
    let mut cx = 0.5 * (points[0][0] + points[points.len() - 1][0]);
    let mut r = chord / (2.0 * alpha.sin());
    let resid = |cx: f64, r: f64, p: &[f64; 2]| (p[0] - cx).hypot(p[1] + r * c) - r;
    for _ in 0..50 {
        // normal equations for the 2×2 Jacobian
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in points {
            let d = (p[0] - cx).hypot(p[1] + r * c);
            let f = d - r;
            let j1 = -(p[0] - cx) / d;
            let j2 = (p[1] + r * c) * c / d - 1.0;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            b1 += j1 * f;
            b2 += j2 * f;
        }
        let det = a11 * a22 - a12 * a12;
        let dcx = (a22 * b1 - a12 * b2) / det;
        let dr = (a11 * b2 - a12 * b1) / det;
        cx -= dcx;
        r -= dr;
        if dcx.abs().max(dr.abs()) < 1e-15 * r.abs() {
            break;
        }
    }
    let max_distance = points.iter().map(|p| resid(cx, r, p).abs()).fold(0.0, f64::max);
    ArcFit { cx, radius: r, max_distance }
}

/// Chain-rule geometry of a height field against the oracle on its samples.
#[derive(Clone, Debug, Serialize)]
pub struct FormulaCheck {
    pub n: usize,
    /// max |formula − oracle| / max |oracle| for κ, ∂sκ, ∂s²κ.
    pub kappa_err: f64,
    pub ks_err: f64,
    pub kss_err: f64,
}

fn sup_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Samples Ψ(σᵢ, ρ(σᵢ)) on N + 1 nodes and compares [`crate::geometry::evaluate`]
/// (with `stencil`) to [`oracle_curvature_order`] (with `order`).
pub fn formula_check<F: Fn(f64) -> f64>(
    map: &CurvilinearMap,
    rho: F,
    n: usize,
    stencil: Stencil,
    order: usize,
) -> Result<FormulaCheck> {
    let height = HeightField::from_fn(n, &rho);
    let g = evaluate(map, &height, stencil)?;
    let points = (0..=n).map(|i| map.psi_eval(height.sigma(i), height.values[i], 0, 0)).collect::<Result<Vec<_>>>()?;
    let o = oracle_curvature_order(&points, order)?;
    Ok(FormulaCheck {
        n,
        kappa_err: sup_rel(&g.kappa, &o.kappa),
        ks_err: sup_rel(&g.ks, &o.ks),
        kss_err: sup_rel(&g.kss, &o.kss),
    })
}
