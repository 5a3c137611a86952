//! Geometry of Γ = {Ψ(σ, ρ(σ))} as a functional of the height ρ.
//!
//! Everything is computed by exact chain rule: ρ's derivatives at a node are
//! turned into a Taylor jet, composed with the jets of Φ* and of the fiber
//! direction, and κ, ∂sκ, ∂s²κ are read off the resulting jets.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::fd;
use crate::jet::Jet;
use crate::refcurve::CurvilinearMap;

/// J below this multiple of L is treated as a degenerate parametrization.
pub const J_FLOOR: f64 = 1e-8;

/// Finite-difference accuracy for derivative access on a [`HeightField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    Second,
    Fourth,
}

/// Samples of ρ(t, ·) on the uniform grid σᵢ = i/N.
///
/// `slopes` is the trace of ∂σρ at σ = 0 and σ = 1. It is what the angle
/// condition is evaluated on, so it is kept exactly rather than re-estimated
/// from the samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightField {
    pub values: Vec<f64>,
    pub time: f64,
    pub slopes: [f64; 2],
}

impl HeightField {
    pub fn zeros(n: usize) -> Self {
        HeightField { values: vec![0.0; n + 1], time: 0.0, slopes: [0.0; 2] }
    }

    /// Samples `f` on the grid; the endpoint slopes are taken from `f` itself
    /// with a 7th-order one-sided difference at step 10⁻³.
    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Self {
        let values = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
        let step = 1e-3;
        let xs: Vec<f64> = (0..8).map(|k| k as f64 * step).collect();
        let w = fd::weights(0.0, &xs, 1);
        let left: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let right: f64 = xs.iter().zip(&w[1]).map(|(x, c)| -c * f(1.0 - x)).sum();
        HeightField { values, time: 0.0, slopes: [left, right] }
    }

    /// Wraps samples; endpoint slopes are estimated by 6th-order one-sided differences.
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len() - 1;
        let h = 1.0 / n as f64;
        let s0 = fd::uniform_derivative(&values, h, 0, 1, 7);
        let s1 = fd::uniform_derivative(&values, h, n, 1, 7);
        HeightField { values, time: 0.0, slopes: [s0, s1] }
    }

    pub fn with_slopes(mut self, slopes: [f64; 2]) -> Self {
        self.slopes = slopes;
        self
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn sigma(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// [ρ, ∂σρ, …, ∂σ⁴ρ] at node `i`. Centered differences in the interior,
    /// one-sided near the ends; ∂σρ at the endpoints is the stored trace.
    pub fn derivs(&self, i: usize, stencil: Stencil) -> [f64; 5] {
        let n = self.n();
        let h = self.h();
        let v = &self.values;
        let mut d = [v[i], 0.0, 0.0, 0.0, 0.0];
        let (reach, wide, edge) = match stencil {
            Stencil::Second => (2, 5, 6),
            Stencil::Fourth => (3, 7, 8),
        };
        if i >= reach && i + reach <= n {
            if stencil == Stencil::Second {
                d[1] = (v[i + 1] - v[i - 1]) / (2.0 * h);
                d[2] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
                d[3] = (v[i + 2] - 2.0 * v[i + 1] + 2.0 * v[i - 1] - v[i - 2]) / (2.0 * h * h * h);
                d[4] = (v[i + 2] - 4.0 * v[i + 1] + 6.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (h * h * h * h);
            } else {
                for (m, dm) in d.iter_mut().enumerate().skip(1) {
                    *dm = fd::uniform_derivative(v, h, i, m, if m <= 2 { 5 } else { wide });
                }
            }
        } else {
            for (m, dm) in d.iter_mut().enumerate().skip(1) {
                *dm = fd::uniform_derivative(v, h, i, m, edge);
            }
        }
        if i == 0 {
            d[1] = self.slopes[0];
        } else if i == n {
            d[1] = self.slopes[1];
        }
        d
    }

    /// sup |∂σρ| over the nodes.
    pub fn slope_sup(&self, stencil: Stencil) -> f64 {
        (0..=self.n()).fold(0.0, |m, i| m.max(self.derivs(i, stencil)[1].abs()))
    }
}

/// Geometry at one point of Γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointGeometry {
    pub j: f64,
    /// ⟨Ψq, RΨσ⟩ at (σ, ρ(σ)).
    pub w: f64,
    pub tau: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
    pub ks: f64,
    pub kss: f64,
}

/// Evaluates the curve geometry at σ from the derivative values [ρ, …, ∂σ⁴ρ].
pub fn point_geometry(map: &CurvilinearMap, sigma: f64, rho: [f64; 5]) -> Result<PointGeometry> {
    let fr = map.frames(sigma);
    let rj = Jet::from_derivs(&rho);
    let phi = fr.phi + fr.v.scale_jet(rj);
    let d1 = phi.deriv();
    let d2 = d1.deriv();
    let jj = d1.dot(&d1).sqrt();
    let j = jj.value();
    if !(j > J_FLOOR * map.length()) {
        return Err(FlowError::DegenerateMetric { node: 0, j });
    }
    let jinv = jj.recip();
    let kappa = d1.cross(&d2) * jinv * jinv * jinv;
    let ks = kappa.deriv() * jinv;
    let kss = ks.deriv() * jinv;
    let (w0, w1) = fr.w_coeffs();
    let t = d1.value();
    let tau = [t[0] / j, t[1] / j];
    Ok(PointGeometry {
        j,
        w: w0 + w1 * rho[0],
        tau,
        normal: [-tau[1], tau[0]],
        kappa: kappa.value(),
        ks: ks.value(),
        kss: kss.value(),
    })
}

/// Per-node geometry of the curve described by a height field.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryEval {
    pub sigma: Vec<f64>,
    pub j: Vec<f64>,
    pub tau: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub kappa: Vec<f64>,
    pub ks: Vec<f64>,
    pub kss: Vec<f64>,
    pub inner_product: Vec<f64>,
}

impl GeometryEval {
    /// CSV rows `sigma,J,kappa,ks,kss,inner_product`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sigma,J,kappa,ks,kss,inner_product\n");
        for i in 0..self.sigma.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.sigma[i], self.j[i], self.kappa[i], self.ks[i], self.kss[i], self.inner_product[i]
            ));
        }
        s
    }
}

/// Rejects heights leaving the tube |ρ| < d.
pub fn check_tube(map: &CurvilinearMap, height: &HeightField) -> Result<()> {
    for (i, &r) in height.values.iter().enumerate() {
        if !(r.abs() < map.d) {
            return Err(FlowError::OutsideTube { node: i, rho: r, d: map.d });
        }
    }
    Ok(())
}

pub fn evaluate(map: &CurvilinearMap, height: &HeightField, stencil: Stencil) -> Result<GeometryEval> {
    check_tube(map, height)?;
    let n = height.n();
    let mut g = GeometryEval {
        sigma: Vec::with_capacity(n + 1),
        j: Vec::with_capacity(n + 1),
        tau: Vec::with_capacity(n + 1),
        normal: Vec::with_capacity(n + 1),
        kappa: Vec::with_capacity(n + 1),
        ks: Vec::with_capacity(n + 1),
        kss: Vec::with_capacity(n + 1),
        inner_product: Vec::with_capacity(n + 1),
    };
    for i in 0..=n {
        let s = height.sigma(i);
        let p = point_geometry(map, s, height.derivs(i, stencil)).map_err(|e| match e {
            FlowError::DegenerateMetric { j, .. } => FlowError::DegenerateMetric { node: i, j },
            other => other,
        })?;
        g.sigma.push(s);
        g.j.push(p.j);
        g.tau.push(p.tau);
        g.normal.push(p.normal);
        g.kappa.push(p.kappa);
        g.ks.push(p.ks);
        g.kss.push(p.kss);
        g.inner_product.push(p.w);
    }
    Ok(g)
}

/// J(ρ) = |Ψσ + Ψq ∂σρ| at (σ, ρ).
pub fn metric_j(map: &CurvilinearMap, rho: f64, drho: f64, sigma: f64) -> f64 {
    let fr = map.frames(sigma);
    let v = fr.v.value();
    let ps = fr.psi(rho).d(1);
    let t = [ps[0] + drho * v[0], ps[1] + drho * v[1]];
    t[0].hypot(t[1])
}

/// κ at every node (second-order derivative access).
pub fn curvature(map: &CurvilinearMap, height: &HeightField) -> Result<Vec<f64>> {
    Ok(evaluate(map, height, Stencil::Second)?.kappa)
}

/// (∂sκ, ∂s²κ) at every node.
pub fn arc_derivatives_kappa(map: &CurvilinearMap, height: &HeightField) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = evaluate(map, height, Stencil::Second)?;
    Ok((g.ks, g.kss))
}

/// V = ⟨Ψq, RΨσ⟩ ρt / J.
pub fn normal_velocity(map: &CurvilinearMap, height: &HeightField, rho_t: &[f64]) -> Result<Vec<f64>> {
    let g = evaluate(map, height, Stencil::Second)?;
    Ok((0..=height.n()).map(|i| g.inner_product[i] * rho_t[i] / g.j[i]).collect())
}

/// |cos(π − α) − ⟨n_Γ, (0, −1)⟩| at both endpoints.
pub fn angle_residual(map: &CurvilinearMap, height: &HeightField) -> [f64; 2] {
    let c = (std::f64::consts::PI - map.alpha()).cos();
    let n = height.n();
    let mut r = [0.0; 2];
    for (e, (s, i)) in [(0.0, 0), (1.0, n)].into_iter().enumerate() {
        let fr = map.frames(s);
        let v = fr.v.value();
        let ps = fr.psi(height.values[i]).d(1);
        let t = [ps[0] + height.slopes[e] * v[0], ps[1] + height.slopes[e] * v[1]];
        let j = t[0].hypot(t[1]);
        let normal = [-t[1] / j, t[0] / j];
        r[e] = (c + normal[1]).abs();
    }
    r
}

/// Both sides of 1/L ≤ ‖κ‖_C/(√2 sin α) for a sampled curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LengthBound {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates the length bound on samples of a curve parametrized
/// proportionally to arc length, whose end tangents must be (cos α, ±sin α)
/// to within `1e-3`.
pub fn length_bound_check(points: &[[f64; 2]], alpha: f64) -> Result<LengthBound> {
    let m = points.len();
    if m < 9 {
        return Err(FlowError::InvalidParameter("need at least 9 samples".into()));
    }
    let one_sided = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        let t = [-3.0 * a[0] + 4.0 * b[0] - c[0], -3.0 * a[1] + 4.0 * b[1] - c[1]];
        let l = t[0].hypot(t[1]);
        [t[0] / l, t[1] / l]
    };
    let t0 = one_sided(points[0], points[1], points[2]);
    let t1 = one_sided(points[m - 1], points[m - 2], points[m - 3]);
    let dev = (t0[0] - alpha.cos()).hypot(t0[1] - alpha.sin()).max((-t1[0] - alpha.cos()).hypot(-t1[1] + alpha.sin()));
    if dev > 1e-3 {
        return Err(FlowError::TangentPrecondition { deviation: dev });
    }
    let len: f64 = points.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum();
    let kmax = points.windows(3).map(|w| menger(w[0], w[1], w[2]).abs()).fold(0.0, f64::max);
    let lhs = 1.0 / len;
    let rhs = kmax / (SQRT_2 * alpha.sin());
    Ok(LengthBound { lhs, rhs, pass: lhs <= rhs })
}

/// Signed curvature of the circle through three points.
pub fn menger(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1]];
    let v = [c[0] - b[0], c[1] - b[1]];
    let w = [c[0] - a[0], c[1] - a[1]];
    let cr = u[0] * v[1] - u[1] * v[0];
    2.0 * cr / (u[0].hypot(u[1]) * v[0].hypot(v[1]) * w[0].hypot(w[1]))
}

/// (K₀, K₁) of the map; K₁ is +∞ at α = π/2.
pub fn smallness_constants(map: &CurvilinearMap) -> (f64, f64) {
    (map.k0, map.k1)
}
