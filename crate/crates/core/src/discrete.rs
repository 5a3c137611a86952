//! Discrete H⁻¹ gradient flow of the wetting energy on the height grid.
//!
//! Nodes Pᵢ = Ψ(σᵢ, ρᵢ) form a polygon. With E = Σ|P_{i+1} − Pᵢ| − cos α·(x_N − x₀)
//! and A = Σ ½(yᵢ + y_{i+1})(x_{i+1} − xᵢ), the nodal curvature is
//! kⱼ = −∂E/∂ρⱼ / ∂A/∂ρⱼ, fluxes are F_{j+½} = (k_{j+1} − kⱼ)/ℓ_{j+½}, and
//! (∂A/∂ρⱼ) ρ̇ⱼ = −(F_{j+½} − F_{j−½}) with no flux through the ends.
//! The endpoint heights are slaved to their neighbours by the one-sided
//! condition ∂σρ = 0, ρ₀ = (4ρ₁ − ρ₂)/3.
//!
//! This gives dE/dt = −Σ ℓ F² and dA/dt = 0. When ∂A/∂ρ is evaluated at the
//! time-midpoint height, the area is conserved exactly by the time-discrete
//! scheme too (A is quadratic in ρ).

use crate::banded::{BandLu, BandMatrix};
use crate::error::{FlowError, Result};
use crate::quad::gl8;
use crate::refcurve::CurvilinearMap;

/// ρ₀ = c₀ρ₁ + c₁ρ₂ (and mirrored at σ = 1).
pub const END_CONSTRAINT: [f64; 2] = [4.0 / 3.0, -1.0 / 3.0];

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Reference data on the nodes, with cancellation-free increments.
#[derive(Clone, Debug)]
pub struct GridFrames {
    pub n: usize,
    pub h: f64,
    pub phi: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    /// Φ*(σ_{i+1}) − Φ*(σᵢ), integrated directly.
    dphi: Vec<[f64; 2]>,
    dv: Vec<[f64; 2]>,
    /// Reference tangent angle at σ = 0 and σ = 1.
    end_angle: [f64; 2],
    pub cos_alpha: f64,
}

impl GridFrames {
    pub fn new(map: &CurvilinearMap, n: usize) -> Self {
        let h = 1.0 / n as f64;
        let r = &map.reference;
        let mut phi = Vec::with_capacity(n + 1);
        let mut v = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let f = map.frames(i as f64 * h);
            phi.push(f.phi.value());
            v.push(f.v.value());
        }
        // endpoints and fibres there lie on the axis
        for i in [0, n] {
            phi[i][1] = 0.0;
            v[i][1] = 0.0;
        }
        let dphi = (0..n)
            .map(|i| {
                let mut s = [0.0; 2];
                for (x, w) in gl8(i as f64 * h, (i + 1) as f64 * h) {
                    let th = r.profile.theta(x);
                    s[0] += w * th.cos();
                    s[1] += w * th.sin();
                }
                [r.length * s[0], r.length * s[1]]
            })
            .collect();
        let dv = (0..n).map(|i| [v[i + 1][0] - v[i][0], v[i + 1][1] - v[i][1]]).collect();
        GridFrames {
            n,
            h,
            phi,
            v,
            dphi,
            dv,
            end_angle: [r.profile.theta(0.0), r.profile.theta(1.0)],
            cos_alpha: map.alpha().cos(),
        }
    }

    /// Ψ(σᵢ, ρᵢ).
    pub fn position(&self, i: usize, rho: f64) -> [f64; 2] {
        [self.phi[i][0] + rho * self.v[i][0], self.phi[i][1] + rho * self.v[i][1]]
    }

    pub fn points(&self, values: &[f64]) -> Vec<[f64; 2]> {
        values.iter().enumerate().map(|(i, r)| self.position(i, *r)).collect()
    }

    /// Overwrites the endpoint heights with the slope condition.
    pub fn constrain(&self, values: &mut [f64]) {
        let n = self.n;
        let [c0, c1] = END_CONSTRAINT;
        values[0] = c0 * values[1] + c1 * values[2];
        values[n] = c0 * values[n - 1] + c1 * values[n - 2];
    }

    /// One-sided second-order ∂σρ at both ends.
    pub fn end_slopes(&self, values: &[f64]) -> [f64; 2] {
        let n = self.n;
        let h = self.h;
        [
            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h),
            (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h),
        ]
    }

    /// Segment vectors P_{i+1} − Pᵢ.
    pub fn segments(&self, values: &[f64]) -> Vec<[f64; 2]> {
        (0..self.n)
            .map(|i| {
                let (r0, r1) = (values[i], values[i + 1]);
                let d = r1 - r0;
                [
                    self.dphi[i][0] + r1 * self.dv[i][0] + d * self.v[i][0],
                    self.dphi[i][1] + r1 * self.dv[i][1] + d * self.v[i][1],
                ]
            })
            .collect()
    }

    pub fn length(&self, values: &[f64]) -> f64 {
        self.segments(values).iter().map(|d| d[0].hypot(d[1])).sum()
    }

    /// ∫ y dx over the polygon (trapezoidal in x).
    pub fn area(&self, values: &[f64]) -> f64 {
        let p = self.points(values);
        let seg = self.segments(values);
        (0..self.n).map(|i| 0.5 * (p[i][1] + p[i + 1][1]) * seg[i][0]).sum()
    }

    pub fn chord(&self, values: &[f64]) -> f64 {
        self.segments(values).iter().map(|d| d[0]).sum()
    }

    /// L − cos α·chord; non-increasing along the flow.
    pub fn energy(&self, values: &[f64]) -> f64 {
        self.length(values) - self.cos_alpha * self.chord(values)
    }

    /// ∂E/∂ρᵢ for all nodes, from turning angles.
    pub fn energy_gradient(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let seg = self.segments(values);
        let len: Vec<f64> = seg.iter().map(|d| d[0].hypot(d[1])).collect();
        let mut g = vec![0.0; n + 1];
        for i in 1..n {
            let (a, b) = (seg[i - 1], seg[i]);
            let beta = cross(a, b).atan2(dot(a, b));
            let t = [a[0] / len[i - 1], a[1] / len[i - 1]];
            let s = (0.5 * beta).sin();
            g[i] = 2.0 * s * s * dot(t, self.v[i]) - beta.sin() * cross(t, self.v[i]);
        }
        // ends: v is horizontal, so only tₓ − cos α survives
        let end = |seg: [f64; 2], a0: f64| {
            let tau = [a0.cos(), a0.sin()];
            let delta = cross(tau, seg).atan2(dot(tau, seg));
            -2.0 * (a0 + 0.5 * delta).sin() * (0.5 * delta).sin()
        };
        g[0] = -self.v[0][0] * end(seg[0], self.end_angle[0]);
        g[n] = self.v[n][0] * end(seg[n - 1], self.end_angle[1]);
        g
    }

    /// ∂A/∂ρᵢ for all nodes.
    pub fn area_gradient(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let seg = self.segments(values);
        let mut g = vec![0.0; n + 1];
        for i in 1..n {
            let s = [seg[i - 1][0] + seg[i][0], seg[i - 1][1] + seg[i][1]];
            g[i] = 0.5 * cross(s, self.v[i]);
        }
        g[0] = 0.5 * cross(seg[0], self.v[0]);
        g[n] = 0.5 * cross(seg[n - 1], self.v[n]);
        g
    }

    /// Gradient with respect to the free heights ρ₁..ρ_{N−1}.
    pub fn reduce(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let [c0, c1] = END_CONSTRAINT;
        let mut r = g[1..n].to_vec();
        r[0] += c0 * g[0];
        r[1] += c1 * g[0];
        r[n - 2] += c0 * g[n];
        r[n - 3] += c1 * g[n];
        r
    }

    /// (k, ∂A/∂ρ) on the free nodes; ∂A/∂ρ is taken at `mid`.
    pub fn curvature(&self, values: &[f64], mid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ge = self.reduce(&self.energy_gradient(values));
        let ga = self.reduce(&self.area_gradient(mid));
        for (j, a) in ga.iter().enumerate() {
            if !(*a > 0.0) {
                return Err(FlowError::VanishingInnerProduct { node: j + 1, w: *a });
            }
        }
        let k = ge.iter().zip(&ga).map(|(e, a)| -e / a).collect();
        Ok((k, ga))
    }

    /// ρ̇ for all nodes; the ends follow the constraint.
    pub fn speed(&self, values: &[f64], mid: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let (k, ga) = self.curvature(values, mid)?;
        let seg = self.segments(values);
        // flux between free nodes j and j+1 sits on segment j
        let mut flux = vec![0.0; n];
        for j in 1..n - 1 {
            let l = seg[j][0].hypot(seg[j][1]);
            flux[j] = (k[j] - k[j - 1]) / l;
        }
        let mut out = vec![0.0; n + 1];
        for j in 1..n {
            out[j] = -(flux[j] - flux[j - 1]) / ga[j - 1];
        }
        self.constrain(&mut out);
        Ok(out)
    }

    /// Banded ∂ρ̇/∂ρ on the free nodes at `values` (mid point = values).
    pub fn jacobian(&self, values: &[f64]) -> Result<BandMatrix> {
        let n = self.n;
        let m = n - 1;
        let base = self.speed(values, values)?;
        let scale = values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let eps = 1e-7 * (1e-2 + scale);
        let mut jac = BandMatrix::zeros(m, 2, 2);
        for color in 0..5 {
            let mut p = values.to_vec();
            for j in (color..m).step_by(5) {
                p[j + 1] += eps;
            }
            self.constrain(&mut p);
            let s = self.speed(&p, &p)?;
            for col in (color..m).step_by(5) {
                for row in col.saturating_sub(2)..(col + 3).min(m) {
                    jac.add(row, col, (s[row + 1] - base[row + 1]) / eps);
                }
            }
        }
        Ok(jac)
    }
}

/// I − dt θ ∂N(ρ₀) on the free nodes, factored once per interval.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    pub n: usize,
    pub dt: f64,
    pub theta: f64,
    /// ∂N/∂ρ at the interval's initial height.
    pub jacobian: BandMatrix,
    lu: BandLu,
}

impl LinearOperator {
    pub fn new(grid: &GridFrames, values0: &[f64], dt: f64, theta: f64) -> Result<Self> {
        let jacobian = grid.jacobian(values0)?;
        let m = grid.n - 1;
        let mut a = BandMatrix::zeros(m, 2, 2);
        for i in 0..m {
            a.add(i, i, 1.0);
            for j in i.saturating_sub(2)..(i + 3).min(m) {
                a.add(i, j, -dt * theta * jacobian.get(i, j));
            }
        }
        let lu = a.factor()?;
        Ok(LinearOperator { n: grid.n, dt, theta, jacobian, lu })
    }

    /// A₀ρ = −∂N(ρ₀)ρ on the free nodes of a full height vector.
    pub fn leading(&self, values: &[f64]) -> Vec<f64> {
        self.jacobian.mul_vec(&values[1..self.n]).iter().map(|x| -x).collect()
    }

    /// Solves for the free nodes and fills in the ends.
    pub fn solve(&self, grid: &GridFrames, rhs_free: &[f64]) -> Vec<f64> {
        let u = self.lu.solve(rhs_free);
        let mut out = vec![0.0; self.n + 1];
        out[1..self.n].copy_from_slice(&u);
        grid.constrain(&mut out);
        out
    }
}
