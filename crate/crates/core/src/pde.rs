//! The quasilinear problem ρt + a ∂σ⁴ρ = f, ∂σρ = 0, b₂ ∂σ³ρ = −g₂ and the
//! Lopatinskii–Shapiro check of its frozen-coefficient model problem.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::geometry::{evaluate, GeometryEval, HeightField, Stencil};
use crate::refcurve::CurvilinearMap;

/// Time weights of the boundary data spaces, ω₁ = 1 − 7/8 + 1/2 and ω₂.
pub const OMEGA_1: f64 = 5.0 / 8.0;
pub const OMEGA_2: f64 = 1.0 / 8.0;

#[derive(Clone, Debug, Serialize)]
pub struct PdeCoefficients {
    /// 1/J⁴ per node.
    pub a: Vec<f64>,
    pub b1: f64,
    /// ⟨Ψq, RΨσ⟩/J⁴ at σ = 0 and σ = 1.
    pub b2: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct NonlinearRhs {
    pub f: Vec<f64>,
    pub g1: [f64; 2],
    pub g2: [f64; 2],
    /// N(ρ) = −(J/⟨Ψq, RΨσ⟩) ∂s²κ, the raw evolution speed ρt.
    pub n: Vec<f64>,
}

fn coefficients_from(g: &GeometryEval) -> Result<PdeCoefficients> {
    let a: Vec<f64> = g.j.iter().map(|j| 1.0 / j.powi(4)).collect();
    if let Some(&bad) = a.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(FlowError::Ellipticity { a: bad });
    }
    let n = a.len() - 1;
    let b2 = [g.inner_product[0] * a[0], g.inner_product[n] * a[n]];
    for (e, b) in b2.iter().enumerate() {
        if *b == 0.0 {
            return Err(FlowError::ZeroBoundaryCoefficient { endpoint: e });
        }
    }
    Ok(PdeCoefficients { a, b1: 1.0, b2 })
}

pub fn coefficients(map: &CurvilinearMap, height: &HeightField) -> Result<PdeCoefficients> {
    coefficients_from(&evaluate(map, height, Stencil::Second)?)
}

fn rhs_from(height: &HeightField, g: &GeometryEval, c: &PdeCoefficients) -> Result<NonlinearRhs> {
    let nn = height.n();
    let mut n = Vec::with_capacity(nn + 1);
    let mut f = Vec::with_capacity(nn + 1);
    for i in 0..=nn {
        let w = g.inner_product[i];
        if !(w > 0.0) {
            return Err(FlowError::VanishingInnerProduct { node: i, w });
        }
        let ni = -(g.j[i] / w) * g.kss[i];
        n.push(ni);
        f.push(c.a[i] * height.derivs(i, Stencil::Second)[4] + ni);
    }
    let d3 = [height.derivs(0, Stencil::Second)[3], height.derivs(nn, Stencil::Second)[3]];
    let g2 = [g.ks[0] - c.b2[0] * d3[0], g.ks[nn] - c.b2[1] * d3[1]];
    Ok(NonlinearRhs { f, g1: [0.0; 2], g2, n })
}

/// f := a ∂σ⁴ρ + N(ρ) and g₂ := ∂sκ − b₂ ∂σ³ρ at the endpoints.
pub fn nonlinear_rhs(map: &CurvilinearMap, height: &HeightField) -> Result<NonlinearRhs> {
    let g = evaluate(map, height, Stencil::Second)?;
    let c = coefficients_from(&g)?;
    rhs_from(height, &g, &c)
}

#[derive(Clone, Debug, Serialize)]
pub struct Nonlinearity {
    pub f: Vec<f64>,
    pub g1: [f64; 2],
    pub g2: [f64; 2],
}

/// F = −(a(ρ) − a(ρ₀)) ∂σ⁴ρ + f and G₂ = −(b₂(ρ) − b₂(ρ₀)) ∂σ³ρ − g₂.
///
/// With these, ρt + a(ρ₀)∂σ⁴ρ = F is ρt = N(ρ), and b₂(ρ₀)∂σ³ρ = G₂ is ∂sκ = 0.
pub fn nonlinearity_f(map: &CurvilinearMap, height: &HeightField, height0: &HeightField) -> Result<Nonlinearity> {
    if height.n() != height0.n() {
        return Err(FlowError::InvalidParameter("heights live on different grids".into()));
    }
    let g = evaluate(map, height, Stencil::Second)?;
    let c = coefficients_from(&g)?;
    let c0 = coefficients(map, height0)?;
    let r = rhs_from(height, &g, &c)?;
    let nn = height.n();
    let f = (0..=nn).map(|i| -(c.a[i] - c0.a[i]) * height.derivs(i, Stencil::Second)[4] + r.f[i]).collect();
    let d3 = [height.derivs(0, Stencil::Second)[3], height.derivs(nn, Stencil::Second)[3]];
    let g2 = [-(c.b2[0] - c0.b2[0]) * d3[0] - r.g2[0], -(c.b2[1] - c0.b2[1]) * d3[1] - r.g2[1]];
    Ok(Nonlinearity { f, g1: [0.0; 2], g2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct LsSample {
    pub lambda: [f64; 2],
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    pub det: [f64; 2],
    /// Direct evaluation μ₁³μ₂ − μ₂³μ₁ of the 2×2 determinant.
    pub det_direct: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct LsReport {
    pub a: f64,
    pub b2: f64,
    pub samples: Vec<LsSample>,
    pub min_abs_det: f64,
    /// max | |det M| − 2|λ|/a | / (2|λ|/a).
    pub modulus_identity_error: f64,
    /// max |det M − direct determinant| / |det M|.
    pub factorization_error: f64,
    pub roots_decay: bool,
    pub symbol_spectrum_ok: bool,
}

impl LsReport {
    pub fn pass(&self) -> bool {
        self.symbol_spectrum_ok
            && self.roots_decay
            && self.min_abs_det > 0.0
            && self.modulus_identity_error < 1e-12
            && self.factorization_error < 1e-12
    }
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Decaying roots (μ₁, μ₂) of μ⁴ = −λ/a.
pub fn ls_roots(lambda: Complex64, a: f64) -> (Complex64, Complex64) {
    let r = lambda.norm() / a;
    let theta = lambda.arg() + PI;
    let (ab, bb) = ((theta / 4.0).cos(), (theta / 4.0).sin());
    let s = r.powf(0.25);
    (Complex64::new(-s * bb, s * ab), Complex64::new(-s * ab, -s * bb))
}

/// det M = μ₁μ₂(μ₁² − μ₂²) for M = [[μ₁³, μ₂³], [μ₁, μ₂]].
pub fn ls_det(lambda: Complex64, a: f64) -> Complex64 {
    let (m1, m2) = ls_roots(lambda, a);
    m1 * m2 * (m1 * m1 - m2 * m2)
}

/// Samples λ on {|λ| ∈ {10⁻³, 1, 10³}, Re λ ≥ 0} with `args` arguments per modulus.
pub fn ls_check(a: f64, b2: f64, args: usize) -> Result<LsReport> {
    if !(a > 0.0) {
        return Err(FlowError::Ellipticity { a });
    }
    if b2 == 0.0 || !b2.is_finite() {
        return Err(FlowError::ZeroBoundaryCoefficient { endpoint: 0 });
    }
    let args = args.max(2);
    let mut samples = Vec::new();
    let mut min_abs_det = f64::INFINITY;
    let mut mod_err: f64 = 0.0;
    let mut fac_err: f64 = 0.0;
    let mut decay = true;
    for &modulus in &[1e-3, 1.0, 1e3] {
        for j in 0..args {
            let arg = -PI / 2.0 + PI * j as f64 / (args - 1) as f64;
            let lambda = Complex64::from_polar(modulus, arg);
            let (m1, m2) = ls_roots(lambda, a);
            decay &= m1.re < 0.0 && m2.re < 0.0;
            let det = m1 * m2 * (m1 * m1 - m2 * m2);
            let direct = m1 * m1 * m1 * m2 - m2 * m2 * m2 * m1;
            let expected = 2.0 * modulus / a;
            min_abs_det = min_abs_det.min(det.norm());
            mod_err = mod_err.max((det.norm() - expected).abs() / expected);
            fac_err = fac_err.max((det - direct).norm() / det.norm());
            samples.push(LsSample {
                lambda: c2(lambda),
                mu1: c2(m1),
                mu2: c2(m2),
                det: c2(det),
                det_direct: c2(direct),
            });
        }
    }
    Ok(LsReport {
        a,
        b2,
        samples,
        min_abs_det,
        modulus_identity_error: mod_err,
        factorization_error: fac_err,
        roots_decay: decay,
        symbol_spectrum_ok: a > 0.0,
    })
}
