//! Temporally weighted norms on J = (0, T) and numerical probes of the
//! product and embedding estimates.
//!
//! Signals are sampled; between samples they are interpolated linearly (and
//! extrapolated linearly on [0, t₀]). Every integral is taken panel by panel
//! with tanh-sinh quadrature, which copes with the t^{(1−μ)p} weight at 0 and
//! with the kernel |t − τ|^{−1−sp} at the panel ends.

use quadrature::double_exponential;
use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::fd;
use crate::quad::gl8;

/// Per-panel target of the tanh-sinh rule.
pub const QUAD_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct WeightedSignal {
    pub times: Vec<f64>,
    /// One vector per sample; scalar signals have length-one vectors.
    pub values: Vec<Vec<f64>>,
    pub t_end: f64,
    pub p: f64,
    pub mu: f64,
}

impl WeightedSignal {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>, t_end: f64, p: f64, mu: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(FlowError::EmptySignal);
        }
        if times.len() != values.len() {
            return Err(FlowError::InvalidParameter("times and values differ in length".into()));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(FlowError::InvalidParameter(format!("p = {p} must be ≥ 1")));
        }
        if !(mu > 1.0 / p && mu <= 1.0) {
            return Err(FlowError::InvalidParameter(format!("μ = {mu} outside (1/p, 1]")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(FlowError::InvalidParameter(format!("T = {t_end} must be positive")));
        }
        if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) || times[times.len() - 1] > t_end {
            return Err(FlowError::InvalidParameter("times must increase strictly inside (0, T]".into()));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite())) {
            return Err(FlowError::InvalidParameter("values must be finite vectors of one length".into()));
        }
        Ok(Self { times, values, t_end, p, mu })
    }

    pub fn scalar(times: Vec<f64>, values: Vec<f64>, t_end: f64, p: f64, mu: f64) -> Result<Self> {
        Self::new(times, values.into_iter().map(|v| vec![v]).collect(), t_end, p, mu)
    }

    /// Samples `f` at tⱼ = T(j/m)², j = 1..m.
    pub fn graded<F: Fn(f64) -> f64>(f: F, t_end: f64, m: usize, p: f64, mu: f64) -> Result<Self> {
        let times = graded_times(t_end, m);
        let values = times.iter().map(|t| f(*t)).collect();
        Self::scalar(times, values, t_end, p, mu)
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    fn with_values(&self, values: Vec<Vec<f64>>) -> Self {
        Self { values, ..self.clone() }
    }

    /// Panel ends: 0, the sample times, and T.
    fn breaks(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.times.len() + 2);
        b.push(0.0);
        b.extend_from_slice(&self.times);
        if self.t_end > self.times[self.times.len() - 1] {
            b.push(self.t_end);
        }
        b
    }

    /// Index of the linear piece used at t.
    fn piece(&self, t: f64) -> usize {
        let n = self.times.len();
        if n == 1 {
            return 0;
        }
        self.times.partition_point(|x| *x < t).clamp(1, n - 1) - 1
    }

    fn slope(&self, j: usize, e: usize) -> f64 {
        if self.times.len() == 1 {
            return 0.0;
        }
        (self.values[j + 1][e] - self.values[j][e]) / (self.times[j + 1] - self.times[j])
    }

    fn at(&self, t: f64, e: usize) -> f64 {
        let j = self.piece(t);
        self.values[j][e] + self.slope(j, e) * (t - self.times[j])
    }

    /// The interpolant at t (linear extrapolation outside the samples).
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        (0..self.dim()).map(|e| self.at(t, e)).collect()
    }

    fn norm_at(&self, t: f64) -> f64 {
        (0..self.dim()).map(|e| self.at(t, e).powi(2)).sum::<f64>().sqrt()
    }

    fn diff_norm(&self, t: f64, tau: f64) -> f64 {
        (0..self.dim()).map(|e| (self.at(t, e) - self.at(tau, e)).powi(2)).sum::<f64>().sqrt()
    }

    /// Euclidean norm of the slope of the piece containing t.
    fn slope_norm(&self, t: f64) -> f64 {
        let j = self.piece(t);
        (0..self.dim()).map(|e| self.slope(j, e).powi(2)).sum::<f64>().sqrt()
    }

    /// The signal divided by its largest sample norm, and that norm. The
    /// quadrature tolerance is absolute, so integrating the normalized signal
    /// keeps every norm exactly homogeneous.
    fn normalized(&self) -> (Self, f64) {
        let scale = self.values.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return (self.clone(), 1.0);
        }
        (self.with_values(self.values.iter().map(|v| v.iter().map(|x| x / scale).collect()).collect()), scale)
    }

    fn weight_exponent(&self) -> f64 {
        (1.0 - self.mu) * self.p
    }
}

pub fn graded_times(t_end: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|j| t_end * (j as f64 / m as f64).powi(2)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NormKind {
    Lebesgue,
    Sobolev { k: usize },
    Seminorm { s: f64 },
    Slobodetskii { s: f64 },
    Strich { s: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct NormResult {
    pub value: f64,
    /// Quadrature error estimate of `value`.
    pub error: f64,
    pub kind: NormKind,
}

/// ∫ₐᵇ f with the error estimate of the tanh-sinh rule.
fn panel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let o = double_exponential::integrate(f, a, b, QUAD_TOL);
    (o.integral, o.error_estimate)
}

/// Value and error of I^{1/p} from the integral I and its error.
fn root(i: f64, di: f64, p: f64) -> (f64, f64) {
    let i = i.max(0.0);
    let v = i.powf(1.0 / p);
    let dv = if i > 0.0 { v / (p * i) * di } else { di.powf(1.0 / p) };
    (v, dv)
}

fn lp_integral(signal: &WeightedSignal) -> (f64, f64) {
    let (signal, scale) = signal.normalized();
    let beta = signal.weight_exponent();
    let b = signal.breaks();
    let (i, di) = b.windows(2).fold((0.0, 0.0), |acc, w| {
        let (v, e) = panel(|t| t.powf(beta) * signal.norm_at(t).powf(signal.p), w[0], w[1]);
        (acc.0 + v, acc.1 + e)
    });
    let sp = scale.powf(signal.p);
    (i * sp, di * sp)
}

/// (∫₀ᵀ t^{(1−μ)p} ‖u‖ᵖ dt)^{1/p}.
pub fn lp_mu_norm(signal: &WeightedSignal) -> NormResult {
    let (i, di) = lp_integral(signal);
    let (value, error) = root(i, di, signal.p);
    NormResult { value, error, kind: NormKind::Lebesgue }
}

/// Derivatives of order 1..=k on the sample grid, from local stencils of k + 3 samples.
pub fn sample_derivatives(signal: &WeightedSignal, k: usize) -> Result<Vec<WeightedSignal>> {
    let n = signal.times.len();
    let width = k + 3;
    if n < width {
        return Err(FlowError::InvalidParameter(format!(
            "{n} samples cannot resolve derivatives of order {k} (need {width})"
        )));
    }
    let mut out = vec![Vec::with_capacity(n); k];
    for i in 0..n {
        let j0 = i.saturating_sub(width / 2).min(n - width);
        let w = fd::weights(signal.times[i], &signal.times[j0..j0 + width], k);
        for (m, row) in out.iter_mut().enumerate() {
            let d =
                (0..signal.dim()).map(|e| (0..width).map(|j| w[m + 1][j] * signal.values[j0 + j][e]).sum()).collect();
            row.push(d);
        }
    }
    Ok(out.into_iter().map(|v| signal.with_values(v)).collect())
}

/// (Σⱼ₌₀ᵏ ‖u⁽ʲ⁾‖ᵖ)^{1/p} with derivatives from finite differences.
pub fn sobolev_k_norm(signal: &WeightedSignal, k: usize) -> Result<NormResult> {
    let derivs = if k == 0 { Vec::new() } else { sample_derivatives(signal, k)? };
    sobolev_k_norm_with(signal, &derivs)
}

/// As [`sobolev_k_norm`] with `derivatives[j − 1]` = u⁽ʲ⁾ supplied.
pub fn sobolev_k_norm_with(signal: &WeightedSignal, derivatives: &[WeightedSignal]) -> Result<NormResult> {
    let (mut i, mut di) = lp_integral(signal);
    for d in derivatives {
        if d.times != signal.times || d.dim() != signal.dim() {
            return Err(FlowError::InvalidParameter("derivative sampled differently".into()));
        }
        let (a, b) = lp_integral(&signal.with_values(d.values.clone()));
        i += a;
        di += b;
    }
    let (value, error) = root(i, di, signal.p);
    Ok(NormResult { value, error, kind: NormKind::Sobolev { k: derivatives.len() } })
}

/// Inner integral ∫₀ᵗ τ^β ‖u(t) − u(τ)‖ᵖ / (t − τ)^{1+sp} dτ.
fn seminorm_inner(signal: &WeightedSignal, b: &[f64], t: f64, s: f64) -> (f64, f64) {
    let (p, beta) = (signal.p, signal.weight_exponent());
    let kernel = 1.0 + s * p;
    let mut sum = (0.0, 0.0);
    for w in b.windows(2) {
        let (a, hi) = (w[0], w[1].min(t));
        if hi <= a {
            break;
        }
        let (v, e) = if hi < t {
            panel(|tau| tau.powf(beta) * signal.diff_norm(t, tau).powf(p) / (t - tau).powf(kernel), a, hi)
        } else {
            // t lies in this piece, where u(t) − u(τ) = u′(t − τ) exactly:
            // the t^β part integrates in closed form, the rest is regular
            let g = signal.slope_norm(t).powf(p);
            let q = p - kernel;
            let width = t - a;
            let exact = t.powf(beta) * g * width.powf(q + 1.0) / (q + 1.0);
            let (v, e) = panel(|r| ((t - r).max(0.0).powf(beta) - t.powf(beta)) * g * r.powf(q), 0.0, width);
            (exact + v, e)
        };
        sum.0 += v;
        sum.1 += e;
    }
    sum
}

fn seminorm_integral(signal: &WeightedSignal, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(FlowError::InvalidParameter(format!("s = {s} outside (0, 1)")));
    }
    let (signal, scale) = signal.normalized();
    let signal = &signal;
    let b = signal.breaks();
    let mut total = (0.0, 0.0);
    let inner_err = std::cell::Cell::new(0.0f64);
    for w in b.windows(2) {
        let (v, e) = panel(
            |t| {
                let (x, dx) = seminorm_inner(signal, &b, t, s);
                inner_err.set(inner_err.get().max(dx));
                x
            },
            w[0],
            w[1],
        );
        total.0 += v;
        total.1 += e;
    }
    total.1 += inner_err.get() * signal.t_end;
    let sp = scale.powf(signal.p);
    Ok((total.0 * sp, total.1 * sp))
}

/// [u]_{W^s_{p,μ}} = (∫₀ᵀ∫₀ᵗ τ^{(1−μ)p} ‖u(t) − u(τ)‖ᵖ / |t − τ|^{1+sp} dτ dt)^{1/p}.
pub fn slobodetskii_seminorm(signal: &WeightedSignal, s: f64) -> Result<NormResult> {
    let (i, di) = seminorm_integral(signal, s)?;
    let (value, error) = root(i, di, signal.p);
    Ok(NormResult { value, error, kind: NormKind::Seminorm { s } })
}

/// ‖u‖_{W^s_{p,μ}} = ‖u‖_{L_{p,μ}} + [u]_{W^s_{p,μ}} for s ∈ (0, 1).
pub fn slobodetskii_norm(signal: &WeightedSignal, s: f64) -> Result<NormResult> {
    let semi = slobodetskii_seminorm(signal, s)?;
    let lp = lp_mu_norm(signal);
    Ok(NormResult { value: lp.value + semi.value, error: lp.error + semi.error, kind: NormKind::Slobodetskii { s } })
}

/// Trace threshold 1 − μ + 1/p above which u(0) is defined.
pub fn trace_threshold(mu: f64, p: f64) -> f64 {
    1.0 - mu + 1.0 / p
}

/// ‖u‖′ = ‖u‖_{W^s_{p,μ}} + ‖u(0)‖.
pub fn strich_norm(signal: &WeightedSignal, s: f64, trace: &[f64]) -> Result<NormResult> {
    let threshold = trace_threshold(signal.mu, signal.p);
    if !(s > threshold) {
        return Err(FlowError::TraceUndefined { s, threshold });
    }
    if trace.len() != signal.dim() {
        return Err(FlowError::InvalidParameter("trace dimension differs from the signal".into()));
    }
    let w = slobodetskii_norm(signal, s)?;
    let tr = trace.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(NormResult { value: w.value + tr, error: w.error, kind: NormKind::Strich { s } })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductProbe {
    pub t_list: Vec<f64>,
    /// Largest ‖fg‖_{1/8} / (‖f‖_{5/8}‖g‖_{1/8}) over the families, per T.
    pub ratios: Vec<f64>,
    /// Set when some f has f(0) ≠ 0; the denominator then carries |f(0)|
    /// as in the estimate for data with nonzero trace.
    pub with_trace: bool,
}

impl ProductProbe {
    pub fn strictly_decreasing(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1] < w[0])
    }
}

/// Ratios for the product estimate W^{5/8}_{2,μ} · W^{1/8}_{2,μ} → W^{1/8}_{2,μ},
/// with `samples` graded samples per horizon.
pub fn product_estimate_probe(
    f_family: &[&dyn Fn(f64) -> f64],
    g_family: &[&dyn Fn(f64) -> f64],
    t_list: &[f64],
    mu: f64,
    samples: usize,
) -> Result<ProductProbe> {
    let with_trace = f_family.iter().any(|f| f(0.0) != 0.0);
    let mut ratios = Vec::with_capacity(t_list.len());
    for &t_end in t_list {
        let mut worst: f64 = 0.0;
        for f in f_family {
            let fs = WeightedSignal::graded(f, t_end, samples, 2.0, mu)?;
            let nf = slobodetskii_norm(&fs, 5.0 / 8.0)?.value;
            let f0 = f(0.0);
            for g in g_family {
                let gs = WeightedSignal::graded(g, t_end, samples, 2.0, mu)?;
                let fg = WeightedSignal::graded(|t| f(t) * g(t), t_end, samples, 2.0, mu)?;
                let num = slobodetskii_norm(&fg, 1.0 / 8.0)?.value;
                let ng = slobodetskii_norm(&gs, 1.0 / 8.0)?.value;
                let den = if f0 != 0.0 { (nf * nf + f0 * f0).sqrt() * ng } else { nf * ng };
                if den > 0.0 {
                    worst = worst.max(num / den);
                }
            }
        }
        ratios.push(worst);
    }
    Ok(ProductProbe { t_list: t_list.to_vec(), ratios, with_trace })
}

/// θ solving k + 1/2 − 1/q = 4(μ − 1/2)(1 − θ) + 4θ.
pub fn embedding_theta(k: usize, q: f64, mu: f64) -> f64 {
    let r = 4.0 * (mu - 0.5);
    (k as f64 + 0.5 - 1.0 / q - r) / (4.0 - r)
}

pub fn exponent_residual(k: usize, q: f64, mu: f64, theta: f64) -> f64 {
    k as f64 + 0.5 - 1.0 / q - (4.0 * (mu - 0.5) * (1.0 - theta) + 4.0 * theta)
}

/// θ = (4 + 1/3 − 4μ)/(4(3/2 − μ)), the case k = 2, q = 6.
pub fn theta_k2_q6(mu: f64) -> f64 {
    (4.0 + 1.0 / 3.0 - 4.0 * mu) / (4.0 * (1.5 - mu))
}

/// θ₁ + θ₂ = 2 − 5/(8(1 − μ + 1/2)) for (k₁, k₂) = (2, 3) and 1/q₁ + 1/q₂ = 1/2.
pub fn theta_sum_k23(mu: f64) -> f64 {
    2.0 - 5.0 / (8.0 * (1.5 - mu))
}

/// μ̃ = μ + (1 − θ)(1 − μ).
pub fn mu_tilde(mu: f64, theta: f64) -> f64 {
    mu + (1.0 - theta) * (1.0 - mu)
}

/// Spatial operations on I = (0, 1) for a function given pointwise.
const SPACE_PANELS: usize = 32;
const FD_STEP: f64 = 1e-2;
const FD_POINTS: usize = 7;

/// ∂ᵐu(x) for m ≤ `max` from a 7-point stencil kept inside [0, 1].
fn space_derivs(u: &dyn Fn(f64) -> f64, x: f64, max: usize) -> Vec<f64> {
    let half = (FD_POINTS / 2) as f64 * FD_STEP;
    let start = (x - half).clamp(0.0, 1.0 - 2.0 * half);
    let xs: Vec<f64> = (0..FD_POINTS).map(|j| start + j as f64 * FD_STEP).collect();
    let w = fd::weights(x, &xs, max);
    let f: Vec<f64> = xs.iter().map(|y| u(*y)).collect();
    w.iter().map(|row| row.iter().zip(&f).map(|(a, b)| a * b).sum()).collect()
}

fn space_nodes() -> Vec<(f64, f64)> {
    let h = 1.0 / SPACE_PANELS as f64;
    (0..SPACE_PANELS).flat_map(|j| gl8(j as f64 * h, (j + 1) as f64 * h)).collect()
}

/// ‖v‖_{W^k_q(I)} = (Σⱼ₌₀ᵏ ‖∂ʲv‖_q^q)^{1/q}.
pub fn space_sobolev(u: &dyn Fn(f64) -> f64, k: usize, q: f64) -> f64 {
    space_nodes()
        .iter()
        .map(|(x, w)| w * space_derivs(u, *x, k).iter().map(|d| d.abs().powf(q)).sum::<f64>())
        .sum::<f64>()
        .powf(1.0 / q)
}

/// ‖v‖_{W^r_2(I)}: integer part plus the full Slobodetskii seminorm of ∂^{⌊r⌋}v.
pub fn space_slobodetskii(u: &dyn Fn(f64) -> f64, r: f64) -> f64 {
    let m = r.floor() as usize;
    let frac = r - m as f64;
    let base = space_sobolev(u, m, 2.0);
    if frac < 1e-12 {
        return base;
    }
    let v = |x: f64| space_derivs(u, x, m)[m];
    // [v]² = 2∫₀¹∫₀ˣ |v(x) − v(y)|² / (x − y)^{1+2s} dy dx
    let inner = |x: f64| panel(|y| (v(x) - v(y)).powi(2) / (x - y).powf(1.0 + 2.0 * frac), 0.0, x).0;
    let semi = 2.0 * panel(inner, 0.0, 1.0).0;
    base + semi.max(0.0).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbedProbe {
    pub k: usize,
    pub q: f64,
    pub mu: f64,
    pub theta: f64,
    pub l: f64,
    pub mu_tilde: f64,
    pub t_list: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Smallest admissible constant lhs/rhs per horizon.
    pub constants: Vec<f64>,
}

impl EmbedProbe {
    /// Largest constant over the horizons; a T-uniform estimate keeps it bounded.
    pub fn max_constant(&self) -> f64 {
        self.constants.iter().fold(0.0, |m, c| m.max(*c))
    }
}

/// Compares ‖u‖_{L_{l,μ̃}(J; W^k_q)} with ‖u‖_{L_∞(J; W^{4(μ−1/2)}_2)} + ‖u‖_{L_{2,μ}(J; W⁴_2)}
/// for l = 2/θ on each horizon, with `samples` graded times.
pub fn embed_probe(
    u: &dyn Fn(f64, f64) -> f64,
    mu: f64,
    k: usize,
    q: f64,
    theta: f64,
    t_list: &[f64],
    samples: usize,
) -> Result<EmbedProbe> {
    let residual = exponent_residual(k, q, mu, theta);
    if residual.abs() > 1e-12 {
        return Err(FlowError::ExponentRelation { residual });
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(FlowError::InvalidParameter(format!("θ = {theta} outside (0, 1]")));
    }
    let l = 2.0 / theta;
    let mt = mu_tilde(mu, theta);
    let r = 4.0 * (mu - 0.5);
    let (mut lhs, mut rhs, mut constants) = (Vec::new(), Vec::new(), Vec::new());
    for &t_end in t_list {
        let times = graded_times(t_end, samples);
        let mut a = Vec::with_capacity(samples);
        let mut sup: f64 = 0.0;
        let mut w4 = Vec::with_capacity(samples);
        for &t in &times {
            let ut = |x: f64| u(t, x);
            a.push(space_sobolev(&ut, k, q));
            sup = sup.max(space_slobodetskii(&ut, r));
            w4.push(space_sobolev(&ut, 4, 2.0));
        }
        let left = lp_mu_norm(&WeightedSignal::scalar(times.clone(), a, t_end, l, mt)?).value;
        let right = sup + lp_mu_norm(&WeightedSignal::scalar(times, w4, t_end, 2.0, mu)?).value;
        lhs.push(left);
        rhs.push(right);
        constants.push(if right > 0.0 { left / right } else { 0.0 });
    }
    Ok(EmbedProbe { k, q, mu, theta, l, mu_tilde: mt, t_list: t_list.to_vec(), lhs, rhs, constants })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_forms() {
        let one = WeightedSignal::graded(|_| 1.0, 1.0, 64, 2.0, 1.0).unwrap();
        assert!(rel(lp_mu_norm(&one).value, 1.0) < 1e-10);
        let one = WeightedSignal::graded(|_| 1.0, 1.0, 64, 2.0, 0.875).unwrap();
        assert!(rel(lp_mu_norm(&one).value, 0.8f64.sqrt()) < 1e-10);
        let lin = WeightedSignal::graded(|t| t, 1.0, 64, 2.0, 0.875).unwrap();
        assert!(rel(lp_mu_norm(&lin).value, (4.0f64 / 13.0).sqrt()) < 1e-10);
        let lin = WeightedSignal::graded(|t| t, 1.0, 64, 2.0, 1.0).unwrap();
        assert!(rel(sobolev_k_norm(&lin, 1).unwrap().value, (4.0f64 / 3.0).sqrt()) < 1e-10);
    }

    #[test]
    fn seminorm_of_linear() {
        let lin = WeightedSignal::graded(|t| t, 1.0, 16, 2.0, 1.0).unwrap();
        let v = slobodetskii_seminorm(&lin, 0.125).unwrap();
        assert!(rel(v.value, (16.0f64 / 77.0).sqrt()) < 1e-9, "{v:?}");
    }

    #[test]
    fn trace_gate() {
        let u = WeightedSignal::graded(|t| t, 1.0, 8, 2.0, 0.875).unwrap();
        assert!(matches!(strich_norm(&u, 0.125, &[0.0]), Err(FlowError::TraceUndefined { .. })));
    }

    #[test]
    fn rejects_bad_signals() {
        assert!(matches!(WeightedSignal::scalar(vec![], vec![], 1.0, 2.0, 1.0), Err(FlowError::EmptySignal)));
        assert!(WeightedSignal::scalar(vec![0.5, 0.25], vec![1.0, 1.0], 1.0, 2.0, 1.0).is_err());
        assert!(WeightedSignal::scalar(vec![0.5], vec![1.0], 1.0, 2.0, 0.4).is_err());
    }
}
