//! Linearly implicit time stepping wrapped in Picard sub-iterations,
//! ρ^{k+1} = ℒ⁻¹(F(ρ^k), ρ₀), with frozen leading coefficients.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::discrete::{GridFrames, LinearOperator};
use crate::error::{FlowError, Result};
use crate::geometry::{angle_residual, HeightField};
use crate::refcurve::CurvilinearMap;
pub use crate::refit::{reparametrize, RefitReport};

/// Largest endpoint slope accepted by the compatibility gate.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
}

impl Scheme {
    pub fn theta(self) -> f64 {
        match self {
            Scheme::BackwardEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
    /// Evaluate F at ρ₀ only (the affine case).
    pub frozen: bool,
    /// Bound fraction at which the state must be reparametrized.
    pub threshold: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-12, max_iter: 50, scheme: Scheme::BackwardEuler, frozen: false, threshold: 2.0 / 3.0 }
    }
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    /// Heights at t₀ + m·dt, m = 0..=M.
    pub trajectory: Vec<HeightField>,
    /// Picard updates needed before the trajectory stopped changing.
    pub iterations: usize,
    /// sup-norm of each successive update.
    pub updates: Vec<f64>,
}

pub fn check_compatibility(height: &HeightField) -> Result<()> {
    for (e, s) in height.slopes.iter().enumerate() {
        if !(s.abs() <= COMPATIBILITY_TOL) {
            return Err(FlowError::Compatibility { endpoint: e, slope: *s });
        }
    }
    Ok(())
}

/// (‖ρ‖_C/K₀, ‖∂σρ‖_C/K₁) with ∂σρ from nodal differences.
pub fn bound_fractions(map: &CurvilinearMap, grid: &GridFrames, values: &[f64]) -> [f64; 2] {
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dsup = values.windows(2).map(|w| ((w[1] - w[0]) / grid.h).abs()).fold(0.0, f64::max);
    let f1 = if map.k1.is_finite() { dsup / map.k1 } else { 0.0 };
    [sup / map.k0, f1]
}

fn check_bounds(map: &CurvilinearMap, grid: &GridFrames, values: &[f64], threshold: f64) -> Result<()> {
    let f = bound_fractions(map, grid, values);
    if f[0] >= threshold || f[1] >= threshold {
        return Err(FlowError::BoundViolation { frac_rho: f[0], frac_drho: f[1] });
    }
    Ok(())
}

fn check_tube(map: &CurvilinearMap, vals: &[f64]) -> Result<()> {
    for (i, r) in vals.iter().enumerate() {
        if !(r.abs() < map.d) {
            return Err(FlowError::OutsideTube { node: i, rho: *r, d: map.d });
        }
    }
    Ok(())
}

/// Initial heights with the endpoint values projected onto the slope condition.
pub fn admissible_values(grid: &GridFrames, height: &HeightField) -> Vec<f64> {
    let mut v = height.values.clone();
    grid.constrain(&mut v);
    v
}

/// I − dt ∂N(ρ₀) on the free nodes, the discrete ℒ with frozen coefficients.
pub fn assemble_linear(map: &CurvilinearMap, height0: &HeightField, dt: f64) -> Result<LinearOperator> {
    if !(dt > 0.0) {
        return Err(FlowError::InvalidParameter(format!("dt = {dt} must be positive")));
    }
    let grid = GridFrames::new(map, height0.n());
    LinearOperator::new(&grid, &admissible_values(&grid, height0), dt, 1.0)
}

/// F(ρ) = N(ρ) − ∂N(ρ₀)ρ on the free nodes, so that ρt − ∂N(ρ₀)ρ = F(ρ).
pub fn nonlinearity(grid: &GridFrames, op: &LinearOperator, values: &[f64], mid: &[f64]) -> Result<Vec<f64>> {
    let s = grid.speed(values, mid)?;
    let a = op.leading(values);
    Ok((0..grid.n - 1).map(|j| s[j + 1] + a[j]).collect())
}

/// Picard iteration for the whole trajectory on (t₀, t₀ + T].
pub fn picard_solve(
    map: &CurvilinearMap,
    height0: &HeightField,
    t_horizon: f64,
    dt: f64,
    opts: &PicardOptions,
) -> Result<PicardResult> {
    let grid = GridFrames::new(map, height0.n());
    picard_on_grid(map, &grid, height0, t_horizon, dt, opts)
}

pub fn picard_on_grid(
    map: &CurvilinearMap,
    grid: &GridFrames,
    height0: &HeightField,
    t_horizon: f64,
    dt: f64,
    opts: &PicardOptions,
) -> Result<PicardResult> {
    check_compatibility(height0)?;
    if !(dt > 0.0 && t_horizon > 0.0) {
        return Err(FlowError::InvalidParameter("dt and T must be positive".into()));
    }
    let v0 = admissible_values(grid, height0);
    check_tube(map, &v0)?;
    check_bounds(map, grid, &v0, opts.threshold)?;
    let steps = ((t_horizon / dt).round() as usize).max(1);
    let dt = t_horizon / steps as f64;
    let theta = opts.scheme.theta();
    let op = LinearOperator::new(grid, &v0, dt, theta)?;
    let frozen = if opts.frozen { Some(nonlinearity(grid, &op, &v0, &v0)?) } else { None };
    let free = grid.n - 1;
    let mut traj: Vec<Vec<f64>> = vec![v0.clone(); steps + 1];
    let mut updates = Vec::new();
    for k in 1..=opts.max_iter {
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        next.push(v0.clone());
        let mut diff: f64 = 0.0;
        for m in 1..=steps {
            let prev = &next[m - 1];
            let old = &traj[m];
            let mid: Vec<f64> = prev.iter().zip(old).map(|(a, b)| 0.5 * (a + b)).collect();
            let f = match &frozen {
                Some(f) => f.clone(),
                None => nonlinearity(grid, &op, old, &mid)?,
            };
            let mut rhs: Vec<f64> = (0..free).map(|j| prev[j + 1] + dt * theta * f[j]).collect();
            if theta < 1.0 {
                let np = grid.speed(prev, &mid)?;
                for j in 0..free {
                    rhs[j] += dt * (1.0 - theta) * np[j + 1];
                }
            }
            let u = op.solve(grid, &rhs);
            if u.iter().any(|x| !x.is_finite()) {
                return Err(FlowError::PicardDiverged { iterations: k, update: f64::INFINITY });
            }
            check_tube(map, &u)?;
            for i in 0..=grid.n {
                diff = diff.max((u[i] - old[i]).abs());
            }
            next.push(u);
        }
        traj = next;
        updates.push(diff);
        if diff < opts.tol {
            let trajectory = traj
                .into_iter()
                .enumerate()
                .map(|(m, v)| {
                    let s = grid.end_slopes(&v);
                    HeightField::from_values(v).with_slopes(s).with_time(height0.time + m as f64 * dt)
                })
                .collect();
            return Ok(PicardResult { trajectory, iterations: k - 1, updates });
        }
        if !diff.is_finite() || (k > 3 && diff > 1e3 * updates[0]) {
            return Err(FlowError::PicardDiverged { iterations: k, update: diff });
        }
    }
    Err(FlowError::PicardDiverged { iterations: opts.max_iter, update: *updates.last().unwrap_or(&f64::NAN) })
}

/// Time-stepping parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Allowed per-step increase of the energy L − cos α·chord.
    pub length_tol: f64,
    /// Allowed per-step area change relative to the segment's initial area.
    pub area_tol: f64,
    pub bound_threshold: f64,
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 2e-3,
            scheme: Scheme::BackwardEuler,
            picard_tol: 1e-12,
            picard_max_iter: 50,
            length_tol: 1e-10,
            area_tol: 1e-8,
            bound_threshold: 2.0 / 3.0,
            max_halvings: 10,
        }
    }
}

impl SolverConfig {
    pub fn picard(&self) -> PicardOptions {
        PicardOptions {
            tol: self.picard_tol,
            max_iter: self.picard_max_iter,
            scheme: self.scheme,
            frozen: false,
            threshold: self.bound_threshold,
        }
    }
}

/// One row of the running diagnostics.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    pub energy: f64,
    pub max_kappa: f64,
    pub angle_res: [f64; 2],
    pub bound_frac: [f64; 2],
    pub picard_iters: usize,
    pub dt: f64,
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub height: HeightField,
    pub map: Arc<CurvilinearMap>,
    pub grid: Arc<GridFrames>,
    pub history: Vec<Diagnostics>,
    pub reparam_count: usize,
    /// Area at the start of the current segment (between reparametrizations).
    pub segment_area0: f64,
}

impl FlowState {
    pub fn new(map: CurvilinearMap, height: HeightField) -> Result<Self> {
        check_compatibility(&height)?;
        let grid = GridFrames::new(&map, height.n());
        let v = admissible_values(&grid, &height);
        check_tube(&map, &v)?;
        let s = grid.end_slopes(&v);
        let height = HeightField::from_values(v).with_slopes(s).with_time(height.time);
        let mut st = FlowState {
            height,
            map: Arc::new(map),
            grid: Arc::new(grid),
            history: Vec::new(),
            reparam_count: 0,
            segment_area0: 0.0,
        };
        let d = st.diagnostics(0, 0.0)?;
        st.segment_area0 = d.area;
        st.history.push(d);
        Ok(st)
    }

    pub fn t(&self) -> f64 {
        self.height.time
    }

    pub fn diagnostics(&self, picard_iters: usize, dt: f64) -> Result<Diagnostics> {
        let g = &self.grid;
        let v = &self.height.values;
        let max_kappa = self.kappa()?.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        Ok(Diagnostics {
            t: self.t(),
            length: g.length(v),
            area: g.area(v),
            energy: g.energy(v),
            max_kappa,
            angle_res: angle_residual(&self.map, &self.height),
            bound_frac: bound_fractions(&self.map, g, v),
            picard_iters,
            dt,
        })
    }

    pub fn last(&self) -> &Diagnostics {
        self.history.last().expect("history is never empty")
    }

    /// Curve points Ψ(σᵢ, ρᵢ).
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.grid.points(&self.height.values)
    }

    /// Discrete curvature per node; the endpoints repeat their neighbours.
    pub fn kappa(&self) -> Result<Vec<f64>> {
        let v = &self.height.values;
        let (k, _) = self.grid.curvature(v, v)?;
        let mut out = Vec::with_capacity(v.len());
        out.push(k[0]);
        out.extend_from_slice(&k);
        out.push(k[k.len() - 1]);
        Ok(out)
    }
}

/// Curve snapshot {t, σ, ρ, x, y, κ}.
#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub sigma: Vec<f64>,
    pub rho: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl FlowState {
    pub fn snapshot(&self) -> Result<Snapshot> {
        let p = self.points();
        Ok(Snapshot {
            t: self.t(),
            sigma: (0..p.len()).map(|i| self.height.sigma(i)).collect(),
            rho: self.height.values.clone(),
            x: p.iter().map(|q| q[0]).collect(),
            y: p.iter().map(|q| q[1]).collect(),
            kappa: self.kappa()?,
        })
    }
}

/// One accepted step. The step is retried with halved dt (at most
/// `max_halvings` times) when Picard fails or a geometric monitor trips.
pub fn advance(state: &FlowState, cfg: &SolverConfig) -> Result<FlowState> {
    let mut dt = cfg.dt;
    let before = *state.last();
    let opts = cfg.picard();
    for _ in 0..=cfg.max_halvings {
        match picard_on_grid(&state.map, &state.grid, &state.height, dt, dt, &opts) {
            Ok(res) => {
                let mut next = state.clone();
                next.height = res.trajectory.last().unwrap().clone();
                let d = next.diagnostics(res.iterations, dt)?;
                let energy_ok = d.energy <= before.energy + cfg.length_tol;
                let area_ok = (d.area - before.area).abs() <= cfg.area_tol * state.segment_area0.abs();
                if energy_ok && area_ok {
                    if d.bound_frac[0] >= cfg.bound_threshold || d.bound_frac[1] >= cfg.bound_threshold {
                        return Err(FlowError::BoundViolation {
                            frac_rho: d.bound_frac[0],
                            frac_drho: d.bound_frac[1],
                        });
                    }
                    next.history.push(d);
                    return Ok(next);
                }
            }
            Err(e @ (FlowError::BoundViolation { .. } | FlowError::Compatibility { .. })) => return Err(e),
            // leaving the tube |ρ| < (2/3)K₀ is the ‖ρ‖ bound
            Err(FlowError::OutsideTube { rho, .. }) => {
                let f = bound_fractions(&state.map, &state.grid, &state.height.values);
                return Err(FlowError::BoundViolation {
                    frac_rho: f[0].max(rho.abs() / state.map.k0),
                    frac_drho: f[1],
                });
            }
            Err(_) => {}
        }
        dt *= 0.5;
    }
    Err(FlowError::DtUnderflow { dt })
}

/// Advances one step, or rebuilds the reference when the step reports a
/// bound violation. A rebuild does not advance time.
pub fn advance_or_refit(state: &FlowState, cfg: &SolverConfig) -> Result<(FlowState, Option<RefitReport>)> {
    match advance(state, cfg) {
        Ok(next) => Ok((next, None)),
        Err(FlowError::BoundViolation { .. }) => {
            let (next, rep) = reparametrize(state)?;
            Ok((next, Some(rep)))
        }
        Err(e) => Err(e),
    }
}

/// Measured Lipschitz constants of the discrete nonlinearity over shrinking horizons.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub t_list: Vec<f64>,
    pub c_list: Vec<f64>,
    pub iteration_counts: Vec<usize>,
}

/// Squared discrete W⁴ norm, Σₖ h‖δᵏe‖² for k = 0..4 over the nodes where
/// the centered stencils fit.
fn w4_sq(e: &[f64], h: f64) -> f64 {
    let n = e.len() - 1;
    let mut s: f64 = e.iter().map(|x| x * x).sum::<f64>() * h;
    for k in 2..n - 1 {
        let d = [
            (e[k + 1] - e[k - 1]) / (2.0 * h),
            (e[k + 1] - 2.0 * e[k] + e[k - 1]) / (h * h),
            (e[k + 2] - 2.0 * e[k + 1] + 2.0 * e[k - 1] - e[k - 2]) / (2.0 * h * h * h),
            (e[k + 2] - 4.0 * e[k + 1] + 6.0 * e[k] - 4.0 * e[k - 1] + e[k - 2]) / (h * h * h * h),
        ];
        s += h * d.iter().map(|x| x * x).sum::<f64>();
    }
    s
}

/// For each T, pairs ρⱼ(t) = ρ₀ + t gⱼ with random cosine profiles gⱼ (the
/// same gⱼ for every T) give the ratio ‖F(ρ₁) − F(ρ₂)‖ / ‖ρ₁ − ρ₂‖. Both norms
/// are ℓ² in time with weight t^{1−μ}: nodal ℓ² for F, discrete W⁴ plus the
/// time derivative for ρ. The Picard count is from a solve on (0, T].
pub fn measure_contraction(
    map: &CurvilinearMap,
    height0: &HeightField,
    t_list: &[f64],
    pair_count: usize,
    dt: f64,
    mu: f64,
    seed: u64,
) -> Result<ContractionReport> {
    check_compatibility(height0)?;
    let grid = GridFrames::new(map, height0.n());
    let n = grid.n;
    let h = grid.h;
    let v0 = admissible_values(&grid, height0);
    let op = LinearOperator::new(&grid, &v0, dt, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = 0.05 * map.k0.min(1.0);
    let mut profiles = Vec::with_capacity(2 * pair_count);
    for _ in 0..2 * pair_count {
        let c: Vec<f64> = (0..6).map(|k| rng.gen_range(-1.0..1.0) / (1 + k * k) as f64).collect();
        let mut g: Vec<f64> = (0..=n)
            .map(|i| {
                let s = i as f64 * h;
                amp * c.iter().enumerate().map(|(k, ck)| ck * ((k + 1) as f64 * PI * s).cos()).sum::<f64>()
            })
            .collect();
        grid.constrain(&mut g);
        profiles.push(g);
    }
    let mut report = ContractionReport { t_list: t_list.to_vec(), c_list: Vec::new(), iteration_counts: Vec::new() };
    for &t_end in t_list {
        let steps = ((t_end / dt).round() as usize).max(1);
        let dtm = t_end / steps as f64;
        let mut cmax: f64 = 0.0;
        for p in 0..pair_count {
            let (g1, g2) = (&profiles[2 * p], &profiles[2 * p + 1]);
            let (mut num, mut den) = (0.0, 0.0);
            for m in 1..=steps {
                let t = m as f64 * dtm;
                let wt = t.powf(2.0 * (1.0 - mu)) * dtm;
                let r1: Vec<f64> = (0..=n).map(|i| v0[i] + t * g1[i]).collect();
                let r2: Vec<f64> = (0..=n).map(|i| v0[i] + t * g2[i]).collect();
                let f1 = nonlinearity(&grid, &op, &r1, &r1)?;
                let f2 = nonlinearity(&grid, &op, &r2, &r2)?;
                num += wt * h * f1.iter().zip(&f2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let de: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a - b).collect();
                let dgt: f64 = g1.iter().zip(g2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * h;
                den += wt * (w4_sq(&de, h) + dgt);
            }
            if den > 0.0 {
                cmax = cmax.max((num / den).sqrt());
            }
        }
        report.c_list.push(cmax);
        let pic = picard_on_grid(map, &grid, height0, t_end, dt, &PicardOptions::default())?;
        report.iteration_counts.push(pic.iterations);
    }
    Ok(report)
}
