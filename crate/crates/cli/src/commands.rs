//! Subcommand bodies. Each writes its artifacts under the output directory
//! and returns a short human-readable summary.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use curveflow::geometry::{HeightField, Stencil};
use curveflow::norms::{self, WeightedSignal};
use curveflow::oracle::{self, formula_check, FormulaCheck, OracleOptions, ParametricCurve};
use curveflow::pde::{coefficients, ls_check, LsReport};
use curveflow::refcurve::{AngleProfile, CurvilinearMap, ReferenceCurve};
use curveflow::solver::{self, advance_or_refit, FlowState};
use serde::Serialize;

use crate::config::{ProfileChoice, RunConfig};

pub const CSV_VERSION: &str = "# curveflow-csv v1";

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub quiet: bool,
}

impl Context {
    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name)?;
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        Ok(path)
    }
}

pub fn build_map(c: &RunConfig, n: usize) -> Result<CurvilinearMap> {
    let profile = match c.profile {
        ProfileChoice::NearArc => AngleProfile::near_arc(c.alpha, c.modes),
        ProfileChoice::Cosine => AngleProfile::cosine(c.alpha, c.amplitude),
    };
    Ok(CurvilinearMap::new(ReferenceCurve::with_chord(profile, c.chord, n)?))
}

/// Reference from the config with initial heights ε K₀ cos 2πσ.
pub fn build_state(c: &RunConfig) -> Result<FlowState> {
    let map = build_map(c, c.n)?;
    let eps = c.perturbation * map.k0;
    let height = HeightField::from_fn(c.n, |s| eps * (2.0 * PI * s).cos()).with_slopes([0.0; 2]);
    Ok(FlowState::new(map, height)?)
}

#[derive(Serialize)]
struct Row {
    t: f64,
    length: f64,
    area: f64,
    max_kappa: f64,
    angle_res_0: f64,
    angle_res_1: f64,
    bound_frac_0: f64,
    bound_frac_1: f64,
    picard_iters: usize,
}

fn write_series(path: &Path, state: &FlowState) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(f, "{CSV_VERSION}")?;
    let mut w = csv::Writer::from_writer(f);
    for d in &state.history {
        w.serialize(Row {
            t: d.t,
            length: d.length,
            area: d.area,
            max_kappa: d.max_kappa,
            angle_res_0: d.angle_res[0],
            angle_res_1: d.angle_res[1],
            bound_frac_0: d.bound_frac[0],
            bound_frac_1: d.bound_frac[1],
            picard_iters: d.picard_iters,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(ctx: &Context) -> Result<String> {
    let c = &ctx.config;
    let mut state = build_state(c)?;
    let mut cfg = c.solver();
    let mut steps = 0usize;
    let mut snapshots = 0usize;
    let mut snap = |state: &FlowState, step: usize| -> Result<()> {
        ctx.write_json(&format!("snapshot_{step:06}.json"), &state.snapshot()?)?;
        snapshots += 1;
        Ok(())
    };
    snap(&state, 0)?;
    let t_stop = c.t_end * (1.0 - 1e-12);
    while state.t() < t_stop {
        cfg.dt = c.dt.min(c.t_end - state.t());
        match advance_or_refit(&state, &cfg) {
            Ok((next, None)) => {
                state = next;
                steps += 1;
                if c.snapshot_every > 0 && steps.is_multiple_of(c.snapshot_every) {
                    snap(&state, steps)?;
                }
            }
            Ok((next, Some(rep))) => {
                if !ctx.quiet {
                    eprintln!(
                        "t = {:.4}: reparametrized, ‖ρ‖/K₀ {:.3} → {:.3}",
                        state.t(),
                        rep.frac_before[0],
                        rep.frac_after[0]
                    );
                }
                state = next;
            }
            Err(e) => return Err(e).with_context(|| format!("step at t = {:.6}", state.t())),
        }
    }
    if c.snapshot_every == 0 || !steps.is_multiple_of(c.snapshot_every) {
        snap(&state, steps)?;
    }
    let csv = ctx.path("timeseries.csv")?;
    write_series(&csv, &state)?;
    let first = state.history[0];
    let last = state.last();
    Ok(format!(
        "{steps} steps to t = {:.4}; length {:.10} → {:.10}; area drift {:.2e}; {} reparametrizations; {} and {snapshots} snapshots",
        last.t,
        first.length,
        last.length,
        (last.area - first.area).abs(),
        state.reparam_count,
        csv.display()
    ))
}

/// Test height 0.01 (1 − cos 2πσ)/2.
pub fn formula_height(s: f64) -> f64 {
    0.01 * (1.0 - (2.0 * PI * s).cos()) / 2.0
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaReport {
    pub levels: Vec<FormulaCheck>,
    /// Least-squares slopes of log error against log N for κ, ∂sκ, ∂s²κ.
    pub orders: [f64; 3],
    /// Same comparison with fourth-order stencils on both sides.
    pub fourth_order: Vec<FormulaCheck>,
}

/// −slope of the least-squares line through (log N, log e).
pub fn fitted_order(ns: &[usize], errs: &[f64]) -> f64 {
    let x: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    -sxy / sxx
}

pub fn formula_report(c: &RunConfig, ns: &[usize]) -> Result<FormulaReport> {
    let mut levels = Vec::new();
    let mut fourth = Vec::new();
    for &n in ns {
        let map = build_map(c, n)?;
        levels.push(formula_check(&map, formula_height, n, Stencil::Second, 2)?);
        fourth.push(formula_check(&map, formula_height, n, Stencil::Fourth, 4)?);
    }
    let col = |f: fn(&FormulaCheck) -> f64| levels.iter().map(f).collect::<Vec<_>>();
    let orders = [
        fitted_order(ns, &col(|l| l.kappa_err)),
        fitted_order(ns, &col(|l| l.ks_err)),
        fitted_order(ns, &col(|l| l.kss_err)),
    ];
    Ok(FormulaReport { levels, orders, fourth_order: fourth })
}

pub fn check_formulas(ctx: &Context) -> Result<String> {
    let n = ctx.config.n;
    let ns: Vec<usize> = (0..4).map(|j| n << j).collect();
    let rep = formula_report(&ctx.config, &ns)?;
    let path = ctx.write_json("formulas.json", &rep)?;
    let mut s = String::from("     N      κ err     ∂sκ err    ∂s²κ err\n");
    for l in &rep.levels {
        s.push_str(&format!("{:6} {:10.3e} {:10.3e} {:10.3e}\n", l.n, l.kappa_err, l.ks_err, l.kss_err));
    }
    s.push_str(&format!(
        "orders {:.2} {:.2} {:.2}; report in {}",
        rep.orders[0],
        rep.orders[1],
        rep.orders[2],
        path.display()
    ));
    Ok(s)
}

#[derive(Serialize)]
struct LsOutput {
    endpoints: Vec<LsReport>,
    pass: bool,
}

pub fn check_ls(ctx: &Context) -> Result<String> {
    let map = build_map(&ctx.config, ctx.config.n)?;
    let co = coefficients(&map, &HeightField::zeros(ctx.config.n))?;
    let n = co.a.len() - 1;
    let endpoints = vec![ls_check(co.a[0], co.b2[0], 64)?, ls_check(co.a[n], co.b2[1], 64)?];
    let pass = endpoints.iter().all(LsReport::pass);
    let mut s = String::new();
    for (e, r) in endpoints.iter().enumerate() {
        s.push_str(&format!(
            "endpoint {e}: a = {:.6e}, b2 = {:.6e}, min |det M| = {:.6e} (2e-3/a = {:.6e}), {}\n",
            r.a,
            r.b2,
            r.min_abs_det,
            2e-3 / r.a,
            if r.pass() { "pass" } else { "FAIL" }
        ));
    }
    let path = ctx.write_json("ls.json", &LsOutput { endpoints, pass })?;
    s.push_str(&format!("report in {}", path.display()));
    if !pass {
        bail!("Lopatinskii–Shapiro check failed\n{s}");
    }
    Ok(s)
}

pub fn measure_contraction(ctx: &Context) -> Result<String> {
    let c = &ctx.config;
    let state = build_state(c)?;
    let t_list: Vec<f64> = (0..4).map(|j| c.t_horizon / (1u32 << j) as f64).collect();
    let dt = c.t_horizon / 40.0;
    let rep = solver::measure_contraction(&state.map, &state.height, &t_list, c.pairs, dt, c.mu, ctx.seed)?;
    let path = ctx.write_json("contraction.json", &rep)?;
    let mut s = String::from("       T        C(T)  Picard\n");
    for i in 0..rep.t_list.len() {
        s.push_str(&format!("{:8.5} {:11.4e} {:7}\n", rep.t_list[i], rep.c_list[i], rep.iteration_counts[i]));
    }
    s.push_str(&format!("report in {}", path.display()));
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct NormArgs {
    pub signal: Option<PathBuf>,
    pub p: f64,
    pub mu: Option<f64>,
    pub s: f64,
    pub k: usize,
    pub t_end: Option<f64>,
}

#[derive(Serialize)]
struct NormOutput {
    p: f64,
    mu: f64,
    t_end: f64,
    samples: usize,
    lp_mu: norms::NormResult,
    sobolev: norms::NormResult,
    seminorm: norms::NormResult,
    /// Absent when s is below the trace threshold 1 − μ + 1/p.
    strich: Option<norms::NormResult>,
}

/// Reads `t,value[,value…]` rows; `#` lines and a non-numeric header are skipped.
pub fn read_signal(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match nums {
            Ok(v) if v.len() >= 2 => {
                times.push(v[0]);
                values.push(v[1..].to_vec());
            }
            Err(_) if i == 0 => continue,
            _ => bail!("{}: row {} is not `t,value[,…]`", path.display(), i + 1),
        }
    }
    Ok((times, values))
}

pub fn norms(ctx: &Context, a: &NormArgs) -> Result<String> {
    let mu = a.mu.unwrap_or(ctx.config.mu);
    let signal = match &a.signal {
        Some(path) => {
            let (times, values) = read_signal(path)?;
            let t_end = a.t_end.or(times.last().copied()).unwrap_or(1.0);
            WeightedSignal::new(times, values, t_end, a.p, mu)?
        }
        None => WeightedSignal::graded(|t| t, a.t_end.unwrap_or(1.0), 64, a.p, mu)?,
    };
    let lp = norms::lp_mu_norm(&signal);
    let sob = norms::sobolev_k_norm(&signal, a.k)?;
    let semi = norms::slobodetskii_seminorm(&signal, a.s)?;
    let strich = if a.s > norms::trace_threshold(mu, a.p) {
        Some(norms::strich_norm(&signal, a.s, &signal.value_at(0.0))?)
    } else {
        None
    };
    let out = NormOutput {
        p: a.p,
        mu,
        t_end: signal.t_end,
        samples: signal.times.len(),
        lp_mu: lp.clone(),
        sobolev: sob.clone(),
        seminorm: semi.clone(),
        strich: strich.clone(),
    };
    let path = ctx.write_json("norms.json", &out)?;
    let mut s = format!(
        "L_(p,mu) {:.12e} (±{:.1e})\nW^{}_(p,mu) {:.12e} (±{:.1e})\n[u]_(s={}) {:.12e} (±{:.1e})\n",
        lp.value, lp.error, a.k, sob.value, sob.error, a.s, semi.value, semi.error
    );
    match strich {
        Some(r) => s.push_str(&format!("strich {:.12e}\n", r.value)),
        None => s.push_str(&format!(
            "strich: no trace for s = {} ≤ 1 − μ + 1/p = {}\n",
            a.s,
            norms::trace_threshold(mu, a.p)
        )),
    }
    s.push_str(&format!("report in {}", path.display()));
    Ok(s)
}

#[derive(Serialize)]
struct OracleRow {
    t: f64,
    length: f64,
    area: f64,
    arc_distance: f64,
}

pub fn oracle(ctx: &Context) -> Result<String> {
    let c = &ctx.config;
    let mut curve = oracle::perturbed_arc(c.alpha, c.chord, c.m, 0.01);
    let opts = OracleOptions { semi_implicit: true, ..OracleOptions::default() };
    let dt = c.dt / 10.0;
    let steps = (c.t_end / dt).round() as usize;
    let path = ctx.path("oracle.csv")?;
    let mut f = BufWriter::new(File::create(&path)?);
    writeln!(f, "{CSV_VERSION}")?;
    let mut w = csv::Writer::from_writer(f);
    let row = |t: f64, c: &ParametricCurve| OracleRow {
        t,
        length: c.length(),
        area: c.area(),
        arc_distance: oracle::best_fit_arc(&c.points, c.alpha).max_distance,
    };
    w.serialize(row(0.0, &curve))?;
    let (l0, a0) = (curve.length(), curve.area());
    for k in 1..=steps {
        curve = oracle::oracle_step(&curve, dt, &opts).with_context(|| format!("oracle step {k}"))?;
        w.serialize(row(k as f64 * dt, &curve))?;
    }
    w.flush()?;
    let final_row = row(steps as f64 * dt, &curve);
    ctx.write_json("oracle_final.json", &curve)?;
    Ok(format!(
        "{steps} steps; length {l0:.8} → {:.8}; area drift {:.2e}; distance to arc {:.2e}; series in {}",
        final_row.length,
        (final_row.area - a0).abs(),
        final_row.arc_distance,
        path.display()
    ))
}
