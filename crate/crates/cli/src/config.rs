//! Flat `key = value` run configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use curveflow::solver::{Scheme, SolverConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("`{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("`{key}` = {value} outside admissible range {range}")]
    OutOfRange { key: &'static str, value: String, range: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileChoice {
    NearArc,
    Cosine,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alpha: f64,
    pub profile: ProfileChoice,
    /// Cosine modes of the near-arc profile.
    pub modes: usize,
    /// Amplitude of the single-cosine profile.
    pub amplitude: f64,
    pub chord: f64,
    /// Initial height ε K₀ cos 2πσ, as the fraction ε.
    pub perturbation: f64,
    pub n: usize,
    /// Oracle nodes.
    pub m: usize,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub mu: f64,
    pub bound_threshold: f64,
    /// Write a JSON snapshot every this many accepted steps (0: final only).
    pub snapshot_every: usize,
    /// Largest horizon of the contraction measurement.
    pub t_horizon: f64,
    pub pairs: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: PI / 2.0,
            profile: ProfileChoice::NearArc,
            modes: 8,
            amplitude: 0.0,
            chord: 2.0,
            perturbation: 0.1,
            n: 128,
            m: 200,
            dt: 2e-3,
            t_end: 0.5,
            scheme: Scheme::BackwardEuler,
            picard_tol: 1e-12,
            picard_max_iter: 50,
            mu: 0.9,
            bound_threshold: 2.0 / 3.0,
            snapshot_every: 50,
            t_horizon: 0.04,
            pairs: 20,
            seed: 1,
            out: PathBuf::from("out"),
        }
    }
}

/// Numbers with optional `pi` factors: `0.5`, `pi/2`, `3*pi/4`, `2e-3`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = s;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = rest[..end].trim();
        let x = match tok {
            "pi" | "π" => PI,
            _ => tok.parse::<f64>().ok()?,
        };
        value = if op == '*' { value * x } else { value / x };
        if end == rest.len() {
            break;
        }
        op = rest[end..].chars().next()?;
        rest = &rest[end + 1..];
    }
    value.is_finite().then_some(value)
}

fn num(key: &str, v: &str) -> Result<f64, ConfigError> {
    parse_number(v).ok_or_else(|| ConfigError::BadValue { key: key.into(), value: v.into() })
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "alpha" => c.alpha = num(k, v)?,
                "profile" => {
                    c.profile = match v {
                        "near_arc" => ProfileChoice::NearArc,
                        "cosine" => ProfileChoice::Cosine,
                        _ => return Err(ConfigError::BadValue { key: k.into(), value: v.into() }),
                    }
                }
                "modes" => c.modes = int(k, v)?,
                "amplitude" => c.amplitude = num(k, v)?,
                "chord" => c.chord = num(k, v)?,
                "perturbation" => c.perturbation = num(k, v)?,
                "n" | "N" => c.n = int(k, v)?,
                "m" | "M" => c.m = int(k, v)?,
                "dt" => c.dt = num(k, v)?,
                "t_end" => c.t_end = num(k, v)?,
                "scheme" => {
                    c.scheme = match v {
                        "euler" | "backward_euler" => Scheme::BackwardEuler,
                        "crank_nicolson" | "cn" => Scheme::CrankNicolson,
                        _ => return Err(ConfigError::BadValue { key: k.into(), value: v.into() }),
                    }
                }
                "picard_tol" => c.picard_tol = num(k, v)?,
                "picard_max_iter" => c.picard_max_iter = int(k, v)?,
                "mu" => c.mu = num(k, v)?,
                "bound_threshold" => c.bound_threshold = num(k, v)?,
                "snapshot_every" => c.snapshot_every = int(k, v)?,
                "t_horizon" => c.t_horizon = num(k, v)?,
                "pairs" => c.pairs = int(k, v)?,
                "seed" => c.seed = int(k, v)?,
                "out" => c.out = PathBuf::from(v),
                _ => return Err(ConfigError::UnknownKey { line: i + 1, key: k.into() }),
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Range checks; returns a warning for μ inside (1/2, 7/8].
    pub fn validate(&self) -> Result<Option<String>, ConfigError> {
        let bad = |key, value: f64, range| Err(ConfigError::OutOfRange { key, value: value.to_string(), range });
        if !(self.alpha > 0.0 && self.alpha < PI) {
            return bad("alpha", self.alpha, "(0, π)");
        }
        if !(self.mu > 0.5 && self.mu <= 1.0) {
            return bad("mu", self.mu, "(1/2, 1], with (7/8, 1] covered by the theory");
        }
        if self.n < 16 {
            return bad("n", self.n as f64, "N ≥ 16");
        }
        if self.m < 16 {
            return bad("m", self.m as f64, "M ≥ 16");
        }
        if !(self.dt > 0.0) {
            return bad("dt", self.dt, "dt > 0");
        }
        if !(self.t_end > 0.0) {
            return bad("t_end", self.t_end, "t_end > 0");
        }
        if !(self.chord > 0.0) {
            return bad("chord", self.chord, "chord > 0");
        }
        if !(self.bound_threshold > 0.0 && self.bound_threshold < 1.0) {
            return bad("bound_threshold", self.bound_threshold, "(0, 1)");
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return bad("picard_tol", self.picard_tol, "tol > 0 with max_iter ≥ 1");
        }
        if !(self.t_horizon > 0.0) || self.pairs == 0 {
            return bad("t_horizon", self.t_horizon, "t_horizon > 0 with pairs ≥ 1");
        }
        if self.modes == 0 {
            return bad("modes", 0.0, "modes ≥ 1");
        }
        Ok((self.mu <= 0.875).then(|| format!("μ = {} lies outside (7/8, 1], where the theory applies", self.mu)))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            scheme: self.scheme,
            picard_tol: self.picard_tol,
            picard_max_iter: self.picard_max_iter,
            bound_threshold: self.bound_threshold,
            ..SolverConfig::default()
        }
    }
}
