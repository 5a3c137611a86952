//! Gauss–Legendre rules.
#![allow(clippy::excessive_precision)]

const GL8_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329_0, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] =
    [0.362_683_783_378_362_0, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Nodes and weights of the 8-point rule mapped to `[a, b]`.
pub fn gl8(a: f64, b: f64) -> [(f64, f64); 8] {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for k in 0..4 {
        out[2 * k] = (m - r * GL8_X[k], r * GL8_W[k]);
        out[2 * k + 1] = (m + r * GL8_X[k], r * GL8_W[k]);
    }
    out
}

pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let w = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * w;
        for (x, wt) in gl8(lo, lo + w) {
            s += wt * f(x);
        }
    }
    s
}

/// Integral over `[a, b]` with panels graded geometrically toward `a`
/// (ratio `q`, `levels` refinements), which handles integrable endpoint
/// singularities of power type at `a`.
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    levels: usize,
    q: f64,
    panels_per_level: usize,
    mut f: F,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut s = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = a + (hi - a) * q;
        s += integrate(lo, hi, panels_per_level, &mut f);
        hi = lo;
    }
    s + integrate(a, hi, panels_per_level, &mut f)
}
