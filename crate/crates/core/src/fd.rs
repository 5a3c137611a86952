//! Finite-difference weights on arbitrary stencils (Fornberg's recursion).

/// Weights `w[m][j]` such that `f^(m)(x0) ≈ Σ_j w[m][j] f(x[j])` for m ≤ `max_order`.
pub fn weights(x0: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of order `m` of uniformly sampled data at node `i`, using the
/// `width` nodes closest to `i` that lie inside `0..len` (centered when possible).
pub fn uniform_derivative(f: &[f64], h: f64, i: usize, m: usize, width: usize) -> f64 {
    let len = f.len();
    let width = width.min(len);
    let half = width / 2;
    let start = i.saturating_sub(half).min(len - width);
    let xs: Vec<f64> = (start..start + width).map(|j| j as f64 - i as f64).collect();
    let w = weights(0.0, &xs, m);
    let mut s = 0.0;
    for (k, j) in (start..start + width).enumerate() {
        s += w[m][k] * f[j];
    }
    s / h.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_second_derivative() {
        let w = weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[2][0] - 1.0).abs() < 1e-14);
        assert!((w[2][1] + 2.0).abs() < 1e-14);
        assert!((w[1][2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn one_sided_exact_on_polynomials() {
        let xs: Vec<f64> = (0..6).map(|j| j as f64 * 0.1).collect();
        let w = weights(0.0, &xs, 4);
        // f = x^4 → f'''' = 24
        let s: f64 = xs.iter().zip(&w[4]).map(|(x, c)| c * x.powi(4)).sum();
        assert!((s - 24.0).abs() < 1e-8);
    }
}
