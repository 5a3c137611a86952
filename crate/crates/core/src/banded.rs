//! Banded LU factorization with partial pivoting (LAPACK `gbtrf`-style storage).

use crate::error::FlowError;

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage keeps `kl` extra super-diagonals for pivoting fill-in, so entry
/// `(i, j)` with `j - i ∈ [-kl, ku + kl]` lives at `ab[i][kl + j - i]`.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ab: vec![vec![0.0; width]; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize;
        if off < -(self.kl as isize) || off > (self.ku + self.kl) as isize {
            None
        } else {
            Some((self.kl as isize + off) as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.ab[i][s])
    }

    /// Adds `v` to entry `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let off = j as isize - i as isize;
        assert!(off >= -(self.kl as isize) && off <= self.ku as isize, "entry ({i},{j}) outside band");
        let s = self.slot(i, j).unwrap();
        self.ab[i][s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                y[i] += self.get(i, j) * x[j];
            }
        }
        y
    }

    pub fn factor(mut self) -> Result<BandLu, FlowError> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(FlowError::SingularSystem { row: k });
            }
            piv[k] = p;
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set_unchecked(k, j, b);
                    self.set_unchecked(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let l = self.get(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                self.set_unchecked(i, k, l);
                for j in k + 1..=jmax {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        let v = self.get(i, j) - l * u;
                        self.set_unchecked(i, j, v);
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }

    fn set_unchecked(&mut self, i: usize, j: usize, v: f64) {
        if let Some(s) = self.slot(i, j) {
            self.ab[i][s] = v;
        } else {
            debug_assert!(v == 0.0, "fill outside storage at ({i},{j})");
        }
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let (kl, ku) = (self.m.kl, self.m.ku);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.m.get(i, k) * x[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + ku + kl).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.m.get(k, j) * x[j];
            }
            x[k] = s / self.m.get(k, k);
        }
        x
    }
}
