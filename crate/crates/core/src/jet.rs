//! Truncated Taylor arithmetic in one variable.
//!
//! A `Jet` stores normalized Taylor coefficients `c[k] = f^(k)(x)/k!` of a
//! function at a point. Products, quotients and the elementary functions we
//! need are propagated exactly up to the truncation order, which gives exact
//! derivatives of composite expressions without symbolic expansion.

use std::ops::{Add, Mul, Neg, Sub};

pub const ORDER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [f64; ORDER]);

const FACT: [f64; ORDER] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

impl Jet {
    pub const ZERO: Jet = Jet([0.0; ORDER]);

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = v;
        Jet(c)
    }

    /// Build from derivative values `[f, f', f'', ...]`.
    pub fn from_derivs(d: &[f64]) -> Self {
        let mut c = [0.0; ORDER];
        for (k, v) in d.iter().take(ORDER).enumerate() {
            c[k] = v / FACT[k];
        }
        Jet(c)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// k-th derivative value.
    pub fn d(&self, k: usize) -> f64 {
        self.0[k] * FACT[k]
    }

    /// Jet of the derivative; the top coefficient becomes unknown and is zeroed.
    pub fn deriv(&self) -> Jet {
        let mut c = [0.0; ORDER];
        for k in 0..ORDER - 1 {
            c[k] = self.0[k + 1] * (k + 1) as f64;
        }
        Jet(c)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.0;
        for v in c.iter_mut() {
            *v *= s;
        }
        Jet(c)
    }

    pub fn recip(&self) -> Jet {
        let f = &self.0;
        let mut r = [0.0; ORDER];
        r[0] = 1.0 / f[0];
        for k in 1..ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += f[j] * r[k - j];
            }
            r[k] = -s * r[0];
        }
        Jet(r)
    }

    pub fn sqrt(&self) -> Jet {
        let f = &self.0;
        let mut s = [0.0; ORDER];
        s[0] = f[0].sqrt();
        for k in 1..ORDER {
            let mut acc = f[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
            }
            s[k] = acc / (2.0 * s[0]);
        }
        Jet(s)
    }

    /// Real power `f^p` for `f(x) > 0`.
    pub fn powf(&self, p: f64) -> Jet {
        let f = &self.0;
        let mut g = [0.0; ORDER];
        g[0] = f[0].powf(p);
        for k in 1..ORDER {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (p * j as f64 - (k - j) as f64) * f[j] * g[k - j];
            }
            g[k] = acc / (k as f64 * f[0]);
        }
        Jet(g)
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        let f = &self.0;
        let mut s = [0.0; ORDER];
        let mut c = [0.0; ORDER];
        s[0] = f[0].sin();
        c[0] = f[0].cos();
        for k in 1..ORDER {
            let mut as_ = 0.0;
            let mut ac = 0.0;
            for j in 1..=k {
                as_ += j as f64 * f[j] * c[k - j];
                ac -= j as f64 * f[j] * s[k - j];
            }
            s[k] = as_ / k as f64;
            c[k] = ac / k as f64;
        }
        (Jet(s), Jet(c))
    }

    /// Evaluate the polynomial `sum coeffs[i] x^i` at this jet (Horner).
    pub fn poly(&self, coeffs: &[f64]) -> Jet {
        let mut acc = Jet::ZERO;
        for &a in coeffs.iter().rev() {
            acc = acc * *self + Jet::constant(a);
        }
        acc
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.0;
        for k in 0..ORDER {
            c[k] += o.0[k];
        }
        Jet(c)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut c = self.0;
        for k in 0..ORDER {
            c[k] -= o.0[k];
        }
        Jet(c)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; ORDER];
        for k in 0..ORDER {
            let mut s = 0.0;
            for j in 0..=k {
                s += self.0[j] * o.0[k - j];
            }
            c[k] = s;
        }
        Jet(c)
    }
}

/// Planar vector of jets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2(pub Jet, pub Jet);

impl Jet2 {
    pub const ZERO: Jet2 = Jet2(Jet::ZERO, Jet::ZERO);

    pub fn value(&self) -> [f64; 2] {
        [self.0.value(), self.1.value()]
    }

    pub fn d(&self, k: usize) -> [f64; 2] {
        [self.0.d(k), self.1.d(k)]
    }

    pub fn deriv(&self) -> Jet2 {
        Jet2(self.0.deriv(), self.1.deriv())
    }

    pub fn scale_jet(&self, s: Jet) -> Jet2 {
        Jet2(self.0 * s, self.1 * s)
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Jet2(self.0.scale(s), self.1.scale(s))
    }

    /// Rotation by +π/2.
    pub fn rot(&self) -> Jet2 {
        Jet2(-self.1, self.0)
    }

    pub fn dot(&self, o: &Jet2) -> Jet {
        self.0 * o.0 + self.1 * o.1
    }

    /// Scalar cross product `a₁b₂ − a₂b₁` (equals ⟨b, R a⟩).
    pub fn cross(&self, o: &Jet2) -> Jet {
        self.0 * o.1 - self.1 * o.0
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2(self.0 - o.0, self.1 - o.1)
    }
}
