//! Truncated Taylor series in `z` about `z0` with `conj(z)` frozen at
//! `conj(z0)`. Real-analytic kernels are written as functions of the pair
//! `(z, w)`; since `R_k = 2i d/dz + k/y` never differentiates in `w`, a jet
//! of length `m + 1` carries enough data for `m` raisings.

use rug::Float;

use crate::numerics::HPComplex;

#[derive(Clone, Debug)]
pub(crate) struct Jet {
    c: Vec<HPComplex>,
}

impl Jet {
    pub fn constant(v: HPComplex, len: usize) -> Self {
        let p = v.prec();
        let mut c = vec![HPComplex::zero(p); len];
        c[0] = v;
        Self { c }
    }

    /// `v0 + v1 t`.
    pub fn linear(v0: HPComplex, v1: HPComplex, len: usize) -> Self {
        let mut j = Self::constant(v0, len);
        if len > 1 {
            j.c[1] = v1;
        }
        j
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self) -> &HPComplex {
        &self.c[0]
    }

    fn prec(&self) -> u32 {
        self.c[0].prec()
    }

    pub fn truncate(&self, len: usize) -> Self {
        Self { c: self.c[..len].to_vec() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let p = self.prec();
        let c = (0..n)
            .map(|k| {
                let mut acc = HPComplex::zero(p);
                for i in 0..=k {
                    acc += &self.c[i] * &o.c[k - i];
                }
                acc
            })
            .collect();
        Self { c }
    }

    pub fn scale(&self, k: &HPComplex) -> Self {
        Self { c: self.c.iter().map(|a| a * k).collect() }
    }

    pub fn scale_real(&self, k: &Float) -> Self {
        Self { c: self.c.iter().map(|a| a.scale(k)).collect() }
    }

    /// `h_0 = 1/f_0`, `h_n = -h_0 sum_{k=1}^n f_k h_{n-k}`.
    pub fn recip(&self) -> Self {
        let p = self.prec();
        let h0 = self.c[0].recip();
        let mut h = vec![h0.clone()];
        for n in 1..self.len() {
            let mut acc = HPComplex::zero(p);
            for k in 1..=n {
                acc += &self.c[k] * &h[n - k];
            }
            h.push(-(&acc * &h0));
        }
        Self { c: h }
    }

    /// `g_0 = exp(f_0)`, `g_n = (1/n) sum_{k=1}^n k f_k g_{n-k}`.
    pub fn exp(&self) -> Self {
        let p = self.prec();
        let mut g = vec![self.c[0].exp()];
        for n in 1..self.len() {
            let mut acc = HPComplex::zero(p);
            for k in 1..=n {
                acc += (&self.c[k] * &g[n - k]).scale_i64(k as i64);
            }
            g.push(acc.div_real(&Float::with_val(p, n)));
        }
        Self { c: g }
    }

    /// `d/dz`, one term shorter.
    pub fn derivative(&self) -> Self {
        Self {
            c: (1..self.len()).map(|j| self.c[j].scale_i64(j as i64)).collect(),
        }
    }

    /// `R_k f = 2i f' + k f / y`, one term shorter.
    pub fn raise(&self, weight: i64, inv_y: &Jet) -> Self {
        let n = self.len() - 1;
        let d = self.derivative().scale(&HPComplex::i(self.prec()).scale_i64(2));
        let k = self.truncate(n).mul(&inv_y.truncate(n)).scale_i64(weight);
        d.add(&k)
    }

    fn scale_i64(&self, k: i64) -> Self {
        Self { c: self.c.iter().map(|a| a.scale_i64(k)).collect() }
    }
}
