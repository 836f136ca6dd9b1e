//! Forward-mode jets.
//!
//! [`Dual1`] carries a value and its gradient, [`Dual2`] adds the Hessian in
//! packed upper-triangular storage, so the Hessian is symmetric by
//! construction. Both use fixed-capacity arrays of [`MAX_DIM`] slots; only the
//! first `n` slots are live.

/// Largest chart dimension the jets support.
pub const MAX_DIM: usize = 8;
const TRI: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Numeric type a [`Tape`](super::Tape) can be evaluated on.
pub trait Scalar: Clone + Send + Sync {
    /// Highest derivative order carried (0 for plain numbers).
    const ORDER: u8;
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
    fn scale(&self, c: f64) -> Self;
}

impl Scalar for f64 {
    const ORDER: u8 = 0;
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

/// Value plus gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual1 {
    pub v: f64,
    pub d: [f64; MAX_DIM],
    pub n: u8,
}

impl Dual1 {
    /// The `i`-th coordinate of an `n`-dimensional chart, seeded at `value`.
    pub fn variable(value: f64, i: usize, n: usize) -> Self {
        let mut d = [0.0; MAX_DIM];
        d[i] = 1.0;
        Dual1 { v: value, d, n: n as u8 }
    }

    pub fn grad(&self, n: usize) -> &[f64] {
        &self.d[..n]
    }
}

impl Scalar for Dual1 {
    const ORDER: u8 = 1;
    fn constant(c: f64) -> Self {
        Dual1 { v: c, d: [0.0; MAX_DIM], n: 0 }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let mut d = [0.0; MAX_DIM];
        for i in 0..n as usize {
            d[i] = self.d[i] + o.d[i];
        }
        Dual1 { v: self.v + o.v, d, n }
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let mut d = [0.0; MAX_DIM];
        for i in 0..n as usize {
            d[i] = self.d[i] - o.d[i];
        }
        Dual1 { v: self.v - o.v, d, n }
    }
    fn mul(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let mut d = [0.0; MAX_DIM];
        for i in 0..n as usize {
            d[i] = self.v * o.d[i] + o.v * self.d[i];
        }
        Dual1 { v: self.v * o.v, d, n }
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        let mut d = [0.0; MAX_DIM];
        for i in 0..self.n as usize {
            d[i] = f1 * self.d[i];
        }
        Dual1 { v: f0, d, n: self.n }
    }
    fn scale(&self, c: f64) -> Self {
        let mut d = [0.0; MAX_DIM];
        for i in 0..self.n as usize {
            d[i] = c * self.d[i];
        }
        Dual1 { v: c * self.v, d, n: self.n }
    }
}

/// Value, gradient and packed symmetric Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d: [f64; MAX_DIM],
    h: [f64; TRI],
    pub n: u8,
}

impl Dual2 {
    pub fn variable(value: f64, i: usize, n: usize) -> Self {
        let mut d = [0.0; MAX_DIM];
        d[i] = 1.0;
        Dual2 { v: value, d, h: [0.0; TRI], n: n as u8 }
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[tri(i, j)]
    }
}

impl Scalar for Dual2 {
    const ORDER: u8 = 2;
    fn constant(c: f64) -> Self {
        Dual2 { v: c, d: [0.0; MAX_DIM], h: [0.0; TRI], n: 0 }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let nn = n as usize;
        let mut r = Dual2 { v: self.v + o.v, d: [0.0; MAX_DIM], h: [0.0; TRI], n };
        for i in 0..nn {
            r.d[i] = self.d[i] + o.d[i];
        }
        for k in 0..nn * (nn + 1) / 2 {
            r.h[k] = self.h[k] + o.h[k];
        }
        r
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let nn = n as usize;
        let mut r = Dual2 { v: self.v - o.v, d: [0.0; MAX_DIM], h: [0.0; TRI], n };
        for i in 0..nn {
            r.d[i] = self.d[i] - o.d[i];
        }
        for k in 0..nn * (nn + 1) / 2 {
            r.h[k] = self.h[k] - o.h[k];
        }
        r
    }
    fn mul(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let nn = n as usize;
        let mut r = Dual2 { v: self.v * o.v, d: [0.0; MAX_DIM], h: [0.0; TRI], n };
        for i in 0..nn {
            r.d[i] = self.v * o.d[i] + o.v * self.d[i];
        }
        for j in 0..nn {
            for i in 0..=j {
                let k = tri(i, j);
                r.h[k] = self.v * o.h[k]
                    + o.v * self.h[k]
                    + (self.d[i] * o.d[j] + self.d[j] * o.d[i]);
            }
        }
        r
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let nn = self.n as usize;
        let mut r = Dual2 { v: f0, d: [0.0; MAX_DIM], h: [0.0; TRI], n: self.n };
        for i in 0..nn {
            r.d[i] = f1 * self.d[i];
        }
        for j in 0..nn {
            for i in 0..=j {
                let k = tri(i, j);
                r.h[k] = f1 * self.h[k] + f2 * (self.d[i] * self.d[j]);
            }
        }
        r
    }
    fn scale(&self, c: f64) -> Self {
        let nn = self.n as usize;
        let mut r = Dual2 { v: c * self.v, d: [0.0; MAX_DIM], h: [0.0; TRI], n: self.n };
        for i in 0..nn {
            r.d[i] = c * self.d[i];
        }
        for k in 0..nn * (nn + 1) / 2 {
            r.h[k] = c * self.h[k];
        }
        r
    }
}

/// Value, gradient and Hessian of one expression at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

impl Jet2 {
    pub(crate) fn from_dual(d: &Dual2, n: usize) -> Self {
        Jet2 {
            value: d.v,
            grad: d.d[..n].to_vec(),
            hess: (0..n).map(|i| (0..n).map(|j| d.hess(i, j)).collect()).collect(),
        }
    }
}
