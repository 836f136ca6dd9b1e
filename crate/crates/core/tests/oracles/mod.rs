//! Reference computations that share no code with the library's derivative
//! and curvature paths. Included by the core integration tests and by the
//! acceptance suite.
#![allow(dead_code)]

use lorentzlab_core::expr::{Expr, Func};
use lorentzlab_core::MetricField;
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

fn g_at(m: &MetricField, p: &[f64]) -> Mat {
    let g = m.g(p).expect("metric evaluates");
    (0..g.nrows()).map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect()).collect()
}

fn invert(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn shifted(p: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += h;
    q
}

/// Γ^k_ij from central differences of g (4th order).
pub fn fd_christoffel(m: &MetricField, p: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = p.len();
    let ginv = invert(&g_at(m, p));
    // dg[c][a][b] = ∂_c g_ab
    let dg: Vec<Mat> = (0..n)
        .map(|c| {
            let gp1 = g_at(m, &shifted(p, c, h));
            let gm1 = g_at(m, &shifted(p, c, -h));
            let gp2 = g_at(m, &shifted(p, c, 2.0 * h));
            let gm2 = g_at(m, &shifted(p, c, -2.0 * h));
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| (8.0 * (gp1[a][b] - gm1[a][b]) - (gp2[a][b] - gm2[a][b])) / (12.0 * h))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut gam = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gam[k][i][j] = (0..n)
                    .map(|l| 0.5 * ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]))
                    .sum();
            }
        }
    }
    gam
}

/// (R(∂_i,∂_j)∂_k)^l as r[l][i][j][k], with R(X,Y) = [∇_X,∇_Y] − ∇_[X,Y],
/// from nested central differences of the metric.
pub fn fd_riemann(m: &MetricField, p: &[f64], h: f64) -> Vec<Vec<Vec<Vec<f64>>>> {
    let n = p.len();
    let gam = fd_christoffel(m, p, h);
    let dgam: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|c| {
            let a = fd_christoffel(m, &shifted(p, c, h), h);
            let b = fd_christoffel(m, &shifted(p, c, -h), h);
            (0..n)
                .map(|k| (0..n).map(|i| (0..n).map(|j| (a[k][i][j] - b[k][i][j]) / (2.0 * h)).collect()).collect())
                .collect()
        })
        .collect();
    let mut r = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dgam[i][l][j][k] - dgam[j][l][i][k];
                    for s in 0..n {
                        v += gam[l][i][s] * gam[s][j][k] - gam[l][j][s] * gam[s][i][k];
                    }
                    r[l][i][j][k] = v;
                }
            }
        }
    }
    r
}

fn bil(g: &Mat, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in 0..v.len() {
            s += g[i][j] * u[i] * v[j];
        }
    }
    s
}

/// ⟨R(u,v)v, u⟩ / (g(u,u)g(v,v) − g(u,v)²) from [`fd_riemann`].
pub fn fd_sectional(m: &MetricField, p: &[f64], u: &[f64], v: &[f64], h: f64) -> f64 {
    let n = p.len();
    let g = g_at(m, p);
    let r = fd_riemann(m, p, h);
    let mut w = vec![0.0; n];
    for (l, wl) in w.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    *wl += r[l][i][j][k] * u[i] * v[j] * v[k];
                }
            }
        }
    }
    bil(&g, &w, u) / (bil(&g, u, u) * bil(&g, v, v) - bil(&g, u, v).powi(2))
}

/// A quadric ⟨X,X⟩ = c in flat space with diagonal form `eta`, parametrized
/// by a chart.
pub struct Quadric {
    pub eta: Vec<f64>,
    pub embed: fn(&[f64], f64) -> Vec<f64>,
    pub radius: f64,
}

impl Quadric {
    fn x(&self, p: &[f64]) -> Vec<f64> {
        (self.embed)(p, self.radius)
    }

    fn form(&self, a: &[f64], b: &[f64]) -> f64 {
        self.eta.iter().zip(a).zip(b).map(|((e, x), y)| e * x * y).sum()
    }

    fn d1(&self, p: &[f64], i: usize, h: f64) -> Vec<f64> {
        let a = self.x(&shifted(p, i, h));
        let b = self.x(&shifted(p, i, -h));
        a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    }

    fn d2(&self, p: &[f64], i: usize, j: usize, h: f64) -> Vec<f64> {
        let pp = self.x(&shifted(&shifted(p, i, h), j, h));
        let pm = self.x(&shifted(&shifted(p, i, h), j, -h));
        let mp = self.x(&shifted(&shifted(p, i, -h), j, h));
        let mm = self.x(&shifted(&shifted(p, i, -h), j, -h));
        (0..pp.len()).map(|a| (pp[a] - pm[a] - mp[a] + mm[a]) / (4.0 * h * h)).collect()
    }

    /// Pullback of the ambient form.
    pub fn induced(&self, p: &[f64]) -> Mat {
        let h = 1e-5;
        let d: Vec<Vec<f64>> = (0..p.len()).map(|i| self.d1(p, i, h)).collect();
        (0..p.len()).map(|i| (0..p.len()).map(|j| self.form(&d[i], &d[j])).collect()).collect()
    }

    /// Sectional curvature from the Gauss equation with unit normal X/r.
    pub fn gauss_sectional(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let n = p.len();
        let x = self.x(p);
        let nu: Vec<f64> = x.iter().map(|c| c / self.radius).collect();
        let eps = self.form(&nu, &nu).signum();
        let h = 1e-4;
        let hh: Mat = (0..n).map(|i| (0..n).map(|j| self.form(&self.d2(p, i, j, h), &nu)).collect()).collect();
        let g = self.induced(p);
        let num = eps * (bil(&hh, u, u) * bil(&hh, v, v) - bil(&hh, u, v).powi(2));
        num / (bil(&g, u, u) * bil(&g, v, v) - bil(&g, u, v).powi(2))
    }
}

/// de Sitter in the flat slicing (t, x, y) inside R^{1,3}.
pub fn de_sitter_flat(p: &[f64], r: f64) -> Vec<f64> {
    let (t, x, y) = (p[0], p[1], p[2]);
    let a = (t / r).exp();
    let rho2 = x * x + y * y;
    vec![
        r * (t / r).sinh() + rho2 * a / (2.0 * r),
        a * x,
        a * y,
        r * (t / r).cosh() - rho2 * a / (2.0 * r),
    ]
}

pub fn de_sitter_quadric(r: f64) -> Quadric {
    Quadric { eta: vec![-1.0, 1.0, 1.0, 1.0], embed: de_sitter_flat, radius: r }
}

/// anti-de Sitter in the Poincaré chart (y, t, x), z = e^y, inside R^{2,2}.
pub fn anti_de_sitter_poincare_embed(p: &[f64], r: f64) -> Vec<f64> {
    let (z, t, x) = (p[0].exp(), p[1], p[2]);
    let q = x * x - t * t;
    vec![(z * z + r * r + q) / (2.0 * z), r * t / z, r * x / z, (z * z - r * r + q) / (2.0 * z)]
}

pub fn anti_de_sitter_poincare_quadric(r: f64) -> Quadric {
    Quadric { eta: vec![-1.0, -1.0, 1.0, 1.0], embed: anti_de_sitter_poincare_embed, radius: r }
}

/// r · exp(aH) exp(bP) exp(cQ) in SL(2,R), entries (m11, m12, m21, m22) mixed
/// into the coordinates where −det is diagonal: −det = −u² − v² + w² + s²
/// with m11 = u + s, m22 = u − s, m12 = v + w, m21 = −v + w.
pub fn sl2_embed(p: &[f64], r: f64) -> Vec<f64> {
    let (a, b, c) = (p[0], p[1], p[2]);
    let ea = [[a.exp(), 0.0], [0.0, (-a).exp()]];
    let eb = [[b.cosh(), b.sinh()], [b.sinh(), b.cosh()]];
    let ec = [[c.cos(), c.sin()], [-c.sin(), c.cos()]];
    let mul = |x: [[f64; 2]; 2], y: [[f64; 2]; 2]| {
        let mut z = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        z
    };
    let m = mul(mul(ea, eb), ec);
    let (m11, m12, m21, m22) = (r * m[0][0], r * m[0][1], r * m[1][0], r * m[1][1]);
    vec![(m11 + m22) / 2.0, (m12 - m21) / 2.0, (m12 + m21) / 2.0, (m11 - m22) / 2.0]
}

pub fn sl2_quadric(r: f64) -> Quadric {
    Quadric { eta: vec![-1.0, -1.0, 1.0, 1.0], embed: sl2_embed, radius: r }
}

/// Random expression over `nvars` coordinates that stays smooth and of
/// moderate size on [-1, 1]^nvars.
pub fn random_expr(rng: &mut impl Rng, depth: u32, nvars: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            Expr::var(rng.gen_range(0..nvars))
        } else {
            Expr::c(rng.gen_range(-2.0..2.0))
        };
    }
    let sub = |rng: &mut _| random_expr(rng, depth - 1, nvars);
    match rng.gen_range(0..10) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 => sub(rng) * sub(rng),
        3 => sub(rng) / (Expr::c(2.5) + sub(rng).tanh()),
        4 => Expr::Pow(Box::new(sub(rng).tanh()), rng.gen_range(2..4)),
        5 => sub(rng).tanh().call(Func::Exp),
        6 => sub(rng).sin(),
        7 => sub(rng).cos(),
        8 => (Expr::c(1.0) + sub(rng).powi(2)).sqrt(),
        _ => {
            let f = [Func::Sinh, Func::Cosh][rng.gen_range(0..2)];
            sub(rng).tanh().call(f) + (Expr::c(2.0) + sub(rng).sin()).log()
        }
    }
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let a = f(&shifted(p, i, h));
            let b = f(&shifted(p, i, -h));
            let a2 = f(&shifted(p, i, 2.0 * h));
            let b2 = f(&shifted(p, i, -2.0 * h));
            (8.0 * (a - b) - (a2 - b2)) / (12.0 * h)
        })
        .collect()
}

/// Hessian by 4th-order central differences of [`fd_gradient`].
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Mat {
    (0..p.len())
        .map(|i| {
            let a = fd_gradient(f, &shifted(p, i, h), h);
            let b = fd_gradient(f, &shifted(p, i, -h), h);
            let a2 = fd_gradient(f, &shifted(p, i, 2.0 * h), h);
            let b2 = fd_gradient(f, &shifted(p, i, -2.0 * h), h);
            (0..p.len()).map(|j| (8.0 * (a[j] - b[j]) - (a2[j] - b2[j])) / (12.0 * h)).collect()
        })
        .collect()
}
