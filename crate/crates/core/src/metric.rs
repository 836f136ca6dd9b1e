//! Metric fields on a single chart and the curvature computed from them.

use crate::error::{GeomError, Result};
use crate::expr::{parse, Dual1, Dual2, Expr, Tape};
use crate::linalg::{self, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Hard degeneracy threshold on |det g|.
pub const DEGENERATE_DET: f64 = 1e-12;
/// Planes with |g(u,u)g(v,v) - g(u,v)^2| at or below this are degenerate.
pub const DEGENERATE_PLANE: f64 = 1e-10;
/// Relative isotropy tolerance: |g(v,v)| <= ISOTROPY_TOL * |v|^2.
pub const ISOTROPY_TOL: f64 = 1e-9;

pub type Interval = (f64, f64);

/// A symmetric matrix of component expressions over named coordinates.
///
/// Cheap to clone; the compiled tape is shared.
#[derive(Clone)]
pub struct MetricField {
    inner: Arc<Inner>,
}

struct Inner {
    name: String,
    coords: Vec<String>,
    // upper triangle, row-major: (0,0),(0,1),...,(0,n-1),(1,1),...
    packed: Vec<Expr>,
    signature: Vec<i8>,
    valid_box: Vec<Interval>,
    sample_box: Vec<Interval>,
    tape: Tape,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.inner.name)
            .field("coords", &self.inner.coords)
            .field("signature", &self.inner.signature)
            .finish_non_exhaustive()
    }
}

fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricField {
    /// Builds a metric from a full component matrix, which must be
    /// structurally symmetric. Boxes default to `[-10,10]^n` (valid) and
    /// `[-1,1]^n` (sample).
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        components: Vec<Vec<Expr>>,
        signature: Vec<i8>,
    ) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(GeomError::Invalid("a metric needs at least one coordinate".into()));
        }
        if n > crate::expr::MAX_DIM {
            return Err(GeomError::Invalid(format!(
                "at most {} coordinates are supported",
                crate::expr::MAX_DIM
            )));
        }
        if components.len() != n || components.iter().any(|r| r.len() != n) {
            return Err(GeomError::Invalid(format!("component matrix must be {n}x{n}")));
        }
        if signature.len() != n || signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(GeomError::Invalid(format!("signature must list {n} entries of +1/-1")));
        }
        for (a, name) in coords.iter().enumerate() {
            if coords[..a].contains(name) {
                return Err(GeomError::Invalid(format!("duplicate coordinate `{name}`")));
            }
        }
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                if components[i][j] != components[j][i] {
                    return Err(GeomError::Invalid(format!(
                        "components ({i},{j}) and ({j},{i}) differ"
                    )));
                }
                if components[i][j].vars().iter().any(|&v| v >= n) {
                    return Err(GeomError::Invalid(format!(
                        "component ({i},{j}) references an unknown coordinate"
                    )));
                }
                packed.push(components[i][j].clone());
            }
        }
        let tape = Tape::compile(&packed, &coords);
        Ok(MetricField {
            inner: Arc::new(Inner {
                name: name.into(),
                coords,
                packed,
                signature,
                valid_box: vec![(-10.0, 10.0); n],
                sample_box: vec![(-1.0, 1.0); n],
                tape,
            }),
        })
    }

    /// Parses the components from strings. `components` may be a full matrix
    /// or just its upper triangle (row `i` holding entries `i..n`).
    pub fn parse(
        name: impl Into<String>,
        coords: &[&str],
        components: &[Vec<&str>],
        signature: Vec<i8>,
    ) -> Result<Self> {
        let n = coords.len();
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let mut full = vec![vec![Expr::zero(); n]; n];
        let upper = components.iter().enumerate().all(|(i, r)| r.len() == n - i);
        if components.len() != n || !(upper || components.iter().all(|r| r.len() == n)) {
            return Err(GeomError::Invalid(format!(
                "expected a {n}x{n} matrix or its upper triangle"
            )));
        }
        for (i, row) in components.iter().enumerate() {
            for (c, src) in row.iter().enumerate() {
                let j = if upper { i + c } else { c };
                let e = parse(src, &coords)?;
                if upper {
                    full[j][i] = e.clone();
                }
                full[i][j] = e;
            }
        }
        if !upper {
            for i in 0..n {
                for j in 0..i {
                    // full matrices must repeat the same expression below the diagonal
                    if full[i][j] != full[j][i] {
                        return Err(GeomError::Invalid(format!(
                            "components ({j},{i}) and ({i},{j}) differ"
                        )));
                    }
                }
            }
        }
        MetricField::new(name, coords, full, signature)
    }

    /// Diagonal metric from its diagonal entries.
    pub fn diagonal(
        name: impl Into<String>,
        coords: Vec<String>,
        diag: Vec<Expr>,
        signature: Vec<i8>,
    ) -> Result<Self> {
        let n = diag.len();
        let mut full = vec![vec![Expr::zero(); n]; n];
        for (i, e) in diag.into_iter().enumerate() {
            full[i][i] = e;
        }
        MetricField::new(name, coords, full, signature)
    }

    fn rebuild(&self, f: impl FnOnce(&mut Inner)) -> Self {
        let src = &self.inner;
        let mut inner = Inner {
            name: src.name.clone(),
            coords: src.coords.clone(),
            packed: src.packed.clone(),
            signature: src.signature.clone(),
            valid_box: src.valid_box.clone(),
            sample_box: src.sample_box.clone(),
            tape: src.tape.clone(),
        };
        f(&mut inner);
        MetricField { inner: Arc::new(inner) }
    }

    pub fn with_valid_box(&self, b: Vec<Interval>) -> Result<Self> {
        self.check_box(&b)?;
        Ok(self.rebuild(|i| i.valid_box = b))
    }

    pub fn with_sample_box(&self, b: Vec<Interval>) -> Result<Self> {
        self.check_box(&b)?;
        Ok(self.rebuild(|i| i.sample_box = b))
    }

    pub fn with_name(&self, name: impl Into<String>) -> Self {
        let name = name.into();
        self.rebuild(|i| i.name = name)
    }

    fn check_box(&self, b: &[Interval]) -> Result<()> {
        if b.len() != self.dim() {
            return Err(GeomError::Dimension { expected: self.dim(), got: b.len() });
        }
        if b.iter().any(|&(lo, hi)| !(lo <= hi)) {
            return Err(GeomError::Invalid("box intervals must satisfy lo <= hi".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }
    pub fn dim(&self) -> usize {
        self.inner.coords.len()
    }
    pub fn coords(&self) -> &[String] {
        &self.inner.coords
    }
    pub fn signature(&self) -> &[i8] {
        &self.inner.signature
    }
    pub fn valid_box(&self) -> &[Interval] {
        &self.inner.valid_box
    }
    pub fn sample_box(&self) -> &[Interval] {
        &self.inner.sample_box
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.inner.packed[packed_index(self.dim(), i, j)]
    }

    pub fn components(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.component(i, j).clone()).collect()).collect()
    }

    /// Multiplies every component by the constant `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(GeomError::Invalid("scale factor must be positive".into()));
        }
        let comps = self
            .components()
            .into_iter()
            .map(|r| r.into_iter().map(|e| c * e).collect())
            .collect();
        let m = MetricField::new(
            format!("{}*{c}", self.name()),
            self.coords().to_vec(),
            comps,
            self.signature().to_vec(),
        )?;
        Ok(m.rebuild(|i| {
            i.valid_box = self.valid_box().to_vec();
            i.sample_box = self.sample_box().to_vec();
        }))
    }

    /// Restriction to the coordinates `keep`, with all other coordinates frozen
    /// at the values in `at` (a full point). Used for leaves of product charts.
    pub fn leaf(&self, keep: &[usize], at: &[f64], signature: Vec<i8>) -> Result<Self> {
        self.check_dim(at)?;
        let map = |i: usize| match keep.iter().position(|&k| k == i) {
            Some(pos) => Expr::Var(pos),
            None => Expr::Const(at[i]),
        };
        let comps: Vec<Vec<Expr>> = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| self.component(i, j).substitute(&map)).collect())
            .collect();
        let coords = keep.iter().map(|&i| self.coords()[i].clone()).collect();
        let m = MetricField::new(format!("{}|leaf", self.name()), coords, comps, signature)?;
        let pick = |b: &[Interval]| keep.iter().map(|&i| b[i]).collect::<Vec<_>>();
        Ok(m.rebuild(|i| {
            i.valid_box = pick(self.valid_box());
            i.sample_box = pick(self.sample_box());
        }))
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(GeomError::Dimension { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    pub fn in_valid_box(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.valid_box()).all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        self.check_dim(p)?;
        if !self.in_valid_box(p) {
            return Err(GeomError::OutsideChart { point: p.to_vec() });
        }
        Ok(())
    }

    /// Raw component matrix at `p`, no degeneracy check.
    pub fn g(&self, p: &[f64]) -> Result<Mat> {
        self.check_point(p)?;
        let vals = self.inner.tape.eval_f64(p)?;
        let n = self.dim();
        Ok(Mat::from_fn(n, n, |i, j| vals[packed_index(n, i, j)]))
    }

    /// Metric and its inverse at `p`.
    pub fn metric_at(&self, p: &[f64]) -> Result<(Mat, Mat)> {
        let g = self.g(p)?;
        let ginv = invert(&g, p)?;
        Ok((g, ginv))
    }

    /// Metric values and first derivatives `dg[c] = ∂_c g`, no degeneracy check.
    pub fn metric_d1(&self, p: &[f64]) -> Result<(Mat, Vec<Mat>)> {
        self.check_point(p)?;
        let n = self.dim();
        let jets: Vec<Dual1> = self.inner.tape.eval_dual1(p)?;
        let g = Mat::from_fn(n, n, |i, j| jets[packed_index(n, i, j)].v);
        let dg = (0..n).map(|c| Mat::from_fn(n, n, |i, j| jets[packed_index(n, i, j)].d[c])).collect();
        Ok((g, dg))
    }

    /// Christoffel symbols only (first derivatives of g).
    pub fn christoffel(&self, p: &[f64]) -> Result<Christoffel> {
        self.check_point(p)?;
        let n = self.dim();
        let jets: Vec<Dual1> = self.inner.tape.eval_dual1(p)?;
        let g = Mat::from_fn(n, n, |i, j| jets[packed_index(n, i, j)].v);
        let ginv = invert(&g, p)?;
        let dg = |c: usize, i: usize, j: usize| jets[packed_index(n, i, j)].d[c];
        let mut gamma = vec![0.0; n * n * n];
        let mut s = vec![0.0; n];
        for i in 0..n {
            for j in i..n {
                for (m, sm) in s.iter_mut().enumerate() {
                    *sm = dg(i, m, j) + dg(j, m, i) - dg(m, i, j);
                }
                for k in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += ginv[(k, m)] * s[m];
                    }
                    gamma[(k * n + i) * n + j] = 0.5 * acc;
                    gamma[(k * n + j) * n + i] = 0.5 * acc;
                }
            }
        }
        Ok(Christoffel { n, g, gamma })
    }

    /// Full curvature data at `p` from exact second-order jets.
    pub fn curvature_at(&self, p: &[f64]) -> Result<CurvatureBundle> {
        self.check_point(p)?;
        let n = self.dim();
        let jets: Vec<Dual2> = self.inner.tape.eval_dual2(p)?;
        let at = |i: usize, j: usize| &jets[packed_index(n, i, j)];
        let g = Mat::from_fn(n, n, |i, j| at(i, j).v);
        let ginv = invert(&g, p)?;
        let n2 = n * n;
        let n3 = n2 * n;
        // dg[(c*n + i)*n + j] = d_c g_ij ; ddg[((c*n+d)*n + i)*n + j]
        let mut dg = vec![0.0; n3];
        let mut ddg = vec![0.0; n3 * n];
        for i in 0..n {
            for j in 0..n {
                let e = at(i, j);
                for c in 0..n {
                    dg[(c * n + i) * n + j] = e.d[c];
                    for d in 0..n {
                        ddg[((c * n + d) * n + i) * n + j] = e.hess(c, d);
                    }
                }
            }
        }
        let dgf = |c: usize, i: usize, j: usize| dg[(c * n + i) * n + j];
        let ddgf = |c: usize, d: usize, i: usize, j: usize| ddg[((c * n + d) * n + i) * n + j];

        // S_mij = d_i g_mj + d_j g_mi - d_m g_ij
        let mut s = vec![0.0; n3];
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    s[(m * n + i) * n + j] = dgf(i, m, j) + dgf(j, m, i) - dgf(m, i, j);
                }
            }
        }
        let mut gamma = vec![0.0; n3];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += ginv[(k, m)] * s[(m * n + i) * n + j];
                    }
                    gamma[(k * n + i) * n + j] = 0.5 * acc;
                }
            }
        }
        // d_l g^{km} = -g^{ka} d_l g_ab g^{bm}
        let mut dginv = vec![0.0; n3];
        for l in 0..n {
            let dgl = Mat::from_fn(n, n, |a, b| dgf(l, a, b));
            let prod = -(&ginv * dgl * &ginv);
            for k in 0..n {
                for m in 0..n {
                    dginv[(l * n + k) * n + m] = prod[(k, m)];
                }
            }
        }
        // d_l Gamma^k_ij
        let mut dgamma = vec![0.0; n3 * n];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = 0.0;
                        for m in 0..n {
                            let ds = ddgf(l, i, m, j) + ddgf(l, j, m, i) - ddgf(l, m, i, j);
                            acc += dginv[(l * n + k) * n + m] * s[(m * n + i) * n + j]
                                + ginv[(k, m)] * ds;
                        }
                        dgamma[((l * n + k) * n + i) * n + j] = 0.5 * acc;
                    }
                }
            }
        }
        let gam = |k: usize, i: usize, j: usize| gamma[(k * n + i) * n + j];
        let dgam = |l: usize, k: usize, i: usize, j: usize| dgamma[((l * n + k) * n + i) * n + j];
        let mut riemann = vec![0.0; n3 * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut r = dgam(i, l, j, k) - dgam(j, l, i, k);
                        for m in 0..n {
                            r += gam(l, i, m) * gam(m, j, k) - gam(l, j, m) * gam(m, i, k);
                        }
                        riemann[((l * n + i) * n + j) * n + k] = r;
                    }
                }
            }
        }
        let mut lower = vec![0.0; n3 * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = 0.0;
                        for m in 0..n {
                            acc += g[(l, m)] * riemann[((m * n + i) * n + j) * n + k];
                        }
                        lower[((i * n + j) * n + k) * n + l] = acc;
                    }
                }
            }
        }
        Ok(CurvatureBundle { n, point: p.to_vec(), g, g_inv: ginv, gamma, riemann, lower })
    }

    /// Checks nondegeneracy and the declared signature on a regular grid of
    /// `per_axis` points per coordinate over the sample box.
    pub fn check_invariants(&self, per_axis: usize) -> Result<()> {
        let declared = (
            self.signature().iter().filter(|&&s| s < 0).count(),
            self.signature().iter().filter(|&&s| s > 0).count(),
        );
        for p in box_grid(self.sample_box(), per_axis) {
            let g = self.g(&p)?;
            let (det, _) = linalg::det_inverse(&g);
            if det.abs() <= DEGENERATE_DET {
                return Err(GeomError::DegenerateMetric { det: det.abs(), point: p });
            }
            let found = linalg::inertia(&g);
            if found != declared {
                return Err(GeomError::Signature { point: p, found, declared });
            }
        }
        Ok(())
    }
}

fn invert(g: &Mat, p: &[f64]) -> Result<Mat> {
    let (det, inv) = linalg::det_inverse(g);
    match inv {
        Some(inv) if det.abs() > DEGENERATE_DET => Ok(inv),
        _ => Err(GeomError::DegenerateMetric { det: det.abs(), point: p.to_vec() }),
    }
}

/// Regular grid with `per_axis` points per interval (midpoint when 1).
pub fn box_grid(b: &[Interval], per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(1);
    let axis = |&(lo, hi): &Interval| -> Vec<f64> {
        if per_axis == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..per_axis).map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64).collect()
        }
    };
    let mut out = vec![Vec::new()];
    for iv in b {
        let vals = axis(iv);
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Uniform random point in a box.
pub fn random_point(b: &[Interval], rng: &mut impl Rng) -> Vec<f64> {
    b.iter().map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo }).collect()
}

/// Christoffel symbols Γ^k_ij at a point, with the metric there.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    pub g: Mat,
    gamma: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    /// Γ(v, w)^k = Γ^k_ij v^i w^j.
    pub fn contract(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.gamma[(k * n + i) * n + j] * v[i] * w[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Christoffel symbols and Riemann tensor at a point.
///
/// `riemann(l,i,j,k)` is R^l_ijk with R(∂_i,∂_j)∂_k = R^l_ijk ∂_l and
/// R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]; `riemann_lower(i,j,k,l)` is
/// g_lm R^m_ijk.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    n: usize,
    pub point: Vec<f64>,
    pub g: Mat,
    pub g_inv: Mat,
    gamma: Vec<f64>,
    riemann: Vec<f64>,
    lower: Vec<f64>,
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    pub fn riemann(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n;
        self.riemann[((l * n + i) * n + j) * n + k]
    }

    pub fn riemann_lower(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.lower[((i * n + j) * n + k) * n + l]
    }

    /// Γ as nested arrays `[k][i][j]`.
    pub fn gamma_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        (0..n)
            .map(|k| (0..n).map(|i| (0..n).map(|j| self.gamma(k, i, j)).collect()).collect())
            .collect()
    }

    /// R^l_ijk as nested arrays `[l][i][j][k]`.
    pub fn riemann_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let n = self.n;
        (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| (0..n).map(|j| (0..n).map(|k| self.riemann(l, i, j, k)).collect()).collect())
                    .collect()
            })
            .collect()
    }

    pub fn max_abs_riemann(&self) -> f64 {
        linalg::max_abs(self.riemann.iter().copied())
    }

    /// Largest violation among Γ symmetry, the antisymmetries and pair
    /// symmetry of R_ijkl, and the first Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.gamma(k, i, j) - self.gamma(k, j, i)).abs());
                }
            }
        }
        let r = |i, j, k, l| self.riemann_lower(i, j, k, l);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = r(i, j, k, l);
                        worst = worst
                            .max((v + r(j, i, k, l)).abs())
                            .max((v + r(i, j, l, k)).abs())
                            .max((v - r(k, l, i, j)).abs())
                            .max((v + r(j, k, i, l) + r(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Matrix of v ↦ R(u,v)u.
    pub fn curvature_operator(&self, u: &[f64]) -> Mat {
        let n = self.n;
        Mat::from_fn(n, n, |l, j| {
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    acc += self.riemann(l, i, j, k) * u[i] * u[k];
                }
            }
            acc
        })
    }

    /// R(u,v,w,z) = g(R(u,v)w, z).
    pub fn riemann_form(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    if w[k] == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        acc += self.riemann_lower(i, j, k, l) * u[i] * v[j] * w[k] * z[l];
                    }
                }
            }
        }
        acc
    }

    /// Sectional curvature of span(u, v).
    pub fn sectional_curvature(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let den = plane_denominator(&self.g, u, v);
        if den.abs() <= DEGENERATE_PLANE {
            return Err(GeomError::DegeneratePlane { den });
        }
        Ok(self.riemann_form(u, v, v, u) / den)
    }
}

/// g(u,u)g(v,v) − g(u,v)².
pub fn plane_denominator(g: &Mat, u: &[f64], v: &[f64]) -> f64 {
    let uu = linalg::bilinear(g, u, u);
    let vv = linalg::bilinear(g, v, v);
    let uv = linalg::bilinear(g, u, v);
    uu * vv - uv * uv
}

/// Summary of sectional curvatures over random planes at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpread {
    pub k_mean: f64,
    pub spread: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub planes: usize,
    pub rejected: usize,
}

/// Planes whose normalized denominator falls below this are resampled.
const PLANE_REJECT: f64 = 1e-6;
const MAX_CONSECUTIVE_REJECTIONS: usize = 100;

/// Sectional curvature over `samples` random planes at `p`.
///
/// Planes are spanned by two random Euclidean unit vectors; planes that are
/// nearly degenerate are resampled, and 100 rejections in a row is an error.
/// In dimension 2 there is only one plane, so a small spread says nothing
/// about constancy across points there.
pub fn constant_curvature_residual(
    m: &MetricField,
    p: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CurvatureSpread> {
    if samples < 10 {
        return Err(GeomError::Invalid("at least 10 plane samples are required".into()));
    }
    let cb = m.curvature_at(p)?;
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ks = Vec::with_capacity(samples);
    let mut rejected = 0;
    let mut streak = 0;
    while ks.len() < samples {
        let u = random_unit(n, &mut rng);
        let v = random_unit(n, &mut rng);
        let den = plane_denominator(&cb.g, &u, &v);
        if den.abs() < PLANE_REJECT {
            rejected += 1;
            streak += 1;
            if streak >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(GeomError::TooManyRejections(streak));
            }
            continue;
        }
        streak = 0;
        ks.push(cb.riemann_form(&u, &v, &v, &u) / den);
    }
    let k_mean = ks.iter().sum::<f64>() / ks.len() as f64;
    let spread = ks.iter().fold(0.0f64, |s, k| s.max((k - k_mean).abs()));
    let k_min = ks.iter().copied().fold(f64::INFINITY, f64::min);
    let k_max = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CurvatureSpread { k_mean, spread, k_min, k_max, planes: ks.len(), rejected })
}

/// Random Euclidean unit vector (uniform on the sphere via rejection).
pub fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = linalg::norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalType {
    Timelike,
    Spacelike,
    Isotropic,
    /// The metric itself is degenerate at the base point.
    DegenerateContext,
}

/// Causal type of `v` under `g`, with isotropy tolerance 1e-9·|v|².
pub fn causal_type(g: &Mat, v: &[f64]) -> CausalType {
    let q = linalg::bilinear(g, v, v);
    let tol = ISOTROPY_TOL * linalg::dot(v, v);
    if q < -tol {
        CausalType::Timelike
    } else if q > tol {
        CausalType::Spacelike
    } else {
        CausalType::Isotropic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub comp: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Vec<f64>, comp: Vec<f64>) -> Self {
        TangentVector { base, comp }
    }

    pub fn causal_type(&self, m: &MetricField) -> Result<CausalType> {
        match m.metric_at(&self.base) {
            Ok((g, _)) => Ok(causal_type(&g, &self.comp)),
            Err(GeomError::DegenerateMetric { .. }) => Ok(CausalType::DegenerateContext),
            Err(e) => Err(e),
        }
    }
}
