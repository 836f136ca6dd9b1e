//! Decision procedures on product charts: block structure, holonomy
//! homothety, the warped-product criterion, and conformal factors.

use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::field::CoordMap;
use crate::killing::pullback;
use crate::linalg::{self, Mat, Vector};
use crate::metric::{constant_curvature_residual, Interval, MetricField};
use crate::submanifold::{classify, geodesy_residual, Immersion, Surface};
use crate::tolerance::Tolerances;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A metric on coordinates (x, y) with x the first `base_dim` coordinates.
#[derive(Debug, Clone)]
pub struct ProductChartSpec {
    pub metric: MetricField,
    pub base_dim: usize,
}

impl ProductChartSpec {
    pub fn new(metric: MetricField, base_dim: usize) -> Result<Self> {
        if base_dim == 0 || base_dim >= metric.dim() {
            return Err(GeomError::Invalid(format!(
                "base block of size {base_dim} does not split a {}-dimensional chart",
                metric.dim()
            )));
        }
        Ok(ProductChartSpec { metric, base_dim })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
    pub fn fiber_dim(&self) -> usize {
        self.dim() - self.base_dim
    }

    pub fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        p.split_at(self.base_dim)
    }

    pub fn join(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        p.extend_from_slice(y);
        p
    }

    fn fiber_block(&self, p: &[f64]) -> Result<Mat> {
        let g = self.metric.g(p)?;
        let k = self.base_dim;
        let f = self.fiber_dim();
        Ok(g.view((k, k), (f, f)).clone_owned())
    }

    fn fiber_signature(&self) -> Vec<i8> {
        self.metric.signature()[self.base_dim..].to_vec()
    }

    // {x} × N through p, parametrized by the fiber coordinates.
    fn fiber_leaf(&self, p: &[f64]) -> Result<Immersion> {
        let k = self.base_dim;
        let params: Vec<String> = self.metric.coords()[k..].to_vec();
        let map: Vec<Expr> =
            (0..self.dim()).map(|i| if i < k { Expr::c(p[i]) } else { Expr::var(i - k) }).collect();
        Immersion::new("fiber leaf", &params, map, self.metric.valid_box()[k..].to_vec())
    }

    // L × {y} through p, parametrized by the base coordinates.
    fn base_leaf(&self, p: &[f64]) -> Result<Immersion> {
        let k = self.base_dim;
        let params: Vec<String> = self.metric.coords()[..k].to_vec();
        let map: Vec<Expr> =
            (0..self.dim()).map(|i| if i < k { Expr::var(i) } else { Expr::c(p[i]) }).collect();
        Immersion::new("base leaf", &params, map, self.metric.valid_box()[..k].to_vec())
    }
}

fn distinct(points: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

// Least-squares scalar λ with a ≈ λ b, and max |a − λ b|.
fn scalar_ratio(a: &Mat, b: &Mat) -> (f64, f64) {
    let bb = b.dot(b);
    if bb == 0.0 {
        return (f64::NAN, f64::INFINITY);
    }
    let lambda = a.dot(b) / bb;
    (lambda, (a - b * lambda).abs().max())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub off_block_max: f64,
    /// Fiber blocks at (x, y) and (x₀, y) differ by a factor that is the
    /// same for every y sharing the base point x.
    pub fiber_conformal: bool,
    /// Largest deviation of a fiber block from a scalar multiple.
    pub conformal_defect: f64,
    /// Largest spread of the factor over y at fixed x.
    pub factor_spread: f64,
}

/// Off-block size and fiber conformality over `grid`; x₀ is the base part of
/// the first grid point.
pub fn check_block_structure(spec: &ProductChartSpec, grid: &[Vec<f64>], tol: &Tolerances) -> Result<BlockStructure> {
    let first = grid.first().ok_or_else(|| GeomError::Invalid("empty grid".into()))?;
    let k = spec.base_dim;
    let n = spec.dim();
    let x0 = spec.split(first).0.to_vec();
    let rows: Vec<(f64, Vec<f64>, f64, f64)> = grid
        .par_iter()
        .map(|p| {
            let g = spec.metric.g(p)?;
            let mut off = 0.0f64;
            for i in 0..k {
                for j in k..n {
                    off = off.max(g[(i, j)].abs());
                }
            }
            let (x, y) = spec.split(p);
            let here = spec.fiber_block(p)?;
            let there = spec.fiber_block(&spec.join(&x0, y))?;
            let (lambda, defect) = scalar_ratio(&here, &there);
            Ok((off, x.to_vec(), lambda, defect))
        })
        .collect::<Result<Vec<_>>>()?;
    let off_block_max = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let conformal_defect = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let mut factor_spread = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[..i] {
            if a.1 == b.1 {
                factor_spread = factor_spread.max((a.2 - b.2).abs());
            }
        }
    }
    Ok(BlockStructure {
        off_block_max,
        fiber_conformal: conformal_defect < tol.homothety && factor_spread < tol.homothety,
        conformal_defect,
        factor_spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyCheck {
    /// Entrywise ratio at the first fiber point.
    pub ratio: f64,
    pub max_variation: f64,
    /// Entries skipped because the x₁ value was near zero.
    pub skipped: usize,
}

/// Entrywise ratios of the fiber blocks at (x₂, y) and (x₁, y) over the
/// fiber grid, compared against the first ratio.
pub fn holonomy_homothety_check(
    spec: &ProductChartSpec,
    x1: &[f64],
    x2: &[f64],
    fiber_grid: &[Vec<f64>],
) -> Result<HolonomyCheck> {
    let k = spec.base_dim;
    let f = spec.fiber_dim();
    if x1.len() != k || x2.len() != k {
        return Err(GeomError::Dimension { expected: k, got: x1.len().min(x2.len()) });
    }
    if fiber_grid.is_empty() {
        return Err(GeomError::Invalid("empty fiber grid".into()));
    }
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for y in fiber_grid {
        if y.len() != f {
            return Err(GeomError::Dimension { expected: f, got: y.len() });
        }
        let a = spec.fiber_block(&spec.join(x1, y))?;
        let b = spec.fiber_block(&spec.join(x2, y))?;
        for i in 0..f {
            for j in i..f {
                if a[(i, j)].abs() < 1e-10 {
                    skipped += 1;
                    continue;
                }
                ratios.push(b[(i, j)] / a[(i, j)]);
            }
        }
    }
    let ratio = *ratios
        .first()
        .ok_or_else(|| GeomError::Invalid("every fiber entry is near zero at x1".into()))?;
    let max_variation = ratios.iter().map(|r| (r - ratio).abs()).fold(0.0, f64::max);
    Ok(HolonomyCheck { ratio, max_variation, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub pass: bool,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Warped,
    NotWarped,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedVerdict {
    /// max ‖II‖ of the leaves L × {y}.
    pub base_geodesic: SubCheck,
    /// max ‖II − h⊗n‖ of the leaves {x} × N.
    pub fiber_umbilical: SubCheck,
    /// max holonomy ratio variation between base points.
    pub holonomy_homothetic: SubCheck,
    /// spread of sectional curvatures over fiber points and planes.
    pub fiber_constant_curvature: SubCheck,
    /// max geodesy residual of the supplied hypersurfaces.
    pub hypersurfaces_geodesic: SubCheck,
    /// rank of their normals' fiber components.
    pub normal_rank: usize,
    pub verdict: Verdict,
}

fn saturation(spec: &ProductChartSpec, index: usize, h: &Immersion) -> Result<()> {
    let k = spec.base_dim;
    let bad = |reason: String| Err(GeomError::NotSaturated { index, reason });
    if h.ambient_dim() != spec.dim() {
        return bad(format!("maps into dimension {}, expected {}", h.ambient_dim(), spec.dim()));
    }
    if h.param_dim() != spec.dim() - 1 {
        return bad("not a hypersurface".into());
    }
    let map = h.map_exprs();
    for i in 0..k {
        if map[i] != Expr::var(i) {
            return bad(format!("component {i} is not the free base parameter {i}"));
        }
    }
    for (i, e) in map.iter().enumerate().skip(k) {
        if (0..k).any(|a| e.depends_on(a)) {
            return bad(format!("fiber component {i} depends on a base parameter"));
        }
    }
    Ok(())
}

fn sub(value: f64, certificate: f64) -> SubCheck {
    SubCheck { pass: value < certificate, value }
}

/// Checks the hypotheses and conclusions of the warped-product criterion
/// on `grid`. Hypersurfaces must be saturated by the base: their first
/// parameters are the base coordinates, mapped identically, and no fiber
/// component depends on them. Each is evaluated at its domain center with
/// the base parameters moved to every base point of the grid.
pub fn warped_criterion(
    spec: &ProductChartSpec,
    hypersurfaces: &[Immersion],
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<WarpedVerdict> {
    if grid.is_empty() {
        return Err(GeomError::Invalid("empty grid".into()));
    }
    for (i, h) in hypersurfaces.iter().enumerate() {
        saturation(spec, i, h)?;
    }
    let k = spec.base_dim;
    let n = spec.dim();
    let f = spec.fiber_dim();
    let bases = distinct(grid.iter().map(|p| p[..k].to_vec()));
    let fibers = distinct(grid.iter().map(|p| p[k..].to_vec()));

    // normals' fiber parts at the first base point
    let mut fiber_normals = Vec::new();
    for h in hypersurfaces {
        let mut u = h.domain_center();
        u[..k].copy_from_slice(&bases[0]);
        let t = h.tangent(&u)?;
        let x = h.point(&u)?;
        let nu = linalg::cross_normal(&t);
        let (_, ginv) = spec.metric.metric_at(&x)?;
        let normal = ginv * Vector::from_vec(nu);
        fiber_normals.push(linalg::normalized(&normal.as_slice()[k..]));
    }
    let normal_rank = if hypersurfaces.is_empty() { 0 } else { linalg::rank(f, &fiber_normals, tol.rank) };
    if normal_rank < f {
        return Err(GeomError::InsufficientHypersurfaces { rank: normal_rank, needed: f });
    }

    let base_ii = grid
        .par_iter()
        .map(|p| Ok(classify(&spec.metric, &spec.base_leaf(p)?, &p[..k])?.1.norm))
        .collect::<Result<Vec<f64>>>()?;
    let fiber_umb = grid
        .par_iter()
        .map(|p| Ok(classify(&spec.metric, &spec.fiber_leaf(p)?, &p[k..])?.1.umbilic_residual))
        .collect::<Result<Vec<f64>>>()?;

    let jobs: Vec<(usize, Vec<f64>)> =
        (0..hypersurfaces.len()).flat_map(|i| bases.iter().map(move |x| (i, x.clone()))).collect();
    let hyp = jobs
        .par_iter()
        .map(|(i, x)| {
            let h = &hypersurfaces[*i];
            let mut u = h.domain_center();
            u[..k].copy_from_slice(x);
            Ok(geodesy_residual(&spec.metric, h, &u)?.residual)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut holonomy = 0.0f64;
    for x2 in &bases[1..] {
        holonomy = holonomy.max(holonomy_homothety_check(spec, &bases[0], x2, &fibers)?.max_variation);
    }

    let spread = if f < 2 {
        0.0
    } else {
        let p0 = spec.join(&bases[0], &fibers[0]);
        let fiber_idx: Vec<usize> = (k..n).collect();
        let leaf = spec.metric.leaf(&fiber_idx, &p0, spec.fiber_signature())?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in &fibers {
            let s = constant_curvature_residual(&leaf, y, 50, 0)?;
            lo = lo.min(s.k_min);
            hi = hi.max(s.k_max);
        }
        hi - lo
    };

    let base_geodesic = sub(linalg::max_abs(base_ii), tol.certificate);
    let fiber_umbilical = sub(linalg::max_abs(fiber_umb), tol.certificate);
    let holonomy_homothetic = sub(holonomy, tol.homothety);
    let fiber_constant_curvature = sub(spread, tol.curvature_spread);
    let hypersurfaces_geodesic = sub(linalg::max_abs(hyp), tol.certificate);

    let checks = [base_geodesic, fiber_umbilical, holonomy_homothetic, fiber_constant_curvature];
    let verdict = if checks.iter().all(|c| c.pass) && hypersurfaces_geodesic.pass {
        Verdict::Warped
    } else if checks.iter().any(|c| c.value > tol.rejection) {
        Verdict::NotWarped
    } else {
        Verdict::Inconclusive
    };
    Ok(WarpedVerdict {
        base_geodesic,
        fiber_umbilical,
        holonomy_homothetic,
        fiber_constant_curvature,
        hypersurfaces_geodesic,
        normal_rank,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalCheck {
    pub is_conformal: bool,
    /// λ at the first grid point.
    pub factor: f64,
    pub factor_variation: f64,
    /// max |φ*g₂ − λ g₁| over the grid.
    pub max_defect: f64,
    pub homothety: bool,
}

/// Compares φ*g₂ with g₁ on `grid` (points in m1's chart).
pub fn conformal_factor_map(
    m1: &MetricField,
    m2: &MetricField,
    phi: &CoordMap,
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<ConformalCheck> {
    if phi.source_dim() != m1.dim() || phi.target_dim() != m2.dim() {
        return Err(GeomError::Dimension { expected: m1.dim(), got: phi.source_dim() });
    }
    if grid.is_empty() {
        return Err(GeomError::Invalid("empty grid".into()));
    }
    let vals = grid
        .par_iter()
        .map(|p| {
            let a = pullback(m2, phi, p)?;
            let b = m1.g(p)?;
            let (lambda, defect) = scalar_ratio(&a, &b);
            Ok((lambda, defect / a.abs().max().max(1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let factor = vals[0].0;
    let max_defect = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let factor_variation = vals.iter().map(|v| (v.0 - factor).abs()).fold(0.0, f64::max);
    let is_conformal = max_defect < tol.homothety;
    Ok(ConformalCheck {
        is_conformal,
        factor,
        factor_variation,
        max_defect,
        homothety: is_conformal && factor_variation < tol.homothety,
    })
}

/// Product grid over a base box and a fiber box, `per_axis` points each.
pub fn product_grid(base: &[Interval], fiber: &[Interval], per_axis: usize) -> Vec<Vec<f64>> {
    let mut b = base.to_vec();
    b.extend_from_slice(fiber);
    crate::metric::box_grid(&b, per_axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, WarpedSpec};

    fn w1() -> ProductChartSpec {
        let spec = WarpedSpec::parse(models::euclidean(1).unwrap(), models::minkowski(3).unwrap(), "exp(2*s)").unwrap();
        ProductChartSpec::new(models::warped(&spec).unwrap(), 1).unwrap()
    }

    #[test]
    fn warped_block_structure() {
        let spec = w1();
        let grid = product_grid(&[(-0.5, 0.5)], &[(-0.5, 0.5); 3], 3);
        let b = check_block_structure(&spec, &grid, &Tolerances::default()).unwrap();
        assert_eq!(b.off_block_max, 0.0);
        assert!(b.fiber_conformal);
    }

    #[test]
    fn holonomy_ratio_is_warp_quotient() {
        let spec = w1();
        let ys = vec![vec![0.0, 0.1, 0.2], vec![0.3, -0.2, 0.1]];
        let h = holonomy_homothety_check(&spec, &[0.1], &[0.4], &ys).unwrap();
        assert!((h.ratio - (0.6f64).exp()).abs() < 1e-12);
        assert!(h.max_variation < 1e-12);
        let same = holonomy_homothety_check(&spec, &[0.1], &[0.1], &ys).unwrap();
        assert_eq!(same.ratio, 1.0);
        assert_eq!(same.max_variation, 0.0);
    }

    #[test]
    fn cross_term_shows_in_off_block() {
        let m = MetricField::parse(
            "cross",
            &["t", "x", "y"],
            &[vec!["-1", "0.1", "0"], vec!["1", "0"], vec!["1"]],
            vec![-1, 1, 1],
        )
        .unwrap();
        let spec = ProductChartSpec::new(m, 1).unwrap();
        let b = check_block_structure(&spec, &[vec![0.0, 0.0, 0.0]], &Tolerances::default()).unwrap();
        assert!((b.off_block_max - 0.1).abs() < 1e-15);
    }

    #[test]
    fn dilation_is_homothety() {
        let m = models::minkowski(3).unwrap();
        let phi = CoordMap::parse(m.coords(), &["2*t", "2*x", "2*y"]).unwrap();
        let grid = crate::metric::box_grid(&[(-0.5, 0.5); 3], 3);
        let c = conformal_factor_map(&m, &m, &phi, &grid, &Tolerances::default()).unwrap();
        assert!(c.homothety);
        assert!((c.factor - 4.0).abs() < 1e-12);
    }

    #[test]
    fn squaring_is_conformal_not_homothetic() {
        let e = models::euclidean(2).unwrap();
        let phi = CoordMap::parse(e.coords(), &["s1^2 - s2^2", "2*s1*s2"]).unwrap();
        let grid = crate::metric::box_grid(&[(0.2, 0.8); 2], 4);
        let c = conformal_factor_map(&e, &e, &phi, &grid, &Tolerances::default()).unwrap();
        assert!(c.is_conformal);
        assert!(!c.homothety);
        assert!(c.factor_variation > 1.0);
    }
}
