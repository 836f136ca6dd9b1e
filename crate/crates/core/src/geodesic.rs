//! Geodesic integration, the exponential map and exponential patches.

use crate::error::{GeomError, Result};
use crate::linalg::{self, Mat};
use crate::metric::MetricField;
use crate::submanifold::Surface;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default number of RK4 steps for the unit-parameter exponential map.
pub const EXP_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub s: f64,
}

fn accel(m: &MetricField, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let ch = m.christoffel(x)?;
    Ok(ch.contract(v, v).into_iter().map(|a| -a).collect())
}

fn rk4_step(m: &MetricField, x: &[f64], v: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let a1 = accel(m, x, v)?;
    let x2 = linalg::axpy(0.5 * h, v, x);
    let v2 = linalg::axpy(0.5 * h, &a1, v);
    let a2 = accel(m, &x2, &v2)?;
    let x3 = linalg::axpy(0.5 * h, &v2, x);
    let v3 = linalg::axpy(0.5 * h, &a2, v);
    let a3 = accel(m, &x3, &v3)?;
    let x4 = linalg::axpy(h, &v3, x);
    let v4 = linalg::axpy(h, &a3, v);
    let a4 = accel(m, &x4, &v4)?;
    let n = x.len();
    let mut xn = vec![0.0; n];
    let mut vn = vec![0.0; n];
    for i in 0..n {
        xn[i] = x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
        vn[i] = v[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    }
    Ok((xn, vn))
}

fn check_start(m: &MetricField, x0: &[f64], v0: &[f64]) -> Result<()> {
    let n = m.dim();
    if x0.len() != n || v0.len() != n {
        return Err(GeomError::Dimension { expected: n, got: x0.len().min(v0.len()) });
    }
    Ok(())
}

/// Endpoint after `steps` fixed RK4 steps over [0, s_max].
pub fn geodesic_endpoint(
    m: &MetricField,
    x0: &[f64],
    v0: &[f64],
    s_max: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_start(m, x0, v0)?;
    let steps = steps.max(1);
    let h = s_max / steps as f64;
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    for _ in 0..steps {
        (x, v) = rk4_step(m, &x, &v, h)?;
    }
    if !m.in_valid_box(&x) {
        return Err(GeomError::OutsideChart { point: x });
    }
    Ok((x, v))
}

/// Integrates ẍ^k + Γ^k_ij ẋ^i ẋ^j = 0 with fixed-step RK4. The step is
/// shrunk slightly so that the last state lands exactly on `s_max`.
/// Leaving the chart's valid box is an error.
pub fn integrate_geodesic(
    m: &MetricField,
    x0: &[f64],
    v0: &[f64],
    s_max: f64,
    step: f64,
) -> Result<Vec<GeodesicState>> {
    check_start(m, x0, v0)?;
    if !(step > 0.0) || !(s_max >= 0.0) {
        return Err(GeomError::Invalid("need step > 0 and s_max >= 0".into()));
    }
    let steps = ((s_max / step).ceil() as usize).max(1);
    let h = s_max / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    m.christoffel(&x)?;
    out.push(GeodesicState { x: x.clone(), v: v.clone(), s: 0.0 });
    for i in 1..=steps {
        (x, v) = rk4_step(m, &x, &v, h)?;
        if !m.in_valid_box(&x) {
            return Err(GeomError::OutsideChart { point: x });
        }
        out.push(GeodesicState { x: x.clone(), v: v.clone(), s: if i == steps { s_max } else { i as f64 * h } });
    }
    Ok(out)
}

/// max |g(v,v)(s) − g(v,v)(0)| along a trajectory.
pub fn energy_drift(m: &MetricField, states: &[GeodesicState]) -> Result<f64> {
    let Some(first) = states.first() else { return Ok(0.0) };
    let e0 = linalg::bilinear(&m.g(&first.x)?, &first.v, &first.v);
    let mut worst = 0.0f64;
    for st in states {
        let e = linalg::bilinear(&m.g(&st.x)?, &st.v, &st.v);
        worst = worst.max((e - e0).abs());
    }
    Ok(worst)
}

/// exp_x(w) with the default step count.
pub fn exp_map(m: &MetricField, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    exp_map_steps(m, x, w, EXP_STEPS)
}

pub fn exp_map_steps(m: &MetricField, x: &[f64], w: &[f64], steps: usize) -> Result<Vec<f64>> {
    if w.iter().all(|&c| c == 0.0) {
        check_start(m, x, w)?;
        return Ok(x.to_vec());
    }
    Ok(geodesic_endpoint(m, x, w, 1.0, steps)?.0)
}

/// The map u ↦ exp_x(Σ u_j e_j) for a fixed Euclidean-orthonormal family
/// (e_j) of tangent vectors at x.
#[derive(Debug, Clone)]
pub struct ExpSurface {
    pub metric: MetricField,
    pub center: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub steps: usize,
    pub fd_step: f64,
}

impl ExpSurface {
    /// Orthonormalizes `plane` (Euclidean); linearly dependent input is an
    /// error.
    pub fn new(metric: &MetricField, center: &[f64], plane: &[Vec<f64>], steps: usize) -> Result<Self> {
        let n = metric.dim();
        if center.len() != n || plane.iter().any(|p| p.len() != n) {
            return Err(GeomError::Dimension { expected: n, got: center.len() });
        }
        let basis = linalg::orthonormal_basis(plane, 1e-10);
        if basis.len() != plane.len() || plane.is_empty() {
            return Err(GeomError::Invalid("plane vectors must be linearly independent".into()));
        }
        Ok(ExpSurface { metric: metric.clone(), center: center.to_vec(), basis, steps, fd_step: 1e-4 })
    }

    /// Same surface data with an already orthonormal basis (not checked).
    pub fn from_orthonormal(metric: &MetricField, center: &[f64], basis: Vec<Vec<f64>>, steps: usize) -> Self {
        ExpSurface { metric: metric.clone(), center: center.to_vec(), basis, steps, fd_step: 1e-4 }
    }

    pub fn tangent_vector(&self, u: &[f64]) -> Vec<f64> {
        let n = self.center.len();
        let mut w = vec![0.0; n];
        for (uj, e) in u.iter().zip(&self.basis) {
            for i in 0..n {
                w[i] += uj * e[i];
            }
        }
        w
    }
}

impl Surface for ExpSurface {
    fn ambient_dim(&self) -> usize {
        self.center.len()
    }
    fn param_dim(&self) -> usize {
        self.basis.len()
    }
    fn point(&self, u: &[f64]) -> Result<Vec<f64>> {
        exp_map_steps(&self.metric, &self.center, &self.tangent_vector(u), self.steps)
    }
    fn tangent(&self, u: &[f64]) -> Result<Mat> {
        let n = self.ambient_dim();
        let k = self.param_dim();
        let h = self.fd_step;
        let mut t = Mat::zeros(n, k);
        for a in 0..k {
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[a] += h;
            um[a] -= h;
            let p = self.point(&up)?;
            let q = self.point(&um)?;
            for i in 0..n {
                t[(i, a)] = (p[i] - q[i]) / (2.0 * h);
            }
        }
        Ok(t)
    }
}

/// Sampled image exp_x(p ∩ ball(radius)) of a k-plane p ⊂ T_xM.
#[derive(Debug, Clone)]
pub struct ExpPatch {
    pub surface: ExpSurface,
    pub radius: f64,
    pub grid: usize,
    /// Plane coefficients of each sample; `coeffs[0]` is the origin.
    pub coeffs: Vec<Vec<f64>>,
    /// `samples[0]` is the center.
    pub samples: Vec<Vec<f64>>,
}

/// Samples exp_x on the `grid^k` lattice of [−radius, radius]^k restricted to
/// the ball of that radius (plane coefficients w.r.t. a Euclidean-orthonormal
/// basis of `plane`).
pub fn exp_patch(m: &MetricField, x: &[f64], plane: &[Vec<f64>], radius: f64, grid: usize) -> Result<ExpPatch> {
    exp_patch_steps(m, x, plane, radius, grid, EXP_STEPS)
}

pub fn exp_patch_steps(
    m: &MetricField,
    x: &[f64],
    plane: &[Vec<f64>],
    radius: f64,
    grid: usize,
    steps: usize,
) -> Result<ExpPatch> {
    if !(radius >= 0.0) {
        return Err(GeomError::Invalid("radius must be nonnegative".into()));
    }
    let surface = ExpSurface::new(m, x, plane, steps)?;
    m.g(x)?;
    let k = surface.param_dim();
    let mut coeffs = vec![vec![0.0; k]];
    if radius > 0.0 && grid >= 2 {
        let axis: Vec<f64> = (0..grid).map(|i| -radius + 2.0 * radius * i as f64 / (grid - 1) as f64).collect();
        let mut lattice = vec![Vec::new()];
        for _ in 0..k {
            lattice = lattice
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    axis.iter().map(move |&a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .collect();
        }
        for c in lattice {
            let r = linalg::norm(&c);
            if r <= radius * (1.0 + 1e-12) && r > 1e-14 * radius {
                coeffs.push(c);
            }
        }
    }
    let samples = coeffs.par_iter().map(|c| surface.point(c)).collect::<Result<Vec<_>>>()?;
    Ok(ExpPatch { surface, radius, grid, coeffs, samples })
}

impl ExpPatch {
    pub fn center(&self) -> &[f64] {
        &self.surface.center
    }

    /// Chart-Euclidean distance from `q` to the patch: nearest sample, then a
    /// local quadratic fit of the patch around it over principal axes.
    pub fn surface_offset(&self, q: &[f64]) -> Result<f64> {
        let n = self.surface.ambient_dim();
        let k = self.surface.param_dim();
        if q.len() != n {
            return Err(GeomError::Dimension { expected: n, got: q.len() });
        }
        let spacing = if self.grid >= 2 { 2.0 * self.radius / (self.grid - 1) as f64 } else { 0.0 };
        let slack = 0.1 * self.radius + spacing + 1e-12;
        for i in 0..n {
            let lo = self.samples.iter().map(|s| s[i]).fold(f64::INFINITY, f64::min);
            let hi = self.samples.iter().map(|s| s[i]).fold(f64::NEG_INFINITY, f64::max);
            if q[i] < lo - slack || q[i] > hi + slack {
                return Err(GeomError::OutOfPatch(format!("coordinate {i} = {} outside [{lo}, {hi}]", q[i])));
            }
        }
        let dist = |s: &Vec<f64>| -> f64 { s.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() };
        let (best, dbest) = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (i, dist(s)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let terms = 1 + k + k * (k + 1) / 2;
        if self.samples.len() < terms + 1 || k >= n {
            return Ok(dbest);
        }
        // neighbourhood: samples closest to the nearest one
        let anchor = &self.samples[best];
        let mut order: Vec<(usize, f64)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.iter().zip(anchor).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let take = (3 * terms).max(2 * terms + 1).min(order.len());
        let nb: Vec<&Vec<f64>> = order[..take].iter().map(|&(i, _)| &self.samples[i]).collect();
        let mut cov = Mat::zeros(n, n);
        for p in &nb {
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += (p[i] - anchor[i]) * (p[j] - anchor[j]);
                }
            }
        }
        let (_, vecs) = linalg::sym_eigen_sorted(&cov);
        // largest k eigenvectors span the tangent directions
        let tang: Vec<Vec<f64>> = (n - k..n).map(|c| vecs.column(c).iter().copied().collect()).collect();
        let norms: Vec<Vec<f64>> = (0..n - k).map(|c| vecs.column(c).iter().copied().collect()).collect();
        let local = |p: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let d: Vec<f64> = p.iter().zip(anchor).map(|(a, b)| a - b).collect();
            (tang.iter().map(|t| linalg::dot(t, &d)).collect(), norms.iter().map(|m| linalg::dot(m, &d)).collect())
        };
        let basis_row = |xi: &[f64]| -> Vec<f64> {
            let mut row = vec![1.0];
            row.extend_from_slice(xi);
            for a in 0..k {
                for b in a..k {
                    row.push(xi[a] * xi[b]);
                }
            }
            row
        };
        let rows: Vec<(Vec<f64>, Vec<f64>)> = nb.iter().map(|p| local(p)).collect();
        let a = Mat::from_fn(rows.len(), terms, |r, c| basis_row(&rows[r].0)[c]);
        let svd = a.clone().svd(true, true);
        let (xi_q, eta_q) = local(q);
        let phi = basis_row(&xi_q);
        let mut off2 = 0.0;
        for (j, eta) in eta_q.iter().enumerate() {
            let b = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1[j]));
            let coef = svd.solve(&b, 1e-12).map_err(|e| GeomError::Projection(e.to_string()))?;
            let fit: f64 = phi.iter().zip(coef.iter()).map(|(p, c)| p * c).sum();
            off2 += (eta - fit).powi(2);
        }
        Ok(off2.sqrt())
    }
}

impl Surface for ExpPatch {
    fn ambient_dim(&self) -> usize {
        self.surface.ambient_dim()
    }
    fn param_dim(&self) -> usize {
        self.surface.param_dim()
    }
    fn point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.surface.point(u)
    }
    fn tangent(&self, u: &[f64]) -> Result<Mat> {
        self.surface.tangent(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn minkowski_line_is_straight() {
        let m = models::minkowski(3).unwrap();
        let st = integrate_geodesic(&m, &[0.1, 0.2, 0.3], &[1.0, 0.5, -0.25], 2.0, 0.1).unwrap();
        let last = st.last().unwrap();
        assert_eq!(last.s, 2.0);
        let want = [2.1, 1.2, -0.2];
        for i in 0..3 {
            assert!((last.x[i] - want[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn chart_exit_is_reported() {
        let m = models::minkowski(2).unwrap();
        let r = integrate_geodesic(&m, &[0.0, 0.0], &[0.0, 1.0], 10.0, 0.1);
        assert!(matches!(r, Err(GeomError::OutsideChart { .. })));
    }

    #[test]
    fn patch_of_radius_zero_is_center() {
        let m = models::minkowski(3).unwrap();
        let p = exp_patch(&m, &[0.0; 3], &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 0.0, 5).unwrap();
        assert_eq!(p.samples, vec![vec![0.0; 3]]);
    }

    #[test]
    fn flat_offset_measures_normal_distance() {
        let m = models::minkowski(3).unwrap();
        let plane = [vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let p = exp_patch(&m, &[0.0; 3], &plane, 0.5, 9).unwrap();
        let nu = linalg::normalized(&[1.0, -1.0, 0.0]);
        let base = [0.1, 0.1, 0.05];
        let d = 0.01;
        let q: Vec<f64> = base.iter().zip(&nu).map(|(b, n)| b + d * n).collect();
        let r: Vec<f64> = base.iter().zip(&nu).map(|(b, n)| b - d * n).collect();
        let oq = p.surface_offset(&q).unwrap();
        let or = p.surface_offset(&r).unwrap();
        assert!((oq - d).abs() < 0.1 * d);
        assert!((oq - or).abs() < 1e-9);
        assert!(p.surface_offset(&p.samples[3]).unwrap() < 1e-12);
        assert!(p.surface_offset(&[4.0, 0.0, 0.0]).is_err());
    }
}
