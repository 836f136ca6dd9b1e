//! Sampling the set C_x of isotropic directions u whose orthogonal
//! hyperplane u⊥ exponentiates to a lightlike geodesic hypersurface.

use crate::error::{GeomError, Result};
use crate::geodesic::{ExpSurface, EXP_STEPS};
use crate::linalg::{self, Mat, Vector};
use crate::metric::{MetricField, ISOTROPY_TOL};
use crate::submanifold::{deviation_coefficients, ProbeConfig, GEODESIC_CERTIFICATE};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Grid points per great circle of the direction sphere.
    pub resolution: usize,
    /// Probes are taken at distance radius/2 from x inside exp_x(u⊥).
    pub radius: f64,
    pub exp_steps: usize,
    pub probe: ProbeConfig,
    pub certificate: f64,
    /// Acceptance fraction above which the label is `cone`.
    pub cone_fraction: f64,
    /// Clusters merge below this many grid spacings.
    pub merge_factor: f64,
    pub span_tolerance: f64,
    /// How many grid minima get refined.
    pub max_refinements: usize,
    pub refine_iterations: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            resolution: 16,
            radius: 0.3,
            exp_steps: EXP_STEPS,
            probe: ProbeConfig::default(),
            certificate: GEODESIC_CERTIFICATE,
            cone_fraction: 0.95,
            merge_factor: 3.0,
            span_tolerance: 1e-8,
            max_refinements: 8,
            refine_iterations: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Empty,
    Mono,
    Bi,
    FiniteK,
    Cone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedDirection {
    /// Euclidean-unit chart vector.
    pub direction: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Best member.
    pub direction: Vec<f64>,
    pub residual: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub at: Vec<f64>,
    pub resolution: usize,
    pub grid_points: usize,
    pub acceptance_fraction: f64,
    pub min_grid_residual: f64,
    pub accepted: Vec<AcceptedDirection>,
    pub clusters: Vec<Cluster>,
    pub span_dim: usize,
    pub class_label: ClassLabel,
}

impl ScanReport {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }
}

/// Points on S^d with roughly `resolution` points per great circle.
pub fn sphere_grid(d: usize, resolution: usize) -> Vec<Vec<f64>> {
    match d {
        0 => vec![vec![1.0], vec![-1.0]],
        1 => (0..resolution.max(1))
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let rings = (resolution / 2).max(1);
            let mut out = Vec::new();
            for r in 0..rings {
                let psi = std::f64::consts::PI * (r as f64 + 0.5) / rings as f64;
                let sub_res = ((resolution as f64) * psi.sin()).round().max(1.0) as usize;
                for p in sphere_grid(d - 1, sub_res) {
                    let mut v = vec![psi.cos()];
                    v.extend(p.iter().map(|c| c * psi.sin()));
                    out.push(v);
                }
            }
            out
        }
    }
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    linalg::dot(a, b).clamp(-1.0, 1.0).acos()
}

/// g-orthonormal frame at x with the timelike vector first.
fn lorentz_frame(m: &MetricField, x: &[f64]) -> Result<Mat> {
    let g = m.g(x)?;
    let (vals, vecs) = linalg::sym_eigen_sorted(&g);
    let neg = vals.iter().filter(|&&v| v < 0.0).count();
    if neg != 1 || vals.iter().any(|v| v.abs() < 1e-12) {
        return Err(GeomError::Signature { point: x.to_vec(), found: linalg::inertia(&g), declared: (1, vals.len() - 1) });
    }
    let mut e = vecs;
    for (j, v) in vals.iter().enumerate() {
        let s = 1.0 / v.abs().sqrt();
        e.column_mut(j).scale_mut(s);
    }
    Ok(e)
}

// Orthonormal basis of the Euclidean complement of unit ω in R^d.
fn complement(omega: &[f64]) -> Vec<Vec<f64>> {
    let d = omega.len();
    let mut vecs = vec![omega.to_vec()];
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        vecs.push(e);
    }
    let mut b = linalg::orthonormal_basis(&vecs, 1e-8);
    b.remove(0);
    b.truncate(d - 1);
    b
}

struct Probe<'a> {
    m: &'a MetricField,
    x: &'a [f64],
    frame: &'a Mat,
    cfg: &'a ScanConfig,
}

impl Probe<'_> {
    fn chart(&self, frame_vec: &[f64]) -> Vec<f64> {
        (self.frame * Vector::from_column_slice(frame_vec)).iter().copied().collect()
    }

    fn direction(&self, omega: &[f64]) -> Vec<f64> {
        let mut f = vec![1.0];
        f.extend_from_slice(omega);
        linalg::normalized(&self.chart(&f))
    }

    // Signed deviation coefficients of exp_x(u⊥) for u = e0 + Σ ω_i e_i,
    // with u⊥ spanned by u and the frame images of `tangents` projected
    // off ω.
    fn deviations(&self, omega: &[f64], tangents: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.m.dim();
        let mut plane = vec![self.direction(omega)];
        for t in tangents {
            let c = linalg::dot(t, omega);
            let mut f = vec![0.0];
            f.extend(t.iter().zip(omega).map(|(ti, wi)| ti - c * wi));
            plane.push(self.chart(&f));
        }
        let surf = ExpSurface::new(self.m, self.x, &plane, self.cfg.exp_steps)?;
        let k = n - 1;
        let probes = k + k * (k - 1);
        let mut out = Vec::new();
        for j in 0..k {
            let mut u = vec![0.0; k];
            u[j] = 0.5 * self.cfg.radius;
            out.extend(deviation_coefficients(self.m, &surf, &u, probes, &self.cfg.probe)?);
        }
        Ok(out)
    }

    fn omega_at(omega0: &[f64], tangents: &[Vec<f64>], alpha: &[f64]) -> Vec<f64> {
        let mut w = omega0.to_vec();
        for (a, t) in alpha.iter().zip(tangents) {
            for (wi, ti) in w.iter_mut().zip(t) {
                *wi += a * ti;
            }
        }
        linalg::normalized(&w)
    }

    // Levenberg-Marquardt on the deviation vector over a local chart of the
    // direction sphere around omega0.
    fn refine(&self, omega0: &[f64], max_shift: f64) -> Result<(Vec<f64>, f64)> {
        let tangents = complement(omega0);
        let d = tangents.len();
        let eval = |alpha: &[f64]| self.deviations(&Self::omega_at(omega0, &tangents, alpha), &tangents);
        let mut alpha = vec![0.0; d];
        let mut f = Vector::from_vec(eval(&alpha)?);
        let mut lambda = 1e-6;
        let h = 1e-6;
        for _ in 0..self.cfg.refine_iterations {
            if linalg::max_abs(f.iter().copied()) < 0.1 * self.cfg.certificate {
                break;
            }
            let mut jac = Mat::zeros(f.len(), d);
            for j in 0..d {
                let mut ap = alpha.clone();
                ap[j] += h;
                let col = (Vector::from_vec(eval(&ap)?) - &f) / h;
                jac.set_column(j, &col);
            }
            let jt = jac.transpose();
            let mut improved = false;
            for _ in 0..8 {
                let a = &jt * &jac + Mat::identity(d, d) * lambda * (1.0 + (&jt * &jac).diagonal().max());
                let Some(step) = linalg::solve(&a, &(-(&jt * &f))) else { break };
                // zeros of the deviation vector are typically double, where
                // the doubled Gauss-Newton step is the exact one
                let mut best: Option<(Vec<f64>, Vector)> = None;
                for mult in [2.0, 1.0] {
                    let trial: Vec<f64> = alpha.iter().zip(step.iter()).map(|(a, s)| a + mult * s).collect();
                    if linalg::norm(&trial) > max_shift {
                        continue;
                    }
                    let ft = Vector::from_vec(eval(&trial)?);
                    if best.as_ref().map_or(true, |(_, fb)| ft.norm() < fb.norm()) {
                        best = Some((trial, ft));
                    }
                }
                if let Some((trial, ft)) = best {
                    if ft.norm() < f.norm() {
                        // a true zero converges fast; slow descent means a
                        // nonzero minimum
                        let stalled = ft.norm() > 0.5 * f.norm();
                        alpha = trial;
                        f = ft;
                        lambda = (lambda * 0.1).max(1e-12);
                        improved = !stalled;
                        break;
                    }
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        Ok((Self::omega_at(omega0, &tangents, &alpha), linalg::max_abs(f.iter().copied())))
    }
}

/// Scan with default settings at the given resolution.
pub fn scan_cx(m: &MetricField, x: &[f64], resolution: usize) -> Result<ScanReport> {
    scan_cx_with(m, x, &ScanConfig { resolution, ..ScanConfig::default() })
}

pub fn scan_cx_with(m: &MetricField, x: &[f64], cfg: &ScanConfig) -> Result<ScanReport> {
    let n = m.dim();
    if x.len() != n {
        return Err(GeomError::Dimension { expected: n, got: x.len() });
    }
    if n < 3 {
        return Err(GeomError::Invalid("scanning needs dimension at least 3".into()));
    }
    if cfg.resolution < 16 {
        return Err(GeomError::Invalid(format!("resolution {} is below 16", cfg.resolution)));
    }
    let frame = lorentz_frame(m, x)?;
    let probe = Probe { m, x, frame: &frame, cfg };
    let grid = sphere_grid(n - 2, cfg.resolution);
    let spacing = 2.0 * std::f64::consts::PI / cfg.resolution as f64;

    let residuals: Vec<f64> = grid
        .par_iter()
        .map(|w| Ok(linalg::max_abs(probe.deviations(w, &complement(w))?)))
        .collect::<Result<Vec<f64>>>()?;

    let mut cands: Vec<(Vec<f64>, f64)> =
        grid.iter().zip(&residuals).filter(|(_, &r)| r < cfg.certificate).map(|(w, &r)| (w.clone(), r)).collect();
    let fraction = cands.len() as f64 / grid.len() as f64;
    let min_grid_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);

    if fraction <= cfg.cone_fraction {
        let mut minima: Vec<usize> = (0..grid.len())
            .filter(|&i| residuals[i] >= cfg.certificate)
            .filter(|&i| {
                (0..grid.len())
                    .filter(|&j| j != i && angle(&grid[i], &grid[j]) < 1.6 * spacing)
                    .all(|j| residuals[j] > residuals[i] || (residuals[j] == residuals[i] && j > i))
            })
            .collect();
        minima.sort_by(|&a, &b| residuals[a].total_cmp(&residuals[b]).then(a.cmp(&b)));
        minima.truncate(cfg.max_refinements);
        let refined: Vec<(Vec<f64>, f64)> = minima
            .par_iter()
            .map(|&i| probe.refine(&grid[i], 2.0 * spacing))
            .collect::<Result<Vec<_>>>()?;
        cands.extend(refined.into_iter().filter(|(_, r)| *r < cfg.certificate));
    }

    // single-linkage clustering in candidate order
    let mut label: Vec<usize> = (0..cands.len()).collect();
    fn root(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..cands.len() {
        for j in 0..i {
            if angle(&cands[i].0, &cands[j].0) < cfg.merge_factor * spacing {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..cands.len() {
        let r = root(&mut label, i);
        let dir = probe.direction(&cands[i].0);
        match roots.iter().position(|&q| q == r) {
            Some(c) => {
                clusters[c].size += 1;
                if cands[i].1 < clusters[c].residual {
                    clusters[c].residual = cands[i].1;
                    clusters[c].direction = dir;
                }
            }
            None => {
                roots.push(r);
                clusters.push(Cluster { direction: dir, residual: cands[i].1, size: 1 });
            }
        }
    }

    let accepted: Vec<AcceptedDirection> = cands
        .iter()
        .map(|(w, r)| AcceptedDirection { direction: probe.direction(w), residual: *r })
        .collect();
    let span_dim = span_of(&accepted, n, cfg.span_tolerance).0;
    let class_label = if fraction > cfg.cone_fraction {
        ClassLabel::Cone
    } else {
        match clusters.len() {
            0 => ClassLabel::Empty,
            1 => ClassLabel::Mono,
            2 => ClassLabel::Bi,
            _ => ClassLabel::FiniteK,
        }
    };
    Ok(ScanReport {
        at: x.to_vec(),
        resolution: cfg.resolution,
        grid_points: grid.len(),
        acceptance_fraction: fraction,
        min_grid_residual,
        accepted,
        clusters,
        span_dim,
        class_label,
    })
}

fn span_of(accepted: &[AcceptedDirection], n: usize, tol: f64) -> (usize, Vec<Vec<f64>>) {
    if accepted.is_empty() {
        return (0, Vec::new());
    }
    let a = Mat::from_fn(n, accepted.len(), |i, j| accepted[j].direction[i]);
    let svd = a.svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let basis = idx.iter().map(|&i| u.column(i).iter().copied().collect()).collect();
    (idx.len(), basis)
}

/// Dimension and a Euclidean-orthonormal basis of the span of the accepted
/// directions.
pub fn span_e(report: &ScanReport) -> (usize, Vec<Vec<f64>>) {
    let n = report.at.len();
    span_of(&report.accepted, n, 1e-8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilitySample {
    pub member: bool,
    pub residual: f64,
}

/// Whether the lightlike hyperplane u⊥ lies in the integrability domain,
/// i.e. exp_x(u⊥) is geodesic near x.
pub fn tautological_integrability_sample(
    m: &MetricField,
    x: &[f64],
    u: &[f64],
    cfg: &ScanConfig,
) -> Result<IntegrabilitySample> {
    let n = m.dim();
    if u.len() != n || x.len() != n {
        return Err(GeomError::Dimension { expected: n, got: u.len() });
    }
    let g = m.g(x)?;
    let uu = linalg::bilinear(&g, u, u);
    if uu.abs() > ISOTROPY_TOL * linalg::dot(u, u).max(1e-300) {
        return Err(GeomError::Invalid(format!("direction is not isotropic: g(u,u) = {uu:e}")));
    }
    // the (1, ω) representative in the frame
    let frame = lorentz_frame(m, x)?;
    let (_, inv) = linalg::det_inverse(&frame);
    let inv = inv.ok_or_else(|| GeomError::Invalid("singular frame".into()))?;
    let f = inv * Vector::from_column_slice(u);
    if f[0].abs() < 1e-12 {
        return Err(GeomError::Invalid("zero direction".into()));
    }
    let omega = linalg::normalized(&f.iter().skip(1).map(|c| c / f[0]).collect::<Vec<_>>());
    let probe = Probe { m, x, frame: &frame, cfg };
    let residual = linalg::max_abs(probe.deviations(&omega, &complement(&omega))?);
    Ok(IntegrabilitySample { member: residual < cfg.certificate, residual })
}
