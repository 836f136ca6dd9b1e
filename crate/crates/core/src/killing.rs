//! Killing equation residuals, lightlike Killing fields and isometry
//! extension to warped products.

use crate::error::{GeomError, Result};
use crate::field::{CoordMap, VectorField};
use crate::linalg::{self, Mat};
use crate::metric::{random_unit, MetricField};
use crate::models::{warped, WarpedSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Lie derivative (L_V g)_ij = V^k ∂_k g_ij + g_kj ∂_i V^k + g_ik ∂_j V^k.
pub fn lie_derivative(m: &MetricField, field: &VectorField, p: &[f64]) -> Result<Mat> {
    let n = m.dim();
    if field.dim() != n {
        return Err(GeomError::Dimension { expected: n, got: field.dim() });
    }
    let (g, dg) = m.metric_d1(p)?;
    let (v, dv) = field.eval_jacobian(p)?;
    Ok(Mat::from_fn(n, n, |i, j| {
        let mut acc = 0.0;
        for k in 0..n {
            acc += v[k] * dg[k][(i, j)] + g[(k, j)] * dv[k][i] + g[(i, k)] * dv[k][j];
        }
        acc
    }))
}

/// max |(L_V g)_ij| at `p`; this is ∇_iV_j + ∇_jV_i written without Γ.
pub fn killing_residual(m: &MetricField, field: &VectorField, p: &[f64]) -> Result<f64> {
    Ok(lie_derivative(m, field, p)?.abs().max())
}

/// Largest Killing residual of `field` over `grid`.
pub fn killing_residual_on(m: &MetricField, field: &VectorField, grid: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in grid {
        worst = worst.max(killing_residual(m, field, p)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightlikeCheck {
    pub lightlike_everywhere: bool,
    /// Largest |g(V,V)| / (1 + |V|²) over the grid.
    pub worst: f64,
}

/// True iff |g(V,V)| < 1e-9 (1 + |V|²) at every grid point.
pub fn lightlike_check(m: &MetricField, field: &VectorField, grid: &[Vec<f64>]) -> Result<LightlikeCheck> {
    if grid.is_empty() {
        return Err(GeomError::Invalid("grid must not be empty".into()));
    }
    let mut worst = 0.0f64;
    for p in grid {
        let g = m.g(p)?;
        let v = field.eval(p)?;
        let q = linalg::bilinear(&g, &v, &v);
        worst = worst.max(q.abs() / (1.0 + linalg::dot(&v, &v)));
    }
    Ok(LightlikeCheck { lightlike_everywhere: worst < 1e-9, worst })
}

/// Euclidean norm of the components of ∇_V V at `p`.
pub fn geodesic_orbit_residual(m: &MetricField, field: &VectorField, p: &[f64]) -> Result<f64> {
    let (v, dv) = field.eval_jacobian(p)?;
    if linalg::norm(&v) < 1e-14 {
        return Err(GeomError::ZeroField(p.to_vec()));
    }
    let ch = m.christoffel(p)?;
    let gam = ch.contract(&v, &v);
    let acc: Vec<f64> = (0..v.len())
        .map(|k| (0..v.len()).map(|i| v[i] * dv[k][i]).sum::<f64>() + gam[k])
        .collect();
    Ok(linalg::norm(&acc))
}

/// A unit coefficient vector c (Euclidean, sign-normalized) with
/// `objective = max_p |g(Σ cᵢVᵢ, Σ cᵢVᵢ)(p)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightlikeCandidate {
    pub coeffs: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Random starting points in addition to the coordinate ones.
    pub trials: usize,
    pub seed: u64,
    /// Candidates must satisfy objective below this.
    pub accept: f64,
    /// Basis fields must be Killing to this tolerance on the grid.
    pub basis_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { trials: 64, seed: 0, accept: 1e-6, basis_tolerance: 1e-8, max_iterations: 200 }
    }
}

fn gram_residuals(grams: &[Mat], c: &[f64]) -> Vec<f64> {
    let cc = linalg::dot(c, c);
    grams.iter().map(|g| linalg::bilinear(g, c, c) / cc).collect()
}

fn objective(grams: &[Mat], c: &[f64]) -> f64 {
    linalg::max_abs(gram_residuals(grams, c))
}

// Levenberg–Marquardt on r_p(c) = cᵀG_pc / |c|², which is scale invariant,
// so the iterate is renormalized after every step.
fn refine(grams: &[Mat], start: &[f64], max_iter: usize) -> Vec<f64> {
    let k = start.len();
    let mut c = linalg::normalized(start);
    let mut r = gram_residuals(grams, &c);
    let mut cost: f64 = r.iter().map(|x| x * x).sum();
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if cost < 1e-30 {
            break;
        }
        // with |c| = 1: ∂r/∂c = 2 G c − 2 r c
        let jac = Mat::from_fn(grams.len(), k, |p, a| {
            let gc: f64 = (0..k).map(|b| grams[p][(a, b)] * c[b]).sum();
            2.0 * gc - 2.0 * r[p] * c[a]
        });
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * nalgebra::DVector::from_vec(r.clone());
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..k {
                a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = linalg::solve(&a, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = linalg::normalized(&linalg::axpy(-1.0, step.as_slice(), &c));
            let tr = gram_residuals(grams, &trial);
            let tcost: f64 = tr.iter().map(|x| x * x).sum();
            if tcost < cost {
                c = trial;
                r = tr;
                let rel = (cost - tcost) / cost.max(1e-300);
                cost = tcost;
                lambda = (lambda * 0.3).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    c
}

fn sign_normalize(c: &mut [f64]) {
    let big = c.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
    if big < 0.0 {
        for x in c.iter_mut() {
            *x = -*x;
        }
    }
}

/// Searches the span of a Killing basis for fields that are isotropic at
/// every grid point.
///
/// Starts from every eᵢ, eᵢ ± eⱼ and `trials` seeded random unit vectors,
/// refines each by Levenberg–Marquardt on the grid residuals and keeps the
/// distinct (up to sign) minima with objective below `accept`, sorted by
/// objective.
pub fn lightlike_killing_search(
    m: &MetricField,
    basis: &[VectorField],
    grid: &[Vec<f64>],
    cfg: &SearchConfig,
) -> Result<Vec<LightlikeCandidate>> {
    if basis.is_empty() || grid.is_empty() {
        return Err(GeomError::Invalid("basis and grid must be nonempty".into()));
    }
    for f in basis {
        let res = killing_residual_on(m, f, grid)?;
        if res >= cfg.basis_tolerance {
            return Err(GeomError::Invalid(format!(
                "basis field `{}` is not Killing on the grid (residual {res:e})",
                f.name()
            )));
        }
    }
    let k = basis.len();
    let mut grams = Vec::with_capacity(grid.len());
    for p in grid {
        let g = m.g(p)?;
        let vals = basis.iter().map(|f| f.eval(p)).collect::<Result<Vec<_>>>()?;
        grams.push(Mat::from_fn(k, k, |a, b| linalg::bilinear(&g, &vals[a], &vals[b])));
    }
    let mut starts = Vec::new();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        starts.push(e);
        for j in i + 1..k {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                e[j] = s;
                starts.push(e);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.trials {
        starts.push(random_unit(k, &mut rng));
    }
    let refined: Vec<LightlikeCandidate> = starts
        .par_iter()
        .map(|s| {
            let mut c = refine(&grams, s, cfg.max_iterations);
            sign_normalize(&mut c);
            LightlikeCandidate { objective: objective(&grams, &c), coeffs: c }
        })
        .collect();
    let mut kept: Vec<LightlikeCandidate> = Vec::new();
    for cand in refined.into_iter().filter(|c| c.objective < cfg.accept) {
        let dup = kept.iter().any(|k| {
            let d: f64 = k.coeffs.iter().zip(&cand.coeffs).map(|(a, b)| (a - b).powi(2)).sum();
            d.sqrt() < 1e-4
        });
        if !dup {
            kept.push(cand);
        }
    }
    kept.sort_by(|a, b| a.objective.total_cmp(&b.objective).then_with(|| cmp_vec(&a.coeffs, &b.coeffs)));
    Ok(kept)
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.total_cmp(y);
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Pullback `φ*g` at `p`: Jᵀ g(φ(p)) J.
pub fn pullback(target: &MetricField, phi: &CoordMap, p: &[f64]) -> Result<Mat> {
    let (y, jac) = phi.eval_jacobian(p)?;
    let g = target.g(&y)?;
    Ok(jac.transpose() * g * jac)
}

/// max over `grid` of |f̄*G − G| for f̄(x, y) = (x, f(y)) on the warped
/// product of `spec`. `f` maps fiber coordinates to fiber coordinates;
/// grid points are full product points.
pub fn extend_isometry_pullback_residual(spec: &WarpedSpec, f: &CoordMap, grid: &[Vec<f64>]) -> Result<f64> {
    let k = spec.base_dim();
    let nf = spec.fiber.dim();
    if f.source_dim() != nf || f.target_dim() != nf {
        return Err(GeomError::Dimension { expected: nf, got: f.target_dim() });
    }
    let big = warped(spec)?;
    let n = big.dim();
    let mut worst = 0.0f64;
    for p in grid {
        if p.len() != n {
            return Err(GeomError::Dimension { expected: n, got: p.len() });
        }
        let (fy, df) = f.eval_jacobian(&p[k..])?;
        let mut q = p[..k].to_vec();
        q.extend_from_slice(&fy);
        let mut jac = Mat::zeros(n, n);
        for i in 0..k {
            jac[(i, i)] = 1.0;
        }
        for a in 0..nf {
            for b in 0..nf {
                jac[(k + a, k + b)] = df[(a, b)];
            }
        }
        let pulled = jac.transpose() * big.g(&q)? * &jac;
        worst = worst.max((pulled - big.g(p)?).abs().max());
    }
    Ok(worst)
}
