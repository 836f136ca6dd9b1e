//! Immersed submanifolds: induced metric, second fundamental form,
//! Weingarten maps, and a geodesy test for lightlike hypersurfaces.

use crate::error::{GeomError, Result};
use crate::expr::{parse, Expr};
use crate::field::CoordMap;
use crate::geodesic::geodesic_endpoint;
use crate::linalg::{self, Mat, Vector};
use crate::metric::{Interval, MetricField};
use serde::{Deserialize, Serialize};

/// |det| of the induced metric at or below this counts as degenerate.
pub const DEGENERATE_INDUCED: f64 = 1e-10;
/// Residuals below this certify geodesy (or umbilicity).
pub const GEODESIC_CERTIFICATE: f64 = 1e-7;
/// Residuals above this reject geodesy.
pub const GEODESIC_REJECTION: f64 = 1e-4;

/// A parametrized piece of submanifold: params ↦ chart point.
pub trait Surface: Sync {
    fn ambient_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn point(&self, u: &[f64]) -> Result<Vec<f64>>;
    /// Partial derivatives as columns (ambient_dim x param_dim).
    fn tangent(&self, u: &[f64]) -> Result<Mat>;
}

/// Expression-defined immersion of a parameter box into a chart.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub name: String,
    map: CoordMap,
    pub domain_box: Vec<Interval>,
}

impl Immersion {
    pub fn new(name: impl Into<String>, params: &[String], map: Vec<Expr>, domain_box: Vec<Interval>) -> Result<Self> {
        if domain_box.len() != params.len() {
            return Err(GeomError::Dimension { expected: params.len(), got: domain_box.len() });
        }
        if params.is_empty() {
            return Err(GeomError::Invalid("an immersion needs at least one parameter".into()));
        }
        Ok(Immersion { name: name.into(), map: CoordMap::new(params, map)?, domain_box })
    }

    pub fn parse<S: AsRef<str>>(
        name: impl Into<String>,
        params: &[&str],
        map: &[S],
        domain_box: Vec<Interval>,
    ) -> Result<Self> {
        let params: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        let exprs = map.iter().map(|s| parse(s.as_ref(), &params)).collect::<std::result::Result<Vec<_>, _>>()?;
        Immersion::new(name, &params, exprs, domain_box)
    }

    pub fn params(&self) -> &[String] {
        self.map.source()
    }
    pub fn map_exprs(&self) -> &[Expr] {
        self.map.exprs()
    }

    pub fn domain_center(&self) -> Vec<f64> {
        self.domain_box.iter().map(|&(a, b)| 0.5 * (a + b)).collect()
    }

    /// The product immersion `(x, u) ↦ (x, φ(u))` for a base factor with
    /// coordinates `base_coords` (used for L × S inside L ×_w N).
    pub fn lift(&self, base_coords: &[String], base_box: &[Interval]) -> Result<Immersion> {
        let k = base_coords.len();
        let mut params: Vec<String> = base_coords.to_vec();
        for p in self.params() {
            if params.contains(p) {
                return Err(GeomError::Invalid(format!("parameter `{p}` clashes with a base coordinate")));
            }
            params.push(p.clone());
        }
        let mut map: Vec<Expr> = (0..k).map(Expr::var).collect();
        map.extend(self.map.exprs().iter().map(|e| e.shift_vars(k)));
        let mut dom = base_box.to_vec();
        dom.extend_from_slice(&self.domain_box);
        Immersion::new(format!("lift({})", self.name), &params, map, dom)
    }

    fn check(&self, m: &MetricField, u: &[f64]) -> Result<()> {
        if self.map.target_dim() != m.dim() {
            return Err(GeomError::Dimension { expected: m.dim(), got: self.map.target_dim() });
        }
        if u.len() != self.params().len() {
            return Err(GeomError::Dimension { expected: self.params().len(), got: u.len() });
        }
        Ok(())
    }

    fn jacobian_checked(&self, u: &[f64]) -> Result<(Vec<f64>, Mat)> {
        let (x, jac) = self.map.eval_jacobian(u)?;
        let sv = jac.clone().singular_values();
        let sigma = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if !(sigma > 1e-8) {
            return Err(GeomError::RankDeficient { at: u.to_vec(), sigma });
        }
        Ok((x, jac))
    }
}

impl Surface for Immersion {
    fn ambient_dim(&self) -> usize {
        self.map.target_dim()
    }
    fn param_dim(&self) -> usize {
        self.map.source_dim()
    }
    fn point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.map.eval(u)
    }
    fn tangent(&self, u: &[f64]) -> Result<Mat> {
        Ok(self.map.eval_jacobian(u)?.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedMetric {
    pub h: Vec<Vec<f64>>,
    pub det: f64,
    pub degenerate: bool,
}

fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Pullback of the ambient metric to the parameter space at `u`.
pub fn induced_metric(m: &MetricField, im: &Immersion, u: &[f64]) -> Result<InducedMetric> {
    im.check(m, u)?;
    let (x, jac) = im.jacobian_checked(u)?;
    let g = m.g(&x)?;
    let h = jac.transpose() * g * &jac;
    let det = h.determinant();
    Ok(InducedMetric { h: to_rows(&h), det, degenerate: det.abs() <= DEGENERATE_INDUCED })
}

/// Second fundamental form in the coordinate frame, as chart vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalForm {
    pub at: Vec<f64>,
    /// `ii[a][b]` is the normal part of ∇_{X_a} X_b.
    pub ii: Vec<Vec<Vec<f64>>>,
    /// Least-squares n with II ≈ h ⊗ n.
    pub mean_normal: Vec<f64>,
    /// Euclidean (Frobenius) norm of II.
    pub norm: f64,
    /// Frobenius norm of II − h ⊗ n.
    pub umbilic_residual: f64,
    /// max |II_ab − II_ba|.
    pub asymmetry: f64,
}

struct Frame {
    x: Vec<f64>,
    jac: Mat,
    g: Mat,
    h: Mat,
    h_inv: Mat,
}

fn frame(m: &MetricField, im: &Immersion, u: &[f64]) -> Result<Frame> {
    im.check(m, u)?;
    let (x, jac) = im.jacobian_checked(u)?;
    let g = m.g(&x)?;
    let h = jac.transpose() * &g * &jac;
    let (det, inv) = linalg::det_inverse(&h);
    match inv {
        Some(h_inv) if det.abs() > DEGENERATE_INDUCED => Ok(Frame { x, jac, g, h, h_inv }),
        _ => Err(GeomError::DegenerateSubmanifold { at: u.to_vec(), det: det.abs() }),
    }
}

impl Frame {
    // tangential part of a chart vector w: X h⁻¹ Xᵀ g w
    fn tangential(&self, w: &Vector) -> Vector {
        let c = &self.h_inv * (self.jac.transpose() * (&self.g * w));
        &self.jac * c
    }
}

/// II_ab = ∇_{X_a}X_b − (tangential part), with ∇_{X_a}X_b = ∂_a∂_b φ + Γ(X_a, X_b).
pub fn second_fundamental_form(m: &MetricField, im: &Immersion, u: &[f64]) -> Result<SecondFundamentalForm> {
    let fr = frame(m, im, u)?;
    let (_, _, hess) = im.map.eval_jet2(u)?;
    let ch = m.christoffel(&fr.x)?;
    let n = m.dim();
    let k = u.len();
    let col = |a: usize| -> Vec<f64> { fr.jac.column(a).iter().copied().collect() };
    let mut ii = vec![vec![vec![0.0; n]; k]; k];
    for a in 0..k {
        for b in 0..k {
            let gam = ch.contract(&col(a), &col(b));
            let nab = Vector::from_fn(n, |i, _| hess[i][(a, b)] + gam[i]);
            let nor = &nab - fr.tangential(&nab);
            ii[a][b] = nor.iter().copied().collect();
        }
    }
    let mut num = vec![0.0; n];
    let mut den = 0.0;
    for a in 0..k {
        for b in a..k {
            let hab = fr.h[(a, b)];
            den += hab * hab;
            for i in 0..n {
                num[i] += hab * ii[a][b][i];
            }
        }
    }
    let mean_normal: Vec<f64> = num.iter().map(|x| if den > 0.0 { x / den } else { 0.0 }).collect();
    let mut norm2 = 0.0;
    let mut umb2 = 0.0;
    let mut asym = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            for i in 0..n {
                norm2 += ii[a][b][i].powi(2);
                umb2 += (ii[a][b][i] - fr.h[(a, b)] * mean_normal[i]).powi(2);
                asym = asym.max((ii[a][b][i] - ii[b][a][i]).abs());
            }
        }
    }
    Ok(SecondFundamentalForm {
        at: u.to_vec(),
        ii,
        mean_normal,
        norm: norm2.sqrt(),
        umbilic_residual: umb2.sqrt(),
        asymmetry: asym,
    })
}

/// Matrix of A_Z in the coordinate frame: column a holds the coefficients of
/// the tangential part of ∇_{X_a} Z, where Z is extended off `u` as the
/// normal projection of its constant chart components. With this sign
/// ⟨II(X,Y), Z⟩ = −⟨A_Z X, Y⟩.
pub fn weingarten(m: &MetricField, im: &Immersion, u: &[f64], z: &[f64]) -> Result<Mat> {
    let fr = frame(m, im, u)?;
    let n = m.dim();
    let k = u.len();
    if z.len() != n {
        return Err(GeomError::Dimension { expected: n, got: z.len() });
    }
    let zv = Vector::from_column_slice(z);
    let gz = &fr.g * &zv;
    let znorm = linalg::norm(z);
    for a in 0..k {
        let xa = fr.jac.column(a);
        let t = xa.dot(&gz);
        if t.abs() > 1e-9 * (1.0f64).max(znorm * xa.norm()) {
            return Err(GeomError::NotNormal(t.abs()));
        }
    }
    let normal_ext = |up: &[f64]| -> Result<Vector> {
        let f = frame(m, im, up)?;
        Ok(&zv - f.tangential(&zv))
    };
    let ch = m.christoffel(&fr.x)?;
    let hstep = 1e-3;
    let mut a_mat = Mat::zeros(k, k);
    for a in 0..k {
        let shifted = |d: f64| -> Result<Vector> {
            let mut up = u.to_vec();
            up[a] += d;
            normal_ext(&up)
        };
        let dz = (-shifted(2.0 * hstep)? + shifted(hstep)? * 8.0 - shifted(-hstep)? * 8.0 + shifted(-2.0 * hstep)?)
            / (12.0 * hstep);
        let xa: Vec<f64> = fr.jac.column(a).iter().copied().collect();
        let gam = ch.contract(&xa, z);
        let nab = dz + Vector::from_vec(gam);
        let coef = &fr.h_inv * (fr.jac.transpose() * (&fr.g * nab));
        a_mat.set_column(a, &coef);
    }
    Ok(a_mat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmanifoldClass {
    Geodesic,
    Umbilical,
    Generic,
}

/// Geodesic if ‖II‖ < 1e-7, umbilical if ‖II − h⊗n‖ < 1e-7, else generic.
pub fn classify(m: &MetricField, im: &Immersion, u: &[f64]) -> Result<(SubmanifoldClass, SecondFundamentalForm)> {
    let sff = second_fundamental_form(m, im, u)?;
    let class = if sff.norm < GEODESIC_CERTIFICATE {
        SubmanifoldClass::Geodesic
    } else if sff.umbilic_residual < GEODESIC_CERTIFICATE {
        SubmanifoldClass::Umbilical
    } else {
        SubmanifoldClass::Generic
    };
    Ok((class, sff))
}

/// Three-way reading of a geodesy residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesyVerdict {
    Geodesic,
    Inconclusive,
    NotGeodesic,
}

impl GeodesyVerdict {
    pub fn from_residual(r: f64, certificate: f64, rejection: f64) -> Self {
        if r < certificate {
            GeodesyVerdict::Geodesic
        } else if r > rejection {
            GeodesyVerdict::NotGeodesic
        } else {
            GeodesyVerdict::Inconclusive
        }
    }
}

/// Geodesic probing parameters for the deviation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Affine length of each probe geodesic (Euclidean-unit velocity).
    pub step: f64,
    /// RK4 steps per probe geodesic.
    pub substeps: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { step: 0.02, substeps: 16 }
    }
}

/// Probe directions in parameter space: basis vectors, then pairwise sums
/// and differences, then a deterministic low-discrepancy fill.
pub fn probe_directions(k: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for a in 0..k {
        let mut e = vec![0.0; k];
        e[a] = 1.0;
        out.push(e);
    }
    for a in 0..k {
        for b in a + 1..k {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; k];
                e[a] = 1.0;
                e[b] = s;
                out.push(e);
            }
        }
    }
    let mut i = 1usize;
    while out.len() < count {
        // additive recurrence with irrational steps, mapped to [-1,1]^k
        let e: Vec<f64> = (0..k)
            .map(|a| {
                let alpha = ((a + 2) as f64).sqrt().fract();
                2.0 * ((i as f64) * alpha).fract() - 1.0
            })
            .collect();
        if linalg::norm(&e) > 1e-3 {
            out.push(e);
        }
        i += 1;
    }
    out.truncate(count.max(1));
    out
}

// Solves surf(u') + t ν = z for (u', t) by Broyden's method started from
// (u0, 0) with Jacobian [T | ν].
fn project_along_normal<S: Surface + ?Sized>(
    surf: &S,
    t0: &Mat,
    nu: &[f64],
    u0: &[f64],
    z: &[f64],
) -> Result<f64> {
    let n = surf.ambient_dim();
    let k = surf.param_dim();
    let mut b = Mat::zeros(n, n);
    for a in 0..k {
        b.set_column(a, &t0.column(a));
    }
    b.set_column(k, &Vector::from_column_slice(nu));
    let resid = |y: &Vector| -> Result<Vector> {
        let p = surf.point(&y.as_slice()[..k])?;
        Ok(Vector::from_fn(n, |i, _| p[i] + y[k] * nu[i] - z[i]))
    };
    let mut y = Vector::zeros(n);
    y.as_mut_slice()[..k].copy_from_slice(u0);
    let mut f = resid(&y)?;
    let scale = linalg::norm(z).max(1.0);
    for _ in 0..60 {
        if f.norm() <= 1e-14 * scale {
            return Ok(y[k]);
        }
        let dy = linalg::solve(&b, &(-&f)).ok_or_else(|| GeomError::Projection("singular Jacobian".into()))?;
        let ynew = &y + &dy;
        let fnew = resid(&ynew)?;
        let step = dy.norm();
        if step <= 1e-13 * (1.0 + y.norm()) {
            // noise level: keep the better iterate and stop
            if fnew.norm() < f.norm() {
                y = ynew;
                f = fnew;
            }
            break;
        }
        // rank-one secant update, skipped for steps dominated by rounding
        if step > 1e-9 * (1.0 + y.norm()) {
            let df = &fnew - &f;
            b += (df - &b * &dy) * dy.transpose() / (step * step);
        }
        y = ynew;
        f = fnew;
    }
    if f.norm() <= 1e-11 * scale {
        return Ok(y[k]);
    }
    Err(GeomError::Projection(format!("residual {:e}", f.norm())))
}

/// Signed second-order deviation coefficients at `u`, one per probe.
///
/// For each probe direction ξ the geodesics from q = surf(u) with Euclidean
/// unit velocity ±v (v ∝ Tξ) are followed for length s and their endpoints
/// projected onto the surface along the Euclidean normal ν; the coefficient
/// is (t₊ + t₋)/(2s²). The symmetric combination removes the first-order
/// error from an inexact tangent. Only hypersurfaces are supported.
pub fn deviation_coefficients<S: Surface + ?Sized>(
    m: &MetricField,
    surf: &S,
    u: &[f64],
    probes: usize,
    cfg: &ProbeConfig,
) -> Result<Vec<f64>> {
    let n = surf.ambient_dim();
    let k = surf.param_dim();
    if n != m.dim() {
        return Err(GeomError::Dimension { expected: m.dim(), got: n });
    }
    if k + 1 != n {
        return Err(GeomError::Invalid("the deviation test needs a hypersurface".into()));
    }
    let q = surf.point(u)?;
    let t = surf.tangent(u)?;
    let nu = linalg::cross_normal(&t);
    let s = cfg.step;
    let mut out = Vec::with_capacity(probes);
    for xi in probe_directions(k, probes) {
        let v = &t * Vector::from_column_slice(&xi);
        let vn = v.norm();
        let vel: Vec<f64> = v.iter().map(|x| x / vn).collect();
        let mut acc = 0.0;
        for sign in [1.0, -1.0] {
            let (z, _) = geodesic_endpoint(m, &q, &vel, sign * s, cfg.substeps)?;
            let u0: Vec<f64> = u.iter().zip(&xi).map(|(a, b)| a + sign * s * b / vn).collect();
            acc += project_along_normal(surf, &t, &nu, &u0, &z)?;
        }
        out.push(acc / (2.0 * s * s));
    }
    Ok(out)
}

/// Geodesy residual of a lightlike hypersurface at `u`: the largest
/// |deviation coefficient| over `probes` tangent directions.
pub fn lightlike_geodesy_test(m: &MetricField, im: &Immersion, u: &[f64], probes: usize) -> Result<f64> {
    lightlike_geodesy_test_with(m, im, u, probes, &ProbeConfig::default())
}

pub fn lightlike_geodesy_test_with(
    m: &MetricField,
    im: &Immersion,
    u: &[f64],
    probes: usize,
    cfg: &ProbeConfig,
) -> Result<f64> {
    let ind = induced_metric(m, im, u)?;
    if !ind.degenerate {
        return Err(GeomError::NotLightlike { at: u.to_vec(), det: ind.det.abs() });
    }
    let d = deviation_coefficients(m, im, u, probes, cfg)?;
    Ok(linalg::max_abs(d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesyResidual {
    pub residual: f64,
    pub lightlike: bool,
}

/// ‖II‖ for nondegenerate submanifolds, the deviation test for lightlike
/// hypersurfaces.
pub fn geodesy_residual(m: &MetricField, im: &Immersion, u: &[f64]) -> Result<GeodesyResidual> {
    let ind = induced_metric(m, im, u)?;
    if ind.degenerate {
        let k = im.param_dim();
        let probes = k + k * (k - 1);
        let d = deviation_coefficients(m, im, u, probes, &ProbeConfig::default())?;
        Ok(GeodesyResidual { residual: linalg::max_abs(d), lightlike: true })
    } else {
        Ok(GeodesyResidual { residual: second_fundamental_form(m, im, u)?.norm, lightlike: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn euclid3() -> MetricField {
        MetricField::parse("e3", &["x", "y", "z"], &[vec!["1", "0", "0"], vec!["1", "0"], vec!["1"]], vec![1, 1, 1])
            .unwrap()
    }

    fn sphere() -> Immersion {
        Immersion::parse(
            "sphere",
            &["th", "ph"],
            &["sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)"],
            vec![(0.3, 2.8), (-3.0, 3.0)],
        )
        .unwrap()
    }

    #[test]
    fn sphere_is_umbilical_with_inward_normal() {
        let u = [0.9, 0.4];
        let (class, sff) = classify(&euclid3(), &sphere(), &u).unwrap();
        assert_eq!(class, SubmanifoldClass::Umbilical);
        let x = sphere().point(&u).unwrap();
        for i in 0..3 {
            assert!((sff.mean_normal[i] + x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_weingarten_outward_is_identity() {
        let u = [0.9, 0.4];
        let x = sphere().point(&u).unwrap();
        let a = weingarten(&euclid3(), &sphere(), &u, &x).unwrap();
        assert!((a - Mat::identity(2, 2)).abs().max() < 1e-9);
        assert!(matches!(
            weingarten(&euclid3(), &sphere(), &u, &[1.0, 0.0, 0.0]),
            Err(GeomError::NotNormal(_))
        ));
    }

    #[test]
    fn null_plane_is_lightlike_geodesic() {
        let m = models::minkowski(3).unwrap();
        let im = Immersion::parse("null plane", &["p", "q"], &["p", "p", "q"], vec![(-1.0, 1.0); 2]).unwrap();
        let ind = induced_metric(&m, &im, &[0.1, 0.2]).unwrap();
        assert!(ind.degenerate);
        let r = lightlike_geodesy_test(&m, &im, &[0.1, 0.2], 6).unwrap();
        assert!(r < 1e-10, "{r:e}");
    }

    #[test]
    fn nondegenerate_surface_is_refused_by_lightlike_test() {
        let m = models::minkowski(3).unwrap();
        let im = Immersion::parse("t=0", &["p", "q"], &["0", "p", "q"], vec![(-1.0, 1.0); 2]).unwrap();
        assert!(matches!(lightlike_geodesy_test(&m, &im, &[0.0, 0.0], 4), Err(GeomError::NotLightlike { .. })));
        assert!(matches!(second_fundamental_form(&m, &Immersion::parse("n", &["p", "q"], &["p", "p", "q"], vec![(-1.0, 1.0); 2]).unwrap(), &[0.0, 0.0]), Err(GeomError::DegenerateSubmanifold { .. })));
    }
}
