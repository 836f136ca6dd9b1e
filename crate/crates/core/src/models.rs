//! Named model metrics and their Killing algebras.
//!
//! Charts used:
//!
//! * Minkowski: `-dt² + Σ dx_i²` on `[-5,5]^n`.
//! * de Sitter of radius r: the flat slicing `-dt² + e^{2t/r} Σ dx_i²`,
//!   sectional curvature `1/r²`.
//! * anti-de Sitter: in dimension 3, `r²` times the normalized Killing form
//!   of SL(2,R) in the coordinates `g = exp(aH) exp(bP) exp(cQ)` with
//!   `H = diag(1,-1)`, `P = E+F`, `Q = E-F` and `<X,Y> = ½ tr(XY)` (so the
//!   curvature is `-1/r²`). Other dimensions use the Poincaré chart
//!   `r² dy² + r² e^{-2y} (-dt² + Σ dx_i²)`, also available directly as
//!   [`anti_de_sitter_poincare`].
//! * Berger SL(2,R): the same group chart with the left-invariant metric
//!   `ε θ_H² + θ_P² − θ_Q²`, where `θ` is the Maurer–Cartan form. Only the
//!   hyperbolic direction H is rescaled; ε = 1 is AdS₃.

use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::field::VectorField;
use crate::metric::{box_grid, MetricField};

fn v(i: usize) -> Expr {
    Expr::var(i)
}

fn c(x: f64) -> Expr {
    Expr::c(x)
}

fn spatial_names(count: usize) -> Vec<String> {
    match count {
        0 => vec![],
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=count).map(|i| format!("x{i}")).collect(),
    }
}

fn lorentz_coords(n: usize) -> Vec<String> {
    let mut out = vec!["t".to_string()];
    out.extend(spatial_names(n - 1));
    out
}

fn lorentz_signature(n: usize) -> Vec<i8> {
    let mut s = vec![1; n];
    s[0] = -1;
    s
}

fn check_dim(n: usize) -> Result<()> {
    if !(2..=crate::expr::MAX_DIM).contains(&n) {
        return Err(GeomError::Invalid(format!(
            "dimension must be between 2 and {}",
            crate::expr::MAX_DIM
        )));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeomError::Invalid("radius must be positive".into()));
    }
    Ok(())
}

/// Minkowski space `diag(-1, 1, ..., 1)`.
pub fn minkowski(n: usize) -> Result<MetricField> {
    check_dim(n)?;
    let diag = (0..n).map(|i| c(if i == 0 { -1.0 } else { 1.0 })).collect();
    MetricField::diagonal(format!("minkowski({n})"), lorentz_coords(n), diag, lorentz_signature(n))?
        .with_valid_box(vec![(-5.0, 5.0); n])
}

/// Euclidean space of dimension `k ≥ 1` with coordinates `s` or `s1..sk`.
pub fn euclidean(k: usize) -> Result<MetricField> {
    let coords = base_names(k);
    MetricField::diagonal(format!("euclidean({k})"), coords, vec![c(1.0); k], vec![1; k])
}

/// Hyperbolic space `ds1² + e^{2 s1} Σ_{i>1} ds_i²` of curvature −1, `k ≥ 2`.
pub fn hyperbolic(k: usize) -> Result<MetricField> {
    if k < 2 {
        return Err(GeomError::Invalid("hyperbolic space needs dimension >= 2".into()));
    }
    let coords = base_names(k);
    let diag = (0..k).map(|i| if i == 0 { c(1.0) } else { (c(2.0) * v(0)).exp() }).collect();
    MetricField::diagonal(format!("hyperbolic({k})"), coords, diag, vec![1; k])?
        .with_valid_box(vec![(-5.0, 5.0); k])
}

fn base_names(k: usize) -> Vec<String> {
    if k == 1 {
        vec!["s".into()]
    } else {
        (1..=k).map(|i| format!("s{i}")).collect()
    }
}

/// de Sitter space of radius `r` in the flat slicing.
pub fn de_sitter(n: usize, r: f64) -> Result<MetricField> {
    check_dim(n)?;
    check_radius(r)?;
    let scale = (c(2.0 / r) * v(0)).exp();
    let diag = (0..n).map(|i| if i == 0 { c(-1.0) } else { scale.clone() }).collect();
    MetricField::diagonal(format!("de_sitter({n},{r})"), lorentz_coords(n), diag, lorentz_signature(n))?
        .with_valid_box(vec![(-5.0 * r, 5.0 * r); n])
}

/// anti-de Sitter space of radius `r`; the SL(2,R) chart when `n = 3`,
/// otherwise the Poincaré chart.
pub fn anti_de_sitter(n: usize, r: f64) -> Result<MetricField> {
    check_dim(n)?;
    check_radius(r)?;
    if n == 3 {
        let m = berger_sl2(1.0)?;
        Ok(m.scaled(r * r)?.with_name(format!("anti_de_sitter(3,{r})")))
    } else {
        anti_de_sitter_poincare(n, r)
    }
}

fn poincare_coords(n: usize) -> Vec<String> {
    let mut out = vec!["y".to_string(), "t".to_string()];
    out.extend(match n - 2 {
        1 => vec!["x".to_string()],
        k => (1..=k).map(|i| format!("x{i}")).collect(),
    });
    out
}

/// Poincaré chart `r² dy² + r² e^{-2y} (-dt² + Σ dx_i²)`, coordinates
/// `(y, t, x...)`.
pub fn anti_de_sitter_poincare(n: usize, r: f64) -> Result<MetricField> {
    check_dim(n)?;
    check_radius(r)?;
    let r2 = r * r;
    let conf = c(r2) * (c(-2.0) * v(0)).exp();
    let diag = (0..n)
        .map(|i| match i {
            0 => c(r2),
            1 => -conf.clone(),
            _ => conf.clone(),
        })
        .collect();
    let mut sig = vec![1; n];
    sig[1] = -1;
    MetricField::diagonal(format!("anti_de_sitter_poincare({n},{r})"), poincare_coords(n), diag, sig)?
        .with_valid_box(vec![(-5.0, 5.0); n])
}

// Maurer–Cartan coframe of exp(aH)exp(bP)exp(cQ): rows θ_H, θ_P, θ_Q over
// (da, db, dc).
fn sl2_coframe() -> [[Expr; 3]; 3] {
    let ch = (c(2.0) * v(1)).cosh();
    let sh = (c(2.0) * v(1)).sinh();
    let co = (c(2.0) * v(2)).cos();
    let si = (c(2.0) * v(2)).sin();
    [
        [ch.clone() * co.clone(), -si.clone(), c(0.0)],
        [ch * si, co, c(0.0)],
        [sh, c(0.0), c(1.0)],
    ]
}

fn sl2_coords() -> Vec<String> {
    vec!["a".into(), "b".into(), "c".into()]
}

/// Berger-deformed SL(2,R): the Killing-form metric with the hyperbolic
/// direction H rescaled by `epsilon`.
pub fn berger_sl2(epsilon: f64) -> Result<MetricField> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GeomError::Invalid("epsilon must be positive".into()));
    }
    let th = sl2_coframe();
    let eta = [epsilon, 1.0, -1.0];
    let mut g = vec![vec![Expr::zero(); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut e = Expr::zero();
            for k in 0..3 {
                if th[k][i].is_zero() || th[k][j].is_zero() {
                    continue;
                }
                e = e + c(eta[k]) * (th[k][i].clone() * th[k][j].clone());
            }
            g[i][j] = e.clone();
            g[j][i] = e;
        }
    }
    // θ_H, θ_P spacelike, θ_Q timelike; the signature is read off the
    // coframe basis, one negative direction.
    MetricField::new(format!("berger_sl2({epsilon})"), sl2_coords(), g, vec![1, 1, -1])?
        .with_valid_box(vec![(-2.0, 2.0); 3])?
        .with_sample_box(vec![(-0.5, 0.5); 3])
}

fn field(name: impl Into<String>, coords: &[String], comp: Vec<Expr>) -> Result<VectorField> {
    VectorField::new(name, coords, comp)
}

/// Translations ∂_t, ∂_x, ... of Minkowski space.
pub fn minkowski_translations(n: usize) -> Result<Vec<VectorField>> {
    check_dim(n)?;
    let coords = lorentz_coords(n);
    (0..n)
        .map(|i| {
            let comp = (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect();
            field(format!("d_{}", coords[i]), &coords, comp)
        })
        .collect()
}

/// Lorentz generators of a flat block with coordinates at `idx` (first one
/// timelike): boosts x_i∂_t + t∂_i and rotations x_i∂_j − x_j∂_i.
fn lorentz_generators(n: usize, idx: &[usize], coords: &[String]) -> Result<Vec<VectorField>> {
    let mut out = Vec::new();
    let t = idx[0];
    for &i in &idx[1..] {
        let mut comp = vec![Expr::zero(); n];
        comp[t] = v(i);
        comp[i] = v(t);
        out.push(field(format!("boost_{}", coords[i]), coords, comp)?);
    }
    for (a, &i) in idx[1..].iter().enumerate() {
        for &j in &idx[2 + a..] {
            let mut comp = vec![Expr::zero(); n];
            comp[i] = -v(j);
            comp[j] = v(i);
            out.push(field(format!("rot_{}{}", coords[i], coords[j]), coords, comp)?);
        }
    }
    Ok(out)
}

/// Translations, boosts and rotations.
pub fn minkowski_killing_basis(n: usize) -> Result<Vec<VectorField>> {
    let coords = lorentz_coords(n);
    let mut out = minkowski_translations(n)?;
    let idx: Vec<usize> = (0..n).collect();
    out.extend(lorentz_generators(n, &idx, &coords)?);
    Ok(out)
}

/// Killing fields of [`de_sitter`]: spatial translations and rotations, the
/// dilation `-r∂_t + x·∂_x` and the fields
/// `-2r x_i ∂_t + 2 x_i x·∂_x − (|x|² − r² e^{-2t/r}) ∂_i`.
pub fn de_sitter_killing_basis(n: usize, r: f64) -> Result<Vec<VectorField>> {
    check_dim(n)?;
    check_radius(r)?;
    let coords = lorentz_coords(n);
    let mut out = Vec::new();
    for i in 1..n {
        let mut comp = vec![Expr::zero(); n];
        comp[i] = c(1.0);
        out.push(field(format!("d_{}", coords[i]), &coords, comp)?);
    }
    for i in 1..n {
        for j in i + 1..n {
            let mut comp = vec![Expr::zero(); n];
            comp[i] = -v(j);
            comp[j] = v(i);
            out.push(field(format!("rot_{}{}", coords[i], coords[j]), &coords, comp)?);
        }
    }
    let mut dil = vec![c(-r)];
    dil.extend((1..n).map(v));
    out.push(field("dilation", &coords, dil)?);
    let mut x2 = Expr::zero();
    for j in 1..n {
        x2 = x2 + v(j).powi(2);
    }
    let horizon = c(r * r) * (c(-2.0 / r) * v(0)).exp();
    for i in 1..n {
        let mut comp = vec![c(-2.0 * r) * v(i)];
        for j in 1..n {
            let mut e = c(2.0) * v(i) * v(j);
            if j == i {
                e = e - (x2.clone() - horizon.clone());
            }
            comp.push(e);
        }
        out.push(field(format!("conformal_{}", coords[i]), &coords, comp)?);
    }
    Ok(out)
}

/// Chart components of the left-invariant field with Lie-algebra
/// coefficients (h, p, q) on H, P, Q.
pub fn sl2_left_invariant(h: Expr, p: Expr, q: Expr) -> Vec<Expr> {
    let ch = (c(2.0) * v(1)).cosh();
    let th = (c(2.0) * v(1)).tanh();
    let co = (c(2.0) * v(2)).cos();
    let si = (c(2.0) * v(2)).sin();
    let w = h.clone() * co.clone() + p.clone() * si.clone();
    vec![w.clone() / ch, -(h * si) + p * co, q - th * w]
}

// Ad(g^{-1}) in the basis (H, P, Q) for g = exp(aH)exp(bP)exp(cQ).
fn sl2_inverse_adjoint() -> [[Expr; 3]; 3] {
    let m_a = {
        let ch = (c(2.0) * v(0)).cosh();
        let sh = (c(2.0) * v(0)).sinh();
        [[c(1.0), c(0.0), c(0.0)], [c(0.0), ch.clone(), -sh.clone()], [c(0.0), -sh, ch]]
    };
    let m_b = {
        let ch = (c(2.0) * v(1)).cosh();
        let sh = (c(2.0) * v(1)).sinh();
        [[ch.clone(), c(0.0), sh.clone()], [c(0.0), c(1.0), c(0.0)], [sh, c(0.0), ch]]
    };
    let m_c = {
        let co = (c(2.0) * v(2)).cos();
        let si = (c(2.0) * v(2)).sin();
        [[co.clone(), -si.clone(), c(0.0)], [si, co, c(0.0)], [c(0.0), c(0.0), c(1.0)]]
    };
    mat3_mul(&mat3_mul(&m_c, &m_b), &m_a)
}

fn mat3_mul(x: &[[Expr; 3]; 3], y: &[[Expr; 3]; 3]) -> [[Expr; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut e = Expr::zero();
            for k in 0..3 {
                e = e + x[i][k].clone() * y[k][j].clone();
            }
            e
        })
    })
}

const SL2_BASIS: [&str; 3] = ["H", "P", "Q"];

/// Right-invariant fields X·g for X = H, P, Q. They generate left
/// translations, so they are Killing for every left-invariant metric.
pub fn sl2_right_invariant_fields() -> Result<Vec<VectorField>> {
    let ad = sl2_inverse_adjoint();
    let coords = sl2_coords();
    (0..3)
        .map(|col| {
            let comp = sl2_left_invariant(ad[0][col].clone(), ad[1][col].clone(), ad[2][col].clone());
            field(format!("{}_right", SL2_BASIS[col]), &coords, comp)
        })
        .collect()
}

/// Left-invariant fields for X = H, P, Q.
pub fn sl2_left_invariant_fields() -> Result<Vec<VectorField>> {
    let coords = sl2_coords();
    (0..3)
        .map(|k| {
            let e = |i: usize| c(if i == k { 1.0 } else { 0.0 });
            field(format!("{}_left", SL2_BASIS[k]), &coords, sl2_left_invariant(e(0), e(1), e(2)))
        })
        .collect()
}

/// Killing fields of [`berger_sl2`]: the right-invariant fields plus the
/// left-invariant field along H (for ε = 1 all six invariant fields).
pub fn berger_killing_basis(epsilon: f64) -> Result<Vec<VectorField>> {
    let mut out = sl2_right_invariant_fields()?;
    let left = sl2_left_invariant_fields()?;
    if epsilon == 1.0 {
        out.extend(left);
    } else {
        out.push(left[0].clone());
    }
    Ok(out)
}

/// Killing fields of [`anti_de_sitter_poincare`]: boundary translations and
/// Lorentz transformations, the dilation `∂_y + x^μ∂_μ` and the special
/// conformal fields `2 x_μ (∂_y + x^ν∂_ν) − (η(x,x) + e^{2y}) ∂_μ`.
pub fn poincare_killing_basis(n: usize) -> Result<Vec<VectorField>> {
    check_dim(n)?;
    let coords = poincare_coords(n);
    let mut out = Vec::new();
    for i in 1..n {
        let mut comp = vec![Expr::zero(); n];
        comp[i] = c(1.0);
        out.push(field(format!("d_{}", coords[i]), &coords, comp)?);
    }
    let idx: Vec<usize> = (1..n).collect();
    out.extend(lorentz_generators(n, &idx, &coords)?);
    let mut dil = vec![c(1.0)];
    dil.extend((1..n).map(v));
    out.push(field("dilation", &coords, dil.clone())?);
    let mut xx = -v(1).powi(2);
    for j in 2..n {
        xx = xx + v(j).powi(2);
    }
    let bracket = xx + (c(2.0) * v(0)).exp();
    for mu in 1..n {
        let lower = if mu == 1 { -v(1) } else { v(mu) };
        let mut comp: Vec<Expr> = dil.iter().map(|e| c(2.0) * lower.clone() * e.clone()).collect();
        comp[mu] = comp[mu].clone() - bracket.clone();
        out.push(field(format!("special_{}", coords[mu]), &coords, comp)?);
    }
    Ok(out)
}

/// Killing basis of [`anti_de_sitter`] in whichever chart it uses.
pub fn anti_de_sitter_killing_basis(n: usize) -> Result<Vec<VectorField>> {
    if n == 3 {
        berger_killing_basis(1.0)
    } else {
        poincare_killing_basis(n)
    }
}

/// Data for a warped product `L ×_w N` with metric `h ⊕ w·g`.
#[derive(Debug, Clone)]
pub struct WarpedSpec {
    /// Riemannian factor L with metric h.
    pub base: MetricField,
    /// Lorentzian factor N with metric g.
    pub fiber: MetricField,
    /// Warping function over the base coordinates.
    pub warp: Expr,
}

impl WarpedSpec {
    pub fn new(base: MetricField, fiber: MetricField, warp: Expr) -> Self {
        WarpedSpec { base, fiber, warp }
    }

    /// Parses the warping function over the base coordinates.
    pub fn parse(base: MetricField, fiber: MetricField, warp: &str) -> Result<Self> {
        let e = crate::expr::parse(warp, base.coords())?;
        Ok(WarpedSpec { base, fiber, warp: e })
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// Checks that `warp` only involves base coordinates and is positive on
    /// the base sample box.
    pub fn validate(&self) -> Result<()> {
        let k = self.base.dim();
        if self.warp.vars().iter().any(|&i| i >= k) {
            return Err(GeomError::Invalid("warping function must depend on base coordinates only".into()));
        }
        if self.base.signature().iter().any(|&s| s < 0) {
            return Err(GeomError::Invalid("base factor must be Riemannian".into()));
        }
        let names = self.base.coords();
        let tape = crate::expr::Tape::compile(std::slice::from_ref(&self.warp), names);
        for p in box_grid(self.base.sample_box(), 5) {
            let w = tape.eval_f64(&p)?[0];
            if !(w > 0.0) {
                return Err(GeomError::WarpNotPositive { point: p, value: w });
            }
        }
        Ok(())
    }
}

/// The warped product metric on coordinates `base ++ fiber`.
pub fn warped(spec: &WarpedSpec) -> Result<MetricField> {
    spec.validate()?;
    let k = spec.base.dim();
    let m = spec.fiber.dim();
    let n = k + m;
    let mut coords: Vec<String> = spec.base.coords().to_vec();
    for name in spec.fiber.coords() {
        if coords.contains(name) {
            return Err(GeomError::Invalid(format!(
                "coordinate `{name}` appears in both factors"
            )));
        }
        coords.push(name.clone());
    }
    let mut g = vec![vec![Expr::zero(); n]; n];
    for i in 0..k {
        for j in 0..k {
            g[i][j] = spec.base.component(i, j).clone();
        }
    }
    for i in 0..m {
        for j in 0..m {
            let fib = spec.fiber.component(i, j).shift_vars(k);
            g[k + i][k + j] = spec.warp.clone() * fib;
        }
    }
    let mut sig = spec.base.signature().to_vec();
    sig.extend_from_slice(spec.fiber.signature());
    let name = format!("{} x_w {}", spec.base.name(), spec.fiber.name());
    let mut valid = spec.base.valid_box().to_vec();
    valid.extend_from_slice(spec.fiber.valid_box());
    let mut sample = spec.base.sample_box().to_vec();
    sample.extend_from_slice(spec.fiber.sample_box());
    MetricField::new(name, coords, g, sig)?.with_valid_box(valid)?.with_sample_box(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::constant_curvature_residual;

    #[test]
    fn minkowski_is_diagonal() {
        let m = minkowski(3).unwrap();
        let g = m.g(&[0.3, -0.2, 0.9]).unwrap();
        assert_eq!(g, crate::linalg::Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0])));
        m.check_invariants(3).unwrap();
    }

    #[test]
    fn berger_at_one_matches_closed_form() {
        // ε = 1: da² + db² − dc² − 2 sinh(2b) da dc
        let m = berger_sl2(1.0).unwrap();
        let p = [0.2, -0.3, 0.4];
        let g = m.g(&p).unwrap();
        let sh = (-0.6f64).sinh();
        let want = [[1.0, 0.0, -sh], [0.0, 1.0, 0.0], [-sh, 0.0, -1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(i, j)] - want[i][j]).abs() < 1e-13, "({i},{j})");
            }
        }
    }

    #[test]
    fn ads3_curvature_scales() {
        for (r, k) in [(1.0, -1.0), (2.0, -0.25)] {
            let m = anti_de_sitter(3, r).unwrap();
            let s = constant_curvature_residual(&m, &[0.1, 0.2, -0.3], 50, 7).unwrap();
            assert!((s.k_mean - k).abs() < 1e-9 && s.spread < 1e-9, "{s:?}");
        }
    }

    #[test]
    fn warp_must_use_base_only() {
        let spec = WarpedSpec::new(euclidean(1).unwrap(), minkowski(2).unwrap(), Expr::var(1));
        assert!(warped(&spec).is_err());
        let spec = WarpedSpec::new(euclidean(1).unwrap(), minkowski(2).unwrap(), Expr::var(0));
        assert!(matches!(warped(&spec), Err(GeomError::WarpNotPositive { .. })));
    }
}
