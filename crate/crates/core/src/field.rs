use crate::error::{GeomError, Result};
use crate::expr::{parse, Expr, Tape};
use std::sync::Arc;

/// Vector field with expression components V^i over a chart's coordinates.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    coords: Arc<Vec<String>>,
    comp: Vec<Expr>,
    tape: Arc<Tape>,
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let shown: Vec<String> = self.comp.iter().map(|e| e.display(&self.coords).to_string()).collect();
        f.debug_struct("VectorField").field("name", &self.name).field("comp", &shown).finish()
    }
}

impl VectorField {
    pub fn new(name: impl Into<String>, coords: &[String], comp: Vec<Expr>) -> Result<Self> {
        if comp.len() != coords.len() {
            return Err(GeomError::Dimension { expected: coords.len(), got: comp.len() });
        }
        if comp.iter().any(|e| e.vars().iter().any(|&v| v >= coords.len())) {
            return Err(GeomError::Invalid("vector field references an unknown coordinate".into()));
        }
        let tape = Tape::compile(&comp, coords);
        Ok(VectorField { name: name.into(), coords: Arc::new(coords.to_vec()), comp, tape: Arc::new(tape) })
    }

    pub fn parse<S: AsRef<str>>(name: impl Into<String>, coords: &[String], comp: &[S]) -> Result<Self> {
        let exprs = comp.iter().map(|s| parse(s.as_ref(), coords)).collect::<std::result::Result<Vec<_>, _>>()?;
        VectorField::new(name, coords, exprs)
    }

    /// Constant-coefficient field.
    pub fn constant(name: impl Into<String>, coords: &[String], comp: &[f64]) -> Result<Self> {
        VectorField::new(name, coords, comp.iter().map(|&c| Expr::c(c)).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.comp.len()
    }
    pub fn components(&self) -> &[Expr] {
        &self.comp
    }
    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn display_components(&self) -> Vec<String> {
        self.comp.iter().map(|e| e.display(&self.coords).to_string()).collect()
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.tape.eval_f64(p)?)
    }

    /// Values and Jacobian `dv[i][k] = ∂_k V^i`.
    pub fn eval_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = p.len();
        let jets = self.tape.eval_dual1(p)?;
        let v = jets.iter().map(|j| j.v).collect();
        let dv = jets.iter().map(|j| j.d[..n].to_vec()).collect();
        Ok((v, dv))
    }

    /// Σ c_a V_a as one expression field.
    pub fn combination(name: impl Into<String>, fields: &[VectorField], coeffs: &[f64]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| GeomError::Invalid("empty basis".into()))?;
        if fields.len() != coeffs.len() {
            return Err(GeomError::Dimension { expected: fields.len(), got: coeffs.len() });
        }
        let n = first.dim();
        let mut comp = vec![Expr::zero(); n];
        for (f, &c) in fields.iter().zip(coeffs) {
            if f.dim() != n {
                return Err(GeomError::Dimension { expected: n, got: f.dim() });
            }
            if c == 0.0 {
                continue;
            }
            for (slot, e) in comp.iter_mut().zip(&f.comp) {
                *slot = slot.clone() + c * e.clone();
            }
        }
        VectorField::new(name, &first.coords, comp)
    }
}

/// Smooth map between charts given by expressions `y^a = φ^a(x)`.
#[derive(Clone)]
pub struct CoordMap {
    source: Arc<Vec<String>>,
    exprs: Vec<Expr>,
    tape: Arc<Tape>,
}

impl std::fmt::Debug for CoordMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let shown: Vec<String> = self.exprs.iter().map(|e| e.display(&self.source).to_string()).collect();
        f.debug_struct("CoordMap").field("source", &self.source).field("exprs", &shown).finish()
    }
}

impl CoordMap {
    pub fn new(source: &[String], exprs: Vec<Expr>) -> Result<Self> {
        if exprs.iter().any(|e| e.vars().iter().any(|&v| v >= source.len())) {
            return Err(GeomError::Invalid("map references an unknown coordinate".into()));
        }
        let tape = Tape::compile(&exprs, source);
        Ok(CoordMap { source: Arc::new(source.to_vec()), exprs, tape: Arc::new(tape) })
    }

    pub fn parse<S: AsRef<str>>(source: &[String], exprs: &[S]) -> Result<Self> {
        let e = exprs.iter().map(|s| parse(s.as_ref(), source)).collect::<std::result::Result<Vec<_>, _>>()?;
        CoordMap::new(source, e)
    }

    pub fn identity(source: &[String]) -> Self {
        CoordMap::new(source, (0..source.len()).map(Expr::var).collect()).expect("identity map")
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }
    pub fn source_dim(&self) -> usize {
        self.source.len()
    }
    pub fn target_dim(&self) -> usize {
        self.exprs.len()
    }
    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.tape.eval_f64(x)?)
    }

    /// Image point and Jacobian (target_dim x source_dim).
    pub fn eval_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, crate::linalg::Mat)> {
        let jets = self.tape.eval_dual1(x)?;
        let k = x.len();
        let y = jets.iter().map(|j| j.v).collect();
        let jac = crate::linalg::Mat::from_fn(jets.len(), k, |a, i| jets[a].d[i]);
        Ok((y, jac))
    }

    /// Values, first and second derivatives: `hess[a][i][j] = ∂_i∂_j φ^a`.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<(Vec<f64>, crate::linalg::Mat, Vec<crate::linalg::Mat>)> {
        let jets = self.tape.eval_dual2(x)?;
        let k = x.len();
        let y = jets.iter().map(|j| j.v).collect();
        let jac = crate::linalg::Mat::from_fn(jets.len(), k, |a, i| jets[a].d[i]);
        let hess = jets.iter().map(|j| crate::linalg::Mat::from_fn(k, k, |i, l| j.hess(i, l))).collect();
        Ok((y, jac, hess))
    }
}
