//! Shipped warped products with families of lightlike geodesic
//! hypersurfaces, fiber isometries, and non-warped counterparts.

use crate::detect::ProductChartSpec;
use crate::error::Result;
use crate::field::CoordMap;
use crate::metric::{box_grid, Interval, MetricField};
use crate::models::{self, warped, WarpedSpec};
use crate::submanifold::Immersion;

#[derive(Debug, Clone)]
pub struct WarpedExample {
    pub name: String,
    pub spec: WarpedSpec,
    pub base_box: Vec<Interval>,
    /// Fiber point every hypersurface in `hyperplanes` passes through at its
    /// domain center.
    pub fiber_point: Vec<f64>,
    /// Lightlike geodesic hypersurfaces of N whose normals span T_yN.
    pub hyperplanes: Vec<Immersion>,
    /// Fiber hypersurfaces of mixed type for geodesy comparisons.
    pub comparisons: Vec<Immersion>,
    pub isometry: CoordMap,
    pub non_isometry: CoordMap,
}

impl WarpedExample {
    pub fn metric(&self) -> Result<MetricField> {
        warped(&self.spec)
    }

    pub fn product(&self) -> Result<ProductChartSpec> {
        ProductChartSpec::new(self.metric()?, self.spec.base_dim())
    }

    /// The hyperplanes lifted to L × S.
    pub fn lifts(&self) -> Result<Vec<Immersion>> {
        self.hyperplanes.iter().map(|h| h.lift(self.spec.base.coords(), &self.base_box)).collect()
    }

    /// Base grid (`per_axis` points over the base box) times a fiber grid of
    /// 2 points per axis within `half_width` of the fiber point.
    pub fn grid(&self, per_axis: usize, half_width: f64) -> Vec<Vec<f64>> {
        let fiber_box: Vec<Interval> = self.fiber_point.iter().map(|&y| (y - half_width, y + half_width)).collect();
        let mut out = Vec::new();
        for x in box_grid(&self.base_box, per_axis) {
            for y in box_grid(&fiber_box, 2) {
                let mut p = x.clone();
                p.extend(y);
                out.push(p);
            }
        }
        out
    }
}

/// A product chart that fails to be warped, with hypersurfaces to feed the
/// criterion.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub name: String,
    pub product: ProductChartSpec,
    pub lifts: Vec<Immersion>,
    pub grid: Vec<Vec<f64>>,
}

fn f(v: f64) -> String {
    format!("({v})")
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(|s| s.as_str()).collect()
}

// Null hyperplane of Minkowski(3) through y0 with normal (1, cos θ, sin θ).
fn null_plane(y0: &[f64], theta: f64) -> Result<Immersion> {
    let (c, s) = (theta.cos(), theta.sin());
    let map = [
        format!("{} + a", f(y0[0])),
        format!("{} + {}*a - {}*b", f(y0[1]), f(c), f(s)),
        format!("{} + {}*a + {}*b", f(y0[2]), f(s), f(c)),
    ];
    Immersion::parse(format!("null plane {theta:.4}"), &["a", "b"], &map, vec![(-1.0, 1.0); 2])
}

fn w1() -> Result<WarpedExample> {
    let base = models::euclidean(1)?;
    let fiber = models::minkowski(3)?;
    let y0 = vec![0.1, 0.2, -0.1];
    let hyperplanes = (0..4)
        .map(|i| null_plane(&y0, i as f64 * std::f64::consts::FRAC_PI_2))
        .collect::<Result<Vec<_>>>()?;
    let cone = Immersion::parse(
        "light cone",
        &["r", "phi"],
        &[
            format!("{} + r", f(y0[0] - 1.0)),
            format!("{} + r*cos(phi)", f(y0[1] - 1.0)),
            format!("{} + r*sin(phi)", f(y0[2])),
        ],
        vec![(0.5, 1.5), (-1.0, 1.0)],
    )?;
    let slice = Immersion::parse(
        "t = const",
        &["p", "q"],
        &[f(y0[0]), format!("{} + p", f(y0[1])), format!("{} + q", f(y0[2]))],
        vec![(-1.0, 1.0); 2],
    )?;
    let beta: f64 = 0.3;
    let (ch, sh) = (beta.cosh(), beta.sinh());
    let coords = fiber.coords().to_vec();
    let isometry = CoordMap::parse(
        &coords,
        &[format!("{ch}*t + {sh}*x"), format!("{sh}*t + {ch}*x"), "y".to_string()],
    )?;
    let non_isometry = CoordMap::parse(&coords, &["2*t", "2*x", "2*y"])?;
    Ok(WarpedExample {
        name: "R x_exp(2s) minkowski(3)".into(),
        spec: WarpedSpec::parse(base, fiber, "exp(2*s)")?,
        base_box: vec![(-0.5, 0.5)],
        comparisons: vec![hyperplanes[0].clone(), slice, cone],
        fiber_point: y0,
        hyperplanes,
        isometry,
        non_isometry,
    })
}

// Light cone of a point on the future boundary of de Sitter(3,1), flat
// slicing: |x − X0| = e^{−t}. Passes through y0 at (τ, φ) = (t0, α).
fn ds_cone(y0: &[f64], alpha: f64) -> Result<Immersion> {
    let e = (-y0[0]).exp();
    let xv = y0[1] - e * alpha.cos();
    let yv = y0[2] - e * alpha.sin();
    Immersion::parse(
        format!("boundary cone {alpha:.4}"),
        &["tau", "phi"],
        &["tau".to_string(), format!("{} + exp(-tau)*cos(phi)", f(xv)), format!("{} + exp(-tau)*sin(phi)", f(yv))],
        vec![(y0[0] - 0.5, y0[0] + 0.5), (alpha - 0.5, alpha + 0.5)],
    )
}

fn w2() -> Result<WarpedExample> {
    let base = models::euclidean(1)?;
    let fiber = models::de_sitter(3, 1.0)?;
    let y0 = vec![0.1, 0.2, -0.1];
    let hyperplanes = (0..4)
        .map(|i| ds_cone(&y0, i as f64 * std::f64::consts::FRAC_PI_2))
        .collect::<Result<Vec<_>>>()?;
    let slice = Immersion::parse(
        "t = const",
        &["p", "q"],
        &[f(y0[0]), format!("{} + p", f(y0[1])), format!("{} + q", f(y0[2]))],
        vec![(-1.0, 1.0); 2],
    )?;
    let wall = Immersion::parse(
        "x = const",
        &["p", "q"],
        &[format!("{} + p", f(y0[0])), f(y0[1]), format!("{} + q", f(y0[2]))],
        vec![(-1.0, 1.0); 2],
    )?;
    let c: f64 = 0.2;
    let coords = fiber.coords().to_vec();
    let isometry = CoordMap::parse(
        &coords,
        &[format!("t + {c}"), format!("{}*x", (-c).exp()), format!("{}*y", (-c).exp())],
    )?;
    let non_isometry = CoordMap::parse(&coords, &["2*t", "2*x", "2*y"])?;
    Ok(WarpedExample {
        name: "R x_cosh(s)^2 de_sitter(3,1)".into(),
        spec: WarpedSpec::parse(base, fiber, "cosh(s)^2")?,
        base_box: vec![(-0.5, 0.5)],
        comparisons: vec![hyperplanes[0].clone(), slice, wall],
        fiber_point: y0,
        hyperplanes,
        isometry,
        non_isometry,
    })
}

// Light cone of the boundary point (t0 ∓ e^{y0}, x0) of the Poincaré chart,
// through y0 at (λ, φ) = (e^{y0}, π/2).
fn poincare_cone(y0: &[f64], future: bool) -> Result<Immersion> {
    let lam = y0[0].exp();
    let sign = if future { 1.0 } else { -1.0 };
    let tv = y0[1] - sign * lam;
    Immersion::parse(
        if future { "future boundary cone" } else { "past boundary cone" },
        &["lam", "phi"],
        &["log(lam*sin(phi))".to_string(), format!("{} + {}*lam", f(tv), f(sign)), format!("{} + lam*cos(phi)", f(y0[2]))],
        vec![(0.8 * lam, 1.2 * lam), (std::f64::consts::FRAC_PI_2 - 0.4, std::f64::consts::FRAC_PI_2 + 0.4)],
    )
}

fn poincare_null_plane(y0: &[f64], sign: f64) -> Result<Immersion> {
    Immersion::parse(
        format!("t {} x = const", if sign > 0.0 { "-" } else { "+" }),
        &["p", "q"],
        &[format!("{} + p", f(y0[0])), format!("{} + q", f(y0[1])), format!("{} + {}*q", f(y0[2]), f(sign))],
        vec![(-1.0, 1.0); 2],
    )
}

fn w3() -> Result<WarpedExample> {
    let base = models::hyperbolic(2)?;
    let fiber = models::anti_de_sitter_poincare(3, 1.0)?;
    let y0 = vec![0.2, 0.1, -0.1];
    let hyperplanes = vec![
        poincare_null_plane(&y0, 1.0)?,
        poincare_null_plane(&y0, -1.0)?,
        poincare_cone(&y0, true)?,
        poincare_cone(&y0, false)?,
    ];
    let horosphere = Immersion::parse(
        "y = const",
        &["p", "q"],
        &[f(y0[0]), format!("{} + p", f(y0[1])), format!("{} + q", f(y0[2]))],
        vec![(-1.0, 1.0); 2],
    )?;
    let slice = Immersion::parse(
        "t = const",
        &["p", "q"],
        &[format!("{} + p", f(y0[0])), f(y0[1]), format!("{} + q", f(y0[2]))],
        vec![(-1.0, 1.0); 2],
    )?;
    let c: f64 = 0.2;
    let coords = fiber.coords().to_vec();
    let isometry = CoordMap::parse(
        &coords,
        &[format!("y + {c}"), format!("{}*t", c.exp()), format!("{}*x", c.exp())],
    )?;
    let non_isometry = CoordMap::parse(&coords, &["2*y", "2*t", "2*x"])?;
    Ok(WarpedExample {
        name: "hyperbolic(2) x_exp(s1+s2/2) anti_de_sitter_poincare(3,1)".into(),
        spec: WarpedSpec::parse(base, fiber, "exp(s1 + 0.5*s2)")?,
        base_box: vec![(-0.5, 0.5); 2],
        comparisons: vec![hyperplanes[0].clone(), horosphere, slice],
        fiber_point: y0,
        hyperplanes,
        isometry,
        non_isometry,
    })
}

/// The three shipped warped products.
pub fn warped_examples() -> Result<Vec<WarpedExample>> {
    Ok(vec![w1()?, w2()?, w3()?])
}

fn counter(
    name: &str,
    like: &WarpedExample,
    diag: &[String],
) -> Result<Counterexample> {
    let m = like.metric()?;
    let coords: Vec<String> = m.coords().to_vec();
    let n = coords.len();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| (i..n).map(|j| if i == j { diag[i].clone() } else { "0".into() }).collect())
        .collect();
    let rows_ref: Vec<Vec<&str>> = rows.iter().map(|r| strs(r)).collect();
    let metric = MetricField::parse(name, &strs(&coords), &rows_ref, m.signature().to_vec())?
        .with_valid_box(m.valid_box().to_vec())?
        .with_sample_box(m.sample_box().to_vec())?;
    Ok(Counterexample {
        name: name.into(),
        product: ProductChartSpec::new(metric, like.spec.base_dim())?,
        lifts: like.lifts()?,
        grid: like.grid(3, 0.2),
    })
}

/// Product charts built from the shipped examples whose fiber blocks are
/// not related by homotheties between base points.
pub fn counterexamples() -> Result<Vec<Counterexample>> {
    let ex = warped_examples()?;
    let w = |s: &str| s.to_string();
    Ok(vec![
        counter(
            "non-separable warp",
            &ex[0],
            &[w("1"), w("-(exp(2*s) + 0.1*x^2)"), w("exp(2*s) + 0.1*x^2"), w("exp(2*s) + 0.1*x^2")],
        )?,
        counter("anisotropic fiber", &ex[0], &[w("1"), w("-exp(2*s)"), w("exp(4*s)"), w("exp(4*s)")])?,
        counter(
            "fiber-dependent warp",
            &ex[2],
            &[
                w("1"),
                w("exp(2*s1)"),
                w("exp(s1 + 0.5*s2) + 0.1*t^2"),
                w("-(exp(s1 + 0.5*s2) + 0.1*t^2)*exp(-2*y)"),
                w("(exp(s1 + 0.5*s2) + 0.1*t^2)*exp(-2*y)"),
            ],
        )?,
    ])
}
