//! Manifold spec files (JSON, schema version 1).

use crate::CliError;
use lorentzlab_core::metric::Interval;
use lorentzlab_core::models::{self, WarpedSpec};
use lorentzlab_core::submanifold::Immersion;
use lorentzlab_core::tolerance::Tolerances;
use lorentzlab_core::{MetricField, VectorField};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub dim: Option<usize>,
    pub metric: MetricSpec,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub submanifolds: Vec<SubmanifoldSpec>,
    #[serde(default)]
    pub vector_fields: Vec<FieldSpec>,
    #[serde(default)]
    pub killing_basis: Option<BasisSpec>,
    #[serde(default)]
    pub product_split: Option<ProductSplit>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Exactly one of `builtin`, `components` or `warped`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub params: BuiltinParams,
    #[serde(default)]
    pub coords: Option<Vec<String>>,
    /// Full rows, or upper-triangular rows of decreasing length.
    #[serde(default)]
    pub components: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub signature: Option<Vec<i8>>,
    #[serde(default)]
    pub warped: Option<Box<WarpedMetricSpec>>,
    #[serde(default)]
    pub valid_box: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub sample_box: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinParams {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpedMetricSpec {
    pub base: MetricSpec,
    pub fiber: MetricSpec,
    pub warp: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmanifoldSpec {
    pub name: String,
    pub params: Vec<String>,
    pub map: Vec<String>,
    pub domain_box: Vec<[f64; 2]>,
    /// Map given in fiber coordinates, to be lifted over the base.
    #[serde(default)]
    pub in_fiber: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub builtin: String,
    #[serde(default)]
    pub params: BuiltinParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSplit {
    pub base_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, rename = "box")]
    pub bounds: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_per_axis")]
    pub per_axis: usize,
}

fn default_per_axis() -> usize {
    3
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { bounds: None, per_axis: default_per_axis() }
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn intervals(b: &[[f64; 2]]) -> Vec<Interval> {
    b.iter().map(|&[lo, hi]| (lo, hi)).collect()
}

impl BuiltinParams {
    fn n(&self, name: &str) -> Result<usize, CliError> {
        self.n.ok_or_else(|| schema(format!("builtin `{name}` needs params.n")))
    }
    fn r(&self) -> f64 {
        self.r.unwrap_or(1.0)
    }
}

impl MetricSpec {
    pub fn build(&self) -> Result<MetricField, CliError> {
        let kinds = [self.builtin.is_some(), self.components.is_some(), self.warped.is_some()];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            return Err(schema("metric needs exactly one of `builtin`, `components` or `warped`"));
        }
        let mut m = if let Some(name) = &self.builtin {
            if self.coords.is_some() || self.signature.is_some() {
                return Err(schema("`coords` and `signature` are fixed by a builtin metric"));
            }
            builtin_metric(name, &self.params)?
        } else if let Some(rows) = &self.components {
            let coords = self.coords.as_ref().ok_or_else(|| schema("metric `components` need `coords`"))?;
            let sig = self.signature.clone().ok_or_else(|| schema("metric `components` need `signature`"))?;
            let coords: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
            let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
            MetricField::parse("spec", &coords, &rows, sig)?
        } else {
            let w = self.warped.as_ref().expect("checked above");
            let spec = WarpedSpec::parse(w.base.build()?, w.fiber.build()?, &w.warp)?;
            models::warped(&spec)?
        };
        if let Some(b) = &self.valid_box {
            m = m.with_valid_box(intervals(b))?;
        }
        if let Some(b) = &self.sample_box {
            m = m.with_sample_box(intervals(b))?;
        }
        Ok(m)
    }

    /// The warped data when the metric is given as a warped product.
    pub fn warped_spec(&self) -> Result<Option<WarpedSpec>, CliError> {
        match &self.warped {
            Some(w) => Ok(Some(WarpedSpec::parse(w.base.build()?, w.fiber.build()?, &w.warp)?)),
            None => Ok(None),
        }
    }
}

fn builtin_metric(name: &str, p: &BuiltinParams) -> Result<MetricField, CliError> {
    let m = match name {
        "minkowski" => models::minkowski(p.n(name)?)?,
        "euclidean" => models::euclidean(p.n(name)?)?,
        "hyperbolic" => models::hyperbolic(p.n(name)?)?,
        "de_sitter" => models::de_sitter(p.n(name)?, p.r())?,
        "anti_de_sitter" => models::anti_de_sitter(p.n(name)?, p.r())?,
        "anti_de_sitter_poincare" => models::anti_de_sitter_poincare(p.n(name)?, p.r())?,
        "berger_sl2" => {
            let eps = p.epsilon.ok_or_else(|| schema("builtin `berger_sl2` needs params.epsilon"))?;
            models::berger_sl2(eps)?
        }
        other => return Err(schema(format!("unknown builtin metric `{other}`"))),
    };
    Ok(m)
}

impl BasisSpec {
    pub fn build(&self) -> Result<Vec<VectorField>, CliError> {
        let p = &self.params;
        let name = self.builtin.as_str();
        let fields = match name {
            "minkowski_translations" => models::minkowski_translations(p.n(name)?)?,
            "minkowski" => models::minkowski_killing_basis(p.n(name)?)?,
            "de_sitter" => models::de_sitter_killing_basis(p.n(name)?, p.r())?,
            "anti_de_sitter" => models::anti_de_sitter_killing_basis(p.n(name)?)?,
            "anti_de_sitter_poincare" => models::poincare_killing_basis(p.n(name)?)?,
            "berger_sl2" => {
                let eps = p.epsilon.ok_or_else(|| schema("basis `berger_sl2` needs params.epsilon"))?;
                models::berger_killing_basis(eps)?
            }
            other => return Err(schema(format!("unknown builtin Killing basis `{other}`"))),
        };
        Ok(fields)
    }
}

impl SubmanifoldSpec {
    pub fn build(&self) -> Result<Immersion, CliError> {
        let params: Vec<&str> = self.params.iter().map(|s| s.as_str()).collect();
        Ok(Immersion::parse(self.name.clone(), &params, &self.map, intervals(&self.domain_box))?)
    }
}

/// A validated spec file with its metric built.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: SpecFile,
    pub metric: MetricField,
}

impl Loaded {
    pub fn from_json(text: &str) -> Result<Loaded, CliError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let metric = file.metric.build()?.with_name(file.name.clone());
        if let Some(d) = file.dim {
            if d != metric.dim() {
                return Err(schema(format!("dim is {d} but the metric has dimension {}", metric.dim())));
            }
        }
        if let Some(p) = &file.point {
            if p.len() != metric.dim() {
                return Err(schema(format!("point has {} entries, expected {}", p.len(), metric.dim())));
            }
        }
        if let Some(b) = &file.grid.bounds {
            if b.len() != metric.dim() {
                return Err(schema(format!("grid box has {} intervals, expected {}", b.len(), metric.dim())));
            }
        }
        if file.grid.per_axis == 0 {
            return Err(schema("grid.per_axis must be positive"));
        }
        Ok(Loaded { file, metric })
    }

    /// Explicit point, else the spec file's point, else the sample box center.
    pub fn point(&self, cli: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        let p = match (cli, &self.file.point) {
            (Some(p), _) => p.to_vec(),
            (None, Some(p)) => p.clone(),
            (None, None) => self.metric.sample_box().iter().map(|&(a, b)| 0.5 * (a + b)).collect(),
        };
        if p.len() != self.metric.dim() {
            return Err(schema(format!("point has {} entries, expected {}", p.len(), self.metric.dim())));
        }
        Ok(p)
    }

    pub fn grid_box(&self) -> Vec<Interval> {
        match &self.file.grid.bounds {
            Some(b) => intervals(b),
            None => self.metric.sample_box().to_vec(),
        }
    }

    pub fn grid(&self) -> Vec<Vec<f64>> {
        lorentzlab_core::metric::box_grid(&self.grid_box(), self.file.grid.per_axis)
    }

    pub fn vector_fields(&self) -> Result<Vec<VectorField>, CliError> {
        self.file
            .vector_fields
            .iter()
            .map(|f| Ok(VectorField::parse(f.name.clone(), self.metric.coords(), &f.components)?))
            .collect()
    }

    pub fn base_dim(&self) -> Result<usize, CliError> {
        if let Some(w) = self.file.metric.warped_spec()? {
            if let Some(s) = &self.file.product_split {
                if s.base_dim != w.base_dim() {
                    return Err(schema("product_split disagrees with the warped metric"));
                }
            }
            return Ok(w.base_dim());
        }
        self.file
            .product_split
            .as_ref()
            .map(|s| s.base_dim)
            .ok_or_else(|| schema("this analysis needs `product_split` or a warped metric"))
    }

    /// Submanifolds as full-chart immersions, lifting fiber ones over the
    /// base grid box.
    pub fn hypersurfaces(&self, base_dim: usize) -> Result<Vec<Immersion>, CliError> {
        let base_coords = &self.metric.coords()[..base_dim];
        let base_box = &self.grid_box()[..base_dim];
        self.file
            .submanifolds
            .iter()
            .map(|s| {
                let im = s.build()?;
                if s.in_fiber {
                    Ok(im.lift(base_coords, base_box)?)
                } else {
                    Ok(im)
                }
            })
            .collect()
    }
}
