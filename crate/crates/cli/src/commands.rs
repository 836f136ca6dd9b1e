use crate::spec::Loaded;
use crate::{envelope, CliError, Outcome};
use lorentzlab_core::detect::{check_block_structure, warped_criterion, ProductChartSpec, Verdict};
use lorentzlab_core::geodesic::{energy_drift, integrate_geodesic};
use lorentzlab_core::killing::{
    geodesic_orbit_residual, killing_residual_on, lightlike_check, lightlike_killing_search, SearchConfig,
};
use lorentzlab_core::linalg::{self, Mat};
use lorentzlab_core::metric::constant_curvature_residual;
use lorentzlab_core::scan::{scan_cx_with, ScanConfig};
use lorentzlab_core::{MetricField, VectorField};
use serde_json::{json, Value};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Curvature,
    ScanCx,
    Killing,
    Warped,
    Geodesic,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Curvature => "curvature",
            Analysis::ScanCx => "scan-cx",
            Analysis::Killing => "killing",
            Analysis::Warped => "warped",
            Analysis::Geodesic => "geodesic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub analysis: Analysis,
    pub point: Option<Vec<f64>>,
    pub seed: u64,
    pub samples: usize,
    pub resolution: usize,
    pub trials: usize,
    pub velocity: Option<Vec<f64>>,
    pub s_max: f64,
    pub step: f64,
}

impl Options {
    pub fn new(analysis: Analysis) -> Self {
        Options {
            analysis,
            point: None,
            seed: 0,
            samples: 200,
            resolution: 16,
            trials: 64,
            velocity: None,
            s_max: 1.0,
            step: 0.01,
        }
    }
}

fn rows(a: &Mat) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

/// Runs one analysis on the raw bytes of a spec file.
pub fn run(input: &[u8], opts: &Options) -> Result<Outcome, CliError> {
    let text = std::str::from_utf8(input).map_err(|e| CliError::Schema(format!("not UTF-8: {e}")))?;
    let loaded = Loaded::from_json(text)?;
    let tol = loaded.file.tolerances.clone();
    let (parameters, results, csv, rejected) = match opts.analysis {
        Analysis::Curvature => curvature(&loaded, opts)?,
        Analysis::ScanCx => scan(&loaded, opts)?,
        Analysis::Killing => killing(&loaded, opts)?,
        Analysis::Warped => warped(&loaded)?,
        Analysis::Geodesic => geodesic(&loaded, opts)?,
    };
    let mut parameters = parameters;
    parameters["tolerances"] = serde_json::to_value(&tol).expect("plain data");
    let report = envelope(opts.analysis.name(), input, opts.seed, parameters, results);
    Ok(Outcome { report, csv, rejected })
}

type Parts = (Value, Value, Option<String>, bool);

fn curvature(l: &Loaded, opts: &Options) -> Result<Parts, CliError> {
    let m = &l.metric;
    let p = l.point(opts.point.as_deref())?;
    if opts.samples < 10 {
        return Err(CliError::Schema("--samples must be at least 10".into()));
    }
    let cb = m.curvature_at(&p)?;
    let spread = if m.dim() >= 2 {
        Some(constant_curvature_residual(m, &p, opts.samples, opts.seed)?)
    } else {
        None
    };
    let constant = spread.as_ref().map(|s| s.spread < l.file.tolerances.curvature_spread);
    let results = json!({
        "point": p,
        "coords": m.coords(),
        "metric": rows(&cb.g),
        "christoffel": cb.gamma_nested(),
        "riemann": cb.riemann_nested(),
        "max_abs_riemann": cb.max_abs_riemann(),
        "symmetry_defect": cb.symmetry_defect(),
        "sectional": spread,
        "constant_curvature": constant,
    });
    Ok((json!({ "point": p, "samples": opts.samples }), results, None, false))
}

fn scan(l: &Loaded, opts: &Options) -> Result<Parts, CliError> {
    let tol = &l.file.tolerances;
    let p = l.point(opts.point.as_deref())?;
    let cfg = ScanConfig {
        resolution: opts.resolution,
        certificate: tol.certificate,
        cone_fraction: tol.cone_fraction,
        span_tolerance: tol.rank,
        ..ScanConfig::default()
    };
    let report = scan_cx_with(&l.metric, &p, &cfg)?;
    let mut csv = String::new();
    let n = l.metric.dim();
    let header: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    writeln!(csv, "{},residual", header.join(",")).unwrap();
    for a in &report.accepted {
        let cells: Vec<String> = a.direction.iter().map(|x| x.to_string()).collect();
        writeln!(csv, "{},{}", cells.join(","), a.residual).unwrap();
    }
    let parameters = json!({ "point": p, "scan": cfg });
    let results = json!({ "cluster_count": report.cluster_count(), "scan": report });
    Ok((parameters, results, Some(csv), false))
}

struct FieldStats {
    min_norm: f64,
    orbit: Option<f64>,
}

fn field_stats(m: &MetricField, f: &VectorField, grid: &[Vec<f64>]) -> Result<FieldStats, CliError> {
    let mut min_norm = f64::INFINITY;
    for p in grid {
        min_norm = min_norm.min(linalg::norm(&f.eval(p)?));
    }
    let orbit = if min_norm > 1e-14 {
        let mut worst = 0.0f64;
        for p in grid {
            worst = worst.max(geodesic_orbit_residual(m, f, p)?);
        }
        Some(worst)
    } else {
        None
    };
    Ok(FieldStats { min_norm, orbit })
}

fn killing(l: &Loaded, opts: &Options) -> Result<Parts, CliError> {
    let m = &l.metric;
    let tol = &l.file.tolerances;
    let grid = l.grid();
    let fields = l.vector_fields()?;
    if fields.is_empty() && l.file.killing_basis.is_none() {
        return Err(CliError::Schema("killing needs `vector_fields` or `killing_basis`".into()));
    }
    let mut rejected = false;
    let mut per_field = Vec::new();
    for f in &fields {
        let residual = killing_residual_on(m, f, &grid)?;
        let is_killing = residual < tol.killing;
        rejected |= !is_killing;
        let light = lightlike_check(m, f, &grid)?;
        let stats = field_stats(m, f, &grid)?;
        per_field.push(json!({
            "name": f.name(),
            "components": f.display_components(),
            "killing_residual": residual,
            "is_killing": is_killing,
            "lightlike": light,
            "min_norm": stats.min_norm,
            "orbit_residual": stats.orbit,
        }));
    }
    let mut search = Value::Null;
    let cfg = SearchConfig {
        trials: opts.trials,
        seed: opts.seed,
        accept: tol.lightlike,
        basis_tolerance: tol.killing,
        ..SearchConfig::default()
    };
    if let Some(b) = &l.file.killing_basis {
        let basis = b.build()?;
        if basis.first().map(|f| f.dim()) != Some(m.dim()) {
            return Err(CliError::Schema("killing_basis dimension does not match the metric".into()));
        }
        let found = lightlike_killing_search(m, &basis, &grid, &cfg)?;
        let mut candidates = Vec::new();
        for (i, c) in found.iter().enumerate() {
            let v = VectorField::combination(format!("candidate_{i}"), &basis, &c.coeffs)?;
            let stats = field_stats(m, &v, &grid)?;
            candidates.push(json!({
                "coeffs": c.coeffs,
                "objective": c.objective,
                "components": v.display_components(),
                "min_norm": stats.min_norm,
                "orbit_residual": stats.orbit,
            }));
        }
        search = json!({
            "basis": b.builtin,
            "basis_size": basis.len(),
            "empty": candidates.is_empty(),
            "candidates": candidates,
        });
    }
    let parameters = json!({
        "grid_points": grid.len(),
        "grid_box": l.grid_box(),
        "trials": opts.trials,
    });
    let results = json!({ "fields": per_field, "search": search });
    Ok((parameters, results, None, rejected))
}

fn warped(l: &Loaded) -> Result<Parts, CliError> {
    let tol = &l.file.tolerances;
    let base_dim = l.base_dim()?;
    let spec = ProductChartSpec::new(l.metric.clone(), base_dim)?;
    let hypersurfaces = l.hypersurfaces(base_dim)?;
    let grid = l.grid();
    let verdict = warped_criterion(&spec, &hypersurfaces, &grid, tol)?;
    let block = check_block_structure(&spec, &grid, tol)?;
    let rejected = verdict.verdict != Verdict::Warped;
    let parameters = json!({
        "base_dim": base_dim,
        "grid_points": grid.len(),
        "grid_box": l.grid_box(),
        "hypersurfaces": hypersurfaces.iter().map(|h| h.name.clone()).collect::<Vec<_>>(),
    });
    let results = json!({ "criterion": verdict, "block_structure": block });
    Ok((parameters, results, None, rejected))
}

fn geodesic(l: &Loaded, opts: &Options) -> Result<Parts, CliError> {
    let m = &l.metric;
    let x0 = l.point(opts.point.as_deref())?;
    let v0 = opts
        .velocity
        .clone()
        .ok_or_else(|| CliError::Schema("geodesic needs --velocity".into()))?;
    if v0.len() != m.dim() {
        return Err(CliError::Schema(format!("velocity has {} entries, expected {}", v0.len(), m.dim())));
    }
    let states = integrate_geodesic(m, &x0, &v0, opts.s_max, opts.step)?;
    let drift = energy_drift(m, &states)?;
    let last = states.last().expect("at least the initial state");
    let mut csv = String::new();
    let names: Vec<String> = m
        .coords()
        .iter()
        .map(|c| format!("x_{c}"))
        .chain(m.coords().iter().map(|c| format!("v_{c}")))
        .collect();
    writeln!(csv, "s,{}", names.join(",")).unwrap();
    for st in &states {
        let cells: Vec<String> = st.x.iter().chain(&st.v).map(|x| x.to_string()).collect();
        writeln!(csv, "{},{}", st.s, cells.join(",")).unwrap();
    }
    let parameters = json!({ "x0": x0, "v0": v0, "s_max": opts.s_max, "step": opts.step });
    let results = json!({
        "steps": states.len() - 1,
        "endpoint": { "x": last.x, "v": last.v },
        "energy_drift": drift,
        "states": states,
    });
    Ok((parameters, results, Some(csv), false))
}
