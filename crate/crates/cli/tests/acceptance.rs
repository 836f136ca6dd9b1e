//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use lorentzlab_core::catalog::{counterexamples, warped_examples};
use lorentzlab_core::detect::{warped_criterion, Verdict};
use lorentzlab_core::expr::Tape;
use lorentzlab_core::geodesic::{energy_drift, geodesic_endpoint, integrate_geodesic};
use lorentzlab_core::killing::{
    extend_isometry_pullback_residual, geodesic_orbit_residual, lightlike_killing_search, SearchConfig,
};
use lorentzlab_core::linalg::{self, bilinear};
use lorentzlab_core::metric::{box_grid, constant_curvature_residual, random_point, random_unit};
use lorentzlab_core::scan::{scan_cx, ClassLabel};
use lorentzlab_core::submanifold::{geodesy_residual, GeodesyVerdict, GEODESIC_CERTIFICATE, GEODESIC_REJECTION};
use lorentzlab_core::tolerance::Tolerances;
use lorentzlab_core::{models, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn geom<T>(r: lorentzlab_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn c1_tensor_core() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mink = geom(models::minkowski(3))?;
    let mut worst_r = 0.0f64;
    for _ in 0..10 {
        let p = random_point(mink.sample_box(), &mut rng);
        let cb = geom(mink.curvature_at(&p))?;
        worst_r = worst_r.max(cb.max_abs_riemann());
    }
    ensure(worst_r < 1e-9, || format!("minkowski(3) max |R| = {worst_r:e}"))?;

    let mut worst_k = 0.0f64;
    let mut worst_spread = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for r in [1.0, 2.0] {
        let cases = [
            (geom(models::de_sitter(3, r))?, 1.0 / (r * r), oracles::de_sitter_quadric(r)),
            (geom(models::anti_de_sitter(3, r))?, -1.0 / (r * r), oracles::sl2_quadric(r)),
        ];
        for (m, k, quadric) in &cases {
            for i in 0..10 {
                let p = random_point(m.sample_box(), &mut rng);
                let s = geom(constant_curvature_residual(m, &p, 200, i))?;
                worst_k = worst_k.max((s.k_mean - k).abs());
                worst_spread = worst_spread.max(s.spread);
                ensure((s.k_mean - k).abs() < 1e-6 && s.spread < 1e-6, || {
                    format!("{} at {p:?}: K_mean {} spread {:e}", m.name(), s.k_mean, s.spread)
                })?;
                let g = geom(m.g(&p))?;
                let u = random_unit(3, &mut rng);
                let v = random_unit(3, &mut rng);
                let den = bilinear(&g, &u, &u) * bilinear(&g, &v, &v) - bilinear(&g, &u, &v).powi(2);
                if den.abs() < 1e-2 {
                    continue;
                }
                let k_fd = oracles::fd_sectional(m, &p, &u, &v, 1e-3);
                let k_emb = quadric.gauss_sectional(&p, &u, &v);
                let dev = (k_fd - k).abs().max((k_emb - k).abs());
                worst_oracle = worst_oracle.max(dev);
                ensure(dev < 1e-4, || format!("{}: oracle K fd {k_fd} embedding {k_emb}", m.name()))?;
            }
        }
    }
    Ok(format!(
        "minkowski max|R| {worst_r:.1e}; dS/AdS r=1,2: |K_mean - K| <= {worst_k:.1e}, spread <= {worst_spread:.1e}, oracle dev <= {worst_oracle:.1e}"
    ))
}

fn c2_constant_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let points: Vec<Vec<f64>> = (0..5).map(|_| random_point(&[(-0.5, 0.5); 3], &mut rng)).collect();
    let models = [
        geom(models::minkowski(3))?,
        geom(models::de_sitter(3, 1.0))?,
        geom(models::de_sitter(3, 2.0))?,
        geom(models::anti_de_sitter(3, 1.0))?,
        geom(models::anti_de_sitter(3, 2.0))?,
    ];
    for m in &models {
        for p in &points {
            let rep = geom(scan_cx(m, p, 16))?;
            ensure(rep.class_label == ClassLabel::Cone && rep.span_dim == 3, || {
                format!("{} at {p:?}: {:?}, span {}", m.name(), rep.class_label, rep.span_dim)
            })?;
        }
    }
    let berger = geom(models::berger_sl2(2.0))?;
    for p in &points {
        let rep = geom(scan_cx(&berger, p, 16))?;
        ensure(rep.class_label == ClassLabel::Bi && rep.cluster_count() == 2, || {
            format!("berger at {p:?}: {:?} with {} clusters", rep.class_label, rep.cluster_count())
        })?;
    }
    Ok(format!("{} space forms x 5 points cone/span 3; berger_sl2(2) bi/2 clusters at 5 points", models.len()))
}

fn classify(r: f64) -> GeodesyVerdict {
    GeodesyVerdict::from_residual(r, GEODESIC_CERTIFICATE, GEODESIC_REJECTION)
}

fn c3_transfer() -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    for ex in geom(warped_examples())? {
        let m = geom(ex.metric())?;
        let k = ex.spec.base_dim();
        for s in &ex.comparisons {
            let lift = geom(s.lift(ex.spec.base.coords(), &ex.base_box))?;
            let center = s.domain_center();
            let off: Vec<f64> = s.domain_box.iter().zip(&center).map(|(&(a, b), c)| c + 0.2 * (b - a)).collect();
            for (u, x) in [(center, vec![0.0; k]), (off, vec![0.3; k])] {
                total += 1;
                let rs = geom(geodesy_residual(&ex.spec.fiber, s, &u))?.residual;
                let mut ul = x.clone();
                ul.extend(&u);
                let rl = geom(geodesy_residual(&m, &lift, &ul))?.residual;
                let (a, b) = (classify(rs), classify(rl));
                if a == b && a != GeodesyVerdict::Inconclusive {
                    agree += 1;
                } else {
                    return Err(format!("{} / {}: S {rs:e} vs LxS {rl:e}", ex.name, s.name));
                }
            }
        }
    }
    ensure(agree == 18 && total == 18, || format!("{agree}/{total}"))?;
    Ok(format!("{agree}/{total} classifications agree"))
}

fn c4_warped() -> Outcome {
    let tol = Tolerances::default();
    let mut max_warped = 0.0f64;
    for ex in geom(warped_examples())? {
        let v = geom(warped_criterion(&geom(ex.product())?, &geom(ex.lifts())?, &ex.grid(3, 0.2), &tol))?;
        max_warped = max_warped.max(v.holonomy_homothetic.value);
        ensure(v.verdict == Verdict::Warped && v.holonomy_homothetic.value < 1e-8, || {
            format!("{}: {:?}", ex.name, v)
        })?;
    }
    let mut min_counter = f64::INFINITY;
    for c in geom(counterexamples())? {
        let v = geom(warped_criterion(&c.product, &c.lifts, &c.grid, &tol))?;
        min_counter = min_counter.min(v.holonomy_homothetic.value);
        ensure(v.verdict == Verdict::NotWarped && v.holonomy_homothetic.value > 1e-3, || {
            format!("{}: {:?}", c.name, v)
        })?;
    }
    Ok(format!("holonomy variation <= {max_warped:.1e} on warped, >= {min_counter:.2e} on counterexamples"))
}

fn c5_killing() -> Outcome {
    let cfg = SearchConfig::default();
    let grid = box_grid(&[(-0.5, 0.5); 3], 3);
    let ds = geom(models::de_sitter(3, 1.0))?;
    let found = geom(lightlike_killing_search(&ds, &geom(models::de_sitter_killing_basis(3, 1.0))?, &grid, &cfg))?;
    ensure(found.is_empty(), || format!("de Sitter search returned {} candidates", found.len()))?;

    let mink = geom(models::minkowski(3))?;
    let trans = geom(models::minkowski_translations(3))?;
    let found = geom(lightlike_killing_search(&mink, &trans, &grid, &cfg))?;
    ensure(!found.is_empty(), || "no null translations found".into())?;
    let mut worst_orbit = 0.0f64;
    let mut min_norm = f64::INFINITY;
    for c in &found {
        let v = geom(VectorField::combination("v", &trans, &c.coeffs))?;
        let g = geom(mink.g(&grid[0]))?;
        let val = geom(v.eval(&grid[0]))?;
        ensure(bilinear(&g, &val, &val).abs() < 1e-6, || format!("{:?} is not null", c.coeffs))?;
        for p in &grid {
            min_norm = min_norm.min(linalg::norm(&geom(v.eval(p))?));
            worst_orbit = worst_orbit.max(geom(geodesic_orbit_residual(&mink, &v, p))?);
        }
    }
    ensure(worst_orbit < 1e-8 && min_norm > 1e-6, || format!("orbit {worst_orbit:e}, min norm {min_norm:e}"))?;

    let ads = geom(models::anti_de_sitter(3, 1.0))?;
    let ads_found = geom(lightlike_killing_search(&ads, &geom(models::anti_de_sitter_killing_basis(3))?, &grid, &cfg))?;
    ensure(!ads_found.is_empty(), || "AdS3 search returned nothing".into())?;
    Ok(format!(
        "dS empty; minkowski {} null directions, orbit <= {worst_orbit:.1e}, min|V| {min_norm:.2}; AdS3 {} candidates",
        found.len(),
        ads_found.len()
    ))
}

fn c6_isometry() -> Outcome {
    let mut worst_iso = 0.0f64;
    let mut min_non = f64::INFINITY;
    for ex in geom(warped_examples())? {
        let grid = ex.grid(3, 0.2);
        let iso = geom(extend_isometry_pullback_residual(&ex.spec, &ex.isometry, &grid))?;
        let non = geom(extend_isometry_pullback_residual(&ex.spec, &ex.non_isometry, &grid))?;
        worst_iso = worst_iso.max(iso);
        min_non = min_non.min(non);
        ensure(iso < 1e-9 && non > 0.1, || format!("{}: isometry {iso:e}, non-isometry {non}", ex.name))?;
    }
    Ok(format!("isometry residual <= {worst_iso:.1e}, non-isometry >= {min_non:.2}"))
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn c7_numerics() -> Outcome {
    const NAMES: [&str; 3] = ["x", "y", "z"];
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let e = oracles::random_expr(&mut rng, 4, 3);
        let tape = Tape::compile(&[e], &NAMES);
        let p = random_point(&[(-1.0, 1.0); 3], &mut rng);
        let jet = tape.eval_jet2(&p).map_err(|e| e.to_string())?.remove(0);
        let f = |q: &[f64]| tape.eval_f64(q).unwrap()[0];
        let grad = oracles::fd_gradient(&f, &p, 1e-3);
        let hess = oracles::fd_hessian(&f, &p, 1e-3);
        for i in 0..3 {
            worst = worst.max(rel_dev(jet.grad[i], grad[i]));
            for j in 0..3 {
                worst = worst.max(rel_dev(jet.hess[i][j], hess[i][j]));
            }
        }
    }
    ensure(worst < 1e-6, || format!("jet vs FD relative deviation {worst:e}"))?;

    let ds = geom(models::de_sitter(3, 1.0))?;
    let x0 = [0.1, 0.2, -0.1];
    let v0 = [1.0, 0.3, -0.2];
    let (xr, _) = geom(geodesic_endpoint(&ds, &x0, &v0, 1.0, 2560))?;
    let err = |steps| -> Result<f64, String> {
        let (x, _) = geom(geodesic_endpoint(&ds, &x0, &v0, 1.0, steps))?;
        Ok(linalg::norm(&linalg::axpy(-1.0, &xr, &x)))
    };
    let ratio = err(10)? / err(20)?;
    ensure((12.0..=20.0).contains(&ratio), || format!("RK4 error ratio {ratio}"))?;

    let drift_step = 0.005;
    let mut drift = 0.0f64;
    for m in [ds, geom(models::berger_sl2(2.0))?, geom(models::anti_de_sitter_poincare(3, 1.0))?] {
        let states = geom(integrate_geodesic(&m, &x0, &v0, 1.0, drift_step))?;
        drift = drift.max(geom(energy_drift(&m, &states))?);
    }
    ensure(drift < 1e-8, || format!("energy drift {drift:e}"))?;
    Ok(format!("1000 jets within {worst:.1e}; RK4 ratio {ratio:.2}; energy drift {drift:.1e} at step {drift_step}"))
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run_cli(args: &[&str], out: &Path, csv: &Path, threads: Option<&str>) -> Result<(Vec<u8>, Vec<u8>), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lorentzlab"));
    cmd.args(args).arg("--out").arg(out).arg("--csv").arg(csv);
    match threads {
        Some(t) => cmd.env("LORENTZLAB_THREADS", t),
        None => cmd.env_remove("LORENTZLAB_THREADS"),
    };
    let status = cmd.output().map_err(|e| e.to_string())?;
    let code = status.status.code();
    if !matches!(code, Some(0) | Some(1)) {
        return Err(format!("{args:?} exited with {code:?}: {}", String::from_utf8_lossy(&status.stderr)));
    }
    let report = std::fs::read(out).map_err(|e| e.to_string())?;
    let table = std::fs::read(csv).unwrap_or_default();
    Ok((report, table))
}

fn c8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = |name: &str| specs_dir().join(name).to_string_lossy().into_owned();
    let runs: Vec<Vec<String>> = vec![
        vec!["curvature".into(), "--spec".into(), spec("de_sitter3.json"), "--seed".into(), "3".into()],
        vec!["scan-cx".into(), "--spec".into(), spec("berger.json")],
        vec!["killing".into(), "--spec".into(), spec("killing_minkowski.json"), "--seed".into(), "5".into()],
        vec!["warped".into(), "--spec".into(), spec("warped_w1.json")],
        vec!["geodesic".into(), "--spec".into(), spec("de_sitter3.json"), "--velocity".into(), "1,0.3,-0.2".into()],
    ];
    for (i, args) in runs.iter().enumerate() {
        let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let mut outputs = Vec::new();
        for (j, threads) in [None, Some("1")].into_iter().enumerate() {
            let out = dir.path().join(format!("r{i}_{j}.json"));
            let csv = dir.path().join(format!("r{i}_{j}.csv"));
            outputs.push(run_cli(&args, &out, &csv, threads)?);
        }
        ensure(outputs[0] == outputs[1], || format!("{} reports differ between runs", args[0]))?;
        let report: serde_json::Value = serde_json::from_slice(&outputs[0].0).map_err(|e| e.to_string())?;
        ensure(report.get("seed").is_some() && report.get("input_digest").is_some(), || {
            format!("{} report lacks seed or digest", args[0])
        })?;
    }
    Ok(format!("{} commands reproduce byte-identical reports and tables", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("C1 tensor-calculus core", c1_tensor_core),
        ("C2 constant-curvature criterion", c2_constant_curvature),
        ("C3 geodesic transfer", c3_transfer),
        ("C4 warped-product criterion", c4_warped),
        ("C5 lightlike Killing facts", c5_killing),
        ("C6 isometry extension", c6_isometry),
        ("C7 numerics hygiene", c7_numerics),
        ("C8 determinism", c8_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
