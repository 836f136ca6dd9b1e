mod oracles;

use lorentzlab_core::expr::{parse, Tape};
use lorentzlab_core::geodesic::{energy_drift, integrate_geodesic};
use lorentzlab_core::killing::killing_residual_on;
use lorentzlab_core::metric::{box_grid, random_point, random_unit};
use lorentzlab_core::{models, MetricField, VectorField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NAMES: [&str; 3] = ["x", "y", "z"];

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn small_perturbation(seed: u64) -> MetricField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for i in 0..3 {
        let mut row = Vec::new();
        for j in i..3 {
            let e = oracles::random_expr(&mut rng, 2, 3);
            let e = format!("{}", e.display(&NAMES));
            let base = match (i, j) {
                (0, 0) => "-1",
                (a, b) if a == b => "1",
                _ => "0",
            };
            row.push(format!("{base} + 0.05*tanh({e})"));
        }
        rows.push(row);
    }
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
    MetricField::parse("perturbed", &NAMES, &rows, vec![-1, 1, 1]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parse_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = oracles::random_expr(&mut rng, 4, 3);
        let text = format!("{}", e.display(&NAMES));
        let back = parse(&text, &NAMES).unwrap();
        let p = random_point(&[(-1.0, 1.0); 3], &mut rng);
        let a = Tape::compile(&[e], &NAMES).eval_f64(&p).unwrap()[0];
        let b = Tape::compile(&[back], &NAMES).eval_f64(&p).unwrap()[0];
        prop_assert!(close(a, b, 1e-12), "{text}: {a} vs {b}");
    }

    #[test]
    fn jets_match_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = oracles::random_expr(&mut rng, 4, 3);
        let tape = Tape::compile(&[e], &NAMES);
        let p = random_point(&[(-1.0, 1.0); 3], &mut rng);
        let jet = tape.eval_jet2(&p).unwrap().remove(0);
        let f = |q: &[f64]| tape.eval_f64(q).unwrap()[0];
        let grad = oracles::fd_gradient(&f, &p, 1e-3);
        let hess = oracles::fd_hessian(&f, &p, 1e-3);
        for i in 0..3 {
            prop_assert!(close(jet.grad[i], grad[i], 1e-6));
            for j in 0..3 {
                prop_assert!(close(jet.hess[i][j], hess[i][j], 1e-5));
                prop_assert_eq!(jet.hess[i][j], jet.hess[j][i]);
            }
        }
    }

    #[test]
    fn riemann_symmetries(seed in any::<u64>()) {
        let m = small_perturbation(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let p = random_point(&[(-0.5, 0.5); 3], &mut rng);
        let cb = m.curvature_at(&p).unwrap();
        prop_assert!(cb.symmetry_defect() < 1e-10, "{}", cb.symmetry_defect());
    }

    #[test]
    fn constant_rescaling_divides_sectional_curvature(seed in any::<u64>(), c in 0.2f64..5.0) {
        let m = small_perturbation(seed);
        let mc = m.scaled(c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let p = random_point(&[(-0.5, 0.5); 3], &mut rng);
        let u = random_unit(3, &mut rng);
        let v = random_unit(3, &mut rng);
        let k = m.curvature_at(&p).unwrap().sectional_curvature(&u, &v);
        let kc = mc.curvature_at(&p).unwrap().sectional_curvature(&u, &v);
        if let (Ok(k), Ok(kc)) = (k, kc) {
            prop_assert!(close(kc * c, k, 1e-9), "{k} vs {}", kc * c);
        }
    }

    #[test]
    fn geodesics_conserve_energy(seed in any::<u64>()) {
        let m = small_perturbation(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let x0 = random_point(&[(-0.3, 0.3); 3], &mut rng);
        let v0 = random_unit(3, &mut rng);
        let states = integrate_geodesic(&m, &x0, &v0, 0.5, 0.01).unwrap();
        prop_assert!(energy_drift(&m, &states).unwrap() < 1e-8);
    }

    #[test]
    fn killing_equation_is_linear(c in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let m = models::de_sitter(3, 1.0).unwrap();
        let basis = models::de_sitter_killing_basis(3, 1.0).unwrap();
        let v = VectorField::combination("mix", &basis, &c).unwrap();
        let grid = box_grid(&[(-0.5, 0.5); 3], 3);
        let scale = 1.0 + c.iter().map(|x| x.abs()).sum::<f64>();
        prop_assert!(killing_residual_on(&m, &v, &grid).unwrap() < 1e-8 * scale);
    }
}
