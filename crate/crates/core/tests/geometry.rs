mod support;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subriem::catalog::{self, CatalogEntry};
use subriem::expr::parse;
use subriem::geometry::{
    beta_matrix, christoffel_raised, div_grad_h, div_grad_riemannian, equality_residual, g_vertical,
    horizontal_projection, lv_coefficients, sum_of_squares, PointFrame,
};
use subriem::ManifoldSpec;
use support::dd::DD;
use support::{eval_dd, fd_jet, rel_err};

fn in_box(e: &CatalogEntry, unit: &[f64]) -> Vec<f64> {
    e.domain_box.iter().zip(unit).map(|((lo, hi), u)| lo + (hi - lo) * u).collect()
}

fn entry_and_point() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (0..catalog::NAMES.len(), prop::collection::vec(0.0..1.0f64, 3))
}

fn load(i: usize, unit: &[f64]) -> (CatalogEntry, Vec<f64>) {
    let e = catalog::entry(catalog::NAMES[i]).unwrap();
    let x = in_box(&e, unit);
    (e, x)
}

fn rank_and_min_eig(m: &DMatrix<f64>) -> (usize, f64) {
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(1e-300);
    let rank = eig.eigenvalues.iter().filter(|v| **v > 1e-10 * scale).count();
    (rank, eig.eigenvalues.min() / scale)
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

fn rotation(m: usize, angles: &[f64]) -> DMatrix<f64> {
    // product of plane rotations, one per coordinate pair
    let mut r = DMatrix::identity(m, m);
    let mut a = angles.iter().cycle();
    for i in 0..m {
        for j in i + 1..m {
            let t = *a.next().unwrap();
            let mut g = DMatrix::identity(m, m);
            g[(i, i)] = t.cos();
            g[(j, j)] = t.cos();
            g[(i, j)] = -t.sin();
            g[(j, i)] = t.sin();
            r = g * r;
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cometric_and_vertical_metric_are_psd_with_rank_m((i, u) in entry_and_point()) {
        let (e, x) = load(i, &u);
        let m = e.spec.horizontal_rank;
        let b = beta_matrix(&e.spec, &x).unwrap().value;
        let gv = g_vertical(&e.spec, &x).unwrap();
        for mat in [&b, &gv] {
            prop_assert!(asymmetry(mat) <= 1e-12);
            let (rank, min) = rank_and_min_eig(mat);
            prop_assert_eq!(rank, m);
            prop_assert!(min >= -1e-10);
        }
    }

    #[test]
    fn projection_laws((i, u) in entry_and_point()) {
        let (e, x) = load(i, &u);
        let (p, q) = horizontal_projection(&e.spec, &x).unwrap();
        let b = beta_matrix(&e.spec, &x).unwrap().value;
        let gv = g_vertical(&e.spec, &x).unwrap();
        let scale = b.amax().max(1.0);
        prop_assert!((&p * &p - &p).amax() <= 1e-10 * scale);
        prop_assert!((&q * &q - &q).amax() <= 1e-10 * scale);
        prop_assert!((&b * &gv - &p).amax() <= 1e-10 * scale);
        prop_assert!((&p * &b - &b).amax() <= 1e-10 * scale);
    }

    #[test]
    fn point_frame_inverse_is_dual((i, u) in entry_and_point()) {
        let (e, x) = load(i, &u);
        let f = PointFrame::at(&e.spec, &x).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        prop_assert!((&f.frame.value * &f.inverse - &id).amax() <= 1e-12);
        prop_assert!((&f.inverse * &f.frame.value - &id).amax() <= 1e-12);
    }

    #[test]
    fn vertical_scaling_does_not_matter(
        (i, u) in entry_and_point(),
        lambda in prop::sample::select(vec![0.5, 1.0, 2.0, 10.0]),
    ) {
        let (e, x) = load(i, &u);
        let scaled = e.spec.with_vertical_scaling(lambda);
        let gv = g_vertical(&e.spec, &x).unwrap();
        prop_assert!((g_vertical(&scaled, &x).unwrap() - &gv).amax() <= 1e-10 * gv.amax().max(1.0));
        let lv = lv_coefficients(&e.spec, &x).unwrap();
        prop_assert!(lv_coefficients(&scaled, &x).unwrap().max_diff(&lv) <= 1e-10);
        for tau in e.spec.volume_densities.values() {
            let a = equality_residual(&e.spec, tau, &x).unwrap();
            let b = equality_residual(&scaled, tau, &x).unwrap();
            prop_assert!((a.residual - b.residual).amax() <= 1e-10);
        }
    }

    #[test]
    fn sum_of_squares_is_invariant_under_constant_rotations(
        (i, u) in entry_and_point(),
        angles in prop::collection::vec(-3.2..3.2f64, 3),
    ) {
        let (e, x) = load(i, &u);
        let theta = rotation(e.spec.horizontal_rank, &angles);
        let rotated = e.spec.rotate_horizontal(&theta);
        let a = sum_of_squares(&e.spec, &x).unwrap();
        let b = sum_of_squares(&rotated, &x).unwrap();
        prop_assert!(a.max_diff(&b) <= 1e-10);
        let a = lv_coefficients(&e.spec, &x).unwrap();
        let b = lv_coefficients(&rotated, &x).unwrap();
        prop_assert!(a.max_diff(&b) <= 1e-10);
    }

    #[test]
    fn principal_symbol_is_the_cometric((i, u) in entry_and_point()) {
        let (e, x) = load(i, &u);
        let spec = &e.spec;
        let m = spec.horizontal_rank as f64;
        let b = beta_matrix(spec, &x).unwrap().value;
        let one = parse("1", &spec.coordinates).unwrap();
        let ops = [
            sum_of_squares(spec, &x).unwrap(),
            lv_coefficients(spec, &x).unwrap().scaled(m),
            div_grad_h(spec, &one, &x).unwrap(),
            div_grad_riemannian(spec, &x).unwrap(),
        ];
        for op in ops {
            prop_assert!((op.second_matrix() - &b).amax() <= 1e-12 * b.amax().max(1.0));
        }
    }

    #[test]
    fn equality_residual_matches_the_operators((i, u) in entry_and_point()) {
        let (e, x) = load(i, &u);
        let spec = &e.spec;
        let m = spec.horizontal_rank as f64;
        let lv = lv_coefficients(spec, &x).unwrap().scaled(m);
        let b = beta_matrix(spec, &x).unwrap().value;
        let c = &spec.coordinates;
        for src in ["1".to_string(), format!("exp({})", c[0]), format!("2 + sin({})", c[1])] {
            let tau = parse(&src, c).unwrap();
            let report = equality_residual(spec, &tau, &x).unwrap();
            let dg = div_grad_h(spec, &tau, &x).unwrap();
            prop_assert!((&report.lhs - &lv.first).amax() <= 1e-9);
            prop_assert!((&report.rhs - &dg.first).amax() <= 1e-9);
            let vanishes = report.max_residual() <= 1e-9;
            prop_assert_eq!(vanishes, dg.max_diff(&lv) <= 1e-9);
            // the residual splits into the two clauses
            let split = -(&b * &report.volume_clause) - &report.projection_clause;
            prop_assert!((split - &report.residual).amax() <= 1e-9);
        }
    }
}

fn beta_dd(spec: &ManifoldSpec, x: &[DD], i: usize, j: usize) -> Option<DD> {
    let mut acc = DD::ZERO;
    for k in 0..spec.horizontal_rank {
        acc = acc + eval_dd(&spec.frame[k][i], x)? * eval_dd(&spec.frame[k][j], x)?;
    }
    Some(acc)
}

/// `Γ^{ijk}` from finite differences of `B`.
fn christoffel_oracle(spec: &ManifoldSpec, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut b = vec![vec![0.0; d]; d];
    let mut db = vec![vec![vec![0.0; d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            let jet = fd_jet(|p| beta_dd(spec, p, i, j), x).unwrap();
            b[i][j] = jet.value;
            for l in 0..d {
                db[l][i][j] = jet.grad[l];
            }
        }
    }
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let acc: f64 = (0..d)
                    .map(|l| b[i][l] * db[l][j][k] + b[j][l] * db[l][i][k] - b[k][l] * db[l][i][j])
                    .sum();
                out[(i * d + j) * d + k] = -0.5 * acc;
            }
        }
    }
    out
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for e in catalog::load_catalog() {
        for _ in 0..100 {
            let unit: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            let x = in_box(&e, &unit);
            let beta = beta_matrix(&e.spec, &x).unwrap();
            let gamma = christoffel_raised(&beta);
            let oracle = christoffel_oracle(&e.spec, &x);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let err = rel_err(gamma.get(i, j, k), oracle[(i * 3 + j) * 3 + k]);
                        assert!(err <= 1e-6, "{} at {x:?}: Γ[{i}{j}{k}] off by {err:e}", e.spec.name);
                    }
                }
            }
            // the contraction that enters L^V
            let gv = g_vertical(&e.spec, &x).unwrap();
            let c = gamma.contract(&gv);
            for k in 0..3 {
                let expect: f64 = (0..3)
                    .flat_map(|i| (0..3).map(move |j| (i, j)))
                    .map(|(i, j)| oracle[(i * 3 + j) * 3 + k] * gv[(i, j)])
                    .sum();
                assert!(rel_err(c[k], expect) <= 1e-6);
            }
        }
    }
}

#[test]
fn rotated_frame_witness() {
    let standard = catalog::entry("heisenberg").unwrap().spec;
    let rotated = catalog::entry("heisenberg-rotated").unwrap().spec;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a = sum_of_squares(&standard, &x).unwrap();
        let b = sum_of_squares(&rotated, &x).unwrap();
        assert!((b.second_matrix() - a.second_matrix()).amax() <= 1e-10);
        let diff = &b.first - &a.first;
        let expect = [x[0] / 2.0, x[1] / 2.0, 0.0];
        for k in 0..3 {
            assert!((diff[k] - expect[k]).abs() <= 1e-10);
        }
    }
}
