use subriem::catalog;
use subriem::expr::parse;
use subriem::geometry::{div_grad_h, lv_coefficients};
use subriem::lie::{
    haar_density_left, haar_density_right, haar_left_operator, haar_right_operator, left_invariance_check,
    structure_constants, unimodularity_report, LieData,
};
use subriem::ManifoldSpec;

const GROUPS: [&str; 3] = ["heisenberg", "su2", "affine"];

fn group(name: &str) -> (ManifoldSpec, LieData) {
    let spec = catalog::entry(name).unwrap().spec;
    let lie = LieData::compute(&spec).unwrap();
    (spec, lie)
}

#[test]
fn structure_constants_are_antisymmetric_and_satisfy_jacobi() {
    for name in GROUPS {
        let (spec, lie) = group(name);
        for x in &spec.sample_points {
            let c = structure_constants(&spec, x).unwrap();
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((c.get(k, i, j) + c.get(k, j, i)).abs() <= 1e-12);
                    }
                }
            }
            assert!(c.jacobi_defect() <= 1e-10, "{name}");
            assert!(c.max_diff(&lie.structure_constants) <= 1e-10, "{name} at {x:?}");
        }
        let tr = lie.structure_constants.trace_ad();
        for i in 0..3 {
            let sum: f64 = (0..3).map(|k| lie.structure_constants.get(k, i, k)).sum();
            assert!((tr[i] - sum).abs() <= 1e-14);
        }
        if let Some(mi) = &lie.modular_inverse {
            assert!((mi.value(&lie.identity_point).unwrap() - 1.0).abs() <= 1e-14);
        }
    }
}

#[test]
fn left_invariant_frames_pass_the_spot_check() {
    for name in GROUPS {
        let (spec, lie) = group(name);
        assert!(left_invariance_check(&spec, &lie, 5, 1).passed(1e-9), "{name}");
    }
}

#[test]
fn haar_densities() {
    let expected: [fn(&[f64]) -> f64; 3] = [|_| 1.0, |x| x[0].sin().abs(), |x| x[0].powi(-2)];
    for (name, want) in GROUPS.iter().zip(expected) {
        let (spec, _) = group(name);
        for x in &spec.sample_points {
            assert!((haar_density_left(&spec, x).unwrap() - want(x)).abs() <= 1e-12, "{name}");
        }
    }
    let (spec, lie) = group("affine");
    for x in &spec.sample_points {
        assert!((haar_density_right(&spec, &lie, x).unwrap() - 1.0 / x[0]).abs() <= 1e-12);
    }
}

#[test]
fn haar_operators_agree_along_both_paths() {
    for name in GROUPS {
        let (spec, lie) = group(name);
        for x in &spec.sample_points {
            let left = haar_left_operator(&spec, &lie, x).unwrap();
            assert!(left.discrepancy() <= 1e-9, "{name} left at {x:?}");
            let right = haar_right_operator(&spec, &lie, x).unwrap();
            assert!(right.discrepancy() <= 1e-9, "{name} right at {x:?}");
            // and with the density written out by hand
            let tau = &spec.volume_densities["left_haar"];
            assert!(div_grad_h(&spec, tau, x).unwrap().max_diff(&left.coef) <= 1e-9);
        }
    }
}

#[test]
fn affine_group_asymmetry() {
    let (spec, lie) = group("affine");
    let report = unimodularity_report(&spec, &lie).unwrap();
    assert!(!report.unimodular);
    assert!(report.right_vanishes_left_does_not);
    for x in &spec.sample_points {
        let left = haar_left_operator(&spec, &lie, x).unwrap();
        let right = haar_right_operator(&spec, &lie, x).unwrap();
        let lf = left.frame_first.unwrap();
        let rf = right.frame_first.unwrap();
        assert!((lf[0] + 1.0).abs() <= 1e-12 && lf[1].abs() <= 1e-12);
        assert!(rf.iter().all(|c| c.abs() <= 1e-12));
        let lv = lv_coefficients(&spec, x).unwrap();
        assert!(lv.max_diff(&right.coef.scaled(0.5)) <= 1e-10);
    }
}

#[test]
fn unimodular_groups() {
    for name in ["heisenberg", "su2"] {
        let (spec, lie) = group(name);
        let report = unimodularity_report(&spec, &lie).unwrap();
        assert!(report.unimodular && report.horizontal_traces_vanish, "{name}");
        assert!(!report.right_vanishes_left_does_not);
        // both Haar sub-Laplacians reduce to the sum of squares, and L^V is half of it
        for x in &spec.sample_points {
            let left = haar_left_operator(&spec, &lie, x).unwrap();
            assert!(lv_coefficients(&spec, x).unwrap().max_diff(&left.coef.scaled(0.5)) <= 1e-10);
        }
    }
}

#[test]
fn non_invariant_frame_fails_the_spot_check() {
    let spec = catalog::entry("heisenberg-rotated").unwrap().spec;
    let mut lie = LieData::compute(&spec).unwrap();
    lie.modular_inverse = Some(parse("1", &spec.coordinates).unwrap());
    assert!(!left_invariance_check(&spec, &lie, 5, 1).passed(1e-9));
}

#[test]
fn every_golden_value_is_reproduced() {
    for e in catalog::load_catalog() {
        assert!(!e.golden.is_empty(), "{}", e.spec.name);
        for g in &e.golden {
            let dev = g.deviation(&e.spec).unwrap();
            assert!(dev <= g.tol, "{} {}: {dev:e} (source {})", e.spec.name, g.name(), g.source.note());
        }
    }
}
