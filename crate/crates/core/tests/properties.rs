use approx::assert_relative_eq;
use proptest::prelude::*;

use pdmix_core::analysis::{error_norms, format_g, galerkin_residual, interface_flux_residual, rate, run_level};
use pdmix_core::assembly::assemble_system;
use pdmix_core::geometry::Point;
use pdmix_core::manufactured::{example1, example2, example3, InterfaceMode, ManufacturedCase};
use pdmix_core::mesh::{build_cartesian_mesh, validate_consistency, Region};
use pdmix_core::quadrature::{integrate_on_segment, integrate_on_triangle, segment_rule, triangle_rule};
use pdmix_core::solver::solve;
use pdmix_core::spaces::{build_dof_layout, build_dof_layout_pinned};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn mesh_invariants_hold_across_levels() {
    for n in [1, 2, 4, 8] {
        let m = build_cartesian_mesh(n).unwrap();
        assert!(validate_consistency(&m).is_ok(), "level {n}");
        assert_relative_eq!(m.total_area(), 4.0, epsilon = 1e-12);
        assert_eq!(m.triangles.len(), 8 * n * n);
        assert_eq!(m.interface.len(), 4 * n);
        let area = |r| m.triangles_in(r).map(|t| m.triangle_area(t)).sum::<f64>();
        assert_relative_eq!(area(Region::One), 2.0, epsilon = 1e-12);
        assert_relative_eq!(area(Region::Two), 2.0, epsilon = 1e-12);
    }
}

#[test]
fn patch_solution_is_reproduced_at_every_level() {
    let case = ManufacturedCase::patch([0.7, -0.3], [0.2, -0.5, 1.1], [2.0, 1.0], 1.0);
    for n in [1, 2, 4] {
        let (mesh, sol, report) = run_level(&case, n).unwrap();
        for e in report.columns() {
            assert!(e < 1e-10, "level {n}: {report:?}");
        }
        assert!(interface_flux_residual(&sol, &case, &mesh).unwrap() < 1e-10);
    }
}

#[test]
fn galerkin_residual_decreases_under_refinement() {
    let case = example3(InterfaceMode::Derived).unwrap();
    let mut previous = f64::INFINITY;
    for n in [2, 4, 8, 16] {
        let mesh = build_cartesian_mesh(n).unwrap();
        let sys = assemble_system(&mesh, &build_dof_layout(&mesh), &case).unwrap();
        let r = galerkin_residual(&case, &mesh, &sys).unwrap();
        assert!(r < previous, "level {n}: {r} vs {previous}");
        previous = r;
    }
}

#[test]
fn interface_flux_residual_decreases_from_level_four() {
    let case = example2(InterfaceMode::Derived).unwrap();
    let residuals: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let (mesh, sol, _) = run_level(&case, n).unwrap();
            interface_flux_residual(&sol, &case, &mesh).unwrap()
        })
        .collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn error_norms_are_independent_of_pin() {
    let case = example1();
    let mesh = build_cartesian_mesh(4).unwrap();
    let base = solve(&mesh, &assemble_system(&mesh, &build_dof_layout(&mesh), &case).unwrap()).unwrap();
    let base_err = error_norms(&base, &case, &mesh).unwrap();
    for pin in [1, 9, 30] {
        let layout = build_dof_layout_pinned(&mesh, pin).unwrap();
        let sol = solve(&mesh, &assemble_system(&mesh, &layout, &case).unwrap()).unwrap();
        assert!(max_abs_diff(&sol.p2, &base.p2) < 1e-9);
        assert!(max_abs_diff(&sol.u1, &base.u1) < 1e-9);
        let err = error_norms(&sol, &case, &mesh).unwrap();
        assert!(max_abs_diff(&err.columns(), &base_err.columns()) < 1e-9);
    }
}

fn monomial_triangle_integral(i: i32, j: i32) -> f64 {
    // ∫ ξ^i η^j over the reference triangle = i! j! / (i + j + 2)!
    let fact = |k: i32| (1..=k).map(f64::from).product::<f64>();
    fact(i) * fact(j) / fact(i + j + 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_rules_integrate_monomials(degree in 1usize..=10, i in 0i32..=10, j in 0i32..=10) {
        prop_assume!((i + j) as usize <= degree);
        let rule = triangle_rule(degree).unwrap();
        let tri: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let got = integrate_on_triangle(|p| p[0].powi(i) * p[1].powi(j), &tri, &rule).unwrap();
        prop_assert!((got - monomial_triangle_integral(i, j)).abs() < 1e-13);
    }

    #[test]
    fn segment_rules_integrate_monomials(degree in 1usize..=11, k in 0i32..=11, len in 0.1f64..3.0) {
        prop_assume!(k as usize <= degree);
        let rule = segment_rule(degree).unwrap();
        let got = integrate_on_segment(|p| p[0].powi(k), &[[0.0, 0.0], [len, 0.0]], &rule).unwrap();
        let exact = len.powi(k + 1) / f64::from(k + 1);
        prop_assert!((got - exact).abs() <= 1e-12 * exact.max(1.0));
    }

    #[test]
    fn solution_scales_linearly_with_data(lambda in -20.0f64..20.0) {
        prop_assume!(lambda.abs() > 1e-3);
        let case = example2(InterfaceMode::Derived).unwrap();
        let mesh = build_cartesian_mesh(2).unwrap();
        let layout = build_dof_layout(&mesh);
        let x = solve(&mesh, &assemble_system(&mesh, &layout, &case).unwrap()).unwrap().coefficients();
        let y = solve(&mesh, &assemble_system(&mesh, &layout, &case.scaled(lambda)).unwrap()).unwrap().coefficients();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        prop_assert!(max_abs_diff(&scaled, &y) <= 1e-10 * lambda.abs() * scale);
    }

    #[test]
    fn rate_recovers_power_law(c in 0.01f64..100.0, p in 0.1f64..4.0) {
        let coarse = c * 0.5f64.powf(p);
        let fine = c * 0.25f64.powf(p);
        prop_assert!((rate(coarse, fine).unwrap() - p).abs() < 1e-12);
    }

    #[test]
    fn format_g_keeps_six_significant_digits(m in 1.0f64..10.0, e in -12i32..12) {
        let v = m * 10f64.powi(e);
        let parsed: f64 = format_g(v).parse().unwrap();
        prop_assert!(((parsed - v) / v).abs() <= 5e-6);
    }
}
