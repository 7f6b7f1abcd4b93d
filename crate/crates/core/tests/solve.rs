mod common;

use common::*;
use elastodg::forms::{form_value, residual_functional, FormContext, StabilizationParams, FLUX_ALIASES};
use elastodg::solve::{apply_operator, solve_saddle, Backend, RESIDUAL_TOLERANCE};
use elastodg::spaces::{DiscreteField, Difference, FieldCoeffs};
use elastodg::verify::{case_2d_poly, case_3d_sine};
use elastodg::Error;

fn zero_load(_: &[f64; 3]) -> [f64; 3] {
    [0.0; 3]
}

#[test]
fn columns_match_direct_form_evaluation() {
    for (k, l) in [(1, 1), (1, 0), (0, 1)] {
        let s = tri(1, k, l);
        let n = s.dofmap.total_dofs();
        let unit = |i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            FieldCoeffs { values: v }
        };
        for alias in FLUX_ALIASES {
            let stab = StabilizationParams::from_alias(alias).unwrap();
            let sys = s.assemble(&stab, zero_load);
            let ctx = FormContext::new(&s.mesh, &s.topo, &s.dofmap, material(2), &stab, s.dofmap.discrete_exactness()).unwrap();
            let basis: Vec<FieldCoeffs> = (0..n).map(unit).collect();
            for j in 0..n {
                let col = apply_operator(&sys, &basis[j].values).unwrap();
                let trial = DiscreteField::new(&s.mesh, &s.dofmap, &basis[j]);
                for (i, got) in col.iter().enumerate() {
                    let test = DiscreteField::new(&s.mesh, &s.dofmap, &basis[i]);
                    let want = form_value(&ctx, &trial, &test);
                    assert!((got - want).abs() < 1e-11 * (1.0 + want.abs()), "{alias} ({i},{j}): {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn operator_rejects_wrong_length() {
    let s = tri(1, 1, 1);
    let sys = s.assemble(&StabilizationParams::default(), zero_load);
    assert!(matches!(apply_operator(&sys, &[1.0]), Err(Error::SizeMismatch { .. })));
}

#[test]
fn diagonal_blocks_are_nonnegative() {
    let s = tri(3, 1, 1);
    let sys = s.assemble(&StabilizationParams::default(), zero_load);
    let mut rng = rng(3);
    for _ in 0..50 {
        let x = random_vec(&mut rng, sys.total_dofs());
        let y = apply_operator(&sys, &x).unwrap();
        let q: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!(q >= 0.0);
    }
}

#[test]
fn zero_load_gives_zero_solution() {
    let s = tri(2, 1, 1);
    let sys = s.assemble(&StabilizationParams::default(), zero_load);
    let (x, report) = solve_saddle(&sys).unwrap();
    assert!(x.values.iter().all(|v| *v == 0.0));
    assert!(report.relative_residual <= RESIDUAL_TOLERANCE);
}

#[test]
fn two_triangles_solve_to_tolerance() {
    let case = case_2d_poly();
    let s = tri(1, 1, 1);
    let sys = s.assemble(&StabilizationParams::default(), case.load);
    let (_, report) = solve_saddle(&sys).unwrap();
    assert!(report.relative_residual <= 1e-10, "{}", report.relative_residual);
    assert_eq!(report.backend, Backend::SymmetricIndefinite);
    assert!(report.pivots_healthy);
}

#[test]
fn solution_is_linear_in_the_load() {
    let case = case_2d_poly();
    let s = tri(4, 2, 2);
    let stab = StabilizationParams::from_alias("c11=1,c22=1").unwrap();
    let base = solve_saddle(&s.assemble(&stab, case.load)).unwrap().0;
    let scaled = solve_saddle(&s.assemble(&stab, |x| {
        let f = (case.load)(x);
        [10.0 * f[0], 10.0 * f[1], 10.0 * f[2]]
    }))
    .unwrap()
    .0;
    let norm = max_abs(&base.values);
    for (a, b) in base.values.iter().zip(&scaled.values) {
        assert!((10.0 * a - b).abs() <= 1e-12 * 10.0 * norm);
    }
}

#[test]
fn repeated_solves_are_identical() {
    let case = case_3d_sine();
    let s = tet(2, 1, 1);
    let sys = s.assemble(&StabilizationParams::default(), case.load);
    let a = solve_saddle(&sys).unwrap().0;
    let b = solve_saddle(&s.assemble(&StabilizationParams::default(), case.load)).unwrap().0;
    assert_eq!(a.values, b.values);
}

#[test]
fn every_flux_family_solves_to_tolerance() {
    let case = case_2d_poly();
    for (k, l) in [(0, 0), (1, 1), (1, 0), (3, 3)] {
        let s = tri(4, k, l);
        for alias in FLUX_ALIASES {
            let sys = s.assemble(&StabilizationParams::from_alias(alias).unwrap(), case.load);
            let (_, report) = solve_saddle(&sys).unwrap();
            assert!(report.relative_residual <= RESIDUAL_TOLERANCE, "{alias} k={k} l={l}");
        }
    }
}

#[test]
fn error_is_orthogonal_to_the_discrete_space() {
    let case = case_2d_poly();
    for (k, l) in [(1, 1), (2, 1)] {
        let s = tri(4, k, l);
        let stab = StabilizationParams::from_alias("c11=hinv,c22=h").unwrap();
        let sys = s.assemble(&stab, case.load);
        let (x, _) = solve_saddle(&sys).unwrap();
        let uh = DiscreteField::new(&s.mesh, &s.dofmap, &x);
        let ctx = FormContext::new(&s.mesh, &s.topo, &s.dofmap, case.mat, &stab, s.dofmap.data_exactness()).unwrap();
        let g = residual_functional(&ctx, &Difference(&case, &uh), &zero_load);
        let scale = 1.0 + max_abs(&sys.rhs_u);
        assert!(max_abs(&g) <= 1e-8 * scale, "{} vs scale {scale}", max_abs(&g));
    }
}

#[test]
fn nonpositive_zeta_is_rejected_before_solving() {
    let s = tri(1, 1, 1);
    let stab = StabilizationParams { zeta: 0.0, ..StabilizationParams::default() };
    let err = elastodg::forms::assemble_system(&s.mesh, &s.topo, &s.dofmap, &material(2), &stab, zero_load);
    assert!(err.is_err());
}
