use nalgebra::DMatrix;
use proptest::prelude::*;
use tubeplan::dynamics::*;
use tubeplan::geometry::Polytope;

/// Plain Taylor series at high order, no scaling.
fn series_exp(m: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..terms {
        term = &term * m / k as f64;
        sum += &term;
    }
    sum
}

/// `Σ_k h^{k+1} Ac^k / (k+1)!`
fn series_input(ac: &DMatrix<f64>, h: f64, terms: usize) -> DMatrix<f64> {
    let n = ac.nrows();
    let mut sum = DMatrix::zeros(n, n);
    let mut term = DMatrix::identity(n, n) * h;
    for k in 1..terms {
        sum += &term;
        term = &term * ac * (h / (k + 1) as f64);
    }
    sum
}

fn case_study_ac() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.2, -0.3, 0.5, -0.5])
}

#[test]
fn case_study_discretization_matches_series() {
    let ac = case_study_ac();
    let (a, b) = discretize_zoh(&ac, &DMatrix::identity(2, 2), 0.05).unwrap();
    let a_ref = series_exp(&(&ac * 0.05), 40);
    let b_ref = series_input(&ac, 0.05, 40);
    assert!((&a - &a_ref).amax() < 1e-10, "{a} vs {a_ref}");
    assert!((&b - &b_ref).amax() < 1e-10, "{b} vs {b_ref}");
    // second-order truncation is close, and the third-order term is visible
    let second = DMatrix::identity(2, 2) + &ac * 0.05 + &ac * &ac * (0.05 * 0.05 / 2.0);
    assert!((&a - &second).amax() < 1e-4);
}

#[test]
fn tiny_period_tends_to_identity() {
    let (a, b) = discretize_zoh(&case_study_ac(), &DMatrix::identity(2, 2), 1e-6).unwrap();
    assert!((a - DMatrix::<f64>::identity(2, 2)).amax() < 1e-5);
    assert!(b.amax() < 1e-5);
}

fn case_model() -> LtiModel {
    let (a, b) = discretize_zoh(&case_study_ac(), &DMatrix::identity(2, 2), 0.05).unwrap();
    LtiModel::new(a, b, Polytope::boxed(&[-6.0, -6.0], &[6.0, 6.0]).unwrap(), Polytope::regular_polygon(&[0.0, 0.0], 0.15, 8).unwrap())
        .unwrap()
}

proptest! {
    #[test]
    fn accumulated_support_is_monotone(d in prop::array::uniform2(-2.0..2.0f64), ell in 0usize..30) {
        let m = case_model();
        prop_assert!(m.accumulated_disturbance_support(ell + 1, &d) >= m.accumulated_disturbance_support(ell, &d) - 1e-15);
    }

    #[test]
    fn nominal_step_is_linear(x1 in prop::array::uniform2(-5.0..5.0f64), x2 in prop::array::uniform2(-5.0..5.0f64), u1 in prop::array::uniform2(-3.0..3.0f64), u2 in prop::array::uniform2(-3.0..3.0f64)) {
        let m = case_model();
        let z = [0.0, 0.0];
        let s = m.step(&[x1[0] + x2[0], x1[1] + x2[1]], &[u1[0] + u2[0], u1[1] + u2[1]], &z).unwrap();
        let a = m.step(&x1, &u1, &z).unwrap();
        let b = m.step(&x2, &u2, &z).unwrap();
        for k in 0..2 {
            prop_assert!((s[k] - a[k] - b[k]).abs() < 1e-12);
        }
    }
}
