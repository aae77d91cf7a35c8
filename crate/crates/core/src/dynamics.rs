//! Disturbed discrete-time LTI plant `x⁺ = A x + B u + w`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Polytope, GEO_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{what} has shape {got:?}, expected {expected:?}")]
    Shape { what: &'static str, got: (usize, usize), expected: (usize, usize) },
    #[error("{set} does not contain the origin")]
    OriginNotContained { set: &'static str },
    #[error("{set} violated: {value:?} is outside the set")]
    ConstraintViolation { set: &'static str, value: Vec<f64> },
    #[error("sampling period must be positive, got {0}")]
    BadPeriod(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtiModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub input_set: Polytope,
    pub disturbance_set: Polytope,
}

impl LtiModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, input_set: Polytope, disturbance_set: Polytope) -> Result<Self, DynamicsError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(DynamicsError::Shape { what: "A", got: a.shape(), expected: (n, n) });
        }
        if b.nrows() != n {
            return Err(DynamicsError::Shape { what: "B", got: b.shape(), expected: (n, b.ncols()) });
        }
        let m = b.ncols();
        if input_set.dim() != m {
            return Err(DynamicsError::Shape { what: "input set", got: (input_set.dim(), 1), expected: (m, 1) });
        }
        if disturbance_set.dim() != n {
            return Err(DynamicsError::Shape { what: "disturbance set", got: (disturbance_set.dim(), 1), expected: (n, 1) });
        }
        if !input_set.contains_point(&vec![0.0; m], GEO_TOL) {
            return Err(DynamicsError::OriginNotContained { set: "input set" });
        }
        if !disturbance_set.contains_point(&vec![0.0; n], GEO_TOL) {
            return Err(DynamicsError::OriginNotContained { set: "disturbance set" });
        }
        disturbance_set.require_vertices()?;
        Ok(LtiModel { a, b, input_set, disturbance_set })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// `A x + B u`, unchecked.
    pub fn nominal(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        let u = DVector::from_column_slice(u);
        (&self.a * x + &self.b * u).as_slice().to_vec()
    }

    /// `A x + B u + w` with `u ∈ 𝒰` and `w ∈ 𝒲` checked.
    pub fn step(&self, x: &[f64], u: &[f64], w: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        if !self.input_set.contains_point(u, GEO_TOL) {
            return Err(DynamicsError::ConstraintViolation { set: "input set", value: u.to_vec() });
        }
        if !self.disturbance_set.contains_point(w, GEO_TOL) {
            return Err(DynamicsError::ConstraintViolation { set: "disturbance set", value: w.to_vec() });
        }
        let mut next = self.nominal(x, u);
        for (xi, wi) in next.iter_mut().zip(w) {
            *xi += wi;
        }
        Ok(next)
    }

    /// Support function of `⊕_{j=1..ℓ} A^{j-1} 𝒲` in direction `d`.
    pub fn accumulated_disturbance_support(&self, ell: usize, d: &[f64]) -> f64 {
        let mut dir = DVector::from_column_slice(d);
        let at = self.a.transpose();
        let mut total = 0.0;
        for _ in 0..ell {
            total += self.disturbance_support(dir.as_slice());
            dir = &at * dir;
        }
        total
    }

    /// Table `table[ℓ] = accumulated support for ℓ = 0..=max_ell`.
    pub fn accumulated_support_table(&self, max_ell: usize, d: &[f64]) -> Vec<f64> {
        let mut dir = DVector::from_column_slice(d);
        let at = self.a.transpose();
        let mut out = Vec::with_capacity(max_ell + 1);
        out.push(0.0);
        let mut total = 0.0;
        for _ in 0..max_ell {
            total += self.disturbance_support(dir.as_slice());
            out.push(total);
            dir = &at * dir;
        }
        out
    }

    pub fn disturbance_support(&self, d: &[f64]) -> f64 {
        self.disturbance_set.support(d).expect("disturbance set has vertices")
    }
}

/// Zero-order-hold discretization: `A = e^{h Ac}`, `B = ∫₀ʰ e^{Ac s} ds · Bc`,
/// both read off the exponential of the augmented matrix `[[Ac, Bc], [0, 0]]·h`.
pub fn discretize_zoh(ac: &DMatrix<f64>, bc: &DMatrix<f64>, h: f64) -> Result<(DMatrix<f64>, DMatrix<f64>), DynamicsError> {
    if h.is_nan() || h <= 0.0 {
        return Err(DynamicsError::BadPeriod(h));
    }
    let n = ac.nrows();
    if ac.ncols() != n {
        return Err(DynamicsError::Shape { what: "Ac", got: ac.shape(), expected: (n, n) });
    }
    if bc.nrows() != n {
        return Err(DynamicsError::Shape { what: "Bc", got: bc.shape(), expected: (n, bc.ncols()) });
    }
    let m = bc.ncols();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(ac * h));
    aug.view_mut((0, n), (n, m)).copy_from(&(bc * h));
    let e = expm(&aug);
    Ok((e.view((0, 0), (n, n)).into_owned(), e.view((0, n), (n, m)).into_owned()))
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series
/// (terms dropped once below 1e-14 relative to the partial sum).
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm1 = (0..n).map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scaled_norm = norm1;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let ms = m / 2f64.powi(squarings as i32);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..200 {
        term = &term * &ms / k as f64;
        sum += &term;
        if term.amax() <= 1e-14 * sum.amax().max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
