//! Implicit-Euler heat step with the 3-point Laplacian and mirror-node
//! Neumann closure.
//!
//! The matrix `I − dt·Δ_h` has rows `(1+2r, −2r)`, `(−r, 1+2r, −r)`,
//! `(−2r, 1+2r)` with `r = dt/h²`. It is an M-matrix, symmetric in the
//! trapezoid-weighted inner product, and its weighted column sums equal the
//! weights, so the trapezoid mass is preserved by every solve.

use crate::error::{Error, Result};
use crate::grid::{Domain1D, ScalarField};

/// Pre-factored `(I − dt·Δ_h)` for a fixed grid and step.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    r: f64,
    /// Modified super-diagonal of the forward sweep.
    upper: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl HeatOperator {
    pub fn new(domain: Domain1D, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        let n = domain.nodes();
        let h = domain.spacing();
        let r = dt / (h * h);
        let diag = 1.0 + 2.0 * r;
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        inv_pivot[0] = 1.0 / diag;
        upper[0] = -2.0 * r * inv_pivot[0];
        for i in 1..n {
            let lower = if i + 1 == n { -2.0 * r } else { -r };
            let pivot = diag - lower * upper[i - 1];
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = if i + 1 == n { 0.0 } else { -r * inv_pivot[i] };
        }
        Ok(Self { r, upper, inv_pivot })
    }

    pub fn nodes(&self) -> usize {
        self.upper.len()
    }

    /// Solves `(I − dt·Δ_h) u' = u` in place.
    pub fn apply(&self, u: &mut [f64]) {
        let n = u.len();
        debug_assert_eq!(n, self.nodes());
        let r = self.r;
        u[0] *= self.inv_pivot[0];
        for i in 1..n {
            let lower = if i + 1 == n { -2.0 * r } else { -r };
            u[i] = (u[i] - lower * u[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            u[i] -= self.upper[i] * u[i + 1];
        }
    }
}

/// One implicit heat step on a field.
pub fn diffusion_substep(u: &ScalarField, dt: f64) -> Result<ScalarField> {
    let op = HeatOperator::new(u.domain(), dt)?;
    let mut values = u.values().to_vec();
    op.apply(&mut values);
    ScalarField::new(u.domain(), values)
}

/// Eigenvalue of `−Δ_h` for the mode `cos(kπx/L)` on the Neumann grid.
pub fn neumann_eigenvalue(domain: Domain1D, k: usize) -> f64 {
    let h = domain.spacing();
    2.0 / (h * h) * (1.0 - (k as f64 * std::f64::consts::PI * h / domain.length()).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Dense `I − dt·Δ_h` for the oracle.
    fn dense_matrix(n: usize, r: f64) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = 1.0 + 2.0 * r;
            if i == 0 {
                m[0][1] = -2.0 * r;
            } else if i == n - 1 {
                m[i][i - 1] = -2.0 * r;
            } else {
                m[i][i - 1] = -r;
                m[i][i + 1] = -r;
            }
        }
        m
    }

    fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn constant_is_fixed() {
        let d = Domain1D::new(1.0, 11).unwrap();
        let u = ScalarField::constant(d, 0.7).unwrap();
        let out = diffusion_substep(&u, 0.3).unwrap();
        assert!(out.values().iter().all(|&v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn cosine_mode_decays_by_eigenvalue() {
        let n = 17;
        let d = Domain1D::new(2.0, n).unwrap();
        let dt = 0.05;
        let u = d.sample(|x| (PI * x / 2.0).cos()).unwrap();
        // Oracle: the dense matrix maps cos to (1 + dt·λ_h)·cos.
        let h = d.spacing();
        let m = dense_matrix(n, dt / (h * h));
        let mv = mat_vec(&m, u.values());
        let lambda = neumann_eigenvalue(d, 1);
        for (a, b) in mv.iter().zip(u.values()) {
            assert!((a - (1.0 + dt * lambda) * b).abs() < 1e-12);
        }
        let out = diffusion_substep(&u, dt).unwrap();
        let factor = 1.0 / (1.0 + dt * lambda);
        for (a, b) in out.values().iter().zip(u.values()) {
            assert!((a - factor * b).abs() < 1e-13);
        }
    }

    #[test]
    fn solve_inverts_dense_matrix() {
        let n = 9;
        let d = Domain1D::new(1.0, n).unwrap();
        let u = d.sample(|x| (3.0 * x).sin() + x * x).unwrap();
        let out = diffusion_substep(&u, 0.01).unwrap();
        let h = d.spacing();
        let back = mat_vec(&dense_matrix(n, 0.01 / (h * h)), out.values());
        for (a, b) in back.iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn preserves_mass_and_max_principle(
            values in proptest::collection::vec(-5.0f64..5.0, 3..40),
            dt in 1e-5f64..1.0,
        ) {
            let d = Domain1D::new(1.5, values.len()).unwrap();
            let u = ScalarField::new(d, values).unwrap();
            let out = diffusion_substep(&u, dt).unwrap();
            let m0 = integrate(&u);
            prop_assert!((integrate(&out) - m0).abs() < 1e-12 * (1.0 + m0.abs() + 5.0));
            prop_assert!(out.min() >= u.min() - 1e-12);
            prop_assert!(out.max() <= u.max() + 1e-12);
        }
    }
}
