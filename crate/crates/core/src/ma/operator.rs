//! Pointwise pieces of the equation `F(D²f) = φ·G(Df)`: the operator
//! `F = det^{1/n}` with its derivative, the gradient weights and the graph
//! curvature formula.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `F(A) = det(A)^{1/n}` and `DF(A) = (1/n)F(A)A⁻¹` for symmetric positive
/// definite `A`.
pub fn f_value_and_derivative(a: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::domain("F needs a nonempty square matrix"));
    }
    let sym = (a + a.transpose()) * 0.5;
    let min_eig = sym.clone().symmetric_eigenvalues().min();
    if !(min_eig > 0.0) {
        return Err(Error::OutsideCone { min_eigenvalue: min_eig });
    }
    let chol = sym.clone().cholesky().ok_or(Error::OutsideCone { min_eigenvalue: min_eig })?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let f = (log_det / n as f64).exp();
    let inv = chol.inverse();
    Ok((f, inv * (f / n as f64)))
}

/// Symmetric 2×2 (or 1×1, stored in `a`) matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub fn det(&self, n: usize) -> f64 {
        if n == 1 {
            self.a
        } else {
            self.a * self.c - self.b * self.b
        }
    }

    pub fn trace(&self, n: usize) -> f64 {
        if n == 1 {
            self.a
        } else {
            self.a + self.c
        }
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self, n: usize) -> (f64, f64) {
        if n == 1 {
            return (self.a, self.a);
        }
        let m = 0.5 * (self.a + self.c);
        let r = (0.25 * (self.a - self.c).powi(2) + self.b * self.b).sqrt();
        (m - r, m + r)
    }

    /// Spectral norm.
    pub fn norm(&self, n: usize) -> f64 {
        let (lo, hi) = self.eigenvalues(n);
        lo.abs().max(hi.abs())
    }

    pub fn is_positive_definite(&self, n: usize) -> bool {
        if n == 1 {
            self.a > 0.0
        } else {
            self.a > 0.0 && self.det(2) > 0.0
        }
    }
}

/// `F` and `DF` for the 1×1 and 2×2 matrices used by the grid solver.
pub fn f_small(h: &Sym2, n: usize) -> Option<(f64, Sym2)> {
    if !h.is_positive_definite(n) {
        return None;
    }
    if n == 1 {
        return Some((h.a, Sym2 { a: 1.0, b: 0.0, c: 0.0 }));
    }
    let det = h.det(2);
    let f = det.sqrt();
    let s = 0.5 * f / det;
    Some((f, Sym2 { a: s * h.c, b: -s * h.b, c: s * h.a }))
}

/// Gradient weight `G(ξ) ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GradientWeight {
    One,
    /// `G₀(ξ) = (1 + ‖ξ‖²)^{(n+2)/(2n)}`: turns the equation into a Gauss
    /// curvature prescription.
    #[default]
    G0,
}

impl GradientWeight {
    /// `(G(ξ), DG(ξ))` for `ξ ∈ ℝⁿ` (the second slot is unused when `n = 1`).
    pub fn eval(&self, xi: [f64; 2], n: usize) -> (f64, [f64; 2]) {
        match self {
            GradientWeight::One => (1.0, [0.0, 0.0]),
            GradientWeight::G0 => {
                let q = 1.0 + xi[0] * xi[0] + if n == 2 { xi[1] * xi[1] } else { 0.0 };
                let p = (n as f64 + 2.0) / (2.0 * n as f64);
                let g = q.powf(p);
                let dg = 2.0 * p * g / q;
                (g, [dg * xi[0], if n == 2 { dg * xi[1] } else { 0.0 }])
            }
        }
    }
}

/// Gauss curvature of a graph from its gradient and Hessian:
/// `det(D²f)/(1 + ‖Df‖²)^{(n+2)/2}`.
pub fn graph_curvature(grad: [f64; 2], hess: &Sym2, n: usize) -> f64 {
    let q = 1.0 + grad[0] * grad[0] + if n == 2 { grad[1] * grad[1] } else { 0.0 };
    hess.det(n) / q.powf((n as f64 + 2.0) / 2.0)
}

/// Curvature of the graph of a closed-form function at `x`, by central
/// differences with step `step`.
pub fn gaussian_curvature_of_graph(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Result<f64> {
    let n = x.len();
    if !(n == 1 || n == 2) {
        return Err(Error::domain("graph curvature is implemented for n = 1, 2"));
    }
    let at = |d: [f64; 2]| -> f64 {
        let p: Vec<f64> = (0..n).map(|a| x[a] + d[a] * step).collect();
        f(&p)
    };
    let f0 = at([0.0, 0.0]);
    let e = |a: usize| if a == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
    let mut grad = [0.0; 2];
    let mut hd = [0.0; 2];
    for a in 0..n {
        let ea = e(a);
        let fp = at(ea);
        let fm = at([-ea[0], -ea[1]]);
        grad[a] = (fp - fm) / (2.0 * step);
        hd[a] = (fp - 2.0 * f0 + fm) / (step * step);
    }
    let b = if n == 2 { (at([1.0, 1.0]) - at([1.0, -1.0]) - at([-1.0, 1.0]) + at([-1.0, -1.0])) / (4.0 * step * step) } else { 0.0 };
    let h = Sym2 { a: hd[0], b, c: hd[1] };
    let k = graph_curvature(grad, &h, n);
    if !k.is_finite() {
        return Err(Error::domain("curvature probe is not finite"));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let (f, df) = f_value_and_derivative(&DMatrix::identity(2, 2)).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        assert!((df - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let (f, df) = f_value_and_derivative(&a).unwrap();
        assert!((f - 2.0).abs() < 1e-14);
        assert!((df - DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn indefinite_is_outside_cone() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let e = f_value_and_derivative(&a).unwrap_err();
        assert!(e.to_string().contains("outside cone Γ"));
    }

    #[test]
    fn small_path_agrees_with_general() {
        let h = Sym2 { a: 3.0, b: 0.7, c: 1.5 };
        let (f, df) = f_small(&h, 2).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.7, 0.7, 1.5]);
        let (g, dg) = f_value_and_derivative(&m).unwrap();
        assert!((f - g).abs() < 1e-14);
        assert!((df.a - dg[(0, 0)]).abs() < 1e-14 && (df.b - dg[(0, 1)]).abs() < 1e-14 && (df.c - dg[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn paraboloid_and_affine_curvature() {
        let k = gaussian_curvature_of_graph(&|p| 0.5 * (p[0] * p[0] + p[1] * p[1]), &[0.0, 0.0], 1e-3).unwrap();
        assert!((k - 1.0).abs() < 1e-9);
        let k = gaussian_curvature_of_graph(&|p| 2.0 * p[0] - p[1] + 3.0, &[0.3, 0.1], 1e-3).unwrap();
        assert!(k.abs() < 1e-9);
    }

    #[test]
    fn g0_gradient_matches_difference() {
        let w = GradientWeight::G0;
        let xi = [0.3, -0.8];
        let (_, dg) = w.eval(xi, 2);
        let e = 1e-6;
        let fd = (w.eval([xi[0] + e, xi[1]], 2).0 - w.eval([xi[0] - e, xi[1]], 2).0) / (2.0 * e);
        assert!((fd - dg[0]).abs() < 1e-8);
    }
}
