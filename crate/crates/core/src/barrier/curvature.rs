//! Shape operators of level sets and the convex set of admissible
//! curvature matrices.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::field::ScalarGrid;
use crate::geom::{frame_with_axis, Point};

/// Unit normal `Df/|Df|` and principal curvatures of a level set.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelShape {
    pub normal: Point,
    /// Eigenvalues of `D²f/|Df|` restricted to the tangent space, ascending.
    pub principal: Vec<f64>,
}

impl LevelShape {
    pub fn gauss_curvature(&self) -> f64 {
        self.principal.iter().product()
    }
}

/// Shape of the level set through a point with gradient `grad` and Hessian `hess`.
pub fn shape_from_derivatives(dim: usize, grad: &Point, hess: &Matrix3<f64>) -> Result<LevelShape> {
    let g = grad.norm();
    if !(g > 1e-8) {
        return Err(Error::CriticalPoint { gradient_norm: g });
    }
    let normal = grad / g;
    let frame = frame_with_axis(&normal, dim);
    let t = |a: usize| -> Point { frame.column(a).into() };
    let principal = if dim == 2 {
        vec![t(0).dot(&(hess * t(0))) / g]
    } else {
        let (a, b) = (t(0), t(1));
        let m = Matrix2::new(a.dot(&(hess * a)), a.dot(&(hess * b)), b.dot(&(hess * a)), b.dot(&(hess * b))) / g;
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    };
    Ok(LevelShape { normal, principal })
}

/// Central-difference gradient and Hessian of the interpolated field.
pub fn grid_derivatives(field: &ScalarGrid, x: &Point) -> Option<(f64, Point, Matrix3<f64>)> {
    let h = field.spacing;
    let d = field.dim;
    let f = |p: Point| field.interpolate(&p);
    let e = |a: usize| {
        let mut v = Point::zeros();
        v[a] = h;
        v
    };
    let f0 = f(*x)?;
    let mut grad = Point::zeros();
    let mut hess = Matrix3::zeros();
    for a in 0..d {
        let (fp, fm) = (f(x + e(a))?, f(x - e(a))?);
        grad[a] = (fp - fm) / (2.0 * h);
        hess[(a, a)] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in 0..a {
            let v = (f(x + e(a) + e(b))? - f(x + e(a) - e(b))? - f(x - e(a) + e(b))? + f(x - e(a) - e(b))?) / (4.0 * h * h);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    Some((f0, grad, hess))
}

/// Shape of `{field = r}` near `x`. The point is first moved onto the level
/// set by Newton steps along the gradient.
pub fn level_set_curvature(field: &ScalarGrid, r: f64, x: &Point) -> Result<(Point, LevelShape)> {
    let outside = || Error::domain("point too close to the edge of the field");
    let mut p = *x;
    for _ in 0..8 {
        let (v, g, _) = grid_derivatives(field, &p).ok_or_else(outside)?;
        let gn2 = g.norm_squared();
        if !(gn2.sqrt() > 1e-8) {
            return Err(Error::CriticalPoint { gradient_norm: gn2.sqrt() });
        }
        let step = (v - r) / gn2;
        p -= g * step;
        if (g * step).norm() < 1e-14 * (1.0 + p.norm()) {
            break;
        }
    }
    let (_, g, h) = grid_derivatives(field, &p).ok_or_else(outside)?;
    Ok((p, shape_from_derivatives(field.dim, &g, &h)?))
}

/// `κ(k, B, N) = {A : ‖A‖ ≤ B, A ⪰ 0, det(A|N⊥) ≥ kⁿ}` in `ℝ^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMatrixSet {
    pub dim: usize,
    pub k: f64,
    pub bound: f64,
    pub direction: Point,
}

impl CurvatureMatrixSet {
    pub fn new(dim: usize, k: f64, bound: f64, direction: Point) -> Result<Self> {
        if !(dim == 2 || dim == 3) || !(k >= 0.0) || !(bound > 0.0) || direction.norm() < 1e-12 {
            return Err(Error::domain("invalid curvature matrix set"));
        }
        Ok(CurvatureMatrixSet { dim, k, bound, direction: direction.normalize() })
    }

    fn sub(&self, a: &Matrix3<f64>) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        m.view_mut((0, 0), (self.dim, self.dim)).copy_from(&a.view((0, 0), (self.dim, self.dim)));
        m
    }

    /// `det(A)` restricted to the orthogonal complement of the direction.
    pub fn restricted_det(&self, a: &Matrix3<f64>) -> f64 {
        let frame = frame_with_axis(&self.direction, self.dim);
        let t = |i: usize| -> Point { frame.column(i).into() };
        let a = self.sub(a);
        if self.dim == 2 {
            t(0).dot(&(a * t(0)))
        } else {
            let (u, v) = (t(0), t(1));
            u.dot(&(a * u)) * v.dot(&(a * v)) - u.dot(&(a * v)) * v.dot(&(a * u))
        }
    }

    pub fn contains(&self, a: &Matrix3<f64>, tol: f64) -> bool {
        let d = self.dim;
        let sym = (self.sub(a) + self.sub(a).transpose()) * 0.5;
        let block = DMatrix::from_fn(d, d, |i, j| sym[(i, j)]);
        let eig = SymmetricEigen::new(block).eigenvalues;
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let norm = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        norm <= self.bound + tol && min >= -tol && self.restricted_det(&sym) >= self.k.powi(d as i32 - 1) - tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{p2, p3};

    fn radial_field(f: impl Fn(f64) -> f64) -> ScalarGrid {
        let mut g = ScalarGrid::covering(2, p2(-2.0, -2.0), p2(2.0, 2.0), 0.01, 0.0);
        for i in 0..g.len() {
            g.values[i] = f(g.node(i).xy().norm());
        }
        g
    }

    #[test]
    fn unit_circle_has_unit_curvature_for_both_fields() {
        let d = radial_field(|r| r);
        let d2 = radial_field(|r| r * r);
        for (field, level) in [(&d, 1.0), (&d2, 1.0)] {
            let (p, s) = level_set_curvature(field, level, &p2(0.6, 0.81)).unwrap();
            assert!((p.xy().norm() - 1.0).abs() < 1e-4);
            assert!((s.principal[0] - 1.0).abs() < 1e-3, "{:?}", s.principal);
        }
    }

    #[test]
    fn affine_level_sets_are_flat() {
        let g = 2.0 * p3(0.3, -0.4, 0.5);
        let s = shape_from_derivatives(3, &g, &Matrix3::zeros()).unwrap();
        assert!(s.principal.iter().all(|v| v.abs() < 1e-15));
        assert!((s.normal - g.normalize()).norm() < 1e-15);
        assert!(matches!(shape_from_derivatives(3, &Point::zeros(), &Matrix3::identity()), Err(Error::CriticalPoint { .. })));
    }

    #[test]
    fn curvature_set_membership() {
        let set = CurvatureMatrixSet::new(3, 1.0, 5.0, p3(0.0, 0.0, 1.0)).unwrap();
        assert!(set.contains(&Matrix3::from_diagonal(&p3(1.0, 1.0, 0.0)), 1e-12));
        assert!(!set.contains(&Matrix3::from_diagonal(&p3(0.5, 1.0, 0.0)), 1e-12));
        assert!(!set.contains(&Matrix3::from_diagonal(&p3(6.0, 1.0, 0.0)), 1e-12));
        assert!(!set.contains(&Matrix3::from_diagonal(&p3(2.0, 2.0, -0.1)), 1e-12));
    }
}
