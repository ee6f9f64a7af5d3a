//! Radial bump mollifiers and discrete convolution on grids.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarGrid;
use crate::geom::Point;

/// `χ_s(y) = s^{-d} χ(y/s)` with `χ = c·exp(−1/(1 − |y|²))` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub dim: usize,
    pub scale: f64,
    norm: f64,
}

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// `∫_{B₁} exp(−1/(1 − |y|²)) dy` by composite Simpson in the radius.
fn bump_integral(dim: usize) -> f64 {
    let m = 4000;
    let dr = 1.0 / m as f64;
    let g = |r: f64| bump(r * r) * r.powi(dim as i32 - 1);
    let mut s = g(0.0) + g(1.0);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * dr);
    }
    let sphere = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
    sphere * s * dr / 3.0
}

impl Mollifier {
    pub fn new(dim: usize, scale: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::domain(format!("mollifier dimension must be 2 or 3, got {dim}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("mollifier scale must be positive"));
        }
        Ok(Mollifier { dim, scale, norm: 1.0 / bump_integral(dim) })
    }

    /// Unit-scale profile `χ` at radius `r`.
    pub fn profile(&self, r: f64) -> f64 {
        self.norm * bump(r * r)
    }

    /// `χ_s(y)`.
    pub fn kernel(&self, y: &Point) -> f64 {
        let s = self.scale;
        let r2 = (if self.dim == 2 { y.xy().norm_squared() } else { y.norm_squared() }) / (s * s);
        self.norm * bump(r2) / s.powi(self.dim as i32)
    }

    /// Normalised quadrature weights on the lattice of spacing `h`.
    pub fn weights(&self, h: f64) -> Result<Vec<([i64; 3], f64)>> {
        if self.scale < 2.0 * h {
            return Err(Error::KernelUnderResolved { scale: self.scale, spacing: h });
        }
        let m = (self.scale / h).ceil() as i64;
        let kz = if self.dim == 3 { m } else { 0 };
        let mut w = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                for l in -kz..=kz {
                    let v = self.kernel(&Point::new(i as f64 * h, j as f64 * h, l as f64 * h));
                    if v > 0.0 {
                        w.push(([i, j, l], v));
                    }
                }
            }
        }
        let total: f64 = w.iter().map(|(_, v)| v).sum();
        w.iter_mut().for_each(|(_, v)| *v /= total);
        Ok(w)
    }
}

/// `f_s = f ∗ χ_s` with normalised weights; near the grid edge the weights
/// are renormalised over the nodes that exist.
pub fn mollify(field: &ScalarGrid, m: &Mollifier) -> Result<ScalarGrid> {
    if field.dim != m.dim {
        return Err(Error::domain("mollifier and field dimensions differ"));
    }
    let w = m.weights(field.spacing)?;
    let shape = field.shape;
    let values: Vec<f64> = (0..field.len())
        .into_par_iter()
        .map(|idx| {
            let c = field.ijk(idx);
            let (mut acc, mut tot) = (0.0, 0.0);
            for (o, v) in &w {
                let p = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
                if (0..3).all(|a| p[a] >= 0 && p[a] < shape[a] as i64) {
                    acc += v * field.values[field.index(p[0] as usize, p[1] as usize, p[2] as usize)];
                    tot += v;
                }
            }
            acc / tot
        })
        .collect();
    Ok(ScalarGrid { values, ..field.clone() })
}

/// `f_s(x)` for a function by the same lattice quadrature centred at `x`.
pub fn mollify_at(f: &dyn Fn(&Point) -> f64, x: &Point, m: &Mollifier, h: f64) -> Result<f64> {
    let w = m.weights(h)?;
    Ok(w.iter().map(|(o, v)| v * f(&(x - Point::new(o[0] as f64 * h, o[1] as f64 * h, o[2] as f64 * h)))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::p2;

    #[test]
    fn kernel_has_unit_mass() {
        for dim in [2, 3] {
            let m = Mollifier::new(dim, 0.3).unwrap();
            let h = if dim == 2 { 0.3 / 400.0 } else { 0.3 / 60.0 };
            let w = m.weights(h).unwrap();
            let raw: f64 = w.iter().map(|(o, _)| m.kernel(&Point::new(o[0] as f64 * h, o[1] as f64 * h, o[2] as f64 * h))).sum::<f64>()
                * h.powi(dim as i32);
            assert!((raw - 1.0).abs() < 1e-6, "dim {dim}: {raw}");
            assert_eq!(m.kernel(&p2(0.31, 0.0)), 0.0);
        }
    }

    #[test]
    fn under_resolved_kernel_is_rejected() {
        let m = Mollifier::new(2, 0.1).unwrap();
        assert!(matches!(m.weights(0.06), Err(Error::KernelUnderResolved { .. })));
    }
}
