//! Regular scalar grids in two or three dimensions. Used for signed-distance
//! caches, mollified fields and solution export.

use serde::{Deserialize, Serialize};

use crate::geom::Point;

/// Scalar samples on the nodes `origin + spacing·(i, j, k)`.
///
/// Storage is row-major: the flat index of node `(i, j, k)` is
/// `(i·ny + j)·nz + k`, with `nz = 1` in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub dim: usize,
    pub origin: Point,
    pub spacing: f64,
    pub shape: [usize; 3],
    pub values: Vec<f64>,
}

/// JSON header accompanying a flat binary `f64` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl ScalarGrid {
    /// Grid covering the box `[lo, hi]` with the given spacing, filled with `fill`.
    pub fn covering(dim: usize, lo: Point, hi: Point, spacing: f64, fill: f64) -> Self {
        let mut shape = [1usize; 3];
        for (a, s) in shape.iter_mut().enumerate().take(dim) {
            *s = (((hi[a] - lo[a]) / spacing).ceil() as usize + 1).max(2);
        }
        let n = shape.iter().product();
        ScalarGrid { dim, origin: lo, spacing, shape, values: vec![fill; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.shape[2];
        let j = (idx / self.shape[2]) % self.shape[1];
        let i = idx / (self.shape[1] * self.shape[2]);
        [i, j, k]
    }

    pub fn node(&self, idx: usize) -> Point {
        let [i, j, k] = self.ijk(idx);
        let mut p = self.origin;
        p.x += i as f64 * self.spacing;
        p.y += j as f64 * self.spacing;
        if self.dim == 3 {
            p.z += k as f64 * self.spacing;
        }
        p
    }

    /// Multilinear interpolation; `None` outside the grid or next to an unset
    /// (`NaN`) node.
    pub fn interpolate(&self, x: &Point) -> Option<f64> {
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..self.dim {
            let u = (x[a] - self.origin[a]) / self.spacing;
            if u < 0.0 || u > (self.shape[a] - 1) as f64 {
                return None;
            }
            let b = (u.floor() as usize).min(self.shape[a] - 2);
            base[a] = b;
            frac[a] = u - b as f64;
        }
        let corners = if self.dim == 3 { 8 } else { 4 };
        let mut acc = 0.0;
        for c in 0..corners {
            let off = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let mut w = 1.0;
            for a in 0..self.dim {
                w *= if off[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            let k = if self.dim == 3 { base[2] + off[2] } else { 0 };
            let v = self.values[self.index(base[0] + off[0], base[1] + off[1], k)];
            if w > 0.0 {
                if v.is_nan() {
                    return None;
                }
                acc += w * v;
            }
        }
        Some(acc)
    }

    pub fn header(&self) -> GridHeader {
        GridHeader { origin: self.origin.as_slice()[..self.dim].to_vec(), spacing: self.spacing, shape: self.shape[..self.dim].to_vec() }
    }

    /// Little-endian `f64` payload in storage order.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn from_parts(header: &GridHeader, bytes: &[u8]) -> crate::Result<Self> {
        let dim = header.shape.len();
        if !(dim == 2 || dim == 3) || header.origin.len() != dim {
            return Err(crate::Error::Parse("grid header must be 2- or 3-dimensional".into()));
        }
        let mut shape = [1usize; 3];
        shape[..dim].copy_from_slice(&header.shape);
        let n: usize = shape.iter().product();
        if bytes.len() != 8 * n {
            return Err(crate::Error::Parse(format!("grid payload has {} bytes, header implies {}", bytes.len(), 8 * n)));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let origin = crate::geom::from_slice(&header.origin).unwrap();
        Ok(ScalarGrid { dim, origin, spacing: header.spacing, shape, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::p2;

    #[test]
    fn bilinear_is_exact_on_affine() {
        let mut g = ScalarGrid::covering(2, p2(-1.0, -1.0), p2(1.0, 1.0), 0.25, 0.0);
        for i in 0..g.len() {
            let x = g.node(i);
            g.values[i] = 2.0 * x.x - 3.0 * x.y + 1.0;
        }
        let v = g.interpolate(&p2(0.13, -0.71)).unwrap();
        assert!((v - (2.0 * 0.13 + 3.0 * 0.71 + 1.0)).abs() < 1e-12);
        assert!(g.interpolate(&p2(2.0, 0.0)).is_none());
    }

    #[test]
    fn bytes_round_trip() {
        let mut g = ScalarGrid::covering(2, p2(0.0, 0.0), p2(1.0, 0.5), 0.5, 1.5);
        g.values[1] = -2.0;
        let back = ScalarGrid::from_parts(&g.header(), &g.to_bytes()).unwrap();
        assert_eq!(back, g);
    }
}
