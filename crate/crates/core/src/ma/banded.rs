//! Banded LU factorisation with partial pivoting for the Newton systems.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored by rows with
/// room for the fill-in that row pivoting creates (`kl + ku` above the diagonal).
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        // column j of row i lives at offset j + kl - i
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b` in place of a copy of the matrix.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut lu = self.clone();
        let mut x = b.to_vec();
        lu.factor_and_solve(&mut x)?;
        Ok(x)
    }

    fn factor_and_solve(&mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let upper = self.kl + self.ku;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 * scale || !best.is_finite() {
                return Err(Error::domain(format!("singular linear system at row {k}")));
            }
            let jmax = (k + upper).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, b);
                }
                rhs.swap(k, p);
            }
            let piv = self.get(k, k);
            for i in k + 1..=last {
                let s = self.slot(i, k);
                let m = self.data[s] / piv;
                if m == 0.0 {
                    continue;
                }
                self.data[s] = 0.0;
                for j in k + 1..=jmax {
                    let (ik, kj) = (self.slot(i, j), self.slot(k, j));
                    self.data[ik] -= m * self.data[kj];
                }
                rhs[i] -= m * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + upper).min(n - 1);
            let mut s = rhs[k];
            for j in k + 1..=jmax {
                s -= self.get(k, j) * rhs[j];
            }
            rhs[k] = s / self.get(k, k);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn random_band_system() {
        let mut rng = crate::geom::seeded_rng(3);
        let (n, kl, ku) = (40, 5, 3);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a.add(i, j, rng.random_range(-1.0..1.0));
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let y = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9, "{u} vs {v}");
        }
    }
}
