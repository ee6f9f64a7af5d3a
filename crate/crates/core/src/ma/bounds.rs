//! A-priori bound monitors, discrete Hölder seminorms and refinement studies.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{seeded_rng, Point};
use crate::ma::problem::GraphProblem;
use crate::ma::solver::{solve_dirichlet, GraphSolution, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `‖f − b‖∞` and `‖f̂ − b‖∞` over the nodes.
    pub sup_f: f64,
    pub sup_barrier: f64,
    /// Discrete `‖Df‖∞` and `‖Df̂‖∞` with the same stencils.
    pub sup_gradient: f64,
    pub sup_barrier_gradient: f64,
    /// `min (f − f̂)`; nonnegative when the barrier lies below.
    pub comparison: f64,
    /// Largest `u − b` over the nodes; nonpositive when the maximum sits on `∂Ω`.
    pub interior_max: f64,
    /// `sup |f − b|·‖D²f‖`.
    pub pogorelov: f64,
    pub c0_holds: bool,
    pub c1_holds: bool,
    pub max_on_boundary: bool,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.c0_holds && self.c1_holds && self.max_on_boundary && self.pogorelov.is_finite()
    }
}

/// Checks the zeroth and first order bounds against the barrier.
pub fn verify_bounds(sol: &GraphSolution, prob: &GraphProblem) -> Result<BoundsReport> {
    let grid = &sol.grid;
    if sol.values.len() != grid.len() {
        return Err(Error::domain("solution does not match its grid"));
    }
    let bv = prob.boundary_value;
    let n = sol.n;
    let gnorm = |g: [f64; 2]| (g[0] * g[0] + if n == 2 { g[1] * g[1] } else { 0.0 }).sqrt();
    let mut r = BoundsReport {
        sup_f: 0.0,
        sup_barrier: 0.0,
        sup_gradient: 0.0,
        sup_barrier_gradient: 0.0,
        comparison: f64::INFINITY,
        interior_max: f64::NEG_INFINITY,
        pogorelov: sol.diagnostics.pogorelov,
        c0_holds: false,
        c1_holds: false,
        max_on_boundary: false,
    };
    for k in 0..grid.len() {
        let (gf, _) = grid.derivatives(&sol.values, bv, k);
        let (gb, _) = grid.derivatives(&sol.barrier, bv, k);
        r.sup_f = r.sup_f.max((sol.values[k] - bv).abs());
        r.sup_barrier = r.sup_barrier.max((sol.barrier[k] - bv).abs());
        r.sup_gradient = r.sup_gradient.max(gnorm(gf));
        r.sup_barrier_gradient = r.sup_barrier_gradient.max(gnorm(gb));
        r.comparison = r.comparison.min(sol.values[k] - sol.barrier[k]);
        r.interior_max = r.interior_max.max(sol.values[k] - bv);
    }
    r.c0_holds = r.sup_f <= r.sup_barrier;
    r.c1_holds = r.sup_gradient <= r.sup_barrier_gradient;
    r.max_on_boundary = r.interior_max <= 0.0;
    Ok(r)
}

/// Largest Hölder quotient `|f(x) − f(y)| / |x − y|^α` over sampled pairs
/// (all pairs when there are at most `sample_pairs` of them).
pub fn holder_seminorm(points: &[Point], values: &[f64], alpha: f64, sample_pairs: usize, seed: u64) -> Result<f64> {
    if points.len() != values.len() {
        return Err(Error::domain("points and values differ in length"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("Hölder exponent must lie in (0, 1]"));
    }
    let m = points.len();
    if m < 2 {
        return Ok(0.0);
    }
    let quotient = |i: usize, j: usize| {
        let d = (points[i] - points[j]).norm();
        if d > 0.0 {
            (values[i] - values[j]).abs() / d.powf(alpha)
        } else {
            0.0
        }
    };
    let total = m * (m - 1) / 2;
    let mut best: f64 = 0.0;
    if total <= sample_pairs {
        for i in 0..m {
            for j in i + 1..m {
                best = best.max(quotient(i, j));
            }
        }
    } else {
        let mut rng = seeded_rng(seed);
        for _ in 0..sample_pairs {
            let i = rng.random_range(0..m);
            let j = rng.random_range(0..m);
            best = best.max(quotient(i, j));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub h: f64,
    pub nodes: usize,
    pub sup_error: f64,
    /// `log₂` error ratio against the previous row when `h` halves.
    pub observed_order: Option<f64>,
    pub pogorelov: f64,
    pub residual: f64,
}

/// Solves `prob` at each spacing and compares against `exact`.
pub fn convergence_study(prob: &GraphProblem, hs: &[f64], exact: &dyn Fn(&Point) -> f64, opts: &SolveOptions) -> Result<Vec<StudyRow>> {
    let mut rows: Vec<StudyRow> = Vec::with_capacity(hs.len());
    for &h in hs {
        let mut p = prob.clone();
        p.h = h;
        let sol = solve_dirichlet(&p, opts)?;
        let err = sol.sup_error(exact);
        let order = rows.last().map(|prev| (prev.sup_error / err).ln() / (prev.h / h).ln());
        rows.push(StudyRow {
            h,
            nodes: sol.grid.len(),
            sup_error: err,
            observed_order: order,
            pogorelov: sol.diagnostics.pogorelov,
            residual: sol.diagnostics.residual,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log error` against `log h`.
pub fn fitted_order(rows: &[StudyRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.ln(), r.sup_error.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `(max − min) / max` of the Pogorelov functional across a study.
pub fn pogorelov_variation(rows: &[StudyRow]) -> f64 {
    let hi = rows.iter().map(|r| r.pogorelov).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.pogorelov).fold(f64::INFINITY, f64::min);
    (hi - lo) / hi
}
