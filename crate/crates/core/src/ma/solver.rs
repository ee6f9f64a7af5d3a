//! Newton continuation for the discrete Dirichlet problem.
//!
//! The path follows `G_t = tG + (1 − t)` and
//! `φ_t = max((1 − t/δ₀)φ₀, (1 − (1 − t)/δ₁)φ, ε)` from `f₀ = αf̂`, where
//! `φ₀ = F(D²(αf̂))`, so that `t = 0` is solved exactly by the scaled barrier
//! and `t = 1` is the target problem.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ma::banded::BandMatrix;
use crate::ma::grid::Grid;
use crate::ma::operator::{f_small, graph_curvature, GradientWeight, Sym2};
use crate::ma::problem::{Discrete, GraphProblem};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Residual tolerance at `t = 1`; defaults to the problem's.
    pub tol: Option<f64>,
    /// Residual tolerance on the intermediate path, relative to `max φ`.
    pub path_tol: f64,
    pub max_newton: usize,
    pub damping_floor: f64,
    /// Barrier shrink factor `α ∈ (0, 1)`.
    pub alpha: f64,
    /// Initial and largest continuation step.
    pub t_step: f64,
    pub max_t_step: f64,
    pub min_t_step: f64,
    /// Sharpness of the soft maximum defining `φ_t`, relative to `max φ`.
    pub sharpness: f64,
    /// Eigenvalue floor applied when assembling the linearisation only.
    pub lambda_min: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: None,
            path_tol: 1e-4,
            max_newton: 25,
            damping_floor: 2f64.powi(-20),
            alpha: 0.5,
            t_step: 1.0 / 16.0,
            max_t_step: 0.25,
            min_t_step: 2f64.powi(-12),
            sharpness: 1e3,
            lambda_min: 1e-10,
        }
    }
}

/// Constants of the interpolated right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConstants {
    pub delta0: f64,
    pub delta1: f64,
    pub epsilon: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StepLog {
    pub t: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub min_damping: f64,
}

/// Sup-norm quantities of a solution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub sup_f: f64,
    pub sup_gradient: f64,
    pub sup_hessian: f64,
    /// `sup |f − b|·‖D²f‖`.
    pub pogorelov: f64,
    pub residual: f64,
    pub min_eigenvalue: f64,
    /// `min (f − f̂)` over the nodes.
    pub comparison: f64,
    /// The discrete Hessian is symmetric by construction.
    pub asymmetry: f64,
}

#[derive(Debug, Clone)]
pub struct GraphSolution {
    pub n: usize,
    pub grid: Arc<Grid>,
    pub boundary_value: f64,
    pub values: Vec<f64>,
    pub barrier: Vec<f64>,
    pub phi: Vec<f64>,
    pub weight: GradientWeight,
    pub gradient: Vec<[f64; 2]>,
    pub hessian: Vec<Sym2>,
    pub residual: Vec<f64>,
    pub curvature: Vec<f64>,
    pub lambda_max: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub tol: f64,
    pub barrier_margin: f64,
    pub path: PathConstants,
    pub steps: Vec<StepLog>,
}

/// The linearised operator `ℒ_f g = DF(D²f):D²g − φ·DG_t(Df)·Dg`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub n: usize,
    /// `Bⁱʲ = (1/n)F(D²f)(D²f)⁻¹` at every node.
    pub b: Vec<Sym2>,
    /// First-order coefficients `−φ·DG_t(Df)`.
    pub first: Vec<[f64; 2]>,
    /// `Λ = tr Bⁱʲ`.
    pub lambda: Vec<f64>,
    pub matrix: BandMatrix,
    grid: Arc<Grid>,
}

impl LinearizedOperator {
    /// `ℒ_f g` for `g` vanishing on `∂Ω`.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.grid.len())
            .map(|k| {
                let (dg, hg) = self.grid.derivatives(g, 0.0, k);
                let b = &self.b[k];
                let mut v = b.a * hg.a + if self.n == 2 { 2.0 * b.b * hg.b + b.c * hg.c } else { 0.0 };
                v += self.first[k][0] * dg[0] + if self.n == 2 { self.first[k][1] * dg[1] } else { 0.0 };
                v
            })
            .collect()
    }

    /// Smallest eigenvalue of `Bⁱʲ` over the nodes.
    pub fn min_ellipticity(&self) -> f64 {
        self.b.iter().map(|b| b.eigenvalues(self.n).0).fold(f64::INFINITY, f64::min)
    }
}

/// State of the path at parameter `t`.
struct Stage<'a> {
    n: usize,
    grid: &'a Grid,
    weight: GradientWeight,
    bv: f64,
    t: f64,
    phi_t: Vec<f64>,
}

fn soft_max(vals: [f64; 3], beta: f64) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + vals.iter().map(|v| (beta * (v - m)).exp()).sum::<f64>().ln() / beta
}

impl Stage<'_> {
    fn g_t(&self, xi: [f64; 2]) -> (f64, [f64; 2]) {
        let (g, dg) = self.weight.eval(xi, self.n);
        (self.t * g + (1.0 - self.t), [self.t * dg[0], self.t * dg[1]])
    }

    /// Residual `F(D²u) − φ_t G_t(Du)`, or the number of nodes outside `Γ`.
    fn residual(&self, u: &[f64]) -> std::result::Result<Vec<f64>, usize> {
        let mut out = Vec::with_capacity(u.len());
        let mut bad = 0;
        for k in 0..self.grid.len() {
            let (g, h) = self.grid.derivatives(u, self.bv, k);
            match f_small(&h, self.n) {
                Some((f, _)) => out.push(f - self.phi_t[k] * self.g_t(g).0),
                None => {
                    bad += 1;
                    out.push(f64::NAN);
                }
            }
        }
        if bad > 0 {
            Err(bad)
        } else {
            Ok(out)
        }
    }

    fn linearize(&self, u: &[f64], grid: &Arc<Grid>, lambda_min: f64) -> Result<LinearizedOperator> {
        let n = self.n;
        let len = grid.len();
        let mut b = Vec::with_capacity(len);
        let mut first = Vec::with_capacity(len);
        let mut lambda = Vec::with_capacity(len);
        let mut matrix = BandMatrix::zeros(len, grid.kl, grid.ku);
        let mut outside = 0;
        for k in 0..len {
            let (g, mut h) = grid.derivatives(u, self.bv, k);
            if !h.is_positive_definite(n) {
                outside += 1;
                continue;
            }
            let (lo, _) = h.eigenvalues(n);
            if lo < lambda_min {
                h.a += lambda_min - lo;
                h.c += lambda_min - lo;
            }
            let (_, df) = f_small(&h, n).expect("positive definite");
            let (_, dg) = self.g_t(g);
            let fc = [-self.phi_t[k] * dg[0], -self.phi_t[k] * dg[1]];
            for e in &grid.stencils[k] {
                if let Some(m) = e.node {
                    let mut v = df.a * e.c[0] + fc[0] * e.c[3];
                    if n == 2 {
                        v += 2.0 * df.b * e.c[1] + df.c * e.c[2] + fc[1] * e.c[4];
                    }
                    matrix.add(k, m, v);
                }
            }
            lambda.push(df.trace(n));
            b.push(df);
            first.push(fc);
        }
        if outside > 0 {
            return Err(Error::LeftCone { nodes: outside });
        }
        Ok(LinearizedOperator { n, b, first, lambda, matrix, grid: grid.clone() })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Path constants from the barrier: `δ₀`, `δ₁` keep `f̂` a strict
/// subsolution of every intermediate problem and `ε` bounds `φ_t` below.
fn path_constants(d: &Discrete, prob: &GraphProblem, phi0: &[f64], sharpness: f64) -> PathConstants {
    let n = prob.n();
    let grid = &d.grid;
    let bv = prob.boundary_value;
    let samples = 64;
    let (mut d0, mut d1, mut eps) = (1.0f64, 1.0f64, f64::INFINITY);
    for k in 0..grid.len() {
        let (g, h) = grid.derivatives(&d.barrier, bv, k);
        let f = f_small(&h, n).map(|(f, _)| f).unwrap_or(0.0);
        let gw = prob.weight.eval(g, n).0;
        for s in 0..=samples {
            let t = s as f64 / samples as f64;
            let r = f / (t * gw + 1.0 - t);
            if r < phi0[k] && t > 0.0 {
                d0 = d0.min(t / (1.0 - r / phi0[k]));
            }
            if r < d.phi[k] && t < 1.0 {
                d1 = d1.min((1.0 - t) / (1.0 - r / d.phi[k]));
            }
            eps = eps.min(r);
        }
        eps = eps.min(d.phi[k]).min(phi0[k]);
    }
    let phi_ref = d.phi.iter().chain(phi0).fold(0.0f64, |m, v| m.max(*v));
    PathConstants { delta0: 0.9 * d0, delta1: 0.9 * d1, epsilon: 0.5 * eps, beta: sharpness / phi_ref }
}

fn phi_at(t: f64, pc: &PathConstants, phi0: &[f64], phi: &[f64]) -> Vec<f64> {
    phi0.iter()
        .zip(phi)
        .map(|(a, b)| soft_max([(1.0 - t / pc.delta0) * a, (1.0 - (1.0 - t) / pc.delta1) * b, pc.epsilon], pc.beta))
        .collect()
}

/// Damped Newton iteration at a fixed `t`. Returns the iteration count and
/// the smallest damping factor used.
fn newton(stage: &Stage, grid: &Arc<Grid>, u: &mut Vec<f64>, tol: f64, opts: &SolveOptions) -> Result<(usize, f64, f64)> {
    let mut r = stage.residual(u).map_err(|nodes| Error::LeftCone { nodes })?;
    let mut norm = sup(&r);
    let mut min_damp: f64 = 1.0;
    for it in 0..opts.max_newton {
        if norm <= tol {
            return Ok((it, norm, min_damp));
        }
        let lin = stage.linearize(u, grid, opts.lambda_min)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let du = lin.matrix.solve(&rhs)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + lambda * b).collect();
            if let Ok(rt) = stage.residual(&trial) {
                let nt = sup(&rt);
                if nt < norm * (1.0 - 1e-4 * lambda) || (nt <= tol) {
                    *u = trial;
                    r = rt;
                    norm = nt;
                    break;
                }
            }
            lambda *= 0.5;
            min_damp = min_damp.min(lambda);
            if lambda < opts.damping_floor {
                return Err(Error::ContinuationStalled {
                    t: stage.t,
                    diagnostics: format!("damping floor reached at Newton iteration {it}, residual {norm:.3e}"),
                });
            }
        }
    }
    if norm <= tol {
        Ok((opts.max_newton, norm, min_damp))
    } else {
        Err(Error::ContinuationStalled {
            t: stage.t,
            diagnostics: format!("no convergence in {} Newton steps, residual {norm:.3e}", opts.max_newton),
        })
    }
}

/// Solves the Dirichlet problem by continuation from the scaled barrier.
pub fn solve_dirichlet(prob: &GraphProblem, opts: &SolveOptions) -> Result<GraphSolution> {
    let d = prob.discretize()?;
    solve_discrete(prob, &d, opts)
}

pub fn solve_discrete(prob: &GraphProblem, d: &Discrete, opts: &SolveOptions) -> Result<GraphSolution> {
    if !(d.margin > 0.0) {
        return Err(Error::NoAdmissibleBarrier { margin: d.margin });
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::domain("α must lie in (0, 1)"));
    }
    let n = prob.n();
    let grid = d.grid.clone();
    let bv = prob.boundary_value;
    let tol = opts.tol.unwrap_or(prob.tol);

    let mut u: Vec<f64> = d.barrier.iter().map(|v| bv + opts.alpha * (v - bv)).collect();
    let mut phi0 = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (_, h) = grid.derivatives(&u, bv, k);
        phi0.push(f_small(&h, n).map(|(f, _)| f).ok_or(Error::LeftCone { nodes: 1 })?);
    }
    let pc = path_constants(d, prob, &phi0, opts.sharpness);
    let phi_ref = d.phi.iter().fold(0.0f64, |m, v| m.max(*v));
    let path_tol = (opts.path_tol * phi_ref).max(tol);

    let mut steps = Vec::new();
    let mut t = 0.0;
    let mut dt = opts.t_step;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let stage = Stage { n, grid: &grid, weight: prob.weight, bv, t: t_next, phi_t: phi_at(t_next, &pc, &phi0, &d.phi) };
        let target = if t_next >= 1.0 { tol } else { path_tol };
        let mut trial = u.clone();
        match newton(&stage, &grid, &mut trial, target, opts) {
            Ok((its, res, damp)) => {
                u = trial;
                t = t_next;
                steps.push(StepLog { t, newton_iterations: its, residual: res, min_damping: damp });
                dt = (dt * 2.0).min(opts.max_t_step);
            }
            Err(e) => {
                dt *= 0.5;
                if dt < opts.min_t_step {
                    return Err(match e {
                        Error::ContinuationStalled { .. } => e,
                        other => Error::ContinuationStalled { t: t_next, diagnostics: other.to_string() },
                    });
                }
            }
        }
    }
    // tighten at t = 1 in case the last step met the tolerance early
    let stage = Stage { n, grid: &grid, weight: prob.weight, bv, t: 1.0, phi_t: d.phi.clone() };
    newton(&stage, &grid, &mut u, tol, opts)?;
    Ok(build_solution(prob, d, u, tol, pc, steps))
}

fn build_solution(prob: &GraphProblem, d: &Discrete, u: Vec<f64>, tol: f64, pc: PathConstants, steps: Vec<StepLog>) -> GraphSolution {
    let n = prob.n();
    let grid = d.grid.clone();
    let bv = prob.boundary_value;
    let len = grid.len();
    let (mut gradient, mut hessian, mut residual, mut curvature, mut lambda_max) =
        (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    let mut diag = Diagnostics {
        sup_f: 0.0,
        sup_gradient: 0.0,
        sup_hessian: 0.0,
        pogorelov: 0.0,
        residual: 0.0,
        min_eigenvalue: f64::INFINITY,
        comparison: f64::INFINITY,
        asymmetry: 0.0,
    };
    for k in 0..len {
        let (g, h) = grid.derivatives(&u, bv, k);
        let f = f_small(&h, n).map(|(f, _)| f).unwrap_or(f64::NAN);
        let res = f - d.phi[k] * prob.weight.eval(g, n).0;
        let (lo, hi) = h.eigenvalues(n);
        let gn = (g[0] * g[0] + if n == 2 { g[1] * g[1] } else { 0.0 }).sqrt();
        diag.sup_f = diag.sup_f.max((u[k] - bv).abs());
        diag.sup_gradient = diag.sup_gradient.max(gn);
        diag.sup_hessian = diag.sup_hessian.max(h.norm(n));
        diag.pogorelov = diag.pogorelov.max((u[k] - bv).abs() * h.norm(n));
        diag.residual = diag.residual.max(res.abs());
        diag.min_eigenvalue = diag.min_eigenvalue.min(lo);
        diag.comparison = diag.comparison.min(u[k] - d.barrier[k]);
        gradient.push(g);
        hessian.push(h);
        residual.push(res);
        curvature.push(graph_curvature(g, &h, n));
        lambda_max.push(hi);
    }
    GraphSolution {
        n,
        grid,
        boundary_value: bv,
        values: u,
        barrier: d.barrier.clone(),
        phi: d.phi.clone(),
        weight: prob.weight,
        gradient,
        hessian,
        residual,
        curvature,
        lambda_max,
        diagnostics: diag,
        tol,
        barrier_margin: d.margin,
        path: pc,
        steps,
    }
}

impl GraphSolution {
    /// Linearisation of the target problem (`t = 1`) at this solution.
    pub fn linearization(&self) -> Result<LinearizedOperator> {
        let stage = Stage { n: self.n, grid: &self.grid, weight: self.weight, bv: self.boundary_value, t: 1.0, phi_t: self.phi.clone() };
        stage.linearize(&self.values, &self.grid, 0.0)
    }

    /// Full residual `F(D²u) − φG(Du)` of an arbitrary grid function.
    pub fn residual_of(&self, u: &[f64]) -> Result<Vec<f64>> {
        let stage = Stage { n: self.n, grid: &self.grid, weight: self.weight, bv: self.boundary_value, t: 1.0, phi_t: self.phi.clone() };
        stage.residual(u).map_err(|nodes| Error::LeftCone { nodes })
    }

    /// Gauss curvature of the graph at interior node `k`.
    pub fn curvature_at(&self, k: usize) -> Result<f64> {
        self.curvature.get(k).copied().ok_or_else(|| Error::domain("not an interior node"))
    }

    /// Sup-norm difference to a reference function at the nodes.
    pub fn sup_error(&self, exact: &dyn Fn(&crate::Point) -> f64) -> f64 {
        self.grid.nodes.iter().zip(&self.values).map(|(x, v)| (v - exact(x)).abs()).fold(0.0, f64::max)
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.hessian.iter().all(|h| h.is_positive_definite(self.n))
    }
}
