//! Finite-difference Dirichlet solver for `F(D²f)/G(Df) = φ` with
//! `F = det^{1/n}`, strictly convex solutions and homotopy continuation.

pub mod banded;
pub mod bounds;
pub mod domain;
pub mod grid;
pub mod operator;
pub mod problem;
pub mod solver;

pub use bounds::{convergence_study, fitted_order, holder_seminorm, pogorelov_variation, verify_bounds, BoundsReport, StudyRow};
pub use domain::Domain;
pub use grid::Grid;
pub use operator::{f_small, f_value_and_derivative, gaussian_curvature_of_graph, graph_curvature, GradientWeight, Sym2};
pub use problem::{BarrierSpec, GraphProblem, Phi, ProblemFile};
pub use solver::{solve_dirichlet, GraphSolution, LinearizedOperator, SolveOptions};

use crate::geom::Point;

/// Spherical cap of radius `r` through the round boundary of radius `a`
/// centred at the origin: `√(r² − a²) − √(r² − ‖x‖²)`.
pub fn sphere_cap(r: f64, a: f64) -> impl Fn(&Point) -> f64 {
    move |x: &Point| (r * r - a * a).sqrt() - (r * r - x.xy().norm_squared()).max(0.0).sqrt()
}

/// Circular arc of radius `r` over `[−a, a]`.
pub fn circle_arc(r: f64, a: f64) -> impl Fn(&Point) -> f64 {
    move |x: &Point| (r * r - a * a).sqrt() - (r * r - x.x * x.x).max(0.0).sqrt()
}

/// Closed-form solution over the grid nodes.
pub type ExactFn = Box<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Closed-form solution when one is known: constant `φ = c` with the Gauss
/// weight on a disk or symmetric interval centred at the origin is solved by
/// a sphere (circle) of radius `1/c`.
pub fn exact_solution(prob: &GraphProblem) -> Option<ExactFn> {
    let Phi::Constant(c) = prob.phi else { return None };
    if prob.weight != GradientWeight::G0 || !(c > 0.0) {
        return None;
    }
    let (r, b) = (1.0 / c, prob.boundary_value);
    match &prob.domain {
        Domain::Disk { center, radius } if center.norm() == 0.0 && *radius < r => {
            let f = sphere_cap(r, *radius);
            Some(Box::new(move |x| f(x) + b))
        }
        Domain::Interval { a, b: hi } if *a == -*hi && *hi < r => {
            let f = circle_arc(r, *hi);
            Some(Box::new(move |x| f(x) + b))
        }
        _ => None,
    }
}
