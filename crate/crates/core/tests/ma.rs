use std::path::Path;

use plateau::geom::{p2, Point};
use plateau::ma::{
    gaussian_curvature_of_graph, graph_curvature, solve_dirichlet, BarrierSpec, Domain, GradientWeight, GraphProblem, Phi, ProblemFile,
    SolveOptions, Sym2,
};
use proptest::prelude::*;

#[test]
fn unit_weight_on_the_disk_is_a_paraboloid() {
    // det(D²f)^{1/2} = c with zero boundary data: f = c(‖x‖² − 1)/2
    let c = 0.5;
    let prob = GraphProblem::new(Domain::disk(Point::zeros(), 1.0).unwrap(), 1.0 / 16.0, Phi::Constant(c)).with_weight(GradientWeight::One);
    let sol = solve_dirichlet(&prob, &SolveOptions::default()).unwrap();
    let err = sol.sup_error(&|x: &Point| 0.5 * c * (x.x * x.x + x.y * x.y - 1.0));
    // quadratics are reproduced exactly by the stencils, up to the shortened arms at the rim
    assert!(err < 1e-8, "{err}");
    assert!(sol.is_strictly_convex());
}

#[test]
fn unit_weight_on_an_interval_is_a_parabola() {
    let c = 2.0;
    let prob = GraphProblem::new(Domain::interval(-0.5, 1.5).unwrap(), 1.0 / 32.0, Phi::Constant(c)).with_weight(GradientWeight::One);
    let sol = solve_dirichlet(&prob, &SolveOptions::default()).unwrap();
    let err = sol.sup_error(&|x: &Point| 0.5 * c * (x.x + 0.5) * (x.x - 1.5));
    assert!(err < 1e-9, "{err}");
}

#[test]
fn off_centre_disk_keeps_the_spherical_cap() {
    let centre = p2(0.3, -0.2);
    let prob = GraphProblem::new(Domain::disk(centre, 0.8).unwrap(), 1.0 / 32.0, Phi::sphere(1.0));
    let sol = solve_dirichlet(&prob, &SolveOptions::default()).unwrap();
    let top = (1.0f64 - 0.64).sqrt();
    let err = sol.sup_error(&|x: &Point| top - (1.0 - (x - centre).xy().norm_squared()).sqrt());
    assert!(err < 2e-3, "{err}");
    let k = sol.curvature.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    assert!(k < 0.05, "curvature deviation {k}");
}

#[test]
fn explicit_barrier_that_is_too_flat_is_rejected() {
    let flat = BarrierSpec::Function(std::sync::Arc::new(|x: &Point| 0.01 * (x.x * x.x + x.y * x.y - 1.0)));
    let prob = GraphProblem::new(Domain::disk(Point::zeros(), 1.0).unwrap(), 1.0 / 8.0, Phi::sphere(0.25)).with_barrier(flat);
    assert!(solve_dirichlet(&prob, &SolveOptions::default()).is_err());
}

#[test]
fn problem_file_builds_and_rejects_nonsense() {
    let ok = ProblemFile::parse("n = 2\ndomain = \"disk r=1\"\nh = 0.125\nphi = \"sphere k=0.25\"\n").unwrap();
    let prob = ok.build(Path::new(".")).unwrap();
    assert_eq!(prob.n(), 2);
    assert!(ProblemFile::parse("n = 2\ndomain = \"disk r=1\"\nh = 0.125\nphi = 1\nunknown = 3\n").is_err());
    let bad_domain = ProblemFile::parse("n = 1\ndomain = \"disk r=1\"\nh = 0.1\nphi = 1\n").unwrap();
    assert!(bad_domain.build(Path::new(".")).is_err());
    let json = ProblemFile::parse_json(r#"{"n":1,"domain":[[-1],[1]],"h":0.125,"phi":0.5,"G":"one"}"#).unwrap();
    assert!(json.build(Path::new(".")).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_graphs_have_curvature_one_over_r_squared(r in 0.5f64..5.0, sx in -0.6f64..0.6, sy in -0.6f64..0.6) {
        let (x, y) = (sx * r, sy * r);
        let q = r * r - x * x - y * y;
        let (fx, fy) = (x / q.sqrt(), y / q.sqrt());
        let d = q.powf(1.5);
        let hess = Sym2 { a: (r * r - y * y) / d, b: x * y / d, c: (r * r - x * x) / d };
        let k = graph_curvature([fx, fy], &hess, 2);
        prop_assert!((k - 1.0 / (r * r)).abs() < 1e-10 / (r * r));
        let fd = gaussian_curvature_of_graph(&|p: &[f64]| -(r * r - p[0] * p[0] - p[1] * p[1]).sqrt(), &[x, y], 1e-4 * r).unwrap();
        prop_assert!((fd - 1.0 / (r * r)).abs() < 1e-4 / (r * r));
    }

    #[test]
    fn circle_graphs_have_curvature_one_over_r(r in 0.5f64..5.0, s in -0.8f64..0.8) {
        let x = s * r;
        let q = r * r - x * x;
        let hess = Sym2 { a: r * r / q.powf(1.5), b: 0.0, c: 0.0 };
        let k = graph_curvature([x / q.sqrt(), 0.0], &hess, 1);
        prop_assert!((k - 1.0 / r).abs() < 1e-10 / r);
    }
}
