//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line with
//! its measured numbers before asserting, so `--nocapture` gives a report.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use plateau::barrier::{hausdorff_to_cap, smooth_intersection, solve_plateau, FrozenSet, PlateauOptions, RunStatus, SmoothOptions};
use plateau::convex::ConvexBody;
use plateau::geom::{p2, Point};
use plateau::ma::{solve_dirichlet, verify_bounds, Domain, GraphProblem, Phi, SolveOptions};
use plateau::suite::{convex_suite, duality_suite};

fn report(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool").install(f)
}

/// Sphere of radius 2 through the unit circle, lowest point below the rim.
fn cap(x: &Point) -> f64 {
    3f64.sqrt() - (4.0 - x.x * x.x - x.y * x.y).sqrt()
}

fn disk_problem(h: f64) -> GraphProblem {
    GraphProblem::new(Domain::disk(Point::zeros(), 1.0).unwrap(), h, Phi::sphere(0.25))
}

#[test]
fn dirichlet_cap_regression() {
    let start = Instant::now();
    let errors: Vec<f64> = single_threaded(|| {
        [16.0, 32.0, 64.0]
            .iter()
            .map(|m| solve_dirichlet(&disk_problem(1.0 / m), &SolveOptions::default()).unwrap().sup_error(&cap))
            .collect()
    });
    let elapsed = start.elapsed();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = errors[2] <= 1e-2 && min_order >= 1.5 && elapsed <= Duration::from_secs(60);
    report(
        "dirichlet cap on the unit disk",
        pass,
        format!(
            "errors {:?}, orders {orders:.3?}, {:.1} s for three grids",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn arc_regression() {
    let start = Instant::now();
    let prob = GraphProblem::new(Domain::interval(-1.0, 1.0).unwrap(), 1.0 / 256.0, Phi::sphere(0.25));
    let sol = solve_dirichlet(&prob, &SolveOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let err = sol.sup_error(&|x: &Point| 3f64.sqrt() - (4.0 - x.x * x.x).sqrt());
    let pass = err <= 1e-6 && elapsed <= Duration::from_secs(5);
    report("circle arc on [-1, 1]", pass, format!("sup error {err:.3e}, {:.2} s", elapsed.as_secs_f64()));
}

#[test]
fn uniqueness_across_barriers() {
    let prob = disk_problem(1.0 / 64.0);
    let solve = |alpha| solve_dirichlet(&prob, &SolveOptions { alpha, ..SolveOptions::default() }).unwrap();
    let (a, b) = (solve(0.3), solve(0.7));
    let gap = a.values.iter().zip(&b.values).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    report("uniqueness from barrier scales 0.3 and 0.7", gap <= 1e-4, format!("sup gap {gap:.3e}"));
}

#[test]
fn a_priori_bound_monitors() {
    let mut pogorelov = Vec::new();
    let mut holds = true;
    for m in [16.0, 32.0, 64.0] {
        let prob = disk_problem(1.0 / m);
        let sol = solve_dirichlet(&prob, &SolveOptions::default()).unwrap();
        let b = verify_bounds(&sol, &prob).unwrap();
        holds &= b.sup_f <= b.sup_barrier && b.sup_gradient <= b.sup_barrier_gradient;
        pogorelov.push(b.pogorelov);
    }
    let hi = pogorelov.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = pogorelov.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = (hi - lo) / hi;
    report(
        "C0/C1 bounds against the barrier, Pogorelov stability",
        holds && variation < 0.2,
        format!("bounds hold: {holds}, Pogorelov {pogorelov:.5?}, variation {:.2}%", 100.0 * variation),
    );
}

#[test]
fn convex_kernel_properties() {
    let start = Instant::now();
    let groups = convex_suite(2024, 1000);
    let elapsed = start.elapsed();
    let failed: Vec<&str> = groups.iter().filter(|g| !g.pass).map(|g| g.name.as_str()).collect();
    let pass = failed.is_empty() && elapsed <= Duration::from_secs(30);
    report(
        "convex kernel property suite (1000 cases per group)",
        pass,
        format!("{} groups, failing {failed:?}, {:.2} s", groups.len(), elapsed.as_secs_f64()),
    );
}

#[test]
fn duality_laws() {
    let start = Instant::now();
    let groups = duality_suite(2024, 100, 1.0);
    let elapsed = start.elapsed();
    let worst = groups.iter().map(|g| g.max_error).fold(0.0, f64::max);
    let pass = groups.iter().all(|g| g.pass) && worst <= 2.0 && elapsed <= Duration::from_secs(60);
    report(
        "duality suite on 100 polygons at 1 degree",
        pass,
        format!("worst angular error {worst:.3} deg, {:.2} s", elapsed.as_secs_f64()),
    );
}

#[test]
fn smoothed_intersection_of_two_disks() {
    let a = ConvexBody::disk(p2(-0.3, 0.0), 1.0, 4096);
    let b = ConvexBody::disk(p2(0.3, 0.0), 1.0, 4096);
    let s = smooth_intersection(&a, &b, 1.0, 0.1, &SmoothOptions::default()).unwrap();
    let r = &s.report;
    let pass = r.min_curvature >= 0.9 && r.contains_intersection && r.hausdorff <= 1.5 * r.r;
    report(
        "smoothed intersection of disks 0.6 apart",
        pass,
        format!(
            "min curvature {:.4}, contains {}, Hausdorff {:.4e} vs 3r/2 = {:.4e}",
            r.min_curvature,
            r.contains_intersection,
            r.hausdorff,
            1.5 * r.r
        ),
    );
}

#[test]
fn plateau_ball_with_frozen_hemisphere() {
    let start = Instant::now();
    let body = ConvexBody::ball(Point::zeros(), 1.0, 5);
    let run = solve_plateau(body, FrozenSet::lower_half(3, 2e-3).unwrap(), 0.25, &PlateauOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let h = hausdorff_to_cap(&run.state, 1.0);
    let volumes = run.state.volumes();
    let decreasing = volumes.windows(2).all(|w| w[1] < w[0]) && volumes.len() > 1;
    let lgp = run.counts().lgp_singular;
    let pass = run.status == RunStatus::Converged && h <= 2e-2 && decreasing && lgp == 0 && elapsed <= Duration::from_secs(600);
    report(
        "Plateau run on the unit ball",
        pass,
        format!("{:?}, Hausdorff to cap {h:.3e}, volumes {volumes:.5?}, lgp {lgp}, {:.1} s", run.status, elapsed.as_secs_f64()),
    );
}

fn cli_plateau(config: &Path, out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_plateau"))
        .args(["plateau", "--seed", "11", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out.join("summary.json")).unwrap()
}

#[test]
fn plateau_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ball.toml");
    std::fs::write(&config, "body = \"ball radius=1 subdivisions=5\"\nfrozen_set = \"hemisphere\"\nk = 0.25\nfrozen_tol = 2e-3\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (sa, sb) = (cli_plateau(&config, &a), cli_plateau(&config, &b));
    let mut same = sa == sb;
    for name in ["iterations.jsonl", "history.json", "surface.obj", "free_surface.csv"] {
        same &= std::fs::read(a.join(name)).unwrap() == std::fs::read(b.join(name)).unwrap();
    }
    report("repeat Plateau run with the same seed", same, format!("summary {} bytes, artifacts identical: {same}", sa.len()));
}
