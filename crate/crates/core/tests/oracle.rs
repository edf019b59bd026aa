use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shiftheat::oracle::*;
use shiftheat::problem::ProblemSpec;
use shiftheat::solver_residue::{solve_residue, Method, ResidueOptions, SolutionGrid};
use shiftheat::Error;

fn p0(phi: &str) -> ProblemSpec {
    ProblemSpec::reference(phi).unwrap()
}

fn exact(x: f64, t: f64) -> f64 {
    (-4.0 * PI * PI * t).exp() * (2.0 * PI * x).sin()
}

fn sup_error(g: &FdGrid, t: f64) -> f64 {
    g.xs.iter().zip(g.slice(t)).map(|(x, v)| (v - exact(*x, t)).abs()).fold(0.0, f64::max)
}

fn grid_of(xs: Vec<f64>, ts: Vec<f64>, mut f: impl FnMut(f64, f64) -> f64) -> SolutionGrid {
    let values = ts.iter().map(|&t| xs.iter().map(|&x| f(x, t)).collect()).collect();
    SolutionGrid {
        xs,
        ts,
        values,
        method: Method::FiniteDifference,
        metadata: Default::default(),
        components: None,
        tail: 0.0,
        imag_max: 0.0,
    }
}

#[test]
fn separated_solution_at_reference_resolution() {
    let g = fd_solve(&p0("sin(2*pi*x)"), 200, 1e-4, 0.1).unwrap();
    assert!(sup_error(&g, 0.1) <= 1e-4);
}

#[test]
fn second_order_convergence() {
    let spec = p0("sin(2*pi*x)");
    let coarse = fd_solve(&spec, 40, 4e-3, 0.1).unwrap();
    let fine = fd_solve(&spec, 80, 2e-3, 0.1).unwrap();
    let ratio = sup_error(&coarse, 0.1) / sup_error(&fine, 0.1);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn continuation_and_jump_limits() {
    let spec = p0("cos(2*pi*x)");
    let g = fd_solve(&spec, 100, 1e-3, 1.0).unwrap();
    assert_eq!(g.right_limits.len(), 1);
    assert_eq!(g.right_limits[0][0], -1.0);
    let m = g.steps_per_segment;
    let left = g.values[m][0];
    assert!((left - (-4.0 * PI * PI * 0.5f64).exp()).abs() < 1e-4, "{left}");
    // shift relations on every stored slice past ω
    let n = g.xs.len() - 1;
    for k in m + 1..g.values.len() {
        let (now, back) = (&g.values[k], &g.values[k - m]);
        assert!((now[0] + spec.delta0 * back[n]).abs() < 1e-15);
        assert!((now[n] + back[0] / spec.delta1).abs() < 1e-15);
    }
}

#[test]
fn maximum_principle() {
    let sup = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for phi in ["cos(2*pi*x)", "x^2*(1-x)^2"] {
        let g = fd_solve(&p0(phi), 100, 1e-4, 1.0).unwrap();
        let (m, n) = (g.steps_per_segment, g.xs.len() - 1);
        // first segment: nonincreasing
        for k in 1..m {
            assert!(sup(&g.values[k + 1]) <= sup(&g.values[k]) + 1e-12, "{phi}: step {k}");
        }
        // later segments: bounded by the restart slice and the boundary data so far
        let mut bound = sup(&g.values[m][1..n]).max(sup(&g.right_limits[0]));
        for k in m + 1..g.values.len() {
            let v = &g.values[k];
            bound = bound.max(v[0].abs()).max(v[n].abs());
            assert!(sup(v) <= bound + 1e-12, "{phi}: step {k}");
        }
    }
    // cos data decays at the ends, so the second segment is monotone as well
    let g = fd_solve(&p0("cos(2*pi*x)"), 100, 1e-4, 1.0).unwrap();
    let m = g.steps_per_segment;
    for k in m + 1..g.values.len() - 1 {
        assert!(sup(&g.values[k + 1]) <= sup(&g.values[k]) + 1e-12);
    }
}

#[test]
fn comparison_norms() {
    let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let ts = vec![0.1, 0.2, 0.3];
    let a = grid_of(xs.clone(), ts.clone(), |x, t| x * t);
    let b = grid_of(xs.clone(), ts.clone(), |x, t| x * t + 0.5);
    let same = compare_grids(&a, &a, 0.5, 0.0).unwrap();
    assert_eq!((same.sup, same.l2), (0.0, 0.0));
    let off = compare_grids(&a, &b, 0.5, 0.0).unwrap();
    assert!((off.sup - 0.5).abs() < 1e-15 && (off.l2 - 0.5).abs() < 1e-15);
    assert_eq!(off.slices.len(), 3);

    let late = grid_of(xs, vec![2.0, 3.0], |_, _| 0.0);
    assert!(matches!(compare_grids(&a, &late, 0.5, 0.0), Err(Error::DisjointWindows(_))));
}

#[test]
fn residue_against_fd() {
    let spec = p0("cos(2*pi*x)");
    let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let ts: Vec<f64> = (0..5).map(|j| 0.1 * j as f64 + 0.05).collect();
    let res = solve_residue(&spec, &xs, &ts, ResidueOptions::default()).unwrap();
    let fd = fd_solve(&spec, 200, 1e-4, 0.5).unwrap();
    let r = compare_grids(&res, &fd.to_solution_grid(&ts), 0.5, fd.dt).unwrap();
    assert!(r.sup <= 5e-3, "{r:?}");
}

#[test]
fn residuals() {
    let xs: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let ts: Vec<f64> = (0..=500).map(|n| 0.05 + n as f64 * 1e-4).collect();
    let spec = p0("sin(2*pi*x)");
    let g = grid_of(xs.clone(), ts.clone(), exact);
    let r = pde_residual(&g, &spec);
    assert!(r <= 1e-3, "{r}");

    let mut rng = StdRng::seed_from_u64(7);
    let noise = grid_of(xs, ts[..20].to_vec(), |_, _| rng.gen_range(-1.0..1.0));
    assert!(pde_residual(&noise, &spec) >= 1.0);
}

#[test]
fn invalid_inputs() {
    let spec = p0("0");
    assert!(matches!(fd_solve(&spec, 10, 1e-3, 0.1), Err(Error::InvalidInput(_))));
    assert!(matches!(fd_solve(&spec, 40, 0.2, 0.1), Err(Error::InvalidInput(_))));
    // α0 = β0 = 0 leaves one boundary row empty
    let mut bad = spec.clone();
    bad.alpha0 = 0.0;
    bad.beta0 = 0.0;
    assert!(matches!(fd_solve(&bad, 40, 1e-3, 0.1), Err(Error::SingularBoundary(_))));
}
