use std::f64::consts::PI;

use num_complex::Complex64 as C;
use shiftheat::problem::ProblemSpec;
use shiftheat::solver_residue::*;
use shiftheat::spectrum::locate_eigenvalues;
use shiftheat::Error;

fn p0(phi: &str) -> ProblemSpec {
    ProblemSpec::reference(phi).unwrap()
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn decay(t: f64) -> f64 {
    (-4.0 * PI * PI * t).exp()
}

#[test]
fn separated_solution_is_reproduced() {
    let spec = p0("sin(2*pi*x)");
    let xs = grid(21);
    let ts = [0.05, 0.1, 0.25];
    let g = solve_residue(&spec, &xs, &ts, ResidueOptions::default()).unwrap();
    for (j, &t) in ts.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            assert!((g.values[j][i] - decay(t) * (2.0 * PI * x).sin()).abs() <= 1e-6);
        }
    }
    assert!(g.imag_max <= 1e-8, "{}", g.imag_max);

    let zero = solve_residue(&p0("0"), &xs, &ts, ResidueOptions::default()).unwrap();
    assert!(zero.values.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn series_and_hat_contour_agree() {
    let spec = p0("cos(2*pi*x)");
    let xs = grid(21);
    let ts: Vec<f64> = (0..5).map(|j| 0.1 * j as f64 + 0.1).collect();
    let series = solve_residue(&spec, &xs, &ts, ResidueOptions::default()).unwrap();
    let opts = ResidueOptions {
        form: ResidueForm::Contour,
        ..Default::default()
    };
    let contour = solve_residue(&spec, &xs, &ts, opts).unwrap();
    assert_eq!(contour.method, Method::SpectralContour);
    for j in 0..ts.len() {
        for i in 0..xs.len() {
            assert!((series.values[j][i] - contour.values[j][i]).abs() <= 1e-6);
        }
    }
}

#[test]
fn boundary_traces() {
    let ts = [0.01, 0.1, 0.3, 0.5];
    let sin = boundary_trace(&p0("sin(2*pi*x)"), 0, &ts).unwrap();
    assert!(sin.values.iter().all(|v| v.abs() < 1e-9), "{:?}", sin.values);
    let spec = p0("cos(2*pi*x)");
    let cos = boundary_trace(&spec, 1, &ts).unwrap();
    for (v, t) in cos.values.iter().zip(&ts) {
        assert!((v - decay(*t)).abs() < 1e-9);
    }
    let g = solve_residue(&spec, &[0.0, 1.0], &ts, ResidueOptions::default()).unwrap();
    for j in 0..ts.len() {
        assert!((g.values[j][1] - cos.values[j]).abs() < 1e-6);
    }
}

#[test]
fn projections_of_sine() {
    let spec = p0("sin(2*pi*x)");
    let (recs, _) = locate_eigenvalues(&spec, 4).unwrap();
    let xs = grid(11);
    let f = |x: f64| (2.0 * PI * x).sin();
    let pair = |k: f64| -> Vec<C> {
        let mut acc = vec![C::new(0.0, 0.0); xs.len()];
        for r in recs.iter().filter(|r| (r.value.im.abs() - 2.0 * PI * k).abs() < 1e-6) {
            let field = a_operator(&spec, r, 0, &f, &xs).unwrap();
            assert!(field.l2.norm() < 1e-8 && field.l3.norm() < 1e-8);
            for (a, v) in acc.iter_mut().zip(&field.values) {
                *a += v;
            }
        }
        acc
    };
    for (v, x) in pair(1.0).iter().zip(&xs) {
        assert!((v - f(*x)).norm() < 1e-8);
    }
    assert!(pair(2.0).iter().all(|v| v.norm() < 1e-8));
}

#[test]
fn expansion_partial_sums() {
    let spec = p0("sin(2*pi*x)");
    let xs = grid(21);
    let (_, d) = expansion_partial_sum(&spec, &|x| (2.0 * PI * x).sin(), 1, &xs).unwrap();
    assert!(d <= 1e-8, "{d}");
    let (v, _) = expansion_partial_sum(&spec, &|_| 0.0, 3, &xs).unwrap();
    assert!(v.iter().all(|v| *v == 0.0));

    let spec = p0("x^2*(1-x)^2");
    let f = |x: f64| x * x * (1.0 - x) * (1.0 - x);
    let set = locate_orbits(&spec, 20).unwrap();
    let series = residue_series(&spec, &set, &f, &xs).unwrap();
    let errs: Vec<f64> = [5, 10, 20]
        .iter()
        .map(|&n| {
            let s = series.partial_sum(n);
            s.iter().zip(&xs).map(|(v, x)| (v - f(*x)).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn chain_closure_and_reality() {
    for spec in [p0("cos(2*pi*x)"), p0("cos(2*pi*x)").with_coefficients("1 + 0.1*x", "0", "0").unwrap()] {
        let xs = grid(11);
        let set = locate_orbits(&spec, 8).unwrap();
        let phi = |x: f64| spec.phi.value(x);
        let series = residue_series(&spec, &set, &phi, &xs).unwrap();
        let h = 1e-4;
        for cs in &series.groups {
            assert!(cs.closure_residual() <= 1e-7);
            for t in [0.1, 0.3] {
                let (up, im) = cs.evolve(t + h);
                let (dn, _) = cs.evolve(t - h);
                let (d, _) = cs.orbit_sum(|z| z * z * z * (z * z * t).exp());
                for i in 0..xs.len() {
                    assert!(((up[i] - dn[i]) / (2.0 * h) - d[i]).abs() <= 1e-5);
                }
                assert!(im <= 1e-8);
            }
        }
    }
}

#[test]
fn boundary_forms_of_the_solution() {
    let spec = p0("cos(2*pi*x)").with_coefficients("1 + 0.1*x", "0", "0").unwrap();
    let forms = residue_boundary_forms(&spec, &[0.05, 0.2, 0.5], 20).unwrap();
    for (l2, l3) in forms {
        assert!(l2.abs() <= 1e-6 && l3.abs() <= 1e-6, "{l2} {l3}");
    }
}

#[test]
fn initial_values_are_recovered() {
    let spec = p0("x^2*(1-x)^2");
    let xs: Vec<f64> = (0..=6).map(|i| 0.2 + 0.1 * i as f64).collect();
    let ts = [1e-3, 5e-4, 2.5e-4];
    let g = solve_residue(&spec, &xs, &ts, ResidueOptions::default()).unwrap();
    let err: Vec<f64> = g
        .values
        .iter()
        .map(|row| row.iter().zip(&xs).map(|(v, x)| (v - spec.phi.value(*x)).abs()).fold(0.0, f64::max))
        .collect();
    assert!(err[1] < err[0] && err[2] < err[1], "{err:?}");
    assert!(err[2] < 1e-3);
}

#[test]
fn inputs_are_checked() {
    let xs = [0.5];
    assert!(matches!(
        solve_residue(&p0("x"), &xs, &[0.1], ResidueOptions::default()),
        Err(Error::IncompatibleInitialData(_))
    ));
    let forced = ResidueOptions {
        allow_incompatible: true,
        n_pairs: 4,
        ..Default::default()
    };
    assert!(solve_residue(&p0("x"), &xs, &[0.1], forced).is_ok());
    assert!(matches!(
        solve_residue(&p0("0"), &xs, &[0.6], ResidueOptions::default()),
        Err(Error::InvalidInput(_))
    ));
}
