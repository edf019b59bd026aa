use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C;
use shiftheat::contours::truncation_radius;
use shiftheat::problem::ProblemSpec;
use shiftheat::solver_contour::*;
use shiftheat::solver_residue::{hat_piece, solve_residue, ResidueOptions, TraceField};

fn p0(phi: &str) -> ProblemSpec {
    ProblemSpec::reference(phi).unwrap()
}

fn decay(t: f64) -> f64 {
    (-4.0 * PI * PI * t).exp()
}

fn cos_traces(spec: &ProblemSpec, k: usize) -> ShiftedTraces {
    let base: BaseTrace = Arc::new(|t| [decay(t), decay(t)]);
    ShiftedTraces::new(spec, k, [1.0, 1.0], base).unwrap()
}

#[test]
fn shift_relations_on_synthetic_traces() {
    let spec = p0("cos(2*pi*x)");
    let tr = cos_traces(&spec, 3);
    for t in [0.01, 0.2, 0.37, 0.5] {
        assert!((tr.value(0, t + 0.5) + decay(t)).abs() < 1e-15);
        assert!((tr.value(1, t + 0.5) + decay(t)).abs() < 1e-15);
    }
    // left limit at ω is the segment-1 value, right limit the shifted start
    assert!((tr.value(0, 0.5) - decay(0.5)).abs() < 1e-15);
    assert_eq!(tr.right_limit(0, 0.5), -1.0);
    assert!((tr.jumps[0][0] - (-1.0 - decay(0.5))).abs() < 1e-15);
    assert_eq!(tr.jumps.len(), 2);

    let mut spec = spec;
    spec.delta0 = 2.0;
    spec.delta1 = 0.5;
    let base: BaseTrace = Arc::new(|t| [(3.0 * t).sin(), t * t]);
    let tr = ShiftedTraces::new(&spec, 4, [0.0, 0.0], base).unwrap();
    for t in [0.05, 0.3, 0.49] {
        let want = spec.delta0 / spec.delta1 * tr.value(0, t);
        assert!((tr.value(0, t + 1.0) - want).abs() < 1e-14);
        assert!((tr.value(1, t + 0.5) + tr.value(0, t) / spec.delta1).abs() < 1e-14);
    }
}

#[test]
fn computed_traces_jump_at_omega() {
    let spec = p0("cos(2*pi*x)");
    let field = TraceField::new(&spec, 1e-3 * spec.omega, spec.omega, 1e-10).unwrap();
    let tr = extend_traces(&spec, field, 2).unwrap();
    assert!((tr.right_limit(0, 0.5) + 1.0).abs() < 1e-12);
    assert!(tr.value(0, 0.5).abs() < 1e-8);
    assert!((tr.jumps[0][0] + 1.0).abs() < 1e-8);
    for t in [0.1, 0.3] {
        assert!((tr.value(0, t + 0.5) + decay(t)).abs() < 1e-9);
    }
}

#[test]
fn transforms_of_constant_and_zero_traces() {
    let spec = p0("0");
    let zero: BaseTrace = Arc::new(|_| [0.0, 0.0]);
    let tr = ShiftedTraces::new(&spec, 1, [0.0, 0.0], zero).unwrap();
    let lam = C::new(1.3, 2.1);
    assert_eq!(laplace_transforms(&tr, lam), (C::new(0.0, 0.0), C::new(0.0, 0.0)));

    let mut spec = spec;
    spec.delta1 = 2.5;
    let one: BaseTrace = Arc::new(|_| [1.0, 1.0]);
    let tr = ShiftedTraces::new(&spec, 1, [1.0, 1.0], one).unwrap();
    for lam in [C::new(1.3, 2.1), C::new(2.0, 7.5), C::new(0.4, 0.1)] {
        let s = lam * lam;
        let want = (s * 0.5).exp() * (1.0 - (-s * 0.5).exp()) / s;
        let (a, b) = laplace_transforms(&tr, lam);
        assert!((a - want).norm() <= 1e-12 * want.norm(), "{lam}");
        assert!((b - want * 2.5).norm() <= 1e-12 * want.norm());
    }
}

#[test]
fn transform_quadrature_self_converges() {
    let spec = p0("cos(2*pi*x)");
    let tr = cos_traces(&spec, 1);
    let coarse = LaplaceData::new(&tr, 400.0);
    let fine = LaplaceData::new(&tr, 800.0);
    assert!(fine.node_count() >= 2 * coarse.node_count() - 16);
    for sigma in [10.0, 100.0, 380.0] {
        let lam = C::new(1.0, sigma).sqrt();
        let (a0, _) = coarse.transforms(lam);
        let (a1, _) = fine.transforms(lam);
        assert!((a0 - a1).norm() <= 1e-10 * a1.norm().max(1.0), "{sigma}");
    }
}

#[test]
fn pq_satisfies_the_shift_system() {
    let mut spec = p0("0");
    spec.delta0 = 3.0;
    spec.delta1 = 0.7;
    let c1 = default_c1(&spec);
    for k in 0..8 {
        let lam = (C::new(c1, 5.0 * k as f64 + 0.3)).sqrt();
        let (a, b) = (C::new(0.3, -1.0 * k as f64), C::new(1.0, 0.5));
        let pq = pq_values(&spec, lam, a, b).unwrap();
        let e = (lam * lam * spec.omega).exp();
        let r1 = e * pq.p + spec.delta0 * pq.q - a;
        let r2 = pq.p + spec.delta1 * e * pq.q - b;
        let scale = a.norm() + b.norm();
        assert!(r1.norm() <= 1e-10 * scale && r2.norm() <= 1e-10 * scale);
        assert!((pq.q - pq.q_closed).norm() <= 1e-12 * pq.q.norm().max(1e-300));
    }
    let zero = pq_values(&spec, C::new(1.5, 0.5), C::new(0.0, 0.0), C::new(0.0, 0.0)).unwrap();
    assert_eq!((zero.p, zero.q), (C::new(0.0, 0.0), C::new(0.0, 0.0)));
}

#[test]
fn zero_data_gives_zero() {
    let spec = p0("0");
    let xs = [0.0, 0.3, 1.0];
    let g = solve_contour(&spec, &xs, &[0.25, 0.75], ContourOptions::default()).unwrap();
    for row in &g.values {
        assert!(row.iter().all(|v| v.abs() < 1e-14), "{row:?}");
    }
}

#[test]
fn incompatible_data_and_bad_times_are_refused() {
    let spec = p0("x");
    assert!(solve_contour(&spec, &[0.5], &[0.1], ContourOptions::default()).is_err());
    let spec = p0("0");
    let opts = ContourOptions {
        k_segments: 2,
        ..Default::default()
    };
    assert!(solve_contour(&spec, &[0.5], &[1.2], opts).is_err());
    assert!(solve_contour(&spec, &[0.5], &[0.0], opts).is_err());
}

#[test]
fn reference_solution_over_two_segments() {
    let spec = p0("cos(2*pi*x)");
    let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let first: Vec<f64> = (0..5).map(|j| 0.1 * j as f64 + 0.05).collect();
    let ts: Vec<f64> = first.iter().chain(first.iter().map(|t| t + 0.5).collect::<Vec<_>>().iter()).cloned().collect();
    let opts = ContourOptions {
        k_segments: 2,
        ..Default::default()
    };
    let g = solve_contour(&spec, &xs, &ts, opts).unwrap();
    let c = g.components.as_ref().unwrap();

    // first segment: exact separated solution
    for (j, &t) in first.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            assert!((g.values[j][i] - decay(t) * (2.0 * PI * x).cos()).abs() < 1e-6);
        }
    }
    // endpoints of the components
    for j in 0..ts.len() {
        assert!((c.u2[j][0] + 1.0).abs() < 1e-6 && (c.u2[j][10] + 1.0).abs() < 1e-6);
        assert!(c.u1[j][0].abs() < 1e-8 && c.u1[j][10].abs() < 1e-8);
    }
    // second segment endpoints follow the shifted traces
    let field = TraceField::new(&spec, 1e-3 * spec.omega, spec.omega, 1e-10).unwrap();
    let tr = extend_traces(&spec, field, 2).unwrap();
    for (j, &t) in ts.iter().enumerate().skip(5) {
        assert!((g.values[j][0] - tr.value(0, t)).abs() < 1e-2);
        assert!((g.values[j][10] - tr.value(1, t)).abs() < 1e-2);
    }
    // agreement with the residue series on (0, ω]
    let res = solve_residue(&spec, &xs, &first, ResidueOptions::default()).unwrap();
    for j in 0..5 {
        for i in 0..xs.len() {
            assert!((res.values[j][i] - g.values[j][i]).abs() < 1e-3);
        }
    }

    // a 25% longer hat changes nothing
    let r = g.metadata["hat_radius"].parse::<f64>().unwrap();
    let longer = solve_contour(
        &spec,
        &xs,
        &first,
        ContourOptions {
            hat_radius: Some(1.25 * r),
            ..opts
        },
    )
    .unwrap();
    let u1_long = &longer.components.as_ref().unwrap().u1;
    for j in 0..5 {
        for i in 0..xs.len() {
            assert!((u1_long[j][i] - c.u1[j][i]).abs() < 1e-8);
        }
    }
}

#[test]
fn dirichlet_components_vanish_initially() {
    let spec = p0("cos(2*pi*x)");
    let c = default_c1(&spec);
    let xs: Vec<f64> = (0..=6).map(|i| 0.2 + 0.1 * i as f64).collect();
    let piece = hat_piece(spec.phase_length(), spec.omega, 1e-8);
    let hat = DirichletHat::new(&spec, c, &xs, u2_initial_radius(&xs, 1e-8), &piece).unwrap();
    assert!(hat.u2(0.0).iter().all(|v| v.abs() < 1e-6));

    // u1(x, t) → 0 as t → 0 on interior points
    let ts = [1e-3, 5e-4, 2.5e-4];
    let hat = DirichletHat::new(&spec, c, &xs, truncation_radius(ts[2], 1e-10, 0), &piece).unwrap();
    let sup: Vec<f64> = ts.iter().map(|&t| hat.u1(t).iter().map(|v| v.abs()).fold(0.0, f64::max)).collect();
    assert!(sup[1] < sup[0] && sup[2] < sup[1], "{sup:?}");
    // linear extrapolation to t = 0
    assert!((2.0 * sup[2] - sup[1]).abs() < 0.1 * sup[0], "{sup:?}");
}
