use num_complex::Complex64 as C;
use shiftheat::contours::*;

#[test]
fn integrals_with_known_antiderivatives() {
    let t = 0.2;
    // ∫ 2λ t e^{λ² t} dλ = e^{λ² t} at the ends
    let f = |z: C| z * 2.0 * t * (z * z * t).exp();
    for kind in [ContourKind::HatRight, ContourKind::HatFull, ContourKind::HyperbolaRight] {
        let path = build_contour(kind, 1.5, 12.0).unwrap();
        let rule = contour_quadrature(&path, 16);
        let got = integrate(&rule, f).unwrap();
        let want = (path.end() * path.end() * t).exp() - (path.start() * path.start() * t).exp();
        assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{kind:?}: {got} {want}");
    }
}

#[test]
fn residue_on_a_circle() {
    let rule = QuadratureRule::circle(C::new(0.3, 0.2), 0.5, 64);
    let got = integrate(&rule, |z| (z * 2.0).exp() / (z - C::new(0.4, 0.1))).unwrap();
    let want = C::new(0.0, 2.0 * std::f64::consts::PI) * (C::new(0.8, 0.2)).exp();
    assert!((got - want).norm() < 1e-12);
    assert!(integrate(&rule, |z| z * z * z).unwrap().norm() < 1e-14);
}

#[test]
fn truncation_radius_bounds_the_tail() {
    for (t, eps) in [(0.05, 1e-10), (0.5, 1e-8), (1e-3, 1e-12)] {
        let r: f64 = truncation_radius(t, eps, 0);
        let k = std::f64::consts::SQRT_2 / 2.0 * t;
        assert!((-k * r * r).exp() <= eps * (1.0 + 1e-9));
        assert!((-k * 0.99 * 0.99 * r * r).exp() > eps);
    }
}
