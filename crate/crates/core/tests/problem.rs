use shiftheat::problem::{validate, ProblemSpec};

fn p0(phi: &str) -> ProblemSpec {
    ProblemSpec::reference(phi).unwrap()
}

#[test]
fn reference_problem() {
    let spec = p0("cos(2*pi*x)");
    assert_eq!(spec.regularity_constant(), -2.0);
    assert_eq!(spec.phase_length(), 1.0);
    assert_eq!(spec.drift_integral(), 0.0);
    let report = validate(&spec, 101);
    assert!(report.pass, "{report}");
    let (l2, l3) = spec.compatibility_residuals();
    assert!(l2.abs() < 1e-15 && l3.abs() < 1e-14);
}

#[test]
fn derived_quantities_by_quadrature() {
    let spec = p0("0").with_coefficients("(1 + x)^2", "2*(1 + x)^2", "-x").unwrap();
    // ∫ dx/(1+x) = ln 2 and ∫ b/(2a) = 1
    assert!((spec.phase_length() - 2f64.ln()).abs() < 1e-13);
    assert!((spec.drift_integral() - 1.0).abs() < 1e-13);
    assert_eq!(spec.c_max(), 0.0);
    assert_eq!(spec.regularity_constant(), -1.0 - 4.0);
    // L φ for φ = x²: a·2 + b·2x + c·x²
    let spec = spec.with_phi("x^2").unwrap();
    let x = 0.3;
    let want = 2.0 * (1.0 + x) * (1.0 + x) + 2.0 * (1.0 + x) * (1.0 + x) * 2.0 * x - x * x * x;
    assert!((spec.l_phi(x) - want).abs() < 1e-13);
}

#[test]
fn failing_hypotheses_are_named() {
    let mut spec = p0("cos(2*pi*x)");
    spec.omega = -1.0;
    spec.beta1 = 1.0;
    let report = validate(&spec, 101);
    assert!(!report.pass);
    assert!(!report.get("omega_positive").unwrap().pass);
    assert!(!report.get("regularity_constant").unwrap().pass);
    assert!(report.get("a_positive").unwrap().pass);

    let incompatible = p0("x");
    assert!(!validate(&incompatible, 101).get("compatibility_l2").unwrap().pass);
}
