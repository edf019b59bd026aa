use std::f64::consts::PI;

use num_complex::Complex64 as C;
use shiftheat::green::{char_det, KernelKind};
use shiftheat::problem::ProblemSpec;
use shiftheat::spectrum::{asymptotic_seed_with, locate_eigenvalues, multiplicity, winding_number, SeedForm};

fn graded() -> ProblemSpec {
    ProblemSpec::reference("0")
        .unwrap()
        .with_coefficients("1 + 0.1*x", "0", "0")
        .unwrap()
}

#[test]
fn reference_records_are_symmetric() {
    let p0 = ProblemSpec::reference("cos(2*pi*x)").unwrap();
    let (recs, meta) = locate_eigenvalues(&p0, 10).unwrap();
    let values: Vec<C> = recs.iter().map(|r| r.value).collect();
    for r in &recs {
        for image in [-r.value, r.value.conj()] {
            let twin = values.iter().find(|v| (*v - image).norm() < 1e-8);
            assert!(twin.is_some(), "missing image of {}", r.value);
        }
        let d = char_det(&p0, r.value, KernelKind::Nonlocal).unwrap();
        let exact = 2.0 - 2.0 * r.value.cosh();
        assert!((d - exact).norm() < 1e-9);
    }
    for (r, n) in meta.sweep_radii.iter().zip(&meta.sweep_counts) {
        // 2 - 2cosh μ has double zeros at 2πki
        let k = (r / (2.0 * PI)).floor() as u32;
        assert_eq!(*n, 2 + 4 * k);
    }
    assert!(!meta.sweep_radii.is_empty(), "{meta:?}");
}

#[test]
fn zero_free_region_has_no_winding() {
    let p0 = ProblemSpec::reference("0").unwrap();
    for k in 1..4 {
        let c = C::new(0.0, (2 * k + 1) as f64 * PI);
        assert_eq!(multiplicity(&p0, c, 2.5).unwrap(), 0);
    }
    assert_eq!(winding_number(&p0, KernelKind::Dirichlet, C::new(0.0, 2.0 * PI), 1.0).unwrap(), 1);
}

#[test]
fn graded_coefficient_matches_asymptotics() {
    let spec = graded();
    let (recs, meta) = locate_eigenvalues(&spec, 120).unwrap();
    assert!(!meta.incomplete);
    assert_eq!(meta.total_winding, meta.located_winding);
    let l = spec.phase_length();
    let mut worst = [0.0f64; 2];
    for r in recs.iter().filter(|r| r.value.im > 0.0) {
        let nu = (r.value.im * l / (2.0 * PI)).round() as u32;
        if !(5..=30).contains(&nu) {
            continue;
        }
        let seeds = asymptotic_seed_with(&spec, nu, SeedForm::Liouville);
        let dist = seeds
            .iter()
            .flat_map(|s| [*s, -*s])
            .map(|s| (s - r.value).norm())
            .fold(f64::INFINITY, f64::min);
        let slot = usize::from(nu > 15);
        worst[slot] = worst[slot].max(dist * nu as f64);
        assert!(r.residual <= 1e-9 * r.scale);
    }
    eprintln!("nu*|mu - seed|: nu<=15 {:.3e}, nu>15 {:.3e}", worst[0], worst[1]);
    assert!(worst[1] <= 2.0 * worst[0] + 1e-3);
}
