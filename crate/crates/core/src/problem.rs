//! Problem data, hypothesis checks and compatibility residuals.
//!
//! Boundary forms use the convention that `u_x^(k)(1-x, t)` is the k-th
//! x-derivative evaluated at the point `1-x`, so
//! `l2 u = α0 u(0) + β0 u(1)` and `l3 u = α1 u_x(0) + β1 u_x(1)`.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::exprcore::{parse_expr, ExprAst};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// A user function of `x` together with its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFn {
    expr: ExprAst,
    d1: ExprAst,
    d2: ExprAst,
    constant: Option<f64>,
}

impl ScalarFn {
    pub fn new(expr: ExprAst) -> Self {
        let d1 = expr.diff();
        let d2 = d1.diff();
        let constant = if expr.is_constant() {
            expr.eval(0.0f64).ok()
        } else {
            None
        };
        ScalarFn {
            expr,
            d1,
            d2,
            constant,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(parse_expr(text)?))
    }

    pub fn constant(v: f64) -> Self {
        Self::new(ExprAst::constant(v))
    }

    pub fn expr(&self) -> &ExprAst {
        &self.expr
    }

    pub fn derivative_expr(&self) -> &ExprAst {
        &self.d1
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    #[inline]
    pub fn value<T: Real>(&self, x: T) -> T {
        match self.constant {
            Some(v) => T::lit(v),
            None => self.expr.value(x),
        }
    }

    #[inline]
    pub fn d1<T: Real>(&self, x: T) -> T {
        match self.constant {
            Some(_) => T::zero(),
            None => self.d1.value(x),
        }
    }

    #[inline]
    pub fn d2<T: Real>(&self, x: T) -> T {
        match self.constant {
            Some(_) => T::zero(),
            None => self.d2.value(x),
        }
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// Coefficients, boundary weights, shift data and initial function.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: ScalarFn,
    pub b: ScalarFn,
    pub c: ScalarFn,
    pub phi: ScalarFn,
    pub delta0: f64,
    pub delta1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub omega: f64,
}

impl ProblemSpec {
    /// Heat equation on (0,1) with periodic forms, unit shifts and ω = 1/2.
    pub fn reference(phi: &str) -> Result<Self> {
        Ok(ProblemSpec {
            a: ScalarFn::constant(1.0),
            b: ScalarFn::constant(0.0),
            c: ScalarFn::constant(0.0),
            phi: ScalarFn::parse(phi)?,
            delta0: 1.0,
            delta1: 1.0,
            alpha0: 1.0,
            alpha1: 1.0,
            beta0: -1.0,
            beta1: -1.0,
            omega: 0.5,
        })
    }

    pub fn with_phi(&self, phi: &str) -> Result<Self> {
        Ok(ProblemSpec {
            phi: ScalarFn::parse(phi)?,
            ..self.clone()
        })
    }

    pub fn with_coefficients(&self, a: &str, b: &str, c: &str) -> Result<Self> {
        Ok(ProblemSpec {
            a: ScalarFn::parse(a)?,
            b: ScalarFn::parse(b)?,
            c: ScalarFn::parse(c)?,
            ..self.clone()
        })
    }

    /// `a φ'' + b φ' + c φ` at x.
    pub fn l_phi(&self, x: f64) -> f64 {
        self.a.value(x) * self.phi.d2(x) + self.b.value(x) * self.phi.d1(x) + self.c.value(x) * self.phi.value(x)
    }

    /// `∫0^1 dx / sqrt(a)`.
    pub fn phase_length(&self) -> f64 {
        if let Some(a) = self.a.as_constant() {
            return 1.0 / a.sqrt();
        }
        gauss_legendre(48).integrate(0.0, 1.0, |x| 1.0 / self.a.value(x).sqrt())
    }

    /// `∫0^1 b / (2a) dx`.
    pub fn drift_integral(&self) -> f64 {
        if self.b.as_constant() == Some(0.0) {
            return 0.0;
        }
        gauss_legendre(48).integrate(0.0, 1.0, |x| self.b.value(x) / (2.0 * self.a.value(x)))
    }

    /// `a(0) α0 β1 + a(1) β0 α1`.
    pub fn regularity_constant(&self) -> f64 {
        self.a.value(0.0f64) * self.alpha0 * self.beta1 + self.a.value(1.0f64) * self.beta0 * self.alpha1
    }

    /// Largest value of `c` on a uniform sample, clamped below at zero.
    pub fn c_max(&self) -> f64 {
        if let Some(c) = self.c.as_constant() {
            return c.max(0.0);
        }
        (0..=64)
            .map(|k| self.c.value(k as f64 / 64.0))
            .fold(0.0, f64::max)
    }

    /// Both endpoint boundary forms applied to φ.
    pub fn compatibility_residuals(&self) -> (f64, f64) {
        compatibility_residuals(self)
    }
}

/// `(α0 φ(0) + β0 φ(1), α1 φ'(0) + β1 φ'(1))`.
pub fn compatibility_residuals(spec: &ProblemSpec) -> (f64, f64) {
    let r2 = spec.alpha0 * spec.phi.value(0.0f64) + spec.beta0 * spec.phi.value(1.0f64);
    let r3 = spec.alpha1 * spec.phi.d1(0.0f64) + spec.beta1 * spec.phi.d1(1.0f64);
    (r2, r3)
}

pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<24} {:<4} {:.6e}",
                c.name,
                if c.pass { "ok" } else { "FAIL" },
                c.value
            )?;
        }
        write!(f, "verdict: {}", if self.pass { "pass" } else { "fail" })
    }
}

/// Checks every hypothesis of the uniqueness and existence theorems.
///
/// Positivity of `a` and definedness of the data are sampled on a uniform
/// grid of `n_samples` points, endpoints included.
pub fn validate(spec: &ProblemSpec, n_samples: usize) -> ValidationReport {
    let n = n_samples.max(2);
    let grid: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();

    let mut checks = Vec::new();
    let mut push = |name, pass, value| checks.push(Check { name, pass, value });

    let mut a_min = f64::INFINITY;
    for &x in &grid {
        match spec.a.expr().eval(x) {
            Ok(v) if v.is_finite() => a_min = a_min.min(v),
            _ => {
                a_min = f64::NAN;
                break;
            }
        }
    }
    push("a_positive", a_min > 0.0, a_min);

    let a_ends = spec.a.value(0.0f64) * spec.a.value(1.0f64);
    push("a0_a1_nonzero", a_ends != 0.0 && a_ends.is_finite(), a_ends);

    let dd = spec.delta0 * spec.delta1;
    push("delta0_delta1_nonzero", dd != 0.0 && dd.is_finite(), dd);

    let reg = spec.regularity_constant();
    push("regularity_constant", reg != 0.0 && reg.is_finite(), reg);

    push("omega_positive", spec.omega > 0.0 && spec.omega.is_finite(), spec.omega);

    // b, c, φ and the derivatives of φ entering L φ must be defined on [0,1]
    let mut undefined = 0usize;
    for &x in &grid {
        let ok = [
            spec.b.expr().eval(x as f64),
            spec.c.expr().eval(x),
            spec.phi.expr().eval(x),
            spec.phi.derivative_expr().eval(x),
            spec.phi.derivative_expr().diff().eval(x),
        ]
        .iter()
        .all(|r| matches!(r, Ok(v) if v.is_finite()));
        if !ok {
            undefined += 1;
        }
    }
    push("data_defined", undefined == 0, undefined as f64);

    let (r2, r3) = compatibility_residuals(spec);
    push("compatibility_l2", r2.abs() <= COMPATIBILITY_TOL, r2);
    push("compatibility_l3", r3.abs() <= COMPATIBILITY_TOL, r3);

    let pass = checks.iter().all(|c| c.pass);
    ValidationReport { checks, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_problem_passes() {
        let p0 = ProblemSpec::reference("sin(2*pi*x)").unwrap();
        let r = validate(&p0, 101);
        assert!(r.pass, "{r}");
        assert_eq!(r.get("regularity_constant").unwrap().value, -2.0);
        assert_eq!(validate(&p0, 101), r);
    }

    #[test]
    fn degenerate_regularity_fails() {
        let mut p = ProblemSpec::reference("sin(2*pi*x)").unwrap();
        p.beta0 = 1.0;
        p.beta1 = -1.0;
        let r = validate(&p, 11);
        let c = r.get("regularity_constant").unwrap();
        assert!(!c.pass && c.value == 0.0);
        assert!(!r.pass);
    }

    #[test]
    fn zero_shift_fails() {
        let p = ProblemSpec {
            delta0: 0.0,
            ..ProblemSpec::reference("sin(2*pi*x)").unwrap()
        };
        let r = validate(&p, 11);
        assert!(!r.get("delta0_delta1_nonzero").unwrap().pass);
        assert!(!r.pass);
    }

    #[test]
    fn nonpositive_diffusion_fails() {
        let p = ProblemSpec::reference("sin(2*pi*x)")
            .unwrap()
            .with_coefficients("x-0.5", "0", "0")
            .unwrap();
        assert!(!validate(&p, 11).get("a_positive").unwrap().pass);
        let p = p.with_coefficients("sqrt(x-0.5)", "0", "0").unwrap();
        assert!(!validate(&p, 11).get("a_positive").unwrap().pass);
    }

    #[test]
    fn residual_examples() {
        let p0 = ProblemSpec::reference("sin(2*pi*x)").unwrap();
        let (r2, r3) = p0.compatibility_residuals();
        assert!(r2.abs() < 1e-15 && r3.abs() < 1e-12);
        let (r2, r3) = p0.with_phi("x").unwrap().compatibility_residuals();
        assert_eq!((r2, r3), (-1.0, 0.0));
        let (r2, r3) = p0.with_phi("cos(2*pi*x)").unwrap().compatibility_residuals();
        assert!(r2.abs() < 1e-15 && r3.abs() < 1e-12);
        let r = validate(&p0.with_phi("x").unwrap(), 11);
        assert!(!r.get("compatibility_l2").unwrap().pass);
        assert!(r.get("compatibility_l3").unwrap().pass);
    }

    #[test]
    fn derived_quantities() {
        let p = ProblemSpec::reference("0")
            .unwrap()
            .with_coefficients("1+0.1*x", "0", "0")
            .unwrap();
        let l = 20.0 * (1.1f64.sqrt() - 1.0);
        assert!((p.phase_length() - l).abs() < 1e-14);
        let p = p.with_coefficients("4", "1", "0").unwrap();
        assert_eq!(p.phase_length(), 0.5);
        assert!((p.drift_integral() - 0.125).abs() < 1e-15);
        let q = ProblemSpec::reference("x^2*(1-x)^2").unwrap();
        assert!((q.l_phi(0.5) - (2.0 - 6.0 + 3.0)).abs() < 1e-14);
    }
}
