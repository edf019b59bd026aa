//! Characteristic determinants, Green's functions and the boundary
//! interpolant `Q`.
//!
//! The kernel is assembled from two normalized pairs, one started at each
//! end. For a source point ξ,
//!
//! ```text
//! K(x, ξ) = A1 y1(x) + A2 y2(x)   (x ≤ ξ)
//!         = B1 z1(x) + B2 z2(x)   (x > ξ)
//! ```
//!
//! where `(A1, A2, B1, B2)` solve the two boundary rows, continuity at ξ and
//! the jump `∂xK(ξ+) − ∂xK(ξ−) = −1/a(ξ)`. Each piece only ever grows away
//! from the end it was started at, so no cancellation occurs for large
//! `|Re μ|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::odeint::{integrate_pair, FundamentalPair, PairValues, Tolerance};
use crate::problem::{ProblemSpec, ScalarFn};
use crate::quadrature::gauss_legendre;

type C64 = Complex64;

/// Boundary forms of the two spectral problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `α0 y(0) + β0 y(1) = 0`, `α1 y'(0) + β1 y'(1) = 0`.
    Nonlocal,
    /// `y(0) = y(1) = 0`.
    Dirichlet,
}

/// Determinant together with the scale used by the singularity guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    pub value: C64,
    pub scale: f64,
}

impl Determinant {
    pub const REL_THRESHOLD: f64 = 1e-12;

    pub fn threshold(&self) -> f64 {
        Self::REL_THRESHOLD * self.scale
    }

    pub fn is_singular(&self) -> bool {
        !(self.value.norm() >= self.threshold())
    }
}

fn det_from_end(spec: &ProblemSpec, e: &PairValues<f64>, kind: KernelKind) -> Determinant {
    let scale = 1f64.max(e.y1.norm()).max(e.y2.norm());
    let value = match kind {
        KernelKind::Nonlocal => {
            let m11 = e.y1 * spec.beta0 + spec.alpha0;
            let m12 = e.y2 * spec.beta0;
            let m21 = e.dy1 * spec.beta1;
            let m22 = e.dy2 * spec.beta1 + spec.alpha1;
            m11 * m22 - m12 * m21
        }
        KernelKind::Dirichlet => e.y2,
    };
    Determinant { value, scale }
}

/// Characteristic determinant with its scale.
pub fn char_det_scaled(spec: &ProblemSpec, param: C64, kind: KernelKind) -> Result<Determinant> {
    let pair = integrate_pair(spec, param, 0.0, Tolerance::default(), false)?;
    Ok(det_from_end(spec, &pair.far_end(), kind))
}

const SUSPECT: f64 = 1e-8;

fn tight() -> Tolerance {
    Tolerance {
        rtol: 1e-13,
        atol: 1e-15,
        h_max: 0.02,
    }
}

// Integration noise (~rtol) can mask an exact zero; suspicious values are
// recomputed at tighter tolerance before the guard is applied.
fn guarded(spec: &ProblemSpec, param: C64, kind: KernelKind, d: Determinant) -> Result<Determinant> {
    if d.value.norm() >= SUSPECT * d.scale {
        return Ok(d);
    }
    let pair = integrate_pair(spec, param, 0.0, tight(), false)?;
    Ok(det_from_end(spec, &pair.far_end(), kind))
}

/// `Δ1(μ)` for the nonlocal forms or `Δ2(λ) = y2(1, λ)` for Dirichlet.
pub fn char_det(spec: &ProblemSpec, param: C64, kind: KernelKind) -> Result<C64> {
    Ok(char_det_scaled(spec, param, kind)?.value)
}

/// `K(x, ξ)` and `∂xK(x, ξ)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C64,
    pub dx: C64,
}

/// Green's function at a fixed spectral parameter.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    pub kind: KernelKind,
    pub param: C64,
    pub det: Determinant,
    left: FundamentalPair,
    right: FundamentalPair,
    a: ScalarFn,
    phase_length: f64,
    slopes: (C64, C64),
    // boundary matrix in the (u+, u-) basis, and the rows' weights at x = 1
    bmat: [[C64; 2]; 2],
    bdet: C64,
    at_zero: [[C64; 2]; 2],
    at_one: [[C64; 2]; 2],
}

/// Builds the Green's function; fails near the spectrum.
pub fn green_kernel(spec: &ProblemSpec, param: C64, kind: KernelKind) -> Result<KernelEvaluator> {
    let tol = Tolerance::default();
    let left = integrate_pair(spec, param, 0.0, tol, true)?;
    let det = guarded(spec, param, kind, det_from_end(spec, &left.far_end(), kind))?;
    if det.is_singular() {
        return Err(Error::SingularParameter {
            param,
            det: det.value.norm(),
            threshold: det.threshold(),
        });
    }
    let right = integrate_pair(spec, param, 1.0, tol, true)?;
    let rows = match kind {
        KernelKind::Nonlocal => [
            [spec.alpha0, 0.0, spec.beta0, 0.0],
            [0.0, spec.alpha1, 0.0, spec.beta1],
        ],
        KernelKind::Dirichlet => [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
    };
    // u+ starts at 0 with log-derivative (m+1)/√a, u- at 1 with the
    // opposite sign, Re m ≥ 0; each is dominant in its integration direction
    let m = if param.re >= 0.0 { param } else { -param };
    let slopes = (
        (m + 1.0) / spec.a.value(0.0f64).sqrt(),
        -(m + 1.0) / spec.a.value(1.0f64).sqrt(),
    );
    let mut k = KernelEvaluator {
        kind,
        param,
        det,
        left,
        right,
        a: spec.a.clone(),
        phase_length: spec.phase_length(),
        slopes,
        bmat: [[C64::new(0.0, 0.0); 2]; 2],
        bdet: C64::new(0.0, 0.0),
        at_zero: [[C64::new(0.0, 0.0); 2]; 2],
        at_one: [[C64::new(0.0, 0.0); 2]; 2],
    };
    let (b0, b1) = (k.basis(0.0), k.basis(1.0));
    for (r, row) in rows.iter().enumerate() {
        for j in 0..2 {
            k.at_zero[r][j] = b0.value[j] * row[0] + b0.dx[j] * row[1];
            k.at_one[r][j] = b1.value[j] * row[2] + b1.dx[j] * row[3];
            k.bmat[r][j] = k.at_zero[r][j] + k.at_one[r][j];
        }
    }
    k.bdet = k.bmat[0][0] * k.bmat[1][1] - k.bmat[0][1] * k.bmat[1][0];
    if !(k.bdet.norm() > 0.0) || !k.bdet.is_finite() {
        return Err(Error::SingularParameter {
            param,
            det: k.det.value.norm(),
            threshold: k.det.threshold(),
        });
    }
    Ok(k)
}

/// Values and x-derivatives of the kernel basis `(u+, u-)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisValues {
    pub value: [C64; 2],
    pub dx: [C64; 2],
}

/// Output of [`KernelEvaluator::apply`] at one target point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Applied {
    pub x: f64,
    pub value: C64,
    pub dx: C64,
}

impl KernelEvaluator {
    pub fn left_pair(&self) -> &FundamentalPair {
        &self.left
    }

    pub fn right_pair(&self) -> &FundamentalPair {
        &self.right
    }

    /// `u+` and `u-` at `x`. Their log-derivatives at the start points
    /// are `±(m+1)/√a` with `m = ±param`, `Re m ≥ 0`.
    pub fn basis(&self, x: f64) -> BasisValues {
        let y = self.left.eval(x);
        let z = self.right.eval(x);
        let (sl, sr) = self.slopes;
        BasisValues {
            value: [y.y1 + sl * y.y2, z.y1 + sr * z.y2],
            dx: [y.dy1 + sl * y.dy2, z.dy1 + sr * z.dy2],
        }
    }

    /// `(A+, A-, B+, B-)` for source point ξ: `K = A·u` left of ξ and
    /// `K = B·u` right of it.
    pub fn coefficients(&self, xi: f64) -> [C64; 4] {
        self.coefficients_from(xi, &self.basis(xi))
    }

    fn coefficients_from(&self, xi: f64, u: &BasisValues) -> [C64; 4] {
        // K = -u+(min) u-(max) / (aW) + c·u; the free part carries the jump
        let w = u.value[0] * u.dx[1] - u.dx[0] * u.value[1];
        let aw = w * self.a.value(xi);
        let (fp, fm) = (-u.value[1] / aw, -u.value[0] / aw);
        let r0 = -(self.at_zero[0][0] * fp + self.at_one[0][1] * fm);
        let r1 = -(self.at_zero[1][0] * fp + self.at_one[1][1] * fm);
        let m = &self.bmat;
        let cp = (r0 * m[1][1] - r1 * m[0][1]) / self.bdet;
        let cm = (m[0][0] * r1 - m[1][0] * r0) / self.bdet;
        [fp + cp, cm, cp, fm + cm]
    }

    /// `K(x, ξ)` and `∂xK(x, ξ)`; at `x = ξ` the derivative is the left limit.
    pub fn eval(&self, x: f64, xi: f64) -> KernelValue {
        let c = self.coefficients(xi);
        let u = self.basis(x);
        let o = if x <= xi { 0 } else { 2 };
        KernelValue {
            value: c[o] * u.value[0] + c[o + 1] * u.value[1],
            dx: c[o] * u.dx[0] + c[o + 1] * u.dx[1],
        }
    }

    /// Number of uniform panels used by [`apply`](Self::apply): at least 8,
    /// more for oscillatory kernels.
    pub fn panel_count(&self) -> usize {
        ((self.param.norm() * self.phase_length / 3.0).ceil() as usize).max(8)
    }

    /// `x ↦ ∫0^1 K(x, ξ) f(ξ) dξ` and its x-derivative at every `x` in
    /// `xs`, by 16-point Gauss–Legendre on uniform panels refined at each
    /// target point.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, xs: &[f64]) -> Vec<Applied> {
        let n = self.panel_count();
        let mut br: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        br.extend(xs.iter().map(|x| x.clamp(0.0, 1.0)));
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        br.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let gl = gauss_legendre(16);
        let zero = C64::new(0.0, 0.0);
        let m = br.len() - 1;
        // per-interval Σ w f A1, Σ w f A2, Σ w f B1, Σ w f B2
        let mut sums = vec![[zero; 4]; m];
        for k in 0..m {
            let mut s = [zero; 4];
            for (xi, w) in gl.mapped(br[k], br[k + 1]) {
                let fw = f(xi) * w;
                if fw == 0.0 {
                    continue;
                }
                let c = self.coefficients(xi);
                for j in 0..4 {
                    s[j] += c[j] * fw;
                }
            }
            sums[k] = s;
        }
        // suffix sums of the A parts, prefix sums of the B parts
        let mut suffix = vec![[zero; 2]; m + 1];
        for k in (0..m).rev() {
            suffix[k] = [suffix[k + 1][0] + sums[k][0], suffix[k + 1][1] + sums[k][1]];
        }
        let mut prefix = vec![[zero; 2]; m + 1];
        for k in 0..m {
            prefix[k + 1] = [prefix[k][0] + sums[k][2], prefix[k][1] + sums[k][3]];
        }

        xs.iter()
            .map(|&x| {
                let xc = x.clamp(0.0, 1.0);
                let k = br
                    .iter()
                    .position(|b| (b - xc).abs() < 1e-14)
                    .expect("target is a breakpoint");
                let u = self.basis(xc);
                let (sa, pb) = (suffix[k], prefix[k]);
                let (c0, c1) = (sa[0] + pb[0], sa[1] + pb[1]);
                Applied {
                    x,
                    value: u.value[0] * c0 + u.value[1] * c1,
                    dx: u.dx[0] * c0 + u.dx[1] * c1,
                }
            })
            .collect()
    }

    /// The interpolant `Q` reusing this evaluator's solutions.
    pub fn q_function(&self, p: C64, q: C64) -> Result<QFunction> {
        QFunction::from_pairs(self.param, p, q, &self.left, &self.right).map(|qf| QFunction {
            left: self.left.clone(),
            right: self.right.clone(),
            ..qf
        })
    }
}

/// Solution of `L(d/dx, λ²) Q = 0` with `Q(0) = p`, `Q(1) = q`.
#[derive(Debug, Clone)]
pub struct QFunction {
    pub lambda: C64,
    pub p: C64,
    pub q: C64,
    left: FundamentalPair,
    right: FundamentalPair,
    y2_at_1: C64,
    z2_at_0: C64,
}

impl QFunction {
    fn from_pairs(
        lambda: C64,
        p: C64,
        q: C64,
        left: &FundamentalPair,
        right: &FundamentalPair,
    ) -> Result<QFunction> {
        let e = left.far_end();
        let det = det_from_end_dirichlet(&e);
        if det.is_singular() {
            return Err(Error::SingularParameter {
                param: lambda,
                det: det.value.norm(),
                threshold: det.threshold(),
            });
        }
        Ok(QFunction {
            lambda,
            p,
            q,
            left: FundamentalPair::clone(left),
            right: FundamentalPair::clone(right),
            y2_at_1: e.y2,
            z2_at_0: right.far_end().y2,
        })
    }

    /// `Q(x)` and `Q'(x)`.
    pub fn eval(&self, x: f64) -> (C64, C64) {
        let y = self.left.eval(x);
        let z = self.right.eval(x);
        let (r0, r1) = (z.y2 / self.z2_at_0, y.y2 / self.y2_at_1);
        let (d0, d1) = (z.dy2 / self.z2_at_0, y.dy2 / self.y2_at_1);
        (self.p * r0 + self.q * r1, self.p * d0 + self.q * d1)
    }

    /// Basis values `(v0(x), v1(x))` with `Q = p v0 + q v1`.
    pub fn basis(&self, x: f64) -> (C64, C64) {
        let y = self.left.eval(x);
        let z = self.right.eval(x);
        (z.y2 / self.z2_at_0, y.y2 / self.y2_at_1)
    }
}

fn det_from_end_dirichlet(e: &PairValues<f64>) -> Determinant {
    Determinant {
        value: e.y2,
        scale: 1f64.max(e.y1.norm()).max(e.y2.norm()),
    }
}

pub fn q_function(spec: &ProblemSpec, lambda: C64, p: C64, q: C64) -> Result<QFunction> {
    let tol = Tolerance::default();
    let left = integrate_pair(spec, lambda, 0.0, tol, true)?;
    let det = det_from_end(spec, &left.far_end(), KernelKind::Dirichlet);
    let det = guarded(spec, lambda, KernelKind::Dirichlet, det)?;
    if det.is_singular() {
        return Err(Error::SingularParameter {
            param: lambda,
            det: det.value.norm(),
            threshold: det.threshold(),
        });
    }
    let right = integrate_pair(spec, lambda, 1.0, tol, true)?;
    QFunction::from_pairs(lambda, p, q, &left, &right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p0() -> ProblemSpec {
        ProblemSpec::reference("sin(2*pi*x)").unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn determinant_closed_forms() {
        let spec = p0();
        for mu in [c(0.3, 1.0), c(2.0, -1.5), c(0.1, 9.0)] {
            let d = char_det(&spec, mu, KernelKind::Nonlocal).unwrap();
            let want = 2.0 - 2.0 * mu.cosh();
            assert!((d - want).norm() < 1e-9 * want.norm().max(1.0), "{mu}");
            let d = char_det(&spec, mu, KernelKind::Dirichlet).unwrap();
            assert!((d - mu.sinh() / mu).norm() < 1e-10 * d.norm().max(1.0));
        }
        let d = char_det(&spec, c(0.0, 2.0 * PI), KernelKind::Nonlocal).unwrap();
        assert!(d.norm() < 1e-9);
        let d = char_det(&spec, c(0.0, PI), KernelKind::Nonlocal).unwrap();
        assert!((d - 4.0).norm() < 1e-9);
    }

    #[test]
    fn singular_parameter_is_rejected() {
        let r = green_kernel(&p0(), c(0.0, PI), KernelKind::Dirichlet);
        assert!(matches!(r, Err(Error::SingularParameter { .. })));
    }

    fn dirichlet_closed(l: C64, x: f64, xi: f64) -> C64 {
        let (lo, hi) = (x.min(xi), x.max(xi));
        (l * lo).sinh() * (l * (1.0 - hi)).sinh() / (l * l.sinh())
    }

    #[test]
    fn dirichlet_kernel_examples() {
        let k = green_kernel(&p0(), c(1.0, 0.0), KernelKind::Dirichlet).unwrap();
        let v = k.eval(0.5, 0.5).value;
        assert!((v.re - 0.5f64.sinh().powi(2) / 1f64.sinh()).abs() < 1e-11);
        assert!((v.re - 0.23106).abs() < 1e-5);
        for xi in [0.1, 0.5, 0.9] {
            assert!(k.eval(0.0, xi).value.norm() < 1e-14);
            assert!(k.eval(1.0, xi).value.norm() < 1e-12);
        }
        // far from the real axis the two-sided construction stays accurate
        let l = c(60.0, 60.0);
        let k = green_kernel(&p0(), l, KernelKind::Dirichlet).unwrap();
        for (x, xi) in [(0.2, 0.3), (0.7, 0.4), (0.05, 0.95), (0.5, 0.5)] {
            let want = dirichlet_closed(l, x, xi);
            let got = k.eval(x, xi).value;
            assert!((got - want).norm() <= 1e-8 * want.norm().max(1e-300), "{x} {xi}: {got} {want}");
        }
    }

    #[test]
    fn jump_and_boundary_rows() {
        let spec = p0().with_coefficients("1+0.1*x", "0.5", "x").unwrap();
        for kind in [KernelKind::Nonlocal, KernelKind::Dirichlet] {
            let k = green_kernel(&spec, c(3.0, 1.0), kind).unwrap();
            for xi in [0.2, 0.55, 0.8] {
                let co = k.coefficients(xi);
                let u = k.basis(xi);
                let lv = co[0] * u.value[0] + co[1] * u.value[1];
                let rv = co[2] * u.value[0] + co[3] * u.value[1];
                assert!((lv - rv).norm() < 1e-12 * lv.norm().max(1.0));
                let jump = (co[2] * u.dx[0] + co[3] * u.dx[1]) - (co[0] * u.dx[0] + co[1] * u.dx[1]);
                assert!((jump + 1.0 / spec.a.value(xi)).norm() < 1e-11);
                let (k0, k1) = (k.eval(0.0, xi), k.eval(1.0, xi));
                match kind {
                    KernelKind::Nonlocal => {
                        let l2 = k0.value * spec.alpha0 + k1.value * spec.beta0;
                        let l3 = k0.dx * spec.alpha1 + k1.dx * spec.beta1;
                        assert!(l2.norm() < 1e-12 && l3.norm() < 1e-11, "{l2} {l3}");
                    }
                    KernelKind::Dirichlet => {
                        assert!(k0.value.norm() < 1e-12 && k1.value.norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn apply_matches_closed_form() {
        let k = green_kernel(&p0(), c(1.0, 0.0), KernelKind::Dirichlet).unwrap();
        let xs = [0.0, 0.25, 0.5, 0.8, 1.0];
        let r = k.apply(|x| (PI * x).sin(), &xs);
        for a in &r {
            let want = (PI * a.x).sin() / (PI * PI + 1.0);
            let dwant = PI * (PI * a.x).cos() / (PI * PI + 1.0);
            assert!((a.value - want).norm() < 1e-12, "{}", a.x);
            assert!((a.dx - dwant).norm() < 1e-11);
        }
        assert!((r[2].value.re - 0.091999).abs() < 1e-6);
        assert!(k.apply(|_| 0.0, &xs).iter().all(|a| a.value == C64::new(0.0, 0.0)));
    }

    #[test]
    fn large_parameter_stays_finite() {
        let mu = C64::from_polar(150.0, 3.0 * PI / 8.0);
        let xs = [0.0, 0.0004, 0.3, 0.999, 1.0];
        let k = green_kernel(&p0(), mu, KernelKind::Nonlocal).unwrap();
        for a in k.apply(|_| 1.0, &xs) {
            let want = 1.0 / (mu * mu);
            assert!((a.value - want).norm() < 1e-10 * want.norm(), "{}: {}", a.x, a.value);
            assert!(a.dx.norm() < 1e-8);
        }
        let k = green_kernel(&p0(), mu, KernelKind::Dirichlet).unwrap();
        for a in k.apply(|_| 1.0, &xs) {
            let want = (1.0 - (mu * (a.x - 0.5)).cosh() / (mu * 0.5).cosh()) / (mu * mu);
            assert!((a.value - want).norm() < 1e-10 * (1.0 / mu.norm_sqr()), "{}", a.x);
        }
    }

    #[test]
    fn evenness_and_symmetry() {
        let spec = p0().with_coefficients("1+0.1*x", "0", "0").unwrap();
        let mu = c(0.8, 5.3);
        let kp = green_kernel(&spec, mu, KernelKind::Nonlocal).unwrap();
        let km = green_kernel(&spec, -mu, KernelKind::Nonlocal).unwrap();
        for (x, xi) in [(0.1, 0.7), (0.9, 0.2), (0.5, 0.5)] {
            assert!((kp.eval(x, xi).value - km.eval(x, xi).value).norm() <= 1e-12);
        }
        // b ≡ 0: K(x, ξ) a(ξ) is symmetric; K itself when a is constant
        let kd = green_kernel(&spec, mu, KernelKind::Dirichlet).unwrap();
        let a = |x: f64| 1.0 + 0.1 * x;
        for (x, xi) in [(0.1, 0.7), (0.9, 0.2), (0.33, 0.61)] {
            let (u, v) = (kd.eval(x, xi).value * a(xi), kd.eval(xi, x).value * a(x));
            assert!((u - v).norm() < 1e-10 * u.norm().max(1e-3));
        }
        let spec = p0().with_coefficients("2", "0", "x*x").unwrap();
        let kd = green_kernel(&spec, mu, KernelKind::Dirichlet).unwrap();
        for (x, xi) in [(0.1, 0.7), (0.9, 0.2), (0.33, 0.61)] {
            let (u, v) = (kd.eval(x, xi).value, kd.eval(xi, x).value);
            assert!((u - v).norm() < 1e-10 * u.norm().max(1e-3));
        }
    }

    #[test]
    fn q_function_examples() {
        let q = q_function(&p0(), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let v = q.eval(0.5).0;
        assert!((v.re - 0.5f64.sinh() / 1f64.sinh()).abs() < 1e-10);
        assert!((v.re - 0.443409).abs() < 1e-6);
        assert_eq!(q.eval(0.0).0, c(1.0, 0.0));
        let z = q_function(&p0(), c(2.0, 3.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(z.eval(0.4).0, c(0.0, 0.0));
        let spec = p0().with_coefficients("1+0.1*x", "x", "1").unwrap();
        let (p, qq) = (c(0.3, -1.0), c(2.0, 0.5));
        let q = q_function(&spec, c(40.0, 30.0), p, qq).unwrap();
        assert_eq!(q.eval(0.0).0, p);
        assert!((q.eval(1.0).0 - qq).norm() < 1e-14);
        assert!(q.eval(0.5).0.norm() < 1e-8);
        let r = q_function(&p0(), c(0.0, PI), p, qq);
        assert!(matches!(r, Err(Error::SingularParameter { .. })));
    }
}
