//! Fundamental solutions of `a y'' + b y' + (c - μ²) y = 0` on [0, 1].
//!
//! A Dormand–Prince 5(4) integrator advances both normalized solutions at
//! once. Dense output is a quintic Hermite interpolant built from `y, y', y''`
//! (and `y', y'', y'''` for the derivative), with the higher derivatives taken
//! from the equation itself.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Bound on the growth exponent `|Re μ| ∫dx/√a` accepted by the integrator.
pub const MU_MAX: f64 = 200.0;

const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 0.05,
        }
    }
}

impl Tolerance {
    pub fn rtol(rtol: f64) -> Self {
        Tolerance {
            rtol,
            atol: rtol * 1e-2,
            ..Default::default()
        }
    }
}

/// Values of both solutions and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValues<T> {
    pub y1: Complex<T>,
    pub dy1: Complex<T>,
    pub y2: Complex<T>,
    pub dy2: Complex<T>,
}

impl<T: Real> PairValues<T> {
    pub fn wronskian(&self) -> Complex<T> {
        self.y1 * self.dy2 - self.y2 * self.dy1
    }
}

#[derive(Debug, Clone, Copy)]
struct Node<T> {
    // y1, y1', y2, y2'
    y: [Complex<T>; 4],
    // y1'', y1''', y2'', y2'''
    hi: [Complex<T>; 4],
    // ∫ b/a from the origin
    drift: T,
}

/// Normalized pair `y1 = 1, y1' = 0; y2 = 0, y2' = 1` at `origin` (0 or 1),
/// with dense output on [0, 1].
#[derive(Debug, Clone)]
pub struct FundamentalPair<T: Real = f64> {
    pub mu: Complex<T>,
    pub origin: T,
    xs: Vec<T>,
    nodes: Vec<Node<T>>,
    pub steps: usize,
    pub rejected: usize,
}

type State<T> = [Complex<T>; 5];

struct System<'a, T: Real> {
    spec: &'a ProblemSpec,
    mu2: Complex<T>,
}

impl<T: Real> System<'_, T> {
    #[inline]
    fn rhs(&self, x: T, s: &State<T>) -> State<T> {
        let a = self.spec.a.value(x);
        let b = self.spec.b.value(x);
        let c = self.spec.c.value(x);
        let k = self.mu2 - c;
        let inv_a = T::one() / a;
        [
            s[1],
            (s[0] * k - s[1] * b) * inv_a,
            s[3],
            (s[2] * k - s[3] * b) * inv_a,
            Complex::new(b * inv_a, T::zero()),
        ]
    }

    fn node(&self, x: T, s: &State<T>, f: &State<T>) -> Node<T> {
        let sp = self.spec;
        let a = sp.a.value(x);
        let b = sp.b.value(x);
        let c = sp.c.value(x);
        let (da, db, dc) = (sp.a.d1(x), sp.b.d1(x), sp.c.d1(x));
        let third = |y: Complex<T>, dy: Complex<T>, d2y: Complex<T>| {
            -(d2y * da + dy * db + d2y * b + y * dc + dy * (-self.mu2 + c)) / a
        };
        Node {
            y: [s[0], s[1], s[2], s[3]],
            hi: [f[1], third(s[0], s[1], f[1]), f[3], third(s[2], s[3], f[3])],
            drift: s[4].re,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn combo<T: Real>(y: &State<T>, h: T, terms: &[(f64, &State<T>)]) -> State<T> {
    let mut out = *y;
    for &(c, k) in terms {
        let w = h * T::lit(c);
        for i in 0..5 {
            out[i] = out[i] + k[i] * w;
        }
    }
    out
}

/// Integrates the normalized pair starting at x = 0.
pub fn fundamental_pair<T: Real>(
    spec: &ProblemSpec,
    mu: Complex<T>,
    tol: Tolerance,
) -> Result<FundamentalPair<T>> {
    integrate_pair(spec, mu, T::zero(), tol, true)
}

/// Integrates the normalized pair starting at `origin` (0 or 1) towards the
/// other end. With `dense = false` only the two endpoint nodes are kept.
pub fn integrate_pair<T: Real>(
    spec: &ProblemSpec,
    mu: Complex<T>,
    origin: T,
    tol: Tolerance,
    dense: bool,
) -> Result<FundamentalPair<T>> {
    let mu64 = Complex::new(mu.re.to_f64_lossy(), mu.im.to_f64_lossy());
    let growth = mu64.re.abs() * spec.phase_length();
    if !(growth <= MU_MAX) || !mu64.is_finite() {
        return Err(Error::Integrator {
            mu: mu64,
            reason: format!("growth exponent {growth:.1} out of range"),
            mu_max: MU_MAX,
        });
    }

    let sys = System { spec, mu2: mu * mu };
    let forward = origin == T::zero();
    let target = if forward { T::one() } else { T::zero() };
    let dir = if forward { T::one() } else { -T::one() };
    let (rtol, atol) = (T::lit(tol.rtol), T::lit(tol.atol));
    let kscale = T::one() + mu.norm() / spec.a.value(origin).sqrt();
    let h_max = T::lit(tol.h_max);

    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut x = origin;
    let mut y: State<T> = [one, zero, zero, one, zero];
    let mut k1 = sys.rhs(x, &y);
    let mut xs = vec![x];
    let mut nodes = vec![sys.node(x, &y, &k1)];

    let mut h = (T::lit(0.05) / kscale).min(h_max);
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;

    while dir * (target - x) > T::zero() {
        if steps + rejected > MAX_STEPS {
            return Err(Error::Integrator {
                mu: mu64,
                reason: "step budget exhausted".into(),
                mu_max: MU_MAX,
            });
        }
        let remaining = dir * (target - x);
        let last = h >= remaining;
        let hh = if last { remaining } else { h };
        let hs = dir * hh;

        let k2 = sys.rhs(x + hs * T::lit(C2), &combo(&y, hs, &[(A21, &k1)]));
        let k3 = sys.rhs(x + hs * T::lit(C3), &combo(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(
            x + hs * T::lit(C4),
            &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = sys.rhs(
            x + hs * T::lit(C5),
            &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let x_new = if last { target } else { x + hs };
        let k6 = sys.rhs(
            x_new,
            &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combo(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = sys.rhs(x_new, &y_new);
        let e = combo(
            &[zero; 5],
            hs,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );

        // Each solution is measured in the energy-like amplitude
        // sqrt(|y|² + |y'/k|²), which does not vanish between oscillations.
        let mut err = T::zero();
        for j in 0..2 {
            let amp = |s: &State<T>| (s[2 * j].norm_sqr() + (s[2 * j + 1] / kscale).norm_sqr()).sqrt();
            let sc = atol + rtol * amp(&y).max(amp(&y_new));
            let ej = e[2 * j].norm().max(e[2 * j + 1].norm() / kscale) / sc;
            err = err.max(ej);
        }
        err = err.max(e[4].norm() / (atol + rtol * y_new[4].norm()));
        if !err.is_finite() {
            err = T::lit(1e10);
        }

        if err <= T::one() {
            x = x_new;
            y = y_new;
            k1 = k7;
            steps += 1;
            if dense || x == target {
                xs.push(x);
                nodes.push(sys.node(x, &y, &k1));
            }
            let mut fac = T::lit(0.9) * err.max(T::lit(1e-10)).powf(T::lit(-0.2));
            fac = fac.min(T::lit(5.0));
            if last_rejected {
                fac = fac.min(T::one());
            }
            h = (h * fac.max(T::lit(0.2))).min(h_max);
            last_rejected = false;
        } else {
            rejected += 1;
            let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.1));
            h = hh * fac;
            last_rejected = true;
        }
        if h < T::lit(1e-14) {
            return Err(Error::Integrator {
                mu: mu64,
                reason: format!("step size underflow at x = {}", x.to_f64_lossy()),
                mu_max: MU_MAX,
            });
        }
    }

    if !forward {
        xs.reverse();
        nodes.reverse();
    }
    Ok(FundamentalPair {
        mu,
        origin,
        xs,
        nodes,
        steps,
        rejected,
    })
}

// Quintic Hermite basis on [0, 1].
#[inline]
fn hermite5<T: Real>(s: T, h: T, f0: [Complex<T>; 3], f1: [Complex<T>; 3]) -> Complex<T> {
    let l = T::lit;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = T::one() - l(10.0) * s3 + l(15.0) * s4 - l(6.0) * s5;
    let h1 = s - l(6.0) * s3 + l(8.0) * s4 - l(3.0) * s5;
    let h2 = (s2 - l(3.0) * s3 + l(3.0) * s4 - s5) / l(2.0);
    let h3 = l(10.0) * s3 - l(15.0) * s4 + l(6.0) * s5;
    let h4 = -l(4.0) * s3 + l(7.0) * s4 - l(3.0) * s5;
    let h5 = (s3 - l(2.0) * s4 + s5) / l(2.0);
    let hh = h * h;
    f0[0] * h0 + f0[1] * (h * h1) + f0[2] * (hh * h2) + f1[0] * h3 + f1[1] * (h * h4) + f1[2] * (hh * h5)
}

impl<T: Real> FundamentalPair<T> {
    /// Accepted step points, ascending in x.
    pub fn mesh(&self) -> &[T] {
        &self.xs
    }

    /// Values at the end opposite to the origin.
    pub fn far_end(&self) -> PairValues<T> {
        let n = if self.origin == T::zero() { self.nodes.len() - 1 } else { 0 };
        self.node_values(n)
    }

    fn node_values(&self, k: usize) -> PairValues<T> {
        let y = self.nodes[k].y;
        PairValues {
            y1: y[0],
            dy1: y[1],
            y2: y[2],
            dy2: y[3],
        }
    }

    /// Dense-output evaluation at `x ∈ [0, 1]`.
    pub fn eval(&self, x: T) -> PairValues<T> {
        let n = self.xs.len();
        let k = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(k) => return self.node_values(k),
            Err(0) => return self.node_values(0),
            Err(k) if k >= n => return self.node_values(n - 1),
            Err(k) => k - 1,
        };
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (a, b) = (&self.nodes[k], &self.nodes[k + 1]);
        let interp = |j: usize| {
            let y = hermite5(s, h, [a.y[2 * j], a.y[2 * j + 1], a.hi[2 * j]], [b.y[2 * j], b.y[2 * j + 1], b.hi[2 * j]]);
            let dy = hermite5(
                s,
                h,
                [a.y[2 * j + 1], a.hi[2 * j], a.hi[2 * j + 1]],
                [b.y[2 * j + 1], b.hi[2 * j], b.hi[2 * j + 1]],
            );
            (y, dy)
        };
        let (y1, dy1) = interp(0);
        let (y2, dy2) = interp(1);
        PairValues { y1, dy1, y2, dy2 }
    }

    /// Largest relative deviation of `W(x) exp(∫ b/a)` from its value at the
    /// origin over the stored mesh (Abel's identity).
    pub fn abel_defect(&self) -> T {
        let w0 = T::one();
        self.nodes
            .iter()
            .map(|n| {
                let w = n.y[0] * n.y[3] - n.y[2] * n.y[1];
                (w * n.drift.exp() - w0).norm() / w0
            })
            .fold(T::zero(), |m, v| m.max(v))
    }
}

/// Large-parameter reference solutions at one point.
///
/// The branches are `y± = a^{1/4} exp(±μ ∫0^x dξ/√a − ∫0^x b/(2a) dξ)`.
/// `b_matrix` is `[[√a, √a], [1/√a, −1/√a]]`; it acts on the scaled state
/// `(a^{1/4} y, a^{-1/4} y'/μ)` so that, to leading order,
/// `scaled(y±) = b_matrix · e±` with `e± = exp(±μ∫dξ/√a − ∫b/(2a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbFrame<T> {
    pub x: T,
    pub mu: Complex<T>,
    pub branches: [Complex<T>; 2],
    pub derivatives: [Complex<T>; 2],
    pub exponentials: [Complex<T>; 2],
    pub b_matrix: [[T; 2]; 2],
    pub w: [T; 2],
}

impl<T: Real> WkbFrame<T> {
    pub fn det_b(&self) -> T {
        let m = self.b_matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

pub fn wkb_matrix<T: Real>(spec: &ProblemSpec, mu: Complex<T>, x: T) -> WkbFrame<T> {
    let gl = GaussLegendre::<T>::new(32);
    let phase = gl.integrate(T::zero(), x, |s| T::one() / spec.a.value(s).sqrt());
    let drift = gl.integrate(T::zero(), x, |s| spec.b.value(s) / (T::lit(2.0) * spec.a.value(s)));
    let a = spec.a.value(x);
    let (b, da) = (spec.b.value(x), spec.a.d1(x));
    let sa = a.sqrt();
    let amp = sa.sqrt();
    let e_plus = (mu * phase - drift).exp();
    let e_minus = (-mu * phase - drift).exp();
    let base = da / (T::lit(4.0) * a) - b / (T::lit(2.0) * a);
    let y_plus = e_plus * amp;
    let y_minus = e_minus * amp;
    WkbFrame {
        x,
        mu,
        branches: [y_plus, y_minus],
        derivatives: [y_plus * (mu / sa + base), y_minus * (-mu / sa + base)],
        exponentials: [e_plus, e_minus],
        b_matrix: [[sa, sa], [T::one() / sa, -T::one() / sa]],
        w: [T::one() / sa, -T::one() / sa],
    }
}
