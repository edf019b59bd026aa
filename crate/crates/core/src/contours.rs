//! Integration paths in the spectral plane and quadrature along them.
//!
//! * hat contour: vertical segment `Re z = c`, `|Im z| ≤ c(1+√2)`, continued
//!   by rays on `arg z = ±3π/8` from its corners (which lie on those rays);
//! * hyperbola branch `Re z² = c`, `z(s) = √c cosh s + i √c sinh s`;
//! * circular arcs `Ω_r(θ1, θ2)`;
//! * the closed contour formed by the right hat, the arc `Ω_r(3π/8, 5π/8)`,
//!   the reflected left hat and the arc `Ω_r(11π/8, 13π/8)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment<T> {
    Line {
        from: Complex<T>,
        to: Complex<T>,
    },
    /// `center + radius e^{iθ}`, θ running from `theta0` to `theta1`.
    Arc {
        center: Complex<T>,
        radius: T,
        theta0: T,
        theta1: T,
    },
    /// `sign (√c cosh s) + i √c sinh s`, s running from `s0` to `s1`.
    Hyperbola { c: T, s0: T, s1: T, sign: T },
}

impl<T: Real> Segment<T> {
    /// Point and derivative at local parameter τ ∈ [0, 1].
    pub fn point(&self, tau: T) -> (Complex<T>, Complex<T>) {
        match *self {
            Segment::Line { from, to } => (from + (to - from) * tau, to - from),
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let th = theta0 + (theta1 - theta0) * tau;
                let e = Complex::new(th.cos(), th.sin());
                (
                    center + e * radius,
                    e * Complex::new(T::zero(), radius * (theta1 - theta0)),
                )
            }
            Segment::Hyperbola { c, s0, s1, sign } => {
                let s = s0 + (s1 - s0) * tau;
                let r = c.sqrt();
                let z = Complex::new(sign * r * s.cosh(), r * s.sinh());
                let dz = Complex::new(sign * r * s.sinh(), r * s.cosh()) * (s1 - s0);
                (z, dz)
            }
        }
    }

    pub fn start(&self) -> Complex<T> {
        self.point(T::zero()).0
    }

    pub fn end(&self) -> Complex<T> {
        self.point(T::one()).0
    }

    fn reflected(&self) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: -from, to: -to },
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => Segment::Arc {
                center: -center,
                radius,
                theta0: theta0 + T::PI(),
                theta1: theta1 + T::PI(),
            },
            Segment::Hyperbola { c, s0, s1, sign } => Segment::Hyperbola {
                c,
                s0: -s0,
                s1: -s1,
                sign: -sign,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourPath<T> {
    pub segments: Vec<Segment<T>>,
    pub closed: bool,
}

impl<T: Real> ContourPath<T> {
    pub fn start(&self) -> Complex<T> {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex<T> {
        self.segments[self.segments.len() - 1].end()
    }

    /// Largest gap between consecutive segments (and end-to-start when
    /// closed).
    pub fn max_gap(&self) -> T {
        let mut g = T::zero();
        for w in self.segments.windows(2) {
            g = g.max((w[0].end() - w[1].start()).norm());
        }
        if self.closed {
            g = g.max((self.end() - self.start()).norm());
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourKind<T> {
    HatRight,
    HatFull,
    HyperbolaRight,
    CircleArc { theta0: T, theta1: T },
}

/// `tan(3π/8) = 1 + √2`.
pub fn hat_slope<T: Real>() -> T {
    T::one() + T::SQRT_2()
}

/// Modulus of the hat corners, `c √(4 + 2√2)`.
pub fn corner_modulus<T: Real>(c: T) -> T {
    c * (T::lit(4.0) + T::lit(2.0) * T::SQRT_2()).sqrt()
}

/// Default piece length along rays: `min(1, |z|/10)`.
pub fn default_piece<T: Real>(r: T) -> T {
    (r / T::lit(10.0)).min(T::one())
}

// Splits the ray from modulus r0 to r1 (either order) along direction e.
fn ray_pieces<T: Real>(e: Complex<T>, r0: T, r1: T, piece: &dyn Fn(T) -> T) -> Vec<Segment<T>> {
    let (lo, hi) = (r0.min(r1), r0.max(r1));
    let mut radii = vec![lo];
    let mut r = lo;
    while r < hi {
        let step = piece(r).max(T::lit(1e-3));
        r = (r + step).min(hi);
        if hi - r < T::lit(1e-12) * hi {
            r = hi;
        }
        radii.push(r);
    }
    let mut segs: Vec<Segment<T>> = radii
        .windows(2)
        .map(|w| Segment::Line {
            from: e * w[0],
            to: e * w[1],
        })
        .collect();
    if r0 > r1 {
        segs.reverse();
        for s in segs.iter_mut() {
            if let Segment::Line { from, to } = s {
                std::mem::swap(from, to);
            }
        }
    }
    segs
}

/// Right hat contour, oriented upward, with rays truncated at |z| = R.
/// `piece(r)` gives the ray piece length at modulus r.
pub fn hat_right<T: Real>(c: T, big_r: T, piece: &dyn Fn(T) -> T) -> Result<ContourPath<T>> {
    if !(c > T::zero()) {
        return Err(Error::Geometry(format!("hat parameter c = {c} must be positive")));
    }
    let rc = corner_modulus(c);
    if big_r < rc {
        return Err(Error::Geometry(format!(
            "radius {big_r} below the hat corner modulus {rc}"
        )));
    }
    let th = T::lit(3.0) * T::PI() / T::lit(8.0);
    let up = Complex::new(th.cos(), th.sin());
    let down = up.conj();
    let top = Complex::new(c, c * hat_slope::<T>());
    let bottom = top.conj();

    let mut segs = ray_pieces(down, big_r, rc, piece);
    // snap the corner exactly onto the vertical segment
    if let Some(Segment::Line { to, .. }) = segs.last_mut() {
        *to = bottom;
    }
    let n_vert = ((top.im - bottom.im) / piece(rc).max(T::lit(1e-3))).ceil().to_usize().unwrap_or(1).max(1);
    for k in 0..n_vert {
        let a = T::lit(k as f64) / T::lit(n_vert as f64);
        let b = T::lit((k + 1) as f64) / T::lit(n_vert as f64);
        segs.push(Segment::Line {
            from: bottom + (top - bottom) * a,
            to: bottom + (top - bottom) * b,
        });
    }
    let mut upper = ray_pieces(up, rc, big_r, piece);
    if let Some(Segment::Line { from, .. }) = upper.first_mut() {
        *from = top;
    }
    segs.extend(upper);
    Ok(ContourPath {
        segments: segs,
        closed: false,
    })
}

/// Upper half of the right hat: from `c` up the vertical segment, then out
/// along the ray at 3π/8 to |z| = R. Used with conjugate symmetry.
pub fn hat_upper<T: Real>(c: T, big_r: T, piece: &dyn Fn(T) -> T) -> Result<ContourPath<T>> {
    let full = hat_right(c, big_r, piece)?;
    let top = Complex::new(c, c * hat_slope::<T>());
    let n_vert = (top.im / piece(c).max(T::lit(1e-3))).ceil().to_usize().unwrap_or(1).max(1);
    let mut segs: Vec<Segment<T>> = (0..n_vert)
        .map(|k| {
            let a = T::lit(k as f64) / T::lit(n_vert as f64);
            let b = T::lit((k + 1) as f64) / T::lit(n_vert as f64);
            Segment::Line {
                from: Complex::new(c, top.im * a),
                to: Complex::new(c, top.im * b),
            }
        })
        .collect();
    segs.extend(
        full.segments
            .into_iter()
            .filter(|s| s.start().im >= top.im - T::lit(1e-12) * (T::one() + top.im)),
    );
    Ok(ContourPath {
        segments: segs,
        closed: false,
    })
}

/// Arc `Ω_r(θ0, θ1)` around the origin, split into pieces of at most π/8.
pub fn arc<T: Real>(r: T, theta0: T, theta1: T) -> ContourPath<T> {
    let n = ((theta1 - theta0).abs() / (T::PI() / T::lit(8.0)))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let segments = (0..n)
        .map(|k| {
            let a = theta0 + (theta1 - theta0) * T::lit(k as f64 / n as f64);
            let b = theta0 + (theta1 - theta0) * T::lit((k + 1) as f64 / n as f64);
            Segment::Arc {
                center: Complex::new(T::zero(), T::zero()),
                radius: r,
                theta0: a,
                theta1: b,
            }
        })
        .collect();
    ContourPath {
        segments,
        closed: false,
    }
}

/// Closed contour: right hat, `Ω_r(3π/8, 5π/8)`, reflected left hat,
/// `Ω_r(11π/8, 13π/8)`; counterclockwise around the origin.
pub fn hat_full<T: Real>(c: T, big_r: T, piece: &dyn Fn(T) -> T) -> Result<ContourPath<T>> {
    let right = hat_right(c, big_r, piece)?;
    let pi8 = T::PI() / T::lit(8.0);
    let mut segs = right.segments.clone();
    segs.extend(arc(big_r, T::lit(3.0) * pi8, T::lit(5.0) * pi8).segments);
    segs.extend(right.segments.iter().map(|s| s.reflected()));
    segs.extend(arc(big_r, T::lit(11.0) * pi8, T::lit(13.0) * pi8).segments);
    Ok(ContourPath {
        segments: segs,
        closed: true,
    })
}

/// Right branch of `Re z² = c`, truncated at |z| = R, oriented upward, split
/// into pieces of width `d_sigma` in `σ = Im z²`.
pub fn hyperbola_right<T: Real>(c: T, big_r: T, d_sigma: T) -> Result<ContourPath<T>> {
    if !(c > T::zero()) {
        return Err(Error::Geometry(format!("hyperbola parameter c = {c} must be positive")));
    }
    if big_r * big_r <= c {
        return Err(Error::Geometry(format!(
            "radius {big_r} does not reach the hyperbola vertex {}",
            c.sqrt()
        )));
    }
    let sigma_max = (big_r.powi(4) - c * c).sqrt();
    Ok(hyperbola_sigma(c, sigma_max, d_sigma))
}

/// Right hyperbola branch over `|Im z²| ≤ sigma_max`.
pub fn hyperbola_sigma<T: Real>(c: T, sigma_max: T, d_sigma: T) -> ContourPath<T> {
    let n = (T::lit(2.0) * sigma_max / d_sigma).ceil().to_usize().unwrap_or(1).max(1);
    let s_of = |sigma: T| (sigma / c).asinh() / T::lit(2.0);
    let segments = (0..n)
        .map(|k| {
            let a = -sigma_max + T::lit(2.0) * sigma_max * T::lit(k as f64 / n as f64);
            let b = -sigma_max + T::lit(2.0) * sigma_max * T::lit((k + 1) as f64 / n as f64);
            Segment::Hyperbola {
                c,
                s0: s_of(a),
                s1: s_of(b),
                sign: T::one(),
            }
        })
        .collect();
    ContourPath {
        segments,
        closed: false,
    }
}

/// Builds one of the standard paths with default ray grading.
pub fn build_contour<T: Real>(kind: ContourKind<T>, c: T, big_r: T) -> Result<ContourPath<T>> {
    match kind {
        ContourKind::HatRight => hat_right(c, big_r, &default_piece),
        ContourKind::HatFull => hat_full(c, big_r, &default_piece),
        ContourKind::HyperbolaRight => hyperbola_right(c, big_r, T::lit(4.0)),
        ContourKind::CircleArc { theta0, theta1 } => Ok(arc(big_r, theta0, theta1)),
    }
}

/// Upper half `0 ≤ Im z² ≤ sigma_max` of the right branch, from the vertex
/// upward. Used with conjugate symmetry.
pub fn hyperbola_upper<T: Real>(c: T, sigma_max: T, d_sigma: T) -> ContourPath<T> {
    let n = (sigma_max / d_sigma).ceil().to_usize().unwrap_or(1).max(1);
    let s_of = |sigma: T| (sigma / c).asinh() / T::lit(2.0);
    let segments = (0..n)
        .map(|k| Segment::Hyperbola {
            c,
            s0: s_of(sigma_max * T::lit(k as f64 / n as f64)),
            s1: s_of(sigma_max * T::lit((k + 1) as f64 / n as f64)),
            sign: T::one(),
        })
        .collect();
    ContourPath {
        segments,
        closed: false,
    }
}

/// Smallest R on the decreasing branch with `e^{−(√2/2) t R²} R^g ≤ eps`.
pub fn truncation_radius<T: Real>(t: T, eps: T, growth_order: u32) -> T {
    let k = T::SQRT_2() / T::lit(2.0) * t;
    let g = T::lit(growth_order as f64);
    let f = |r: T| -k * r * r + g * r.max(T::min_positive_value()).ln() - eps.ln();
    let mut lo = (g / (T::lit(2.0) * k)).sqrt();
    let mut hi = lo.max(T::one());
    while f(hi) > T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
    }
    if f(lo) <= T::zero() {
        return lo;
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if f(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    hi
}

/// Nodes and weights (including dz/dτ) along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<Complex<T>>,
    pub weights: Vec<Complex<T>>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trapezoid rule on the full circle `|z − center| = r`.
    pub fn circle(center: Complex<T>, r: T, n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let dth = T::lit(2.0) * T::PI() / T::lit(n as f64);
        for k in 0..n {
            let th = dth * T::lit(k as f64);
            let e = Complex::new(th.cos(), th.sin());
            nodes.push(center + e * r);
            weights.push(e * Complex::new(T::zero(), r * dth));
        }
        QuadratureRule { nodes, weights }
    }
}

/// Gauss–Legendre with `nodes_per_segment` nodes on every segment.
pub fn contour_quadrature<T: Real>(path: &ContourPath<T>, nodes_per_segment: usize) -> QuadratureRule<T> {
    let gl = GaussLegendre::<T>::new(nodes_per_segment.max(1));
    let half = T::lit(0.5);
    let mut nodes = Vec::with_capacity(path.segments.len() * gl.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for seg in &path.segments {
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let (z, dz) = seg.point(half * (x + T::one()));
            nodes.push(z);
            weights.push(dz * (half * w));
        }
    }
    QuadratureRule { nodes, weights }
}

/// `Σ w_k f(z_k)`, summed left to right.
pub fn integrate<T: Real, F: FnMut(Complex<T>) -> Complex<T>>(
    rule: &QuadratureRule<T>,
    mut f: F,
) -> Result<Complex<T>> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (index, (&z, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                index,
                z: num_complex::Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()),
            });
        }
        acc = acc + w * v;
    }
    Ok(acc)
}
