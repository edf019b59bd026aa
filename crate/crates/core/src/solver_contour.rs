//! Solution for all `t > 0` from the Laplace transform in time.
//!
//! The time shifts turn the transformed boundary conditions into a 2×2
//! system for the endpoint values `p = z(0, λ)`, `q = z(1, λ)`, whose right
//! sides `A(λ)`, `B(λ)` only need the traces on `(0, ω]`. The transformed
//! solution is `z = ∫G2 φ + Q(x, λ, p, q)`, which inverts to
//! `u = φ + u1 + u2 + u3` with `u1`, `u2` on the hat and `u3` on the
//! hyperbola `Re λ² = c1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contours::{contour_quadrature, corner_modulus, hat_upper, hyperbola_upper, truncation_radius};
use crate::error::{Error, Result};
use crate::green::{green_kernel, q_function, KernelKind};
use crate::problem::ProblemSpec;
use crate::quadrature::gauss_legendre;
use crate::solver_residue::{check_compatible, hat_piece, Components, Method, SolutionGrid, TraceField};

type C64 = Complex64;

/// Endpoint values at a point: `[u(0, t), u(1, t)]`.
pub type BaseTrace = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

/// Both endpoint traces on `(0, Kω]`, built from the first segment by
/// `u(0, t+ω) = −δ0 u(1, t)` and `u(1, t+ω) = −u(0, t)/δ1`.
#[derive(Clone)]
pub struct ShiftedTraces {
    pub omega: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub segments: usize,
    /// Limits at `t = 0+`.
    pub start: [f64; 2],
    /// `jumps[k-1][s]`: right minus left limit of `u(s, ·)` at `t = kω`.
    pub jumps: Vec<[f64; 2]>,
    base: BaseTrace,
}

impl fmt::Debug for ShiftedTraces {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShiftedTraces")
            .field("omega", &self.omega)
            .field("segments", &self.segments)
            .field("start", &self.start)
            .field("jumps", &self.jumps)
            .finish()
    }
}

impl ShiftedTraces {
    /// `base` must be valid on `(0, ω]`; `start` holds its limits at `0+`.
    pub fn new(spec: &ProblemSpec, segments: usize, start: [f64; 2], base: BaseTrace) -> Result<Self> {
        if segments == 0 {
            return Err(Error::InvalidInput("at least one segment is needed".into()));
        }
        let mut tr = ShiftedTraces {
            omega: spec.omega,
            delta0: spec.delta0,
            delta1: spec.delta1,
            segments,
            start,
            jumps: Vec::new(),
            base,
        };
        tr.jumps = (1..segments)
            .map(|k| {
                let t = k as f64 * tr.omega;
                [0u8, 1].map(|s| tr.right_limit(s, t) - tr.value(s, t))
            })
            .collect();
        Ok(tr)
    }

    fn reduce(&self, s: u8, t: f64, right: bool) -> f64 {
        let w = self.omega;
        let r = t / w;
        let near = (r - r.round()).abs() <= 1e-12 * r.max(1.0);
        let mut k = if near {
            let n = r.round() as i64;
            if right { n } else { n - 1 }
        } else {
            r.floor() as i64
        }
        .max(0) as usize;
        let mut tau = t - k as f64 * w;
        if !right && near && k == 0 {
            tau = t;
        }
        let (mut side, mut factor) = (s, 1.0);
        while k > 0 {
            if side == 0 {
                factor *= -self.delta0;
                side = 1;
            } else {
                factor *= -1.0 / self.delta1;
                side = 0;
            }
            k -= 1;
        }
        let v = if right && near || tau <= 0.0 {
            self.start[side as usize]
        } else {
            (self.base)(tau)[side as usize]
        };
        factor * v
    }

    /// `u(s, t)`, left-continuous at the segment boundaries.
    pub fn value(&self, s: u8, t: f64) -> f64 {
        self.reduce(s, t, false)
    }

    /// `u(s, t+)`.
    pub fn right_limit(&self, s: u8, t: f64) -> f64 {
        self.reduce(s, t, true)
    }

    /// Right end of the covered window.
    pub fn t_end(&self) -> f64 {
        self.segments as f64 * self.omega
    }
}

/// Traces from the hat-contour form on `(0, ω]`, extended to `K` segments.
/// Below the field's `t_min` the hat is short by an `O(R^-2)` tail, which is
/// harmless inside the time integrals.
pub fn extend_traces(spec: &ProblemSpec, field: TraceField, segments: usize) -> Result<ShiftedTraces> {
    let start = [spec.phi.value(0.0f64), spec.phi.value(1.0f64)];
    let base: BaseTrace = Arc::new(move |t: f64| {
        let (g0, g1) = field.eval(t);
        [g0, g1]
    });
    ShiftedTraces::new(spec, segments, start, base)
}

/// Trace samples on Gauss–Legendre panels of `(0, ω)`, resolving
/// `e^{λ²(ω−t)}` for `|Im λ²| ≤ sigma_max`.
#[derive(Debug, Clone)]
pub struct LaplaceData {
    pub omega: f64,
    pub delta1: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    g: [Vec<f64>; 2],
}

impl LaplaceData {
    pub fn new(traces: &ShiftedTraces, sigma_max: f64) -> Self {
        let w = traces.omega;
        let panels = ((w * sigma_max / 3.0).ceil() as usize).max(8);
        let gl = gauss_legendre(16);
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        for k in 0..panels {
            let (a, b) = (w * k as f64 / panels as f64, w * (k + 1) as f64 / panels as f64);
            for (t, wt) in gl.mapped(a, b) {
                nodes.push(t);
                weights.push(wt);
            }
        }
        let g = [0u8, 1].map(|s| nodes.iter().map(|&t| traces.value(s, t)).collect());
        LaplaceData {
            omega: w,
            delta1: traces.delta1,
            nodes,
            weights,
            g,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `(A(λ), B(λ))`.
    pub fn transforms(&self, lambda: C64) -> (C64, C64) {
        let s = lambda * lambda;
        let (mut a, mut b) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for ((&t, &w), (g0, g1)) in self.nodes.iter().zip(&self.weights).zip(self.g[0].iter().zip(&self.g[1])) {
            let e = (s * (self.omega - t)).exp() * w;
            a += e * g0;
            b += e * g1;
        }
        (a, b * self.delta1)
    }
}

/// `A(λ) = e^{λ²ω}∫0^ω e^{−λ²t}u(0,t)dt`, `B(λ) = δ1 e^{λ²ω}∫0^ω e^{−λ²t}u(1,t)dt`.
pub fn laplace_transforms(traces: &ShiftedTraces, lambda: C64) -> (C64, C64) {
    let s = lambda * lambda;
    LaplaceData::new(traces, s.im.abs().max(s.re.abs())).transforms(lambda)
}

/// Endpoint transforms at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqData {
    pub lambda: C64,
    pub a: C64,
    pub b: C64,
    pub p: C64,
    pub q: C64,
    /// `(e^{λ²ω}B − A)/(δ1 e^{2λ²ω} − δ0)`.
    pub q_closed: C64,
}

/// Solves `e^{λ²ω}p + δ0 q = A`, `p + δ1 e^{λ²ω} q = B`.
pub fn pq_values(spec: &ProblemSpec, lambda: C64, a: C64, b: C64) -> Result<PqData> {
    let e = (lambda * lambda * spec.omega).exp();
    let (d0, d1) = (spec.delta0, spec.delta1);
    let den = e * e * d1 - d0;
    let scale = d0.abs().max((e * e * d1).norm());
    if !(den.norm() > 1e-12 * scale) {
        return Err(Error::ContourPlacement(format!(
            "shift determinant {:.3e} at lambda = {lambda}",
            den.norm()
        )));
    }
    // direct elimination on the system, pivoting on the larger first column entry
    let m = [[e, C64::new(d0, 0.0)], [C64::new(1.0, 0.0), e * d1]];
    let rhs = [a, b];
    let (r0, r1) = if m[0][0].norm() >= 1.0 { (0, 1) } else { (1, 0) };
    let f = m[r1][0] / m[r0][0];
    let m11 = m[r1][1] - f * m[r0][1];
    let q = (rhs[r1] - f * rhs[r0]) / m11;
    let p = (rhs[r0] - m[r0][1] * q) / m[r0][0];
    Ok(PqData {
        lambda,
        a,
        b,
        p,
        q,
        q_closed: (e * b - a) / den,
    })
}

/// Hyperbola parameter: right of the shift-determinant zeros under either
/// reading of the bound and of the Dirichlet spectrum, plus one.
pub fn default_c1(spec: &ProblemSpec) -> f64 {
    let l = (spec.delta0 / spec.delta1).abs().ln();
    [0.0, l, l / (2.0 * spec.omega), spec.c_max()]
        .into_iter()
        .fold(0.0, f64::max)
        + 1.0
}

/// Window on `Im λ²/σmax`: `½ erfc(9(u − ½))`. Its time-domain kernel has
/// Gaussian tails, so truncation only smears the traces' jumps over
/// `~18/σmax`.
pub fn taper(u: f64) -> f64 {
    0.5 * libm::erfc(TAPER_SHARPNESS * (u - 0.5))
}

const TAPER_SHARPNESS: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    pub eps: f64,
    /// Number of ω-segments accepted in the t-grid.
    pub k_segments: usize,
    pub c1: Option<f64>,
    /// Radius of the hat contour.
    pub hat_radius: Option<f64>,
    /// Truncation of `Im λ²` on the hyperbola.
    pub sigma_max: Option<f64>,
    pub allow_incompatible: bool,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions {
            eps: 1e-10,
            k_segments: 4,
            c1: None,
            hat_radius: None,
            sigma_max: None,
            allow_incompatible: false,
        }
    }
}

/// Hat nodes carrying `w λ^{-1}∫G2 Mφ` and `w λ^{-1} Q(x, λ, φ(0), φ(1))`.
#[derive(Debug, Clone)]
pub struct DirichletHat {
    pub c: f64,
    pub radius: f64,
    pub xs: Vec<f64>,
    pub nodes: Vec<C64>,
    u1k: Vec<Vec<C64>>,
    u2k: Vec<Vec<C64>>,
}

impl DirichletHat {
    pub fn new(spec: &ProblemSpec, c: f64, xs: &[f64], radius: f64, piece: &dyn Fn(f64) -> f64) -> Result<Self> {
        let radius = radius.max(corner_modulus(c) * 1.01);
        let path = hat_upper(c, radius, piece)?;
        let rule = contour_quadrature(&path, 16);
        let (p0, p1) = (spec.phi.value(0.0f64), spec.phi.value(1.0f64));
        let pq = (C64::new(p0, 0.0), C64::new(p1, 0.0));
        let lphi = |x: f64| spec.l_phi(x);
        let rows: Vec<(Vec<C64>, Vec<C64>)> = rule
            .nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(&z, &w)| {
                let k = green_kernel(spec, z, KernelKind::Dirichlet)?;
                let f = w / z;
                let u1 = k.apply(lphi, xs).iter().map(|a| a.value * f).collect();
                let qf = k.q_function(pq.0, pq.1)?;
                let u2 = xs.iter().map(|&x| qf.eval(x).0 * f).collect();
                Ok((u1, u2))
            })
            .collect::<Result<_>>()?;
        let (u1k, u2k) = rows.into_iter().unzip();
        Ok(DirichletHat {
            c,
            radius,
            xs: xs.to_vec(),
            nodes: rule.nodes,
            u1k,
            u2k,
        })
    }

    fn sum(&self, rows: &[Vec<C64>], t: f64) -> Vec<f64> {
        let mut acc = vec![C64::new(0.0, 0.0); self.xs.len()];
        for (z, row) in self.nodes.iter().zip(rows) {
            let e = (z * z * t).exp();
            for (a, k) in acc.iter_mut().zip(row) {
                *a += e * k;
            }
        }
        acc.iter().map(|a| 2.0 / std::f64::consts::PI * a.im).collect()
    }

    pub fn u1(&self, t: f64) -> Vec<f64> {
        self.sum(&self.u1k, t)
    }

    pub fn u2(&self, t: f64) -> Vec<f64> {
        self.sum(&self.u2k, t).into_iter().map(|v| -v).collect()
    }
}

/// Hat radius for `u2(x, 0)`: `Q` decays like `e^{−Re λ·d}` with `d` the
/// distance of x to the boundary, and `Re λ = |λ| cos(3π/8)` on the rays.
pub fn u2_initial_radius(xs: &[f64], eps: f64) -> f64 {
    let d = xs.iter().map(|&x| x.min(1.0 - x)).fold(f64::INFINITY, f64::min);
    (1.0 / eps).ln() / ((3.0 * std::f64::consts::PI / 8.0).cos() * d.max(1e-3))
}

/// Hyperbola nodes carrying `w λ Q(x, λ, p, q)` with the taper applied.
#[derive(Debug, Clone)]
pub struct HyperbolaField {
    pub c1: f64,
    pub sigma_max: f64,
    pub xs: Vec<f64>,
    pub nodes: Vec<C64>,
    /// Largest `|q − q_closed| / |q|` over the nodes.
    pub q_mismatch: f64,
    rows: Vec<Vec<C64>>,
}

impl HyperbolaField {
    pub fn new(
        spec: &ProblemSpec,
        traces: &ShiftedTraces,
        c1: f64,
        sigma_max: f64,
        t_max: f64,
        xs: &[f64],
    ) -> Result<Self> {
        let d_sigma = 6.0 / (t_max + 2.0 * spec.omega);
        let path = hyperbola_upper(c1, sigma_max, d_sigma);
        let rule = contour_quadrature(&path, 16);
        let data = LaplaceData::new(traces, sigma_max + c1);
        let rows: Vec<(Vec<C64>, f64)> = rule
            .nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(&z, &w)| {
                let (a, b) = data.transforms(z);
                let pq = pq_values(spec, z, a, b)?;
                let qf = q_function(spec, z, pq.p, pq.q)?;
                let f = w * z * taper((z * z).im / sigma_max);
                let row = xs.iter().map(|&x| qf.eval(x).0 * f).collect();
                let mis = (pq.q - pq.q_closed).norm() / pq.q.norm().max(1e-300);
                Ok((row, mis))
            })
            .collect::<Result<_>>()?;
        let q_mismatch = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        Ok(HyperbolaField {
            c1,
            sigma_max,
            xs: xs.to_vec(),
            nodes: rule.nodes,
            q_mismatch,
            rows: rows.into_iter().map(|r| r.0).collect(),
        })
    }

    pub fn u3(&self, t: f64) -> Vec<f64> {
        let mut acc = vec![C64::new(0.0, 0.0); self.xs.len()];
        for (z, row) in self.nodes.iter().zip(&self.rows) {
            let e = (z * z * t).exp();
            for (a, k) in acc.iter_mut().zip(row) {
                *a += e * k;
            }
        }
        acc.iter().map(|a| 2.0 / std::f64::consts::PI * a.im).collect()
    }
}

/// Default hyperbola truncation: the growth-order-1 radius at `t_min`, or
/// more when a grid time sits close to a segment boundary `kω` where the
/// traces jump. `gap` is that distance.
pub fn default_sigma_max(t_min: f64, gap: f64, eps: f64) -> f64 {
    let r = truncation_radius(t_min, eps, 1);
    let smear = 4.0 * TAPER_SHARPNESS * (1.0 / eps).ln().sqrt() / gap;
    (r * r).max(smear)
}

/// Distance from the grid to the nearest `kω`, ignoring times on it.
pub fn jump_gap(ts: &[f64], omega: f64) -> f64 {
    ts.iter()
        .map(|&t| {
            let d = (t - (t / omega).round() * omega).abs();
            if d <= 1e-12 * omega { f64::INFINITY } else { d }
        })
        .fold(f64::INFINITY, f64::min)
        .min(omega)
        .max(1e-3 * omega)
}

pub fn solve_contour(spec: &ProblemSpec, xs: &[f64], ts: &[f64], opts: ContourOptions) -> Result<SolutionGrid> {
    let t_end = opts.k_segments as f64 * spec.omega;
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && *t <= t_end * (1.0 + 1e-12))) {
        return Err(Error::InvalidInput(format!("times must lie in (0, {t_end}]")));
    }
    check_compatible(spec, opts.allow_incompatible)?;
    let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().cloned().fold(0.0, f64::max);

    let trace_min = 1e-3 * spec.omega;
    let field = TraceField::new(spec, trace_min, spec.omega, opts.eps)?;
    let traces = extend_traces(spec, field, opts.k_segments)?;

    let c1 = opts.c1.unwrap_or_else(|| default_c1(spec));
    let radius = opts.hat_radius.unwrap_or_else(|| truncation_radius(t_min, opts.eps, 0));
    let piece = hat_piece(spec.phase_length(), t_max, opts.eps);
    let sigma_max = opts
        .sigma_max
        .unwrap_or_else(|| default_sigma_max(t_min, jump_gap(ts, spec.omega), opts.eps));

    let build = |c: f64| -> Result<(DirichletHat, HyperbolaField)> {
        let hat = DirichletHat::new(spec, c, xs, radius, &piece)?;
        let hyp = HyperbolaField::new(spec, &traces, c, sigma_max, t_max, xs)?;
        Ok((hat, hyp))
    };
    let (c1, (hat, hyp)) = match build(c1) {
        Ok(v) => (c1, v),
        Err(Error::SingularParameter { .. }) | Err(Error::ContourPlacement(_)) => (c1 + 1.0, build(c1 + 1.0)?),
        Err(e) => return Err(e),
    };

    let phi: Vec<f64> = xs.iter().map(|&x| spec.phi.value(x)).collect();
    let mut comps = Components {
        u1: Vec::new(),
        u2: Vec::new(),
        u3: Vec::new(),
    };
    let mut values = Vec::with_capacity(ts.len());
    for &t in ts {
        let (u1, u2, u3) = (hat.u1(t), hat.u2(t), hyp.u3(t));
        values.push((0..xs.len()).map(|i| phi[i] + u1[i] + u2[i] + u3[i]).collect());
        comps.u1.push(u1);
        comps.u2.push(u2);
        comps.u3.push(u3);
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("c1".into(), format!("{c1:?}"));
    metadata.insert("hat_radius".into(), format!("{:?}", hat.radius));
    metadata.insert("hat_nodes".into(), hat.nodes.len().to_string());
    metadata.insert("sigma_max".into(), format!("{sigma_max:?}"));
    metadata.insert("hyperbola_nodes".into(), hyp.nodes.len().to_string());
    metadata.insert("k_segments".into(), opts.k_segments.to_string());
    metadata.insert("eps".into(), format!("{:?}", opts.eps));
    metadata.insert("q_mismatch".into(), format!("{:.3e}", hyp.q_mismatch));
    Ok(SolutionGrid {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        values,
        method: Method::ExistenceFormula,
        metadata,
        components: Some(comps),
        tail: 0.0,
        imag_max: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0(phi: &str) -> ProblemSpec {
        ProblemSpec::reference(phi).unwrap()
    }

    #[test]
    fn pq_examples() {
        let spec = p0("cos(2*pi*x)");
        // e^{λ²ω} = 2
        let lambda = C64::new((2f64.ln() / spec.omega).sqrt(), 0.0);
        let z = C64::new(0.0, 0.0);
        let r = pq_values(&spec, lambda, z, z).unwrap();
        assert_eq!((r.p, r.q), (z, z));
        let r = pq_values(&spec, lambda, C64::new(1.0, 0.0), z).unwrap();
        assert!((r.p - 2.0 / 3.0).norm() < 1e-14 && (r.q + 1.0 / 3.0).norm() < 1e-14);
        assert!((r.q_closed + 1.0 / 3.0).norm() < 1e-14);
    }

    #[test]
    fn shift_determinant_zero_is_rejected() {
        let spec = p0("cos(2*pi*x)");
        // δ1 e^{2λ²ω} = δ0 at λ² = iπ/ω
        let lambda = (C64::new(0.0, std::f64::consts::PI / spec.omega)).sqrt();
        let one = C64::new(1.0, 0.0);
        assert!(matches!(pq_values(&spec, lambda, one, one), Err(Error::ContourPlacement(_))));
    }

    #[test]
    fn taper_is_a_smooth_step() {
        assert!(1.0 - taper(0.0) < 1e-10);
        assert!(taper(1.0) < 1e-10);
        assert!((taper(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = taper(k as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn gap_ignores_grid_points_on_boundaries() {
        assert!((jump_gap(&[0.05, 0.25, 0.5], 0.5) - 0.05).abs() < 1e-15);
        assert!((jump_gap(&[0.3, 0.55], 0.5) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn c1_covers_both_readings() {
        let mut spec = p0("cos(2*pi*x)");
        assert_eq!(default_c1(&spec), 1.0);
        spec.delta0 = std::f64::consts::E.powi(2);
        spec.omega = 0.25;
        assert!((default_c1(&spec) - 5.0).abs() < 1e-12);
    }
}
