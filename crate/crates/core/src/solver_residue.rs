//! Residue series and the equivalent hat-contour form of the solution on
//! `(0, ω]`, projection operators and boundary traces.
//!
//! Eigenvalues come in orbits `{μ, −μ, μ̄, −μ̄}`. The integrand `μ^{2s+1}G1`
//! is odd in μ and conjugate-symmetric, so the residue at `−μ` equals the one
//! at `μ` and the residue at `μ̄` is its conjugate; an orbit contributes
//! `|orbit| · Re R` where `R` is the residue at the representative.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::contours::{contour_quadrature, hat_upper, truncation_radius, QuadratureRule};
use crate::error::{Error, Result};
use crate::green::{green_kernel, Applied, KernelKind};
use crate::problem::ProblemSpec;
use crate::spectrum::{locate_eigenvalues, EigenvalueRecord, SpectrumMeta};

type C64 = Complex64;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Trapezoid nodes on each residue circle.
pub const CIRCLE_NODES: usize = 64;
/// Tolerance on the boundary forms of φ accepted by the solvers.
pub const COMPATIBILITY_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Residue,
    SpectralContour,
    ExistenceFormula,
    FiniteDifference,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Residue => "residue",
            Method::SpectralContour => "spectral-contour",
            Method::ExistenceFormula => "existence-formula",
            Method::FiniteDifference => "finite-difference",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-component fields of the existence formula.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Components {
    pub u1: Vec<Vec<f64>>,
    pub u2: Vec<Vec<f64>>,
    pub u3: Vec<Vec<f64>>,
}

/// `values[j][i] = u(xs[i], ts[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub method: Method,
    pub metadata: BTreeMap<String, String>,
    pub components: Option<Components>,
    /// Size of the last included term (series) or 0 (contours).
    pub tail: f64,
    /// Largest discarded imaginary part.
    pub imag_max: f64,
}

impl SolutionGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j][i]
    }

    /// Row of values at time index j.
    pub fn slice(&self, j: usize) -> &[f64] {
        &self.values[j]
    }
}

/// One orbit of eigenvalues under negation and conjugation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orbit {
    /// Member in the closed first quadrant.
    pub representative: C64,
    /// Number of distinct members: 1 (origin), 2 or 4.
    pub members: usize,
    pub multiplicity: u32,
    pub radius: f64,
}

fn same(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm())
}

fn orbit_members(mu: C64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(4);
    for z in [mu, -mu, mu.conj(), -mu.conj()] {
        if !out.iter().any(|w| same(*w, z)) {
            out.push(z);
        }
    }
    out
}

/// Groups records into orbits, in order of first appearance; orbits with a
/// member missing from `records` are dropped.
pub fn group_orbits(records: &[EigenvalueRecord]) -> Vec<Orbit> {
    let mut out: Vec<Orbit> = Vec::new();
    for r in records {
        let rep = C64::new(r.value.re.abs(), r.value.im.abs());
        if out.iter().any(|o| same(o.representative, rep)) {
            continue;
        }
        let members = orbit_members(rep);
        let complete = members.iter().all(|m| records.iter().any(|q| same(q.value, *m)));
        if complete {
            out.push(Orbit {
                representative: rep,
                members: members.len(),
                multiplicity: r.multiplicity,
                radius: r.radius,
            });
        }
    }
    out
}

/// First `n_pairs` orbits (ascending modulus) plus the origin, if it is an
/// eigenvalue.
#[derive(Debug, Clone)]
pub struct OrbitSet {
    pub orbits: Vec<Orbit>,
    pub origin: Option<Orbit>,
    pub meta: SpectrumMeta,
}

pub fn locate_orbits(spec: &ProblemSpec, n_pairs: usize) -> Result<OrbitSet> {
    let mut count = 2 * n_pairs.max(1) + 2;
    loop {
        let (records, meta) = locate_eigenvalues(spec, count)?;
        let mut orbits = group_orbits(&records);
        if orbits.len() >= n_pairs || meta.incomplete {
            orbits.truncate(n_pairs);
            let origin = meta.origin.map(|o| Orbit {
                representative: C64::new(0.0, 0.0),
                members: 1,
                multiplicity: o.multiplicity,
                radius: o.radius,
            });
            return Ok(OrbitSet { orbits, origin, meta });
        }
        count = count + count / 2 + 4;
    }
}

/// `∫G1(x, ξ, z) f(ξ) dξ` and its x-derivative on a residue circle.
#[derive(Debug, Clone)]
pub struct CircleSamples {
    pub orbit: Orbit,
    pub nodes: Vec<C64>,
    /// `dz / (2πi)` per node.
    pub weights: Vec<C64>,
    /// `[node][x]`
    pub applied: Vec<Vec<Applied>>,
}

fn apply_on_nodes<F>(spec: &ProblemSpec, nodes: &[C64], f: &F, xs: &[f64]) -> Result<Vec<Vec<Applied>>>
where
    F: Fn(f64) -> f64 + Sync,
{
    apply_kind_on_nodes(spec, KernelKind::Nonlocal, nodes, f, xs)
}

pub(crate) fn apply_kind_on_nodes<F>(
    spec: &ProblemSpec,
    kind: KernelKind,
    nodes: &[C64],
    f: &F,
    xs: &[f64],
) -> Result<Vec<Vec<Applied>>>
where
    F: Fn(f64) -> f64 + Sync,
{
    nodes
        .par_iter()
        .map(|&z| Ok(green_kernel(spec, z, kind)?.apply(f, xs)))
        .collect()
}

pub fn circle_samples<F>(spec: &ProblemSpec, orbit: Orbit, f: &F, xs: &[f64]) -> Result<CircleSamples>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(orbit.radius > 1e-6) {
        return Err(Error::RadiusSelection {
            center: orbit.representative,
            reason: format!("radius {} too small", orbit.radius),
        });
    }
    let rule = QuadratureRule::circle(orbit.representative, orbit.radius, CIRCLE_NODES);
    let weights = rule.weights.iter().map(|w| w / C64::new(0.0, TAU)).collect();
    let applied = apply_on_nodes(spec, &rule.nodes, f, xs)?;
    Ok(CircleSamples {
        orbit,
        nodes: rule.nodes,
        weights,
        applied,
    })
}

impl CircleSamples {
    /// `res μ ↦ g(μ) ∫G1 f` at the representative: (values, x-derivatives).
    pub fn residue<G: Fn(C64) -> C64>(&self, g: G) -> (Vec<C64>, Vec<C64>) {
        let nx = self.applied.first().map_or(0, |a| a.len());
        let mut v = vec![C64::new(0.0, 0.0); nx];
        let mut d = vec![C64::new(0.0, 0.0); nx];
        for ((z, w), row) in self.nodes.iter().zip(&self.weights).zip(&self.applied) {
            let c = w * g(*z);
            for (i, a) in row.iter().enumerate() {
                v[i] += c * a.value;
                d[i] += c * a.dx;
            }
        }
        (v, d)
    }

    /// Orbit sum of the residue of `g(μ)∫G1 f`; `g` must be odd in μ with
    /// real Taylor coefficients. Returns (values, imaginary defect).
    pub fn orbit_sum<G: Fn(C64) -> C64>(&self, g: G) -> (Vec<f64>, f64) {
        let (v, _) = self.residue(g);
        let m = self.orbit.members as f64;
        let imag = if self.orbit.members <= 2 {
            v.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
        } else {
            0.0
        };
        (v.iter().map(|z| m * z.re).collect(), m * imag)
    }

    /// Orbit sum of the x-derivative of the same residue.
    pub fn orbit_sum_dx<G: Fn(C64) -> C64>(&self, g: G) -> Vec<f64> {
        let (_, d) = self.residue(g);
        let m = self.orbit.members as f64;
        d.iter().map(|z| m * z.re).collect()
    }

    /// `A_s[f]` at the representative: residue of `μ^{2s+1}∫G1 f`.
    pub fn projection(&self, s: u32) -> Vec<C64> {
        self.residue(|z| z.powu(2 * s + 1)).0
    }

    /// Orbit contribution of `res μ e^{μ²t}∫G1 f`.
    pub fn evolve(&self, t: f64) -> (Vec<f64>, f64) {
        self.orbit_sum(|z| z * (z * z * t).exp())
    }

    /// `Σ_k C(χ,k)(−μν²)^{χ−k} A_k`, which vanishes at a pole of order χ.
    pub fn closure_residual(&self) -> f64 {
        let mu2 = self.orbit.representative * self.orbit.representative;
        let chi = self.orbit.multiplicity;
        let (v, _) = self.residue(|z| z * (z * z - mu2).powu(chi));
        let scale = self.projection(0).iter().map(|z| z.norm()).fold(1e-300, f64::max);
        v.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale.max(1.0)
    }
}

/// A projection field `f_νs` at one eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionField {
    pub value: C64,
    pub s: u32,
    pub xs: Vec<f64>,
    pub values: Vec<C64>,
    /// Boundary forms of the field.
    pub l2: C64,
    pub l3: C64,
}

/// `res_{μν} μ^{2s+1} ∫G1(x, ξ, μ) f(ξ) dξ` on `xs`.
pub fn a_operator<F>(spec: &ProblemSpec, record: &EigenvalueRecord, s: u32, f: &F, xs: &[f64]) -> Result<ProjectionField>
where
    F: Fn(f64) -> f64 + Sync,
{
    let orbit = Orbit {
        representative: record.value,
        members: 1,
        multiplicity: record.multiplicity,
        radius: record.radius,
    };
    let mut pts = xs.to_vec();
    pts.extend([0.0, 1.0]);
    let cs = circle_samples(spec, orbit, f, &pts)?;
    let (v, d) = cs.residue(|z| z.powu(2 * s + 1));
    let n = xs.len();
    Ok(ProjectionField {
        value: record.value,
        s,
        xs: xs.to_vec(),
        values: v[..n].to_vec(),
        l2: v[n] * spec.alpha0 + v[n + 1] * spec.beta0,
        l3: d[n] * spec.alpha1 + d[n + 1] * spec.beta1,
    })
}

/// Circle data for the origin (if an eigenvalue) and every orbit.
#[derive(Debug, Clone)]
pub struct ResidueSeries {
    pub xs: Vec<f64>,
    pub origin: Option<CircleSamples>,
    pub groups: Vec<CircleSamples>,
}

pub fn residue_series<F>(spec: &ProblemSpec, set: &OrbitSet, f: &F, xs: &[f64]) -> Result<ResidueSeries>
where
    F: Fn(f64) -> f64 + Sync,
{
    let origin = set.origin.map(|o| circle_samples(spec, o, f, xs)).transpose()?;
    let groups = set
        .orbits
        .iter()
        .map(|o| circle_samples(spec, *o, f, xs))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidueSeries {
        xs: xs.to_vec(),
        origin,
        groups,
    })
}

impl ResidueSeries {
    fn sum<G: Fn(&CircleSamples) -> (Vec<f64>, f64)>(&self, n: usize, g: G) -> (Vec<f64>, f64, f64) {
        let mut acc = vec![0.0; self.xs.len()];
        let mut imag: f64 = 0.0;
        let mut last = 0.0;
        for cs in self.origin.iter().chain(self.groups.iter().take(n)) {
            let (v, im) = g(cs);
            imag = imag.max(im);
            last = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
        (acc, imag, last)
    }

    /// Σ of `f_ν0` over the origin and the first n orbits.
    pub fn partial_sum(&self, n: usize) -> Vec<f64> {
        self.sum(n, |cs| cs.orbit_sum(|z| z)).0
    }

    /// `Σ res μ e^{μ²t} ∫G1 f` over the origin and the first n orbits:
    /// (values, imaginary defect, size of the last term).
    pub fn solution(&self, n: usize, t: f64) -> (Vec<f64>, f64, f64) {
        self.sum(n, |cs| cs.evolve(t))
    }

    /// x-derivative of [`solution`](Self::solution).
    pub fn solution_dx(&self, n: usize, t: f64) -> Vec<f64> {
        self.sum(n, |cs| (cs.orbit_sum_dx(|z| z * (z * z * t).exp()), 0.0)).0
    }
}

/// Boundary forms `(l2 u, l3 u)` of the residue solution at each time.
pub fn residue_boundary_forms(spec: &ProblemSpec, ts: &[f64], n_pairs: usize) -> Result<Vec<(f64, f64)>> {
    check_times(spec, ts)?;
    let set = locate_orbits(spec, n_pairs)?;
    let phi = |x: f64| spec.phi.value(x);
    let series = residue_series(spec, &set, &phi, &[0.0, 1.0])?;
    Ok(ts
        .iter()
        .map(|&t| {
            let (v, _, _) = series.solution(n_pairs, t);
            let d = series.solution_dx(n_pairs, t);
            (
                spec.alpha0 * v[0] + spec.beta0 * v[1],
                spec.alpha1 * d[0] + spec.beta1 * d[1],
            )
        })
        .collect())
}

/// Sup-norm distance of the partial sum from f, per requested N.
pub fn expansion_partial_sum<F>(spec: &ProblemSpec, f: &F, n_pairs: usize, xs: &[f64]) -> Result<(Vec<f64>, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    let set = locate_orbits(spec, n_pairs)?;
    let series = residue_series(spec, &set, f, xs)?;
    let values = series.partial_sum(n_pairs);
    let dist = values
        .iter()
        .zip(xs)
        .map(|(v, x)| (v - f(*x)).abs())
        .fold(0.0, f64::max);
    Ok((values, dist))
}

pub(crate) fn check_compatible(spec: &ProblemSpec, allow: bool) -> Result<()> {
    let (r2, r3) = spec.compatibility_residuals();
    if !allow && (r2.abs() > COMPATIBILITY_LIMIT || r3.abs() > COMPATIBILITY_LIMIT) {
        return Err(Error::IncompatibleInitialData(format!(
            "boundary forms of phi are ({r2:.3e}, {r3:.3e})"
        )));
    }
    Ok(())
}

fn check_times(spec: &ProblemSpec, ts: &[f64]) -> Result<()> {
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && *t <= spec.omega * (1.0 + 1e-12))) {
        return Err(Error::InvalidInput(format!(
            "times must lie in (0, {}]",
            spec.omega
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidueForm {
    /// Sum of residues over the located orbits.
    Series,
    /// φ plus the hat-contour integral.
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueOptions {
    pub form: ResidueForm,
    pub n_pairs: usize,
    /// Truncation target for contour integrals.
    pub eps: f64,
    pub allow_incompatible: bool,
}

impl Default for ResidueOptions {
    fn default() -> Self {
        ResidueOptions {
            form: ResidueForm::Series,
            n_pairs: 20,
            eps: 1e-12,
            allow_incompatible: false,
        }
    }
}

pub fn solve_residue(spec: &ProblemSpec, xs: &[f64], ts: &[f64], opts: ResidueOptions) -> Result<SolutionGrid> {
    check_times(spec, ts)?;
    check_compatible(spec, opts.allow_incompatible)?;
    let mut metadata = BTreeMap::new();
    match opts.form {
        ResidueForm::Series => {
            let set = locate_orbits(spec, opts.n_pairs)?;
            let phi = |x: f64| spec.phi.value(x);
            let series = residue_series(spec, &set, &phi, xs)?;
            let mut values = Vec::with_capacity(ts.len());
            let (mut imag, mut tail): (f64, f64) = (0.0, 0.0);
            for &t in ts {
                let (v, im, last) = series.solution(opts.n_pairs, t);
                imag = imag.max(im);
                tail = tail.max(last);
                values.push(v);
            }
            metadata.insert("form".into(), "series".into());
            metadata.insert("n_pairs".into(), set.orbits.len().to_string());
            metadata.insert("circle_nodes".into(), CIRCLE_NODES.to_string());
            metadata.insert("origin".into(), set.origin.is_some().to_string());
            metadata.insert("spectrum_incomplete".into(), set.meta.incomplete.to_string());
            Ok(SolutionGrid {
                xs: xs.to_vec(),
                ts: ts.to_vec(),
                values,
                method: Method::Residue,
                metadata,
                components: None,
                tail,
                imag_max: imag,
            })
        }
        ResidueForm::Contour => {
            let h = contour_height(spec)?;
            let hat = HatField::new(spec, h, xs, ts, opts.eps)?;
            let values = ts.iter().map(|&t| hat.eval(t)).collect();
            metadata.insert("form".into(), "contour".into());
            metadata.insert("hat_c".into(), format!("{h:?}"));
            metadata.insert("radius".into(), format!("{:?}", hat.radius));
            metadata.insert("nodes".into(), hat.nodes.len().to_string());
            metadata.insert("eps".into(), format!("{:?}", opts.eps));
            Ok(SolutionGrid {
                xs: xs.to_vec(),
                ts: ts.to_vec(),
                values,
                method: Method::SpectralContour,
                metadata,
                components: None,
                tail: 0.0,
                imag_max: 0.0,
            })
        }
    }
}

/// Hat parameter: empirical strip half-width plus 0.5.
pub fn contour_height(spec: &ProblemSpec) -> Result<f64> {
    let (_, meta) = locate_eigenvalues(spec, 10)?;
    Ok(meta.h + 0.5)
}

/// Piece length along the hat: a few radians of phase per piece, counting
/// the oscillation of the kernel (`~L`) and of `e^{μ²t}` for the largest t
/// where the integrand is still above eps.
pub fn hat_piece(l: f64, t_max: f64, eps: f64) -> impl Fn(f64) -> f64 {
    let log_eps = (1.0 / eps).ln();
    move |r: f64| {
        let time = (std::f64::consts::SQRT_2 * r * t_max).min(2.0 * log_eps / r.max(1e-3));
        6.0 / (1.0 + l + time)
    }
}

/// `φ(x) + (1/πi)∫_hat μ^{-1} e^{μ²t} ∫G1(x,ξ,μ)(Mφ)(ξ)dξ dμ` with the
/// kernel integrals stored per node, for every t ≥ t_min.
#[derive(Debug, Clone)]
pub struct HatField {
    pub c: f64,
    pub radius: f64,
    pub xs: Vec<f64>,
    pub nodes: Vec<C64>,
    weights: Vec<C64>,
    /// `[node][x]`: `w μ^{-1} ∫G1 Mφ`.
    kernel: Vec<Vec<C64>>,
    phi: Vec<f64>,
}

impl HatField {
    pub fn new(spec: &ProblemSpec, c: f64, xs: &[f64], ts: &[f64], eps: f64) -> Result<Self> {
        let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let t_max = ts.iter().cloned().fold(0.0, f64::max);
        if !(t_min > 0.0) {
            return Err(Error::InvalidInput("contour form needs t > 0".into()));
        }
        let radius = truncation_radius(t_min, eps, 0);
        let piece = hat_piece(spec.phase_length(), t_max, eps);
        let path = hat_upper(c, radius.max(crate::contours::corner_modulus(c) * 1.01), &piece)?;
        let rule = contour_quadrature(&path, 16);
        let lphi = |x: f64| spec.l_phi(x);
        let applied = apply_on_nodes(spec, &rule.nodes, &lphi, xs)?;
        let kernel = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(applied)
            .map(|((z, w), row)| row.iter().map(|a| w / z * a.value).collect())
            .collect();
        Ok(HatField {
            c,
            radius,
            xs: xs.to_vec(),
            nodes: rule.nodes,
            weights: rule.weights,
            kernel,
            phi: xs.iter().map(|&x| spec.phi.value(x)).collect(),
        })
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut acc = vec![C64::new(0.0, 0.0); self.xs.len()];
        for (z, row) in self.nodes.iter().zip(&self.kernel) {
            let e = (z * z * t).exp();
            for (a, k) in acc.iter_mut().zip(row) {
                *a += e * k;
            }
        }
        // upper half only: the full hat gives 2i Im
        acc.iter()
            .zip(&self.phi)
            .map(|(a, p)| p + 2.0 / std::f64::consts::PI * a.im)
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }
}

/// Endpoint trace `γ_s(t) = u(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub s: u8,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
}

/// Both endpoint traces from one set of hat nodes, valid for all
/// `t ≥ t_min`.
#[derive(Debug, Clone)]
pub struct TraceField {
    hat: HatField,
}

impl TraceField {
    pub fn new(spec: &ProblemSpec, t_min: f64, t_max: f64, eps: f64) -> Result<Self> {
        let c = contour_height(spec)?;
        Ok(TraceField {
            hat: HatField::new(spec, c, &[0.0, 1.0], &[t_min, t_max], eps)?,
        })
    }

    /// `(γ0(t), γ1(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let v = self.hat.eval(t);
        (v[0], v[1])
    }

    pub fn hat(&self) -> &HatField {
        &self.hat
    }
}

pub fn boundary_trace(spec: &ProblemSpec, s: u8, ts: &[f64]) -> Result<BoundaryTrace> {
    if s > 1 {
        return Err(Error::InvalidInput(format!("endpoint must be 0 or 1, got {s}")));
    }
    check_times(spec, ts)?;
    check_compatible(spec, false)?;
    let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().cloned().fold(0.0, f64::max);
    let field = TraceField::new(spec, t_min, t_max, 1e-12)?;
    let values = ts
        .iter()
        .map(|&t| {
            let (g0, g1) = field.eval(t);
            if s == 0 {
                g0
            } else {
                g1
            }
        })
        .collect();
    Ok(BoundaryTrace {
        s,
        ts: ts.to_vec(),
        values,
    })
}
