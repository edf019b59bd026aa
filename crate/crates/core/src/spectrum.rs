//! Eigenvalues of the nonlocal spectral problem.
//!
//! Zeros of `Δ1` are located by argument-principle subdivision of a strip
//! `|Re μ| ≤ H`, polished by Newton (simple zeros) or by the contour
//! centroid (clusters). Asymptotic seeds are computed for reference only.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::{char_det_scaled, Determinant, KernelKind};
use crate::odeint::MU_MAX;
use crate::problem::{ProblemSpec, ScalarFn};

type C64 = Complex64;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Largest phase change of the determinant accepted between two samples.
const PHASE_STEP: f64 = 0.5;
/// Search edges closer than this (relative) to a zero are moved.
const PLACEMENT: f64 = 1e-9;
const NEWTON_TOL: f64 = 1e-11;
const MAX_DEPTH: usize = 60;
const MAX_RECTS: usize = 200_000;
/// Zeros closer than this are reported as one multiple zero.
pub const CLUSTER_RADIUS: f64 = 1e-4;
const SPLITS: [f64; 4] = [0.4871, 0.5413, 0.4429, 0.5857];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueRecord {
    /// 1-based position in the (|μ|, arg μ) ordering.
    pub index: usize,
    pub value: C64,
    pub multiplicity: u32,
    /// Nearest asymptotic prediction (printed constant).
    pub seed: C64,
    /// `|Δ1(μ)|` at the reported value.
    pub residual: f64,
    /// Determinant scale at the reported value.
    pub scale: f64,
    /// Radius of the multiplicity circle.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMeta {
    /// Empirical strip half-width: max |Re μ| over the first ten records
    /// plus 0.5.
    pub h: f64,
    /// Half of the smallest gap between distinct located eigenvalues.
    pub delta: f64,
    /// Half-width of the searched rectangle.
    pub search_width: f64,
    /// Half-height of the searched rectangle.
    pub search_height: f64,
    pub sweep_radii: Vec<f64>,
    pub sweep_counts: Vec<u32>,
    /// Eigenvalue at μ = 0, if any; not counted among the records.
    pub origin: Option<EigenvalueRecord>,
    /// Winding of Δ1 along the boundary of the searched rectangle.
    pub total_winding: i64,
    /// Σχ over everything located in the searched rectangle.
    pub located_winding: i64,
    pub evaluations: usize,
    pub incomplete: bool,
}

/// Which constant to use in the asymptotic formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedForm {
    /// Constant as printed in the classical formula.
    Printed,
    /// Leading-order Liouville–Green constant.
    Liouville,
}

fn seed_constant(spec: &ProblemSpec, form: SeedForm) -> Option<C64> {
    let (a0, a1) = (spec.a.value(0.0f64), spec.a.value(1.0f64));
    let (al0, al1, be0, be1) = (spec.alpha0, spec.alpha1, spec.beta0, spec.beta1);
    let e = (-spec.drift_integral()).exp();
    let (num, den) = match form {
        SeedForm::Printed => (
            2.0 * al0 * al1 / e + 2.0 * be0 * be1,
            a0 * al0 * be1 + a1 * be0 * al1,
        ),
        SeedForm::Liouville => {
            let r = (a0 / a1).powf(0.25);
            (
                -(2.0 * al0 * al1 / e + 2.0 * be0 * be1 * e),
                al0 * be1 * r + be0 * al1 / r,
            )
        }
    };
    (den != 0.0 && (num / den).is_finite()).then(|| C64::new(num / den, 0.0))
}

/// Asymptotic predictions for index ν (printed constant), both roots and
/// both half-planes, without the O(1/ν) remainder.
pub fn asymptotic_seed(spec: &ProblemSpec, nu: u32) -> Vec<C64> {
    asymptotic_seed_with(spec, nu, SeedForm::Printed)
}

pub fn asymptotic_seed_with(spec: &ProblemSpec, nu: u32, form: SeedForm) -> Vec<C64> {
    let Some(a) = seed_constant(spec, form) else {
        return Vec::new();
    };
    let l = spec.phase_length();
    let root = (a * a - 4.0).sqrt();
    let mut out: Vec<C64> = Vec::with_capacity(4);
    for z in [(a + root) / 2.0, (a - root) / 2.0] {
        let mu = (z.ln() + C64::new(0.0, TAU * nu as f64)) / l;
        for v in [mu, mu.conj()] {
            if !out.iter().any(|w| (w - v).norm() < 1e-12 * (1.0 + v.norm())) {
                out.push(v);
            }
        }
    }
    out
}

/// Asymptotic Dirichlet eigenvalues `νπi / ∫dx/√a`.
pub fn dirichlet_seed(spec: &ProblemSpec, nu: u32) -> C64 {
    C64::new(0.0, std::f64::consts::PI * nu as f64 / spec.phase_length())
}

struct Sampler<'a> {
    spec: &'a ProblemSpec,
    kind: KernelKind,
    evals: AtomicUsize,
    rects: AtomicUsize,
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn diag(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn contains(&self, z: C64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.x1 - self.x0 >= self.y1 - self.y0 {
            let xm = self.x0 + frac * (self.x1 - self.x0);
            (Rect { x1: xm, ..*self }, Rect { x0: xm, ..*self })
        } else {
            let ym = self.y0 + frac * (self.y1 - self.y0);
            (Rect { y1: ym, ..*self }, Rect { y0: ym, ..*self })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Found {
    z: C64,
    w: u32,
}

impl<'a> Sampler<'a> {
    fn new(spec: &'a ProblemSpec, kind: KernelKind) -> Self {
        Sampler {
            spec,
            kind,
            evals: AtomicUsize::new(0),
            rects: AtomicUsize::new(0),
        }
    }

    fn eval(&self, z: C64) -> Result<Determinant> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        char_det_scaled(self.spec, z, self.kind)
    }

    fn check(&self, z: C64, d: &Determinant, limit: f64) -> Result<()> {
        if d.value.norm() < limit * d.scale || !d.value.norm().is_finite() {
            return Err(Error::ZeroOnContour {
                at: z,
                min_modulus: d.value.norm(),
            });
        }
        Ok(())
    }

    /// Phase change of the determinant along the segment a → b.
    fn edge_phase(&self, a: C64, b: C64) -> Result<f64> {
        let len = (b - a).norm();
        let rate = self.spec.phase_length().max(1.0);
        let n = ((len * rate).ceil() as usize).max(2);
        let mut prev_z = a;
        let mut prev = self.eval(a)?;
        self.check(a, &prev, PLACEMENT)?;
        let mut total = 0.0;
        for k in 1..=n {
            let z = a + (b - a) * (k as f64 / n as f64);
            let d = self.eval(z)?;
            self.check(z, &d, PLACEMENT)?;
            total += self.refine(prev_z, prev.value, z, d.value, 0)?;
            prev_z = z;
            prev = d;
        }
        Ok(total)
    }

    // Phase change from za to zb. The midpoint is always sampled; a segment
    // is accepted when both halves turn by at most PHASE_STEP and the
    // midpoint agrees with linear interpolation, which rules out a full turn
    // hidden between the samples.
    fn refine(&self, za: C64, fa: C64, zb: C64, fb: C64, depth: usize) -> Result<f64> {
        let zm = 0.5 * (za + zb);
        let dm = self.eval(zm)?;
        self.check(zm, &dm, PLACEMENT)?;
        let fm = dm.value;
        let (s1, s2) = ((fm / fa).arg(), (fb / fm).arg());
        let linear = (fm - 0.5 * (fa + fb)).norm() <= 0.25 * fa.norm().min(fb.norm());
        if s1.abs() <= PHASE_STEP && s2.abs() <= PHASE_STEP && linear {
            return Ok(s1 + s2);
        }
        if depth > 40 {
            return Err(Error::ZeroOnContour {
                at: zm,
                min_modulus: fa.norm().min(fb.norm()).min(fm.norm()),
            });
        }
        Ok(self.refine(za, fa, zm, fm, depth + 1)? + self.refine(zm, fm, zb, fb, depth + 1)?)
    }

    fn winding_rect(&self, r: &Rect) -> Result<i64> {
        let c = [
            C64::new(r.x0, r.y0),
            C64::new(r.x1, r.y0),
            C64::new(r.x1, r.y1),
            C64::new(r.x0, r.y1),
        ];
        let mut total = 0.0;
        for k in 0..4 {
            total += self.edge_phase(c[k], c[(k + 1) % 4])?;
        }
        let w = total / TAU;
        if (w - w.round()).abs() > 0.1 {
            return Err(Error::ZeroOnContour {
                at: r.center(),
                min_modulus: f64::NAN,
            });
        }
        Ok(w.round() as i64)
    }

    /// Winding number along `|z − c| = ρ`, doubling the trapezoid nodes until
    /// every phase step is below the limit. Also returns the samples.
    fn circle(&self, c: C64, rho: f64, limit: f64) -> Result<(i64, Vec<(C64, C64)>)> {
        let mut n = 64;
        loop {
            let mut samples = Vec::with_capacity(n);
            for k in 0..n {
                let th = TAU * k as f64 / n as f64;
                let z = c + C64::from_polar(rho, th);
                let d = self.eval(z)?;
                self.check(z, &d, limit)?;
                samples.push((z, d.value));
            }
            let mut total = 0.0;
            let mut max_step: f64 = 0.0;
            for k in 0..n {
                let s = (samples[(k + 1) % n].1 / samples[k].1).arg();
                max_step = max_step.max(s.abs());
                total += s;
            }
            if max_step <= PHASE_STEP || n >= 4096 {
                return Ok(((total / TAU).round() as i64, samples));
            }
            n *= 2;
        }
    }

    /// Power sums `Σ (z_j − c)^k`, k = 1..=m, of the `m` zeros inside
    /// `|z − c| = ρ`, from `−(k/2πi)∮ (z−c)^{k−1} log g dz` with
    /// `g = Δ/(z−c)^m` (single-valued on the circle).
    fn power_sums(&self, c: C64, rho: f64, m: u32) -> Result<Vec<C64>> {
        let (w, samples) = self.circle(c, rho, PLACEMENT)?;
        if w != m as i64 {
            return Err(Error::RadiusSelection {
                center: c,
                reason: format!("circle of radius {rho} encloses {w} zeros, expected {m}"),
            });
        }
        let n = samples.len();
        let mut phase = 0.0;
        let mut prev = C64::new(1.0, 0.0);
        let mut sums = vec![C64::new(0.0, 0.0); m as usize];
        for (k, &(z, f)) in samples.iter().enumerate() {
            let zeta = z - c;
            let g = f / zeta.powu(m);
            if k == 0 {
                phase = g.arg();
            } else {
                phase += (g / prev).arg();
            }
            prev = g;
            // dz = i ζ dθ
            let w = C64::new(g.norm().ln(), phase) * zeta * C64::new(0.0, TAU / n as f64);
            let mut zp = C64::new(1.0, 0.0);
            for (j, s) in sums.iter_mut().enumerate() {
                *s += w * zp * (j + 1) as f64;
                zp *= zeta;
            }
        }
        Ok(sums.into_iter().map(|s| -s / C64::new(0.0, TAU)).collect())
    }

    fn newton(&self, start: C64) -> Result<Option<(C64, Determinant)>> {
        let mut z = start;
        for _ in 0..50 {
            let d = self.eval(z)?;
            if d.value.norm() <= NEWTON_TOL * d.scale {
                return Ok(Some((z, d)));
            }
            let h = 1e-6 * (1.0 + z.norm());
            let fp = self.eval(z + h)?.value;
            let fm = self.eval(z - h)?.value;
            let dz = -d.value / ((fp - fm) / (2.0 * h));
            if !dz.norm().is_finite() {
                return Ok(None);
            }
            z += dz;
            if dz.norm() <= 1e-13 * (1.0 + z.norm()) {
                let d = self.eval(z)?;
                return Ok((d.value.norm() <= 1e-9 * d.scale).then_some((z, d)));
            }
        }
        Ok(None)
    }

    fn search(&self, rect: Rect, w: i64, depth: usize) -> Result<Vec<Found>> {
        if w <= 0 {
            return Ok(Vec::new());
        }
        if self.rects.fetch_add(1, Ordering::Relaxed) > MAX_RECTS || depth > MAX_DEPTH {
            return Err(Error::BudgetExhausted(format!(
                "rectangle subdivision limit reached near {}",
                rect.center()
            )));
        }
        let c = rect.center();
        let diag = rect.diag();
        if w == 1 {
            if let Some((z, _)) = self.newton(c)? {
                if rect.contains(z) {
                    return Ok(vec![Found { z, w: 1 }]);
                }
            }
        }
        if diag < 0.5 || depth == MAX_DEPTH {
            if let Some(f) = self.cluster(c, 0.5 * diag * 1.05, w as u32)? {
                return Ok(f);
            }
        }
        for frac in SPLITS {
            let (ra, rb) = rect.split(frac);
            let (wa, wb) = match (self.winding_rect(&ra), self.winding_rect(&rb)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(Error::ZeroOnContour { .. }), _) | (_, Err(Error::ZeroOnContour { .. })) => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            if wa + wb != w {
                continue;
            }
            let (fa, fb) = rayon::join(|| self.search(ra, wa, depth + 1), || self.search(rb, wb, depth + 1));
            let mut out = fa?;
            out.extend(fb?);
            return Ok(out);
        }
        Err(Error::BudgetExhausted(format!(
            "no admissible split of the rectangle around {c}"
        )))
    }

    // Recovers the `m` zeros inside `|z − c| = ρ` from their power sums.
    // Roots closer than CLUSTER_RADIUS are merged into one multiple zero;
    // simple roots are polished by Newton. `None` if the circle is unusable.
    fn cluster(&self, c: C64, rho: f64, m: u32) -> Result<Option<Vec<Found>>> {
        let sums = match self.power_sums(c, rho, m) {
            Ok(s) => s,
            Err(Error::RadiusSelection { .. }) | Err(Error::ZeroOnContour { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let roots = roots_from_power_sums(&sums);
        if roots.iter().any(|r| !(r.norm() < rho)) {
            return Ok(None);
        }
        let mut groups: Vec<(C64, u32)> = Vec::new();
        for r in roots {
            match groups.iter_mut().find(|(g, k)| (*g / *k as f64 - r).norm() < CLUSTER_RADIUS) {
                Some((g, k)) => {
                    *g += r;
                    *k += 1;
                }
                None => groups.push((r, 1)),
            }
        }
        let mut out = Vec::with_capacity(groups.len());
        for (sum, k) in groups {
            let z = c + sum / k as f64;
            let z = match (k, self.newton(z)?) {
                (1, Some((p, _))) if (p - z).norm() < CLUSTER_RADIUS => p,
                _ => z,
            };
            out.push(Found { z, w: k });
        }
        Ok(Some(out))
    }

    // Searches rect, moving the edge at `movable` (top or bottom ordinate)
    // a few times if it passes through a zero.
    fn band(&self, mut rect: Rect, step: f64, top: bool) -> Result<(Rect, i64)> {
        for attempt in 0..8 {
            match self.winding_rect(&rect) {
                Ok(w) => return Ok((rect, w)),
                Err(Error::ZeroOnContour { .. }) if attempt < 7 => {
                    if top {
                        rect.y1 += step;
                    } else {
                        rect.y0 -= step;
                        rect.y1 += step;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        unreachable!()
    }
}

// Newton's identities, then Durand–Kerner on the monic polynomial.
fn roots_from_power_sums(sums: &[C64]) -> Vec<C64> {
    let m = sums.len();
    let mut e = vec![C64::new(1.0, 0.0)];
    for k in 1..=m {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[k - i] * sums[i - 1] * sign;
        }
        e.push(acc / k as f64);
    }
    // p(ζ) = Σ (−1)^k e_k ζ^{m−k}
    let coef: Vec<C64> = (0..=m).map(|k| if k % 2 == 0 { e[k] } else { -e[k] }).collect();
    let p = |z: C64| coef.iter().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
    if m == 1 {
        return vec![-coef[1]];
    }
    let scale = sums.iter().map(|s| s.norm()).fold(1e-3, f64::max);
    let mut r: Vec<C64> = (0..m)
        .map(|k| C64::from_polar(scale, 0.4 + TAU * k as f64 / m as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..m {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..m {
                if j != i {
                    den *= r[i] - r[j];
                }
            }
            if den.norm() == 0.0 {
                continue;
            }
            let d = p(r[i]) / den;
            r[i] -= d;
            moved = moved.max(d.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    r
}

fn cmp_modulus(a: C64, b: C64) -> std::cmp::Ordering {
    let (ma, mb) = (a.norm(), b.norm());
    if (ma - mb).abs() <= 1e-9 * (1.0 + ma.max(mb)) {
        a.arg().total_cmp(&b.arg())
    } else {
        ma.total_cmp(&mb)
    }
}

/// Winding number of Δ1 along `|z − μ| = ρ`.
pub fn multiplicity(spec: &ProblemSpec, mu: C64, rho: f64) -> Result<u32> {
    winding_number(spec, KernelKind::Nonlocal, mu, rho)
}

/// Winding number of Δ1 or Δ2 along `|z − c| = ρ`; fails if the circle
/// passes within the singularity threshold of a zero.
pub fn winding_number(spec: &ProblemSpec, kind: KernelKind, c: C64, rho: f64) -> Result<u32> {
    let s = Sampler::new(spec, kind);
    let (w, _) = s.circle(c, rho, Determinant::REL_THRESHOLD)?;
    Ok(w.max(0) as u32)
}

/// Residue circle radius: half the distance to the nearest other
/// eigenvalue, at most 0.5.
pub fn residue_radius(mu: C64, others: &[C64]) -> f64 {
    others
        .iter()
        .filter(|o| (*o - mu).norm() > 1e-9 * (1.0 + mu.norm()))
        .map(|o| 0.5 * (o - mu).norm())
        .fold(0.5, f64::min)
}

fn nearest_seed(spec: &ProblemSpec, mu: C64) -> C64 {
    let l = spec.phase_length();
    let top = (mu.norm() * l / TAU).ceil() as u32 + 1;
    (0..=top)
        .flat_map(|nu| {
            let mut v = asymptotic_seed(spec, nu);
            v.extend(v.clone().iter().map(|z| -z));
            v
        })
        .min_by(|a, b| (a - mu).norm().total_cmp(&(b - mu).norm()))
        .unwrap_or(C64::new(f64::NAN, f64::NAN))
}

type Located = (Vec<EigenvalueRecord>, SpectrumMeta);

/// The `count` smallest-modulus nonzero eigenvalues with multiplicities.
///
/// Results are memoized per process, keyed on the coefficients, forms and
/// `count` (φ does not enter).
pub fn locate_eigenvalues(spec: &ProblemSpec, count: usize) -> Result<Located> {
    static CACHE: OnceLock<Mutex<HashMap<String, Located>>> = OnceLock::new();
    let bare = ProblemSpec {
        phi: ScalarFn::constant(0.0),
        ..spec.clone()
    };
    let key = format!("{bare:?}|{count}");
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("spectrum cache").get(&key) {
        return Ok(hit.clone());
    }
    let found = search(spec, count)?;
    cache.lock().expect("spectrum cache").insert(key, found.clone());
    Ok(found)
}

fn search(spec: &ProblemSpec, count: usize) -> Result<Located> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let l = spec.phase_length();
    let period = TAU / l;
    let width_cap = 0.9 * MU_MAX / l;
    let nus = (count as u32).max(10);
    let h0 = (1..=nus)
        .flat_map(|nu| {
            let mut v = asymptotic_seed_with(spec, nu, SeedForm::Printed);
            v.extend(asymptotic_seed_with(spec, nu, SeedForm::Liouville));
            v
        })
        .map(|z| z.re.abs())
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max)
        + 1.0;

    let mut width = h0.min(width_cap);
    let mut run = search_strip(spec, count, width, period)?;
    let h_emp = empirical_h(&run.found);
    if h_emp > width - 0.25 && width < width_cap {
        width = (h_emp + 0.5).min(width_cap);
        run = search_strip(spec, count, width, period)?;
    }
    let sampler = Sampler::new(spec, KernelKind::Nonlocal);
    let mut all = run.found;
    all.sort_by(|a, b| cmp_modulus(a.z, b.z));
    let located_winding: i64 = all.iter().map(|f| f.w as i64).sum();
    let values: Vec<C64> = all.iter().map(|f| f.z).collect();

    let mut selected: Vec<C64> = Vec::new();
    let mut origin_found = false;
    for f in all.iter() {
        if f.z.norm() < 1e-6 {
            origin_found = true;
        } else if selected.len() < count {
            selected.push(f.z);
        }
    }
    // conjugate records share multiplicity and residual
    let describe = |value: C64| -> Result<EigenvalueRecord> {
        let radius = residue_radius(value, &values);
        let d = sampler.eval(value)?;
        Ok(EigenvalueRecord {
            index: 0,
            value,
            multiplicity: multiplicity(spec, value, radius)?,
            seed: nearest_seed(spec, value),
            residual: d.value.norm(),
            scale: d.scale,
            radius,
        })
    };
    let upper: Vec<EigenvalueRecord> = selected
        .par_iter()
        .filter(|z| z.im >= 0.0)
        .map(|z| describe(*z))
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(selected.len());
    for z in &selected {
        let rec = match upper.iter().find(|r| (r.value.conj() - z).norm() <= 1e-12 * (1.0 + z.norm())) {
            Some(r) if z.im < 0.0 => EigenvalueRecord {
                value: *z,
                seed: r.seed.conj(),
                ..*r
            },
            _ => match upper.iter().find(|r| r.value == *z) {
                Some(r) => *r,
                None => describe(*z)?,
            },
        };
        records.push(EigenvalueRecord {
            index: records.len() + 1,
            ..rec
        });
    }
    let origin = if origin_found {
        Some(describe(C64::new(0.0, 0.0))?)
    } else {
        None
    };
    let incomplete = run.incomplete || records.len() < count;

    let nonzero: Vec<&Found> = all.iter().filter(|f| f.z.norm() >= 1e-6).collect();
    let first10: Vec<Found> = nonzero.iter().take(10).map(|f| **f).collect();
    let h = empirical_h(&first10);
    let mut min_gap = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            min_gap = min_gap.min((a - b).norm());
        }
    }
    let delta = if min_gap.is_finite() { 0.5 * min_gap } else { 0.5 };

    // circles between consecutive moduli that keep distance ≥ δ/2 from
    // every located eigenvalue
    let mut sweep_radii = Vec::new();
    let mut sweep_counts = Vec::new();
    let moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    for w in moduli.windows(2) {
        let r = 0.5 * (w[0] + w[1]);
        if r > run.height || w[1] - w[0] < delta {
            continue;
        }
        if sweep_radii.last().is_some_and(|p: &f64| (p - r).abs() < 1e-9) {
            continue;
        }
        sweep_radii.push(r);
        sweep_counts.push(all.iter().filter(|f| f.z.norm() < r).map(|f| f.w).sum());
    }

    let meta = SpectrumMeta {
        h,
        delta,
        search_width: run.width,
        search_height: run.height,
        sweep_radii,
        sweep_counts,
        origin,
        total_winding: run.total_winding,
        located_winding,
        evaluations: run.evaluations + sampler.evals.load(Ordering::Relaxed),
        incomplete,
    };
    Ok((records, meta))
}

fn empirical_h(found: &[Found]) -> f64 {
    found.iter().map(|f| f.z.re.abs()).fold(0.0, f64::max) + 0.5
}

struct StripRun {
    found: Vec<Found>,
    width: f64,
    height: f64,
    total_winding: i64,
    evaluations: usize,
    incomplete: bool,
}

fn search_strip(spec: &ProblemSpec, count: usize, width: f64, period: f64) -> Result<StripRun> {
    let s = Sampler::new(spec, KernelKind::Nonlocal);
    let nudge = 0.0137 * period;
    let y0 = 0.25 * period.min(2.0);

    let (central, wc) = s.band(
        Rect {
            x0: -width,
            x1: width,
            y0: -y0,
            y1: y0,
        },
        nudge,
        false,
    )?;
    let mut incomplete = false;
    let mut found = Vec::new();
    match s.search(central, wc, 0) {
        Ok(f) => found.extend(f),
        Err(Error::BudgetExhausted(_)) => incomplete = true,
        Err(e) => return Err(e),
    }

    let band_height = period * ((count as f64 / 4.0).ceil() + 1.0);
    let mut lo = central.y1;
    loop {
        let (rect, w) = s.band(
            Rect {
                x0: -width,
                x1: width,
                y0: lo,
                y1: lo + band_height,
            },
            nudge,
            true,
        )?;
        match s.search(rect, w, 0) {
            Ok(f) => {
                for z in f {
                    found.push(z);
                    found.push(Found { z: z.z.conj(), w: z.w });
                }
            }
            Err(Error::BudgetExhausted(_)) => incomplete = true,
            Err(e) => return Err(e),
        }
        lo = rect.y1;
        let within = found.iter().filter(|f| f.z.norm() >= 1e-6 && f.z.norm() <= lo).count();
        if within >= count || incomplete || lo * 2.0 > MU_MAX * 4.0 {
            break;
        }
    }

    let whole = Rect {
        x0: -width,
        x1: width,
        y0: -lo,
        y1: lo,
    };
    let total_winding = s.winding_rect(&whole)?;
    found.retain(|f| f.z.norm() <= lo || f.z.im.abs() <= lo);
    Ok(StripRun {
        found,
        width,
        height: lo,
        total_winding,
        evaluations: s.evals.load(Ordering::Relaxed),
        incomplete,
    })
}
