//! Crank–Nicolson reference solver, grid comparison and PDE residuals.
//!
//! The first segment `(0, ω]` carries the nonlocal rows
//! `α0 u0 + β0 uN = 0` and `α1 D⁺u0 + β1 D⁻uN = 0` with three-point one-sided
//! differences. From `t = ω` on, both ends are Dirichlet rows fed by the
//! stored boundary history through the time shifts.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::solver_residue::{Method, SolutionGrid};

/// Backward Euler half steps after each boundary jump.
pub const RANNACHER_HALF_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub xs: Vec<f64>,
    pub dt: f64,
    pub omega: f64,
    pub steps_per_segment: usize,
    pub segments: usize,
    /// `values[n][i]` at `t = n dt`; at `t = kω` the left limit.
    pub values: Vec<Vec<f64>>,
    /// Boundary values `[u(0), u(1)]` just after `t = kω`, `k = 1..segments−1`.
    pub right_limits: Vec<[f64; 2]>,
    pub metadata: BTreeMap<String, String>,
}

impl FdGrid {
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t((self.values.len() - 1).max(0))
    }

    /// Linear interpolation in t, left-continuous at segment boundaries.
    pub fn slice(&self, t: f64) -> Vec<f64> {
        let r = (t / self.dt).clamp(0.0, (self.values.len() - 1) as f64);
        let n = r.floor() as usize;
        let f = r - n as f64;
        if f < 1e-9 || n + 1 >= self.values.len() {
            return self.values[n].clone();
        }
        if f > 1.0 - 1e-9 {
            return self.values[n + 1].clone();
        }
        let (a, mut b) = (&self.values[n], self.values[n + 1].clone());
        // level n may be a segment boundary whose right limits differ
        if n > 0 && n % self.steps_per_segment == 0 {
            let k = n / self.steps_per_segment;
            if let Some(rl) = self.right_limits.get(k - 1) {
                let mut a = a.clone();
                let last = a.len() - 1;
                a[0] = rl[0];
                a[last] = rl[1];
                for (bi, ai) in b.iter_mut().zip(&a) {
                    *bi = ai + (*bi - ai) * f;
                }
                return b;
            }
        }
        for (bi, ai) in b.iter_mut().zip(a) {
            *bi = ai + (*bi - ai) * f;
        }
        b
    }

    /// Samples on a t-list as a [`SolutionGrid`].
    pub fn to_solution_grid(&self, ts: &[f64]) -> SolutionGrid {
        SolutionGrid {
            xs: self.xs.clone(),
            ts: ts.to_vec(),
            values: ts.iter().map(|&t| self.slice(t)).collect(),
            method: Method::FiniteDifference,
            metadata: self.metadata.clone(),
            components: None,
            tail: 0.0,
            imag_max: 0.0,
        }
    }

    /// Sub-sampled copy on every `stride`-th x node, with every level.
    pub fn full_grid(&self) -> SolutionGrid {
        let ts = (0..self.values.len()).map(|n| self.t(n)).collect();
        SolutionGrid {
            xs: self.xs.clone(),
            ts,
            values: self.values.clone(),
            method: Method::FiniteDifference,
            metadata: self.metadata.clone(),
            components: None,
            tail: 0.0,
            imag_max: 0.0,
        }
    }
}

/// Tridiagonal solve with the Thomas algorithm; `lower[0]` and `upper[n-1]`
/// are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

struct Stepper {
    n: usize,
    // L_h row i (interior): lo u_{i-1} + mid u_i + hi u_{i+1}
    lo: Vec<f64>,
    mid: Vec<f64>,
    hi: Vec<f64>,
    // I - dt/2 L_h on interior nodes
    t_lo: Vec<f64>,
    t_diag: Vec<f64>,
    t_up: Vec<f64>,
    // interior responses to unit boundary values
    w0: Vec<f64>,
    wn: Vec<f64>,
}

impl Stepper {
    fn new(spec: &ProblemSpec, nx: usize, dt: f64) -> Self {
        let h = 1.0 / nx as f64;
        let (mut lo, mut mid, mut hi) = (vec![0.0; nx + 1], vec![0.0; nx + 1], vec![0.0; nx + 1]);
        for i in 1..nx {
            let x = i as f64 * h;
            let (a, b, c) = (spec.a.value(x), spec.b.value(x), spec.c.value(x));
            lo[i] = a / (h * h) - b / (2.0 * h);
            mid[i] = -2.0 * a / (h * h) + c;
            hi[i] = a / (h * h) + b / (2.0 * h);
        }
        let m = nx - 1;
        let t_lo: Vec<f64> = (1..nx).map(|i| -0.5 * dt * lo[i]).collect();
        let t_diag: Vec<f64> = (1..nx).map(|i| 1.0 - 0.5 * dt * mid[i]).collect();
        let t_up: Vec<f64> = (1..nx).map(|i| -0.5 * dt * hi[i]).collect();
        let mut e0 = vec![0.0; m];
        e0[0] = 0.5 * dt * lo[1];
        let mut en = vec![0.0; m];
        en[m - 1] = 0.5 * dt * hi[nx - 1];
        let w0 = thomas(&t_lo, &t_diag, &t_up, &e0);
        let wn = thomas(&t_lo, &t_diag, &t_up, &en);
        Stepper {
            n: nx,
            lo,
            mid,
            hi,
            t_lo,
            t_diag,
            t_up,
            w0,
            wn,
        }
    }

    /// Interior right side: `u + θ dt L_h u` with the given weight
    /// (`θ = 1/2` for Crank–Nicolson, 0 for the Euler half step).
    fn rhs(&self, u: &[f64], theta_dt: f64) -> Vec<f64> {
        (1..self.n)
            .map(|i| u[i] + theta_dt * (self.lo[i] * u[i - 1] + self.mid[i] * u[i] + self.hi[i] * u[i + 1]))
            .collect()
    }

    /// Interior particular solution with zero boundary values.
    fn particular(&self, r: &[f64]) -> Vec<f64> {
        thomas(&self.t_lo, &self.t_diag, &self.t_up, r)
    }

    fn assemble(&self, z: &[f64], u0: f64, un: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(u0);
        for i in 0..self.n - 1 {
            out.push(z[i] + u0 * self.w0[i] + un * self.wn[i]);
        }
        out.push(un);
        out
    }
}

/// Coefficients of `(u0, uN, 1)` in the derivative row after substituting
/// the interior representation.
fn derivative_row(st: &Stepper, spec: &ProblemSpec, z: &[f64]) -> [f64; 3] {
    let n = st.n;
    let h = 1.0 / n as f64;
    let m = n - 1;
    // interior node i (1-based) is index i-1
    let lin = |k: usize| (st.w0[k - 1], st.wn[k - 1], z[k - 1]);
    let (a1, a2) = (lin(1), lin(2));
    let (b1, b2) = (lin(m), lin(m - 1));
    let s = 1.0 / (2.0 * h);
    let (al, be) = (spec.alpha1 * s, spec.beta1 * s);
    [
        al * (-3.0 + 4.0 * a1.0 - a2.0) + be * (-4.0 * b1.0 + b2.0),
        al * (4.0 * a1.1 - a2.1) + be * (3.0 - 4.0 * b1.1 + b2.1),
        al * (4.0 * a1.2 - a2.2) + be * (-4.0 * b1.2 + b2.2),
    ]
}

/// Crank–Nicolson on `[0, T_end]`; `dt` is shrunk so that ω is a whole
/// number of steps.
pub fn fd_solve(spec: &ProblemSpec, nx: usize, dt: f64, t_end: f64) -> Result<FdGrid> {
    if nx < 20 {
        return Err(Error::InvalidInput(format!("Nx = {nx} below 20")));
    }
    if !(dt > 0.0 && dt <= spec.omega / 10.0) {
        return Err(Error::InvalidInput(format!("dt = {dt} must lie in (0, ω/10]")));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput("T_end must be positive".into()));
    }
    let m = (spec.omega / dt - 1e-9).ceil() as usize;
    let dt = spec.omega / m as f64;
    let total = (t_end / dt - 1e-9).ceil() as usize;
    let segments = total.div_ceil(m);
    let st = Stepper::new(spec, nx, dt);
    let half = Stepper::new(spec, nx, dt / 2.0);

    // nonlocal rows: [α0, β0 | 0] and the derivative row, solved for (u0, uN)
    let probe = derivative_row(&st, spec, &vec![0.0; nx - 1]);
    let det = spec.alpha0 * probe[1] - spec.beta0 * probe[0];
    let scale = (spec.alpha0.abs() + spec.beta0.abs()) * (probe[0].abs() + probe[1].abs());
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::SingularBoundary(format!(
            "boundary rows are dependent (det {det:.3e})"
        )));
    }

    let x: Vec<f64> = (0..=nx).map(|i| i as f64 / nx as f64).collect();
    let mut values = Vec::with_capacity(total + 1);
    values.push(x.iter().map(|&x| spec.phi.value(x)).collect::<Vec<f64>>());
    let mut right_limits: Vec<[f64; 2]> = Vec::new();

    // boundary value of level n (right limit at segment starts)
    let boundary = |values: &Vec<Vec<f64>>, right_limits: &Vec<[f64; 2]>, n: usize| -> [f64; 2] {
        let v = &values[n];
        if n > 0 && n % m == 0 {
            if let Some(r) = right_limits.get(n / m - 1) {
                return *r;
            }
        }
        [v[0], v[nx]]
    };
    // Dirichlet data at level n ≥ m from the history one segment back;
    // `right` picks the limit after a segment boundary
    let shifted = |values: &Vec<Vec<f64>>, right_limits: &Vec<[f64; 2]>, n: usize, right: bool| -> [f64; 2] {
        let back = if right || n % m != 0 {
            boundary(values, right_limits, n - m)
        } else {
            let v = &values[n - m];
            [v[0], v[nx]]
        };
        [-spec.delta0 * back[1], -back[0] / spec.delta1]
    };

    let mut n = 0;
    while n < total {
        let seg = n / m;
        if seg == 0 {
            let u = &values[n];
            let z = st.particular(&st.rhs(u, 0.5 * dt));
            let d = derivative_row(&st, spec, &z);
            // α0 u0 + β0 uN = 0, d0 u0 + d1 uN = -d2
            let det = spec.alpha0 * d[1] - spec.beta0 * d[0];
            let u0 = spec.beta0 * d[2] / det;
            let un = -spec.alpha0 * d[2] / det;
            values.push(st.assemble(&z, u0, un));
            n += 1;
            continue;
        }
        if n % m == 0 {
            // jump: store the right limits, restart from the interior slice
            let r = shifted(&values, &right_limits, n, true);
            right_limits.push(r);
            let mut u = values[n].clone();
            u[0] = r[0];
            u[nx] = r[1];
            let (n0, steps) = (n, RANNACHER_HALF_STEPS.min(2 * (total - n)));
            for k in 0..steps {
                // Euler half step to level n0 + (k+1)/2
                let lvl = 2 * n0 + k + 1;
                let b = if lvl % 2 == 0 {
                    shifted(&values, &right_limits, lvl / 2, false)
                } else {
                    let (lo, hi) = (
                        shifted(&values, &right_limits, lvl / 2, lvl / 2 == n0),
                        shifted(&values, &right_limits, lvl / 2 + 1, false),
                    );
                    [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]
                };
                let z = half.particular(&half.rhs(&u, 0.0));
                u = half.assemble(&z, b[0], b[1]);
                if lvl % 2 == 0 {
                    values.push(u.clone());
                    n += 1;
                }
            }
            continue;
        }
        let b = shifted(&values, &right_limits, n + 1, false);
        let mut u = values[n].clone();
        let bl = boundary(&values, &right_limits, n);
        u[0] = bl[0];
        u[nx] = bl[1];
        let z = st.particular(&st.rhs(&u, 0.5 * dt));
        values.push(st.assemble(&z, b[0], b[1]));
        n += 1;
    }

    let mut metadata = BTreeMap::new();
    metadata.insert("nx".into(), nx.to_string());
    metadata.insert("dt".into(), format!("{dt:?}"));
    metadata.insert("scheme".into(), "crank-nicolson".into());
    metadata.insert("rannacher_half_steps".into(), RANNACHER_HALF_STEPS.to_string());
    Ok(FdGrid {
        xs: x,
        dt,
        omega: spec.omega,
        steps_per_segment: m,
        segments,
        values,
        right_limits,
        metadata,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub sup: f64,
    pub l2: f64,
    /// `(x, t)` of the largest difference.
    pub at: (f64, f64),
    /// `(t, sup over x)` per compared time.
    pub slices: Vec<(f64, f64)>,
}

/// Differences of `a` against `b` on `a`'s grid. x-nodes of `a` must be
/// nodes of `b`; `b` is interpolated linearly in t. Times within `band` of
/// a multiple of ω are skipped.
pub fn compare_grids(a: &SolutionGrid, b: &SolutionGrid, omega: f64, band: f64) -> Result<ErrorReport> {
    let idx: Vec<Option<usize>> = a
        .xs
        .iter()
        .map(|x| b.xs.iter().position(|y| (x - y).abs() <= 1e-12))
        .collect();
    if idx.iter().all(|i| i.is_none()) {
        return Err(Error::DisjointWindows("no shared x nodes".into()));
    }
    let (tb0, tb1) = (b.ts[0], b.ts[b.ts.len() - 1]);
    let (mut sup, mut sq, mut count, mut at) = (0.0f64, 0.0, 0usize, (f64::NAN, f64::NAN));
    let mut slices = Vec::new();
    for (j, &t) in a.ts.iter().enumerate() {
        if t < tb0 - 1e-12 || t > tb1 + 1e-12 {
            continue;
        }
        let k = (t / omega).round();
        if k >= 1.0 && (t - k * omega).abs() < band {
            continue;
        }
        let bv = interpolate_t(b, t);
        let mut s = 0.0f64;
        for (i, bi) in idx.iter().enumerate() {
            if let Some(bi) = bi {
                let d = (a.values[j][i] - bv[*bi]).abs();
                sq += d * d;
                count += 1;
                if d > s {
                    s = d;
                }
                if d > sup || at.0.is_nan() {
                    sup = sup.max(d);
                    if d >= sup {
                        at = (a.xs[i], t);
                    }
                }
            }
        }
        slices.push((t, s));
    }
    if count == 0 {
        return Err(Error::DisjointWindows("no shared times".into()));
    }
    Ok(ErrorReport {
        sup,
        l2: (sq / count as f64).sqrt(),
        at,
        slices,
    })
}

fn interpolate_t(g: &SolutionGrid, t: f64) -> Vec<f64> {
    let k = g.ts.partition_point(|&s| s < t - 1e-12);
    if k < g.ts.len() && (g.ts[k] - t).abs() <= 1e-12 {
        return g.values[k].clone();
    }
    let k = k.clamp(1, g.ts.len() - 1);
    let (t0, t1) = (g.ts[k - 1], g.ts[k]);
    let f = (t - t0) / (t1 - t0);
    g.values[k - 1]
        .iter()
        .zip(&g.values[k])
        .map(|(a, b)| a + (b - a) * f)
        .collect()
}

/// `max |a D²u + b Du + c u − D_t u|` over interior nodes of a uniform grid,
/// centered in x and t.
pub fn pde_residual(g: &SolutionGrid, spec: &ProblemSpec) -> f64 {
    let (nx, nt) = (g.xs.len(), g.ts.len());
    if nx < 3 || nt < 3 {
        return 0.0;
    }
    let h = g.xs[1] - g.xs[0];
    let mut worst = 0.0f64;
    for j in 1..nt - 1 {
        let dt2 = g.ts[j + 1] - g.ts[j - 1];
        for i in 1..nx - 1 {
            let x = g.xs[i];
            let u = &g.values[j];
            let dxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let dx = (u[i + 1] - u[i - 1]) / (2.0 * h);
            let dtu = (g.values[j + 1][i] - g.values[j - 1][i]) / dt2;
            let r = spec.a.value(x) * dxx + spec.b.value(x) * dx + spec.c.value(x) * u[i] - dtu;
            worst = worst.max(r.abs());
        }
    }
    worst
}
