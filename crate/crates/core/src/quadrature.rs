//! Gauss–Legendre rules, composite panel rules and Chebyshev–Lobatto
//! interpolation on an interval.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Real;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let (x, w) = legendre_f64(n);
        GaussLegendre {
            nodes: x.into_iter().map(T::lit).collect(),
            weights: w.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}

/// Shared f64 rule of the given order.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

// Newton iteration on P_n from the Chebyshev-like initial guess.
fn legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite rule: `panels` equal panels on [a, b], `order` nodes each.
pub fn composite<T: Real>(a: T, b: T, panels: usize, order: usize) -> (Vec<T>, Vec<T>) {
    let gl = GaussLegendre::<T>::new(order);
    composite_with(&gl, a, b, panels)
}

pub fn composite_with<T: Real>(
    gl: &GaussLegendre<T>,
    a: T,
    b: T,
    panels: usize,
) -> (Vec<T>, Vec<T>) {
    let mut xs = Vec::with_capacity(panels * gl.len());
    let mut ws = Vec::with_capacity(panels * gl.len());
    let h = (b - a) / T::lit(panels as f64);
    for p in 0..panels {
        let lo = a + h * T::lit(p as f64);
        let hi = if p + 1 == panels { b } else { lo + h };
        for (x, w) in gl.mapped(lo, hi) {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}

/// Polynomial interpolant through Chebyshev–Lobatto points on [a, b],
/// evaluated with the barycentric formula.
#[derive(Debug, Clone)]
pub struct ChebyshevInterpolant<T> {
    pub a: T,
    pub b: T,
    pub nodes: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> ChebyshevInterpolant<T> {
    /// The `degree + 1` Lobatto points on [a, b], ascending.
    pub fn points(a: T, b: T, degree: usize) -> Vec<T> {
        let n = degree as f64;
        (0..=degree)
            .map(|j| {
                let c = -(std::f64::consts::PI * j as f64 / n).cos();
                let half = (b - a) / T::lit(2.0);
                (a + b) / T::lit(2.0) + half * T::lit(c)
            })
            .collect()
    }

    pub fn from_fn<F: FnMut(T) -> T>(a: T, b: T, degree: usize, mut f: F) -> Self {
        let nodes = Self::points(a, b, degree);
        let values = nodes.iter().map(|&x| f(x)).collect();
        ChebyshevInterpolant { a, b, nodes, values }
    }

    pub fn from_values(a: T, b: T, values: Vec<T>) -> Self {
        assert!(values.len() >= 2);
        let nodes = Self::points(a, b, values.len() - 1);
        ChebyshevInterpolant { a, b, nodes, values }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.nodes.len();
        let mut num = T::zero();
        let mut den = T::zero();
        for j in 0..n {
            let d = x - self.nodes[j];
            if d == T::zero() {
                return self.values[j];
            }
            let mut w = if j % 2 == 0 { T::one() } else { -T::one() };
            if j == 0 || j == n - 1 {
                w = w / T::lit(2.0);
            }
            let t = w / d;
            num = num + t * self.values[j];
            den = den + t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 33] {
            let gl = GaussLegendre::<f64>::new(n);
            assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..(2 * n) {
                let got = gl.integrate(0.0, 1.0, |x| x.powi(k as i32));
                assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn composite_rule_on_smooth_integrand() {
        let (x, w) = composite(0.0f64, 3.0, 8, 16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!((s - (1.0 - 3.0f64.cos())).abs() < 1e-14);
        let (x, w) = composite(0.0f32, 1.0, 4, 8);
        let s: f32 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((s - (1.0f32.exp() - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn chebyshev_interpolant_converges() {
        let p = ChebyshevInterpolant::from_fn(0.0, 0.5, 32, |t: f64| (-4.0 * t).exp() * (7.0 * t).cos());
        for k in 0..50 {
            let t = 0.5 * k as f64 / 49.0 + 1e-4 * (k % 3) as f64;
            let t = t.min(0.5);
            let want = (-4.0 * t).exp() * (7.0 * t).cos();
            assert!((p.eval(t) - want).abs() < 1e-13);
        }
        assert_eq!(p.eval(0.0), 1.0);
    }
}
