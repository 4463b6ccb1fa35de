//! Brute-force numerical references for the closed-form integrals. Nothing
//! here calls into the library: the Gauss-Legendre rule is rebuilt locally
//! and every integral is taken directly from its defining expression.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch free Newton).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, dp) = if n == 1 {
                (z, 1.0)
            } else {
                (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
            };
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let mut p0 = 1.0;
        let mut p1 = z;
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = if n == 1 {
            1.0
        } else {
            n as f64 * (z * p1 - p0) / (z * z - 1.0)
        };
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite rule on [0, ∞): geometric panels from `fine` up to `coarse`
/// lengths, 32 nodes each. `fine` should resolve the fastest decay and
/// `coarse` the slowest.
pub struct Panels {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    breaks: Vec<f64>,
}

impl Panels {
    pub fn new(fine: f64, coarse: f64) -> Self {
        let mut breaks = vec![0.0];
        let mut edge = 0.05 * fine;
        while edge < 80.0 * coarse {
            breaks.push(edge);
            edge *= 2.0;
        }
        breaks.push(edge);
        let (t, w) = gauss_legendre(32);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            for (ti, wi) in t.iter().zip(&w) {
                nodes.push(0.5 * (b - a) * ti + 0.5 * (a + b));
                weights.push(0.5 * (b - a) * wi);
            }
        }
        Self {
            nodes,
            weights,
            breaks,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }

    /// Running integral `∫₀^{r_i} f` at every node (panel-wise GL on
    /// `[0, r_i]` split at the panel breaks).
    pub fn integrate_up_to(&self, upper: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (t, w) = gauss_legendre(32);
        let mut sum = 0.0;
        for p in self.breaks.windows(2) {
            let a = p[0];
            if a >= upper {
                break;
            }
            let b = p[1].min(upper);
            for (ti, wi) in t.iter().zip(&w) {
                sum += 0.5 * (b - a) * wi * f(0.5 * (b - a) * ti + 0.5 * (a + b));
            }
        }
        sum
    }
}

fn norm(z: f64) -> f64 {
    (z * z * z / PI).sqrt()
}

fn panels_for(zetas: &[f64]) -> Panels {
    let max = zetas.iter().cloned().fold(f64::MIN, f64::max);
    let min = zetas.iter().cloned().fold(f64::MAX, f64::min);
    Panels::new(1.0 / max, 1.0 / min)
}

/// `∫ φ_a φ_b d³x`
pub fn overlap(za: f64, zb: f64) -> f64 {
    let p = panels_for(&[za, zb]);
    p.integrate(|r| 4.0 * PI * r * r * norm(za) * norm(zb) * (-(za + zb) * r).exp())
}

/// `½∫ ∇φ_a·∇φ_b d³x`, the symmetric form of `⟨a|−½∇²|b⟩`.
pub fn kinetic(za: f64, zb: f64) -> f64 {
    let p = panels_for(&[za, zb]);
    p.integrate(|r| {
        let da = -za * norm(za) * (-za * r).exp();
        let db = -zb * norm(zb) * (-zb * r).exp();
        0.5 * 4.0 * PI * r * r * da * db
    })
}

/// `∫ φ_a φ_b / |x − d ẑ| d³x` with the angular integral done exactly:
/// a shell of radius `r` contributes as if its charge sat at the center
/// when `r < d`, and produces `1/r` inside otherwise.
pub fn inverse_distance(za: f64, zb: f64, d: f64) -> f64 {
    let p = panels_for(&[za, zb]);
    let rho = |r: f64| norm(za) * norm(zb) * (-(za + zb) * r).exp();
    if d == 0.0 {
        return p.integrate(|r| 4.0 * PI * r * rho(r));
    }
    let inner = p.integrate_up_to(d, |r| 4.0 * PI * r * r * rho(r) / d);
    let total_outer = p.integrate(|r| 4.0 * PI * r * rho(r));
    let below = p.integrate_up_to(d, |r| 4.0 * PI * r * rho(r));
    inner + total_outer - below
}

/// `(ab|cd)` by nested radial quadrature of the potential of `φ_cφ_d`.
pub fn eri(za: f64, zb: f64, zc: f64, zd: f64) -> f64 {
    let p = panels_for(&[za, zb, zc, zd]);
    let rho_ab = |r: f64| norm(za) * norm(zb) * (-(za + zb) * r).exp();
    let rho_cd = |r: f64| norm(zc) * norm(zd) * (-(zc + zd) * r).exp();
    let tail_total = p.integrate(|r| 4.0 * PI * r * rho_cd(r));
    p.integrate(|r1| {
        let q = p.integrate_up_to(r1, |r| 4.0 * PI * r * r * rho_cd(r));
        let tail = tail_total - p.integrate_up_to(r1, |r| 4.0 * PI * r * rho_cd(r));
        4.0 * PI * r1 * r1 * rho_ab(r1) * (q / r1 + tail)
    })
}

/// Two-center overlap in prolate spheroidal coordinates, where the product
/// of two 1s functions is smooth: `r_a = R(λ+μ)/2`, `r_b = R(λ−μ)/2`,
/// `d³x = (R³/8)(λ²−μ²) dλ dμ dφ`.
pub fn two_center_overlap(za: f64, zb: f64, r: f64) -> f64 {
    if r == 0.0 {
        return overlap(za, zb);
    }
    let (tm, wm) = gauss_legendre(64);
    let alpha = 0.5 * (za + zb) * r;
    let beta = 0.5 * (za - zb) * r;
    // λ ∈ [1, ∞) with λ − 1 on geometric panels
    let lam = Panels::new(1.0 / alpha.max(1e-3), 1.0 / alpha.max(1e-3));
    let pref = norm(za) * norm(zb) * 2.0 * PI * r * r * r / 8.0;
    lam.integrate(|u| {
        let l = 1.0 + u;
        let inner: f64 = tm
            .iter()
            .zip(&wm)
            .map(|(&m, &w)| w * (l * l - m * m) * (-alpha * l - beta * m).exp())
            .sum();
        pref * inner
    })
}
