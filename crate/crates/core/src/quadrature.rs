//! Quadrature rules and integration grids.
//!
//! * [`gauss_legendre`] nodes on `[-1, 1]`.
//! * [`RadialRule`]: Gauss-Legendre mapped to `[0, ∞)` through
//!   `r = R(1+t)/(1−t)`.
//! * [`QuadratureGrid`]: 3-D node/weight sets. The radial-spherical scheme
//!   pairs a radial rule with the six-point octahedral angular rule, which
//!   integrates spherically symmetric densities times polynomials of degree
//!   ≤ 3 exactly. The molecular scheme uses Becke fuzzy-cell partitioning of
//!   per-center product grids. Uniform boxes are for export.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec3};

/// Default radial node count for atomic densities.
pub const DEFAULT_RADIAL_NODES: usize = 96;
/// Default mapping radius (bohr).
pub const DEFAULT_MAP_RADIUS: f64 = 3.0;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let two = T::lit(2.0);
    let tol = T::eps() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess.
        let mut x = (T::pi() * (T::count(i) + T::lit(0.75)) / (T::count(n) + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != T::zero() { d } else { dp };
        let w = two / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre_interval<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (t, w) = gauss_legendre::<T>(n);
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    (
        t.into_iter().map(|t| mid + half * t).collect(),
        w.into_iter().map(|w| w * half).collect(),
    )
}

/// Gauss-Legendre rule on `[0, ∞)` via `r = R(1+t)/(1−t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule<T: Real> {
    map_radius: T,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> RadialRule<T> {
    pub fn mapped(n: usize, map_radius: T) -> Self {
        let (t, w) = gauss_legendre::<T>(n);
        let (nodes, weights) = t
            .iter()
            .zip(&w)
            .map(|(&t, &w)| {
                let (r, dr) = Self::map(map_radius, t);
                (r, w * dr)
            })
            .unzip();
        Self {
            map_radius,
            nodes,
            weights,
        }
    }

    pub fn default_atomic() -> Self {
        Self::mapped(DEFAULT_RADIAL_NODES, T::lit(DEFAULT_MAP_RADIUS))
    }

    #[inline]
    fn map(radius: T, t: T) -> (T, T) {
        let one = T::one();
        let r = radius * (one + t) / (one - t);
        let dr = T::lit(2.0) * radius / ((one - t) * (one - t));
        (r, dr)
    }

    #[inline]
    fn unmap(&self, r: T) -> T {
        (r - self.map_radius) / (r + self.map_radius)
    }

    pub fn map_radius(&self) -> T {
        self.map_radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Same mapping, half the nodes; used for error estimates.
    pub fn coarse(&self) -> Self {
        Self::mapped((self.len() / 2).max(1), self.map_radius)
    }

    /// Same node count with the mapping radius multiplied by `factor`.
    pub fn rescaled(&self, factor: T) -> Self {
        Self::mapped(self.len(), self.map_radius * factor)
    }

    /// `∫₀^∞ f(r) dr`
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&r, &w)| acc + w * f(r))
    }

    /// `∫₀^∞ 4π r² f(r) dr`
    pub fn integrate_spherical(&self, f: impl Fn(T) -> T) -> T {
        let four_pi = T::lit(4.0) * T::pi();
        self.integrate(|r| four_pi * r * r * f(r))
    }

    /// `∫₀^{upper} f(r) dr`, Gauss-Legendre over the mapped variable.
    pub fn integrate_below(&self, upper: T, f: impl Fn(T) -> T) -> T {
        if upper <= T::zero() {
            return T::zero();
        }
        self.integrate_mapped(-T::one(), self.unmap(upper), f)
    }

    /// `∫_{lower}^∞ f(r) dr`
    pub fn integrate_above(&self, lower: T, f: impl Fn(T) -> T) -> T {
        let lower = lower.max(T::zero());
        self.integrate_mapped(self.unmap(lower), T::one(), f)
    }

    fn integrate_mapped(&self, ta: T, tb: T, f: impl Fn(T) -> T) -> T {
        let (t, w) = gauss_legendre_interval(self.len(), ta, tb);
        t.iter().zip(&w).fold(T::zero(), |acc, (&t, &w)| {
            let (r, dr) = Self::map(self.map_radius, t);
            acc + w * dr * f(r)
        })
    }
}

/// Product angular rule: Gauss-Legendre in `cos θ`, uniform in `φ`. Exact
/// for spherical harmonics of degree `< 2 n_theta`.
pub fn product_angular_rule<T: Real>(n_theta: usize) -> Vec<(Vec3<T>, T)> {
    let (ct, wt) = gauss_legendre::<T>(n_theta);
    let n_phi = 2 * n_theta;
    let dphi = T::lit(2.0) * T::pi() / T::count(n_phi);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (&c, &w) in ct.iter().zip(&wt) {
        let s = (T::one() - c * c).max(T::zero()).sqrt();
        for k in 0..n_phi {
            let phi = dphi * (T::count(k) + T::lit(0.5));
            out.push((Vec3::new(s * phi.cos(), s * phi.sin(), c), w * dphi));
        }
    }
    out
}

/// Six-point octahedral rule (weights sum to 4π).
pub fn octahedral_rule<T: Real>() -> Vec<(Vec3<T>, T)> {
    let w = T::lit(4.0) * T::pi() / T::lit(6.0);
    let o = T::one();
    let z = T::zero();
    vec![
        (Vec3::new(o, z, z), w),
        (Vec3::new(-o, z, z), w),
        (Vec3::new(z, o, z), w),
        (Vec3::new(z, -o, z), w),
        (Vec3::new(z, z, o), w),
        (Vec3::new(z, z, -o), w),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    RadialSpherical,
    UniformBox,
    Molecular,
}

/// Uniform export box: `n` nodes per axis spanning `center ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec<T: Real> {
    pub counts: [usize; 3],
    pub half_width: T,
    pub center: Vec3<T>,
}

impl<T: Real> BoxSpec<T> {
    pub fn new(counts: [usize; 3], half_width: T) -> Result<Self> {
        if counts.contains(&0) {
            return Err(Error::InvalidInput("grid axis has zero resolution".into()));
        }
        if !(half_width > T::zero()) {
            return Err(Error::InvalidInput(
                "grid half-width must be positive".into(),
            ));
        }
        Ok(Self {
            counts,
            half_width,
            center: Vec3::zeros(),
        })
    }

    /// Coordinates along one axis.
    pub fn axis(&self, axis: usize) -> Vec<T> {
        let n = self.counts[axis];
        let c = self.center[axis];
        if n == 1 {
            return vec![c];
        }
        let step = T::lit(2.0) * self.half_width / T::count(n - 1);
        (0..n)
            .map(|i| c - self.half_width + step * T::count(i))
            .collect()
    }

    /// Trapezoid weights along one axis.
    fn axis_weights(&self, axis: usize) -> Vec<T> {
        let n = self.counts[axis];
        if n == 1 {
            return vec![T::lit(2.0) * self.half_width];
        }
        let step = T::lit(2.0) * self.half_width / T::count(n - 1);
        (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    step / T::lit(2.0)
                } else {
                    step
                }
            })
            .collect()
    }
}

impl<T: Real> FromStr for BoxSpec<T> {
    type Err = Error;

    /// Parses `"nx,ny,nz,halfwidth"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "grid spec {s:?} is not `nx,ny,nz,halfwidth`"
            )));
        }
        let mut counts = [0usize; 3];
        for (c, p) in counts.iter_mut().zip(&parts) {
            *c = p
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad grid count {p:?}")))?;
        }
        let hw: T = parts[3]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad half-width {:?}", parts[3])))?;
        Self::new(counts, hw)
    }
}

impl<T: Real> fmt::Display for BoxSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:?}",
            self.counts[0], self.counts[1], self.counts[2], self.half_width
        )
    }
}

/// A 3-D node/weight set.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T: Real> {
    scheme: GridScheme,
    points: Vec<Vec3<T>>,
    weights: Vec<T>,
    source: Source<T>,
}

/// Construction parameters, kept so a coarser companion grid can be built.
#[derive(Debug, Clone)]
enum Source<T: Real> {
    Radial(Vec3<T>, RadialRule<T>),
    Molecular(Vec<Vec3<T>>, RadialRule<T>, usize),
    Box,
}

impl<T: Real> QuadratureGrid<T> {
    /// Radial rule about `center` with the octahedral angular rule.
    pub fn radial_spherical(center: Vec3<T>, rule: RadialRule<T>) -> Self {
        let angular = octahedral_rule::<T>();
        let mut points = Vec::with_capacity(rule.len() * 6);
        let mut weights = Vec::with_capacity(rule.len() * 6);
        for (&r, &w) in rule.nodes().iter().zip(rule.weights()) {
            for (u, wa) in &angular {
                points.push(center + u * r);
                weights.push(w * r * r * *wa);
            }
        }
        Self {
            scheme: GridScheme::RadialSpherical,
            points,
            weights,
            source: Source::Radial(center, rule),
        }
    }

    /// The default atomic grid (96 mapped radial nodes, R = 3 bohr).
    pub fn atomic(center: Vec3<T>) -> Self {
        Self::radial_spherical(center, RadialRule::default_atomic())
    }

    /// Becke-partitioned product grids, one per center.
    pub fn molecular(centers: &[Vec3<T>], radial: &RadialRule<T>, n_theta: usize) -> Self {
        let angular = product_angular_rule::<T>(n_theta);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (a, ca) in centers.iter().enumerate() {
            for (&r, &wr) in radial.nodes().iter().zip(radial.weights()) {
                for (u, wa) in &angular {
                    let p = ca + u * r;
                    let w = wr * r * r * *wa * becke_weight(centers, a, &p);
                    if w != T::zero() {
                        points.push(p);
                        weights.push(w);
                    }
                }
            }
        }
        Self {
            scheme: GridScheme::Molecular,
            points,
            weights,
            source: Source::Molecular(centers.to_vec(), radial.clone(), n_theta),
        }
    }

    /// Molecular grid with the default radial rule and 16×32 angular nodes.
    pub fn molecular_default(centers: &[Vec3<T>]) -> Self {
        Self::molecular(
            centers,
            &RadialRule::mapped(DEFAULT_RADIAL_NODES, T::lit(1.5)),
            16,
        )
    }

    /// Trapezoid box grid (export only; converges slowly for cusped densities).
    pub fn uniform_box(spec: &BoxSpec<T>) -> Self {
        let axes: Vec<Vec<T>> = (0..3).map(|a| spec.axis(a)).collect();
        let ws: Vec<Vec<T>> = (0..3).map(|a| spec.axis_weights(a)).collect();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, &x) in axes[0].iter().enumerate() {
            for (j, &y) in axes[1].iter().enumerate() {
                for (k, &z) in axes[2].iter().enumerate() {
                    points.push(Vec3::new(x, y, z));
                    weights.push(ws[0][i] * ws[1][j] * ws[2][k]);
                }
            }
        }
        Self {
            scheme: GridScheme::UniformBox,
            points,
            weights,
            source: Source::Box,
        }
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Center and radial rule of a radial-spherical grid.
    pub fn radial(&self) -> Option<(&Vec3<T>, &RadialRule<T>)> {
        match &self.source {
            Source::Radial(c, r) => Some((c, r)),
            _ => None,
        }
    }

    /// The same construction at roughly half resolution, used for error
    /// estimates. Box grids have no companion.
    pub fn coarse(&self) -> Option<Self> {
        match &self.source {
            Source::Radial(c, r) => Some(Self::radial_spherical(*c, r.coarse())),
            Source::Molecular(cs, r, n) => Some(Self::molecular(cs, &r.coarse(), (n / 2).max(2))),
            Source::Box => None,
        }
    }

    /// `f` on this grid together with `|f(fine) − f(coarse)|` when a coarse
    /// companion exists.
    pub fn with_error_estimate<F>(&self, f: F) -> crate::Result<(T, Option<T>)>
    where
        F: Fn(&Self) -> crate::Result<T>,
    {
        let fine = f(self)?;
        let estimate = match self.coarse() {
            Some(c) => Some((fine - f(&c)?).abs()),
            None => None,
        };
        Ok((fine, estimate))
    }

    /// `Σ w_i f(x_i)`. Evaluation runs in parallel; the sum is taken in node
    /// order so results do not depend on scheduling.
    pub fn integrate<F>(&self, f: F) -> T
    where
        F: Fn(&Vec3<T>) -> T + Sync,
    {
        let values: Vec<T> = self.points.par_iter().map(&f).collect();
        values
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&v, &w)| acc + v * w)
    }

    /// Vector-valued integral, same ordering guarantee as [`Self::integrate`].
    pub fn integrate_vec<F>(&self, f: F) -> Vec3<T>
    where
        F: Fn(&Vec3<T>) -> Vec3<T> + Sync,
    {
        let values: Vec<Vec3<T>> = self.points.par_iter().map(&f).collect();
        values
            .iter()
            .zip(&self.weights)
            .fold(Vec3::zeros(), |acc, (v, &w)| acc + v * w)
    }
}

/// Becke fuzzy-cell weight of center `a` at point `p`.
fn becke_weight<T: Real>(centers: &[Vec3<T>], a: usize, p: &Vec3<T>) -> T {
    if centers.len() == 1 {
        return T::one();
    }
    let cell = |i: usize| -> T {
        let ri = (p - centers[i]).norm();
        let mut prod = T::one();
        for (j, cj) in centers.iter().enumerate() {
            if j == i {
                continue;
            }
            let rj = (p - cj).norm();
            let rij = (centers[i] - cj).norm();
            let mut mu = (ri - rj) / rij;
            for _ in 0..3 {
                mu = T::lit(1.5) * mu - T::lit(0.5) * mu * mu * mu;
            }
            prod *= T::lit(0.5) * (T::one() - mu);
        }
        prod
    };
    let total: T = (0..centers.len()).fold(T::zero(), |acc, i| acc + cell(i));
    if total == T::zero() {
        return T::zero();
    }
    cell(a) / total
}
