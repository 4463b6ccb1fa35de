//! Closed-form integrals over normalized 1s Slater functions.
//!
//! One- and two-electron integrals are supported for primitives sharing a
//! center. Nuclear attraction from off-center nuclei uses the shell theorem:
//! the product of two same-center 1s functions is spherically symmetric, so
//! the potential it produces at distance `d` depends only on the charge
//! enclosed within `d` and the outer shells. The two-center overlap is
//! provided separately for validating externally supplied molecular
//! orbitals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::{NuclearFrame, StoBasis, StoPrimitive};

/// `(ζ_a ζ_b)^{3/2}`
#[inline]
fn pair_prefactor<T: Real>(za: T, zb: T) -> T {
    (za * zb).powf(T::lit(1.5))
}

/// `⟨a|b⟩ = 8(ζ_a ζ_b)^{3/2}/(ζ_a+ζ_b)³`
pub fn overlap_same_center<T: Real>(za: T, zb: T) -> T {
    let s = za + zb;
    T::lit(8.0) * pair_prefactor(za, zb) / (s * s * s)
}

/// `⟨a|−½∇²|b⟩ = 4(ζ_a ζ_b)^{5/2}/(ζ_a+ζ_b)³`
pub fn kinetic_same_center<T: Real>(za: T, zb: T) -> T {
    let s = za + zb;
    T::lit(4.0) * pair_prefactor(za, zb) * za * zb / (s * s * s)
}

/// `(1 − e^{−x}(1 + x/2))/x`, accurate for small `x`.
fn shell_potential_factor<T: Real>(x: T) -> T {
    if x < T::lit(0.25) {
        // Σ_{n≥1} (−1)^{n+1}(1 − n/2) x^{n−1}/n!
        let mut sum = T::zero();
        let mut pow = T::one(); // x^{n-1}/n!
        for n in 1..=24 {
            pow /= T::count(n);
            let coeff = T::one() - T::count(n) / T::lit(2.0);
            let term = coeff * pow;
            sum = if n % 2 == 1 { sum + term } else { sum - term };
            pow *= x;
        }
        sum
    } else {
        (T::one() - (-x).exp() * (T::one() + x / T::lit(2.0))) / x
    }
}

/// Potential at distance `d` from the center of the unit-charge density
/// `s³/(8π) e^{−s r}`.
pub fn exponential_shell_potential<T: Real>(s: T, d: T) -> T {
    s * shell_potential_factor(s * d)
}

/// `⟨a| 1/|x−R| |b⟩` for same-center primitives and a point at distance `d`
/// from their center.
pub fn inverse_distance_same_center<T: Real>(za: T, zb: T, d: T) -> T {
    overlap_same_center(za, zb) * exponential_shell_potential(za + zb, d)
}

/// Electron repulsion `(ab|cd)` for four same-center primitives.
///
/// With `s₁ = ζ_a+ζ_b`, `s₂ = ζ_c+ζ_d`, `t = s₁+s₂`:
/// `32 (ζ_aζ_bζ_cζ_d)^{3/2} (s₁² + 3s₁s₂ + s₂²) / (s₁² s₂² t³)`.
pub fn eri_same_center<T: Real>(za: T, zb: T, zc: T, zd: T) -> T {
    let s1 = za + zb;
    let s2 = zc + zd;
    let t = s1 + s2;
    let num = s1 * s1 + T::lit(3.0) * s1 * s2 + s2 * s2;
    T::lit(32.0) * pair_prefactor(za, zb) * pair_prefactor(zc, zd) * num
        / (s1 * s1 * s2 * s2 * t * t * t)
}

/// Overlap of two normalized 1s functions a distance `r` apart, via prolate
/// spheroidal coordinates.
pub fn two_center_overlap<T: Real>(za: T, zb: T, r: T) -> T {
    if r <= T::eps() * (T::one() + r) {
        return overlap_same_center(za, zb);
    }
    let half = T::lit(0.5);
    let p = (za + zb) * r * half;
    let q = (za - zb) * r * half;
    let a0 = aux_a(0, p);
    let a2 = aux_a(2, p);
    let b0 = aux_b(0, q);
    let b2 = aux_b(2, q);
    pair_prefactor(za, zb) * r * r * r / T::lit(4.0) * (a2 * b0 - a0 * b2)
}

/// `∫₁^∞ ξⁿ e^{−pξ} dξ`
fn aux_a<T: Real>(n: usize, p: T) -> T {
    // e^{−p} Σ_{k=0}^{n} n!/(k! p^{n−k+1})
    let mut sum = T::zero();
    let mut nf_over_kf = T::one(); // n!/k! for k = n
    for k in (0..=n).rev() {
        sum += nf_over_kf / p.powi((n - k + 1) as i32);
        nf_over_kf *= T::count(k.max(1));
    }
    (-p).exp() * sum
}

/// `∫₋₁¹ ηⁿ e^{−qη} dη`
fn aux_b<T: Real>(n: usize, q: T) -> T {
    if q.abs() < T::lit(0.5) {
        // Σ_k (−q)^k/k! · 2/(n+k+1), even n+k only
        let mut sum = T::zero();
        let mut term = T::one(); // (−q)^k / k!
        for k in 0..40 {
            if (n + k).is_multiple_of(2) {
                sum += term * T::lit(2.0) / T::count(n + k + 1);
            }
            term *= -q / T::count(k + 1);
        }
        return sum;
    }
    match n {
        0 => T::lit(2.0) * q.sinh() / q,
        2 => {
            let two = T::lit(2.0);
            let q2 = q * q;
            let q3 = q2 * q;
            q.exp() * (T::one() / q - two / q2 + two / q3)
                - (-q).exp() * (T::one() / q + two / q2 + two / q3)
        }
        _ => unreachable!("only n = 0, 2 are needed for 1s overlaps"),
    }
}

fn require_same_center<T: Real>(ps: &[&StoPrimitive<T>]) -> Result<()> {
    let c = ps[0].center;
    if ps.iter().any(|p| p.center != c) {
        return Err(Error::UnsupportedGeometry(
            "integral requested over primitives on different centers".into(),
        ));
    }
    Ok(())
}

pub fn overlap<T: Real>(a: &StoPrimitive<T>, b: &StoPrimitive<T>) -> Result<T> {
    require_same_center(&[a, b])?;
    Ok(overlap_same_center(a.zeta, b.zeta))
}

pub fn kinetic<T: Real>(a: &StoPrimitive<T>, b: &StoPrimitive<T>) -> Result<T> {
    require_same_center(&[a, b])?;
    Ok(kinetic_same_center(a.zeta, b.zeta))
}

/// `Σ_k −q_k ⟨a| 1/|x−r_k| |b⟩` where the primitives sit on `basis` centers.
pub fn nuclear_attraction<T: Real>(
    a: &StoPrimitive<T>,
    b: &StoPrimitive<T>,
    basis: &StoBasis<T>,
    frame: &NuclearFrame<T>,
) -> Result<T> {
    require_same_center(&[a, b])?;
    let center = basis.centers()[a.center];
    let mut v = T::zero();
    for n in frame.nuclei() {
        let d = (n.position - center).norm();
        v -= n.charge * inverse_distance_same_center(a.zeta, b.zeta, d);
    }
    Ok(v)
}

pub fn electron_repulsion<T: Real>(
    a: &StoPrimitive<T>,
    b: &StoPrimitive<T>,
    c: &StoPrimitive<T>,
    d: &StoPrimitive<T>,
) -> Result<T> {
    require_same_center(&[a, b, c, d])?;
    Ok(eri_same_center(a.zeta, b.zeta, c.zeta, d.zeta))
}

/// Overlap matrix for any basis; primitives on distinct centers use the
/// two-center formula.
pub fn overlap_matrix<T: Real>(basis: &StoBasis<T>) -> DMatrix<T> {
    let n = basis.len();
    let p = basis.primitives();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = if p[i].center == p[j].center {
                overlap_same_center(p[i].zeta, p[j].zeta)
            } else {
                let r = (basis.center_of(i) - basis.center_of(j)).norm();
                two_center_overlap(p[i].zeta, p[j].zeta, r)
            };
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Overlap, kinetic and nuclear-attraction matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OneElectronMatrices<T: Real> {
    pub s: DMatrix<T>,
    pub t: DMatrix<T>,
    pub vne: DMatrix<T>,
}

impl<T: Real> OneElectronMatrices<T> {
    pub fn core_hamiltonian(&self) -> DMatrix<T> {
        &self.t + &self.vne
    }
}

fn single_center<T: Real>(basis: &StoBasis<T>) -> Result<()> {
    basis
        .shared_center()
        .map(|_| ())
        .ok_or_else(|| Error::UnsupportedGeometry("integrals require a single-center basis".into()))
}

/// Kinetic-energy matrix of a single-center basis.
pub fn kinetic_matrix<T: Real>(basis: &StoBasis<T>) -> Result<DMatrix<T>> {
    single_center(basis)?;
    let p = basis.primitives();
    Ok(DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        kinetic_same_center(p[i].zeta, p[j].zeta)
    }))
}

pub fn one_electron_matrices<T: Real>(
    basis: &StoBasis<T>,
    frame: &NuclearFrame<T>,
) -> Result<OneElectronMatrices<T>> {
    single_center(basis)?;
    let n = basis.len();
    let p = basis.primitives();
    let mut t = DMatrix::zeros(n, n);
    let mut vne = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let tv = kinetic(&p[i], &p[j])?;
            let vv = nuclear_attraction(&p[i], &p[j], basis, frame)?;
            t[(i, j)] = tv;
            t[(j, i)] = tv;
            vne[(i, j)] = vv;
            vne[(j, i)] = vv;
        }
    }
    Ok(OneElectronMatrices {
        s: overlap_matrix(basis),
        t,
        vne,
    })
}

/// Dense electron-repulsion tensor `(ab|cd)` in chemists' notation.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoElectronTensor<T: Real> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> TwoElectronTensor<T> {
    /// Evaluates each symmetry-unique quadruple once and scatters it to all
    /// eight permutations, so the symmetry is exact.
    pub fn new(basis: &StoBasis<T>) -> Result<Self> {
        single_center(basis)?;
        let n = basis.len();
        let p = basis.primitives();
        let mut data = vec![T::zero(); n * n * n * n];
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        for a in 0..n {
            for b in 0..=a {
                for c in 0..n {
                    for d in 0..=c {
                        if (c, d) > (a, b) {
                            continue;
                        }
                        let v = electron_repulsion(&p[a], &p[b], &p[c], &p[d])?;
                        for (i, j, k, l) in [
                            (a, b, c, d),
                            (b, a, c, d),
                            (a, b, d, c),
                            (b, a, d, c),
                            (c, d, a, b),
                            (d, c, a, b),
                            (c, d, b, a),
                            (d, c, b, a),
                        ] {
                            data[idx(i, j, k, l)] = v;
                        }
                    }
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    /// `Σ_{abcd} u_a v_b w_c x_d (ab|cd)`
    pub fn contract(
        &self,
        u: &nalgebra::DVector<T>,
        v: &nalgebra::DVector<T>,
        w: &nalgebra::DVector<T>,
        x: &nalgebra::DVector<T>,
    ) -> T {
        let n = self.n;
        let mut total = T::zero();
        for a in 0..n {
            for b in 0..n {
                let uv = u[a] * v[b];
                let mut inner = T::zero();
                for c in 0..n {
                    for d in 0..n {
                        inner += w[c] * x[d] * self.get(a, b, c, d);
                    }
                }
                total += uv * inner;
            }
        }
        total
    }
}
