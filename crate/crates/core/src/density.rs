//! Charge density `ρ^q(x) = −e Σ_i |χ_i(x)|²` of a determinant, the
//! marginal density of an explicit two-electron amplitude, moments of the
//! density and grid export.
//!
//! Charges are in units of `e` (the electron carries `−1`), lengths in bohr.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{BoxSpec, QuadratureGrid};
use crate::scalar::{Real, Vec3};
use crate::system::{DeterminantWavefunction, NuclearFrame, StoBasis, ORTHONORMALITY_REJECT};
use crate::units::ELECTRON_CHARGE;

/// Spatial two-electron amplitude `ψ(x₁, x₂)`.
pub type PairAmplitude<T> = Arc<dyn Fn(&Vec3<T>, &Vec3<T>) -> T + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Determinant,
    ExplicitPair,
}

/// Exchange symmetry declared for a spatial pair amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSymmetry {
    Symmetric,
    Antisymmetric,
    /// No symmetry claimed; only the direct marginal is available.
    Unspecified,
}

/// How the marginal of a pair amplitude is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    /// `ρ(x) = −e[∫|ψ(x,y)|²dy + ∫|ψ(y,x)|²dy]`
    Direct,
    /// `ρ(x) = −2e∫|ψ(x,y)|²dy`, valid when `|ψ|²` is exchange-symmetric.
    EqualTerms,
}

#[derive(Clone)]
enum Source<T: Real> {
    Orbitals {
        basis: StoBasis<T>,
        coefficients: Vec<DVector<T>>,
    },
    Pair {
        amplitude: PairAmplitude<T>,
        grid: Arc<QuadratureGrid<T>>,
        marginal: Marginal,
    },
}

/// A sign-carrying charge density field.
#[derive(Clone)]
pub struct ChargeDensityField<T: Real> {
    source: Source<T>,
    electron_count: usize,
    scale: T,
}

impl<T: Real> fmt::Debug for ChargeDensityField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChargeDensityField")
            .field("provenance", &self.provenance())
            .field("electron_count", &self.electron_count)
            .field("scale", &self.scale)
            .finish()
    }
}

impl<T: Real> ChargeDensityField<T> {
    pub fn electron_count(&self) -> usize {
        self.electron_count
    }

    pub fn provenance(&self) -> Provenance {
        match self.source {
            Source::Orbitals { .. } => Provenance::Determinant,
            Source::Pair { .. } => Provenance::ExplicitPair,
        }
    }

    /// Overall multiplier applied to the density (1 unless [`Self::scaled`]).
    pub fn scale(&self) -> T {
        self.scale
    }

    /// `λρ`, deliberately not renormalized.
    pub fn scaled(&self, lambda: T) -> Self {
        let mut out = self.clone();
        out.scale *= lambda;
        out
    }

    /// Charge density at `x` (e/bohr³, never positive).
    pub fn charge_at(&self, x: &Vec3<T>) -> T {
        let e = T::lit(ELECTRON_CHARGE);
        match &self.source {
            Source::Orbitals {
                basis,
                coefficients,
            } => {
                if coefficients.is_empty() {
                    return T::zero();
                }
                let phi = basis.values_at(x);
                let sum = coefficients.iter().fold(T::zero(), |acc, c| {
                    let v = phi.dot(c);
                    acc + v * v
                });
                e * self.scale * sum
            }
            Source::Pair {
                amplitude,
                grid,
                marginal,
            } => {
                let sum = match marginal {
                    Marginal::Direct => grid.integrate(|y| {
                        let a = amplitude(x, y);
                        let b = amplitude(y, x);
                        a * a + b * b
                    }),
                    Marginal::EqualTerms => {
                        T::lit(2.0)
                            * grid.integrate(|y| {
                                let a = amplitude(x, y);
                                a * a
                            })
                    }
                };
                e * self.scale * sum
            }
        }
    }

    /// Number density `ρ^q/(−e)` at `x` (bohr⁻³).
    pub fn number_at(&self, x: &Vec3<T>) -> T {
        self.charge_at(x) / T::lit(ELECTRON_CHARGE)
    }

    /// Center of spherical symmetry: every orbital built from s functions on
    /// one center.
    pub fn spherical_center(&self) -> Option<Vec3<T>> {
        match &self.source {
            Source::Orbitals { basis, .. } => basis.shared_center().map(|c| basis.centers()[c]),
            Source::Pair { .. } => None,
        }
    }

    /// Density along a ray from the spherical center; `None` otherwise.
    pub fn radial_profile(&self) -> Option<impl Fn(T) -> T + Sync + '_> {
        let c = self.spherical_center()?;
        Some(move |r: T| self.charge_at(&(c + Vec3::new(T::zero(), T::zero(), r))))
    }

    /// One field per occupied spin orbital, each holding one electron.
    /// Empty for explicit-pair fields.
    pub fn orbital_densities(&self) -> Vec<Self> {
        match &self.source {
            Source::Orbitals {
                basis,
                coefficients,
            } => coefficients
                .iter()
                .map(|c| Self {
                    source: Source::Orbitals {
                        basis: basis.clone(),
                        coefficients: vec![c.clone()],
                    },
                    electron_count: 1,
                    scale: self.scale,
                })
                .collect(),
            Source::Pair { .. } => Vec::new(),
        }
    }

    /// Density of occupied orbital `i`.
    pub fn orbital_density(&self, i: usize) -> Result<Self> {
        self.orbital_densities()
            .into_iter()
            .nth(i)
            .ok_or_else(|| Error::InvalidInput(format!("no orbital {i} in this density")))
    }
}

/// `ρ^q(x) = −e Σ_i χ_i†(x)χ_i(x)`.
pub fn density_from_determinant<T: Real>(
    wf: &DeterminantWavefunction<T>,
    basis: &StoBasis<T>,
) -> Result<ChargeDensityField<T>> {
    let coefficients: Vec<DVector<T>> = wf
        .orbitals()
        .iter()
        .map(|o| o.coefficients.clone())
        .collect();
    if coefficients.iter().any(|c| c.len() != basis.len()) {
        return Err(Error::InvalidInput(
            "wavefunction does not match the basis".into(),
        ));
    }
    Ok(ChargeDensityField {
        source: Source::Orbitals {
            basis: basis.clone(),
            coefficients,
        },
        electron_count: wf.electron_count(),
        scale: T::one(),
    })
}

/// Marginal density of a two-electron spatial amplitude. The amplitude must
/// be normalized on `grid` to within `1e-6`; a declared exchange symmetry is
/// spot-checked on grid node pairs.
pub fn density_from_explicit_pair<T: Real>(
    amplitude: PairAmplitude<T>,
    grid: QuadratureGrid<T>,
    symmetry: PairSymmetry,
    marginal: Marginal,
) -> Result<ChargeDensityField<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("pair grid has no nodes".into()));
    }
    let norm = grid.integrate(|x| {
        grid.points()
            .iter()
            .zip(grid.weights())
            .fold(T::zero(), |acc, (y, &w)| {
                let a = amplitude(x, y);
                acc + w * a * a
            })
    });
    if (norm - T::one()).abs() > T::lit(ORTHONORMALITY_REJECT) {
        return Err(Error::InvalidInput(format!(
            "pair amplitude norm is {norm:?}, expected 1"
        )));
    }
    let sign = match symmetry {
        PairSymmetry::Symmetric => Some(T::one()),
        PairSymmetry::Antisymmetric => Some(-T::one()),
        PairSymmetry::Unspecified => None,
    };
    match (sign, marginal) {
        (None, Marginal::EqualTerms) => {
            return Err(Error::InvalidInput(
                "the equal-terms marginal needs a declared exchange symmetry".into(),
            ))
        }
        (Some(sign), _) => {
            let pts = grid.points();
            let stride = (pts.len() / 16).max(1);
            for x in pts.iter().step_by(stride) {
                for y in pts.iter().step_by(stride * 3 + 1) {
                    let a = amplitude(x, y);
                    let b = amplitude(y, x);
                    let tol = T::lit(1e-9) * (a.abs() + b.abs()) + T::lit(1e-30);
                    if (a - sign * b).abs() > tol {
                        return Err(Error::InvalidInput(
                            "pair amplitude does not have the declared exchange symmetry".into(),
                        ));
                    }
                }
            }
        }
        (None, Marginal::Direct) => {}
    }
    Ok(ChargeDensityField {
        source: Source::Pair {
            amplitude,
            grid: Arc::new(grid),
            marginal,
        },
        electron_count: 2,
        scale: T::one(),
    })
}

/// Number density view of a charge field.
#[derive(Debug, Clone)]
pub struct NumberDensity<T: Real> {
    field: ChargeDensityField<T>,
}

impl<T: Real> NumberDensity<T> {
    pub fn value_at(&self, x: &Vec3<T>) -> T {
        self.field.number_at(x)
    }

    pub fn integrate(&self, grid: &QuadratureGrid<T>) -> T {
        if self.field.electron_count == 0 {
            return T::zero();
        }
        grid.integrate(|x| self.value_at(x))
    }

    pub fn field(&self) -> &ChargeDensityField<T> {
        &self.field
    }
}

pub fn expected_number_density<T: Real>(field: &ChargeDensityField<T>) -> NumberDensity<T> {
    NumberDensity {
        field: field.clone(),
    }
}

/// `∫ρ^q d³x` in units of `e`. Exactly zero for an empty system.
pub fn total_charge<T: Real>(field: &ChargeDensityField<T>, grid: &QuadratureGrid<T>) -> T {
    if field.electron_count == 0 {
        return T::zero();
    }
    grid.integrate(|x| field.charge_at(x))
}

/// Charge-weighted centroid `∫xρ / ∫ρ`.
pub fn charge_centroid<T: Real>(
    field: &ChargeDensityField<T>,
    grid: &QuadratureGrid<T>,
) -> Result<Vec3<T>> {
    let q = total_charge(field, grid);
    if q == T::zero() {
        return Err(Error::InvalidInput("density carries no charge".into()));
    }
    Ok(grid.integrate_vec(|x| x * field.charge_at(x)) / q)
}

/// `sqrt(∫ρ|x−c|² / ∫ρ)` about `center`, or about the centroid when `None`.
pub fn rms_charge_radius<T: Real>(
    field: &ChargeDensityField<T>,
    grid: &QuadratureGrid<T>,
    center: Option<Vec3<T>>,
) -> Result<T> {
    let q = total_charge(field, grid);
    if q == T::zero() {
        return Err(Error::InvalidInput("density carries no charge".into()));
    }
    let c = match center {
        Some(c) => c,
        None => grid.integrate_vec(|x| x * field.charge_at(x)) / q,
    };
    let second = grid.integrate(|x| (x - c).norm_squared() * field.charge_at(x));
    Ok((second / q).sqrt())
}

/// `Σ_k q_k r_k + ∫xρ^q d³x` (e·bohr).
pub fn dipole_moment<T: Real>(
    field: &ChargeDensityField<T>,
    frame: &NuclearFrame<T>,
    grid: &QuadratureGrid<T>,
) -> Vec3<T> {
    let nuclear = frame
        .nuclei()
        .iter()
        .fold(Vec3::zeros(), |acc, n| acc + n.position * n.charge);
    if field.electron_count == 0 {
        return nuclear;
    }
    nuclear + grid.integrate_vec(|x| x * field.charge_at(x))
}

/// A square plane section: `origin + u·e_u + v·e_v` for `u, v` in
/// `[−half_width, half_width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec<T: Real> {
    pub origin: Vec3<T>,
    pub e_u: Vec3<T>,
    pub e_v: Vec3<T>,
    pub counts: [usize; 2],
    pub half_width: T,
}

impl<T: Real> SliceSpec<T> {
    /// Coordinate plane (`"xy"`, `"xz"` or `"yz"`) through `origin`.
    pub fn coordinate_plane(
        plane: &str,
        origin: Vec3<T>,
        counts: [usize; 2],
        half_width: T,
    ) -> Result<Self> {
        let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
        let (a, b) = match plane {
            "xy" => (0, 1),
            "xz" => (0, 2),
            "yz" => (1, 2),
            _ => return Err(Error::InvalidInput(format!("unknown plane {plane:?}"))),
        };
        if counts.contains(&0) {
            return Err(Error::InvalidInput(
                "slice resolution must be nonzero".into(),
            ));
        }
        if !(half_width > T::zero()) {
            return Err(Error::InvalidInput(
                "slice half-width must be positive".into(),
            ));
        }
        Ok(Self {
            origin,
            e_u: axes[a],
            e_v: axes[b],
            counts,
            half_width,
        })
    }

    fn coords(&self, n: usize) -> Vec<T> {
        if n == 1 {
            return vec![T::zero()];
        }
        let step = T::lit(2.0) * self.half_width / T::count(n - 1);
        (0..n)
            .map(|i| -self.half_width + step * T::count(i))
            .collect()
    }
}

/// Writes `x,y,z,rho` rows (header first, x slowest) for every node of the
/// box, and returns the trapezoid-rule total charge of the written samples.
pub fn export_box_csv<T: Real, W: Write>(
    field: &ChargeDensityField<T>,
    spec: &BoxSpec<T>,
    out: &mut W,
) -> Result<T> {
    let grid = QuadratureGrid::uniform_box(spec);
    let values = sample(field, grid.points());
    writeln!(out, "x,y,z,rho")?;
    let mut total = T::zero();
    for ((p, v), w) in grid.points().iter().zip(&values).zip(grid.weights()) {
        writeln!(out, "{:e},{:e},{:e},{:e}", p.x, p.y, p.z, v)?;
        total += *v * *w;
    }
    Ok(total)
}

/// Writes `u,v,rho` rows for a plane section (u slowest).
pub fn export_slice_csv<T: Real, W: Write>(
    field: &ChargeDensityField<T>,
    spec: &SliceSpec<T>,
    out: &mut W,
) -> Result<()> {
    let us = spec.coords(spec.counts[0]);
    let vs = spec.coords(spec.counts[1]);
    let mut uv = Vec::with_capacity(us.len() * vs.len());
    let mut points = Vec::with_capacity(us.len() * vs.len());
    for &u in &us {
        for &v in &vs {
            uv.push((u, v));
            points.push(spec.origin + spec.e_u * u + spec.e_v * v);
        }
    }
    let values = sample(field, &points);
    writeln!(out, "u,v,rho")?;
    for ((u, v), rho) in uv.iter().zip(&values) {
        writeln!(out, "{u:e},{v:e},{rho:e}")?;
    }
    Ok(())
}

fn sample<T: Real>(field: &ChargeDensityField<T>, points: &[Vec3<T>]) -> Vec<T> {
    use rayon::prelude::*;
    points.par_iter().map(|p| field.charge_at(p)).collect()
}

/// Sidecar document written next to a box export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMetadata {
    pub columns: Vec<String>,
    pub grid: String,
    pub electron_count: usize,
    /// Total charge on the accurate quadrature grid.
    pub integrated_charge: f64,
    /// Trapezoid total over the exported samples.
    pub box_charge: f64,
    /// `box_charge − integrated_charge`.
    pub box_quadrature_error: f64,
    pub toolkit_version: String,
    pub created_unix: u64,
}

/// Samples read back from a box export.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedBox {
    pub spec: BoxSpec<f64>,
    pub values: Vec<f64>,
}

impl ImportedBox {
    /// Parses `x,y,z,rho` text written by [`export_box_csv`]; the box
    /// geometry is recovered from the coordinates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "x,y,z,rho" {
                    return Err(Error::parse(1, "expected header x,y,z,rho"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if fields.len() != 4 {
                return Err(Error::parse(i + 1, "expected 4 columns"));
            }
            rows.push(fields);
        }
        let distinct = |k: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
            v
        };
        let axes: Vec<Vec<f64>> = (0..3).map(distinct).collect();
        let counts = [axes[0].len(), axes[1].len(), axes[2].len()];
        if counts.contains(&0) || counts.iter().product::<usize>() != rows.len() {
            return Err(Error::InvalidInput(
                "exported samples do not form a full box".into(),
            ));
        }
        let half_width = axes
            .iter()
            .filter(|a| a.len() > 1)
            .map(|a| (a[a.len() - 1] - a[0]) / 2.0)
            .fold(0.0, f64::max);
        let center = Vec3::from_fn(|k, _| (axes[k][0] + axes[k][counts[k] - 1]) / 2.0);
        let mut spec = BoxSpec::new(counts, half_width)?;
        spec.center = center;
        Ok(Self {
            spec,
            values: rows.iter().map(|r| r[3]).collect(),
        })
    }

    /// Trapezoid integral of the samples.
    pub fn integrate(&self) -> f64 {
        let grid = QuadratureGrid::uniform_box(&self.spec);
        grid.weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }
}
