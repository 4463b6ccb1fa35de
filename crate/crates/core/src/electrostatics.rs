//! Classical electrostatics of nuclei and charge clouds: potentials,
//! Hellmann-Feynman forces and the scaled-constants experiment.

use serde::Serialize;

use crate::density::{rms_charge_radius, ChargeDensityField};
use crate::error::{Error, Result};
use crate::integrals::overlap_same_center;
use crate::quadrature::{QuadratureGrid, RadialRule};
use crate::scalar::{Real, Vec3};
use crate::system::{DeterminantWavefunction, NuclearFrame, Spin, SpinOrbital, StoBasis};

/// `Σ_k q_k / |x − r_k|` (hartree per e).
pub fn potential_from_nuclei<T: Real>(frame: &NuclearFrame<T>, x: &Vec3<T>) -> Result<T> {
    let mut v = T::zero();
    for (k, n) in frame.nuclei().iter().enumerate() {
        let d = (x - n.position).norm();
        if d == T::zero() {
            return Err(Error::SingularPoint { nucleus: k });
        }
        v += n.charge / d;
    }
    Ok(v)
}

/// Shell-theorem evaluator for a spherically symmetric cloud.
pub(crate) struct SphericalCloud<'a, T: Real> {
    field: &'a ChargeDensityField<T>,
    center: Vec3<T>,
    rule: RadialRule<T>,
}

impl<'a, T: Real> SphericalCloud<'a, T> {
    /// Uses the grid's radial rule when the grid is radial about the cloud
    /// center, the default atomic rule otherwise.
    pub(crate) fn new(field: &'a ChargeDensityField<T>, grid: &QuadratureGrid<T>) -> Option<Self> {
        let center = field.spherical_center()?;
        let rule = match grid.radial() {
            Some((c, rule)) if *c == center => rule.clone(),
            _ => RadialRule::default_atomic(),
        };
        Some(Self {
            field,
            center,
            rule,
        })
    }

    fn rho(&self, r: T) -> T {
        self.field
            .charge_at(&(self.center + Vec3::new(T::zero(), T::zero(), r)))
    }

    fn four_pi() -> T {
        T::lit(4.0) * T::pi()
    }

    /// Charge inside radius `d`.
    pub(crate) fn enclosed(&self, d: T) -> T {
        self.rule
            .integrate_below(d, |r| Self::four_pi() * r * r * self.rho(r))
    }

    /// Potential of the cloud at distance `d` from its center.
    pub(crate) fn potential(&self, d: T) -> T {
        let outer = self
            .rule
            .integrate_above(d, |r| Self::four_pi() * r * self.rho(r));
        if d == T::zero() {
            outer
        } else {
            self.enclosed(d) / d + outer
        }
    }

    /// Electric field of the cloud at `x`.
    pub(crate) fn field_at(&self, x: &Vec3<T>) -> Vec3<T> {
        let rel = x - self.center;
        let d = rel.norm();
        if d == T::zero() {
            return Vec3::zeros();
        }
        rel * (self.enclosed(d) / (d * d * d))
    }

    /// `½∬ρρ′/|x−x′| = ∫4πr ρ(r) Q(r) dr`
    pub(crate) fn self_energy(&self) -> T {
        self.rule
            .integrate(|r| Self::four_pi() * r * self.rho(r) * self.enclosed(r))
    }
}

/// Potential of the electron cloud at `x` (hartree per e). Spherical clouds
/// use the shell theorem; other clouds are integrated on `grid`, skipping any
/// node that coincides with `x`.
pub fn cloud_potential<T: Real>(
    field: &ChargeDensityField<T>,
    x: &Vec3<T>,
    grid: &QuadratureGrid<T>,
) -> T {
    if field.electron_count() == 0 {
        return T::zero();
    }
    if let Some(cloud) = SphericalCloud::new(field, grid) {
        return cloud.potential((x - cloud.center).norm());
    }
    grid.integrate(|y| {
        let d = (y - x).norm();
        if d == T::zero() {
            T::zero()
        } else {
            field.charge_at(y) / d
        }
    })
}

/// Electric field of the electron cloud at `x`.
pub fn cloud_field<T: Real>(
    field: &ChargeDensityField<T>,
    x: &Vec3<T>,
    grid: &QuadratureGrid<T>,
) -> Vec3<T> {
    if field.electron_count() == 0 {
        return Vec3::zeros();
    }
    if let Some(cloud) = SphericalCloud::new(field, grid) {
        return cloud.field_at(x);
    }
    grid.integrate_vec(|y| {
        let rel = x - y;
        let d = rel.norm();
        if d == T::zero() {
            Vec3::zeros()
        } else {
            rel * (field.charge_at(y) / (d * d * d))
        }
    })
}

/// `∫ρ^q V d³x` with `V` the potential of the nuclei, evaluated as
/// `Σ_k q_k V_cloud(r_k)`.
pub fn classical_interaction_energy<T: Real>(
    field: &ChargeDensityField<T>,
    frame: &NuclearFrame<T>,
    grid: &QuadratureGrid<T>,
) -> T {
    frame.nuclei().iter().fold(T::zero(), |acc, n| {
        acc + n.charge * cloud_potential(field, &n.position, grid)
    })
}

/// Force on one nucleus, split into its sources (hartree/bohr).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NucleusForce<T: Real> {
    pub nuclear: Vec3<T>,
    pub electronic: Vec3<T>,
}

impl<T: Real> NucleusForce<T> {
    pub fn total(&self) -> Vec3<T> {
        self.nuclear + self.electronic
    }
}

/// `F_k = q_k Σ_{l≠k} q_l (r_k−r_l)/|r_k−r_l|³ + q_k ∫ρ^q(x)(r_k−x)/|r_k−x|³`
/// with the density held fixed.
pub fn hellmann_feynman_force<T: Real>(
    field: &ChargeDensityField<T>,
    frame: &NuclearFrame<T>,
    k: usize,
    grid: &QuadratureGrid<T>,
) -> Result<NucleusForce<T>> {
    let nuclei = frame.nuclei();
    let nk = nuclei
        .get(k)
        .ok_or_else(|| Error::InvalidInput(format!("no nucleus {k}")))?;
    let mut nuclear = Vec3::zeros();
    for (l, nl) in nuclei.iter().enumerate() {
        if l == k {
            continue;
        }
        let rel = nk.position - nl.position;
        let d = rel.norm();
        nuclear += rel * (nk.charge * nl.charge / (d * d * d));
    }
    let electronic = cloud_field(field, &nk.position, grid) * nk.charge;
    Ok(NucleusForce {
        nuclear,
        electronic,
    })
}

/// Forces on every nucleus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceReport {
    pub labels: Vec<String>,
    pub nuclear: Vec<[f64; 3]>,
    pub electronic: Vec<[f64; 3]>,
    pub total: Vec<[f64; 3]>,
}

pub fn force_report<T: Real>(
    field: &ChargeDensityField<T>,
    frame: &NuclearFrame<T>,
    grid: &QuadratureGrid<T>,
) -> Result<ForceReport> {
    let arr = |v: Vec3<T>| [v.x.as_f64(), v.y.as_f64(), v.z.as_f64()];
    let mut report = ForceReport {
        labels: Vec::new(),
        nuclear: Vec::new(),
        electronic: Vec::new(),
        total: Vec::new(),
    };
    for (k, n) in frame.nuclei().iter().enumerate() {
        let f = hellmann_feynman_force(field, frame, k, grid)?;
        report.labels.push(n.label.clone());
        report.nuclear.push(arr(f.nuclear));
        report.electronic.push(arr(f.electronic));
        report.total.push(arr(f.total()));
    }
    Ok(report)
}

/// Multipliers on the electron mass and the elementary charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledConstants<T: Real> {
    pub mass_factor: T,
    pub charge_factor: T,
}

impl<T: Real> ScaledConstants<T> {
    pub fn new(mass_factor: T, charge_factor: T) -> Result<Self> {
        if !(mass_factor > T::zero() && charge_factor > T::zero()) {
            return Err(Error::InvalidInput(
                "mass and charge factors must be positive".into(),
            ));
        }
        Ok(Self {
            mass_factor,
            charge_factor,
        })
    }
}

/// `a₀′/a₀ = 1/(m e²)` for multipliers `m` on the mass and `e` on the charge.
pub fn bohr_radius<T: Real>(mass_factor: T, charge_factor: T) -> Result<T> {
    let sc = ScaledConstants::new(mass_factor, charge_factor)?;
    Ok(T::one() / (sc.mass_factor * sc.charge_factor * sc.charge_factor))
}

/// Hydrogen before and after scaling the constants, lengths in original bohr
/// and energies in original hartree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleReport {
    pub mass_factor: f64,
    pub charge_factor: f64,
    pub bohr_ratio: f64,
    pub zeta_before: f64,
    pub zeta_after: f64,
    pub rms_before: f64,
    pub rms_after: f64,
    pub rms_ratio: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Overlap of the old and new ground states.
    pub overlap: f64,
    pub excited_after_scaling: bool,
}

/// Ground state of hydrogen under scaled constants. The rms radii are
/// integrated on the atomic grid, rescaled with the Bohr radius for the
/// scaled state.
pub fn scale_experiment<T: Real>(
    frame: &NuclearFrame<T>,
    electrons: usize,
    sc: ScaledConstants<T>,
) -> Result<ScaleReport> {
    let nuclei = frame.nuclei();
    if nuclei.len() != 1 || nuclei[0].charge != T::one() || electrons != 1 {
        return Err(Error::InvalidInput(
            "the scaling experiment needs one electron and a single q = 1 nucleus".into(),
        ));
    }
    let center = nuclei[0].position;
    let ratio = bohr_radius(sc.mass_factor, sc.charge_factor)?;
    let zeta_before = T::one();
    let zeta_after = zeta_before / ratio;
    let rms = |zeta: T, radius_scale: T| -> Result<T> {
        let basis = StoBasis::single_center(&[zeta], center)?;
        let wf = DeterminantWavefunction::new(
            vec![SpinOrbital::new(
                nalgebra::DVector::from_element(1, T::one()),
                Spin::Up,
            )],
            &basis,
        )?;
        let field = crate::density::density_from_determinant(&wf, &basis)?;
        let grid = QuadratureGrid::radial_spherical(
            center,
            RadialRule::default_atomic().rescaled(radius_scale),
        );
        rms_charge_radius(&field, &grid, Some(center))
    };
    let rms_before = rms(zeta_before, T::one())?;
    let rms_after = rms(zeta_after, ratio)?;
    // E = −m e⁴ / 2ħ²
    let energy = |m: T, e: T| -(m * e * e * e * e) / T::lit(2.0);
    Ok(ScaleReport {
        mass_factor: sc.mass_factor.as_f64(),
        charge_factor: sc.charge_factor.as_f64(),
        bohr_ratio: ratio.as_f64(),
        zeta_before: zeta_before.as_f64(),
        zeta_after: zeta_after.as_f64(),
        rms_before: rms_before.as_f64(),
        rms_after: rms_after.as_f64(),
        rms_ratio: (rms_after / rms_before).as_f64(),
        energy_before: energy(T::one(), T::one()).as_f64(),
        energy_after: energy(sc.mass_factor, sc.charge_factor).as_f64(),
        overlap: overlap_same_center(zeta_before, zeta_after).as_f64(),
        excited_after_scaling: ratio != T::one(),
    })
}
