//! Kohn-Sham energy functional
//! `E = T_s + E_nn + ∫ρV + E_H[ρ] + E_xc[ρ]`
//! with pluggable exchange-correlation pieces and the Perdew-Zunger
//! self-interaction correction.
//!
//! The Hartree term is the classical self-energy `½∬ρρ′/|x−x′|`. For a
//! closed-shell pair this is `2J`, while the determinant's
//! `electron_repulsion_total` is `3J`; the `exact-from-hf` functional absorbs
//! the difference so that its total reproduces the determinant energy.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{density_from_determinant, ChargeDensityField};
use crate::electrostatics::{classical_interaction_energy, SphericalCloud};
use crate::error::{Error, Result};
use crate::hartree_fock::{perturb_restricted, two_electron_terms};
use crate::integrals::{kinetic_matrix, TwoElectronTensor};
use crate::quadrature::QuadratureGrid;
use crate::scalar::{Real, Vec3};
use crate::system::{DeterminantWavefunction, NuclearFrame, StoBasis};
use crate::units::HARTREE_TO_EV;

/// Energy terms in hartree. `xc` includes `sic` when a self-interaction
/// correction was requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KohnShamBreakdown<T: Real> {
    pub ts: T,
    pub nucleus_nucleus: T,
    pub external: T,
    pub hartree_term: T,
    pub xc: T,
    pub sic: T,
    pub total: T,
}

impl<T: Real> KohnShamBreakdown<T> {
    pub const FIELDS: [&'static str; 7] = [
        "ts",
        "nucleus_nucleus",
        "external",
        "hartree_term",
        "xc",
        "sic",
        "total",
    ];

    pub fn values(&self) -> [T; 7] {
        [
            self.ts,
            self.nucleus_nucleus,
            self.external,
            self.hartree_term,
            self.xc,
            self.sic,
            self.total,
        ]
    }

    pub fn to_ev(&self) -> KohnShamBreakdown<f64> {
        let v = self.values().map(|x| x.as_f64() * HARTREE_TO_EV);
        KohnShamBreakdown {
            ts: v[0],
            nucleus_nucleus: v[1],
            external: v[2],
            hartree_term: v[3],
            xc: v[4],
            sic: v[5],
            total: v[6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum XcFunctional {
    None,
    LdaExchange,
    /// Whatever remains of the determinant's interaction energy after the
    /// Hartree term: `(E_ee − Σ J_ii − Σ K_ij) − E_H`.
    ExactFromHf,
}

impl XcFunctional {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::LdaExchange => "lda-exchange",
            Self::ExactFromHf => "exact-from-hf",
        }
    }
}

impl fmt::Display for XcFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for XcFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "lda-exchange" => Ok(Self::LdaExchange),
            "exact-from-hf" => Ok(Self::ExactFromHf),
            _ => Err(Error::InvalidInput(format!("unknown xc functional {s:?}"))),
        }
    }
}

/// `½∬ρ(x)ρ(x′)/|x−x′|`, for spherical densities by the shell theorem.
pub fn hartree_energy<T: Real>(
    field: &ChargeDensityField<T>,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    if field.electron_count() == 0 {
        return Ok(T::zero());
    }
    let cloud = SphericalCloud::new(field, grid).ok_or_else(|| {
        Error::UnsupportedGeometry("Hartree energy needs a single-center s density".into())
    })?;
    Ok(cloud.self_energy())
}

/// `∫ρ^q V d³x` for the point-nucleus potential of `frame`.
pub fn external_energy<T: Real>(
    field: &ChargeDensityField<T>,
    frame: &NuclearFrame<T>,
    grid: &QuadratureGrid<T>,
) -> T {
    classical_interaction_energy(field, frame, grid)
}

/// `Σ_i ⟨χ_i|−½∇²|χ_i⟩`
pub fn ts_noninteracting<T: Real>(
    wf: &DeterminantWavefunction<T>,
    basis: &StoBasis<T>,
) -> Result<T> {
    let t = kinetic_matrix(basis)?;
    Ok(wf.orbitals().iter().fold(T::zero(), |acc, o| {
        acc + o.coefficients.dot(&(&t * &o.coefficients))
    }))
}

/// `C_x = ¾(3/π)^{1/3}`
pub fn lda_exchange_constant<T: Real>() -> T {
    T::lit(0.75) * (T::lit(3.0) / T::pi()).cbrt()
}

/// Dirac exchange `−C_x ∫ n^{4/3}` of a charge field.
pub fn lda_exchange<T: Real>(field: &ChargeDensityField<T>, grid: &QuadratureGrid<T>) -> T {
    if field.electron_count() == 0 {
        return T::zero();
    }
    lda_exchange_of(|x| field.number_at(x), grid)
}

/// Dirac exchange of an arbitrary number density; negative values count as
/// zero.
pub fn lda_exchange_of<T: Real, F>(n: F, grid: &QuadratureGrid<T>) -> T
where
    F: Fn(&Vec3<T>) -> T + Sync,
{
    let four_thirds = T::lit(4.0) / T::lit(3.0);
    -lda_exchange_constant::<T>()
        * grid.integrate(|x| {
            let v = n(x);
            if v > T::zero() {
                v.powf(four_thirds)
            } else {
                T::zero()
            }
        })
}

/// Perdew-Zunger correction split into its Hartree and xc parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfInteraction<T: Real> {
    pub hartree_part: T,
    pub xc_part: T,
}

impl<T: Real> SelfInteraction<T> {
    pub fn total(&self) -> T {
        self.hartree_part + self.xc_part
    }
}

/// `−Σ_i (E_H[ρ_i] + E_xc[ρ_i])` over single-orbital densities. Defined for
/// the `none` and `lda-exchange` functionals.
pub fn pz_self_interaction_correction<T: Real>(
    field: &ChargeDensityField<T>,
    xc: XcFunctional,
    grid: &QuadratureGrid<T>,
) -> Result<SelfInteraction<T>> {
    if xc == XcFunctional::ExactFromHf {
        return Err(Error::InvalidInput(
            "the self-interaction correction applies to density functionals only".into(),
        ));
    }
    let mut out = SelfInteraction {
        hartree_part: T::zero(),
        xc_part: T::zero(),
    };
    for rho_i in field.orbital_densities() {
        out.hartree_part -= hartree_energy(&rho_i, grid)?;
        if xc == XcFunctional::LdaExchange {
            out.xc_part -= lda_exchange(&rho_i, grid);
        }
    }
    Ok(out)
}

/// Kohn-Sham energy of the density and kinetic representative supplied by
/// `wf`.
pub fn kohn_sham_energy<T: Real>(
    wf: &DeterminantWavefunction<T>,
    basis: &StoBasis<T>,
    frame: &NuclearFrame<T>,
    xc: XcFunctional,
    sic: bool,
    grid: &QuadratureGrid<T>,
) -> Result<KohnShamBreakdown<T>> {
    let eri = match xc {
        XcFunctional::ExactFromHf => Some(TwoElectronTensor::new(basis)?),
        _ => None,
    };
    KohnShamEvaluator {
        basis,
        frame,
        xc,
        sic,
        grid,
        eri,
    }
    .evaluate(wf)
}

struct KohnShamEvaluator<'a, T: Real> {
    basis: &'a StoBasis<T>,
    frame: &'a NuclearFrame<T>,
    xc: XcFunctional,
    sic: bool,
    grid: &'a QuadratureGrid<T>,
    eri: Option<TwoElectronTensor<T>>,
}

impl<T: Real> KohnShamEvaluator<'_, T> {
    fn evaluate(&self, wf: &DeterminantWavefunction<T>) -> Result<KohnShamBreakdown<T>> {
        let field = density_from_determinant(wf, self.basis)?;
        let ts = ts_noninteracting(wf, self.basis)?;
        let external = external_energy(&field, self.frame, self.grid);
        let hartree_term = hartree_energy(&field, self.grid)?;
        let mut xc = match (self.xc, &self.eri) {
            (XcFunctional::None, _) => T::zero(),
            (XcFunctional::LdaExchange, _) => lda_exchange(&field, self.grid),
            (XcFunctional::ExactFromHf, Some(eri)) => {
                let two = two_electron_terms(eri, wf);
                two.coulomb - two.exchange - hartree_term
            }
            (XcFunctional::ExactFromHf, None) => unreachable!("tensor built for exact xc"),
        };
        let sic = if self.sic {
            pz_self_interaction_correction(&field, self.xc, self.grid)?.total()
        } else {
            T::zero()
        };
        xc += sic;
        let nucleus_nucleus = self.frame.nuclear_repulsion();
        Ok(KohnShamBreakdown {
            ts,
            nucleus_nucleus,
            external,
            hartree_term,
            xc,
            sic,
            total: ts + nucleus_nucleus + external + hartree_term + xc,
        })
    }
}

/// Outcome of random perturbations around a reference determinant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub reference_energy: f64,
    pub samples: usize,
    /// Perturbations that lowered the energy by more than the tolerance.
    pub violations: usize,
    pub tolerance: f64,
    pub min_delta: f64,
    pub mean_delta: f64,
    pub max_delta: f64,
}

/// Evaluates the Kohn-Sham energy over `samples` perturbed, renormalized
/// copies of `reference`. Perturbation `i` uses seed `seed + i`, so the
/// report does not depend on thread scheduling.
#[allow(clippy::too_many_arguments)]
pub fn variational_probe<T: Real>(
    frame: &NuclearFrame<T>,
    basis: &StoBasis<T>,
    reference: &DeterminantWavefunction<T>,
    xc: XcFunctional,
    grid: &QuadratureGrid<T>,
    scale: T,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let eri = match xc {
        XcFunctional::ExactFromHf => Some(TwoElectronTensor::new(basis)?),
        _ => None,
    };
    let eval = KohnShamEvaluator {
        basis,
        frame,
        xc,
        sic: false,
        grid,
        eri,
    };
    let e0 = eval.evaluate(reference)?.total;
    let deltas: Vec<T> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let wf = perturb_restricted(reference, basis, scale, seed.wrapping_add(i as u64))?;
            Ok(eval.evaluate(&wf)?.total - e0)
        })
        .collect::<Result<_>>()?;
    let tolerance = 1e-10;
    let d: Vec<f64> = deltas.iter().map(|x| x.as_f64()).collect();
    let n = d.len().max(1) as f64;
    Ok(ProbeReport {
        reference_energy: e0.as_f64(),
        samples,
        violations: d.iter().filter(|&&x| x < -tolerance).count(),
        tolerance,
        min_delta: d.iter().copied().fold(f64::INFINITY, f64::min),
        mean_delta: d.iter().sum::<f64>() / n,
        max_delta: d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
