//! Charge-density toolkit for small atoms built from 1s Slater-type
//! orbitals: closed-form integrals, restricted Hartree-Fock, charge densities
//! and their moments, a Kohn-Sham energy functional and classical
//! electrostatics of the resulting clouds.
//!
//! Everything is generic over the scalar type through [`Real`]; the
//! `f64` aliases below are what most callers want.

// `!(x > 0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod dft;
pub mod electrostatics;
pub mod error;
pub mod hartree_fock;
pub mod integrals;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod system;
pub mod units;

pub use error::{Error, Result};
pub use scalar::{Real, Vec3};

pub type NuclearFrame = system::NuclearFrame<f64>;
pub type StoBasis = system::StoBasis<f64>;
pub type DeterminantWavefunction = system::DeterminantWavefunction<f64>;
pub type ChargeDensityField = density::ChargeDensityField<f64>;
pub type QuadratureGrid = quadrature::QuadratureGrid<f64>;
pub type EnergyReport = hartree_fock::EnergyReport<f64>;
pub type ScfSettings = hartree_fock::ScfSettings<f64>;
pub type ScfOutcome = hartree_fock::ScfOutcome<f64>;
pub type KohnShamBreakdown = dft::KohnShamBreakdown<f64>;

/// Crate version, recorded in export metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
