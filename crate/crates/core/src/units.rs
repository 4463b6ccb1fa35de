//! Unit conventions.
//!
//! Everything internal is in Hartree atomic units: lengths in bohr, energies
//! in hartree, charges in multiples of the elementary charge.

/// Energy conversion used for every eV figure the toolkit reports.
pub const HARTREE_TO_EV: f64 = 27.211386;

/// Charge of one electron in elementary-charge units.
pub const ELECTRON_CHARGE: f64 = -1.0;

pub fn hartree_to_ev(e: f64) -> f64 {
    e * HARTREE_TO_EV
}
