use cloudchem::system::{DeterminantWavefunction, NuclearFrame, Spin, SpinOrbital, StoBasis};
use cloudchem::Vec3;
use nalgebra::DVector;

/// Clementi-Roetti helium exponents.
pub const HE_ZETA: [f64; 5] = [1.41714, 2.37682, 4.39628, 6.52699, 7.94252];
/// Published coefficients (rounded to 5 digits; normalized on use).
pub const HE_COEFF: [f64; 5] = [0.76838, 0.22346, 0.04082, -0.00994, 0.00230];

pub fn helium() -> (NuclearFrame<f64>, StoBasis<f64>) {
    let f = NuclearFrame::atom("He", 2.0, Vec3::zeros()).unwrap();
    let b = StoBasis::single_center(&HE_ZETA, Vec3::zeros()).unwrap();
    (f, b)
}

/// Closed-shell determinant from the published coefficients.
pub fn helium_paper_wavefunction(basis: &StoBasis<f64>) -> DeterminantWavefunction<f64> {
    DeterminantWavefunction::restricted(&[DVector::from_row_slice(&HE_COEFF)], basis).unwrap()
}

/// Hydrogen-like ion with nuclear charge `z` at `center` and its exact 1s
/// ground state.
pub fn hydrogenic(
    z: f64,
    center: Vec3<f64>,
) -> (
    NuclearFrame<f64>,
    StoBasis<f64>,
    DeterminantWavefunction<f64>,
) {
    let f = NuclearFrame::atom("H", z, center).unwrap();
    let b = StoBasis::single_center(&[z], center).unwrap();
    let wf = one_electron(&b);
    (f, b, wf)
}

/// Single spin-up electron in the first basis function.
pub fn one_electron(basis: &StoBasis<f64>) -> DeterminantWavefunction<f64> {
    let mut c = DVector::zeros(basis.len());
    c[0] = 1.0;
    DeterminantWavefunction::new(vec![SpinOrbital::new(c, Spin::Up)], basis).unwrap()
}

pub fn ev(h: f64) -> f64 {
    h * cloudchem::units::HARTREE_TO_EV
}
