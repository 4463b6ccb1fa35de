//! Restricted closed-shell Roothaan SCF and the five-term potential-energy
//! decomposition of a determinant's energy.
//!
//! The decomposition reports, for spin orbitals `χ_i`:
//!
//! | field                      | expression                               |
//! |----------------------------|------------------------------------------|
//! | `kinetic`                  | `Σ_i ⟨χ_i|−½∇²|χ_i⟩`                     |
//! | `nucleus_nucleus`          | `Σ_{k<l} q_k q_l / r_kl`                 |
//! | `electron_nucleus`         | `−Σ_i Σ_k q_k ⟨χ_i|1/|x−r_k||χ_i⟩`       |
//! | `electron_repulsion_total` | `Σ_i Σ_{j≥i} J_ij` (self terms included) |
//! | `self_repulsion`           | `Σ_i J_ii` (entered with a minus sign)   |
//! | `exchange`                 | `Σ_i Σ_{j>i} K_ij` (minus sign)          |
//! | `coulomb_integral`         | `Σ_i Σ_{j>i} J_ij`                       |
//!
//! where `J_ij = (ii|jj)` and `K_ij = (ij|ji)` vanishes for opposite spins.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{one_electron_matrices, OneElectronMatrices, TwoElectronTensor};
use crate::scalar::Real;
use crate::system::{
    DeterminantWavefunction, NuclearFrame, SpinOrbital, StoBasis, LINEAR_DEPENDENCE_THRESHOLD,
};
use crate::units::HARTREE_TO_EV;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfSettings<T: Real> {
    pub max_iterations: usize,
    /// Hartree.
    pub energy_tolerance: T,
    /// Max-abs change of the density matrix, also applied to the
    /// `FPS − SPF` commutator.
    pub density_tolerance: T,
    /// Weight of the previous density in linear mixing, in `[0, 1)`.
    pub damping: T,
}

impl<T: Real> Default for ScfSettings<T> {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            energy_tolerance: T::lit(1e-10),
            density_tolerance: T::lit(1e-8),
            damping: T::lit(0.3),
        }
    }
}

impl<T: Real> ScfSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.energy_tolerance > T::zero()) || !(self.density_tolerance > T::zero()) {
            return Err(Error::InvalidInput(
                "SCF tolerances must be positive".into(),
            ));
        }
        if !(self.damping >= T::zero() && self.damping < T::one()) {
            return Err(Error::InvalidInput("damping must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One SCF step, recorded for diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScfIteration {
    pub iteration: usize,
    /// Energy of the determinant built from this step's orbitals (hartree).
    pub energy: f64,
    pub delta_energy: f64,
    pub delta_density: f64,
    pub commutator: f64,
}

/// Energy contributions of a determinant, in hartree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport<T: Real> {
    pub kinetic: T,
    pub nucleus_nucleus: T,
    pub electron_nucleus: T,
    pub electron_repulsion_total: T,
    pub self_repulsion: T,
    pub exchange: T,
    pub coulomb_integral: T,
    pub total: T,
}

impl<T: Real> EnergyReport<T> {
    pub const FIELDS: [&'static str; 8] = [
        "kinetic",
        "nucleus_nucleus",
        "electron_nucleus",
        "electron_repulsion_total",
        "self_repulsion",
        "exchange",
        "coulomb_integral",
        "total",
    ];

    /// Field values in [`Self::FIELDS`] order.
    pub fn values(&self) -> [T; 8] {
        [
            self.kinetic,
            self.nucleus_nucleus,
            self.electron_nucleus,
            self.electron_repulsion_total,
            self.self_repulsion,
            self.exchange,
            self.coulomb_integral,
            self.total,
        ]
    }

    /// The same report converted to eV.
    pub fn to_ev(&self) -> EnergyReport<f64> {
        let v = self.values().map(|x| x.as_f64() * HARTREE_TO_EV);
        EnergyReport {
            kinetic: v[0],
            nucleus_nucleus: v[1],
            electron_nucleus: v[2],
            electron_repulsion_total: v[3],
            self_repulsion: v[4],
            exchange: v[5],
            coulomb_integral: v[6],
            total: v[7],
        }
    }

    /// Sum of the five potential contributions and the kinetic energy.
    pub fn recomputed_total(&self) -> T {
        self.kinetic + self.nucleus_nucleus + self.electron_nucleus + self.electron_repulsion_total
            - self.self_repulsion
            - self.exchange
    }
}

/// Converged SCF result.
#[derive(Debug, Clone)]
pub struct ScfOutcome<T: Real> {
    pub wavefunction: DeterminantWavefunction<T>,
    pub energy: EnergyReport<T>,
    pub orbital_energies: DVector<T>,
    pub trace: Vec<ScfIteration>,
}

/// Integrals for one frame/basis pair, reused across evaluations.
#[derive(Debug, Clone)]
pub struct HartreeFock<T: Real> {
    basis: StoBasis<T>,
    one: OneElectronMatrices<T>,
    eri: TwoElectronTensor<T>,
    nuclear_repulsion: T,
}

impl<T: Real> HartreeFock<T> {
    pub fn new(frame: &NuclearFrame<T>, basis: &StoBasis<T>) -> Result<Self> {
        Ok(Self {
            basis: basis.clone(),
            one: one_electron_matrices(basis, frame)?,
            eri: TwoElectronTensor::new(basis)?,
            nuclear_repulsion: frame.nuclear_repulsion(),
        })
    }

    pub fn basis(&self) -> &StoBasis<T> {
        &self.basis
    }

    pub fn matrices(&self) -> &OneElectronMatrices<T> {
        &self.one
    }

    pub fn tensor(&self) -> &TwoElectronTensor<T> {
        &self.eri
    }

    pub fn decompose(&self, wf: &DeterminantWavefunction<T>) -> Result<EnergyReport<T>> {
        let orbitals = wf.orbitals();
        for o in orbitals {
            if o.coefficients.len() != self.basis.len() {
                return Err(Error::InvalidInput(
                    "wavefunction does not match the basis".into(),
                ));
            }
        }
        let quad = |m: &DMatrix<T>, c: &DVector<T>| c.dot(&(m * c));
        let kinetic = orbitals
            .iter()
            .fold(T::zero(), |acc, o| acc + quad(&self.one.t, &o.coefficients));
        let electron_nucleus = orbitals.iter().fold(T::zero(), |acc, o| {
            acc + quad(&self.one.vne, &o.coefficients)
        });
        let two = two_electron_terms(&self.eri, wf);
        let mut report = EnergyReport {
            kinetic,
            nucleus_nucleus: self.nuclear_repulsion,
            electron_nucleus,
            electron_repulsion_total: two.coulomb + two.self_repulsion,
            self_repulsion: two.self_repulsion,
            exchange: two.exchange,
            coulomb_integral: two.coulomb,
            total: T::zero(),
        };
        report.total = report.recomputed_total();
        Ok(report)
    }

    /// `G(P)_ab = Σ_cd P_cd [(ab|cd) − ½(ac|bd)]`
    fn two_electron_fock(&self, p: &DMatrix<T>) -> DMatrix<T> {
        let n = self.basis.len();
        let half = T::lit(0.5);
        DMatrix::from_fn(n, n, |a, b| {
            let mut g = T::zero();
            for c in 0..n {
                for d in 0..n {
                    g += p[(c, d)] * (self.eri.get(a, b, c, d) - half * self.eri.get(a, c, b, d));
                }
            }
            g
        })
    }

    fn orthogonalizer(&self) -> Result<DMatrix<T>> {
        let eig = SymmetricEigen::new(self.one.s.clone());
        let min = eig
            .eigenvalues
            .iter()
            .fold(T::max_value().unwrap(), |m, &v| m.min(v));
        if !(min > T::lit(LINEAR_DEPENDENCE_THRESHOLD)) {
            return Err(Error::LinearDependence {
                min_eigenvalue: min.as_f64(),
            });
        }
        let inv_sqrt = eig.eigenvalues.map(|v| T::one() / v.sqrt());
        Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose())
    }

    /// Solves `FC = SCε` by symmetric orthogonalization; eigenpairs ascending.
    fn roothaan_step(&self, f: &DMatrix<T>, x: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
        let fp = x.transpose() * f * x;
        let fp = (&fp + fp.transpose()) * T::lit(0.5);
        let eig = SymmetricEigen::new(fp);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
        let vectors = DMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        (values, x * vectors)
    }

    fn occupied(&self, c: &DMatrix<T>, n_occ: usize) -> Vec<DVector<T>> {
        (0..n_occ)
            .map(|i| {
                SpinOrbital::new(c.column(i).into_owned(), crate::system::Spin::Up)
                    .normalized(&self.one.s)
                    .oriented()
                    .coefficients
            })
            .collect()
    }

    fn density(occ: &[DVector<T>], n: usize) -> DMatrix<T> {
        let mut p = DMatrix::zeros(n, n);
        for c in occ {
            p += c * c.transpose() * T::lit(2.0);
        }
        p
    }

    fn check_electrons(&self, n_electrons: usize) -> Result<usize> {
        if !n_electrons.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "restricted closed-shell SCF needs an even electron count, got {n_electrons}"
            )));
        }
        if n_electrons / 2 > self.basis.len() {
            return Err(Error::InvalidInput(format!(
                "{n_electrons} electrons do not fit in {} spatial functions",
                self.basis.len()
            )));
        }
        Ok(n_electrons / 2)
    }

    /// SCF from the core-Hamiltonian guess.
    pub fn solve(&self, n_electrons: usize, settings: &ScfSettings<T>) -> Result<ScfOutcome<T>> {
        let n_occ = self.check_electrons(n_electrons)?;
        let x = self.orthogonalizer()?;
        let (_, c) = self.roothaan_step(&self.one.core_hamiltonian(), &x);
        let occ = self.occupied(&c, n_occ);
        self.iterate(occ, settings, &x)
    }

    /// SCF seeded from an existing closed-shell determinant.
    pub fn solve_from(
        &self,
        guess: &DeterminantWavefunction<T>,
        settings: &ScfSettings<T>,
    ) -> Result<ScfOutcome<T>> {
        let occ = guess.restricted_pairs().ok_or_else(|| {
            Error::InvalidInput("SCF guess must be a closed-shell restricted determinant".into())
        })?;
        let x = self.orthogonalizer()?;
        self.iterate(occ, settings, &x)
    }

    fn iterate(
        &self,
        occ: Vec<DVector<T>>,
        settings: &ScfSettings<T>,
        x: &DMatrix<T>,
    ) -> Result<ScfOutcome<T>> {
        settings.validate()?;
        let n = self.basis.len();
        let n_occ = occ.len();
        let h = self.one.core_hamiltonian();
        let s = &self.one.s;
        let mut p = Self::density(&occ, n);
        let mut e_prev = self
            .decompose(&DeterminantWavefunction::restricted(&occ, &self.basis)?)?
            .total;
        let mut trace = Vec::new();
        let damping = settings.damping;
        for iteration in 1..=settings.max_iterations {
            let f = &h + self.two_electron_fock(&p);
            let commutator = max_abs(&(&f * &p * s - s * &p * &f));
            let (eps, c) = self.roothaan_step(&f, x);
            let occ = self.occupied(&c, n_occ);
            let wf = DeterminantWavefunction::restricted(&occ, &self.basis)?;
            let report = self.decompose(&wf)?;
            let p_new = Self::density(&occ, n);
            let p_next = &p_new * (T::one() - damping) + &p * damping;
            let delta_density = max_abs(&(&p_next - &p));
            let delta_energy = report.total - e_prev;
            trace.push(ScfIteration {
                iteration,
                energy: report.total.as_f64(),
                delta_energy: delta_energy.as_f64(),
                delta_density: delta_density.as_f64(),
                commutator: commutator.as_f64(),
            });
            if delta_energy.abs() < settings.energy_tolerance
                && delta_density < settings.density_tolerance
                && commutator < settings.density_tolerance
            {
                return Ok(ScfOutcome {
                    wavefunction: wf,
                    energy: report,
                    orbital_energies: eps,
                    trace,
                });
            }
            e_prev = report.total;
            p = p_next;
        }
        Err(Error::NotConverged { trace })
    }
}

/// Pairwise two-electron sums of a determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoElectronTerms<T: Real> {
    /// `Σ_i J_ii`
    pub self_repulsion: T,
    /// `Σ_{i<j} J_ij`
    pub coulomb: T,
    /// `Σ_{i<j} K_ij`, same-spin pairs only
    pub exchange: T,
}

pub fn two_electron_terms<T: Real>(
    eri: &TwoElectronTensor<T>,
    wf: &DeterminantWavefunction<T>,
) -> TwoElectronTerms<T> {
    let orbitals = wf.orbitals();
    let mut out = TwoElectronTerms {
        self_repulsion: T::zero(),
        coulomb: T::zero(),
        exchange: T::zero(),
    };
    for (i, oi) in orbitals.iter().enumerate() {
        let ci = &oi.coefficients;
        out.self_repulsion += eri.contract(ci, ci, ci, ci);
        for oj in &orbitals[i + 1..] {
            let cj = &oj.coefficients;
            out.coulomb += eri.contract(ci, ci, cj, cj);
            if oi.spin == oj.spin {
                out.exchange += eri.contract(ci, cj, cj, ci);
            }
        }
    }
    out
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Restricted closed-shell SCF for `n_electrons` in `basis`.
pub fn scf_solve<T: Real>(
    frame: &NuclearFrame<T>,
    basis: &StoBasis<T>,
    n_electrons: usize,
    settings: &ScfSettings<T>,
) -> Result<ScfOutcome<T>> {
    HartreeFock::new(frame, basis)?.solve(n_electrons, settings)
}

pub fn decompose_energy<T: Real>(
    frame: &NuclearFrame<T>,
    basis: &StoBasis<T>,
    wf: &DeterminantWavefunction<T>,
) -> Result<EnergyReport<T>> {
    HartreeFock::new(frame, basis)?.decompose(wf)
}

/// `⟨Ψ|H|Ψ⟩` for a determinant.
pub fn expectation_energy<T: Real>(
    frame: &NuclearFrame<T>,
    basis: &StoBasis<T>,
    wf: &DeterminantWavefunction<T>,
) -> Result<T> {
    Ok(decompose_energy(frame, basis, wf)?.total)
}

/// Adds uniform noise in `[-scale, scale]` to every spatial coefficient of
/// a closed-shell determinant, then re-orthonormalizes (Gram-Schmidt under
/// the basis overlap). Deterministic in `seed`.
pub fn perturb_restricted<T: Real>(
    wf: &DeterminantWavefunction<T>,
    basis: &StoBasis<T>,
    scale: T,
    seed: u64,
) -> Result<DeterminantWavefunction<T>> {
    let spatial = wf
        .restricted_pairs()
        .ok_or_else(|| Error::InvalidInput("perturbation needs a restricted determinant".into()))?;
    let s = basis.overlap_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<DVector<T>> = Vec::with_capacity(spatial.len());
    for c in spatial {
        let mut c = c.map(|v| v + scale * T::lit(rng.random_range(-1.0..=1.0)));
        for prev in &out {
            let ov = prev.dot(&(&s * &c));
            c.axpy(-ov, prev, T::one());
        }
        let norm = c.dot(&(&s * &c)).sqrt();
        out.push(c / norm);
    }
    DeterminantWavefunction::restricted(&out, basis)
}

/// Golden-section minimization of `f` on `[lo, hi]` to abscissa tolerance
/// `tol`. Returns `(x_min, f(x_min))`.
pub fn golden_section<T: Real, F>(mut lo: T, mut hi: T, tol: T, mut f: F) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    while (hi - lo).abs() > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b)?;
        }
    }
    let x = (lo + hi) / T::lit(2.0);
    Ok((x, f(x)?))
}

/// Minimizes the SCF energy over a uniform scale `λ` of every exponent.
pub fn optimize_exponent_scale<T: Real>(
    frame: &NuclearFrame<T>,
    basis: &StoBasis<T>,
    n_electrons: usize,
    settings: &ScfSettings<T>,
    bracket: (T, T),
    tol: T,
) -> Result<(T, ScfOutcome<T>)> {
    let energy = |lambda: T| -> Result<T> {
        Ok(
            scf_solve(frame, &basis.scaled(lambda)?, n_electrons, settings)?
                .energy
                .total,
        )
    };
    let (lambda, _) = golden_section(bracket.0, bracket.1, tol, energy)?;
    let outcome = scf_solve(frame, &basis.scaled(lambda)?, n_electrons, settings)?;
    Ok((lambda, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Vec3;

    pub(crate) const CLEMENTI_ZETA: [f64; 5] = [1.41714, 2.37682, 4.39628, 6.52699, 7.94252];

    fn helium() -> (NuclearFrame<f64>, StoBasis<f64>) {
        let f = NuclearFrame::<f64>::atom("He", 2.0, Vec3::zeros()).unwrap();
        let b = StoBasis::single_center(&CLEMENTI_ZETA, Vec3::zeros()).unwrap();
        (f, b)
    }

    #[test]
    fn minimal_basis_matches_closed_form() {
        let f = NuclearFrame::<f64>::atom("He", 2.0, Vec3::zeros()).unwrap();
        let zeta = 27.0 / 16.0;
        let b = StoBasis::single_center(&[zeta], Vec3::zeros()).unwrap();
        let out = scf_solve(&f, &b, 2, &ScfSettings::default()).unwrap();
        let closed = zeta * zeta - 2.0 * 2.0 * zeta + 5.0 / 8.0 * zeta;
        assert!((out.energy.total - closed).abs() < 1e-12);
        assert!((out.energy.total + 2.84765625).abs() < 1e-12);
    }

    #[test]
    fn helium_five_term_breakdown() {
        let (f, b) = helium();
        let out = scf_solve(&f, &b, 2, &ScfSettings::default()).unwrap();
        let ev = out.energy.to_ev();
        assert!((ev.total + 77.9).abs() < 0.1);
        assert!((ev.electron_nucleus + 183.7).abs() < 0.1);
        assert!((ev.electron_repulsion_total - 83.7).abs() < 0.1);
        assert!((ev.self_repulsion - 2.0 * 27.9).abs() < 0.2);
        assert!((ev.kinetic - 77.9).abs() < 0.1);
        assert_eq!(ev.exchange, 0.0);
        assert_eq!(ev.nucleus_nucleus, 0.0);
    }

    #[test]
    fn report_identities() {
        let (f, b) = helium();
        let out = scf_solve(&f, &b, 2, &ScfSettings::default()).unwrap();
        let r = out.energy;
        assert!((r.total - r.recomputed_total()).abs() < 1e-12);
        assert!(
            (r.coulomb_integral - (r.electron_repulsion_total - r.self_repulsion)).abs() < 1e-12
        );
        assert!(r.kinetic > 0.0 && r.exchange >= 0.0 && r.self_repulsion > 0.0);
    }

    #[test]
    fn sign_flips_leave_report_unchanged() {
        let (f, b) = helium();
        let hf = HartreeFock::new(&f, &b).unwrap();
        let wf = hf.solve(2, &ScfSettings::default()).unwrap().wavefunction;
        let base = hf.decompose(&wf).unwrap();
        for i in 0..2 {
            assert_eq!(hf.decompose(&wf.with_flipped_sign(i)).unwrap(), base);
        }
    }

    #[test]
    fn one_electron_repulsion_cancels() {
        let f = NuclearFrame::<f64>::atom("H", 1.0, Vec3::zeros()).unwrap();
        let b = StoBasis::single_center(&[1.0], Vec3::zeros()).unwrap();
        let wf = DeterminantWavefunction::new(
            vec![SpinOrbital::new(
                DVector::from_vec(vec![1.0]),
                crate::system::Spin::Up,
            )],
            &b,
        )
        .unwrap();
        let r = decompose_energy(&f, &b, &wf).unwrap();
        assert_eq!(r.electron_repulsion_total - r.self_repulsion, 0.0);
        assert_eq!(r.coulomb_integral, 0.0);
        assert!((r.total + 0.5).abs() < 1e-15);
    }

    #[test]
    fn forced_non_convergence_keeps_trace() {
        let (f, b) = helium();
        let settings = ScfSettings {
            max_iterations: 1,
            ..ScfSettings::default()
        };
        match scf_solve(&f, &b, 2, &settings) {
            Err(Error::NotConverged { trace }) => assert_eq!(trace.len(), 1),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        let (f, b) = helium();
        assert!(scf_solve(&f, &b, 3, &ScfSettings::default()).is_err());
        assert!(scf_solve(&f, &b, 12, &ScfSettings::default()).is_err());
        let bad = ScfSettings {
            damping: 1.0,
            ..ScfSettings::default()
        };
        assert!(scf_solve(&f, &b, 2, &bad).is_err());
        let two_center = StoBasis::with_centers(
            vec![
                crate::system::StoPrimitive::new(1.0, 0).unwrap(),
                crate::system::StoPrimitive::new(1.0, 1).unwrap(),
            ],
            vec![Vec3::zeros(), Vec3::new(0.0, 0.0, 1.4)],
        )
        .unwrap();
        assert!(matches!(
            scf_solve(&f, &two_center, 2, &ScfSettings::default()),
            Err(Error::UnsupportedGeometry(_))
        ));
    }

    #[test]
    fn trace_is_non_increasing_with_damping() {
        let (f, b) = helium();
        for damping in [0.3, 0.5, 0.7] {
            let settings = ScfSettings {
                damping,
                ..ScfSettings::default()
            };
            let out = scf_solve(&f, &b, 2, &settings).unwrap();
            for w in out.trace.windows(2) {
                assert!(
                    w[1].energy <= w[0].energy + 1e-12,
                    "damping {damping}: {w:?}"
                );
            }
        }
    }

    #[test]
    fn reseeding_converges_immediately() {
        let (f, b) = helium();
        let hf = HartreeFock::new(&f, &b).unwrap();
        let settings = ScfSettings::default();
        let first = hf.solve(2, &settings).unwrap();
        let again = hf.solve_from(&first.wavefunction, &settings).unwrap();
        assert_eq!(again.trace.len(), 1);
        assert!((again.energy.total - first.energy.total).abs() < settings.energy_tolerance);
    }

    #[test]
    fn stationarity_and_orthonormality() {
        let (f, b) = helium();
        let out = scf_solve(&f, &b, 2, &ScfSettings::default()).unwrap();
        let last = out.trace.last().unwrap();
        assert!(last.commutator < 1e-8);
        let s = b.overlap_matrix();
        for o in out.wavefunction.orbitals() {
            assert!((o.norm_sq(&s) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbations_never_lower_the_energy() {
        let (f, b) = helium();
        let hf = HartreeFock::new(&f, &b).unwrap();
        let out = hf.solve(2, &ScfSettings::default()).unwrap();
        for seed in 0..100 {
            let wf = perturb_restricted(&out.wavefunction, &b, 1e-3, seed).unwrap();
            let e = hf.decompose(&wf).unwrap().total;
            assert!(e >= out.energy.total - 1e-12, "seed {seed}: {e}");
        }
    }

    #[test]
    fn single_precision_scf() {
        let f = NuclearFrame::<f32>::atom("He", 2.0, Vec3::zeros()).unwrap();
        let zetas: Vec<f32> = CLEMENTI_ZETA.iter().map(|&z| z as f32).collect();
        let b = StoBasis::single_center(&zetas, Vec3::zeros()).unwrap();
        let settings = ScfSettings {
            energy_tolerance: 1e-5,
            density_tolerance: 1e-3,
            ..ScfSettings::default()
        };
        let out = scf_solve(&f, &b, 2, &settings).unwrap();
        assert!((out.energy.total + 2.86168).abs() < 1e-4);
    }
}
