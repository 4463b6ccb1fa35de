mod support;

use cloudchem::density::density_from_determinant;
use cloudchem::electrostatics::{
    bohr_radius, classical_interaction_energy, force_report, hellmann_feynman_force,
    potential_from_nuclei, scale_experiment, ScaledConstants,
};
use cloudchem::integrals::overlap_same_center;
use cloudchem::quadrature::QuadratureGrid;
use cloudchem::system::{DeterminantWavefunction, Nucleus, StoBasis};
use cloudchem::{Error, NuclearFrame, Vec3};
use proptest::prelude::*;
use support::fixtures::{ev, helium, helium_paper_wavefunction, hydrogenic, one_electron};
use support::oracle::Panels;

fn origin() -> Vec3<f64> {
    Vec3::zeros()
}

fn nucleus(label: &str, q: f64, p: Vec3<f64>) -> Nucleus<f64> {
    Nucleus {
        label: label.into(),
        charge: q,
        position: p,
    }
}

#[test]
fn nuclear_potentials() {
    let f = NuclearFrame::atom("He", 2.0, origin()).unwrap();
    assert_eq!(
        potential_from_nuclei(&f, &Vec3::new(2.0, 0.0, 0.0)).unwrap(),
        1.0
    );
    let pair = NuclearFrame::new(vec![
        nucleus("H", 1.0, Vec3::new(1.0, 0.0, 0.0)),
        nucleus("H", 1.0, Vec3::new(-1.0, 0.0, 0.0)),
    ])
    .unwrap();
    assert_eq!(potential_from_nuclei(&pair, &origin()).unwrap(), 2.0);
    match potential_from_nuclei(&pair, &Vec3::new(-1.0, 0.0, 0.0)) {
        Err(Error::SingularPoint { nucleus }) => assert_eq!(nucleus, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn helium_nucleus_feels_no_force() {
    let (f, b) = helium();
    let rho = density_from_determinant(&helium_paper_wavefunction(&b), &b).unwrap();
    let force = hellmann_feynman_force(&rho, &f, 0, &QuadratureGrid::atomic(origin())).unwrap();
    assert!(force.total().norm() < 1e-8);
}

/// Charge of a ζ = 1 hydrogen cloud inside radius `d`, by panel quadrature.
fn enclosed_oracle(d: f64) -> f64 {
    let p = Panels::new(0.5, 1.0);
    -p.integrate_up_to(d, |r| 4.0 * r * r * (-2.0 * r).exp())
}

fn probe_frame(d: f64) -> NuclearFrame {
    NuclearFrame::atom("X", 1.0, Vec3::new(0.0, 0.0, d)).unwrap()
}

#[test]
fn shell_theorem_for_external_charge() {
    let b = StoBasis::single_center(&[1.0], origin()).unwrap();
    let rho = density_from_determinant(&one_electron(&b), &b).unwrap();
    let grid = QuadratureGrid::atomic(origin());
    for d in [2.0, 5.0, 10.0] {
        let f = hellmann_feynman_force(&rho, &probe_frame(d), 0, &grid).unwrap();
        let want = enclosed_oracle(d) / (d * d);
        assert!(f.total().x.abs() < 1e-15 && f.total().y.abs() < 1e-15);
        assert!((f.total().z - want).abs() < 1e-10 * want.abs(), "d={d}");
    }
}

fn clamped_energy(rho: &cloudchem::ChargeDensityField, frame: &NuclearFrame) -> f64 {
    classical_interaction_energy(rho, frame, &QuadratureGrid::atomic(origin()))
        + frame.nuclear_repulsion()
}

#[test]
fn force_is_minus_gradient_of_clamped_energy() {
    let b = StoBasis::single_center(&[1.0], origin()).unwrap();
    let rho = density_from_determinant(&one_electron(&b), &b).unwrap();
    let h = 1e-4;
    for d in [2.0, 5.0, 10.0] {
        let base = Vec3::new(0.3, -0.2, d);
        let frame = NuclearFrame::atom("X", 1.0, base).unwrap();
        let force = hellmann_feynman_force(&rho, &frame, 0, &QuadratureGrid::atomic(origin()))
            .unwrap()
            .total();
        for axis in 0..3 {
            let mut e = Vec3::zeros();
            e[axis] = h;
            let plus = clamped_energy(&rho, &frame.with_position(0, base + e).unwrap());
            let minus = clamped_energy(&rho, &frame.with_position(0, base - e).unwrap());
            let fd = -(plus - minus) / (2.0 * h);
            assert!(
                (fd - force[axis]).abs() <= 1e-5 * force.norm(),
                "d={d} axis={axis}: {fd} vs {}",
                force[axis]
            );
        }
    }
}

#[test]
fn force_gradient_with_two_nuclei() {
    // helium cloud plus a proton: nuclear repulsion enters both sides
    let (_, b) = helium();
    let rho = density_from_determinant(&helium_paper_wavefunction(&b), &b).unwrap();
    let p = Vec3::new(0.4, 0.0, 1.5);
    let frame =
        NuclearFrame::new(vec![nucleus("He", 2.0, origin()), nucleus("H", 1.0, p)]).unwrap();
    let grid = QuadratureGrid::atomic(origin());
    let force = hellmann_feynman_force(&rho, &frame, 1, &grid)
        .unwrap()
        .total();
    let h = 1e-4;
    for axis in 0..3 {
        let mut e = Vec3::zeros();
        e[axis] = h;
        let plus = clamped_energy(&rho, &frame.with_position(1, p + e).unwrap());
        let minus = clamped_energy(&rho, &frame.with_position(1, p - e).unwrap());
        let fd = -(plus - minus) / (2.0 * h);
        assert!(
            (fd - force[axis]).abs() <= 1e-5 * force.norm(),
            "axis {axis}"
        );
    }
}

#[test]
fn bare_protons_repel() {
    let b = StoBasis::single_center(&[1.0], origin()).unwrap();
    let empty = density_from_determinant(&DeterminantWavefunction::empty(), &b).unwrap();
    let d = 1.4;
    let frame = NuclearFrame::new(vec![
        nucleus("H", 1.0, origin()),
        nucleus("H", 1.0, Vec3::new(0.0, 0.0, d)),
    ])
    .unwrap();
    let grid = QuadratureGrid::atomic(origin());
    let report = force_report(&empty, &frame, &grid).unwrap();
    let f0 = Vec3::from(report.total[0]);
    let f1 = Vec3::from(report.total[1]);
    assert!((f1.z - 1.0 / (d * d)).abs() < 1e-15);
    assert_eq!(f0, -f1);
    assert_eq!(classical_interaction_energy(&empty, &frame, &grid), 0.0);
}

#[test]
fn helium_interaction_energy() {
    let (f, b) = helium();
    let rho = density_from_determinant(&helium_paper_wavefunction(&b), &b).unwrap();
    let e = classical_interaction_energy(&rho, &f, &QuadratureGrid::atomic(origin()));
    assert!((ev(e) + 183.7).abs() < 0.1);
}

#[test]
fn bohr_radius_values() {
    assert_eq!(bohr_radius(1.0, 1.0).unwrap(), 1.0);
    assert_eq!(bohr_radius(0.5, 0.5).unwrap(), 8.0);
    assert_eq!(bohr_radius(2.0, 1.0).unwrap(), 0.5);
    assert!(bohr_radius(0.0, 1.0).is_err());
    assert!(ScaledConstants::new(1.0, -1.0).is_err());
}

#[test]
fn halved_constants_experiment() {
    let (f, _, _) = hydrogenic(1.0, origin());
    let r = scale_experiment(&f, 1, ScaledConstants::new(0.5, 0.5).unwrap()).unwrap();
    assert!((r.rms_ratio - 8.0).abs() < 1e-9);
    assert!((r.rms_after - 8.0 * 3f64.sqrt()).abs() < 1e-6);
    assert!((r.rms_before - 3f64.sqrt()).abs() < 1e-6);
    assert_eq!(r.zeta_after, 0.125);
    assert!(r.excited_after_scaling);
    let s = (2.0 * (0.125f64).sqrt() / 1.125).powi(3);
    assert!((r.overlap - s).abs() < 1e-15);
    assert!((overlap_same_center(1.0, 0.125) - s).abs() < 1e-15);
    assert!(r.overlap < 1.0);

    let same = scale_experiment(&f, 1, ScaledConstants::new(1.0, 1.0).unwrap()).unwrap();
    assert_eq!(same.rms_ratio, 1.0);
    assert!(!same.excited_after_scaling);
}

#[test]
fn experiment_requires_hydrogen() {
    let (he, _) = helium();
    assert!(scale_experiment(&he, 2, ScaledConstants::new(0.5, 0.5).unwrap()).is_err());
    let (h, _, _) = hydrogenic(1.0, origin());
    assert!(scale_experiment(&h, 2, ScaledConstants::new(0.5, 0.5).unwrap()).is_err());
}

#[test]
fn hydrogen_interaction_matches_expectation_of_inverse_r() {
    let (f, b, wf) = hydrogenic(1.0, origin());
    let rho = density_from_determinant(&wf, &b).unwrap();
    let e = classical_interaction_energy(&rho, &f, &QuadratureGrid::atomic(origin()));
    assert!((e + 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bohr_radius_is_multiplicative(
        m1 in 0.1f64..5.0, e1 in 0.1f64..5.0, m2 in 0.1f64..5.0, e2 in 0.1f64..5.0,
    ) {
        let lhs = bohr_radius(m1 * m2, e1 * e2).unwrap();
        let rhs = bohr_radius(m1, e1).unwrap() * bohr_radius(m2, e2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn shell_theorem_outside_support(zeta in 0.5f64..4.0, d in 6.0f64..30.0) {
        // beyond ~15/ζ the cloud is a point charge to double precision
        let b = StoBasis::single_center(&[zeta], origin()).unwrap();
        let rho = density_from_determinant(&one_electron(&b), &b).unwrap();
        let frame = NuclearFrame::atom("X", 1.0, Vec3::new(d, 0.0, 0.0)).unwrap();
        let f = hellmann_feynman_force(&rho, &frame, 0, &QuadratureGrid::atomic(origin())).unwrap();
        if zeta * d > 20.0 {
            prop_assert!((f.total().x + 1.0 / (d * d)).abs() < 1e-10 / (d * d));
        } else {
            let outside = (-2.0 * zeta * d).exp() * (1.0 + 2.0 * zeta * d + 2.0 * (zeta * d).powi(2));
            let want = -(1.0 - outside) / (d * d);
            prop_assert!((f.total().x - want).abs() < 1e-10 * want.abs());
        }
    }
}
