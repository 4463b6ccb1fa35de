//! Nuclei, Slater-type basis sets and determinant wavefunctions, plus the
//! plain-text file formats used to move them in and out of the toolkit.
//!
//! Geometry file: one nucleus per line, `label charge x y z` (bohr).
//! Basis file: `center_index zeta [l]` per line, `l` reserved and must be 0.
//! Orbital file: header `norb nbasis`, then `spin c1 .. c_nbasis` per orbital
//! with spin `u` or `d`.
//!
//! `#` starts a comment in all three formats; blank lines are ignored.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrals;
use crate::scalar::{Real, Vec3};

/// Orbitals whose overlap deviates from the identity by more than this are
/// rejected outright.
pub const ORTHONORMALITY_REJECT: f64 = 1e-6;

/// Deviations below this are left untouched so that files round-trip exactly.
const ORTHONORMALITY_SLACK: f64 = 1e-12;

/// Smallest admissible overlap-matrix eigenvalue.
pub const LINEAR_DEPENDENCE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Nucleus<T: Real> {
    pub label: String,
    /// Charge in units of the elementary charge.
    pub charge: T,
    /// Position in bohr.
    pub position: Vec3<T>,
}

/// Point nuclei that source the external potential.
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearFrame<T: Real> {
    nuclei: Vec<Nucleus<T>>,
}

impl<T: Real> NuclearFrame<T> {
    pub fn new(nuclei: Vec<Nucleus<T>>) -> Result<Self> {
        for (k, n) in nuclei.iter().enumerate() {
            if !(n.charge > T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "nucleus {k} has non-positive charge {:?}",
                    n.charge
                )));
            }
            if !n.position.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "nucleus {k} has a non-finite position"
                )));
            }
            if let Some(j) = nuclei[..k].iter().position(|m| m.position == n.position) {
                return Err(Error::InvalidInput(format!(
                    "nuclei {j} and {k} share a position"
                )));
            }
        }
        Ok(Self { nuclei })
    }

    /// Convenience constructor for a single bare nucleus.
    pub fn atom(label: &str, charge: T, position: Vec3<T>) -> Result<Self> {
        Self::new(vec![Nucleus {
            label: label.to_string(),
            charge,
            position,
        }])
    }

    pub fn nuclei(&self) -> &[Nucleus<T>] {
        &self.nuclei
    }

    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn total_charge(&self) -> T {
        self.nuclei.iter().fold(T::zero(), |acc, n| acc + n.charge)
    }

    /// Classical repulsion between distinct point nuclei.
    pub fn nuclear_repulsion(&self) -> T {
        let mut e = T::zero();
        for (k, a) in self.nuclei.iter().enumerate() {
            for b in &self.nuclei[k + 1..] {
                e += a.charge * b.charge / (a.position - b.position).norm();
            }
        }
        e
    }

    /// Same geometry with every charge multiplied by `factor`.
    pub fn with_scaled_charges(&self, factor: T) -> Result<Self> {
        Self::new(
            self.nuclei
                .iter()
                .map(|n| Nucleus {
                    charge: n.charge * factor,
                    ..n.clone()
                })
                .collect(),
        )
    }

    pub fn translated(&self, shift: &Vec3<T>) -> Self {
        Self {
            nuclei: self
                .nuclei
                .iter()
                .map(|n| Nucleus {
                    position: n.position + shift,
                    ..n.clone()
                })
                .collect(),
        }
    }

    /// Copy with nucleus `k` moved to `position`.
    pub fn with_position(&self, k: usize, position: Vec3<T>) -> Result<Self> {
        let mut nuclei = self.nuclei.clone();
        let n = nuclei
            .get_mut(k)
            .ok_or_else(|| Error::InvalidInput(format!("no nucleus {k}")))?;
        n.position = position;
        Self::new(nuclei)
    }
}

impl<T: Real> fmt::Display for NuclearFrame<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nuclei {
            writeln!(
                f,
                "{} {:e} {:e} {:e} {:e}",
                n.label, n.charge, n.position.x, n.position.y, n.position.z
            )?;
        }
        Ok(())
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn parse_num<T: Real>(line: usize, field: &str, what: &str) -> Result<T> {
    let v: T = field
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {what} from {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what} is not finite")));
    }
    Ok(v)
}

/// Reads a geometry file (`label charge x y z` per line, bohr).
pub fn parse_geometry<T: Real>(text: &str) -> Result<NuclearFrame<T>> {
    let mut nuclei = Vec::new();
    for (line, fields) in data_lines(text) {
        if fields.len() != 5 {
            return Err(Error::parse(
                line,
                format!(
                    "expected `label charge x y z`, found {} fields",
                    fields.len()
                ),
            ));
        }
        let charge: T = parse_num(line, fields[1], "charge")?;
        if !(charge > T::zero()) {
            return Err(Error::parse(line, "non-positive nuclear charge"));
        }
        let position = Vec3::new(
            parse_num(line, fields[2], "x")?,
            parse_num(line, fields[3], "y")?,
            parse_num(line, fields[4], "z")?,
        );
        if let Some(k) = nuclei
            .iter()
            .position(|n: &Nucleus<T>| n.position == position)
        {
            return Err(Error::parse(
                line,
                format!("duplicate position (same as nucleus {k})"),
            ));
        }
        nuclei.push(Nucleus {
            label: fields[0].to_string(),
            charge,
            position,
        });
    }
    if nuclei.is_empty() {
        return Err(Error::InvalidInput("geometry contains no nuclei".into()));
    }
    NuclearFrame::new(nuclei)
}

/// Normalized 1s Slater function `(ζ³/π)^{1/2} e^{−ζ|x−r|}` on a frame center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoPrimitive<T: Real> {
    pub zeta: T,
    pub center: usize,
}

impl<T: Real> StoPrimitive<T> {
    pub fn new(zeta: T, center: usize) -> Result<Self> {
        if !(zeta > T::zero()) || !zeta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Slater exponent must be positive, got {zeta:?}"
            )));
        }
        Ok(Self { zeta, center })
    }

    pub fn normalization(&self) -> T {
        (self.zeta.powi(3) / T::pi()).sqrt()
    }

    /// Value at distance `r` from the center.
    #[inline]
    pub fn radial_value(&self, r: T) -> T {
        self.normalization() * (-self.zeta * r).exp()
    }
}

/// A set of 1s Slater primitives together with the positions of their
/// centers.
#[derive(Debug, Clone, PartialEq)]
pub struct StoBasis<T: Real> {
    primitives: Vec<StoPrimitive<T>>,
    centers: Vec<Vec3<T>>,
}

impl<T: Real> StoBasis<T> {
    pub fn new(primitives: Vec<StoPrimitive<T>>, frame: &NuclearFrame<T>) -> Result<Self> {
        let centers = frame.nuclei().iter().map(|n| n.position).collect();
        Self::with_centers(primitives, centers)
    }

    /// Basis over explicit center positions (no nuclei required there).
    pub fn with_centers(primitives: Vec<StoPrimitive<T>>, centers: Vec<Vec3<T>>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::InvalidInput("basis contains no functions".into()));
        }
        for p in &primitives {
            StoPrimitive::new(p.zeta, p.center)?;
            if p.center >= centers.len() {
                return Err(Error::InvalidInput(format!(
                    "center index {} out of range ({} centers)",
                    p.center,
                    centers.len()
                )));
            }
        }
        let basis = Self {
            primitives,
            centers,
        };
        let s = integrals::overlap_matrix(&basis);
        let min = s
            .symmetric_eigenvalues()
            .iter()
            .fold(T::max_value().unwrap(), |m, &v| m.min(v));
        if !(min > T::lit(LINEAR_DEPENDENCE_THRESHOLD)) {
            return Err(Error::LinearDependence {
                min_eigenvalue: min.as_f64(),
            });
        }
        Ok(basis)
    }

    /// Single-center basis from a list of exponents on center 0.
    pub fn single_center(zetas: &[T], center: Vec3<T>) -> Result<Self> {
        let primitives = zetas
            .iter()
            .map(|&z| StoPrimitive::new(z, 0))
            .collect::<Result<Vec<_>>>()?;
        Self::with_centers(primitives, vec![center])
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn primitives(&self) -> &[StoPrimitive<T>] {
        &self.primitives
    }

    pub fn centers(&self) -> &[Vec3<T>] {
        &self.centers
    }

    pub fn center_of(&self, i: usize) -> Vec3<T> {
        self.centers[self.primitives[i].center]
    }

    /// Index of the shared center when every primitive sits on one center.
    pub fn shared_center(&self) -> Option<usize> {
        let c = self.primitives[0].center;
        self.primitives.iter().all(|p| p.center == c).then_some(c)
    }

    /// Every exponent multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::with_centers(
            self.primitives
                .iter()
                .map(|p| StoPrimitive {
                    zeta: p.zeta * factor,
                    center: p.center,
                })
                .collect(),
            self.centers.clone(),
        )
    }

    /// Values of all primitives at `x`.
    pub fn values_at(&self, x: &Vec3<T>) -> DVector<T> {
        DVector::from_iterator(
            self.len(),
            self.primitives
                .iter()
                .map(|p| p.radial_value((x - self.centers[p.center]).norm())),
        )
    }

    pub fn overlap_matrix(&self) -> DMatrix<T> {
        integrals::overlap_matrix(self)
    }

    pub fn to_basis_file(&self) -> String {
        let mut out = String::new();
        for p in &self.primitives {
            let _ = writeln!(out, "{} {:e}", p.center, p.zeta);
        }
        out
    }
}

/// Reads a basis file (`center_index zeta [l]` per line).
pub fn parse_basis<T: Real>(text: &str, frame: &NuclearFrame<T>) -> Result<StoBasis<T>> {
    let mut primitives = Vec::new();
    for (line, fields) in data_lines(text) {
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(line, "expected `center_index zeta [l]`"));
        }
        let center: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad center index {:?}", fields[0])))?;
        if center >= frame.len() {
            return Err(Error::parse(
                line,
                format!(
                    "center index {center} out of range ({} nuclei)",
                    frame.len()
                ),
            ));
        }
        let zeta: T = parse_num(line, fields[1], "zeta")?;
        if !(zeta > T::zero()) {
            return Err(Error::parse(line, "non-positive Slater exponent"));
        }
        if let Some(l) = fields.get(2) {
            match l.parse::<u32>() {
                Ok(0) => {}
                Ok(l) => {
                    return Err(Error::parse(
                        line,
                        format!("angular momentum {l} unsupported; only 1s functions"),
                    ))
                }
                Err(_) => return Err(Error::parse(line, format!("bad angular momentum {l:?}"))),
            }
        }
        primitives.push(StoPrimitive { zeta, center });
    }
    StoBasis::new(primitives, frame)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn label(self) -> char {
        match self {
            Spin::Up => 'u',
            Spin::Down => 'd',
        }
    }
}

/// Spatial coefficient vector over a basis plus a spin label.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOrbital<T: Real> {
    pub coefficients: DVector<T>,
    pub spin: Spin,
}

impl<T: Real> SpinOrbital<T> {
    pub fn new(coefficients: DVector<T>, spin: Spin) -> Self {
        Self { coefficients, spin }
    }

    /// `c† S c` under the basis overlap.
    pub fn norm_sq(&self, s: &DMatrix<T>) -> T {
        s.quadform_scalar(&self.coefficients)
    }

    /// Rescales to unit norm under `s`.
    pub fn normalized(mut self, s: &DMatrix<T>) -> Self {
        let n = self.norm_sq(s).sqrt();
        self.coefficients /= n;
        self
    }

    /// Spatial amplitude at `x`.
    pub fn value_at(&self, basis: &StoBasis<T>, x: &Vec3<T>) -> T {
        basis.values_at(x).dot(&self.coefficients)
    }

    /// Flips the global sign so the largest-magnitude coefficient is positive.
    pub fn oriented(mut self) -> Self {
        let mut best = T::zero();
        for &c in self.coefficients.iter() {
            if c.abs() > best.abs() {
                best = c;
            }
        }
        if best < T::zero() {
            self.coefficients.neg_mut();
        }
        self
    }
}

trait QuadForm<T: Real> {
    fn quadform_scalar(&self, v: &DVector<T>) -> T;
    fn bilinear(&self, u: &DVector<T>, v: &DVector<T>) -> T;
}

impl<T: Real> QuadForm<T> for DMatrix<T> {
    fn quadform_scalar(&self, v: &DVector<T>) -> T {
        self.bilinear(v, v)
    }
    fn bilinear(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        u.dot(&(self * v))
    }
}

/// Antisymmetrized product of `N` spin orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantWavefunction<T: Real> {
    orbitals: Vec<SpinOrbital<T>>,
}

impl<T: Real> DeterminantWavefunction<T> {
    /// Validates dimensions and orthonormality against `basis`.
    ///
    /// Deviations up to [`ORTHONORMALITY_REJECT`] are repaired (same-spin
    /// Gram-Schmidt in input order); larger ones are errors.
    pub fn new(orbitals: Vec<SpinOrbital<T>>, basis: &StoBasis<T>) -> Result<Self> {
        let s = basis.overlap_matrix();
        let mut orbitals = orbitals;
        for (i, o) in orbitals.iter().enumerate() {
            if o.coefficients.len() != basis.len() {
                return Err(Error::InvalidInput(format!(
                    "orbital {i} has {} coefficients, basis has {}",
                    o.coefficients.len(),
                    basis.len()
                )));
            }
        }
        let reject = T::lit(ORTHONORMALITY_REJECT);
        let slack = T::lit(ORTHONORMALITY_SLACK);
        for i in 0..orbitals.len() {
            let n = orbitals[i].norm_sq(&s);
            if (n - T::one()).abs() > reject {
                return Err(Error::Orthonormality(format!(
                    "orbital {i} has norm² {n:?}"
                )));
            }
            for j in 0..i {
                if orbitals[j].spin != orbitals[i].spin {
                    continue;
                }
                let ov = s.bilinear(&orbitals[i].coefficients, &orbitals[j].coefficients);
                if ov.abs() > reject {
                    return Err(Error::Orthonormality(format!(
                        "same-spin orbitals {j} and {i} overlap by {ov:?}"
                    )));
                }
            }
        }
        // Repair small deviations; exact inputs stay bit-identical.
        for i in 0..orbitals.len() {
            for j in 0..i {
                if orbitals[j].spin != orbitals[i].spin {
                    continue;
                }
                let ov = s.bilinear(&orbitals[i].coefficients, &orbitals[j].coefficients);
                if ov.abs() > slack {
                    let cj = orbitals[j].coefficients.clone();
                    orbitals[i].coefficients.axpy(-ov, &cj, T::one());
                }
            }
            let n = orbitals[i].norm_sq(&s);
            if (n - T::one()).abs() > slack {
                orbitals[i].coefficients /= n.sqrt();
            }
        }
        Ok(Self { orbitals })
    }

    /// Closed-shell determinant: each spatial orbital doubly occupied.
    /// Spatial vectors are normalized first.
    pub fn restricted(spatial: &[DVector<T>], basis: &StoBasis<T>) -> Result<Self> {
        let s = basis.overlap_matrix();
        let mut orbitals = Vec::with_capacity(2 * spatial.len());
        for c in spatial {
            let o = SpinOrbital::new(c.clone(), Spin::Up).normalized(&s);
            orbitals.push(o.clone());
            orbitals.push(SpinOrbital {
                spin: Spin::Down,
                ..o
            });
        }
        Self::new(orbitals, basis)
    }

    /// The empty (zero-electron) determinant.
    pub fn empty() -> Self {
        Self {
            orbitals: Vec::new(),
        }
    }

    pub fn orbitals(&self) -> &[SpinOrbital<T>] {
        &self.orbitals
    }

    pub fn electron_count(&self) -> usize {
        self.orbitals.len()
    }

    /// Spatial orbitals when the determinant is closed-shell restricted
    /// (consecutive up/down pairs with identical coefficients).
    pub fn restricted_pairs(&self) -> Option<Vec<DVector<T>>> {
        if !self.orbitals.len().is_multiple_of(2) {
            return None;
        }
        self.orbitals
            .chunks(2)
            .map(|p| {
                (p[0].spin == Spin::Up
                    && p[1].spin == Spin::Down
                    && p[0].coefficients == p[1].coefficients)
                    .then(|| p[0].coefficients.clone())
            })
            .collect()
    }

    /// Copy with orbital `i`'s sign flipped.
    pub fn with_flipped_sign(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.orbitals[i].coefficients.neg_mut();
        out
    }

    /// Determinant amplitude `ψ(x₁s₁, …, x_Ns_N)` including the `1/√N!`
    /// prefactor. `electrons.len()` must equal the electron count.
    pub fn amplitude(&self, basis: &StoBasis<T>, electrons: &[(Vec3<T>, Spin)]) -> T {
        let n = self.orbitals.len();
        assert_eq!(electrons.len(), n, "one coordinate per electron");
        if n == 0 {
            return T::one();
        }
        let mut m = DMatrix::zeros(n, n);
        for (row, (x, s)) in electrons.iter().enumerate() {
            let values = basis.values_at(x);
            for (col, o) in self.orbitals.iter().enumerate() {
                if o.spin == *s {
                    m[(row, col)] = values.dot(&o.coefficients);
                }
            }
        }
        let factorial = (1..=n).fold(T::one(), |f, k| f * T::count(k));
        m.determinant() / factorial.sqrt()
    }

    /// Orbital file text (`norb nbasis` header, then `spin c...`).
    pub fn to_orbital_file(&self, nbasis: usize) -> String {
        let mut out = format!("{} {}\n", self.orbitals.len(), nbasis);
        for o in &self.orbitals {
            out.push(o.spin.label());
            for c in o.coefficients.iter() {
                let _ = write!(out, " {c:e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Reads an orbital file and validates it against `basis`.
pub fn parse_orbitals<T: Real>(
    text: &str,
    basis: &StoBasis<T>,
) -> Result<DeterminantWavefunction<T>> {
    let mut lines = data_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("orbital file is empty".into()))?;
    if header.len() != 2 {
        return Err(Error::parse(hline, "expected header `norb nbasis`"));
    }
    let norb: usize = header[0]
        .parse()
        .map_err(|_| Error::parse(hline, "bad orbital count"))?;
    let nbasis: usize = header[1]
        .parse()
        .map_err(|_| Error::parse(hline, "bad basis size"))?;
    if nbasis != basis.len() {
        return Err(Error::parse(
            hline,
            format!(
                "file declares {nbasis} basis functions, basis has {}",
                basis.len()
            ),
        ));
    }
    let mut orbitals = Vec::with_capacity(norb);
    for (line, fields) in lines {
        if orbitals.len() == norb {
            return Err(Error::parse(line, format!("more than {norb} orbital rows")));
        }
        let spin = match fields[0] {
            "u" => Spin::Up,
            "d" => Spin::Down,
            other => return Err(Error::parse(line, format!("unknown spin {other:?}"))),
        };
        if fields.len() != nbasis + 1 {
            return Err(Error::parse(
                line,
                format!("expected {nbasis} coefficients, found {}", fields.len() - 1),
            ));
        }
        let coefficients = fields[1..]
            .iter()
            .map(|f| parse_num(line, f, "coefficient"))
            .collect::<Result<Vec<T>>>()?;
        orbitals.push(SpinOrbital::new(DVector::from_vec(coefficients), spin));
    }
    if orbitals.len() != norb {
        return Err(Error::InvalidInput(format!(
            "header declares {norb} orbitals, found {}",
            orbitals.len()
        )));
    }
    DeterminantWavefunction::new(orbitals, basis)
}
