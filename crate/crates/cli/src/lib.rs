//! Command-line driver for cloudchem.
//!
//! Every subcommand reads and validates all of its inputs, computes its
//! results in memory and only then writes files into `--out`, so a failed
//! run leaves no partial outputs. The one exception is SCF non-convergence,
//! which still writes the iteration trace.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use cloudchem::density::{
    charge_centroid, density_from_determinant, dipole_moment, export_box_csv, export_slice_csv,
    rms_charge_radius, total_charge, ExportMetadata, SliceSpec,
};
use cloudchem::dft::{kohn_sham_energy, variational_probe, XcFunctional};
use cloudchem::electrostatics::{force_report, scale_experiment, ScaledConstants};
use cloudchem::hartree_fock::{decompose_energy, scf_solve, ScfIteration};
use cloudchem::quadrature::{BoxSpec, RadialRule, DEFAULT_MAP_RADIUS, DEFAULT_RADIAL_NODES};
use cloudchem::report::{self, Report, Units, Value};
use cloudchem::system::{parse_basis, parse_geometry, parse_orbitals};
use cloudchem::{
    ChargeDensityField, DeterminantWavefunction, Error, NuclearFrame, QuadratureGrid, ScfSettings,
    StoBasis, Vec3,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "CLOUDCHEM_THREADS";

const DEFAULT_BOX: &str = "48,48,48,6";

#[derive(Debug, Parser)]
#[command(
    name = "cloudchem",
    version,
    about = "Charge densities and energy decompositions for small atoms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Geometry file: `label charge x y z` per line (bohr).
    #[arg(long, global = true)]
    pub geometry: Option<PathBuf>,
    /// Basis file: `center_index zeta [l]` per line.
    #[arg(long, global = true)]
    pub basis: Option<PathBuf>,
    /// Orbital file: `norb nbasis` header, then `u|d c1 c2 ...` rows.
    #[arg(long, global = true)]
    pub orbitals: Option<PathBuf>,
    /// Electron count for `scf` (even).
    #[arg(long, global = true)]
    pub electrons: Option<usize>,
    /// Energy units in reports: `hartree`, `ev` or `both`.
    #[arg(long, global = true, default_value = "both")]
    pub units: Units,
    /// Export box as `nx,ny,nz,halfwidth` in bohr (default 48,48,48,6).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// SCF iteration limit (default 100).
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// SCF energy tolerance in hartree (default 1e-10).
    #[arg(long, global = true)]
    pub etol: Option<f64>,
    /// SCF density and commutator tolerance (default 1e-8).
    #[arg(long, global = true)]
    pub dtol: Option<f64>,
    /// Density mixing weight of the previous iterate, in [0, 1) (default 0.3).
    #[arg(long, global = true)]
    pub damping: Option<f64>,
    /// Radial nodes of the analysis quadrature (default 96).
    #[arg(long, global = true)]
    pub radial_nodes: Option<usize>,
    /// Allowed |∫ρ + N| on the analysis grid (default 1e-6 per electron).
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Restricted Hartree-Fock ground state.
    Scf,
    /// Energy decomposition of a supplied determinant.
    Energy,
    /// Box export of the charge density with a metadata sidecar.
    Density {
        /// Also export a coordinate-plane section (`xy`, `xz` or `yz`).
        #[arg(long)]
        slice: Option<String>,
    },
    /// Root-mean-square charge radius.
    Radius {
        /// Reference point `x,y,z`; defaults to the charge centroid.
        #[arg(long)]
        center: Option<String>,
    },
    /// Dipole moment of nuclei plus electron cloud.
    Dipole,
    /// Electrostatic forces on every nucleus.
    Forces,
    /// Kohn-Sham energy evaluation.
    Dft {
        #[arg(long, default_value = "none")]
        xc: XcFunctional,
        /// Apply the Perdew-Zunger self-interaction correction.
        #[arg(long)]
        sic: bool,
    },
    /// Hydrogen under scaled electron mass and charge.
    Scale {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        charge: f64,
    },
    /// Random normalized perturbations around a supplied determinant.
    Probe {
        #[arg(long, default_value = "exact-from-hf")]
        xc: XcFunctional,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: Option<PathBuf>,
    pub basis: Option<PathBuf>,
    pub orbitals: Option<PathBuf>,
    pub electrons: Option<usize>,
    pub settings: ScfSettings,
    pub out: PathBuf,
    pub units: Units,
    pub grid: BoxSpec<f64>,
    pub radial_nodes: usize,
    pub quad_tol: Option<f64>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> cloudchem::Result<Self> {
        let c = cli.common;
        for path in [&c.geometry, &c.basis, &c.orbitals].into_iter().flatten() {
            if !path.is_file() {
                return Err(Error::InvalidInput(format!(
                    "{}: no such file",
                    path.display()
                )));
            }
        }
        check_creatable(&c.out)?;
        let defaults = ScfSettings::default();
        let settings = ScfSettings {
            max_iterations: c.max_iter.unwrap_or(defaults.max_iterations),
            energy_tolerance: c.etol.unwrap_or(defaults.energy_tolerance),
            density_tolerance: c.dtol.unwrap_or(defaults.density_tolerance),
            damping: c.damping.unwrap_or(defaults.damping),
        };
        settings.validate()?;
        let grid: BoxSpec<f64> = c.grid.as_deref().unwrap_or(DEFAULT_BOX).parse()?;
        let radial_nodes = c.radial_nodes.unwrap_or(DEFAULT_RADIAL_NODES);
        if radial_nodes < 2 {
            return Err(Error::InvalidInput(
                "--radial-nodes must be at least 2".into(),
            ));
        }
        if let Some(t) = c.quad_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidInput("--quad-tol must be positive".into()));
            }
        }
        Ok(Self {
            command: cli.command,
            geometry: c.geometry,
            basis: c.basis,
            orbitals: c.orbitals,
            electrons: c.electrons,
            settings,
            out: c.out,
            units: c.units,
            grid,
            radial_nodes,
            quad_tol: c.quad_tol,
        })
    }
}

fn check_creatable(dir: &Path) -> cloudchem::Result<()> {
    if dir.exists() {
        return if dir.is_dir() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{}: not a directory",
                dir.display()
            )))
        };
    }
    match dir
        .ancestors()
        .skip(1)
        .find(|a| a.as_os_str().is_empty() || a.exists())
    {
        Some(a) if a.as_os_str().is_empty() || a.is_dir() => Ok(()),
        _ => Err(Error::InvalidInput(format!(
            "{}: output directory cannot be created",
            dir.display()
        ))),
    }
}

/// Files produced by a successful run, plus the text echoed to stdout.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub stdout: String,
}

impl Outputs {
    fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    fn add_report(&mut self, stem: &str, report: &Report, units: Units) {
        let flat = report.to_flat(units);
        self.stdout.push_str(&flat);
        self.add(&format!("{stem}.txt"), flat);
        self.add(&format!("{stem}.json"), pretty(&report.to_json(units)));
    }

    fn write(&self, dir: &Path) -> cloudchem::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::Quadrature { .. } => EXIT_QUADRATURE,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to standard error.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match pool.install(|| execute(cli)) {
        Ok(stdout) => {
            print!("{stdout}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_pool() -> cloudchem::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::InvalidInput(format!("{THREADS_ENV}={v:?} is not a positive integer"))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker threads: {e}")))
}

/// Runs a parsed command line, writing its files, and returns the text
/// meant for stdout.
pub fn execute(cli: Cli) -> cloudchem::Result<String> {
    let config = RunConfig::from_cli(cli)?;
    match compute(&config) {
        Ok(outputs) => {
            outputs.write(&config.out)?;
            Ok(outputs.stdout)
        }
        Err(Error::NotConverged { trace }) => {
            let mut partial = Outputs::default();
            add_trace(&mut partial, &trace);
            partial.write(&config.out)?;
            Err(Error::NotConverged { trace })
        }
        Err(e) => Err(e),
    }
}

/// Runs the configured subcommand without touching the file system beyond
/// reading inputs.
pub fn compute(config: &RunConfig) -> cloudchem::Result<Outputs> {
    match &config.command {
        Command::Scf => cmd_scf(config),
        Command::Energy => cmd_energy(config),
        Command::Density { slice } => cmd_density(config, slice.as_deref()),
        Command::Radius { center } => cmd_radius(config, center.as_deref()),
        Command::Dipole => cmd_dipole(config),
        Command::Forces => cmd_forces(config),
        Command::Dft { xc, sic } => cmd_dft(config, *xc, *sic),
        Command::Scale { mass, charge } => cmd_scale(config, *mass, *charge),
        Command::Probe {
            xc,
            samples,
            scale,
            seed,
        } => cmd_probe(config, *xc, *samples, *scale, *seed),
    }
}

fn read(path: &Path) -> cloudchem::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { .. } | Error::InvalidInput(_) => {
            Error::InvalidInput(format!("{}: {e}", path.display()))
        }
        other => other,
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> cloudchem::Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("--{flag} is required")))
}

fn load_frame(config: &RunConfig) -> cloudchem::Result<NuclearFrame> {
    let path = required(&config.geometry, "geometry")?;
    parse_geometry(&read(path)?).map_err(|e| in_file(path, e))
}

fn load_system(config: &RunConfig) -> cloudchem::Result<(NuclearFrame, StoBasis)> {
    let frame = load_frame(config)?;
    let path = required(&config.basis, "basis")?;
    let basis = parse_basis(&read(path)?, &frame).map_err(|e| in_file(path, e))?;
    Ok((frame, basis))
}

struct Loaded {
    frame: NuclearFrame,
    basis: StoBasis,
    wf: DeterminantWavefunction,
}

fn load_state(config: &RunConfig) -> cloudchem::Result<Loaded> {
    let (frame, basis) = load_system(config)?;
    let path = required(&config.orbitals, "orbitals")?;
    let wf = parse_orbitals(&read(path)?, &basis).map_err(|e| in_file(path, e))?;
    if let Some(n) = config.electrons {
        if n != wf.electron_count() {
            return Err(Error::InvalidInput(format!(
                "--electrons {n} disagrees with {} orbitals in {}",
                wf.electron_count(),
                path.display()
            )));
        }
    }
    Ok(Loaded { frame, basis, wf })
}

/// Radial grid on the shared center of a one-center basis, Becke grid over
/// the basis centers otherwise.
fn analysis_grid(config: &RunConfig, basis: &StoBasis) -> QuadratureGrid {
    let n = config.radial_nodes;
    match basis.shared_center() {
        Some(c) => QuadratureGrid::radial_spherical(
            basis.centers()[c],
            RadialRule::mapped(n, DEFAULT_MAP_RADIUS),
        ),
        None => {
            let mut centers: Vec<Vec3<f64>> = Vec::new();
            for p in basis.primitives() {
                let c = basis.centers()[p.center];
                if !centers.contains(&c) {
                    centers.push(c);
                }
            }
            QuadratureGrid::molecular(&centers, &RadialRule::mapped(n, 1.5), 16)
        }
    }
}

struct CheckedDensity {
    field: ChargeDensityField,
    grid: QuadratureGrid,
    charge: f64,
    /// Fine-minus-coarse difference, when the grid has a coarse companion.
    estimate: Option<f64>,
}

/// Builds the density and fails with a quadrature error when the analysis
/// grid misses `−N` by more than the tolerance.
fn checked_density(config: &RunConfig, state: &Loaded) -> cloudchem::Result<CheckedDensity> {
    let field = density_from_determinant(&state.wf, &state.basis)?;
    let grid = analysis_grid(config, &state.basis);
    let n = field.electron_count();
    let (charge, estimate) = grid.with_error_estimate(|g| Ok(total_charge(&field, g)))?;
    let tolerance = config.quad_tol.unwrap_or(1e-6 * n.max(1) as f64);
    let error = (charge + n as f64).abs();
    if error > tolerance {
        return Err(Error::Quadrature {
            estimate: error,
            tolerance,
        });
    }
    Ok(CheckedDensity {
        field,
        grid,
        charge,
        estimate,
    })
}

fn add_trace(out: &mut Outputs, trace: &[ScfIteration]) {
    let mut text = String::from("iteration energy_hartree delta_energy delta_density commutator\n");
    for it in trace {
        text.push_str(&format!(
            "{} {:.12} {:.6e} {:.6e} {:.6e}\n",
            it.iteration, it.energy, it.delta_energy, it.delta_density, it.commutator
        ));
    }
    out.add("trace.txt", text);
    out.add(
        "trace.json",
        pretty(&serde_json::to_value(trace).expect("trace records serialize")),
    );
}

fn cmd_scf(config: &RunConfig) -> cloudchem::Result<Outputs> {
    let (frame, basis) = load_system(config)?;
    let electrons = config
        .electrons
        .ok_or_else(|| Error::InvalidInput("--electrons is required".into()))?;
    let outcome = scf_solve(&frame, &basis, electrons, &config.settings)?;
    let mut out = Outputs::default();
    out.add(
        "orbitals.txt",
        outcome.wavefunction.to_orbital_file(basis.len()),
    );
    let mut rep = report::energy_report(&outcome.energy, electrons);
    rep.push("iterations", Value::Count(outcome.trace.len()));
    out.add_report("energy", &rep, config.units);
    add_trace(&mut out, &outcome.trace);
    Ok(out)
}

fn cmd_energy(config: &RunConfig) -> cloudchem::Result<Outputs> {
    let s = load_state(config)?;
    let r = decompose_energy(&s.frame, &s.basis, &s.wf)?;
    let mut out = Outputs::default();
    out.add_report(
        "energy",
        &report::energy_report(&r, s.wf.electron_count()),
        config.units,
    );
    Ok(out)
}

fn cmd_density(config: &RunConfig, slice: Option<&str>) -> cloudchem::Result<Outputs> {
    let s = load_state(config)?;
    let slice_spec = slice
        .map(|plane| {
            let c = config.grid.counts;
            SliceSpec::coordinate_plane(
                plane,
                config.grid.center,
                [c[0], c[1]],
                config.grid.half_width,
            )
        })
        .transpose()?;
    let d = checked_density(config, &s)?;
    let mut csv = Vec::new();
    let box_charge = export_box_csv(&d.field, &config.grid, &mut csv)?;
    let mut out = Outputs::default();
    out.add("density.csv", csv);
    let meta = ExportMetadata {
        columns: ["x", "y", "z", "rho"].map(String::from).to_vec(),
        grid: config.grid.to_string(),
        electron_count: d.field.electron_count(),
        integrated_charge: d.charge,
        box_charge,
        box_quadrature_error: box_charge - d.charge,
        toolkit_version: cloudchem::VERSION.to_string(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|t| t.as_secs())
            .unwrap_or(0),
    };
    out.add(
        "density.meta.json",
        pretty(&serde_json::to_value(&meta).expect("metadata serializes")),
    );
    if let Some(spec) = &slice_spec {
        let mut buf = Vec::new();
        export_slice_csv(&d.field, spec, &mut buf)?;
        out.add("density_slice.csv", buf);
    }
    let mut rep = Report::new("density")
        .with("electrons", Value::Count(d.field.electron_count()))
        .with("total_charge", Value::Number(d.charge))
        .with("box_charge", Value::Number(box_charge))
        .with("grid", Value::Text(config.grid.to_string()));
    if let Some(e) = d.estimate {
        rep.push("quadrature_estimate", Value::Number(e));
    }
    out.add_report("density", &rep, config.units);
    Ok(out)
}

fn parse_point(s: &str) -> cloudchem::Result<Vec3<f64>> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("point {s:?} is not `x,y,z`")))?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(x, y, z)),
        _ => Err(Error::InvalidInput(format!("point {s:?} is not `x,y,z`"))),
    }
}

fn cmd_radius(config: &RunConfig, center: Option<&str>) -> cloudchem::Result<Outputs> {
    let center = center.map(parse_point).transpose()?;
    let s = load_state(config)?;
    let d = checked_density(config, &s)?;
    let c = match center {
        Some(c) => c,
        None => charge_centroid(&d.field, &d.grid)?,
    };
    let rms = rms_charge_radius(&d.field, &d.grid, Some(c))?;
    let rep = Report::new("radius")
        .with("rms_bohr", Value::Number(rms))
        .with("center", Value::Vector([c.x, c.y, c.z]))
        .with("electrons", Value::Count(d.field.electron_count()));
    let mut out = Outputs::default();
    out.add_report("radius", &rep, config.units);
    Ok(out)
}

fn cmd_dipole(config: &RunConfig) -> cloudchem::Result<Outputs> {
    let s = load_state(config)?;
    let d = checked_density(config, &s)?;
    let mu = dipole_moment(&d.field, &s.frame, &d.grid);
    let rep = Report::new("dipole")
        .with("dipole", Value::Vector([mu.x, mu.y, mu.z]))
        .with("dipole_norm", Value::Number(mu.norm()))
        .with(
            "net_charge",
            Value::Number(s.frame.total_charge() + d.charge),
        );
    let mut out = Outputs::default();
    out.add_report("dipole", &rep, config.units);
    Ok(out)
}

fn cmd_forces(config: &RunConfig) -> cloudchem::Result<Outputs> {
    let s = load_state(config)?;
    let d = checked_density(config, &s)?;
    let r = force_report(&d.field, &s.frame, &d.grid)?;
    let mut out = Outputs::default();
    out.add_report("forces", &report::force_report(&r), config.units);
    Ok(out)
}

fn cmd_dft(config: &RunConfig, xc: XcFunctional, sic: bool) -> cloudchem::Result<Outputs> {
    let s = load_state(config)?;
    let d = checked_density(config, &s)?;
    let r = kohn_sham_energy(&s.wf, &s.basis, &s.frame, xc, sic, &d.grid)?;
    let mut rep = report::kohn_sham_report(&r, xc.name());
    rep.push("sic", Value::Flag(sic));
    let mut out = Outputs::default();
    out.add_report("dft", &rep, config.units);
    Ok(out)
}

fn cmd_scale(config: &RunConfig, mass: f64, charge: f64) -> cloudchem::Result<Outputs> {
    let sc = ScaledConstants::new(mass, charge)?;
    let frame = match &config.geometry {
        Some(_) => load_frame(config)?,
        None => NuclearFrame::atom("H", 1.0, Vec3::zeros())?,
    };
    let r = scale_experiment(&frame, config.electrons.unwrap_or(1), sc)?;
    let mut out = Outputs::default();
    out.add_report("scale", &report::scale_report(&r), config.units);
    Ok(out)
}

fn cmd_probe(
    config: &RunConfig,
    xc: XcFunctional,
    samples: usize,
    scale: f64,
    seed: u64,
) -> cloudchem::Result<Outputs> {
    if samples == 0 || !(scale >= 0.0) {
        return Err(Error::InvalidInput(
            "probe needs samples > 0 and scale >= 0".into(),
        ));
    }
    let s = load_state(config)?;
    let d = checked_density(config, &s)?;
    let r = variational_probe(&s.frame, &s.basis, &s.wf, xc, &d.grid, scale, samples, seed)?;
    let mut rep = report::probe_report(&r);
    rep.push("xc", Value::Text(xc.name().to_string()));
    let mut out = Outputs::default();
    out.add_report("probe", &rep, config.units);
    Ok(out)
}
