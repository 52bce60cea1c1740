//! Run configuration and the command implementations behind the `scarlab` binary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::basis::{enumerate_basis, ConstrainedBasis, MAX_LENGTH, MIN_LENGTH};
use crate::entanglement::{entropy_sweep, Bipartition, CutSpec};
use crate::error::{Result, ScarError};
use crate::evolution::{
    evolve_direct, evolve_similarity, norm_decomposition, time_grid, EvolutionTrace,
};
use crate::io::{self, g_tag, RunManifest, StageTiming};
use crate::operators::{build_h, build_v, similarity_residual, ModelParams};
use crate::spectral::{
    eigendecompose_h0, identify_scars, p_nup, right_eigvec, scar_overlaps,
    spectrum_invariance, EigenSystem, NupDistribution, ScarLabeling,
};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "SCARLAB_THREADS";

pub const SIMILARITY_TOL: f64 = 1e-12;
pub const SPECTRUM_TOL: f64 = 1e-6;
pub const IMAG_TOL: f64 = 1e-8;
pub const PROPAGATOR_TOL: f64 = 1e-6;
pub const AMPLITUDE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
pub const REWEIGHT_TOL: f64 = 1e-12;
pub const ODE_RTOL: f64 = 1e-10;
/// Longest time span checked against the direct integrator.
pub const ORACLE_T_MAX: f64 = 30.0;
pub const VERIFY_MAX_LENGTH: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Basis,
    Spectrum,
    Evolve,
    Scars,
    Pnup,
    Entropy,
    Fig2,
    Fig3,
    Fig4,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Scars => "scars",
            Command::Pnup => "pnup",
            Command::Entropy => "entropy",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Verify => "verify",
        }
    }

    pub fn default_length(self) -> usize {
        match self {
            Command::Fig2 => 18,
            Command::Fig3 | Command::Fig4 => 16,
            Command::Verify => 10,
            _ => 12,
        }
    }
}

/// Which basis state a trajectory starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Z2bar,
    Z2,
    Vacuum,
    Index(usize),
}

impl InitialState {
    pub fn resolve(self, basis: &ConstrainedBasis) -> Result<usize> {
        let (z2, z2bar) = basis.neel_states();
        match self {
            InitialState::Z2bar => Ok(z2bar),
            InitialState::Z2 => Ok(z2),
            InitialState::Vacuum => Ok(basis.vacuum()),
            InitialState::Index(k) if k < basis.dim() => Ok(k),
            InitialState::Index(k) => Err(ScarError::IndexOutOfRange { index: k, dim: basis.dim() }),
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "z2bar" => Ok(InitialState::Z2bar),
            "z2" => Ok(InitialState::Z2),
            "vacuum" => Ok(InitialState::Vacuum),
            other => other
                .parse()
                .map(InitialState::Index)
                .map_err(|_| format!("expected z2bar, z2, vacuum or a basis index, got `{other}`")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub length: usize,
    pub g_list: Vec<f64>,
    pub t_max: f64,
    pub t_step: f64,
    pub out_dir: PathBuf,
    pub cut_start: usize,
    pub tolerance: Option<f64>,
    pub initial: InitialState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_operator: Option<PathBuf>,
    /// Negates one stored entry of `H_g` before the similarity check.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inject_sign_flip: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            length: command.default_length(),
            g_list: vec![-1.0, 0.0, 1.0],
            t_max: 40.0,
            t_step: 0.02,
            out_dir: PathBuf::from("out"),
            cut_start: 0,
            tolerance: None,
            initial: InitialState::Z2bar,
            dump_operator: None,
            inject_sign_flip: false,
        }
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let max = if self.command == Command::Verify { VERIFY_MAX_LENGTH } else { MAX_LENGTH };
        if self.length % 2 != 0 || !(MIN_LENGTH..=max).contains(&self.length) {
            return Err(ScarError::Config(format!(
                "--length must be even and between {MIN_LENGTH} and {max} for `{}`, got {}",
                self.command.name(),
                self.length
            )));
        }
        if self.g_list.is_empty() {
            return Err(ScarError::Config("at least one --g value is required".into()));
        }
        if let Some(g) = self.g_list.iter().find(|g| !g.is_finite()) {
            return Err(ScarError::Config(format!("--g must be finite, got {g}")));
        }
        if !(self.t_step.is_finite() && self.t_step > 0.0) {
            return Err(ScarError::Config(format!("--t-step must be positive, got {}", self.t_step)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(ScarError::Config(format!("--t-max must be positive, got {}", self.t_max)));
        }
        if self.cut_start >= self.length {
            return Err(ScarError::Config(format!(
                "--cut-start must be below L = {}, got {}",
                self.length, self.cut_start
            )));
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(ScarError::Config(format!("--tolerance must be positive, got {tol}")));
            }
        }
        Ok(())
    }
}

/// One line of a verification table.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckResult { name: name.into(), value, threshold, passed: value < threshold }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<44} {:>12.3e} < {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold
        )
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest_path: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub checks: Vec<CheckResult>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Caps rayon and faer parallelism at `SCARLAB_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ScarError::Config(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // a global pool may already exist when embedded in a larger program
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    faer::set_global_parallelism(if threads == 1 { faer::Par::Seq } else { faer::Par::rayon(threads) });
    Ok(())
}

struct Run {
    config: RunConfig,
    manifest: RunManifest<RunConfig>,
    artifacts: Vec<PathBuf>,
    checks: Vec<CheckResult>,
    clock: Instant,
}

impl Run {
    fn new(config: &RunConfig, basis_dim: usize) -> Self {
        Run {
            config: config.clone(),
            manifest: RunManifest::new(config.clone(), basis_dim),
            artifacts: Vec::new(),
            checks: Vec::new(),
            clock: Instant::now(),
        }
    }

    fn stage(&mut self, name: &str) {
        self.manifest.stages.push(StageTiming {
            stage: name.to_string(),
            seconds: self.clock.elapsed().as_secs_f64(),
        });
        self.clock = Instant::now();
    }

    fn path(&self, stem: &str) -> PathBuf {
        self.config.out_dir.join(format!("{stem}.csv"))
    }

    fn emitted(&mut self, path: PathBuf) -> Result<()> {
        self.manifest.register(&self.config.out_dir, &path)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn tolerance(&mut self, name: &str, value: f64) {
        self.manifest.tolerances.insert(name.to_string(), value);
    }

    fn finish(self) -> Result<RunOutcome> {
        let manifest_path = self.manifest.write(&self.config.out_dir)?;
        Ok(RunOutcome { manifest_path, artifacts: self.artifacts, checks: self.checks })
    }
}

/// Validates the configuration, runs the command and writes its outputs and
/// manifest into `config.out_dir`.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)?;

    let basis = enumerate_basis(config.length)?;
    let mut run = Run::new(config, basis.dim());
    run.stage("basis");

    match config.command {
        Command::Basis => cmd_basis(&mut run, &basis)?,
        Command::Spectrum => cmd_spectrum(&mut run, &basis)?,
        Command::Evolve | Command::Fig2 => cmd_evolve(&mut run, &basis)?,
        Command::Scars => cmd_scars(&mut run, &basis)?,
        Command::Pnup | Command::Fig3 => cmd_pnup(&mut run, &basis)?,
        Command::Entropy | Command::Fig4 => cmd_entropy(&mut run, &basis)?,
        Command::Verify => cmd_verify(&mut run, &basis)?,
    }
    run.finish()
}

fn prefix(command: Command) -> &'static str {
    match command {
        Command::Evolve => "trace",
        other => other.name(),
    }
}

fn cmd_basis(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let path = run.path(&format!("basis_L{}", basis.length()));
    io::write_basis_csv(&path, basis)?;
    run.emitted(path)?;

    if let Some(dump) = run.config.dump_operator.clone() {
        let g = run.config.g_list[0];
        let h = build_h(basis, &ModelParams::new(basis.length(), g)?)?;
        h.write_coordinate(std::io::BufWriter::new(fs::File::create(&dump)?))?;
        run.emitted(dump)?;
        run.stage("operator dump");
    }
    Ok(())
}

fn cmd_spectrum(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let l = basis.length();
    let eig = eigendecompose_h0(basis)?;
    run.stage("diagonalize H0");
    let path = run.path(&format!("spectrum_L{l}"));
    io::write_spectrum_csv(&path, eig.energies())?;
    run.emitted(path)?;

    let report = spectrum_invariance(basis, &run.config.g_list)?;
    run.stage("non-symmetric eigensolves");
    let path = run.path(&format!("spectrum_check_L{l}"));
    io::write_spectrum_check_csv(&path, &report.per_g)?;
    run.emitted(path)?;

    let tol = run.config.tolerance.unwrap_or(SPECTRUM_TOL);
    run.tolerance("spectrum", tol);
    run.tolerance("imaginary_part", IMAG_TOL);
    run.checks.push(CheckResult::below("isospectrality (sorted)", report.max_sorted_deviation(), tol));
    run.checks.push(CheckResult::below("max |Im E|", report.max_imag(), IMAG_TOL));
    Ok(())
}

fn cmd_evolve(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let initial = run.config.initial.resolve(basis)?;
    let eig = eigendecompose_h0(basis)?;
    run.stage("diagonalize H0");
    let times = time_grid(run.config.t_max, run.config.t_step);
    for g in run.config.g_list.clone() {
        let trace = evolve_similarity(basis, &eig, g, initial, &times)?;
        let path =
            run.path(&format!("{}_L{}_{}", prefix(run.config.command), basis.length(), g_tag(g)));
        io::write_trace_csv(&path, &trace)?;
        run.emitted(path)?;
        run.stage(&format!("evolve {}", g_tag(g)));
    }
    Ok(())
}

struct ScarTable {
    eig: EigenSystem,
    overlaps: Vec<f64>,
    scars: ScarLabeling,
}

fn scar_table(run: &mut Run, basis: &ConstrainedBasis) -> Result<ScarTable> {
    let eig = eigendecompose_h0(basis)?;
    run.stage("diagonalize H0");
    let overlaps = scar_overlaps(&eig, basis);
    let scars = identify_scars(&eig, basis);
    run.manifest.scar_criterion = Some(scars.criterion.clone());
    run.stage("identify scars");
    Ok(ScarTable { eig, overlaps, scars })
}

fn cmd_scars(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let table = scar_table(run, basis)?;
    let path = run.path(&format!("scars_L{}", basis.length()));
    io::write_scars_csv(&path, table.eig.energies(), &table.overlaps, &table.scars)?;
    run.emitted(path)
}

fn cmd_pnup(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let table = scar_table(run, basis)?;
    for g in run.config.g_list.clone() {
        let distributions: Vec<NupDistribution> =
            (0..table.eig.dim()).map(|a| p_nup(&table.eig, basis, g, a)).collect::<Result<_>>()?;
        let path =
            run.path(&format!("{}_L{}_{}", prefix(run.config.command), basis.length(), g_tag(g)));
        io::write_nup_csv(
            &path,
            basis.length(),
            table.eig.energies(),
            &table.overlaps,
            &table.scars,
            &distributions,
        )?;
        run.emitted(path)?;
        run.stage(&format!("p_nup {}", g_tag(g)));
    }
    Ok(())
}

fn cmd_entropy(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let table = scar_table(run, basis)?;
    let cut = CutSpec::half(basis.length(), run.config.cut_start)?;
    run.tolerance("schmidt_cutoff", crate::entanglement::SCHMIDT_CUTOFF);
    for g in run.config.g_list.clone() {
        let records = entropy_sweep(&table.eig, basis, g, cut)?;
        let path =
            run.path(&format!("{}_L{}_{}", prefix(run.config.command), basis.length(), g_tag(g)));
        io::write_entropy_csv(&path, &records, &table.scars)?;
        run.emitted(path)?;
        run.stage(&format!("entropy {}", g_tag(g)));
    }
    Ok(())
}

/// Number of blockade-free ring configurations by exhaustive per-site test.
fn brute_force_dimension(length: usize) -> usize {
    (0u32..1 << length)
        .filter(|&bits| {
            (0..length).all(|i| {
                let j = (i + 1) % length;
                !(bits >> i & 1 == 1 && bits >> j & 1 == 1)
            })
        })
        .count()
}

fn cmd_verify(run: &mut Run, basis: &ConstrainedBasis) -> Result<()> {
    let l = basis.length();
    let g_list = run.config.g_list.clone();
    let sim_tol = run.config.tolerance.unwrap_or(SIMILARITY_TOL);
    for (name, tol) in [
        ("similarity", sim_tol),
        ("spectrum", SPECTRUM_TOL),
        ("imaginary_part", IMAG_TOL),
        ("propagator", PROPAGATOR_TOL),
        ("neel_amplitudes", AMPLITUDE_TOL),
        ("norm_identity", NORM_TOL),
        ("reweighting", REWEIGHT_TOL),
        ("ode_rtol", ODE_RTOL),
    ] {
        run.tolerance(name, tol);
    }
    let mut checks = Vec::new();

    let brute = brute_force_dimension(l);
    checks.push(CheckResult::below(
        format!("basis dimension ({} vs {brute})", basis.dim()),
        basis.dim().abs_diff(brute) as f64,
        0.5,
    ));

    let h0 = build_h(basis, &ModelParams::new(l, 0.0)?)?;
    for (i, &g) in g_list.iter().enumerate() {
        let mut hg = build_h(basis, &ModelParams::new(l, g)?)?;
        if run.config.inject_sign_flip && i == 0 {
            hg.negate_entry(0);
        }
        let residual = similarity_residual(&h0, &hg, &build_v(basis, g));
        checks.push(CheckResult::below(format!("similarity residual {}", g_tag(g)), residual, sim_tol));
    }
    run.stage("similarity");

    let report = spectrum_invariance(basis, &g_list)?;
    checks.push(CheckResult::below("isospectrality (sorted)", report.max_sorted_deviation(), SPECTRUM_TOL));
    checks.push(CheckResult::below("max |Im E| of H_g", report.max_imag(), IMAG_TOL));
    run.stage("isospectrality");

    let eig = eigendecompose_h0(basis)?;
    let (z2, z2bar) = basis.neel_states();
    run.stage("diagonalize H0");

    let oracle_times = time_grid(run.config.t_max.min(ORACLE_T_MAX), run.config.t_step);
    let mut traces: Vec<EvolutionTrace> = Vec::new();
    for &g in &g_list {
        let fast = evolve_similarity(basis, &eig, g, z2bar, &oracle_times)?;
        let slow = evolve_direct(basis, g, z2bar, &oracle_times, ODE_RTOL)?;
        let dev = max_abs_diff(&fast.p_z2bar, &slow.p_z2bar);
        checks.push(CheckResult::below(format!("propagator oracle {}", g_tag(g)), dev, PROPAGATOR_TOL));

        let stride = (oracle_times.len() / 16).max(1);
        let mut worst: f64 = 0.0;
        for k in (0..oracle_times.len()).step_by(stride) {
            let total: f64 = norm_decomposition(basis, &eig, g, z2bar, oracle_times[k])?.iter().sum();
            let direct = fast.log_norm_sq[k].exp();
            worst = worst.max((total - direct).abs() / direct);
        }
        checks.push(CheckResult::below(format!("norm decomposition {}", g_tag(g)), worst, NORM_TOL));
        traces.push(fast);
    }
    let mut amp_dev: f64 = 0.0;
    for pair in traces.windows(2) {
        for k in 0..oracle_times.len() {
            amp_dev = amp_dev
                .max((pair[0].amp_z2[k] - pair[1].amp_z2[k]).norm())
                .max((pair[0].amp_z2bar[k] - pair[1].amp_z2bar[k]).norm());
        }
    }
    checks.push(CheckResult::below("Neel amplitudes g-independent", amp_dev, AMPLITUDE_TOL));
    run.stage("evolution");

    let split = Bipartition::new(basis, CutSpec::half(l, run.config.cut_start)?)?;
    let mut neel = vec![0.0; basis.dim()];
    neel[z2bar] = 1.0;
    checks.push(CheckResult::below("entropy of Z2bar", split.entropy(&neel)?, 1e-12));
    neel[z2] = std::f64::consts::FRAC_1_SQRT_2;
    neel[z2bar] = std::f64::consts::FRAC_1_SQRT_2;
    checks.push(CheckResult::below("entropy of Neel cat - 1", (split.entropy(&neel)? - 1.0).abs(), 1e-12));

    for &g in &g_list {
        let hg = build_h(basis, &ModelParams::new(l, g)?)?;
        let mut eig_residual: f64 = 0.0;
        let mut route_gap: f64 = 0.0;
        let mut hv = vec![0.0; basis.dim()];
        for alpha in 0..eig.dim() {
            let v = right_eigvec(&eig, basis, g, alpha)?;
            let e = eig.energies()[alpha];
            hg.apply_real(&v, &mut hv);
            let res = hv.iter().zip(&v).map(|(a, b)| (a - e * b).abs()).fold(0.0, f64::max);
            eig_residual = eig_residual.max(res / (1e-8 * e.abs() + 1e-10));

            let formula = p_nup(&eig, basis, g, alpha)?;
            let mut explicit = vec![0.0; basis.max_nup() + 1];
            for (k, &n) in basis.nup().iter().enumerate() {
                explicit[n] += v[k] * v[k];
            }
            route_gap = route_gap.max(max_abs_diff(&formula.p, &explicit));
        }
        checks.push(CheckResult::below(
            format!("right eigenvector residual / bound {}", g_tag(g)),
            eig_residual,
            1.0,
        ));
        checks.push(CheckResult::below(format!("p_nup two-route gap {}", g_tag(g)), route_gap, REWEIGHT_TOL));
    }

    let scars = identify_scars(&eig, basis);
    checks.push(CheckResult::below(
        format!("scar count ({} vs L+1 = {})", scars.scar_indices.len(), l + 1),
        scars.scar_indices.len().abs_diff(l + 1) as f64,
        0.5,
    ));
    run.manifest.scar_criterion = Some(scars.criterion);
    run.stage("spectral checks");

    let path = run.path(&format!("verify_L{l}"));
    write_checks_csv(&path, &checks)?;
    run.emitted(path)?;
    run.checks = checks;
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn write_checks_csv(path: &Path, checks: &[CheckResult]) -> Result<()> {
    let mut text = String::from("check,value,threshold,passed\n");
    for c in checks {
        text.push_str(&format!(
            "{},{},{},{}\n",
            c.name.replace(',', ";"),
            io::fmt_f64(c.value),
            io::fmt_f64(c.threshold),
            u8::from(c.passed)
        ));
    }
    fs::write(path, text)?;
    Ok(())
}
