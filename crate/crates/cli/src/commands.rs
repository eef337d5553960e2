use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use hotspot_core::analysis::{
    check_global_condition, critical_constants, interpolation_probe, poincare_probe, sobolev_slack,
};
use hotspot_core::grid::{sample_cosine_field, GridSpec};
use hotspot_core::model::{steady_state, DerivedBounds, ModelParams};
use hotspot_core::solver::{run_observed, Outcome, SimConfig};

use crate::config::RunConfigFile;
use crate::output::{write_outcome, write_snapshot, DiagnosticsWriter, OutcomeFile};
use crate::{exit, CliError};

/// Like `println!`, but a closed stdout (e.g. piped into `head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub const OUT_DIR_ENV: &str = "HOTSPOT_OUT";

struct Job {
    config_path: PathBuf,
    sim: SimConfig,
    dir: PathBuf,
    snapshots: bool,
    diagnostics: bool,
}

fn prepare(path: &Path, env_dir: Option<&Path>, many: bool) -> Result<Job, CliError> {
    let file = RunConfigFile::load(path)?;
    let sim = file.sim_config()?;
    let dir = match env_dir {
        Some(d) if many => d.join(path.file_stem().unwrap_or(path.as_os_str())),
        Some(d) => d.to_path_buf(),
        None => file.outputs.dir.clone(),
    };
    Ok(Job { config_path: path.to_path_buf(), sim, dir, snapshots: file.outputs.snapshots, diagnostics: file.outputs.diagnostics })
}

/// Runs every config; exit code is the most severe of the individual results.
pub fn simulate(paths: &[PathBuf]) -> i32 {
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let mut jobs = Vec::with_capacity(paths.len());
    for p in paths {
        match prepare(p, env_dir.as_deref(), paths.len() > 1) {
            Ok(j) => jobs.push(j),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return exit::FAILURE;
            }
        }
    }
    let mut seen = BTreeSet::new();
    for j in &jobs {
        if !seen.insert(j.dir.clone()) {
            eprintln!("error: two configs write to {}", j.dir.display());
            return exit::FAILURE;
        }
    }
    let codes: Vec<i32> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|j| s.spawn(move || run_job(j))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or(exit::FAILURE)).collect()
    });
    if codes.contains(&exit::FAILURE) {
        exit::FAILURE
    } else if codes.contains(&exit::BLOWUP_SUSPECTED) {
        exit::BLOWUP_SUSPECTED
    } else {
        exit::OK
    }
}

fn run_job(job: &Job) -> i32 {
    let name = job.config_path.display();
    if let Err(e) = std::fs::create_dir_all(&job.dir) {
        eprintln!("error: {name}: {}: {e}", job.dir.display());
        return exit::FAILURE;
    }
    let mut writer = if job.diagnostics {
        match DiagnosticsWriter::create(&job.dir) {
            Ok(w) => Some(w),
            Err(e) => {
                eprintln!("error: {name}: {e}");
                return exit::FAILURE;
            }
        }
    } else {
        None
    };
    let mut io_error: Option<CliError> = None;
    let observer = |rec: &_, state: &hotspot_core::SimState| {
        if io_error.is_some() {
            return;
        }
        let mut res = Ok(());
        if let Some(w) = writer.as_mut() {
            res = w.row(rec);
        }
        if res.is_ok() && job.snapshots {
            res = write_snapshot(&job.dir, "A", state.t, &state.a)
                .and_then(|_| write_snapshot(&job.dir, "N", state.t, &state.n));
        }
        if let Err(e) = res {
            io_error = Some(e);
        }
    };
    let traj = match run_observed(&job.sim, observer) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            return exit::FAILURE;
        }
    };
    let outcome = match io_error {
        Some(e) => Outcome::Failed { t: traj.outcome.t(), reason: e.to_string() },
        None => traj.outcome.clone(),
    };
    let file = OutcomeFile {
        outcome: &outcome,
        model: job.sim.model.name(),
        stats: &traj.stats,
        records: traj.records.len(),
    };
    if let Err(e) = write_outcome(&job.dir, &file) {
        eprintln!("error: {name}: {e}");
        return exit::FAILURE;
    }
    match &outcome {
        Outcome::Completed { t } => {
            say!("{name}: completed at t = {t} ({} steps)", traj.stats.steps);
            exit::OK
        }
        Outcome::BlowupSuspected { t } => {
            say!("{name}: step size collapsed at t = {t}; blow-up suspected (numerical evidence only)");
            exit::BLOWUP_SUSPECTED
        }
        Outcome::Failed { t, reason } => {
            say!("{name}: failed at t = {t}: {reason}");
            exit::FAILURE
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CheckArgs {
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub psi: f64,
    #[arg(long)]
    pub chi: f64,
    #[arg(long)]
    pub atilde: f64,
    #[arg(long)]
    pub amin: f64,
    #[arg(long)]
    pub amax: f64,
    /// max{‖N₀‖₁, |Ω|}
    #[arg(long)]
    pub n1max: f64,
    /// Side length of the square domain.
    #[arg(long = "L", default_value_t = 1.0)]
    pub length: f64,
    /// Poincaré–Sobolev constant; give together with --K to override the square value.
    #[arg(long, requires = "k")]
    pub mu: Option<f64>,
    #[arg(long = "K", id = "k", requires = "mu")]
    pub k: Option<f64>,
}

pub fn check(a: &CheckArgs) -> Result<i32, CliError> {
    if !(a.amin <= a.amax) {
        return Err(CliError::Usage(format!("--amin {} exceeds --amax {}", a.amin, a.amax)));
    }
    // ω does not enter the condition
    let params = ModelParams::new(a.eta, a.psi, 1.0, a.atilde, a.chi)?;
    let bounds = DerivedBounds::new(a.amin, a.amax, a.n1max)?;
    let domain = GridSpec::new(a.length, hotspot_core::grid::MIN_CELLS)?;
    let report = check_global_condition(&params, &bounds, &domain, a.mu.zip(a.k))?;
    say!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.any_route_holds() { exit::OK } else { exit::NOT_SATISFIED })
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TableArgs {
    #[arg(long)]
    pub psi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub area: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eta_list: Vec<f64>,
}

pub fn table(a: &TableArgs) -> Result<i32, CliError> {
    let mut rows = Vec::with_capacity(a.eta_list.len());
    let mut gamma = f64::NAN;
    for &eta in &a.eta_list {
        let (g, am) = critical_constants(eta, a.psi, a.area)?;
        gamma = g;
        rows.push((eta, am));
    }
    say!("# gamma = {gamma:.6}");
    say!("eta,atilde_minus");
    for (eta, am) in rows {
        say!("{eta},{am:.6}");
    }
    Ok(exit::OK)
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    /// Sample i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_mode: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub samples: u64,
    pub skipped: u64,
    pub worst_ratio_l1: f64,
    pub bound_ratio_l1: f64,
    pub worst_ratio_k: f64,
    pub bound_ratio_k: f64,
    pub worst_fourier_gap: f64,
    pub min_sobolev_slack: f64,
    pub verdict: String,
}

const PROBE_TOL: f64 = 1e-10;

pub fn verify(a: &VerifyArgs) -> Result<i32, CliError> {
    if a.n < 32 {
        return Err(CliError::Usage(format!("--n must be at least 32, got {}", a.n)));
    }
    let grid = GridSpec::new(1.0, a.n)?;
    let mut r = VerifyReport {
        samples: a.samples,
        skipped: 0,
        worst_ratio_l1: 0.0,
        bound_ratio_l1: 1.5f64.sqrt(),
        worst_ratio_k: 0.0,
        bound_ratio_k: 12.0,
        worst_fourier_gap: 0.0,
        min_sobolev_slack: f64::INFINITY,
        verdict: String::new(),
    };
    for i in 0..a.samples {
        let s = sample_cosine_field(a.seed.wrapping_add(i), a.max_mode, a.amplitude, grid)?;
        let p = match poincare_probe(&s.field) {
            Ok(p) => p,
            Err(hotspot_core::Error::ConstantField) => {
                eprintln!("sample {i}: constant field skipped");
                r.skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let k = interpolation_probe(&s.field, Some(&s.coefficients))?;
        let shifted = s.field.map(|v| v - s.field.min() + 1.0);
        r.worst_ratio_l1 = r.worst_ratio_l1.max(p.ratio_l1);
        r.worst_ratio_k = r.worst_ratio_k.max(k.ratio_k);
        r.worst_fourier_gap = r.worst_fourier_gap.max(k.fourier_gap.unwrap_or(0.0));
        r.min_sobolev_slack = r.min_sobolev_slack.min(sobolev_slack(&shifted)?);
    }
    let ok = r.worst_ratio_l1 <= r.bound_ratio_l1 + PROBE_TOL
        && r.worst_ratio_k <= r.bound_ratio_k + PROBE_TOL
        && r.worst_fourier_gap <= PROBE_TOL
        && (r.min_sobolev_slack >= -PROBE_TOL || r.min_sobolev_slack.is_infinite());
    if r.min_sobolev_slack.is_infinite() {
        r.min_sobolev_slack = 0.0;
    }
    r.verdict = if ok { "no counterexample found".into() } else { "bound exceeded on a sample".into() };
    say!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    Ok(if ok { exit::OK } else { exit::NOT_SATISFIED })
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SteadyArgs {
    #[arg(long)]
    pub psi: f64,
    #[arg(long)]
    pub atilde: f64,
}

pub fn steady(a: &SteadyArgs) -> Result<i32, CliError> {
    // η, ω and χ do not affect the homogeneous state
    let params = ModelParams::new(1.0, a.psi, 1.0, a.atilde, 1.0)?;
    let s = steady_state(&params)?;
    say!("A* = {}", s.a_star);
    say!("N* = {}", s.n_star);
    say!("residual = {:e}", s.residual);
    Ok(exit::OK)
}
