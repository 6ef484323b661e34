//! Batch runner: one JSON experiment in, CSV/JSON artifacts and a manifest out.

pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use gbv_core::expansion::identities::verify_identity;
use gbv_core::expansion::{Identity, IdentityReport};
use gbv_core::phase_sets::{critical_set_ap, exceptional_s, PhaseSet, SPointValue, SVariant};
use gbv_core::pruefer::{prufer_trajectory, write_trajectory_csv, Coefficients, JacobiCoeffs, VerblunskyCoeffs};
use gbv_core::sequence::CoeffSequence;
use gbv_core::spectral::{
    convergence_diagnostic, density_probe, interval_mass, resonance_scan, uniform_grid, write_density_csv,
    write_resonance_csv,
};
use gbv_core::Model;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{ExperimentConfig, Task};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Compute(#[from] gbv_core::Error),
    #[error("verification: {0}")]
    Verification(String),
    #[error("{0}")]
    Other(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Io(_) => 3,
            RunError::Compute(_) | RunError::Verification(_) => 4,
            RunError::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Schema(_) => "schema",
            RunError::Io(_) => "io",
            RunError::Compute(_) => "computation",
            RunError::Verification(_) => "verification",
            RunError::Other(_) => "other",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        json!({"error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string()}).to_string()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub task: &'static str,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
}

/// Loads, validates and runs one experiment; returns the manifest on success.
pub fn run(task: Task, opts: &RunOptions) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let bytes = fs::read(&opts.config).map_err(|e| io_err(&opts.config, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| RunError::Schema("config is not UTF-8".into()))?;
    let cfg = ExperimentConfig::parse(&text)?;
    cfg.validate(task)?;
    let seed = opts.seed.or(cfg.seed);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| RunError::Other(e.to_string()))?;
    let threads = pool.current_num_threads();

    fs::create_dir_all(&opts.out).map_err(|e| io_err(&opts.out, e))?;
    let mut out = Artifacts { dir: opts.out.clone(), written: Vec::new() };
    let result = pool.install(|| dispatch(task, &cfg, seed, &mut out));

    let manifest = Manifest {
        tool: "gbv",
        version: env!("CARGO_PKG_VERSION"),
        task: task.name(),
        config_sha256: hex::encode(Sha256::digest(&bytes)),
        seed,
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: out.written.clone(),
    };
    out.json("manifest.json", &manifest)?;
    result.map(|_| manifest)
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn create(&mut self, name: &str) -> Result<(BufWriter<File>, PathBuf), RunError> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| io_err(&path, e))?;
        if name != "manifest.json" {
            self.written.push(name.to_string());
        }
        Ok((BufWriter::new(f), path))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let (mut w, path) = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| RunError::Io(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))
    }

    fn csv<F>(&mut self, name: &str, write: F) -> Result<(), RunError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let (mut w, path) = self.create(name)?;
        write(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))
    }
}

fn dispatch(task: Task, cfg: &ExperimentConfig, seed: Option<u64>, out: &mut Artifacts) -> Result<(), RunError> {
    match task {
        Task::PhaseSets => phase_sets(cfg, out),
        Task::PruferRun => prufer_run(cfg, out),
        Task::Density => density(cfg, out),
        Task::Convergence => convergence(cfg, out),
        Task::Resonance => resonance(cfg, out),
        Task::VerifyIdentities => verify(cfg, seed, out),
    }
}

fn coefficients(cfg: &ExperimentConfig) -> Result<Coefficients, RunError> {
    let (seq, _) = cfg.coefficients.build()?;
    Ok(match cfg.model {
        Model::Opuc => Coefficients::Verblunsky(VerblunskyCoeffs::new(seq)?),
        Model::Oprl => {
            let a = match &cfg.a_minus_one {
                Some(spec) => spec.build()?.0,
                None => CoeffSequence::zero(0),
            };
            Coefficients::Jacobi(JacobiCoeffs::from_sequences(&a, &seq))
        }
    })
}

fn phase_set(cfg: &ExperimentConfig) -> Result<PhaseSet, RunError> {
    let phases = match &cfg.phases {
        Some(p) => p.clone(),
        None => {
            let mut p = cfg.coefficients.phases()?;
            if let Some(a) = &cfg.a_minus_one {
                p.extend(a.phases()?);
            }
            p
        }
    };
    Ok(PhaseSet::from_phases(phases))
}

fn variant(cfg: &ExperimentConfig) -> SVariant {
    cfg.variant.unwrap_or(match cfg.model {
        Model::Opuc => SVariant::Thm11,
        Model::Oprl if cfg.a_minus_one.is_some() => SVariant::Thm12Case2,
        Model::Oprl => SVariant::Thm12Case1,
    })
}

/// Phases `eta` of the exceptional set.
fn exceptional_etas(cfg: &ExperimentConfig, interior_only: bool) -> Result<Vec<f64>, RunError> {
    let p = cfg.p.expect("validated");
    let s = exceptional_s(&phase_set(cfg)?, p, cfg.model, variant(cfg))?;
    Ok(if interior_only { s.interior().map(|p| p.eta).collect() } else { s.etas() })
}

fn phase_sets(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let p = cfg.p.expect("validated");
    let a = phase_set(cfg)?;
    let ap = critical_set_ap(&a, p, cfg.model)?;
    let v = variant(cfg);
    let s = exceptional_s(&a, p, cfg.model, v)?;
    let points: Vec<_> = s
        .points
        .iter()
        .map(|pt| {
            let point = match pt.point {
                SPointValue::Real(x) => json!(x),
                SPointValue::Circle(z) => json!(z),
            };
            json!({"point": point, "eta": pt.eta, "boundary": pt.boundary})
        })
        .collect();
    let doc = json!({
        "model": cfg.model,
        "p": p,
        "variant": v,
        "A": a.sorted_values(),
        "A_p": ap.sorted_values(),
        "S": points,
    });
    out.json("phase_sets.json", &doc)
}

fn prufer_run(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let params = cfg.prufer.as_ref().expect("validated");
    let coeffs = coefficients(cfg)?.tabulated(params.n_max + 2);
    let mut index = Vec::new();
    for (k, &eta) in params.etas.iter().enumerate() {
        let states = prufer_trajectory(&coeffs, eta, params.n_max)?;
        let name = format!("trajectory_{k:03}.csv");
        out.csv(&name, |w| write_trajectory_csv(&states, params.stride, w))?;
        let last = states.last().expect("n_max + 1 states");
        index.push(json!({"eta": eta, "file": name, "log_r": last.log_r, "theta": last.theta}));
    }
    out.json("trajectories.json", &json!({"model": cfg.model, "n_max": params.n_max, "runs": index}))
}

fn density(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let d = cfg.density.as_ref().expect("validated");
    let coeffs = coefficients(cfg)?.tabulated(d.n + 2);
    let probe = density_probe(&coeffs, d.n, &uniform_grid(d.lo, d.hi, d.points))?;
    out.csv("density.csv", |w| write_density_csv(&probe, w))?;
    if !d.masses.is_empty() {
        let masses = d
            .masses
            .iter()
            .map(|&(lo, hi)| Ok(json!({"lo": lo, "hi": hi, "mass": interval_mass(&probe, lo, hi)?})))
            .collect::<Result<Vec<_>, RunError>>()?;
        out.json("masses.json", &json!({"model": cfg.model, "n": d.n, "masses": masses}))?;
    }
    Ok(())
}

fn convergence(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let c = cfg.convergence.as_ref().expect("validated");
    let avoid = match &c.avoid {
        Some(a) => a.clone(),
        None => exceptional_etas(cfg, false)?,
    };
    let n_last = c.checkpoints.iter().copied().max().unwrap_or(0);
    let coeffs = coefficients(cfg)?.tabulated(n_last + 2);
    let reports = c
        .intervals
        .iter()
        .map(|&iv| convergence_diagnostic(&coeffs, iv, c.grid_points, &c.checkpoints, &avoid, c.threshold))
        .collect::<Result<Vec<_>, _>>()?;
    out.json("convergence.json", &json!({"model": cfg.model, "avoid": avoid, "reports": reports}))
}

fn resonance(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let r = cfg.resonance.as_ref().expect("validated");
    let candidates = match &r.candidates {
        Some(c) => c.clone(),
        None => exceptional_etas(cfg, true)?,
    };
    let coeffs = coefficients(cfg)?.tabulated(r.n + 2);
    let report = resonance_scan(&coeffs, &candidates, &r.offsets, r.n)?;
    out.csv("resonance.csv", |w| write_resonance_csv(&report, w))?;
    out.json("resonance.json", &report)
}

/// Identity report without the per-instance listing.
#[derive(Serialize)]
struct IdentitySummary<'a> {
    identity: &'a str,
    exact: bool,
    ranges: &'a str,
    checked: usize,
    max_residual: f64,
    tolerance: f64,
    passed: bool,
    failures: &'a [gbv_core::expansion::Instance],
    notes: &'a [String],
}

impl<'a> From<&'a IdentityReport> for IdentitySummary<'a> {
    fn from(r: &'a IdentityReport) -> Self {
        Self {
            identity: r.identity,
            exact: r.exact,
            ranges: &r.ranges,
            checked: r.checked,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            passed: r.passed,
            failures: &r.failures,
            notes: &r.notes,
        }
    }
}

fn verify(cfg: &ExperimentConfig, seed: Option<u64>, out: &mut Artifacts) -> Result<(), RunError> {
    let params = cfg.identities.clone().unwrap_or_default();
    let mut ranges = params.ranges;
    if let Some(s) = seed {
        ranges.seed = s;
    }
    let which = params.only.unwrap_or_else(|| Identity::ALL.to_vec());
    let reports: Vec<IdentityReport> = which.iter().map(|&w| verify_identity(w, &ranges)).collect();
    let summaries: Vec<IdentitySummary> = reports.iter().map(IdentitySummary::from).collect();
    let all_passed = reports.iter().all(|r| r.passed);
    out.json("identities.json", &json!({"seed": ranges.seed, "all_passed": all_passed, "reports": summaries}))?;
    if all_passed {
        Ok(())
    } else {
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.identity).collect();
        Err(RunError::Verification(format!("identities failed: {}", failed.join(", "))))
    }
}
