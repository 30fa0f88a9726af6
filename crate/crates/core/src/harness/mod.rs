//! Verification harness: seeded field generators, scenario experiments
//! that check the quantitative properties the analysis predicts, and
//! inequality probes that record empirical constants.
//!
//! Experiments return an [`ExperimentReport`] — a flat list of named
//! assertions with measured values and thresholds — and write `key=value`
//! report lines plus CSV artifacts under a caller-supplied directory.
//! Probes return raw [`ProbeSample`] ratios and never assert; boundedness
//! and shell-to-shell stability of the ratios is the caller's check.
//! All randomness flows through explicit seeds, so repeated runs produce
//! byte-identical reports and artifacts.

pub mod experiments;
pub mod fields;
pub mod probes;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CoreError, Result};
use crate::multipliers::{MultiplierSuite, SymbolExpr};
use crate::solver::{DtSpec, RunConfig};
use crate::spectral::GridSpec;

/// One named check: a measured value against a threshold, with the
/// comparison outcome. `pass` additionally requires the measurement to be
/// finite, so NaNs and overflows can never slip through as successes.
#[derive(Debug, Clone, PartialEq)]
pub struct AssertionRecord {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of one experiment: a digest of the configuration that produced
/// it, the list of assertion records, and the artifact files written.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_digest: String,
    pub assertions: Vec<AssertionRecord>,
    pub artifacts: Vec<PathBuf>,
}

impl ExperimentReport {
    /// Starts an empty report; the digest is an FNV-1a hash of the
    /// canonical configuration text, so reruns with identical parameters
    /// produce identical report headers.
    pub fn new(experiment: impl Into<String>, config_text: &str) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config_digest: format!("{:016x}", fnv1a64(config_text.as_bytes())),
            assertions: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// Records `measured <= threshold` (finite measurements only) and
    /// returns the outcome.
    pub fn check_le(&mut self, name: impl Into<String>, measured: f64, threshold: f64) -> bool {
        let pass = measured.is_finite() && measured <= threshold;
        self.assertions.push(AssertionRecord {
            name: name.into(),
            measured,
            threshold,
            pass,
        });
        pass
    }

    /// Records a measurement without any pass/fail judgement (rendered
    /// with an infinite threshold).
    pub fn note(&mut self, name: impl Into<String>, measured: f64) {
        self.assertions.push(AssertionRecord {
            name: name.into(),
            measured,
            threshold: f64::INFINITY,
            pass: true,
        });
    }

    /// True when every recorded assertion passed.
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// Absorbs a sub-report: assertion names gain a `prefix.` namespace,
    /// artifacts are appended, and the digest is rehashed over both.
    pub fn merge(&mut self, prefix: &str, other: ExperimentReport) {
        for mut a in other.assertions {
            a.name = format!("{prefix}.{}", a.name);
            self.assertions.push(a);
        }
        self.artifacts.extend(other.artifacts);
        let combined = format!("{}:{}", self.config_digest, other.config_digest);
        self.config_digest = format!("{:016x}", fnv1a64(combined.as_bytes()));
    }

    /// The report as flat `key=value` lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment={}\n", self.experiment));
        out.push_str(&format!("digest={}\n", self.config_digest));
        for a in &self.assertions {
            out.push_str(&format!("assert.{}.measured={}\n", a.name, a.measured));
            out.push_str(&format!("assert.{}.threshold={}\n", a.name, a.threshold));
            out.push_str(&format!("assert.{}.pass={}\n", a.name, a.pass));
        }
        for p in &self.artifacts {
            out.push_str(&format!("artifact={}\n", p.display()));
        }
        out.push_str(&format!("passed={}\n", self.passed()));
        out
    }

    /// Writes the rendered report atomically.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.render())
    }
}

/// One probe measurement: the two sides of an estimate on dyadic shell `j`
/// (or `j = -1` for probes without shell localization) and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub j: i32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub seed: u64,
}

impl ProbeSample {
    /// Builds a sample; a vanishing right side with a nonvanishing left
    /// side yields an infinite ratio so it can never pass a finiteness
    /// check silently.
    pub fn new(j: i32, lhs: f64, rhs: f64, seed: u64) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ProbeSample {
            j,
            lhs,
            rhs,
            ratio,
            seed,
        }
    }
}

/// Writes probe samples as a CSV artifact (columns `j,lhs,rhs,ratio,seed`).
pub fn write_probe_csv(path: &Path, samples: &[ProbeSample]) -> Result<()> {
    let rows: Vec<String> = samples
        .iter()
        .map(|s| format!("{},{},{},{},{}", s.j, s.lhs, s.rhs, s.ratio, s.seed))
        .collect();
    write_table(path, "j,lhs,rhs,ratio,seed", &rows)
}

/// Atomic text write: temp file in the target directory, then rename.
pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| CoreError::Io(e.error))?;
    Ok(())
}

/// Atomic CSV write with a fixed header line.
pub(crate) fn write_table(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_text(path, &text)
}

/// FNV-1a 64-bit hash; used for config digests and per-name seed salting.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// The named experiments the registry can run.
pub fn experiment_names() -> &'static [&'static str] {
    &[
        "energy",
        "maxprin",
        "convexity",
        "smoothing",
        "stability",
        "kato",
        "commutator",
        "product",
        "euler",
        "viscosity",
        "linear",
    ]
}

/// Runs one named experiment with its canonical configuration, writes its
/// report and artifacts under `out_dir`, and returns the report. The
/// effective seed is salted with the experiment name so independent
/// experiments never share a random stream.
pub fn run_named(name: &str, out_dir: &Path, seed: u64) -> Result<ExperimentReport> {
    std::fs::create_dir_all(out_dir)?;
    let salt = seed ^ fnv1a64(name.as_bytes());
    let report = match name {
        "energy" => registry_energy(out_dir, salt)?,
        "maxprin" => registry_maxprin(out_dir, salt)?,
        "convexity" => registry_convexity(out_dir, salt)?,
        "smoothing" => registry_smoothing(out_dir, salt)?,
        "stability" => registry_stability(out_dir, salt)?,
        "kato" => registry_kato(out_dir, salt)?,
        "commutator" => registry_commutator(out_dir, salt)?,
        "product" => registry_product(out_dir, salt)?,
        "euler" => registry_euler(out_dir, salt)?,
        "viscosity" => registry_viscosity(out_dir, salt)?,
        "linear" => experiments::exp_linear_oracle(salt, out_dir)?,
        other => {
            return Err(CoreError::FileFormat(format!(
                "unknown experiment '{other}' (available: {})",
                experiment_names().join(", ")
            )))
        }
    };
    report.write(&out_dir.join(format!("report_{name}.txt")))?;
    Ok(report)
}

/// Log-family suite `m = p^{mu'}` defaults used across the registry:
/// `mu = 1`, trivial constitutive law, trivial weight.
fn std_suite(beta: f64) -> Result<MultiplierSuite> {
    MultiplierSuite::log_family(1.0, 0.0, 0.5, beta)
}

/// A suite with a genuinely nontrivial constitutive law (`p` a fractional
/// log power) for the inequality probes.
fn probe_suite() -> Result<MultiplierSuite> {
    MultiplierSuite::log_family(1.0, 0.3, 0.5, 1.0)
}

/// The borderline `beta = 0` configuration: log dissipation with an
/// iterated-log constitutive amplification of order `gamma_p`.
fn borderline_suite(gamma_p: f64) -> Result<MultiplierSuite> {
    MultiplierSuite::new(
        SymbolExpr::LogPower(1.0),
        SymbolExpr::IterLogPower(gamma_p),
        SymbolExpr::Constant(1.0),
        SymbolExpr::Constant(1.0),
        SymbolExpr::Constant(1.0),
        SymbolExpr::LogPower(1.0),
        0.5,
        0.0,
    )
}

fn registry_energy(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("energy", &format!("registry:energy seed={seed}"));
    let grid = GridSpec::new(128)?;

    let mut viscous = RunConfig::new(grid, std_suite(1.0)?, 1.0);
    viscous.dt = DtSpec::Fixed(5e-4);
    report.merge(
        "viscous",
        experiments::exp_energy_balance(&viscous, 0.5, seed, "viscous", out)?,
    );

    let mut conservative = RunConfig::new(grid, MultiplierSuite::inviscid(1.0)?, 1.0);
    conservative.dt = DtSpec::Fixed(1e-3);
    report.merge(
        "inviscid",
        experiments::exp_energy_balance(&conservative, 0.1, seed ^ 1, "inviscid", out)?,
    );
    Ok(report)
}

fn registry_maxprin(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("maxprin", &format!("registry:maxprin seed={seed}"));
    let grid = GridSpec::new(128)?;
    for (tag, gamma_p) in [("gamma0", 0.0), ("gamma1", 1.0)] {
        let cfg = RunConfig::new(grid, borderline_suite(gamma_p)?, 1.0);
        report.merge(tag, experiments::exp_max_principle(&cfg, tag, out)?);
    }
    Ok(report)
}

fn registry_convexity(_out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("convexity", &format!("registry:convexity seed={seed}"));
    let grid = GridSpec::new(128)?;
    for trial in 0..20u64 {
        let f = fields::random_spectrum(grid, seed.wrapping_add(trial), 40);
        for phi in [experiments::PhiChoice::Square, experiments::PhiChoice::FourthPower] {
            let tag = format!("t{trial:02}.{}", phi.name());
            report.merge(&tag, experiments::probe_convexity(&f, phi)?);
        }
    }
    Ok(report)
}

fn registry_smoothing(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("smoothing", &format!("registry:smoothing seed={seed}"));
    let grid = GridSpec::new(128)?;
    for (tag, lambda) in [("lam0.05", 0.05), ("lam0.025", 0.025), ("lam0", 0.0)] {
        let mut cfg = RunConfig::new(grid, std_suite(1.0)?, 0.5);
        cfg.dt = DtSpec::Fixed(2e-3);
        cfg.lambda_track = lambda;
        cfg.cadence = 25;
        report.merge(tag, experiments::exp_smoothing(&cfg, seed, tag, out)?);
    }
    let mut linear = RunConfig::new(GridSpec::new(64)?, MultiplierSuite::linear_oracle()?, 0.5);
    linear.dt = DtSpec::Fixed(2e-3);
    linear.lambda_track = 0.05;
    linear.cadence = 25;
    report.merge(
        "linear",
        experiments::exp_smoothing_linear(&linear, seed ^ 3, out)?,
    );
    Ok(report)
}

fn registry_stability(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("stability", &format!("registry:stability seed={seed}"));
    for (tag, beta) in [("beta0", 0.0), ("beta1", 1.0), ("beta1.5", 1.5)] {
        let mut cfg = RunConfig::new(GridSpec::new(64)?, std_suite(beta)?, 0.5);
        cfg.dt = DtSpec::Fixed(2e-3);
        let sub = experiments::exp_stability(&cfg, &[1e-2, 1e-3, 1e-4], seed, tag, out)?;
        report.merge(tag, sub);
    }
    Ok(report)
}

fn registry_kato(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("kato", &format!("registry:kato seed={seed}"));
    for (tag, beta) in [("beta1", 1.0), ("beta1.5", 1.5)] {
        let mut cfg = RunConfig::new(GridSpec::new(64)?, std_suite(beta)?, 0.25);
        cfg.dt = DtSpec::Fixed(2e-3);
        report.merge(
            tag,
            experiments::exp_kato_split(&cfg, 1e-2, seed, tag, out)?,
        );
    }
    Ok(report)
}

fn registry_commutator(out: &Path, seed: u64) -> Result<ExperimentReport> {
    experiments::exp_commutator_probes(GridSpec::new(128)?, &probe_suite()?, seed, out)
}

fn registry_product(out: &Path, seed: u64) -> Result<ExperimentReport> {
    experiments::exp_product_probes(GridSpec::new(128)?, &probe_suite()?, seed, out)
}

fn registry_euler(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("euler", &format!("registry:euler seed={seed}"));
    let grid = GridSpec::new(128)?;
    for (tag, gamma_p) in [("gamma1", 1.0), ("gamma0", 0.0)] {
        let cfg = RunConfig::new(grid, borderline_suite(gamma_p)?, 5.0);
        report.merge(tag, experiments::exp_global_euler(&cfg, seed, tag, out)?);
    }
    Ok(report)
}

fn registry_viscosity(out: &Path, seed: u64) -> Result<ExperimentReport> {
    let mut cfg = RunConfig::new(GridSpec::new(64)?, std_suite(1.0)?, 0.5);
    cfg.dt = DtSpec::Fixed(1e-3);
    experiments::exp_viscosity(&cfg, &[1e-2, 1e-3, 1e-4], seed, out)
}
