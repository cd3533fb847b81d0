//! Versioned JSON experiment configuration.
//!
//! Every experiment is described by one JSON document with a `schema` tag, a
//! mandatory `seed`, and a tagged `experiment` object. Validation rules that
//! serde cannot express (non-empty grids, shot budgets, numeric ranges) live
//! in [`ExperimentConfig::validate`]; anything it rejects exits with code 2.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cattrans_core::code::{CodeFamily, MemoryBasis};
use cattrans_core::dynamics::dephasing::Spectrum;
use cattrans_core::dynamics::NoiseModel;
use cattrans_core::gates::{CrxVariant, GateKind, PulseFamily};
use cattrans_core::pulses::EnvelopeSpec;

use crate::error::{CliError, Result};

/// Schema tag accepted by this build.
pub const CONFIG_SCHEMA: &str = "cattrans-config/1";

fn default_chi() -> f64 {
    1.0
}
fn default_one() -> usize {
    1
}
fn default_one_f() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_n_steps() -> usize {
    256
}
fn default_t_sel_frac() -> f64 {
    0.2
}
fn default_variant() -> CrxVariant {
    CrxVariant::Full9
}
fn default_max_evals() -> usize {
    80
}
fn default_family() -> CodeFamily {
    CodeFamily::CssRotated
}
fn default_basis() -> MemoryBasis {
    MemoryBasis::X
}
fn default_readout() -> f64 {
    0.01
}

/// Top-level experiment description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must equal [`CONFIG_SCHEMA`].
    pub schema: String,
    /// Master seed; every stochastic artifact derives from it.
    pub seed: u64,
    /// Default output directory (the `-o` flag overrides it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

/// The experiment kinds the runner knows how to execute.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    GateSim(GateSimConfig),
    DephasingStudy(DephasingConfig),
    DragSweep(DragSweepConfig),
    StabilizationStudy(StabilizationConfig),
    QecSample(QecSampleConfig),
    Threshold(ThresholdConfig),
    AchievableMap(AchievableConfig),
    Overhead(OverheadConfig),
}

impl Experiment {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Experiment::GateSim(_) => "gate-sim",
            Experiment::DephasingStudy(_) => "dephasing-study",
            Experiment::DragSweep(_) => "drag-sweep",
            Experiment::StabilizationStudy(_) => "stabilization-study",
            Experiment::QecSample(_) => "qec-sample",
            Experiment::Threshold(_) => "threshold",
            Experiment::AchievableMap(_) => "achievable-map",
            Experiment::Overhead(_) => "overhead",
        }
    }
}

/// Sweep one gate kind over a (quality, cat-size) grid and export the
/// extracted Pauli channels plus scalar metrics.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSimConfig {
    pub gate: GateKind,
    pub model: NoiseModel,
    pub q_grid: Vec<f64>,
    pub alpha_sq_grid: Vec<f64>,
    #[serde(default = "default_chi")]
    pub chi: f64,
    /// Explicit selective-pulse envelope (CRX kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeSpec>,
    /// Heuristic pulse family (CRX kinds; ignored when `envelope` is set).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_family: Option<PulseFamily>,
    /// Selective-pulse duration as a fraction of the gate window `π/χ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sel_frac: Option<f64>,
    /// Engineered-dissipation strength (idle kind only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa2_over_chi: Option<f64>,
    /// Idle duration in units of `1/χ` (idle kind only; default `π`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_chi: Option<f64>,
}

/// One (spectrum, echo) combination of the dephasing study.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingCase {
    pub spectrum: Spectrum,
    pub echo: bool,
}

/// Compare closed-form cat dephasing exponents against trajectory sampling.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingConfig {
    pub alpha_sq: f64,
    pub t_grid: Vec<f64>,
    pub cases: Vec<DephasingCase>,
    /// Trajectories per point (the shot budget of this experiment).
    pub n_traj: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_one")]
    pub n_records: usize,
}

/// Coherent-error sweep of shaped selective pulses versus cat size.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DragSweepConfig {
    pub families: Vec<PulseFamily>,
    pub alpha_sq_grid: Vec<f64>,
    #[serde(default = "default_chi")]
    pub chi: f64,
    #[serde(default = "default_t_sel_frac")]
    pub t_sel_frac: f64,
    #[serde(default = "default_variant")]
    pub variant: CrxVariant,
    /// Run the deterministic simplex optimizer per point (otherwise use the
    /// heuristic spectral-null placement).
    #[serde(default = "default_true")]
    pub optimize: bool,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    /// Also sweep the unshaped base pulse as a baseline.
    #[serde(default = "default_true")]
    pub include_plain_gaussian: bool,
}

/// Pulsed-dissipation study: bit-flip scaling exponent versus duty cycle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizationConfig {
    pub alpha_sq: f64,
    #[serde(default = "default_one_f")]
    pub kappa1: f64,
    /// Pulsing round period in units of `1/κ₁`.
    pub period: f64,
    /// Rounds simulated per point (≥ 2).
    pub n_rounds: usize,
    /// Dissipation strengths `κ₂|α|²/κ₁` (default {5, 25, 125}).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_ratios: Option<Vec<f64>>,
    /// Duty cycles `T_on/T` (default {0.1, 0.3, 1.0}).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duties: Option<Vec<f64>>,
}

/// Circuit noise selector for memory experiments.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Phenomenological Z-biased channels.
    Simplified {
        p_z: f64,
        eta: f64,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
    /// Uniform depolarizing baseline.
    Depolarizing {
        p: f64,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
    /// Channels loaded from previously exported channel JSON files
    /// (paths resolve relative to the config file).
    FullFiles {
        cx: PathBuf,
        crx: PathBuf,
        idle: PathBuf,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
    /// Channels computed on the fly from continuous-time gate simulations.
    FullGates {
        model: NoiseModel,
        q: f64,
        alpha_sq: f64,
        #[serde(default = "default_chi")]
        chi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pulse_family: Option<PulseFamily>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_sel_frac: Option<f64>,
        /// Engineered-dissipation strength during idles.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa2_over_chi: Option<f64>,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
}

/// One memory-experiment sample: a single code, noise point, and shot count.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QecSampleConfig {
    #[serde(default = "default_family")]
    pub family: CodeFamily,
    pub d_x: usize,
    pub d_z: usize,
    /// Syndrome-measurement rounds (default `d_z`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default = "default_basis")]
    pub basis: MemoryBasis,
    pub noise: NoiseSpec,
    pub shots: u64,
    /// Also persist the sampled detector/observable bits.
    #[serde(default)]
    pub save_shots: bool,
}

/// The noise axis a threshold scan walks along.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum NoiseAxis {
    /// Simplified channels at fixed bias, sweeping the phase-flip rate.
    SimplifiedPz {
        p_z_grid: Vec<f64>,
        eta: f64,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
    /// Depolarizing channels, sweeping the error rate.
    DepolarizingP {
        p_grid: Vec<f64>,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
    /// Full gate channels, sweeping the hardware quality parameter.
    GateQuality {
        q_grid: Vec<f64>,
        model: NoiseModel,
        alpha_sq: f64,
        #[serde(default = "default_chi")]
        chi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pulse_family: Option<PulseFamily>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_sel_frac: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa2_over_chi: Option<f64>,
        #[serde(default = "default_readout")]
        readout_reset_error: f64,
    },
}

/// Logical error rate versus noise for a ladder of code distances.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "default_family")]
    pub family: CodeFamily,
    #[serde(default = "default_basis")]
    pub basis: MemoryBasis,
    pub d_x: usize,
    pub d_z_grid: Vec<usize>,
    /// Rounds per point (default: the point's `d_z`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    pub axis: NoiseAxis,
    pub shots: u64,
}

/// Map hardware quality and cat size to achievable phase-flip rate and bias.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AchievableConfig {
    pub model: NoiseModel,
    pub q_grid: Vec<f64>,
    pub alpha_sq_grid: Vec<f64>,
    #[serde(default = "default_chi")]
    pub chi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_family: Option<PulseFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sel_frac: Option<f64>,
    /// Also locate the maximum beneficial bias per quality value.
    #[serde(default = "default_true")]
    pub bias_optimum: bool,
}

/// Monte-Carlo grids used to build the logical-error fits.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnbiasedGen {
    /// Square-code distances (≥ 3 distinct values).
    pub d_grid: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub shots: u64,
    #[serde(default = "default_readout")]
    pub readout_reset_error: f64,
}

/// Grids for the phase-flip (logical-Z) fit at one `d_x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasedGen {
    /// Bit-flip distance held fixed while fitting the phase-flip ansatz.
    pub d_x: usize,
    /// Bias at which the phase-flip data is generated.
    pub eta: f64,
    pub d_z_grid: Vec<usize>,
    pub p_z_grid: Vec<f64>,
    pub shots: u64,
    pub x_fit: XFitGen,
    #[serde(default = "default_readout")]
    pub readout_reset_error: f64,
}

/// Grids for the bit-flip (logical-X) power-law fits. Low biases make the
/// logical-X rate measurable; the fit extrapolates in the proxy `p_z/η`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XFitGen {
    pub d_x_grid: Vec<usize>,
    pub eta_grid: Vec<f64>,
    pub p_z_grid: Vec<f64>,
    /// Phase-flip distance (sets rounds) held fixed.
    pub d_z: usize,
    pub shots: u64,
}

/// Where the overhead evaluation gets its fitted ansatzes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FitSource {
    /// Load a fits JSON written by a previous overhead run.
    Files { path: PathBuf },
    /// Sample the simplified model and fit from scratch.
    Generate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unbiased: Option<UnbiasedGen>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        biased: Option<BiasedGen>,
    },
}

/// Qubit-overhead tables from fitted logical-error ansatzes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverheadConfig {
    /// Target total logical error rates.
    pub targets: Vec<f64>,
    /// Unbiased physical error rates to evaluate (may be empty).
    #[serde(default)]
    pub unbiased_p_grid: Vec<f64>,
    /// Biased phase-flip rates to evaluate (may be empty).
    #[serde(default)]
    pub biased_p_z_grid: Vec<f64>,
    /// Biases at which to evaluate the biased grid.
    #[serde(default)]
    pub etas: Vec<f64>,
    pub fits: FitSource,
}

// ---------------------------------------------------------------------------
// Loading and validation
// ---------------------------------------------------------------------------

/// Read a config file, transparently unwrapping a manifest (re-running from
/// a manifest reproduces the original run).
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
    let config_value = match value.get("config") {
        // A manifest embeds the config it ran under.
        Some(inner) if value.get("artifacts").is_some() => inner.clone(),
        _ => value,
    };
    let config: ExperimentConfig = serde_json::from_value(config_value)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn non_empty<T>(grid: &[T], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{name} must be non-empty")));
    }
    Ok(())
}

fn positive(values: &[f64], name: &str) -> Result<()> {
    for &v in values {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::Config(format!("{name} entries must be positive, got {v}")));
        }
    }
    Ok(())
}

fn non_negative(values: &[f64], name: &str) -> Result<()> {
    for &v in values {
        if v < 0.0 || !v.is_finite() {
            return Err(CliError::Config(format!(
                "{name} entries must be non-negative, got {v}"
            )));
        }
    }
    Ok(())
}

fn min_shots(shots: u64, name: &str) -> Result<()> {
    if shots < 100 {
        return Err(CliError::Config(format!("{name} must be at least 100, got {shots}")));
    }
    Ok(())
}

fn check_frac(frac: Option<f64>, name: &str) -> Result<()> {
    if let Some(f) = frac {
        if !(f > 0.0 && f < 1.0) {
            return Err(CliError::Config(format!("{name} must lie in (0, 1), got {f}")));
        }
    }
    Ok(())
}

fn check_noise_spec(noise: &NoiseSpec) -> Result<()> {
    match noise {
        NoiseSpec::Simplified { p_z, eta, readout_reset_error } => {
            positive(&[*p_z], "p_z")?;
            if !(*eta >= 1.0) {
                return Err(CliError::Config(format!("eta must be ≥ 1, got {eta}")));
            }
            non_negative(&[*readout_reset_error], "readout_reset_error")
        }
        NoiseSpec::Depolarizing { p, readout_reset_error } => {
            non_negative(&[*p, *readout_reset_error], "depolarizing parameters")
        }
        NoiseSpec::FullFiles { readout_reset_error, .. } => {
            non_negative(&[*readout_reset_error], "readout_reset_error")
        }
        NoiseSpec::FullGates { q, alpha_sq, chi, t_sel_frac, readout_reset_error, .. } => {
            non_negative(&[*q, *readout_reset_error], "gate noise parameters")?;
            positive(&[*alpha_sq, *chi], "alpha_sq / chi")?;
            check_frac(*t_sel_frac, "t_sel_frac")
        }
    }
}

impl ExperimentConfig {
    /// Enforce everything the schema cannot: grids non-empty, shot budgets
    /// ≥ 100, parameters in range.
    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema {:?} (this build reads {CONFIG_SCHEMA:?})",
                self.schema
            )));
        }
        match &self.experiment {
            Experiment::GateSim(c) => {
                non_empty(&c.q_grid, "q_grid")?;
                non_empty(&c.alpha_sq_grid, "alpha_sq_grid")?;
                non_negative(&c.q_grid, "q_grid")?;
                positive(&c.alpha_sq_grid, "alpha_sq_grid")?;
                positive(&[c.chi], "chi")?;
                check_frac(c.t_sel_frac, "t_sel_frac")?;
                if matches!(c.gate, GateKind::Idle) {
                    if let Some(k2) = c.kappa2_over_chi {
                        non_negative(&[k2], "kappa2_over_chi")?;
                    }
                } else if c.kappa2_over_chi.is_some() || c.duration_chi.is_some() {
                    return Err(CliError::Config(
                        "kappa2_over_chi / duration_chi apply to the idle kind only".into(),
                    ));
                }
                Ok(())
            }
            Experiment::DephasingStudy(c) => {
                non_empty(&c.t_grid, "t_grid")?;
                non_empty(&c.cases, "cases")?;
                positive(&c.t_grid, "t_grid")?;
                positive(&[c.alpha_sq], "alpha_sq")?;
                min_shots(c.n_traj as u64, "n_traj")?;
                if c.n_steps < 8 || c.n_records < 1 {
                    return Err(CliError::Config(
                        "n_steps must be ≥ 8 and n_records ≥ 1".into(),
                    ));
                }
                Ok(())
            }
            Experiment::DragSweep(c) => {
                if c.families.is_empty() && !c.include_plain_gaussian {
                    return Err(CliError::Config(
                        "families must be non-empty unless include_plain_gaussian is set".into(),
                    ));
                }
                non_empty(&c.alpha_sq_grid, "alpha_sq_grid")?;
                positive(&c.alpha_sq_grid, "alpha_sq_grid")?;
                positive(&[c.chi], "chi")?;
                check_frac(Some(c.t_sel_frac), "t_sel_frac")?;
                if c.max_evals == 0 {
                    return Err(CliError::Config("max_evals must be positive".into()));
                }
                Ok(())
            }
            Experiment::StabilizationStudy(c) => {
                positive(&[c.alpha_sq, c.kappa1, c.period], "stabilization parameters")?;
                if c.n_rounds < 2 {
                    return Err(CliError::Config("n_rounds must be ≥ 2".into()));
                }
                if let Some(r) = &c.kappa_ratios {
                    non_empty(r, "kappa_ratios")?;
                    positive(r, "kappa_ratios")?;
                }
                if let Some(d) = &c.duties {
                    non_empty(d, "duties")?;
                    for &duty in d {
                        if !(duty > 0.0 && duty <= 1.0) {
                            return Err(CliError::Config(format!(
                                "duties must lie in (0, 1], got {duty}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            Experiment::QecSample(c) => {
                check_distance(c.d_x, "d_x")?;
                check_distance(c.d_z, "d_z")?;
                if let Some(r) = c.rounds {
                    if r == 0 {
                        return Err(CliError::Config("rounds must be ≥ 1".into()));
                    }
                }
                check_noise_spec(&c.noise)?;
                min_shots(c.shots, "shots")
            }
            Experiment::Threshold(c) => {
                check_distance(c.d_x, "d_x")?;
                non_empty(&c.d_z_grid, "d_z_grid")?;
                for &d in &c.d_z_grid {
                    check_distance(d, "d_z_grid entry")?;
                }
                if let Some(r) = c.rounds {
                    if r == 0 {
                        return Err(CliError::Config("rounds must be ≥ 1".into()));
                    }
                }
                match &c.axis {
                    NoiseAxis::SimplifiedPz { p_z_grid, eta, readout_reset_error } => {
                        non_empty(p_z_grid, "p_z_grid")?;
                        positive(p_z_grid, "p_z_grid")?;
                        if !(*eta >= 1.0) {
                            return Err(CliError::Config(format!("eta must be ≥ 1, got {eta}")));
                        }
                        non_negative(&[*readout_reset_error], "readout_reset_error")?;
                    }
                    NoiseAxis::DepolarizingP { p_grid, readout_reset_error } => {
                        non_empty(p_grid, "p_grid")?;
                        positive(p_grid, "p_grid")?;
                        non_negative(&[*readout_reset_error], "readout_reset_error")?;
                    }
                    NoiseAxis::GateQuality {
                        q_grid,
                        alpha_sq,
                        chi,
                        t_sel_frac,
                        readout_reset_error,
                        ..
                    } => {
                        non_empty(q_grid, "q_grid")?;
                        non_negative(q_grid, "q_grid")?;
                        positive(&[*alpha_sq, *chi], "alpha_sq / chi")?;
                        check_frac(*t_sel_frac, "t_sel_frac")?;
                        non_negative(&[*readout_reset_error], "readout_reset_error")?;
                    }
                }
                min_shots(c.shots, "shots")
            }
            Experiment::AchievableMap(c) => {
                non_empty(&c.q_grid, "q_grid")?;
                non_empty(&c.alpha_sq_grid, "alpha_sq_grid")?;
                positive(&c.q_grid, "q_grid")?;
                positive(&c.alpha_sq_grid, "alpha_sq_grid")?;
                positive(&[c.chi], "chi")?;
                check_frac(c.t_sel_frac, "t_sel_frac")
            }
            Experiment::Overhead(c) => {
                non_empty(&c.targets, "targets")?;
                positive(&c.targets, "targets")?;
                for &t in &c.targets {
                    if t >= 1.0 {
                        return Err(CliError::Config(format!(
                            "targets must be below 1, got {t}"
                        )));
                    }
                }
                positive(&c.unbiased_p_grid, "unbiased_p_grid")?;
                positive(&c.biased_p_z_grid, "biased_p_z_grid")?;
                if !c.biased_p_z_grid.is_empty() {
                    non_empty(&c.etas, "etas")?;
                }
                for &eta in &c.etas {
                    if !(eta >= 1.0) {
                        return Err(CliError::Config(format!("etas must be ≥ 1, got {eta}")));
                    }
                }
                if c.unbiased_p_grid.is_empty() && c.biased_p_z_grid.is_empty() {
                    return Err(CliError::Config(
                        "at least one of unbiased_p_grid / biased_p_z_grid must be non-empty"
                            .into(),
                    ));
                }
                match &c.fits {
                    FitSource::Files { .. } => Ok(()),
                    FitSource::Generate { unbiased, biased } => {
                        if !c.unbiased_p_grid.is_empty() && unbiased.is_none() {
                            return Err(CliError::Config(
                                "unbiased_p_grid needs an unbiased fit source".into(),
                            ));
                        }
                        if !c.biased_p_z_grid.is_empty() && biased.is_none() {
                            return Err(CliError::Config(
                                "biased_p_z_grid needs a biased fit source".into(),
                            ));
                        }
                        if let Some(g) = unbiased {
                            non_empty(&g.d_grid, "unbiased d_grid")?;
                            non_empty(&g.p_grid, "unbiased p_grid")?;
                            positive(&g.p_grid, "unbiased p_grid")?;
                            for &d in &g.d_grid {
                                check_distance(d, "unbiased d_grid entry")?;
                            }
                            min_shots(g.shots, "unbiased shots")?;
                        }
                        if let Some(g) = biased {
                            check_distance(g.d_x, "biased d_x")?;
                            non_empty(&g.d_z_grid, "biased d_z_grid")?;
                            non_empty(&g.p_z_grid, "biased p_z_grid")?;
                            positive(&g.p_z_grid, "biased p_z_grid")?;
                            for &d in &g.d_z_grid {
                                check_distance(d, "biased d_z_grid entry")?;
                            }
                            if !(g.eta >= 1.0) {
                                return Err(CliError::Config(format!(
                                    "biased eta must be ≥ 1, got {}",
                                    g.eta
                                )));
                            }
                            min_shots(g.shots, "biased shots")?;
                            non_empty(&g.x_fit.d_x_grid, "x_fit d_x_grid")?;
                            non_empty(&g.x_fit.eta_grid, "x_fit eta_grid")?;
                            non_empty(&g.x_fit.p_z_grid, "x_fit p_z_grid")?;
                            positive(&g.x_fit.p_z_grid, "x_fit p_z_grid")?;
                            for &d in &g.x_fit.d_x_grid {
                                check_distance(d, "x_fit d_x_grid entry")?;
                            }
                            for &eta in &g.x_fit.eta_grid {
                                if !(eta >= 1.0) {
                                    return Err(CliError::Config(format!(
                                        "x_fit eta_grid entries must be ≥ 1, got {eta}"
                                    )));
                                }
                            }
                            check_distance(g.x_fit.d_z, "x_fit d_z")?;
                            min_shots(g.x_fit.shots, "x_fit shots")?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

fn check_distance(d: usize, name: &str) -> Result<()> {
    if d < 2 {
        return Err(CliError::Config(format!("{name} must be ≥ 2, got {d}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(kind_body: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "schema": CONFIG_SCHEMA,
            "seed": 7,
            "experiment": kind_body,
        })
    }

    fn parse(v: serde_json::Value) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_value(v)
            .map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn qec_sample_config_parses_and_validates() {
        let cfg = parse(minimal(serde_json::json!({
            "kind": "qec-sample",
            "d_x": 3, "d_z": 3,
            "basis": "x",
            "noise": { "model": "simplified", "p_z": 1e-3, "eta": 1000.0 },
            "shots": 1000,
        })))
        .unwrap();
        assert_eq!(cfg.experiment.kind_name(), "qec-sample");
        match cfg.experiment {
            Experiment::QecSample(q) => {
                assert_eq!(q.rounds, None);
                assert!(matches!(q.noise, NoiseSpec::Simplified { .. }));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let v = serde_json::json!({
            "schema": CONFIG_SCHEMA,
            "experiment": { "kind": "qec-sample", "d_x": 3, "d_z": 3,
                            "noise": {"model": "depolarizing", "p": 1e-3},
                            "shots": 1000 },
        });
        let err = parse(v).unwrap_err();
        assert_eq!(err.kind(), "config");
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn small_shot_budgets_are_rejected() {
        let err = parse(minimal(serde_json::json!({
            "kind": "qec-sample",
            "d_x": 3, "d_z": 3,
            "noise": { "model": "depolarizing", "p": 1e-3 },
            "shots": 99,
        })))
        .unwrap_err();
        assert!(err.to_string().contains("at least 100"), "{err}");
    }

    #[test]
    fn empty_grids_are_rejected() {
        let err = parse(minimal(serde_json::json!({
            "kind": "gate-sim",
            "gate": "cx_gf",
            "model": "Model1",
            "q_grid": [],
            "alpha_sq_grid": [4.0],
        })))
        .unwrap_err();
        assert!(err.to_string().contains("q_grid"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse(minimal(serde_json::json!({
            "kind": "qec-sample",
            "d_x": 3, "d_z": 3,
            "noise": { "model": "depolarizing", "p": 1e-3 },
            "shots": 1000,
            "shotz": 10,
        })))
        .unwrap_err();
        assert_eq!(err.kind(), "config");
    }

    #[test]
    fn wrong_schema_tag_is_rejected() {
        let mut v = minimal(serde_json::json!({
            "kind": "stabilization-study",
            "alpha_sq": 3.0, "period": 0.125, "n_rounds": 8,
        }));
        v["schema"] = "cattrans-config/999".into();
        let err = parse(v).unwrap_err();
        assert!(err.to_string().contains("unsupported schema"), "{err}");
    }

    #[test]
    fn overhead_requires_a_matching_fit_source() {
        let err = parse(minimal(serde_json::json!({
            "kind": "overhead",
            "targets": [1e-10],
            "unbiased_p_grid": [1e-3],
            "fits": { "source": "generate" },
        })))
        .unwrap_err();
        assert!(err.to_string().contains("unbiased fit source"), "{err}");
    }

    #[test]
    fn manifest_files_load_as_their_embedded_config() {
        let dir = tempfile::tempdir().unwrap();
        let config = minimal(serde_json::json!({
            "kind": "qec-sample",
            "d_x": 3, "d_z": 3,
            "noise": { "model": "depolarizing", "p": 1e-3 },
            "shots": 1000,
        }));
        let manifest = serde_json::json!({
            "schema": "cattrans-manifest/1",
            "config": config,
            "artifacts": [],
        });
        let path = dir.path().join("manifest.json");
        fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
        let cfg = load(&path).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.experiment.kind_name(), "qec-sample");
    }

    #[test]
    fn envelope_specs_parse_inside_gate_sim() {
        let cfg = parse(minimal(serde_json::json!({
            "kind": "gate-sim",
            "gate": "crx_full9",
            "model": "Model2",
            "q_grid": [1e-4],
            "alpha_sq_grid": [6.0],
            "envelope": {
                "kind": { "family": "approx2_comp", "delta1": 18.0, "delta2": 30.0 },
                "t_sel": 0.6283,
                "target_angle": 0.7853981633974483
            },
        })))
        .unwrap();
        match cfg.experiment {
            Experiment::GateSim(g) => assert!(g.envelope.is_some()),
            _ => unreachable!(),
        }
    }
}
