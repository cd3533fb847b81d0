//! Experiment runners: one function per config kind, each writing its
//! artifacts (CSV tables, JSON results, channel exports) into an
//! [`ArtifactSet`]. All runners are deterministic in the config seed; worker
//! count never changes outputs.

mod gates_exp;
mod memory;
mod waves;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cattrans_core::dynamics::{NoiseModel, NoiseRates};
use cattrans_core::gates::{
    heuristic_envelope, CrxVariant, GateOutcome, GateSpec, PulseFamily,
};
use cattrans_core::linalg::c64;
use cattrans_core::pauli::PauliChannel;
use cattrans_core::pulses::EnvelopeSpec;

use crate::config::Experiment;
use crate::error::{CliError, Result};
use crate::manifest::ArtifactSet;

/// Default selective-pulse duration as a fraction of the gate window
/// (four echoed pulses fit comfortably inside it).
pub const DEFAULT_T_SEL_FRAC: f64 = 0.2;

/// Default pulse family for heuristically shaped selective pulses.
pub const DEFAULT_PULSE_FAMILY: PulseFamily = PulseFamily::Approx2Comp;

/// Default engineered-dissipation strength during idles.
pub const DEFAULT_KAPPA2_OVER_CHI: f64 = 0.1;

/// Run one experiment, writing artifacts into `art`. `base_dir` anchors
/// relative file references inside the config.
pub fn run(
    experiment: &Experiment,
    seed: u64,
    base_dir: &Path,
    art: &mut ArtifactSet,
) -> Result<()> {
    match experiment {
        Experiment::GateSim(c) => gates_exp::gate_sim(c, art),
        Experiment::DragSweep(c) => gates_exp::drag_sweep(c, art),
        Experiment::AchievableMap(c) => gates_exp::achievable(c, art),
        Experiment::DephasingStudy(c) => waves::dephasing(c, seed, art),
        Experiment::StabilizationStudy(c) => waves::stabilization(c, art),
        Experiment::QecSample(c) => memory::qec_sample(c, seed, base_dir, art),
        Experiment::Threshold(c) => memory::threshold(c, seed, base_dir, art),
        Experiment::Overhead(c) => memory::overhead(c, seed, base_dir, art),
    }
}

/// Per-point seed derivation: deterministic, well separated, independent of
/// evaluation order.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17)
}

/// Resolve a possibly relative path against the config file's directory.
pub fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

/// Rotation angle each selective pulse must implement (the echoed sequence
/// splits the total π across its selective pulses).
pub fn selective_angle(variant: CrxVariant) -> f64 {
    match variant {
        CrxVariant::Full9 => PI / 4.0,
        CrxVariant::Simple5 => PI / 2.0,
    }
}

/// Build a selective-pulse envelope spec: explicit if configured, otherwise
/// heuristic spectral-null placement for the requested family.
pub fn crx_envelope_spec(
    explicit: Option<&EnvelopeSpec>,
    family: Option<PulseFamily>,
    t_sel_frac: Option<f64>,
    chi: f64,
    alpha_sq: f64,
    variant: CrxVariant,
) -> Result<EnvelopeSpec> {
    if let Some(spec) = explicit {
        return Ok(*spec);
    }
    let frac = t_sel_frac.unwrap_or(DEFAULT_T_SEL_FRAC);
    let t_sel = frac * PI / chi;
    let alpha = c64(alpha_sq.sqrt(), 0.0);
    Ok(heuristic_envelope(
        family.unwrap_or(DEFAULT_PULSE_FAMILY),
        chi,
        alpha,
        t_sel,
        variant,
    )?)
}

/// The three channels a full-noise syndrome circuit needs, plus their specs
/// for export.
pub struct GateChannelSet {
    pub rates: NoiseRates,
    pub cx_spec: GateSpec,
    pub crx_spec: GateSpec,
    pub idle_spec: GateSpec,
    pub cx: GateOutcome,
    pub crx: GateOutcome,
    pub idle: GateOutcome,
}

impl GateChannelSet {
    pub fn channels(&self) -> (PauliChannel, PauliChannel, PauliChannel) {
        (self.cx.channel.clone(), self.crx.channel.clone(), self.idle.channel.clone())
    }
}

/// Simulate the CX (three-level transmon), CRX (nine-step echoed sequence),
/// and storage idle at one `(model, q, |α|²)` point.
#[allow(clippy::too_many_arguments)]
pub fn gate_channel_set(
    model: NoiseModel,
    q: f64,
    alpha_sq: f64,
    chi: f64,
    pulse_family: Option<PulseFamily>,
    t_sel_frac: Option<f64>,
    kappa2_over_chi: Option<f64>,
) -> Result<GateChannelSet> {
    let rates = NoiseRates::from_model(model, q, chi)?;
    let alpha = c64(alpha_sq.sqrt(), 0.0);
    let variant = CrxVariant::Full9;
    let envelope =
        crx_envelope_spec(None, pulse_family, t_sel_frac, chi, alpha_sq, variant)?;

    let cx_spec = GateSpec::cx_gf(alpha, chi);
    let crx_spec = GateSpec::crx(alpha, chi, envelope, variant);
    let idle_spec = GateSpec::idle(
        alpha,
        chi,
        kappa2_over_chi.unwrap_or(DEFAULT_KAPPA2_OVER_CHI),
        None,
    );

    let cx = cx_spec.simulate(&rates)?;
    let crx = crx_spec.simulate(&rates)?;
    let idle = idle_spec.simulate(&rates)?;
    Ok(GateChannelSet { rates, cx_spec, crx_spec, idle_spec, cx, crx, idle })
}

/// Human label for an error that should not abort a whole sweep.
pub fn data_err(context: &str, err: cattrans_core::Error) -> CliError {
    CliError::Data(format!("{context}: {err}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_seeds_are_distinct_and_deterministic() {
        let a: Vec<u64> = (0..64).map(|i| point_seed(9, i)).collect();
        let b: Vec<u64> = (0..64).map(|i| point_seed(9, i)).collect();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 64, "seed collisions");
    }

    #[test]
    fn heuristic_envelope_spec_is_feasible() {
        let spec =
            crx_envelope_spec(None, None, None, 1.0, 6.0, CrxVariant::Full9).unwrap();
        assert!((spec.target_angle - PI / 4.0).abs() < 1e-12);
        // Four pulses of 0.2 windows each fit inside one window.
        assert!(4.0 * spec.t_sel <= PI + 1e-12);
        spec.build().expect("calibration succeeds");
    }
}
