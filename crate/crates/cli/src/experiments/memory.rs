//! Memory experiments: single-point logical-error sampling, threshold scans
//! over a distance ladder, and qubit-overhead evaluation from fitted
//! logical-error ansatzes.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cattrans_core::analysis::{
    self, BiasedFitFamily, BiasedXPoint, FitResult, NoisePoint, OverheadRow, RatePoint,
};
use cattrans_core::code::{
    build_patch, syndrome_circuit, CircuitNoise, CodeFamily, MemoryBasis, SimplifiedNoise,
};
use cattrans_core::decode::{self, logical_error_rate, LogicalErrorEstimate};
use cattrans_core::gates::ChannelRecord;
use cattrans_core::Error as CoreError;

use crate::config::{
    BiasedGen, NoiseAxis, NoiseSpec, OverheadConfig, QecSampleConfig, ThresholdConfig,
    UnbiasedGen,
};
use crate::error::{CliError, Result};
use crate::manifest::ArtifactSet;
use crate::table::{cell, num, Table};

use super::{gate_channel_set, point_seed, resolve};

/// Serde tag of a unit-like enum value (`"css_rotated"`, `"x"`, ...).
fn tag<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "?".into())
}

fn load_channel(path: &Path) -> Result<cattrans_core::pauli::PauliChannel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read channel {}: {e}", path.display())))?;
    let record: ChannelRecord = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: invalid channel JSON: {e}", path.display())))?;
    Ok(record.channel()?)
}

/// Scalar noise descriptors for tabular output: exactly one of
/// `(p_z, eta)`, `p`, or `q` is finite per noise spec.
struct NoiseLabels {
    p_z: f64,
    eta: f64,
    p: f64,
    q: f64,
}

/// Resolve a config-level noise selector to circuit channels. Full-gate
/// channels are exported next to the other artifacts so later runs can
/// reload them from files.
fn circuit_noise(
    spec: &NoiseSpec,
    base_dir: &Path,
    art: &mut ArtifactSet,
    export_prefix: &str,
) -> Result<(CircuitNoise, NoiseLabels)> {
    let nan = f64::NAN;
    match spec {
        NoiseSpec::Simplified { p_z, eta, readout_reset_error } => Ok((
            CircuitNoise::Simplified(SimplifiedNoise {
                p_z: *p_z,
                eta: *eta,
                readout_reset_error: *readout_reset_error,
            }),
            NoiseLabels { p_z: *p_z, eta: *eta, p: nan, q: nan },
        )),
        NoiseSpec::Depolarizing { p, readout_reset_error } => Ok((
            CircuitNoise::Depolarizing { p: *p, readout_reset_error: *readout_reset_error },
            NoiseLabels { p_z: nan, eta: nan, p: *p, q: nan },
        )),
        NoiseSpec::FullFiles { cx, crx, idle, readout_reset_error } => Ok((
            CircuitNoise::Full {
                cx: load_channel(&resolve(base_dir, cx))?,
                crx: load_channel(&resolve(base_dir, crx))?,
                idle: load_channel(&resolve(base_dir, idle))?,
                readout_reset_error: *readout_reset_error,
            },
            NoiseLabels { p_z: nan, eta: nan, p: nan, q: nan },
        )),
        NoiseSpec::FullGates {
            model,
            q,
            alpha_sq,
            chi,
            pulse_family,
            t_sel_frac,
            kappa2_over_chi,
            readout_reset_error,
        } => {
            let set = gate_channel_set(
                *model,
                *q,
                *alpha_sq,
                *chi,
                *pulse_family,
                *t_sel_frac,
                *kappa2_over_chi,
            )?;
            for (name, gate_spec, outcome) in [
                ("cx", &set.cx_spec, &set.cx),
                ("crx", &set.crx_spec, &set.crx),
                ("idle", &set.idle_spec, &set.idle),
            ] {
                let record = ChannelRecord::new(gate_spec, &set.rates, outcome);
                art.write_json(&format!("channels/{export_prefix}{name}.json"), &record)?;
            }
            let (cx, crx, idle) = set.channels();
            Ok((
                CircuitNoise::Full {
                    cx,
                    crx,
                    idle,
                    readout_reset_error: *readout_reset_error,
                },
                NoiseLabels { p_z: nan, eta: nan, p: nan, q: *q },
            ))
        }
    }
}

const SAMPLE_COLUMNS: [&str; 14] = [
    "family",
    "basis",
    "d_x",
    "d_z",
    "rounds",
    "p_z",
    "eta",
    "p",
    "q",
    "shots",
    "failures",
    "rate",
    "ci_low",
    "ci_high",
];

fn sample_row(
    family: CodeFamily,
    basis: MemoryBasis,
    d_x: usize,
    d_z: usize,
    rounds: usize,
    labels: &NoiseLabels,
    est: &LogicalErrorEstimate,
) -> Vec<String> {
    vec![
        tag(&family),
        tag(&basis),
        cell(d_x),
        cell(d_z),
        cell(rounds),
        num(labels.p_z),
        num(labels.eta),
        num(labels.p),
        num(labels.q),
        cell(est.shots),
        cell(est.failures),
        num(est.rate),
        num(est.ci_low),
        num(est.ci_high),
    ]
}

#[derive(Serialize)]
struct QecSampleReport {
    family: CodeFamily,
    basis: MemoryBasis,
    d_x: usize,
    d_z: usize,
    rounds: usize,
    seed: u64,
    estimate: LogicalErrorEstimate,
}

/// Sample the logical error rate of one code / noise / basis point.
pub fn qec_sample(
    cfg: &QecSampleConfig,
    seed: u64,
    base_dir: &Path,
    art: &mut ArtifactSet,
) -> Result<()> {
    let rounds = cfg.rounds.unwrap_or(cfg.d_z);
    let patch = build_patch(cfg.family, cfg.d_x, cfg.d_z)?;
    let (noise, labels) = circuit_noise(&cfg.noise, base_dir, art, "")?;
    let circuit = syndrome_circuit(&patch, rounds, &noise, cfg.basis)?;
    eprintln!(
        "qec-sample: {} d_x={} d_z={} rounds={rounds} basis={} shots={}",
        tag(&cfg.family),
        cfg.d_x,
        cfg.d_z,
        tag(&cfg.basis),
        cfg.shots
    );
    let est = logical_error_rate(&circuit, cfg.shots, seed)?;
    eprintln!("qec-sample: {} / {} failures (rate {:.4e})", est.failures, est.shots, est.rate);

    if cfg.save_shots {
        let batch = decode::sample(&circuit, cfg.shots as usize, seed)?;
        let mut buf = Vec::new();
        batch.write_to(&mut buf)?;
        art.write_bytes("shots.bin", &buf)?;
    }

    let mut table = Table::new(&SAMPLE_COLUMNS);
    table.push(sample_row(cfg.family, cfg.basis, cfg.d_x, cfg.d_z, rounds, &labels, &est));
    art.write_string("qec_sample.csv", &table.to_csv())?;
    art.write_json(
        "qec_sample.json",
        &QecSampleReport {
            family: cfg.family,
            basis: cfg.basis,
            d_x: cfg.d_x,
            d_z: cfg.d_z,
            rounds,
            seed,
            estimate: est,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ThresholdRow {
    d_z: usize,
    rounds: usize,
    /// Value along the scan axis (`p_z`, `p`, or `q`).
    p: f64,
    estimate: LogicalErrorEstimate,
}

#[derive(Serialize)]
struct ThresholdReport {
    family: CodeFamily,
    basis: MemoryBasis,
    d_x: usize,
    axis: String,
    rows: Vec<ThresholdRow>,
    /// Estimated crossing of the distance curves, when one exists in range.
    crossing: Option<f64>,
    crossing_error: Option<String>,
}

/// Scan the logical error rate along a noise axis for a ladder of `d_z`.
pub fn threshold(
    cfg: &ThresholdConfig,
    seed: u64,
    base_dir: &Path,
    art: &mut ArtifactSet,
) -> Result<()> {
    let _ = base_dir;
    // Resolve each axis point to a noise model (expensive only for full
    // gate channels, which are simulated in parallel and exported).
    let axis_name = match &cfg.axis {
        NoiseAxis::SimplifiedPz { .. } => "p_z",
        NoiseAxis::DepolarizingP { .. } => "p",
        NoiseAxis::GateQuality { .. } => "q",
    };
    let points: Vec<(f64, CircuitNoise)> = match &cfg.axis {
        NoiseAxis::SimplifiedPz { p_z_grid, eta, readout_reset_error } => p_z_grid
            .iter()
            .map(|&p_z| {
                (
                    p_z,
                    CircuitNoise::Simplified(SimplifiedNoise {
                        p_z,
                        eta: *eta,
                        readout_reset_error: *readout_reset_error,
                    }),
                )
            })
            .collect(),
        NoiseAxis::DepolarizingP { p_grid, readout_reset_error } => p_grid
            .iter()
            .map(|&p| {
                (p, CircuitNoise::Depolarizing { p, readout_reset_error: *readout_reset_error })
            })
            .collect(),
        NoiseAxis::GateQuality {
            q_grid,
            model,
            alpha_sq,
            chi,
            pulse_family,
            t_sel_frac,
            kappa2_over_chi,
            readout_reset_error,
        } => {
            let sets: Vec<_> = q_grid
                .par_iter()
                .map(|&q| {
                    let set = gate_channel_set(
                        *model,
                        q,
                        *alpha_sq,
                        *chi,
                        *pulse_family,
                        *t_sel_frac,
                        *kappa2_over_chi,
                    )?;
                    eprintln!("threshold: gate channels ready at q={q:.3e}");
                    Ok::<_, CliError>((q, set))
                })
                .collect::<Result<_>>()?;
            let mut points = Vec::new();
            for (i, (q, set)) in sets.into_iter().enumerate() {
                for (name, gate_spec, outcome) in [
                    ("cx", &set.cx_spec, &set.cx),
                    ("crx", &set.crx_spec, &set.crx),
                    ("idle", &set.idle_spec, &set.idle),
                ] {
                    let record = ChannelRecord::new(gate_spec, &set.rates, outcome);
                    art.write_json(&format!("channels/q_{i:02}_{name}.json"), &record)?;
                }
                let (cx, crx, idle) = set.channels();
                points.push((
                    q,
                    CircuitNoise::Full {
                        cx,
                        crx,
                        idle,
                        readout_reset_error: *readout_reset_error,
                    },
                ));
            }
            points
        }
    };

    let mut jobs = Vec::new();
    for (pi, (x, noise)) in points.iter().enumerate() {
        for &d_z in &cfg.d_z_grid {
            let index = (pi * cfg.d_z_grid.len() + jobs.len() % cfg.d_z_grid.len()) as u64;
            let _ = index;
            jobs.push((*x, noise.clone(), d_z));
        }
    }
    let total = jobs.len();
    let done = AtomicUsize::new(0);

    let rows: Vec<ThresholdRow> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(i, (x, noise, d_z))| {
            let rounds = cfg.rounds.unwrap_or(d_z);
            let patch = build_patch(cfg.family, cfg.d_x, d_z)?;
            let circuit = syndrome_circuit(&patch, rounds, &noise, cfg.basis)?;
            let est = logical_error_rate(&circuit, cfg.shots, point_seed(seed, i as u64))?;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "threshold [{n}/{total}] {axis_name}={x:.4e} d_z={d_z}: \
                 {}/{} failures (rate {:.4e})",
                est.failures, est.shots, est.rate
            );
            Ok::<_, CliError>(ThresholdRow { d_z, rounds, p: x, estimate: est })
        })
        .collect::<Result<_>>()?;

    // Crossing estimate over the per-distance curves (positive rates only).
    let mut curves: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for &d_z in &cfg.d_z_grid {
        let curve: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.d_z == d_z && r.estimate.rate > 0.0)
            .map(|r| (r.p, r.estimate.rate))
            .collect();
        if curve.len() >= 2 {
            curves.push((d_z, curve));
        }
    }
    let (crossing, crossing_error) = match analysis::threshold_estimate(&curves) {
        Ok(x) => (Some(x), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(x) = crossing {
        eprintln!("threshold: estimated crossing at {axis_name} = {x:.4e}");
    }

    let mut table = Table::new(&[
        "family",
        "axis",
        "d_x",
        "d_z",
        "rounds",
        "p",
        "shots",
        "failures",
        "rate",
        "ci_low",
        "ci_high",
    ]);
    for r in &rows {
        table.push(vec![
            tag(&cfg.family),
            axis_name.to_string(),
            cell(cfg.d_x),
            cell(r.d_z),
            cell(r.rounds),
            num(r.p),
            cell(r.estimate.shots),
            cell(r.estimate.failures),
            num(r.estimate.rate),
            num(r.estimate.ci_low),
            num(r.estimate.ci_high),
        ]);
    }
    art.write_string("threshold.csv", &table.to_csv())?;
    art.write_json(
        "threshold.json",
        &ThresholdReport {
            family: cfg.family,
            basis: cfg.basis,
            d_x: cfg.d_x,
            axis: axis_name.to_string(),
            rows,
            crossing,
            crossing_error,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Overhead
// ---------------------------------------------------------------------------

/// Fit container written by (and reloadable into) overhead runs.
#[derive(Serialize, Deserialize, Default)]
pub struct FitsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unbiased: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<BiasedFitFamily>,
}

/// One Monte-Carlo observation that went into a fit (kept for provenance).
#[derive(Serialize)]
struct GeneratedPoint {
    fit: &'static str,
    d_x: usize,
    d_z: usize,
    p: f64,
    eta: f64,
    rate: f64,
}

#[derive(Serialize)]
struct OverheadReport {
    rows: Vec<OverheadRow>,
    unreachable: Vec<String>,
    generated: Vec<GeneratedPoint>,
}

/// Memory sample returning the logical error rate only.
fn simplified_rate(
    family: CodeFamily,
    d_x: usize,
    d_z: usize,
    noise: &CircuitNoise,
    basis: MemoryBasis,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    let patch = build_patch(family, d_x, d_z)?;
    let circuit = syndrome_circuit(&patch, d_z.max(d_x).min(d_z), noise, basis)?;
    Ok(logical_error_rate(&circuit, shots, seed)?.rate)
}

/// Generate unbiased fit data: square codes under depolarizing noise, with
/// the two memory bases sampled separately and their rates summed into the
/// total logical error.
fn generate_unbiased(
    gen: &UnbiasedGen,
    seed: u64,
    generated: &mut Vec<GeneratedPoint>,
) -> Result<FitResult> {
    let mut jobs = Vec::new();
    for &d in &gen.d_grid {
        for &p in &gen.p_grid {
            jobs.push((d, p));
        }
    }
    let total = jobs.len();
    let done = AtomicUsize::new(0);
    let points: Vec<(usize, f64, f64)> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(i, (d, p))| {
            let noise = CircuitNoise::Depolarizing {
                p,
                readout_reset_error: gen.readout_reset_error,
            };
            let patch = build_patch(CodeFamily::CssRotated, d, d)?;
            let circuit_x = syndrome_circuit(&patch, d, &noise, MemoryBasis::X)?;
            let circuit_z = syndrome_circuit(&patch, d, &noise, MemoryBasis::Z)?;
            let rate_x =
                logical_error_rate(&circuit_x, gen.shots, point_seed(seed, 2 * i as u64))?.rate;
            let rate_z =
                logical_error_rate(&circuit_z, gen.shots, point_seed(seed, 2 * i as u64 + 1))?
                    .rate;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "overhead [unbiased {n}/{total}] d={d} p={p:.3e}: \
                 rate {:.4e} (X) + {:.4e} (Z)",
                rate_x, rate_z
            );
            Ok::<_, CliError>((d, p, rate_x + rate_z))
        })
        .collect::<Result<_>>()?;

    let mut fit_points = Vec::new();
    for (d, p, rate) in points {
        generated.push(GeneratedPoint { fit: "unbiased", d_x: d, d_z: d, p, eta: f64::NAN, rate });
        if rate > 0.0 {
            fit_points.push(RatePoint { distance: d, p, rate });
        } else {
            eprintln!(
                "overhead: dropping zero-failure point d={d} p={p:.3e} from the unbiased fit \
                 (increase shots to resolve it)"
            );
        }
    }
    Ok(analysis::fit_unbiased(&fit_points)?)
}

/// Generate the biased fit family: the phase-flip ansatz at the configured
/// `d_x` and bias, plus bit-flip power laws per `d_x` from low-bias scans.
fn generate_biased(
    gen: &BiasedGen,
    seed: u64,
    generated: &mut Vec<GeneratedPoint>,
) -> Result<BiasedFitFamily> {
    // Phase-flip (logical-Z) ansatz data: memory-X experiments at strong bias.
    let mut z_jobs = Vec::new();
    for &d_z in &gen.d_z_grid {
        for &p_z in &gen.p_z_grid {
            z_jobs.push((d_z, p_z));
        }
    }
    let total = z_jobs.len();
    let done = AtomicUsize::new(0);
    let z_points: Vec<(usize, f64, f64)> = z_jobs
        .into_par_iter()
        .enumerate()
        .map(|(i, (d_z, p_z))| {
            let noise = CircuitNoise::Simplified(SimplifiedNoise {
                p_z,
                eta: gen.eta,
                readout_reset_error: gen.readout_reset_error,
            });
            let patch = build_patch(CodeFamily::CssRotated, gen.d_x, d_z)?;
            let circuit = syndrome_circuit(&patch, d_z, &noise, MemoryBasis::X)?;
            let rate =
                logical_error_rate(&circuit, gen.shots, point_seed(seed, 1000 + i as u64))?.rate;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "overhead [biased-Z {n}/{total}] d_z={d_z} p_z={p_z:.3e}: rate {rate:.4e}"
            );
            Ok::<_, CliError>((d_z, p_z, rate))
        })
        .collect::<Result<_>>()?;

    let mut z_fit_points = Vec::new();
    for (d_z, p_z, rate) in z_points {
        generated.push(GeneratedPoint {
            fit: "biased_z",
            d_x: gen.d_x,
            d_z,
            p: p_z,
            eta: gen.eta,
            rate,
        });
        if rate > 0.0 {
            z_fit_points.push(RatePoint { distance: d_z, p: p_z, rate });
        } else {
            eprintln!(
                "overhead: dropping zero-failure point d_z={d_z} p_z={p_z:.3e} from the \
                 phase-flip fit"
            );
        }
    }
    let z_fit = analysis::fit_biased_z(&z_fit_points)?;

    // Bit-flip (logical-X) power laws: memory-Z experiments at low bias,
    // fitted against the proxy p_Z/η per d_x.
    let mut x_jobs = Vec::new();
    for &d_x in &gen.x_fit.d_x_grid {
        for &eta in &gen.x_fit.eta_grid {
            for &p_z in &gen.x_fit.p_z_grid {
                x_jobs.push((d_x, eta, p_z));
            }
        }
    }
    let total = x_jobs.len();
    let done = AtomicUsize::new(0);
    let x_points: Vec<(usize, f64, f64, f64)> = x_jobs
        .into_par_iter()
        .enumerate()
        .map(|(i, (d_x, eta, p_z))| {
            let noise = CircuitNoise::Simplified(SimplifiedNoise {
                p_z,
                eta,
                readout_reset_error: gen.readout_reset_error,
            });
            let patch = build_patch(CodeFamily::CssRotated, d_x, gen.x_fit.d_z)?;
            let circuit = syndrome_circuit(&patch, gen.x_fit.d_z, &noise, MemoryBasis::Z)?;
            let rate = logical_error_rate(
                &circuit,
                gen.x_fit.shots,
                point_seed(seed, 1_000_000 + i as u64),
            )?
            .rate;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "overhead [biased-X {n}/{total}] d_x={d_x} eta={eta:.1e} p_z={p_z:.3e}: \
                 rate {rate:.4e}"
            );
            Ok::<_, CliError>((d_x, eta, p_z, rate))
        })
        .collect::<Result<_>>()?;

    let mut x_fits = Vec::new();
    for &d_x in &gen.x_fit.d_x_grid {
        let mut pts = Vec::new();
        for &(dx, eta, p_z, rate) in &x_points {
            if dx != d_x {
                continue;
            }
            generated.push(GeneratedPoint {
                fit: "biased_x",
                d_x,
                d_z: gen.x_fit.d_z,
                p: p_z,
                eta,
                rate,
            });
            if rate > 0.0 {
                pts.push(BiasedXPoint { d_z: gen.x_fit.d_z, p_z, eta, rate });
            } else {
                eprintln!(
                    "overhead: dropping zero-failure point d_x={d_x} eta={eta:.1e} \
                     p_z={p_z:.3e} from the bit-flip fit"
                );
            }
        }
        x_fits.push((d_x, analysis::fit_biased_x(&pts)?));
    }

    Ok(BiasedFitFamily { z_fits: vec![(gen.d_x, z_fit)], x_fits })
}

/// Evaluate qubit overheads from fitted ansatzes, generating the fits from
/// simplified-model Monte Carlo when asked to.
pub fn overhead(
    cfg: &OverheadConfig,
    seed: u64,
    base_dir: &Path,
    art: &mut ArtifactSet,
) -> Result<()> {
    let mut generated = Vec::new();
    let fits: FitsFile = match &cfg.fits {
        crate::config::FitSource::Files { path } => {
            let full = resolve(base_dir, path);
            let text = std::fs::read_to_string(&full).map_err(|e| {
                CliError::Data(format!("cannot read fits {}: {e}", full.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: invalid fits JSON: {e}", full.display())))?
        }
        crate::config::FitSource::Generate { unbiased, biased } => {
            let unbiased = match unbiased {
                Some(gen) => Some(generate_unbiased(gen, point_seed(seed, 1), &mut generated)?),
                None => None,
            };
            let family = match biased {
                Some(gen) => Some(generate_biased(gen, point_seed(seed, 2), &mut generated)?),
                None => None,
            };
            FitsFile { unbiased, family }
        }
    };
    art.write_json("fits.json", &fits)?;

    let mut rows: Vec<OverheadRow> = Vec::new();
    let mut unreachable = Vec::new();
    if !cfg.unbiased_p_grid.is_empty() {
        let fit = fits.unbiased.as_ref().ok_or_else(|| {
            CliError::Data("the fits provide no unbiased ansatz for unbiased_p_grid".into())
        })?;
        for &target in &cfg.targets {
            for &p in &cfg.unbiased_p_grid {
                match analysis::overhead_unbiased(target, p, fit) {
                    Ok(row) => rows.push(row),
                    Err(CoreError::TargetUnreachable(msg)) => unreachable.push(msg),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    if !cfg.biased_p_z_grid.is_empty() {
        let family = fits.family.as_ref().ok_or_else(|| {
            CliError::Data("the fits provide no biased family for biased_p_z_grid".into())
        })?;
        for &target in &cfg.targets {
            for &eta in &cfg.etas {
                for &p_z in &cfg.biased_p_z_grid {
                    match analysis::overhead_biased(target, p_z, eta, family) {
                        Ok(row) => rows.push(row),
                        Err(CoreError::TargetUnreachable(msg)) => unreachable.push(msg),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }

    let mut table = Table::new(&[
        "target",
        "kind",
        "p",
        "p_z",
        "eta",
        "d_x",
        "d_z",
        "qubits",
        "predicted_rate",
    ]);
    for row in &rows {
        let (kind, p, p_z, eta) = match row.noise {
            NoisePoint::Unbiased { p } => ("unbiased", p, f64::NAN, f64::NAN),
            NoisePoint::Biased { p_z, eta } => ("biased", f64::NAN, p_z, eta),
        };
        table.push(vec![
            num(row.target),
            kind.to_string(),
            num(p),
            num(p_z),
            num(eta),
            cell(row.d_x),
            cell(row.d_z),
            cell(row.qubits),
            num(row.predicted_rate),
        ]);
    }
    art.write_string("overhead.csv", &table.to_csv())?;
    for msg in &unreachable {
        eprintln!("overhead: unreachable: {msg}");
    }
    art.write_json("overhead.json", &OverheadReport { rows, unreachable, generated })?;
    Ok(())
}
