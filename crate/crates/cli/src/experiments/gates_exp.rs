//! Gate-level experiments: channel extraction sweeps, pulse-shaping sweeps,
//! and the achievable (p_Z, η) map.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use cattrans_core::analysis::{self, BiasOptimum};
use cattrans_core::dynamics::NoiseRates;
use cattrans_core::gates::{
    cx_bitflip_floor, coherent_error, optimize_crx_pulse, ChannelRecord, CrxVariant, GateKind,
    GateMetrics, GateSpec, PulseFamily,
};
use cattrans_core::linalg::c64;
use cattrans_core::pulses::{EnvelopeKind, EnvelopeSpec, NelderMeadOptions};

use crate::config::{AchievableConfig, DragSweepConfig, GateSimConfig};
use crate::error::{CliError, Result};
use crate::manifest::ArtifactSet;
use crate::table::{cell, num, Table};

use super::{crx_envelope_spec, selective_angle, GateChannelSet};

fn family_label(family: PulseFamily) -> String {
    serde_json::to_value(family)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{family:?}"))
}

fn model_label(model: cattrans_core::dynamics::NoiseModel) -> String {
    format!("{model:?}")
}

/// One completed gate-sim point, ready for serialization.
#[derive(Serialize)]
struct GateSimPoint {
    gate: String,
    model: String,
    q: f64,
    alpha_sq: f64,
    chi: f64,
    metrics: GateMetrics,
    /// Leading-order cat phase-flip estimate `π|α|²q`.
    p_z_leading: f64,
    /// Transmon-limited cat bit-flip floor for a dispersive CX window.
    p_bit_floor: f64,
    channel_file: String,
}

/// Sweep one gate over `(q, |α|²)` and export channels plus metrics.
pub fn gate_sim(cfg: &GateSimConfig, art: &mut ArtifactSet) -> Result<()> {
    let mut grid = Vec::new();
    for &q in &cfg.q_grid {
        for &alpha_sq in &cfg.alpha_sq_grid {
            grid.push((q, alpha_sq));
        }
    }
    let total = grid.len();
    let done = AtomicUsize::new(0);

    let results: Vec<(ChannelRecord, GateSimPoint)> = grid
        .into_par_iter()
        .map(|(q, alpha_sq)| {
            let rates = NoiseRates::from_model(cfg.model, q, cfg.chi)?;
            let alpha = c64(alpha_sq.sqrt(), 0.0);
            let spec = match cfg.gate {
                GateKind::CxGf => GateSpec::cx_gf(alpha, cfg.chi),
                GateKind::CxGe => GateSpec::cx_ge(alpha, cfg.chi),
                GateKind::CrxFull9 | GateKind::CrxSimple5 => {
                    let variant = if cfg.gate == GateKind::CrxFull9 {
                        CrxVariant::Full9
                    } else {
                        CrxVariant::Simple5
                    };
                    let envelope = crx_envelope_spec(
                        cfg.envelope.as_ref(),
                        cfg.pulse_family,
                        cfg.t_sel_frac,
                        cfg.chi,
                        alpha_sq,
                        variant,
                    )?;
                    GateSpec::crx(alpha, cfg.chi, envelope, variant)
                }
                GateKind::Idle => GateSpec::idle(
                    alpha,
                    cfg.chi,
                    cfg.kappa2_over_chi.unwrap_or(super::DEFAULT_KAPPA2_OVER_CHI),
                    cfg.duration_chi.map(|d| d / cfg.chi),
                ),
            };
            let outcome = spec.simulate(&rates)?;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "gate-sim [{n}/{total}] {} q={q:.3e} |alpha|^2={alpha_sq}: p_z={:.3e} p_bit={:.3e}",
                spec.label(),
                outcome.metrics.p_z_cat,
                outcome.metrics.p_bit_cat
            );
            let record = ChannelRecord::new(&spec, &rates, &outcome);
            let point = GateSimPoint {
                gate: spec.label().to_string(),
                model: model_label(cfg.model),
                q,
                alpha_sq,
                chi: cfg.chi,
                metrics: outcome.metrics,
                p_z_leading: PI * alpha_sq * q,
                p_bit_floor: cx_bitflip_floor(&rates, cfg.chi),
                channel_file: String::new(),
            };
            Ok::<_, CliError>((record, point))
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(&[
        "gate",
        "model",
        "q",
        "alpha_sq",
        "chi",
        "infidelity",
        "p_z",
        "p_bit",
        "eta",
        "p_z_leading",
        "p_bit_floor",
        "clipped_mass",
        "cutoff",
    ]);
    let mut points = Vec::new();
    for (i, (record, mut point)) in results.into_iter().enumerate() {
        let rel = format!("channels/point_{i:03}.json");
        art.write_json(&rel, &record)?;
        point.channel_file = rel;
        table.push(vec![
            point.gate.clone(),
            point.model.clone(),
            num(point.q),
            num(point.alpha_sq),
            num(point.chi),
            num(point.metrics.avg_gate_infidelity),
            num(point.metrics.p_z_cat),
            num(point.metrics.p_bit_cat),
            num(point.metrics.eta_cat.unwrap_or(f64::INFINITY)),
            num(point.p_z_leading),
            num(point.p_bit_floor),
            num(record.metadata.clipped_mass),
            cell(record.metadata.cutoff),
        ]);
        points.push(point);
    }
    art.write_string("gate_metrics.csv", &table.to_csv())?;
    art.write_json("gate_sim.json", &points)?;
    Ok(())
}

#[derive(Serialize)]
struct DragPoint {
    family: String,
    alpha_sq: f64,
    t_sel: f64,
    coherent_error: f64,
    evals: usize,
    envelope: EnvelopeSpec,
}

/// Coherent-error sweep over pulse families and cat sizes (zero noise).
pub fn drag_sweep(cfg: &DragSweepConfig, art: &mut ArtifactSet) -> Result<()> {
    let t_sel = cfg.t_sel_frac * PI / cfg.chi;
    let mut jobs: Vec<(Option<PulseFamily>, f64)> = Vec::new();
    if cfg.include_plain_gaussian {
        for &a in &cfg.alpha_sq_grid {
            jobs.push((None, a));
        }
    }
    for &family in &cfg.families {
        for &a in &cfg.alpha_sq_grid {
            jobs.push((Some(family), a));
        }
    }
    let total = jobs.len();
    let done = AtomicUsize::new(0);

    let rows: Vec<DragPoint> = jobs
        .into_par_iter()
        .map(|(family, alpha_sq)| {
            let alpha = c64(alpha_sq.sqrt(), 0.0);
            let point = match family {
                None => {
                    let spec = EnvelopeSpec {
                        kind: EnvelopeKind::TruncatedGaussian { m: 1 },
                        t_sel,
                        sigma: None,
                        target_angle: selective_angle(cfg.variant),
                    };
                    let env = spec.build()?;
                    let err = coherent_error(cfg.chi, alpha, &env, cfg.variant)?;
                    DragPoint {
                        family: "gaussian".into(),
                        alpha_sq,
                        t_sel,
                        coherent_error: err,
                        evals: 1,
                        envelope: spec,
                    }
                }
                Some(family) => {
                    if cfg.optimize {
                        let opts = NelderMeadOptions {
                            max_evals: cfg.max_evals,
                            f_tol: 1e-9,
                            x_tol: 1e-7,
                        };
                        let best = optimize_crx_pulse(
                            cfg.chi,
                            alpha,
                            family,
                            t_sel,
                            cfg.variant,
                            Some(opts),
                        )?;
                        DragPoint {
                            family: family_label(family),
                            alpha_sq,
                            t_sel,
                            coherent_error: best.coherent_error,
                            evals: best.evals,
                            envelope: best.spec,
                        }
                    } else {
                        let spec = crx_envelope_spec(
                            None,
                            Some(family),
                            Some(cfg.t_sel_frac),
                            cfg.chi,
                            alpha_sq,
                            cfg.variant,
                        )?;
                        let env = spec.build()?;
                        let err = coherent_error(cfg.chi, alpha, &env, cfg.variant)?;
                        DragPoint {
                            family: family_label(family),
                            alpha_sq,
                            t_sel,
                            coherent_error: err,
                            evals: 1,
                            envelope: spec,
                        }
                    }
                }
            };
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "drag-sweep [{n}/{total}] {} |alpha|^2={alpha_sq}: coherent error {:.3e}",
                point.family, point.coherent_error
            );
            Ok::<_, CliError>(point)
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(&["family", "alpha_sq", "t_sel", "coherent_error", "evals"]);
    for r in &rows {
        table.push(vec![
            r.family.clone(),
            num(r.alpha_sq),
            num(r.t_sel),
            num(r.coherent_error),
            cell(r.evals),
        ]);
    }
    art.write_string("drag_sweep.csv", &table.to_csv())?;
    art.write_json("drag_sweep.json", &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct AchievableReport {
    points: Vec<cattrans_core::analysis::AchievableRow>,
    optima: Vec<(f64, BiasOptimum)>,
    skipped: Vec<String>,
}

/// Simulate CX and CRX over a `(q, |α|²)` grid, map each point to
/// `(p_Z, η)`, and locate the maximum beneficial bias per quality value.
pub fn achievable(cfg: &AchievableConfig, art: &mut ArtifactSet) -> Result<()> {
    let mut grid = Vec::new();
    for &q in &cfg.q_grid {
        for &alpha_sq in &cfg.alpha_sq_grid {
            grid.push((q, alpha_sq));
        }
    }
    let total = grid.len();
    let done = AtomicUsize::new(0);
    let sets: Vec<(f64, f64, GateChannelSet)> = grid
        .into_par_iter()
        .map(|(q, alpha_sq)| {
            let set = super::gate_channel_set(
                cfg.model,
                q,
                alpha_sq,
                cfg.chi,
                cfg.pulse_family,
                cfg.t_sel_frac,
                None,
            )?;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "achievable-map [{n}/{total}] q={q:.3e} |alpha|^2={alpha_sq}: \
                 cx p_bit={:.3e}, crx p_bit={:.3e}",
                set.cx.metrics.p_bit_cat, set.crx.metrics.p_bit_cat
            );
            Ok::<_, CliError>((q, alpha_sq, set))
        })
        .collect::<Result<_>>()?;

    let entries: Vec<(f64, f64, _, _)> = sets
        .iter()
        .map(|(q, a, s)| (*q, *a, s.cx.channel.clone(), s.crx.channel.clone()))
        .collect();
    let points = analysis::achievable_map(&entries)?;

    let mut table = Table::new(&[
        "kind",
        "q",
        "alpha_sq",
        "p_z",
        "eta",
        "p_bit_cx",
        "p_bit_crx",
    ]);
    for row in &points {
        let set = sets
            .iter()
            .find(|(q, a, _)| *q == row.q && *a == row.alpha_sq)
            .map(|(_, _, s)| s)
            .expect("row came from this grid");
        table.push(vec![
            "point".into(),
            num(row.q),
            num(row.alpha_sq),
            num(row.p_z),
            num(row.eta),
            num(set.cx.metrics.p_bit_cat),
            num(set.crx.metrics.p_bit_cat),
        ]);
    }

    // Maximum beneficial bias per q: intersect the two bit-flip curves.
    let mut optima = Vec::new();
    let mut skipped = Vec::new();
    if cfg.bias_optimum {
        for &q in &cfg.q_grid {
            let curve = |pick: fn(&GateChannelSet) -> f64| -> Vec<(f64, f64)> {
                sets.iter()
                    .filter(|(qq, _, _)| *qq == q)
                    .map(|(_, a, s)| (*a, pick(s)))
                    .collect()
            };
            let cx_curve = curve(|s| s.cx.metrics.p_bit_cat);
            let crx_curve = curve(|s| s.crx.metrics.p_bit_cat);
            match analysis::max_beneficial_bias(&cx_curve, &crx_curve, q) {
                Ok(opt) => {
                    table.push(vec![
                        "optimum".into(),
                        num(q),
                        num(opt.alpha_sq),
                        num(PI * opt.alpha_sq * q),
                        num(opt.eta),
                        num(opt.p_bit),
                        num(opt.p_bit),
                    ]);
                    optima.push((q, opt));
                }
                Err(e) => skipped.push(format!("q={q:.3e}: {e}")),
            }
        }
    }

    art.write_string("achievable.csv", &table.to_csv())?;
    art.write_json("achievable.json", &AchievableReport { points, optima, skipped })?;
    Ok(())
}
