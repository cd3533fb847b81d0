//! Continuous-dynamics experiments: shot-noise dephasing comparisons and
//! pulsed-stabilization power-law fits.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use cattrans_core::dynamics::dephasing::{
    cat_dephasing_closed_form, cat_dephasing_monte_carlo, ShotNoiseConfig, Spectrum,
};
use cattrans_core::linalg::c64;
use cattrans_core::stabilization::{
    bitflip_curve, curve_rows, powerlaw_exponent, pulsing_grid, well_stabilized, PulsingConfig,
    PulsingFit, GRID_DUTIES, GRID_KAPPA_RATIOS,
};

use crate::config::{DephasingConfig, StabilizationConfig};
use crate::error::{CliError, Result};
use crate::manifest::ArtifactSet;
use crate::table::{cell, num, Table};

use super::point_seed;

fn spectrum_parts(spectrum: Spectrum) -> (&'static str, f64) {
    match spectrum {
        Spectrum::White { a } => ("white", a),
        Spectrum::OneOverF { a } => ("one_over_f", a),
    }
}

#[derive(Serialize)]
struct DephasingPoint {
    spectrum: String,
    echo: bool,
    a: f64,
    alpha_sq: f64,
    t: f64,
    n_traj: usize,
    n_steps: usize,
    n_records: usize,
    seed: u64,
    gamma_mc: f64,
    std_err: f64,
    gamma_formula: f64,
    /// Closed-form deviation in units of the sampling standard error.
    z: f64,
}

/// Compare sampled cat dephasing against the closed forms per spectrum,
/// echo setting, and evolution time.
pub fn dephasing(cfg: &DephasingConfig, seed: u64, art: &mut ArtifactSet) -> Result<()> {
    let mut jobs = Vec::new();
    for case in &cfg.cases {
        for &t in &cfg.t_grid {
            jobs.push((case.spectrum, case.echo, t));
        }
    }
    let total = jobs.len();
    let done = AtomicUsize::new(0);

    let rows: Vec<DephasingPoint> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(i, (spectrum, echo, t))| {
            let shot_cfg = ShotNoiseConfig {
                spectrum,
                echo,
                alpha_sq: cfg.alpha_sq,
                t,
                n_traj: cfg.n_traj,
                n_steps: cfg.n_steps,
                n_records: cfg.n_records,
                seed: point_seed(seed, i as u64),
            };
            let est = cat_dephasing_monte_carlo(&shot_cfg)?;
            let formula =
                cat_dephasing_closed_form(spectrum, echo, cfg.alpha_sq, t, est.omega_ir)?;
            let z = if est.std_err > 0.0 {
                (est.gamma_phi - formula) / est.std_err
            } else {
                f64::NAN
            };
            let (name, a) = spectrum_parts(spectrum);
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "dephasing [{n}/{total}] {name} echo={echo} t={t}: \
                 mc={:.4e} formula={formula:.4e} z={z:+.2}",
                est.gamma_phi
            );
            Ok::<_, CliError>(DephasingPoint {
                spectrum: name.to_string(),
                echo,
                a,
                alpha_sq: cfg.alpha_sq,
                t,
                n_traj: cfg.n_traj,
                n_steps: cfg.n_steps,
                n_records: cfg.n_records,
                seed: shot_cfg.seed,
                gamma_mc: est.gamma_phi,
                std_err: est.std_err,
                gamma_formula: formula,
                z,
            })
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(&[
        "spectrum",
        "echo",
        "a",
        "alpha_sq",
        "t",
        "n_traj",
        "gamma_mc",
        "std_err",
        "gamma_formula",
        "z",
    ]);
    for r in &rows {
        table.push(vec![
            r.spectrum.clone(),
            cell(r.echo),
            num(r.a),
            num(r.alpha_sq),
            num(r.t),
            cell(r.n_traj),
            num(r.gamma_mc),
            num(r.std_err),
            num(r.gamma_formula),
            num(r.z),
        ]);
    }
    art.write_string("dephasing.csv", &table.to_csv())?;
    art.write_json("dephasing.json", &rows)?;
    Ok(())
}

/// Duty-cycled stabilization study: bit-flip growth curves and power-law
/// exponents over a grid of dissipation strengths and duty cycles.
pub fn stabilization(cfg: &StabilizationConfig, art: &mut ArtifactSet) -> Result<()> {
    let alpha = c64(cfg.alpha_sq.sqrt(), 0.0);
    let period = cfg.period / cfg.kappa1;

    let fits: Vec<PulsingFit> = match (&cfg.kappa_ratios, &cfg.duties) {
        (None, None) => pulsing_grid(alpha, cfg.kappa1, period, cfg.n_rounds)?,
        (ratios, duties) => {
            let ratios = ratios.clone().unwrap_or_else(|| GRID_KAPPA_RATIOS.to_vec());
            let duties = duties.clone().unwrap_or_else(|| GRID_DUTIES.to_vec());
            let mut points = Vec::new();
            for &ratio in &ratios {
                for &duty in &duties {
                    points.push((ratio, duty));
                }
            }
            let total = points.len();
            let done = AtomicUsize::new(0);
            points
                .into_par_iter()
                .map(|(ratio, duty)| {
                    let config = PulsingConfig {
                        alpha,
                        kappa1: cfg.kappa1,
                        kappa2_over_kappa1: ratio / cfg.alpha_sq,
                        duty,
                        period,
                        n_rounds: cfg.n_rounds,
                    };
                    let samples = bitflip_curve(&config)?;
                    let fit = PulsingFit {
                        kappa_ratio: ratio,
                        duty,
                        exponent: powerlaw_exponent(&samples)?,
                        well_stabilized: well_stabilized(&config),
                        samples,
                    };
                    let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                    eprintln!(
                        "stabilization [{n}/{total}] ratio={ratio} duty={duty}: \
                         exponent {:.3}",
                        fit.exponent
                    );
                    Ok::<_, CliError>(fit)
                })
                .collect::<Result<_>>()?
        }
    };

    let mut curves = Table::new(&["kappa_ratio", "duty", "t", "p_x"]);
    for (ratio, duty, t, p_x) in curve_rows(&fits) {
        curves.push(vec![num(ratio), num(duty), num(t), num(p_x)]);
    }
    art.write_string("stabilization.csv", &curves.to_csv())?;

    let mut summary =
        Table::new(&["kappa_ratio", "duty", "product", "exponent", "well_stabilized"]);
    for fit in &fits {
        summary.push(vec![
            num(fit.kappa_ratio),
            num(fit.duty),
            num(fit.kappa_ratio * fit.duty),
            num(fit.exponent),
            cell(fit.well_stabilized),
        ]);
    }
    art.write_string("stabilization_fits.csv", &summary.to_csv())?;
    art.write_json("stabilization.json", &fits)?;
    Ok(())
}
