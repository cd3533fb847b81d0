//! Cat-qubit dephasing induced by classical shot noise on the detuning.
//!
//! A fluctuating oscillator detuning `y(t) n̂` dephases a cat of size
//! `|α|²` at a rate amplified by the photon number: for the accumulated
//! phase `W = ∫₀ᵗ y(s) f(s) ds` (with `f = ±1` the echo envelope),
//!
//! `Γ_φ(t) = 16 |α|⁴ Γ₁(t)`, with `Γ₁(t) = <W²> / 2`.
//!
//! # Spectra and closed forms
//!
//! Spectral densities are two-sided in angular frequency, normalized so
//! `<W²> = ∫ S(ω) F(ω)/ω² dω / 2π` over the whole real line, with filter
//! `F(ω) = 4 sin²(ωt/2)` (free) or `16 sin⁴(ωt/4)` (echo).
//!
//! * White noise, `S(ω) = A²`:     `Γ₁ = A² t / 2` (echo has no effect).
//! * 1/f noise, `S(ω) = 2π A²/|ω|`:
//!   - free:  `Γ₁ = (A t)² ln( e^{3/2 - γ_E} / (ω_ir t) )`, valid while the
//!     log argument exceeds 1 (infrared cutoff `ω_ir`);
//!   - echo:  `Γ₁ = (A t)² ln 2` (infrared-convergent).
//!
//! For white noise the amplitude that reproduces a plain dephasing rate
//! `κ_φ` (i.e. `Γ₁(t) = κ_φ t`) is `A = √(2 κ_φ)`.
//!
//! # Monte Carlo
//!
//! 1/f realizations are synthesized spectrally: a long record of
//! `n_traj * n_steps` samples is generated by inverse FFT of
//! `√(N S(ω_k)/dt) ξ_k` with the DC bin zeroed, then chopped into
//! `n_traj` windows. The zeroed DC bin makes the generated infrared
//! cutoff `ω_ir = 2π / (n_traj · t)` — exactly the value that must be fed
//! to the free-evolution closed form for comparison. Because every window
//! of one record shares the same draw of the lowest-frequency bins (which
//! dominate free evolution), `n_records` independent records are averaged;
//! `ω_ir` is a per-record property and does not change with `n_records`.
//!
//! The discrete spectrum also converges only logarithmically to the
//! continuum closed form: the bin sum exceeds the integral by
//! `≈ γ_E / ln(e^{3/2-γ_E}/(ω_ir t))` relative for free evolution.
//! [`w2_discrete_expectation`] provides the exact finite-`N` expectation
//! of the sampler for tight comparisons.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Euler–Mascheroni constant.
const GAMMA_E: f64 = 0.577_215_664_901_532_9;

/// Noise spectrum selection with its amplitude `A`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Spectrum {
    /// `S(ω) = A²` (delta-correlated).
    White { a: f64 },
    /// `S(ω) = 2π A² / |ω|`.
    OneOverF { a: f64 },
}

/// White-noise amplitude reproducing dephasing rate `κ_φ`.
pub fn white_amplitude(kappa_phi: f64) -> f64 {
    (2.0 * kappa_phi).sqrt()
}

/// Closed-form `Γ₁(t) = <W²>/2` for the supported spectra.
///
/// `omega_ir` is the infrared cutoff (needed only for free-evolution 1/f).
pub fn gamma1_closed_form(spectrum: Spectrum, echo: bool, t: f64, omega_ir: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::DomainError(format!("time must be positive, got {t}")));
    }
    match spectrum {
        Spectrum::White { a } => Ok(a * a * t / 2.0),
        Spectrum::OneOverF { a } => {
            let at2 = (a * t) * (a * t);
            if echo {
                Ok(at2 * std::f64::consts::LN_2)
            } else {
                if omega_ir <= 0.0 {
                    return Err(Error::DomainError(
                        "1/f free evolution needs a positive infrared cutoff".into(),
                    ));
                }
                let arg = (1.5 - GAMMA_E).exp() / (omega_ir * t);
                if arg <= 1.0 {
                    return Err(Error::DomainError(format!(
                        "1/f log argument {arg:.3e} <= 1; evolution time beyond \
                         the infrared-cutoff regime"
                    )));
                }
                Ok(at2 * arg.ln())
            }
        }
    }
}

/// Closed-form cat dephasing exponent `Γ_φ(t) = 16 |α|⁴ Γ₁(t)`.
pub fn cat_dephasing_closed_form(
    spectrum: Spectrum,
    echo: bool,
    alpha_sq: f64,
    t: f64,
    omega_ir: f64,
) -> Result<f64> {
    Ok(16.0 * alpha_sq * alpha_sq * gamma1_closed_form(spectrum, echo, t, omega_ir)?)
}

/// Configuration for the trajectory estimate.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ShotNoiseConfig {
    pub spectrum: Spectrum,
    pub echo: bool,
    /// Cat size |α|².
    pub alpha_sq: f64,
    /// Evolution time per trajectory.
    pub t: f64,
    /// Number of trajectories (windows of one long record).
    pub n_traj: usize,
    /// Time samples per trajectory.
    pub n_steps: usize,
    /// Independent long records to average over (the infrared cutoff is set
    /// by `n_traj` alone). Matters for 1/f free evolution, where windows of
    /// a single record share its lowest-frequency bins.
    #[serde(default = "default_n_records")]
    pub n_records: usize,
    pub seed: u64,
}

fn default_n_records() -> usize {
    1
}

/// Monte-Carlo estimate of the dephasing exponent.
#[derive(Clone, Copy, Debug)]
pub struct DephasingEstimate {
    /// `16 |α|⁴ <W²>/2`.
    pub gamma_phi: f64,
    /// Standard error of `gamma_phi` treating all windows as independent;
    /// optimistic for 1/f within a record, so average several records.
    pub std_err: f64,
    /// Raw second moment `<W²>`.
    pub w2_mean: f64,
    /// Infrared cutoff of the generated record (`2π / (n_traj · t)`).
    pub omega_ir: f64,
}

/// Estimate `Γ_φ(t)` by sampling phase trajectories of the configured
/// spectrum. Deterministic in `cfg.seed`.
pub fn cat_dephasing_monte_carlo(cfg: &ShotNoiseConfig) -> Result<DephasingEstimate> {
    if cfg.n_traj < 2 || cfg.n_steps < 8 || cfg.n_records < 1 {
        return Err(Error::InsufficientData(
            "need at least 2 trajectories, 8 steps, and 1 record".into(),
        ));
    }
    if cfg.t <= 0.0 {
        return Err(Error::DomainError("trajectory time must be positive".into()));
    }
    let dt = cfg.t / cfg.n_steps as f64;
    let rng = CounterRng::new(cfg.seed);

    // Echo envelope: +1 first half, -1 second half.
    let sign = |j: usize| -> f64 {
        if cfg.echo && j >= cfg.n_steps / 2 {
            -1.0
        } else {
            1.0
        }
    };

    let mut w_samples = Vec::with_capacity(cfg.n_records * cfg.n_traj);
    match cfg.spectrum {
        Spectrum::White { a } => {
            // Independent bins of variance A²/dt reproduce <W²> = A² t.
            let sd = a / dt.sqrt();
            for traj in 0..cfg.n_records * cfg.n_traj {
                let mut w = 0.0;
                for j in 0..cfg.n_steps {
                    let g = rng.gaussian(traj as u64, j as u64);
                    w += sd * g * sign(j) * dt;
                }
                w_samples.push(w);
            }
        }
        Spectrum::OneOverF { a } => {
            // Per record: synthesize, inverse-transform, chop into windows.
            // Windows inherit correlations down to ω_ir = 2π / T_record.
            let n_total = cfg.n_traj * cfg.n_steps;
            let t_total = n_total as f64 * dt;
            let fft = FftPlanner::new().plan_fft_inverse(n_total);
            for record in 0..cfg.n_records {
                let mut spec = vec![Complex64::new(0.0, 0.0); n_total];
                // Hermitian spectrum: y real. Bin k has ω_k = 2πk/(N dt).
                for k in 1..=n_total / 2 {
                    let omega = 2.0 * std::f64::consts::PI * k as f64 / t_total;
                    let s = 2.0 * std::f64::consts::PI * a * a / omega;
                    // <|Z_k|²> = N S(ω_k)/dt split over real/imag parts.
                    let amp = (n_total as f64 * s / dt).sqrt();
                    let (g1, g2) = rng.gaussian_pair(0xF0F0_0000 + record as u64, k as u64);
                    let z = Complex64::new(g1, g2) * amp / 2f64.sqrt();
                    spec[k] = z;
                    if k != n_total - k {
                        spec[n_total - k] = z.conj();
                    } else {
                        // Nyquist bin must be real.
                        spec[k] = Complex64::new(g1 * amp, 0.0);
                    }
                }
                let mut buf = spec;
                fft.process(&mut buf);
                // rustfft is unnormalized: divide by N for the inverse transform.
                for traj in 0..cfg.n_traj {
                    let base = traj * cfg.n_steps;
                    let mut w = 0.0;
                    for j in 0..cfg.n_steps {
                        w += buf[base + j].re / n_total as f64 * sign(j) * dt;
                    }
                    w_samples.push(w);
                }
            }
        }
    }

    let n = w_samples.len() as f64;
    let w2_mean = w_samples.iter().map(|w| w * w).sum::<f64>() / n;
    let w4_mean = w_samples.iter().map(|w| w.powi(4)).sum::<f64>() / n;
    let var_w2 = (w4_mean - w2_mean * w2_mean).max(0.0) / n;
    let pre = 16.0 * cfg.alpha_sq * cfg.alpha_sq / 2.0;
    Ok(DephasingEstimate {
        gamma_phi: pre * w2_mean,
        std_err: pre * var_w2.sqrt(),
        w2_mean,
        omega_ir: 2.0 * std::f64::consts::PI / (cfg.n_traj as f64 * cfg.t),
    })
}

/// Exact expectation `<W²>` of the spectral sampler at finite resolution:
/// the bin sum `(N dt)⁻¹ Σ_k S(ω_k) |F̃(ω_k)|²` with the same Riemann-sum
/// window filter the trajectories use. Converges to the continuum closed
/// form only logarithmically for free 1/f evolution, so tight Monte-Carlo
/// checks should compare against this.
pub fn w2_discrete_expectation(cfg: &ShotNoiseConfig) -> f64 {
    let n_total = cfg.n_traj * cfg.n_steps;
    let m = cfg.n_steps;
    let dt = cfg.t / m as f64;
    let mut sum = 0.0;
    for k in 1..n_total {
        // Physical (aliased) frequency of bin k is the smaller of ω_k and
        // ω_{N-k}; the spectrum is symmetric.
        let k_eff = k.min(n_total - k);
        let omega = 2.0 * std::f64::consts::PI * k_eff as f64 / (n_total as f64 * dt);
        let s = match cfg.spectrum {
            Spectrum::White { a } => a * a,
            Spectrum::OneOverF { a } => 2.0 * std::f64::consts::PI * a * a / omega,
        };
        // F̃ = dt Σ_j f_j z^j with z = e^{2πik/N}; geometric series.
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_total as f64;
        let z = Complex64::new(theta.cos(), theta.sin());
        let geom = |p: usize| -> Complex64 {
            // Σ_{j=0}^{p-1} z^j = (z^p - 1)/(z - 1), z ≠ 1 for 0 < k < N.
            let zp = Complex64::new((theta * p as f64).cos(), (theta * p as f64).sin());
            (zp - 1.0) / (z - 1.0)
        };
        let f_tilde = if cfg.echo {
            let h = m / 2;
            let zh = Complex64::new((theta * h as f64).cos(), (theta * h as f64).sin());
            geom(h) * (Complex64::new(1.0, 0.0) - zh)
        } else {
            geom(m)
        } * dt;
        sum += s * f_tilde.norm_sqr();
    }
    sum / (n_total as f64 * dt)
}

/// Numerical check of the spectral representation: integrate
/// `S(ω) F(ω)/ω² dω/2π` over the real line by adaptive Simpson quadrature
/// and return `<W²>`. Used by tests to tie the closed forms to the filter
/// function; exposed for diagnostics.
pub fn w2_by_quadrature(spectrum: Spectrum, echo: bool, t: f64, omega_ir: f64) -> f64 {
    let filter = |omega: f64| -> f64 {
        if echo {
            let s = (omega * t / 4.0).sin();
            16.0 * s * s * s * s
        } else {
            let s = (omega * t / 2.0).sin();
            4.0 * s * s
        }
    };
    let integrand = |omega: f64| -> f64 {
        let s = match spectrum {
            Spectrum::White { a } => a * a,
            Spectrum::OneOverF { a } => 2.0 * std::f64::consts::PI * a * a / omega.abs(),
        };
        s * filter(omega) / (omega * omega)
    };
    // Even integrand: 2 ∫_{ω_ir}^{ω_max}. Log-spaced Simpson panels resolve
    // both the infrared ramp and the oscillations.
    let omega_max = 2000.0 / t;
    let n_dec = ((omega_max / omega_ir).log10().ceil() as usize).max(1);
    let panels_per_dec = 4000;
    let mut total = 0.0;
    for d in 0..n_dec {
        let lo = omega_ir * 10f64.powi(d as i32);
        let hi = (lo * 10.0).min(omega_max);
        if lo >= omega_max {
            break;
        }
        let h = (hi / lo).powf(1.0 / panels_per_dec as f64);
        let mut x0 = lo;
        for _ in 0..panels_per_dec {
            let x1 = x0 * h;
            let xm = (x0 * x1).sqrt();
            let width = x1 - x0;
            total += width / 6.0 * (integrand(x0) + 4.0 * integrand(xm) + integrand(x1));
            x0 = x1;
        }
    }
    2.0 * total / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_quadrature_matches_closed_form() {
        let a = 0.7;
        let t = 3.0;
        let w2 = w2_by_quadrature(Spectrum::White { a }, false, t, 1e-7 / t);
        let want = a * a * t; // Γ₁ = A²t/2 => <W²> = A²t
        assert!((w2 / want - 1.0).abs() < 1e-3, "{w2} vs {want}");
    }

    #[test]
    fn one_over_f_free_quadrature_matches_closed_form() {
        let a = 0.05;
        let t = 2.0;
        let omega_ir = 1e-4 / t;
        let w2 = w2_by_quadrature(Spectrum::OneOverF { a }, false, t, omega_ir);
        let want = 2.0 * gamma1_closed_form(Spectrum::OneOverF { a }, false, t, omega_ir).unwrap();
        assert!((w2 / want - 1.0).abs() < 2e-3, "{w2} vs {want}");
    }

    #[test]
    fn one_over_f_echo_quadrature_matches_ln2() {
        let a = 0.05;
        let t = 2.0;
        let w2 = w2_by_quadrature(Spectrum::OneOverF { a }, true, t, 1e-9);
        let want = 2.0 * (a * t) * (a * t) * std::f64::consts::LN_2;
        assert!((w2 / want - 1.0).abs() < 5e-3, "{w2} vs {want}");
    }

    #[test]
    fn white_monte_carlo_matches() {
        let cfg = ShotNoiseConfig {
            spectrum: Spectrum::White { a: white_amplitude(0.3) },
            echo: false,
            alpha_sq: 2.0,
            t: 1.7,
            n_traj: 4000,
            n_steps: 64,
            n_records: 1,
            seed: 12,
        };
        let est = cat_dephasing_monte_carlo(&cfg).unwrap();
        let want = cat_dephasing_closed_form(cfg.spectrum, false, 2.0, 1.7, est.omega_ir).unwrap();
        assert!(
            (est.gamma_phi / want - 1.0).abs() < 0.05,
            "got {} want {} (± {})",
            est.gamma_phi,
            want,
            est.std_err
        );
    }

    #[test]
    fn one_over_f_monte_carlo_free_and_echo() {
        let a = 0.08;
        let base = ShotNoiseConfig {
            spectrum: Spectrum::OneOverF { a },
            echo: false,
            alpha_sq: 4.0,
            t: 1.0,
            n_traj: 3000,
            n_steps: 128,
            n_records: 16,
            seed: 77,
        };
        let est = cat_dephasing_monte_carlo(&base).unwrap();
        let pre = 16.0 * base.alpha_sq * base.alpha_sq / 2.0;
        // Tight check against the sampler's exact finite-N expectation.
        let discrete = pre * w2_discrete_expectation(&base);
        assert!(
            (est.gamma_phi / discrete - 1.0).abs() < 0.05,
            "free vs discrete: got {} want {}",
            est.gamma_phi,
            discrete
        );
        // The asymptotic closed form trails the discrete sum by roughly
        // γ_E/ln(e^{3/2-γ_E}/(ω_ir t)) ≈ 8% here; converges like 1/ln.
        let want =
            cat_dephasing_closed_form(base.spectrum, false, 4.0, 1.0, est.omega_ir).unwrap();
        assert!(
            (est.gamma_phi / want - 1.0).abs() < 0.20,
            "free vs closed form: got {} want {}",
            est.gamma_phi,
            want
        );
        assert!(
            (discrete / want - 1.0).abs() < 0.15,
            "discrete {} vs closed form {}",
            discrete,
            want
        );

        let echo_cfg = ShotNoiseConfig { echo: true, n_records: 4, ..base };
        let est_echo = cat_dephasing_monte_carlo(&echo_cfg).unwrap();
        let want_echo =
            cat_dephasing_closed_form(echo_cfg.spectrum, true, 4.0, 1.0, est_echo.omega_ir)
                .unwrap();
        assert!(
            (est_echo.gamma_phi / want_echo - 1.0).abs() < 0.10,
            "echo: got {} want {}",
            est_echo.gamma_phi,
            want_echo
        );
        // Echo must strongly suppress 1/f dephasing.
        assert!(est_echo.gamma_phi < 0.5 * est.gamma_phi);
    }

    #[test]
    fn domain_error_when_log_argument_invalid() {
        let r = gamma1_closed_form(Spectrum::OneOverF { a: 0.1 }, false, 10.0, 1.0);
        assert!(matches!(r, Err(Error::DomainError(_))));
    }

    #[test]
    fn scaling_with_alpha_is_quartic() {
        let g2 = cat_dephasing_closed_form(Spectrum::White { a: 0.2 }, false, 2.0, 1.0, 0.0)
            .unwrap();
        let g4 = cat_dephasing_closed_form(Spectrum::White { a: 0.2 }, false, 4.0, 1.0, 0.0)
            .unwrap();
        assert!((g4 / g2 - 4.0).abs() < 1e-12);
    }
}
