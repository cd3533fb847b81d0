//! Pulsed dissipative stabilization of a cat qubit.
//!
//! The engineered two-photon dissipation `κ₂ D[a² − α²]` confines the
//! oscillator to the cat manifold, exponentially suppressing bit flips
//! (population transfer between the `|±α⟩` wells). When the dissipation is
//! time-shared — on for a fraction `T_on/T` of each round — confinement
//! competes with single-photon loss, which deterministically shrinks the
//! blobs toward the origin while it is off.
//!
//! This module studies that competition in the minimal `κ₁`-only noise
//! model: starting from a codeword, the cumulative bit-flip probability
//! `p_X(t)` is sampled at round boundaries (after ideal recovery) and fit
//! to a power law. A well-stabilized cat shows linear growth (a constant
//! tunneling rate per round); an under-stabilized one shows superlinear
//! growth as the blobs merge. The operating criterion is the dimensionless
//! product `(κ₂|α|²/κ₁)·(T_on/T) ≥ 25`.

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_density, PropagationOptions, Schedule};
use crate::error::{Error, Result};
use crate::gates::storage_recovery;
use crate::hilbert;
use crate::linalg::{c64, C64, DenseOperator};

/// Integration tolerance for the stabilization curves (`p_X` can reach
/// `~1e-5` in the strongly stabilized regime).
const CURVE_TOL: f64 = 1e-10;

/// One duty-cycled stabilization run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PulsingConfig {
    /// Cat amplitude.
    pub alpha: C64,
    /// Single-photon loss rate (always on); sets the absolute time scale.
    pub kappa1: f64,
    /// Engineered dissipation strength relative to the loss, `κ₂/κ₁`.
    pub kappa2_over_kappa1: f64,
    /// Fraction of each round with the dissipation on, `T_on/T ∈ (0, 1]`.
    pub duty: f64,
    /// Round period `T`.
    pub period: f64,
    /// Number of rounds simulated (`≥ 2`); `p_X` is sampled after each.
    pub n_rounds: usize,
}

impl PulsingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duty > 0.0 && self.duty <= 1.0) {
            return Err(Error::Config(format!("duty must lie in (0, 1], got {}", self.duty)));
        }
        if self.n_rounds < 2 {
            return Err(Error::Config(format!("need at least 2 rounds, got {}", self.n_rounds)));
        }
        if !(self.period > 0.0) {
            return Err(Error::Config(format!("round period must be positive, got {}", self.period)));
        }
        if !(self.kappa1 > 0.0) {
            return Err(Error::NegativeRate(format!("kappa1 = {}", self.kappa1)));
        }
        if self.kappa2_over_kappa1 < 0.0 {
            return Err(Error::NegativeRate(format!(
                "kappa2_over_kappa1 = {}",
                self.kappa2_over_kappa1
            )));
        }
        Ok(())
    }

    /// The dimensionless stabilization strength `(κ₂|α|²/κ₁)·(T_on/T)`.
    pub fn stabilization_product(&self) -> f64 {
        self.kappa2_over_kappa1 * self.alpha.norm_sqr() * self.duty
    }
}

/// Whether the configuration satisfies the well-stabilized criterion
/// `(κ₂|α|²/κ₁)·(T_on/T) ≥ 25`.
pub fn well_stabilized(config: &PulsingConfig) -> bool {
    config.stabilization_product() >= 25.0
}

/// Oscillator annihilation operator.
fn lowering(dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, |i, j| {
        if j == i + 1 { c64((j as f64).sqrt(), 0.0) } else { c64(0.0, 0.0) }
    })
}

/// Cumulative bit-flip probability at the round boundaries `t = kT`.
///
/// The oscillator starts in the codeword `|0_C⟩ ≈ |α⟩` and evolves under
/// single-photon loss with the two-photon dissipation alternating on
/// (`T_on = duty·T`) and off each round. At every boundary the state is
/// passed through the ideal recovery map and the population of the flipped
/// codeword `|1_C⟩` is read off the logical density matrix — the same
/// code-space convention used by the gate channel extraction.
pub fn bitflip_curve(config: &PulsingConfig) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    let nbar = config.alpha.norm_sqr();
    let cutoff = hilbert::fock_cutoff(nbar);
    let kappa2 = config.kappa2_over_kappa1 * config.kappa1;

    let a = lowering(cutoff).scale(c64(config.kappa1.sqrt(), 0.0));
    let mut on_ops = vec![a.clone()];
    if kappa2 > 0.0 {
        let a_bare = lowering(cutoff);
        let mut two_photon = a_bare.mul(&a_bare);
        two_photon.axpy(-config.alpha * config.alpha, &DenseOperator::identity(cutoff));
        on_ops.push(two_photon.scale(c64(kappa2.sqrt(), 0.0)));
    }
    let off_ops = vec![a];

    let word0 = hilbert::cat_codeword(config.alpha, 0, cutoff, 1e-9)?;
    let word1 = hilbert::cat_codeword(config.alpha, 1, cutoff, 1e-9)?;
    let mut rho = DenseOperator::outer(&word0, &word0);
    let recovery = storage_recovery(config.alpha, cutoff)?;
    let schedule = Schedule::none();
    let opts = PropagationOptions { tol: CURVE_TOL, ..Default::default() };

    let t_on = config.duty * config.period;
    let t_off = config.period - t_on;
    let flipped_population = |rho: &DenseOperator, word: &Array1<C64>| -> f64 {
        let recovered = recovery.apply(rho, 1);
        recovered.apply_vec(word).iter().zip(word.iter()).map(|(a, b)| (b.conj() * a).re).sum()
    };

    let mut samples = Vec::with_capacity(config.n_rounds);
    for round in 1..=config.n_rounds {
        rho = propagate_density(&schedule, &on_ops, &rho, t_on, &opts)?.state;
        if t_off > 0.0 {
            rho = propagate_density(&schedule, &off_ops, &rho, t_off, &opts)?.state;
        }
        samples.push((round as f64 * config.period, flipped_population(&rho, &word1)));
    }
    Ok(samples)
}

/// Least-squares power-law exponent of `(t, p)` samples in log-log space.
/// Needs at least five strictly positive samples.
pub fn powerlaw_exponent(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs ≥ 5 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(t, p)| t <= 0.0 || p <= 0.0) {
        return Err(Error::InsufficientData(
            "power-law fit needs strictly positive times and probabilities".into(),
        ));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, p) in samples {
        let (x, y) = (t.ln(), p.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::InsufficientData("all sample times coincide".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Fit summary of one grid point of the stabilization study.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PulsingFit {
    /// `κ₂|α|²/κ₁` for this run.
    pub kappa_ratio: f64,
    pub duty: f64,
    pub exponent: f64,
    pub well_stabilized: bool,
    /// `(t, p_X)` samples the exponent was fit to.
    pub samples: Vec<(f64, f64)>,
}

/// Standard grid axes of the desk-scale stabilization study.
pub const GRID_KAPPA_RATIOS: [f64; 3] = [5.0, 25.0, 125.0];
pub const GRID_DUTIES: [f64; 3] = [0.1, 0.3, 1.0];

/// Run the 3×3 stabilization grid `κ₂|α|²/κ₁ ∈ {5, 25, 125}` ×
/// `duty ∈ {0.1, 0.3, 1.0}` at the given cat size. Points run in parallel;
/// the returned order is row-major over (ratio, duty) regardless of thread
/// count.
pub fn pulsing_grid(
    alpha: C64,
    kappa1: f64,
    period: f64,
    n_rounds: usize,
) -> Result<Vec<PulsingFit>> {
    let nbar = alpha.norm_sqr();
    let mut points = Vec::new();
    for &ratio in GRID_KAPPA_RATIOS.iter() {
        for &duty in GRID_DUTIES.iter() {
            points.push((ratio, duty));
        }
    }
    points
        .into_par_iter()
        .map(|(ratio, duty)| {
            let config = PulsingConfig {
                alpha,
                kappa1,
                kappa2_over_kappa1: ratio / nbar,
                duty,
                period,
                n_rounds,
            };
            let samples = bitflip_curve(&config)?;
            Ok(PulsingFit {
                kappa_ratio: ratio,
                duty,
                exponent: powerlaw_exponent(&samples)?,
                well_stabilized: well_stabilized(&config),
                samples,
            })
        })
        .collect()
}

/// Flatten grid fits to `(kappa_ratio, duty, t, p_X)` rows for CSV export.
pub fn curve_rows(fits: &[PulsingFit]) -> Vec<(f64, f64, f64, f64)> {
    let mut rows = Vec::new();
    for fit in fits {
        for &(t, p) in &fit.samples {
            rows.push((fit.kappa_ratio, fit.duty, t, p));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> PulsingConfig {
        PulsingConfig {
            alpha: c64(3.0f64.sqrt(), 0.0),
            kappa1: 1.0,
            kappa2_over_kappa1: 125.0 / 3.0,
            duty: 1.0,
            period: 0.125,
            n_rounds: 8,
        }
    }

    #[test]
    fn powerlaw_exponent_recovers_known_laws() {
        let linear: Vec<(f64, f64)> = (1..=8).map(|k| (k as f64, 3.0 * k as f64)).collect();
        assert!((powerlaw_exponent(&linear).unwrap() - 1.0).abs() < 1e-12);
        let quadratic: Vec<(f64, f64)> =
            (1..=8).map(|k| (k as f64, 0.5 * (k as f64).powi(2))).collect();
        assert!((powerlaw_exponent(&quadratic).unwrap() - 2.0).abs() < 1e-12);
        // ±5% deterministic multiplicative noise on a t^1.5 law.
        let noisy: Vec<(f64, f64)> = (1..=10)
            .map(|k| {
                let t = k as f64;
                let wiggle = 1.0 + 0.05 * ((k * 7 % 5) as f64 - 2.0) / 2.0;
                (t, t.powf(1.5) * wiggle)
            })
            .collect();
        let exp = powerlaw_exponent(&noisy).unwrap();
        assert!((exp - 1.5).abs() < 0.1, "noisy fit gave {exp}");
    }

    #[test]
    fn powerlaw_exponent_rejects_bad_input() {
        let short: Vec<(f64, f64)> = (1..=4).map(|k| (k as f64, k as f64)).collect();
        assert!(matches!(powerlaw_exponent(&short), Err(Error::InsufficientData(_))));
        let with_zero = vec![(1.0, 1.0), (2.0, 2.0), (3.0, 0.0), (4.0, 4.0), (5.0, 5.0)];
        assert!(matches!(powerlaw_exponent(&with_zero), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn well_stabilized_threshold_cases() {
        let mut cfg = base_config();
        // Product exactly 25 counts as stabilized.
        cfg.kappa2_over_kappa1 = 125.0 / cfg.alpha.norm_sqr();
        cfg.duty = 0.2;
        assert!(well_stabilized(&cfg));
        cfg.kappa2_over_kappa1 = 24.0 / cfg.alpha.norm_sqr();
        cfg.duty = 1.0;
        assert!(!well_stabilized(&cfg));
        // Zero dissipation can never be stabilized.
        cfg.kappa2_over_kappa1 = 0.0;
        assert!(!well_stabilized(&cfg));
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut cfg = base_config();
        cfg.duty = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = base_config();
        cfg.duty = 1.5;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = base_config();
        cfg.n_rounds = 1;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = base_config();
        cfg.kappa2_over_kappa1 = -1.0;
        assert!(matches!(cfg.validate(), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn strong_continuous_dissipation_gives_linear_growth() {
        let samples = bitflip_curve(&base_config()).unwrap();
        let exp = powerlaw_exponent(&samples).unwrap();
        assert!((exp - 1.0).abs() < 0.15, "stabilized exponent {exp}");
    }

    #[test]
    fn no_dissipation_gives_superlinear_growth() {
        let mut cfg = base_config();
        cfg.kappa2_over_kappa1 = 0.0;
        let samples = bitflip_curve(&cfg).unwrap();
        let exp = powerlaw_exponent(&samples).unwrap();
        assert!(exp > 1.5, "unstabilized exponent {exp}");
    }

    #[test]
    fn doubling_loss_doubles_the_linear_rate() {
        // With κ₂/κ₁ fixed, doubling κ₁ rescales time: the p_X(t) slope in
        // the linear regime doubles.
        let cfg = base_config();
        let mut fast = cfg;
        fast.kappa1 = 2.0;
        let slope = |samples: &[(f64, f64)]| -> f64 {
            // Least squares through the origin.
            let num: f64 = samples.iter().map(|&(t, p)| t * p).sum();
            let den: f64 = samples.iter().map(|&(t, _)| t * t).sum();
            num / den
        };
        let s1 = slope(&bitflip_curve(&cfg).unwrap());
        let s2 = slope(&bitflip_curve(&fast).unwrap());
        let ratio = s2 / s1;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "slope ratio {ratio}");
    }

    #[test]
    fn grid_exponents_separate_stabilized_from_unstabilized() {
        let fits = pulsing_grid(c64(3.0f64.sqrt(), 0.0), 1.0, 0.125, 8).unwrap();
        assert_eq!(fits.len(), 9);
        for fit in &fits {
            let product = fit.kappa_ratio * fit.duty;
            if fit.well_stabilized {
                assert!(product >= 25.0);
                assert!(
                    (fit.exponent - 1.0).abs() < 0.15,
                    "ratio {} duty {}: exponent {}",
                    fit.kappa_ratio,
                    fit.duty,
                    fit.exponent
                );
            }
            if product <= 5.0 {
                assert!(
                    fit.exponent > 1.3,
                    "ratio {} duty {}: exponent {}",
                    fit.kappa_ratio,
                    fit.duty,
                    fit.exponent
                );
            }
        }
        // CSV flattening covers every sample of every fit.
        let rows = curve_rows(&fits);
        assert_eq!(rows.len(), 9 * 8);
    }
}
