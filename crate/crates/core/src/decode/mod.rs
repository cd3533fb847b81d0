//! Sampling and decoding of stabilizer memory experiments.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`sample`] runs the Pauli-frame Monte Carlo over a compiled
//!    [`StabilizerCircuit`](crate::code::StabilizerCircuit) and returns a
//!    bit-packed [`ShotBatch`] of detector events and logical-observable
//!    flips. Shots are pure functions of `(circuit, seed, shot index)`.
//! 2. [`build_dem`] propagates every possible single fault through the
//!    circuit and collects the resulting [`DetectorErrorModel`]: which
//!    detectors each fault fires, which observables it flips, and the
//!    fault's probability (XOR-merged across faults with identical
//!    signatures).
//! 3. [`Decoder`] turns the error model into per-class matching graphs and
//!    decodes shots by minimum-weight perfect matching (exact blossom with
//!    boundary twins; direct enumeration for small defect sets; a flagged
//!    greedy fallback above [`Decoder::GREEDY_LIMIT`] defects).
//! 4. [`logical_error_rate`] ties the stages together and reports a Wilson
//!    confidence interval; [`enumerated_logical_rate`] cross-checks small
//!    instances by exhaustive low-order fault enumeration with an explicit
//!    unexplored-mass bound.

pub mod batch;
pub mod blossom;
pub mod dem;
pub mod frame;
pub mod matching;

pub use batch::{BitMatrix, ShotBatch};
pub use dem::{build_dem, sample_dem, DemEdge, DemFault, DetectorErrorModel};
pub use frame::{sample, sample_range};
pub use matching::{decode_mwpm, edge_weight, Decoder, MatchingGraph};

use rayon::prelude::*;

use crate::code::StabilizerCircuit;
use crate::error::Result;

/// z-score of the two-sided 95% confidence level.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Wilson 95% confidence interval for a binomial proportion, clamped to
/// [0, 1]. Well-behaved at 0 and n failures, unlike the normal interval.
pub fn wilson_interval(failures: u64, shots: u64) -> (f64, f64) {
    assert!(shots > 0, "Wilson interval needs at least one shot");
    let n = shots as f64;
    let p = failures as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the boundary counts, center == half analytically; make it exact.
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == shots { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Monte-Carlo logical-error estimate with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogicalErrorEstimate {
    pub failures: u64,
    pub shots: u64,
    /// Point estimate `failures / shots`.
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl LogicalErrorEstimate {
    pub fn from_counts(failures: u64, shots: u64) -> LogicalErrorEstimate {
        let (ci_low, ci_high) = wilson_interval(failures, shots);
        LogicalErrorEstimate {
            failures,
            shots,
            rate: failures as f64 / shots as f64,
            ci_low,
            ci_high,
        }
    }
}

/// Count the shots of `batch` where the decoder's predicted observable
/// flips differ from the actual ones (in any observable bit).
pub fn count_failures(decoder: &Decoder, batch: &ShotBatch) -> Result<u64> {
    let n = batch.n_shots();
    let ow = batch.observables.row_words();
    let failures = (0..n)
        .into_par_iter()
        .map(|shot| -> Result<u64> {
            let predicted = decoder.decode_row(batch.detectors.row(shot))?;
            let actual_words = batch.observables.row(shot);
            let actual = if ow > 0 { actual_words[0] as u32 } else { 0 };
            Ok(u64::from(predicted != actual))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(failures)
}

/// Shots per sampling chunk in [`logical_error_rate`]; bounds peak memory
/// at a few MB of packed bits regardless of the requested shot count.
const CHUNK_SHOTS: usize = 1 << 16;

/// End-to-end memory-experiment failure rate: build the error model, train
/// a decoder, sample `n_shots` (chunked), decode, and wrap the failure
/// count in a Wilson interval.
pub fn logical_error_rate(
    circuit: &StabilizerCircuit,
    n_shots: u64,
    seed: u64,
) -> Result<LogicalErrorEstimate> {
    let dem = build_dem(circuit)?;
    let decoder = Decoder::new(&dem)?;
    let mut failures = 0u64;
    let mut done = 0u64;
    while done < n_shots {
        let take = CHUNK_SHOTS.min((n_shots - done) as usize);
        let batch = sample_range(circuit, done, take, seed)?;
        failures += count_failures(&decoder, &batch)?;
        done += take as u64;
    }
    Ok(LogicalErrorEstimate::from_counts(failures, n_shots))
}

/// Result of exhaustive low-order fault enumeration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumeratedRate {
    /// Probability mass of enumerated fault sets the decoder gets wrong.
    pub estimate: f64,
    /// Upper bound on the probability mass *not* enumerated (higher-order
    /// subsets and faults below the probability floor). The true logical
    /// rate lies in `[estimate, estimate + tail]`.
    pub tail: f64,
}

/// Exhaustively decode every subset of at most `max_order` faults (with
/// probability ≥ `min_probability`) from `dem`, accumulating the exact
/// probability that the decoder mispredicts the observables.
///
/// The returned [`EnumeratedRate::tail`] bounds everything skipped: with
/// `P0 = Π (1−p_i)` over all faults and `e_k` the elementary symmetric sums
/// of the included odds `p_i/(1−p_i)`, the enumerated subsets carry mass
/// `P0 · Σ_{k ≤ K} e_k`, and `tail = 1 −` that.
pub fn enumerated_logical_rate(
    dem: &DetectorErrorModel,
    decoder: &Decoder,
    max_order: usize,
    min_probability: f64,
) -> Result<EnumeratedRate> {
    dem.validate()?;
    let included: Vec<&DemFault> = dem
        .faults
        .iter()
        .filter(|f| f.probability >= min_probability)
        .collect();
    // Probabilities are validated into (0, 0.5], so ln(1−p) is total.
    let log_p0: f64 = dem.faults.iter().map(|f| (1.0 - f.probability).ln()).sum();
    let p0 = log_p0.exp();
    let odds: Vec<f64> = included
        .iter()
        .map(|f| f.probability / (1.0 - f.probability))
        .collect();
    // Elementary symmetric sums e_0..e_K of the included odds.
    let mut e = vec![0.0f64; max_order + 1];
    e[0] = 1.0;
    for &r in &odds {
        for k in (1..=max_order).rev() {
            e[k] += e[k - 1] * r;
        }
    }
    let covered: f64 = e.iter().sum::<f64>() * p0;
    let tail = (1.0 - covered).max(0.0);

    let det_words = dem.n_detectors.div_ceil(64).max(1);

    // Depth-first walk over subsets in lexicographic order, carrying the
    // XOR-ed detector mask, observable mask, and probability product.
    struct Walk<'a> {
        included: &'a [&'a DemFault],
        odds: &'a [f64],
        decoder: &'a Decoder,
        max_order: usize,
    }
    impl Walk<'_> {
        fn go(
            &self,
            first: usize,
            depth: usize,
            weight: f64,
            dets: &mut Vec<u64>,
            obs: u32,
            fired: &mut Vec<u32>,
            wrong: &mut f64,
        ) -> Result<()> {
            for i in first..self.included.len() {
                let f = self.included[i];
                let w = weight * self.odds[i];
                for &d in &f.detectors {
                    dets[d as usize / 64] ^= 1u64 << (d % 64);
                }
                // The fired list is rebuilt from the mask at every node (it
                // is clobbered by deeper recursion, which is fine: each
                // iteration refills it before use).
                fired.clear();
                for (wi, &wbits) in dets.iter().enumerate() {
                    let mut rem = wbits;
                    while rem != 0 {
                        fired.push(wi as u32 * 64 + rem.trailing_zeros());
                        rem &= rem - 1;
                    }
                }
                let new_obs = obs ^ f.observables;
                let predicted = self.decoder.decode_detectors(fired)?;
                if predicted != new_obs {
                    *wrong += w;
                }
                if depth + 1 < self.max_order {
                    self.go(i + 1, depth + 1, w, dets, new_obs, fired, wrong)?;
                }
                for &d in &f.detectors {
                    dets[d as usize / 64] ^= 1u64 << (d % 64);
                }
            }
            Ok(())
        }
    }

    if max_order == 0 || included.is_empty() {
        return Ok(EnumeratedRate { estimate: 0.0, tail });
    }

    // Parallelize over the first fault of each subset.
    let walk = Walk { included: &included, odds: &odds, decoder, max_order };
    let wrong: f64 = (0..included.len())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let f = walk.included[i];
            let mut dets = vec![0u64; det_words];
            for &d in &f.detectors {
                dets[d as usize / 64] ^= 1u64 << (d % 64);
            }
            let mut wrong = 0.0;
            let fired: Vec<u32> = f.detectors.clone();
            let predicted = walk.decoder.decode_detectors(&fired)?;
            if predicted != f.observables {
                wrong += walk.odds[i];
            }
            if walk.max_order > 1 {
                let mut scratch = Vec::new();
                walk.go(i + 1, 1, walk.odds[i], &mut dets, f.observables, &mut scratch, &mut wrong)?;
            }
            Ok(wrong)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a + b))?;

    Ok(EnumeratedRate { estimate: p0 * wrong, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{
        build_patch, syndrome_circuit, CircuitNoise, CodeFamily, MemoryBasis, SimplifiedNoise,
    };

    fn css_memory_x(d: usize, rounds: usize, p_z: f64, eta: f64) -> StabilizerCircuit {
        let patch = build_patch(CodeFamily::CssRotated, d, d).expect("patch");
        let noise = CircuitNoise::Simplified(SimplifiedNoise {
            p_z,
            eta,
            readout_reset_error: 0.01,
        });
        syndrome_circuit(&patch, rounds, &noise, MemoryBasis::X).expect("circuit")
    }

    #[test]
    fn wilson_interval_endpoints_behave() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
        let (lo, hi) = wilson_interval(1000, 1000);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.99);
        let (lo, hi) = wilson_interval(50, 1000);
        assert!(lo < 0.05 && 0.05 < hi);
        assert!(hi - lo < 0.03);
    }

    #[test]
    fn zero_noise_has_zero_logical_rate() {
        let c = css_memory_x(3, 2, 0.0, f64::INFINITY);
        let est = logical_error_rate(&c, 2000, 5).expect("estimate");
        assert_eq!(est.failures, 0);
        assert_eq!(est.rate, 0.0);
        assert_eq!(est.ci_low, 0.0);
    }

    #[test]
    fn logical_rate_is_reproducible_and_chunk_invariant() {
        let c = css_memory_x(3, 3, 8e-3, 1e3);
        let a = logical_error_rate(&c, 3000, 17).expect("estimate");
        let b = logical_error_rate(&c, 3000, 17).expect("estimate");
        assert_eq!(a, b);
        // Chunked sampling must agree with one monolithic batch.
        let dem = build_dem(&c).expect("dem");
        let dec = Decoder::new(&dem).expect("decoder");
        let full = sample(&c, 3000, 17).expect("batch");
        let direct = count_failures(&dec, &full).expect("count");
        assert_eq!(a.failures, direct);
    }

    #[test]
    fn logical_rate_grows_with_physical_error_rate() {
        // Memory-X experiments are the ones stressed by Z-biased noise: the
        // preserved observable is X-type, so physical Z chains can flip it.
        let mut rates = Vec::new();
        for &p_z in &[1e-3, 5e-3, 2e-2] {
            let c = css_memory_x(3, 3, p_z, 1e3);
            rates.push(logical_error_rate(&c, 30_000, 23).expect("estimate"));
        }
        assert!(
            rates[0].ci_high < rates[1].ci_low,
            "p_z=1e-3 ({:?}) should be clearly below p_z=5e-3 ({:?})",
            rates[0],
            rates[1]
        );
        assert!(
            rates[1].ci_high < rates[2].ci_low,
            "p_z=5e-3 ({:?}) should be clearly below p_z=2e-2 ({:?})",
            rates[1],
            rates[2]
        );
    }

    #[test]
    fn saturated_noise_approaches_coin_flip() {
        let c = css_memory_x(3, 3, 8e-2, 1e3);
        let est = logical_error_rate(&c, 20_000, 29).expect("estimate");
        assert!(
            est.rate > 0.25 && est.rate <= 0.55,
            "deep-saturation rate should be near 1/2, got {}",
            est.rate
        );
    }

    #[test]
    fn enumeration_brackets_the_monte_carlo_rate() {
        // Small, quiet instance so third-order enumeration covers almost all
        // of the probability mass and the tail bound is tight.
        let c = css_memory_x(3, 2, 5e-3, 1e3);
        let dem = build_dem(&c).expect("dem");
        let dec = Decoder::new(&dem).expect("decoder");
        // Drop the (tiny) non-Z faults below 1e-6 from the walk; their mass
        // moves into the tail bound, keeping the subset count manageable.
        let en = enumerated_logical_rate(&dem, &dec, 3, 1e-6).expect("enumerate");
        assert!(en.tail < 1e-2, "tail bound too loose: {}", en.tail);
        assert!(en.estimate > 0.0, "nonzero noise must have failing fault sets");

        let shots = 300_000u64;
        let mc = logical_error_rate(&c, shots, 41).expect("estimate");
        // Monte-Carlo sampling noise: 3 sigma on the binomial count at the
        // enumerated estimate's scale.
        let center = en.estimate + en.tail / 2.0;
        let sigma = (center.max(1e-9) * (1.0 - center) / shots as f64).sqrt();
        let lo = en.estimate - 3.0 * sigma;
        let hi = en.estimate + en.tail + 3.0 * sigma;
        assert!(
            mc.rate >= lo && mc.rate <= hi,
            "MC rate {} outside enumerated bracket [{lo}, {hi}]",
            mc.rate
        );
    }

    #[test]
    fn enumeration_tail_shrinks_with_order() {
        let c = css_memory_x(3, 2, 5e-3, 1e3);
        let dem = build_dem(&c).expect("dem");
        let dec = Decoder::new(&dem).expect("decoder");
        let e1 = enumerated_logical_rate(&dem, &dec, 1, 1e-6).expect("order 1");
        let e2 = enumerated_logical_rate(&dem, &dec, 2, 1e-6).expect("order 2");
        assert!(e2.tail < e1.tail);
        assert!(e2.estimate >= e1.estimate);
        // A well-matched distance-3 decoder corrects every single fault.
        assert_eq!(e1.estimate, 0.0, "single faults must decode cleanly at d=3");
    }
}
