//! Monte-Carlo Pauli-frame sampler for stabilizer circuits.
//!
//! The sampler tracks only how sampled Pauli errors propagate through the
//! Clifford circuit relative to the noiseless reference execution (the Pauli
//! frame). A measurement outcome differs from its reference value exactly
//! when the anticommuting frame component is set on the measured qubit, so
//! detector and observable bits follow without simulating amplitudes. Shot
//! `s` draws all of its randomness from counter-RNG keys `(s, instruction,
//! position)`, which makes every shot bit-exact reproducible independent of
//! batching and worker-thread count.

use rayon::prelude::*;

use crate::code::{Instruction, StabilizerCircuit};
use crate::error::{Error, Result};
use crate::pauli::{string_from_index, PauliChannel};
use crate::rng::CounterRng;

use super::batch::{BitMatrix, ShotBatch};

/// Symplectic lookup table for one channel: Pauli-string index to per-qubit
/// `(x, z)` flip bits.
pub(super) enum ChannelTable {
    One(Vec<(bool, bool)>),
    Two(Vec<[(bool, bool); 2]>),
}

pub(super) fn channel_tables(channels: &[crate::code::NamedChannel]) -> Vec<ChannelTable> {
    channels
        .iter()
        .map(|nc| match nc.channel.n {
            1 => ChannelTable::One(
                (0..4)
                    .map(|idx| {
                        let ps = string_from_index(idx, 1);
                        let (x, z) = ps[0].xz();
                        (x == 1, z == 1)
                    })
                    .collect(),
            ),
            2 => ChannelTable::Two(
                (0..16)
                    .map(|idx| {
                        let ps = string_from_index(idx, 2);
                        let (x0, z0) = ps[0].xz();
                        let (x1, z1) = ps[1].xz();
                        [(x0 == 1, z0 == 1), (x1 == 1, z1 == 1)]
                    })
                    .collect(),
            ),
            n => unreachable!("channel arity {n} not supported by the frame sampler"),
        })
        .collect()
}

/// Bit-packed X/Z Pauli frame over the circuit's qubits.
pub(super) struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl Frame {
    pub fn new(n_qubits: usize) -> Self {
        let words = n_qubits.div_ceil(64).max(1);
        Frame { x: vec![0; words], z: vec![0; words] }
    }

    pub fn clear(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
    }

    #[inline]
    pub fn get_x(&self, q: u32) -> bool {
        (self.x[q as usize / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn get_z(&self, q: u32) -> bool {
        (self.z[q as usize / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn flip_x(&mut self, q: u32) {
        self.x[q as usize / 64] ^= 1u64 << (q % 64);
    }

    #[inline]
    pub fn flip_z(&mut self, q: u32) {
        self.z[q as usize / 64] ^= 1u64 << (q % 64);
    }

    #[inline]
    pub fn apply(&mut self, q: u32, x: bool, z: bool) {
        if x {
            self.flip_x(q);
        }
        if z {
            self.flip_z(q);
        }
    }

    /// Conjugate the frame through a CX: X on the control spreads to the
    /// target, Z on the target spreads to the control.
    #[inline]
    pub fn cx(&mut self, c: u32, t: u32) {
        if self.get_x(c) {
            self.flip_x(t);
        }
        if self.get_z(t) {
            self.flip_z(c);
        }
    }

    /// Conjugate through a Hadamard: swap the X and Z components.
    #[inline]
    pub fn h(&mut self, q: u32) {
        let x = self.get_x(q);
        let z = self.get_z(q);
        if x != z {
            self.flip_x(q);
            self.flip_z(q);
        }
    }

    /// Conjugate through S or S† (identical action on frames: X picks up Z).
    #[inline]
    pub fn s(&mut self, q: u32) {
        if self.get_x(q) {
            self.flip_z(q);
        }
    }

    /// A reset discards any accumulated frame on the qubit.
    #[inline]
    pub fn reset(&mut self, q: u32) {
        let w = q as usize / 64;
        let m = !(1u64 << (q % 64));
        self.x[w] &= m;
        self.z[w] &= m;
    }
}

/// Walk one shot of the circuit, sampling noise with keys
/// `(shot, instruction index, position)` and recording measurement flips.
///
/// `m_flips` must hold at least `n_measurements` bits (as packed words).
fn run_shot(
    circuit: &StabilizerCircuit,
    tables: &[ChannelTable],
    rng: &CounterRng,
    shot: u64,
    frame: &mut Frame,
    m_flips: &mut [u64],
) {
    frame.clear();
    m_flips.fill(0);
    let mut m_idx = 0usize;
    for (ii, inst) in circuit.instructions.iter().enumerate() {
        match inst {
            Instruction::ResetZ(qs) | Instruction::ResetX(qs) => {
                for &q in qs {
                    frame.reset(q);
                }
            }
            Instruction::MeasureZ(qs) => {
                for &q in qs {
                    if frame.get_x(q) {
                        m_flips[m_idx / 64] ^= 1u64 << (m_idx % 64);
                    }
                    m_idx += 1;
                }
            }
            Instruction::MeasureX(qs) => {
                for &q in qs {
                    if frame.get_z(q) {
                        m_flips[m_idx / 64] ^= 1u64 << (m_idx % 64);
                    }
                    m_idx += 1;
                }
            }
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs {
                    frame.cx(c, t);
                }
            }
            Instruction::Hadamard(qs) => {
                for &q in qs {
                    frame.h(q);
                }
            }
            Instruction::SPhase(qs) | Instruction::SPhaseDag(qs) => {
                for &q in qs {
                    frame.s(q);
                }
            }
            Instruction::Pauli1 { channel, qubits } => {
                let ch = &circuit.channels[*channel as usize].channel;
                let ChannelTable::One(table) = &tables[*channel as usize] else {
                    unreachable!("Pauli1 references a two-qubit channel");
                };
                for (pos, &q) in qubits.iter().enumerate() {
                    let u = rng.uniform3(shot, ii as u64, pos as u64);
                    let idx = ch.sample(u);
                    if idx != 0 {
                        let (x, z) = table[idx];
                        frame.apply(q, x, z);
                    }
                }
            }
            Instruction::Pauli2 { channel, pairs } => {
                let ch = &circuit.channels[*channel as usize].channel;
                let ChannelTable::Two(table) = &tables[*channel as usize] else {
                    unreachable!("Pauli2 references a one-qubit channel");
                };
                for (pos, &(a, b)) in pairs.iter().enumerate() {
                    let u = rng.uniform3(shot, ii as u64, pos as u64);
                    let idx = ch.sample(u);
                    if idx != 0 {
                        let [(xa, za), (xb, zb)] = table[idx];
                        frame.apply(a, xa, za);
                        frame.apply(b, xb, zb);
                    }
                }
            }
            Instruction::Tick => {}
        }
    }
    debug_assert_eq!(m_idx, circuit.n_measurements);
}

#[inline]
fn word_bit(words: &[u64], idx: usize) -> bool {
    (words[idx / 64] >> (idx % 64)) & 1 == 1
}

/// XOR of the listed measurement flip bits.
#[inline]
fn parity_of(words: &[u64], measurements: &[u32]) -> bool {
    let mut p = false;
    for &m in measurements {
        p ^= word_bit(words, m as usize);
    }
    p
}

/// Sample `n_shots` shots of the circuit under its Pauli noise channels.
///
/// Results are bit-exact functions of `(circuit, seed, shot index)`: batching
/// and worker-thread count cannot change any outcome.
pub fn sample(circuit: &StabilizerCircuit, n_shots: usize, seed: u64) -> Result<ShotBatch> {
    sample_range(circuit, 0, n_shots, seed)
}

/// Sample shots `first_shot .. first_shot + n_shots` of the global shot
/// stream defined by `(circuit, seed)`.
///
/// Concatenating consecutive ranges reproduces [`sample`] of the union
/// bit-for-bit, which lets callers bound memory by decoding chunk-wise.
pub fn sample_range(
    circuit: &StabilizerCircuit,
    first_shot: u64,
    n_shots: usize,
    seed: u64,
) -> Result<ShotBatch> {
    circuit.validate()?;
    for nc in &circuit.channels {
        if nc.channel.n != 1 && nc.channel.n != 2 {
            return Err(Error::Format(format!(
                "channel '{}' has unsupported arity {}",
                nc.name, nc.channel.n
            )));
        }
    }
    let tables = channel_tables(&circuit.channels);
    let rng = CounterRng::new(seed);
    let n_det = circuit.detectors.len();
    let n_obs = circuit.observables.len();
    let mut detectors = BitMatrix::new(n_shots, n_det);
    let mut observables = BitMatrix::new(n_shots, n_obs);
    let dw = detectors.row_words();
    let ow = observables.row_words();
    let m_words = circuit.n_measurements.div_ceil(64).max(1);
    let n_qubits = circuit.n_qubits;

    detectors
        .data_mut()
        .par_chunks_mut(dw)
        .zip(observables.data_mut().par_chunks_mut(ow))
        .enumerate()
        .for_each_init(
            || (Frame::new(n_qubits), vec![0u64; m_words]),
            |(frame, m_flips), (shot, (det_row, obs_row))| {
                run_shot(circuit, &tables, &rng, first_shot + shot as u64, frame, m_flips);
                for (d, det) in circuit.detectors.iter().enumerate() {
                    if parity_of(m_flips, &det.measurements) {
                        det_row[d / 64] |= 1u64 << (d % 64);
                    }
                }
                for (o, obs) in circuit.observables.iter().enumerate() {
                    if parity_of(m_flips, obs) {
                        obs_row[o / 64] |= 1u64 << (o % 64);
                    }
                }
            },
        );

    Ok(ShotBatch { seed, detectors, observables })
}

/// Propagate a single deterministic error inserted *after* instruction
/// `after_inst` through the rest of the circuit; returns the flipped
/// measurement indices (ascending).
///
/// This is the primitive the detector-error-model builder uses: one call per
/// (noise instruction, position, Pauli term).
pub(super) fn propagate_error(
    circuit: &StabilizerCircuit,
    after_inst: usize,
    error: &[(u32, bool, bool)],
    meas_before: usize,
    frame: &mut Frame,
) -> Vec<u32> {
    frame.clear();
    for &(q, x, z) in error {
        frame.apply(q, x, z);
    }
    let mut flips = Vec::new();
    let mut m_idx = meas_before;
    for inst in &circuit.instructions[after_inst + 1..] {
        match inst {
            Instruction::ResetZ(qs) | Instruction::ResetX(qs) => {
                for &q in qs {
                    frame.reset(q);
                }
            }
            Instruction::MeasureZ(qs) => {
                for &q in qs {
                    if frame.get_x(q) {
                        flips.push(m_idx as u32);
                    }
                    m_idx += 1;
                }
            }
            Instruction::MeasureX(qs) => {
                for &q in qs {
                    if frame.get_z(q) {
                        flips.push(m_idx as u32);
                    }
                    m_idx += 1;
                }
            }
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs {
                    frame.cx(c, t);
                }
            }
            Instruction::Hadamard(qs) => {
                for &q in qs {
                    frame.h(q);
                }
            }
            Instruction::SPhase(qs) | Instruction::SPhaseDag(qs) => {
                for &q in qs {
                    frame.s(q);
                }
            }
            Instruction::Pauli1 { .. } | Instruction::Pauli2 { .. } | Instruction::Tick => {}
        }
    }
    debug_assert_eq!(m_idx, circuit.n_measurements);
    flips
}

/// Expected value of a channel's non-identity draw, for tests.
#[allow(dead_code)]
pub(super) fn channel_error_probability(ch: &PauliChannel) -> f64 {
    ch.error_probability()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{syndrome_circuit, build_patch, CircuitNoise, CodeFamily, MemoryBasis, SimplifiedNoise};

    fn css_circuit(
        dx: usize,
        dz: usize,
        rounds: usize,
        noise: CircuitNoise,
        basis: MemoryBasis,
    ) -> StabilizerCircuit {
        let patch = build_patch(CodeFamily::CssRotated, dx, dz).expect("patch");
        syndrome_circuit(&patch, rounds, &noise, basis).expect("circuit")
    }

    #[test]
    fn zero_noise_samples_are_all_zero() {
        let noise = CircuitNoise::Simplified(SimplifiedNoise {
            p_z: 0.0,
            eta: f64::INFINITY,
            readout_reset_error: 0.0,
        });
        let c = css_circuit(3, 3, 3, noise, MemoryBasis::Z);
        let batch = sample(&c, 50, 7).expect("sample");
        assert_eq!(batch.detectors.count_ones(), 0);
        assert_eq!(batch.observables.count_ones(), 0);
    }

    #[test]
    fn shots_are_identical_across_worker_counts() {
        let noise = CircuitNoise::Simplified(SimplifiedNoise::new(5e-3, 1e3));
        let c = css_circuit(3, 3, 2, noise, MemoryBasis::Z);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().expect("pool");
        let b1 = pool1.install(|| sample(&c, 300, 99).expect("sample"));
        let b4 = pool4.install(|| sample(&c, 300, 99).expect("sample"));
        assert_eq!(b1, b4);
        // And the same with the global pool.
        let bg = sample(&c, 300, 99).expect("sample");
        assert_eq!(bg, b1);
        // Nonempty: at this rate some detector must have fired.
        assert!(bg.detectors.count_ones() > 0);
    }

    #[test]
    fn pure_z_noise_fires_only_mixed_class_detectors() {
        // With η = ∞ the only errors are Z-type, which commute with every
        // Z-basis element of the extraction; they can only flip X-type checks
        // (class 1). Readout/reset flips are disabled so no class-0 detector
        // can fire.
        let noise = CircuitNoise::Simplified(SimplifiedNoise {
            p_z: 2e-2,
            eta: f64::INFINITY,
            readout_reset_error: 0.0,
        });
        let c = css_circuit(3, 3, 3, noise, MemoryBasis::Z);
        let batch = sample(&c, 400, 11).expect("sample");
        let mut fired_class0 = 0u64;
        let mut fired_class1 = 0u64;
        for s in 0..batch.n_shots() {
            for d in batch.detectors.iter_row(s) {
                match c.detectors[d].class {
                    0 => fired_class0 += 1,
                    _ => fired_class1 += 1,
                }
            }
        }
        assert_eq!(fired_class0, 0, "Z noise must not fire Z-kind (class 0) detectors");
        assert!(fired_class1 > 0, "Z noise must fire X-kind detectors at this rate");
    }

    #[test]
    fn deterministic_injected_error_fires_expected_detectors() {
        // Build a tiny hand-rolled circuit: two qubits measured twice with a
        // certain X error on qubit 0 between the rounds.
        let text = "\
QUBITS 2
CHANNEL certain_x 1 X 1.0
RZ 0 1
MZ 0 1
E1 0 0
MZ 0 1
DETECTOR 0 0 1 0 2
DETECTOR 0 1 1 1 3
OBSERVABLE 0 2
";
        let c = StabilizerCircuit::from_text(text).expect("parse");
        let batch = sample(&c, 8, 5).expect("sample");
        for s in 0..8 {
            assert!(batch.detectors.get(s, 0), "flipped qubit's detector fires");
            assert!(!batch.detectors.get(s, 1), "untouched qubit's detector stays quiet");
            assert!(batch.observables.get(s, 0), "observable tracks the flipped outcome");
        }
    }

    #[test]
    fn propagate_error_matches_hand_analysis() {
        // X on the data qubit of a two-round repetition check flips both
        // subsequent measurements of that qubit.
        let text = "\
QUBITS 2
RZ 0 1
MZ 0 1
MZ 0 1
";
        let c = StabilizerCircuit::from_text(text).expect("parse");
        let mut frame = Frame::new(2);
        // Insert X on qubit 0 after the reset (instruction 0); 0 measurements seen.
        let flips = propagate_error(&c, 0, &[(0, true, false)], 0, &mut frame);
        assert_eq!(flips, vec![0, 2]);
        // Z on qubit 0 never flips Z-basis measurements.
        let flips = propagate_error(&c, 0, &[(0, false, true)], 0, &mut frame);
        assert!(flips.is_empty());
    }
}
