//! Detector error model: the error channel of a noisy stabilizer circuit
//! projected onto detector and observable flips.
//!
//! Every non-identity term of every Pauli noise instruction is propagated
//! through the downstream Clifford circuit once. Terms with identical
//! (detector set, observable mask) signatures are merged with the
//! exclusive-or combination `p ⊕ p' = p(1−p') + p'(1−p)` — exact for two
//! faults that each either occur or not, and the standard first-order
//! treatment for terms drawn from the same channel instance (the O(p²)
//! double-draw correction is negligible at the physical rates simulated
//! here).
//!
//! Faults touching more than two detectors (or two detectors of different
//! decoding classes) are *decomposed* into the graphlike pieces — single
//! detectors and same-class pairs — that already occur as elementary faults,
//! so the matching graph sees every correlated fault as a combination of
//! edges it knows about.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write as IoWrite};
use std::path::Path;

use rayon::prelude::*;

use crate::code::{Instruction, StabilizerCircuit};
use crate::error::{Error, Result};
use crate::pauli::string_from_index;
use crate::rng::CounterRng;

use super::batch::{BitMatrix, ShotBatch};
use super::frame::{propagate_error, Frame};

/// One merged error mechanism: with probability `probability`, flip exactly
/// the listed detectors and the masked observables.
#[derive(Clone, Debug, PartialEq)]
pub struct DemFault {
    pub probability: f64,
    /// Fired detector ids, ascending.
    pub detectors: Vec<u32>,
    /// Bitmask of flipped logical observables.
    pub observables: u32,
}

/// A graphlike matching edge distilled from the fault list: a detector pair
/// (`b = Some`) or a detector-to-boundary edge (`b = None`).
#[derive(Clone, Debug, PartialEq)]
pub struct DemEdge {
    pub a: u32,
    pub b: Option<u32>,
    pub probability: f64,
    pub observables: u32,
    /// Decoding class of both endpoints.
    pub class: u8,
}

/// The detector error model of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub n_detectors: usize,
    pub n_observables: usize,
    /// Decoding class of each detector (0 = Z-kind/mixed, 1 = X-kind).
    pub classes: Vec<u8>,
    /// Merged faults, sorted by (detectors, observables). Probabilities lie
    /// in (0, 0.5].
    pub faults: Vec<DemFault>,
    /// Graphlike edges after decomposition, including the exclusive-or
    /// contributions of decomposed correlated faults. Parallel edges with
    /// different observable masks are kept separate.
    pub edges: Vec<DemEdge>,
}

impl DetectorErrorModel {
    /// Structural checks: shapes, id ranges, probability range.
    pub fn validate(&self) -> Result<()> {
        if self.classes.len() != self.n_detectors {
            return Err(Error::Format(format!(
                "classes length {} != detector count {}",
                self.classes.len(),
                self.n_detectors
            )));
        }
        if self.n_observables > 32 {
            return Err(Error::Format("at most 32 observables are supported".into()));
        }
        let obs_mask_limit = if self.n_observables == 32 {
            u32::MAX
        } else {
            (1u32 << self.n_observables) - 1
        };
        for f in &self.faults {
            if !(f.probability > 0.0 && f.probability <= 0.5) {
                return Err(Error::Format(format!(
                    "fault probability {} outside (0, 0.5]",
                    f.probability
                )));
            }
            if f.observables & !obs_mask_limit != 0 {
                return Err(Error::Format("fault references unknown observable".into()));
            }
            if !f.detectors.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Format("fault detectors must be strictly ascending".into()));
            }
            if let Some(&last) = f.detectors.last() {
                if last as usize >= self.n_detectors {
                    return Err(Error::Format("fault references unknown detector".into()));
                }
            }
        }
        for e in &self.edges {
            if let Some(b) = e.b {
                if self.classes[e.a as usize] != self.classes[b as usize] {
                    return Err(Error::Format(
                        "matching edge endpoints must share a decoding class".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Write the model in its line-oriented text format.
    pub fn write_to(&self, w: &mut impl IoWrite) -> Result<()> {
        writeln!(w, "DEM 1")?;
        writeln!(w, "DETECTORS {}", self.n_detectors)?;
        writeln!(w, "OBSERVABLES {}", self.n_observables)?;
        if !self.classes.is_empty() {
            let cs: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
            writeln!(w, "CLASSES {}", cs.join(" "))?;
        }
        for f in &self.faults {
            let ds: Vec<String> = f.detectors.iter().map(|d| d.to_string()).collect();
            let mut os = Vec::new();
            for o in 0..self.n_observables {
                if f.observables >> o & 1 == 1 {
                    os.push(o.to_string());
                }
            }
            writeln!(w, "FAULT {:e} D {} O {}", f.probability, ds.join(" "), os.join(" "))?;
        }
        Ok(())
    }

    /// Parse the text format and rebuild the edge list by re-running the
    /// decomposition.
    pub fn read_from(r: &mut impl BufRead) -> Result<Self> {
        let mut n_detectors: Option<usize> = None;
        let mut n_observables: Option<usize> = None;
        let mut classes: Vec<u8> = Vec::new();
        let mut fault_map: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
        let mut saw_magic = false;
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ctx = |msg: &str| Error::Format(format!("DEM line {}: {}", ln + 1, msg));
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "DEM" => {
                    if toks.get(1) != Some(&"1") {
                        return Err(ctx("unsupported DEM version"));
                    }
                    saw_magic = true;
                }
                "DETECTORS" => {
                    n_detectors =
                        Some(toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| {
                            ctx("DETECTORS needs a count")
                        })?);
                }
                "OBSERVABLES" => {
                    n_observables =
                        Some(toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| {
                            ctx("OBSERVABLES needs a count")
                        })?);
                }
                "CLASSES" => {
                    classes = toks[1..]
                        .iter()
                        .map(|t| t.parse::<u8>().map_err(|_| ctx("bad class")))
                        .collect::<Result<_>>()?;
                }
                "FAULT" => {
                    let p: f64 = toks
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| ctx("FAULT needs a probability"))?;
                    let mut dets = Vec::new();
                    let mut obs = 0u32;
                    let mut mode = ' ';
                    for t in &toks[2..] {
                        match *t {
                            "D" => mode = 'D',
                            "O" => mode = 'O',
                            v => {
                                let id: u32 =
                                    v.parse().map_err(|_| ctx(&format!("bad id {v:?}")))?;
                                match mode {
                                    'D' => dets.push(id),
                                    'O' => obs |= 1 << id,
                                    _ => return Err(ctx("id before D/O marker")),
                                }
                            }
                        }
                    }
                    dets.sort_unstable();
                    dets.dedup();
                    let e = fault_map.entry((dets, obs)).or_insert(0.0);
                    *e = *e * (1.0 - p) + p * (1.0 - *e);
                }
                other => return Err(ctx(&format!("unknown opcode {other:?}"))),
            }
        }
        if !saw_magic {
            return Err(Error::Format("missing DEM header line".into()));
        }
        let n_detectors =
            n_detectors.ok_or_else(|| Error::Format("missing DETECTORS line".into()))?;
        let n_observables =
            n_observables.ok_or_else(|| Error::Format("missing OBSERVABLES line".into()))?;
        if classes.is_empty() {
            classes = vec![0; n_detectors];
        }
        finish_model(n_detectors, n_observables, classes, fault_map)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

/// Merge signatures into the final sorted fault list, decompose, validate.
fn finish_model(
    n_detectors: usize,
    n_observables: usize,
    classes: Vec<u8>,
    fault_map: BTreeMap<(Vec<u32>, u32), f64>,
) -> Result<DetectorErrorModel> {
    let faults: Vec<DemFault> = fault_map
        .into_iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|((detectors, observables), probability)| DemFault {
            probability,
            detectors,
            observables,
        })
        .collect();
    let edges = decompose_faults(&classes, &faults)?;
    let dem = DetectorErrorModel { n_detectors, n_observables, classes, faults, edges };
    dem.validate()?;
    Ok(dem)
}

/// Build the detector error model of a noisy circuit.
///
/// Every non-identity channel term at every noise position is propagated to
/// its (detectors, observables) signature; identical signatures merge with
/// the exclusive-or probability combination. Correlated faults are
/// decomposed into graphlike edges; a fault that cannot be written as a
/// combination of elementary single-detector or same-class detector-pair
/// faults is reported as [`Error::UndecomposableFault`].
pub fn build_dem(circuit: &StabilizerCircuit) -> Result<DetectorErrorModel> {
    circuit.validate()?;
    let n_det = circuit.detectors.len();
    let n_obs = circuit.observables.len();
    if n_obs > 32 {
        return Err(Error::Format("at most 32 observables are supported".into()));
    }

    // Measurement -> detector / observable incidence for fast signature
    // extraction from flipped-measurement lists.
    let mut m2d: Vec<Vec<u32>> = vec![Vec::new(); circuit.n_measurements];
    for (d, det) in circuit.detectors.iter().enumerate() {
        for &m in &det.measurements {
            m2d[m as usize].push(d as u32);
        }
    }
    let mut m2o: Vec<u32> = vec![0; circuit.n_measurements];
    for (o, obs) in circuit.observables.iter().enumerate() {
        for &m in obs {
            m2o[m as usize] |= 1 << o;
        }
    }
    let mut meas_before = Vec::with_capacity(circuit.instructions.len());
    let mut acc = 0usize;
    for inst in &circuit.instructions {
        meas_before.push(acc);
        if let Instruction::MeasureZ(qs) | Instruction::MeasureX(qs) = inst {
            acc += qs.len();
        }
    }

    let mut frame = Frame::new(circuit.n_qubits);
    let mut fault_map: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
    let mut det_parity = vec![false; n_det];

    let accumulate = |ii: usize,
                          error: &[(u32, bool, bool)],
                          p: f64,
                          frame: &mut Frame,
                          det_parity: &mut Vec<bool>,
                          fault_map: &mut BTreeMap<(Vec<u32>, u32), f64>|
     -> Result<()> {
        let flips = propagate_error(circuit, ii, error, meas_before[ii], frame);
        let mut touched: Vec<u32> = Vec::new();
        let mut obs = 0u32;
        for &m in &flips {
            for &d in &m2d[m as usize] {
                if !det_parity[d as usize] {
                    touched.push(d);
                }
                det_parity[d as usize] = !det_parity[d as usize];
            }
            obs ^= m2o[m as usize];
        }
        let mut dets: Vec<u32> = Vec::with_capacity(touched.len());
        for &d in &touched {
            if det_parity[d as usize] {
                dets.push(d);
            }
            det_parity[d as usize] = false;
        }
        dets.sort_unstable();
        if dets.is_empty() && obs == 0 {
            return Ok(());
        }
        if p > 0.5 {
            return Err(Error::DomainError(format!(
                "noise term with probability {p} > 0.5 cannot enter a detector error model"
            )));
        }
        let e = fault_map.entry((dets, obs)).or_insert(0.0);
        *e = *e * (1.0 - p) + p * (1.0 - *e);
        Ok(())
    };

    for (ii, inst) in circuit.instructions.iter().enumerate() {
        match inst {
            Instruction::Pauli1 { channel, qubits } => {
                let ch = &circuit.channels[*channel as usize].channel;
                for &q in qubits {
                    for idx in 1..4usize {
                        let p = ch.probs[idx];
                        if p <= 0.0 {
                            continue;
                        }
                        let ps = string_from_index(idx, 1);
                        let (x, z) = ps[0].xz();
                        accumulate(
                            ii,
                            &[(q, x == 1, z == 1)],
                            p,
                            &mut frame,
                            &mut det_parity,
                            &mut fault_map,
                        )?;
                    }
                }
            }
            Instruction::Pauli2 { channel, pairs } => {
                let ch = &circuit.channels[*channel as usize].channel;
                for &(a, b) in pairs {
                    for idx in 1..16usize {
                        let p = ch.probs[idx];
                        if p <= 0.0 {
                            continue;
                        }
                        let ps = string_from_index(idx, 2);
                        let (xa, za) = ps[0].xz();
                        let (xb, zb) = ps[1].xz();
                        accumulate(
                            ii,
                            &[(a, xa == 1, za == 1), (b, xb == 1, zb == 1)],
                            p,
                            &mut frame,
                            &mut det_parity,
                            &mut fault_map,
                        )?;
                    }
                }
            }
            _ => {}
        }
    }

    let classes: Vec<u8> = circuit.detectors.iter().map(|d| d.class).collect();
    finish_model(n_det, n_obs, classes, fault_map)
}

type Block = (u32, Option<u32>);

/// Decompose every fault into elementary graphlike blocks and accumulate the
/// per-(block, observable-mask) edge probabilities.
fn decompose_faults(classes: &[u8], faults: &[DemFault]) -> Result<Vec<DemEdge>> {
    // Elementary blocks: signatures that already look like matching edges.
    let mut blocks: HashMap<Block, BTreeSet<u32>> = HashMap::new();
    for f in faults {
        match f.detectors.len() {
            1 => {
                blocks.entry((f.detectors[0], None)).or_default().insert(f.observables);
            }
            2 => {
                let (a, b) = (f.detectors[0], f.detectors[1]);
                if classes[a as usize] == classes[b as usize] {
                    blocks.entry((a, Some(b))).or_default().insert(f.observables);
                }
            }
            _ => {}
        }
    }

    let mut edge_p: BTreeMap<(Block, u32), f64> = BTreeMap::new();
    let mut add = |block: Block, obs: u32, p: f64| {
        let e = edge_p.entry((block, obs)).or_insert(0.0);
        *e = *e * (1.0 - p) + p * (1.0 - *e);
    };

    for f in faults {
        let parts: Vec<(Block, u32)> = match f.detectors.len() {
            0 => continue, // observable-only fault; kept in the fault list, unmatchable
            1 => vec![((f.detectors[0], None), f.observables)],
            2 if classes[f.detectors[0] as usize] == classes[f.detectors[1] as usize] => {
                vec![((f.detectors[0], Some(f.detectors[1])), f.observables)]
            }
            _ => decompose_one(&f.detectors, f.observables, classes, &blocks).ok_or_else(
                || {
                    Error::UndecomposableFault(format!(
                        "fault on detectors {:?} (observables {:#x}) has no graphlike split",
                        f.detectors, f.observables
                    ))
                },
            )?,
        };
        for (b, o) in parts {
            add(b, o, f.probability);
        }
    }

    let edges = edge_p
        .into_iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(((a, b), observables), probability)| DemEdge {
            a,
            b,
            probability,
            observables,
            class: classes[a as usize],
        })
        .collect();
    Ok(edges)
}

/// Backtracking search for a partition of `dets` into known elementary
/// blocks whose observable masks XOR to `target_obs`. Pairs are preferred
/// over singletons so correlated faults split along their natural two-error
/// structure.
fn decompose_one(
    dets: &[u32],
    target_obs: u32,
    classes: &[u8],
    blocks: &HashMap<Block, BTreeSet<u32>>,
) -> Option<Vec<(Block, u32)>> {
    fn rec(
        remaining: &[u32],
        acc_obs: u32,
        target: u32,
        classes: &[u8],
        blocks: &HashMap<Block, BTreeSet<u32>>,
        chosen: &mut Vec<(Block, u32)>,
    ) -> bool {
        let Some((&d0, rest)) = remaining.split_first() else {
            return acc_obs == target;
        };
        // Pair d0 with each later detector of the same class.
        for (j, &dj) in rest.iter().enumerate() {
            if classes[d0 as usize] != classes[dj as usize] {
                continue;
            }
            if let Some(opts) = blocks.get(&(d0, Some(dj))) {
                let mut next: Vec<u32> = Vec::with_capacity(rest.len() - 1);
                next.extend_from_slice(&rest[..j]);
                next.extend_from_slice(&rest[j + 1..]);
                for &o in opts {
                    chosen.push(((d0, Some(dj)), o));
                    if rec(&next, acc_obs ^ o, target, classes, blocks, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
        }
        // Or absorb d0 at the boundary.
        if let Some(opts) = blocks.get(&(d0, None)) {
            for &o in opts {
                chosen.push(((d0, None), o));
                if rec(rest, acc_obs ^ o, target, classes, blocks, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::new();
    if rec(dets, 0, target_obs, classes, blocks, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

/// Sample independent Bernoulli draws of every DEM fault.
///
/// This is the model-side counterpart of the circuit sampler: if the DEM is
/// a faithful projection of the circuit noise, both samplers produce the
/// same detector statistics up to the merged-term O(p²) corrections.
pub fn sample_dem(dem: &DetectorErrorModel, n_shots: usize, seed: u64) -> Result<ShotBatch> {
    dem.validate()?;
    const SALT: u64 = 0xDE11;
    let rng = CounterRng::new(seed);
    let mut detectors = BitMatrix::new(n_shots, dem.n_detectors);
    let mut observables = BitMatrix::new(n_shots, dem.n_observables);
    let dw = detectors.row_words();
    let ow = observables.row_words();

    detectors
        .data_mut()
        .par_chunks_mut(dw)
        .zip(observables.data_mut().par_chunks_mut(ow))
        .enumerate()
        .for_each(|(shot, (det_row, obs_row))| {
            for (fi, f) in dem.faults.iter().enumerate() {
                if rng.uniform3(shot as u64, fi as u64, SALT) < f.probability {
                    for &d in &f.detectors {
                        det_row[d as usize / 64] ^= 1u64 << (d % 64);
                    }
                    let mut o = f.observables;
                    while o != 0 {
                        let b = o.trailing_zeros() as usize;
                        obs_row[b / 64] ^= 1u64 << (b % 64);
                        o &= o - 1;
                    }
                }
            }
        });

    Ok(ShotBatch { seed, detectors, observables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{
        build_patch, syndrome_circuit, CircuitNoise, CodeFamily, MemoryBasis, SimplifiedNoise,
    };

    fn css_dem(p_z: f64, eta: f64) -> (StabilizerCircuit, DetectorErrorModel) {
        let patch = build_patch(CodeFamily::CssRotated, 3, 3).expect("patch");
        let noise = CircuitNoise::Simplified(SimplifiedNoise::new(p_z, eta));
        let c = syndrome_circuit(&patch, 3, &noise, MemoryBasis::Z).expect("circuit");
        let dem = build_dem(&c).expect("dem");
        (c, dem)
    }

    #[test]
    fn merged_probabilities_use_xor_combination() {
        // Two identical deterministic-signature channels at p = 0.1 on the
        // same qubit must merge to 0.1 ⊕ 0.1 = 0.18.
        let text = "\
QUBITS 1
CHANNEL px 1 X 0.1
RZ 0
E1 0 0
E1 0 0
MZ 0
DETECTOR 0 0 1 0
";
        let c = StabilizerCircuit::from_text(text).expect("parse");
        let dem = build_dem(&c).expect("dem");
        assert_eq!(dem.faults.len(), 1);
        assert!((dem.faults[0].probability - 0.18).abs() < 1e-12);
        assert_eq!(dem.faults[0].detectors, vec![0]);
    }

    #[test]
    fn dem_probabilities_are_in_range_and_sorted() {
        let (_, dem) = css_dem(1e-2, 1e3);
        assert!(!dem.faults.is_empty());
        for f in &dem.faults {
            assert!(f.probability > 0.0 && f.probability <= 0.5);
        }
        for w in dem.faults.windows(2) {
            assert!(
                (w[0].detectors.clone(), w[0].observables)
                    < (w[1].detectors.clone(), w[1].observables),
                "faults must be strictly sorted"
            );
        }
    }

    #[test]
    fn no_fault_flips_an_observable_silently() {
        let (_, dem) = css_dem(1e-2, 1e3);
        for f in &dem.faults {
            assert!(
                f.observables == 0 || !f.detectors.is_empty(),
                "fault flips observables without firing any detector: {f:?}"
            );
        }
    }

    #[test]
    fn correlated_faults_decompose_across_classes() {
        // A data-qubit Y error mid-patch fires two Z-kind and two X-kind
        // detectors; the DEM must contain such a fault and decompose it.
        let (_, dem) = css_dem(1e-2, 10.0);
        let mixed = dem.faults.iter().find(|f| {
            f.detectors.len() == 4 && {
                let c0 = f
                    .detectors
                    .iter()
                    .filter(|&&d| dem.classes[d as usize] == 0)
                    .count();
                c0 == 2
            }
        });
        assert!(mixed.is_some(), "expected a 2+2 cross-class correlated fault");
        // Decomposition succeeded (build_dem returned Ok) and produced only
        // same-class edges.
        for e in &dem.edges {
            if let Some(b) = e.b {
                assert_eq!(dem.classes[e.a as usize], dem.classes[b as usize]);
            }
        }
    }

    #[test]
    fn pure_z_noise_yields_single_class_edges() {
        // η = ∞ leaves only Z errors: every edge lives in the X-kind class
        // (class 1) because only X-type checks see Z errors. Readout flips
        // are turned off to keep class 0 silent.
        let patch = build_patch(CodeFamily::CssRotated, 3, 3).expect("patch");
        let noise = CircuitNoise::Simplified(SimplifiedNoise {
            p_z: 1e-2,
            eta: f64::INFINITY,
            readout_reset_error: 0.0,
        });
        let c = syndrome_circuit(&patch, 3, &noise, MemoryBasis::Z).expect("circuit");
        let dem = build_dem(&c).expect("dem");
        assert!(!dem.edges.is_empty());
        for e in &dem.edges {
            assert_eq!(e.class, 1, "pure-Z noise must only produce X-kind edges");
        }
    }

    #[test]
    fn text_roundtrip_preserves_model() {
        let (_, dem) = css_dem(5e-3, 1e2);
        let mut buf = Vec::new();
        dem.write_to(&mut buf).expect("write");
        let mut rd = std::io::BufReader::new(buf.as_slice());
        let back = DetectorErrorModel::read_from(&mut rd).expect("read");
        assert_eq!(back.n_detectors, dem.n_detectors);
        assert_eq!(back.n_observables, dem.n_observables);
        assert_eq!(back.classes, dem.classes);
        assert_eq!(back.faults.len(), dem.faults.len());
        for (a, b) in back.faults.iter().zip(&dem.faults) {
            assert_eq!(a.detectors, b.detectors);
            assert_eq!(a.observables, b.observables);
            assert!((a.probability - b.probability).abs() < 1e-12 * (1.0 + b.probability));
        }
        assert_eq!(back.edges.len(), dem.edges.len());
    }

    #[test]
    fn dem_sampler_matches_circuit_sampler_marginals() {
        // Spot-check the DEM against direct circuit sampling: per-detector
        // firing rates agree within 3σ (combined), which bounds the merged
        // O(p²) systematics at these rates.
        let (c, dem) = css_dem(1e-2, 1e3);
        let n = 60_000usize;
        let circuit_batch = super::super::frame::sample(&c, n, 31).expect("sample");
        let dem_batch = sample_dem(&dem, n, 77).expect("sample dem");
        let mut max_pull = 0.0f64;
        for d in 0..dem.n_detectors {
            let mut k1 = 0u64;
            let mut k2 = 0u64;
            for s in 0..n {
                k1 += u64::from(circuit_batch.detectors.get(s, d));
                k2 += u64::from(dem_batch.detectors.get(s, d));
            }
            let p1 = k1 as f64 / n as f64;
            let p2 = k2 as f64 / n as f64;
            let pbar = 0.5 * (p1 + p2);
            let sigma = (2.0 * pbar * (1.0 - pbar) / n as f64).sqrt().max(1e-12);
            max_pull = max_pull.max((p1 - p2).abs() / sigma);
        }
        assert!(
            max_pull < 3.0 + 1.5, // 3σ plus slack for the many-detector look-elsewhere effect
            "worst detector marginal pull {max_pull:.2}σ"
        );
    }

    #[test]
    fn undecomposable_fault_is_reported() {
        // A three-detector fault with no elementary pieces anywhere.
        let text = "\
QUBITS 3
CHANNEL weird 1 X 0.01
RZ 0 1 2
E1 0 1
CX 1 0 1 2
MZ 0 1 2
DETECTOR 0 0 1 0
DETECTOR 0 1 1 1
DETECTOR 0 2 1 2
";
        let c = StabilizerCircuit::from_text(text).expect("parse");
        match build_dem(&c) {
            Err(Error::UndecomposableFault(_)) => {}
            other => panic!("expected UndecomposableFault, got {other:?}"),
        }
    }
}
