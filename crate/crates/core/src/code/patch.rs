//! Surface-code patch geometry: qubit layout, stabilizer supports with
//! entangling-gate schedules, and logical operators.
//!
//! Two rectangular families are supported:
//!
//! * **Rotated CSS** — data qubits on a `d_x × d_z` grid (doubled
//!   coordinates, data on odd/odd sites, ancillas on even/even sites),
//!   `2·d_x·d_z − 1` qubits total. X-type generators detect phase flips and
//!   terminate on the north/south boundaries; Z-type generators detect bit
//!   flips and terminate east/west. The logical X is a column of weight
//!   `d_x`, the logical Z a row of weight `d_z`.
//! * **Unrotated XZZX** — a `(2d_x−1) × (2d_z−1)` grid of alternating data
//!   and ancilla sites. Every generator applies Z to its north/south data
//!   neighbours and X to its east/west neighbours. The logical Z is an
//!   all-Z row of weight `d_z`, the logical X an all-X column of weight
//!   `d_x`; `d_x = 1` degenerates to a repetition code against phase
//!   flips.
//!
//! Gate schedules are part of the patch: each generator lists, per
//! entangling time step, which data qubit it couples and with which Pauli
//! letter. The CSS orders are the standard zigzag pair (X-type raster
//! `NW,NE,SW,SE`; Z-type transposed `NW,SW,NE,SE`), which keeps hook
//! errors perpendicular to the matching logical and leaves every data
//! qubit's two Z-letter gates adjacent in time (either within a round or
//! across the round boundary) so their accompanying phase corrections
//! cancel. The XZZX order is `N,E,W,S`, whose Z-letter gates sit at the
//! first and last steps of each round and pair across rounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// Surface-code family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFamily {
    CssRotated,
    XzzxUnrotated,
}

/// Role of a stabilizer generator. CSS generators are pure X-type or
/// Z-type; XZZX generators mix both letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabKind {
    X,
    Z,
    Mixed,
}

/// Number of entangling time steps per syndrome-extraction round.
pub const N_STEPS: usize = 4;

/// One stabilizer generator: its ancilla and, per entangling step, the data
/// qubit it couples (if any) together with the measured Pauli letter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stabilizer {
    pub ancilla: usize,
    pub kind: StabKind,
    pub schedule: Vec<Option<(usize, Pauli)>>,
}

impl Stabilizer {
    /// Data support with letters, in schedule order.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        self.schedule.iter().flatten().copied().collect()
    }

    /// Number of data qubits in the generator.
    pub fn weight(&self) -> usize {
        self.schedule.iter().flatten().count()
    }
}

/// A rectangular surface-code patch.
///
/// `coords` uses doubled coordinates for the rotated CSS family (data on
/// odd/odd, ancillas on even/even) and unit coordinates for the unrotated
/// XZZX family (data on even-parity sites, ancillas on odd-parity sites).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodePatch {
    pub family: CodeFamily,
    pub d_x: usize,
    pub d_z: usize,
    pub coords: Vec<(usize, usize)>,
    pub is_data: Vec<bool>,
    pub stabilizers: Vec<Stabilizer>,
    pub logical_x: Vec<(usize, Pauli)>,
    pub logical_z: Vec<(usize, Pauli)>,
}

impl CodePatch {
    pub fn n_qubits(&self) -> usize {
        self.coords.len()
    }

    pub fn n_data(&self) -> usize {
        self.is_data.iter().filter(|&&d| d).count()
    }

    /// Indices of data qubits in ascending order.
    pub fn data_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits()).filter(|&q| self.is_data[q]).collect()
    }

    /// Structural validation: qubit counts, schedule consistency, pairwise
    /// commutation of generators, and logical-operator algebra.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        let expected = match self.family {
            CodeFamily::CssRotated => 2 * self.d_x * self.d_z - 1,
            CodeFamily::XzzxUnrotated => (2 * self.d_x - 1) * (2 * self.d_z - 1),
        };
        if n != expected {
            return Err(Error::InvalidDistance(format!(
                "patch has {n} qubits, expected {expected}"
            )));
        }
        let n_data = self.n_data();
        if self.stabilizers.len() != n - n_data {
            return Err(Error::InvalidDistance(format!(
                "{} generators for {} ancillas",
                self.stabilizers.len(),
                n - n_data
            )));
        }
        if self.stabilizers.len() + 1 != n_data {
            return Err(Error::InvalidDistance(
                "generator count must leave exactly one logical qubit".into(),
            ));
        }
        // Schedule consistency: ancillas are ancillas, data are data, and no
        // qubit is touched twice in the same time step.
        for stab in &self.stabilizers {
            if self.is_data[stab.ancilla] {
                return Err(Error::InvalidDistance("ancilla marked as data".into()));
            }
            if stab.schedule.len() != N_STEPS {
                return Err(Error::InvalidDistance("schedule length != N_STEPS".into()));
            }
        }
        for step in 0..N_STEPS {
            let mut seen = vec![false; n];
            for stab in &self.stabilizers {
                if let Some((q, _)) = stab.schedule[step] {
                    if !self.is_data[q] {
                        return Err(Error::InvalidDistance("data slot names an ancilla".into()));
                    }
                    if seen[q] {
                        return Err(Error::InvalidDistance(format!(
                            "qubit {q} used twice in step {step}"
                        )));
                    }
                    seen[q] = true;
                }
            }
        }
        // Pairwise commutation of generators and logical algebra.
        let supports: Vec<Vec<(usize, Pauli)>> =
            self.stabilizers.iter().map(|s| s.support()).collect();
        for (i, a) in supports.iter().enumerate() {
            for b in supports.iter().skip(i + 1) {
                if anticommute(a, b) {
                    return Err(Error::InvalidDistance(
                        "stabilizer generators do not commute".into(),
                    ));
                }
            }
        }
        for logical in [&self.logical_x, &self.logical_z] {
            for s in &supports {
                if anticommute(logical, s) {
                    return Err(Error::InvalidDistance(
                        "logical operator fails to commute with a generator".into(),
                    ));
                }
            }
        }
        if !anticommute(&self.logical_x, &self.logical_z) {
            return Err(Error::InvalidDistance(
                "logical X and Z must anticommute".into(),
            ));
        }
        if self.logical_x.len() != self.d_x || self.logical_z.len() != self.d_z {
            return Err(Error::InvalidDistance(format!(
                "logical weights ({}, {}) != distances ({}, {})",
                self.logical_x.len(),
                self.logical_z.len(),
                self.d_x,
                self.d_z
            )));
        }
        Ok(())
    }
}

/// Symplectic product of two sparse Pauli strings (true = anticommute).
fn anticommute(a: &[(usize, Pauli)], b: &[(usize, Pauli)]) -> bool {
    let mut acc = 0u8;
    for &(qa, pa) in a {
        for &(qb, pb) in b {
            if qa == qb {
                acc ^= pa.anticommutes(pb);
            }
        }
    }
    acc == 1
}

/// Build a rectangular patch. Distances must be odd; the rotated CSS family
/// requires `d_x, d_z ≥ 3`, the unrotated XZZX family permits `d_x ≥ 1`
/// and/or `d_z ≥ 1` (repetition-code limits).
pub fn build_patch(family: CodeFamily, d_x: usize, d_z: usize) -> Result<CodePatch> {
    if d_x % 2 == 0 || d_z % 2 == 0 {
        return Err(Error::InvalidDistance(format!(
            "distances must be odd, got ({d_x}, {d_z})"
        )));
    }
    match family {
        CodeFamily::CssRotated => {
            if d_x < 3 || d_z < 3 {
                return Err(Error::InvalidDistance(format!(
                    "rotated CSS patch needs d_x, d_z >= 3, got ({d_x}, {d_z})"
                )));
            }
            build_css(d_x, d_z)
        }
        CodeFamily::XzzxUnrotated => {
            if d_x < 1 || d_z < 1 {
                return Err(Error::InvalidDistance("distances must be >= 1".into()));
            }
            build_xzzx(d_x, d_z)
        }
    }
}

/// Relative data offsets around a CSS ancilla, in doubled coordinates.
/// Rows grow southward, columns eastward.
const NW: (i64, i64) = (-1, -1);
const NE: (i64, i64) = (-1, 1);
const SW: (i64, i64) = (1, -1);
const SE: (i64, i64) = (1, 1);

fn build_css(d_x: usize, d_z: usize) -> Result<CodePatch> {
    // Data qubit (i, j) at doubled coordinate (2i+1, 2j+1), index i*d_z + j.
    let n_data = d_x * d_z;
    let mut coords: Vec<(usize, usize)> = Vec::new();
    for i in 0..d_x {
        for j in 0..d_z {
            coords.push((2 * i + 1, 2 * j + 1));
        }
    }
    let data_at = |row: i64, col: i64| -> Option<usize> {
        if row < 0 || col < 0 || row % 2 == 0 || col % 2 == 0 {
            return None;
        }
        let (i, j) = ((row as usize - 1) / 2, (col as usize - 1) / 2);
        (i < d_x && j < d_z).then_some(i * d_z + j)
    };

    // Ancilla candidates on even/even sites (r, c) with r in 0..=d_x,
    // c in 0..=d_z (ancilla-grid indices; doubled coordinate (2r, 2c)).
    // Checkerboard type, X when r+c is odd. Interior plaquettes always
    // survive; boundary candidates survive only as weight-2 generators of
    // the type their boundary carries (X north/south, Z east/west).
    let mut stabilizers = Vec::new();
    let mut is_data = vec![true; n_data];
    for r in 0..=d_x {
        for c in 0..=d_z {
            let kind = if (r + c) % 2 == 1 { StabKind::X } else { StabKind::Z };
            let (row, col) = (2 * r as i64, 2 * c as i64);
            let touched = [NW, NE, SW, SE]
                .iter()
                .filter(|(dr, dc)| data_at(row + dr, col + dc).is_some())
                .count();
            let on_ns = r == 0 || r == d_x;
            let on_ew = c == 0 || c == d_z;
            let keep = touched == 4
                || (touched == 2
                    && ((kind == StabKind::X && on_ns && !on_ew)
                        || (kind == StabKind::Z && on_ew && !on_ns)));
            if !keep {
                continue;
            }
            let order = match kind {
                StabKind::X => [NW, NE, SW, SE],
                StabKind::Z => [NW, SW, NE, SE],
                StabKind::Mixed => unreachable!(),
            };
            let letter = if kind == StabKind::X { Pauli::X } else { Pauli::Z };
            let schedule = order
                .iter()
                .map(|(dr, dc)| data_at(row + dr, col + dc).map(|q| (q, letter)))
                .collect();
            let ancilla = coords.len();
            coords.push((row as usize, col as usize));
            is_data.push(false);
            stabilizers.push(Stabilizer { ancilla, kind, schedule });
        }
    }

    let logical_z = (0..d_z).map(|j| (j, Pauli::Z)).collect();
    let logical_x = (0..d_x).map(|i| (i * d_z, Pauli::X)).collect();
    let patch = CodePatch {
        family: CodeFamily::CssRotated,
        d_x,
        d_z,
        coords,
        is_data,
        stabilizers,
        logical_x,
        logical_z,
    };
    patch.validate()?;
    Ok(patch)
}

fn build_xzzx(d_x: usize, d_z: usize) -> Result<CodePatch> {
    let (nr, nc) = (2 * d_x - 1, 2 * d_z - 1);
    let idx = |i: usize, j: usize| i * nc + j;
    let mut coords = Vec::with_capacity(nr * nc);
    let mut is_data = Vec::with_capacity(nr * nc);
    for i in 0..nr {
        for j in 0..nc {
            coords.push((i, j));
            is_data.push((i + j) % 2 == 0);
        }
    }
    let site = |i: i64, j: i64| -> Option<usize> {
        (i >= 0 && j >= 0 && (i as usize) < nr && (j as usize) < nc)
            .then(|| idx(i as usize, j as usize))
    };
    // Entangling order N, E, W, S with letters Z, X, X, Z: the Z-letter
    // gates bracket the round so their phase corrections pair across the
    // round boundary.
    let mut stabilizers = Vec::new();
    for i in 0..nr {
        for j in 0..nc {
            if (i + j) % 2 == 0 {
                continue;
            }
            let (i, j) = (i as i64, j as i64);
            let neighbours = [
                (site(i - 1, j), Pauli::Z),
                (site(i, j + 1), Pauli::X),
                (site(i, j - 1), Pauli::X),
                (site(i + 1, j), Pauli::Z),
            ];
            let schedule = neighbours
                .iter()
                .map(|&(q, p)| q.map(|q| (q, p)))
                .collect();
            stabilizers.push(Stabilizer {
                ancilla: idx(i as usize, j as usize),
                kind: StabKind::Mixed,
                schedule,
            });
        }
    }
    let logical_z = (0..d_z).map(|j| (idx(0, 2 * j), Pauli::Z)).collect();
    let logical_x = (0..d_x).map(|i| (idx(2 * i, 0), Pauli::X)).collect();
    let patch = CodePatch {
        family: CodeFamily::XzzxUnrotated,
        d_x,
        d_z,
        coords,
        is_data,
        stabilizers,
        logical_x,
        logical_z,
    };
    patch.validate()?;
    Ok(patch)
}

/// Minimum weight of a nontrivial logical operator, by exhaustive search
/// over data-qubit Pauli strings up to `max_weight` (inclusive). Letters may
/// be restricted (e.g. `Some(Pauli::Z)` for the phase-flip distance).
/// Returns `None` if no logical exists at or below `max_weight`.
///
/// A string commuting with every generator is a logical exactly when it
/// anticommutes with `logical_x` or `logical_z`: with one encoded qubit the
/// normalizer modulo the stabilizer group is `{I, X̄, Ȳ, Z̄}`.
pub fn min_logical_weight(
    patch: &CodePatch,
    restrict: Option<Pauli>,
    max_weight: usize,
) -> Option<usize> {
    let data = patch.data_qubits();
    let n_stab = patch.stabilizers.len();
    assert!(n_stab <= 256, "exhaustive search supports <= 256 generators");
    // Per (data qubit, letter) bitmasks of anticommuting generators and
    // logicals.
    let letters: Vec<Pauli> = match restrict {
        Some(Pauli::I) => panic!("cannot restrict to the identity letter"),
        Some(p) => vec![p],
        None => vec![Pauli::X, Pauli::Y, Pauli::Z],
    };
    let mut stab_mask = vec![[0u64; 4]; 0];
    let mut log_mask: Vec<u8> = Vec::new();
    let mut choices: Vec<(usize, usize)> = Vec::new(); // (data position, letter idx)
    for (pos, &q) in data.iter().enumerate() {
        for (li, &p) in letters.iter().enumerate() {
            let mut mask = [0u64; 4];
            for (si, stab) in patch.stabilizers.iter().enumerate() {
                let anti = stab
                    .support()
                    .iter()
                    .filter(|&&(sq, sp)| sq == q && p.anticommutes(sp) == 1)
                    .count()
                    % 2;
                if anti == 1 {
                    mask[si / 64] |= 1 << (si % 64);
                }
            }
            let mut lm = 0u8;
            for (bit, logical) in [&patch.logical_x, &patch.logical_z].iter().enumerate() {
                let anti = logical
                    .iter()
                    .filter(|&&(lq, lp)| lq == q && p.anticommutes(lp) == 1)
                    .count()
                    % 2;
                if anti == 1 {
                    lm |= 1 << bit;
                }
            }
            stab_mask.push(mask);
            log_mask.push(lm);
            choices.push((pos, li));
        }
    }
    let per_site = letters.len();
    // Depth-first over supports of increasing weight.
    for w in 1..=max_weight.min(data.len()) {
        let mut stack: Vec<(usize, usize, [u64; 4], u8)> = vec![(0, 0, [0u64; 4], 0u8)];
        // (next data position, picked count, stab syndrome, logical mask)
        while let Some((start, picked, syn, lm)) = stack.pop() {
            if picked == w {
                if syn == [0u64; 4] && lm != 0 {
                    return Some(w);
                }
                continue;
            }
            let remaining = w - picked;
            for pos in start..data.len().saturating_sub(remaining - 1) {
                for li in 0..per_site {
                    let k = pos * per_site + li;
                    let mut syn2 = syn;
                    for (s, m) in syn2.iter_mut().zip(stab_mask[k]) {
                        *s ^= m;
                    }
                    stack.push((pos + 1, picked + 1, syn2, lm ^ log_mask[k]));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_counts_match_family_formulas() {
        let css = build_patch(CodeFamily::CssRotated, 3, 3).unwrap();
        assert_eq!(css.n_qubits(), 17);
        assert_eq!(css.n_data(), 9);
        let xzzx = build_patch(CodeFamily::XzzxUnrotated, 3, 5).unwrap();
        assert_eq!(xzzx.n_qubits(), 45);
        let big = build_patch(CodeFamily::CssRotated, 5, 21).unwrap();
        assert_eq!(big.n_qubits(), 209);
    }

    #[test]
    fn invalid_distances_rejected() {
        assert!(build_patch(CodeFamily::CssRotated, 4, 3).is_err());
        assert!(build_patch(CodeFamily::CssRotated, 1, 5).is_err());
        assert!(build_patch(CodeFamily::XzzxUnrotated, 2, 5).is_err());
        // XZZX degenerates gracefully to a repetition code.
        let rep = build_patch(CodeFamily::XzzxUnrotated, 1, 5).unwrap();
        assert_eq!(rep.n_qubits(), 9);
        assert_eq!(rep.logical_x.len(), 1);
    }

    #[test]
    fn css_stabilizer_census() {
        for (dx, dz) in [(3, 3), (3, 5), (5, 3), (5, 5), (3, 7)] {
            let p = build_patch(CodeFamily::CssRotated, dx, dz).unwrap();
            let nx = p.stabilizers.iter().filter(|s| s.kind == StabKind::X).count();
            let nz = p.stabilizers.iter().filter(|s| s.kind == StabKind::Z).count();
            // The split is uneven on rectangles: the full rows of X-checks
            // run along the horizontal-logical direction.
            assert_eq!(nx, (dz - 1) * (dx + 1) / 2, "X count at ({dx},{dz})");
            assert_eq!(nz, (dx - 1) * (dz + 1) / 2, "Z count at ({dx},{dz})");
            assert_eq!(nx + nz, dx * dz - 1);
            let w2 = p.stabilizers.iter().filter(|s| s.weight() == 2).count();
            let w4 = p.stabilizers.iter().filter(|s| s.weight() == 4).count();
            assert_eq!(w2, (dx - 1) + (dz - 1));
            assert_eq!(w4, (dx - 1) * (dz - 1));
            // Every data qubit participates in at least one generator of
            // each type, and in at most two of each.
            for q in p.data_qubits() {
                for kind in [StabKind::X, StabKind::Z] {
                    let deg = p
                        .stabilizers
                        .iter()
                        .filter(|s| s.kind == kind)
                        .filter(|s| s.support().iter().any(|&(sq, _)| sq == q))
                        .count();
                    assert!((1..=2).contains(&deg), "degree {deg} at qubit {q}");
                }
            }
        }
    }

    #[test]
    fn xzzx_boundary_weights() {
        let p = build_patch(CodeFamily::XzzxUnrotated, 3, 3).unwrap();
        // Unrotated lattice: interior generators weight 4, edge generators
        // weight 3.
        let w3 = p.stabilizers.iter().filter(|s| s.weight() == 3).count();
        let w4 = p.stabilizers.iter().filter(|s| s.weight() == 4).count();
        assert_eq!(w3 + w4, p.stabilizers.len());
        assert!(w3 > 0 && w4 > 0);
        for s in &p.stabilizers {
            let zs = s.support().iter().filter(|&&(_, p)| p == Pauli::Z).count();
            let xs = s.support().iter().filter(|&&(_, p)| p == Pauli::X).count();
            assert!(zs <= 2 && xs <= 2);
        }
    }

    #[test]
    fn logical_weights_are_minimal() {
        // CSS: for pure-type strings the minimum over each type is the
        // distance; a mixed logical's X-part or Z-part is itself a logical
        // of no greater weight, so pure-type search is exhaustive.
        for (dx, dz) in [(3, 3), (3, 5), (5, 3), (5, 5)] {
            let p = build_patch(CodeFamily::CssRotated, dx, dz).unwrap();
            assert_eq!(
                min_logical_weight(&p, Some(Pauli::X), dx),
                Some(dx),
                "X distance at ({dx},{dz})"
            );
            assert_eq!(
                min_logical_weight(&p, Some(Pauli::Z), dz),
                Some(dz),
                "Z distance at ({dx},{dz})"
            );
        }
        // XZZX: mixed-letter search for the overall distance plus
        // pure-letter searches for the per-type distances.
        for (dx, dz) in [(3, 3), (3, 5), (1, 5)] {
            let p = build_patch(CodeFamily::XzzxUnrotated, dx, dz).unwrap();
            let d = dx.min(dz);
            assert_eq!(min_logical_weight(&p, None, d), Some(d), "({dx},{dz})");
            assert_eq!(min_logical_weight(&p, Some(Pauli::Z), dz), Some(dz));
            assert_eq!(min_logical_weight(&p, Some(Pauli::X), dx), Some(dx));
        }
    }

    #[test]
    fn css_schedule_pairs_z_letter_gates_adjacently() {
        // The phase correction accompanying each Z-letter gate must cancel
        // against a time-adjacent partner on the same data qubit with no
        // X-letter gate in between (within a round, or wrapping across the
        // round boundary for qubits whose Z gates sit at steps 1 and 4).
        for (dx, dz) in [(3, 3), (5, 5), (3, 7)] {
            let p = build_patch(CodeFamily::CssRotated, dx, dz).unwrap();
            for q in p.data_qubits() {
                let mut steps: Vec<(usize, Pauli)> = Vec::new();
                for s in &p.stabilizers {
                    for (k, slot) in s.schedule.iter().enumerate() {
                        if let Some((sq, letter)) = slot {
                            if *sq == q {
                                steps.push((k, *letter));
                            }
                        }
                    }
                }
                steps.sort();
                let zs: Vec<usize> = steps
                    .iter()
                    .filter(|(_, l)| *l == Pauli::Z)
                    .map(|&(k, _)| k)
                    .collect();
                if zs.len() == 2 {
                    let in_round = zs[1] == zs[0] + 1;
                    let wraps = zs[0] == 0 && zs[1] == N_STEPS - 1;
                    assert!(in_round || wraps, "qubit {q} Z steps {zs:?}");
                    if in_round {
                        // No X-letter gate between the pair.
                        assert!(!steps
                            .iter()
                            .any(|&(k, l)| l == Pauli::X && k > zs[0] && k < zs[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn patch_serialization_roundtrip() {
        let p = build_patch(CodeFamily::XzzxUnrotated, 3, 3).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        let back: CodePatch = serde_json::from_str(&js).unwrap();
        back.validate().unwrap();
        assert_eq!(back.n_qubits(), p.n_qubits());
    }
}
