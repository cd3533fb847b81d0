//! Pauli operators, strings, and stochastic Pauli channels.
//!
//! String indexing convention: a length-`n` string maps to an integer in
//! base 4 with digit order `I=0, X=1, Y=2, Z=3` and the *first* qubit as
//! the most significant digit. For two-qubit gate channels the first qubit
//! is always the cat (data/control) mode and the second the transmon
//! (ancilla/target), so e.g. `"ZI"` is a phase flip on the cat alone.

use std::collections::BTreeMap;

use ndarray::array;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, DenseOperator};

/// Single-qubit Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// All four Paulis in index order.
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Index `I=0, X=1, Y=2, Z=3`.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    /// Inverse of [`Pauli::index`].
    #[inline]
    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i]
    }

    /// Symplectic coordinates `(x, z)`: `X=(1,0)`, `Z=(0,1)`, `Y=(1,1)`.
    #[inline]
    pub fn xz(self) -> (u8, u8) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        }
    }

    /// Pauli from symplectic coordinates.
    #[inline]
    pub fn from_xz(x: u8, z: u8) -> Pauli {
        match (x & 1, z & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    /// 0 if `self` and `other` commute, 1 if they anticommute.
    #[inline]
    pub fn anticommutes(self, other: Pauli) -> u8 {
        let (xa, za) = self.xz();
        let (xb, zb) = other.xz();
        (xa & zb) ^ (za & xb)
    }

    /// Product `self * other` ignoring the phase.
    #[inline]
    pub fn mul_unsigned(self, other: Pauli) -> Pauli {
        let (xa, za) = self.xz();
        let (xb, zb) = other.xz();
        Pauli::from_xz(xa ^ xb, za ^ zb)
    }

    /// ASCII letter.
    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Parse a letter.
    pub fn from_letter(ch: char) -> Result<Pauli> {
        match ch {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::Format(format!("invalid Pauli letter '{ch}'"))),
        }
    }

    /// 2×2 matrix representation.
    pub fn matrix(self) -> DenseOperator {
        let m = match self {
            Pauli::I => array![[c64(1.0, 0.0), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(1.0, 0.0)]],
            Pauli::X => array![[c64(0.0, 0.0), c64(1.0, 0.0)], [c64(1.0, 0.0), c64(0.0, 0.0)]],
            Pauli::Y => array![[c64(0.0, 0.0), c64(0.0, -1.0)], [c64(0.0, 1.0), c64(0.0, 0.0)]],
            Pauli::Z => array![[c64(1.0, 0.0), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(-1.0, 0.0)]],
        };
        DenseOperator::from_array(m)
    }
}

/// Decode a base-4 string index into `n` Paulis (first qubit = most
/// significant digit).
pub fn string_from_index(idx: usize, n: usize) -> Vec<Pauli> {
    let mut out = vec![Pauli::I; n];
    let mut rem = idx;
    for q in (0..n).rev() {
        out[q] = Pauli::from_index(rem % 4);
        rem /= 4;
    }
    debug_assert_eq!(rem, 0, "index out of range for {n} qubits");
    out
}

/// Encode Paulis into the base-4 string index.
pub fn string_to_index(ps: &[Pauli]) -> usize {
    ps.iter().fold(0, |acc, p| acc * 4 + p.index())
}

/// Human label, e.g. `[Z, I] -> "ZI"`.
pub fn string_label(ps: &[Pauli]) -> String {
    ps.iter().map(|p| p.letter()).collect()
}

/// Parse `"ZI"`-style labels.
pub fn string_from_label(s: &str) -> Result<Vec<Pauli>> {
    s.chars().map(Pauli::from_letter).collect()
}

/// 0/1 symplectic product of two equal-length strings (anticommutation
/// indicator).
pub fn strings_anticommute(a: &[Pauli], b: &[Pauli]) -> u8 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).fold(0u8, |acc, (&p, &q)| acc ^ p.anticommutes(q))
}

/// Dense matrix of a Pauli string (2^n dimensional).
pub fn string_matrix(ps: &[Pauli]) -> DenseOperator {
    let mut m = DenseOperator::identity(1);
    for p in ps {
        m = m.kron(&p.matrix());
    }
    m
}

// ---------------------------------------------------------------------------
// Stochastic Pauli channels
// ---------------------------------------------------------------------------

/// Stochastic Pauli channel on `n` qubits: probabilities indexed by the
/// base-4 string index (`probs[0]` is the identity/no-error weight).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub n: usize,
    pub probs: Vec<f64>,
}

impl PauliChannel {
    /// Identity channel.
    pub fn identity(n: usize) -> Self {
        let mut probs = vec![0.0; 4usize.pow(n as u32)];
        probs[0] = 1.0;
        Self { n, probs }
    }

    /// Channel from an explicit probability vector.
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 4usize.pow(n as u32) {
            return Err(Error::Config(format!(
                "channel on {n} qubits needs {} probabilities, got {}",
                4usize.pow(n as u32),
                probs.len()
            )));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "channel probabilities must be non-negative and sum to 1 (sum={sum})"
            )));
        }
        Ok(Self { n, probs })
    }

    /// Uniform depolarizing channel: total error `p` split evenly over the
    /// `4^n - 1` non-identity strings.
    pub fn depolarizing(n: usize, p: f64) -> Self {
        let m = 4usize.pow(n as u32);
        let each = p / (m - 1) as f64;
        let mut probs = vec![each; m];
        probs[0] = 1.0 - p;
        Self { n, probs }
    }

    /// Total non-identity probability.
    pub fn error_probability(&self) -> f64 {
        1.0 - self.probs[0]
    }

    /// Probability of a specific string by label.
    pub fn prob(&self, label: &str) -> Result<f64> {
        let ps = string_from_label(label)?;
        if ps.len() != self.n {
            return Err(Error::Config(format!(
                "label {label} has wrong length for {}-qubit channel",
                self.n
            )));
        }
        Ok(self.probs[string_to_index(&ps)])
    }

    /// Sum of probabilities of all strings whose action on the listed qubit
    /// is in `set` (e.g. marginal Z-type weight).
    pub fn marginal(&self, qubit: usize, set: &[Pauli]) -> f64 {
        assert!(qubit < self.n);
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let ps = string_from_index(*i, self.n);
                set.contains(&ps[qubit])
            })
            .map(|(_, &p)| p)
            .sum()
    }

    /// Composition (sequential application) of two stochastic channels on
    /// the same qubits: probabilities convolve under string multiplication.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let m = self.probs.len();
        let mut out = vec![0.0; m];
        for (i, &pi) in self.probs.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let si = string_from_index(i, self.n);
            for (j, &pj) in other.probs.iter().enumerate() {
                if pj == 0.0 {
                    continue;
                }
                let sj = string_from_index(j, self.n);
                let prod: Vec<Pauli> = si
                    .iter()
                    .zip(sj.iter())
                    .map(|(&a, &b)| a.mul_unsigned(b))
                    .collect();
                out[string_to_index(&prod)] += pi * pj;
            }
        }
        Self { n: self.n, probs: out }
    }

    /// Named map `{"IX": p, ...}` over non-identity strings with nonzero
    /// probability (sorted for stable serialization).
    pub fn to_named_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        for (i, &p) in self.probs.iter().enumerate() {
            if i == 0 || p == 0.0 {
                continue;
            }
            map.insert(string_label(&string_from_index(i, self.n)), p);
        }
        map
    }

    /// Rebuild from a named map; the identity weight is the complement.
    pub fn from_named_map(n: usize, map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut probs = vec![0.0; 4usize.pow(n as u32)];
        let mut total = 0.0;
        for (label, &p) in map {
            let ps = string_from_label(label)?;
            if ps.len() != n {
                return Err(Error::Format(format!(
                    "pauli label {label} has wrong length (expected {n})"
                )));
            }
            let idx = string_to_index(&ps);
            if idx == 0 {
                return Err(Error::Format("identity entry not allowed in map".into()));
            }
            probs[idx] = p;
            total += p;
        }
        probs[0] = 1.0 - total;
        Self::new(n, probs)
    }

    /// Draw a string index given a uniform variate `u ∈ [0,1)`.
    pub fn sample(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for idx in 0..16 {
            let s = string_from_index(idx, 2);
            assert_eq!(string_to_index(&s), idx);
        }
        assert_eq!(string_label(&string_from_index(4 * 3 + 0, 2)), "ZI");
        assert_eq!(string_label(&string_from_index(1, 2)), "IX");
    }

    #[test]
    fn commutation_table() {
        use Pauli::*;
        assert_eq!(X.anticommutes(Z), 1);
        assert_eq!(X.anticommutes(Y), 1);
        assert_eq!(X.anticommutes(X), 0);
        assert_eq!(I.anticommutes(Z), 0);
        // XZ vs ZX on two qubits: anticommute twice => commute.
        assert_eq!(strings_anticommute(&[X, Z], &[Z, X]), 0);
        assert_eq!(strings_anticommute(&[X, I], &[Z, X]), 1);
    }

    #[test]
    fn matrices_anticommute_when_flagged() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let ma = a.matrix();
                let mb = b.matrix();
                let ab = ma.mul(&mb);
                let ba = mb.mul(&ma);
                let diff = if a.anticommutes(b) == 1 {
                    ab.add(&ba)
                } else {
                    ab.sub(&ba)
                };
                assert!(diff.max_abs() < 1e-15, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn mul_unsigned_matches_matrices() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let want = a.mul_unsigned(b).matrix();
                let got = a.matrix().mul(&b.matrix());
                // Equal up to a phase: |tr(want† got)| = 2.
                let ip = want.hs_inner(&got).norm();
                assert!((ip - 2.0).abs() < 1e-12, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn named_map_roundtrip() {
        let mut probs = vec![0.0; 16];
        probs[string_to_index(&[Pauli::Z, Pauli::I])] = 0.02;
        probs[string_to_index(&[Pauli::Z, Pauli::Z])] = 0.01;
        probs[string_to_index(&[Pauli::I, Pauli::X])] = 0.005;
        probs[0] = 1.0 - 0.035;
        let ch = PauliChannel::new(2, probs).unwrap();
        let map = ch.to_named_map();
        assert_eq!(map.len(), 3);
        let back = PauliChannel::from_named_map(2, &map).unwrap();
        for (a, b) in ch.probs.iter().zip(back.probs.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn compose_convolves() {
        // Z with prob p twice => Z² = I: error prob 2p(1-p).
        let p = 0.1;
        let ch = PauliChannel::new(1, vec![1.0 - p, 0.0, 0.0, p]).unwrap();
        let twice = ch.compose(&ch);
        assert!((twice.probs[3] - 2.0 * p * (1.0 - p)).abs() < 1e-15);
        assert!((twice.probs[0] - (1.0 - 2.0 * p * (1.0 - p))).abs() < 1e-15);
    }

    #[test]
    fn marginal_weights() {
        let ch = PauliChannel::depolarizing(2, 0.15);
        // Any single-qubit marginal of depolarizing: strings with Z on qubit 0:
        // 4 of 15 strings.
        let mz = ch.marginal(0, &[Pauli::Z]);
        assert!((mz - 0.15 * 4.0 / 15.0).abs() < 1e-12);
        let sum_id = ch.marginal(1, &[Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]);
        assert!((sum_id - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_hits_all_strings() {
        let ch = PauliChannel::depolarizing(1, 0.3);
        let rng = crate::rng::CounterRng::new(5);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for i in 0..n {
            counts[ch.sample(rng.uniform(i, 0))] += 1;
        }
        assert!((counts[0] as f64 / n as f64 - 0.7).abs() < 0.01);
        for c in &counts[1..] {
            assert!((*c as f64 / n as f64 - 0.1).abs() < 0.01);
        }
    }
}
