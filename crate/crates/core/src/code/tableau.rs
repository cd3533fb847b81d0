//! Aaronson–Gottesman stabilizer simulation with exact sign tracking.
//!
//! The circuit compiler replaces cat-controlled entangling gates by CX plus
//! phase corrections whose signs must cancel exactly; a Pauli-frame sampler
//! is blind to such sign errors because it only propagates error frames.
//! This simulator executes the *ideal* part of a compiled circuit (noise
//! instructions are skipped) with full phase bookkeeping, so a test can
//! assert that every detector parity is identically zero and every
//! observable is deterministic — the property the frame sampler relies on.

use crate::code::circuit::{Instruction, StabilizerCircuit};
use crate::rng::CounterRng;

/// Bit-packed Pauli row (sign, X bits, Z bits).
#[derive(Clone)]
struct Row {
    x: Vec<u64>,
    z: Vec<u64>,
    r: bool,
}

impl Row {
    fn zero(words: usize) -> Self {
        Row { x: vec![0; words], z: vec![0; words], r: false }
    }
}

/// Stabilizer tableau over `n` qubits: rows `0..n` are destabilizers,
/// rows `n..2n` stabilizers, initialised to the all-`|0⟩` state.
pub struct Tableau {
    n: usize,
    words: usize,
    rows: Vec<Row>,
}

#[inline]
fn get(bits: &[u64], q: usize) -> bool {
    bits[q / 64] >> (q % 64) & 1 == 1
}

#[inline]
fn flip(bits: &mut [u64], q: usize) {
    bits[q / 64] ^= 1 << (q % 64);
}

/// Signed count of `i` factors when left-multiplying row `a` onto row `b`,
/// per the Aaronson–Gottesman `g` function, summed over qubits.
fn g_sum(a: &Row, b: &Row) -> i64 {
    let mut acc = 0i64;
    for w in 0..a.x.len() {
        let (xa, za, xb, zb) = (a.x[w], a.z[w], b.x[w], b.z[w]);
        let plus = (xa & za & !xb & zb) | (xa & !za & xb & zb) | (!xa & za & xb & !zb);
        let minus = (xa & za & xb & !zb) | (xa & !za & !xb & zb) | (!xa & za & xb & zb);
        acc += plus.count_ones() as i64 - minus.count_ones() as i64;
    }
    acc
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        let mut rows = vec![Row::zero(words); 2 * n];
        for q in 0..n {
            flip(&mut rows[q].x, q); // destabilizer X_q
            flip(&mut rows[n + q].z, q); // stabilizer Z_q
        }
        Tableau { n, words, rows }
    }

    /// row[h] := row[i] · row[h] with exact sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (src, dst) = if i < h {
            let (lo, hi) = self.rows.split_at_mut(h);
            (&lo[i], &mut hi[0])
        } else {
            let (lo, hi) = self.rows.split_at_mut(i);
            (&hi[0], &mut lo[h])
        };
        let total = 2 * (dst.r as i64) + 2 * (src.r as i64) + g_sum(src, dst);
        debug_assert_eq!(total.rem_euclid(2), 0);
        dst.r = total.rem_euclid(4) == 2;
        for w in 0..src.x.len() {
            dst.x[w] ^= src.x[w];
            dst.z[w] ^= src.z[w];
        }
    }

    pub fn h(&mut self, q: usize) {
        for row in &mut self.rows {
            let (x, z) = (get(&row.x, q), get(&row.z, q));
            row.r ^= x && z;
            if x != z {
                flip(&mut row.x, q);
                flip(&mut row.z, q);
            }
        }
    }

    /// Phase gate S = diag(1, i): X → Y, Y → −X.
    pub fn s(&mut self, q: usize) {
        for row in &mut self.rows {
            let (x, z) = (get(&row.x, q), get(&row.z, q));
            row.r ^= x && z;
            if x {
                flip(&mut row.z, q);
            }
        }
    }

    /// Inverse phase gate S† = diag(1, −i): X → −Y, Y → X.
    pub fn sdg(&mut self, q: usize) {
        for row in &mut self.rows {
            let (x, z) = (get(&row.x, q), get(&row.z, q));
            row.r ^= x && !z;
            if x {
                flip(&mut row.z, q);
            }
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for row in &mut self.rows {
            let (xc, zc) = (get(&row.x, c), get(&row.z, c));
            let (xt, zt) = (get(&row.x, t), get(&row.z, t));
            row.r ^= xc && zt && !(xt ^ zc);
            if xc {
                flip(&mut row.x, t);
            }
            if zt {
                flip(&mut row.z, c);
            }
        }
    }

    fn x_gate(&mut self, q: usize) {
        for row in &mut self.rows {
            row.r ^= get(&row.z, q);
        }
    }

    /// Z-basis measurement; `coin` supplies the outcome on the random
    /// branch and is ignored on the deterministic branch.
    pub fn measure_z(&mut self, q: usize, coin: bool) -> bool {
        let n = self.n;
        let p = (n..2 * n).find(|&p| get(&self.rows[p].x, q));
        match p {
            Some(p) => {
                for i in 0..2 * n {
                    if i != p && get(&self.rows[i].x, q) {
                        self.rowsum(i, p);
                    }
                }
                self.rows[p - n] = self.rows[p].clone();
                let mut fresh = Row::zero(self.words);
                flip(&mut fresh.z, q);
                fresh.r = coin;
                self.rows[p] = fresh;
                coin
            }
            None => {
                // Outcome determined: accumulate the stabilizer product
                // indicated by destabilizers anticommuting with Z_q.
                let scratch = 2 * n;
                self.rows.push(Row::zero(self.words));
                for i in 0..n {
                    if get(&self.rows[i].x, q) {
                        self.rowsum(scratch, i + n);
                    }
                }
                let out = self.rows[scratch].r;
                self.rows.pop();
                out
            }
        }
    }

    pub fn measure_x(&mut self, q: usize, coin: bool) -> bool {
        self.h(q);
        let out = self.measure_z(q, coin);
        self.h(q);
        out
    }

    pub fn reset_z(&mut self, q: usize, coin: bool) {
        if self.measure_z(q, coin) {
            self.x_gate(q);
        }
    }

    pub fn reset_x(&mut self, q: usize, coin: bool) {
        self.h(q);
        self.reset_z(q, coin);
        self.h(q);
    }
}

/// Execute the ideal (noise-free) part of a compiled circuit, drawing
/// measurement coins from `(shot, measurement index)` so runs are
/// reproducible but explore random branches. Returns one outcome bit per
/// measurement.
pub fn ideal_measurements(circuit: &StabilizerCircuit, rng: &CounterRng, shot: u64) -> Vec<bool> {
    let mut tab = Tableau::new(circuit.n_qubits);
    let mut outcomes = Vec::with_capacity(circuit.n_measurements);
    let mut draws: u64 = 0;
    let coin = |draws: &mut u64| {
        *draws += 1;
        rng.bits3(shot, *draws, 0xC0_1E) & 1 == 1
    };
    for inst in &circuit.instructions {
        match inst {
            Instruction::ResetZ(qs) => {
                for &q in qs {
                    let c = coin(&mut draws);
                    tab.reset_z(q as usize, c);
                }
            }
            Instruction::ResetX(qs) => {
                for &q in qs {
                    let c = coin(&mut draws);
                    tab.reset_x(q as usize, c);
                }
            }
            Instruction::MeasureZ(qs) => {
                for &q in qs {
                    let c = coin(&mut draws);
                    let m = tab.measure_z(q as usize, c);
                    outcomes.push(m);
                }
            }
            Instruction::MeasureX(qs) => {
                for &q in qs {
                    let c = coin(&mut draws);
                    let m = tab.measure_x(q as usize, c);
                    outcomes.push(m);
                }
            }
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs {
                    tab.cx(c as usize, t as usize);
                }
            }
            Instruction::Hadamard(qs) => {
                for &q in qs {
                    tab.h(q as usize);
                }
            }
            Instruction::SPhase(qs) => {
                for &q in qs {
                    tab.s(q as usize);
                }
            }
            Instruction::SPhaseDag(qs) => {
                for &q in qs {
                    tab.sdg(q as usize);
                }
            }
            Instruction::Pauli1 { .. } | Instruction::Pauli2 { .. } | Instruction::Tick => {}
        }
    }
    debug_assert_eq!(outcomes.len(), circuit.n_measurements);
    outcomes
}

/// Detector and observable parities for a set of measurement outcomes.
pub fn detector_parities(
    circuit: &StabilizerCircuit,
    outcomes: &[bool],
) -> (Vec<bool>, Vec<bool>) {
    let det = circuit
        .detectors
        .iter()
        .map(|d| {
            d.measurements
                .iter()
                .fold(false, |acc, &m| acc ^ outcomes[m as usize])
        })
        .collect();
    let obs = circuit
        .observables
        .iter()
        .map(|ms| ms.iter().fold(false, |acc, &m| acc ^ outcomes[m as usize]))
        .collect();
    (det, obs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_correlations() {
        // |000⟩ → GHZ; Z⊗Z parities agree, single-qubit Z outcomes random
        // but correlated.
        for trial in 0..8u64 {
            let mut tab = Tableau::new(3);
            tab.h(0);
            tab.cx(0, 1);
            tab.cx(1, 2);
            let coin = trial & 1 == 1;
            let m0 = tab.measure_z(0, coin);
            let m1 = tab.measure_z(1, false);
            let m2 = tab.measure_z(2, true);
            assert_eq!(m0, coin, "first measurement follows the coin");
            assert_eq!(m0, m1);
            assert_eq!(m1, m2);
        }
    }

    #[test]
    fn phase_gate_signs_are_exact() {
        // On |+⟩: S·S = Z flips the X outcome; S†·S is the identity.
        let mut tab = Tableau::new(1);
        tab.reset_x(0, false);
        tab.s(0);
        tab.s(0);
        assert!(tab.measure_x(0, false), "S^2 = Z must flip |+⟩ to |−⟩");

        let mut tab = Tableau::new(1);
        tab.reset_x(0, false);
        tab.s(0);
        tab.sdg(0);
        assert!(!tab.measure_x(0, true), "S†S must act as the identity");

        // S|+⟩ is a Y eigenstate: X outcome random, and S X S† = Y means a
        // subsequent S† restores determinism.
        let mut tab = Tableau::new(1);
        tab.reset_x(0, false);
        tab.s(0);
        tab.sdg(0);
        tab.s(0);
        tab.sdg(0);
        assert!(!tab.measure_x(0, true));
    }

    #[test]
    fn deterministic_measurements_ignore_coin() {
        let mut tab = Tableau::new(2);
        assert!(!tab.measure_z(0, true));
        tab.h(0);
        tab.cx(0, 1);
        // Z0 Z1 is a stabilizer: measuring Z0 then Z1 gives equal bits.
        let a = tab.measure_z(0, true);
        let b = tab.measure_z(1, false);
        assert_eq!(a, b);
        assert!(a, "random branch must take the coin value");
    }

    #[test]
    fn reset_forces_zero() {
        let mut tab = Tableau::new(1);
        tab.h(0);
        tab.reset_z(0, true);
        assert!(!tab.measure_z(0, true));
        tab.reset_x(0, true);
        assert!(!tab.measure_x(0, false));
    }
}
