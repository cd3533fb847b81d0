//! Gate-level simulation of the cat–transmon gate set.
//!
//! Three physical operations are modeled, each as a completely positive map
//! on the oscillator(⊗transmon) Hilbert space that is then reduced to a
//! logical Pauli channel by tomography on the encoded code space:
//!
//! * **CX** — free dispersive evolution for `π/χ`: the transmon-state-
//!   dependent oscillator rotation `exp(-iπn̂)` maps the cat codewords onto
//!   each other (control = transmon, target = cat). With a three-level
//!   transmon and matched shifts `χ_e = χ_f`, a single transmon decay
//!   `|f⟩→|e⟩` leaves the accumulated phase intact, preserving the noise
//!   bias.
//! * **CRX** — a displacement / selective-rotation echo sequence in which
//!   short resonant pulses rotate the transmon conditioned on the
//!   oscillator occupying the displaced vacuum branch (control = cat,
//!   target = transmon). The dispersive coupling is active only during the
//!   selective pulses; the sequence is echoed so that the deterministic
//!   dispersive phase `φ = χ T_sel` is branch-independent and can be undone
//!   by a final frame correction.
//! * **Idle** — pure storage under single-photon loss, oscillator
//!   dephasing, and (optionally) the engineered two-photon dissipation
//!   `D[a² − α²]` that confines the cat manifold. The engineered
//!   dissipation is *off* during CX and CRX.
//!
//! Error channels are extracted by conjugating encoded Pauli operators with
//! the noisy gate, applying the ideal recovery map (transmon leakage return
//! plus infinite-time two-photon dissipation, projected onto the code
//! space), and reading off the diagonal of the logical Pauli-transfer
//! matrix. A Walsh transform over the anticommutation pairing converts that
//! diagonal to Pauli-string probabilities.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    propagate_adjoint_observable, propagate_density, AmpFn, CatTransmon, DriveTerm, NoiseRates,
    PropagationOptions, Schedule,
};
use crate::error::{Error, Result};
use crate::hilbert::{self, Parity};
use crate::linalg::{c64, C64, DenseOperator};
use crate::pauli::{
    string_from_index, string_matrix, strings_anticommute, Pauli, PauliChannel,
};
use crate::pulses::{
    log_spaced, nelder_mead, two_level_unitary, Envelope, EnvelopeKind, EnvelopeSpec,
    NelderMeadOptions,
};

/// Integration tolerance for noisy gate propagation. Bit-flip probabilities
/// reach `~1e-6`, so the per-run integration error must sit well below that.
const GATE_TOL: f64 = 1e-10;

/// Integration tolerance for the recovery-map construction.
const RECOVERY_TOL: f64 = 1e-10;

/// Dimensionless duration (units of `1/(κ₂|α|²)`) after which the two-photon
/// dissipation map is considered converged to its infinite-time limit.
const RECOVERY_TIME_FACTOR: f64 = 50.0;

/// Relative change over one extra check interval below which the recovery
/// propagation is accepted as converged. A genuinely unconverged slow mode
/// would leave a residual orders of magnitude above integrator noise.
const RECOVERY_CONVERGENCE_TOL: f64 = 1e-8;

/// Pauli-transfer diagonals may produce slightly negative string
/// probabilities from integration error; anything below `-NONPHYSICAL_TOL`
/// is rejected as a genuinely non-physical channel.
const NONPHYSICAL_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Gate specification
// ---------------------------------------------------------------------------

/// Which transmon levels carry the CX control qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmonSubspace {
    /// Two-level `{|g⟩, |e⟩}` encoding: simple but a single decay destroys
    /// the accumulated dispersive phase (bias-compromising).
    Ge,
    /// Three-level `{|g⟩, |f⟩}` encoding with matched shifts `χ_e = χ_f`:
    /// one decay `|f⟩→|e⟩` is transparent to the oscillator phase.
    Gf,
}

/// CRX pulse-sequence variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrxVariant {
    /// Nine-step echoed sequence (4 selective π/4 pulses, 2 unselective π
    /// pulses, 3 displacements): first-order insensitive to selectivity
    /// errors and keeps the noise bias exponential in `|α|²`.
    Full9,
    /// Five-step sequence (2 selective π/2 pulses, 1 unselective π pulse,
    /// 2 displacements): shorter but with weaker error suppression.
    Simple5,
}

/// Gate selector for [`GateSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    CxGf,
    CxGe,
    CrxFull9,
    CrxSimple5,
    Idle,
}

/// One labeled interval of a gate's pulse schedule (instantaneous steps have
/// zero duration).
#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    pub label: String,
    pub duration: f64,
    /// Whether the dispersive coupling is active during the interval.
    pub chi_on: bool,
}

/// Serializable description of one gate instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    /// Cat amplitude (the codewords are `|±α⟩` superpositions).
    pub alpha: C64,
    /// Dispersive shift; sets the time unit (`T_gate = π/χ`).
    pub chi: f64,
    /// Selective-pulse envelope (CRX kinds only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeSpec>,
    /// Engineered-dissipation strength `κ₂/χ` (idle only; defaults to 0.1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa2_over_chi: Option<f64>,
    /// Idle duration in units of `1/χ` (defaults to π, one gate window).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_chi: Option<f64>,
}

impl GateSpec {
    pub fn cx_gf(alpha: C64, chi: f64) -> Self {
        Self { kind: GateKind::CxGf, alpha, chi, envelope: None, kappa2_over_chi: None, duration_chi: None }
    }

    pub fn cx_ge(alpha: C64, chi: f64) -> Self {
        Self { kind: GateKind::CxGe, alpha, chi, envelope: None, kappa2_over_chi: None, duration_chi: None }
    }

    pub fn crx(alpha: C64, chi: f64, envelope: EnvelopeSpec, variant: CrxVariant) -> Self {
        let kind = match variant {
            CrxVariant::Full9 => GateKind::CrxFull9,
            CrxVariant::Simple5 => GateKind::CrxSimple5,
        };
        Self { kind, alpha, chi, envelope: Some(envelope), kappa2_over_chi: None, duration_chi: None }
    }

    pub fn idle(alpha: C64, chi: f64, kappa2_over_chi: f64, duration_chi: Option<f64>) -> Self {
        Self {
            kind: GateKind::Idle,
            alpha,
            chi,
            envelope: None,
            kappa2_over_chi: Some(kappa2_over_chi),
            duration_chi,
        }
    }

    /// Stable string name of the gate kind.
    pub fn label(&self) -> &'static str {
        match self.kind {
            GateKind::CxGf => "cx_gf",
            GateKind::CxGe => "cx_ge",
            GateKind::CrxFull9 => "crx_full9",
            GateKind::CrxSimple5 => "crx_simple5",
            GateKind::Idle => "idle",
        }
    }

    /// Largest mean photon number visited, which sets the Fock cutoff.
    /// CRX displaces the far branch out to `|2α|²`.
    pub fn mean_photon(&self) -> f64 {
        let n = self.alpha.norm_sqr();
        match self.kind {
            GateKind::CrxFull9 | GateKind::CrxSimple5 => 4.0 * n,
            _ => n,
        }
    }

    /// Fock-space truncation used by [`GateSpec::simulate`].
    pub fn cutoff(&self) -> usize {
        hilbert::fock_cutoff(self.mean_photon())
    }

    /// The gate's pulse schedule as labeled segments (total duration is the
    /// gate window `π/χ` for CX and CRX). Fails when the CRX selective
    /// pulses do not fit in the window or required fields are missing.
    pub fn schedule(&self) -> Result<Vec<Segment>> {
        let window = PI / self.chi;
        let seg = |label: &str, duration: f64, chi_on: bool| Segment {
            label: label.to_string(),
            duration,
            chi_on,
        };
        match self.kind {
            GateKind::CxGf | GateKind::CxGe => {
                Ok(vec![seg("free dispersive evolution", window, true)])
            }
            GateKind::Idle => {
                let duration = self.duration_chi.unwrap_or(PI) / self.chi;
                Ok(vec![seg("storage idle", duration, false)])
            }
            GateKind::CrxFull9 | GateKind::CrxSimple5 => {
                let variant = match self.kind {
                    GateKind::CrxFull9 => CrxVariant::Full9,
                    _ => CrxVariant::Simple5,
                };
                let env = self.envelope.as_ref().ok_or_else(|| {
                    Error::Config("CRX gate needs a selective-pulse envelope".into())
                })?;
                let plan = CrxPlan::new(self.chi, env.t_sel, variant)?;
                let mut out = Vec::new();
                let idle = |out: &mut Vec<Segment>| {
                    out.push(seg("idle (coupler off)", plan.idle_duration, false))
                };
                match variant {
                    CrxVariant::Full9 => {
                        out.push(seg("displacement D(α)", 0.0, false));
                        idle(&mut out);
                        out.push(seg("selective +π/4", plan.t_sel, true));
                        out.push(seg("unselective π", 0.0, false));
                        idle(&mut out);
                        out.push(seg("selective +π/4", plan.t_sel, true));
                        out.push(seg("displacement D(−2αe^{−iφ})", 0.0, false));
                        idle(&mut out);
                        out.push(seg("selective −π/4", plan.t_sel, true));
                        out.push(seg("unselective −π", 0.0, false));
                        idle(&mut out);
                        out.push(seg("selective −π/4", plan.t_sel, true));
                        out.push(seg("displacement D(αe^{−2iφ})", 0.0, false));
                        idle(&mut out);
                        out.push(seg("frame correction", 0.0, false));
                    }
                    CrxVariant::Simple5 => {
                        out.push(seg("displacement D(α)", 0.0, false));
                        idle(&mut out);
                        out.push(seg("selective +π/2", plan.t_sel, true));
                        out.push(seg("unselective π", 0.0, false));
                        idle(&mut out);
                        out.push(seg("selective +π/2", plan.t_sel, true));
                        out.push(seg("displacement D(−αe^{−iφ})", 0.0, false));
                        idle(&mut out);
                        out.push(seg("frame correction", 0.0, false));
                    }
                }
                Ok(out)
            }
        }
    }

    /// Simulate the gate under the given noise rates and reduce it to a
    /// logical Pauli channel.
    pub fn simulate(&self, rates: &NoiseRates) -> Result<GateOutcome> {
        match self.kind {
            GateKind::CxGf => simulate_cx(rates, self.chi, self.alpha, TransmonSubspace::Gf),
            GateKind::CxGe => simulate_cx(rates, self.chi, self.alpha, TransmonSubspace::Ge),
            GateKind::CrxFull9 | GateKind::CrxSimple5 => {
                let variant = match self.kind {
                    GateKind::CrxFull9 => CrxVariant::Full9,
                    _ => CrxVariant::Simple5,
                };
                let env = self
                    .envelope
                    .as_ref()
                    .ok_or_else(|| Error::Config("CRX gate needs a selective-pulse envelope".into()))?
                    .build()?;
                simulate_crx(rates, self.chi, self.alpha, &env, variant)
            }
            GateKind::Idle => simulate_idle(
                rates,
                self.chi,
                self.alpha,
                self.kappa2_over_chi.unwrap_or(0.1),
                self.duration_chi.map(|d| d / self.chi),
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Code space and ideal gates
// ---------------------------------------------------------------------------

/// An orthonormal encoded basis inside the physical Hilbert space, with
/// embedding/projection between `2^n × 2^n` logical operators and
/// physical-space operators. The cat codewords `|0_C⟩, |1_C⟩` (even/odd
/// superpositions of `|±α⟩`) are exactly orthonormal.
pub struct CodeSpace {
    words: Vec<Array1<C64>>,
    n_qubits: usize,
    dim: usize,
}

impl CodeSpace {
    /// Cat ⊗ transmon code: qubit 0 is the cat, qubit 1 the transmon with
    /// the two listed levels (word order `|cat⟩⊗|level⟩`, cat-major).
    pub fn cat_transmon(
        alpha: C64,
        osc_dim: usize,
        qudit_dim: usize,
        levels: (usize, usize),
    ) -> Result<Self> {
        if levels.0 >= qudit_dim || levels.1 >= qudit_dim || levels.0 == levels.1 {
            return Err(Error::Config(format!(
                "transmon code levels {levels:?} out of range for {qudit_dim} levels"
            )));
        }
        let mut words = Vec::with_capacity(4);
        for bit in 0..2u8 {
            let cat = hilbert::cat_codeword(alpha, bit, osc_dim, 1e-9)?;
            for &level in [levels.0, levels.1].iter() {
                let mut w = Array1::from_elem(osc_dim * qudit_dim, c64(0.0, 0.0));
                for n in 0..osc_dim {
                    w[n * qudit_dim + level] = cat[n];
                }
                words.push(w);
            }
        }
        Ok(Self { words, n_qubits: 2, dim: osc_dim * qudit_dim })
    }

    /// Cat-only code on a bare oscillator (one logical qubit).
    pub fn cat_only(alpha: C64, osc_dim: usize) -> Result<Self> {
        let words = vec![
            hilbert::cat_codeword(alpha, 0, osc_dim, 1e-9)?,
            hilbert::cat_codeword(alpha, 1, osc_dim, 1e-9)?,
        ];
        Ok(Self { words, n_qubits: 1, dim: osc_dim })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Dimension of the logical operator space (`2^n`).
    pub fn logical_dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Lift a logical operator to the physical space:
    /// `Σ_ij m[i,j] |w_i⟩⟨w_j|`.
    pub fn embed(&self, small: &DenseOperator) -> DenseOperator {
        assert_eq!(small.dim(), self.words.len());
        let mut out = DenseOperator::zeros(self.dim);
        for (i, wi) in self.words.iter().enumerate() {
            for (j, wj) in self.words.iter().enumerate() {
                let c = small.mat()[(i, j)];
                if c != c64(0.0, 0.0) {
                    out.axpy(c, &DenseOperator::outer(wi, wj));
                }
            }
        }
        out
    }

    /// Compress a physical operator to the code space: `[i,j] = ⟨w_i|A|w_j⟩`.
    pub fn project(&self, big: &DenseOperator) -> DenseOperator {
        assert_eq!(big.dim(), self.dim);
        let cols: Vec<Array1<C64>> = self.words.iter().map(|w| big.apply_vec(w)).collect();
        DenseOperator::from_fn(self.words.len(), |i, j| {
            self.words[i]
                .iter()
                .zip(cols[j].iter())
                .map(|(a, b)| a.conj() * b)
                .sum()
        })
    }
}

/// `R_X(θ) = exp(-iθX/2)` on two levels.
fn rx_matrix(theta: f64) -> DenseOperator {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    DenseOperator::from_fn(2, |i, j| if i == j { c64(c, 0.0) } else { c64(0.0, -s) })
}

/// Ideal encoded CX: control = transmon (qubit 1), target = cat (qubit 0).
pub fn ideal_cx() -> DenseOperator {
    DenseOperator::from_fn(4, |r, c| {
        let (cat_r, t_r) = (r >> 1, r & 1);
        let (cat_c, t_c) = (c >> 1, c & 1);
        if t_r != t_c {
            c64(0.0, 0.0)
        } else if t_r == 0 {
            if cat_r == cat_c { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
        } else if cat_r != cat_c {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Ideal encoded CRX: control = cat (qubit 0), target = transmon (qubit 1),
/// applying `R_X(π) = -iX` on the `|1_C⟩` branch.
pub fn ideal_crx() -> DenseOperator {
    DenseOperator::from_fn(4, |r, c| {
        let (cat_r, t_r) = (r >> 1, r & 1);
        let (cat_c, t_c) = (c >> 1, c & 1);
        if cat_r != cat_c {
            c64(0.0, 0.0)
        } else if cat_r == 0 {
            if t_r == t_c { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
        } else if t_r != t_c {
            c64(0.0, -1.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

// ---------------------------------------------------------------------------
// Recovery maps
// ---------------------------------------------------------------------------

/// Oscillator annihilation operator `a = Σ √n |n-1⟩⟨n|`.
fn lowering(dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, |i, j| {
        if j == i + 1 { c64((j as f64).sqrt(), 0.0) } else { c64(0.0, 0.0) }
    })
}

/// Two-photon confinement jump operator `a² − α²` (unit rate).
fn two_photon_op(alpha: C64, dim: usize) -> DenseOperator {
    let a = lowering(dim);
    let mut l = a.mul(&a);
    l.axpy(-alpha * alpha, &DenseOperator::identity(dim));
    l
}

/// Infinite-time map of the engineered two-photon dissipation
/// `D[a² − α²]`, restricted to an oscillator of dimension `osc_dim` and
/// expressed in Heisenberg (dual) form:
///
/// `P_∞(ρ) = Σ_ab tr[J_ab† ρ] · |C_a⟩⟨C_b|`,  a, b ∈ {+, −} (photon parity),
///
/// where the `J_ab` are the conserved quantities of the dissipative flow.
/// The diagonal duals are *exactly* the parity projectors (the jump operator
/// preserves photon parity); the off-diagonal dual is obtained from one
/// adjoint-equation propagation of `|C_+⟩⟨C_-|` and normalized so that the
/// map fixes the code space. Parity structure makes the cross-Gram terms
/// vanish identically, so no further orthogonalization is needed.
///
/// Construction cost is one oscillator-only propagation per `(α, osc_dim)`;
/// instances are cached process-wide (see [`storage_recovery`]).
pub struct StorageRecovery {
    osc_dim: usize,
    /// Dual observables `J_ab` paired with code dyads, order (++, +-, -+, --).
    duals: Vec<DenseOperator>,
    /// Code dyads `|C_a⟩⟨C_b|` in the same order.
    dyads: Vec<DenseOperator>,
}

impl StorageRecovery {
    pub fn new(alpha: C64, osc_dim: usize) -> Result<Self> {
        let nbar = alpha.norm_sqr();
        if nbar <= 0.0 {
            return Err(Error::Config("storage recovery needs |α| > 0".into()));
        }
        let cat_p = hilbert::cat_state(alpha, Parity::Even, osc_dim, 1e-9)?;
        let cat_m = hilbert::cat_state(alpha, Parity::Odd, osc_dim, 1e-9)?;
        let dyads = vec![
            DenseOperator::outer(&cat_p, &cat_p),
            DenseOperator::outer(&cat_p, &cat_m),
            DenseOperator::outer(&cat_m, &cat_p),
            DenseOperator::outer(&cat_m, &cat_m),
        ];

        // Even/odd parity projectors are exactly conserved: the jump operator
        // commutes with parity, so the adjoint generator annihilates them.
        let j_even = hilbert::parity_projector(Parity::Even, osc_dim);
        let j_odd = hilbert::parity_projector(Parity::Odd, osc_dim);

        // The coherence dual comes from propagating the (+,-) code dyad under
        // the adjoint flow until it stops changing.
        let collapse = [two_photon_op(alpha, osc_dim)];
        let opts = PropagationOptions { tol: RECOVERY_TOL, ..Default::default() };
        let horizon = RECOVERY_TIME_FACTOR / nbar;
        let (j_raw, _) = propagate_adjoint_observable(&collapse, &dyads[1], horizon, &opts)?;
        // Convergence check: one extra interval must leave it unchanged.
        let (j_check, _) =
            propagate_adjoint_observable(&collapse, &j_raw, horizon / RECOVERY_TIME_FACTOR, &opts)?;
        let rel = j_check.max_abs_diff(&j_raw) / j_raw.max_abs().max(f64::MIN_POSITIVE);
        if rel > RECOVERY_CONVERGENCE_TOL {
            return Err(Error::ConvergenceFailure(format!(
                "two-photon recovery dual not stationary after t = {horizon}: residual {rel:.2e}"
            )));
        }
        // Normalize so the map fixes |C_+⟩⟨C_-| exactly: tr[J† σ] = 1.
        let overlap = j_raw.hs_inner(&dyads[1]);
        if overlap.norm() < 1e-6 {
            return Err(Error::ConvergenceFailure(format!(
                "two-photon recovery dual nearly orthogonal to the code dyad (|c| = {:.2e})",
                overlap.norm()
            )));
        }
        let j_pm = j_raw.scale(c64(1.0, 0.0) / overlap.conj());
        let j_mp = j_pm.dagger();

        Ok(Self { osc_dim, duals: vec![j_even, j_pm, j_mp, j_odd], dyads })
    }

    /// Apply the recovery to a density operator on oscillator ⊗ qudit
    /// (`qudit_dim = 1` for a bare oscillator). Acts as the identity on the
    /// qudit factor and is exactly trace preserving.
    pub fn apply(&self, rho: &DenseOperator, qudit_dim: usize) -> DenseOperator {
        let dim = rho.dim();
        assert_eq!(dim, self.osc_dim * qudit_dim, "state dimension mismatch");
        let mut out = DenseOperator::zeros(dim);
        for (j_op, dyad) in self.duals.iter().zip(self.dyads.iter()) {
            // τ[s,s'] = Σ_{n,n'} conj(J[n,n']) ρ[(n,s),(n',s')]
            let tau = DenseOperator::from_fn(qudit_dim, |s, sp| {
                let mut acc = c64(0.0, 0.0);
                for n in 0..self.osc_dim {
                    for np in 0..self.osc_dim {
                        let jv = j_op.mat()[(n, np)];
                        if jv != c64(0.0, 0.0) {
                            acc += jv.conj() * rho.mat()[(n * qudit_dim + s, np * qudit_dim + sp)];
                        }
                    }
                }
                acc
            });
            out.axpy(c64(1.0, 0.0), &dyad.kron(&tau));
        }
        out
    }
}

/// Process-wide cache of [`StorageRecovery`] instances keyed by `(α, dim)`.
pub fn storage_recovery(alpha: C64, osc_dim: usize) -> Result<Arc<StorageRecovery>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, usize), Arc<StorageRecovery>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.re.to_bits(), alpha.im.to_bits(), osc_dim);
    if let Some(hit) = cache.lock().expect("recovery cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let built = Arc::new(StorageRecovery::new(alpha, osc_dim)?);
    cache
        .lock()
        .expect("recovery cache poisoned")
        .insert(key, built.clone());
    Ok(built)
}

/// Transmon recovery for the three-level `{g, f}` encoding: population that
/// leaked to `|e⟩` (one decay from `|f⟩`) is returned to `|f⟩`, leaving the
/// code space untouched. Kraus pair `{P, K}` with `P = I − I⊗|e⟩⟨e|`,
/// `K = I⊗|f⟩⟨e|` (trace preserving).
pub fn transmon_gf_recovery(rho: &DenseOperator, osc_dim: usize) -> DenseOperator {
    let dim = rho.dim();
    let qudit_dim = dim / osc_dim;
    assert_eq!(dim, osc_dim * qudit_dim, "state dimension mismatch");
    assert_eq!(qudit_dim, 3, "gf recovery expects a three-level transmon");
    let p = {
        let mut m = DenseOperator::identity(dim);
        m.axpy(
            c64(-1.0, 0.0),
            &hilbert::lift_qudit(&hilbert::level_projector(1, 3), osc_dim),
        );
        m
    };
    let k = hilbert::lift_qudit(&hilbert::transition(2, 1, 3), osc_dim);
    let mut out = p.mul(rho).mul(&p);
    out.axpy(c64(1.0, 0.0), &k.mul(rho).mul(&k.dagger()));
    out
}

// ---------------------------------------------------------------------------
// Pauli-channel extraction
// ---------------------------------------------------------------------------

/// Result of reducing a noisy gate to a stochastic Pauli channel.
#[derive(Debug)]
pub struct ChannelExtraction {
    pub channel: PauliChannel,
    /// Total negative probability mass removed by clipping (integration
    /// noise; large values would indicate a genuinely non-Pauli error).
    pub clipped_mass: f64,
    /// Diagonal of the logical Pauli-transfer matrix of `R∘𝓔∘U†`,
    /// in Pauli-string index order.
    pub r_diag: Vec<f64>,
}

/// Twirl a noisy implementation of `ideal_small` into a Pauli channel.
///
/// `map` must send an encoded operator through the noisy gate *and* the
/// recovery; for each Pauli string the diagonal transfer element
/// `R_jj = (1/2^n) tr[P_j · map(U P_j U†)]` is measured, and the string
/// probabilities follow from the Walsh transform over the anticommutation
/// pairing. Probabilities below `-1e-6` fail with
/// [`Error::NonPhysicalChannel`]; smaller negatives are clipped and the
/// distribution renormalized.
pub fn extract_pauli_channel(
    mut map: impl FnMut(&DenseOperator) -> Result<DenseOperator>,
    ideal_small: &DenseOperator,
    code: &CodeSpace,
) -> Result<ChannelExtraction> {
    let n = code.n_qubits();
    let d = code.logical_dim() as f64;
    let n_strings = 1usize << (2 * n);
    let strings: Vec<Vec<Pauli>> = (0..n_strings).map(|i| string_from_index(i, n)).collect();
    let u_dag = ideal_small.dagger();

    let mut r_diag = vec![0.0; n_strings];
    for (j, ps) in strings.iter().enumerate() {
        let pj = string_matrix(ps);
        // Heisenberg pull-back: U† P_j U, so that the ideal gate scores
        // R_jj = 1 for every string.
        let pulled = u_dag.mul(&pj).mul(ideal_small);
        let out = map(&code.embed(&pulled))?;
        r_diag[j] = pj.hs_inner(&code.project(&out)).re / d;
    }

    let mut probs = vec![0.0; n_strings];
    let mut clipped = 0.0;
    let mut min_p = f64::INFINITY;
    for i in 0..n_strings {
        let mut acc = 0.0;
        for j in 0..n_strings {
            let sign = if strings_anticommute(&strings[i], &strings[j]) == 1 { -1.0 } else { 1.0 };
            acc += sign * r_diag[j];
        }
        let p = acc / n_strings as f64;
        min_p = min_p.min(p);
        if p < 0.0 {
            clipped += -p;
        } else {
            probs[i] = p;
        }
    }
    if min_p < -NONPHYSICAL_TOL {
        return Err(Error::NonPhysicalChannel { min_diag: min_p, tol: NONPHYSICAL_TOL });
    }
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(Error::NonPhysicalChannel { min_diag: min_p, tol: NONPHYSICAL_TOL });
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    Ok(ChannelExtraction { channel: PauliChannel::new(n, probs)?, clipped_mass: clipped, r_diag })
}

// ---------------------------------------------------------------------------
// Gate metrics and outcome
// ---------------------------------------------------------------------------

/// Scalar summaries of a gate's logical Pauli channel. Qubit 0 is the cat.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GateMetrics {
    /// Average gate infidelity `d(1 − p_I)/(d + 1)`.
    pub avg_gate_infidelity: f64,
    /// Cat bit-flip probability: marginal weight of X or Y on the cat.
    pub p_bit_cat: f64,
    /// Cat phase-flip probability: marginal weight of Z on the cat.
    pub p_z_cat: f64,
    /// Noise bias `p_z_cat / p_bit_cat` (absent when no bit flips occurred).
    pub eta_cat: Option<f64>,
}

impl GateMetrics {
    pub fn from_channel(channel: &PauliChannel) -> Self {
        let d = (1usize << channel.n) as f64;
        let p_id = channel.probs[0];
        let p_bit_cat = channel.marginal(0, &[Pauli::X, Pauli::Y]);
        let p_z_cat = channel.marginal(0, &[Pauli::Z]);
        GateMetrics {
            avg_gate_infidelity: d * (1.0 - p_id) / (d + 1.0),
            p_bit_cat,
            p_z_cat,
            eta_cat: if p_bit_cat > 0.0 { Some(p_z_cat / p_bit_cat) } else { None },
        }
    }
}

/// Full result of one gate simulation.
#[derive(Debug)]
pub struct GateOutcome {
    pub channel: PauliChannel,
    pub metrics: GateMetrics,
    pub clipped_mass: f64,
    /// Fock cutoff used for the simulation.
    pub cutoff: usize,
    /// Diagonal of the logical Pauli-transfer matrix (string-index order).
    pub r_diag: Vec<f64>,
}

impl GateOutcome {
    fn from_extraction(ex: ChannelExtraction, cutoff: usize) -> Self {
        let metrics = GateMetrics::from_channel(&ex.channel);
        GateOutcome {
            channel: ex.channel,
            metrics,
            clipped_mass: ex.clipped_mass,
            cutoff,
            r_diag: ex.r_diag,
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization of extracted channels
// ---------------------------------------------------------------------------

/// Gate parameters stored alongside an extracted channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelParams {
    pub alpha_sq: f64,
    pub chi: f64,
    pub rates: NoiseRates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa2_over_chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_chi: Option<f64>,
}

/// Numerical provenance of an extracted channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelMetadata {
    pub clipped_mass: f64,
    pub cutoff: usize,
    /// Integration tolerance used for the gate propagation.
    pub tol: f64,
}

/// Serializable record of one extracted Pauli channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelRecord {
    /// Gate kind label (`cx_gf`, `crx_full9`, ...).
    pub gate: String,
    pub params: ChannelParams,
    /// Pauli-string probabilities keyed by label (`"IZ"`, ...).
    pub pauli_probs: BTreeMap<String, f64>,
    pub metadata: ChannelMetadata,
}

impl ChannelRecord {
    pub fn new(spec: &GateSpec, rates: &NoiseRates, outcome: &GateOutcome) -> Self {
        ChannelRecord {
            gate: spec.label().to_string(),
            params: ChannelParams {
                alpha_sq: spec.alpha.norm_sqr(),
                chi: spec.chi,
                rates: *rates,
                envelope: spec.envelope,
                kappa2_over_chi: spec.kappa2_over_chi,
                duration_chi: spec.duration_chi,
            },
            pauli_probs: outcome.channel.to_named_map(),
            metadata: ChannelMetadata {
                clipped_mass: outcome.clipped_mass,
                cutoff: outcome.cutoff,
                tol: GATE_TOL,
            },
        }
    }

    /// Rebuild the [`PauliChannel`] from the stored probability map.
    pub fn channel(&self) -> Result<PauliChannel> {
        let n = self
            .pauli_probs
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::MissingChannel("record holds no probabilities".into()))?;
        PauliChannel::from_named_map(n, &self.pauli_probs)
    }
}

// ---------------------------------------------------------------------------
// CX simulation
// ---------------------------------------------------------------------------

/// Simulate the dispersive CX (free evolution for `π/χ`, engineered
/// dissipation off) and reduce it to a two-qubit Pauli channel
/// (qubit 0 = cat target, qubit 1 = transmon control).
pub fn simulate_cx(
    rates: &NoiseRates,
    chi: f64,
    alpha: C64,
    subspace: TransmonSubspace,
) -> Result<GateOutcome> {
    let cutoff = hilbert::fock_cutoff(alpha.norm_sqr());
    let sys = match subspace {
        TransmonSubspace::Gf => CatTransmon::three_level_matched(cutoff, chi, alpha),
        TransmonSubspace::Ge => CatTransmon::two_level(cutoff, chi, alpha),
    };
    let qudit_dim = sys.qudit_dim;
    let levels = match subspace {
        TransmonSubspace::Gf => (0, 2),
        TransmonSubspace::Ge => (0, 1),
    };
    let collapse = sys.collapse_ops(rates, 0.0)?;
    let schedule = Schedule::free_in_frame(sys.dispersive_diag());
    let code = CodeSpace::cat_transmon(alpha, cutoff, qudit_dim, levels)?;
    let recovery = storage_recovery(alpha, cutoff)?;
    let opts = PropagationOptions { tol: GATE_TOL, ..Default::default() };
    let duration = PI / chi;

    let map = |x: &DenseOperator| -> Result<DenseOperator> {
        let run = propagate_density(&schedule, &collapse, x, duration, &opts)?;
        let mut y = run.state;
        if subspace == TransmonSubspace::Gf {
            y = transmon_gf_recovery(&y, cutoff);
        }
        Ok(recovery.apply(&y, qudit_dim))
    };
    let ex = extract_pauli_channel(map, &ideal_cx(), &code)?;
    Ok(GateOutcome::from_extraction(ex, cutoff))
}

/// Analytic floor of the CX cat bit-flip probability from transmon thermal
/// noise: a heating event halfway through contributes `½·(γ↑/2)·T`, and a
/// double decay `½·((γ↓/2)·T)²` (both flip the accumulated phase by π on
/// average half the time).
pub fn cx_bitflip_floor(rates: &NoiseRates, chi: f64) -> f64 {
    let t = PI / chi;
    0.5 * (0.5 * rates.gamma_up * t + (0.5 * rates.gamma_down * t).powi(2))
}

// ---------------------------------------------------------------------------
// CRX simulation
// ---------------------------------------------------------------------------

/// Durations and deterministic dispersive phase of a CRX sequence.
struct CrxPlan {
    t_sel: f64,
    idle_duration: f64,
    /// Dispersive phase `φ = χ T_sel` accumulated by the far branch between
    /// consecutive displacements (the echo makes it branch-independent).
    phi: f64,
}

impl CrxPlan {
    fn new(chi: f64, t_sel: f64, variant: CrxVariant) -> Result<Self> {
        let window = PI / chi;
        let (n_sel, n_idle) = match variant {
            CrxVariant::Full9 => (4.0, 5.0),
            CrxVariant::Simple5 => (2.0, 3.0),
        };
        let residual = window - n_sel * t_sel;
        if residual < -1e-12 * window {
            return Err(Error::Config(format!(
                "selective pulses ({n_sel} × {t_sel:.4}) exceed the gate window {window:.4}"
            )));
        }
        Ok(CrxPlan { t_sel, idle_duration: residual.max(0.0) / n_idle, phi: chi * t_sel })
    }

    fn expected_angle(variant: CrxVariant) -> f64 {
        match variant {
            CrxVariant::Full9 => PI / 4.0,
            CrxVariant::Simple5 => PI / 2.0,
        }
    }
}

/// One step of the executable CRX sequence.
enum CrxStep {
    /// Instantaneous unitary (displacement, unselective rotation, frame
    /// correction, virtual-Z).
    Instant(DenseOperator),
    /// Finite-duration evolution.
    Evolve { schedule: Schedule, duration: f64 },
}

/// Build the executable step list for a CRX sequence on oscillator ⊗ 2-level
/// transmon. Selective segments integrate the phase-ramp drive in the
/// dispersive frame and are each followed by their closing virtual-Z; idles
/// run with the coupler off (pure dissipation).
fn crx_steps(
    chi: f64,
    alpha: C64,
    envelope: &Envelope,
    variant: CrxVariant,
    cutoff: usize,
) -> Result<Vec<CrxStep>> {
    let expected = CrxPlan::expected_angle(variant);
    if (envelope.target_angle - expected).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "CRX variant needs selective pulses of angle {expected:.6}, envelope targets {:.6}",
            envelope.target_angle
        )));
    }
    let plan = CrxPlan::new(chi, envelope.t_sel, variant)?;
    let sys = CatTransmon::two_level(cutoff, chi, alpha);
    let diag = sys.dispersive_diag();
    let phi = plan.phi;

    // Drive operator ½|e⟩⟨g| on the full space; amp(t) = ±Ω(t) e^{iΦ(t)}.
    let raise_half = hilbert::lift_qudit(&hilbert::transition(1, 0, 2), cutoff).scale(c64(0.5, 0.0));
    let selective = |sign: f64| -> Schedule {
        let env = envelope.clone();
        let amp: AmpFn = Arc::new(move |t| {
            let om = env.omega_at(t);
            let ramp = C64::from_polar(1.0, env.detuning_phase_at(t));
            om * ramp * sign
        });
        let drives = DriveTerm::hermitian_pair(raise_half.clone(), amp);
        Schedule::driven_in_frame(diag.clone(), drives.into())
    };
    // Closing virtual-Z undoing the detuning phase ramp (same for ± pulses:
    // negating the drive leaves δ(t), and hence Φ(T), unchanged).
    let vz = {
        let phase = C64::from_polar(1.0, -envelope.closing_detuning_phase());
        hilbert::lift_qudit(
            &DenseOperator::from_fn(2, |i, j| {
                if i != j {
                    c64(0.0, 0.0)
                } else if i == 1 {
                    phase
                } else {
                    c64(1.0, 0.0)
                }
            }),
            cutoff,
        )
    };
    let displace = |beta: C64| -> Result<DenseOperator> {
        Ok(hilbert::lift_osc(&hilbert::displacement(beta, cutoff)?, 2))
    };
    let unselective = |theta: f64| hilbert::lift_qudit(&rx_matrix(theta), cutoff);
    let rot = |theta: f64| hilbert::lift_osc(&hilbert::rotation(theta, cutoff), 2);
    let phase_factor = |t: f64| C64::from_polar(1.0, t);

    let mut steps = Vec::new();
    let idle = |steps: &mut Vec<CrxStep>| {
        if plan.idle_duration > 0.0 {
            steps.push(CrxStep::Evolve { schedule: Schedule::none(), duration: plan.idle_duration });
        }
    };
    let sel = |steps: &mut Vec<CrxStep>, sign: f64| {
        steps.push(CrxStep::Evolve { schedule: selective(sign), duration: plan.t_sel });
        steps.push(CrxStep::Instant(vz.clone()));
    };

    match variant {
        CrxVariant::Full9 => {
            steps.push(CrxStep::Instant(displace(alpha)?));
            idle(&mut steps);
            sel(&mut steps, 1.0);
            steps.push(CrxStep::Instant(unselective(PI)));
            idle(&mut steps);
            sel(&mut steps, 1.0);
            steps.push(CrxStep::Instant(displace(alpha * phase_factor(-phi) * -2.0)?));
            idle(&mut steps);
            sel(&mut steps, -1.0);
            steps.push(CrxStep::Instant(unselective(-PI)));
            idle(&mut steps);
            sel(&mut steps, -1.0);
            steps.push(CrxStep::Instant(displace(alpha * phase_factor(-2.0 * phi))?));
            idle(&mut steps);
            // Undo the tracked dispersive phase (oscillator frame rotation
            // e^{+2iφn̂}) and the deterministic transmon kick.
            steps.push(CrxStep::Instant(rot(-2.0 * phi).mul(&unselective(PI / 2.0))));
        }
        CrxVariant::Simple5 => {
            steps.push(CrxStep::Instant(displace(alpha)?));
            idle(&mut steps);
            sel(&mut steps, 1.0);
            steps.push(CrxStep::Instant(unselective(PI)));
            idle(&mut steps);
            sel(&mut steps, 1.0);
            steps.push(CrxStep::Instant(displace(alpha * phase_factor(-phi) * -1.0)?));
            idle(&mut steps);
            steps.push(CrxStep::Instant(rot(-phi).mul(&unselective(-PI))));
        }
    }
    Ok(steps)
}

/// Simulate the CRX under the given noise rates (engineered dissipation off,
/// dispersive coupling active only during the selective pulses) and reduce
/// it to a two-qubit Pauli channel (qubit 0 = cat control, qubit 1 =
/// transmon target).
pub fn simulate_crx(
    rates: &NoiseRates,
    chi: f64,
    alpha: C64,
    envelope: &Envelope,
    variant: CrxVariant,
) -> Result<GateOutcome> {
    let cutoff = hilbert::fock_cutoff(4.0 * alpha.norm_sqr());
    let steps = crx_steps(chi, alpha, envelope, variant, cutoff)?;
    let sys = CatTransmon::two_level(cutoff, chi, alpha);
    let collapse = sys.collapse_ops(rates, 0.0)?;
    let code = CodeSpace::cat_transmon(alpha, cutoff, 2, (0, 1))?;
    let recovery = storage_recovery(alpha, cutoff)?;
    let opts = PropagationOptions { tol: GATE_TOL, ..Default::default() };

    let map = |x: &DenseOperator| -> Result<DenseOperator> {
        let mut rho = x.clone();
        for step in &steps {
            match step {
                CrxStep::Instant(u) => rho = u.mul(&rho).mul(&u.dagger()),
                CrxStep::Evolve { schedule, duration } => {
                    rho = propagate_density(schedule, &collapse, &rho, *duration, &opts)?.state;
                }
            }
        }
        Ok(recovery.apply(&rho, 2))
    };
    let ex = extract_pauli_channel(map, &ideal_crx(), &code)?;
    Ok(GateOutcome::from_extraction(ex, cutoff))
}

// ---------------------------------------------------------------------------
// Idle simulation
// ---------------------------------------------------------------------------

/// Simulate a storage idle on the bare oscillator (single-photon loss,
/// oscillator dephasing, engineered two-photon dissipation at
/// `κ₂ = kappa2_over_chi · χ`) and reduce it to a one-qubit Pauli channel.
/// `duration` defaults to one gate window `π/χ`.
pub fn simulate_idle(
    rates: &NoiseRates,
    chi: f64,
    alpha: C64,
    kappa2_over_chi: f64,
    duration: Option<f64>,
) -> Result<GateOutcome> {
    if kappa2_over_chi < 0.0 {
        return Err(Error::NegativeRate(format!("kappa2_over_chi = {kappa2_over_chi}")));
    }
    let cutoff = hilbert::fock_cutoff(alpha.norm_sqr());
    let duration = duration.unwrap_or(PI / chi);
    let mut collapse = Vec::new();
    if rates.kappa1 > 0.0 {
        collapse.push(lowering(cutoff).scale(c64(rates.kappa1.sqrt(), 0.0)));
    }
    if rates.kappa_phi > 0.0 {
        let n_op = DenseOperator::from_fn(cutoff, |i, j| {
            if i == j { c64(i as f64, 0.0) } else { c64(0.0, 0.0) }
        });
        collapse.push(n_op.scale(c64(rates.kappa_phi.sqrt(), 0.0)));
    }
    let kappa2 = kappa2_over_chi * chi;
    if kappa2 > 0.0 {
        collapse.push(two_photon_op(alpha, cutoff).scale(c64(kappa2.sqrt(), 0.0)));
    }
    let schedule = Schedule::none();
    let code = CodeSpace::cat_only(alpha, cutoff)?;
    let recovery = storage_recovery(alpha, cutoff)?;
    let opts = PropagationOptions { tol: GATE_TOL, ..Default::default() };

    let map = |x: &DenseOperator| -> Result<DenseOperator> {
        let run = propagate_density(&schedule, &collapse, x, duration, &opts)?;
        Ok(recovery.apply(&run.state, 1))
    };
    let ex = extract_pauli_channel(map, &DenseOperator::identity(2), &code)?;
    Ok(GateOutcome::from_extraction(ex, cutoff))
}

// ---------------------------------------------------------------------------
// Coherent (noise-free) CRX fast path
// ---------------------------------------------------------------------------

/// Exact CRX unitary at zero noise. The selective Hamiltonian conserves
/// photon number, so each Fock level contributes an independent two-level
/// problem with extra detuning `χn`; the sequence is then a product of
/// instantaneous unitaries (idles are trivial with the coupler off).
fn crx_unitary_noise_free(
    chi: f64,
    alpha: C64,
    envelope: &Envelope,
    variant: CrxVariant,
    cutoff: usize,
) -> Result<DenseOperator> {
    let expected = CrxPlan::expected_angle(variant);
    if (envelope.target_angle - expected).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "CRX variant needs selective pulses of angle {expected:.6}, envelope targets {:.6}",
            envelope.target_angle
        )));
    }
    let plan = CrxPlan::new(chi, envelope.t_sel, variant)?;
    let phi = plan.phi;
    let dim = 2 * cutoff;

    // Per-level blocks of the selective pulse (direct-detuning realization,
    // which equals ramp + closing virtual-Z exactly).
    let mut sel_plus = DenseOperator::zeros(dim);
    let mut sel_minus = DenseOperator::zeros(dim);
    for n in 0..cutoff {
        let block = two_level_unitary(envelope, chi * n as f64)?;
        for s in 0..2 {
            for sp in 0..2 {
                let v = block.mat()[(s, sp)];
                sel_plus.mat_mut()[(n * 2 + s, n * 2 + sp)] = v;
                // Negated drive ≡ Z-conjugation of the block.
                let sign = if s == sp { 1.0 } else { -1.0 };
                sel_minus.mat_mut()[(n * 2 + s, n * 2 + sp)] = v * sign;
            }
        }
    }

    let displace = |beta: C64| -> Result<DenseOperator> {
        Ok(hilbert::lift_osc(&hilbert::displacement(beta, cutoff)?, 2))
    };
    let unselective = |theta: f64| hilbert::lift_qudit(&rx_matrix(theta), cutoff);
    let rot = |theta: f64| hilbert::lift_osc(&hilbert::rotation(theta, cutoff), 2);
    let phase_factor = |t: f64| C64::from_polar(1.0, t);

    let seq: Vec<DenseOperator> = match variant {
        CrxVariant::Full9 => vec![
            displace(alpha)?,
            sel_plus.clone(),
            unselective(PI),
            sel_plus,
            displace(alpha * phase_factor(-phi) * -2.0)?,
            sel_minus.clone(),
            unselective(-PI),
            sel_minus,
            displace(alpha * phase_factor(-2.0 * phi))?,
            rot(-2.0 * phi).mul(&unselective(PI / 2.0)),
        ],
        CrxVariant::Simple5 => vec![
            displace(alpha)?,
            sel_plus.clone(),
            unselective(PI),
            sel_plus,
            displace(alpha * phase_factor(-phi) * -1.0)?,
            rot(-phi).mul(&unselective(-PI)),
        ],
    };
    let mut u = DenseOperator::identity(dim);
    for step in &seq {
        u = step.mul(&u);
    }
    Ok(u)
}

/// Noise-free CRX outcome (coherent pulse errors only), computed via the
/// photon-number block decomposition — far cheaper than density-matrix
/// propagation and exact at zero noise.
pub fn crx_coherent_outcome(
    chi: f64,
    alpha: C64,
    envelope: &Envelope,
    variant: CrxVariant,
) -> Result<GateOutcome> {
    let cutoff = hilbert::fock_cutoff(4.0 * alpha.norm_sqr());
    let u = crx_unitary_noise_free(chi, alpha, envelope, variant, cutoff)?;
    let u_dag = u.dagger();
    let code = CodeSpace::cat_transmon(alpha, cutoff, 2, (0, 1))?;
    let recovery = storage_recovery(alpha, cutoff)?;
    let map = |x: &DenseOperator| -> Result<DenseOperator> {
        Ok(recovery.apply(&u.mul(x).mul(&u_dag), 2))
    };
    let ex = extract_pauli_channel(map, &ideal_crx(), &code)?;
    Ok(GateOutcome::from_extraction(ex, cutoff))
}

/// Average gate infidelity of the noise-free CRX — the coherent-error
/// objective minimized by [`optimize_crx_pulse`].
pub fn coherent_error(
    chi: f64,
    alpha: C64,
    envelope: &Envelope,
    variant: CrxVariant,
) -> Result<f64> {
    Ok(crx_coherent_outcome(chi, alpha, envelope, variant)?.metrics.avg_gate_infidelity)
}

// ---------------------------------------------------------------------------
// Spurious rotation of a mis-selective pulse
// ---------------------------------------------------------------------------

/// Residual transmon rotation angle produced by the echoed sequence when the
/// dispersive phase per pulse is `φ = χ T_sel`: the branch amplitudes
/// `1 − 2e^{iφ} + 2e^{2iφ}`-type interference leaves
/// `δ = atan2(2(sin φ − sin 2φ), 1 − 2cos φ + 2cos 2φ)`.
/// `δ(0) = 0`, `|δ| ≈ 2φ` at leading order, and `|δ|` stays below `π/2`
/// exactly while `φ < π/5` (the denominator's root is the golden-ratio
/// identity `cos 36° − cos 72° = ½`).
pub fn spurious_rotation(phi: f64) -> f64 {
    let num = 2.0 * (phi.sin() - (2.0 * phi).sin());
    let den = 1.0 - 2.0 * phi.cos() + 2.0 * (2.0 * phi).cos();
    num.atan2(den)
}

// ---------------------------------------------------------------------------
// Pulse optimization against the coherent error
// ---------------------------------------------------------------------------

/// Derivative-based pulse family to optimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseFamily {
    StandardDrag,
    Exact1Comp,
    Approx2Comp,
    Semiclassical2Comp,
    Semiclassical3Comp,
}

impl PulseFamily {
    fn dim(self) -> usize {
        match self {
            PulseFamily::Exact1Comp => 1,
            PulseFamily::Approx2Comp | PulseFamily::Semiclassical2Comp => 2,
            PulseFamily::StandardDrag | PulseFamily::Semiclassical3Comp => 3,
        }
    }

    /// Decode an optimizer point into an envelope kind. Spectral-null
    /// families are parametrized by `ln Δ_i` (positive detunings, scale-free
    /// steps); the standard-derivative family by its raw coefficients.
    fn kind(self, x: &[f64]) -> EnvelopeKind {
        match self {
            PulseFamily::StandardDrag => {
                EnvelopeKind::StandardDrag { p1: x[0], p2: x[1], p3: x[2] }
            }
            PulseFamily::Exact1Comp => {
                EnvelopeKind::Exact1Comp { delta1: x[0].exp(), include_delta_dot: true }
            }
            PulseFamily::Approx2Comp => {
                EnvelopeKind::Approx2Comp { delta1: x[0].exp(), delta2: x[1].exp() }
            }
            PulseFamily::Semiclassical2Comp => {
                EnvelopeKind::Semiclassical2Comp { delta1: x[0].exp(), delta2: x[1].exp() }
            }
            PulseFamily::Semiclassical3Comp => EnvelopeKind::Semiclassical3Comp {
                delta1: x[0].exp(),
                delta2: x[1].exp(),
                delta3: x[2].exp(),
            },
        }
    }

    /// Deterministic list of starting points spanning detunings from `χ` to
    /// the top of the displaced photon distribution (`2μχ = 8|α|²χ`).
    fn starts(self, chi: f64, alpha: C64) -> Vec<Vec<f64>> {
        let mu = 4.0 * alpha.norm_sqr();
        let grid: Vec<f64> = log_spaced(chi, 2.0 * mu * chi, 4).iter().map(|d| d.ln()).collect();
        match self {
            PulseFamily::Exact1Comp => grid.iter().map(|&g| vec![g]).collect(),
            PulseFamily::Approx2Comp | PulseFamily::Semiclassical2Comp => {
                let mut out = Vec::new();
                for i in 0..grid.len() {
                    for j in (i + 1)..grid.len() {
                        out.push(vec![grid[i], grid[j]]);
                    }
                }
                out
            }
            PulseFamily::Semiclassical3Comp => (0..grid.len().saturating_sub(2))
                .map(|i| vec![grid[i], grid[i + 1], grid[i + 2]])
                .collect(),
            PulseFamily::StandardDrag => {
                // Leading-order coefficient p₁ = −1/Δ at a few detunings;
                // quadratic-detuning and constant terms start at zero.
                log_spaced(chi, 2.0 * mu * chi, 3)
                    .iter()
                    .map(|&d| vec![-1.0 / d, 0.0, 0.0])
                    .collect()
            }
        }
    }

    fn steps(self, chi: f64, alpha: C64) -> Vec<f64> {
        let mu = 4.0 * alpha.norm_sqr();
        match self {
            PulseFamily::StandardDrag => {
                vec![0.3 / (mu * chi), 0.3 / (mu * chi * chi), 0.3 * chi]
            }
            _ => vec![0.4; self.dim()],
        }
    }
}

/// Result of a coherent-error pulse optimization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizedPulse {
    pub spec: EnvelopeSpec,
    pub coherent_error: f64,
    pub evals: usize,
}

/// Minimize the CRX coherent error over one pulse family at fixed duration,
/// restarting a deterministic Nelder–Mead search from several spectral
/// placements and keeping the best. Envelope build failures (degenerate
/// detunings, unreachable calibration) score as infinity.
pub fn optimize_crx_pulse(
    chi: f64,
    alpha: C64,
    family: PulseFamily,
    t_sel: f64,
    variant: CrxVariant,
    opts: Option<NelderMeadOptions>,
) -> Result<OptimizedPulse> {
    let target_angle = CrxPlan::expected_angle(variant);
    // Fail fast on an infeasible schedule before burning optimizer budget.
    CrxPlan::new(chi, t_sel, variant)?;
    let nm_opts = opts.unwrap_or(NelderMeadOptions { max_evals: 80, f_tol: 1e-9, x_tol: 1e-7 });

    let spec_of = |x: &[f64]| EnvelopeSpec {
        kind: family.kind(x),
        t_sel,
        sigma: None,
        target_angle,
    };
    let mut evals = 0usize;
    let mut objective = |x: &[f64]| -> f64 {
        evals += 1;
        let spec = spec_of(x);
        match spec.build().and_then(|env| coherent_error(chi, alpha, &env, variant)) {
            Ok(v) => v,
            Err(_) => f64::INFINITY,
        }
    };

    let steps = family.steps(chi, alpha);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in family.starts(chi, alpha) {
        let res = nelder_mead(&mut objective, &start, &steps, &nm_opts);
        if best.as_ref().map_or(true, |(_, v)| res.value < *v) {
            best = Some((res.x, res.value));
        }
    }
    let (x, value) = best.expect("at least one start point");
    if !value.is_finite() {
        return Err(Error::FitDiverged(
            "no feasible pulse found in the searched family".into(),
        ));
    }
    Ok(OptimizedPulse { spec: spec_of(&x), coherent_error: value, evals })
}

/// Convenience: a calibrated envelope of the given family with heuristic
/// spectral-null placement (nulls at the mean ± one standard deviation of
/// the displaced branch's photon distribution, `4|α|² ∓ 2|α|`). Good enough
/// for bias studies without running the optimizer.
pub fn heuristic_envelope(
    family: PulseFamily,
    chi: f64,
    alpha: C64,
    t_sel: f64,
    variant: CrxVariant,
) -> Result<EnvelopeSpec> {
    let mu = 4.0 * alpha.norm_sqr();
    let sd = 2.0 * alpha.norm();
    let lo = (mu - sd).max(1.0) * chi;
    let hi = (mu + sd) * chi;
    let mid = (lo * hi).sqrt();
    let kind = match family {
        PulseFamily::StandardDrag => EnvelopeKind::StandardDrag { p1: -1.0 / mid, p2: 0.0, p3: 0.0 },
        PulseFamily::Exact1Comp => EnvelopeKind::Exact1Comp { delta1: mid, include_delta_dot: true },
        PulseFamily::Approx2Comp => EnvelopeKind::Approx2Comp { delta1: lo, delta2: hi },
        PulseFamily::Semiclassical2Comp => {
            EnvelopeKind::Semiclassical2Comp { delta1: lo, delta2: hi }
        }
        PulseFamily::Semiclassical3Comp => {
            EnvelopeKind::Semiclassical3Comp { delta1: lo, delta2: mid, delta3: hi }
        }
    };
    Ok(EnvelopeSpec {
        kind,
        t_sel,
        sigma: None,
        target_angle: CrxPlan::expected_angle(variant),
    })
}

// Re-exported for callers building envelopes directly from families.
pub use crate::pulses::EnvelopeKind as PulseKind;
