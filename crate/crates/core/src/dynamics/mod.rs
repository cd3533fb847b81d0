//! Open-system dynamics: Lindblad propagation, hardware noise models, and
//! dephasing from classical shot noise.
//!
//! # Master equation
//!
//! `dρ/dt = -i[H(t), ρ] + Σ_k D[L_k]ρ` with
//! `D[L]ρ = LρL† - (L†Lρ + ρL†L)/2`.
//!
//! # Diagonal interaction picture
//!
//! The dispersive Hamiltonian `H₀ = Σ_s χ_s |s><s| ⊗ n̂` is diagonal, so we
//! can integrate in the rotating frame it generates: every operator `O`
//! becomes `Õ(t) = e^{iDt} O e^{-iDt}`, i.e. each matrix element picks up
//! the phase `e^{i(d_r - d_c)t}` — an *exact* transformation implemented as
//! per-entry phase masks on sparse operators (see [`crate::linalg::SparseOp`]).
//! The stiff diagonal rotation disappears from the equations and the
//! integrator steps on the physical envelope instead.
//!
//! States enter and leave in the lab frame: the frame map is the identity
//! at `t = 0` and is undone at the final time.
//!
//! # Noise models
//!
//! Three standard hardware noise models are provided, parameterized by a
//! scale `q` in units of the dispersive shift `χ`: oscillator single-photon
//! loss `κ₁`, oscillator dephasing `κ_φ`, transmon decay `γ↓`, transmon
//! dephasing `γ_φ`, transmon heating `γ↑`. All models satisfy
//! `1/T₂ = γ↓/2 + γ_φ = γ↓`, i.e. `T₁ = T₂` on the transmon.
//!
//! Collapse operators (lifted to oscillator ⊗ transmon):
//! `√κ₁ a`, `√κ_φ a†a`, `√γ↓ b`, `√γ↑ b†`, `√(2γ_φ) n_t`, and the
//! engineered two-photon stabilizer `√κ₂ (a² - α²)` when enabled.

pub mod dephasing;
mod integrator;

pub use integrator::{integrate, Method, StepStats};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert;
use crate::linalg::{add_left, add_right, c64, C64, DenseOperator, SparseOp};

/// Time-dependent complex drive amplitude.
pub type AmpFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// One Hamiltonian term `amp(t) * op`. The *total* Hamiltonian (sum of all
/// terms plus the static part) must be Hermitian; use
/// [`DriveTerm::hermitian_pair`] for raising/lowering drives.
pub struct DriveTerm {
    pub op: DenseOperator,
    pub amp: AmpFn,
}

impl DriveTerm {
    /// Term with constant unit amplitude.
    pub fn constant(op: DenseOperator) -> Self {
        Self { op, amp: Arc::new(|_| c64(1.0, 0.0)) }
    }

    /// `amp(t) * op + conj(amp)(t) * op†` as two terms.
    pub fn hermitian_pair(op: DenseOperator, amp: AmpFn) -> [Self; 2] {
        let dag = op.dagger();
        let amp2 = amp.clone();
        [
            Self { op, amp },
            Self { op: dag, amp: Arc::new(move |t| amp2(t).conj()) },
        ]
    }
}

/// Hamiltonian specification for one propagation segment.
pub struct Schedule {
    /// Diagonal frame energies; when present, integration happens in the
    /// rotating frame of `diag(frame)` (which *is* the static Hamiltonian).
    pub frame: Option<Vec<f64>>,
    /// Static lab-frame Hamiltonian (only without a frame).
    pub h_static: Option<DenseOperator>,
    /// Time-dependent terms.
    pub drives: Vec<DriveTerm>,
}

impl Schedule {
    /// Free evolution under a diagonal Hamiltonian, integrated in its frame.
    pub fn free_in_frame(diag: Vec<f64>) -> Self {
        Self { frame: Some(diag), h_static: None, drives: Vec::new() }
    }

    /// Driven evolution in the frame of a diagonal static Hamiltonian.
    pub fn driven_in_frame(diag: Vec<f64>, drives: Vec<DriveTerm>) -> Self {
        Self { frame: Some(diag), h_static: None, drives }
    }

    /// Lab-frame evolution (general static part, no transformation).
    pub fn lab(h_static: Option<DenseOperator>, drives: Vec<DriveTerm>) -> Self {
        Self { frame: None, h_static, drives }
    }

    /// No Hamiltonian at all (pure dissipation).
    pub fn none() -> Self {
        Self { frame: None, h_static: None, drives: Vec::new() }
    }
}

/// Propagation controls.
#[derive(Clone, Copy, Debug)]
pub struct PropagationOptions {
    /// Relative/absolute tolerance handed to the adaptive integrator.
    pub tol: f64,
    pub method: Method,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { tol: 1e-8, method: Method::Dop853 }
    }
}

/// Result of a density-matrix propagation.
pub struct PropagationResult {
    pub state: DenseOperator,
    pub stats: StepStats,
    /// |tr ρ(T) - tr ρ(0)| — a cheap global sanity indicator.
    pub trace_drift: f64,
}

struct HamTerm {
    op: SparseOp,
    amp: AmpFn,
    buf: Vec<C64>,
}

struct CollapseTerm {
    l: SparseOp,
    ldag: SparseOp,
    m: SparseOp,
    lbuf: Vec<C64>,
    dbuf: Vec<C64>,
    mbuf: Vec<C64>,
}

fn prepare_ham(schedule: &Schedule, dim: usize) -> Result<Vec<HamTerm>> {
    let frame = schedule.frame.as_deref();
    if let Some(f) = frame {
        if f.len() != dim {
            return Err(Error::Config("frame length must match dimension".into()));
        }
        if schedule.h_static.is_some() {
            return Err(Error::Config(
                "static Hamiltonian and frame are mutually exclusive; \
                 the frame is the static Hamiltonian"
                    .into(),
            ));
        }
    }
    let mut terms = Vec::new();
    if let Some(h) = &schedule.h_static {
        terms.push(HamTerm {
            op: SparseOp::from_dense(h, None),
            amp: Arc::new(|_| c64(1.0, 0.0)),
            buf: Vec::new(),
        });
    }
    for d in &schedule.drives {
        if d.op.dim() != dim {
            return Err(Error::Config("drive operator dimension mismatch".into()));
        }
        terms.push(HamTerm {
            op: SparseOp::from_dense(&d.op, frame),
            amp: d.amp.clone(),
            buf: Vec::new(),
        });
    }
    Ok(terms)
}

fn prepare_collapse(collapse: &[DenseOperator], frame: Option<&[f64]>) -> Vec<CollapseTerm> {
    collapse
        .iter()
        .map(|l| {
            let sl = SparseOp::from_dense(l, frame);
            CollapseTerm {
                ldag: sl.dagger(),
                m: sl.dagger_self_dense(frame),
                l: sl,
                lbuf: Vec::new(),
                dbuf: Vec::new(),
                mbuf: Vec::new(),
            }
        })
        .collect()
}

/// Undo the frame on a density matrix: `ρ_lab = e^{-iDT} ρ̃ e^{iDT}`.
fn unframe_density(rho: &mut [C64], frame: &[f64], t: f64, dim: usize) {
    for r in 0..dim {
        for c in 0..dim {
            let w = frame[r] - frame[c];
            if w != 0.0 {
                rho[r * dim + c] *= C64::from_polar(1.0, -w * t);
            }
        }
    }
}

/// Propagate a density matrix for `duration` under `schedule` + `collapse`.
pub fn propagate_density(
    schedule: &Schedule,
    collapse: &[DenseOperator],
    rho0: &DenseOperator,
    duration: f64,
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    let dim = rho0.dim();
    let mut ham = prepare_ham(schedule, dim)?;
    let mut cts = prepare_collapse(collapse, schedule.frame.as_deref());
    let mut tmp = vec![c64(0.0, 0.0); dim * dim];

    let mut y: Vec<C64> = rho0.mat().iter().copied().collect();
    let trace0: C64 = (0..dim).map(|i| y[i * dim + i]).sum();

    let stats = integrate(
        opts.method,
        |t, y, out| {
            out.fill(c64(0.0, 0.0));
            for h in ham.iter_mut() {
                h.op.phased_into(t, &mut h.buf);
                let a = (h.amp)(t);
                if a == c64(0.0, 0.0) {
                    continue;
                }
                // -i [H, ρ]
                add_left(&h.op, &h.buf, y, out, c64(0.0, -1.0) * a);
                add_right(&h.op, &h.buf, y, out, c64(0.0, 1.0) * a);
            }
            for ct in cts.iter_mut() {
                ct.l.phased_into(t, &mut ct.lbuf);
                ct.ldag.phased_into(t, &mut ct.dbuf);
                ct.m.phased_into(t, &mut ct.mbuf);
                // L ρ L†
                tmp.fill(c64(0.0, 0.0));
                add_left(&ct.l, &ct.lbuf, y, &mut tmp, c64(1.0, 0.0));
                add_right(&ct.ldag, &ct.dbuf, &tmp, out, c64(1.0, 0.0));
                // -1/2 {L†L, ρ}
                add_left(&ct.m, &ct.mbuf, y, out, c64(-0.5, 0.0));
                add_right(&ct.m, &ct.mbuf, y, out, c64(-0.5, 0.0));
            }
        },
        &mut y,
        duration,
        opts.tol,
        opts.tol,
    )?;

    if let Some(frame) = schedule.frame.as_deref() {
        unframe_density(&mut y, frame, duration, dim);
    }
    let trace1: C64 = (0..dim).map(|i| y[i * dim + i]).sum();
    let mat = ndarray::Array2::from_shape_vec((dim, dim), y).expect("shape");
    Ok(PropagationResult {
        state: DenseOperator::from_array(mat),
        stats,
        trace_drift: (trace1 - trace0).norm(),
    })
}

/// Propagate a unitary: `dU/dt = -i H(t) U`, `U(0) = u0`, returned in the
/// lab frame.
pub fn propagate_unitary(
    schedule: &Schedule,
    u0: &DenseOperator,
    duration: f64,
    opts: &PropagationOptions,
) -> Result<(DenseOperator, StepStats)> {
    let dim = u0.dim();
    let mut ham = prepare_ham(schedule, dim)?;
    let mut y: Vec<C64> = u0.mat().iter().copied().collect();
    let stats = integrate(
        opts.method,
        |t, y, out| {
            out.fill(c64(0.0, 0.0));
            for h in ham.iter_mut() {
                h.op.phased_into(t, &mut h.buf);
                let a = (h.amp)(t);
                if a != c64(0.0, 0.0) {
                    add_left(&h.op, &h.buf, y, out, c64(0.0, -1.0) * a);
                }
            }
        },
        &mut y,
        duration,
        opts.tol,
        opts.tol,
    )?;
    if let Some(frame) = schedule.frame.as_deref() {
        // U_lab = e^{-iDT} Ũ : scale row r by e^{-i d_r T}.
        for r in 0..dim {
            let ph = C64::from_polar(1.0, -frame[r] * duration);
            for c in 0..dim {
                y[r * dim + c] *= ph;
            }
        }
    }
    let mat = ndarray::Array2::from_shape_vec((dim, dim), y).expect("shape");
    Ok((DenseOperator::from_array(mat), stats))
}

/// Propagate an observable under the *adjoint* dissipative generator
/// (no Hamiltonian): `dX/dt = Σ_k (L† X L - (L†L X + X L†L)/2)`.
///
/// Used to extract conserved quantities of a dissipative evolution:
/// `tr[X(T) ρ0] = tr[X0 ρ(T)]`.
pub fn propagate_adjoint_observable(
    collapse: &[DenseOperator],
    x0: &DenseOperator,
    duration: f64,
    opts: &PropagationOptions,
) -> Result<(DenseOperator, StepStats)> {
    let dim = x0.dim();
    let mut cts = prepare_collapse(collapse, None);
    let mut tmp = vec![c64(0.0, 0.0); dim * dim];
    let mut y: Vec<C64> = x0.mat().iter().copied().collect();
    let stats = integrate(
        opts.method,
        |t, y, out| {
            out.fill(c64(0.0, 0.0));
            for ct in cts.iter_mut() {
                ct.l.phased_into(t, &mut ct.lbuf);
                ct.ldag.phased_into(t, &mut ct.dbuf);
                ct.m.phased_into(t, &mut ct.mbuf);
                // L† X L
                tmp.fill(c64(0.0, 0.0));
                add_right(&ct.l, &ct.lbuf, y, &mut tmp, c64(1.0, 0.0));
                add_left(&ct.ldag, &ct.dbuf, &tmp, out, c64(1.0, 0.0));
                // -1/2 {L†L, X}
                add_left(&ct.m, &ct.mbuf, y, out, c64(-0.5, 0.0));
                add_right(&ct.m, &ct.mbuf, y, out, c64(-0.5, 0.0));
            }
        },
        &mut y,
        duration,
        opts.tol,
        opts.tol,
    )?;
    let mat = ndarray::Array2::from_shape_vec((dim, dim), y).expect("shape");
    Ok((DenseOperator::from_array(mat), stats))
}

// ---------------------------------------------------------------------------
// Hardware noise models
// ---------------------------------------------------------------------------

/// The three standard hardware noise models (rates in units of χ, scaled
/// by the quality parameter `q`; model 3 has fixed transmon rates).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NoiseModel {
    Model1,
    Model2,
    Model3,
}

/// Absolute decoherence rates.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct NoiseRates {
    /// Oscillator single-photon loss.
    pub kappa1: f64,
    /// Oscillator dephasing (`D[a†a]`).
    pub kappa_phi: f64,
    /// Transmon decay (`D[b]`).
    pub gamma_down: f64,
    /// Transmon pure dephasing (`D[√2 n_t]`).
    pub gamma_phi: f64,
    /// Transmon heating (`D[b†]`).
    pub gamma_up: f64,
}

impl NoiseRates {
    /// All rates zero (coherent dynamics).
    pub fn zero() -> Self {
        Self { kappa1: 0.0, kappa_phi: 0.0, gamma_down: 0.0, gamma_phi: 0.0, gamma_up: 0.0 }
    }

    /// Standard model rates at quality `q`, dispersive shift `chi`.
    pub fn from_model(model: NoiseModel, q: f64, chi: f64) -> Result<Self> {
        if q < 0.0 {
            return Err(Error::NegativeRate(format!("quality parameter q={q}")));
        }
        if chi <= 0.0 {
            return Err(Error::Config(format!("chi must be positive, got {chi}")));
        }
        let (k1, gd, kphi, gphi, gup) = match model {
            NoiseModel::Model1 => (q, 3.0 * q, 0.01 * q, 1.5 * q, 0.015 * q),
            NoiseModel::Model2 => (q, q, 0.01 * q, 0.5 * q, 0.005 * q),
            NoiseModel::Model3 => (q, 5e-4, 0.01 * q, 2.5e-4, 2.5e-6),
        };
        let rates = Self {
            kappa1: k1 * chi,
            kappa_phi: kphi * chi,
            gamma_down: gd * chi,
            gamma_phi: gphi * chi,
            gamma_up: gup * chi,
        };
        rates.validate()?;
        Ok(rates)
    }

    /// Reject negative rates.
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("kappa1", self.kappa1),
            ("kappa_phi", self.kappa_phi),
            ("gamma_down", self.gamma_down),
            ("gamma_phi", self.gamma_phi),
            ("gamma_up", self.gamma_up),
        ] {
            if r < 0.0 || !r.is_finite() {
                return Err(Error::NegativeRate(format!("{name} = {r}")));
            }
        }
        Ok(())
    }

    /// Transmon relaxation time `1/(γ↓ + γ↑)`.
    pub fn transmon_t1(&self) -> f64 {
        1.0 / (self.gamma_down + self.gamma_up)
    }

    /// Transmon coherence time `1/(γ↓/2 + γ_φ)` (ge coherence).
    pub fn transmon_t2(&self) -> f64 {
        1.0 / (self.gamma_down / 2.0 + self.gamma_phi)
    }
}

// ---------------------------------------------------------------------------
// Cat ⊗ transmon system
// ---------------------------------------------------------------------------

/// A storage oscillator dispersively coupled to a multilevel transmon:
/// `H₀ = Σ_s χ_s |s><s| ⊗ n̂` with `χ_0 = 0`.
#[derive(Clone, Debug)]
pub struct CatTransmon {
    pub osc_dim: usize,
    pub qudit_dim: usize,
    /// Dispersive shift per transmon level (`chi[0]` must be 0).
    pub chi: Vec<f64>,
    /// Cat amplitude defining the code and the engineered dissipator.
    pub alpha: C64,
}

impl CatTransmon {
    /// Two-level transmon with shift `chi` on `|e>`.
    pub fn two_level(osc_dim: usize, chi: f64, alpha: C64) -> Self {
        Self { osc_dim, qudit_dim: 2, chi: vec![0.0, chi], alpha }
    }

    /// Three-level transmon with matched shifts `χ_e = χ_f = chi`
    /// (error-transparent configuration).
    pub fn three_level_matched(osc_dim: usize, chi: f64, alpha: C64) -> Self {
        Self { osc_dim, qudit_dim: 3, chi: vec![0.0, chi, chi], alpha }
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.osc_dim * self.qudit_dim
    }

    /// Diagonal of the dispersive Hamiltonian, indexed `n * qudit_dim + s`.
    pub fn dispersive_diag(&self) -> Vec<f64> {
        assert_eq!(self.chi.len(), self.qudit_dim);
        assert_eq!(self.chi[0], 0.0, "ground-level shift must vanish");
        let mut d = vec![0.0; self.dim()];
        for n in 0..self.osc_dim {
            for s in 0..self.qudit_dim {
                d[n * self.qudit_dim + s] = self.chi[s] * n as f64;
            }
        }
        d
    }

    /// Lifted oscillator annihilation operator.
    pub fn a(&self) -> DenseOperator {
        hilbert::lift_osc(&hilbert::annihilation(self.osc_dim), self.qudit_dim)
    }

    /// Lifted oscillator number operator.
    pub fn n_osc(&self) -> DenseOperator {
        hilbert::lift_osc(&hilbert::number(self.osc_dim), self.qudit_dim)
    }

    /// Lifted transmon lowering operator.
    pub fn b(&self) -> DenseOperator {
        hilbert::lift_qudit(&hilbert::transmon_lowering(self.qudit_dim), self.osc_dim)
    }

    /// Lifted transmon number operator.
    pub fn n_transmon(&self) -> DenseOperator {
        let nt = DenseOperator::from_fn(self.qudit_dim, |i, j| {
            if i == j {
                c64(i as f64, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        hilbert::lift_qudit(&nt, self.osc_dim)
    }

    /// Engineered two-photon dissipator jump operator `a² - α²` (unscaled).
    pub fn two_photon_jump(&self) -> DenseOperator {
        let a = hilbert::annihilation(self.osc_dim);
        let mut a2 = a.mul(&a);
        let alpha2 = self.alpha * self.alpha;
        let id = DenseOperator::identity(self.osc_dim);
        a2.axpy(-alpha2, &id);
        hilbert::lift_osc(&a2, self.qudit_dim)
    }

    /// Collapse operators for the given rates, plus the engineered
    /// stabilizer at rate `kappa2` when positive.
    pub fn collapse_ops(&self, rates: &NoiseRates, kappa2: f64) -> Result<Vec<DenseOperator>> {
        rates.validate()?;
        if kappa2 < 0.0 {
            return Err(Error::NegativeRate(format!("kappa2 = {kappa2}")));
        }
        let mut ops = Vec::new();
        let mut push = |rate: f64, op: DenseOperator| {
            if rate > 0.0 {
                ops.push(op.scale(c64(rate.sqrt(), 0.0)));
            }
        };
        push(rates.kappa1, self.a());
        push(rates.kappa_phi, self.n_osc());
        push(rates.gamma_down, self.b());
        push(rates.gamma_up, self.b().dagger());
        push(2.0 * rates.gamma_phi, self.n_transmon());
        push(kappa2, self.two_photon_jump());
        Ok(ops)
    }
}
