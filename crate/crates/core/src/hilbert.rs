//! Truncated-oscillator and multilevel-transmon Hilbert-space tooling.
//!
//! Conventions used everywhere in the crate:
//!
//! * Oscillator Fock space is truncated to `dim` levels `|0..dim-1>`.
//! * Composite spaces are ordered oscillator ⊗ transmon with row-major
//!   indexing `idx = n * qudit_dim + s` for Fock level `n` and transmon
//!   level `s` (`0=g, 1=e, 2=f`).
//! * Cat states: `|C±> = N± (|α> ± |-α>)`, the even/odd photon-parity
//!   superpositions. Computational codewords are
//!   `|0_C> = (|C+> + |C->)/√2 ≈ |α>` and `|1_C> = (|C+> - |C->)/√2 ≈ |-α>`.
//! * `rotation(θ) = exp(-i θ n̂)`, so `rotation(π)` maps `|α> → |-α>`.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::{c64, expi_hermitian, C64, DenseOperator};

/// Fock-space truncation that comfortably holds states with at most `mu`
/// mean photons (coherent excursions included): `ceil(mu + 8 sqrt(mu) + 10)`.
pub fn fock_cutoff(mu: f64) -> usize {
    assert!(mu >= 0.0, "mean photon number must be non-negative");
    (mu + 8.0 * mu.sqrt() + 10.0).ceil() as usize
}

/// Annihilation operator `a` on a `dim`-level Fock space.
pub fn annihilation(dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, |i, j| {
        if j == i + 1 {
            c64((j as f64).sqrt(), 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Creation operator `a†`.
pub fn creation(dim: usize) -> DenseOperator {
    annihilation(dim).dagger()
}

/// Number operator `n̂ = a† a`.
pub fn number(dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, |i, j| {
        if i == j {
            c64(i as f64, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Vector norm.
pub fn norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product `<v|w>`.
pub fn overlap(v: &Array1<C64>, w: &Array1<C64>) -> C64 {
    v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Normalize in place; returns the original norm.
pub fn normalize(v: &mut Array1<C64>) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.mapv_inplace(|x| x / n);
    }
    n
}

/// Tensor product of state vectors (left factor is the slow index).
pub fn kron_vec(a: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Fock basis state `|n>`.
pub fn fock_state(n: usize, dim: usize) -> Array1<C64> {
    assert!(n < dim);
    let mut v = Array1::zeros(dim);
    v[n] = c64(1.0, 0.0);
    v
}

/// Coherent state `|α>` with exact (untruncated) amplitudes
/// `e^{-|α|²/2} α^n / √(n!)`. Errs with [`Error::CutoffTooSmall`] when the
/// truncated norm deficit exceeds `norm_tol`.
pub fn coherent_state(alpha: C64, dim: usize, norm_tol: f64) -> Result<Array1<C64>> {
    let mut v = Array1::zeros(dim);
    // c_0 = e^{-|α|²/2}; c_{n} = c_{n-1} * α / √n  (stable recurrence).
    let mut c = C64::from_polar((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        v[n] = c;
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    let deficit = 1.0 - v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    if deficit > norm_tol {
        return Err(Error::CutoffTooSmall {
            cutoff: dim,
            detail: format!(
                "coherent state |alpha|^2={:.3} loses {:.3e} norm (tol {:.1e})",
                alpha.norm_sqr(),
                deficit,
                norm_tol
            ),
        });
    }
    Ok(v)
}

/// Photon parity of a cat state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Normalized cat state `N± (|α> ± |-α>)`.
pub fn cat_state(alpha: C64, parity: Parity, dim: usize, norm_tol: f64) -> Result<Array1<C64>> {
    let plus = coherent_state(alpha, dim, norm_tol)?;
    let minus = coherent_state(-alpha, dim, norm_tol)?;
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let mut v: Array1<C64> = &plus + &minus.mapv(|x| x * sign);
    // Exact normalization N± = 1/sqrt(2 (1 ± e^{-2|α|²})) in infinite space;
    // normalize numerically, which matches it to truncation accuracy.
    normalize(&mut v);
    Ok(v)
}

/// Computational cat codeword: `|0_C> ≈ |α>`, `|1_C> ≈ |-α>`, built as
/// exact superpositions of the parity cats (orthonormal for every α).
pub fn cat_codeword(alpha: C64, bit: u8, dim: usize, norm_tol: f64) -> Result<Array1<C64>> {
    let even = cat_state(alpha, Parity::Even, dim, norm_tol)?;
    let odd = cat_state(alpha, Parity::Odd, dim, norm_tol)?;
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    let v: Array1<C64> = (&even + &odd.mapv(|x| x * sign)).mapv(|x| x / 2f64.sqrt());
    Ok(v)
}

/// Displacement unitary `D(α) = exp(α a† - α* a)` via exact
/// eigendecomposition of the Hermitian generator.
pub fn displacement(alpha: C64, dim: usize) -> Result<DenseOperator> {
    // D = exp(G) with G = α a† - α* a anti-Hermitian; write G = iK with
    // K = -i(α a† - α* a) Hermitian, then D = exp(iK).
    let a = annihilation(dim);
    let adag = creation(dim);
    let mut k = adag.scale(alpha);
    k.axpy(c64(-1.0, 0.0), &a.scale(alpha.conj()));
    let k = k.scale(c64(0.0, -1.0));
    debug_assert!(k.is_hermitian(1e-12));
    expi_hermitian(&k, 1.0)
}

/// Phase-space rotation `exp(-i θ n̂)` (diagonal, exact).
pub fn rotation(theta: f64, dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, |i, j| {
        if i == j {
            C64::from_polar(1.0, -theta * i as f64)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Photon-parity projector onto even or odd Fock levels.
pub fn parity_projector(parity: Parity, dim: usize) -> DenseOperator {
    let keep = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    DenseOperator::from_fn(dim, |i, j| {
        if i == j && i % 2 == keep {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Transmon lowering operator `b = Σ_s √s |s-1><s|` on `qudit_dim` levels.
pub fn transmon_lowering(qudit_dim: usize) -> DenseOperator {
    DenseOperator::from_fn(qudit_dim, |i, j| {
        if j == i + 1 {
            c64((j as f64).sqrt(), 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Transmon level projector `|s><s|`.
pub fn level_projector(s: usize, qudit_dim: usize) -> DenseOperator {
    DenseOperator::from_fn(qudit_dim, |i, j| {
        if i == j && i == s {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Transition operator `|to><from|`.
pub fn transition(to: usize, from: usize, qudit_dim: usize) -> DenseOperator {
    DenseOperator::from_fn(qudit_dim, |i, j| {
        if i == to && j == from {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Lift an oscillator operator to oscillator ⊗ transmon.
pub fn lift_osc(op: &DenseOperator, qudit_dim: usize) -> DenseOperator {
    op.kron(&DenseOperator::identity(qudit_dim))
}

/// Lift a transmon operator to oscillator ⊗ transmon.
pub fn lift_qudit(op: &DenseOperator, osc_dim: usize) -> DenseOperator {
    DenseOperator::identity(osc_dim).kron(op)
}

/// Partial trace over the transmon factor of a density operator on
/// oscillator ⊗ transmon.
pub fn trace_out_qudit(rho: &DenseOperator, qudit_dim: usize) -> DenseOperator {
    let total = rho.dim();
    assert_eq!(total % qudit_dim, 0);
    let osc_dim = total / qudit_dim;
    DenseOperator::from_fn(osc_dim, |n, m| {
        (0..qudit_dim)
            .map(|s| rho.mat()[(n * qudit_dim + s, m * qudit_dim + s)])
            .sum()
    })
}

/// Partial trace over the oscillator factor.
pub fn trace_out_osc(rho: &DenseOperator, qudit_dim: usize) -> DenseOperator {
    let total = rho.dim();
    assert_eq!(total % qudit_dim, 0);
    let osc_dim = total / qudit_dim;
    DenseOperator::from_fn(qudit_dim, |s, t| {
        (0..osc_dim)
            .map(|n| rho.mat()[(n * qudit_dim + s, n * qudit_dim + t)])
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn cutoff_rule_values() {
        assert_eq!(fock_cutoff(0.0), 10);
        assert_eq!(fock_cutoff(4.0), 30);
        assert_eq!(fock_cutoff(16.0), 58);
    }

    #[test]
    fn coherent_overlap_oracle() {
        // <α|-α> = e^{-2|α|²}, frozen analytic oracle.
        for a2 in [1.0f64, 2.0, 4.0] {
            let alpha = c64(a2.sqrt(), 0.0);
            let dim = fock_cutoff(a2);
            let p = coherent_state(alpha, dim, TOL).unwrap();
            let m = coherent_state(-alpha, dim, TOL).unwrap();
            let ov = overlap(&p, &m);
            assert!((ov.re - (-2.0 * a2).exp()).abs() < 1e-10, "a2={a2}");
            assert!(ov.im.abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_is_annihilation_eigenstate() {
        let alpha = c64(1.3, -0.7);
        let dim = fock_cutoff(alpha.norm_sqr());
        let v = coherent_state(alpha, dim, TOL).unwrap();
        let av = annihilation(dim).apply_vec(&v);
        let diff: f64 = av
            .iter()
            .zip(v.iter())
            .take(dim - 1) // last row feels the truncation
            .map(|(x, y)| (x - y * alpha).norm_sqr())
            .sum();
        assert!(diff.sqrt() < 1e-6);
    }

    #[test]
    fn cutoff_error_when_too_small() {
        let err = coherent_state(c64(3.0, 0.0), 9, TOL).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { .. }));
    }

    #[test]
    fn cat_normalization_matches_closed_form() {
        // Norm of (|α> + |-α>) is sqrt(2(1+e^{-2|α|²})); the normalized cat
        // amplitudes therefore equal N± times coherent sums.
        let a2 = 2.5f64;
        let alpha = c64(a2.sqrt(), 0.0);
        let dim = fock_cutoff(a2);
        let plus = coherent_state(alpha, dim, TOL).unwrap();
        let minus = coherent_state(-alpha, dim, TOL).unwrap();
        let raw: Array1<C64> = &plus + &minus;
        let n_plus = 1.0 / (2.0 * (1.0 + (-2.0 * a2).exp())).sqrt();
        assert!((norm(&raw) - 1.0 / n_plus).abs() < 1e-10);
        let cat = cat_state(alpha, Parity::Even, dim, TOL).unwrap();
        assert!((norm(&cat) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_parity_structure() {
        let alpha = c64(2.0, 0.0);
        let dim = fock_cutoff(4.0);
        let even = cat_state(alpha, Parity::Even, dim, TOL).unwrap();
        let odd = cat_state(alpha, Parity::Odd, dim, TOL).unwrap();
        for n in 0..dim {
            if n % 2 == 1 {
                assert!(even[n].norm() < 1e-14);
            } else {
                assert!(odd[n].norm() < 1e-14);
            }
        }
        assert!(overlap(&even, &odd).norm() < 1e-14);
        let proj = parity_projector(Parity::Even, dim);
        assert!((norm(&proj.apply_vec(&even)) - 1.0).abs() < 1e-12);
        assert!(norm(&proj.apply_vec(&odd)) < 1e-14);
    }

    #[test]
    fn codewords_orthonormal_and_near_coherent() {
        let a2 = 4.0;
        let alpha = c64(2.0, 0.0);
        let dim = fock_cutoff(a2);
        let zero = cat_codeword(alpha, 0, dim, TOL).unwrap();
        let one = cat_codeword(alpha, 1, dim, TOL).unwrap();
        assert!((norm(&zero) - 1.0).abs() < 1e-12);
        assert!(overlap(&zero, &one).norm() < 1e-12);
        // |<α|0_C>|² = 1 - O(e^{-4|α|²}); at |α|²=4 that's ~1e-7-level.
        let coh = coherent_state(alpha, dim, TOL).unwrap();
        let fid = overlap(&coh, &zero).norm_sqr();
        assert!(fid > 1.0 - 1e-6, "fid={fid}");
        let cross = overlap(&coh, &one).norm_sqr();
        assert!(cross < 1e-6, "cross={cross}");
    }

    #[test]
    fn displacement_generates_coherent_states() {
        let alpha = c64(1.1, 0.8);
        let dim = fock_cutoff(alpha.norm_sqr()) + 10;
        let d = displacement(alpha, dim).unwrap();
        assert!(d.is_unitary(1e-10));
        let from_vac = d.apply_vec(&fock_state(0, dim));
        let direct = coherent_state(alpha, dim, TOL).unwrap();
        let err: f64 = from_vac
            .iter()
            .zip(direct.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(err.sqrt() < 1e-8);
        // D(α) D(-α) = 1 within truncation on confined states.
        let id = d.mul(&displacement(-alpha, dim).unwrap());
        let back = id.apply_vec(&direct);
        assert!((overlap(&back, &direct).re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rotation_pi_flips_coherent_sign() {
        let alpha = c64(1.7, 0.4);
        let dim = fock_cutoff(alpha.norm_sqr());
        let v = coherent_state(alpha, dim, TOL).unwrap();
        let rotated = rotation(std::f64::consts::PI, dim).apply_vec(&v);
        let target = coherent_state(-alpha, dim, TOL).unwrap();
        assert!((overlap(&rotated, &target).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transmon_ops() {
        let b = transmon_lowering(3);
        // b = |g><e| + √2 |e><f|
        assert!((b.mat()[(0, 1)].re - 1.0).abs() < 1e-15);
        assert!((b.mat()[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.mat()[(0, 2)], c64(0.0, 0.0));
        let n_t = b.dagger().mul(&b);
        for s in 0..3 {
            assert!((n_t.mat()[(s, s)].re - s as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_traces_consistent() {
        let alpha = c64(1.0, 0.3);
        let dim = fock_cutoff(alpha.norm_sqr());
        let osc = coherent_state(alpha, dim, TOL).unwrap();
        let tr = {
            let mut t = Array1::zeros(3);
            t[0] = c64(0.6f64.sqrt(), 0.0);
            t[2] = c64(0.0, 0.4f64.sqrt());
            t
        };
        let psi = kron_vec(&osc, &tr);
        let rho = DenseOperator::outer(&psi, &psi);
        let rq = trace_out_osc(&rho, 3);
        assert!((rq.mat()[(0, 0)].re - 0.6).abs() < 1e-12);
        assert!((rq.mat()[(2, 2)].re - 0.4).abs() < 1e-12);
        let ro = trace_out_qudit(&rho, 3);
        assert!((ro.trace().re - 1.0).abs() < 1e-12);
        let pure = DenseOperator::outer(&osc, &osc);
        assert!(ro.max_abs_diff(&pure) < 1e-12);
    }
}
