//! Dense and sparse complex linear algebra.
//!
//! Everything here is self-contained (no BLAS/LAPACK linkage) so results
//! are deterministic across machines. Dimensions in this crate stay small
//! (a few hundred), where a cyclic Jacobi eigensolver and hand-rolled
//! kernels are both fast enough and bit-stable.
//!
//! The [`SparseOp`] type carries an optional *frame frequency* per entry:
//! in a rotating frame generated by a diagonal Hamiltonian `diag(d)`, every
//! operator picks up elementwise phases `exp(i (d_r - d_c) t)`. Storing
//! `w = d_r - d_c` next to each nonzero lets the integrator evaluate
//! transformed operators exactly at any time without matrix products.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = Complex64;

/// Convenience constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// ---------------------------------------------------------------------------
// Dense operators
// ---------------------------------------------------------------------------

/// Dense square operator on a finite-dimensional Hilbert space.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    mat: Array2<C64>,
}

impl DenseOperator {
    /// Zero operator of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self { mat: Array2::zeros((dim, dim)) }
    }

    /// Identity of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Self { mat: m }
    }

    /// Wrap an existing square array.
    pub fn from_array(mat: Array2<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        Self { mat }
    }

    /// Build elementwise from a function of `(row, col)`.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Self { mat: Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)) }
    }

    /// Diagonal operator from real entries.
    pub fn from_diag_real(d: &[f64]) -> Self {
        let mut m = Array2::zeros((d.len(), d.len()));
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self { mat: m }
    }

    /// Rank-one outer product `|ket><bra|` from state vectors.
    pub fn outer(ket: &Array1<C64>, bra: &Array1<C64>) -> Self {
        let dim = ket.len();
        assert_eq!(dim, bra.len());
        Self {
            mat: Array2::from_shape_fn((dim, dim), |(i, j)| ket[i] * bra[j].conj()),
        }
    }

    /// Hilbert-space dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Underlying matrix.
    #[inline]
    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    /// Mutable underlying matrix.
    #[inline]
    pub fn mat_mut(&mut self) -> &mut Array2<C64> {
        &mut self.mat
    }

    /// Consume into the underlying matrix.
    pub fn into_mat(self) -> Array2<C64> {
        self.mat
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let d = self.dim();
        Self { mat: Array2::from_shape_fn((d, d), |(i, j)| self.mat[(j, i)].conj()) }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self { mat: self.mat.dot(&rhs.mat) }
    }

    /// `self + rhs`.
    pub fn add(&self, rhs: &Self) -> Self {
        Self { mat: &self.mat + &rhs.mat }
    }

    /// `self - rhs`.
    pub fn sub(&self, rhs: &Self) -> Self {
        Self { mat: &self.mat - &rhs.mat }
    }

    /// `self * c` for a complex scalar.
    pub fn scale(&self, c: C64) -> Self {
        Self { mat: self.mat.mapv(|x| x * c) }
    }

    /// In-place `self += c * rhs`.
    pub fn axpy(&mut self, c: C64, rhs: &Self) {
        self.mat.zip_mut_with(&rhs.mat, |a, &b| *a += c * b);
    }

    /// Kronecker product `self ⊗ rhs` (row-major convention:
    /// index `(i_a * dim_b + i_b)`).
    pub fn kron(&self, rhs: &Self) -> Self {
        let (da, db) = (self.dim(), rhs.dim());
        let mut out = Array2::zeros((da * db, da * db));
        for ia in 0..da {
            for ja in 0..da {
                let a = self.mat[(ia, ja)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out[(ia * db + ib, ja * db + jb)] = a * rhs.mat[(ib, jb)];
                    }
                }
            }
        }
        Self { mat: out }
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// `tr(self† * rhs)` — Hilbert–Schmidt inner product.
    pub fn hs_inner(&self, rhs: &Self) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (a, b) in self.mat.iter().zip(rhs.mat.iter()) {
            s += a.conj() * b;
        }
        s
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.mat
            .iter()
            .zip(rhs.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Whether `‖self - self†‖_max < tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                if (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Whether `‖self† self - 1‖_max < tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger().mul(self).max_abs_diff(&Self::identity(self.dim())) < tol
    }

    /// Apply to a state vector.
    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// Expectation value `<v|self|v>`.
    pub fn expectation(&self, v: &Array1<C64>) -> C64 {
        let w = self.apply_vec(v);
        v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Eigendecomposition of a Hermitian operator via cyclic Jacobi.
    ///
    /// Returns `(eigenvalues ascending, V)` with columns of `V` the
    /// corresponding orthonormal eigenvectors (`self = V diag(λ) V†`).
    pub fn eigh(&self) -> Result<(Vec<f64>, DenseOperator)> {
        jacobi_eigh(&self.mat)
    }

    /// Smallest eigenvalue of a Hermitian operator.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.0[0])
    }
}

/// Unitary `exp(i s K)` for Hermitian `K`, via exact eigendecomposition.
pub fn expi_hermitian(k: &DenseOperator, s: f64) -> Result<DenseOperator> {
    let (vals, v) = k.eigh()?;
    let d = k.dim();
    // V diag(e^{i s λ}) V†
    let mut scaled = v.mat().clone();
    for (j, &lam) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, s * lam);
        for i in 0..d {
            scaled[(i, j)] *= ph;
        }
    }
    Ok(DenseOperator::from_array(scaled).mul(&v.dagger()))
}

/// Cyclic Jacobi eigendecomposition for complex Hermitian matrices.
fn jacobi_eigh(a: &Array2<C64>) -> Result<(Vec<f64>, DenseOperator)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DenseOperator::identity(n).into_mat();
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-14 * scale;

    for sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off < tol {
            // Sort ascending by eigenvalue, permuting columns of V.
            let mut idx: Vec<usize> = (0..n).collect();
            let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
            idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
            let vals: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
            let vs = Array2::from_shape_fn((n, n), |(i, j)| v[(i, idx[j])]);
            return Ok((vals, DenseOperator::from_array(vs)));
        }
        let thresh = if sweep < 3 { off * 0.1 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let babs = b.norm();
                if babs <= thresh || babs < tol {
                    continue;
                }
                // Phase that makes the pivot real, then a real rotation.
                let phase = b / babs; // e^{i beta}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s*phase], [-s*conj(phase), c]] acting on columns (p, q):
                // columns transform as  col_p' = c*col_p - s*conj(phase)*col_q
                //                       col_q' = s*phase*col_p + c*col_q
                let gpq = C64::new(s, 0.0) * phase;
                let gqp = -C64::new(s, 0.0) * phase.conj();
                // Update M = G† M G.
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c + miq * gqp;
                    m[(i, q)] = mip * gpq + miq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c + mqj * gqp.conj();
                    m[(q, j)] = mpj * gpq.conj() + mqj * c;
                }
                // Clean the pivot pair exactly.
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                // Accumulate V = V G.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * gqp;
                    v[(i, q)] = vip * gpq + viq * c;
                }
            }
        }
    }
    Err(Error::ConvergenceFailure(
        "Jacobi eigensolver did not converge in 100 sweeps".into(),
    ))
}

// ---------------------------------------------------------------------------
// Sparse operators with frame phases
// ---------------------------------------------------------------------------

/// One nonzero entry: value `v` at `(r, c)` with frame frequency `w`.
#[derive(Clone, Copy, Debug)]
pub struct SparseEntry {
    pub r: u32,
    pub c: u32,
    pub v: C64,
    pub w: f64,
}

/// Sparse operator as a sorted coordinate list, optionally carrying
/// interaction-picture frame frequencies `w = d_r - d_c`.
#[derive(Clone, Debug)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<SparseEntry>,
    has_frame: bool,
}

impl SparseOp {
    /// Convert a dense operator, dropping entries below `1e-15 * max|entry|`.
    /// `frame` supplies the diagonal rotating-frame energies, if any.
    pub fn from_dense(op: &DenseOperator, frame: Option<&[f64]>) -> Self {
        let dim = op.dim();
        if let Some(d) = frame {
            assert_eq!(d.len(), dim, "frame length must match dimension");
        }
        let cut = 1e-15 * op.max_abs();
        let mut entries = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = op.mat()[(r, c)];
                if v.norm() > cut {
                    let w = frame.map_or(0.0, |d| d[r] - d[c]);
                    entries.push(SparseEntry { r: r as u32, c: c as u32, v, w });
                }
            }
        }
        Self { dim, entries, has_frame: frame.is_some() }
    }

    /// Dimension of the underlying space.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored nonzeros.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Stored entries (row-major sorted).
    #[inline]
    pub fn entries(&self) -> &[SparseEntry] {
        &self.entries
    }

    /// Whether this operator carries frame frequencies.
    #[inline]
    pub fn framed(&self) -> bool {
        self.has_frame
    }

    /// Conjugate transpose (frame frequencies flip sign consistently).
    pub fn dagger(&self) -> Self {
        let mut entries: Vec<SparseEntry> = self
            .entries
            .iter()
            .map(|e| SparseEntry { r: e.c, c: e.r, v: e.v.conj(), w: -e.w })
            .collect();
        entries.sort_by_key(|e| (e.r, e.c));
        Self { dim: self.dim, entries, has_frame: self.has_frame }
    }

    /// Dense `self† * self` (for dissipator anticommutators), inheriting the
    /// frame rule: `(L†L)_{rc}` gets `w = d_r - d_c`, which is exactly the
    /// frequency sum of the contributing products.
    pub fn dagger_self_dense(&self, frame: Option<&[f64]>) -> SparseOp {
        let mut dense = Array2::<C64>::zeros((self.dim, self.dim));
        for a in &self.entries {
            for b in &self.entries {
                if a.r == b.r {
                    dense[(a.c as usize, b.c as usize)] += a.v.conj() * b.v;
                }
            }
        }
        SparseOp::from_dense(&DenseOperator::from_array(dense), frame)
    }

    /// Write `v * exp(i w t)` for each entry into `buf`.
    #[inline]
    pub fn phased_into(&self, t: f64, buf: &mut Vec<C64>) {
        buf.clear();
        if !self.has_frame || t == 0.0 {
            buf.extend(self.entries.iter().map(|e| e.v));
        } else {
            buf.extend(
                self.entries
                    .iter()
                    .map(|e| e.v * C64::from_polar(1.0, e.w * t)),
            );
        }
    }

    /// Dense reconstruction at `t = 0` (frame phases are unity there).
    pub fn to_dense(&self) -> DenseOperator {
        let mut m = Array2::zeros((self.dim, self.dim));
        for e in &self.entries {
            m[(e.r as usize, e.c as usize)] = e.v;
        }
        DenseOperator::from_array(m)
    }
}

/// `out += coeff * S(phased) * rho` on row-major flattened matrices, where
/// `phased[k]` is the k-th entry value (see [`SparseOp::phased_into`]).
///
/// Each nonzero streams one row of `rho` into one row of `out`, keeping
/// both in cache.
pub fn add_left(op: &SparseOp, phased: &[C64], rho: &[C64], out: &mut [C64], coeff: C64) {
    let dim = op.dim;
    debug_assert_eq!(rho.len(), dim * dim);
    debug_assert_eq!(out.len(), dim * dim);
    for (e, &pv) in op.entries.iter().zip(phased) {
        let cv = coeff * pv;
        let (r, k) = (e.r as usize, e.c as usize);
        let src = &rho[k * dim..(k + 1) * dim];
        let dst = &mut out[r * dim..(r + 1) * dim];
        for j in 0..dim {
            dst[j] += cv * src[j];
        }
    }
}

/// `out += coeff * rho * S(phased)` on row-major flattened matrices.
pub fn add_right(op: &SparseOp, phased: &[C64], rho: &[C64], out: &mut [C64], coeff: C64) {
    let dim = op.dim;
    debug_assert_eq!(rho.len(), dim * dim);
    debug_assert_eq!(out.len(), dim * dim);
    for i in 0..dim {
        let row = i * dim;
        for (e, &pv) in op.entries.iter().zip(phased) {
            out[row + e.c as usize] += coeff * pv * rho[row + e.r as usize];
        }
    }
}

// ---------------------------------------------------------------------------
// Small dense solvers
// ---------------------------------------------------------------------------

/// Solve `A x = b` for small complex systems by Gaussian elimination with
/// partial pivoting. `a` is consumed as scratch.
pub fn solve_complex(mut a: Array2<C64>, mut b: Array1<C64>) -> Result<Array1<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap()
            })
            .unwrap();
        if a[(piv, col)].norm() < 1e-300 {
            return Err(Error::DomainError("singular linear system".into()));
        }
        if piv != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            b.swap(col, piv);
        }
        let inv = C64::new(1.0, 0.0) / a[(col, col)];
        for i in (col + 1)..n {
            let f = a[(i, col)] * inv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let acj = a[(col, j)];
                a[(i, j)] -= f * acj;
            }
            let bc = b[col];
            b[i] -= f * bc;
        }
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[(i, j)] * x[j];
        }
        x[i] = s / a[(i, i)];
    }
    Ok(x)
}

/// Ordinary least squares: minimize `‖X beta - y‖²` via normal equations.
/// Columns of `x` are the regressors. Returns the coefficient vector.
pub fn least_squares(x: &Array2<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (x.nrows(), x.ncols());
    if n < p {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {p} parameters"
        )));
    }
    // Normal equations with complex solver reuse (imag parts zero).
    let mut xtx = Array2::<C64>::zeros((p, p));
    let mut xty = Array1::<C64>::zeros(p);
    for a in 0..p {
        for b in 0..p {
            let mut s = 0.0;
            for i in 0..n {
                s += x[(i, a)] * x[(i, b)];
            }
            xtx[(a, b)] = C64::new(s, 0.0);
        }
        let mut s = 0.0;
        for i in 0..n {
            s += x[(i, a)] * y[i];
        }
        xty[a] = C64::new(s, 0.0);
    }
    let beta = solve_complex(xtx, xty)?;
    let out: Vec<f64> = beta.iter().map(|z| z.re).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite least-squares solution".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn random_hermitian(n: usize, seed: u64) -> DenseOperator {
        let rng = crate::rng::CounterRng::new(seed);
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let (re, im) = rng.gaussian_pair((i * n + j) as u64, 0);
                if i == j {
                    m[(i, i)] = C64::new(re, 0.0);
                } else {
                    m[(i, j)] = C64::new(re, im);
                    m[(j, i)] = C64::new(re, -im);
                }
            }
        }
        DenseOperator::from_array(m)
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        for n in [2usize, 3, 8, 25] {
            let a = random_hermitian(n, 3 + n as u64);
            let (vals, v) = a.eigh().unwrap();
            assert!(v.is_unitary(1e-10), "V not unitary at n={n}");
            let lam = DenseOperator::from_diag_real(&vals);
            let rec = v.mul(&lam).mul(&v.dagger());
            assert!(rec.max_abs_diff(&a) < 1e-10 * (1.0 + a.max_abs()));
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn jacobi_known_eigenvalues() {
        // Pauli Y has eigenvalues ±1.
        let y = DenseOperator::from_array(array![
            [c64(0.0, 0.0), c64(0.0, -1.0)],
            [c64(0.0, 1.0), c64(0.0, 0.0)]
        ]);
        let (vals, _) = y.eigh().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expi_matches_series() {
        let k = random_hermitian(6, 77);
        let u = expi_hermitian(&k, 0.37).unwrap();
        assert!(u.is_unitary(1e-11));
        // Compare against a Taylor series.
        let mut series = DenseOperator::identity(6);
        let mut term = DenseOperator::identity(6);
        for n in 1..60 {
            term = term.mul(&k).scale(c64(0.0, 0.37 / n as f64));
            series.axpy(c64(1.0, 0.0), &term);
        }
        assert!(u.max_abs_diff(&series) < 1e-11);
    }

    #[test]
    fn sparse_matches_dense_products() {
        let a = random_hermitian(7, 5);
        let rho = random_hermitian(7, 6);
        let sp = SparseOp::from_dense(&a, None);
        let mut phased = Vec::new();
        sp.phased_into(0.0, &mut phased);

        let rho_flat: Vec<C64> = rho.mat().iter().copied().collect();
        let mut out = vec![c64(0.0, 0.0); 49];
        add_left(&sp, &phased, &rho_flat, &mut out, c64(1.0, 0.0));
        let got = DenseOperator::from_array(Array2::from_shape_vec((7, 7), out.clone()).unwrap());
        assert!(got.max_abs_diff(&a.mul(&rho)) < 1e-12);

        out.fill(c64(0.0, 0.0));
        add_right(&sp, &phased, &rho_flat, &mut out, c64(1.0, 0.0));
        let got = DenseOperator::from_array(Array2::from_shape_vec((7, 7), out).unwrap());
        assert!(got.max_abs_diff(&rho.mul(&a)) < 1e-12);
    }

    #[test]
    fn framed_phases_match_unitary_conjugation() {
        // S(t) = e^{iDt} S e^{-iDt} elementwise.
        let d = vec![0.3, -1.1, 2.0, 0.0];
        let a = random_hermitian(4, 9);
        let sp = SparseOp::from_dense(&a, Some(&d));
        let t = 0.83;
        let mut phased = Vec::new();
        sp.phased_into(t, &mut phased);
        let id: Vec<C64> = DenseOperator::identity(4).mat().iter().copied().collect();
        let mut out = vec![c64(0.0, 0.0); 16];
        add_left(&sp, &phased, &id, &mut out, c64(1.0, 0.0));
        let exp_d = DenseOperator::from_fn(4, |i, j| {
            if i == j {
                C64::from_polar(1.0, d[i] * t)
            } else {
                c64(0.0, 0.0)
            }
        });
        let want = exp_d.mul(&a).mul(&exp_d.dagger());
        let got = DenseOperator::from_array(Array2::from_shape_vec((4, 4), out).unwrap());
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn dagger_self_is_ldag_l() {
        let a = random_hermitian(5, 21);
        let b = random_hermitian(5, 22);
        let l = a.mul(&b); // generic non-hermitian
        let sp = SparseOp::from_dense(&l, None);
        let m = sp.dagger_self_dense(None).to_dense();
        let want = l.dagger().mul(&l);
        assert!(m.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn small_solver_roundtrip() {
        let a = array![
            [c64(2.0, 1.0), c64(0.0, -1.0)],
            [c64(1.0, 0.0), c64(3.0, 0.0)]
        ];
        let x_true = array![c64(1.0, -2.0), c64(0.5, 0.25)];
        let b = a.dot(&x_true);
        let x = solve_complex(a, b).unwrap();
        for (u, v) in x.iter().zip(x_true.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn least_squares_exact_line() {
        // y = 2 + 3x fit with design [1, x].
        let xs = [0.0, 1.0, 2.0, 5.0];
        let x = Array2::from_shape_fn((4, 2), |(i, j)| if j == 0 { 1.0 } else { xs[i] });
        let y: Vec<f64> = xs.iter().map(|&v| 2.0 + 3.0 * v).collect();
        let beta = least_squares(&x, &y).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-12);
        assert!((beta[1] - 3.0).abs() < 1e-12);
    }
}
