//! Post-processing of logical-memory Monte-Carlo data: error-rate fits,
//! threshold estimation, qubit-overhead minimization, and the mapping from
//! extracted gate channels to the simplified biased-noise parameters.
//!
//! All fits work in log space, where each ansatz is exactly linear in its
//! unknowns:
//!
//! * unbiased total rate: `p_L = A d² (B p)^{C d}`, so
//!   `ln p_L − 2 ln d = ln A + (C ln B) d + C (d ln p)` — linear in
//!   `(1, d, d ln p)`;
//! * Z-biased logical-Z rate: `p_L = A d_Z (B p_Z)^{C d_Z}` — same with a
//!   first-power prefactor;
//! * logical-X power law: `p_L / d_Z² = A x^B` with `x = p_Z/η` — linear in
//!   `(1, ln x)`.
//!
//! Linear least squares therefore recovers the parameters without
//! iteration, and the normal-equation covariance is exact for the
//! transformed problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{string_to_index, Pauli, PauliChannel};

/// Largest code distance the overhead search will consider.
pub const MAX_DISTANCE: usize = 99;

/// One aggregated Monte-Carlo point feeding a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    /// Code distance the ansatz scales with (`d` for square codes, `d_Z`
    /// for rectangular ones).
    pub distance: usize,
    /// Physical error parameter (`p`, `p_Z`, or the proxy `p_Z/η`).
    pub p: f64,
    /// Observed logical error rate; must be positive for log-space fits.
    pub rate: f64,
}

/// One logical-X observation for the power-law fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasedXPoint {
    pub d_z: usize,
    pub p_z: f64,
    pub eta: f64,
    /// Observed logical-X error rate; must be positive.
    pub rate: f64,
}

/// Which functional form a [`FitResult`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    /// `p_L = A d² (B p)^{C d}` for square codes under unbiased noise.
    UnbiasedTotal,
    /// `p_L = A d_Z (B p_Z)^{C d_Z}` at fixed `d_X` and bias.
    BiasedZ,
    /// `p_L = A d_Z² x^B` with `x = p_Z/η`, at fixed `d_X`.
    BiasedX,
}

/// Fitted ansatz parameters plus fit-quality metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub ansatz: AnsatzKind,
    pub a: f64,
    pub b: f64,
    /// Scaling exponent `C`; zero (unused) for the power-law ansatz.
    pub c: f64,
    /// Covariance of the fitted *linear* parameters (`ln A`, `C ln B`, `C`
    /// for the exponential ansatzes; `ln A`, `B`, – for the power law),
    /// row-major, unused entries zero.
    pub covariance: [[f64; 3]; 3],
    /// Inclusive distance range of the input data.
    pub d_range: (usize, usize),
    /// Inclusive physical-error range of the input data.
    pub p_range: (f64, f64),
    /// Root-mean-square residual of `ln rate` over the inputs.
    pub log_rms_residual: f64,
}

impl FitResult {
    /// Evaluate the fitted ansatz at distance `d` and physical error `p`
    /// (the power-law ansatz expects the proxy `p_Z/η` as `p`).
    pub fn predict(&self, d: usize, p: f64) -> f64 {
        let df = d as f64;
        match self.ansatz {
            AnsatzKind::UnbiasedTotal => self.a * df * df * (self.b * p).powf(self.c * df),
            AnsatzKind::BiasedZ => self.a * df * (self.b * p).powf(self.c * df),
            AnsatzKind::BiasedX => self.a * df * df * p.powf(self.b),
        }
    }
}

/// Solve the n×n system `m x = rhs` by Gaussian elimination with partial
/// pivoting (tiny systems only: the fit normal equations).
fn solve_dense(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::FitDiverged("singular normal equations".into()));
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

/// Invert a small symmetric positive-definite matrix by solving against
/// unit vectors; used for the fit covariance.
fn invert_dense(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut a: Vec<Vec<f64>> = m.to_vec();
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve_dense(&mut a, &mut e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Ok(inv)
}

/// Ordinary least squares of `y` on the rows of `x` (k regressors);
/// returns (coefficients, covariance, rms residual).
fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let n = y.len();
    let k = x[0].len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * yi;
        }
    }
    let mut a = xtx.clone();
    let mut rhs = xty.clone();
    let beta = solve_dense(&mut a, &mut rhs)?;
    let mut rss = 0.0;
    for (row, &yi) in x.iter().zip(y) {
        let fit: f64 = row.iter().zip(&beta).map(|(xi, bi)| xi * bi).sum();
        rss += (yi - fit) * (yi - fit);
    }
    let sigma2 = if n > k { rss / (n - k) as f64 } else { 0.0 };
    let cov = invert_dense(&xtx)?
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * sigma2).collect())
        .collect();
    Ok((beta, cov, (rss / n as f64).sqrt()))
}

fn check_points(points: &[RatePoint], min_distinct_d: usize) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no fit points supplied".into()));
    }
    for pt in points {
        if !(pt.rate > 0.0 && pt.rate.is_finite()) {
            return Err(Error::InsufficientData(format!(
                "fit points need positive logical rates, got {} at d={}, p={}; \
                 drop zero-failure points or add shots",
                pt.rate, pt.distance, pt.p
            )));
        }
        if !(pt.p > 0.0 && pt.p.is_finite()) {
            return Err(Error::InsufficientData(format!(
                "fit points need positive physical error, got {}",
                pt.p
            )));
        }
        if pt.distance < 2 {
            return Err(Error::InsufficientData(format!(
                "distance {} is too small to fit",
                pt.distance
            )));
        }
    }
    let mut ds: Vec<usize> = points.iter().map(|p| p.distance).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < min_distinct_d {
        return Err(Error::InsufficientData(format!(
            "need at least {min_distinct_d} distinct distances, got {}",
            ds.len()
        )));
    }
    Ok(())
}

fn ranges(points: &[RatePoint]) -> ((usize, usize), (f64, f64)) {
    let d_lo = points.iter().map(|p| p.distance).min().unwrap();
    let d_hi = points.iter().map(|p| p.distance).max().unwrap();
    let p_lo = points.iter().map(|p| p.p).fold(f64::INFINITY, f64::min);
    let p_hi = points.iter().map(|p| p.p).fold(0.0, f64::max);
    ((d_lo, d_hi), (p_lo, p_hi))
}

fn pad3(cov: &[Vec<f64>]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in cov.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[i][j] = v;
        }
    }
    out
}

/// Fit the exponential-suppression ansatz with a `d^γ` prefactor; shared by
/// the unbiased (γ=2) and Z-biased (γ=1) fits.
fn fit_exponential(
    points: &[RatePoint],
    prefactor_power: f64,
    ansatz: AnsatzKind,
) -> Result<FitResult> {
    check_points(points, 3)?;
    let x: Vec<Vec<f64>> = points
        .iter()
        .map(|pt| {
            let d = pt.distance as f64;
            vec![1.0, d, d * pt.p.ln()]
        })
        .collect();
    let y: Vec<f64> = points
        .iter()
        .map(|pt| pt.rate.ln() - prefactor_power * (pt.distance as f64).ln())
        .collect();
    let (beta, cov, rms) = least_squares(&x, &y)?;
    let (ln_a, c_ln_b, c) = (beta[0], beta[1], beta[2]);
    if c.abs() < 1e-12 {
        return Err(Error::FitDiverged(
            "scaling exponent C is zero; the data carry no distance dependence".into(),
        ));
    }
    let result = FitResult {
        ansatz,
        a: ln_a.exp(),
        b: (c_ln_b / c).exp(),
        c,
        covariance: pad3(&cov),
        d_range: ranges(points).0,
        p_range: ranges(points).1,
        log_rms_residual: rms,
    };
    if !(result.a.is_finite() && result.b.is_finite() && result.c.is_finite()) {
        return Err(Error::FitDiverged(format!(
            "non-finite fit parameters A={}, B={}, C={}",
            result.a, result.b, result.c
        )));
    }
    Ok(result)
}

/// Fit `p_L = A d² (B p)^{C d}` to square-code data under unbiased noise.
/// Requires at least three distinct distances.
pub fn fit_unbiased(points: &[RatePoint]) -> Result<FitResult> {
    fit_exponential(points, 2.0, AnsatzKind::UnbiasedTotal)
}

/// Fit `p_L = A d_Z (B p_Z)^{C d_Z}` to logical-Z data taken at fixed
/// `d_X` and bias. Requires at least three distinct `d_Z`.
pub fn fit_biased_z(points: &[RatePoint]) -> Result<FitResult> {
    fit_exponential(points, 1.0, AnsatzKind::BiasedZ)
}

/// Fit the power law `p_L_X / d_Z² = A (p_Z/η)^B` to logical-X data taken
/// at fixed `d_X`.
pub fn fit_biased_x(points: &[BiasedXPoint]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(
            "the power-law fit needs at least two points".into(),
        ));
    }
    let as_rate: Vec<RatePoint> = points
        .iter()
        .map(|pt| RatePoint {
            distance: pt.d_z,
            p: pt.p_z / pt.eta,
            rate: pt.rate,
        })
        .collect();
    check_points(&as_rate, 1)?;
    let mut proxies: Vec<f64> = as_rate.iter().map(|pt| pt.p).collect();
    proxies.sort_by(f64::total_cmp);
    proxies.dedup();
    if proxies.len() < 2 {
        return Err(Error::InsufficientData(
            "the power-law fit needs at least two distinct p_Z/η values".into(),
        ));
    }
    let x: Vec<Vec<f64>> = as_rate.iter().map(|pt| vec![1.0, pt.p.ln()]).collect();
    let y: Vec<f64> = as_rate
        .iter()
        .map(|pt| pt.rate.ln() - 2.0 * (pt.distance as f64).ln())
        .collect();
    let (beta, cov, rms) = least_squares(&x, &y)?;
    let result = FitResult {
        ansatz: AnsatzKind::BiasedX,
        a: beta[0].exp(),
        b: beta[1],
        c: 0.0,
        covariance: pad3(&cov),
        d_range: ranges(&as_rate).0,
        p_range: ranges(&as_rate).1,
        log_rms_residual: rms,
    };
    if !(result.a.is_finite() && result.b.is_finite()) {
        return Err(Error::FitDiverged(format!(
            "non-finite power-law parameters A={}, B={}",
            result.a, result.b
        )));
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Overhead minimization
// ---------------------------------------------------------------------------

/// Physical noise point for an overhead query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NoisePoint {
    Unbiased { p: f64 },
    Biased { p_z: f64, eta: f64 },
}

/// One row of an overhead table: the cheapest code reaching the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadRow {
    pub target: f64,
    pub noise: NoisePoint,
    pub d_x: usize,
    pub d_z: usize,
    /// Total data + ancilla qubits, `2 d_X d_Z − 1`.
    pub qubits: usize,
    /// Ansatz-predicted logical error of the chosen code.
    pub predicted_rate: f64,
}

/// Per-`d_X` fit families for the biased-noise overhead search.
///
/// The logical-Z ansatz and the logical-X power law are both fitted at
/// fixed `d_X`; the search looks up the entry matching each candidate
/// `d_X`. Candidates outside the fitted set borrow the nearest fitted
/// `d_X` (preferring, for the X fit, the largest fitted value *below* the
/// candidate so extrapolation never claims more suppression than was
/// fitted).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasedFitFamily {
    /// (d_X, logical-Z fit at that d_X).
    pub z_fits: Vec<(usize, FitResult)>,
    /// (d_X, logical-X power-law fit at that d_X).
    pub x_fits: Vec<(usize, FitResult)>,
}

impl BiasedFitFamily {
    fn validate(&self) -> Result<()> {
        if self.z_fits.is_empty() || self.x_fits.is_empty() {
            return Err(Error::InsufficientData(
                "the biased overhead search needs both Z and X fits".into(),
            ));
        }
        for (_, f) in &self.z_fits {
            if f.ansatz != AnsatzKind::BiasedZ {
                return Err(Error::Config("z_fits must hold BiasedZ fits".into()));
            }
        }
        for (_, f) in &self.x_fits {
            if f.ansatz != AnsatzKind::BiasedX {
                return Err(Error::Config("x_fits must hold BiasedX fits".into()));
            }
        }
        Ok(())
    }

    /// Z fit for a candidate `d_X`: exact match, else nearest fitted
    /// (ties toward larger, which mildly overestimates the rate).
    fn z_for(&self, d_x: usize) -> &FitResult {
        let best = self
            .z_fits
            .iter()
            .min_by_key(|(dx, _)| (dx.abs_diff(d_x), usize::MAX - dx))
            .unwrap();
        &best.1
    }

    /// X fit for a candidate `d_X`: exact match, else the largest fitted
    /// `d_X` at or below the candidate (conservative), else the smallest
    /// fitted one.
    fn x_for(&self, d_x: usize) -> &FitResult {
        self.x_fits
            .iter()
            .filter(|(dx, _)| *dx <= d_x)
            .max_by_key(|(dx, _)| *dx)
            .or_else(|| self.x_fits.iter().min_by_key(|(dx, _)| *dx))
            .map(|(_, f)| f)
            .unwrap()
    }
}

/// Cheapest square code (`d_X = d_Z = d`, odd, ≤ [`MAX_DISTANCE`]) whose
/// fitted total logical error is at or below `target` under unbiased noise
/// of strength `p`.
pub fn overhead_unbiased(target: f64, p: f64, fit: &FitResult) -> Result<OverheadRow> {
    if fit.ansatz != AnsatzKind::UnbiasedTotal {
        return Err(Error::Config("overhead_unbiased needs an UnbiasedTotal fit".into()));
    }
    for d in (3..=MAX_DISTANCE).step_by(2) {
        let rate = fit.predict(d, p);
        if rate <= target {
            return Ok(OverheadRow {
                target,
                noise: NoisePoint::Unbiased { p },
                d_x: d,
                d_z: d,
                qubits: 2 * d * d - 1,
                predicted_rate: rate,
            });
        }
    }
    Err(Error::TargetUnreachable(format!(
        "no square code with d ≤ {MAX_DISTANCE} reaches logical error {target} at p = {p}"
    )))
}

/// Cheapest rectangular code (odd `d_X`, `d_Z` ≤ [`MAX_DISTANCE`]) whose
/// fitted `p_L_X + p_L_Z` is at or below `target` under biased noise
/// `(p_Z, η)`. Ties in qubit count prefer the smaller `d_X`.
pub fn overhead_biased(
    target: f64,
    p_z: f64,
    eta: f64,
    fits: &BiasedFitFamily,
) -> Result<OverheadRow> {
    fits.validate()?;
    let proxy = if eta.is_infinite() { 0.0 } else { p_z / eta };
    let mut best: Option<OverheadRow> = None;
    for d_x in (3..=MAX_DISTANCE).step_by(2) {
        let zf = fits.z_for(d_x);
        let xf = fits.x_for(d_x);
        for d_z in (3..=MAX_DISTANCE).step_by(2) {
            let qubits = 2 * d_x * d_z - 1;
            if let Some(b) = &best {
                if qubits >= b.qubits {
                    continue;
                }
            }
            let rate = zf.predict(d_z, p_z) + xf.predict(d_z, proxy);
            if rate <= target {
                best = Some(OverheadRow {
                    target,
                    noise: NoisePoint::Biased { p_z, eta },
                    d_x,
                    d_z,
                    qubits,
                    predicted_rate: rate,
                });
                break; // larger d_Z at this d_X can only cost more qubits
            }
        }
    }
    best.ok_or_else(|| {
        Error::TargetUnreachable(format!(
            "no rectangular code with d_X, d_Z ≤ {MAX_DISTANCE} reaches logical error \
             {target} at p_Z = {p_z}, η = {eta}"
        ))
    })
}

// ---------------------------------------------------------------------------
// Channel → (p_Z, η) mapping
// ---------------------------------------------------------------------------

/// Simplified-model parameters extracted from a pair of two-qubit gate
/// channels (first tensor factor = the storage/cat qubit).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappedBias {
    /// Effective per-gate Z error probability: `(3/2) × ½ (p_ZI + p_ZZ)`
    /// summed over the two gates; the 3/2 is a phenomenological calibration
    /// factor carried in this tool's metadata wherever the value is
    /// reported.
    pub p_z: f64,
    /// Bias `p_Z / (p_X + p_Y)` with the bit-flip probability averaged over
    /// the two gates; infinite when no bit-flip strings have weight.
    pub eta: f64,
}

fn cat_z_weight(ch: &PauliChannel) -> f64 {
    let zi = string_to_index(&[Pauli::Z, Pauli::I]);
    let zz = string_to_index(&[Pauli::Z, Pauli::Z]);
    ch.probs[zi] + ch.probs[zz]
}

fn cat_bitflip_weight(ch: &PauliChannel) -> f64 {
    let mut total = 0.0;
    for first in [Pauli::X, Pauli::Y] {
        for second in Pauli::ALL {
            total += ch.probs[string_to_index(&[first, second])];
        }
    }
    total
}

/// Map extracted CX/CRX channels to simplified-model `(p_Z, η)`.
///
/// Returns `None` when the channels carry no cat-qubit Z weight at all
/// (zero-noise input: the bias is undefined and the row is skipped).
pub fn mapped_bias(cx: &PauliChannel, crx: &PauliChannel) -> Result<Option<MappedBias>> {
    for (name, ch) in [("cx", cx), ("crx", crx)] {
        if ch.n != 2 {
            return Err(Error::MissingChannel(format!(
                "{name}: the bias mapping needs two-qubit channels, got {}-qubit",
                ch.n
            )));
        }
    }
    let p_z = 1.5 * 0.5 * (cat_z_weight(cx) + cat_z_weight(crx));
    if p_z <= 0.0 {
        return Ok(None);
    }
    let p_flip = 0.5 * (cat_bitflip_weight(cx) + cat_bitflip_weight(crx));
    let eta = if p_flip > 0.0 { p_z / p_flip } else { f64::INFINITY };
    Ok(Some(MappedBias { p_z, eta }))
}

/// One row of the achievable-parameter map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AchievableRow {
    pub q: f64,
    pub alpha_sq: f64,
    pub p_z: f64,
    pub eta: f64,
}

/// Map a grid of simulated gate channels to achievable `(p_Z, η)` points.
/// Entries are `(q, |α|², cx channel, crx channel)`; zero-noise entries
/// are skipped.
pub fn achievable_map(
    entries: &[(f64, f64, PauliChannel, PauliChannel)],
) -> Result<Vec<AchievableRow>> {
    let mut rows = Vec::with_capacity(entries.len());
    for (q, alpha_sq, cx, crx) in entries {
        if let Some(m) = mapped_bias(cx, crx)? {
            rows.push(AchievableRow {
                q: *q,
                alpha_sq: *alpha_sq,
                p_z: m.p_z,
                eta: m.eta,
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Curve intersections: beneficial bias and threshold
// ---------------------------------------------------------------------------

/// Piecewise-linear interpolation of `ln y` as a function of `ln x` over a
/// strictly positive, x-sorted curve.
struct LogCurve {
    lx: Vec<f64>,
    ly: Vec<f64>,
}

impl LogCurve {
    fn new(points: &[(f64, f64)], what: &str) -> Result<LogCurve> {
        let mut pts: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "{what}: need at least two positive points, got {}",
                pts.len()
            )));
        }
        Ok(LogCurve {
            lx: pts.iter().map(|p| p.0.ln()).collect(),
            ly: pts.iter().map(|p| p.1.ln()).collect(),
        })
    }

    fn eval(&self, lx: f64) -> f64 {
        let n = self.lx.len();
        if lx <= self.lx[0] {
            return self.ly[0];
        }
        if lx >= self.lx[n - 1] {
            return self.ly[n - 1];
        }
        let j = self.lx.partition_point(|&v| v < lx).min(n - 1);
        let (x0, x1) = (self.lx[j - 1], self.lx[j]);
        let t = (lx - x0) / (x1 - x0);
        self.ly[j - 1] * (1.0 - t) + self.ly[j] * t
    }
}

/// First crossing (in ascending x) of two log-log curves within their
/// common x range; linear interpolation between bracketing knots.
fn log_crossing(a: &LogCurve, b: &LogCurve) -> Option<f64> {
    let lo = a.lx[0].max(b.lx[0]);
    let hi = a.lx[a.lx.len() - 1].min(b.lx[b.lx.len() - 1]);
    if !(lo < hi) {
        return None;
    }
    let mut knots: Vec<f64> = a
        .lx
        .iter()
        .chain(b.lx.iter())
        .copied()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let g = |x: f64| a.eval(x) - b.eval(x);
    let mut prev_x = knots[0];
    let mut prev_g = g(prev_x);
    for &x in &knots[1..] {
        let gx = g(x);
        if prev_g == 0.0 {
            return Some(prev_x.exp());
        }
        if prev_g * gx < 0.0 {
            let t = prev_g / (prev_g - gx);
            return Some((prev_x + t * (x - prev_x)).exp());
        }
        prev_x = x;
        prev_g = gx;
    }
    if prev_g == 0.0 {
        return Some(prev_x.exp());
    }
    None
}

/// Where growing the cat stops helping: the crossing of the CRX and CX
/// bit-flip curves versus `|α|²` at fixed `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasOptimum {
    /// `|α|²` at which the CRX bit-flip probability falls to the CX floor.
    pub alpha_sq: f64,
    /// Common bit-flip probability at the crossing.
    pub p_bit: f64,
    /// Resulting bias, using the leading-order phase-flip probability
    /// `p_Z = π|α|²q` at the crossing.
    pub eta: f64,
}

/// Intersect the CX and CRX bit-flip curves (each a list of
/// `(|α|², p_bit)` points at fixed `q`) to find the maximum beneficial
/// bias point.
pub fn max_beneficial_bias(
    cx_curve: &[(f64, f64)],
    crx_curve: &[(f64, f64)],
    q: f64,
) -> Result<BiasOptimum> {
    let cx = LogCurve::new(cx_curve, "cx bit-flip curve")?;
    let crx = LogCurve::new(crx_curve, "crx bit-flip curve")?;
    let alpha_sq = log_crossing(&crx, &cx).ok_or_else(|| {
        Error::NoCrossing(
            "the CRX and CX bit-flip curves do not intersect over the shared |α|² range"
                .into(),
        )
    })?;
    let p_bit = cx.eval(alpha_sq.ln()).exp();
    let p_z = std::f64::consts::PI * alpha_sq * q;
    Ok(BiasOptimum { alpha_sq, p_bit, eta: p_z / p_bit })
}

/// Estimate the error-parameter threshold from per-distance rate curves.
///
/// `curves` holds `(distance, [(q, logical rate), …])` with positive rates;
/// the estimate is the median of the pairwise log-log crossings of
/// successive distances (even counts take the log-space midpoint).
pub fn threshold_estimate(curves: &[(usize, Vec<(f64, f64)>)]) -> Result<f64> {
    if curves.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "threshold estimation needs at least three distances, got {}",
            curves.len()
        )));
    }
    let mut sorted: Vec<&(usize, Vec<(f64, f64)>)> = curves.iter().collect();
    sorted.sort_by_key(|(d, _)| *d);
    let mut crossings = Vec::new();
    for pair in sorted.windows(2) {
        let a = LogCurve::new(&pair[0].1, "rate curve")?;
        let b = LogCurve::new(&pair[1].1, "rate curve")?;
        if let Some(x) = log_crossing(&a, &b) {
            crossings.push(x);
        }
    }
    if crossings.is_empty() {
        return Err(Error::NoCrossing(
            "no successive-distance rate curves intersect; the scan does not \
             bracket the threshold"
                .into(),
        ));
    }
    crossings.sort_by(f64::total_cmp);
    let n = crossings.len();
    Ok(if n % 2 == 1 {
        crossings[n / 2]
    } else {
        (crossings[n / 2 - 1].ln() * 0.5 + crossings[n / 2].ln() * 0.5).exp()
    })
}
