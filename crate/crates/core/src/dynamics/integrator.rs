//! Adaptive explicit Runge–Kutta integrators on complex states.
//!
//! Two embedded-error methods are provided:
//!
//! * [`Method::Dopri5`] — Dormand–Prince 5(4), 6 effective evaluations per
//!   accepted step (first-same-as-last).
//! * [`Method::Dop853`] — Dormand–Prince 8(5,3), 12 evaluations per
//!   accepted step, the workhorse for long oscillatory propagations.
//!
//! Coefficients are the standard published values at full double
//! precision. Error control follows common practice: per-entry scale
//! `atol + rtol * max(|y0|, |y1|)`, RMS norm, step factor
//! `0.9 * err^(-1/(q+1))` clamped to `[0.2, 10]`; the 8(5,3) pair blends
//! its 5th- and 3rd-order estimates so neither dominates.
//!
//! The state is a flat complex slice (matrix states are flattened row-major
//! by the callers). The right-hand side writes into a caller-provided
//! buffer; nothing allocates inside the step loop.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Integration method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dopri5,
    Dop853,
}

/// Counters reported after an integration.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl StepStats {
    /// Merge counters from a subsequent segment.
    pub fn absorb(&mut self, other: StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

// --- Dormand–Prince 5(4) ---------------------------------------------------

const DP5_C: [f64; 5] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0];
const DP5_A: [&[f64]; 5] = [
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const DP5_B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const DP5_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// --- Dormand–Prince 8(5,3) ---------------------------------------------------

const DP8_C: [f64; 11] = [
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];
const DP8_B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const DP8_E3: [f64; 12] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
];
const DP8_E5: [f64; 12] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];
const DP8_A1: [f64; 1] = [0.05260015195876773];
const DP8_A2: [f64; 2] = [0.0197250569845379, 0.0591751709536137];
const DP8_A3: [f64; 3] = [0.02958758547680685, 0.0, 0.08876275643042054];
const DP8_A4: [f64; 4] = [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792];
const DP8_A5: [f64; 5] = [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242];
const DP8_A6: [f64; 6] = [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125];
const DP8_A7: [f64; 7] = [
    0.03709200011850479,
    0.0,
    0.0,
    0.17038392571223998,
    0.10726203044637328,
    -0.015319437748624402,
    0.008273789163814023,
];
const DP8_A8: [f64; 8] = [
    0.6241109587160757,
    0.0,
    0.0,
    -3.3608926294469414,
    -0.868219346841726,
    27.59209969944671,
    20.154067550477894,
    -43.48988418106996,
];
const DP8_A9: [f64; 9] = [
    0.47766253643826434,
    0.0,
    0.0,
    -2.4881146199716677,
    -0.590290826836843,
    21.230051448181193,
    15.279233632882423,
    -33.28821096898486,
    -0.020331201708508627,
];
const DP8_A10: [f64; 10] = [
    -0.9371424300859873,
    0.0,
    0.0,
    5.186372428844064,
    1.0914373489967295,
    -8.149787010746927,
    -18.52006565999696,
    22.739487099350505,
    2.4936055526796523,
    -3.0467644718982196,
];
const DP8_A11: [f64; 11] = [
    2.273310147516538,
    0.0,
    0.0,
    -10.53449546673725,
    -2.0008720582248625,
    -17.9589318631188,
    27.94888452941996,
    -2.8589982771350235,
    -8.87285693353063,
    12.360567175794303,
    0.6433927460157636,
];
const DP8_A: [&[f64]; 11] = [
    &DP8_A1, &DP8_A2, &DP8_A3, &DP8_A4, &DP8_A5, &DP8_A6, &DP8_A7, &DP8_A8, &DP8_A9, &DP8_A10,
    &DP8_A11,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const MAX_STEPS: usize = 20_000_000;

#[inline]
fn axpy(dst: &mut [C64], a: f64, src: &[C64]) {
    if a == 0.0 {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += a * s;
    }
}

/// Integrate `dy/dt = rhs(t, y)` from `t = 0` to `t = duration`, updating
/// `y` in place. `rhs(t, y, out)` must fill `out` completely.
pub fn integrate<F>(
    method: Method,
    mut rhs: F,
    y: &mut [C64],
    duration: f64,
    rtol: f64,
    atol: f64,
) -> Result<StepStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    assert!(duration >= 0.0 && duration.is_finite());
    let mut stats = StepStats::default();
    if duration == 0.0 {
        return Ok(stats);
    }
    let n = y.len();
    let n_k = match method {
        Method::Dopri5 => 7,
        Method::Dop853 => 12,
    };
    let err_exp = match method {
        Method::Dopri5 => -1.0 / 5.0,
        Method::Dop853 => -1.0 / 8.0,
    };
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; n_k];
    let mut ytmp = vec![C64::new(0.0, 0.0); n];

    let mut t = 0.0f64;
    rhs(0.0, y, &mut k[0]);
    stats.rhs_evals += 1;

    // Initial step from magnitudes (conservative; the controller adapts fast).
    let rms = |v: &[C64]| (v.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(y);
    let d1 = rms(&k[0]);
    let mut h = if d1 > 1e-12 { (0.01 * d0.max(1e-6) / d1).min(duration) } else { duration / 100.0 };
    h = h.max(duration * 1e-10);

    let mut k0_fresh = true; // k[0] == rhs(t, y)
    loop {
        if t >= duration {
            return Ok(stats);
        }
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::ConvergenceFailure(format!(
                "integrator exceeded {MAX_STEPS} steps at t={t}"
            )));
        }
        if h < duration * 1e-12 {
            return Err(Error::StepUnderflow { t, h });
        }
        if t + h > duration {
            h = duration - t;
        }
        if !k0_fresh {
            rhs(t, y, &mut k[0]);
            stats.rhs_evals += 1;
            k0_fresh = true;
        }

        let (a_rows, c_nodes): (&[&[f64]], &[f64]) = match method {
            Method::Dopri5 => (&DP5_A[..], &DP5_C[..]),
            Method::Dop853 => (&DP8_A[..], &DP8_C[..]),
        };
        for (s, (row, &c)) in a_rows.iter().zip(c_nodes).enumerate() {
            ytmp.copy_from_slice(y);
            for (j, &a) in row.iter().enumerate() {
                axpy(&mut ytmp, h * a, &k[j]);
            }
            let (_, rest) = k.split_at_mut(s + 1);
            rhs(t + c * h, &ytmp, &mut rest[0]);
            stats.rhs_evals += 1;
        }

        let (err, accepted) = match method {
            Method::Dopri5 => {
                ytmp.copy_from_slice(y);
                for (j, &b) in DP5_B.iter().enumerate() {
                    axpy(&mut ytmp, h * b, &k[j]);
                }
                // FSAL stage k7 = f(t+h, y1), part of the error estimate.
                {
                    let (_, last) = k.split_at_mut(6);
                    rhs(t + h, &ytmp, &mut last[0]);
                    stats.rhs_evals += 1;
                }
                let mut err_sq = 0.0f64;
                for i in 0..n {
                    let mut e = C64::new(0.0, 0.0);
                    for (j, &ce) in DP5_E.iter().enumerate() {
                        if ce != 0.0 {
                            e += ce * k[j][i];
                        }
                    }
                    let scale = atol + rtol * y[i].norm().max(ytmp[i].norm());
                    let v = (h * e).norm() / scale;
                    err_sq += v * v;
                }
                let err = (err_sq / n as f64).sqrt();
                (err, err <= 1.0)
            }
            Method::Dop853 => {
                ytmp.copy_from_slice(y);
                for (j, &b) in DP8_B.iter().enumerate() {
                    axpy(&mut ytmp, h * b, &k[j]);
                }
                let mut e5_sq = 0.0f64;
                let mut e3_sq = 0.0f64;
                for i in 0..n {
                    let mut e5 = C64::new(0.0, 0.0);
                    let mut e3 = C64::new(0.0, 0.0);
                    for j in 0..12 {
                        let kj = k[j][i];
                        if DP8_E5[j] != 0.0 {
                            e5 += DP8_E5[j] * kj;
                        }
                        if DP8_E3[j] != 0.0 {
                            e3 += DP8_E3[j] * kj;
                        }
                    }
                    let scale = atol + rtol * y[i].norm().max(ytmp[i].norm());
                    e5_sq += (e5 / scale).norm_sqr();
                    e3_sq += (e3 / scale).norm_sqr();
                }
                let denom = e5_sq + 0.01 * e3_sq;
                let err = if denom > 0.0 {
                    h.abs() * e5_sq / (denom * n as f64).sqrt()
                } else {
                    0.0
                };
                (err, err <= 1.0)
            }
        };

        if accepted {
            t += h;
            y.copy_from_slice(&ytmp);
            stats.accepted += 1;
            match method {
                Method::Dopri5 => k.swap(0, 6), // FSAL reuse
                Method::Dop853 => k0_fresh = false,
            }
            let f = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(err_exp)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= f;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(err_exp)).clamp(MIN_FACTOR, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn phase_test(method: Method, tol: f64) {
        let w0 = 3.7;
        let mut y = [c64(1.0, 0.0)];
        let stats = integrate(
            method,
            |_t, y, out| out[0] = c64(0.0, w0) * y[0],
            &mut y,
            2.0,
            tol,
            tol,
        )
        .unwrap();
        let want = C64::from_polar(1.0, w0 * 2.0);
        assert!(
            (y[0] - want).norm() < 2000.0 * tol,
            "{method:?}: err {} stats {stats:?}",
            (y[0] - want).norm()
        );
        assert!(stats.accepted > 0);
        // Unit modulus preserved to the same accuracy.
        assert!((y[0].norm() - 1.0).abs() < 2000.0 * tol);
    }

    #[test]
    fn oscillator_phase_dopri5() {
        phase_test(Method::Dopri5, 1e-9);
    }

    #[test]
    fn oscillator_phase_dop853() {
        phase_test(Method::Dop853, 1e-11);
    }

    #[test]
    fn matrix_exponential_decay() {
        // dY/dt = -Y flattened: Y(t) = e^{-t} Y0.
        let mut y: Vec<C64> = (0..9).map(|i| c64(i as f64, 0.5 * i as f64)).collect();
        let y0 = y.clone();
        integrate(
            Method::Dop853,
            |_t, y, out| {
                for (o, v) in out.iter_mut().zip(y) {
                    *o = -v;
                }
            },
            &mut y,
            1.5,
            1e-12,
            1e-12,
        )
        .unwrap();
        let decay = (-1.5f64).exp();
        for (a, b) in y.iter().zip(y0.iter()) {
            assert!((a - b * decay).norm() < 1e-10);
        }
    }

    #[test]
    fn forced_oscillation_accuracy() {
        // dy/dt = i cos(t) y  => y = exp(i sin t).
        for (method, tol, bound) in
            [(Method::Dopri5, 1e-10, 5e-7), (Method::Dop853, 1e-12, 1e-9)]
        {
            let mut y = [c64(1.0, 0.0)];
            integrate(
                method,
                |t, y, out| out[0] = c64(0.0, t.cos()) * y[0],
                &mut y,
                10.0,
                tol,
                tol,
            )
            .unwrap();
            let want = C64::from_polar(1.0, 10f64.sin());
            assert!((y[0] - want).norm() < bound, "{method:?}: {}", (y[0] - want).norm());
        }
    }

    #[test]
    fn tolerance_controls_step_count_growth() {
        // 8th-order method: tightening tol 1e6x multiplies steps by ~5.6.
        let run = |tol: f64| {
            let mut y = [c64(1.0, 0.0)];
            let stats = integrate(
                Method::Dop853,
                |t, y, out| out[0] = c64(0.0, 5.0 * (2.0 * t).cos()) * y[0],
                &mut y,
                20.0,
                tol,
                tol,
            )
            .unwrap();
            stats.accepted
        };
        let n1 = run(1e-6);
        let n2 = run(1e-12);
        assert!(n2 < n1 * 10, "steps grew too fast: {n1} -> {n2}");
    }

    #[test]
    fn step_underflow_detected() {
        // A right-hand side with a non-integrable singularity forces h -> 0.
        let mut y = [c64(1.0, 0.0)];
        let res = integrate(
            Method::Dopri5,
            |t, y, out| out[0] = y[0] / (1.0 - t).max(1e-300).powi(2),
            &mut y,
            2.0,
            1e-9,
            1e-9,
        );
        assert!(matches!(res, Err(Error::StepUnderflow { .. }) | Err(Error::ConvergenceFailure(_))));
    }
}
