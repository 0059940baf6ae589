//! Dormand–Prince 5(4) with step-size control and the standard fourth-order
//! continuous extension.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Smallest step magnitude before the integration is abandoned.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 1e-14 && tol < 1e-2) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {tol:e} is outside (1e-14, 1e-2)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Interpolant over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    coeffs: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> &[f64] {
        &self.coeffs[0]
    }

    /// Interpolated state at `t` (meaningful for `t` inside the step).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = &self.coeffs;
        (0..c0.len())
            .map(|i| c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i]))))
            .collect()
    }

    pub fn component(&self, i: usize, t: f64) -> f64 {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coeffs;
        c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub stats: Stats,
    /// Set when the integration ended early because of an error.
    pub halt: Option<Error>,
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], opts: &Options) -> f64 {
    let n = y0.len().max(1) as f64;
    let sum: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], dir: f64, opts: &Options, stats: &mut Stats) -> Result<f64>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let scale = |i: usize| opts.abs_tol + opts.rel_tol * y0[i].abs();
    let n = y0.len().max(1) as f64;
    let d0 = (y0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + dir * h0 * k).collect();
    let f1 = f(t0 + dir * h0, &y1)?;
    stats.evaluations += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / scale(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(opts.max_step))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `observer` sees every accepted step. Errors raised by `f` end the run
/// with the last accepted state and the error in [`Outcome::halt`];
/// invalid options and step underflow are returned the same way.
pub fn integrate<F, O>(mut f: F, t0: f64, y0: &[f64], t_end: f64, opts: &Options, mut observer: O) -> Outcome
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    O: FnMut(&DenseStep) -> Control,
{
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let halt = |t, y, stats, e| Outcome { t, y, stats, halt: Some(e) };
    if let Err(e) = opts.validate() {
        return halt(t, y, stats, e);
    }
    if t_end == t0 {
        return Outcome { t, y, stats, halt: None };
    }
    let dir = (t_end - t0).signum();
    let n = y.len();

    let mut k: [Vec<f64>; 7] = Default::default();
    k[0] = match f(t, &y) {
        Ok(v) => v,
        Err(e) => return halt(t, y, stats, e),
    };
    stats.evaluations += 1;
    let mut h = match initial_step(&mut f, t, &y, &k[0], dir, opts, &mut stats) {
        Ok(h) => h,
        Err(e) => return halt(t, y, stats, e),
    };
    let mut last_rejected = false;
    let mut stage = vec![0.0; n];

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            let e = Error::StepUnderflow { t, step: h };
            return halt(t, y, stats, e);
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < MIN_STEP && !last {
            return halt(t, y, stats, Error::StepUnderflow { t, step: h });
        }
        let hs = dir * h;

        let mut failure = None;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + hs * acc;
            }
            match f(t + C[s] * hs, &stage) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
            stats.evaluations += 1;
        }
        if let Some(e) = failure {
            // an error on a trial stage may be an artifact of a step that
            // is too long; retry smaller before giving up
            if h > 1e3 * MIN_STEP && matches!(e, Error::Collision { .. } | Error::CoincidentPoints { .. } | Error::OutsideDomain { .. }) {
                h *= 0.25;
                stats.rejected += 1;
                last_rejected = true;
                continue;
            }
            return halt(t, y, stats, e);
        }
        // stage 7 was evaluated at the 5th-order solution
        let y_new = stage.clone();
        let err: Vec<f64> = (0..n)
            .map(|i| hs * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>())
            .collect();
        let en = error_norm(&y, &y_new, &err, opts);
        // overflow in a trial step counts as a maximal rejection
        let en = if en.is_finite() { en } else { 1e10 };

        if en <= 1.0 {
            let ydiff: Vec<f64> = (0..n).map(|i| y_new[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| hs * k[0][i] - ydiff[i]).collect();
            let c3: Vec<f64> = (0..n).map(|i| ydiff[i] - hs * k[6][i] - bspl[i]).collect();
            let c4: Vec<f64> = (0..n)
                .map(|i| hs * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>())
                .collect();
            let dense = DenseStep {
                t0: t,
                h: hs,
                coeffs: [y.clone(), ydiff, bspl, c3, c4],
            };
            stats.accepted += 1;
            t = if last { t_end } else { t + hs };
            y = y_new;
            k[0] = k[6].clone();
            let control = observer(&dense);
            if last || control == Control::Stop {
                return Outcome { t, y, stats, halt: None };
            }
            let mut factor = (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h = (h * factor).min(opts.max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
}
