//! Synchronization errors, phase ratios and the verdicts built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Scalar;
use crate::signal::{analytic_signal_of, AnalyticSignal};

/// Below this modulus `cos(arg alpha)` is undefined and reported as a gap.
pub const PHASE_GAP_MODULUS: f64 = 1e-12;
pub const DEFAULT_WINDOW: f64 = 0.2;
pub const DEFAULT_RATIO_FLOOR: f64 = 10.0;

fn alpha_columns<T: Scalar>(traj: &Trajectory<T>, mode: &str) -> Result<(Vec<T>, Vec<T>)> {
    let re = traj
        .column(&format!("re_alpha_{mode}"))
        .map_err(|_| Error::UnknownChannel(mode.to_string()))?;
    let im = traj
        .column(&format!("im_alpha_{mode}"))
        .map_err(|_| Error::UnknownChannel(mode.to_string()))?;
    Ok((re, im))
}

fn moduli<T: Scalar>(traj: &Trajectory<T>, mode: &str) -> Result<Vec<T>> {
    let (re, im) = alpha_columns(traj, mode)?;
    Ok(re.iter().zip(&im).map(|(a, b)| a.hypot(*b)).collect())
}

fn cosines<T: Scalar>(traj: &Trajectory<T>, mode: &str) -> Result<Vec<Option<T>>> {
    let (re, im) = alpha_columns(traj, mode)?;
    Ok(re
        .iter()
        .zip(&im)
        .map(|(&a, &b)| {
            let r = a.hypot(b);
            (r.as_f64() >= PHASE_GAP_MODULUS).then(|| a / r)
        })
        .collect())
}

/// `|alpha_j(t)| - |alpha_i(t)|` for cavity modes named as in the layout
/// (`"1"`, `"2"`, `"s"`, `"w"`).
pub fn amplitude_error<T: Scalar>(traj: &Trajectory<T>, mode_i: &str, mode_j: &str) -> Result<Vec<T>> {
    let a = moduli(traj, mode_i)?;
    let b = moduli(traj, mode_j)?;
    Ok(b.iter().zip(&a).map(|(&x, &y)| x - y).collect())
}

/// `cos(theta_j(t)) - cos(theta_i(t))` with `theta = arg alpha`; `None` where
/// either amplitude is too small for the argument to be defined.
pub fn cos_phase_error<T: Scalar>(
    traj: &Trajectory<T>,
    mode_i: &str,
    mode_j: &str,
) -> Result<Vec<Option<T>>> {
    let a = cosines(traj, mode_i)?;
    let b = cosines(traj, mode_j)?;
    Ok(b.iter()
        .zip(&a)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => Some(*x - *y),
            _ => None,
        })
        .collect())
}

/// Error series between two modes together with the reference modulus
/// `|alpha_i|` the amplitude tolerance is scaled by.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncErrors<T> {
    pub times: Vec<T>,
    pub amplitude: Vec<T>,
    pub phase: Vec<Option<T>>,
    pub reference: Vec<T>,
}

impl<T: Scalar> SyncErrors<T> {
    pub fn from_trajectory(traj: &Trajectory<T>, mode_i: &str, mode_j: &str) -> Result<Self> {
        Ok(SyncErrors {
            times: traj.times().to_vec(),
            amplitude: amplitude_error(traj, mode_i, mode_j)?,
            phase: cos_phase_error(traj, mode_i, mode_j)?,
            reference: moduli(traj, mode_i)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncOptions {
    /// Amplitude tolerance relative to the window mean of `|alpha_i|`.
    pub amp_tol: f64,
    pub phase_tol: f64,
    /// Terminal window as a fraction of the record.
    pub window: f64,
}

impl Default for SyncOptions {
    fn default() -> Self {
        SyncOptions {
            amp_tol: 1e-3,
            phase_tol: 1e-3,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncVerdict {
    pub synchronized: bool,
    /// First time after which both errors stay inside their tolerances.
    pub settle_time: Option<f64>,
    /// Max `|e|` over the window divided by the window mean of `|alpha_i|`.
    pub terminal_amp_error: f64,
    pub terminal_phase_error: f64,
    pub reference_amplitude: f64,
    pub thresholds: SyncOptions,
}

/// First index of the trailing `fraction` of an `n`-sample record.
fn window_start(n: usize, fraction: f64) -> Result<usize> {
    let len = ((n as f64) * fraction).round() as usize;
    if len < 2 || len > n {
        return Err(Error::WindowTooShort);
    }
    Ok(n - len)
}

pub fn detect_complete_sync<T: Scalar>(errors: &SyncErrors<T>, opts: &SyncOptions) -> Result<SyncVerdict> {
    let n = errors.times.len();
    if errors.amplitude.len() != n || errors.phase.len() != n || errors.reference.len() != n {
        return Err(Error::GridMismatch);
    }
    if !(opts.window > 0.0 && opts.window <= 1.0) {
        return Err(Error::WindowTooShort);
    }
    let start = window_start(n, opts.window)?;
    let reference = errors.reference[start..].iter().map(|x| x.as_f64()).sum::<f64>() / (n - start) as f64;
    let amp_max = errors.amplitude[start..]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.as_f64().abs()));
    let phase_max = errors.phase[start..]
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.as_f64().abs()));
    let terminal_amp_error = if amp_max == 0.0 {
        0.0
    } else if reference > 0.0 {
        amp_max / reference
    } else {
        f64::INFINITY
    };
    let synchronized = terminal_amp_error < opts.amp_tol && phase_max < opts.phase_tol;
    let settle_time = synchronized.then(|| {
        let amp_abs = opts.amp_tol * reference;
        let last_bad = (0..n).rev().find(|&i| {
            let a = errors.amplitude[i].as_f64().abs();
            let p = errors.phase[i].map_or(0.0, |x| x.as_f64().abs());
            (a > 0.0 && a >= amp_abs) || p >= opts.phase_tol
        });
        match last_bad {
            None => errors.times[0].as_f64(),
            Some(i) => errors.times[(i + 1).min(n - 1)].as_f64(),
        }
    });
    Ok(SyncVerdict {
        synchronized,
        settle_time,
        terminal_amp_error,
        terminal_phase_error: phase_max,
        reference_amplitude: reference,
        thresholds: opts.clone(),
    })
}

/// `Psi_s(t) / Psi_w(t)` on the interior of a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSeries<T> {
    pub times: Vec<T>,
    pub ratio: Vec<T>,
}

/// Ratio of unwrapped phases. Edge margins are excluded, and so is every
/// sample up to the last one where `|Psi_w|` does not exceed `floor`.
pub fn phase_ratio<T: Scalar>(
    sig_s: &AnalyticSignal<T>,
    sig_w: &AnalyticSignal<T>,
    floor: f64,
) -> Result<RatioSeries<T>> {
    if sig_s.len() != sig_w.len() {
        return Err(Error::GridMismatch);
    }
    let n = sig_s.len();
    let span = if n > 1 {
        (sig_s.times[n - 1] - sig_s.times[0]).as_f64().abs()
    } else {
        1.0
    };
    let tol = 1e-9 * span.max(1.0);
    if sig_s
        .times
        .iter()
        .zip(&sig_w.times)
        .any(|(a, b)| (a.as_f64() - b.as_f64()).abs() > tol)
    {
        return Err(Error::GridMismatch);
    }
    let edge = sig_s.edge.max(sig_w.edge);
    if 2 * edge >= n {
        return Err(Error::PhaseTooSmall { floor });
    }
    let interior = edge..n - edge;
    let start = interior
        .clone()
        .rev()
        .find(|&i| !(sig_w.unwrapped_phase[i].as_f64().abs() > floor))
        .map_or(interior.start, |i| i + 1);
    if start >= interior.end {
        return Err(Error::PhaseTooSmall { floor });
    }
    let range = start..interior.end;
    Ok(RatioSeries {
        times: sig_s.times[range.clone()].to_vec(),
        ratio: range
            .map(|i| sig_s.unwrapped_phase[i] / sig_w.unwrapped_phase[i])
            .collect(),
    })
}

/// Phase ratio between the real parts of two cavity amplitudes.
pub fn phase_ratio_of<T: Scalar>(
    traj: &Trajectory<T>,
    strong: &str,
    weak: &str,
    floor: f64,
) -> Result<RatioSeries<T>> {
    let s = analytic_signal_of(traj, &format!("re_alpha_{strong}"))?;
    let w = analytic_signal_of(traj, &format!("re_alpha_{weak}"))?;
    phase_ratio(&s, &w, floor)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LockOptions {
    /// Allowed relative deviation of the window mean from the target.
    pub tol: f64,
    /// Allowed `max - min` of the ratio over the window.
    pub band_tol: f64,
    pub window: f64,
}

impl Default for LockOptions {
    fn default() -> Self {
        LockOptions {
            tol: 0.05,
            band_tol: 0.1,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LockVerdict {
    pub locked: bool,
    pub ratio_mean: f64,
    pub ratio_band_width: f64,
    pub target: f64,
    pub deviation: f64,
    pub thresholds: LockOptions,
}

pub fn detect_phase_lock<T: Scalar>(ratio: &[T], target: f64, opts: &LockOptions) -> Result<LockVerdict> {
    if !(opts.window > 0.0 && opts.window <= 1.0) {
        return Err(Error::WindowTooShort);
    }
    let start = window_start(ratio.len(), opts.window)?;
    let w: Vec<f64> = ratio[start..].iter().map(|x| x.as_f64()).collect();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
        (a.min(x), b.max(x))
    });
    let band = hi - lo;
    let deviation = (mean - target).abs() / target.abs();
    Ok(LockVerdict {
        locked: deviation < opts.tol && band < opts.band_tol,
        ratio_mean: mean,
        ratio_band_width: band,
        target,
        deviation,
        thresholds: opts.clone(),
    })
}
