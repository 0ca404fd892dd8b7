//! Analytic signal, Hilbert transform, phase unwrapping and time averages.

use std::ops::Range;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Scalar;

/// Minimum number of samples accepted by [`analytic_signal`].
pub const MIN_SAMPLES: usize = 64;
/// Fraction of samples at each end treated as edge-contaminated.
pub const EDGE_FRACTION: f64 = 0.05;

/// Instantaneous amplitude and phase of one real observable.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticSignal<T> {
    pub times: Vec<T>,
    pub amplitude: Vec<T>,
    /// In `(-pi, pi]`.
    pub wrapped_phase: Vec<T>,
    pub unwrapped_phase: Vec<T>,
    /// Hilbert transform of the detrended input.
    pub conjugate: Vec<T>,
    /// Detrended input.
    pub detrended: Vec<T>,
    pub channel: Option<String>,
    /// Number of samples flagged at each end.
    pub edge: usize,
}

impl<T: Scalar> AnalyticSignal<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample indices outside both edge margins.
    pub fn interior(&self) -> Range<usize> {
        self.edge..self.len() - self.edge
    }
}

/// Number of samples in each edge margin of an `n`-sample record.
pub fn edge_margin(n: usize) -> usize {
    (n as f64 * EDGE_FRACTION).ceil() as usize
}

/// Discrete Hilbert transform by the frequency-domain method: positive bins
/// are kept, negative bins dropped, the imaginary part of the inverse is the
/// transform. The input is zero-padded to the next power of two.
pub fn hilbert_transform<T: Scalar>(samples: &[T]) -> Vec<T> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let m = n.next_power_of_two();
    let mut buf: Vec<Complex<T>> = samples
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(m)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    // Multiply by -i sign(f): the analytic signal would double positive bins
    // and zero the negative ones; its imaginary part is the same thing.
    let half = m / 2;
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || (m.is_multiple_of(2) && k == half) {
            *z = Complex::new(T::zero(), T::zero());
        } else if k < half || (m % 2 == 1 && k == half) {
            *z = Complex::new(z.im, -z.re);
        } else {
            *z = Complex::new(-z.im, z.re);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = T::one() / T::from_usize_lossy(m);
    buf.iter().take(n).map(|z| z.re * scale).collect()
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_usize_lossy(xs.len())
}

/// Builds the analytic signal of a uniformly sampled real series starting at
/// `t = 0`. The series mean is removed first.
pub fn analytic_signal<T: Scalar>(samples: &[T], dt: T) -> Result<AnalyticSignal<T>> {
    let times = (0..samples.len()).map(|i| T::from_usize_lossy(i) * dt).collect();
    build(samples, times)
}

/// As [`analytic_signal`] with explicit sample times, which must be uniform.
pub fn analytic_signal_at<T: Scalar>(samples: &[T], times: &[T]) -> Result<AnalyticSignal<T>> {
    if samples.len() != times.len() {
        return Err(Error::LayoutMismatch {
            expected: times.len(),
            got: samples.len(),
        });
    }
    check_uniform(times)?;
    build(samples, times.to_vec())
}

/// Analytic signal of one trajectory channel.
pub fn analytic_signal_of<T: Scalar>(traj: &Trajectory<T>, channel: &str) -> Result<AnalyticSignal<T>> {
    let column = traj.column(channel)?;
    let mut sig = analytic_signal_at(&column, traj.times())?;
    sig.channel = Some(channel.to_string());
    Ok(sig)
}

fn check_uniform<T: Scalar>(times: &[T]) -> Result<()> {
    if times.len() < 2 {
        return Ok(());
    }
    let span = (times[times.len() - 1] - times[0]).as_f64();
    let h = span / (times.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::NonUniformSampling);
    }
    let tol = 1e-6 * h;
    for (i, t) in times.iter().enumerate() {
        let expected = times[0].as_f64() + i as f64 * h;
        if (t.as_f64() - expected).abs() > tol.max(1e-12 * expected.abs()) {
            return Err(Error::NonUniformSampling);
        }
    }
    Ok(())
}

fn build<T: Scalar>(samples: &[T], times: Vec<T>) -> Result<AnalyticSignal<T>> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::SignalTooShort {
            need: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let m = mean(samples);
    let detrended: Vec<T> = samples.iter().map(|&x| x - m).collect();
    let peak = detrended.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let scale = samples.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    if peak == T::zero() || peak <= scale * T::epsilon() * T::lit(16.0) {
        return Err(Error::ConstantSignal);
    }
    let conjugate = hilbert_transform(&detrended);
    let amplitude = detrended
        .iter()
        .zip(&conjugate)
        .map(|(&s, &h)| s.hypot(h))
        .collect();
    let wrapped_phase: Vec<T> = detrended
        .iter()
        .zip(&conjugate)
        .map(|(&s, &h)| h.atan2(s))
        .collect();
    let unwrapped_phase = unwrap_phase(&wrapped_phase);
    let edge = edge_margin(samples.len());
    Ok(AnalyticSignal {
        times,
        amplitude,
        wrapped_phase,
        unwrapped_phase,
        conjugate,
        detrended,
        channel: None,
        edge,
    })
}

/// Direct principal-value quadrature of
/// `H[s](t) = (1/pi) PV int s(tau) / (t - tau) dtau` at one sample.
///
/// Uses the trapezoid rule with step `2 dt` on the nodes at odd offsets from
/// the singular sample; they straddle it symmetrically so the singular parts
/// cancel pairwise. Slow, O(N); intended as a test oracle.
pub fn hilbert_pv_direct<T: Scalar>(samples: &[T], dt: T, index: usize) -> Result<T> {
    let n = samples.len();
    let edge = edge_margin(n);
    if n == 0 || index < edge || index + edge >= n {
        return Err(Error::EdgeIndex { index, len: n });
    }
    // dt cancels between the weight and the kernel 1/(t - tau)
    let _ = dt;
    let mut acc = 0.0f64;
    let mut off = 1usize;
    while off <= index || index + off < n {
        if off <= index {
            // the outermost node carries half the trapezoid weight
            let w = if index - off < 2 { 1.0 } else { 2.0 };
            acc += w * samples[index - off].as_f64() / off as f64;
        }
        if index + off < n {
            let w = if index + off + 2 >= n { 1.0 } else { 2.0 };
            acc -= w * samples[index + off].as_f64() / off as f64;
        }
        off += 2;
    }
    Ok(T::lit(acc / std::f64::consts::PI))
}

/// Continues a wrapped phase across branch cuts so every consecutive
/// difference lies in `(-pi, pi]`. The first sample is unchanged.
pub fn unwrap_phase<T: Scalar>(wrapped: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(wrapped.len());
    let Some(&first) = wrapped.first() else {
        return out;
    };
    out.push(first);
    let tau = T::TAU();
    let pi = T::PI();
    let mut turns = T::zero();
    for w in wrapped.windows(2) {
        let d = w[1] - w[0];
        // corrected step d - 2 pi k must land in (-pi, pi]
        let k = ((d - pi) / tau).ceil();
        turns -= k;
        out.push(w[1] + turns * tau);
    }
    out
}

/// Trapezoidal time average of `|x(t)|` over the record.
pub fn mean_abs<T: Scalar>(series: &[T], times: &[T]) -> Result<T> {
    if series.len() < 2 || times.len() != series.len() {
        return Err(Error::EmptyTrajectory);
    }
    let span = times[times.len() - 1] - times[0];
    if !(span > T::zero()) {
        return Err(Error::EmptyTrajectory);
    }
    let half = T::lit(0.5);
    let integral: T = series
        .windows(2)
        .zip(times.windows(2))
        .map(|(x, t)| half * (x[0].abs() + x[1].abs()) * (t[1] - t[0]))
        .sum();
    Ok(integral / span)
}
