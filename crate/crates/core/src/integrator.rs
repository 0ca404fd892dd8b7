//! Fixed-step RK4 and adaptive RKF45 time integration with transient discard
//! and uniform output sampling.

use serde::{Deserialize, Serialize};

use crate::dynamics::VectorField;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default fixed step in ns.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default transient discarded before recording, in ns.
pub const DEFAULT_DISCARD: f64 = 500.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RK4")]
    Rk4,
    #[serde(rename = "RKF45")]
    Rkf45,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationPlan<T> {
    pub t0: T,
    pub t1: T,
    /// Fixed step; for RKF45 the initial step and the output grid unit.
    pub dt: T,
    /// Record every Nth step.
    pub sample_stride: usize,
    /// Length of the initial transient excluded from the output, in ns.
    pub discard: T,
    pub method: Method,
    /// `(absolute, relative)` error tolerances for RKF45.
    pub rkf_tolerances: Option<(T, T)>,
}

impl<T: Scalar> IntegrationPlan<T> {
    pub fn new(t0: T, t1: T, dt: T) -> Self {
        IntegrationPlan {
            t0,
            t1,
            dt,
            sample_stride: 1,
            discard: T::zero(),
            method: Method::Rk4,
            rkf_tolerances: None,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn with_discard(mut self, discard: T) -> Self {
        self.discard = discard;
        self
    }

    pub fn adaptive(mut self, atol: T, rtol: T) -> Self {
        self.method = Method::Rkf45;
        self.rkf_tolerances = Some((atol, rtol));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t0, self.t1, self.dt, self.discard]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidPlan("non-finite time parameter".into()));
        }
        if self.t1 <= self.t0 {
            return Err(Error::InvalidPlan("t1 must exceed t0".into()));
        }
        if self.dt <= T::zero() {
            return Err(Error::InvalidPlan("dt must be positive".into()));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidPlan("sample_stride must be at least 1".into()));
        }
        if self.discard < T::zero() || self.discard >= self.t1 - self.t0 {
            return Err(Error::InvalidPlan("discard must lie in [0, t1 - t0)".into()));
        }
        if let Some((a, r)) = self.rkf_tolerances {
            if !(a > T::zero() && r >= T::zero()) {
                return Err(Error::InvalidPlan("RKF45 tolerances must be positive".into()));
            }
        }
        Ok(())
    }

    /// Spacing of the output grid.
    pub fn sample_interval(&self) -> T {
        self.dt * T::from_usize_lossy(self.sample_stride)
    }

    /// First recorded time.
    pub fn record_start(&self) -> T {
        self.t0 + self.discard
    }

    /// `floor((t1 - t0 - discard) / (dt * stride)) + 1`.
    pub fn sample_count(&self) -> usize {
        let x = ((self.t1 - self.t0 - self.discard) / self.sample_interval()).as_f64();
        (x + 1e-9 * x.max(1.0)).floor() as usize + 1
    }
}

/// Uniformly sampled orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<T>,
    data: Vec<T>,
    dim: usize,
    channels: Vec<String>,
    plan: IntegrationPlan<T>,
}

impl<T: Scalar> Trajectory<T> {
    /// Assembles a trajectory from row-major samples.
    pub fn from_parts(
        times: Vec<T>,
        data: Vec<T>,
        channels: Vec<String>,
        plan: IntegrationPlan<T>,
    ) -> Result<Self> {
        let dim = channels.len();
        if dim == 0 || data.len() != times.len() * dim {
            return Err(Error::LayoutMismatch {
                expected: times.len() * dim,
                got: data.len(),
            });
        }
        Ok(Trajectory {
            times,
            data,
            dim,
            channels,
            plan,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn plan(&self) -> &IntegrationPlan<T> {
        &self.plan
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn last_state(&self) -> Option<&[T]> {
        self.data.chunks_exact(self.dim).last()
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<T>> {
        let i = self.channel_index(name)?;
        Ok(self.column_at(i))
    }

    pub fn column_at(&self, i: usize) -> Vec<T> {
        self.states().map(|s| s[i]).collect()
    }
}

/// Reusable RK4 stage buffers.
pub struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Scalar> Rk4<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![T::zero(); dim];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `y` in place by one classical Runge-Kutta step.
    pub fn step<F: VectorField<T> + ?Sized>(&mut self, f: &F, t: T, y: &mut [T], dt: T) {
        let half = T::lit(0.5) * dt;
        let n = y.len();
        f.eval(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        f.eval(t + half, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        f.eval(t + half, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + dt * self.k3[i];
        }
        f.eval(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        for i in 0..n {
            y[i] += sixth * (self.k1[i] + two * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

fn all_finite<T: Scalar>(y: &[T]) -> bool {
    y.iter().all(|x| x.is_finite())
}

/// One RK4 step from `state` at time `t`.
pub fn step_rk4<T: Scalar, F: VectorField<T> + ?Sized>(rhs: &F, state: &[T], t: T, dt: T) -> Result<Vec<T>> {
    if state.len() != rhs.dim() {
        return Err(Error::LayoutMismatch {
            expected: rhs.dim(),
            got: state.len(),
        });
    }
    let mut y = state.to_vec();
    Rk4::new(y.len()).step(rhs, t, &mut y, dt);
    if all_finite(&y) {
        Ok(y)
    } else {
        Err(Error::NonFiniteState {
            time: (t + dt).as_f64(),
        })
    }
}

fn check_inputs<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    plan: &IntegrationPlan<T>,
) -> Result<()> {
    plan.validate()?;
    if ic.len() != model.dim() {
        return Err(Error::LayoutMismatch {
            expected: model.dim(),
            got: ic.len(),
        });
    }
    if !all_finite(ic) {
        return Err(Error::NonFiniteState {
            time: plan.t0.as_f64(),
        });
    }
    Ok(())
}

/// Integrates with the plan's method. RK4 runs are bit-for-bit reproducible.
pub fn integrate<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    plan: &IntegrationPlan<T>,
) -> Result<Trajectory<T>> {
    match plan.method {
        Method::Rk4 => integrate_fixed(model, ic, plan),
        Method::Rkf45 => integrate_adaptive(model, ic, plan),
    }
}

/// Advances `y` from `t0` by `span` with fixed steps of `dt`, ending exactly at
/// `t0 + span` with one shortened step when needed. Returns the end time.
pub(crate) fn advance<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    stepper: &mut Rk4<T>,
    y: &mut [T],
    t0: T,
    span: T,
    dt: T,
) -> Result<T> {
    if span <= T::zero() {
        return Ok(t0);
    }
    let ratio = (span / dt).as_f64();
    let full = (ratio + 1e-9 * ratio.max(1.0)).floor() as usize;
    for n in 0..full {
        let t = t0 + T::from_usize_lossy(n) * dt;
        stepper.step(model, t, y, dt);
        if !all_finite(y) {
            return Err(Error::NonFiniteState {
                time: (t + dt).as_f64(),
            });
        }
    }
    let done = T::from_usize_lossy(full) * dt;
    let rest = span - done;
    if rest > dt * T::lit(1e-9) {
        stepper.step(model, t0 + done, y, rest);
        if !all_finite(y) {
            return Err(Error::NonFiniteState {
                time: (t0 + span).as_f64(),
            });
        }
    }
    Ok(t0 + span)
}

fn integrate_fixed<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    plan: &IntegrationPlan<T>,
) -> Result<Trajectory<T>> {
    check_inputs(model, ic, plan)?;
    let dim = ic.len();
    let mut stepper = Rk4::new(dim);
    let mut y = ic.to_vec();
    let start = advance(model, &mut stepper, &mut y, plan.t0, plan.discard, plan.dt)?;
    let count = plan.sample_count();
    let h = plan.sample_interval();
    let mut times = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    for i in 0..count {
        let t = start + T::from_usize_lossy(i) * h;
        times.push(t);
        data.extend_from_slice(&y);
        if i + 1 == count {
            break;
        }
        for s in 0..plan.sample_stride {
            let ts = t + T::from_usize_lossy(s) * plan.dt;
            stepper.step(model, ts, &mut y, plan.dt);
            if !all_finite(&y) {
                return Err(Error::NonFiniteState {
                    time: (ts + plan.dt).as_f64(),
                });
            }
        }
    }
    Trajectory::from_parts(times, data, model.channel_names(), plan.clone())
}

// Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0; 5],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];

/// Counters reported by the adaptive integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AdaptiveStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// RKF45 with step-size control; the output is resampled onto the same
/// uniform grid as [`integrate`] by cubic Hermite interpolation.
pub fn integrate_adaptive<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    plan: &IntegrationPlan<T>,
) -> Result<Trajectory<T>> {
    integrate_adaptive_with_stats(model, ic, plan).map(|(t, _)| t)
}

pub fn integrate_adaptive_with_stats<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    plan: &IntegrationPlan<T>,
) -> Result<(Trajectory<T>, AdaptiveStats)> {
    check_inputs(model, ic, plan)?;
    let (atol, rtol) = plan.rkf_tolerances.unwrap_or((T::lit(1e-9), T::lit(1e-9)));
    let n = ic.len();
    let start = plan.record_start();
    let count = plan.sample_count();
    let interval = plan.sample_interval();
    let grid = |i: usize| start + T::from_usize_lossy(i) * interval;
    let end = grid(count - 1);

    let mut times = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * n);
    let mut stats = AdaptiveStats::default();

    let mut t = plan.t0;
    let mut y = ic.to_vec();
    let mut f0 = vec![T::zero(); n];
    model.eval(t, &y, &mut f0);
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); n]; 6];
    let mut stage = vec![T::zero(); n];
    let mut y5 = vec![T::zero(); n];
    let mut f1 = vec![T::zero(); n];
    let mut h = plan.dt;
    let min_h = (end - plan.t0).abs() * T::lit(1e-14);
    let mut next = 0usize;

    while next < count && grid(next) <= t {
        // only possible when discard == 0: the first sample is the initial state
        times.push(grid(next));
        data.extend_from_slice(&y);
        next += 1;
    }

    while next < count {
        let remaining = end - t;
        if h > remaining {
            h = remaining;
        }
        k[0].copy_from_slice(&f0);
        for s in 1..6 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += T::lit(A[s][j]) * kj[i];
                }
                stage[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            model.eval(t + T::lit(C[s]) * h, &stage, &mut tail[0]);
        }
        let mut err = T::zero();
        for i in 0..n {
            let mut hi = T::zero();
            let mut lo = T::zero();
            for (s, ks) in k.iter().enumerate() {
                hi += T::lit(B5[s]) * ks[i];
                lo += T::lit(B4[s]) * ks[i];
            }
            y5[i] = y[i] + h * hi;
            let scale = atol + rtol * y[i].abs().max(y5[i].abs());
            let e = (h * (hi - lo)).abs() / scale;
            if !(e <= err) {
                err = e;
            }
        }
        if !all_finite(&y5) || !err.is_finite() {
            stats.rejected += 1;
            h *= T::lit(0.25);
            if h < min_h {
                return Err(Error::NonFiniteState { time: t.as_f64() });
            }
            continue;
        }
        if err <= T::one() {
            let t_new = if h == remaining { end } else { t + h };
            model.eval(t_new, &y5, &mut f1);
            while next < count && grid(next) <= t_new {
                let tg = grid(next);
                hermite(t, &y, &f0, t_new, &y5, &f1, tg, &mut stage);
                times.push(tg);
                data.extend_from_slice(&stage);
                next += 1;
            }
            t = t_new;
            y.copy_from_slice(&y5);
            f0.copy_from_slice(&f1);
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2)))
                .max(T::lit(0.2))
                .min(T::lit(5.0))
        };
        h *= factor;
        if h < min_h && next < count {
            return Err(Error::NonFiniteState { time: t.as_f64() });
        }
    }
    let traj = Trajectory::from_parts(times, data, model.channel_names(), plan.clone())?;
    Ok((traj, stats))
}

#[allow(clippy::too_many_arguments)]
fn hermite<T: Scalar>(t0: T, y0: &[T], f0: &[T], t1: T, y1: &[T], f1: &[T], t: T, out: &mut [T]) {
    let h = t1 - t0;
    if h == T::zero() {
        out.copy_from_slice(y1);
        return;
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}
