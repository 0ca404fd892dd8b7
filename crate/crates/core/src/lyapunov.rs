//! Largest Lyapunov exponent by two-trajectory renormalization (Wolf) and by
//! a finite-difference tangent vector (Benettin).
//!
//! Both estimators evolve the full state but measure separation only on the
//! selected channels, so a subsystem can be classified while it is driven by
//! the rest of the system.

use serde::{Deserialize, Serialize};

use crate::dynamics::VectorField;
use crate::error::{Error, Result};
use crate::integrator::{advance, Rk4};
use crate::model::ModelParams;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LleMethod {
    #[serde(rename = "WOLF")]
    Wolf,
    #[serde(rename = "BENETTIN")]
    Benettin,
}

impl LleMethod {
    pub fn from_name(name: &str) -> Option<LleMethod> {
        match name.to_ascii_lowercase().as_str() {
            "wolf" => Some(LleMethod::Wolf),
            "benettin" => Some(LleMethod::Benettin),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LleOptions {
    /// Initial separation relative to the norm of the measured channels.
    pub d0_rel: f64,
    /// Time between renormalizations, ns.
    pub renorm_interval: f64,
    /// Accumulation time after the transient, ns.
    pub t_total: f64,
    /// Transient integrated before accumulation starts, ns.
    pub discard: f64,
    pub dt: f64,
    /// Indices of the channels the separation is measured on; all if `None`.
    pub channels: Option<Vec<usize>>,
    /// Number of blocks for the standard error.
    pub blocks: usize,
}

impl LleOptions {
    pub fn new(t_total: f64, renorm_interval: f64, dt: f64) -> Self {
        LleOptions {
            d0_rel: 1e-8,
            renorm_interval,
            t_total,
            discard: 0.0,
            dt,
            channels: None,
            blocks: 20,
        }
    }

    /// Defaults for an optomechanical model: renormalize four times per
    /// mechanical period of the strong-branch resonator.
    pub fn for_params<T: Scalar>(params: &ModelParams<T>, t_total: f64) -> Self {
        let omega = params.resonators()[0].omega.as_f64();
        let mut o = LleOptions::new(
            t_total,
            0.25 * std::f64::consts::TAU / omega,
            crate::integrator::DEFAULT_DT,
        );
        o.discard = crate::integrator::DEFAULT_DISCARD;
        o
    }

    pub fn with_channels(mut self, channels: Vec<usize>) -> Self {
        self.channels = Some(channels);
        self
    }

    pub fn with_discard(mut self, discard: f64) -> Self {
        self.discard = discard;
        self
    }

    pub fn with_d0(mut self, d0_rel: f64) -> Self {
        self.d0_rel = d0_rel;
        self
    }

    fn validate(&self, dim: usize) -> Result<usize> {
        let bad = |m: &str| Err(Error::InvalidLyapunovOptions(m.into()));
        if !(self.d0_rel > 0.0 && self.d0_rel.is_finite()) {
            return bad("d0_rel must be positive");
        }
        if !(self.renorm_interval > 0.0 && self.dt > 0.0 && self.t_total > 0.0) {
            return bad("renorm_interval, dt and t_total must be positive");
        }
        if !(self.discard >= 0.0) {
            return bad("discard must be non-negative");
        }
        if self.blocks < 2 {
            return bad("at least two blocks are needed for a standard error");
        }
        let n = (self.t_total / self.renorm_interval + 1e-9).floor() as usize;
        if n < self.blocks {
            return bad("t_total must span at least one renormalization per block");
        }
        if let Some(ch) = &self.channels {
            if ch.is_empty() || ch.iter().any(|&c| c >= dim) {
                return bad("channel index out of range");
            }
        }
        Ok(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LleEstimate {
    /// Largest exponent, 1/ns (or 1/time unit of the model).
    pub lle: f64,
    pub stderr: f64,
    pub n_renormalizations: usize,
    pub method: LleMethod,
    /// `(time since accumulation start, running estimate)`; the last entry
    /// equals `lle`.
    pub convergence: Vec<(f64, f64)>,
}

impl LleEstimate {
    /// Sign is resolved when `|lle| > k * stderr`.
    pub fn is_significant(&self, k: f64) -> bool {
        self.lle.abs() > k * self.stderr
    }
}

fn channel_norm<T: Scalar>(v: &[T], channels: &Option<Vec<usize>>) -> f64 {
    match channels {
        Some(ch) => ch.iter().map(|&i| v[i].as_f64().powi(2)).sum::<f64>().sqrt(),
        None => v.iter().map(|x| x.as_f64().powi(2)).sum::<f64>().sqrt(),
    }
}

/// Uniform perturbation over the full state whose measured-channel norm is 1.
fn initial_direction(dim: usize, channels: &Option<Vec<usize>>) -> Vec<f64> {
    let m = channels.as_ref().map_or(dim, |c| c.len()) as f64;
    vec![1.0 / m.sqrt(); dim]
}

struct Accumulator {
    interval: f64,
    logs: Vec<f64>,
    convergence: Vec<(f64, f64)>,
    sum: f64,
    every: usize,
}

impl Accumulator {
    fn new(n: usize, interval: f64) -> Self {
        Accumulator {
            interval,
            logs: Vec::with_capacity(n),
            convergence: Vec::new(),
            sum: 0.0,
            every: (n / 2000).max(1),
        }
    }

    fn push(&mut self, ln_growth: f64) {
        self.sum += ln_growth;
        self.logs.push(ln_growth);
        let k = self.logs.len();
        if k.is_multiple_of(self.every) {
            let t = k as f64 * self.interval;
            self.convergence.push((t, self.sum / t));
        }
    }

    fn finish(mut self, blocks: usize, method: LleMethod) -> LleEstimate {
        let n = self.logs.len();
        let t = n as f64 * self.interval;
        let lle = self.sum / t;
        if self.convergence.last().map(|c| c.0) != Some(t) {
            self.convergence.push((t, lle));
        }
        if let Some(last) = self.convergence.last_mut() {
            last.1 = lle;
        }
        let means: Vec<f64> = (0..blocks)
            .map(|b| {
                let lo = b * n / blocks;
                let hi = (b + 1) * n / blocks;
                self.logs[lo..hi].iter().sum::<f64>() / ((hi - lo) as f64 * self.interval)
            })
            .collect();
        let mean = means.iter().sum::<f64>() / blocks as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (blocks - 1) as f64;
        LleEstimate {
            lle,
            stderr: (var / blocks as f64).sqrt(),
            n_renormalizations: n,
            method,
            convergence: self.convergence,
        }
    }
}

fn separation<T: Scalar>(z: &[T], y: &[T], diff: &mut [T], channels: &Option<Vec<usize>>) -> f64 {
    for i in 0..y.len() {
        diff[i] = z[i] - y[i];
    }
    channel_norm(diff, channels)
}

fn settle<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    opts: &LleOptions,
    stepper: &mut Rk4<T>,
) -> Result<(Vec<T>, T)> {
    if ic.len() != model.dim() {
        return Err(Error::LayoutMismatch {
            expected: model.dim(),
            got: ic.len(),
        });
    }
    let mut y = ic.to_vec();
    let t = advance(
        model,
        stepper,
        &mut y,
        T::zero(),
        T::lit(opts.discard),
        T::lit(opts.dt),
    )?;
    Ok((y, t))
}

fn separation_scale<T: Scalar>(y: &[T], opts: &LleOptions) -> f64 {
    let norm = channel_norm(y, &opts.channels);
    opts.d0_rel * if norm > 0.0 { norm } else { 1.0 }
}

/// Wolf-style estimate: a companion orbit is kept at distance `d0` from the
/// fiducial one by rescaling the separation vector every interval.
pub fn lle_wolf<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    opts: &LleOptions,
) -> Result<LleEstimate> {
    let n = opts.validate(model.dim())?;
    let dim = model.dim();
    let mut stepper = Rk4::new(dim);
    let (mut y, mut t) = settle(model, ic, opts, &mut stepper)?;
    let d0 = separation_scale(&y, opts);
    let dir = initial_direction(dim, &opts.channels);
    let mut z: Vec<T> = y.iter().zip(&dir).map(|(&a, &e)| a + T::lit(d0 * e)).collect();
    let tau = T::lit(opts.renorm_interval);
    let h = T::lit(opts.dt);
    let mut acc = Accumulator::new(n, opts.renorm_interval);
    let mut diff = vec![T::zero(); dim];
    // separation actually represented after rounding, not the nominal d0
    let mut d_ref = separation(&z, &y, &mut diff, &opts.channels);
    if !(d_ref > 0.0) {
        return Err(Error::DegenerateSeparation);
    }
    for _ in 0..n {
        let t_next = advance(model, &mut stepper, &mut y, t, tau, h)?;
        advance(model, &mut stepper, &mut z, t, tau, h)?;
        t = t_next;
        let d = separation(&z, &y, &mut diff, &opts.channels);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::DegenerateSeparation);
        }
        acc.push((d / d_ref).ln());
        let s = T::lit(d0 / d);
        for i in 0..dim {
            z[i] = y[i] + diff[i] * s;
        }
        d_ref = separation(&z, &y, &mut diff, &opts.channels);
        if !(d_ref > 0.0) {
            return Err(Error::DegenerateSeparation);
        }
    }
    Ok(acc.finish(opts.blocks, LleMethod::Wolf))
}

/// Benettin-style estimate: a tangent vector is pushed through each interval
/// by a central finite difference of the flow and renormalized to unit
/// measured-channel norm.
pub fn lle_benettin<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    opts: &LleOptions,
) -> Result<LleEstimate> {
    let n = opts.validate(model.dim())?;
    let dim = model.dim();
    let mut stepper = Rk4::new(dim);
    let (mut y, mut t) = settle(model, ic, opts, &mut stepper)?;
    let eps = separation_scale(&y, opts);
    let mut w = initial_direction(dim, &opts.channels);
    let tau = T::lit(opts.renorm_interval);
    let h = T::lit(opts.dt);
    let mut acc = Accumulator::new(n, opts.renorm_interval);
    let mut plus = vec![T::zero(); dim];
    let mut minus = vec![T::zero(); dim];
    let mut tangent = vec![0.0f64; dim];
    let mut gap = vec![T::zero(); dim];
    for _ in 0..n {
        for i in 0..dim {
            plus[i] = y[i] + T::lit(eps * w[i]);
            minus[i] = y[i] - T::lit(eps * w[i]);
        }
        let before = separation(&plus, &minus, &mut gap, &opts.channels);
        if !(before > 0.0) {
            return Err(Error::DegenerateSeparation);
        }
        advance(model, &mut stepper, &mut plus, t, tau, h)?;
        advance(model, &mut stepper, &mut minus, t, tau, h)?;
        t = advance(model, &mut stepper, &mut y, t, tau, h)?;
        let after = separation(&plus, &minus, &mut gap, &opts.channels);
        if !(after > 0.0) || !after.is_finite() {
            return Err(Error::DegenerateSeparation);
        }
        acc.push((after / before).ln());
        for i in 0..dim {
            tangent[i] = gap[i].as_f64();
        }
        let g = channel_norm(&tangent, &opts.channels);
        for i in 0..dim {
            w[i] = tangent[i] / g;
        }
    }
    Ok(acc.finish(opts.blocks, LleMethod::Benettin))
}

/// Dispatches on `method`.
pub fn lle<T: Scalar, F: VectorField<T> + ?Sized>(
    model: &F,
    ic: &[T],
    opts: &LleOptions,
    method: LleMethod,
) -> Result<LleEstimate> {
    match method {
        LleMethod::Wolf => lle_wolf(model, ic, opts),
        LleMethod::Benettin => lle_benettin(model, ic, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FnField;
    use crate::reference::LinearCavity;

    #[test]
    fn zero_field_has_zero_exponent() {
        let zero = FnField::new(3, |_t: f64, _y: &[f64], d: &mut [f64]| d.fill(0.0));
        let opts = LleOptions::new(10.0, 0.5, 0.01);
        for est in [
            lle_wolf(&zero, &[1.0, 2.0, 3.0], &opts).unwrap(),
            lle_benettin(&zero, &[1.0, 2.0, 3.0], &opts).unwrap(),
        ] {
            assert!(est.lle.abs() <= est.stderr + 1e-9, "{est:?}");
            assert_eq!(est.n_renormalizations, 20);
            assert_eq!(est.convergence.last().unwrap().1, est.lle);
        }
    }

    #[test]
    fn damped_cavity_contracts_at_half_gamma() {
        let cav = LinearCavity::new(0.8, 1.5);
        let opts = LleOptions::new(20.0, 0.2, 1e-3);
        for method in [LleMethod::Wolf, LleMethod::Benettin] {
            let est = lle(&cav, &[1.0, 0.5], &opts, method).unwrap();
            assert!((est.lle + 0.75).abs() < 0.05 * 0.75, "{method:?}: {}", est.lle);
        }
    }

    #[test]
    fn options_are_checked() {
        let cav = LinearCavity::new(0.0, 1.0);
        let mut opts = LleOptions::new(1.0, 0.5, 1e-3);
        assert!(matches!(
            lle_wolf(&cav, &[1.0, 0.0], &opts),
            Err(Error::InvalidLyapunovOptions(_))
        ));
        opts = LleOptions::new(10.0, 0.1, 1e-3).with_channels(vec![5]);
        assert!(matches!(
            lle_benettin(&cav, &[1.0, 0.0], &opts),
            Err(Error::InvalidLyapunovOptions(_))
        ));
        opts = LleOptions::new(10.0, 0.1, 1e-3).with_d0(0.0);
        assert!(lle_wolf(&cav, &[1.0, 0.0], &opts).is_err());
    }

    #[test]
    fn collapse_is_reported() {
        // every orbit lands on the origin after the first interval
        let sink = FnField::new(1, |_t: f64, y: &[f64], d: &mut [f64]| d[0] = -1e4 * y[0]);
        let opts = LleOptions::new(100.0, 1.0, 1e-4);
        assert_eq!(lle_wolf(&sink, &[1.0], &opts), Err(Error::DegenerateSeparation));
    }
}
