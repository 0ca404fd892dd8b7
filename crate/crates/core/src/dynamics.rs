//! Classical mean-field equations of motion for the four setups.
//!
//! Every cavity obeys
//! `d(alpha)/dt = -i (delta + g u) alpha - (gamma/2) alpha + eps`
//! and every resonator the Newtonian form
//! `du/dt = v`, `dv/dt = -omega^2 u - Gamma v + 2 omega g |alpha|^2 + spring`,
//! with `u` the displacement in zero-point units. The spring force a weak
//! resonator feels from the strong one is `2 omega_j k (u_s - r u_j)` where
//! `r = x_zpf_weak / x_zpf_strong`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Setup};
use crate::scalar::Scalar;

/// A first-order autonomous-or-not ODE `dy/dt = f(t, y)` on a flat real vector.
pub trait VectorField<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// Writes `f(t, y)` into `dy`. Both slices have length [`Self::dim`].
    fn eval(&self, t: T, y: &[T], dy: &mut [T]);

    fn channel_names(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("y{i}")).collect()
    }
}

impl<T: Scalar, F: VectorField<T> + ?Sized> VectorField<T> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: T, y: &[T], dy: &mut [T]) {
        (**self).eval(t, y, dy)
    }
    fn channel_names(&self) -> Vec<String> {
        (**self).channel_names()
    }
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<T: Scalar, F: Fn(T, &[T], &mut [T]) + Sync> VectorField<T> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: T, y: &[T], dy: &mut [T]) {
        (self.f)(t, y, dy)
    }
}

/// Flat state vector tagged with the setup whose layout it follows.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState<T> {
    setup: Setup,
    values: Vec<T>,
}

/// Time derivative of a [`SystemState`], same layout.
pub type Derivative<T> = SystemState<T>;

impl<T: Scalar> SystemState<T> {
    pub fn zeros(setup: Setup) -> Self {
        SystemState {
            setup,
            values: vec![T::zero(); setup.dim()],
        }
    }

    pub fn from_values(setup: Setup, values: Vec<T>) -> Result<Self> {
        if values.len() != setup.dim() {
            return Err(Error::LayoutMismatch {
                expected: setup.dim(),
                got: values.len(),
            });
        }
        Ok(SystemState { setup, values })
    }

    pub fn setup(&self) -> Setup {
        self.setup
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    fn cavity(&self, name: &str) -> Result<usize> {
        self.setup
            .cavity_index(name)
            .map(|i| self.setup.alpha_index(i))
            .ok_or_else(|| Error::UnknownChannel(format!("alpha_{name}")))
    }

    pub fn alpha(&self, name: &str) -> Result<Complex<T>> {
        let i = self.cavity(name)?;
        Ok(Complex::new(self.values[i], self.values[i + 1]))
    }

    pub fn set_alpha(&mut self, name: &str, value: Complex<T>) -> Result<()> {
        let i = self.cavity(name)?;
        self.values[i] = value.re;
        self.values[i + 1] = value.im;
        Ok(())
    }

    /// Sets an entry by canonical channel name (`re_alpha_1`, `u_s`, `v`, ...).
    pub fn set_channel(&mut self, channel: &str, value: T) -> Result<()> {
        let i = self
            .setup
            .channel_names()
            .iter()
            .position(|c| c == channel)
            .ok_or_else(|| Error::UnknownChannel(channel.to_string()))?;
        self.values[i] = value;
        Ok(())
    }

    pub fn channel(&self, channel: &str) -> Result<T> {
        self.setup
            .channel_names()
            .iter()
            .position(|c| c == channel)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::UnknownChannel(channel.to_string()))
    }
}

/// Right-hand side of one setup, ready for integration.
#[derive(Clone, Debug)]
pub struct Model<T> {
    params: ModelParams<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(params: ModelParams<T>) -> Self {
        Model { params }
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn setup(&self) -> Setup {
        self.params.setup()
    }

    /// Checked evaluation on a typed state.
    pub fn derivative(&self, state: &SystemState<T>) -> Result<Derivative<T>> {
        let setup = self.params.setup();
        if state.setup() != setup || state.as_slice().len() != setup.dim() {
            return Err(Error::LayoutMismatch {
                expected: setup.dim(),
                got: state.as_slice().len(),
            });
        }
        let mut dy = vec![T::zero(); setup.dim()];
        self.eval(T::zero(), state.as_slice(), &mut dy);
        Ok(SystemState { setup, values: dy })
    }
}

#[inline(always)]
fn cavity_rhs<T: Scalar>(c: &crate::model::Cavity<T>, u: T, re: T, im: T) -> (T, T) {
    let half = T::lit(0.5);
    let w = c.delta + c.g * u;
    (
        w * im - half * c.gamma * re + c.eps,
        -w * re - half * c.gamma * im,
    )
}

impl<T: Scalar> VectorField<T> for Model<T> {
    fn dim(&self) -> usize {
        self.params.setup().dim()
    }

    fn channel_names(&self) -> Vec<String> {
        self.params.setup().channel_names()
    }

    fn eval(&self, _t: T, y: &[T], dy: &mut [T]) {
        let p = &self.params;
        let setup = p.setup();
        let cav = p.cavities();
        let res = p.resonators();
        let two = T::lit(2.0);
        if setup.shared_resonator() {
            let ui = setup.displacement_index(0);
            let (u, v) = (y[ui], y[ui + 1]);
            let mut force = T::zero();
            for (i, c) in cav.iter().enumerate() {
                let at = setup.alpha_index(i);
                let (re, im) = (y[at], y[at + 1]);
                let (dre, dim) = cavity_rhs(c, u, re, im);
                dy[at] = dre;
                dy[at + 1] = dim;
                if i == 0 || p.include_weak_backaction() {
                    force += c.g * (re * re + im * im);
                }
            }
            let r = &res[0];
            dy[ui] = v;
            dy[ui + 1] = -r.omega * r.omega * u - r.damping * v + two * r.omega * force;
        } else {
            let ratio = p.zpf_ratio();
            let us = y[setup.displacement_index(0)];
            for (i, c) in cav.iter().enumerate() {
                let at = setup.alpha_index(i);
                let ui = setup.displacement_index(i);
                let (re, im, u, v) = (y[at], y[at + 1], y[ui], y[ui + 1]);
                let (dre, dim) = cavity_rhs(c, u, re, im);
                dy[at] = dre;
                dy[at + 1] = dim;
                let r = &res[i];
                let mut accel =
                    -r.omega * r.omega * u - r.damping * v + two * r.omega * c.g * (re * re + im * im);
                if i > 0 {
                    accel += two * r.omega * p.couplings()[i - 1] * (us - ratio * u);
                } else if p.include_weak_backaction() {
                    for (j, k) in p.couplings().iter().enumerate() {
                        let uj = y[setup.displacement_index(j + 1)];
                        accel += two * r.omega * *k * (uj - u / ratio);
                    }
                }
                dy[ui] = v;
                dy[ui + 1] = accel;
            }
        }
    }
}

fn rhs_for<T: Scalar>(expected: Setup, state: &SystemState<T>, p: &ModelParams<T>) -> Result<Derivative<T>> {
    if p.setup() != expected || state.setup() != expected {
        return Err(Error::LayoutMismatch {
            expected: expected.dim(),
            got: if state.setup() == expected {
                p.setup().dim()
            } else {
                state.as_slice().len()
            },
        });
    }
    Model::new(p.clone()).derivative(state)
}

/// Setup CS-A: three cavities on one resonator.
pub fn rhs_cs_a<T: Scalar>(state: &SystemState<T>, p: &ModelParams<T>) -> Result<Derivative<T>> {
    rhs_for(Setup::CsA, state, p)
}

/// Setup CS-B: strong unit driving two weak units through springs.
pub fn rhs_cs_b<T: Scalar>(state: &SystemState<T>, p: &ModelParams<T>) -> Result<Derivative<T>> {
    rhs_for(Setup::CsB, state, p)
}

/// Setup PS-A: strong and weak cavity on one resonator.
pub fn rhs_ps_a<T: Scalar>(state: &SystemState<T>, p: &ModelParams<T>) -> Result<Derivative<T>> {
    rhs_for(Setup::PsA, state, p)
}

/// Setup PS-B: strong unit driving one weak unit through a spring.
pub fn rhs_ps_b<T: Scalar>(state: &SystemState<T>, p: &ModelParams<T>) -> Result<Derivative<T>> {
    rhs_for(Setup::PsB, state, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::preset;

    fn params(name: &str) -> ModelParams<f64> {
        preset(name).unwrap().params
    }

    fn undriven(p: &ModelParams<f64>) -> ModelParams<f64> {
        let updates: Vec<(String, f64)> = p
            .setup()
            .cavity_names()
            .iter()
            .map(|c| (format!("eps_{c}"), 0.0))
            .collect();
        let refs: Vec<(&str, f64)> = updates.iter().map(|(l, v)| (l.as_str(), *v)).collect();
        p.with_many(&refs).unwrap()
    }

    #[test]
    fn undriven_origin_is_fixed_point() {
        for name in ["fig3b", "fig5b", "fig7", "fig9"] {
            let p = undriven(&params(name));
            let s = SystemState::zeros(p.setup());
            let d = Model::new(p).derivative(&s).unwrap();
            assert!(d.as_slice().iter().all(|&x| x == 0.0), "{name}");
        }
    }

    #[test]
    fn drive_alone_moves_re_alpha_s() {
        let p = params("fig3b");
        let eps_s = p.get("eps_s").unwrap();
        let only_s = p.with_many(&[("eps_1", 0.0), ("eps_2", 0.0)]).unwrap();
        let d = rhs_cs_a(&SystemState::zeros(Setup::CsA), &only_s).unwrap();
        assert_eq!(d.as_slice()[0], eps_s);
        assert!(d.as_slice()[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cs_a_hand_evaluation() {
        let p = params("fig3b");
        let mut s = SystemState::zeros(Setup::CsA);
        s.set_alpha("s", Complex::new(1.0, 0.0)).unwrap();
        s.set_channel("u", 1.0).unwrap();
        let d = rhs_cs_a(&s, &p).unwrap();
        let (ds, gs, gms, es) = (
            p.get("delta_s").unwrap(),
            p.get("g_s").unwrap(),
            p.get("gamma_s").unwrap(),
            p.get("eps_s").unwrap(),
        );
        let om = p.get("omega_m").unwrap();
        // d(alpha_s)/dt = -i delta_s - gamma_s/2 - i g_s + eps_s
        assert!((d.as_slice()[0] - (-gms / 2.0 + es)).abs() < 1e-12);
        assert!((d.as_slice()[1] - (-ds - gs)).abs() < 1e-12);
        assert!((d.as_slice()[7] - (-om * om + 2.0 * om * gs)).abs() < 1e-12);
        assert_eq!(d.as_slice()[6], 0.0);
    }

    #[test]
    fn cs_b_spring() {
        let p = params("fig5b");
        let mut s = SystemState::zeros(Setup::CsB);
        s.set_channel("u_s", 0.7).unwrap();
        s.set_channel("u_1", 0.7).unwrap();
        let p0 = undriven(&p);
        let d = rhs_cs_b(&s, &p0).unwrap();
        let om1 = p.get("omega_1").unwrap();
        // equal displacement: only the elastic restoring term remains
        assert!((d.channel("v_1").unwrap() - (-om1 * om1 * 0.7)).abs() < 1e-12);

        let mut s = SystemState::zeros(Setup::CsB);
        s.set_channel("u_s", 1.0).unwrap();
        let d = rhs_cs_b(&s, &p0).unwrap();
        let k = p.get("k_1").unwrap();
        assert!((d.channel("v_1").unwrap() - 2.0 * om1 * k).abs() < 1e-12);
        assert!((d.channel("v_2").unwrap() - 2.0 * om1 * k).abs() < 1e-12);
    }

    #[test]
    fn ps_a_hand_evaluation() {
        let p = params("fig7");
        let mut s = SystemState::zeros(Setup::PsA);
        s.set_alpha("s", Complex::new(1.0, 0.0)).unwrap();
        s.set_alpha("w", Complex::new(1.0, 0.0)).unwrap();
        s.set_channel("u", 2.0).unwrap();
        let d = rhs_ps_a(&s, &p).unwrap();
        let g = |l: &str| p.get(l).unwrap();
        let expected = [
            -g("gamma_s") / 2.0 + g("eps_s"),
            -(g("delta_s") + 2.0 * g("g_s")),
            -g("gamma_w") / 2.0 + g("eps_w"),
            -(g("delta_w") + 2.0 * g("g_w")),
            0.0,
            -g("omega_m").powi(2) * 2.0 + 2.0 * g("omega_m") * g("g_s"),
        ];
        for (a, b) in d.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn ps_a_weak_cavity_relaxes_linearly_at_resonance() {
        let p = params("fig7").with("delta_w", 0.0).unwrap();
        let mut s = SystemState::zeros(Setup::PsA);
        s.set_alpha("w", Complex::new(0.3, -0.2)).unwrap();
        let d = rhs_ps_a(&s, &p).unwrap();
        let gw = p.get("gamma_w").unwrap();
        let ew = p.get("eps_w").unwrap();
        assert!((d.as_slice()[2] - (-gw / 2.0 * 0.3 + ew)).abs() < 1e-12);
        assert!((d.as_slice()[3] - (gw / 2.0 * 0.2)).abs() < 1e-12);
    }

    #[test]
    fn ps_b_spring() {
        let p = undriven(&params("fig9"));
        let mut s = SystemState::zeros(Setup::PsB);
        s.set_channel("u_s", 1.0).unwrap();
        s.set_channel("u_w", -1.0).unwrap();
        let d = rhs_ps_b(&s, &p).unwrap();
        let (om, k) = (p.get("omega_w").unwrap(), p.get("k").unwrap());
        let expected = -(-om * om) + 4.0 * om * k;
        assert!((d.channel("v_w").unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn layout_mismatch() {
        let p = params("fig7");
        let s = SystemState::zeros(Setup::CsA);
        assert!(matches!(rhs_ps_a(&s, &p), Err(Error::LayoutMismatch { .. })));
        assert!(matches!(rhs_cs_a(&s, &p), Err(Error::LayoutMismatch { .. })));
        assert!(SystemState::<f64>::from_values(Setup::PsA, vec![0.0; 5]).is_err());
    }

    #[test]
    fn f32_matches_f64() {
        let p = params("fig7");
        let labels = p.setup().rate_labels();
        let inputs: Vec<_> = labels
            .iter()
            .map(|l| {
                crate::model::RateInput::new(l.clone(), crate::model::angular_to_hz(p.get(l).unwrap()) as f32)
            })
            .collect();
        let p32 = crate::model::to_angular(&inputs, Setup::PsA).unwrap();
        let y64 = [0.3, -0.1, 0.02, 0.05, 3.0, -1.0];
        let y32 = y64.map(|x| x as f32);
        let mut d64 = [0.0; 6];
        let mut d32 = [0.0f32; 6];
        Model::new(p).eval(0.0, &y64, &mut d64);
        Model::new(p32).eval(0.0, &y32, &mut d32);
        for (a, b) in d64.iter().zip(d32) {
            assert!((a - b as f64).abs() <= 1e-5 * a.abs().max(1.0));
        }
    }
}
