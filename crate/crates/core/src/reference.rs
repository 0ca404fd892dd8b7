//! Small systems with known behaviour, used as oracles for the integrators
//! and the Lyapunov estimators.

use num_complex::Complex;

use crate::dynamics::VectorField;
use crate::scalar::Scalar;

/// Lorenz system; the classical parameters give an LLE of about 0.906.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorenz<T> {
    pub sigma: T,
    pub rho: T,
    pub beta: T,
}

impl<T: Scalar> Default for Lorenz<T> {
    fn default() -> Self {
        Lorenz {
            sigma: T::lit(10.0),
            rho: T::lit(28.0),
            beta: T::lit(8.0 / 3.0),
        }
    }
}

impl<T: Scalar> VectorField<T> for Lorenz<T> {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, _t: T, y: &[T], dy: &mut [T]) {
        dy[0] = self.sigma * (y[1] - y[0]);
        dy[1] = y[0] * (self.rho - y[2]) - y[1];
        dy[2] = y[0] * y[1] - self.beta * y[2];
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }
}

/// Undriven linear cavity `d(alpha)/dt = -(i delta + gamma/2) alpha` on
/// `[Re alpha, Im alpha]`. A negative `gamma` gives the antidamped mirror.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCavity<T> {
    pub delta: T,
    pub gamma: T,
}

impl<T: Scalar> LinearCavity<T> {
    pub fn new(delta: T, gamma: T) -> Self {
        LinearCavity { delta, gamma }
    }

    /// Closed-form `alpha(t) = alpha(0) exp(-(i delta + gamma/2) t)`.
    pub fn exact(&self, alpha0: Complex<T>, t: T) -> Complex<T> {
        let rate = Complex::new(-T::lit(0.5) * self.gamma, -self.delta);
        alpha0 * (rate * t).exp()
    }
}

impl<T: Scalar> VectorField<T> for LinearCavity<T> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _t: T, y: &[T], dy: &mut [T]) {
        let h = T::lit(0.5) * self.gamma;
        dy[0] = self.delta * y[1] - h * y[0];
        dy[1] = -self.delta * y[0] - h * y[1];
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["re_alpha".into(), "im_alpha".into()]
    }
}

/// `du/dt = v`, `dv/dt = -omega^2 u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicOscillator<T> {
    pub omega: T,
}

impl<T: Scalar> VectorField<T> for HarmonicOscillator<T> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _t: T, y: &[T], dy: &mut [T]) {
        dy[0] = y[1];
        dy[1] = -self.omega * self.omega * y[0];
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["u".into(), "v".into()]
    }
}
