//! Canonical units, parameter containers for the four setups, and the
//! strong-coupling small-detuning regime check.
//!
//! Internal units: time in ns, every rate in rad/ns, mechanical displacement
//! measured in zero-point units (`u = x / x_zpf`), cavity amplitudes
//! dimensionless. Rates are entered as ordinary frequencies in Hz and
//! converted with `omega = 2*pi*f*1e-9`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Scalar;
use crate::signal::mean_abs;

/// Reduced Planck constant (CODATA 2018), J*s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Default factor used to decide that one rate is "much larger" than another.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

/// The four optomechanical topologies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setup {
    /// Complete synchronization, one shared resonator, cavities {s, 1, 2}.
    #[serde(rename = "CS_A")]
    CsA,
    /// Complete synchronization, three mechanically coupled optomechanical units.
    #[serde(rename = "CS_B")]
    CsB,
    /// Phase synchronization, one shared resonator, cavities {s, w}.
    #[serde(rename = "PS_A")]
    PsA,
    /// Phase synchronization, two mechanically coupled optomechanical units.
    #[serde(rename = "PS_B")]
    PsB,
}

impl Setup {
    pub const ALL: [Setup; 4] = [Setup::CsA, Setup::CsB, Setup::PsA, Setup::PsB];

    pub fn tag(self) -> &'static str {
        match self {
            Setup::CsA => "CS_A",
            Setup::CsB => "CS_B",
            Setup::PsA => "PS_A",
            Setup::PsB => "PS_B",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Setup> {
        Setup::ALL.into_iter().find(|s| s.tag() == tag)
    }

    /// Whether every cavity shares a single mechanical resonator.
    pub fn shared_resonator(self) -> bool {
        matches!(self, Setup::CsA | Setup::PsA)
    }

    /// Cavity mode names; the strongly driven mode `s` always comes first.
    pub fn cavity_names(self) -> &'static [&'static str] {
        match self {
            Setup::CsA | Setup::CsB => &["s", "1", "2"],
            Setup::PsA | Setup::PsB => &["s", "w"],
        }
    }

    pub fn resonator_names(self) -> &'static [&'static str] {
        match self {
            Setup::CsA | Setup::PsA => &["m"],
            Setup::CsB => &["s", "1", "2"],
            Setup::PsB => &["s", "w"],
        }
    }

    /// Labels of the mechanical coupling rates, one per weak branch.
    pub fn coupling_names(self) -> &'static [&'static str] {
        match self {
            Setup::CsA | Setup::PsA => &[],
            Setup::CsB => &["k_1", "k_2"],
            Setup::PsB => &["k"],
        }
    }

    /// Number of reals in a state vector.
    pub fn dim(self) -> usize {
        match self {
            Setup::CsA => 8,
            Setup::CsB => 12,
            Setup::PsA => 6,
            Setup::PsB => 8,
        }
    }

    /// Index of `Re alpha` for cavity `i` (`Im alpha` follows it).
    pub fn alpha_index(self, cavity: usize) -> usize {
        if self.shared_resonator() {
            2 * cavity
        } else {
            4 * cavity
        }
    }

    /// Index of the displacement `u` of resonator `r` (`v` follows it).
    pub fn displacement_index(self, resonator: usize) -> usize {
        if self.shared_resonator() {
            2 * self.cavity_names().len()
        } else {
            4 * resonator + 2
        }
    }

    /// Resonator that couples to cavity `i`.
    pub fn resonator_of(self, cavity: usize) -> usize {
        if self.shared_resonator() {
            0
        } else {
            cavity
        }
    }

    pub fn cavity_index(self, name: &str) -> Option<usize> {
        self.cavity_names().iter().position(|n| *n == name)
    }

    pub fn resonator_index(self, name: &str) -> Option<usize> {
        self.resonator_names().iter().position(|n| *n == name)
    }

    /// Canonical CSV/state channel names in layout order.
    pub fn channel_names(self) -> Vec<String> {
        let mut names = vec![String::new(); self.dim()];
        for (i, c) in self.cavity_names().iter().enumerate() {
            let at = self.alpha_index(i);
            names[at] = format!("re_alpha_{c}");
            names[at + 1] = format!("im_alpha_{c}");
        }
        for (r, name) in self.resonator_names().iter().enumerate() {
            let at = self.displacement_index(r);
            if self.shared_resonator() {
                names[at] = "u".into();
                names[at + 1] = "v".into();
            } else {
                names[at] = format!("u_{name}");
                names[at + 1] = format!("v_{name}");
            }
        }
        names
    }

    /// Every rate label the setup requires, in canonical order.
    pub fn rate_labels(self) -> Vec<String> {
        let mut labels = Vec::new();
        for c in self.cavity_names() {
            for p in ["delta", "gamma", "g", "eps"] {
                labels.push(format!("{p}_{c}"));
            }
        }
        for r in self.resonator_names() {
            labels.push(format!("omega_{r}"));
            labels.push(format!("Gamma_{r}"));
        }
        labels.extend(self.coupling_names().iter().map(|s| s.to_string()));
        labels
    }
}

/// One rate quoted as an ordinary frequency in Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct RateInput<T> {
    pub label: String,
    pub hz: T,
}

impl<T> RateInput<T> {
    pub fn new(label: impl Into<String>, hz: T) -> Self {
        RateInput {
            label: label.into(),
            hz,
        }
    }
}

/// Converts an ordinary frequency in Hz to an angular rate in rad/ns.
#[inline]
pub fn hz_to_angular<T: Scalar>(hz: T) -> T {
    T::TAU() * (hz * T::lit(1e-9))
}

/// Inverse of [`hz_to_angular`].
#[inline]
pub fn angular_to_hz<T: Scalar>(rate: T) -> T {
    rate / T::TAU() / T::lit(1e-9)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cavity<T> {
    /// Detuning, any sign.
    pub delta: T,
    /// Amplitude damping rate.
    pub gamma: T,
    /// Single-photon optomechanical coupling.
    pub g: T,
    /// Drive strength.
    pub eps: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonator<T> {
    pub omega: T,
    pub damping: T,
}

/// All rates of one setup in rad/ns.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    setup: Setup,
    cavities: Vec<Cavity<T>>,
    resonators: Vec<Resonator<T>>,
    couplings: Vec<T>,
    zpf_ratio: T,
    include_weak_backaction: bool,
}

impl<T: Scalar> ModelParams<T> {
    /// Builds and validates a parameter set from already-angular rates.
    pub fn new(
        setup: Setup,
        cavities: Vec<Cavity<T>>,
        resonators: Vec<Resonator<T>>,
        couplings: Vec<T>,
    ) -> Result<Self> {
        let p = ModelParams {
            setup,
            cavities,
            resonators,
            couplings,
            zpf_ratio: T::one(),
            include_weak_backaction: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn setup(&self) -> Setup {
        self.setup
    }

    pub fn cavities(&self) -> &[Cavity<T>] {
        &self.cavities
    }

    pub fn resonators(&self) -> &[Resonator<T>] {
        &self.resonators
    }

    pub fn couplings(&self) -> &[T] {
        &self.couplings
    }

    pub fn zpf_ratio(&self) -> T {
        self.zpf_ratio
    }

    pub fn include_weak_backaction(&self) -> bool {
        self.include_weak_backaction
    }

    pub fn cavity(&self, name: &str) -> Option<&Cavity<T>> {
        self.setup.cavity_index(name).map(|i| &self.cavities[i])
    }

    pub fn resonator(&self, name: &str) -> Option<&Resonator<T>> {
        self.setup.resonator_index(name).map(|i| &self.resonators[i])
    }

    pub fn with_zpf_ratio(mut self, r: T) -> Result<Self> {
        self.zpf_ratio = r;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weak_backaction(mut self, on: bool) -> Self {
        self.include_weak_backaction = on;
        self
    }

    /// Reads a rate by label (`g_s`, `omega_m`, `k_1`, ...) or `zpf_ratio`.
    pub fn get(&self, label: &str) -> Result<T> {
        if label == "zpf_ratio" {
            return Ok(self.zpf_ratio);
        }
        let (kind, name) = split_label(label)?;
        let setup = self.setup;
        let unknown = || Error::UnknownParameter(label.to_string());
        match kind {
            "delta" | "gamma" | "g" | "eps" => {
                let c = &self.cavities[setup.cavity_index(name).ok_or_else(unknown)?];
                Ok(match kind {
                    "delta" => c.delta,
                    "gamma" => c.gamma,
                    "g" => c.g,
                    _ => c.eps,
                })
            }
            "omega" | "Gamma" => {
                let r = &self.resonators[setup.resonator_index(name).ok_or_else(unknown)?];
                Ok(if kind == "omega" { r.omega } else { r.damping })
            }
            _ => {
                let i = setup
                    .coupling_names()
                    .iter()
                    .position(|n| *n == label)
                    .ok_or_else(unknown)?;
                Ok(self.couplings[i])
            }
        }
    }

    /// Returns a copy with one rate replaced; the result is re-validated.
    pub fn with(&self, label: &str, value: T) -> Result<Self> {
        let mut p = self.clone();
        p.set_unchecked(label, value)?;
        p.validate()?;
        Ok(p)
    }

    /// Replaces several rates at once and validates only the final state, so
    /// tied rates such as `k_1`/`k_2` can move together.
    pub fn with_many(&self, updates: &[(&str, T)]) -> Result<Self> {
        let mut p = self.clone();
        for (label, value) in updates {
            p.set_unchecked(label, *value)?;
        }
        p.validate()?;
        Ok(p)
    }

    fn set_unchecked(&mut self, label: &str, value: T) -> Result<()> {
        if label == "zpf_ratio" {
            self.zpf_ratio = value;
            return Ok(());
        }
        let (kind, name) = split_label(label)?;
        let setup = self.setup;
        let unknown = || Error::UnknownParameter(label.to_string());
        match kind {
            "delta" | "gamma" | "g" | "eps" => {
                let c = &mut self.cavities[setup.cavity_index(name).ok_or_else(unknown)?];
                match kind {
                    "delta" => c.delta = value,
                    "gamma" => c.gamma = value,
                    "g" => c.g = value,
                    _ => c.eps = value,
                }
            }
            "omega" | "Gamma" => {
                let r = &mut self.resonators[setup.resonator_index(name).ok_or_else(unknown)?];
                if kind == "omega" {
                    r.omega = value;
                } else {
                    r.damping = value;
                }
            }
            _ => {
                let i = setup
                    .coupling_names()
                    .iter()
                    .position(|n| *n == label)
                    .ok_or_else(unknown)?;
                self.couplings[i] = value;
            }
        }
        Ok(())
    }

    /// Checks the positivity and topology invariants.
    pub fn validate(&self) -> Result<()> {
        let s = self.setup;
        if self.cavities.len() != s.cavity_names().len()
            || self.resonators.len() != s.resonator_names().len()
            || self.couplings.len() != s.coupling_names().len()
        {
            return Err(Error::InvalidParams(format!(
                "{} expects {} cavities, {} resonators and {} couplings",
                s.tag(),
                s.cavity_names().len(),
                s.resonator_names().len(),
                s.coupling_names().len()
            )));
        }
        for label in s.rate_labels() {
            check_rate(&label, self.get(&label)?)?;
        }
        if !(self.zpf_ratio.is_finite() && self.zpf_ratio > T::zero()) {
            return Err(Error::NonPositiveRate {
                label: "zpf_ratio".into(),
                value: self.zpf_ratio.as_f64(),
            });
        }
        if s == Setup::CsB && self.couplings[0] != self.couplings[1] {
            return Err(Error::InvalidParams(
                "CS_B requires identical mechanical couplings k_1 = k_2".into(),
            ));
        }
        Ok(())
    }

    /// Ratio `g_s / g_w` of strong to (first) weak optomechanical coupling.
    pub fn coupling_ratio(&self) -> T {
        self.cavities[0].g / self.cavities[1].g
    }
}

fn split_label(label: &str) -> Result<(&str, &str)> {
    if label == "k" {
        return Ok(("k", ""));
    }
    label
        .split_once('_')
        .ok_or_else(|| Error::UnknownParameter(label.to_string()))
}

/// Detunings take any finite value; drives, couplings and mechanical
/// couplings may be zero; damping rates and frequencies must be positive.
fn check_rate<T: Scalar>(label: &str, value: T) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFiniteRate {
            label: label.into(),
            value: value.as_f64(),
        });
    }
    let kind = label.split('_').next().unwrap_or(label);
    let ok = match kind {
        "delta" => true,
        "g" | "eps" | "k" => value >= T::zero(),
        _ => value > T::zero(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NonPositiveRate {
            label: label.into(),
            value: value.as_f64(),
        })
    }
}

/// Converts labelled Hz inputs into a validated parameter set in rad/ns.
pub fn to_angular<T: Scalar>(inputs: &[RateInput<T>], setup: Setup) -> Result<ModelParams<T>> {
    let labels = setup.rate_labels();
    if let Some(bad) = inputs.iter().find(|r| !labels.contains(&r.label)) {
        return Err(Error::UnknownParameter(bad.label.clone()));
    }
    let lookup = |label: &str| -> Result<T> {
        let input = inputs
            .iter()
            .find(|r| r.label == label)
            .ok_or_else(|| Error::MissingParameter(label.to_string()))?;
        check_rate(label, input.hz)?;
        Ok(hz_to_angular(input.hz))
    };
    let cavities = setup
        .cavity_names()
        .iter()
        .map(|c| {
            Ok(Cavity {
                delta: lookup(&format!("delta_{c}"))?,
                gamma: lookup(&format!("gamma_{c}"))?,
                g: lookup(&format!("g_{c}"))?,
                eps: lookup(&format!("eps_{c}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let resonators = setup
        .resonator_names()
        .iter()
        .map(|r| {
            Ok(Resonator {
                omega: lookup(&format!("omega_{r}"))?,
                damping: lookup(&format!("Gamma_{r}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let couplings = setup
        .coupling_names()
        .iter()
        .map(|k| lookup(k))
        .collect::<Result<Vec<_>>>()?;
    ModelParams::new(setup, cavities, resonators, couplings)
}

/// Zero-point displacement `sqrt(hbar / (2 m omega))` in metres, for a mass in
/// kg and an angular frequency in rad/s.
pub fn derive_zpf<T: Scalar>(mass: T, omega: T) -> Result<T> {
    if !(mass > T::zero() && omega > T::zero()) || !mass.is_finite() || !omega.is_finite() {
        return Err(Error::NonPositiveInput(format!("mass = {mass}, omega = {omega}")));
    }
    Ok((T::lit(HBAR) / (T::lit(2.0) * mass * omega)).sqrt())
}

/// Strong-coupling small-detuning diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// Mean |u| of the strong-branch resonator.
    pub xbar_s: f64,
    /// Mean |u| of the resonator the weak mode couples to.
    pub xbar_w: f64,
    pub gs_xbar: f64,
    pub gw_xbar: f64,
    /// `[g_s xbar/|delta_s|, g_s xbar/gamma_s, g_w xbar/|delta_w|, g_w xbar/gamma_w]`.
    pub ratios: [f64; 4],
    pub satisfied: [bool; 4],
    pub threshold: f64,
}

impl RegimeReport {
    pub const RATIO_NAMES: [&'static str; 4] = [
        "gs_xbar/delta_s",
        "gs_xbar/gamma_s",
        "gw_xbar/delta_w",
        "gw_xbar/gamma_w",
    ];

    /// Re-evaluates the flags against another threshold.
    pub fn with_threshold(&self, threshold: f64) -> RegimeReport {
        let mut r = self.clone();
        r.threshold = threshold;
        r.satisfied = self.ratios.map(|x| x > threshold);
        r
    }

    pub fn all_satisfied(&self) -> bool {
        self.satisfied.iter().all(|&s| s)
    }

    pub fn strong_side_satisfied(&self) -> bool {
        self.satisfied[0] && self.satisfied[1]
    }

    pub fn weak_side_satisfied(&self) -> bool {
        self.satisfied[2] && self.satisfied[3]
    }
}

fn regime_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Evaluates the regime inequalities from a post-transient trajectory.
pub fn validate_regime<T: Scalar>(params: &ModelParams<T>, traj: &Trajectory<T>) -> Result<RegimeReport> {
    validate_regime_with(params, traj, DEFAULT_REGIME_THRESHOLD)
}

pub fn validate_regime_with<T: Scalar>(
    params: &ModelParams<T>,
    traj: &Trajectory<T>,
    threshold: f64,
) -> Result<RegimeReport> {
    let setup = params.setup();
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let xbar = |cavity: usize| -> Result<f64> {
        let idx = setup.displacement_index(setup.resonator_of(cavity));
        let name = &setup.channel_names()[idx];
        let column = traj.column(name)?;
        Ok(mean_abs(&column, traj.times())?.as_f64())
    };
    let xbar_s = xbar(0)?;
    let xbar_w = xbar(1)?;
    let strong = params.cavities()[0];
    let weak = params.cavities()[1];
    let gs_xbar = strong.g.as_f64() * xbar_s;
    let gw_xbar = weak.g.as_f64() * xbar_w;
    let ratios = [
        regime_ratio(gs_xbar, strong.delta.as_f64().abs()),
        regime_ratio(gs_xbar, strong.gamma.as_f64()),
        regime_ratio(gw_xbar, weak.delta.as_f64().abs()),
        regime_ratio(gw_xbar, weak.gamma.as_f64()),
    ];
    Ok(RegimeReport {
        xbar_s,
        xbar_w,
        gs_xbar,
        gw_xbar,
        ratios,
        satisfied: ratios.map(|x| x > threshold),
        threshold,
    })
}
