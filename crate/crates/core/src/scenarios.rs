//! Named parameter sets for every figure, the scenario pipeline and the
//! parameter-sweep harness.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{Model, SystemState};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegrationPlan, Trajectory};
use crate::lyapunov::{lle, LleEstimate, LleMethod, LleOptions};
use crate::model::{
    to_angular, validate_regime_with, ModelParams, RateInput, RegimeReport, Setup, DEFAULT_REGIME_THRESHOLD,
};
use crate::scalar::Scalar;
use crate::sync::{
    detect_complete_sync, detect_phase_lock, phase_ratio_of, LockOptions, LockVerdict, RatioSeries,
    SyncErrors, SyncOptions, SyncVerdict, DEFAULT_RATIO_FLOOR,
};

/// One analysis requested by a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    /// Largest Lyapunov exponent measured on `channels` (all if empty).
    Lle {
        channels: Vec<String>,
        method: LleMethod,
        /// Accumulation time after the plan's discard, ns.
        t_total: f64,
    },
    CompleteSync {
        mode_i: String,
        mode_j: String,
        #[serde(default)]
        options: SyncOptions,
    },
    /// Lock of `Psi_strong / Psi_weak` at `g_strong / g_weak`.
    PhaseLock {
        strong: String,
        weak: String,
        #[serde(default)]
        options: LockOptions,
        #[serde(default = "default_floor")]
        ratio_floor: f64,
    },
    Regime {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
}

fn default_floor() -> f64 {
    DEFAULT_RATIO_FLOOR
}

fn default_threshold() -> f64 {
    DEFAULT_REGIME_THRESHOLD
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Lle { .. } => "lle",
            Analysis::CompleteSync { .. } => "complete_sync",
            Analysis::PhaseLock { .. } => "phase_lock",
            Analysis::Regime { .. } => "regime",
        }
    }

    fn channels(&self) -> Vec<String> {
        match self {
            Analysis::Lle { channels, .. } => channels.clone(),
            Analysis::CompleteSync { mode_i, mode_j, .. } => alpha_channels(&[mode_i, mode_j]),
            Analysis::PhaseLock { strong, weak, .. } => alpha_channels(&[strong, weak]),
            Analysis::Regime { .. } => Vec::new(),
        }
    }
}

fn alpha_channels(modes: &[&String]) -> Vec<String> {
    modes
        .iter()
        .flat_map(|m| [format!("re_alpha_{m}"), format!("im_alpha_{m}")])
        .collect()
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig<T> {
    pub name: String,
    pub description: String,
    /// Figure panel the parameters come from, e.g. `"3(b)"`.
    pub figure: String,
    pub params: ModelParams<T>,
    pub initial: SystemState<T>,
    pub plan: IntegrationPlan<T>,
    pub analyses: Vec<Analysis>,
    pub output_channels: Vec<String>,
}

impl<T: Scalar> ScenarioConfig<T> {
    pub fn setup(&self) -> Setup {
        self.params.setup()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.plan.validate()?;
        let setup = self.params.setup();
        if self.initial.setup() != setup {
            return Err(Error::LayoutMismatch {
                expected: setup.dim(),
                got: self.initial.as_slice().len(),
            });
        }
        if self.analyses.is_empty() {
            return Err(Error::validation("analyses", "at least one analysis is required"));
        }
        let names = setup.channel_names();
        for a in &self.analyses {
            for c in a.channels() {
                if !names.contains(&c) {
                    return Err(Error::UnknownChannel(c));
                }
            }
        }
        for c in &self.output_channels {
            if !names.contains(c) {
                return Err(Error::UnknownChannel(c.clone()));
            }
        }
        Ok(())
    }

    /// Same run with a different time span after the discard.
    pub fn with_duration(mut self, duration: T) -> Self {
        self.plan.t1 = self.plan.t0 + self.plan.discard + duration;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.plan.dt = dt;
        self
    }
}

/// Names of every preset in figure order.
pub const PRESET_NAMES: [&str; 18] = [
    "fig3a",
    "fig3b",
    "fig4_g1",
    "fig4_g2",
    "fig4_g3",
    "fig5a",
    "fig5b",
    "fig6_k1e-4",
    "fig6_k1e-2",
    "fig6_k1",
    "fig7",
    "fig8a",
    "fig8b",
    "fig8c",
    "fig9",
    "fig10a",
    "fig10b",
    "fig10c",
];

/// Hz value of a literal such as `"0.346 GHz"`, parsed exactly as a
/// configuration document would be.
fn hz(text: &str) -> f64 {
    crate::io::config::parse_rate_hz(text).expect("preset literal")
}

fn cavity_hz(name: &str, delta: f64, gamma: f64, g: f64, eps: f64) -> Vec<RateInput<f64>> {
    vec![
        RateInput::new(format!("delta_{name}"), delta),
        RateInput::new(format!("gamma_{name}"), gamma),
        RateInput::new(format!("g_{name}"), g),
        RateInput::new(format!("eps_{name}"), eps),
    ]
}

fn resonator_hz(name: &str) -> Vec<RateInput<f64>> {
    vec![
        RateInput::new(format!("omega_{name}"), hz("0.346 GHz")),
        RateInput::new(format!("Gamma_{name}"), hz("2.8 MHz")),
    ]
}

fn strong_hz() -> Vec<RateInput<f64>> {
    cavity_hz(
        "s",
        hz("0.13 GHz"),
        hz("0.24 GHz"),
        hz("0.126 GHz"),
        hz("15.4 GHz"),
    )
}

fn build<T: Scalar>(setup: Setup, inputs: Vec<RateInput<f64>>) -> ModelParams<T> {
    let inputs: Vec<RateInput<T>> = inputs
        .into_iter()
        .map(|r| RateInput::new(r.label, T::lit(r.hz)))
        .collect();
    to_angular(&inputs, setup).expect("preset parameters are valid")
}

fn cs_a_params<T: Scalar>(g_weak_hz: f64) -> ModelParams<T> {
    let mut v = strong_hz();
    for j in ["1", "2"] {
        v.extend(cavity_hz(
            j,
            hz("13.0 MHz"),
            hz("0.24 GHz"),
            g_weak_hz,
            hz("22.0 MHz"),
        ));
    }
    v.extend(resonator_hz("m"));
    build(Setup::CsA, v)
}

fn cs_b_params<T: Scalar>(k_hz: f64) -> ModelParams<T> {
    let mut v = strong_hz();
    for j in ["1", "2"] {
        v.extend(cavity_hz(
            j,
            hz("26.0 MHz"),
            hz("0.24 GHz"),
            hz("25.2 MHz"),
            hz("22.0 MHz"),
        ));
    }
    for r in ["s", "1", "2"] {
        v.extend(resonator_hz(r));
    }
    v.push(RateInput::new("k_1", k_hz));
    v.push(RateInput::new("k_2", k_hz));
    build(Setup::CsB, v)
}

fn ps_weak_hz(g_w: f64, eps_w: f64) -> Vec<RateInput<f64>> {
    cavity_hz("w", hz("26.0 MHz"), hz("52.0 MHz"), g_w, eps_w)
}

fn ps_a_params<T: Scalar>(g_w: f64, eps_w: f64) -> ModelParams<T> {
    let mut v = strong_hz();
    v.extend(ps_weak_hz(g_w, eps_w));
    v.extend(resonator_hz("m"));
    build(Setup::PsA, v)
}

fn ps_b_params<T: Scalar>(g_w: f64) -> ModelParams<T> {
    let mut v = strong_hz();
    v.extend(ps_weak_hz(g_w, hz("0.22 GHz")));
    v.extend(resonator_hz("s"));
    v.extend(resonator_hz("w"));
    v.push(RateInput::new("k", hz("1.29 MHz")));
    build(Setup::PsB, v)
}

/// Removes the strong branch: no strong drive and no strong coupling.
fn without_strong<T: Scalar>(p: ModelParams<T>) -> ModelParams<T> {
    p.with_many(&[("eps_s", T::zero()), ("g_s", T::zero())])
        .expect("zero drive and coupling are valid")
}

fn with_coupling_ratio<T: Scalar>(
    p: ModelParams<T>,
    labels: &[&str],
    reference: &str,
    ratio: f64,
) -> ModelParams<T> {
    let value = T::lit(ratio) * p.get(reference).expect("reference rate exists");
    let updates: Vec<(&str, T)> = labels.iter().map(|l| (*l, value)).collect();
    p.with_many(&updates).expect("scaled coupling is valid")
}

fn cs_plan<T: Scalar>(discard: f64) -> IntegrationPlan<T> {
    IntegrationPlan::new(T::zero(), T::lit(discard + 2000.0), T::lit(1e-3))
        .with_stride(10)
        .with_discard(T::lit(discard))
}

fn ps_plan<T: Scalar>() -> IntegrationPlan<T> {
    IntegrationPlan::new(T::zero(), T::lit(5500.0), T::lit(1e-3))
        .with_stride(2)
        .with_discard(T::lit(500.0))
}

fn weak_lle(setup: Setup, t_total: f64) -> Analysis {
    let channels = match setup {
        Setup::CsA => vec!["re_alpha_1", "im_alpha_1", "u", "v"],
        Setup::CsB => vec!["re_alpha_1", "im_alpha_1", "u_1", "v_1"],
        Setup::PsA => vec!["re_alpha_w", "im_alpha_w", "u", "v"],
        Setup::PsB => vec!["re_alpha_w", "im_alpha_w", "u_w", "v_w"],
    };
    Analysis::Lle {
        channels: channels.into_iter().map(String::from).collect(),
        method: LleMethod::Wolf,
        t_total,
    }
}

fn phase_lock() -> Analysis {
    Analysis::PhaseLock {
        strong: "s".into(),
        weak: "w".into(),
        options: LockOptions::default(),
        ratio_floor: DEFAULT_RATIO_FLOOR,
    }
}

fn regime() -> Analysis {
    Analysis::Regime {
        threshold: DEFAULT_REGIME_THRESHOLD,
    }
}

fn complete_sync() -> Analysis {
    Analysis::CompleteSync {
        mode_i: "1".into(),
        mode_j: "2".into(),
        options: SyncOptions::default(),
    }
}

fn initial<T: Scalar>(setup: Setup, alphas: &[(&str, f64, f64)]) -> SystemState<T> {
    let mut s = SystemState::zeros(setup);
    for (name, re, im) in alphas {
        s.set_alpha(name, Complex::new(T::lit(*re), T::lit(*im)))
            .expect("preset mode exists");
    }
    s
}

/// Builds a named preset.
pub fn preset<T: Scalar>(name: &str) -> Result<ScenarioConfig<T>> {
    let (description, figure, params, ic, plan, analyses): (&str, &str, ModelParams<T>, _, _, _) = match name
    {
        "fig3a" => (
            "CS-A weak branch alone: regular motion",
            "3(a)",
            without_strong(cs_a_params(hz("0.126 GHz"))),
            initial(Setup::CsA, &[]),
            cs_plan(500.0),
            vec![weak_lle(Setup::CsA, 5000.0)],
        ),
        "fig3b" => (
            "CS-A weak branch driven by the strong mode: chaos",
            "3(b)",
            cs_a_params(hz("0.126 GHz")),
            initial(Setup::CsA, &[]),
            cs_plan(500.0),
            vec![weak_lle(Setup::CsA, 2000.0)],
        ),
        "fig4_g1" | "fig4_g2" | "fig4_g3" => {
            let g = match name {
                "fig4_g1" => hz("25.2 MHz"),
                "fig4_g2" => hz("63.0 MHz"),
                _ => hz("0.126 GHz"),
            };
            (
                "CS-A complete synchronization of the two weak modes",
                "4",
                cs_a_params(g),
                initial(Setup::CsA, &[("1", 0.1, 0.1), ("2", 0.0, 0.1)]),
                cs_plan(0.0),
                vec![complete_sync()],
            )
        }
        "fig5a" => (
            "CS-B weak unit without the strong drive: regular motion",
            "5(a)",
            without_strong(cs_b_params(hz("1.29 MHz"))),
            initial(Setup::CsB, &[]),
            cs_plan(500.0),
            vec![weak_lle(Setup::CsB, 5000.0)],
        ),
        "fig5b" => (
            "CS-B weak unit driven through the mechanical spring: chaos",
            "5(b)",
            cs_b_params(hz("1.29 MHz")),
            initial(Setup::CsB, &[]),
            cs_plan(500.0),
            vec![weak_lle(Setup::CsB, 2000.0)],
        ),
        "fig6_k1e-4" | "fig6_k1e-2" | "fig6_k1" => {
            let r = match name {
                "fig6_k1e-4" => 1e-4,
                "fig6_k1e-2" => 1e-2,
                _ => 1.0,
            };
            (
                "CS-B complete synchronization versus mechanical coupling",
                "6",
                with_coupling_ratio(cs_b_params(hz("1.29 MHz")), &["k_1", "k_2"], "gamma_1", r),
                initial(Setup::CsB, &[("1", 0.0, 0.01), ("2", 0.01, 0.01)]),
                cs_plan(0.0),
                vec![complete_sync()],
            )
        }
        "fig7" => (
            "PS-A phase synchronization in the strong-coupling regime",
            "7",
            ps_a_params(hz("25.2 MHz"), hz("0.22 GHz")),
            initial(Setup::PsA, &[]),
            ps_plan(),
            vec![phase_lock(), regime()],
        ),
        "fig8a" | "fig8b" | "fig8c" => {
            let (g, fig) = match name {
                "fig8a" => (hz("1.26 MHz"), "8(a)"),
                "fig8b" => (hz("12.6 MHz"), "8(b)"),
                _ => (hz("0.126 GHz"), "8(c)"),
            };
            (
                "PS-A phase-ratio locking versus weak optomechanical coupling",
                fig,
                ps_a_params(g, hz("1.1 GHz")),
                initial(Setup::PsA, &[]),
                ps_plan(),
                vec![phase_lock(), regime()],
            )
        }
        "fig9" => (
            "PS-B strong and weak units, both chaotic",
            "9",
            ps_b_params(hz("25.2 MHz")),
            initial(Setup::PsB, &[]),
            ps_plan(),
            vec![weak_lle(Setup::PsB, 2000.0), phase_lock(), regime()],
        ),
        "fig10a" | "fig10b" | "fig10c" => {
            let (r, fig) = match name {
                "fig10a" => (1e-3, "10(a)"),
                "fig10b" => (1e-2, "10(b)"),
                _ => (1e3, "10(c)"),
            };
            (
                "PS-B phase-ratio locking versus mechanical coupling",
                fig,
                with_coupling_ratio(ps_b_params(hz("0.126 GHz")), &["k"], "gamma_s", r),
                initial(Setup::PsB, &[]),
                ps_plan(),
                vec![phase_lock(), regime()],
            )
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    let setup = params.setup();
    Ok(ScenarioConfig {
        name: name.to_string(),
        description: description.to_string(),
        figure: figure.to_string(),
        params,
        initial: ic,
        plan,
        analyses,
        output_channels: setup.channel_names(),
    })
}

/// Result of one analysis, or the error it raised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum AnalysisOutcome {
    Lle(LleEstimate),
    CompleteSync(SyncVerdict),
    PhaseLock(LockVerdict),
    Regime(RegimeReport),
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub analysis: Analysis,
    pub outcome: AnalysisOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub figure: String,
    pub setup: Setup,
    /// The configuration document the run was made from.
    pub config: serde_json::Value,
    /// SHA-256 of the canonical configuration text.
    pub config_hash: String,
    pub samples: usize,
    pub analyses: Vec<AnalysisRecord>,
    /// Files written for this run, relative to the output directory.
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl ScenarioReport {
    pub fn lle(&self) -> Option<&LleEstimate> {
        self.analyses.iter().find_map(|a| match &a.outcome {
            AnalysisOutcome::Lle(e) => Some(e),
            _ => None,
        })
    }

    pub fn sync(&self) -> Option<&SyncVerdict> {
        self.analyses.iter().find_map(|a| match &a.outcome {
            AnalysisOutcome::CompleteSync(v) => Some(v),
            _ => None,
        })
    }

    pub fn lock(&self) -> Option<&LockVerdict> {
        self.analyses.iter().find_map(|a| match &a.outcome {
            AnalysisOutcome::PhaseLock(v) => Some(v),
            _ => None,
        })
    }

    pub fn regime(&self) -> Option<&RegimeReport> {
        self.analyses.iter().find_map(|a| match &a.outcome {
            AnalysisOutcome::Regime(r) => Some(r),
            _ => None,
        })
    }

    pub fn errors(&self) -> Vec<&str> {
        self.analyses
            .iter()
            .filter_map(|a| match &a.outcome {
                AnalysisOutcome::Error { message } => Some(message.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Full output of a run, including the series the plots are drawn from.
#[derive(Clone, Debug)]
pub struct ScenarioRun<T> {
    pub trajectory: Trajectory<T>,
    pub report: ScenarioReport,
    pub sync_errors: Vec<SyncErrors<T>>,
    pub ratios: Vec<RatioSeries<T>>,
}

/// Canonical configuration document and its hash.
pub fn config_fingerprint<T: Scalar>(config: &ScenarioConfig<T>) -> (serde_json::Value, String) {
    let doc = serde_json::to_value(crate::io::config::to_document(config)).expect("document serializes");
    let text = serde_json::to_string(&doc).expect("value serializes");
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    (doc, hash)
}

fn lle_options<T: Scalar>(
    config: &ScenarioConfig<T>,
    channels: &[String],
    t_total: f64,
) -> Result<LleOptions> {
    let names = config.setup().channel_names();
    let idx = channels
        .iter()
        .map(|c| {
            names
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| Error::UnknownChannel(c.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut opts = LleOptions::for_params(&config.params, t_total).with_discard(config.plan.discard.as_f64());
    opts.dt = config.plan.dt.as_f64();
    if !idx.is_empty() {
        opts = opts.with_channels(idx);
    }
    Ok(opts)
}

/// Integrates the scenario and evaluates every analysis.
pub fn execute<T: Scalar>(config: &ScenarioConfig<T>) -> Result<ScenarioRun<T>> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let model = Model::new(config.params.clone());
    let traj =
        integrate(&model, config.initial.as_slice(), &config.plan).map_err(|e| e.in_stage("integrate"))?;
    let mut sync_errors = Vec::new();
    let mut ratios = Vec::new();
    let mut records = Vec::new();
    for analysis in &config.analyses {
        let outcome: Result<AnalysisOutcome> = match analysis {
            Analysis::Lle {
                channels,
                method,
                t_total,
            } => lle_options(config, channels, *t_total)
                .and_then(|o| lle(&model, config.initial.as_slice(), &o, *method))
                .map(AnalysisOutcome::Lle),
            Analysis::CompleteSync {
                mode_i,
                mode_j,
                options,
            } => SyncErrors::from_trajectory(&traj, mode_i, mode_j).and_then(|e| {
                let v = detect_complete_sync(&e, options)?;
                sync_errors.push(e);
                Ok(AnalysisOutcome::CompleteSync(v))
            }),
            Analysis::PhaseLock {
                strong,
                weak,
                options,
                ratio_floor,
            } => phase_ratio_of(&traj, strong, weak, *ratio_floor).and_then(|r| {
                let target = phase_target(&config.params, strong, weak)?;
                let v = detect_phase_lock(&r.ratio, target, options)?;
                ratios.push(r);
                Ok(AnalysisOutcome::PhaseLock(v))
            }),
            Analysis::Regime { threshold } => {
                validate_regime_with(&config.params, &traj, *threshold).map(AnalysisOutcome::Regime)
            }
        };
        let outcome = outcome.unwrap_or_else(|e| AnalysisOutcome::Error {
            message: e.in_stage(analysis.kind()).to_string(),
        });
        records.push(AnalysisRecord {
            analysis: analysis.clone(),
            outcome,
        });
    }
    let (doc, hash) = config_fingerprint(config);
    let report = ScenarioReport {
        name: config.name.clone(),
        figure: config.figure.clone(),
        setup: config.setup(),
        config: doc,
        config_hash: hash,
        samples: traj.len(),
        analyses: records,
        outputs: Vec::new(),
    };
    Ok(ScenarioRun {
        trajectory: traj,
        report,
        sync_errors,
        ratios,
    })
}

fn phase_target<T: Scalar>(p: &ModelParams<T>, strong: &str, weak: &str) -> Result<f64> {
    let gs = p.get(&format!("g_{strong}"))?.as_f64();
    let gw = p.get(&format!("g_{weak}"))?.as_f64();
    if gw == 0.0 {
        return Err(Error::InvalidParams(
            "phase-lock target needs a nonzero weak coupling".into(),
        ));
    }
    Ok(gs / gw)
}

pub fn run_scenario<T: Scalar>(config: &ScenarioConfig<T>) -> Result<ScenarioReport> {
    execute(config).map(|r| r.report)
}

/// Parsed sweep path: `label[+label...][/reference]` or `plan.<field>`.
#[derive(Clone, Debug, PartialEq)]
enum SweepTarget {
    Rates {
        labels: Vec<String>,
        reference: Option<String>,
    },
    Plan(String),
}

fn parse_path<T: Scalar>(base: &ScenarioConfig<T>, path: &str) -> Result<SweepTarget> {
    let bad = || Error::BadPath(path.to_string());
    if let Some(field) = path.strip_prefix("plan.") {
        return match field {
            "dt" | "t1" | "discard" | "duration" | "sample_stride" => Ok(SweepTarget::Plan(field.into())),
            _ => Err(bad()),
        };
    }
    let (lhs, reference) = match path.split_once('/') {
        Some((l, r)) => (l, Some(r.trim().to_string())),
        None => (path, None),
    };
    let labels: Vec<String> = lhs.split('+').map(|s| s.trim().to_string()).collect();
    for l in labels.iter().chain(reference.iter()) {
        if l.is_empty() || base.params.get(l).is_err() {
            return Err(bad());
        }
    }
    Ok(SweepTarget::Rates { labels, reference })
}

/// Parses a sweep value: a bare number or a number with an `Hz`, `kHz`,
/// `MHz` or `GHz` suffix (converted to rad/ns).
pub fn parse_sweep_value(text: &str) -> Result<(f64, bool)> {
    let t = text.trim();
    if t.ends_with("Hz") {
        return crate::io::config::parse_rate(t)
            .map(|v| (v, true))
            .map_err(|_| Error::validation("values", format!("not a number: {text}")));
    }
    t.parse()
        .map(|v| (v, false))
        .map_err(|_| Error::validation("values", format!("not a number: {text}")))
}

fn apply<T: Scalar>(base: &ScenarioConfig<T>, target: &SweepTarget, text: &str) -> Result<ScenarioConfig<T>> {
    let (value, has_unit) = parse_sweep_value(text)?;
    let mut c = base.clone();
    match target {
        SweepTarget::Plan(field) => {
            let v = T::lit(value);
            match field.as_str() {
                "dt" => c.plan.dt = v,
                "t1" => c.plan.t1 = v,
                "discard" => c.plan.discard = v,
                "duration" => c = c.with_duration(v),
                _ => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::validation(
                            "values",
                            "sample_stride must be a positive integer",
                        ));
                    }
                    c.plan.sample_stride = value as usize;
                }
            }
            c.plan.validate()?;
        }
        SweepTarget::Rates { labels, reference } => {
            let v = match reference {
                Some(r) if !has_unit => T::lit(value) * base.params.get(r)?,
                _ => T::lit(value),
            };
            let updates: Vec<(&str, T)> = labels.iter().map(|l| (l.as_str(), v)).collect();
            c.params = base.params.with_many(&updates)?;
        }
    }
    c.name = format!("{}[{}={}]", base.name, path_display(target), text.trim());
    Ok(c)
}

fn path_display(t: &SweepTarget) -> String {
    match t {
        SweepTarget::Plan(f) => format!("plan.{f}"),
        SweepTarget::Rates { labels, reference } => {
            let l = labels.join("+");
            match reference {
                Some(r) => format!("{l}/{r}"),
                None => l,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: String,
    pub report: ScenarioReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub base: String,
    pub path: String,
    pub points: Vec<SweepPoint>,
}

/// Runs `base` once per value of the scalar addressed by `path`.
///
/// Rate paths name one or more labels joined by `+` (set together), with an
/// optional `/reference` making bare values ratios to that rate: `g_w`,
/// `k_1+k_2/gamma_1`, `k/gamma_s`. Values carry `MHz`/`GHz` suffixes or are
/// bare numbers in rad/ns. Plan paths are `plan.dt`, `plan.t1`,
/// `plan.discard`, `plan.duration` and `plan.sample_stride`.
///
/// Points run in parallel; the result keeps the order of `values`.
pub fn sweep<T: Scalar>(base: &ScenarioConfig<T>, path: &str, values: &[String]) -> Result<SweepReport> {
    sweep_with_workers(base, path, values, None)
}

pub fn sweep_with_workers<T: Scalar>(
    base: &ScenarioConfig<T>,
    path: &str,
    values: &[String],
    workers: Option<usize>,
) -> Result<SweepReport> {
    let target = parse_path(base, path)?;
    let configs = values
        .iter()
        .map(|v| apply(base, &target, v))
        .collect::<Result<Vec<_>>>()?;
    let run = || -> Result<Vec<ScenarioReport>> { configs.par_iter().map(run_scenario).collect() };
    let reports = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(SweepReport {
        base: base.name.clone(),
        path: path_display(&target),
        points: values
            .iter()
            .zip(reports)
            .map(|(v, report)| SweepPoint {
                value: v.trim().to_string(),
                report,
            })
            .collect(),
    })
}
