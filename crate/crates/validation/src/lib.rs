//! Acceptance criteria for the simulator. Each check runs the presets behind
//! one published claim and compares the outcome at a pinned tolerance.
//!
//! Chaotic orbits are not pointwise reproducible, so every check is stated in
//! terms of signs, verdicts and properties rather than trajectories.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use num_complex::Complex;
use optosync::integrator::{integrate, IntegrationPlan};
use optosync::reference::{LinearCavity, Lorenz};
use optosync::signal::{edge_margin, hilbert_transform};
use optosync::{
    analytic_signal, lle_benettin, lle_wolf, preset, run_scenario, sweep, Analysis, LleEstimate, LleOptions,
    LockVerdict, Model, RegimeReport, ScenarioConfig, ScenarioReport, SyncVerdict,
};

type Check = std::result::Result<(bool, String), String>;

/// Verdict on one criterion.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: &'static str,
    pub claim: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.claim,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn evaluate(id: &'static str, claim: &'static str, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        claim,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn run(name: &str) -> std::result::Result<ScenarioReport, String> {
    let c: ScenarioConfig = preset(name).map_err(err)?;
    run_scenario(&c).map_err(err)
}

fn failures(r: &ScenarioReport) -> String {
    format!("{}: {}", r.name, r.errors().join("; "))
}

fn lle_of(r: &ScenarioReport) -> std::result::Result<&LleEstimate, String> {
    r.lle().ok_or_else(|| failures(r))
}

fn sync_of(r: &ScenarioReport) -> std::result::Result<&SyncVerdict, String> {
    r.sync().ok_or_else(|| failures(r))
}

fn lock_of(r: &ScenarioReport) -> std::result::Result<&LockVerdict, String> {
    r.lock().ok_or_else(|| failures(r))
}

fn regime_of(r: &ScenarioReport) -> std::result::Result<&RegimeReport, String> {
    r.regime().ok_or_else(|| failures(r))
}

fn settle(v: &SyncVerdict) -> String {
    v.settle_time.map_or("-".into(), |t| format!("{t:.1} ns"))
}

/// Regular orbit without the strong drive, chaos with it, both resolved at
/// three standard errors inside a minute.
pub fn lle_signs() -> Outcome {
    evaluate("1", "fig3 LLE signs", || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (name, negative) in [("fig3a", true), ("fig3b", false)] {
            let start = Instant::now();
            let r = run(name)?;
            let secs = start.elapsed().as_secs_f64();
            let e = lle_of(&r)?;
            let sign = if negative { e.lle < 0.0 } else { e.lle > 0.0 };
            pass &= sign && e.is_significant(3.0) && secs < 60.0;
            parts.push(format!(
                "{name} {:+.5} +- {:.5} /ns in {secs:.1} s",
                e.lle, e.stderr
            ));
        }
        Ok((pass, parts.join(", ")))
    })
}

/// Complete synchronization of the two weak modes for every g.
pub fn complete_sync_fig4() -> Outcome {
    evaluate("2", "fig4 complete synchronization", || {
        let mut pass = true;
        let mut parts = Vec::new();
        for name in ["fig4_g1", "fig4_g2", "fig4_g3"] {
            let c: ScenarioConfig = preset(name).map_err(err)?;
            let distinct = c.initial.alpha("1").map_err(err)? != c.initial.alpha("2").map_err(err)?;
            let r = run_scenario(&c).map_err(err)?;
            let v = sync_of(&r)?;
            let amp_tol = 1e-3 * v.reference_amplitude;
            pass &=
                distinct && v.synchronized && v.terminal_amp_error < amp_tol && v.terminal_phase_error < 1e-3;
            parts.push(format!(
                "{name} sync={} amp={:.1e} (tol {amp_tol:.1e}) phase={:.1e} settle={}",
                v.synchronized,
                v.terminal_amp_error,
                v.terminal_phase_error,
                settle(v)
            ));
        }
        Ok((pass, parts.join(", ")))
    })
}

/// Weak coupling below the quoted threshold should leave the weak unit
/// regular.
pub fn chaos_threshold() -> Outcome {
    evaluate("3", "chaos threshold g/gamma_1 < 0.05", || {
        let base: ScenarioConfig = preset("fig3b").map_err(err)?;
        let s = sweep(&base, "g_1+g_2/gamma_1", &["0.02".into(), "0.04".into()]).map_err(err)?;
        let mut pass = true;
        let mut parts = Vec::new();
        for p in &s.points {
            let e = lle_of(&p.report)?;
            pass &= e.lle <= 0.0;
            parts.push(format!(
                "g/gamma_1={} LLE {:+.4} +- {:.4} /ns",
                p.value, e.lle, e.stderr
            ));
        }
        Ok((pass, parts.join(", ")))
    })
}

/// Mechanical coupling strength decides and speeds up complete
/// synchronization in the spring-coupled setup.
pub fn coupling_dependence_fig6() -> Outcome {
    evaluate("4", "fig6 coupling dependence", || {
        let base: ScenarioConfig = preset("fig6_k1").map_err(err)?;
        let values = ["1e-4", "1e-2", "1"].map(String::from);
        let s = sweep(&base, "k_1+k_2/gamma_1", &values).map_err(err)?;
        let verdicts = s
            .points
            .iter()
            .map(|p| sync_of(&p.report).cloned())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let flags: Vec<bool> = verdicts.iter().map(|v| v.synchronized).collect();
        let faster = match (verdicts[2].settle_time, verdicts[1].settle_time) {
            (Some(strong), Some(medium)) => strong < medium,
            _ => false,
        };
        let pass = flags == [false, true, true] && faster;
        let parts: Vec<String> = values
            .iter()
            .zip(&verdicts)
            .map(|(k, v)| format!("k/gamma={k} sync={} settle={}", v.synchronized, settle(v)))
            .collect();
        Ok((
            pass,
            format!(
                "{} (want false, true, true and settle(1) < settle(1e-2))",
                parts.join(", ")
            ),
        ))
    })
}

fn lock_detail(name: &str, v: &LockVerdict) -> String {
    format!(
        "{name} locked={} mean={:.4} target={} band={:.3}",
        v.locked, v.ratio_mean, v.target, v.ratio_band_width
    )
}

pub fn phase_lock_fig8() -> Outcome {
    evaluate("5", "fig8 phase locking", || {
        let c = run("fig8c")?;
        let a = run("fig8a")?;
        let (vc, va) = (lock_of(&c)?, lock_of(&a)?);
        let pass = vc.locked && (vc.ratio_mean - 1.0).abs() < 0.05 && !va.locked && va.ratio_band_width > 0.5;
        Ok((
            pass,
            format!("{}, {}", lock_detail("fig8c", vc), lock_detail("fig8a", va)),
        ))
    })
}

pub fn phase_lock_fig10() -> Outcome {
    evaluate("6", "fig10 phase locking", || {
        let v: Vec<LockVerdict> = ["fig10c", "fig10a", "fig10b"]
            .iter()
            .map(|n| run(n).and_then(|r| lock_of(&r).cloned()))
            .collect::<std::result::Result<_, _>>()?;
        let (c, a, b) = (&v[0], &v[1], &v[2]);
        let pass = c.locked
            && (c.ratio_mean - c.target).abs() < 0.05 * c.target
            && !a.locked
            && !b.locked
            && b.ratio_band_width < a.ratio_band_width;
        Ok((
            pass,
            format!(
                "{}, {}, {}",
                lock_detail("fig10c", c),
                lock_detail("fig10a", a),
                lock_detail("fig10b", b)
            ),
        ))
    })
}

fn rk4_orders() -> Vec<f64> {
    let cav = LinearCavity::new(3.0, 0.8);
    let alpha0 = Complex::new(1.0, -0.5);
    let errors: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt| {
            let tr = integrate(&cav, &[alpha0.re, alpha0.im], &IntegrationPlan::new(0.0, 4.0, dt))
                .expect("linear cavity integrates");
            let end = tr.last_state().expect("non-empty");
            (Complex::new(end[0], end[1]) - cav.exact(alpha0, 4.0)).norm()
        })
        .collect();
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn tone_phase_error() -> std::result::Result<f64, String> {
    let n = 4096;
    let w = TAU * 41.0 / n as f64;
    let s: Vec<f64> = (0..n).map(|i| (w * i as f64).cos()).collect();
    let sig = analytic_signal(&s, 1.0).map_err(err)?;
    Ok(sig
        .interior()
        .map(|i| (sig.unwrapped_phase[i] - w * i as f64).abs())
        .fold(0.0, f64::max))
}

fn double_hilbert_error() -> f64 {
    let n = 1024;
    let signals: [&[(f64, f64, f64)]; 3] = [
        &[(1.0, 7.0, 0.0)],
        &[(1.0, 13.0, 0.3), (0.5, 101.0, 2.0)],
        &[(0.2, 3.0, 1.0), (1.5, 64.0, 0.0), (0.7, 400.0, 4.0)],
    ];
    let e = edge_margin(n);
    signals
        .iter()
        .map(|parts| {
            let s: Vec<f64> = (0..n)
                .map(|i| {
                    parts
                        .iter()
                        .map(|(a, k, phi)| a * (TAU * k * i as f64 / n as f64 + phi).cos())
                        .sum()
                })
                .collect();
            let hh = hilbert_transform(&hilbert_transform(&s));
            (e..n - e).map(|i| (hh[i] + s[i]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn method_agreement(name: &str) -> std::result::Result<(f64, f64), String> {
    let c: ScenarioConfig = preset(name).map_err(err)?;
    let (channels, t_total) = c
        .analyses
        .iter()
        .find_map(|a| match a {
            Analysis::Lle {
                channels, t_total, ..
            } => Some((channels.clone(), *t_total)),
            _ => None,
        })
        .ok_or_else(|| format!("{name} has no exponent analysis"))?;
    let names = c.setup().channel_names();
    let idx = channels
        .iter()
        .map(|ch| {
            names
                .iter()
                .position(|n| n == ch)
                .ok_or_else(|| format!("unknown channel {ch}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut o = LleOptions::for_params(&c.params, t_total).with_channels(idx);
    o.dt = c.plan.dt;
    o.discard = c.plan.discard;
    let m = Model::new(c.params.clone());
    let w = lle_wolf(&m, c.initial.as_slice(), &o).map_err(err)?;
    let b = lle_benettin(&m, c.initial.as_slice(), &o).map_err(err)?;
    Ok((w.lle, b.lle))
}

/// Numerical properties of the integrator, the Hilbert transform and the
/// exponent estimators.
pub fn numerical_suite() -> Outcome {
    evaluate("7", "numerical property suite", || {
        let mut pass = true;
        let mut parts = Vec::new();
        let mut note = |ok: bool, text: String| {
            pass &= ok;
            parts.push(format!("{}{text}", if ok { "" } else { "FAILED " }));
        };

        let orders = rk4_orders();
        note(
            orders.iter().all(|p| (3.8..=4.2).contains(p)),
            format!("(a) RK4 order {:.3}/{:.3}", orders[0], orders[1]),
        );
        let tone = tone_phase_error()?;
        note(tone < 1e-6, format!("(b) tone phase error {tone:.1e} rad"));
        let hh = double_hilbert_error();
        note(hh < 1e-6, format!("(c) H[H[s]]+s {hh:.1e}"));

        for name in ["fig3b", "fig5b", "fig9"] {
            let (w, b) = method_agreement(name)?;
            let rel = (w - b).abs() / w.abs().max(b.abs());
            note(
                rel < 0.1,
                format!("(d) {name} wolf {w:.4} benettin {b:.4} ({:.2}%)", 100.0 * rel),
            );
        }

        let o = LleOptions::new(1000.0, 0.1, 0.005).with_discard(50.0);
        let lorenz = lle_wolf(&Lorenz::default(), &[1.0, 1.0, 1.0], &o).map_err(err)?;
        note(
            (lorenz.lle - 0.906).abs() <= 0.05,
            format!("(e) Lorenz {:.4} +- {:.4}", lorenz.lle, lorenz.stderr),
        );

        let gamma = 0.5;
        let cav = LinearCavity::new(2.0, gamma);
        let o = LleOptions::new(40.0, 0.5, 0.01);
        let w = lle_wolf(&cav, &[1.0, 0.0], &o).map_err(err)?.lle;
        let b = lle_benettin(&cav, &[1.0, 0.0], &o).map_err(err)?.lle;
        let target = -gamma / 2.0;
        note(
            (w - target).abs() <= 0.05 * target.abs() && (b - target).abs() <= 0.05 * target.abs(),
            format!("(f) damped cavity {w:.5}/{b:.5} vs {target}"),
        );
        Ok((pass, parts.join(", ")))
    })
}

fn regime_detail(name: &str, r: &RegimeReport) -> String {
    format!(
        "{name} ratios [{}]",
        r.ratios
            .iter()
            .map(|x| format!("{x:.1}"))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

/// Strong-coupling small-detuning inequalities at threshold 10.
pub fn regime_diagnostics() -> Outcome {
    evaluate("8", "regime diagnostics", || {
        let mut pass = true;
        let mut parts = Vec::new();
        for name in ["fig7", "fig9"] {
            let r = run(name)?;
            let g = regime_of(&r)?.with_threshold(10.0);
            pass &= g.all_satisfied();
            parts.push(format!("{} all={}", regime_detail(name, &g), g.all_satisfied()));
        }
        let r = run("fig8a")?;
        let g = regime_of(&r)?.with_threshold(10.0);
        pass &= !g.weak_side_satisfied();
        parts.push(format!(
            "{} weak side={}",
            regime_detail("fig8a", &g),
            g.weak_side_satisfied()
        ));
        Ok((pass, parts.join(", ")))
    })
}

/// Every criterion in order.
pub fn all() -> Vec<fn() -> Outcome> {
    vec![
        lle_signs,
        complete_sync_fig4,
        chaos_threshold,
        coupling_dependence_fig6,
        phase_lock_fig8,
        phase_lock_fig10,
        numerical_suite,
        regime_diagnostics,
    ]
}
