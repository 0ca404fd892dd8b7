use num_complex::Complex;
use optosync::dynamics::SystemState;
use optosync::integrator::{integrate, IntegrationPlan};
use optosync::model::hz_to_angular;
use optosync::{preset, Model, ModelParams, Setup, VectorField};
use proptest::prelude::*;

fn base(setup: Setup) -> ModelParams {
    let name = match setup {
        Setup::CsA => "fig4_g1",
        Setup::CsB => "fig5b",
        Setup::PsA => "fig7",
        Setup::PsB => "fig9",
    };
    preset(name).unwrap().params
}

fn eval(model: &Model<f64>, y: &[f64]) -> Vec<f64> {
    let mut dy = vec![0.0; y.len()];
    model.eval(0.0, y, &mut dy);
    dy
}

fn indices(setup: Setup, pred: impl Fn(&str) -> bool) -> Vec<usize> {
    setup
        .channel_names()
        .iter()
        .enumerate()
        .filter(|(_, n)| pred(n))
        .map(|(i, _)| i)
        .collect()
}

/// Channels of the strong unit: its cavity and the resonator it drives.
fn is_strong(setup: Setup, name: &str) -> bool {
    name.ends_with("_s") || (setup.shared_resonator() && (name == "u" || name == "v"))
}

fn setups() -> impl Strategy<Value = Setup> {
    prop::sample::select(Setup::ALL.to_vec())
}

fn state(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0..20.0f64, dim)
}

fn zero_couplings(p: &ModelParams) -> ModelParams {
    let s = p.setup();
    let mut updates: Vec<(String, f64)> = s.cavity_names().iter().map(|c| (format!("g_{c}"), 0.0)).collect();
    updates.extend(s.coupling_names().iter().map(|k| (k.to_string(), 0.0)));
    let refs: Vec<(&str, f64)> = updates.iter().map(|(l, v)| (l.as_str(), *v)).collect();
    p.with_many(&refs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uncoupled_steady_state_is_a_fixed_point(
        setup in setups(),
        delta_hz in -5e8..5e8f64,
        gamma_hz in 1e6..1e9f64,
        eps_hz in 0.0..2e10f64,
    ) {
        let p = zero_couplings(&base(setup));
        let cavs: Vec<String> = setup.cavity_names().iter().map(|s| s.to_string()).collect();
        let updates: Vec<(String, f64)> = cavs
            .iter()
            .flat_map(|c| {
                [
                    (format!("delta_{c}"), hz_to_angular(delta_hz)),
                    (format!("gamma_{c}"), hz_to_angular(gamma_hz)),
                    (format!("eps_{c}"), hz_to_angular(eps_hz)),
                ]
            })
            .collect();
        let refs: Vec<(&str, f64)> = updates.iter().map(|(l, v)| (l.as_str(), *v)).collect();
        let p = p.with_many(&refs).unwrap();
        let mut s = SystemState::zeros(setup);
        for c in &cavs {
            let cav = p.cavity(c).unwrap();
            let star = Complex::new(cav.eps, 0.0) / Complex::new(cav.gamma / 2.0, cav.delta);
            s.set_alpha(c, star).unwrap();
        }
        let d = Model::new(p.clone()).derivative(&s).unwrap();
        let scale = hz_to_angular(eps_hz).max(1.0);
        for x in d.as_slice() {
            prop_assert!(x.abs() <= 1e-12 * scale, "{x}");
        }
    }

    #[test]
    fn weak_branch_ignores_strong_branch_when_decoupled(
        setup in setups(),
        y in state(12),
        kick in state(12),
    ) {
        let p = base(setup);
        let p = if setup.shared_resonator() {
            if setup == Setup::CsA {
                return Ok(());
            }
            p.with("g_w", 0.0).unwrap()
        } else {
            let ks: Vec<(&str, f64)> = setup.coupling_names().iter().map(|k| (*k, 0.0)).collect();
            p.with_many(&ks).unwrap()
        };
        let dim = setup.dim();
        let model = Model::new(p);
        let y = &y[..dim];
        let strong = indices(setup, |n| is_strong(setup, n));
        let weak = indices(setup, |n| !is_strong(setup, n));
        let mut z = y.to_vec();
        for &i in &strong {
            z[i] += kick[i];
        }
        let (a, b) = (eval(&model, y), eval(&model, &z));
        for &i in &weak {
            prop_assert_eq!(a[i], b[i]);
        }
    }

    #[test]
    fn strong_branch_ignores_weak_branch(
        setup in setups(),
        y in state(12),
        kick in state(12),
    ) {
        let dim = setup.dim();
        let model = Model::new(base(setup));
        let y = &y[..dim];
        let strong = indices(setup, |n| is_strong(setup, n));
        let weak = indices(setup, |n| !is_strong(setup, n));
        let mut z = y.to_vec();
        for &i in &weak {
            z[i] += kick[i];
        }
        let (a, b) = (eval(&model, y), eval(&model, &z));
        for &i in &strong {
            prop_assert_eq!(a[i], b[i]);
        }
    }
}

#[test]
fn backaction_flag_couples_weak_into_strong() {
    for setup in Setup::ALL {
        let model = Model::new(base(setup).with_weak_backaction(true));
        let dim = setup.dim();
        let y: Vec<f64> = (0..dim).map(|i| 0.3 + 0.1 * i as f64).collect();
        let weak = indices(setup, |n| !is_strong(setup, n));
        let mut z = y.clone();
        for &i in &weak {
            z[i] += 1.0;
        }
        let (a, b) = (eval(&model, &y), eval(&model, &z));
        let strong = indices(setup, |n| is_strong(setup, n));
        assert!(strong.iter().any(|&i| a[i] != b[i]), "{}", setup.tag());
    }
}

/// Undamped, undriven, uncoupled: damping at the smallest positive normal
/// value, which validation accepts and which vanishes against any state.
fn conservative(setup: Setup) -> Model<f64> {
    let p = zero_couplings(&base(setup));
    let mut updates: Vec<(String, f64)> = Vec::new();
    for c in setup.cavity_names() {
        updates.push((format!("gamma_{c}"), f64::MIN_POSITIVE));
        updates.push((format!("eps_{c}"), 0.0));
    }
    for r in setup.resonator_names() {
        updates.push((format!("Gamma_{r}"), f64::MIN_POSITIVE));
    }
    let refs: Vec<(&str, f64)> = updates.iter().map(|(l, v)| (l.as_str(), *v)).collect();
    Model::new(p.with_many(&refs).unwrap())
}

fn invariants(model: &Model<f64>, y: &[f64]) -> Vec<f64> {
    let setup = model.setup();
    let mut out = Vec::new();
    for i in 0..setup.cavity_names().len() {
        let a = setup.alpha_index(i);
        out.push(y[a] * y[a] + y[a + 1] * y[a + 1]);
    }
    for (i, r) in model.params().resonators().iter().enumerate() {
        let u = setup.displacement_index(i);
        out.push(y[u + 1] * y[u + 1] + r.omega * r.omega * y[u] * y[u]);
    }
    out
}

#[test]
fn conserved_quantities_have_zero_rate() {
    for setup in Setup::ALL {
        let model = conservative(setup);
        let y: Vec<f64> = (0..setup.dim()).map(|i| 1.0 - 0.17 * i as f64).collect();
        let dy = eval(&model, &y);
        for i in 0..setup.cavity_names().len() {
            let a = setup.alpha_index(i);
            let rate = 2.0 * (y[a] * dy[a] + y[a + 1] * dy[a + 1]);
            assert!(rate.abs() < 1e-12, "{rate}");
        }
        for (i, r) in model.params().resonators().iter().enumerate() {
            let u = setup.displacement_index(i);
            let rate = 2.0 * (y[u + 1] * dy[u + 1] + r.omega * r.omega * y[u] * dy[u]);
            assert!(rate.abs() < 1e-9, "{rate}");
        }
    }
}

#[test]
fn rk4_conserves_over_one_period_at_fourth_order() {
    let model = conservative(Setup::PsB);
    let omega = model.params().resonators()[0].omega;
    let period = 2.0 * std::f64::consts::PI / omega;
    let y0: Vec<f64> = vec![0.8, -0.3, 1.1, 0.4, 0.5, -0.2, -0.7, 0.9];
    let i0 = invariants(&model, &y0);
    let drift = |dt: f64| -> f64 {
        let steps = (period / dt).round();
        let plan = IntegrationPlan::new(0.0, steps * dt, dt);
        let tr = integrate(&model, &y0, &plan).unwrap();
        let i1 = invariants(&model, tr.last_state().unwrap());
        i0.iter()
            .zip(&i1)
            .map(|(a, b)| (a - b).abs() / a)
            .fold(0.0, f64::max)
    };
    let coarse = drift(period / 250.0);
    let fine = drift(period / 500.0);
    assert!(coarse < 1e-6, "{coarse}");
    // RK4 energy drift for a rotation is O(dt^5) per period, at least fourth order
    assert!(coarse / fine > 12.0, "{coarse} / {fine}");
}
