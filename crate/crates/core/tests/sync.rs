use optosync::integrator::{integrate, IntegrationPlan};
use optosync::signal::analytic_signal;
use optosync::sync::{SyncErrors, DEFAULT_RATIO_FLOOR};
use optosync::Trajectory;
use optosync::{
    amplitude_error, cos_phase_error, detect_complete_sync, detect_phase_lock, phase_ratio, preset,
    LockOptions, Model, ScenarioConfig, SyncOptions,
};
use proptest::prelude::*;

fn two_mode(rows: &[[f64; 4]]) -> Trajectory {
    let data = rows.iter().flatten().copied().collect();
    let channels = ["re_alpha_1", "im_alpha_1", "re_alpha_2", "im_alpha_2"]
        .map(String::from)
        .to_vec();
    let times = (0..rows.len()).map(|i| i as f64 * 0.5).collect();
    Trajectory::from_parts(times, data, channels, IntegrationPlan::new(0.0, 1.0, 0.5)).unwrap()
}

fn rows() -> impl Strategy<Value = Vec<[f64; 4]>> {
    prop::collection::vec(prop::array::uniform4(-5.0f64..5.0), 10..80)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn amplitude_error_is_antisymmetric(r in rows()) {
        let t = two_mode(&r);
        let a = amplitude_error(&t, "1", "2").unwrap();
        let b = amplitude_error(&t, "2", "1").unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(*x, -*y);
        }
        let p = cos_phase_error(&t, "1", "2").unwrap();
        let q = cos_phase_error(&t, "2", "1").unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert_eq!(x.map(|v| -v), *y);
        }
    }

    #[test]
    fn enlarging_tolerances_never_breaks_sync(
        r in rows(),
        scale in 1e-6f64..1.0,
        amp in 1e-6f64..1.0,
        phase in 1e-6f64..1.0,
        grow_a in 1.0f64..100.0,
        grow_p in 1.0f64..100.0,
    ) {
        // shrink mode 2 towards mode 1 so both verdicts occur
        let r: Vec<[f64; 4]> = r
            .iter()
            .map(|x| [x[0], x[1], x[0] + scale * x[2], x[1] + scale * x[3]])
            .collect();
        let e = SyncErrors::from_trajectory(&two_mode(&r), "1", "2").unwrap();
        let tight = SyncOptions { amp_tol: amp, phase_tol: phase, window: 0.5 };
        let loose = SyncOptions { amp_tol: amp * grow_a, phase_tol: phase * grow_p, window: 0.5 };
        let a = detect_complete_sync(&e, &tight).unwrap();
        let b = detect_complete_sync(&e, &loose).unwrap();
        prop_assert!(!a.synchronized || b.synchronized);
    }

    #[test]
    fn phase_ratio_of_a_signal_with_itself_is_one(k in 20usize..120, phi in 0.0f64..6.0) {
        let n = 2048;
        let s: Vec<f64> = (0..n).map(|i| (0.05 * k as f64 * i as f64 + phi).cos() + 0.3).collect();
        let sig = analytic_signal(&s, 1.0).unwrap();
        let r = phase_ratio(&sig, &sig, DEFAULT_RATIO_FLOOR).unwrap();
        prop_assert!(!r.ratio.is_empty());
        prop_assert!(r.ratio.iter().all(|&x| x == 1.0));
        let v = detect_phase_lock(&r.ratio, 1.0, &LockOptions::default()).unwrap();
        prop_assert!(v.locked);
        prop_assert_eq!(v.deviation, 0.0);
    }
}

#[test]
fn fig4_initial_phase_error() {
    let c: ScenarioConfig = preset("fig4_g1").unwrap();
    let plan = IntegrationPlan::new(0.0, 0.01, 1e-3);
    let t = integrate(&Model::new(c.params.clone()), c.initial.as_slice(), &plan).unwrap();
    let e = cos_phase_error(&t, "1", "2").unwrap()[0].unwrap();
    assert!((e - (0.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
    let a = amplitude_error(&t, "1", "2").unwrap()[0];
    assert!((a - (0.1 - 0.1 * 2f64.sqrt())).abs() < 1e-15);
}

#[test]
fn linear_drift_around_target_is_not_locked() {
    let ratio: Vec<f64> = (0..1000).map(|i| 2.0 + (i as f64 / 999.0 - 0.5)).collect();
    let v = detect_phase_lock(
        &ratio,
        2.0,
        &LockOptions {
            window: 1.0,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!v.locked);
    assert!((v.ratio_band_width - 1.0).abs() < 1e-12);
    assert!(v.deviation < 1e-12);
}
