use std::f64::consts::{PI, TAU};

use optosync::signal::{analytic_signal, edge_margin, hilbert_pv_direct, hilbert_transform, unwrap_phase};
use proptest::prelude::*;

const N: usize = 1024;

/// Sum of tones with whole numbers of cycles over the record, so the
/// discrete transform is exact up to rounding.
fn tones(parts: &[(f64, usize, f64)]) -> Vec<f64> {
    (0..N)
        .map(|i| {
            parts
                .iter()
                .map(|(a, k, phi)| a * (TAU * (*k as f64) * i as f64 / N as f64 + phi).cos())
                .sum()
        })
        .collect()
}

fn tone_parts() -> impl Strategy<Value = Vec<(f64, usize, f64)>> {
    prop::collection::vec((0.1f64..3.0, 1usize..N / 2 - 1, 0.0f64..TAU), 1..5)
}

fn interior(n: usize) -> std::ops::Range<usize> {
    let e = edge_margin(n);
    e..n - e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_is_linear(p in tone_parts(), q in tone_parts(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (s1, s2) = (tones(&p), tones(&q));
        let mix: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
        let (h1, h2, hm) = (hilbert_transform(&s1), hilbert_transform(&s2), hilbert_transform(&mix));
        for i in interior(N) {
            prop_assert!((hm[i] - (a * h1[i] + b * h2[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn double_transform_negates(p in tone_parts()) {
        let s = tones(&p);
        let hh = hilbert_transform(&hilbert_transform(&s));
        for i in interior(N) {
            prop_assert!((hh[i] + s[i]).abs() < 1e-6, "{} vs {}", hh[i], -s[i]);
        }
    }

    #[test]
    fn tone_amplitude_ignores_phase_shift(amp in 0.1f64..5.0, k in 3usize..200, phi in 0.0f64..TAU) {
        let a = analytic_signal(&tones(&[(amp, k, 0.0)]), 1.0).unwrap();
        let b = analytic_signal(&tones(&[(amp, k, phi)]), 1.0).unwrap();
        for i in a.interior() {
            prop_assert!((a.amplitude[i] - b.amplitude[i]).abs() < 1e-6);
            prop_assert!((b.amplitude[i] - amp).abs() < 1e-6);
        }
    }

    #[test]
    fn unwrapping_adds_whole_turns(xs in prop::collection::vec(-50.0f64..50.0, 0..200)) {
        let out = unwrap_phase(&xs);
        prop_assert_eq!(out.len(), xs.len());
        for (o, x) in out.iter().zip(&xs) {
            let turns = (o - x) / TAU;
            prop_assert!((turns - turns.round()).abs() < 1e-9, "{turns}");
        }
        for w in out.windows(2) {
            let d = w[1] - w[0];
            prop_assert!(d > -PI - 1e-9 && d <= PI + 1e-9, "{d}");
        }
    }
}

#[test]
fn pure_tone_phase_is_linear() {
    // 4096 samples, 41 whole periods
    let n = 4096;
    let w = TAU * 41.0 / n as f64;
    let s: Vec<f64> = (0..n).map(|i| (w * i as f64).cos()).collect();
    let sig = analytic_signal(&s, 1.0).unwrap();
    for i in sig.interior() {
        assert!((sig.unwrapped_phase[i] - w * i as f64).abs() < 1e-6);
        assert!((sig.conjugate[i] - (w * i as f64).sin()).abs() < 1e-6);
    }
}

#[test]
fn chirp_matches_principal_value_quadrature() {
    let (n, dt) = (16385, 0.0125);
    let s: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            (2.0 * t + 0.01 * t * t).cos()
        })
        .collect();
    let sig = analytic_signal(&s, dt).unwrap();
    let mut worst = 0.0f64;
    for i in sig.interior().step_by(5) {
        let pv = hilbert_pv_direct(&sig.detrended, dt, i).unwrap();
        worst = worst.max((pv - sig.conjugate[i]).abs());
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn pv_quadrature_rejects_edge_indices() {
    let s = vec![1.0; 200];
    assert!(hilbert_pv_direct(&s, 0.1, 5).is_err());
    assert!(hilbert_pv_direct(&s, 0.1, 195).is_err());
    assert!(hilbert_pv_direct(&s, 0.1, 100).is_ok());
}
