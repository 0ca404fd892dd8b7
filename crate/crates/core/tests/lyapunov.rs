use optosync::integrator::{integrate, IntegrationPlan};
use optosync::reference::{LinearCavity, Lorenz};
use optosync::{lle_benettin, lle_wolf, preset, Analysis, LleEstimate, LleOptions, Model, ScenarioConfig};

#[test]
fn lorenz_exponent() {
    let o = LleOptions::new(1000.0, 0.1, 0.005).with_discard(50.0);
    for e in [
        lle_wolf(&Lorenz::default(), &[1.0, 1.0, 1.0], &o).unwrap(),
        lle_benettin(&Lorenz::default(), &[1.0, 1.0, 1.0], &o).unwrap(),
    ] {
        assert!((e.lle - 0.906).abs() < 0.05, "{}", e.lle);
        assert!(e.is_significant(3.0));
    }
}

#[test]
fn damped_and_antidamped_cavities_mirror_each_other() {
    let o = LleOptions::new(40.0, 0.5, 0.01);
    let gamma = 0.5;
    let damped = LinearCavity::new(2.0, gamma);
    let anti = LinearCavity::new(2.0, -gamma);
    for (a, b) in [
        (
            lle_wolf(&damped, &[1.0, 0.0], &o).unwrap(),
            lle_wolf(&anti, &[1.0, 0.0], &o).unwrap(),
        ),
        (
            lle_benettin(&damped, &[1.0, 0.0], &o).unwrap(),
            lle_benettin(&anti, &[1.0, 0.0], &o).unwrap(),
        ),
    ] {
        assert!((a.lle + gamma / 2.0).abs() < 0.05 * gamma / 2.0, "{}", a.lle);
        assert!(b.lle > 0.0);
        assert!(
            (a.lle + b.lle).abs() < 0.05 * a.lle.abs(),
            "{} vs {}",
            a.lle,
            b.lle
        );
    }
}

fn weak_channels(c: &ScenarioConfig) -> Vec<usize> {
    let Analysis::Lle { channels, .. } = &c.analyses[0] else {
        panic!("first analysis of {} is not an exponent", c.name)
    };
    let names = c.setup().channel_names();
    channels
        .iter()
        .map(|ch| names.iter().position(|n| n == ch).unwrap())
        .collect()
}

fn assert_stable(a: &LleEstimate, b: &LleEstimate, what: &str) {
    assert_eq!(a.lle.signum(), b.lle.signum(), "{what}");
    let tol = 2.0 * a.stderr.max(b.stderr);
    assert!((a.lle - b.lle).abs() < tol, "{what}: {} vs {}", a.lle, b.lle);
}

fn sign_stability(name: &str, t_total: f64) {
    let c: ScenarioConfig = preset(name).unwrap();
    let m = Model::new(c.params.clone());
    let base = LleOptions::for_params(&c.params, t_total).with_channels(weak_channels(&c));
    let reference = lle_wolf(&m, c.initial.as_slice(), &base).unwrap();
    assert!(reference.is_significant(3.0), "{name}: {reference:?}");

    let mut half = base.clone();
    half.dt /= 2.0;
    assert_stable(
        &reference,
        &lle_wolf(&m, c.initial.as_slice(), &half).unwrap(),
        "dt/2",
    );
    for d0 in [1e-6, 1e-10] {
        let o = base.clone().with_d0(d0);
        assert_stable(&reference, &lle_wolf(&m, c.initial.as_slice(), &o).unwrap(), "d0");
    }
    // a second start on the attractor
    let plan = IntegrationPlan::new(0.0, 137.0, base.dt);
    let other = integrate(&m, c.initial.as_slice(), &plan).unwrap();
    let other = other.last_state().unwrap();
    assert_stable(
        &reference,
        &lle_wolf(&m, other, &base).unwrap(),
        "second initial condition",
    );
}

#[test]
fn chaotic_sign_is_stable() {
    sign_stability("fig3b", 500.0);
}

#[test]
fn regular_sign_is_stable() {
    sign_stability("fig3a", 3000.0);
}
