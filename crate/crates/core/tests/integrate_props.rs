mod common;

use afmi_core::equilibria::EquilibriumKind;
use afmi_core::integrate::{
    classify_omega_limit, flow_to, integrate, AttractorId, Direction, IntegratorSettings,
};
use afmi_core::manifolds::{trace_manifold, Branch, ManifoldSettings};
use afmi_core::model::State;
use common::*;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

#[test]
fn halving_tolerance_converges() {
    let base = IntegratorSettings::default();
    let fine = base.with_tolerance_scale(0.5);
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let p = pstar(rng.random_range(1.0..2.45));
        let s0 = State::new(rng.random_range(0.1..15.0), rng.random_range(0.1..10.0));
        let a = flow_to(&p, s0, 50.0, Direction::Forward, &base).unwrap();
        let b = flow_to(&p, s0, 50.0, Direction::Forward, &fine).unwrap();
        let bound = 10.0 * base.rel_tol * b.norm();
        assert!(
            a.dist(&b) < bound,
            "xi {} from {s0:?}: {} >= {bound}",
            p.xi(),
            a.dist(&b)
        );
    }
}

#[test]
fn samples_stay_in_quadrant_and_clipping_is_rare() {
    let set = IntegratorSettings::default();
    let mut rng = StdRng::seed_from_u64(13);
    let (mut clips, mut steps) = (0usize, 0usize);
    for _ in 0..50 {
        let p = pstar(rng.random_range(0.5..2.48));
        let s0 = State::new(rng.random_range(0.0..15.0), rng.random_range(0.0..10.0));
        let tr = integrate(&p, s0, &set).unwrap();
        for w in tr.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        for s in &tr.samples {
            assert!(
                s.state.x >= -set.abs_tol && s.state.y >= -set.abs_tol,
                "{s:?}"
            );
        }
        clips += tr.clip_events;
        steps += tr.steps;
    }
    assert!(
        (clips as f64) < 1e-3 * steps as f64,
        "{clips} clips in {steps} steps"
    );
}

#[test]
fn classification_is_stable_under_longer_horizon() {
    let p = pstar(2.2);
    let e1 = interior(&p, EquilibriumKind::InteriorLow);
    let ms = ManifoldSettings::default();
    let ws: Vec<_> = [Branch::StablePlus, Branch::StableMinus]
        .iter()
        .map(|b| trace_manifold(&p, &e1, *b, &ms).unwrap())
        .collect();
    let short = IntegratorSettings::default();
    let long = IntegratorSettings {
        max_time: 2.0 * short.max_time,
        ..short
    };
    let mut rng = StdRng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 30 {
        let s0 = State::new(rng.random_range(0.1..15.0), rng.random_range(0.1..10.0));
        if ws.iter().any(|w| w.distance_to(s0) <= 1e-2) {
            continue;
        }
        let a = classify_omega_limit(&p, s0, &short).unwrap();
        let b = classify_omega_limit(&p, s0, &long).unwrap();
        assert_eq!(a, b, "{s0:?}");
        assert_ne!(a, AttractorId::Unknown, "{s0:?}");
        checked += 1;
    }
}
