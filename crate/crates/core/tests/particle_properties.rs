use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topo_align::kernel::KernelSpec;
use topo_align::rank::Configuration;
use topo_align::sim::{
    generator_exact, sample_initial, Geometry, InitialLaw, PositionComponent, RngStream, SimState,
};

fn distinct(cfg: &Configuration) -> BTreeSet<Vec<u64>> {
    (0..cfg.len())
        .map(|i| cfg.velocity(i).iter().map(|v| v.to_bits()).collect())
        .collect()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn free_flight_wraps_around_the_torus() {
    let mut cfg = Configuration::new(1, 1.0, vec![0.9, 0.2], vec![1.0, 0.0]).unwrap();
    cfg.transport(0.2);
    assert!((cfg.position(0)[0] - 0.1).abs() < 1e-12);
    assert_eq!(cfg.position(1)[0], 0.2);
}

#[test]
fn jumps_only_copy_existing_velocities() {
    let spec = KernelSpec::paper_example(20);
    for dim in 1..=3 {
        let geometry = Geometry {
            dim,
            ..Geometry::default()
        };
        let mut state = sample_initial(
            12,
            InitialLaw::UniformXGaussV,
            geometry,
            RngStream::new(5, dim as u64),
        )
        .unwrap();
        let mut previous = distinct(state.cfg());
        for count in 1..=400u64 {
            let before = state.cfg().clone();
            state.advance_to_next_event();
            let moved = state.cfg().clone();
            assert_eq!(moved.velocities(), before.velocities());
            let event = state.execute_jump(&spec).unwrap();
            assert_ne!(event.chooser, event.partner);
            assert_eq!(state.jump_count(), count);
            assert_eq!(state.cfg().positions(), moved.positions());
            assert_eq!(
                state.cfg().velocity(event.chooser),
                moved.velocity(event.partner)
            );
            for i in (0..12).filter(|&i| i != event.chooser) {
                assert_eq!(state.cfg().velocity(i), moved.velocity(i));
            }
            assert!(state
                .cfg()
                .positions()
                .iter()
                .all(|&x| (0.0..1.0).contains(&x)));
            let now = distinct(state.cfg());
            assert!(now.is_subset(&previous));
            previous = now;
        }
    }
}

#[test]
fn consensus_is_absorbing() {
    let spec = KernelSpec::uniform();
    for r in 0..200 {
        let cfg = Configuration::new(1, 1.0, vec![0.1, 0.6], vec![-1.0, 1.0]).unwrap();
        let mut state = SimState::new(cfg, RngStream::new(11, r));
        let out = state.run(&spec, 10.0, &[10.0]).unwrap();
        let first = out.events.first().expect("at least one event by t = 10");
        assert_eq!(state.cfg().velocity(0), state.cfg().velocity(1));
        for e in &out.events {
            assert_eq!(e.velocity, first.velocity);
        }
    }
}

#[test]
fn jump_count_is_poisson() {
    let spec = KernelSpec::uniform();
    let n = 10;
    let geometry = Geometry::default();
    let counts: Vec<f64> = (0..10_000)
        .map(|r| {
            let mut state = sample_initial(
                n,
                InitialLaw::UniformXTwoPointV,
                geometry,
                RngStream::new(13, r),
            )
            .unwrap();
            state.run_quiet(&spec, 1.0, &[]).unwrap();
            state.jump_count() as f64
        })
        .collect();
    let (mean, se) = mean_and_se(&counts);
    assert!(
        (mean - n as f64).abs() <= 3.0 * (n as f64 / counts.len() as f64).sqrt(),
        "mean jumps {mean}"
    );
    let var = se * se * counts.len() as f64;
    assert!((var / n as f64 - 1.0).abs() < 0.1, "variance {var}");
}

#[test]
fn tagged_particle_looks_like_a_random_particle() {
    let spec = KernelSpec::paper_example(20);
    let geometry = Geometry::default();
    let mut pick = ChaCha8Rng::seed_from_u64(17);
    let (mut tagged, mut random) = (Vec::new(), Vec::new());
    for r in 0..4000 {
        let mut state = sample_initial(
            20,
            InitialLaw::UniformXTwoPointV,
            geometry,
            RngStream::new(17, r),
        )
        .unwrap();
        state.run_quiet(&spec, 0.5, &[]).unwrap();
        let probe = |i: usize| {
            let (x, v) = (state.cfg().position(i)[0], state.cfg().velocity(i)[0]);
            v + (2.0 * std::f64::consts::PI * x).sin()
        };
        tagged.push(probe(0));
        random.push(probe(pick.random_range(0..20)));
    }
    let (a, sa) = mean_and_se(&tagged);
    let (b, sb) = mean_and_se(&random);
    assert!(
        (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(),
        "{a} vs {b}"
    );
}

#[test]
fn position_observable_is_pure_transport() {
    let cfg = Configuration::new(1, 1.0, vec![0.3, 0.8, 0.55], vec![0.7, -1.0, 0.2]).unwrap();
    for spec in [KernelSpec::uniform(), KernelSpec::linear()] {
        let phi = PositionComponent {
            particle: 0,
            component: 0,
        };
        let exact = generator_exact(&phi, &cfg, &spec).unwrap();
        assert!((exact - 0.7).abs() < 1e-6, "{exact}");
    }
}

#[test]
fn identical_seeds_give_identical_logs() {
    let spec = KernelSpec::linear();
    let geometry = Geometry {
        dim: 2,
        ..Geometry::default()
    };
    let run = || {
        let mut state = sample_initial(
            30,
            InitialLaw::UniformXUniformV,
            geometry,
            RngStream::new(19, 4),
        )
        .unwrap();
        let out = state.run(&spec, 2.0, &[0.5, 1.0]).unwrap();
        (state, out)
    };
    let (s1, o1) = run();
    let (s2, o2) = run();
    assert_eq!(s1, s2);
    assert_eq!(o1.events, o2.events);
    assert_eq!(o1.snapshots, o2.snapshots);
}
