//! Integration tests of the ring-road integrator: determinism, conservation,
//! scheme convergence, translation invariance, and the stability bracket.

use laneflow_core::model::ModelParams;
use laneflow_core::sim::{
    self, NeighborMode, PerturbationSpec, RingConfig, RunOptions, Scheme,
};

fn params(alpha: f64, p: f64, q: f64, l1: f64, l2: f64) -> ModelParams {
    ModelParams {
        alpha,
        p,
        q,
        lambda1: l1,
        lambda2: l2,
        v_max: 4.0,
        h_c: 7.0,
        l_v: 5.0,
        d: 10.0,
    }
}

fn options(duration: f64, scheme: Scheme) -> RunOptions {
    RunOptions {
        dt: 0.1,
        scheme,
        duration,
        sample_every: 1.0,
        mode: NeighborMode::Nearest,
    }
}

#[test]
fn identical_runs_are_bit_identical() {
    let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
    let a = sim::run(&sim::reference_config(), &pr, &options(50.0, Scheme::Euler)).unwrap();
    let b = sim::run(&sim::reference_config(), &pr, &options(50.0, Scheme::Euler)).unwrap();
    assert_eq!(a, b);
    let c = sim::run(&sim::reference_config(), &pr, &options(50.0, Scheme::Rk4)).unwrap();
    let d = sim::run(&sim::reference_config(), &pr, &options(50.0, Scheme::Rk4)).unwrap();
    assert_eq!(c, d);
}

#[test]
fn headway_sum_equals_circumference_at_every_sample() {
    let pr = params(2.85, 0.8, 0.2, 0.16, 0.04);
    for mode in [NeighborMode::Nearest, NeighborMode::Paired] {
        let record = sim::run(
            &sim::reference_config(),
            &pr,
            &RunOptions { mode, ..options(100.0, Scheme::Euler) },
        )
        .unwrap();
        for lane in 0..2 {
            let c = record.lanes[lane].circumference;
            for (i, row) in record.lanes[lane].headways.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                assert!(
                    (sum - c).abs() < 1e-9,
                    "lane {} sample {}: sum {} vs circumference {}",
                    lane,
                    i,
                    sum,
                    c
                );
                // no overtaking: every headway stays positive
                assert!(row.iter().all(|&h| h > 0.0));
            }
        }
    }
}

#[test]
fn uniform_flow_stays_fixed_for_ten_thousand_steps() {
    // run at a stable operating point so float noise cannot be amplified
    let pr = params(3.8, 1.0, 0.0, 0.2, 0.0);
    let config = RingConfig {
        n_vehicles: 100,
        lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
    };
    for scheme in [Scheme::Euler, Scheme::Rk4] {
        let record = sim::run(&config, &pr, &options(1000.0, scheme)).unwrap();
        let drift = record
            .lanes
            .iter()
            .flat_map(|lane| lane.headways.iter())
            .flat_map(|row| row.iter())
            .map(|&h| (h - 7.0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-9, "{scheme}: headway drift {drift}");
    }
}

#[test]
fn translation_invariance_up_to_rotation() {
    let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
    let shift = 123.456;
    let mut base = sim::initialize(&sim::reference_config(), &pr).unwrap();
    let mut shifted = base.clone();
    for lane in 0..2 {
        for x in &mut shifted.lanes[lane].positions {
            *x += shift;
        }
    }
    for _ in 0..1000 {
        sim::step(&mut base, &pr, 0.1, Scheme::Euler, NeighborMode::Nearest).unwrap();
        sim::step(&mut shifted, &pr, 0.1, Scheme::Euler, NeighborMode::Nearest).unwrap();
    }
    for lane in 0..2 {
        let hb = base.lanes[lane].headways();
        let hs = shifted.lanes[lane].headways();
        for (a, b) in hb.iter().zip(hs.iter()) {
            assert!((a - b).abs() < 1e-9, "headway diverged: {} vs {}", a, b);
        }
        for (a, b) in base.lanes[lane]
            .positions
            .iter()
            .zip(shifted.lanes[lane].positions.iter())
        {
            assert!((b - a - shift).abs() < 1e-8);
        }
    }
}

#[test]
fn euler_rk4_gap_shrinks_linearly_with_dt() {
    let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
    let gap_at = |dt: f64| -> f64 {
        let opts = |scheme| RunOptions {
            dt,
            scheme,
            duration: 10.0,
            sample_every: 10.0,
            mode: NeighborMode::Nearest,
        };
        let e = sim::run(&sim::reference_config(), &pr, &opts(Scheme::Euler)).unwrap();
        let r = sim::run(&sim::reference_config(), &pr, &opts(Scheme::Rk4)).unwrap();
        let he = e.lanes[0].headways.last().unwrap();
        let hr = r.lanes[0].headways.last().unwrap();
        he.iter()
            .zip(hr.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let g1 = gap_at(0.1);
    let g2 = gap_at(0.05);
    let ratio = g1 / g2;
    assert!(
        (1.6..2.6).contains(&ratio),
        "halving dt should roughly halve the gap: {} / {} = {}",
        g1,
        g2,
        ratio
    );
}

#[test]
fn stability_bracket_around_neutral_sensitivity() {
    // a_c = 3.6 for p=1, q=0, lambda1=0.2: the reference perturbation must die
    // out above it and grow below it
    let grown = |a: f64| -> [bool; 2] {
        let pr = params(a, 1.0, 0.0, 0.2, 0.0);
        let record =
            sim::run(&sim::reference_config(), &pr, &options(2000.0, Scheme::Euler)).unwrap();
        let initial = sim::measure_amplitude(&record, (0.0, 0.0)).unwrap();
        let fin = sim::measure_amplitude(&record, (2000.0, 2000.0)).unwrap();
        [fin[0] > initial[0], fin[1] > initial[1]]
    };
    assert_eq!(grown(3.8), [false, false], "a = 3.8 > a_c should decay");
    assert_eq!(grown(3.4), [true, true], "a = 3.4 < a_c should grow");
}
