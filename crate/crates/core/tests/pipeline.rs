use erwlab::exact::{exact_tan_probability, mass_grid_bracket};
use erwlab::experiments::{run_experiment, Cell, ExperimentConfig};
use erwlab::tan::{brute_force_tan_set, tan_probability_fast, tan_probability_mc, TanTracker};
use erwlab::{BiasParams, RngStream, Stepper, WalkState};

#[test]
fn online_tan_points_of_an_excited_walk() {
    let bias = BiasParams::new(0.7, 2).unwrap();
    for seed in 0..5 {
        let mut walk = WalkState::at_origin(bias).with_trace();
        let mut rng = RngStream::new(seed, 0);
        let mut tracker = TanTracker::recording();
        tracker.observe(0, 0);
        for _ in 0..3000 {
            walk.step(Stepper::Excited, &mut rng);
            tracker.observe_point(&walk.point());
        }
        let online: std::collections::BTreeSet<_> = tracker.tan_points().unwrap().iter().cloned().collect();
        assert_eq!(online, brute_force_tan_set(walk.trace().unwrap()));
    }
}

#[test]
fn capped_direct_estimate_sits_in_the_exact_bracket() {
    let n = 400;
    for (x, y) in [(-1, 1), (2, -2), (-3, 0)] {
        let b = exact_tan_probability(x, y, n).unwrap();
        let forward = mass_grid_bracket(x, y, n).unwrap();
        assert!((b.lower - forward.lower).abs() < 1e-9 && (b.upper - forward.upper).abs() < 1e-9);
        let e = tan_probability_mc(x, y, 40_000, n as u64, 17).unwrap();
        let slack = 4.0 * e.ci_halfwidth;
        assert!(
            e.p_hat >= b.lower - slack && e.p_hat <= b.upper + slack,
            "({x},{y}): {} vs [{}, {}]",
            e.p_hat,
            b.lower,
            b.upper
        );
    }
}

#[test]
fn mirrored_offsets_agree() {
    let a = tan_probability_fast(-6, 4, 40_000, 1 << 20, 1).unwrap();
    let b = tan_probability_fast(-6, -4, 40_000, 1 << 20, 2).unwrap();
    let tol = 4.0 * (a.ci_halfwidth.powi(2) + b.ci_halfwidth.powi(2)).sqrt();
    assert!((a.p_hat - b.p_hat).abs() < tol, "{} vs {}", a.p_hat, b.p_hat);
}

fn column(rows: &[Vec<Cell>], i: usize) -> Vec<f64> {
    rows.iter()
        .map(|r| match &r[i] {
            Cell::Int(v) => *v as f64,
            Cell::Float(v) => *v,
            Cell::Bool(b) => f64::from(u8::from(*b)),
            other => panic!("unexpected cell {other:?}"),
        })
        .collect()
}

#[test]
fn summaries_agree_with_trial_tables() {
    let cfg = ExperimentConfig {
        name: "r".into(),
        kind: "recurrence1d".into(),
        p: Some(0.8),
        step_cap: Some(20_000),
        trials: 300,
        ..Default::default()
    };
    let out = run_experiment(&cfg, 4, 2).unwrap();
    let returned = column(&out.table.rows, 1);
    let frac = returned.iter().sum::<f64>() / returned.len() as f64;
    assert!((out.summary["return_fraction"].as_f64().unwrap() - frac).abs() < 1e-12);

    let cfg = ExperimentConfig {
        name: "b".into(),
        kind: "band".into(),
        h: Some(16),
        trials: 200,
        ..Default::default()
    };
    let out = run_experiment(&cfg, 4, 2).unwrap();
    let counts = column(&out.table.rows, 2);
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let reported = out.summary["heights"][0]["summary"]["mean"].as_f64().unwrap();
    assert!((reported - mean).abs() < 1e-9);

    let cfg = ExperimentConfig {
        name: "s".into(),
        kind: "speed".into(),
        dim: Some(5),
        epsilon: Some(1.0),
        n: Some(5000),
        trials: 50,
        ..Default::default()
    };
    let out = run_experiment(&cfg, 4, 3).unwrap();
    let speeds = column(&out.table.rows, 4);
    assert!(speeds.iter().all(|&v| (-1.0..=1.0).contains(&v)));
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    assert!(mean > 0.0);
}
