use hypex_core::config::ExperimentConfig;
use hypex_core::experiment::run_experiment;
use hypex_core::recipes::recipe;
use hypex_core::rng::stream;
use hypex_core::systems::trajectory_io::{read_trajectory, write_trajectory};
use hypex_core::systems::{orbit, realization_series, StateVector};

fn shrink(mut c: ExperimentConfig) -> ExperimentConfig {
    c.n_realizations = 2;
    c.n = c.n.min(20_000);
    if let Some(axis) = c.sweep.first_mut() {
        axis.values.truncate(2);
    }
    c.sweep.truncate(1);
    c
}

#[test]
fn toml_and_json_configs_give_identical_csv() {
    for name in ["cm1b", "ei-a", "bs-a", "billiard"] {
        let c = shrink(recipe(name).unwrap());
        let json = serde_json::to_string(&c).unwrap();
        let a = run_experiment(&c).unwrap().csv_string();
        let b = run_experiment(&ExperimentConfig::from_json_str(&json).unwrap()).unwrap().csv_string();
        assert_eq!(a, b, "{name}");
        assert_eq!(a.lines().filter(|l| l.starts_with("estimate,")).count(), 2 * c.sweep.first().map_or(1, |s| s.values.len()));
    }
}

#[test]
fn seed_changes_the_output() {
    let c = shrink(recipe("cm1a").unwrap());
    let mut d = c.clone();
    d.seed += 1;
    assert_ne!(run_experiment(&c).unwrap().csv_string(), run_experiment(&d).unwrap().csv_string());
}

#[test]
fn trajectory_file_matches_series() {
    let c = shrink(recipe("bs-b").unwrap());
    let pc = c.sweep_points().unwrap().remove(0).1;
    let built = pc.compile().unwrap();
    let series = realization_series(&built.system, &built.observable, 500, 10, &mut stream(3, 0)).unwrap();
    let mut rng = stream(3, 0);
    let mut x = built.system.sample_invariant(&mut rng);
    for _ in 0..10 {
        built.system.step(&mut x, &mut rng).unwrap();
    }
    let t = orbit(&built.system, x, 500, &mut rng).unwrap();
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("bs-b.traj");
    write_trajectory(&mut std::fs::File::create(&path).unwrap(), &t).unwrap();
    let back = read_trajectory(&mut std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, t);
    for (i, phi) in series.iter().enumerate() {
        let row = back.row(i).to_vec();
        let s = StateVector::Torus(hypex_core::geometry::TorusPoint::new(row).unwrap());
        assert_eq!(built.observable.eval(&s), *phi, "row {i}");
    }
}
