//! Round-trips of the documented file formats.

use needs_core::empirical::{Observation, ZoneScenario};
use needs_core::io;
use needs_core::synth;
use needs_core::{ActivityPattern, Horizon, ScenarioInputs};

#[test]
fn scenario_inputs_json_roundtrip() {
    let inputs = synth::benchmark_inputs();
    let json = io::to_json_pretty(&inputs);
    let back: ScenarioInputs = io::from_json(&json).unwrap();
    assert_eq!(inputs, back);
    back.validate(&Horizon::week()).unwrap();
}

#[test]
fn scenario_inputs_csv_bundle_roundtrip() {
    let dir = std::env::temp_dir().join(format!("needs-scenario-{}", std::process::id()));
    let mut inputs = synth::benchmark_inputs();
    inputs.size_measures = vec![vec![80.0, 1.2]];
    inputs.measure_names = vec!["retail".into(), "area".into()];
    io::write_scenario_csv(&dir, &inputs).unwrap();
    let back = io::read_scenario_csv(&dir).unwrap();
    assert_eq!(inputs.locations, back.locations);
    assert_eq!(inputs.free_time, back.free_time);
    assert_eq!(inputs.attractiveness, back.attractiveness);
    assert_eq!(inputs.travel_time, back.travel_time);
    assert_eq!(inputs.travel_cost, back.travel_cost);
    assert_eq!(inputs.size_measures, back.size_measures);
    assert_eq!(inputs.measure_names, back.measure_names);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn observation_bundle_roundtrip() {
    let dir = std::env::temp_dir().join(format!("needs-obs-{}", std::process::id()));
    let scenario = synth::generate_scenario(3, 7);
    let persons = synth::generate_population(15, &scenario, &Default::default(), 7);
    let out = synth::simulate_patterns(&persons, &scenario, &synth::grocery_population(), &Default::default());
    io::write_observations(&dir, &out.observations).unwrap();
    let back = io::read_observations(&dir).unwrap();
    assert_eq!(out.observations, back);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn zone_scenario_json_roundtrip() {
    let scenario = synth::generate_scenario(4, 9);
    let json = io::to_json_pretty(&scenario);
    let back: ZoneScenario = io::from_json(&json).unwrap();
    assert_eq!(scenario, back);
}

#[test]
fn observation_json_roundtrip() {
    let obs = Observation {
        person: 3,
        pattern: ActivityPattern {
            delta: vec![false, true, false, false, false, false, true],
            durations: vec![0.0, 1.25, 0.0, 0.0, 0.0, 0.0, 2.5],
            locations: vec![1; 7],
        },
        home_zone: 0,
        ft_weekday: 2.4,
        ft_weekend: 5.1,
    };
    let json = io::to_json_pretty(&obs);
    let back: Observation = io::from_json(&json).unwrap();
    assert_eq!(obs, back);
}
