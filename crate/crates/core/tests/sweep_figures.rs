use pcsvs_core::sweep::{figure, run_sweep, Cell, EtaOptimizer, EtaSearch, SweepSpec, FIGURE_IDS};
use pcsvs_core::{Error, SystemParams};

fn first_phase_below_unit_eta(search: EtaSearch) -> f64 {
    let opt = EtaOptimizer::new(&SystemParams::new(1.0, 0.9, 1.0, 1).unwrap(), search).unwrap();
    (1..=100)
        .map(|k| k as f64 / 100.0)
        .find(|&phi| opt.optimize(phi).unwrap().eta_opt < 1.0 - 1e-4)
        .unwrap()
}

#[test]
fn coarse_grid_moves_off_unit_eta_near_half() {
    let phi = first_phase_below_unit_eta(EtaSearch::coarse());
    assert!((0.46..=0.50).contains(&phi), "transition at {phi}");
}

#[test]
fn fine_grid_moves_off_unit_eta_earlier() {
    let phi = first_phase_below_unit_eta(EtaSearch::default());
    assert!((0.40..=0.43).contains(&phi), "transition at {phi}");
}

#[test]
fn eta_opt_is_symmetric_in_phase() {
    let opt = EtaOptimizer::new(&SystemParams::new(1.0, 0.9, 1.0, 2).unwrap(), EtaSearch::default()).unwrap();
    for phi in [0.2, 0.7, 1.3] {
        let (a, b) = (opt.optimize(phi).unwrap(), opt.optimize(-phi).unwrap());
        assert!((a.eta_opt - b.eta_opt).abs() < 1e-9, "phi={phi}");
    }
}

#[test]
fn every_figure_id_has_a_definition() {
    for id in ["2a", "4b", "9b", "16b"] {
        assert!(FIGURE_IDS.contains(&id));
    }
    assert!(matches!(figure("99z", false), Err(Error::Config(_))));
}

#[test]
fn figure_csv_is_tidy() {
    let data = figure("9b", false).unwrap();
    let csv = data.to_csv();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 4);
    assert!(header.contains(",curve,"));
    assert!(header.ends_with(",status"));
    for line in lines {
        assert_eq!(line.split(',').count(), 4, "{line}");
    }
    let sidecar = data.sidecar();
    assert_eq!(sidecar["figure"], "9b");
}

#[test]
fn figure_crosscheck_passes_for_ideal_panel() {
    let data = figure("2a", true).unwrap();
    let check = data.crosscheck.as_ref().unwrap();
    assert!(!check.points.is_empty() && check.points.len() <= 25);
    assert!(check.passed, "max rel {}", check.max_rel);
}

#[test]
fn two_axis_sweep_is_ordered_last_axis_fastest() {
    let spec = SweepSpec::from_json(
        r#"{"fixed": {"alpha": 0.5, "m": 1, "phi": 0.4},
            "swept": [{"name": "eta", "start": 0.2, "stop": 0.6, "steps": 3},
                      {"name": "r", "start": 0.3, "stop": 0.5, "steps": 2}],
            "outputs": ["parity", "qcrb"]}"#,
    )
    .unwrap();
    let rep = run_sweep(&spec).unwrap();
    let coords: Vec<(f64, f64)> = rep
        .table
        .rows
        .iter()
        .map(|r| (r[0].as_f64().unwrap(), r[1].as_f64().unwrap()))
        .collect();
    assert_eq!(coords.len(), 6);
    assert_eq!(coords[0], (0.2, 0.3));
    assert_eq!(coords[1], (0.2, 0.5));
    assert!((coords[2].0 - 0.4).abs() < 1e-15 && coords[2].1 == 0.3);
    assert!(rep.table.rows.iter().all(|r| r[4] == Cell::from("")));
}

#[test]
fn sweep_spec_rejects_unknown_fields_and_bad_axes() {
    let unknown = r#"{"fixed": {"alpha": 0.5, "r": 0.4, "m": 1}, "swept": [{"name": "eta", "start": 0.1, "stop": 0.5, "steps": 3}],
                      "outputs": ["pm"], "colour": "red"}"#;
    assert!(SweepSpec::from_json(unknown).is_err());
    let clash = r#"{"fixed": {"alpha": 0.5, "r": 0.4, "m": 1, "eta": 0.3}, "swept": [{"name": "eta", "start": 0.1, "stop": 0.5, "steps": 3}],
                    "outputs": ["pm"]}"#;
    assert!(SweepSpec::from_json(clash).is_err());
    let no_phase = r#"{"fixed": {"alpha": 0.5, "r": 0.4, "m": 1}, "swept": [{"name": "eta", "start": 0.1, "stop": 0.5, "steps": 3}],
                       "outputs": ["parity"]}"#;
    assert!(SweepSpec::from_json(no_phase).is_err());
}
