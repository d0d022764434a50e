use nu_walk::lattice::mode_wavenumber;
use nu_walk::mixing::rotation_2flavor;
use nu_walk::oracle::{
    lattice_dispersion, momentum_flavor_series, physical_phase, resonance_density, ExperimentSpec,
};
use nu_walk::scenarios::{
    compare_series, fit_sinusoid, map_experiment, momentum_series, parse_config, run_compare,
    run_levels, run_matter, run_scenario, run_vacuum, OutputFormat, ScenarioConfig, ScenarioError,
    ScenarioKind,
};

fn config(text: &str) -> ScenarioConfig {
    parse_config(text.as_bytes()).unwrap()
}

fn vacuum(
    n_sites: usize,
    mode: usize,
    steps: usize,
    thetas: &str,
    angles: &str,
    stride: usize,
) -> ScenarioConfig {
    config(&format!(
        r#"{{"scenario": "vacuum", "lattice": {{"n_sites": {n_sites}, "mode_index": {mode}, "steps": {steps}}},
            "coins": {{"epsilon": 1.0, "thetas": {thetas}}}, "angles": {angles},
            "output": {{"stride": {stride}}}}}"#
    ))
}

fn assert_rows_normalized(series: &nu_walk::scenarios::ProbabilitySeries) {
    for row in &series.rows {
        assert!((row.norm - 1.0).abs() < 1e-10);
        assert!((row.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn unmixed_vacuum_keeps_initial_flavor() {
    let series = run_vacuum(&vacuum(32, 3, 200, "[0.1, 0.4]", r#"{"phi12": 0.0}"#, 1)).unwrap();
    assert_eq!(series.rows.len(), 201);
    for row in &series.rows {
        assert!((row.probabilities[0] - 1.0).abs() < 1e-12);
        assert!(row.probabilities[1].abs() < 1e-12);
    }
}

#[test]
fn vacuum_frequency_matches_dispersion() {
    let (n, mode) = (64, 8);
    let kappa = mode_wavenumber(n, mode);
    let expected = lattice_dispersion(0.2, kappa) - lattice_dispersion(0.1, kappa);
    let steps = (200.0 * std::f64::consts::TAU / expected) as usize;
    let series = run_vacuum(&vacuum(
        n,
        mode,
        steps,
        "[0.1, 0.2]",
        r#"{"phi12": 0.34}"#,
        1,
    ))
    .unwrap();
    let fit = fit_sinusoid(&series.column(1)).unwrap();
    let rel = (fit.omega - expected).abs() / expected;
    assert!(rel < 1e-10, "relative frequency error {rel:e}");
    assert!((fit.amplitude - 0.5 * (0.68f64).sin().powi(2)).abs() < 0.01);
}

#[test]
fn three_flavor_runs_stay_normalized() {
    for steps in [200, 1000] {
        let cfg = vacuum(
            64,
            8,
            steps,
            "[0.01, 0.0557, 0.5684]",
            r#"{"e_mu": 0.34, "e_tau": 0.54, "mu_tau": 0.45}"#,
            1,
        );
        let series = run_vacuum(&cfg).unwrap();
        assert_eq!(series.n_flavors(), 3);
        assert_rows_normalized(&series);
        // Several frequencies: every flavor is visited.
        for f in 1..3 {
            assert!(series.column(f).iter().cloned().fold(0.0, f64::max) > 0.05);
        }
    }
}

#[test]
fn stride_only_thins_the_output() {
    let every = run_vacuum(&vacuum(32, 4, 100, "[0.1, 0.2]", r#"{"phi12": 0.5}"#, 1)).unwrap();
    let thinned = run_vacuum(&vacuum(32, 4, 100, "[0.1, 0.2]", r#"{"phi12": 0.5}"#, 7)).unwrap();
    assert_eq!(thinned.rows.len(), 15);
    for row in &thinned.rows {
        assert_eq!(row, &every.rows[row.step]);
    }
}

fn matter_config(profile: &str, extra: &str) -> ScenarioConfig {
    config(&format!(
        r#"{{"scenario": "matter", "lattice": {{"n_sites": 48, "mode_index": 5, "steps": 300}},
            "coins": {{"epsilon": 1.0, "thetas": [0.1, 0.2]}}, "angles": {{"phi12": 0.34}},
            "matter": {profile} {extra}}}"#
    ))
}

#[test]
fn zero_density_matches_vacuum() {
    let matter = run_matter(&matter_config(r#"{"kind": "uniform", "rho": 0.0}"#, "")).unwrap();
    let vac = run_vacuum(&vacuum(48, 5, 300, "[0.1, 0.2]", r#"{"phi12": 0.34}"#, 1)).unwrap();
    assert_eq!(matter.rows, vac.rows);
}

#[test]
fn uniform_density_matches_momentum_evolution() {
    let cfg = matter_config(r#"{"kind": "uniform", "rho": 0.04}"#, "");
    let series = run_matter(&cfg).unwrap();
    let kappa = mode_wavenumber(48, 5);
    let expected = momentum_flavor_series(
        kappa,
        cfg.coins().unwrap(),
        &rotation_2flavor(0.34),
        Some(0.04),
        0,
        nu_walk::lattice::Spin::Up,
        300,
    )
    .unwrap();
    for (row, probs) in series.rows.iter().zip(&expected) {
        for (a, b) in row.probabilities.iter().zip(probs) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    // Uniform matter: no resonance crossing along a plane wave.
    let oracle = series.oracle.unwrap();
    assert_eq!(oracle.gamma_r, None);
}

#[test]
fn bundled_resonance_packet_follows_the_asymptotic_formula() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/scenarios/matter_resonance_packet.json"
    );
    let cfg = config(&std::fs::read_to_string(path).unwrap());
    let series = run_matter(&cfg).unwrap();
    assert_rows_normalized(&series);
    let oracle = series.oracle.unwrap();
    let gamma = oracle.gamma_r.unwrap();
    assert!(gamma <= 0.1, "γ_r = {gamma}");
    let predicted = oracle.asymptotic_transition.unwrap();
    let observed = oracle.late_mean_transition.unwrap();
    assert!(
        (predicted - observed).abs() < 0.05,
        "{observed} vs {predicted}"
    );
    // The packet leaves the ramp into vacuum.
    assert!((oracle.phi_final.unwrap() - 0.34).abs() < 1e-12);
}

#[test]
fn antineutrino_branch_sees_no_resonance() {
    let cfg = matter_config(
        r#"{"kind": "linear", "slope": 0.0001, "intercept": 0.0}"#,
        r#", "initial": {"flavor": "e", "spin": "down", "packet": {"center": 10.0, "width": 3.0}}"#,
    );
    let oracle = run_matter(&cfg).unwrap().oracle.unwrap();
    assert_eq!(oracle.gamma_r, None);
    assert!(oracle.phi_initial.unwrap() < 0.34);
}

fn levels(phi: f64, profile: &str, stride: usize) -> ScenarioConfig {
    config(&format!(
        r#"{{"scenario": "levels", "lattice": {{"n_sites": 200, "mode_index": 32}},
            "coins": {{"epsilon": 1.0, "thetas": [0.1, 0.2]}}, "angles": {{"phi12": {phi}}},
            "matter": {profile}, "output": {{"stride": {stride}}}}}"#
    ))
}

#[test]
fn vacuum_levels_are_constant() {
    let table = run_levels(&levels(0.12, r#"{"kind": "uniform", "rho": 0.0}"#, 1)).unwrap();
    assert_eq!(table.rows.len(), 200);
    for row in &table.rows {
        assert_eq!(
            (row.e1, row.e2, row.gap),
            (table.rows[0].e1, table.rows[0].e2, table.rows[0].gap)
        );
    }
}

#[test]
fn linear_profile_has_single_gap_minimum_at_resonance() {
    let slope = 1e-4;
    let table = run_levels(&levels(
        0.12,
        &format!(r#"{{"kind": "linear", "slope": {slope}, "intercept": 0.0}}"#),
        1,
    ))
    .unwrap();
    let k = mode_wavenumber(200, 32);
    let x_res = resonance_density(0.12, 0.03, k) / slope;
    let best = table.min_gap().unwrap();
    assert!(
        (best.x - x_res).abs() <= 1.0,
        "minimum at {} vs {x_res}",
        best.x
    );
    // Gap decreases to the minimum, then increases.
    let gaps: Vec<f64> = table.rows.iter().map(|r| r.gap).collect();
    let argmin = gaps.iter().position(|g| *g == best.gap).unwrap();
    assert!(gaps[..=argmin].windows(2).all(|w| w[1] < w[0]));
    assert!(gaps[argmin..].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn larger_angle_gives_wider_avoided_crossing() {
    // Densities of both signs so that both angles reach their resonance.
    let values: Vec<String> = (0..200)
        .map(|p| format!("{}", (p as f64 - 100.0) * 2e-4))
        .collect();
    let profile = format!(r#"{{"kind": "table", "values": [{}]}}"#, values.join(","));
    let narrow = run_levels(&levels(0.12, &profile, 1)).unwrap();
    let wide = run_levels(&levels(0.84, &profile, 1)).unwrap();
    let (g_narrow, g_wide) = (narrow.min_gap().unwrap().gap, wide.min_gap().unwrap().gap);
    assert!(g_wide > 2.0 * g_narrow);
}

fn compare(n_sites: usize, matter: &str) -> ScenarioConfig {
    config(&format!(
        r#"{{"scenario": "compare", "lattice": {{"n_sites": {n_sites}, "mode_index": 3, "steps": 400}},
            "coins": {{"epsilon": 1.0, "thetas": [0.1, 0.25]}}, "angles": {{"phi12": 0.7}} {matter}}}"#
    ))
}

#[test]
fn compare_passes_for_vacuum_and_uniform_matter() {
    for matter in ["", r#", "matter": {"kind": "uniform", "rho": 0.1}"#] {
        let report = run_compare(&compare(24, matter)).unwrap();
        assert!(report.overall_deviation() < 1e-10);
        assert!(report.passed());
    }
}

#[test]
fn compare_rejects_mismatched_runs() {
    let a = momentum_series(&compare(24, "")).unwrap();
    let b = momentum_series(&compare(32, "")).unwrap();
    assert_eq!(
        compare_series(&a, &b),
        Err(ScenarioError::Mismatch {
            key: "lattice.n_sites"
        })
    );
}

#[test]
fn compare_fails_on_disagreement() {
    let cfg = compare(24, "");
    let oracle = momentum_series(&cfg).unwrap();
    let mut walk = oracle.clone();
    walk.rows[100].probabilities[1] += 1e-7;
    let report = compare_series(&walk, &oracle).unwrap();
    assert!(!report.passed());
}

#[test]
fn compare_rejects_varying_density() {
    let mut cfg = compare(24, "");
    cfg.matter = Some(nu_walk::lattice::MatterProfile::Linear {
        slope: 1.0,
        intercept: 0.0,
    });
    assert!(run_compare(&cfg).is_err());
}

#[test]
fn mapping_examples() {
    let zero = ExperimentSpec {
        dm2: 2.5e-3,
        energy: 0.6,
        baseline: 0.0,
    };
    let m = map_experiment(&zero, 10).unwrap();
    assert_eq!(m.achieved_phase, 0.0);

    let t2k = ExperimentSpec {
        dm2: 2.5e-3,
        energy: 0.6,
        baseline: 295.0,
    };
    let m = map_experiment(&t2k, 1000).unwrap();
    assert!((m.target_phase - 3.122).abs() < 5e-4);
    assert!(m.relative_residual < 1e-9);
    assert!(m.kappa <= 0.3 && m.theta2 * m.epsilon <= m.kappa / 5.0);

    let doubled = ExperimentSpec {
        baseline: 590.0,
        ..t2k
    };
    let d = map_experiment(&doubled, 2000).unwrap();
    assert!((d.target_phase - 2.0 * m.target_phase).abs() < 1e-12);
    assert_eq!((d.theta1, d.theta2, d.kappa), (m.theta1, m.theta2, m.kappa));
    assert!(d.min_steps.abs_diff(2 * m.min_steps) <= 1);

    let inverted = ExperimentSpec {
        dm2: -2.5e-3,
        ..t2k
    };
    let i = map_experiment(&inverted, 1000).unwrap();
    assert!(i.theta1 > 0.0 && i.theta2 == 0.0);
    assert!(i.relative_residual < 1e-9);
}

#[test]
fn mapping_reports_minimal_steps_when_infeasible() {
    let t2k = ExperimentSpec {
        dm2: 2.5e-3,
        energy: 0.6,
        baseline: 295.0,
    };
    let needed = (physical_phase(&t2k) / (0.06f64.powi(2) / 0.6)).ceil() as usize;
    match map_experiment(&t2k, 100) {
        Err(ScenarioError::Infeasible { required_steps, .. }) => assert_eq!(required_steps, needed),
        other => panic!("{other:?}"),
    }
    assert!(map_experiment(&t2k, needed).is_ok());
}

#[test]
fn rendering_is_deterministic() {
    let cfg = config(
        r#"{"scenario": "matter", "lattice": {"n_sites": 32, "mode_index": 4, "steps": 60},
            "coins": {"epsilon": 1.0, "thetas": [0.1, 0.2]}, "angles": {"phi12": 0.34},
            "matter": {"kind": "linear", "slope": 0.001, "intercept": 0.0},
            "initial": {"flavor": "mu", "spin": "up", "packet": {"center": 20.0, "width": 3.0}}}"#,
    );
    assert_eq!(cfg.scenario, ScenarioKind::Matter);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        assert_eq!(a.render(format), b.render(format));
    }
    let json: serde_json::Value = serde_json::from_str(&a.render(OutputFormat::Json)).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 61);
    assert_eq!(json["meta"]["initial"]["flavor"], "mu");
    assert!(json["oracle"]["resonance_density"].is_number());
    let csv = a.render(OutputFormat::Csv);
    assert!(csv.starts_with("step,time,P_e,P_mu,norm\n"));
}
