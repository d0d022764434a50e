use crate::lattice::{
    mode_wavenumber, plane_wave_state, LatticeState, Spin, StepOperatorSpec, Stepper,
};
use crate::mixing::{FlavorMixer, MixingAngles};
use crate::oracle::{
    adiabaticity, asymptotic_transition, continuum_phase, crossing_probability, lattice_dispersion,
    matter_eigenvalues, matter_mixing_angle, momentum_flavor_series, physical_phase,
    resonance_density, EffectiveHamiltonian, ExperimentSpec,
};

use super::config::{ConfigError, ScenarioConfig, ScenarioKind};
use super::output::{
    ComparisonReport, ExperimentMapping, LevelRow, LevelTable, MatterOracle, ProbabilitySeries,
    ScenarioOutput, SeriesRow,
};
use super::ScenarioError;

/// Largest deviation tolerated by [`run_compare`].
pub const COMPARE_TOLERANCE: f64 = 1e-8;
/// Wavenumber used by [`map_experiment`].
pub const MAPPING_KAPPA: f64 = 0.3;
/// Coin angles are kept below `κ / RELATIVISTIC_RATIO` by [`map_experiment`].
pub const RELATIVISTIC_RATIO: f64 = 5.0;

fn expect_kind(config: &ScenarioConfig, kinds: &[ScenarioKind]) -> Result<(), ScenarioError> {
    if kinds.contains(&config.scenario) {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            "scenario",
            format!("`{}` cannot be run here", config.scenario.name()),
        )
        .into())
    }
}

fn initial_state(config: &ScenarioConfig) -> Result<LatticeState, ScenarioError> {
    let lattice = config.lattice()?;
    let n_flavors = config.n_flavors()?;
    let init = &config.initial;
    let state = match init.packet {
        Some(packet) => LatticeState::wave_packet(
            lattice.n_sites,
            n_flavors,
            lattice.mode_index,
            packet.center,
            packet.width,
            init.flavor.index(),
            init.spin,
        )?,
        None => plane_wave_state(
            lattice.n_sites,
            n_flavors,
            lattice.mode_index,
            init.flavor.index(),
            init.spin,
        )?,
    };
    Ok(state)
}

fn step_spec(config: &ScenarioConfig) -> Result<StepOperatorSpec, ScenarioError> {
    let mixer = FlavorMixer::from_angles(config.angles()?)?;
    let mut spec = StepOperatorSpec::vacuum(config.coins()?.clone(), mixer);
    spec.boundary = config.boundary;
    if let Some(profile) = &config.matter {
        spec = spec.with_matter(profile.clone());
    }
    Ok(spec)
}

fn evolve(config: &ScenarioConfig) -> Result<ProbabilitySeries, ScenarioError> {
    let lattice = config.lattice()?;
    let steps = config.steps()?;
    let stride = config.output.stride;
    let epsilon = config.coins()?.epsilon;
    let spec = step_spec(config)?;
    let mut stepper = Stepper::new(&spec, lattice.n_sites)?;
    let mut state = initial_state(config)?;
    let record = |j: usize, s: &LatticeState| SeriesRow {
        step: j,
        time: j as f64 * epsilon,
        probabilities: s.flavor_probabilities(),
        norm: s.norm_sqr(),
    };
    let mut rows = vec![record(0, &state)];
    for j in 1..=steps {
        stepper.advance(&mut state)?;
        if j % stride == 0 {
            rows.push(record(j, &state));
        }
    }
    Ok(ProbabilitySeries {
        meta: config.clone(),
        rows,
        oracle: None,
    })
}

/// Free propagation from a plane wave (or packet) on one flavor.
pub fn run_vacuum(config: &ScenarioConfig) -> Result<ProbabilitySeries, ScenarioError> {
    expect_kind(config, &[ScenarioKind::Vacuum])?;
    evolve(config)
}

/// Propagation through the configured density profile, with the resonance
/// model's predictions attached.
pub fn run_matter(config: &ScenarioConfig) -> Result<ProbabilitySeries, ScenarioError> {
    expect_kind(config, &[ScenarioKind::Matter])?;
    let mut series = evolve(config)?;
    series.oracle = matter_oracle(config, &series)?;
    Ok(series)
}

fn two_flavor_phi(angles: &MixingAngles) -> Option<f64> {
    match angles {
        MixingAngles::TwoFlavor { phi12 } => Some(*phi12),
        MixingAngles::ThreeFlavor { .. } => None,
    }
}

/// Mean group velocity `dω/dκ` of the mass eigenmodes, in sites per step.
fn group_velocity(config: &ScenarioConfig, kappa: f64) -> Result<f64, ScenarioError> {
    let coins = config.coins()?;
    let n = coins.n_flavors();
    let total: f64 = (0..n)
        .map(|h| {
            let a = coins.coin_angle(h);
            let omega = lattice_dispersion(a, kappa);
            kappa.sin() * a.cos() / omega.sin()
        })
        .sum();
    Ok(total / n as f64)
}

fn matter_oracle(
    config: &ScenarioConfig,
    series: &ProbabilitySeries,
) -> Result<Option<MatterOracle>, ScenarioError> {
    let lattice = config.lattice()?;
    let coins = config.coins()?;
    let Some(profile) = &config.matter else {
        return Ok(None);
    };
    let Some(phi) = two_flavor_phi(config.angles()?) else {
        return Ok(None);
    };
    let dm2 = coins.thetas[1].powi(2) - coins.thetas[0].powi(2);
    if !(phi > 0.0 && phi < std::f64::consts::FRAC_PI_2 && dm2 > 0.0) {
        return Ok(None);
    }
    let n = lattice.n_sites;
    let epsilon = coins.epsilon;
    let kappa = mode_wavenumber(n, lattice.mode_index);
    let k = kappa / epsilon;
    let sign = match config.initial.spin {
        Spin::Up => 1.0,
        Spin::Down => -1.0,
    };
    let densities = profile.densities(n, epsilon)?;
    let rho_at = |x: f64| -> f64 {
        let x = x.rem_euclid(n as f64);
        let lo = x.floor() as usize % n;
        let hi = (lo + 1) % n;
        let f = x - x.floor();
        sign * ((1.0 - f) * densities[lo] + f * densities[hi])
    };
    let slope_at = |x: f64| -> f64 {
        let lo = x.rem_euclid(n as f64).floor() as usize % n;
        sign * (densities[(lo + 1) % n] - densities[lo]) / epsilon
    };
    let rho_res = resonance_density(phi, dm2, k);
    let mut oracle = MatterOracle {
        resonance_density: rho_res,
        ..MatterOracle::default()
    };

    // Sample the path (or, for a plane wave, the lattice itself) and locate
    // the first resonance crossing.
    let path: Vec<f64> = match config.initial.packet {
        Some(packet) => {
            let velocity = group_velocity(config, kappa)?;
            let direction = -sign;
            let steps = config.steps()?;
            (0..=steps)
                .map(|j| packet.center + direction * velocity * j as f64)
                .collect()
        }
        None => (0..n).map(|p| p as f64).collect(),
    };
    let crossing = path.windows(2).find_map(|w| {
        let (a, b) = (rho_at(w[0]) - rho_res, rho_at(w[1]) - rho_res);
        if a == 0.0 {
            Some(w[0])
        } else if a * b < 0.0 {
            Some(w[0] + (w[1] - w[0]) * a / (a - b))
        } else {
            None
        }
    });
    let p_c = match crossing {
        Some(x) => {
            let gamma = adiabaticity(phi, dm2, k, rho_res, slope_at(x))?;
            oracle.resonance_site = Some(x.rem_euclid(n as f64));
            oracle.gamma_r = Some(gamma);
            let p_c = crossing_probability(gamma, phi)?;
            oracle.crossing_probability = Some(p_c);
            p_c
        }
        None => 0.0,
    };

    if config.initial.packet.is_some() {
        let angle = |rho: f64| matter_mixing_angle(phi, dm2, k, rho).map(|p| p.phi_matter);
        let phi_i = angle(rho_at(path[0]))?;
        let phi_f = angle(rho_at(path[path.len() - 1]))?;
        oracle.phi_initial = Some(phi_i);
        oracle.phi_final = Some(phi_f);
        oracle.asymptotic_transition = Some(asymptotic_transition(p_c, phi_i, phi_f));
        let target = 1 - config.initial.flavor.index();
        let half = config.steps()? / 2;
        let late: Vec<f64> = series
            .rows
            .iter()
            .filter(|r| r.step > half)
            .map(|r| r.probabilities[target])
            .collect();
        if !late.is_empty() {
            oracle.late_mean_transition = Some(late.iter().sum::<f64>() / late.len() as f64);
        }
    }
    Ok(Some(oracle))
}

/// Eigenvalues of the two-flavor matter Hamiltonian at every reported site.
pub fn run_levels(config: &ScenarioConfig) -> Result<LevelTable, ScenarioError> {
    expect_kind(config, &[ScenarioKind::Levels])?;
    let lattice = config.lattice()?;
    let coins = config.coins()?;
    let mixer = FlavorMixer::from_angles(config.angles()?)?;
    let profile = config
        .matter
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("matter", "required for the `levels` scenario"))?;
    let densities = profile.densities(lattice.n_sites, coins.epsilon)?;
    let k = mode_wavenumber(lattice.n_sites, lattice.mode_index) / coins.epsilon;
    let rows = (0..lattice.n_sites)
        .step_by(config.output.stride)
        .map(|p| {
            let rho = densities[p];
            let h = EffectiveHamiltonian::new(k, coins.thetas.clone(), mixer.clone(), rho)?;
            let (e1, e2) = matter_eigenvalues(&h)?;
            Ok(LevelRow {
                x: p as f64 * coins.epsilon,
                rho,
                e1,
                e2,
                gap: e2 - e1,
            })
        })
        .collect::<Result<Vec<_>, crate::WalkError>>()?;
    Ok(LevelTable {
        meta: config.clone(),
        rows,
    })
}

/// Momentum-space evolution of the configured plane wave, with the same
/// row layout as the lattice run.
pub fn momentum_series(config: &ScenarioConfig) -> Result<ProbabilitySeries, ScenarioError> {
    expect_kind(
        config,
        &[
            ScenarioKind::Vacuum,
            ScenarioKind::Matter,
            ScenarioKind::Compare,
        ],
    )?;
    if config.initial.packet.is_some() {
        return Err(ConfigError::invalid(
            "initial.packet",
            "the momentum-space evolution needs a plane wave",
        )
        .into());
    }
    let lattice = config.lattice()?;
    let coins = config.coins()?;
    let mixer = FlavorMixer::from_angles(config.angles()?)?;
    let rho = match &config.matter {
        None => None,
        Some(profile) => Some(profile.uniform_value().ok_or_else(|| {
            ConfigError::invalid(
                "matter",
                "the momentum-space evolution needs a uniform density",
            )
        })?),
    };
    let kappa = mode_wavenumber(lattice.n_sites, lattice.mode_index);
    let steps = config.steps()?;
    let probabilities = momentum_flavor_series(
        kappa,
        coins,
        &mixer,
        rho,
        config.initial.flavor.index(),
        config.initial.spin,
        steps,
    )?;
    let rows = probabilities
        .into_iter()
        .enumerate()
        .filter(|(j, _)| j % config.output.stride == 0)
        .map(|(j, probabilities)| SeriesRow {
            step: j,
            time: j as f64 * coins.epsilon,
            norm: probabilities.iter().sum(),
            probabilities,
        })
        .collect();
    Ok(ProbabilitySeries {
        meta: config.clone(),
        rows,
        oracle: None,
    })
}

/// Largest per-flavor deviation between two series of the same run.
pub fn compare_series(
    walk: &ProbabilitySeries,
    oracle: &ProbabilitySeries,
) -> Result<ComparisonReport, ScenarioError> {
    let (a, b) = (&walk.meta, &oracle.meta);
    let la = a.lattice()?;
    let lb = b.lattice()?;
    let checks = [
        (la.n_sites == lb.n_sites, "lattice.n_sites"),
        (la.mode_index == lb.mode_index, "lattice.mode_index"),
        (la.steps == lb.steps, "lattice.steps"),
        (a.coins == b.coins, "coins"),
        (a.angles == b.angles, "angles"),
        (a.matter == b.matter, "matter"),
        (a.initial == b.initial, "initial"),
        (a.output.stride == b.output.stride, "output.stride"),
    ];
    if let Some((_, key)) = checks.iter().find(|(same, _)| !same) {
        return Err(ScenarioError::Mismatch { key });
    }
    if walk.rows.len() != oracle.rows.len() || walk.n_flavors() != oracle.n_flavors() {
        return Err(ScenarioError::Mismatch { key: "rows" });
    }
    let mut max_deviation = vec![0.0f64; walk.n_flavors()];
    for (rw, ro) in walk.rows.iter().zip(&oracle.rows) {
        if rw.step != ro.step {
            return Err(ScenarioError::Mismatch { key: "rows" });
        }
        for (d, (pw, po)) in max_deviation
            .iter_mut()
            .zip(rw.probabilities.iter().zip(&ro.probabilities))
        {
            *d = d.max((pw - po).abs());
        }
    }
    Ok(ComparisonReport {
        meta: walk.meta.clone(),
        steps: la.steps.unwrap_or(0),
        max_deviation,
        tolerance: COMPARE_TOLERANCE,
    })
}

/// Runs the lattice walk and the momentum-space evolution side by side.
pub fn run_compare(config: &ScenarioConfig) -> Result<ComparisonReport, ScenarioError> {
    expect_kind(config, &[ScenarioKind::Compare])?;
    let walk = evolve(config)?;
    let oracle = momentum_series(config)?;
    compare_series(&walk, &oracle)
}

/// Chooses `ε = 1`, `κ = 0.3`, one massless state and one massive state so
/// that `target_steps` steps accumulate the experiment's phase.
pub fn map_experiment(
    spec: &ExperimentSpec,
    target_steps: usize,
) -> Result<ExperimentMapping, ScenarioError> {
    spec.validate()?;
    if target_steps == 0 {
        return Err(ConfigError::invalid("experiment.target_steps", "must be at least 1").into());
    }
    let epsilon = 1.0;
    let kappa = MAPPING_KAPPA;
    let k = kappa / epsilon;
    let target = physical_phase(spec);
    let max_theta = kappa / RELATIVISTIC_RATIO / epsilon;
    // Phase per step at the largest allowed mass.
    let max_rate = max_theta * max_theta * epsilon / (2.0 * k);
    let required_steps = (target.abs() / max_rate).ceil() as usize;
    if required_steps > target_steps {
        return Err(ScenarioError::Infeasible {
            phase: target,
            required_steps,
            target_steps,
        });
    }
    let time = target_steps as f64 * epsilon;
    let mass = (2.0 * k * target.abs() / time).sqrt().min(max_theta);
    let (theta1, theta2) = if target >= 0.0 {
        (0.0, mass)
    } else {
        (mass, 0.0)
    };
    let achieved = continuum_phase(theta1, theta2, k, time);
    let relative_residual = if target == 0.0 {
        achieved.abs()
    } else {
        ((achieved - target) / target).abs()
    };
    Ok(ExperimentMapping {
        spec: *spec,
        epsilon,
        theta1,
        theta2,
        kappa,
        steps: target_steps,
        min_steps: required_steps,
        target_phase: target,
        achieved_phase: achieved,
        relative_residual,
    })
}

/// Runs whatever scenario the config describes.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    Ok(match config.scenario {
        ScenarioKind::Vacuum => ScenarioOutput::Series(run_vacuum(config)?),
        ScenarioKind::Matter => ScenarioOutput::Series(run_matter(config)?),
        ScenarioKind::Levels => ScenarioOutput::Levels(run_levels(config)?),
        ScenarioKind::Compare => ScenarioOutput::Comparison(run_compare(config)?),
        ScenarioKind::MapExperiment => {
            let experiment = config.experiment()?;
            ScenarioOutput::Mapping {
                meta: config.clone(),
                mapping: map_experiment(&experiment.spec(), experiment.target_steps)?,
            }
        }
    })
}
