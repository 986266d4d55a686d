// SPDX-License-Identifier: Apache-2.0

//! The `evolve` and `figure` commands: drive the library engines and
//! assemble self-describing tables.

use std::f64::consts::{FRAC_PI_4, PI};

use qwalk::kspace::{self, NoiseParams, PropagatorSeries, MIN_NK};
use qwalk::mc;
use qwalk::nonmarkov::{accumulate, distance_series, sigma_series, DistanceSeries, Engine};
use qwalk::walk::WalkerState;

use crate::config::{EngineKind, PartialConfig, RunConfig};
use crate::output::Table;
use crate::CliError;

fn fmt_p(p: f64) -> String {
    // compact column label: 0.05 -> "0.05"
    format!("{p}")
}

/// Reduced-state series (t, p_left, p_right, Re q, Im q) for one initial
/// state under the configured engine.
pub fn cmd_evolve(merged: PartialConfig) -> Result<(Table, RunConfig), CliError> {
    let mut merged = merged;
    merged.steps.get_or_insert(100);
    let config = RunConfig::resolve(merged)?;
    let t_max = config.steps.expect("defaulted above");
    let coin = config.coin()?;
    let noise = config.noise()?;
    let angles = config.angles()?;

    let series: Vec<[f64; 4]> = match config.engine {
        EngineKind::Position => {
            if !noise.is_free() {
                return Err(CliError::Config(
                    "the position engine is decoherence-free; use kspace or mc for p > 0".into(),
                ));
            }
            if t_max > qwalk::walk::MAX_STEPS {
                return Err(CliError::Config(format!(
                    "steps {t_max} exceed the position-engine limit {}",
                    qwalk::walk::MAX_STEPS
                )));
            }
            let mut state = WalkerState::point_source(&angles);
            let mut out = Vec::with_capacity(t_max + 1);
            for _ in 0..=t_max {
                let rho = state.reduce_chirality();
                out.push([rho.p_left, rho.p_right, rho.q.re, rho.q.im]);
                state = state.step(&coin);
            }
            out
        }
        EngineKind::Kspace => {
            if (config.theta - FRAC_PI_4).abs() > 1e-12 {
                return Err(CliError::Config(
                    "the kspace engine is defined for theta = pi/4 only".into(),
                ));
            }
            let nk = config.nk.unwrap_or_else(|| MIN_NK.max(8 * t_max));
            let series =
                PropagatorSeries::converged(t_max, &noise, nk).map_err(CliError::from_domain)?;
            (0..=t_max)
                .map(|t| {
                    let rho = series.density_at(t, &angles.bloch());
                    [rho.p_left, rho.p_right, rho.q.re, rho.q.im]
                })
                .collect()
        }
        EngineKind::Mc => {
            let est = mc::ensemble_chiral(&angles, &coin, &noise, t_max, config.ntraj, config.seed)
                .map_err(CliError::from_domain)?;
            est.mean
                .iter()
                .map(|rho| [rho.p_left, rho.p_right, rho.q.re, rho.q.im])
                .collect()
        }
    };

    let mut table = Table::new(
        config.describe("evolve"),
        vec!["t", "p_left", "p_right", "q_re", "q_im"],
    );
    for (t, row) in series.iter().enumerate() {
        table.push_row(vec![
            Some(t as f64),
            Some(row[0]),
            Some(row[1]),
            Some(row[2]),
            Some(row[3]),
        ]);
    }
    Ok((table, config))
}

fn exact_series(
    a1: &qwalk::CoinAngles,
    a2: &qwalk::CoinAngles,
    config: &RunConfig,
    p: f64,
    t_max: usize,
) -> Result<DistanceSeries, CliError> {
    let noise = NoiseParams::new(p).map_err(CliError::from_domain)?;
    distance_series(
        a1,
        a2,
        &config.coin()?,
        &noise,
        t_max,
        Engine::ExactK { nk: config.nk },
    )
    .map_err(CliError::from_domain)
}

/// Emit the data behind one named figure.
pub fn cmd_figure(name: &str, merged: PartialConfig) -> Result<(Table, RunConfig), CliError> {
    match name {
        "fig1" | "fig1b" => {
            let mut merged = merged;
            if name == "fig1b" {
                merged.gamma.get_or_insert(FRAC_PI_4);
                merged.phi.get_or_insert(PI);
            }
            let config = RunConfig::resolve(merged)?;
            figure_asymptotic_grid(name, config)
        }
        "fig2" => {
            let mut merged = merged;
            merged.steps.get_or_insert(100);
            let config = RunConfig::resolve(merged)?;
            figure_distance_series(config)
        }
        "fig3" => {
            let mut merged = merged;
            merged.steps.get_or_insert(200);
            let config = RunConfig::resolve(merged)?;
            figure_accumulated_measure(config)
        }
        "fig4" => {
            let mut merged = merged;
            merged.steps.get_or_insert(200);
            let config = RunConfig::resolve(merged)?;
            figure_measure_per_noise(config)
        }
        "fig5" => {
            let mut merged = merged;
            merged.steps.get_or_insert(200);
            let config = RunConfig::resolve(merged)?;
            figure_nmax_curve(config)
        }
        other => Err(CliError::Config(format!(
            "unknown figure '{other}' (expected fig1, fig1b, fig2, fig3, fig4, or fig5)"
        ))),
    }
}

/// Stationary trace distance against a fixed first state, on a (γ, φ)
/// grid over the second state.
fn figure_asymptotic_grid(name: &str, config: RunConfig) -> Result<(Table, RunConfig), CliError> {
    let first = config.angles()?;
    let (n_gamma, n_phi) = (65usize, 128usize);
    let mut table = Table::new(config.describe(name), vec!["gamma2", "phi2", "distance"]);
    for i in 0..n_gamma {
        let gamma2 = i as f64 * PI / (n_gamma - 1) as f64;
        for j in 0..n_phi {
            let phi2 = j as f64 * 2.0 * PI / n_phi as f64;
            let second = qwalk::CoinAngles::new(gamma2, phi2).map_err(CliError::from_domain)?;
            let d = kspace::asymptotic_distance(&first, &second);
            table.push_row(vec![Some(gamma2), Some(phi2), Some(d)]);
        }
    }
    Ok((table, config))
}

const FIG2_P: [f64; 4] = [0.0, 0.01, 0.1, 0.3];
const FIG4_P: [f64; 5] = [0.0, 0.01, 0.05, 0.1, 0.3];
const FIG5_P: [f64; 9] = [0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3];

/// Reduced-state trace distance vs time for several noise levels, plus the
/// full-state ensemble distance where the horizon keeps it tractable.
fn figure_distance_series(config: RunConfig) -> Result<(Table, RunConfig), CliError> {
    let t_max = config.steps.expect("defaulted by caller");
    let a1 = config.angles()?;
    let a2 = config.angles2()?;
    let coin = config.coin()?;
    let full_horizon = t_max.min(60);

    let mut columns: Vec<String> = vec!["t".into()];
    for p in FIG2_P {
        columns.push(format!("reduced_p{}", fmt_p(p)));
    }
    for p in FIG2_P {
        columns.push(format!("full_p{}", fmt_p(p)));
        columns.push(format!("full_err_p{}", fmt_p(p)));
    }

    let reduced: Vec<DistanceSeries> = FIG2_P
        .iter()
        .map(|&p| exact_series(&a1, &a2, &config, p, t_max))
        .collect::<Result<_, _>>()?;
    let full: Vec<mc::DistanceEstimate> = FIG2_P
        .iter()
        .map(|&p| {
            let noise = NoiseParams::new(p).map_err(CliError::from_domain)?;
            // without noise every trajectory is identical
            let ntraj = if p == 0.0 { 100 } else { config.ntraj.max(100) };
            mc::ensemble_full_distance(&a1, &a2, &coin, &noise, full_horizon, ntraj, config.seed)
                .map_err(CliError::from_domain)
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(
        config.describe("fig2"),
        columns.iter().map(String::as_str).collect(),
    );
    for t in 0..=t_max {
        let mut row = vec![Some(t as f64)];
        for series in &reduced {
            row.push(Some(series[t]));
        }
        for est in &full {
            if t <= full_horizon {
                row.push(Some(est.values[t]));
                row.push(Some(est.stderr[t]));
            } else {
                row.push(None);
                row.push(None);
            }
        }
        table.push_row(row);
    }
    Ok((table, config))
}

/// Distance, rate, and accumulated backflow for one noise level.
fn figure_accumulated_measure(config: RunConfig) -> Result<(Table, RunConfig), CliError> {
    let t_max = config.steps.expect("defaulted by caller");
    let a1 = config.angles()?;
    let a2 = config.angles2()?;
    let d = exact_series(&a1, &a2, &config, config.p, t_max)?;
    let sigma = sigma_series(&d);
    let n = accumulate(&sigma);
    let mut table = Table::new(
        config.describe("fig3"),
        vec!["t", "distance", "sigma", "n_accum"],
    );
    for t in 0..=t_max {
        table.push_row(vec![
            Some(t as f64),
            Some(d[t]),
            sigma.get(t).copied(),
            Some(n[t]),
        ]);
    }
    Ok((table, config))
}

/// Accumulated backflow N(t) per noise level.
fn figure_measure_per_noise(config: RunConfig) -> Result<(Table, RunConfig), CliError> {
    let t_max = config.steps.expect("defaulted by caller");
    let a1 = config.angles()?;
    let a2 = config.angles2()?;
    let mut columns: Vec<String> = vec!["t".into()];
    for p in FIG4_P {
        columns.push(format!("n_p{}", fmt_p(p)));
    }
    let accumulated: Vec<Vec<f64>> = FIG4_P
        .iter()
        .map(|&p| {
            let d = exact_series(&a1, &a2, &config, p, t_max)?;
            Ok(accumulate(&sigma_series(&d)))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(
        config.describe("fig4"),
        columns.iter().map(String::as_str).collect(),
    );
    for t in 0..=t_max {
        let mut row = vec![Some(t as f64)];
        for n in &accumulated {
            row.push(Some(n[t]));
        }
        table.push_row(row);
    }
    Ok((table, config))
}

/// Final accumulated measure versus noise, next to the reference curve
/// 7.32/(1 + 150p).
fn figure_nmax_curve(config: RunConfig) -> Result<(Table, RunConfig), CliError> {
    let t_max = config.steps.expect("defaulted by caller");
    let a1 = config.angles()?;
    let a2 = config.angles2()?;
    let mut table = Table::new(config.describe("fig5"), vec!["p", "n_max", "fit"]);
    for &p in &FIG5_P {
        let d = exact_series(&a1, &a2, &config, p, t_max)?;
        let n = accumulate(&sigma_series(&d));
        table.push_row(vec![
            Some(p),
            n.last().copied(),
            Some(7.32 / (1.0 + 150.0 * p)),
        ]);
    }
    Ok((table, config))
}
