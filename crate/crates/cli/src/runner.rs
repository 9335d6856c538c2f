//! Single-run execution: prepare an experiment, run one solver, write the
//! artifacts (diagnostics CSV, TSF1 snapshots, summary JSON).

use crate::config::ExperimentConfig;
use crate::output::{snapshot_indices, write_text};
use crate::CliError;
use coastal_core::fields::{Scenario, ScenarioOnGrid};
use coastal_core::full_solver::{
    diagnostics_csv, run, FullRunConfig, FullTrajectory, State,
};
use coastal_core::grid::TorusGrid;
use coastal_core::io::write_tsf1;
use coastal_core::limit_solver::{
    init_from_perturbation, limit_diagnostics_csv, run_limit, InitVariant, LimitRunConfig,
    LimitTrajectory,
};
use coastal_core::testfn::CompiledTestFunction;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Everything a run needs, compiled once.
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    pub grid: TorusGrid,
    pub scenario_raw: Scenario,
    pub scenario: ScenarioOnGrid,
    pub initial: State,
    pub test_functions: Vec<CompiledTestFunction>,
}

pub fn prepare(cfg: &ExperimentConfig, base_dir: &Path) -> Result<PreparedExperiment, CliError> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let scenario_raw = cfg.scenario.load(base_dir)?;
    let scenario = scenario_raw
        .compile(grid)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let initial = cfg
        .initial
        .build(grid)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut test_functions = Vec::new();
    for spec in cfg.test_function_specs() {
        test_functions.push(
            CompiledTestFunction::compile(&spec, grid)
                .map_err(|e| CliError::Config(e.to_string()))?,
        );
    }
    Ok(PreparedExperiment {
        config: cfg.clone(),
        grid,
        scenario_raw,
        scenario,
        initial,
        test_functions,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FullSummary {
    pub eps: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub final_time: f64,
    pub initial_h4: f64,
    pub sup_h4: f64,
    pub sup_ratio: f64,
    pub pairings: BTreeMap<String, f64>,
    pub status: String,
    pub abort_reason: Option<String>,
}

fn full_summary(
    prep: &PreparedExperiment,
    eps: f64,
    traj: &FullTrajectory,
    abort: Option<&str>,
) -> FullSummary {
    let mut pairings = BTreeMap::new();
    for (tf, p) in prep.test_functions.iter().zip(&traj.pairings) {
        pairings.insert(tf.name.clone(), *p);
    }
    FullSummary {
        eps,
        dt: traj.dt,
        n_steps: traj.n_steps,
        final_time: traj.times.last().copied().unwrap_or(0.0),
        initial_h4: traj.initial_h4,
        sup_h4: traj.sup_h4,
        sup_ratio: traj.sup_h4 / traj.initial_h4,
        pairings,
        status: if abort.is_none() { "done" } else { "aborted" }.to_string(),
        abort_reason: abort.map(str::to_string),
    }
}

fn write_full_artifacts(
    dir: &Path,
    prep: &PreparedExperiment,
    traj: &FullTrajectory,
    summary: &FullSummary,
) -> Result<(), CliError> {
    write_text(&dir.join("diagnostics.csv"), &diagnostics_csv(&traj.diagnostics))?;
    for idx in snapshot_indices(traj.snapshots.len(), 17) {
        let s = &traj.snapshots[idx];
        write_tsf1(
            &dir.join(format!("snap_{idx:05}.tsf1")),
            s.time,
            &[&s.iota, &s.n.x, &s.n.y],
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
    }
    write_text(
        &dir.join("summary.json"),
        &serde_json::to_string_pretty(summary).expect("summary serializes"),
    )?;
    let _ = prep;
    Ok(())
}

/// Run the stiff solver for one eps and write artifacts into `dir`.
/// On solver abort the partial outputs are written, flagged in the summary,
/// and a solver error is returned.
pub fn run_full_to_dir(
    prep: &PreparedExperiment,
    eps: f64,
    dir: &Path,
) -> Result<(FullTrajectory, FullSummary), CliError> {
    let mut rc = FullRunConfig::new(eps, prep.config.t_end);
    rc.cfl_safety = prep.config.cfl_safety;
    rc.output_stride = prep.config.output_stride;

    match run(&rc, &prep.scenario, &prep.initial, &prep.test_functions) {
        Ok(traj) => {
            let summary = full_summary(prep, eps, &traj, None);
            write_full_artifacts(dir, prep, &traj, &summary)?;
            Ok((traj, summary))
        }
        Err(failure) => {
            let reason = failure.error.to_string();
            let summary = full_summary(prep, eps, &failure.partial, Some(&reason));
            write_full_artifacts(dir, prep, &failure.partial, &summary)?;
            Err(CliError::Solver(reason))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitSummary {
    pub variant: String,
    pub dt: f64,
    pub n_steps: usize,
    pub final_time: f64,
    pub pairings: BTreeMap<String, f64>,
    pub max_div_residual: f64,
    pub max_stream_residual: f64,
    pub max_helmholtz_residual: f64,
    pub status: String,
}

/// Run the limit solver under one init variant and write artifacts.
pub fn run_limit_to_dir(
    prep: &PreparedExperiment,
    variant: InitVariant,
    dir: &Path,
) -> Result<(LimitTrajectory, LimitSummary), CliError> {
    let init = init_from_perturbation(&prep.initial.iota, &prep.initial.n, variant)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut rc = LimitRunConfig::new(prep.config.t_end);
    rc.cfl_safety = prep.config.cfl_safety;
    rc.output_stride = prep.config.output_stride.min(8);

    let traj = run_limit(&rc, &prep.scenario, &init, &prep.test_functions, None)
        .map_err(|e| CliError::Solver(e.to_string()))?;

    write_text(
        &dir.join("limit_diagnostics.csv"),
        &limit_diagnostics_csv(&traj.diagnostics),
    )?;
    for idx in snapshot_indices(traj.snapshots.len(), 17) {
        let s = &traj.snapshots[idx];
        let n = coastal_core::limit_solver::reconstruct_n(s)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        write_tsf1(
            &dir.join(format!("snap_{idx:05}.tsf1")),
            s.time,
            &[&s.i, &n.x, &n.y],
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let mut pairings = BTreeMap::new();
    for (tf, p) in prep.test_functions.iter().zip(&traj.pairings) {
        pairings.insert(tf.name.clone(), *p);
    }
    let fold = |f: fn(&coastal_core::limit_solver::LimitDiagnosticsRow) -> f64| {
        traj.diagnostics.iter().map(f).fold(0.0_f64, f64::max)
    };
    let summary = LimitSummary {
        variant: variant.label().to_string(),
        dt: traj.dt,
        n_steps: traj.n_steps,
        final_time: traj.times.last().copied().unwrap_or(0.0),
        pairings,
        max_div_residual: fold(|r| r.div_n_residual),
        max_stream_residual: fold(|r| r.stream_residual),
        max_helmholtz_residual: fold(|r| r.helmholtz_residual),
        status: "done".to_string(),
    };
    write_text(
        &dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok((traj, summary))
}
