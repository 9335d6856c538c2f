//! Weak convergence comparison between the stiff solver and the limit
//! solver: run the eps sweep, pair every trajectory against the test
//! functions, and report `|P_eps - P_0| / |P_0|` per function and per eps.
//!
//! Convergence is tested through this fixed finite family of pairings; a
//! necessary condition for the weak limit, not a proof.

use crate::config::ExperimentConfig;
use crate::output::{run_dir, write_text};
use crate::runner::{prepare, run_full_to_dir, run_limit_to_dir, PreparedExperiment};
use crate::CliError;
use coastal_core::limit_solver::InitVariant;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Relative-error slack per halving: the error may rise by at most 10%
/// step to step and still count as decreasing.
pub const MONOTONE_SLACK: f64 = 1.10;

#[derive(Debug, Clone, Serialize)]
pub struct NormBound {
    pub eps: f64,
    pub initial_h4: f64,
    pub sup_h4: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsPairings {
    pub eps: f64,
    /// `done` or `failed`; failed members keep empty pairing maps.
    pub status: String,
    pub pairings: BTreeMap<String, f64>,
    pub rel_errors: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub limit_pairings: BTreeMap<String, f64>,
    pub per_eps: Vec<EpsPairings>,
    /// Per test function: did the error decrease along the sweep within the
    /// 10% slack (over the done members)?
    pub monotone_within_slack: BTreeMap<String, bool>,
    /// Relative error at the smallest done eps, per test function.
    pub final_errors: BTreeMap<String, f64>,
    pub max_final_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub eps_list: Vec<f64>,
    pub test_functions: Vec<String>,
    pub self_comparison: bool,
    pub norm_bounds: Vec<NormBound>,
    /// Largest over smallest sup of the H^4 norm across done members.
    pub sup_spread: Option<f64>,
    pub variants: BTreeMap<String, VariantReport>,
    /// The better-matching init variant (smallest max final error).
    pub selected_variant: String,
}

pub struct CompareOutcome {
    pub report: ConvergenceReport,
    pub failed_members: usize,
}

#[derive(Clone)]
struct MemberResult {
    eps: f64,
    pairings: Option<Vec<f64>>,
    norm: Option<NormBound>,
}

fn variant_report(
    prep: &PreparedExperiment,
    limit_pairings: &[f64],
    members: &[MemberResult],
) -> VariantReport {
    let names: Vec<String> = prep.test_functions.iter().map(|t| t.name.clone()).collect();
    let mut limit_map = BTreeMap::new();
    for (n, p) in names.iter().zip(limit_pairings) {
        limit_map.insert(n.clone(), *p);
    }

    let mut per_eps = Vec::new();
    for m in members {
        let mut pairings = BTreeMap::new();
        let mut rel = BTreeMap::new();
        if let Some(ps) = &m.pairings {
            for ((n, p), p0) in names.iter().zip(ps).zip(limit_pairings) {
                pairings.insert(n.clone(), *p);
                rel.insert(n.clone(), (p - p0).abs() / p0.abs().max(1e-12));
            }
        }
        per_eps.push(EpsPairings {
            eps: m.eps,
            status: if m.pairings.is_some() { "done" } else { "failed" }.to_string(),
            pairings,
            rel_errors: rel,
        });
    }

    let mut monotone = BTreeMap::new();
    let mut final_errors = BTreeMap::new();
    for name in &names {
        let series: Vec<f64> = per_eps
            .iter()
            .filter(|e| e.status == "done")
            .map(|e| e.rel_errors[name])
            .collect();
        let ok = series.windows(2).all(|w| w[1] <= w[0] * MONOTONE_SLACK);
        monotone.insert(name.clone(), ok && series.len() >= 2);
        if let Some(last) = series.last() {
            final_errors.insert(name.clone(), *last);
        }
    }
    let max_final_error = final_errors.values().cloned().fold(0.0_f64, f64::max);
    VariantReport {
        limit_pairings: limit_map,
        per_eps,
        monotone_within_slack: monotone,
        final_errors,
        max_final_error,
    }
}

/// Run the full comparison into `out_root`. Returns the report; members
/// that abort are marked failed and counted, the caller maps a nonzero
/// count to the partial-sweep exit code.
pub fn run_compare(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    out_root: &Path,
) -> Result<CompareOutcome, CliError> {
    let prep = prepare(cfg, base_dir)?;
    let cfg_json = cfg.to_json();
    let dir = run_dir(out_root, "compare", &cfg_json, "")?;
    write_text(&dir.join("config.json"), &cfg_json)?;

    // Limit runs, one per requested variant.
    let mut variant_pairings: Vec<(InitVariant, Vec<f64>)> = Vec::new();
    for variant in cfg.init_variant.variants() {
        let vdir = dir.join(format!("limit_{}", variant.label()));
        std::fs::create_dir_all(&vdir).map_err(|e| CliError::io("creating limit dir", e))?;
        let (traj, _) = run_limit_to_dir(&prep, variant, &vdir)?;
        variant_pairings.push((variant, traj.pairings));
    }

    // Sweep members: independent, one worker per eps, joined in order.
    // In self-comparison mode no stiff runs happen; each variant is paired
    // against its own limit trajectory below, so every error vanishes.
    let mut members: Vec<MemberResult> = Vec::new();
    let mut failed = 0usize;
    if !cfg.self_comparison {
        let results: Vec<Result<(Vec<f64>, NormBound), String>> = std::thread::scope(|scope| {
            let prep_ref = &prep;
            let dir_ref = &dir;
            let handles: Vec<_> = cfg
                .eps_list
                .iter()
                .enumerate()
                .map(|(i, &eps)| {
                    scope.spawn(move || {
                        let mdir = dir_ref.join(format!("full_{i:02}"));
                        std::fs::create_dir_all(&mdir)
                            .map_err(|e| CliError::io("creating member dir", e))?;
                        let (traj, summary) = run_full_to_dir(prep_ref, eps, &mdir)?;
                        Ok::<_, CliError>((
                            traj.pairings,
                            NormBound {
                                eps,
                                initial_h4: summary.initial_h4,
                                sup_h4: summary.sup_h4,
                                ratio: summary.sup_ratio,
                            },
                        ))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked").map_err(|e| e.to_string()))
                .collect()
        });
        for (&eps, res) in cfg.eps_list.iter().zip(results) {
            match res {
                Ok((pairings, norm)) => members.push(MemberResult {
                    eps,
                    pairings: Some(pairings),
                    norm: Some(norm),
                }),
                Err(_) => {
                    failed += 1;
                    members.push(MemberResult {
                        eps,
                        pairings: None,
                        norm: None,
                    });
                }
            }
        }
    }

    let norm_bounds: Vec<NormBound> = members.iter().filter_map(|m| m.norm.clone()).collect();
    let sup_spread = if norm_bounds.len() >= 2 {
        let max = norm_bounds.iter().map(|b| b.sup_h4).fold(f64::MIN, f64::max);
        let min = norm_bounds.iter().map(|b| b.sup_h4).fold(f64::MAX, f64::min);
        Some(max / min)
    } else {
        None
    };

    let mut variants = BTreeMap::new();
    for (variant, pairings) in &variant_pairings {
        let vmembers: Vec<MemberResult> = if cfg.self_comparison {
            cfg.eps_list
                .iter()
                .map(|&eps| MemberResult {
                    eps,
                    pairings: Some(pairings.clone()),
                    norm: None,
                })
                .collect()
        } else {
            members.clone()
        };
        variants.insert(
            variant.label().to_string(),
            variant_report(&prep, pairings, &vmembers),
        );
    }
    let selected_variant = variants
        .iter()
        .min_by(|a, b| {
            a.1.max_final_error
                .partial_cmp(&b.1.max_final_error)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(b.0))
        })
        .map(|(k, _)| k.clone())
        .expect("at least one variant");

    let report = ConvergenceReport {
        eps_list: cfg.eps_list.clone(),
        test_functions: prep.test_functions.iter().map(|t| t.name.clone()).collect(),
        self_comparison: cfg.self_comparison,
        norm_bounds,
        sup_spread,
        variants,
        selected_variant,
    };

    write_text(
        &dir.join("report.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    write_text(&dir.join("report.csv"), &report_csv(&report))?;
    Ok(CompareOutcome {
        report,
        failed_members: failed,
    })
}

fn report_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("variant,eps,test_function,p_eps,p_limit,rel_error,status\n");
    for (vname, v) in &report.variants {
        for row in &v.per_eps {
            for tf in &report.test_functions {
                let (p, r) = match row.status.as_str() {
                    "done" => (
                        format!("{:.16e}", row.pairings[tf]),
                        format!("{:.16e}", row.rel_errors[tf]),
                    ),
                    _ => (String::new(), String::new()),
                };
                out.push_str(&format!(
                    "{vname},{:.16e},{tf},{p},{:.16e},{r},{}\n",
                    row.eps, v.limit_pairings[tf], row.status
                ));
            }
        }
    }
    out
}
