//! Subcommand implementations. Each returns the exit code of a completed run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::action::ActionReport;
use crate::grid::apply_averaging;
use crate::lattice::{
    evolve_observed, init_from_profile, verify_front, LatticeError, VerifyReport,
};
use crate::macroscopic::{
    centred_v_minus, denormalize_profile, jump_residuals, normalization_map, normalize_potential,
    signed_area, solve_front_data, FrontData, PhysicalProfile,
};
use crate::phases::{
    find_plateau, has_overshoot, is_monotone, layer_constants, layer_cost, separate_profile,
    LayerConstants, LayerCost, PhaseSeparation, Plateau, PlateauRule,
};
use crate::potential::{
    check_assumptions, compute_invariant_bound, AffineMap, AssumptionReport, Potential,
};
use crate::solver::{minimize, tails_match, Outcome, PlateauTrend, RunResult};
use crate::GridProfile;

use super::artifacts::{
    append_snapshot, read_profile, trajectory_writer, write_history, write_json, write_physical,
    write_profile,
};
use super::{CliError, RunConfig, EXIT_FAILED};

const AREA_PANELS: usize = 2000;

/// The potential in physical and normalized form, with the front data.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub physical: Potential,
    pub normalized: Potential,
    pub front: FrontData,
    pub normalized_input: bool,
    pub map: AffineMap,
    pub jump_residuals: [f64; 3],
    pub signed_area: f64,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let physical = cfg.potential()?;
    let Some(s) = &cfg.states else {
        let front = FrontData::normalized();
        return Ok(Prepared {
            jump_residuals: jump_residuals(&front, &physical),
            signed_area: signed_area(&physical, -1.0, 1.0, AREA_PANELS),
            normalized: physical.clone(),
            physical,
            front,
            normalized_input: true,
            map: AffineMap::identity(),
        });
    };
    let trial = solve_front_data(
        s.r_minus,
        s.r_plus,
        0.0,
        s.sigma_sign,
        &physical,
        s.kinetic_tolerance,
    )?;
    let v_minus = s
        .v_minus
        .unwrap_or_else(|| centred_v_minus(s.r_minus, s.r_plus, trial.sigma));
    let front = solve_front_data(
        s.r_minus,
        s.r_plus,
        v_minus,
        s.sigma_sign,
        &physical,
        s.kinetic_tolerance,
    )?;
    let normalized = normalize_potential(&physical, &front)?;
    Ok(Prepared {
        jump_residuals: jump_residuals(&front, &physical),
        signed_area: signed_area(&physical, s.r_minus, s.r_plus, AREA_PANELS),
        map: normalization_map(&physical, &front),
        normalized,
        physical,
        front,
        normalized_input: false,
    })
}

/// Stdout report; a closed pipe is not an error.
fn print_json<T: Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Serialize)]
struct CheckOutput {
    potential: String,
    normalized_input: bool,
    front_data: FrontData,
    assumptions: AssumptionReport,
    all_ok: bool,
    reason: Option<&'static str>,
}

pub fn check_potential(cfg: &RunConfig) -> Result<u8, CliError> {
    let prep = prepare(cfg)?;
    let pot = &prep.normalized;
    let halfwidth = match cfg.check.scan_halfwidth {
        Some(a) => a,
        None => (3.0 * compute_invariant_bound(pot, 10.0).unwrap_or(1.0)).max(2.0),
    };
    let report = check_assumptions(pot, halfwidth, cfg.check.samples, cfg.check.tolerance)?;
    let out = CheckOutput {
        potential: prep.physical.label(),
        normalized_input: prep.normalized_input,
        front_data: prep.front,
        all_ok: report.all_ok(),
        reason: report.failure_reason(),
        assumptions: report,
    };
    print_json(&out);
    Ok(if out.all_ok { 0 } else { EXIT_FAILED })
}

#[derive(Debug, Serialize)]
struct NormalizeOutput {
    potential: String,
    normalized_input: bool,
    front_data: FrontData,
    jump_residuals: [f64; 3],
    signed_area: f64,
    map: AffineMap,
    /// Φ̂′(−1), Φ̂′(1), Φ̂(−1), Φ̂(1).
    normalized_values: [f64; 4],
}

pub fn normalize(cfg: &RunConfig) -> Result<u8, CliError> {
    let prep = prepare(cfg)?;
    let p = &prep.normalized;
    print_json(&NormalizeOutput {
        potential: prep.physical.label(),
        normalized_input: prep.normalized_input,
        front_data: prep.front,
        jump_residuals: prep.jump_residuals,
        signed_area: prep.signed_area,
        map: prep.map,
        normalized_values: [p.dphi(-1.0), p.dphi(1.0), p.phi(-1.0), p.phi(1.0)],
    });
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub half_width: f64,
    pub cells: usize,
    pub k: usize,
    pub h: f64,
}

/// Contents of summary.json. Deterministic for a given configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub potential: String,
    pub normalized_input: bool,
    pub front_data: FrontData,
    pub jump_residuals: [f64; 3],
    pub signed_area: f64,
    pub grid: GridSummary,
    pub outcome: Outcome,
    pub attempts: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub final_lambda: f64,
    pub action: ActionReport,
    pub plateau_value: Option<f64>,
    pub plateau_trend: Option<PlateauTrend>,
    pub gamma: Option<f64>,
    pub monotone: bool,
    pub overshoot: bool,
    pub phases: Option<PhaseSeparation>,
    pub phases_error: Option<String>,
}

fn summarize(cfg: &RunConfig, prep: &Prepared, res: &RunResult) -> SolveSummary {
    let g = res.profile.grid;
    let (phases, phases_error) = match res.gamma.map(|gm| separate_profile(&res.profile, gm)) {
        Some(Ok(p)) => (Some(p), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, Some("no invariant bound available".into())),
    };
    SolveSummary {
        potential: prep.physical.label(),
        normalized_input: prep.normalized_input,
        front_data: prep.front,
        jump_residuals: prep.jump_residuals,
        signed_area: prep.signed_area,
        grid: GridSummary {
            half_width: cfg.grid.half_width,
            cells: g.cells(),
            k: g.k(),
            h: g.h(),
        },
        outcome: res.outcome,
        attempts: res.attempts,
        accepted: res.attempts - res.rejected,
        rejected: res.rejected,
        final_lambda: res.final_lambda,
        action: res.final_report(),
        plateau_value: res.plateau_value,
        plateau_trend: res.trend,
        gamma: res.gamma,
        monotone: is_monotone(&res.profile),
        overshoot: has_overshoot(&res.profile, 1e-9),
        phases,
        phases_error,
    }
}

#[derive(Debug, Serialize)]
struct Timings {
    solve_seconds: f64,
    verify_seconds: Option<f64>,
}

/// Solves and writes the artifacts into `dir`; verification is left to the caller.
pub fn solve_into(
    cfg: &RunConfig,
    dir: &Path,
) -> Result<(Prepared, RunResult, SolveSummary, f64), CliError> {
    let prep = prepare(cfg)?;
    let scfg = cfg.solver_config();
    scfg.validate()?;
    ensure_dir(dir)?;
    let start = Instant::now();
    let res = minimize(&scfg, &prep.normalized)?;
    let seconds = start.elapsed().as_secs_f64();
    write_profile(&dir.join("profile.csv"), &res.profile)?;
    write_history(&dir.join("history.csv"), &res.history)?;
    write_physical(
        &dir.join("profile_physical.csv"),
        &denormalize_profile(&res.profile, &prep.front),
    )?;
    let summary = summarize(cfg, &prep, &res);
    write_json(&dir.join("summary.json"), &summary)?;
    Ok((prep, res, summary, seconds))
}

pub fn solve(cfg: &RunConfig) -> Result<u8, CliError> {
    let dir = cfg.output_dir.clone();
    let (prep, res, summary, solve_seconds) = solve_into(cfg, &dir)?;
    print_json(&summary);
    let mut code = 0;
    let mut verify_seconds = None;
    if cfg.verify {
        if res.outcome != Outcome::FrontConverged {
            write_json(
                &dir.join("timings.json"),
                &Timings {
                    solve_seconds,
                    verify_seconds,
                },
            )?;
            return Err(
                LatticeError::NotAFront(format!("outcome is {}", res.outcome.as_str())).into(),
            );
        }
        let start = Instant::now();
        let phys = denormalize_profile(&res.profile, &prep.front);
        let report = verify_front(&phys, &prep.front, &prep.physical, &cfg.lattice)?;
        verify_seconds = Some(start.elapsed().as_secs_f64());
        write_json(&dir.join("verify.json"), &report)?;
        if !report.passed {
            code = EXIT_FAILED;
        }
    }
    write_json(
        &dir.join("timings.json"),
        &Timings {
            solve_seconds,
            verify_seconds,
        },
    )?;
    Ok(code)
}

fn load_front_profile(cfg: &RunConfig, path: &Path) -> Result<(Prepared, GridProfile), CliError> {
    let prep = prepare(cfg)?;
    let grid = cfg.solver_config().validate()?;
    let w = read_profile(path, grid)?;
    Ok((prep, w))
}

#[derive(Debug, Serialize)]
struct VerifyOutput<'a> {
    profile: String,
    front_data: FrontData,
    report: &'a VerifyReport,
}

pub fn verify(cfg: &RunConfig, profile: &Path, trajectory: bool) -> Result<u8, CliError> {
    let (prep, w) = load_front_profile(cfg, profile)?;
    if !tails_match(&w) {
        return Err(LatticeError::NotAFront(
            "profile tails do not match the asymptotic states".into(),
        )
        .into());
    }
    let phys = denormalize_profile(&w, &prep.front);
    let report = verify_front(&phys, &prep.front, &prep.physical, &cfg.lattice)?;
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    write_json(&dir.join("verify.json"), &report)?;
    if trajectory {
        write_trajectory(&dir.join("trajectory.csv"), &phys, &prep, cfg)?;
    }
    print_json(&VerifyOutput {
        profile: profile.display().to_string(),
        front_data: prep.front,
        report: &report,
    });
    Ok(if report.passed { 0 } else { EXIT_FAILED })
}

/// Re-runs the verification trajectory and records `samples + 1` snapshots.
fn write_trajectory(
    path: &Path,
    phys: &PhysicalProfile,
    prep: &Prepared,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    let lc = &cfg.lattice;
    let fd = &prep.front;
    let offset = 0.5 * lc.n_atoms as f64 - 0.5 * fd.sigma * lc.t_final;
    let state = init_from_profile(phys, lc.n_atoms, offset, lc.dt);
    let limit = lc
        .blowup_limit
        .unwrap_or(10.0 * 1f64.max(fd.r_minus.abs()).max(fd.r_plus.abs()));
    let steps = (lc.t_final / lc.dt).round() as usize;
    let stride = (steps / lc.samples.max(1)).max(1);
    let mut out = trajectory_writer(path)?;
    let mut failure = None;
    let mut count = 0usize;
    let mut record = |s: &crate::lattice::ChainState| {
        if failure.is_none() && count.is_multiple_of(stride) {
            if let Err(e) = append_snapshot(&mut out, s) {
                failure = Some(e.to_string());
            }
        }
        count += 1;
    };
    record(&state);
    evolve_observed(&state, &prep.physical, lc.t_final, limit, &mut record)?;
    if let Some(message) = failure {
        return Err(CliError::Csv {
            path: path.display().to_string(),
            message,
        });
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Serialize)]
struct DiagnoseOutput {
    profile: String,
    gamma: f64,
    constants: LayerConstants,
    zero_set_nodes: usize,
    separation: Option<PhaseSeparation>,
    separation_error: Option<String>,
    layer_costs: Vec<LayerCost>,
    plateau: Option<Plateau>,
    monotone: bool,
    overshoot: bool,
    u_range: (f64, f64),
}

pub fn diagnose(cfg: &RunConfig, profile: &Path) -> Result<u8, CliError> {
    let (prep, w) = load_front_profile(cfg, profile)?;
    let pot = &prep.normalized;
    let gamma = match cfg.solver.gamma {
        Some(g) => g,
        None => compute_invariant_bound(pot, 10.0)?,
    };
    let u = apply_averaging(&w);
    let zero_set_nodes = crate::phases::zero_set(&u).map(|z| z.len()).unwrap_or(0);
    let (separation, separation_error) = match separate_profile(&w, gamma) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let layer_costs = match &separation {
        Some(s) => s
            .anchors
            .iter()
            .map(|&a| layer_cost(&w, pot, a, gamma))
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let u_min = u.values.iter().copied().fold(f64::INFINITY, f64::min);
    let u_max = u.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    print_json(&DiagnoseOutput {
        profile: profile.display().to_string(),
        gamma,
        constants: layer_constants(pot, gamma),
        zero_set_nodes,
        separation,
        separation_error,
        layer_costs,
        plateau: find_plateau(&w, &PlateauRule::default()),
        monotone: is_monotone(&w),
        overshoot: has_overshoot(&w, 1e-9),
        u_range: (u_min, u_max),
    });
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub output_dir: PathBuf,
    pub outcome: Option<Outcome>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub grad_norm: Option<f64>,
    pub attempts: Option<usize>,
    pub plateau_value: Option<f64>,
    pub error: Option<String>,
}

pub fn sweep(cfg: &RunConfig) -> Result<u8, CliError> {
    if cfg.sweep.betas.is_empty() {
        return Err(CliError::Config("sweep needs at least one beta".into()));
    }
    let configs = cfg
        .sweep
        .betas
        .iter()
        .map(|&b| cfg.with_beta(b).map(|c| (b, c)))
        .collect::<Result<Vec<_>, _>>()?;
    ensure_dir(&cfg.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, (beta, c))| {
                let dir = cfg.output_dir.join(format!("run_{i:03}"));
                match solve_into(c, &dir) {
                    Ok((_, res, summary, _)) => SweepRow {
                        beta: *beta,
                        output_dir: dir,
                        outcome: Some(res.outcome),
                        l: Some(summary.action.l),
                        grad_norm: Some(summary.action.grad_norm),
                        attempts: Some(res.attempts),
                        plateau_value: res.plateau_value,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        beta: *beta,
                        output_dir: dir,
                        outcome: None,
                        l: None,
                        grad_norm: None,
                        attempts: None,
                        plateau_value: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    write_json(&cfg.output_dir.join("sweep.json"), &rows)?;
    let path = cfg.output_dir.join("sweep.csv");
    let mut out = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
    let csv_err = |e: csv::Error| CliError::Csv {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    out.write_record(["beta", "outcome", "L", "grad_norm", "attempts"])
        .map_err(csv_err)?;
    for r in &rows {
        out.write_record([
            r.beta.to_string(),
            r.outcome
                .map_or("error".to_string(), |o| o.as_str().to_string()),
            r.l.map_or(String::new(), |v| v.to_string()),
            r.grad_norm.map_or(String::new(), |v| v.to_string()),
            r.attempts.map_or(String::new(), |v| v.to_string()),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::io(&path, e))?;
    print_json(&rows);
    Ok(if rows.iter().any(|r| r.error.is_some()) {
        EXIT_FAILED
    } else {
        0
    })
}
