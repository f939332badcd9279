//! Explicit Euler gradient flow W ↦ (1−λ)W + λ𝒜Φ′(𝒜W) started from the
//! shock, with step rejection and outcome classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{evaluate, report_from, ActionReport, Evaluation};
use crate::grid::{GridError, GridProfile, GridSpec};
use crate::phases::{find_plateau, Plateau, PlateauRule};
use crate::potential::{compute_invariant_bound, Potential};

/// Distance from the ends (in φ units) over which a front must match its tails.
const TAIL_ZONE: f64 = 2.0;
const TAIL_MATCH: f64 = 1e-6;
/// Interior used by the collapse test: |φ| ≤ L − COLLAPSE_MARGIN.
const COLLAPSE_MARGIN: f64 = 3.0;
const COLLAPSE_FLATNESS: f64 = 1e-4;
const FIXED_POINT_TOL: f64 = 1e-3;
const MIN_LAMBDA: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub lambda0: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub stagnation_window: usize,
    /// Invariant bound; computed from the potential when absent.
    pub gamma: Option<f64>,
    pub half_width: f64,
    pub cells: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda0: 0.5,
            max_iters: 200_000,
            grad_tol: 1e-8,
            stagnation_window: 100,
            gamma: None,
            half_width: 20.0,
            cells: 3200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<GridSpec, SolverError> {
        if !(self.lambda0 > 0.0 && self.lambda0 < 1.0) {
            return Err(SolverError::ConfigInvalid(format!(
                "lambda0 = {} must lie in (0, 1)",
                self.lambda0
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(SolverError::ConfigInvalid(
                "grad_tol must be positive".into(),
            ));
        }
        if self.stagnation_window < 3 {
            return Err(SolverError::ConfigInvalid(
                "stagnation_window must be at least 3".into(),
            ));
        }
        if let Some(g) = self.gamma {
            if !(g >= 1.0) {
                return Err(SolverError::ConfigInvalid(format!(
                    "gamma = {g} must be at least 1"
                )));
            }
        }
        Ok(GridSpec::new(self.half_width, self.cells)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    FrontConverged,
    PlateauDiverging,
    CollapsedToConstant,
    MaxItersReached,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::FrontConverged => "front_converged",
            Outcome::PlateauDiverging => "plateau_diverging",
            Outcome::CollapsedToConstant => "collapsed_to_constant",
            Outcome::MaxItersReached => "max_iters_reached",
        }
    }
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Attempt counter (accepted and rejected steps).
    pub iter: usize,
    /// Step size that produced this iterate.
    pub lambda: f64,
    pub report: ActionReport,
    pub plateau: Option<Plateau>,
}

/// Linear trends over the stagnation window of a plateau run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauTrend {
    /// dℒ per accepted step.
    pub action_slope: f64,
    /// Growth of the plateau half-width per accepted step.
    pub half_width_rate: f64,
    /// Coefficient of determination of the action fit.
    pub r_squared: f64,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub outcome: Outcome,
    pub plateau_value: Option<f64>,
    pub trend: Option<PlateauTrend>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub profile: GridProfile,
    pub history: Vec<HistoryEntry>,
    pub outcome: Outcome,
    pub final_grad_norm: f64,
    pub plateau_value: Option<f64>,
    pub trend: Option<PlateauTrend>,
    pub gamma: Option<f64>,
    pub attempts: usize,
    pub rejected: usize,
    pub final_lambda: f64,
}

impl RunResult {
    pub fn final_report(&self) -> ActionReport {
        self.history[self.history.len() - 1].report
    }
}

/// Observer notification after every attempted step.
pub struct StepEvent<'a> {
    pub attempt: usize,
    pub accepted: bool,
    /// Step size used by this attempt.
    pub lambda: f64,
    /// The current iterate after the attempt.
    pub profile: &'a GridProfile,
}

/// (1−λ)W + λ𝒜Φ′(𝒜W) on the nodes; the extension values are kept.
pub fn euler_step(
    w: &GridProfile,
    pot: &Potential,
    lambda: f64,
) -> Result<GridProfile, SolverError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(SolverError::ConfigInvalid(format!(
            "lambda = {lambda} must lie in (0, 1)"
        )));
    }
    Ok(step_from(w, &evaluate(w, pot), lambda))
}

fn step_from(w: &GridProfile, e: &Evaluation, lambda: f64) -> GridProfile {
    GridProfile {
        values: w
            .values
            .iter()
            .zip(&e.image)
            .map(|(&a, &b)| (1.0 - lambda) * a + lambda * b)
            .collect(),
        ..w.clone()
    }
}

/// Rounding slack of the acceptance test.
pub fn acceptance_slack(report: &ActionReport) -> f64 {
    1e-12 * (1.0 + report.n.abs() + report.p.abs())
}

pub fn minimize(cfg: &SolverConfig, pot: &Potential) -> Result<RunResult, SolverError> {
    minimize_with_observer(cfg, pot, &mut |_| {})
}

pub fn minimize_with_observer(
    cfg: &SolverConfig,
    pot: &Potential,
    observer: &mut dyn FnMut(&StepEvent),
) -> Result<RunResult, SolverError> {
    let grid = cfg.validate()?;
    minimize_from(cfg, pot, GridProfile::shock(grid), observer)
}

/// Runs the flow from an arbitrary initial profile on the configured grid.
pub fn minimize_from(
    cfg: &SolverConfig,
    pot: &Potential,
    initial: GridProfile,
    observer: &mut dyn FnMut(&StepEvent),
) -> Result<RunResult, SolverError> {
    let grid = cfg.validate()?;
    if initial.grid != grid {
        return Err(SolverError::ConfigInvalid(
            "initial profile lives on a different grid".into(),
        ));
    }
    let gamma = cfg
        .gamma
        .or_else(|| compute_invariant_bound(pot, 10.0).ok());
    let rule = PlateauRule::default();

    let mut w = initial;
    let mut eval = evaluate(&w, pot);
    let mut lambda = cfg.lambda0;
    let mut history = vec![HistoryEntry {
        iter: 0,
        lambda,
        report: report_from(&w, &eval),
        plateau: find_plateau(&w, &rule),
    }];
    let mut attempts = 0;
    let mut rejected = 0;

    let mut class = classify_outcome(&history, &w, pot, cfg);
    while class.outcome == Outcome::MaxItersReached
        && attempts < cfg.max_iters
        && lambda >= MIN_LAMBDA
    {
        attempts += 1;
        let candidate = step_from(&w, &eval, lambda);
        let cand_eval = evaluate(&candidate, pot);
        let current = history[history.len() - 1].report;
        if cand_eval.action() > current.l + acceptance_slack(&current) {
            rejected += 1;
            observer(&StepEvent {
                attempt: attempts,
                accepted: false,
                lambda,
                profile: &w,
            });
            lambda *= 0.5;
            continue;
        }
        w = candidate;
        eval = cand_eval;
        history.push(HistoryEntry {
            iter: attempts,
            lambda,
            report: report_from(&w, &eval),
            plateau: find_plateau(&w, &rule),
        });
        observer(&StepEvent {
            attempt: attempts,
            accepted: true,
            lambda,
            profile: &w,
        });
        class = classify_outcome(&history, &w, pot, cfg);
    }

    Ok(RunResult {
        final_grad_norm: eval.grad_norm,
        profile: w,
        history,
        outcome: class.outcome,
        plateau_value: class.plateau_value,
        trend: class.trend,
        gamma,
        attempts,
        rejected,
        final_lambda: lambda,
    })
}

/// Nodes within two units of each end lie within 1e−6 of the extension values.
pub fn tails_match(profile: &GridProfile) -> bool {
    let zone = ((TAIL_ZONE / profile.h()).round() as usize + 1).min(profile.values.len());
    let n = profile.values.len();
    profile.values[..zone]
        .iter()
        .all(|v| (v - profile.left_value).abs() <= TAIL_MATCH)
        && profile.values[n - zone..]
            .iter()
            .all(|v| (v - profile.right_value).abs() <= TAIL_MATCH)
}

fn collapse_value(profile: &GridProfile, pot: &Potential) -> Option<f64> {
    let g = profile.grid;
    let bound = (g.half_width() - COLLAPSE_MARGIN).max(0.0);
    let interior: Vec<f64> = (0..profile.values.len())
        .filter(|&i| g.phi(i as isize).abs() <= bound)
        .map(|i| profile.values[i])
        .collect();
    if interior.is_empty() {
        return None;
    }
    let s = interior.iter().sum::<f64>() / interior.len() as f64;
    let flat = interior.iter().all(|v| (v - s).abs() <= COLLAPSE_FLATNESS);
    let fixed = (s - pot.dphi(s)).abs() <= FIXED_POINT_TOL;
    let mismatch = (s - profile.left_value).abs() > 1e-2 || (s - profile.right_value).abs() > 1e-2;
    (flat && fixed && mismatch).then_some(s)
}

/// Least-squares slope and R² of ys against 0, 1, 2, ...
fn linear_fit(ys: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - xm;
        let dy = y - ym;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        0.0
    };
    (slope, r2)
}

fn plateau_trend(
    history: &[HistoryEntry],
    profile: &GridProfile,
    cfg: &SolverConfig,
) -> Option<(f64, PlateauTrend)> {
    let window = cfg.stagnation_window;
    if history.len() < window {
        return None;
    }
    let recent = &history[history.len() - window..];
    let plateaus: Vec<Plateau> = recent.iter().map(|e| e.plateau).collect::<Option<_>>()?;
    let last = plateaus[plateaus.len() - 1];
    if plateaus.iter().any(|p| (p.value - last.value).abs() > 1e-2) {
        return None;
    }
    if !(last.width - plateaus[0].width > 4.0 * profile.h()) {
        return None;
    }
    let actions: Vec<f64> = recent.iter().map(|e| e.report.l).collect();
    let (action_slope, r_squared) = linear_fit(&actions);
    let widths: Vec<f64> = plateaus.iter().map(|p| 0.5 * p.width).collect();
    let (half_width_rate, _) = linear_fit(&widths);
    let trend = PlateauTrend {
        action_slope,
        half_width_rate,
        r_squared,
        window,
    };
    let grad = recent[recent.len() - 1].report.grad_norm;
    (action_slope < -cfg.grad_tol && r_squared >= 0.99 && grad > cfg.grad_tol)
        .then_some((last.value, trend))
}

/// Classifies the current state; precedence front > collapse > plateau > max iterations.
pub fn classify_outcome(
    history: &[HistoryEntry],
    profile: &GridProfile,
    pot: &Potential,
    cfg: &SolverConfig,
) -> Classification {
    let none = Classification {
        outcome: Outcome::MaxItersReached,
        plateau_value: None,
        trend: None,
    };
    let Some(last) = history.last() else {
        return none;
    };
    if last.report.grad_norm <= cfg.grad_tol && tails_match(profile) {
        return Classification {
            outcome: Outcome::FrontConverged,
            plateau_value: None,
            trend: None,
        };
    }
    if let Some(s) = collapse_value(profile, pot) {
        return Classification {
            outcome: Outcome::CollapsedToConstant,
            plateau_value: Some(s),
            trend: None,
        };
    }
    if let Some((value, trend)) = plateau_trend(history, profile, cfg) {
        return Classification {
            outcome: Outcome::PlateauDiverging,
            plateau_value: Some(value),
            trend: Some(trend),
        };
    }
    none
}
