//! Separation of phases for a single profile, plus plateau and monotonicity
//! diagnostics used by the outcome classifier.
//!
//! With U = 𝒜W and W bounded by Γ, U is 2Γ-Lipschitz, so within η̄ = 1/(8Γ)
//! of a point where |U| ≤ ½ one has |U| ≤ ¾. Every transition layer therefore
//! costs at least μ̄ = 2η̄·min_{|u|≤¾} Ψ(u).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{apply_averaging, GridProfile};
use crate::potential::Potential;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("zero set is empty")]
    EmptyZeroSet,
    #[error("U changes sign on the gap [{from}, {to}]")]
    SignInconsistent { from: f64, to: f64 },
    #[error("anchor {0} is not in the zero set")]
    AnchorNotInZeroSet(f64),
    #[error("Γ must be positive, got {0}")]
    InvalidGamma(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeparation {
    pub intervals: Vec<(f64, f64)>,
    pub anchors: Vec<f64>,
    pub signs: Vec<i8>,
    pub eta_bar: f64,
    pub m: usize,
}

/// Layer cost constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerConstants {
    pub eta_bar: f64,
    /// 2η̄·min_{|u|≤¾} Ψ(u); a valid lower bound for every layer integral.
    pub mu_bar: f64,
    /// σ̄/(2η̄) with σ̄ = sup_{|u|≤¾} Ψ(u), reported for comparison only.
    pub mu_bar_sup_formula: f64,
}

pub fn layer_constants(pot: &Potential, gamma: f64) -> LayerConstants {
    let eta_bar = 1.0 / (8.0 * gamma);
    let n = 30_001;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let u = -0.75 + 1.5 * i as f64 / (n - 1) as f64;
        let p = pot.psi(u);
        lo = lo.min(p);
        hi = hi.max(p);
    }
    LayerConstants {
        eta_bar,
        mu_bar: 2.0 * eta_bar * lo,
        mu_bar_sup_formula: hi / (2.0 * eta_bar),
    }
}

/// Nodes i with |U_i| ≤ ½.
pub fn zero_set(u: &GridProfile) -> Result<Vec<usize>, PhaseError> {
    let z: Vec<usize> = u
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= 0.5)
        .map(|(i, _)| i)
        .collect();
    if z.is_empty() {
        Err(PhaseError::EmptyZeroSet)
    } else {
        Ok(z)
    }
}

/// Greedy covering of Z_U by intervals of half-width 2η̄, merged where they
/// overlap or touch, snapped outward to nodes.
pub fn separate_phases(u: &GridProfile, gamma: f64) -> Result<PhaseSeparation, PhaseError> {
    if !(gamma > 0.0) {
        return Err(PhaseError::InvalidGamma(gamma));
    }
    let g = u.grid;
    let h = g.h();
    let eta_bar = 1.0 / (8.0 * gamma);
    let zeros = zero_set(u)?;

    let mut anchors = Vec::new();
    let mut raw: Vec<(isize, isize)> = Vec::new();
    let mut covered_to = f64::NEG_INFINITY;
    for &i in &zeros {
        let phi = g.phi(i as isize);
        if phi <= covered_to {
            continue;
        }
        anchors.push(phi);
        let lo = ((phi - 2.0 * eta_bar + g.half_width()) / h - 1e-9).floor() as isize;
        let hi = ((phi + 2.0 * eta_bar + g.half_width()) / h + 1e-9).ceil() as isize;
        covered_to = g.phi(hi);
        raw.push((lo, hi));
    }

    let mut merged: Vec<(isize, isize)> = Vec::new();
    for (lo, hi) in raw {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }

    let sign_of = |v: f64| if v > 0.0 { 1i8 } else { -1i8 };
    let mut signs = Vec::with_capacity(merged.len() + 1);
    let uniform = |from: isize, to: isize| -> Result<i8, PhaseError> {
        let s = sign_of(u.get(from));
        if (from..=to).any(|i| sign_of(u.get(i)) != s) {
            return Err(PhaseError::SignInconsistent {
                from: g.phi(from),
                to: g.phi(to),
            });
        }
        Ok(s)
    };
    signs.push(uniform(merged[0].0.min(-1) - 1, merged[0].0 - 1)?);
    for pair in merged.windows(2) {
        signs.push(uniform(pair[0].1 + 1, pair[1].0 - 1)?);
    }
    let last = merged[merged.len() - 1].1;
    signs.push(uniform(last + 1, last.max(g.cells() as isize) + 1)?);

    Ok(PhaseSeparation {
        intervals: merged.iter().map(|&(a, b)| (g.phi(a), g.phi(b))).collect(),
        anchors,
        signs,
        eta_bar,
        m: merged.len(),
    })
}

/// Separation computed from W (U = 𝒜W).
pub fn separate_profile(w: &GridProfile, gamma: f64) -> Result<PhaseSeparation, PhaseError> {
    separate_phases(&apply_averaging(w), gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub value: f64,
    pub mu_bar: f64,
    pub bound_holds: bool,
}

/// ∫ Ψ(U) over [anchor − η̄, anchor + η̄] with U = 𝒜W.
pub fn layer_cost(
    w: &GridProfile,
    pot: &Potential,
    anchor: f64,
    gamma: f64,
) -> Result<LayerCost, PhaseError> {
    if !(gamma > 0.0) {
        return Err(PhaseError::InvalidGamma(gamma));
    }
    let u = apply_averaging(w);
    if !(u.interpolate(anchor).abs() <= 0.5 + 1e-12) {
        return Err(PhaseError::AnchorNotInZeroSet(anchor));
    }
    let consts = layer_constants(pot, gamma);
    let value = integrate_interpolated(
        &u,
        |x| pot.psi(x),
        anchor - consts.eta_bar,
        anchor + consts.eta_bar,
    );
    Ok(LayerCost {
        value,
        mu_bar: consts.mu_bar,
        bound_holds: value >= consts.mu_bar - 1e-12,
    })
}

/// Trapezoid rule for ∫_a^b f(U) with U linearly interpolated at the ends.
fn integrate_interpolated(u: &GridProfile, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let g = u.grid;
    let h = g.h();
    let first = (((a + g.half_width()) / h).floor() + 1.0) as isize;
    let last = (((b + g.half_width()) / h).ceil() - 1.0) as isize;
    let mut pts = vec![(a, u.interpolate(a))];
    for i in first..=last {
        let phi = g.phi(i);
        if phi > a && phi < b {
            pts.push((phi, u.get(i)));
        }
    }
    pts.push((b, u.interpolate(b)));
    pts.windows(2)
        .map(|p| 0.5 * (p[1].0 - p[0].0) * (f(p[0].1) + f(p[1].1)))
        .sum()
}

/// Interior constant run of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
    pub value: f64,
    pub width: f64,
}

/// Plateau detection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauRule {
    /// Maximal spread (max − min) within a run.
    pub spread: f64,
    pub min_nodes: usize,
    /// Minimal distance of the run value from ±1.
    pub separation: f64,
}

impl Default for PlateauRule {
    fn default() -> Self {
        PlateauRule {
            spread: 2e-3,
            min_nodes: 50,
            separation: 1e-2,
        }
    }
}

/// Longest run of nodes whose values stay within `spread` of each other and
/// whose mean differs from ±1 by more than `separation`.
pub fn find_plateau(w: &GridProfile, rule: &PlateauRule) -> Option<Plateau> {
    let v = &w.values;
    let n = v.len();
    let mut best: Option<Plateau> = None;
    let mut start = 0;
    while start < n {
        let (mut lo, mut hi) = (v[start], v[start]);
        let mut end = start;
        while end + 1 < n {
            let x = v[end + 1];
            if hi.max(x) - lo.min(x) > rule.spread {
                break;
            }
            lo = lo.min(x);
            hi = hi.max(x);
            end += 1;
        }
        // extend backwards over nodes skipped by the previous run
        let mut s = start;
        while s > 0 {
            let x = v[s - 1];
            if hi.max(x) - lo.min(x) > rule.spread {
                break;
            }
            lo = lo.min(x);
            hi = hi.max(x);
            s -= 1;
        }
        let count = end - s + 1;
        if count >= rule.min_nodes {
            let value = v[s..=end].iter().sum::<f64>() / count as f64;
            if (value - 1.0).abs() > rule.separation && (value + 1.0).abs() > rule.separation {
                let width = (count - 1) as f64 * w.h();
                if best.is_none_or(|b| width > b.width) {
                    best = Some(Plateau {
                        start: s,
                        end,
                        value,
                        width,
                    });
                }
            }
        }
        start = end + 1;
    }
    best
}

/// W_{i+1} ≥ W_i − 1e−12 for all i.
pub fn is_monotone(w: &GridProfile) -> bool {
    w.values.windows(2).all(|p| p[1] >= p[0] - 1e-12)
}

/// True if W or U leaves [−1, 1] by more than `margin`.
pub fn has_overshoot(w: &GridProfile, margin: f64) -> bool {
    let u = apply_averaging(w);
    w.values
        .iter()
        .chain(u.values.iter())
        .any(|&x| x > 1.0 + margin || x < -1.0 - margin)
}
