//! Action functionals on grid profiles.
//!
//! ℒ = 𝒩 + 𝒫 with 𝒩(W) = ½∫W² − (𝒜W)² and 𝒫(W) = ∫Ψ(𝒜W), both evaluated
//! on the extended profile over [−L−1, L+1] where the integrands can be
//! nonzero. The L²-gradient is ∂ℒ(W) = W − 𝒜Φ′(𝒜W).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{check_same_grid, inner_product, Extended, GridError, GridProfile};
use crate::potential::Potential;

/// Tolerance on the outer 2K nodes for the compact-perturbation shortcut.
pub const TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("tail not converged on the {side} side: deviation {deviation:e}")]
    TailNotConverged { side: &'static str, deviation: f64 },
    #[error("perturbation has nonzero tails ({left}, {right})")]
    NonZeroTails { left: f64, right: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    /// ℳ(W − W_sh).
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub grad_norm: f64,
}

/// Everything computed in one pass over a profile.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub n: f64,
    pub p: f64,
    /// ∂ℒ on nodes 0..=D.
    pub gradient: Vec<f64>,
    pub grad_norm: f64,
    /// 𝒜W on nodes −2K..=D+2K.
    pub averaged: Extended,
    /// 𝒜Φ′(𝒜W) on nodes 0..=D.
    pub image: Vec<f64>,
}

impl Evaluation {
    pub fn action(&self) -> f64 {
        self.n + self.p
    }
}

/// Evaluates 𝒩, 𝒫 and ∂ℒ of the extended profile without the tail guard.
pub fn evaluate(w: &GridProfile, pot: &Potential) -> Evaluation {
    let k = w.grid.k();
    let ki = k as isize;
    let d = w.grid.cells() as isize;
    let h = w.h();

    let we = Extended::from_profile(w).padded(-ki, d + ki);
    let u = we.average(k);
    let wide = we.padded(-2 * ki, d + 2 * ki);

    let quad: Vec<f64> = wide
        .values
        .iter()
        .zip(&u.values)
        .map(|(a, b)| a * a - b * b)
        .collect();
    let n = 0.5 * crate::grid::trapezoid(&quad, h);
    let psi: Vec<f64> = u.values.iter().map(|&x| pot.psi(x)).collect();
    let p = crate::grid::trapezoid(&psi, h);

    let force = u.map(|x| pot.dphi(x)).average(k);
    let offset = (0 - force.first) as usize;
    let image: Vec<f64> = force.values[offset..offset + w.values.len()].to_vec();
    let gradient: Vec<f64> = w.values.iter().zip(&image).map(|(a, b)| a - b).collect();
    let grad_norm = (h * gradient.iter().map(|g| g * g).sum::<f64>()).sqrt();

    Evaluation {
        n,
        p,
        gradient,
        grad_norm,
        averaged: u,
        image,
    }
}

/// Checks that the outer 2K nodes on each side equal the extension values.
pub fn check_tails(w: &GridProfile) -> Result<(), ActionError> {
    let span = (2 * w.grid.k()).min(w.values.len());
    let n = w.values.len();
    let left = w.values[..span]
        .iter()
        .map(|v| (v - w.left_value).abs())
        .fold(0.0, f64::max);
    if left > TAIL_TOLERANCE {
        return Err(ActionError::TailNotConverged {
            side: "left",
            deviation: left,
        });
    }
    let right = w.values[n - span..]
        .iter()
        .map(|v| (v - w.right_value).abs())
        .fold(0.0, f64::max);
    if right > TAIL_TOLERANCE {
        return Err(ActionError::TailNotConverged {
            side: "right",
            deviation: right,
        });
    }
    Ok(())
}

/// 𝒩(W) = ½∫W² − (𝒜W)².
pub fn functional_n(w: &GridProfile) -> Result<f64, ActionError> {
    check_tails(w)?;
    let k = w.grid.k();
    let ki = k as isize;
    let d = w.grid.cells() as isize;
    let we = Extended::from_profile(w).padded(-ki, d + ki);
    let u = we.average(k);
    let wide = we.padded(-2 * ki, d + 2 * ki);
    let quad: Vec<f64> = wide
        .values
        .iter()
        .zip(&u.values)
        .map(|(a, b)| a * a - b * b)
        .collect();
    Ok(0.5 * crate::grid::trapezoid(&quad, w.h()))
}

/// 𝒫(W) = ∫Ψ(𝒜W).
pub fn functional_p(w: &GridProfile, pot: &Potential) -> Result<f64, ActionError> {
    check_tails(w)?;
    Ok(evaluate(w, pot).p)
}

/// ℒ(W) = 𝒩(W) + 𝒫(W).
pub fn functional_l(w: &GridProfile, pot: &Potential) -> Result<f64, ActionError> {
    check_tails(w)?;
    Ok(evaluate(w, pot).action())
}

/// ∂ℒ(W) on the nodes, zero outside.
pub fn gradient(w: &GridProfile, pot: &Potential) -> GridProfile {
    GridProfile {
        grid: w.grid,
        values: evaluate(w, pot).gradient,
        left_value: 0.0,
        right_value: 0.0,
    }
}

/// ℳ(V) = ½∫V² − (𝒜V)² for a perturbation with zero tails.
pub fn quadratic_m(v: &GridProfile) -> Result<f64, ActionError> {
    if v.left_value != 0.0 || v.right_value != 0.0 {
        return Err(ActionError::NonZeroTails {
            left: v.left_value,
            right: v.right_value,
        });
    }
    let k = v.grid.k();
    let av = Extended::from_profile(v).average(k);
    let ve = Extended::from_profile(v).padded(av.first, av.last());
    let quad: Vec<f64> = ve
        .values
        .iter()
        .zip(&av.values)
        .map(|(a, b)| a * a - b * b)
        .collect();
    Ok(0.5 * crate::grid::trapezoid(&quad, v.h()))
}

/// Full report with the tail guard; M is ℳ(W − W_sh).
pub fn action_report(w: &GridProfile, pot: &Potential) -> Result<ActionReport, ActionError> {
    check_tails(w)?;
    let e = evaluate(w, pot);
    Ok(report_from(w, &e))
}

pub(crate) fn report_from(w: &GridProfile, e: &Evaluation) -> ActionReport {
    let m = w
        .sub(&GridProfile::shock(w.grid))
        .ok()
        .and_then(|v| quadratic_m(&v).ok())
        .unwrap_or(f64::NAN);
    ActionReport {
        m,
        n: e.n,
        p: e.p,
        l: e.n + e.p,
        grad_norm: e.grad_norm,
    }
}

/// |𝒩(W₂) − 𝒩(W₁) − ℳ(W₂−W₁) − ⟨W₂−W₁, W₁−𝒜²W₁⟩|.
pub fn n_identity_check(w1: &GridProfile, w2: &GridProfile) -> Result<f64, ActionError> {
    check_same_grid(&w1.grid, &w2.grid)?;
    let v = w2.sub(w1)?;
    let a2 = crate::grid::apply_averaging(&crate::grid::apply_averaging(w1));
    let defect = w1.sub(&a2)?;
    let pairing = inner_product(&v, &defect)?;
    let lhs = functional_n(w2)?;
    let rhs = functional_n(w1)? + quadratic_m(&v)? + pairing;
    Ok((lhs - rhs).abs())
}

/// ℒ̂(W) = ∫ (½W² − Φ(𝒜W)) − (½W_sh² − Φ(𝒜W_sh)).
pub fn relative_action(w: &GridProfile, pot: &Potential) -> Result<f64, ActionError> {
    check_tails(w)?;
    let density = |p: &GridProfile| {
        let k = p.grid.k();
        let ki = k as isize;
        let d = p.grid.cells() as isize;
        let we = Extended::from_profile(p).padded(-ki, d + ki);
        let u = we.average(k);
        let wide = we.padded(-2 * ki, d + 2 * ki);
        wide.values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| 0.5 * a * a - pot.phi(*b))
            .collect::<Vec<f64>>()
    };
    let a = density(w);
    let b = density(&GridProfile::shock(w.grid));
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Ok(crate::grid::trapezoid(&diff, w.h()))
}
