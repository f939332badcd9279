//! Jump conditions, the kinetic relation, the front parabola, and the affine
//! normalization that maps a physical front onto σ = 1, r± = ±1, v± = ∓1.
//!
//! Jumps and means are ⟦ψ⟧ = ψ₊ − ψ₋ and ⟨ψ⟩ = ½(ψ₊ + ψ₋).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Extended, GridProfile};
use crate::potential::{AffineMap, Potential};

/// Default relative tolerance of the kinetic relation.
pub const KINETIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacroError {
    #[error("inadmissible states: kinetic relation violated (defect {defect:e})")]
    InadmissibleKinetic { defect: f64 },
    #[error("inadmissible states: ⟦Φ′⟧/⟦r⟧ = {ratio} is not positive")]
    InadmissibleSubsonicSign { ratio: f64 },
    #[error("r_minus and r_plus coincide")]
    DegenerateStates,
    #[error("sigma_sign must be +1 or -1, got {0}")]
    InvalidSign(i32),
    #[error("front data not admissible: {0}")]
    NotAdmissible(String),
}

impl MacroError {
    /// Short machine-readable reason.
    pub fn reason(&self) -> &'static str {
        match self {
            MacroError::InadmissibleKinetic { .. } => "kinetic",
            MacroError::InadmissibleSubsonicSign { .. } => "subsonic_sign",
            MacroError::DegenerateStates => "degenerate_states",
            MacroError::InvalidSign(_) => "invalid_sign",
            MacroError::NotAdmissible(_) => "not_admissible",
        }
    }
}

pub fn jump(minus: f64, plus: f64) -> f64 {
    plus - minus
}

pub fn mean(minus: f64, plus: f64) -> f64 {
    0.5 * (plus + minus)
}

/// f(r) = ½a r² + b r + c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parabola {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Parabola {
    pub fn value(&self, r: f64) -> f64 {
        0.5 * self.a * r * r + self.b * r + self.c
    }

    pub fn slope(&self, r: f64) -> f64 {
        self.a * r + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontData {
    pub r_minus: f64,
    pub r_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub sigma: f64,
    pub parabola: Parabola,
}

impl FrontData {
    /// σ = 1, r± = ±1, v± = ∓1, f(r) = r²/2.
    pub fn normalized() -> Self {
        FrontData {
            r_minus: -1.0,
            r_plus: 1.0,
            v_minus: 1.0,
            v_plus: -1.0,
            sigma: 1.0,
            parabola: Parabola {
                a: 1.0,
                b: 0.0,
                c: 0.0,
            },
        }
    }

    pub fn r_jump(&self) -> f64 {
        jump(self.r_minus, self.r_plus)
    }

    pub fn r_mean(&self) -> f64 {
        mean(self.r_minus, self.r_plus)
    }

    pub fn v_jump(&self) -> f64 {
        jump(self.v_minus, self.v_plus)
    }

    pub fn v_mean(&self) -> f64 {
        mean(self.v_minus, self.v_plus)
    }
}

/// The three conservation residuals (mass, momentum, energy).
pub fn jump_residuals(fd: &FrontData, pot: &Potential) -> [f64; 3] {
    let (rm, rp, vm, vp, s) = (fd.r_minus, fd.r_plus, fd.v_minus, fd.v_plus, fd.sigma);
    let first = s * jump(rm, rp) + jump(vm, vp);
    let second = s * jump(vm, vp) + jump(pot.dphi(rm), pot.dphi(rp));
    let energy = |r: f64, v: f64| 0.5 * v * v + pot.phi(r);
    let third =
        s * jump(energy(rm, vm), energy(rp, vp)) + jump(pot.dphi(rm) * vm, pot.dphi(rp) * vp);
    [first, second, third]
}

/// ⟦Φ⟧ − ⟦r⟧⟨Φ′⟩ and the rounding scale it is compared against.
fn kinetic_defect(pot: &Potential, rm: f64, rp: f64) -> (f64, f64) {
    let (pm, pp) = (pot.phi(rm), pot.phi(rp));
    let (dm, dp) = (pot.dphi(rm), pot.dphi(rp));
    let defect = jump(pm, pp) - jump(rm, rp) * mean(dm, dp);
    let scale = pm.abs() + pp.abs() + jump(rm, rp).abs() * 0.5 * (dm.abs() + dp.abs());
    (defect, scale)
}

/// Asymptotic data of the front connecting r₋ to r₊ on the branch `sigma_sign`.
///
/// `tol` is relative to |Φ(r₋)| + |Φ(r₊)| + |⟦r⟧|·(|Φ′(r₋)| + |Φ′(r₊)|)/2.
pub fn solve_front_data(
    r_minus: f64,
    r_plus: f64,
    v_minus: f64,
    sigma_sign: i32,
    pot: &Potential,
    tol: f64,
) -> Result<FrontData, MacroError> {
    if sigma_sign != 1 && sigma_sign != -1 {
        return Err(MacroError::InvalidSign(sigma_sign));
    }
    if r_minus == r_plus {
        return Err(MacroError::DegenerateStates);
    }
    let (defect, scale) = kinetic_defect(pot, r_minus, r_plus);
    if !(defect.abs() <= tol * scale) {
        return Err(MacroError::InadmissibleKinetic { defect });
    }
    let r_jump = jump(r_minus, r_plus);
    let ratio = jump(pot.dphi(r_minus), pot.dphi(r_plus)) / r_jump;
    if !(ratio > 0.0) {
        return Err(MacroError::InadmissibleSubsonicSign { ratio });
    }
    let sigma = sigma_sign as f64 * ratio.sqrt();
    let r_mean = mean(r_minus, r_plus);
    let r2_mean = mean(r_minus * r_minus, r_plus * r_plus);
    let dphi_mean = mean(pot.dphi(r_minus), pot.dphi(r_plus));
    let phi_mean = mean(pot.phi(r_minus), pot.phi(r_plus));
    let a = sigma * sigma;
    Ok(FrontData {
        r_minus,
        r_plus,
        v_minus,
        v_plus: v_minus - sigma * r_jump,
        sigma,
        parabola: Parabola {
            a,
            b: dphi_mean - a * r_mean,
            c: phi_mean - r_mean * dphi_mean + a * (r_mean * r_mean - 0.5 * r2_mean),
        },
    })
}

/// v₋ placing the mean velocity at zero for the given strains and speed.
pub fn centred_v_minus(r_minus: f64, r_plus: f64, sigma: f64) -> f64 {
    0.5 * sigma * jump(r_minus, r_plus)
}

/// ∫_{r₋}^{r₊} Φ′(r) − s(r) dr, where s is the secant of Φ′ through r±.
/// Composite Simpson rule with `panels` (even) subintervals.
pub fn signed_area(pot: &Potential, r_minus: f64, r_plus: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let (dm, dp) = (pot.dphi(r_minus), pot.dphi(r_plus));
    let slope = (dp - dm) / (r_plus - r_minus);
    let f = |r: f64| pot.dphi(r) - (dm + slope * (r - r_minus));
    let h = (r_plus - r_minus) / n as f64;
    let mut acc = f(r_minus) + f(r_plus);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(r_minus + h * i as f64);
    }
    acc * h / 3.0
}

/// The affine map taking Φ to the normalized potential Φ̂ of the front.
pub fn normalization_map(pot: &Potential, fd: &FrontData) -> AffineMap {
    let rj = fd.r_jump();
    let (dm, dp) = (pot.dphi(fd.r_minus), pot.dphi(fd.r_plus));
    let dj = jump(dm, dp);
    let phi_mean = mean(pot.phi(fd.r_minus), pot.phi(fd.r_plus));
    AffineMap {
        arg_scale: 0.5 * rj,
        arg_shift: fd.r_mean(),
        value_scale: 4.0 / (dj * rj),
        slope: -2.0 * mean(dm, dp) / dj,
        offset: 0.5 - 4.0 * phi_mean / (dj * rj),
    }
}

/// Φ̂(u) = 4Φ(⟨r⟩+½⟦r⟧u)/(⟦Φ′⟧⟦r⟧) − 2⟨Φ′⟩u/⟦Φ′⟧ + ½ − 4⟨Φ⟩/(⟦Φ′⟧⟦r⟧).
pub fn normalize_potential(pot: &Potential, fd: &FrontData) -> Result<Potential, MacroError> {
    if fd.r_minus == fd.r_plus {
        return Err(MacroError::DegenerateStates);
    }
    let res = jump_residuals(fd, pot);
    let scale = 1.0
        + fd.sigma.abs() * (fd.r_jump().abs() + fd.v_jump().abs())
        + pot.phi(fd.r_minus).abs()
        + pot.phi(fd.r_plus).abs()
        + (pot.dphi(fd.r_minus) * fd.v_minus).abs()
        + (pot.dphi(fd.r_plus) * fd.v_plus).abs();
    if res.iter().any(|r| !(r.abs() <= 1e-8 * scale)) {
        return Err(MacroError::NotAdmissible(format!("jump residuals {res:?}")));
    }
    let dj = jump(pot.dphi(fd.r_minus), pot.dphi(fd.r_plus));
    if !(dj / fd.r_jump() > 0.0) {
        return Err(MacroError::NotAdmissible("⟦Φ′⟧/⟦r⟧ is not positive".into()));
    }
    let normalized = Potential::affine(pot.clone(), normalization_map(pot, fd));
    let checks = [
        normalized.dphi(1.0) - 1.0,
        normalized.dphi(-1.0) + 1.0,
        normalized.phi(1.0) - 0.5,
        normalized.phi(-1.0) - 0.5,
    ];
    if checks.iter().any(|c| !(c.abs() <= 1e-8)) {
        return Err(MacroError::NotAdmissible(format!(
            "normalization check failed: {checks:?}"
        )));
    }
    Ok(normalized)
}

/// Physical strain and velocity profiles on φ_i, i = −2K..=D.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalProfile {
    pub phi: Vec<f64>,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub r_minus: f64,
    pub r_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

impl PhysicalProfile {
    fn interp(&self, values: &[f64], left: f64, right: f64, phi: f64) -> f64 {
        let n = self.phi.len();
        if phi <= self.phi[0] {
            return left;
        }
        if phi >= self.phi[n - 1] {
            return right;
        }
        let h = self.phi[1] - self.phi[0];
        let x = (phi - self.phi[0]) / h;
        let i = (x.floor() as usize).min(n - 2);
        let t = x - i as f64;
        (1.0 - t) * values[i] + t * values[i + 1]
    }

    /// R(φ) by linear interpolation, r± outside the sampled range.
    pub fn r_at(&self, phi: f64) -> f64 {
        self.interp(&self.r, self.r_minus, self.r_plus, phi)
    }

    /// V(φ) by linear interpolation, v± outside the sampled range.
    pub fn v_at(&self, phi: f64) -> f64 {
        self.interp(&self.v, self.v_minus, self.v_plus, phi)
    }
}

/// R(φ) = ⟨r⟩ + ½⟦r⟧U(φ+½), V(φ) = ⟨v⟩ + ½⟦v⟧W(φ) with U = 𝒜W.
///
/// The half shift is exactly K nodes, so no interpolation is involved. The
/// samples start one unit left of the grid so that R is exact beyond them.
pub fn denormalize_profile(w: &GridProfile, fd: &FrontData) -> PhysicalProfile {
    let g = w.grid;
    let k = g.k() as isize;
    let d = g.cells() as isize;
    let u = Extended::from_profile(w).average(g.k());
    let (rm, rj) = (fd.r_mean(), fd.r_jump());
    let (vm, vj) = (fd.v_mean(), fd.v_jump());
    let idx: Vec<isize> = (-2 * k..=d).collect();
    PhysicalProfile {
        phi: idx.iter().map(|&i| g.phi(i)).collect(),
        r: idx.iter().map(|&i| rm + 0.5 * rj * u.get(i + k)).collect(),
        v: idx.iter().map(|&i| vm + 0.5 * vj * w.get(i)).collect(),
        r_minus: rm + 0.5 * rj * w.left_value,
        r_plus: rm + 0.5 * rj * w.right_value,
        v_minus: vm + 0.5 * vj * w.left_value,
        v_plus: vm + 0.5 * vj * w.right_value,
    }
}
