//! Direct integration of the chain ṙ_j = v_{j+1} − v_j, v̇_j = Φ′(r_j) − Φ′(r_{j−1})
//! and travelling-wave checks on the result.
//!
//! Ghost values r_{−1} = r₋ and v_n = v₊ are frozen. The integrator is
//! kick-drift-kick velocity Verlet, i.e. leapfrog on the atom positions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::macroscopic::{denormalize_profile, FrontData, PhysicalProfile};
use crate::potential::Potential;
use crate::solver::{Outcome, RunResult};

pub const MAX_DT: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("not a front: {0}")]
    NotAFront(String),
    #[error("blow-up at t = {t}: max |r_j| = {max_abs}")]
    BlowUp { t: f64, max_abs: f64 },
    #[error("time step {0} outside (0, {MAX_DT}]")]
    InvalidStep(f64),
    #[error("front at {position} is within {guard} atoms of the chain end at t = {t}")]
    FrontNearBoundary { t: f64, position: f64, guard: f64 },
    #[error("invalid lattice setup: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub r_minus: f64,
    pub v_minus: f64,
    pub r_plus: f64,
    pub v_plus: f64,
}

impl ChainState {
    pub fn constant(n_atoms: usize, r: f64, v: f64, dt: f64) -> Self {
        ChainState {
            r: vec![r; n_atoms],
            v: vec![v; n_atoms],
            t: 0.0,
            dt,
            r_minus: r,
            v_minus: v,
            r_plus: r,
            v_plus: v,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.r.len()
    }

    /// Σ ½v_j² + Φ(r_j).
    pub fn energy(&self, pot: &Potential) -> f64 {
        self.r
            .iter()
            .zip(&self.v)
            .map(|(&r, &v)| 0.5 * v * v + pot.phi(r))
            .sum()
    }

    /// Rate of energy inflow through the ghosts, Φ′(r_{n−1})v_n − Φ′(r_{−1})v_0.
    pub fn boundary_flux(&self, pot: &Potential) -> f64 {
        let n = self.r.len();
        pot.dphi(self.r[n - 1]) * self.v_plus - pot.dphi(self.r_minus) * self.v[0]
    }

    /// Velocities (ghosts included) negated.
    pub fn reversed(&self) -> Self {
        ChainState {
            v: self.v.iter().map(|v| -v).collect(),
            v_minus: -self.v_minus,
            v_plus: -self.v_plus,
            ..self.clone()
        }
    }

    fn kick(&mut self, pot: &Potential, tau: f64, force: &mut [f64]) {
        let mut prev = pot.dphi(self.r_minus);
        for (j, &r) in self.r.iter().enumerate() {
            let cur = pot.dphi(r);
            force[j] = cur - prev;
            prev = cur;
        }
        for (v, f) in self.v.iter_mut().zip(force.iter()) {
            *v += tau * f;
        }
    }

    fn drift(&mut self, tau: f64) {
        let n = self.r.len();
        for j in 0..n {
            let next = if j + 1 < n {
                self.v[j + 1]
            } else {
                self.v_plus
            };
            self.r[j] += tau * (next - self.v[j]);
        }
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Advances by `duration`, calling `observe` after every step.
pub fn evolve_observed(
    state: &ChainState,
    pot: &Potential,
    duration: f64,
    blowup_limit: f64,
    observe: &mut dyn FnMut(&ChainState),
) -> Result<ChainState, LatticeError> {
    let dt = state.dt;
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(LatticeError::InvalidStep(dt));
    }
    let steps = (duration / dt).round() as usize;
    let t0 = state.t;
    let mut s = state.clone();
    let mut force = vec![0.0; s.r.len()];
    for k in 1..=steps {
        s.kick(pot, 0.5 * dt, &mut force);
        s.drift(dt);
        s.kick(pot, 0.5 * dt, &mut force);
        s.t = t0 + k as f64 * dt;
        let m = max_abs(&s.r);
        if !(m <= blowup_limit) {
            return Err(LatticeError::BlowUp { t: s.t, max_abs: m });
        }
        observe(&s);
    }
    Ok(s)
}

pub fn evolve(
    state: &ChainState,
    pot: &Potential,
    duration: f64,
    blowup_limit: f64,
) -> Result<ChainState, LatticeError> {
    evolve_observed(state, pot, duration, blowup_limit, &mut |_| {})
}

/// r_j = R(j − offset), v_j = V(j − offset).
pub fn init_from_profile(
    profile: &PhysicalProfile,
    n_atoms: usize,
    offset: f64,
    dt: f64,
) -> ChainState {
    let phis = (0..n_atoms).map(|j| j as f64 - offset);
    ChainState {
        r: phis.clone().map(|p| profile.r_at(p)).collect(),
        v: phis.map(|p| profile.v_at(p)).collect(),
        t: 0.0,
        dt,
        r_minus: profile.r_minus,
        v_minus: profile.v_minus,
        r_plus: profile.r_plus,
        v_plus: profile.v_plus,
    }
}

pub fn init_from_front(
    result: &RunResult,
    fd: &FrontData,
    n_atoms: usize,
    offset: f64,
    dt: f64,
) -> Result<ChainState, LatticeError> {
    if result.outcome != Outcome::FrontConverged {
        return Err(LatticeError::NotAFront(format!(
            "outcome is {}",
            result.outcome.as_str()
        )));
    }
    Ok(init_from_profile(
        &denormalize_profile(&result.profile, fd),
        n_atoms,
        offset,
        dt,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub n_atoms: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Number of comparison times in (0, t_final].
    pub samples: usize,
    pub error_budget: f64,
    pub speed_tolerance: f64,
    pub energy_budget: f64,
    pub residual_budget: f64,
    pub boundary_guard: f64,
    /// Defaults to 10·max(1, |r₋|, |r₊|).
    pub blowup_limit: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_atoms: 400,
            dt: 0.01,
            t_final: 20.0,
            samples: 20,
            error_budget: 0.05,
            speed_tolerance: 0.02,
            energy_budget: 1e-4,
            residual_budget: 0.02,
            boundary_guard: 20.0,
            blowup_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub r_error: f64,
    pub v_error: f64,
    pub front_position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub sigma: f64,
    pub offset: f64,
    pub error_curve: Vec<ErrorSample>,
    pub sup_error: f64,
    pub measured_speed: f64,
    pub speed_relative_error: f64,
    pub energy_law_residual: f64,
    pub energy_drift_relative: f64,
    pub profile_ok: bool,
    pub speed_ok: bool,
    pub energy_ok: bool,
    pub residual_ok: bool,
    pub passed: bool,
}

/// Crossing of v through `level` nearest to `expected`, by linear interpolation.
fn crossing(v: &[f64], level: f64, expected: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for j in 0..v.len().saturating_sub(1) {
        let (a, b) = (v[j] - level, v[j + 1] - level);
        if a == 0.0 || a * b < 0.0 {
            let x = j as f64 + if a == 0.0 { 0.0 } else { a / (a - b) };
            if best.is_none_or(|y| (x - expected).abs() < (y - expected).abs()) {
                best = Some(x);
            }
        }
    }
    best
}

fn interp_series(ts: &[f64], xs: &[f64], t: f64) -> f64 {
    let dt = ts[1] - ts[0];
    let x = ((t - ts[0]) / dt).clamp(0.0, (ts.len() - 1) as f64);
    let i = (x.floor() as usize).min(ts.len() - 2);
    let w = x - i as f64;
    (1.0 - w) * xs[i] + w * xs[i + 1]
}

/// Evolves the chain started on the front and compares against translation at σ.
pub fn verify_front(
    profile: &PhysicalProfile,
    fd: &FrontData,
    pot: &Potential,
    cfg: &VerifyConfig,
) -> Result<VerifyReport, LatticeError> {
    let sigma = fd.sigma;
    let n = cfg.n_atoms;
    if cfg.samples == 0 || !(cfg.t_final > 0.0) {
        return Err(LatticeError::InvalidSetup(
            "need t_final > 0 and samples ≥ 1".into(),
        ));
    }
    if !(sigma.abs() > 0.0) {
        return Err(LatticeError::InvalidSetup("wave speed is zero".into()));
    }
    let offset = 0.5 * n as f64 - 0.5 * sigma * cfg.t_final;
    for t in [0.0, cfg.t_final] {
        let pos = offset + sigma * t;
        if pos < cfg.boundary_guard || pos > n as f64 - 1.0 - cfg.boundary_guard {
            return Err(LatticeError::FrontNearBoundary {
                t,
                position: pos,
                guard: cfg.boundary_guard,
            });
        }
    }
    let limit = cfg
        .blowup_limit
        .unwrap_or(10.0 * 1f64.max(fd.r_minus.abs()).max(fd.r_plus.abs()));
    let state0 = init_from_profile(profile, n, offset, cfg.dt);
    let e0 = state0.energy(pot);
    let v_level = fd.v_mean();

    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let stride = (steps / cfg.samples).max(1);
    let probe = (offset + 0.5 * sigma * cfg.t_final).round() as usize;

    let mut ts = vec![0.0];
    let mut probe_r = vec![state0.r[probe]];
    let mut probe_v = vec![state0.v[probe]];
    let mut flux_integral = 0.0;
    let mut prev_flux = state0.boundary_flux(pot);
    let mut max_drift: f64 = 0.0;
    let mut curve = Vec::new();
    let mut step = 0usize;
    let mut guard_error = None;

    let mut observe = |s: &ChainState| {
        step += 1;
        let flux = s.boundary_flux(pot);
        flux_integral += 0.5 * s.dt * (prev_flux + flux);
        prev_flux = flux;
        max_drift = max_drift.max((s.energy(pot) - e0 - flux_integral).abs());
        ts.push(s.t);
        probe_r.push(s.r[probe]);
        probe_v.push(s.v[probe]);
        if step.is_multiple_of(stride) || step == steps {
            let expected = offset + sigma * s.t;
            let mut r_err: f64 = 0.0;
            let mut v_err: f64 = 0.0;
            for j in 0..n {
                let phi = j as f64 - expected;
                r_err = r_err.max((s.r[j] - profile.r_at(phi)).abs());
                v_err = v_err.max((s.v[j] - profile.v_at(phi)).abs());
            }
            let pos = crossing(&s.v, v_level, expected).unwrap_or(f64::NAN);
            if !(pos >= cfg.boundary_guard && pos <= n as f64 - 1.0 - cfg.boundary_guard)
                && guard_error.is_none()
            {
                guard_error = Some(LatticeError::FrontNearBoundary {
                    t: s.t,
                    position: pos,
                    guard: cfg.boundary_guard,
                });
            }
            curve.push(ErrorSample {
                t: s.t,
                r_error: r_err,
                v_error: v_err,
                front_position: pos,
            });
        }
    };
    evolve_observed(&state0, pot, cfg.t_final, limit, &mut observe)?;
    if let Some(e) = guard_error {
        return Err(e);
    }

    let sup_error = curve
        .iter()
        .map(|c| c.r_error.max(c.v_error))
        .fold(0.0, f64::max);

    let pos0 = crossing(&state0.v, v_level, offset).unwrap_or(f64::NAN);
    let (mut st, mut sx, mut stt, mut stx) = (0.0, 0.0, 0.0, 0.0);
    let pts: Vec<(f64, f64)> = std::iter::once((0.0, pos0))
        .chain(curve.iter().map(|c| (c.t, c.front_position)))
        .collect();
    let m = pts.len() as f64;
    for &(t, x) in &pts {
        st += t;
        sx += x;
        stt += t * t;
        stx += t * x;
    }
    let measured_speed = (m * stx - st * sx) / (m * stt - st * st);
    let speed_relative_error = ((measured_speed - sigma) / sigma).abs();

    let residual = energy_law_residual(&ts, &probe_r, &probe_v, sigma, pot);

    let energy_drift_relative = max_drift / e0.abs().max(1e-300);
    let profile_ok = sup_error <= cfg.error_budget;
    let speed_ok = speed_relative_error <= cfg.speed_tolerance;
    let energy_ok = energy_drift_relative <= cfg.energy_budget;
    let residual_ok = residual <= cfg.residual_budget;
    Ok(VerifyReport {
        sigma,
        offset,
        error_curve: curve,
        sup_error,
        measured_speed,
        speed_relative_error,
        energy_law_residual: residual,
        energy_drift_relative,
        profile_ok,
        speed_ok,
        energy_ok,
        residual_ok,
        passed: profile_ok && speed_ok && energy_ok && residual_ok,
    })
}

/// Sup over t of |σ e′(φ) + Φ′(R(φ))V(φ+1) − Φ′(R(φ−1))V(φ)| with e = ½V² + Φ(R),
/// where R, V are read off the time series of a single atom through
/// φ = const − σt. Shifts in φ become time shifts of ∓1/σ (linear
/// interpolation); the φ-derivative is a central difference in time.
pub fn energy_law_residual(ts: &[f64], r: &[f64], v: &[f64], sigma: f64, pot: &Potential) -> f64 {
    if ts.len() < 3 {
        return 0.0;
    }
    let shift = 1.0 / sigma;
    let (t_lo, t_hi) = (ts[0] + shift.abs(), ts[ts.len() - 1] - shift.abs());
    let e = |i: usize| 0.5 * v[i] * v[i] + pot.phi(r[i]);
    let mut residual: f64 = 0.0;
    for k in 1..ts.len() - 1 {
        let t = ts[k];
        if t < t_lo || t > t_hi {
            continue;
        }
        let de = (e(k + 1) - e(k - 1)) / (ts[k + 1] - ts[k - 1]);
        let v_ahead = interp_series(ts, v, t - shift);
        let r_behind = interp_series(ts, r, t + shift);
        let res = -de + pot.dphi(r[k]) * v_ahead - pot.dphi(r_behind) * v[k];
        residual = residual.max(res.abs());
    }
    residual
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_is_equilibrium() {
        let pot = Potential::quartic(0.05);
        let s = ChainState::constant(50, 1.0, -1.0, 0.01);
        let out = evolve(&s, &pot, 5.0, 100.0).unwrap();
        assert_eq!(out.r, s.r);
        assert_eq!(out.v, s.v);
        let ts: Vec<f64> = (0..500).map(|k| 0.01 * k as f64).collect();
        let r = vec![1.0; 500];
        let v = vec![-1.0; 500];
        assert_eq!(energy_law_residual(&ts, &r, &v, 1.0, &pot), 0.0);
    }

    #[test]
    fn step_bound() {
        let s = ChainState::constant(10, 0.0, 0.0, 0.1);
        assert!(matches!(
            evolve(&s, &Potential::quartic(0.05), 1.0, 10.0),
            Err(LatticeError::InvalidStep(_))
        ));
    }

    fn bump_state(dt: f64) -> ChainState {
        let mut s = ChainState::constant(60, 0.0, 0.0, dt);
        for j in 0..60 {
            let x = (j as f64 - 30.0) / 5.0;
            s.r[j] = 0.3 * (-x * x).exp();
        }
        s
    }

    #[test]
    fn time_reversible() {
        let pot = Potential::quartic(0.3);
        let s0 = bump_state(0.01);
        let fwd = evolve(&s0, &pot, 1.0, 100.0).unwrap();
        let back = evolve(&fwd.reversed(), &pot, 1.0, 100.0)
            .unwrap()
            .reversed();
        for j in 0..s0.n_atoms() {
            assert!((back.r[j] - s0.r[j]).abs() < 1e-8);
            assert!((back.v[j] - s0.v[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn second_order_in_time() {
        let pot = Potential::quartic(0.3);
        let run = |dt: f64| evolve(&bump_state(dt), &pot, 2.0, 100.0).unwrap();
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let e1 = max_abs(&a.r.iter().zip(&b.r).map(|(x, y)| x - y).collect::<Vec<_>>());
        let e2 = max_abs(&b.r.iter().zip(&c.r).map(|(x, y)| x - y).collect::<Vec<_>>());
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn energy_balance_with_flux() {
        let pot = Potential::quartic(0.05);
        let mut s = ChainState::constant(80, -1.0, 1.0, 0.01);
        s.r_plus = 1.0;
        s.v_plus = -1.0;
        for j in 0..80 {
            let x = (j as f64 - 40.0) / 5.0;
            s.r[j] = x.tanh();
            s.v[j] = -0.8 * x.tanh();
        }
        let e0 = s.energy(&pot);
        let mut integral = 0.0;
        let mut prev = s.boundary_flux(&pot);
        let mut worst: f64 = 0.0;
        evolve_observed(&s, &pot, 5.0, 100.0, &mut |x| {
            let f = x.boundary_flux(&pot);
            integral += 0.5 * x.dt * (prev + f);
            prev = f;
            worst = worst.max((x.energy(&pot) - e0 - integral).abs());
        })
        .unwrap();
        assert!(worst / e0.abs() < 1e-4, "{worst}");
    }

    #[test]
    fn crossing_nearest_expected() {
        let v = [1.0, 1.0, -1.0, 1.0, -1.0, -1.0];
        assert_eq!(crossing(&v, 0.0, 1.4), Some(1.5));
        assert_eq!(crossing(&v, 0.0, 3.6), Some(3.5));
    }
}
