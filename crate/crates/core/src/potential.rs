//! Interaction potentials Φ and the front defect Ψ(u) = u²/2 − Φ(u).
//!
//! Every built-in family is defined through Ψ and its derivative, so that
//! Φ = u²/2 − Ψ and Φ′ = u − Ψ′ hold identically. Three families are
//! normalized (Φ′(±1) = ±1) and exercise different admissibility regimes:
//!
//! | family           | Ψ(u)                                | status                     |
//! |------------------|-------------------------------------|----------------------------|
//! | `quartic`        | β(u²−1)²                            | admissible                 |
//! | `graph_violating`| β(u²−1)²(u²+c), −1 < c < 0          | Ψ < 0 near 0, violates (G) |
//! | `tilted`         | β(u²−1)² + ε(u³−3u−2)/2             | Φ(+1) − Φ(−1) = 2ε ≠ 0     |
//!
//! `harmonic` (Ψ ≡ 0) is the degenerate reference, `user_table` interpolates
//! tabulated Φ values, and [`Potential::affine`] composes any potential with
//! an affine change of variables, which is how physical (non-normalized)
//! potentials and the normalized potential of a front are represented.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of samples for dense scans.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// Default tolerance of the assumption checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("no invariant interval [-Γ, Γ] found below search limit {0}")]
    NotFound(f64),
    #[error("invalid potential table: {0}")]
    InvalidTable(String),
    #[error("invalid potential parameter: {0}")]
    InvalidParameter(String),
}

/// Built-in potential families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Quartic {
        beta: f64,
    },
    GraphViolating {
        beta: f64,
        c: f64,
    },
    Tilted {
        beta: f64,
        epsilon: f64,
    },
    /// Φ(u) = u²/2, so Ψ ≡ 0 and Φ′(u) = u.
    Harmonic,
    UserTable {
        samples: Vec<[f64; 2]>,
    },
}

/// Φ(u) = value_scale · Φ_inner(arg_scale · u + arg_shift) + slope · u + offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMap {
    pub arg_scale: f64,
    pub arg_shift: f64,
    pub value_scale: f64,
    pub slope: f64,
    pub offset: f64,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            arg_scale: 1.0,
            arg_shift: 0.0,
            value_scale: 1.0,
            slope: 0.0,
            offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Quartic {
        beta: f64,
    },
    GraphViolating {
        beta: f64,
        c: f64,
    },
    Tilted {
        beta: f64,
        epsilon: f64,
    },
    Harmonic,
    Table(MonotoneCubic),
    Affine {
        inner: Box<Potential>,
        map: AffineMap,
    },
}

/// An interaction potential. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: Kind,
}

impl Potential {
    pub fn quartic(beta: f64) -> Self {
        Potential {
            kind: Kind::Quartic { beta },
        }
    }

    pub fn graph_violating(beta: f64, c: f64) -> Self {
        Potential {
            kind: Kind::GraphViolating { beta, c },
        }
    }

    pub fn tilted(beta: f64, epsilon: f64) -> Self {
        Potential {
            kind: Kind::Tilted { beta, epsilon },
        }
    }

    pub fn harmonic() -> Self {
        Potential {
            kind: Kind::Harmonic,
        }
    }

    /// Potential interpolating the tabulated pairs `(u, Φ(u))`.
    pub fn user_table(samples: &[[f64; 2]]) -> Result<Self, PotentialError> {
        Ok(Potential {
            kind: Kind::Table(MonotoneCubic::new(samples)?),
        })
    }

    pub fn from_family(family: &Family) -> Result<Self, PotentialError> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(PotentialError::InvalidParameter(format!(
                    "{name} must be finite"
                )))
            }
        };
        match family {
            Family::Quartic { beta } => {
                finite("beta", *beta)?;
                Ok(Self::quartic(*beta))
            }
            Family::GraphViolating { beta, c } => {
                finite("beta", *beta)?;
                finite("c", *c)?;
                if !(*c > -1.0 && *c < 0.0) {
                    return Err(PotentialError::InvalidParameter(format!(
                        "graph_violating requires c in (-1, 0), got {c}"
                    )));
                }
                Ok(Self::graph_violating(*beta, *c))
            }
            Family::Tilted { beta, epsilon } => {
                finite("beta", *beta)?;
                finite("epsilon", *epsilon)?;
                Ok(Self::tilted(*beta, *epsilon))
            }
            Family::Harmonic => Ok(Self::harmonic()),
            Family::UserTable { samples } => Self::user_table(samples),
        }
    }

    /// Composes `inner` with an affine change of variables, see [`AffineMap`].
    pub fn affine(inner: Potential, map: AffineMap) -> Self {
        Potential {
            kind: Kind::Affine {
                inner: Box::new(inner),
                map,
            },
        }
    }

    /// Interaction potential Φ(u).
    pub fn phi(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Table(t) => t.value(u),
            Kind::Affine { inner, map } => {
                map.value_scale * inner.phi(map.arg_scale * u + map.arg_shift)
                    + map.slope * u
                    + map.offset
            }
            _ => 0.5 * u * u - self.psi(u),
        }
    }

    /// Force Φ′(u).
    pub fn dphi(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Table(t) => t.derivative(u),
            Kind::Affine { inner, map } => {
                map.value_scale * map.arg_scale * inner.dphi(map.arg_scale * u + map.arg_shift)
                    + map.slope
            }
            _ => u - self.dpsi(u),
        }
    }

    /// Defect Ψ(u) = u²/2 − Φ(u).
    pub fn psi(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { beta } => {
                let s = u * u - 1.0;
                beta * s * s
            }
            Kind::GraphViolating { beta, c } => {
                let s = u * u - 1.0;
                beta * s * s * (u * u + c)
            }
            Kind::Tilted { beta, epsilon } => {
                let s = u * u - 1.0;
                beta * s * s + 0.5 * epsilon * (u * u * u - 3.0 * u - 2.0)
            }
            Kind::Harmonic => 0.0,
            Kind::Table(_) | Kind::Affine { .. } => 0.5 * u * u - self.phi(u),
        }
    }

    /// Ψ′(u) = u − Φ′(u).
    pub fn dpsi(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { beta } => 4.0 * beta * u * (u * u - 1.0),
            Kind::GraphViolating { beta, c } => {
                2.0 * beta * u * (u * u - 1.0) * (3.0 * u * u + 2.0 * c - 1.0)
            }
            Kind::Tilted { beta, epsilon } => {
                4.0 * beta * u * (u * u - 1.0) + 1.5 * epsilon * (u * u - 1.0)
            }
            Kind::Harmonic => 0.0,
            Kind::Table(_) | Kind::Affine { .. } => u - self.dphi(u),
        }
    }

    /// Φ″(u) by central differences of Φ′.
    pub fn ddphi(&self, u: f64) -> f64 {
        (self.dphi(u + FD_STEP) - self.dphi(u - FD_STEP)) / (2.0 * FD_STEP)
    }

    /// Ψ″(u) = 1 − Φ″(u).
    pub fn ddpsi(&self, u: f64) -> f64 {
        (self.dpsi(u + FD_STEP) - self.dpsi(u - FD_STEP)) / (2.0 * FD_STEP)
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Quartic { beta } => format!("quartic(beta={beta})"),
            Kind::GraphViolating { beta, c } => format!("graph_violating(beta={beta}, c={c})"),
            Kind::Tilted { beta, epsilon } => format!("tilted(beta={beta}, epsilon={epsilon})"),
            Kind::Harmonic => "harmonic".to_string(),
            Kind::Table(t) => format!("user_table({} knots)", t.knots.len()),
            Kind::Affine { inner, .. } => format!("affine({})", inner.label()),
        }
    }
}

/// Outcome of the sample-based admissibility checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub graph_ok: bool,
    pub genericity_ok: bool,
    pub monotone_tails_ok: bool,
    pub supersonic_ok: bool,
    pub gamma: Option<f64>,
    pub psi_min: f64,
    pub psi_argmin: f64,
    pub psi_at_minus_one: f64,
    pub psi_at_plus_one: f64,
    pub ddphi_at_minus_one: f64,
    pub ddphi_at_plus_one: f64,
    /// Onsets (u₀⁻, u₀⁺) of the monotone tails, when found.
    pub tail_onsets: Option<(f64, f64)>,
    pub scan_interval: (f64, f64),
    pub tolerance: f64,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.graph_ok
            && self.genericity_ok
            && self.monotone_tails_ok
            && self.supersonic_ok
            && self.gamma.is_some()
    }

    /// Machine-readable name of the first failing condition.
    pub fn failure_reason(&self) -> Option<&'static str> {
        if !self.graph_ok {
            Some("graph_condition")
        } else if !self.genericity_ok {
            Some("genericity")
        } else if !self.supersonic_ok {
            Some("supersonic")
        } else if !self.monotone_tails_ok {
            Some("monotone_tails")
        } else if self.gamma.is_none() {
            Some("invariant_set")
        } else {
            None
        }
    }
}

fn uniform_samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + step * k as f64 })
}

/// Samples Ψ on `[-scan_halfwidth, scan_halfwidth]` and evaluates the
/// graph, genericity, monotone-tail and supersonic conditions.
pub fn check_assumptions(
    pot: &Potential,
    scan_halfwidth: f64,
    n_samples: usize,
    tol: f64,
) -> Result<AssumptionReport, PotentialError> {
    if !(scan_halfwidth >= 2.0) {
        return Err(PotentialError::InvalidScan(format!(
            "scan half-width {scan_halfwidth} < 2"
        )));
    }
    if n_samples < 1000 {
        return Err(PotentialError::InvalidScan(format!(
            "{n_samples} samples < 1000"
        )));
    }
    let a = scan_halfwidth;
    let spacing = 2.0 * a / (n_samples - 1) as f64;
    let delta = 10.0 * spacing;

    let mut psi_min = f64::INFINITY;
    let mut psi_argmin = 0.0;
    let mut positive_off_wells = true;
    for u in uniform_samples(-a, a, n_samples) {
        let p = pot.psi(u);
        if p < psi_min {
            psi_min = p;
            psi_argmin = u;
        }
        let near_well = (u + 1.0).abs() <= delta || (u - 1.0).abs() <= delta;
        if !near_well && !(p > tol) {
            positive_off_wells = false;
        }
    }

    let ddpsi_minus = pot.ddpsi(-1.0);
    let ddpsi_plus = pot.ddpsi(1.0);
    let curvature_ok = ddpsi_minus > tol && ddpsi_plus > tol;

    let tail_onsets = monotone_tail_onsets(pot, a, n_samples);
    let gamma = compute_invariant_bound(pot, a.max(10.0)).ok();

    Ok(AssumptionReport {
        graph_ok: psi_min >= -tol,
        genericity_ok: curvature_ok && positive_off_wells,
        monotone_tails_ok: tail_onsets.is_some(),
        supersonic_ok: pot.ddphi(-1.0) < 1.0 - tol && pot.ddphi(1.0) < 1.0 - tol,
        gamma,
        psi_min,
        psi_argmin,
        psi_at_minus_one: pot.psi(-1.0),
        psi_at_plus_one: pot.psi(1.0),
        ddphi_at_minus_one: pot.ddphi(-1.0),
        ddphi_at_plus_one: pot.ddphi(1.0),
        tail_onsets,
        scan_interval: (-a, a),
        tolerance: tol,
    })
}

/// Runs [`check_assumptions`] with the default scan: half-width 3Γ (at
/// least 2), 10⁵ samples, tolerance 1e−10.
pub fn check_assumptions_default(pot: &Potential) -> AssumptionReport {
    let gamma = compute_invariant_bound(pot, 10.0).unwrap_or(1.0);
    check_assumptions(
        pot,
        (3.0 * gamma).max(2.0),
        DEFAULT_SAMPLES,
        DEFAULT_TOLERANCE,
    )
    .expect("default scan parameters are valid")
}

/// Finds u₀⁻ < u₀⁺ such that Ψ′ < 0 on all samples left of u₀⁻ and Ψ′ > 0
/// on all samples right of u₀⁺, each stretch reaching the scan boundary.
fn monotone_tail_onsets(pot: &Potential, a: f64, n: usize) -> Option<(f64, f64)> {
    let samples: Vec<f64> = uniform_samples(-a, a, n).collect();
    let mut right = None;
    for &u in samples.iter().rev() {
        if pot.dpsi(u) > 0.0 {
            right = Some(u);
        } else {
            break;
        }
    }
    let mut left = None;
    for &u in samples.iter() {
        if pot.dpsi(u) < 0.0 {
            left = Some(u);
        } else {
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) if l < -1.0 && r > 1.0 => Some((l, r)),
        _ => None,
    }
}

/// Maximum of |Φ′| on [−g, g]: dense sampling refined by golden-section
/// search around the best sample.
fn max_abs_force(pot: &Potential, g: f64) -> f64 {
    let n = DEFAULT_SAMPLES + 1;
    let step = 2.0 * g / (n - 1) as f64;
    let f = |u: f64| pot.dphi(u).abs();
    let (mut best_u, mut best) = (-g, f(-g));
    for u in uniform_samples(-g, g, n) {
        let v = f(u);
        if v > best {
            best = v;
            best_u = u;
        }
    }
    let lo = (best_u - step).max(-g);
    let hi = (best_u + step).min(g);
    best.max(golden_max(f, lo, hi))
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(lo)).max(f(hi))
}

/// Computes Γ > 1 with Φ′([−Γ, Γ]) ⊆ [−Γ, Γ].
///
/// First locates the smallest sampled Γ̃ > 1 beyond which Φ′(u) < u on the
/// right and Φ′(u) > u on the left (up to `search_limit`), then takes
/// Γ = max(Γ̃, max_{|u|≤Γ̃} |Φ′(u)|) and enlarges it until the containment
/// holds on a dense sample.
pub fn compute_invariant_bound(pot: &Potential, search_limit: f64) -> Result<f64, PotentialError> {
    if !(search_limit > 1.0) {
        return Err(PotentialError::InvalidScan(format!(
            "search limit {search_limit} must exceed 1"
        )));
    }
    let n = DEFAULT_SAMPLES + 1;
    let step = 2.0 * search_limit / (n - 1) as f64;
    let mut gamma_tilde = f64::NAN;
    let mut last_fail: f64 = 1.0;
    for u in uniform_samples(-search_limit, search_limit, n) {
        if u > 1.0 {
            if gamma_tilde.is_nan() {
                gamma_tilde = u;
            }
            if !(pot.dphi(u) < u) {
                last_fail = last_fail.max(u);
            }
            if !(pot.dphi(-u) > -u) {
                last_fail = last_fail.max(u);
            }
        }
    }
    if last_fail >= search_limit - 0.5 * step {
        return Err(PotentialError::NotFound(search_limit));
    }
    if last_fail > 1.0 {
        gamma_tilde = gamma_tilde.max(last_fail);
    }

    let mut gamma = gamma_tilde.max(max_abs_force(pot, gamma_tilde));
    for _ in 0..64 {
        if gamma > search_limit {
            break;
        }
        let m = max_abs_force(pot, gamma);
        if m <= gamma {
            return Ok(gamma);
        }
        gamma = m;
    }
    Err(PotentialError::NotFound(search_limit))
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes.
#[derive(Debug, Clone, PartialEq)]
struct MonotoneCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(samples: &[[f64; 2]]) -> Result<Self, PotentialError> {
        if samples.len() < 3 {
            return Err(PotentialError::InvalidTable(
                "at least three samples are required".into(),
            ));
        }
        if samples.iter().flatten().any(|x| !x.is_finite()) {
            return Err(PotentialError::InvalidTable("non-finite entry".into()));
        }
        if samples.windows(2).any(|w| !(w[1][0] > w[0][0])) {
            return Err(PotentialError::InvalidTable(
                "abscissae must be strictly increasing".into(),
            ));
        }
        let knots: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        let values: Vec<f64> = samples.iter().map(|s| s[1]).collect();
        let n = knots.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (values[k + 1] - values[k]) / (knots[k + 1] - knots[k]))
            .collect();

        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            slopes[k] = if secants[k - 1] * secants[k] <= 0.0 {
                0.0
            } else {
                0.5 * (secants[k - 1] + secants[k])
            };
        }
        for k in 0..n - 1 {
            if secants[k] == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let alpha = slopes[k] / secants[k];
            let beta = slopes[k + 1] / secants[k];
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[k] = tau * alpha * secants[k];
                slopes[k + 1] = tau * beta * secants[k];
            }
        }
        Ok(MonotoneCubic {
            knots,
            values,
            slopes,
        })
    }

    /// Interval index; the end intervals extend to ±∞.
    fn interval(&self, u: f64) -> usize {
        let n = self.knots.len();
        match self.knots.partition_point(|&k| k <= u) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    fn value(&self, u: f64) -> f64 {
        let k = self.interval(u);
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let dx = x1 - x0;
        let t = (u - x0) / dx;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.values[k]
            + h10 * dx * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * dx * self.slopes[k + 1]
    }

    fn derivative(&self, u: f64) -> f64 {
        let k = self.interval(u);
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let dx = x1 - x0;
        let t = (u - x0) / dx;
        let (d00, d10, d01, d11) = (
            6.0 * t * t - 6.0 * t,
            3.0 * t * t - 4.0 * t + 1.0,
            -6.0 * t * t + 6.0 * t,
            3.0 * t * t - 2.0 * t,
        );
        (d00 * self.values[k] + d01 * self.values[k + 1]) / dx
            + d10 * self.slopes[k]
            + d11 * self.slopes[k + 1]
    }
}
