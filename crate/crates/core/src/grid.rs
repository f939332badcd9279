//! Uniform grids on [−L, L], profiles with constant extension, and the
//! discrete unit-window average 𝒜.
//!
//! Nodes are φ_i = −L + i·h for i = 0..=D with h = 2L/D. The window
//! [φ − ½, φ + ½] spans exactly 2K cells, K = 1/(2h), so 𝒜 is a fixed
//! symmetric stencil (composite trapezoid) and never interpolates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("window misaligned: 1/(2h) = {0} is not a positive integer")]
    WindowMisaligned(f64),
    #[error("half-width {0} is below the minimum of 2")]
    TooNarrow(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("integrand does not vanish outside the grid")]
    NonIntegrable,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// Grid geometry: half-width L and cell count D with K = D/(4L) ∈ ℕ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    cells: usize,
    k: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, cells: usize) -> Result<Self, GridError> {
        if !(half_width >= 2.0) {
            return Err(GridError::TooNarrow(half_width));
        }
        let k_real = cells as f64 / (4.0 * half_width);
        let k = k_real.round();
        if k < 1.0 || (k_real - k).abs() > 1e-9 * k {
            return Err(GridError::WindowMisaligned(k_real));
        }
        Ok(GridSpec {
            half_width,
            cells,
            k: k as usize,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.cells + 1
    }

    /// Nodes per half window.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        1.0 / (2 * self.k) as f64
    }

    /// φ_i, valid for any integer index (also outside 0..=D).
    pub fn phi(&self, i: isize) -> f64 {
        (2 * i - self.cells as isize) as f64 / (4 * self.k) as f64
    }

    /// Index of the node nearest to φ (may lie outside 0..=D).
    pub fn nearest_index(&self, phi: f64) -> isize {
        ((phi * (4 * self.k) as f64 + self.cells as f64) / 2.0).round() as isize
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells as isize).map(|i| self.phi(i)).collect()
    }
}

/// Values on the nodes 0..=D with constant extension to the left and right.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub left_value: f64,
    pub right_value: f64,
}

impl GridProfile {
    pub fn from_values(
        grid: GridSpec,
        values: Vec<f64>,
        left_value: f64,
        right_value: f64,
    ) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::WrongLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(GridProfile {
            grid,
            values,
            left_value,
            right_value,
        })
    }

    pub fn from_fn(
        grid: GridSpec,
        left_value: f64,
        right_value: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let values = (0..=grid.cells() as isize)
            .map(|i| f(grid.phi(i)))
            .collect();
        GridProfile {
            grid,
            values,
            left_value,
            right_value,
        }
    }

    /// The shock W_sh: −1 left of 0, +1 right of 0, and 0 at φ = 0.
    pub fn shock(grid: GridSpec) -> Self {
        Self::from_fn(grid, -1.0, 1.0, |phi| {
            if phi > 0.0 {
                1.0
            } else if phi < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self::from_fn(grid, c, c, |_| c)
    }

    /// Value at any integer index, using the constant extension.
    pub fn get(&self, i: isize) -> f64 {
        if i < 0 {
            self.left_value
        } else if i as usize >= self.values.len() {
            self.right_value
        } else {
            self.values[i as usize]
        }
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Shift by an integer number of nodes; vacated nodes take the extension values.
    pub fn shifted(&self, nodes: isize) -> Self {
        let values = (0..self.values.len() as isize)
            .map(|i| self.get(i - nodes))
            .collect();
        GridProfile {
            values,
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(self.left_value.abs().max(self.right_value.abs()), |m, v| {
                m.max(v.abs())
            })
    }

    /// max_i |W_{i+1} − W_i| / h, including the two joins with the extension.
    pub fn max_difference_quotient(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in -1..self.values.len() as isize {
            m = m.max((self.get(i + 1) - self.get(i)).abs());
        }
        m / self.h()
    }

    /// Linear interpolation at φ, constant extension outside [−L, L].
    pub fn interpolate(&self, phi: f64) -> f64 {
        let x = (phi + self.grid.half_width()) / self.h();
        if x <= 0.0 {
            return if x < 0.0 {
                self.left_value
            } else {
                self.values[0]
            };
        }
        let last = self.values.len() - 1;
        if x >= last as f64 {
            return if x > last as f64 {
                self.right_value
            } else {
                self.values[last]
            };
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    pub fn sub(&self, other: &GridProfile) -> Result<GridProfile, GridError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridProfile) -> Result<GridProfile, GridError> {
        self.zip(other, |a, b| a + b)
    }

    fn zip(
        &self,
        other: &GridProfile,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridProfile, GridError> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(GridProfile {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            left_value: f(self.left_value, other.left_value),
            right_value: f(self.right_value, other.right_value),
        })
    }

    pub fn scaled(&self, s: f64) -> GridProfile {
        GridProfile {
            grid: self.grid,
            values: self.values.iter().map(|v| s * v).collect(),
            left_value: s * self.left_value,
            right_value: s * self.right_value,
        }
    }
}

pub(crate) fn check_same_grid(a: &GridSpec, b: &GridSpec) -> Result<(), GridError> {
    if a == b {
        Ok(())
    } else {
        Err(GridError::GridMismatch(format!(
            "(L={}, D={}) vs (L={}, D={})",
            a.half_width(),
            a.cells(),
            b.half_width(),
            b.cells()
        )))
    }
}

/// Values on an arbitrary index range `first..first+len` of a grid, constant
/// outside it. Averaging one of these widens the stored range by K per side,
/// which is exactly the range on which the result can differ from the
/// extension values.
#[derive(Debug, Clone, PartialEq)]
pub struct Extended {
    pub first: isize,
    pub values: Vec<f64>,
    pub left: f64,
    pub right: f64,
}

impl Extended {
    pub fn from_profile(w: &GridProfile) -> Self {
        Extended {
            first: 0,
            values: w.values.clone(),
            left: w.left_value,
            right: w.right_value,
        }
    }

    pub fn last(&self) -> isize {
        self.first + self.values.len() as isize - 1
    }

    pub fn get(&self, i: isize) -> f64 {
        if i < self.first {
            self.left
        } else if i > self.last() {
            self.right
        } else {
            self.values[(i - self.first) as usize]
        }
    }

    /// Stored values on `lo..=hi` (extension values where not stored).
    pub fn window(&self, lo: isize, hi: isize) -> Vec<f64> {
        (lo..=hi).map(|i| self.get(i)).collect()
    }

    /// Enlarges the stored range to at least `lo..=hi`.
    pub fn padded(&self, lo: isize, hi: isize) -> Self {
        let lo = lo.min(self.first);
        let hi = hi.max(self.last());
        Extended {
            first: lo,
            values: self.window(lo, hi),
            left: self.left,
            right: self.right,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Extended {
            first: self.first,
            values: self.values.iter().map(|&v| f(v)).collect(),
            left: f(self.left),
            right: f(self.right),
        }
    }

    /// Composite-trapezoid unit-window average with half window `k` nodes.
    pub fn average(&self, k: usize) -> Self {
        let ki = k as isize;
        let padded = self.window(self.first - 2 * ki, self.last() + 2 * ki);
        let n_out = self.values.len() + 2 * k;
        let denom = (2 * k) as f64;
        let values = (0..n_out)
            .map(|m| {
                let w = &padded[m..=m + 2 * k];
                let inner: f64 = w[1..2 * k].iter().sum();
                (0.5 * (w[0] + w[2 * k]) + inner) / denom
            })
            .collect();
        Extended {
            first: self.first - ki,
            values,
            left: self.left,
            right: self.right,
        }
    }

    /// Trapezoid rule over the stored range.
    pub fn trapezoid(&self, h: f64) -> f64 {
        trapezoid(&self.values, h)
    }
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// U = 𝒜W on the nodes 0..=D, extended by the extension values of W.
pub fn apply_averaging(w: &GridProfile) -> GridProfile {
    let k = w.grid.k() as isize;
    let u = Extended::from_profile(w).average(w.grid.k());
    GridProfile {
        grid: w.grid,
        values: u.values[k as usize..k as usize + w.values.len()].to_vec(),
        left_value: w.left_value,
        right_value: w.right_value,
    }
}

/// 𝒜W on the whole range where it can differ from the extension values.
pub fn averaged_extended(w: &GridProfile) -> Extended {
    Extended::from_profile(w).average(w.grid.k())
}

/// Trapezoid approximation of ∫ W₁W₂ dφ over [−L, L]. Requires the product of
/// the extension values to vanish on both sides.
pub fn inner_product(a: &GridProfile, b: &GridProfile) -> Result<f64, GridError> {
    check_same_grid(&a.grid, &b.grid)?;
    if a.left_value * b.left_value != 0.0 || a.right_value * b.right_value != 0.0 {
        return Err(GridError::NonIntegrable);
    }
    let prod: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
    Ok(trapezoid(&prod, a.h()))
}

pub fn l2_norm(w: &GridProfile) -> Result<f64, GridError> {
    inner_product(w, w).map(f64::sqrt)
}

/// Spectral symbol of the unit-window average, ρ(k) = (2/k)·sin(k/2).
pub fn averaging_symbol(k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        2.0 / k * (0.5 * k).sin()
    }
}
