#![allow(dead_code)]

use lattice_fronts::{GridProfile, GridSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Sum of cos² bumps inside |φ| ≤ L − 3, zero tails.
pub fn bump_field(rng: &mut ChaCha8Rng, grid: GridSpec, bumps: usize, amp: f64) -> GridProfile {
    let lim = grid.half_width() - 3.0;
    let params: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| {
            let w = rng.random_range(0.3..2.0);
            let c = rng.random_range(-(lim - w)..(lim - w));
            let a = rng.random_range(-amp..amp);
            (c, w, a)
        })
        .collect();
    GridProfile::from_fn(grid, 0.0, 0.0, |phi| {
        params
            .iter()
            .map(|&(c, w, a)| {
                let x = (phi - c) / w;
                if x.abs() < 1.0 {
                    a * (0.5 * std::f64::consts::PI * x).cos().powi(2)
                } else {
                    0.0
                }
            })
            .sum()
    })
}

/// sin(πφ/(2a)) on |φ| < a, ±1 beyond.
pub fn smooth_front(grid: GridSpec, a: f64) -> GridProfile {
    GridProfile::from_fn(grid, -1.0, 1.0, |phi| {
        if phi <= -a {
            -1.0
        } else if phi >= a {
            1.0
        } else {
            (0.5 * std::f64::consts::PI * phi / a).sin()
        }
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
