//! 2D Zak phase from discretized Wilson loops of the lower band.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{fold, lower_band_state_raw, Momentum};
use crate::error::{Error, Result};
use crate::lattice::HoppingSet;

/// Smallest gap tolerated along a Wilson line.
pub const LINE_GAP_MIN: f64 = 1e-9;

/// Per-line spread above which the phase is reported as not quantized.
pub const QUANTIZATION_SPREAD: f64 = 0.01 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    X,
    Y,
}

impl Direction {
    pub fn label(self) -> char {
        match self {
            Direction::X => 'x',
            Direction::Y => 'y',
        }
    }

    fn momentum(self, along: f64, transverse: f64) -> Momentum {
        match self {
            Direction::X => Momentum::raw(along, transverse),
            Direction::Y => Momentum::raw(transverse, along),
        }
    }
}

/// Berry phase of the lower band along a closed line crossing the zone in
/// `direction` at fixed transverse momentum. Gauge invariant; in `(-pi, pi]`.
pub fn line_berry_phase(
    h: &HoppingSet,
    direction: Direction,
    transverse_k: f64,
    steps: usize,
) -> Result<f64> {
    check_steps(steps)?;
    line_phase(h, direction, transverse_k, &phase_table(steps))
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 64 {
        return Err(Error::Range {
            name: "steps",
            value: steps as f64,
            expected: ">= 64",
        });
    }
    Ok(())
}

/// `(k_j, e^{i k_j})` for `k_j = -pi + 2 pi j / steps`.
fn phase_table(steps: usize) -> Vec<(f64, C64)> {
    (0..steps)
        .map(|j| {
            let k = -PI + 2.0 * PI * j as f64 / steps as f64;
            (k, C64::from_polar(1.0, k))
        })
        .collect()
}

fn line_phase(
    h: &HoppingSet,
    direction: Direction,
    transverse_k: f64,
    table: &[(f64, C64)],
) -> Result<f64> {
    let t = C64::from_polar(1.0, transverse_k);
    // n = jxp + jyp ey + (jx + jy ey) / ex
    let n_at = |e: C64| match direction {
        Direction::X => h.jxp + h.jyp * t + (h.jx + h.jy * t) * e.conj(),
        Direction::Y => h.jxp + h.jyp * e + (h.jx + h.jy * e) * t.conj(),
    };
    let mut states = Vec::with_capacity(table.len());
    for &(k, e) in table {
        let n = n_at(e);
        if 2.0 * n.norm() < LINE_GAP_MIN {
            let k = direction.momentum(k, transverse_k);
            return Err(Error::DegeneratePoint {
                kx: k.kx,
                ky: k.ky,
                gap: 2.0 * n.norm(),
            });
        }
        states.push(lower_band_state_raw(n));
    }
    // n(k) is 2 pi periodic in this basis, so the loop closes on itself.
    let mut product = C64::new(1.0, 0.0);
    for j in 0..states.len() {
        let (a, b) = (&states[j], &states[(j + 1) % states.len()]);
        let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
        product *= overlap / overlap.norm();
    }
    Ok(fold(-product.arg()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZakVector {
    pub zx: f64,
    pub zy: f64,
    pub per_line_x: Vec<f64>,
    pub per_line_y: Vec<f64>,
    /// Root-mean-square deviation of the per-line phases from their circular mean.
    pub std_x: f64,
    pub std_y: f64,
}

impl ZakVector {
    pub fn per_line_std(&self) -> f64 {
        self.std_x.max(self.std_y)
    }

    /// Distance of a phase to the nearest of {0, pi} modulo 2 pi.
    pub fn quantization_error(phase: f64) -> f64 {
        let to_zero = fold(phase).abs();
        let to_pi = (PI - fold(phase).abs()).abs();
        to_zero.min(to_pi)
    }

    /// Components rounded to 0 or 1 (units of pi) when within `tol` radians.
    pub fn quantized(&self, tol: f64) -> Option<(u8, u8)> {
        let q = |z: f64| {
            if fold(z).abs() <= tol {
                Some(0)
            } else if PI - fold(z).abs() <= tol {
                Some(1)
            } else {
                None
            }
        };
        Some((q(self.zx)?, q(self.zy)?))
    }
}

/// Circular mean and RMS circular deviation.
pub fn circular_stats(phases: &[f64]) -> (f64, f64) {
    let sum: C64 = phases.iter().map(|&p| C64::from_polar(1.0, p)).sum();
    let mean = fold(sum.arg());
    let var = phases
        .iter()
        .map(|&p| fold(p - mean).powi(2))
        .sum::<f64>()
        / phases.len() as f64;
    (mean, var.sqrt())
}

fn line_phases(h: &HoppingSet, direction: Direction, lines: usize, table: &[(f64, C64)]) -> Result<Vec<f64>> {
    (0..lines)
        .into_par_iter()
        .map(|t| {
            let transverse = -PI + 2.0 * PI * t as f64 / lines as f64;
            line_phase(h, direction, transverse, table)
        })
        .collect()
}

/// Averaged Wilson-loop phases along x and y, each in `(-pi, pi]`.
pub fn zak_vector(h: &HoppingSet, lines: usize, steps: usize) -> Result<ZakVector> {
    if lines == 0 {
        return Err(Error::Range {
            name: "lines",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let not_gapped = |e: Error| match e {
        Error::DegeneratePoint { gap, .. } => Error::NotGapped { min_gap: gap },
        other => other,
    };
    check_steps(steps)?;
    let table = phase_table(steps);
    let per_line_x = line_phases(h, Direction::X, lines, &table).map_err(not_gapped)?;
    let per_line_y = line_phases(h, Direction::Y, lines, &table).map_err(not_gapped)?;
    let (zx, std_x) = circular_stats(&per_line_x);
    let (zy, std_y) = circular_stats(&per_line_y);
    for (direction, spread) in [('x', std_x), ('y', std_y)] {
        if spread >= QUANTIZATION_SPREAD {
            return Err(Error::NonQuantized { direction, spread });
        }
    }
    Ok(ZakVector {
        zx,
        zy,
        per_line_x,
        per_line_y,
        std_x,
        std_y,
    })
}
