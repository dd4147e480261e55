//! Lattice Berry curvature from plaquette link products.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bloch::{closed_grid, lower_band_state_raw, off_diagonal, Momentum};
use crate::error::{Error, Result};
use crate::lattice::HoppingSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMap {
    pub grid_n: usize,
    /// Entry `iy * (grid_n - 1) + ix`, each in `(-pi, pi]`.
    pub plaquettes: Vec<f64>,
    pub chern: i32,
}

impl CurvatureMap {
    pub fn max_abs(&self) -> f64 {
        self.plaquettes.iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    pub fn total(&self) -> f64 {
        self.plaquettes.iter().sum()
    }
}

fn link(a: &[C64; 2], b: &[C64; 2]) -> C64 {
    let o = a[0].conj() * b[0] + a[1].conj() * b[1];
    o / o.norm()
}

/// Plaquette phases from lower-band states on a closed grid (`states[iy * n + ix]`).
pub fn plaquette_phases(states: &[[C64; 2]], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            let s = |x: usize, y: usize| &states[y * n + x];
            let w = link(s(ix, iy), s(ix + 1, iy))
                * link(s(ix + 1, iy), s(ix + 1, iy + 1))
                * link(s(ix + 1, iy + 1), s(ix, iy + 1))
                * link(s(ix, iy + 1), s(ix, iy));
            let mut f = w.arg();
            if f <= -PI {
                f += 2.0 * PI;
            }
            out.push(f);
        }
    }
    out
}

pub fn berry_curvature_map(h: &HoppingSet, grid: usize) -> Result<CurvatureMap> {
    if grid < 2 {
        return Err(Error::Range {
            name: "grid",
            value: grid as f64,
            expected: ">= 2",
        });
    }
    let ks = closed_grid(grid);
    let mut states = Vec::with_capacity(grid * grid);
    for &ky in &ks {
        for &kx in &ks {
            let n = off_diagonal(h, Momentum::raw(kx, ky));
            if 2.0 * n.norm() < 1e-9 {
                return Err(Error::DegeneratePoint {
                    kx,
                    ky,
                    gap: 2.0 * n.norm(),
                });
            }
            states.push(lower_band_state_raw(n));
        }
    }
    let plaquettes = plaquette_phases(&states, grid);
    let chern = (plaquettes.iter().sum::<f64>() / (2.0 * PI)).round() as i32;
    Ok(CurvatureMap {
        grid_n: grid,
        plaquettes,
        chern,
    })
}
