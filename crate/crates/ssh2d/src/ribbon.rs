//! Ribbon spectra: infinite along one axis (a momentum), `W` cells across.
//!
//! Basis order is `(a_1, b_1, ..., a_W, b_W)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{bands, Momentum};
use crate::error::{Error, Result};
use crate::lattice::HoppingSet;
use crate::linalg::{hermitian_eig, HermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Infinite along x, `W` cells along y; momentum `kx`.
    XInfinite,
    /// Infinite along y, `W` cells along x; momentum `ky`.
    YInfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RibbonSpec {
    pub orientation: Orientation,
    pub width: usize,
    pub k_samples: usize,
}

impl RibbonSpec {
    pub fn new(orientation: Orientation) -> Self {
        RibbonSpec {
            orientation,
            width: 8,
            k_samples: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 {
            return Err(Error::Range {
                name: "width",
                value: self.width as f64,
                expected: ">= 2",
            });
        }
        if self.k_samples < 16 {
            return Err(Error::Range {
                name: "k_samples",
                value: self.k_samples as f64,
                expected: ">= 16",
            });
        }
        Ok(())
    }

    /// Uniform momenta in `(-pi, pi]`.
    pub fn momenta(&self) -> Vec<f64> {
        (1..=self.k_samples)
            .map(|j| -PI + 2.0 * PI * j as f64 / self.k_samples as f64)
            .collect()
    }
}

fn with_onsite(width: usize, onsite: f64) -> HermitianMatrix {
    let mut hm = HermitianMatrix::zeros(2 * width);
    for j in 0..2 * width {
        hm.add_onsite(j, onsite);
    }
    hm
}

fn ribbon_x(h: &HoppingSet, kx: f64, width: usize, closed: bool) -> HermitianMatrix {
    let e = C64::from_polar(1.0, kx);
    let t1 = h.jxp + h.jx * e.conj();
    let t2 = h.jyp + h.jy * e;
    let mut hm = with_onsite(width, 2.0 * h.j2x * kx.cos());
    let links = if closed { width } else { width - 1 };
    for m in 0..width {
        hm.add_hopping(2 * m, 2 * m + 1, t1);
    }
    for m in 0..links {
        let m1 = (m + 1) % width;
        hm.add_hopping(2 * m1 + 1, 2 * m, t2);
        hm.add_hopping(2 * m, 2 * m1, C64::new(h.j2y, 0.0));
        hm.add_hopping(2 * m + 1, 2 * m1 + 1, C64::new(h.j2y, 0.0));
    }
    hm
}

fn ribbon_y(h: &HoppingSet, ky: f64, width: usize, closed: bool) -> HermitianMatrix {
    let e = C64::from_polar(1.0, ky);
    let t1 = h.jxp + h.jyp * e;
    let t2 = h.jx + h.jy * e.conj();
    let mut hm = with_onsite(width, 2.0 * h.j2y * ky.cos());
    let links = if closed { width } else { width - 1 };
    for n in 0..width {
        hm.add_hopping(2 * n, 2 * n + 1, t1);
    }
    for n in 0..links {
        let n1 = (n + 1) % width;
        hm.add_hopping(2 * n + 1, 2 * n1, t2);
        hm.add_hopping(2 * n, 2 * n1, C64::new(h.j2x, 0.0));
        hm.add_hopping(2 * n + 1, 2 * n1 + 1, C64::new(h.j2x, 0.0));
    }
    hm
}

pub fn ribbon_hamiltonian_x(h: &HoppingSet, kx: f64, width: usize) -> HermitianMatrix {
    ribbon_x(h, kx, width, false)
}

pub fn ribbon_hamiltonian_y(h: &HoppingSet, ky: f64, width: usize) -> HermitianMatrix {
    ribbon_y(h, ky, width, false)
}

/// Ribbon closed into a ring across its width; its spectrum is the bulk
/// spectrum at the `width` commensurate transverse momenta.
pub fn closed_ribbon_hamiltonian(
    h: &HoppingSet,
    orientation: Orientation,
    k: f64,
    width: usize,
) -> HermitianMatrix {
    match orientation {
        Orientation::XInfinite => ribbon_x(h, k, width, true),
        Orientation::YInfinite => ribbon_y(h, k, width, true),
    }
}

pub fn ribbon_hamiltonian(h: &HoppingSet, orientation: Orientation, k: f64, width: usize) -> HermitianMatrix {
    match orientation {
        Orientation::XInfinite => ribbon_hamiltonian_x(h, k, width),
        Orientation::YInfinite => ribbon_hamiltonian_y(h, k, width),
    }
}

pub const EDGE_WEIGHT: f64 = 0.6;
pub const BULK_MARGIN: f64 = 1e-6;
/// Transverse samples for the projected bulk bands.
pub const PROJECTION_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibbonSpectrum {
    pub spec: RibbonSpec,
    pub momenta: Vec<f64>,
    /// `energies[k][i]`, ascending in `i`.
    pub energies: Vec<Vec<f64>>,
    /// Weight in the outermost cell on each side, summed.
    pub edge_weights: Vec<Vec<f64>>,
    pub edge_branch: Vec<Vec<bool>>,
}

impl RibbonSpectrum {
    pub fn edge_states(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edge_branch.iter().enumerate().flat_map(|(ik, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &e)| e)
                .map(move |(i, _)| (ik, i))
        })
    }

    pub fn edge_state_count(&self) -> usize {
        self.edge_states().count()
    }
}

/// Ranges of the two bulk bands over the transverse momentum at fixed `k`.
pub fn projected_bands(h: &HoppingSet, orientation: Orientation, k: f64) -> [(f64, f64); 2] {
    let mut lower = (f64::INFINITY, f64::NEG_INFINITY);
    let mut upper = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..=PROJECTION_SAMPLES {
        let q = -PI + 2.0 * PI * j as f64 / PROJECTION_SAMPLES as f64;
        let momentum = match orientation {
            Orientation::XInfinite => Momentum::raw(k, q),
            Orientation::YInfinite => Momentum::raw(q, k),
        };
        let b = bands(h, momentum);
        lower = (lower.0.min(b.e_minus), lower.1.max(b.e_minus));
        upper = (upper.0.min(b.e_plus), upper.1.max(b.e_plus));
    }
    [lower, upper]
}

pub fn ribbon_spectrum(h: &HoppingSet, spec: &RibbonSpec) -> Result<RibbonSpectrum> {
    spec.validate()?;
    let momenta = spec.momenta();
    let w = spec.width;
    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<bool>)> = momenta
        .par_iter()
        .map(|&k| {
            let eig = hermitian_eig(&ribbon_hamiltonian(h, spec.orientation, k, w))?;
            let bulk = projected_bands(h, spec.orientation, k);
            let weights: Vec<f64> = eig
                .vectors
                .iter()
                .map(|v| {
                    [0, 1, 2 * w - 2, 2 * w - 1]
                        .iter()
                        .map(|&i| v[i].norm_sqr())
                        .sum()
                })
                .collect();
            let branch = eig
                .values
                .iter()
                .zip(&weights)
                .map(|(&e, &wt)| {
                    let inside = bulk
                        .iter()
                        .any(|&(lo, hi)| e >= lo - BULK_MARGIN && e <= hi + BULK_MARGIN);
                    !inside && wt >= EDGE_WEIGHT
                })
                .collect();
            Ok((eig.values, weights, branch))
        })
        .collect::<Result<_>>()?;
    let mut energies = Vec::with_capacity(rows.len());
    let mut edge_weights = Vec::with_capacity(rows.len());
    let mut edge_branch = Vec::with_capacity(rows.len());
    for (e, wt, b) in rows {
        energies.push(e);
        edge_weights.push(wt);
        edge_branch.push(b);
    }
    Ok(RibbonSpectrum {
        spec: *spec,
        momenta,
        energies,
        edge_weights,
        edge_branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hopping_set, GeometryConfig};

    fn h_at(bx: f64, by: f64) -> HoppingSet {
        hopping_set(&GeometryConfig::magic(bx, by)).unwrap()
    }

    #[test]
    fn two_cell_chiral_form() {
        let h = HoppingSet::new(1.0, 2.0, 3.0, 4.0, 0.0, 0.0);
        let kx = 0.7;
        let hm = ribbon_hamiltonian_x(&h, kx, 2);
        let t1 = C64::new(1.0, 0.0) + 2.0 * C64::from_polar(1.0, -kx);
        let t2 = C64::new(3.0, 0.0) + 4.0 * C64::from_polar(1.0, kx);
        let z = C64::new(0.0, 0.0);
        // rows: a1 b1 a2 b2
        let expected = [
            [z, t1, z, t2.conj()],
            [t1.conj(), z, z, z],
            [z, z, z, t1],
            [t2, z, t1.conj(), z],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((hm.get(i, j) - expected[i][j]).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn closed_ribbons_match_bulk() {
        let h = hopping_set(&GeometryConfig::new(0.3, 0.7, 0.6)).unwrap();
        let w = 6;
        for orientation in [Orientation::XInfinite, Orientation::YInfinite] {
            for k in [-2.1, 0.0, 0.4, PI] {
                let e = hermitian_eig(&closed_ribbon_hamiltonian(&h, orientation, k, w))
                    .unwrap()
                    .values;
                let mut bulk = Vec::new();
                for j in 0..w {
                    let q = 2.0 * PI * j as f64 / w as f64;
                    let m = match orientation {
                        Orientation::XInfinite => Momentum::raw(k, q),
                        Orientation::YInfinite => Momentum::raw(q, k),
                    };
                    let b = bands(&h, m);
                    bulk.push(b.e_minus);
                    bulk.push(b.e_plus);
                }
                bulk.sort_by(f64::total_cmp);
                for (a, b) in e.iter().zip(&bulk) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn time_reversal_symmetric() {
        let h = h_at(0.8, 0.8);
        for orientation in [Orientation::XInfinite, Orientation::YInfinite] {
            let a = hermitian_eig(&ribbon_hamiltonian(&h, orientation, 1.3, 8)).unwrap();
            let b = hermitian_eig(&ribbon_hamiltonian(&h, orientation, -1.3, 8)).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn edge_branches_by_phase() {
        let count = |bx, by, o| {
            ribbon_spectrum(&h_at(bx, by), &RibbonSpec { k_samples: 64, ..RibbonSpec::new(o) })
                .unwrap()
                .edge_state_count()
        };
        use Orientation::*;
        assert!(count(0.2, 0.8, XInfinite) > 0);
        assert_eq!(count(0.8, 0.2, XInfinite), 0);
        assert!(count(0.8, 0.2, YInfinite) > 0);
        assert_eq!(count(0.2, 0.8, YInfinite), 0);
        assert!(count(0.8, 0.8, XInfinite) > 0);
        assert!(count(0.8, 0.8, YInfinite) > 0);
    }

    #[test]
    fn width_convergence() {
        let h = h_at(0.2, 0.8);
        let spec = RibbonSpec { k_samples: 32, ..RibbonSpec::new(Orientation::XInfinite) };
        let narrow = ribbon_spectrum(&h, &spec).unwrap();
        let wide = ribbon_spectrum(&h, &RibbonSpec { width: 16, ..spec }).unwrap();
        for (ik, i) in narrow.edge_states() {
            let e = narrow.energies[ik][i];
            let nearest = wide
                .edge_states()
                .filter(|&(jk, _)| jk == ik)
                .map(|(jk, j)| (wide.energies[jk][j] - e).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-4, "k index {ik}: {nearest}");
        }
    }

    #[test]
    fn invalid_spec() {
        let h = h_at(0.2, 0.8);
        let spec = RibbonSpec { width: 1, ..RibbonSpec::new(Orientation::XInfinite) };
        assert!(ribbon_spectrum(&h, &spec).is_err());
    }
}
