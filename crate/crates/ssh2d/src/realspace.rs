//! Finite lattices: Hamiltonian assembly, exact spectra, localization analysis.
//!
//! Sites are indexed with all A sites first, then all B sites; inside each
//! block the cell `(n, m)` sits at `n * cells_y + m`. Cell `(n, m)` has its A
//! atom at `(n, -m)` and its B atom at `(n + beta_x, -m + beta_y)`, so the
//! row index `m` runs along `-y` and the dipole axis is
//! [`GeometryConfig::dipole_axis`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bloch::{bands, closed_grid, Momentum};
use crate::error::{Error, Result};
use crate::lattice::{dipole_coupling, hopping_set, GeometryConfig, HoppingSet};
use crate::linalg::{hermitian_eig, EigenSet, HermitianMatrix};

/// Default long-range cutoff in lattice constants.
pub const DEFAULT_CUTOFF: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CouplingModel {
    /// The six bonds of the model.
    Nearest,
    /// Every pair within `cutoff` lattice constants.
    LongRange { cutoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteLatticeSpec {
    pub cells_x: usize,
    pub cells_y: usize,
    pub boundary: Boundary,
    pub coupling: CouplingModel,
    /// Replaces the geometry-derived couplings (nearest mode only).
    pub hoppings: Option<HoppingSet>,
    pub j2x: Option<f64>,
    pub j2y: Option<f64>,
}

impl FiniteLatticeSpec {
    pub fn open(cells_x: usize, cells_y: usize) -> Self {
        FiniteLatticeSpec {
            cells_x,
            cells_y,
            boundary: Boundary::Open,
            coupling: CouplingModel::Nearest,
            hoppings: None,
            j2x: None,
            j2y: None,
        }
    }

    pub fn periodic(cells_x: usize, cells_y: usize) -> Self {
        FiniteLatticeSpec {
            boundary: Boundary::Periodic,
            ..Self::open(cells_x, cells_y)
        }
    }

    pub fn with_intra(mut self, j2x: f64, j2y: f64) -> Self {
        self.j2x = Some(j2x);
        self.j2y = Some(j2y);
        self
    }

    pub fn with_hoppings(mut self, h: HoppingSet) -> Self {
        self.hoppings = Some(h);
        self
    }

    pub fn with_coupling(mut self, coupling: CouplingModel) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn sites(&self) -> usize {
        2 * self.cells_x * self.cells_y
    }

    pub fn index(&self, sublattice: Sublattice, n: usize, m: usize) -> usize {
        let block = match sublattice {
            Sublattice::A => 0,
            Sublattice::B => 1,
        };
        block * self.cells_x * self.cells_y + n * self.cells_y + m
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells_x < 2 || self.cells_y < 2 {
            return Err(Error::Range {
                name: "cells",
                value: self.cells_x.min(self.cells_y) as f64,
                expected: ">= 2",
            });
        }
        if let CouplingModel::LongRange { cutoff } = self.coupling {
            if !(cutoff >= 1.0) || !cutoff.is_finite() {
                return Err(Error::Range {
                    name: "cutoff",
                    value: cutoff,
                    expected: ">= 1",
                });
            }
            if self.hoppings.is_some() {
                return Err(Error::Invalid(
                    "a manual hopping set needs the nearest coupling model".into(),
                ));
            }
        }
        Ok(())
    }

    /// Couplings used in nearest mode, with overrides applied.
    pub fn effective_hoppings(&self, geom: &GeometryConfig) -> Result<HoppingSet> {
        let mut h = match self.hoppings {
            Some(h) => h,
            None => hopping_set(geom)?,
        };
        if let Some(j) = self.j2x {
            h.j2x = j;
        }
        if let Some(j) = self.j2y {
            h.j2y = j;
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub sublattice: Sublattice,
    pub n: usize,
    pub m: usize,
    pub x: f64,
    pub y: f64,
}

/// Site list in index order. Unlike [`FiniteLatticeSpec::validate`], any
/// size is accepted.
pub fn site_positions(spec: &FiniteLatticeSpec, geom: &GeometryConfig) -> Vec<Site> {
    let mut out = Vec::with_capacity(spec.sites());
    for sublattice in [Sublattice::A, Sublattice::B] {
        let (dx, dy) = match sublattice {
            Sublattice::A => (0.0, 0.0),
            Sublattice::B => (geom.beta_x, geom.beta_y),
        };
        for n in 0..spec.cells_x {
            for m in 0..spec.cells_y {
                out.push(Site {
                    sublattice,
                    n,
                    m,
                    x: n as f64 + dx,
                    y: -(m as f64) + dy,
                });
            }
        }
    }
    out
}

pub fn build_hamiltonian(spec: &FiniteLatticeSpec, geom: &GeometryConfig) -> Result<HermitianMatrix> {
    spec.validate()?;
    let mut hm = HermitianMatrix::zeros(spec.sites());
    match spec.coupling {
        CouplingModel::Nearest => {
            let h = spec.effective_hoppings(geom)?;
            add_nearest(&mut hm, spec, &h);
        }
        CouplingModel::LongRange { cutoff } => {
            geom.check()?;
            add_long_range(&mut hm, spec, geom, cutoff)?;
        }
    }
    Ok(hm)
}

fn add_nearest(hm: &mut HermitianMatrix, spec: &FiniteLatticeSpec, h: &HoppingSet) {
    use Sublattice::{A, B};
    let (nx, ny) = (spec.cells_x, spec.cells_y);
    let periodic = spec.boundary == Boundary::Periodic;
    // neighbor cell, or None past an open edge
    let step = |i: usize, len: usize| -> Option<usize> {
        if i + 1 < len {
            Some(i + 1)
        } else if periodic {
            Some(0)
        } else {
            None
        }
    };
    let t = |v: f64| C64::new(v, 0.0);
    for n in 0..nx {
        for m in 0..ny {
            hm.add_hopping(spec.index(A, n, m), spec.index(B, n, m), t(h.jxp));
            if let Some(n1) = step(n, nx) {
                hm.add_hopping(spec.index(B, n, m), spec.index(A, n1, m), t(h.jx));
                for s in [A, B] {
                    hm.add_hopping(spec.index(s, n, m), spec.index(s, n1, m), t(h.j2x));
                }
            }
            if let Some(m1) = step(m, ny) {
                hm.add_hopping(spec.index(A, n, m), spec.index(B, n, m1), t(h.jyp));
                for s in [A, B] {
                    hm.add_hopping(spec.index(s, n, m), spec.index(s, n, m1), t(h.j2y));
                }
            }
            if let (Some(n1), Some(m1)) = (step(n, nx), step(m, ny)) {
                hm.add_hopping(spec.index(B, n, m1), spec.index(A, n1, m), t(h.jy));
            }
        }
    }
}

fn add_long_range(
    hm: &mut HermitianMatrix,
    spec: &FiniteLatticeSpec,
    geom: &GeometryConfig,
    cutoff: f64,
) -> Result<()> {
    let sites = site_positions(spec, geom);
    let axis = geom.dipole_axis();
    let periodic = spec.boundary == Boundary::Periodic;
    let (lx, ly) = (spec.cells_x as f64, spec.cells_y as f64);
    let wrap = |d: f64, len: f64| {
        if periodic {
            d - len * (d / len).round()
        } else {
            d
        }
    };
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            let (a, b) = (&sites[i], &sites[j]);
            let dx = wrap(b.x - a.x, lx);
            let dy = wrap(b.y - a.y, ly);
            let r = dx.hypot(dy);
            if r > cutoff + 1e-9 {
                continue;
            }
            let mut coupling = dipole_coupling(r, (dx * axis[0] + dy * axis[1]) / r)?;
            if a.sublattice == b.sublattice && (r - 1.0).abs() < 1e-9 {
                if dy.abs() < 1e-9 {
                    coupling = spec.j2x.unwrap_or(coupling);
                } else if dx.abs() < 1e-9 {
                    coupling = spec.j2y.unwrap_or(coupling);
                }
            }
            hm.add_hopping(i, j, C64::new(coupling, 0.0));
        }
    }
    Ok(())
}

pub fn spectrum(spec: &FiniteLatticeSpec, geom: &GeometryConfig) -> Result<EigenSet> {
    hermitian_eig(&build_hamiltonian(spec, geom)?)
}

/// Energy ranges of the two Bloch bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkWindow {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

pub const BULK_GRID: usize = 101;
pub const WINDOW_MARGIN: f64 = 1e-6;

impl BulkWindow {
    pub fn from_bands(h: &HoppingSet, grid: usize) -> Self {
        let ks = closed_grid(grid);
        let mut lower = (f64::INFINITY, f64::NEG_INFINITY);
        let mut upper = (f64::INFINITY, f64::NEG_INFINITY);
        for &ky in &ks {
            for &kx in &ks {
                let b = bands(h, Momentum::raw(kx, ky));
                lower = (lower.0.min(b.e_minus), lower.1.max(b.e_minus));
                upper = (upper.0.min(b.e_plus), upper.1.max(b.e_plus));
            }
        }
        BulkWindow { lower, upper }
    }

    pub fn contains(&self, e: f64, margin: f64) -> bool {
        let inside = |(lo, hi): (f64, f64)| e >= lo - margin && e <= hi + margin;
        inside(self.lower) || inside(self.upper)
    }
}

/// Indices of eigenvalues outside both bulk bands.
pub fn midgap_filter(eigs: &EigenSet, window: &BulkWindow) -> Vec<usize> {
    eigs.values
        .iter()
        .enumerate()
        .filter(|(_, &e)| !window.contains(e, WINDOW_MARGIN))
        .map(|(i, _)| i)
        .collect()
}

/// Tagging thresholds; tunable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub edge: f64,
    pub corner: f64,
    /// Relative to the Frobenius norm of the Hamiltonian.
    pub zero_energy: f64,
    /// Required R^2 advantage of the power-law fit.
    pub margin: f64,
    pub min_r2: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            edge: 0.6,
            corner: 0.5,
            zero_energy: 1e-8,
            margin: 0.05,
            min_r2: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Outermost columns `n = 0` and `n = N - 1`.
    XEdge,
    /// Outermost rows `m = 0` and `m = M - 1`.
    YEdge,
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decay {
    Exponential,
    Polynomial,
    Bulk,
}

impl Decay {
    pub fn label(self) -> &'static str {
        match self {
            Decay::Exponential => "exponential",
            Decay::Polynomial => "polynomial",
            Decay::Bulk => "bulk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub index: usize,
    pub energy: f64,
    pub x_low: f64,
    pub x_high: f64,
    pub y_low: f64,
    pub y_high: f64,
    pub corner: f64,
    pub ipr: f64,
    pub region: Option<Region>,
    pub zero_energy: bool,
    pub decay: Decay,
    /// Decay rate of `log|psi|` per cell (exponential) or power (polynomial).
    pub rate: f64,
    pub r2_exp: f64,
    pub r2_poly: f64,
}

impl StateReport {
    pub fn x_edge(&self) -> f64 {
        self.x_low + self.x_high
    }

    pub fn y_edge(&self) -> f64 {
        self.y_low + self.y_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub h_norm: f64,
    pub states: Vec<StateReport>,
}

pub fn localization_report(
    eigs: &EigenSet,
    spec: &FiniteLatticeSpec,
    geom: &GeometryConfig,
) -> Result<LocalizationReport> {
    localization_report_with(eigs, spec, geom, &Thresholds::default())
}

pub fn localization_report_with(
    eigs: &EigenSet,
    spec: &FiniteLatticeSpec,
    geom: &GeometryConfig,
    th: &Thresholds,
) -> Result<LocalizationReport> {
    let h_norm = build_hamiltonian(spec, geom)?.frobenius_norm();
    let states = eigs
        .values
        .iter()
        .zip(&eigs.vectors)
        .enumerate()
        .map(|(index, (&energy, v))| {
            let prob: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
            analyze_state(index, energy, &prob, spec, h_norm, th)
        })
        .collect();
    Ok(LocalizationReport { h_norm, states })
}

/// Probability per cell, indexed `[n][m]`.
fn cell_weights(prob: &[f64], spec: &FiniteLatticeSpec) -> Vec<Vec<f64>> {
    let (nx, ny) = (spec.cells_x, spec.cells_y);
    let mut w = vec![vec![0.0; ny]; nx];
    for n in 0..nx {
        for m in 0..ny {
            w[n][m] = prob[spec.index(Sublattice::A, n, m)] + prob[spec.index(Sublattice::B, n, m)];
        }
    }
    w
}

fn corner_blocks(w: &[Vec<f64>], nx: usize, ny: usize) -> [((usize, usize), f64); 4] {
    let block = |ns: [usize; 2], ms: [usize; 2]| -> f64 {
        ns.iter()
            .flat_map(|&n| ms.iter().map(move |&m| (n, m)))
            .map(|(n, m)| w[n][m])
            .sum()
    };
    // 2x2 blocks; they overlap when a side has fewer than 4 cells
    let lo = [0, 1];
    let hx = [nx - 2, nx - 1];
    let hy = [ny - 2, ny - 1];
    [
        ((0, 0), block(lo, lo)),
        ((0, ny - 1), block(lo, hy)),
        ((nx - 1, 0), block(hx, lo)),
        ((nx - 1, ny - 1), block(hx, hy)),
    ]
}

fn analyze_state(
    index: usize,
    energy: f64,
    prob: &[f64],
    spec: &FiniteLatticeSpec,
    h_norm: f64,
    th: &Thresholds,
) -> StateReport {
    let (nx, ny) = (spec.cells_x, spec.cells_y);
    let w = cell_weights(prob, spec);
    let x_low: f64 = w[0].iter().sum();
    let x_high: f64 = w[nx - 1].iter().sum();
    let y_low: f64 = w.iter().map(|col| col[0]).sum();
    let y_high: f64 = w.iter().map(|col| col[ny - 1]).sum();
    let corners = corner_blocks(&w, nx, ny);
    let corner: f64 = if nx >= 4 && ny >= 4 {
        corners.iter().map(|c| c.1).sum()
    } else {
        // blocks overlap: count each cell once
        let mut total = 0.0;
        for n in 0..nx {
            for m in 0..ny {
                if (n < 2 || n + 2 >= nx) && (m < 2 || m + 2 >= ny) {
                    total += w[n][m];
                }
            }
        }
        total
    };
    let ipr = prob.iter().map(|p| p * p).sum();
    let (x_edge, y_edge) = (x_low + x_high, y_low + y_high);
    let region = if x_edge >= th.edge && y_edge >= th.edge && corner >= th.corner {
        Some(Region::Corner)
    } else if y_edge >= th.edge && y_edge >= x_edge {
        Some(Region::YEdge)
    } else if x_edge >= th.edge {
        Some(Region::XEdge)
    } else if corner >= th.corner {
        Some(Region::Corner)
    } else {
        None
    };

    let mut distances = Vec::new();
    let mut values = Vec::new();
    if let Some(region) = region {
        let dominant: Vec<(usize, usize)> = {
            let max = corners.iter().fold(0.0_f64, |m, c| m.max(c.1));
            corners.iter().filter(|c| c.1 >= 0.5 * max).map(|c| c.0).collect()
        };
        for s in [Sublattice::A, Sublattice::B] {
            for n in 0..nx {
                for m in 0..ny {
                    let d = match region {
                        Region::XEdge => n.min(nx - 1 - n),
                        Region::YEdge => m.min(ny - 1 - m),
                        Region::Corner => {
                            if !(n == 0 || n == nx - 1 || m == 0 || m == ny - 1) {
                                continue;
                            }
                            dominant
                                .iter()
                                .map(|&(a, b)| n.abs_diff(a) + m.abs_diff(b))
                                .min()
                                .unwrap_or(0)
                        }
                    };
                    distances.push(d);
                    values.push(prob[spec.index(s, n, m)]);
                }
            }
        }
    }
    let fit = envelope_fit(&distances, &values);
    let decay = match (region, fit) {
        (Some(_), Some(f)) if f.r2_exp >= th.min_r2 || f.r2_poly >= th.min_r2 => {
            if f.r2_poly > f.r2_exp + th.margin {
                Decay::Polynomial
            } else {
                Decay::Exponential
            }
        }
        _ => Decay::Bulk,
    };
    let (rate, r2_exp, r2_poly) = match fit {
        Some(f) => (
            if decay == Decay::Polynomial {
                -f.slope_poly
            } else {
                -f.slope_exp
            },
            f.r2_exp,
            f.r2_poly,
        ),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    StateReport {
        index,
        energy,
        x_low,
        x_high,
        y_low,
        y_high,
        corner,
        ipr,
        region,
        zero_energy: energy.abs() < th.zero_energy * h_norm,
        decay,
        rate,
        r2_exp,
        r2_poly,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub slope_exp: f64,
    pub r2_exp: f64,
    pub slope_poly: f64,
    pub r2_poly: f64,
}

/// Fits `log|psi|` of the decay envelope against `d + 1` and `log(d + 1)`.
///
/// The envelope is the largest probability at each distance, made
/// non-increasing by a running maximum from the far end. Probabilities at
/// or below `1e-14` are ignored. Needs at least three distinct distances.
pub fn envelope_fit(distances: &[usize], probabilities: &[f64]) -> Option<EnvelopeFit> {
    let max_d = *distances.iter().max()?;
    let mut layers = vec![None::<f64>; max_d + 1];
    for (&d, &p) in distances.iter().zip(probabilities) {
        if p > 1e-14 {
            layers[d] = Some(layers[d].map_or(p, |q: f64| q.max(p)));
        }
    }
    let points: Vec<(f64, f64)> = layers
        .iter()
        .enumerate()
        .filter_map(|(d, p)| p.map(|p| (d as f64, p)))
        .collect();
    if points.len() < 3 {
        return None;
    }
    let mut envelope: Vec<f64> = points.iter().map(|p| p.1).collect();
    for i in (0..envelope.len() - 1).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let ys: Vec<f64> = envelope.iter().map(|p| 0.5 * p.ln()).collect();
    let lin: Vec<f64> = points.iter().map(|p| p.0 + 1.0).collect();
    let log: Vec<f64> = lin.iter().map(|x| x.ln()).collect();
    let (slope_exp, r2_exp) = crate::topology::dirac::linear_fit(&lin, &ys);
    let (slope_poly, r2_poly) = crate::topology::dirac::linear_fit(&log, &ys);
    if !r2_exp.is_finite() || !r2_poly.is_finite() {
        return None;
    }
    Some(EnvelopeFit {
        slope_exp,
        r2_exp,
        slope_poly,
        r2_poly,
    })
}
