//! Two-band Bloch Hamiltonian `h(k) = [[n0, n], [n*, n0]]`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::HoppingSet;

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];

/// Folds an angle into `(-pi, pi]`.
pub fn fold(k: f64) -> f64 {
    let r = (k + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Crystal momentum `k a`, folded into the first Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub kx: f64,
    pub ky: f64,
}

impl Momentum {
    pub fn new(kx: f64, ky: f64) -> Self {
        Momentum {
            kx: fold(kx),
            ky: fold(ky),
        }
    }

    /// Momentum without folding (for loop parametrizations that leave the zone).
    pub fn raw(kx: f64, ky: f64) -> Self {
        Momentum { kx, ky }
    }

    pub fn neg(self) -> Self {
        Momentum::new(-self.kx, -self.ky)
    }

    /// Distance on the torus.
    pub fn distance(&self, other: &Momentum) -> f64 {
        fold(self.kx - other.kx).hypot(fold(self.ky - other.ky))
    }

    pub fn gamma() -> Self {
        Momentum::raw(0.0, 0.0)
    }
    pub fn x_point() -> Self {
        Momentum::raw(PI, 0.0)
    }
    pub fn y_point() -> Self {
        Momentum::raw(0.0, PI)
    }
    pub fn m_point() -> Self {
        Momentum::raw(PI, PI)
    }
}

/// The four time-reversal invariant momenta with their labels.
pub fn high_symmetry_points() -> [(&'static str, Momentum); 4] {
    [
        ("G", Momentum::gamma()),
        ("X", Momentum::x_point()),
        ("Y", Momentum::y_point()),
        ("M", Momentum::m_point()),
    ]
}

/// Value of `n` at each high-symmetry point, as the signed sum of the four
/// inter-sublattice hoppings (phases are all +-1 there).
pub fn high_symmetry_sums(h: &HoppingSet) -> [(&'static str, f64); 4] {
    [
        ("G", h.jxp + h.jyp + h.jx + h.jy),
        ("X", h.jxp + h.jyp - h.jx - h.jy),
        ("Y", h.jxp - h.jyp + h.jx - h.jy),
        ("M", h.jxp - h.jyp - h.jx + h.jy),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochComponents {
    pub n0: f64,
    pub n: C64,
}

impl BlochComponents {
    pub fn matrix(&self) -> Mat2 {
        let d = C64::new(self.n0, 0.0);
        [[d, self.n], [self.n.conj(), d]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPair {
    pub e_minus: f64,
    pub e_plus: f64,
    pub gap: f64,
}

/// Normalized Bloch eigenvector on the (A, B) sublattice basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochEigenvector(pub [C64; 2]);

impl BlochEigenvector {
    pub fn inner(&self, other: &BlochEigenvector) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }
}

pub fn off_diagonal(h: &HoppingSet, k: Momentum) -> C64 {
    let ex = C64::from_polar(1.0, -k.kx);
    let ey = C64::from_polar(1.0, k.ky);
    h.jxp + h.jyp * ey + h.jx * ex + h.jy * ex * ey
}

pub fn diagonal(h: &HoppingSet, k: Momentum) -> f64 {
    2.0 * (h.j2x * k.kx.cos() + h.j2y * k.ky.cos())
}

pub fn components(h: &HoppingSet, k: Momentum) -> BlochComponents {
    BlochComponents {
        n0: diagonal(h, k),
        n: off_diagonal(h, k),
    }
}

/// `(d n / d kx, d n / d ky)`.
pub fn off_diagonal_gradient(h: &HoppingSet, k: Momentum) -> [C64; 2] {
    let i = C64::i();
    let ex = C64::from_polar(1.0, -k.kx);
    let ey = C64::from_polar(1.0, k.ky);
    let diag = h.jy * ex * ey;
    [-i * (h.jx * ex + diag), i * (h.jyp * ey + diag)]
}

pub fn diagonal_gradient(h: &HoppingSet, k: Momentum) -> [f64; 2] {
    [-2.0 * h.j2x * k.kx.sin(), -2.0 * h.j2y * k.ky.sin()]
}

pub fn bands(h: &HoppingSet, k: Momentum) -> BandPair {
    let c = components(h, k);
    let r = c.n.norm();
    BandPair {
        e_minus: c.n0 - r,
        e_plus: c.n0 + r,
        gap: 2.0 * r,
    }
}

pub fn gap(h: &HoppingSet, k: Momentum) -> f64 {
    2.0 * off_diagonal(h, k).norm()
}

/// Threshold below which the lower-band eigenvector is undefined.
pub const DEGENERATE_GAP: f64 = 1e-12;

/// Lower-band eigenvector, gauge fixed so that the first component of
/// largest modulus is real and nonnegative.
pub fn lower_band_state(h: &HoppingSet, k: Momentum) -> Result<BlochEigenvector> {
    let n = off_diagonal(h, k);
    let r = n.norm();
    if 2.0 * r < DEGENERATE_GAP {
        return Err(Error::DegeneratePoint {
            kx: k.kx,
            ky: k.ky,
            gap: 2.0 * r,
        });
    }
    Ok(gauge_fix([-n / r / SQRT_2, C64::new(1.0 / SQRT_2, 0.0)]))
}

/// Lower-band state without gauge fixing; `(-n/|n|, 1)/sqrt 2`.
pub(crate) fn lower_band_state_raw(n: C64) -> [C64; 2] {
    let r = n.norm();
    [-n / r / SQRT_2, C64::new(1.0 / SQRT_2, 0.0)]
}

fn gauge_fix(v: [C64; 2]) -> BlochEigenvector {
    let max = v[0].norm().max(v[1].norm());
    let pivot = if v[0].norm() >= max - 1e-12 { v[0] } else { v[1] };
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    BlochEigenvector([v[0] * phase, v[1] * phase])
}

/// Closed uniform grid of `n` points covering `[-pi, pi]`; the last point
/// is the periodic image of the first.
pub fn closed_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -PI + 2.0 * PI * j as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapScan {
    pub min_gap: f64,
    pub argmin: Momentum,
    pub grid_n: usize,
    /// Row-major in `ky` then `kx`: entry `iy * grid_n + ix`.
    pub gaps: Vec<f64>,
}

impl GapScan {
    pub fn grid(&self) -> Vec<f64> {
        closed_grid(self.grid_n)
    }
}

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;

/// Damped Gauss-Newton on `(Re n, Im n) = 0`; never increases `|n|`.
///
/// Returns the refined momentum and `|n|` there. With a rank-deficient
/// Jacobian (nodal lines, merging points) the step is the minimum-norm
/// least-squares step.
pub fn refine_zero(h: &HoppingSet, start: Momentum) -> (Momentum, f64) {
    let mut k = Momentum::raw(start.kx, start.ky);
    let mut f = off_diagonal(h, k);
    for _ in 0..NEWTON_MAX_ITER {
        if f.norm() < NEWTON_TOL {
            break;
        }
        let [dx, dy] = off_diagonal_gradient(h, k);
        let jac = [[dx.re, dy.re], [dx.im, dy.im]];
        let step = match least_squares_step(jac, [f.re, f.im]) {
            Some(s) => s,
            None => break,
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial = Momentum::raw(k.kx - t * step[0], k.ky - t * step[1]);
            let ft = off_diagonal(h, trial);
            if ft.norm() < f.norm() {
                k = trial;
                f = ft;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (Momentum::new(k.kx, k.ky), f.norm())
}

/// Minimum-norm solution of `J s = r` for a real 2x2 system.
fn least_squares_step(jac: [[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let scale = jac
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if det.abs() > 1e-10 * scale * scale {
        return Some([
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ]);
    }
    // Rank one: J ~ u s v^T; pseudo-inverse gives v (u.r) / s.
    let jtj = [
        [
            jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0],
            jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1],
        ],
        [
            jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1],
            jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1],
        ],
    ];
    let (lambda, v) = dominant_eigen_sym2(jtj);
    if lambda <= 0.0 {
        return None;
    }
    let jv = [
        jac[0][0] * v[0] + jac[0][1] * v[1],
        jac[1][0] * v[0] + jac[1][1] * v[1],
    ];
    let coeff = (jv[0] * r[0] + jv[1] * r[1]) / lambda;
    Some([coeff * v[0], coeff * v[1]])
}

/// Largest eigenpair of a real symmetric 2x2 matrix.
pub(crate) fn dominant_eigen_sym2(m: [[f64; 2]; 2]) -> (f64, [f64; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let lambda = mean + rad;
    let v = if b.abs() > 1e-300 {
        [b, lambda - a]
    } else if a >= d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let norm = v[0].hypot(v[1]);
    (lambda, [v[0] / norm, v[1] / norm])
}

/// Gap on a `grid_n x grid_n` zone grid, minimum refined by Newton.
pub fn gap_scan(h: &HoppingSet, grid_n: usize) -> Result<GapScan> {
    if grid_n < 16 {
        return Err(Error::Range {
            name: "grid_n",
            value: grid_n as f64,
            expected: ">= 16",
        });
    }
    let grid = closed_grid(grid_n);
    let phases: Vec<C64> = grid.iter().map(|&k| C64::from_polar(1.0, k)).collect();
    let gaps: Vec<f64> = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let (ex, ey) = (phases[idx % grid_n], phases[idx / grid_n]);
            2.0 * (h.jxp + h.jyp * ey + (h.jx + h.jy * ey) * ex.conj()).norm()
        })
        .collect();
    let (best, &grid_min) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let start = Momentum::raw(grid[best % grid_n], grid[best / grid_n]);
    let (refined, modulus) = refine_zero(h, start);
    let (argmin, min_gap) = if 2.0 * modulus <= grid_min {
        (refined, 2.0 * modulus)
    } else {
        (Momentum::new(start.kx, start.ky), grid_min)
    };
    Ok(GapScan {
        min_gap,
        argmin,
        grid_n,
        gaps,
    })
}

fn frobenius2(a: &Mat2) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Residuals of time reversal, inversion (`sigma_x`) and chiral (`sigma_z`)
/// symmetry at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryResiduals {
    pub time_reversal: f64,
    pub inversion: f64,
    pub chiral: f64,
}

pub fn symmetry_residuals(h: &HoppingSet, k: Momentum) -> SymmetryResiduals {
    let hk = components(h, k).matrix();
    let hmk = components(h, k.neg()).matrix();
    let mut tr = [[C64::new(0.0, 0.0); 2]; 2];
    let mut inv = tr;
    let mut chiral = tr;
    for i in 0..2 {
        for j in 0..2 {
            tr[i][j] = hmk[i][j] - hk[i][j].conj();
            inv[i][j] = hk[1 - i][1 - j] - hmk[i][j];
            let sign = if i == j { 1.0 } else { -1.0 };
            chiral[i][j] = hk[i][j] * sign + hk[i][j];
        }
    }
    SymmetryResiduals {
        time_reversal: frobenius2(&tr),
        inversion: frobenius2(&inv),
        chiral: frobenius2(&chiral),
    }
}

/// Gamma-X-M-Gamma-Y path with `per_segment` samples on each leg.
pub fn high_symmetry_path(per_segment: usize) -> Vec<Momentum> {
    let corners = [
        Momentum::gamma(),
        Momentum::x_point(),
        Momentum::m_point(),
        Momentum::gamma(),
        Momentum::y_point(),
    ];
    let mut path = Vec::with_capacity(4 * per_segment + 1);
    for pair in corners.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for s in 0..per_segment {
            let t = s as f64 / per_segment as f64;
            path.push(Momentum::raw(
                a.kx + t * (b.kx - a.kx),
                a.ky + t * (b.ky - a.ky),
            ));
        }
    }
    path.push(corners[4]);
    path
}
