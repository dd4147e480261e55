//! Dirac points: location, winding charge, cone geometry, merging exponents.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bloch::{
    closed_grid, diagonal_gradient, dominant_eigen_sym2, gap, off_diagonal,
    off_diagonal_gradient, refine_zero, Momentum,
};
use crate::error::{Error, Result};
use crate::lattice::HoppingSet;

/// Refined roots closer than this are the same zero.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// A seed counts as converged when `|n|` drops below this.
pub const ROOT_TOL: f64 = 1e-10;
/// More isolated zeros than this means the zero set is not a set of points.
pub const MAX_ISOLATED: usize = 8;
/// Minimal extent (rad) of a zero set to be called a line.
pub const LINE_EXTENT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracSearch {
    /// Isolated zeros of `n(k)`; empty when the zero set is extended.
    pub points: Vec<Momentum>,
    /// Every distinct refined zero.
    pub zeros: Vec<Momentum>,
    /// The zeros form a line (or lines) rather than points.
    pub extended: bool,
    /// Largest torus distance between two zeros.
    pub extent: f64,
}

/// Upper bound on `|grad n|`.
fn gradient_bound(h: &HoppingSet) -> f64 {
    h.jx.abs() + h.jyp.abs() + 2.0 * h.jy.abs()
}

pub fn locate_dirac_points(h: &HoppingSet, seed_grid: usize) -> Result<DiracSearch> {
    if seed_grid < 16 {
        return Err(Error::Range {
            name: "seed_grid",
            value: seed_grid as f64,
            expected: ">= 16",
        });
    }
    let grid = closed_grid(seed_grid);
    let spacing = 2.0 * PI / (seed_grid - 1) as f64;
    let threshold = gradient_bound(h) * spacing;
    let mut zeros: Vec<Momentum> = Vec::new();
    // skip the duplicated last row/column of the closed grid
    for iy in 0..seed_grid - 1 {
        for ix in 0..seed_grid - 1 {
            let k = Momentum::raw(grid[ix], grid[iy]);
            if off_diagonal(h, k).norm() >= threshold {
                continue;
            }
            let (root, modulus) = refine_zero(h, k);
            if modulus < ROOT_TOL && zeros.iter().all(|z| z.distance(&root) >= DEDUP_DISTANCE) {
                zeros.push(root);
            }
        }
    }
    zeros.sort_by(|a, b| a.kx.total_cmp(&b.kx).then(a.ky.total_cmp(&b.ky)));
    let mut extent: f64 = 0.0;
    for (i, a) in zeros.iter().enumerate() {
        for b in &zeros[i + 1..] {
            extent = extent.max(a.distance(b));
        }
    }
    let extended = zeros.len() > MAX_ISOLATED && extent > LINE_EXTENT;
    let points = if extended { Vec::new() } else { zeros.clone() };
    Ok(DiracSearch {
        points,
        zeros,
        extended,
        extent,
    })
}

/// Winding number of `n(k)` around a circle of `radius` about `center`.
pub fn dirac_charge(h: &HoppingSet, center: Momentum, radius: f64, samples: usize) -> Result<i32> {
    let (winding, _) = winding_number(h, center, radius, samples)?;
    Ok(winding)
}

/// Winding number and the raw (unrounded) value.
pub fn winding_number(
    h: &HoppingSet,
    center: Momentum,
    radius: f64,
    samples: usize,
) -> Result<(i32, f64)> {
    if samples < 64 {
        return Err(Error::Range {
            name: "samples",
            value: samples as f64,
            expected: ">= 64",
        });
    }
    let point = |j: usize| {
        let t = 2.0 * PI * j as f64 / samples as f64;
        off_diagonal(
            h,
            Momentum::raw(center.kx + radius * t.cos(), center.ky + radius * t.sin()),
        )
    };
    let mut total = 0.0;
    let mut prev = point(0);
    for j in 1..=samples {
        let next = point(j % samples);
        if next.norm() < 1e-9 {
            return Err(Error::LoopThroughNode {
                modulus: next.norm(),
            });
        }
        total += (next / prev).arg();
        prev = next;
    }
    let value = total / (2.0 * PI);
    let rounded = value.round();
    let residual = (value - rounded).abs();
    if residual >= 1e-3 {
        return Err(Error::NonInteger { value, residual });
    }
    Ok((rounded as i32, value))
}

/// Local cone `E(kD + q) ~ q.tilt +- |G q|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub tilt: [f64; 2],
    /// Rows `Re grad n`, `Im grad n`.
    pub velocity_matrix: [[f64; 2]; 2],
    /// Singular values of the velocity matrix, largest first.
    pub velocities: [f64; 2],
    pub anisotropy: f64,
}

impl Cone {
    pub fn model_energies(&self, q: [f64; 2]) -> (f64, f64) {
        let g = &self.velocity_matrix;
        let shift = self.tilt[0] * q[0] + self.tilt[1] * q[1];
        let r = (g[0][0] * q[0] + g[0][1] * q[1]).hypot(g[1][0] * q[0] + g[1][1] * q[1]);
        (shift - r, shift + r)
    }
}

/// Real 2x2 Jacobian of `(Re n, Im n)` with respect to `(kx, ky)`.
pub fn velocity_matrix(h: &HoppingSet, k: Momentum) -> [[f64; 2]; 2] {
    let [dx, dy] = off_diagonal_gradient(h, k);
    [[dx.re, dy.re], [dx.im, dy.im]]
}

/// Singular values (descending) and right singular vectors of a real 2x2 matrix.
pub fn svd2(g: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let gtg = [
        [
            g[0][0] * g[0][0] + g[1][0] * g[1][0],
            g[0][0] * g[0][1] + g[1][0] * g[1][1],
        ],
        [
            g[0][0] * g[0][1] + g[1][0] * g[1][1],
            g[0][1] * g[0][1] + g[1][1] * g[1][1],
        ],
    ];
    let (lmax, v1) = dominant_eigen_sym2(gtg);
    let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).abs();
    let smax = lmax.max(0.0).sqrt();
    // sigma_min from the determinant is accurate even when tiny
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    let v2 = [-v1[1], v1[0]];
    ([smax, smin], [v1, v2])
}

pub fn characterize_cone(h: &HoppingSet, kd: Momentum) -> Result<Cone> {
    let velocity_matrix = velocity_matrix(h, kd);
    let (sigma, _) = svd2(velocity_matrix);
    if sigma[1] < 1e-9 {
        return Err(Error::DegenerateCone { sigma_min: sigma[1] });
    }
    Ok(Cone {
        tilt: diagonal_gradient(h, kd),
        velocity_matrix,
        velocities: sigma,
        anisotropy: sigma[0] / sigma[1],
    })
}

/// A located band touching with its charge and cone data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracPoint {
    pub k: Momentum,
    pub charge: i32,
    pub tilt: [f64; 2],
    pub velocities: [f64; 2],
    pub anisotropy: f64,
}

/// Locates, charges and characterizes every isolated Dirac point.
pub fn dirac_points(
    h: &HoppingSet,
    seed_grid: usize,
    radius: f64,
    samples: usize,
) -> Result<Vec<DiracPoint>> {
    let search = locate_dirac_points(h, seed_grid)?;
    search
        .points
        .iter()
        .map(|&k| {
            let charge = dirac_charge(h, k, radius, samples)?;
            let cone = characterize_cone(h, k)?;
            Ok(DiracPoint {
                k,
                charge,
                tilt: cone.tilt,
                velocities: cone.velocities,
                anisotropy: cone.anisotropy,
            })
        })
        .collect()
}

/// Power-law exponents of the gap along the stiff and soft directions of
/// the local expansion at `k_merge`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergingExponents {
    pub exponents: [f64; 2],
    pub r2: [f64; 2],
    pub directions: [[f64; 2]; 2],
}

pub fn merging_exponents(h: &HoppingSet, k_merge: Momentum) -> Result<MergingExponents> {
    merging_exponents_in(h, k_merge, (1e-4, 1e-2))
}

pub fn merging_exponents_in(
    h: &HoppingSet,
    k_merge: Momentum,
    window: (f64, f64),
) -> Result<MergingExponents> {
    let (_, directions) = svd2(velocity_matrix(h, k_merge));
    let mut exponents = [0.0; 2];
    let mut r2 = [0.0; 2];
    for (slot, dir) in directions.iter().enumerate() {
        let samples = 25;
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..samples)
            .map(|i| {
                let t = window.0 * (window.1 / window.0).powf(i as f64 / (samples - 1) as f64);
                let g = gap(
                    h,
                    Momentum::raw(k_merge.kx + t * dir[0], k_merge.ky + t * dir[1]),
                );
                (t.ln(), g.ln())
            })
            .unzip();
        let (slope, fit_r2) = linear_fit(&xs, &ys);
        if !(fit_r2 >= 0.99) {
            return Err(Error::FitFailure { r2: fit_r2 });
        }
        exponents[slot] = slope;
        r2[slot] = fit_r2;
    }
    Ok(MergingExponents {
        exponents,
        r2,
        directions,
    })
}

/// Least-squares slope and coefficient of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, f64::NAN);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        f64::NAN
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::bands;
    use crate::lattice::{hopping_set, GeometryConfig};

    fn semimetal() -> HoppingSet {
        hopping_set(&GeometryConfig::magic(0.6, 0.6)).unwrap()
    }

    #[test]
    fn pair_at_semimetal_point() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        assert!(!s.extended);
        assert_eq!(s.points.len(), 2);
        let (a, b) = (s.points[0], s.points[1]);
        assert!(a.distance(&b.neg()) < 1e-8);
        let qa = dirac_charge(&h, a, 0.1, 256).unwrap();
        let qb = dirac_charge(&h, b, 0.1, 256).unwrap();
        assert_eq!(qa + qb, 0);
        assert_eq!(qa.abs(), 1);
    }

    #[test]
    fn gapped_point_has_no_zeros() {
        let h = hopping_set(&GeometryConfig::magic(0.8, 0.2)).unwrap();
        assert!(locate_dirac_points(&h, 301).unwrap().zeros.is_empty());
    }

    #[test]
    fn mirror_point_is_extended() {
        let h = hopping_set(&GeometryConfig::magic(0.5, 0.5)).unwrap();
        let s = locate_dirac_points(&h, 201).unwrap();
        assert!(s.extended, "{} zeros, extent {}", s.zeros.len(), s.extent);
        assert!(s.points.is_empty());
    }

    #[test]
    fn charge_independent_of_loop() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        for &k in &s.points {
            let reference = dirac_charge(&h, k, 0.1, 256).unwrap();
            for radius in [0.02, 0.05, 0.2] {
                for samples in [64, 256] {
                    assert_eq!(dirac_charge(&h, k, radius, samples).unwrap(), reference);
                }
            }
        }
    }

    #[test]
    fn empty_and_full_loops() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        // a loop far from both points
        let far = Momentum::new(s.points[0].kx + 1.0, s.points[0].ky + 1.5);
        if s.points.iter().all(|p| p.distance(&far) > 0.3) {
            assert_eq!(dirac_charge(&h, far, 0.1, 256).unwrap(), 0);
        }
        // loop around both (they are at +-k, so a circle about Gamma of
        // radius |k| + 0.3 encloses both if it avoids other zeros)
        let r = s.points[0].kx.hypot(s.points[0].ky) + 0.3;
        if r < PI {
            assert_eq!(dirac_charge(&h, Momentum::gamma(), r, 512).unwrap(), 0);
        }
    }

    #[test]
    fn loop_through_node() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        let p = s.points[0];
        let center = Momentum::raw(p.kx - 0.1, p.ky);
        assert!(matches!(
            dirac_charge(&h, center, 0.1, 4),
            Err(Error::Range { .. })
        ));
        // sample 0 sits exactly on the node
        assert!(matches!(
            dirac_charge(&h, center, 0.1, 64),
            Err(Error::LoopThroughNode { .. })
        ));
    }

    #[test]
    fn tilted_anisotropic_cone() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        let cone = characterize_cone(&h, s.points[0]).unwrap();
        assert!(cone.tilt[0].hypot(cone.tilt[1]) > 0.0);
        assert!(cone.anisotropy > 1.0);

        let chiral = characterize_cone(&h.chiral(), s.points[0]).unwrap();
        assert!(chiral.tilt[0].hypot(chiral.tilt[1]) < 1e-10);
    }

    #[test]
    fn cone_model_error() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        for &kd in &s.points {
            let cone = characterize_cone(&h, kd).unwrap();
            let mut worst: f64 = 0.0;
            for j in 0..64 {
                let t = 2.0 * PI * j as f64 / 64.0;
                let q = [1e-3 * t.cos(), 1e-3 * t.sin()];
                let exact = bands(&h, Momentum::raw(kd.kx + q[0], kd.ky + q[1]));
                let (lo, hi) = cone.model_energies(q);
                let e0 = bands(&h, kd).e_minus;
                worst = worst
                    .max((exact.e_minus - e0 - lo).abs())
                    .max((exact.e_plus - e0 - hi).abs());
            }
            assert!(worst < 1e-5, "{worst}");
        }
    }

    #[test]
    fn generic_cone_exponents_are_linear() {
        let h = semimetal();
        let s = locate_dirac_points(&h, 301).unwrap();
        let m = merging_exponents(&h, s.points[0]).unwrap();
        for e in m.exponents {
            assert!((e - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn fit_basics() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (slope, r2) = linear_fit(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
