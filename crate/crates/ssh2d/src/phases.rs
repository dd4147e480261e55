//! Phase classification and (beta_x, beta_y) scans.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{gap_scan, high_symmetry_sums, Momentum};
use crate::error::{Error, Result};
use crate::lattice::{hopping_set, GeometryConfig};
use crate::topology::dirac::{locate_dirac_points, MAX_ISOLATED};
use crate::topology::zak::{zak_vector, ZakVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    NT,
    TX,
    TY,
    TXY,
    SM,
    NLSM,
    BOUNDARY,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 7] = [
        PhaseLabel::NT,
        PhaseLabel::TX,
        PhaseLabel::TY,
        PhaseLabel::TXY,
        PhaseLabel::SM,
        PhaseLabel::NLSM,
        PhaseLabel::BOUNDARY,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::NT => "NT",
            PhaseLabel::TX => "TX",
            PhaseLabel::TY => "TY",
            PhaseLabel::TXY => "TXY",
            PhaseLabel::SM => "SM",
            PhaseLabel::NLSM => "NLSM",
            PhaseLabel::BOUNDARY => "BOUNDARY",
        }
    }

    /// Label under the x <-> y exchange.
    pub fn exchanged(self) -> Self {
        match self {
            PhaseLabel::TX => PhaseLabel::TY,
            PhaseLabel::TY => PhaseLabel::TX,
            other => other,
        }
    }

    pub fn is_gapless(self) -> bool {
        matches!(self, PhaseLabel::SM | PhaseLabel::NLSM | PhaseLabel::BOUNDARY)
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub beta_x: f64,
    pub beta_y: f64,
    pub theta_m: f64,
    pub min_gap: f64,
    pub zak: Option<ZakVector>,
    pub n_dirac: usize,
    pub label: PhaseLabel,
    /// Why a point ended up BOUNDARY.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub gap_tol: f64,
    pub grid: usize,
    pub zak_lines: usize,
    pub zak_steps: usize,
    /// Quantization tolerance on the Zak components (radians).
    pub zak_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            gap_tol: 1e-6,
            grid: 301,
            zak_lines: 201,
            zak_steps: 401,
            zak_tol: 0.05 * PI,
        }
    }
}

pub fn classify(geom: &GeometryConfig) -> Result<PhasePoint> {
    classify_with(geom, &ClassifyOptions::default())
}

pub fn classify_with(geom: &GeometryConfig, opts: &ClassifyOptions) -> Result<PhasePoint> {
    geom.check()?;
    let h = hopping_set(geom)?;
    let scan = gap_scan(&h, opts.grid)?;
    let mut point = PhasePoint {
        beta_x: geom.beta_x,
        beta_y: geom.beta_y,
        theta_m: geom.theta_m,
        min_gap: scan.min_gap,
        zak: None,
        n_dirac: 0,
        label: PhaseLabel::BOUNDARY,
        diagnostic: None,
    };
    if scan.min_gap < opts.gap_tol {
        let search = locate_dirac_points(&h, opts.grid)?;
        point.n_dirac = search.points.len();
        if search.extended {
            point.label = PhaseLabel::NLSM;
        } else if point.n_dirac >= 2 && point.n_dirac % 2 == 0 && point.n_dirac <= MAX_ISOLATED {
            point.label = PhaseLabel::SM;
        } else {
            point.diagnostic = Some(format!(
                "gap closes with {} isolated zero(s)",
                point.n_dirac
            ));
        }
        return Ok(point);
    }
    if scan.min_gap <= 10.0 * opts.gap_tol {
        point.diagnostic = Some(format!("near-critical gap {:.3e}", scan.min_gap));
        return Ok(point);
    }
    match zak_vector(&h, opts.zak_lines, opts.zak_steps) {
        Ok(z) => {
            point.label = match z.quantized(opts.zak_tol) {
                Some((0, 0)) => PhaseLabel::NT,
                Some((1, 0)) => PhaseLabel::TX,
                Some((0, 1)) => PhaseLabel::TY,
                Some(_) => PhaseLabel::TXY,
                None => {
                    point.diagnostic = Some(format!(
                        "Zak phase ({:.4}, {:.4}) not near 0 or pi",
                        z.zx, z.zy
                    ));
                    PhaseLabel::BOUNDARY
                }
            };
            point.zak = Some(z);
        }
        Err(e @ (Error::NonQuantized { .. } | Error::NotGapped { .. })) => {
            point.diagnostic = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRange {
    pub min: f64,
    pub max: f64,
}

impl Default for BetaRange {
    fn default() -> Self {
        BetaRange { min: 0.0, max: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub beta_x: f64,
    pub beta_y: f64,
    pub outcome: std::result::Result<PhasePoint, String>,
}

impl ScanPoint {
    pub fn label(&self) -> Option<PhaseLabel> {
        self.outcome.as_ref().ok().map(|p| p.label)
    }
}

/// Grid coordinates of a scan: `resolution` points from `min` to `max`.
pub fn scan_axis(range: &BetaRange, resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| range.min + (range.max - range.min) * i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Classifies every point of a `resolution x resolution` grid, row-major
/// with `beta_y` outer. Geometrically degenerate points are skipped.
pub fn scan(range: &BetaRange, theta_m: f64, resolution: usize) -> Result<Vec<ScanPoint>> {
    scan_with(range, theta_m, resolution, &ClassifyOptions::default())
}

pub fn scan_with(
    range: &BetaRange,
    theta_m: f64,
    resolution: usize,
    opts: &ClassifyOptions,
) -> Result<Vec<ScanPoint>> {
    if resolution < 11 {
        return Err(Error::Range {
            name: "resolution",
            value: resolution as f64,
            expected: ">= 11",
        });
    }
    if !(range.min < range.max) {
        return Err(Error::Invalid(format!(
            "empty beta range [{}, {}]",
            range.min, range.max
        )));
    }
    let axis = scan_axis(range, resolution);
    let points: Vec<GeometryConfig> = axis
        .iter()
        .flat_map(|&by| axis.iter().map(move |&bx| GeometryConfig::new(bx, by, theta_m)))
        .filter(|g| {
            !g.validate()
                .iter()
                .any(|e| matches!(e, Error::DegenerateGeometry { .. }))
        })
        .collect();
    Ok(points
        .par_iter()
        .map(|g| ScanPoint {
            beta_x: g.beta_x,
            beta_y: g.beta_y,
            outcome: classify_with(g, opts).map_err(|e| e.to_string()),
        })
        .collect())
}

/// Bisects `path(t)` on `[lo, hi]` for the parameter where the signed sum
/// at the named high-symmetry point ("G", "X", "Y", "M") vanishes.
pub fn find_closing(
    path: impl Fn(f64) -> GeometryConfig,
    point: &str,
    lo: f64,
    hi: f64,
) -> Result<(GeometryConfig, Momentum)> {
    let target = match point {
        "G" => (0, Momentum::gamma()),
        "X" => (1, Momentum::x_point()),
        "Y" => (2, Momentum::y_point()),
        "M" => (3, Momentum::m_point()),
        other => return Err(Error::Invalid(format!("unknown point {other}"))),
    };
    let sum = |t: f64| -> Result<f64> { Ok(high_symmetry_sums(&hopping_set(&path(t))?)[target.0].1) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (sum(a)?, sum(b)?);
    if fa * fb > 0.0 {
        return Err(Error::Invalid(format!(
            "no sign change of the {point} sum on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = sum(mid)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok((path(0.5 * (a + b)), target.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::magic_angle;

    fn fast() -> ClassifyOptions {
        ClassifyOptions {
            grid: 101,
            zak_lines: 21,
            ..ClassifyOptions::default()
        }
    }

    #[test]
    fn labeled_points() {
        let cases = [
            ((0.8, 0.2), PhaseLabel::TX),
            ((0.2, 0.8), PhaseLabel::TY),
            ((0.8, 0.8), PhaseLabel::TXY),
            ((0.25, 0.75), PhaseLabel::TY),
            ((0.75, 0.25), PhaseLabel::TX),
            ((0.75, 0.75), PhaseLabel::TXY),
            ((0.25, 0.25), PhaseLabel::NT),
            ((0.6, 0.6), PhaseLabel::SM),
            ((0.5, 0.5), PhaseLabel::NLSM),
        ];
        for ((bx, by), label) in cases {
            let p = classify_with(&GeometryConfig::magic(bx, by), &fast()).unwrap();
            assert_eq!(p.label, label, "({bx}, {by}): {p:?}");
            if label == PhaseLabel::SM {
                assert_eq!(p.n_dirac, 2);
                assert!(p.min_gap < 1e-6);
            }
        }
    }

    #[test]
    fn deterministic() {
        let g = GeometryConfig::magic(0.7, 0.3);
        assert_eq!(classify_with(&g, &fast()).unwrap(), classify_with(&g, &fast()).unwrap());
    }

    #[test]
    fn exchange_swaps_labels() {
        for (bx, by) in [(0.8, 0.2), (0.3, 0.85), (0.6, 0.6)] {
            let g = GeometryConfig::magic(bx, by);
            let a = classify_with(&g, &fast()).unwrap().label;
            let b = classify_with(&g.exchanged(), &fast()).unwrap().label;
            assert_eq!(a.exchanged(), b);
        }
    }

    #[test]
    fn small_scan_is_ordered() {
        let pts = scan_with(&BetaRange::default(), magic_angle(), 11, &fast()).unwrap();
        // the four corners are degenerate
        assert_eq!(pts.len(), 121 - 4);
        assert_eq!((pts[0].beta_x, pts[0].beta_y), (0.1, 0.0));
        assert!(pts.iter().all(|p| p.outcome.is_ok()));
        assert!(scan(&BetaRange::default(), magic_angle(), 5).is_err());
    }

    #[test]
    fn closing_on_x() {
        let (g, k) = find_closing(|t| GeometryConfig::magic(t, 0.6), "X", 0.7, 0.75).unwrap();
        let h = hopping_set(&g).unwrap();
        assert!(crate::bloch::gap(&h, k) < 1e-12);
    }
}
