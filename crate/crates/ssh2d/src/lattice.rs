//! Lattice geometry and the dipolar hopping rates it induces.
//!
//! Sublattice B is displaced from sublattice A by `(beta_x, beta_y)` in units
//! of the lattice constant. All dipoles lie in the plane at angle `theta_m`
//! from the x-axis. Energies are in units of `J = |d|^2 / (4 pi eps0 a^3)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cutoff below which a bond length counts as coincident atoms.
pub const R_MIN: f64 = 1e-6;

/// Dipole angle at which `3 cos^2 - 1` vanishes, killing `j2x`.
pub fn magic_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

/// Excitation-exchange rate `(3 cos^2(theta) - 1) / r^3` between two dipoles.
pub fn dipole_coupling(r: f64, cos_theta: f64) -> Result<f64> {
    dipole_coupling_with_cutoff(r, cos_theta, R_MIN)
}

pub fn dipole_coupling_with_cutoff(r: f64, cos_theta: f64, r_min: f64) -> Result<f64> {
    if !(r > r_min) {
        return Err(Error::DegenerateGeometry {
            bond: "pair",
            distance: r,
            min: r_min,
        });
    }
    if !(cos_theta.abs() <= 1.0 + 1e-12) {
        return Err(Error::Range {
            name: "cos_theta",
            value: cos_theta,
            expected: "|cos_theta| <= 1",
        });
    }
    Ok((3.0 * cos_theta * cos_theta - 1.0) / (r * r * r))
}

/// Sublattice offsets and dipole orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub beta_x: f64,
    pub beta_y: f64,
    pub theta_m: f64,
}

impl GeometryConfig {
    pub fn new(beta_x: f64, beta_y: f64, theta_m: f64) -> Self {
        GeometryConfig {
            beta_x,
            beta_y,
            theta_m,
        }
    }

    /// Offsets with the dipoles at the magic angle.
    pub fn magic(beta_x: f64, beta_y: f64) -> Self {
        Self::new(beta_x, beta_y, magic_angle())
    }

    /// Mirror image under x <-> y: offsets swapped, `theta_m -> pi/2 - theta_m`.
    pub fn exchanged(&self) -> Self {
        Self::new(
            self.beta_y,
            self.beta_x,
            std::f64::consts::FRAC_PI_2 - self.theta_m,
        )
    }

    /// Every invariant violation, not just the first.
    pub fn validate(&self) -> Vec<Error> {
        let mut errors = Vec::new();
        for (name, value) in [("beta_x", self.beta_x), ("beta_y", self.beta_y)] {
            if !(0.0..=1.0).contains(&value) {
                errors.push(Error::Range {
                    name,
                    value,
                    expected: "0 <= beta <= 1",
                });
            }
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.theta_m) {
            errors.push(Error::Range {
                name: "theta_m",
                value: self.theta_m,
                expected: "0 <= theta_m <= pi/2",
            });
        }
        for (bond, r) in self.distances() {
            if !(r >= R_MIN) {
                errors.push(Error::DegenerateGeometry {
                    bond,
                    distance: r,
                    min: R_MIN,
                });
            }
        }
        errors
    }

    pub fn check(&self) -> Result<()> {
        match self.validate().into_iter().next() {
            Some(err) => Err(err),
            None => Ok(()),
        }
    }

    /// Unit vector of the dipole axis in the frame used by
    /// [`crate::realspace::site_positions`] (cell row index runs along -y).
    pub fn dipole_axis(&self) -> [f64; 2] {
        [self.theta_m.cos(), -self.theta_m.sin()]
    }

    fn distances(&self) -> [(&'static str, f64); 4] {
        let (bx, by) = (self.beta_x, self.beta_y);
        [
            ("x'", bx.hypot(by)),
            ("x", (1.0 - bx).hypot(by)),
            ("y'", bx.hypot(1.0 - by)),
            ("y", (1.0 - bx).hypot(1.0 - by)),
        ]
    }
}

/// Length and dipole-angle cosine of one bond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub r: f64,
    pub cos_theta: f64,
}

/// The four inter-sublattice bonds plus the two unit-length intra-sublattice ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondGeometry {
    pub xp: Bond,
    pub x: Bond,
    pub yp: Bond,
    pub y: Bond,
    pub intra_x: Bond,
    pub intra_y: Bond,
}

pub fn bond_geometry(config: &GeometryConfig) -> Result<BondGeometry> {
    let (bx, by) = (config.beta_x, config.beta_y);
    let (sin_m, cos_m) = config.theta_m.sin_cos();
    for (bond, distance) in config.distances() {
        if !(distance >= R_MIN) {
            return Err(Error::DegenerateGeometry {
                bond,
                distance,
                min: R_MIN,
            });
        }
    }
    let [(_, r_xp), (_, r_x), (_, r_yp), (_, r_y)] = config.distances();
    let bond = |r: f64, projection: f64| Bond {
        r,
        cos_theta: (projection / r).clamp(-1.0, 1.0),
    };
    Ok(BondGeometry {
        xp: bond(r_xp, bx * cos_m - by * sin_m),
        x: bond(r_x, (1.0 - bx) * cos_m + by * sin_m),
        yp: bond(r_yp, bx * cos_m + (1.0 - by) * sin_m),
        y: bond(r_y, (1.0 - bx) * cos_m - (1.0 - by) * sin_m),
        intra_x: Bond {
            r: 1.0,
            cos_theta: cos_m,
        },
        intra_y: Bond {
            r: 1.0,
            cos_theta: sin_m,
        },
    })
}

/// The six hopping energies of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingSet {
    pub jxp: f64,
    pub jx: f64,
    pub jyp: f64,
    pub jy: f64,
    pub j2x: f64,
    pub j2y: f64,
}

impl HoppingSet {
    pub fn new(jxp: f64, jx: f64, jyp: f64, jy: f64, j2x: f64, j2y: f64) -> Self {
        HoppingSet {
            jxp,
            jx,
            jyp,
            jy,
            j2x,
            j2y,
        }
    }

    /// Replaces the intra-sublattice couplings, e.g. to reach the chiral limit
    /// that no physical geometry provides.
    pub fn with_intra(mut self, j2x: f64, j2y: f64) -> Self {
        self.j2x = j2x;
        self.j2y = j2y;
        self
    }

    pub fn chiral(self) -> Self {
        self.with_intra(0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.jxp, self.jx, self.jyp, self.jy, self.j2x, self.j2y]
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().fold(0.0, |m, j| m.max(j.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|j| j.is_finite())
    }
}

pub fn hopping_set(config: &GeometryConfig) -> Result<HoppingSet> {
    let bonds = bond_geometry(config)?;
    let j = |b: Bond| dipole_coupling(b.r, b.cos_theta);
    Ok(HoppingSet {
        jxp: j(bonds.xp)?,
        jx: j(bonds.x)?,
        jyp: j(bonds.yp)?,
        jy: j(bonds.y)?,
        j2x: j(bonds.intra_x)?,
        j2y: j(bonds.intra_y)?,
    })
}

/// Converts a hopping set from units of `J` to MHz given the size of `J`.
pub fn to_physical(h: &HoppingSet, scale_mhz: f64) -> Result<HoppingSet> {
    if !(scale_mhz > 0.0) || !scale_mhz.is_finite() {
        return Err(Error::Range {
            name: "scale_mhz",
            value: scale_mhz,
            expected: "positive and finite",
        });
    }
    Ok(HoppingSet {
        jxp: h.jxp * scale_mhz,
        jx: h.jx * scale_mhz,
        jyp: h.jyp * scale_mhz,
        jy: h.jy * scale_mhz,
        j2x: h.j2x * scale_mhz,
        j2y: h.j2y * scale_mhz,
    })
}
