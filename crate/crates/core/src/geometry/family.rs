//! Built-in chart families and their closed-form derivatives.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::profile::ScalarProfile;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Chart value with first and second partial derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ChartJet<T: Real> {
    pub r: Vector3<T>,
    pub ru: Vector3<T>,
    pub rv: Vector3<T>,
    pub ruu: Vector3<T>,
    pub ruv: Vector3<T>,
    pub rvv: Vector3<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapChart {
    /// Graph over the square inscribed in the cap's base disk; every point has polar
    /// angle at most the cap angle.
    #[default]
    Orthographic,
    /// Geodesic polar coordinates `(s, phi)`; the `s = 0` edge is a coordinate pole.
    Polar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RevolutionProfile {
    /// `rho = c cosh(s / c)`, `z = s`.
    Catenoid { waist: f64 },
    /// `rho = major + minor cos s`, `z = minor sin s`.
    Torus { major: f64, minor: f64 },
}

/// Analytic surface family. Serialized adjacently tagged as `{"family": .., "params": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum SurfaceFamily {
    Plate,
    /// Cylinder of the given radius, axis along `y`; `u` is arc length.
    Cylinder { radius: f64 },
    SphericalCap {
        radius: f64,
        polar_angle: f64,
        #[serde(default)]
        chart: CapChart,
    },
    /// Graph `z = height(u, v)`; its default normal points to `-z`.
    Graph { height: ScalarProfile },
    Revolution { profile: RevolutionProfile },
}

impl SurfaceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceFamily::Plate => "plate",
            SurfaceFamily::Cylinder { .. } => "cylinder",
            SurfaceFamily::SphericalCap { .. } => "spherical_cap",
            SurfaceFamily::Graph { .. } => "graph",
            SurfaceFamily::Revolution { .. } => "revolution",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadDescriptor(format!("{}: {m}", self.name())));
        match self {
            SurfaceFamily::Cylinder { radius } if !(*radius > 0.0) => bad("radius must be positive"),
            SurfaceFamily::SphericalCap { radius, polar_angle, chart } => {
                if !(*radius > 0.0) {
                    bad("radius must be positive")
                } else if !(*polar_angle > 0.0 && *polar_angle < std::f64::consts::PI) {
                    bad("polar angle must lie in (0, pi)")
                } else if *chart == CapChart::Orthographic && *polar_angle >= std::f64::consts::FRAC_PI_2 {
                    bad("orthographic chart needs polar angle below pi/2")
                } else {
                    Ok(())
                }
            }
            SurfaceFamily::Revolution { profile: RevolutionProfile::Catenoid { waist } } if !(*waist > 0.0) => {
                bad("catenoid waist must be positive")
            }
            SurfaceFamily::Revolution { profile: RevolutionProfile::Torus { major, minor } }
                if !(*minor > 0.0 && *major > *minor) =>
            {
                bad("torus needs major > minor > 0")
            }
            _ => Ok(()),
        }
    }

    pub fn default_domain(&self) -> [[f64; 2]; 2] {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            SurfaceFamily::Plate => [[0.0, 1.0], [0.0, 1.0]],
            SurfaceFamily::Cylinder { radius } => [[0.0, radius * FRAC_PI_2], [0.0, 1.0]],
            SurfaceFamily::SphericalCap { radius, polar_angle, chart } => match chart {
                CapChart::Orthographic => {
                    let a = radius * polar_angle.sin() / 2f64.sqrt();
                    [[-a, a], [-a, a]]
                }
                CapChart::Polar => [[0.0, radius * polar_angle], [0.0, 2.0 * PI]],
            },
            SurfaceFamily::Graph { .. } => [[-0.5, 0.5], [-0.5, 0.5]],
            SurfaceFamily::Revolution { profile } => match profile {
                RevolutionProfile::Catenoid { .. } => [[-0.5, 0.5], [0.0, PI]],
                RevolutionProfile::Torus { .. } => [[-FRAC_PI_2 / 2.0, FRAC_PI_2 / 2.0], [0.0, PI]],
            },
        }
    }

    /// Sign relating the unit normal to the chart orientation `r_u x r_v`.
    pub fn default_orientation(&self) -> f64 {
        match self {
            SurfaceFamily::Graph { .. } => -1.0,
            _ => 1.0,
        }
    }

    /// Parameter edges on which the chart collapses to a point (coordinate poles).
    /// Returned as `(axis, side)` with `side` 0 for the lower bound.
    pub fn pole_edges(&self) -> Vec<(usize, usize)> {
        match self {
            SurfaceFamily::SphericalCap { chart: CapChart::Polar, .. } => vec![(0, 0)],
            _ => vec![],
        }
    }

    pub fn chart_jet<T: Real>(&self, u: T, v: T) -> ChartJet<T> {
        let z = T::zero();
        let one = T::one();
        let v3 = |a: T, b: T, c: T| Vector3::new(a, b, c);
        match self {
            SurfaceFamily::Plate => ChartJet {
                r: v3(u, v, z),
                ru: v3(one, z, z),
                rv: v3(z, one, z),
                ruu: Vector3::zeros(),
                ruv: Vector3::zeros(),
                rvv: Vector3::zeros(),
            },
            SurfaceFamily::Cylinder { radius } => {
                let r = T::lit(*radius);
                let (s, c) = ((u / r).sin(), (u / r).cos());
                ChartJet {
                    r: v3(r * s, v, r * c),
                    ru: v3(c, z, -s),
                    rv: v3(z, one, z),
                    ruu: v3(-s / r, z, -c / r),
                    ruv: Vector3::zeros(),
                    rvv: Vector3::zeros(),
                }
            }
            SurfaceFamily::SphericalCap { radius, chart, .. } => {
                let rad = T::lit(*radius);
                match chart {
                    CapChart::Orthographic => {
                        let w = (rad * rad - u * u - v * v).sqrt();
                        let w3 = w * w * w;
                        ChartJet {
                            r: v3(u, v, w),
                            ru: v3(one, z, -u / w),
                            rv: v3(z, one, -v / w),
                            ruu: v3(z, z, -(rad * rad - v * v) / w3),
                            ruv: v3(z, z, -u * v / w3),
                            rvv: v3(z, z, -(rad * rad - u * u) / w3),
                        }
                    }
                    CapChart::Polar => {
                        let s = u / rad;
                        let (ss, cs) = (s.sin(), s.cos());
                        let (sp, cp) = (v.sin(), v.cos());
                        ChartJet {
                            r: v3(rad * ss * cp, rad * ss * sp, rad * cs),
                            ru: v3(cs * cp, cs * sp, -ss),
                            rv: v3(-rad * ss * sp, rad * ss * cp, z),
                            ruu: v3(-ss * cp / rad, -ss * sp / rad, -cs / rad),
                            ruv: v3(-cs * sp, cs * cp, z),
                            rvv: v3(-rad * ss * cp, -rad * ss * sp, z),
                        }
                    }
                }
            }
            SurfaceFamily::Graph { height } => {
                let f = height.jet(u, v);
                ChartJet {
                    r: v3(u, v, f.f),
                    ru: v3(one, z, f.fu),
                    rv: v3(z, one, f.fv),
                    ruu: v3(z, z, f.fuu),
                    ruv: v3(z, z, f.fuv),
                    rvv: v3(z, z, f.fvv),
                }
            }
            SurfaceFamily::Revolution { profile } => {
                // (rho, rho', rho'', z, z', z'') in the profile parameter s = u
                let (rho, drho, ddrho, h, dh, ddh) = match profile {
                    RevolutionProfile::Catenoid { waist } => {
                        let c = T::lit(*waist);
                        let x = u / c;
                        (c * x.cosh(), x.sinh(), x.cosh() / c, u, one, z)
                    }
                    RevolutionProfile::Torus { major, minor } => {
                        let (big, small) = (T::lit(*major), T::lit(*minor));
                        let (s, c) = (u.sin(), u.cos());
                        (big + small * c, -small * s, -small * c, small * s, small * c, -small * s)
                    }
                };
                let (sp, cp) = (v.sin(), v.cos());
                ChartJet {
                    r: v3(rho * cp, rho * sp, h),
                    ru: v3(drho * cp, drho * sp, dh),
                    rv: v3(-rho * sp, rho * cp, z),
                    ruu: v3(ddrho * cp, ddrho * sp, ddh),
                    ruv: v3(-drho * sp, drho * cp, z),
                    rvv: v3(-rho * cp, -rho * sp, z),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_fd(family: &SurfaceFamily, u: f64, v: f64) {
        let d = 1e-6;
        let j = family.chart_jet(u, v);
        let ju = |x: f64| family.chart_jet(x, v);
        let jv = |y: f64| family.chart_jet(u, y);
        let ru = (ju(u + d).r - ju(u - d).r) / (2.0 * d);
        let rv = (jv(v + d).r - jv(v - d).r) / (2.0 * d);
        let ruu = (ju(u + d).ru - ju(u - d).ru) / (2.0 * d);
        let ruv = (jv(v + d).ru - jv(v - d).ru) / (2.0 * d);
        let rvv = (jv(v + d).rv - jv(v - d).rv) / (2.0 * d);
        for (a, b) in [(ru, j.ru), (rv, j.rv), (ruu, j.ruu), (ruv, j.ruv), (rvv, j.rvv)] {
            assert!((a - b).norm() < 1e-7, "{} {a:?} vs {b:?}", family.name());
        }
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let fams = [
            SurfaceFamily::Plate,
            SurfaceFamily::Cylinder { radius: 2.0 },
            SurfaceFamily::SphericalCap { radius: 1.3, polar_angle: 1.0, chart: CapChart::Orthographic },
            SurfaceFamily::SphericalCap { radius: 1.3, polar_angle: 1.0, chart: CapChart::Polar },
            SurfaceFamily::Graph {
                height: ScalarProfile::Polynomial { terms: vec![[0.5, 2.0, 0.0], [0.3, 1.0, 2.0]] },
            },
            SurfaceFamily::Revolution { profile: RevolutionProfile::Catenoid { waist: 0.8 } },
            SurfaceFamily::Revolution { profile: RevolutionProfile::Torus { major: 2.0, minor: 0.5 } },
        ];
        for f in &fams {
            check_fd(f, 0.21, 0.37);
        }
    }

    #[test]
    fn descriptor_validation() {
        assert!(SurfaceFamily::Cylinder { radius: -1.0 }.validate().is_err());
        assert!(SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: 4.0, chart: CapChart::Polar }
            .validate()
            .is_err());
        assert!(SurfaceFamily::Plate.validate().is_ok());
    }
}
