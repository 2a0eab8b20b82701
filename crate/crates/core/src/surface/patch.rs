//! Analytic surface patches with exact first and second parameter derivatives.
//!
//! Every shipped stationary family is one of three closed-form charts over a
//! two-dimensional parameter domain:
//!
//! * [`Patch::PlanarDisk`] — a flat disk at constant model height (Euclidean
//!   families, and the equatorial totally geodesic disk in the curved models);
//! * [`Patch::Catenoid`] — the rotationally symmetric minimal annulus
//!   x(t,φ) = (c cosh t cos φ, c cosh t sin φ, c t), clipped by the unit sphere;
//! * [`Patch::GeodesicCap`] — a totally geodesic disk at positive distance
//!   from the ball center in the hyperbolic or spherical model, realized as a
//!   Euclidean sphere cap orthogonal (in the model-compatible sense) to the
//!   ideal or antipodal sphere.
//!
//! Disk-domain patches are parametrized over the closed unit disk; the
//! catenoid over a rectangle periodic in the second coordinate with period 2π.

use crate::spaceform::V3;

/// Parameter domain of a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// Closed unit disk {u² + v² ≤ 1}.
    UnitDisk,
    /// [t_min, t_max] × ℝ/2πℤ.  Two boundary circles.
    PeriodicStrip { t_min: f64, t_max: f64 },
}

/// Position with exact first and second parameter derivatives.
#[derive(Debug, Clone, Copy)]
pub struct PatchJet {
    pub x: V3,
    pub xu: V3,
    pub xv: V3,
    pub xuu: V3,
    pub xuv: V3,
    pub xvv: V3,
}

/// Boundary curve point in parameter space with derivatives in the curve
/// parameter τ ∈ [0, 2π).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryParamJet {
    pub p: [f64; 2],
    pub dp: [f64; 2],
    pub ddp: [f64; 2],
}

/// Closed-form analytic chart.
#[derive(Debug, Clone, Copy)]
pub enum Patch {
    /// x(u,v) = (radius·u, radius·v, height).
    PlanarDisk { radius: f64, height: f64 },
    /// x(t,φ) = (c cosh t cos φ, c cosh t sin φ, c t), |t| ≤ half_height.
    Catenoid { waist: f64, half_height: f64 },
    /// Cap of the Euclidean sphere |y − z_center·e₃| = sphere_radius between
    /// polar angles 0 and alpha_max, measured from the pole nearest the
    /// model origin.  `dome = −1` opens downward (hyperbolic model: cap below
    /// the center), `dome = +1` upward (spherical model).
    GeodesicCap { z_center: f64, sphere_radius: f64, alpha_max: f64, dome: f64 },
}

/// Radial profile jets for the cap chart: with s = u² + v² and α = alpha_max,
/// g(s) = sin(α√s)/√s and h(s) = cos(α√s), together with first and second
/// s-derivatives.  Both are analytic functions of s, so the chart is smooth
/// through the pole s = 0.
#[derive(Debug, Clone, Copy)]
struct RadialJet {
    g: f64,
    gp: f64,
    gpp: f64,
    h: f64,
    hp: f64,
    hpp: f64,
}

fn radial_jet(alpha: f64, s: f64) -> RadialJet {
    let a2 = alpha * alpha;
    let z = a2 * s;
    if z < 1e-2 {
        // Truncated power series in z = α²s; the largest dropped term is
        // O(z⁶/13!) < 1e-22 at the branch cut.
        let g = alpha
            * (1.0
                + z * (-1.0 / 6.0
                    + z * (1.0 / 120.0
                        + z * (-1.0 / 5040.0
                            + z * (1.0 / 362880.0 + z * (-1.0 / 39916800.0))))));
        let gp = alpha * a2
            * (-1.0 / 6.0
                + z * (1.0 / 60.0
                    + z * (-1.0 / 1680.0 + z * (1.0 / 90720.0 + z * (-1.0 / 7983360.0)))));
        let gpp = alpha * a2 * a2
            * (1.0 / 60.0 + z * (-1.0 / 840.0 + z * (1.0 / 30240.0 + z * (-1.0 / 1995840.0))));
        let h = 1.0
            + z * (-1.0 / 2.0
                + z * (1.0 / 24.0 + z * (-1.0 / 720.0 + z * (1.0 / 40320.0 + z * (-1.0 / 3628800.0)))));
        let hp = a2
            * (-1.0 / 2.0
                + z * (1.0 / 12.0 + z * (-1.0 / 240.0 + z * (1.0 / 10080.0 + z * (-1.0 / 725760.0)))));
        let hpp = a2 * a2
            * (1.0 / 12.0 + z * (-1.0 / 120.0 + z * (1.0 / 3360.0 + z * (-1.0 / 181440.0))));
        RadialJet { g, gp, gpp, h, hp, hpp }
    } else {
        let r = s.sqrt();
        let g = (alpha * r).sin() / r;
        let h = (alpha * r).cos();
        let gp = (alpha * h - g) / (2.0 * s);
        let hp = -alpha * g / 2.0;
        let gpp = (alpha * hp - 3.0 * gp) / (2.0 * s);
        let hpp = -alpha * gp / 2.0;
        RadialJet { g, gp, gpp, h, hp, hpp }
    }
}

impl Patch {
    pub fn domain(&self) -> DomainKind {
        match *self {
            Patch::PlanarDisk { .. } | Patch::GeodesicCap { .. } => DomainKind::UnitDisk,
            Patch::Catenoid { half_height, .. } => {
                DomainKind::PeriodicStrip { t_min: -half_height, t_max: half_height }
            }
        }
    }

    pub fn boundary_components(&self) -> usize {
        match self.domain() {
            DomainKind::UnitDisk => 1,
            DomainKind::PeriodicStrip { .. } => 2,
        }
    }

    /// Parameter-space boundary curve of component `comp`, τ ∈ [0, 2π).
    pub fn boundary_param(&self, comp: usize, tau: f64) -> BoundaryParamJet {
        match self.domain() {
            DomainKind::UnitDisk => BoundaryParamJet {
                p: [tau.cos(), tau.sin()],
                dp: [-tau.sin(), tau.cos()],
                ddp: [-tau.cos(), -tau.sin()],
            },
            DomainKind::PeriodicStrip { t_min, t_max } => {
                let t = if comp == 0 { t_max } else { t_min };
                BoundaryParamJet { p: [t, tau], dp: [0.0, 1.0], ddp: [0.0, 0.0] }
            }
        }
    }

    /// Outward direction in parameter space at a boundary point.
    pub fn outward_param_direction(&self, p: [f64; 2]) -> [f64; 2] {
        match self.domain() {
            DomainKind::UnitDisk => {
                let n = (p[0] * p[0] + p[1] * p[1]).sqrt().max(1e-300);
                [p[0] / n, p[1] / n]
            }
            DomainKind::PeriodicStrip { t_min, t_max } => {
                if (p[0] - t_max).abs() <= (p[0] - t_min).abs() {
                    [1.0, 0.0]
                } else {
                    [-1.0, 0.0]
                }
            }
        }
    }

    pub fn position(&self, u: f64, v: f64) -> V3 {
        self.jet2(u, v).x
    }

    /// Exact position, first, and second derivatives at parameter (u, v).
    pub fn jet2(&self, u: f64, v: f64) -> PatchJet {
        let zero = V3::zeros();
        match *self {
            Patch::PlanarDisk { radius, height } => PatchJet {
                x: V3::new(radius * u, radius * v, height),
                xu: V3::new(radius, 0.0, 0.0),
                xv: V3::new(0.0, radius, 0.0),
                xuu: zero,
                xuv: zero,
                xvv: zero,
            },
            Patch::Catenoid { waist: c, .. } => {
                let (t, phi) = (u, v);
                let (ch, sh) = (t.cosh(), t.sinh());
                let (cp, sp) = (phi.cos(), phi.sin());
                PatchJet {
                    x: V3::new(c * ch * cp, c * ch * sp, c * t),
                    xu: V3::new(c * sh * cp, c * sh * sp, c),
                    xv: V3::new(-c * ch * sp, c * ch * cp, 0.0),
                    xuu: V3::new(c * ch * cp, c * ch * sp, 0.0),
                    xuv: V3::new(-c * sh * sp, c * sh * cp, 0.0),
                    xvv: V3::new(-c * ch * cp, -c * ch * sp, 0.0),
                }
            }
            Patch::GeodesicCap { z_center, sphere_radius: rc, alpha_max, dome } => {
                let s = u * u + v * v;
                let j = radial_jet(alpha_max, s);
                let (su, sv) = (2.0 * u, 2.0 * v);
                // x = rc·g·u, y = rc·g·v, z = z_center + dome·rc·h.
                let x = V3::new(rc * j.g * u, rc * j.g * v, z_center + dome * rc * j.h);
                let xu = V3::new(
                    rc * (j.g + j.gp * su * u),
                    rc * (j.gp * su * v),
                    dome * rc * j.hp * su,
                );
                let xv = V3::new(
                    rc * (j.gp * sv * u),
                    rc * (j.g + j.gp * sv * v),
                    dome * rc * j.hp * sv,
                );
                let xuu = V3::new(
                    rc * (6.0 * u * j.gp + 4.0 * u * u * u * j.gpp),
                    rc * (2.0 * v * j.gp + 4.0 * u * u * v * j.gpp),
                    dome * rc * (2.0 * j.hp + 4.0 * u * u * j.hpp),
                );
                let xuv = V3::new(
                    rc * (2.0 * v * j.gp + 4.0 * u * u * v * j.gpp),
                    rc * (2.0 * u * j.gp + 4.0 * u * v * v * j.gpp),
                    dome * rc * (4.0 * u * v * j.hpp),
                );
                let xvv = V3::new(
                    rc * (2.0 * u * j.gp + 4.0 * u * v * v * j.gpp),
                    rc * (6.0 * v * j.gp + 4.0 * v * v * v * j.gpp),
                    dome * rc * (2.0 * j.hp + 4.0 * v * v * j.hpp),
                );
                PatchJet { x, xu, xv, xuu, xuv, xvv }
            }
        }
    }
}
