//! Ambient space forms in conformal ball coordinates.
//!
//! All three constant-curvature ambients are handled through one chart on a
//! subset of ℝ³ with metric ḡ = e^{2w}δ:
//!
//! * Euclidean:  w ≡ 0 on all of ℝ³ (curvature κ = 0),
//! * hyperbolic: e^{2w} = 4/(1−|x|²)² on |x| < 1 (κ = −1),
//! * spherical:  e^{2w} = 4/(1+|x|²)² on ℝ³ minus the antipode (κ = +1).
//!
//! Geodesic distance r from the origin satisfies |x| = tanh(r/2) (hyperbolic)
//! and |x| = tan(r/2) (spherical).  The radial potential V₀ and the directional
//! potentials V_a close over all three spaces:
//!
//!   V₀ = cosh r, 1, cos r      (equivalently (1±|x|²)/(1∓|x|²)),
//!   V_a = e^{w}⟨x,a⟩           (= 2⟨x,a⟩/(1∓|x|²) in the curved cases).
//!
//! The distinguished vector fields are the position field x (conformal Killing:
//! sym ∇̄x = V₀ ḡ) and, per direction a, the "translation" Killing field
//!
//!   flat:       Y_a = a,
//!   hyperbolic: Y_a = ½(|x|²+1)a − ⟨x,a⟩x,
//!   spherical:  Y_a = ½(1−|x|²)a + ⟨x,a⟩x,
//!
//! which satisfies ḡ(Y_a, x) = V_a pointwise.  Christoffel symbols of the
//! conformal metric are used in closed form:
//!
//!   Γ^k_{ij} = δ_{ik} ∂_j w + δ_{jk} ∂_i w − δ_{ij} ∂_k w.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;

/// Points with model norm beyond this are rejected in the spherical chart:
/// they are too close to the missing antipode for conformal factors to be
/// representable.
pub const SPHERICAL_CHART_GUARD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Hyperbolic,
    Spherical,
}

impl SpaceKind {
    /// Sectional curvature κ of the ambient space form.
    pub fn curvature(self) -> f64 {
        match self {
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => -1.0,
            SpaceKind::Spherical => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::Hyperbolic => "hyperbolic",
            SpaceKind::Spherical => "spherical",
        }
    }
}

/// A space form presented on its conformal chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientSpace {
    pub kind: SpaceKind,
}

impl AmbientSpace {
    pub fn new(kind: SpaceKind) -> Self {
        AmbientSpace { kind }
    }

    /// Whether the chart covers the point.
    pub fn chart_ok(&self, x: &V3) -> bool {
        match self.kind {
            SpaceKind::Euclidean => true,
            SpaceKind::Hyperbolic => x.norm_squared() < 1.0,
            SpaceKind::Spherical => x.norm() < SPHERICAL_CHART_GUARD,
        }
    }

    fn require_chart(&self, x: &V3) -> Result<()> {
        if self.chart_ok(x) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "point at model radius {:.6} outside {} chart",
                x.norm(),
                self.kind.label()
            )))
        }
    }

    /// Conformal exponent w with ḡ = e^{2w}δ.
    pub fn conformal_exponent(&self, x: &V3) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => (2.0 / (1.0 - x.norm_squared())).ln(),
            SpaceKind::Spherical => (2.0 / (1.0 + x.norm_squared())).ln(),
        }
    }

    /// e^{w}: the length scale of the model chart at x.
    pub fn conformal_factor(&self, x: &V3) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => 1.0,
            SpaceKind::Hyperbolic => 2.0 / (1.0 - x.norm_squared()),
            SpaceKind::Spherical => 2.0 / (1.0 + x.norm_squared()),
        }
    }

    /// Euclidean gradient of w.
    pub fn conformal_grad(&self, x: &V3) -> V3 {
        match self.kind {
            SpaceKind::Euclidean => V3::zeros(),
            SpaceKind::Hyperbolic => x * (2.0 / (1.0 - x.norm_squared())),
            SpaceKind::Spherical => x * (-2.0 / (1.0 + x.norm_squared())),
        }
    }

    /// Ambient inner product ḡ(u, v) at x.
    pub fn inner(&self, x: &V3, u: &V3, v: &V3) -> f64 {
        let s = self.conformal_factor(x);
        s * s * u.dot(v)
    }

    /// Ambient norm of v at x.
    pub fn norm(&self, x: &V3, v: &V3) -> f64 {
        self.conformal_factor(x) * v.norm()
    }

    /// Covariant derivative ∇̄_Z Y at x, given the value of Y and its Euclidean
    /// Jacobian dY (columns are ∂Y/∂x_j).
    pub fn covariant_deriv(&self, x: &V3, z: &V3, y: &V3, dy: &M3) -> V3 {
        let dw = self.conformal_grad(x);
        dy * z + z * dw.dot(y) + y * dw.dot(z) - dw * z.dot(y)
    }

    /// Model radius of the geodesic sphere of radius r about the origin.
    pub fn geodesic_to_model_radius(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::argument(format!("geodesic radius {r} must be positive")));
        }
        match self.kind {
            SpaceKind::Euclidean => Ok(r),
            SpaceKind::Hyperbolic => Ok((0.5 * r).tanh()),
            SpaceKind::Spherical => {
                if r >= std::f64::consts::PI {
                    Err(Error::argument(format!(
                        "spherical ball radius {r} must lie in (0, pi)"
                    )))
                } else {
                    Ok((0.5 * r).tan())
                }
            }
        }
    }

    /// Geodesic distance from the origin to x.
    pub fn model_to_geodesic_radius(&self, model_radius: f64) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => model_radius,
            SpaceKind::Hyperbolic => 2.0 * model_radius.atanh(),
            SpaceKind::Spherical => 2.0 * model_radius.atan(),
        }
    }

    /// Radial potential V₀ (cosh r, 1, cos r).
    pub fn v0(&self, x: &V3) -> f64 {
        let q = x.norm_squared();
        match self.kind {
            SpaceKind::Euclidean => 1.0,
            SpaceKind::Hyperbolic => (1.0 + q) / (1.0 - q),
            SpaceKind::Spherical => (1.0 - q) / (1.0 + q),
        }
    }

    /// Directional potential V_a = e^{w}⟨x,a⟩.
    pub fn va(&self, x: &V3, a: &V3) -> f64 {
        self.conformal_factor(x) * x.dot(a)
    }

    /// Translation-type Killing field in direction a.
    pub fn killing(&self, x: &V3, a: &V3) -> V3 {
        match self.kind {
            SpaceKind::Euclidean => *a,
            SpaceKind::Hyperbolic => a * (0.5 * (x.norm_squared() + 1.0)) - x * x.dot(a),
            SpaceKind::Spherical => a * (0.5 * (1.0 - x.norm_squared())) + x * x.dot(a),
        }
    }

    /// Euclidean Jacobian of the translation Killing field (columns ∂Y/∂x_j).
    pub fn killing_jacobian(&self, x: &V3, a: &V3) -> M3 {
        match self.kind {
            SpaceKind::Euclidean => M3::zeros(),
            SpaceKind::Hyperbolic => {
                // Y = ½(|x|²+1)a − ⟨x,a⟩x:  ∂_j Y^k = x_j a_k − a_j x_k − ⟨x,a⟩δ_jk.
                a * x.transpose() - x * a.transpose() - M3::identity() * x.dot(a)
            }
            SpaceKind::Spherical => {
                // Y = ½(1−|x|²)a + ⟨x,a⟩x:  ∂_j Y^k = −x_j a_k + a_j x_k + ⟨x,a⟩δ_jk.
                x * a.transpose() - a * x.transpose() + M3::identity() * x.dot(a)
            }
        }
    }
}

/// A geodesic ball B of radius `radius` centred at the chart origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientBall {
    pub space: AmbientSpace,
    /// Geodesic radius R.
    pub radius: f64,
    /// Radius of the ball in model coordinates.
    pub radius_model: f64,
}

impl AmbientBall {
    pub fn new(kind: SpaceKind, radius: f64) -> Result<Self> {
        let space = AmbientSpace::new(kind);
        let radius_model = space.geodesic_to_model_radius(radius)?;
        Ok(AmbientBall { space, radius, radius_model })
    }

    /// Principal curvature p(R) of ∂B with respect to the outward normal:
    /// 1/R, coth R, cot R.  Negative for spherical balls past the equator.
    pub fn boundary_principal_curvature(&self) -> f64 {
        match self.space.kind {
            SpaceKind::Euclidean => 1.0 / self.radius,
            SpaceKind::Hyperbolic => 1.0 / self.radius.tanh(),
            SpaceKind::Spherical => 1.0 / self.radius.tan(),
        }
    }

    /// Mean curvature (trace of the shape operator) of ∂B: 2 p(R) for surfaces
    /// of dimension 2.
    pub fn boundary_mean_curvature(&self) -> f64 {
        2.0 * self.boundary_principal_curvature()
    }

    /// Outward unit normal field of ∂B in the sense of the radial extension
    /// x/R, x/sinh R, x/sin R; exactly unit on ∂B itself.
    pub fn outward_normal(&self, x: &V3) -> V3 {
        let s = match self.space.kind {
            SpaceKind::Euclidean => self.radius,
            SpaceKind::Hyperbolic => self.radius.sinh(),
            SpaceKind::Spherical => self.radius.sin(),
        };
        x / s
    }

    /// Signed distance of the point from ∂B in model coordinates (negative inside).
    pub fn model_boundary_gap(&self, x: &V3) -> f64 {
        x.norm() - self.radius_model
    }

    pub fn on_boundary(&self, x: &V3, tol: f64) -> bool {
        self.model_boundary_gap(x).abs() <= tol * self.radius_model.max(1.0)
    }

    pub fn contains(&self, x: &V3, tol: f64) -> bool {
        self.model_boundary_gap(x) <= tol * self.radius_model.max(1.0)
    }
}

/// Fields the toolkit evaluates and differentiates on the ambient chart.
#[derive(Debug, Clone, Copy)]
pub enum AmbientField {
    /// The position field x (conformal Killing).
    Position,
    /// Translation-type Killing field for a direction a.
    Killing(V3),
    /// Rotation field ω × x (Killing in all three spaces).
    Rotation(V3),
    /// Radial extension of the outward normal of a geodesic sphere of the
    /// given geodesic radius.
    BallNormal(f64),
}

/// Evaluate an ambient field at a chart point.
pub fn evaluate_field(space: &AmbientSpace, field: &AmbientField, x: &V3) -> Result<V3> {
    space.require_chart(x)?;
    Ok(match field {
        AmbientField::Position => *x,
        AmbientField::Killing(a) => space.killing(x, a),
        AmbientField::Rotation(w) => w.cross(x),
        AmbientField::BallNormal(r) => {
            let ball = AmbientBall::new(space.kind, *r)?;
            ball.outward_normal(x)
        }
    })
}

/// Fourth-order central differences with one Richardson pass, step scaled as
/// h = 1e-5·(1+|x|).  Returns the Euclidean Jacobian (columns ∂F/∂x_j).
pub fn jacobian_fd<F>(f: F, x: &V3) -> M3
where
    F: Fn(&V3) -> V3,
{
    let h0 = 1e-5 * (1.0 + x.norm());
    let d4 = |h: f64| -> M3 {
        let mut j = M3::zeros();
        for col in 0..3 {
            let mut e = V3::zeros();
            e[col] = 1.0;
            let fp1 = f(&(x + e * h));
            let fm1 = f(&(x - e * h));
            let fp2 = f(&(x + e * (2.0 * h)));
            let fm2 = f(&(x - e * (2.0 * h)));
            let d = (fm2 - fp2 + (fp1 - fm1) * 8.0) / (12.0 * h);
            j.set_column(col, &d);
        }
        j
    };
    // Richardson on the fourth-order formula: error h⁴ → (16 D(h/2) − D(h))/15.
    let coarse = d4(h0);
    let fine = d4(0.5 * h0);
    (fine * 16.0 - coarse) / 15.0
}

/// Symmetrised covariant differential of a field in a ḡ-orthonormal frame:
/// entries L_ij = ½(ḡ(∇̄_{e_i} Y, e_j) + ḡ(∇̄_{e_j} Y, e_i)) with e_i = e^{-w}∂_i.
pub fn symmetrized_covariant(space: &AmbientSpace, field: &AmbientField, x: &V3) -> Result<M3> {
    space.require_chart(x)?;
    let y = evaluate_field(space, field, x)?;
    let dy = jacobian_fd(|p| evaluate_field(space, field, p).unwrap_or_else(|_| V3::zeros()), x);
    let mut l = M3::zeros();
    for i in 0..3 {
        let mut ei = V3::zeros();
        ei[i] = 1.0;
        let cov = space.covariant_deriv(x, &ei, &y, &dy);
        for j in 0..3 {
            // e^{2w}⟨∇̄_{∂_i}Y, ∂_j⟩ contracted with the e^{-w} frame factors.
            l[(i, j)] += cov[j];
        }
    }
    let sym = (l + l.transpose()) * 0.5;
    Ok(sym)
}

/// Max-norm of the symmetrised covariant differential; zero exactly for
/// Killing fields.
pub fn killing_residual(space: &AmbientSpace, field: &AmbientField, x: &V3) -> Result<f64> {
    let sym = symmetrized_covariant(space, field, x)?;
    Ok(sym.amax())
}

/// Deviation of the position field from its conformal-Killing law
/// sym ∇̄x = V₀ ḡ, measured in the same orthonormal frame.
pub fn conformal_position_residual(space: &AmbientSpace, x: &V3) -> Result<f64> {
    let sym = symmetrized_covariant(space, &AmbientField::Position, x)?;
    let dev = sym - M3::identity() * space.v0(x);
    Ok(dev.amax())
}

/// Curvature data of the space form evaluated on a direction v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureData {
    /// Sectional curvature κ (constant).
    pub sectional: f64,
    /// Ric(v, v) for the supplied vector: 2κ|v|²_ḡ.
    pub ricci_vv: f64,
    /// Scalar curvature 6κ.
    pub scalar: f64,
}

/// Ricci and scalar curvature in dimension 3; |v|² is taken in the ambient
/// metric at x.
pub fn ambient_curvature(space: &AmbientSpace, x: &V3, v: &V3) -> Result<CurvatureData> {
    space.require_chart(x)?;
    let k = space.kind.curvature();
    let n2 = {
        let s = space.conformal_factor(x);
        s * s * v.norm_squared()
    };
    Ok(CurvatureData { sectional: k, ricci_vv: 2.0 * k * n2, scalar: 6.0 * k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spaces() -> [AmbientSpace; 3] {
        [
            AmbientSpace::new(SpaceKind::Euclidean),
            AmbientSpace::new(SpaceKind::Hyperbolic),
            AmbientSpace::new(SpaceKind::Spherical),
        ]
    }

    // Deterministic low-discrepancy points in the ball of model radius 0.9.
    fn sample_points(n: usize) -> Vec<V3> {
        let mut pts = Vec::with_capacity(n);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        while pts.len() < n {
            let p = V3::new(next() * 1.8 - 0.9, next() * 1.8 - 0.9, next() * 1.8 - 0.9);
            if p.norm() <= 0.9 && p.norm() > 1e-3 {
                pts.push(p);
            }
        }
        pts
    }

    #[test]
    fn model_radius_closed_forms() {
        let hyp = AmbientSpace::new(SpaceKind::Hyperbolic);
        let sph = AmbientSpace::new(SpaceKind::Spherical);
        assert_relative_eq!(hyp.geodesic_to_model_radius(2.0).unwrap(), 1.0f64.tanh(), epsilon = 1e-15);
        assert_relative_eq!(sph.geodesic_to_model_radius(2.0).unwrap(), 1.0f64.tan(), epsilon = 1e-15);
        // Round trips.
        for r in [0.3, 0.5, 1.0, 2.0, 2.5] {
            let m = hyp.geodesic_to_model_radius(r).unwrap();
            assert_relative_eq!(hyp.model_to_geodesic_radius(m), r, epsilon = 1e-13);
            if r < std::f64::consts::PI {
                let m = sph.geodesic_to_model_radius(r).unwrap();
                assert_relative_eq!(sph.model_to_geodesic_radius(m), r, epsilon = 1e-13);
            }
        }
        // Spherical balls past the equator leave the unit model ball.
        assert!(sph.geodesic_to_model_radius(2.5).unwrap() > 1.0);
        assert!(sph.geodesic_to_model_radius(std::f64::consts::PI).is_err());
    }

    #[test]
    fn potentials_match_geodesic_radius() {
        let hyp = AmbientSpace::new(SpaceKind::Hyperbolic);
        let sph = AmbientSpace::new(SpaceKind::Spherical);
        for p in sample_points(50) {
            let r_h = hyp.model_to_geodesic_radius(p.norm());
            assert_relative_eq!(hyp.v0(&p), r_h.cosh(), epsilon = 1e-12, max_relative = 1e-12);
            // sinh r = e^{w}|x|.
            assert_relative_eq!(hyp.conformal_factor(&p) * p.norm(), r_h.sinh(), epsilon = 1e-12, max_relative = 1e-12);
            let r_s = sph.model_to_geodesic_radius(p.norm());
            assert_relative_eq!(sph.v0(&p), r_s.cos(), epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(sph.conformal_factor(&p) * p.norm(), r_s.sin(), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn killing_pairs_with_position_as_potential() {
        // ḡ(Y_a, x) = V_a in every space.
        for space in spaces() {
            for p in sample_points(100) {
                for a in [V3::x(), V3::y(), V3::z(), V3::new(0.3, -1.2, 0.5)] {
                    let y = space.killing(&p, &a);
                    let lhs = space.inner(&p, &y, &p);
                    assert_relative_eq!(lhs, space.va(&p, &a), epsilon = 1e-12, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn killing_fields_have_vanishing_residual() {
        for space in spaces() {
            for p in sample_points(100) {
                for a in [V3::x(), V3::y(), V3::z()] {
                    let r = killing_residual(&space, &AmbientField::Killing(a), &p).unwrap();
                    assert!(r <= 1e-9, "{} residual {r:.3e} at {p:?}", space.kind.label());
                    let rot = killing_residual(&space, &AmbientField::Rotation(a), &p).unwrap();
                    assert!(rot <= 1e-9, "rotation residual {rot:.3e}");
                }
            }
        }
    }

    #[test]
    fn position_field_is_conformal_not_killing() {
        for space in spaces() {
            let p = V3::new(0.31, -0.22, 0.4);
            // Positive control: the position field scales the metric by V₀ ...
            assert!(conformal_position_residual(&space, &p).unwrap() <= 1e-9);
            // ... and therefore fails the Killing test by about V₀ ≥ cos(r) > 0.5.
            assert!(killing_residual(&space, &AmbientField::Position, &p).unwrap() > 0.5);
        }
    }

    #[test]
    fn killing_jacobian_matches_fd() {
        for space in spaces() {
            for p in sample_points(20) {
                let a = V3::new(0.7, 0.2, -0.4);
                let exact = space.killing_jacobian(&p, &a);
                let fd = jacobian_fd(|q| space.killing(q, &a), &p);
                assert!((exact - fd).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn ball_normal_differentiation_recovers_principal_curvature() {
        // h^{∂B}(T,T) = ḡ(∇̄_T N̄, T) = p(R)|T|² for tangents of ∂B.
        let cases = [
            (SpaceKind::Euclidean, 1.0),
            (SpaceKind::Euclidean, 0.7),
            (SpaceKind::Hyperbolic, 0.5),
            (SpaceKind::Hyperbolic, 2.0),
            (SpaceKind::Spherical, 1.0),
            (SpaceKind::Spherical, 2.5),
        ];
        for (kind, radius) in cases {
            let ball = AmbientBall::new(kind, radius).unwrap();
            let space = ball.space;
            let rm = ball.radius_model;
            for (u, v) in [(0.3f64, 1.1f64), (1.2, 2.8), (2.0, 5.3)] {
                let x = V3::new(
                    rm * u.sin() * v.cos(),
                    rm * u.sin() * v.sin(),
                    rm * u.cos(),
                );
                // Any Euclidean tangent of the model sphere is a ḡ-tangent of ∂B.
                let t = {
                    let raw = V3::new(-x.y, x.x, 0.0);
                    if raw.norm() < 1e-8 { V3::x() } else { raw.normalize() }
                };
                let n_val = ball.outward_normal(&x);
                assert_relative_eq!(space.norm(&x, &n_val), 1.0, epsilon = 1e-12);
                let dn = jacobian_fd(|q| ball.outward_normal(q), &x);
                let cov = space.covariant_deriv(&x, &t, &n_val, &dn);
                let h_tt = space.inner(&x, &cov, &t);
                let t2 = space.inner(&x, &t, &t);
                assert_relative_eq!(
                    h_tt / t2,
                    ball.boundary_principal_curvature(),
                    epsilon = 1e-8,
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn curvature_data_values() {
        for space in spaces() {
            let x = V3::new(0.2, 0.1, -0.3);
            let k = space.kind.curvature();
            // Unit vector in ḡ.
            let v = V3::x() / space.conformal_factor(&x);
            let c = ambient_curvature(&space, &x, &v).unwrap();
            assert_relative_eq!(c.ricci_vv, 2.0 * k, epsilon = 1e-12);
            assert_relative_eq!(c.scalar, 6.0 * k, epsilon = 1e-12);
        }
    }

    #[test]
    fn chart_guards() {
        let hyp = AmbientSpace::new(SpaceKind::Hyperbolic);
        assert!(evaluate_field(&hyp, &AmbientField::Position, &V3::new(1.2, 0.0, 0.0)).is_err());
        let sph = AmbientSpace::new(SpaceKind::Spherical);
        assert!(evaluate_field(&sph, &AmbientField::Position, &V3::new(2e6, 0.0, 0.0)).is_err());
        assert!(evaluate_field(&sph, &AmbientField::Position, &V3::new(1.5, 0.0, 0.0)).is_ok());
    }
}
