//! Pointwise verification of the exact identities satisfied by the analytic
//! stationary families, plus an independent finite-difference audit of the
//! second variation of area.
//!
//! Everything here works on the smooth chart, not the mesh: derivatives come
//! from high-order finite differences of exact chart jets, integrals from
//! tensor-product quadrature in parameter space.  The numbers produced are
//! the ground truth that the finite-element pipeline in [`crate::discretize`]
//! and [`crate::spectrum`] is tested against.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::spaceform::{AmbientBall, AmbientSpace, SpaceKind, V3};
use crate::surface::{boundary_frame_at, geom_jet, DomainKind, GeomJet, Immersion, Patch};

/// A scalar field expressed in chart coordinates.
pub type ChartField = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Scale of the radial support function on the wall: the geodesic-polar
/// distance factor sc(R) with ball radius R (R, sinh R, sin R).
pub fn radial_scale(ball: &AmbientBall) -> f64 {
    match ball.space.kind {
        SpaceKind::Euclidean => ball.radius,
        SpaceKind::Hyperbolic => ball.radius.sinh(),
        SpaceKind::Spherical => ball.radius.sin(),
    }
}

fn require_patch(imm: &Immersion) -> Result<&Patch> {
    imm.patch
        .as_ref()
        .ok_or_else(|| Error::argument("smooth verification requires a chart-backed surface"))
}

/// Contact angle of a chart-backed stationary surface, read off the frame.
pub fn contact_angle(imm: &Immersion) -> Result<f64> {
    let patch = require_patch(imm)?;
    Ok(boundary_frame_at(&imm.ambient, patch, 0, 0.0)?.contact_angle)
}

// ---------------------------------------------------------------------------
// Chart calculus: exact metric data + high-order finite differences.
// ---------------------------------------------------------------------------

/// Finite-difference calculus on an analytic chart.  The metric and its
/// first derivatives are exact (from the second-order chart jet and the
/// conformal factor); only derivatives of the scalar field under test are
/// approximated, with fourth-order stencils.
pub struct ChartOps {
    space: AmbientSpace,
    patch: Patch,
    /// Parameter-space step for scalar stencils.
    pub step: f64,
}

/// Value, gradient and Hessian of a scalar from a 5×5 chart stencil.
struct ScalarJet2 {
    fu: f64,
    fv: f64,
    fuu: f64,
    fuv: f64,
    fvv: f64,
}

impl ChartOps {
    pub fn new(imm: &Immersion) -> Result<ChartOps> {
        let patch = require_patch(imm)?;
        Ok(ChartOps { space: *imm.space(), patch: *patch, step: 2e-3 })
    }

    fn jet(&self, u: f64, v: f64) -> Result<GeomJet> {
        geom_jet(&self.space, &self.patch.jet2(u, v))
    }

    /// Christoffel symbols Γ^c_{ab} of the induced metric, exact through the
    /// chart jet: ∂_a g_bd = e^{2w}[2(dw·x_a)⟨x_b,x_d⟩ + ⟨x_ab,x_d⟩ + ⟨x_b,x_ad⟩].
    fn christoffel(&self, u: f64, v: f64) -> Result<[[[f64; 2]; 2]; 2]> {
        let jet = self.patch.jet2(u, v);
        let geo = geom_jet(&self.space, &jet)?;
        let dw = self.space.conformal_grad(&jet.x);
        let xa = [jet.xu, jet.xv];
        let xab = [[jet.xuu, jet.xuv], [jet.xuv, jet.xvv]];
        let e2 = geo.conformal * geo.conformal;
        let mut dg = [[[0.0f64; 2]; 2]; 2]; // dg[a][b][d] = ∂_a g_{bd}
        for a in 0..2 {
            for b in 0..2 {
                for d in 0..2 {
                    dg[a][b][d] = e2
                        * (2.0 * dw.dot(&xa[a]) * xa[b].dot(&xa[d])
                            + xab[a][b].dot(&xa[d])
                            + xa[b].dot(&xab[a][d]));
                }
            }
        }
        let det = geo.det_metric;
        let m = geo.metric;
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let mut gamma = [[[0.0f64; 2]; 2]; 2];
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let mut s = 0.0;
                    for d in 0..2 {
                        s += inv[c][d] * (dg[a][b][d] + dg[b][a][d] - dg[d][a][b]);
                    }
                    gamma[c][a][b] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }

    fn scalar_jet2(&self, f: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) -> ScalarJet2 {
        let h = self.step;
        let mut s = [[0.0f64; 5]; 5];
        for (i, si) in s.iter_mut().enumerate() {
            for (j, sij) in si.iter_mut().enumerate() {
                *sij = f(u + (i as f64 - 2.0) * h, v + (j as f64 - 2.0) * h);
            }
        }
        let c1 = [1.0, -8.0, 0.0, 8.0, -1.0];
        let fu = (0..5).map(|i| c1[i] * s[i][2]).sum::<f64>() / (12.0 * h);
        let fv = (0..5).map(|j| c1[j] * s[2][j]).sum::<f64>() / (12.0 * h);
        let c2 = [-1.0, 16.0, -30.0, 16.0, -1.0];
        let fuu = (0..5).map(|i| c2[i] * s[i][2]).sum::<f64>() / (12.0 * h * h);
        let fvv = (0..5).map(|j| c2[j] * s[2][j]).sum::<f64>() / (12.0 * h * h);
        let mut fuv = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                fuv += c1[i] * c1[j] * s[i][j];
            }
        }
        fuv /= 144.0 * h * h;
        ScalarJet2 { fu, fv, fuu, fuv, fvv }
    }

    /// Laplace–Beltrami Δf = g^{ab}(∂²_{ab}f − Γ^c_{ab} ∂_c f).
    pub fn laplacian(&self, f: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) -> Result<f64> {
        let geo = self.jet(u, v)?;
        let gamma = self.christoffel(u, v)?;
        let sj = self.scalar_jet2(f, u, v);
        let det = geo.det_metric;
        let m = geo.metric;
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let hess = [[sj.fuu, sj.fuv], [sj.fuv, sj.fvv]];
        let grad = [sj.fu, sj.fv];
        let mut lap = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let mut corr = 0.0;
                for c in 0..2 {
                    corr += gamma[c][a][b] * grad[c];
                }
                lap += inv[a][b] * (hess[a][b] - corr);
            }
        }
        Ok(lap)
    }

    /// Chart gradient (∂_u f, ∂_v f), fourth-order central.
    pub fn chart_gradient(&self, f: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) -> [f64; 2] {
        let h = self.step;
        let c1 = [1.0, -8.0, 8.0, -1.0];
        let off = [-2.0, -1.0, 1.0, 2.0];
        let mut fu = 0.0;
        let mut fv = 0.0;
        for k in 0..4 {
            fu += c1[k] * f(u + off[k] * h, v);
            fv += c1[k] * f(u, v + off[k] * h);
        }
        [fu / (12.0 * h), fv / (12.0 * h)]
    }

    /// ⟨∇f, ∇g⟩ with the exact inverse metric.
    pub fn gradient_inner(
        &self,
        f: &dyn Fn(f64, f64) -> f64,
        g: &dyn Fn(f64, f64) -> f64,
        u: f64,
        v: f64,
    ) -> Result<f64> {
        let geo = self.jet(u, v)?;
        let det = geo.det_metric;
        let m = geo.metric;
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let df = self.chart_gradient(f, u, v);
        let dg = self.chart_gradient(g, u, v);
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                s += inv[a][b] * df[a] * dg[b];
            }
        }
        Ok(s)
    }

    /// Outward conormal derivative ∇_μ f at boundary parameter τ of
    /// component `comp`, via a one-sided five-point stencil along the inward
    /// chart direction.
    pub fn conormal_derivative(
        &self,
        ball: &AmbientBall,
        f: &dyn Fn(f64, f64) -> f64,
        comp: usize,
        tau: f64,
    ) -> Result<f64> {
        let fs = boundary_frame_at(ball, &self.patch, comp, tau)?;
        let bp = self.patch.boundary_param(comp, tau);
        let geo = self.jet(bp.p[0], bp.p[1])?;
        // chart components of μ: g_{ab} c^b = ḡ(μ, x_a)
        let e2 = geo.conformal * geo.conformal;
        let rhs = [e2 * fs.conormal.dot(&geo.xu), e2 * fs.conormal.dot(&geo.xv)];
        let det = geo.det_metric;
        let m = geo.metric;
        let cu = (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / det;
        let cv = (-m[1][0] * rhs[0] + m[0][0] * rhs[1]) / det;
        let cn = (cu * cu + cv * cv).sqrt();
        if cn < 1e-14 {
            return Err(Error::geometry("conormal has no chart component"));
        }
        let (du, dv) = (cu / cn, cv / cn);
        let h = self.step;
        // Backward one-sided stencil: samples march inward (against μ).
        let mut vals = [0.0f64; 5];
        for (k, val) in vals.iter_mut().enumerate() {
            let s = k as f64 * h;
            *val = f(bp.p[0] - s * du, bp.p[1] - s * dv);
        }
        let dirderiv =
            (25.0 * vals[0] - 48.0 * vals[1] + 36.0 * vals[2] - 16.0 * vals[3] + 3.0 * vals[4])
                / (12.0 * h);
        Ok(cn * dirderiv)
    }
}

// ---------------------------------------------------------------------------
// Field builders.
// ---------------------------------------------------------------------------

/// Normal component ḡ(Y_a, ν) of the translation-type ambient Killing field.
pub fn killing_normal_field(imm: &Immersion, axis: usize) -> Result<ChartField> {
    let patch = *require_patch(imm)?;
    let space = *imm.space();
    let a = axis_vector(axis);
    Ok(Box::new(move |u, v| {
        let geo = geom_jet(&space, &patch.jet2(u, v)).expect("chart degenerates");
        let y = space.killing(&geo.x, &a);
        geo.conformal * y.dot(&geo.nhat)
    }))
}

/// Restriction of the wall potential V_a to the surface.
pub fn potential_field(imm: &Immersion, axis: usize) -> Result<ChartField> {
    let patch = *require_patch(imm)?;
    let space = *imm.space();
    let a = axis_vector(axis);
    Ok(Box::new(move |u, v| {
        let x = patch.position(u, v);
        space.va(&x, &a)
    }))
}

/// The admissible test function attached to the axis direction `a`:
/// φ_a = V_a / (sin θ · sc(R)) + cot θ · ḡ(Y_a, ν).
pub fn test_function_field(imm: &Immersion, axis: usize) -> Result<ChartField> {
    let patch = *require_patch(imm)?;
    let ball = imm.ambient;
    let theta = contact_angle(imm)?;
    if matches!(ball.space.kind, SpaceKind::Euclidean) && (ball.radius - 1.0).abs() > 1e-12 {
        return Err(Error::argument("flat test functions are normalised for the unit ball"));
    }
    let a = axis_vector(axis);
    let coef_v = 1.0 / (theta.sin() * radial_scale(&ball));
    let coef_n = theta.cos() / theta.sin();
    Ok(Box::new(move |u, v| {
        let geo = geom_jet(&ball.space, &patch.jet2(u, v)).expect("chart degenerates");
        let y = ball.space.killing(&geo.x, &a);
        let va = ball.space.va(&geo.x, &a);
        coef_v * va + coef_n * geo.conformal * y.dot(&geo.nhat)
    }))
}

/// Normal component ḡ(X, ν) of the radial position field.
pub fn position_normal_field(imm: &Immersion) -> Result<ChartField> {
    let patch = *require_patch(imm)?;
    let space = *imm.space();
    Ok(Box::new(move |u, v| {
        let geo = geom_jet(&space, &patch.jet2(u, v)).expect("chart degenerates");
        geo.conformal * geo.x.dot(&geo.nhat)
    }))
}

/// The support-type function that vanishes on the wall:
/// ḡ(X, ν) + cos θ · sc(R), up to overall sign.
pub fn wall_support_field(imm: &Immersion) -> Result<ChartField> {
    let pn = position_normal_field(imm)?;
    let shift = contact_angle(imm)?.cos() * radial_scale(&imm.ambient);
    Ok(Box::new(move |u, v| pn(u, v) + shift))
}

fn axis_vector(axis: usize) -> V3 {
    let mut a = V3::zeros();
    a[axis.min(2)] = 1.0;
    a
}

// ---------------------------------------------------------------------------
// Smooth quadrature.
// ---------------------------------------------------------------------------

/// ∫_M f dA by tensor-product quadrature in the chart.
pub fn integrate_area(imm: &Immersion, f: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    let patch = require_patch(imm)?;
    let space = imm.space();
    let density = |u: f64, v: f64| -> Result<f64> {
        Ok(geom_jet(space, &patch.jet2(u, v))?.det_metric.sqrt())
    };
    let (xs, ws) = gauss_legendre(64);
    let n_ang = 128usize;
    let mut total = 0.0;
    match patch.domain() {
        DomainKind::UnitDisk => {
            for (xi, wi) in xs.iter().zip(&ws) {
                let rho = 0.5 * (xi + 1.0);
                let wr = 0.5 * wi;
                for j in 0..n_ang {
                    let ang = 2.0 * PI * j as f64 / n_ang as f64;
                    let (u, v) = (rho * ang.cos(), rho * ang.sin());
                    total += wr * (2.0 * PI / n_ang as f64)
                        * rho
                        * density(u, v)?
                        * f(u, v);
                }
            }
        }
        DomainKind::PeriodicStrip { t_min, t_max } => {
            for (xi, wi) in xs.iter().zip(&ws) {
                let t = 0.5 * (t_max + t_min) + 0.5 * (t_max - t_min) * xi;
                let wt = 0.5 * (t_max - t_min) * wi;
                for j in 0..n_ang {
                    let ang = 2.0 * PI * j as f64 / n_ang as f64;
                    total += wt * (2.0 * PI / n_ang as f64) * density(t, ang)? * f(t, ang);
                }
            }
        }
    }
    Ok(total)
}

/// ∮_{∂M} f ds over all boundary components (f in chart coordinates).
pub fn integrate_boundary(imm: &Immersion, f: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    let patch = require_patch(imm)?;
    let n = 256usize;
    let mut total = 0.0;
    for comp in 0..patch.boundary_components() {
        for j in 0..n {
            let tau = 2.0 * PI * j as f64 / n as f64;
            let fs = boundary_frame_at(&imm.ambient, patch, comp, tau)?;
            let bp = patch.boundary_param(comp, tau);
            total += (2.0 * PI / n as f64) * fs.speed * f(bp.p[0], bp.p[1]);
        }
    }
    Ok(total)
}

/// The stability form Q(f, g) evaluated by smooth quadrature:
/// ∫ ⟨∇f,∇g⟩ − (|h|² + Ric(ν,ν)) f g dA − ∮ q f g ds.
pub fn quadratic_form_smooth(
    imm: &Immersion,
    f: &dyn Fn(f64, f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    let patch = require_patch(imm)?;
    let ops = ChartOps::new(imm)?;
    let space = imm.space();
    let err = std::cell::RefCell::new(None);
    let area_part = integrate_area(imm, &|u, v| {
        let geo = match geom_jet(space, &patch.jet2(u, v)) {
            Ok(j) => j,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                return 0.0;
            }
        };
        let grads = match ops.gradient_inner(f, g, u, v) {
            Ok(x) => x,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                return 0.0;
            }
        };
        grads - geo.jacobi_potential * f(u, v) * g(u, v)
    })?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let n = 256usize;
    let mut boundary_part = 0.0;
    for comp in 0..patch.boundary_components() {
        for j in 0..n {
            let tau = 2.0 * PI * j as f64 / n as f64;
            let fs = boundary_frame_at(&imm.ambient, patch, comp, tau)?;
            let bp = patch.boundary_param(comp, tau);
            boundary_part += (2.0 * PI / n as f64)
                * fs.speed
                * fs.robin_coefficient
                * f(bp.p[0], bp.p[1])
                * g(bp.p[0], bp.p[1]);
        }
    }
    Ok(area_part - boundary_part)
}

/// Sample a chart field at the mesh vertices (for feeding smooth fields to
/// the finite-element form).
pub fn chart_vertex_values(imm: &Immersion, f: &dyn Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    let params = imm
        .mesh
        .params
        .as_ref()
        .ok_or_else(|| Error::argument("mesh carries no chart parameters"))?;
    Ok(params.iter().map(|p| f(p[0], p[1])).collect())
}

// ---------------------------------------------------------------------------
// Identity report.
// ---------------------------------------------------------------------------

/// Worst-case residuals of the exact stationary-surface identities, one
/// surface per report.  All entries are absolute sup-norms over dense sample
/// sets; `worst` collapses every residual column.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub family: String,
    pub space: String,
    pub contact_angle: f64,
    pub directions: Vec<String>,
    /// |∮ φ_a ds| — admissibility of the test functions.
    pub admissibility: f64,
    /// sup |φ_a − ḡ(Y_a, μ)| on ∂M.
    pub boundary_value: f64,
    /// sup |∇_μ φ_a − q φ_a| on ∂M.
    pub boundary_robin: f64,
    /// sup |Δφ_a + (|h|² + Ric(ν,ν)) φ_a − |h|² V_a/(sin θ sc(R))| in M.
    pub interior_jacobi: f64,
    /// sup |Δ ḡ(Y_a,ν) + (|h|² + Ric(ν,ν)) ḡ(Y_a,ν)| — Killing normal
    /// components solve the Jacobi equation.
    pub killing_normal_jacobi: f64,
    /// sup |Δ V_a − (n κ-sign) V_a| — wall potentials are eigenfunctions.
    pub potential_laplacian: f64,
    /// sup |ḡ(X,ν) + cos θ sc(R)| on ∂M — the support function vanishes.
    pub support_boundary: f64,
    /// sup |Δ ḡ(X,ν) + |h|² ḡ(X,ν)| in M.
    pub support_laplacian: f64,
    /// sup |κ_g − (cos θ κ̄_g + sin θ p(R))| on ∂M.
    pub frame_identity: f64,
    /// Q(φ_a, φ_a) by smooth quadrature, one entry per direction.
    pub q_values: Vec<f64>,
    /// max_a |Q(φ_a,φ_a) + ∫ |h|² φ_a V_a/(sin θ sc(R)) dA| — the closed-form
    /// value of the stability form on the test functions.
    pub q_identity_gap: f64,
    pub worst: f64,
}

fn interior_samples(patch: &Patch) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    match patch.domain() {
        DomainKind::UnitDisk => {
            pts.push((0.0, 0.0));
            for i in 1..=10 {
                let rho = 0.09 * i as f64;
                for j in 0..16 {
                    let ang = 2.0 * PI * (j as f64 + 0.3) / 16.0;
                    pts.push((rho * ang.cos(), rho * ang.sin()));
                }
            }
        }
        DomainKind::PeriodicStrip { t_min, t_max } => {
            let mid = 0.5 * (t_min + t_max);
            let half = 0.5 * (t_max - t_min);
            for i in 0..13 {
                let t = mid + half * 0.9 * (i as f64 / 6.0 - 1.0);
                for j in 0..16 {
                    let ang = 2.0 * PI * (j as f64 + 0.3) / 16.0;
                    pts.push((t, ang));
                }
            }
        }
    }
    pts
}

/// Verify every pointwise identity for one chart-backed stationary surface.
pub fn verify_identities(imm: &Immersion) -> Result<IdentityReport> {
    let patch = require_patch(imm)?;
    let ball = &imm.ambient;
    let space = imm.space();
    let kappa = space.kind.curvature();
    let ops = ChartOps::new(imm)?;
    let theta = contact_angle(imm)?;
    let sc = radial_scale(ball);
    let s_fac = 1.0 / (theta.sin() * sc);

    let axes: Vec<usize> = match patch {
        Patch::Catenoid { .. } => vec![0, 1, 2],
        _ => vec![0, 1],
    };
    let phis: Vec<ChartField> =
        axes.iter().map(|&a| test_function_field(imm, a)).collect::<Result<_>>()?;
    let knorms: Vec<ChartField> =
        axes.iter().map(|&a| killing_normal_field(imm, a)).collect::<Result<_>>()?;
    let pots: Vec<ChartField> =
        axes.iter().map(|&a| potential_field(imm, a)).collect::<Result<_>>()?;
    let pos_normal = position_normal_field(imm)?;
    let support = wall_support_field(imm)?;

    let mut admissibility = 0.0f64;
    let mut q_values = Vec::new();
    let mut q_identity_gap = 0.0f64;
    for (phi, pot) in phis.iter().zip(&pots) {
        let mean: f64 = integrate_boundary(imm, &|u, v| phi(u, v))?;
        admissibility = admissibility.max(mean.abs());
        let q = quadratic_form_smooth(imm, &**phi, &**phi)?;
        let closed = -s_fac
            * integrate_area(imm, &|u, v| {
                let geo = geom_jet(space, &patch.jet2(u, v)).expect("chart degenerates");
                geo.h_norm2 * phi(u, v) * pot(u, v)
            })?;
        q_identity_gap = q_identity_gap.max((q - closed).abs());
        q_values.push(q);
    }

    // Boundary residuals.
    let mut boundary_value = 0.0f64;
    let mut boundary_robin = 0.0f64;
    let mut support_boundary = 0.0f64;
    let mut frame_identity = 0.0f64;
    let p_wall = ball.boundary_principal_curvature();
    for comp in 0..patch.boundary_components() {
        for j in 0..48 {
            let tau = 2.0 * PI * j as f64 / 48.0;
            let fs = boundary_frame_at(ball, patch, comp, tau)?;
            let bp = patch.boundary_param(comp, tau);
            let e2 = {
                let ew = space.conformal_factor(&fs.point);
                ew * ew
            };
            for (k, phi) in phis.iter().enumerate() {
                let a = axis_vector(axes[k]);
                let y = space.killing(&fs.point, &a);
                let target = e2 * y.dot(&fs.conormal);
                boundary_value = boundary_value.max((phi(bp.p[0], bp.p[1]) - target).abs());
                let dn = ops.conormal_derivative(ball, &**phi, comp, tau)?;
                boundary_robin = boundary_robin
                    .max((dn - fs.robin_coefficient * phi(bp.p[0], bp.p[1])).abs());
            }
            support_boundary = support_boundary.max(support(bp.p[0], bp.p[1]).abs());
            frame_identity = frame_identity.max(
                (fs.geodesic_curvature
                    - (theta.cos() * fs.wall_geodesic_curvature + theta.sin() * p_wall))
                    .abs(),
            );
        }
    }

    // Interior residuals.
    let mut interior_jacobi = 0.0f64;
    let mut killing_normal_jacobi = 0.0f64;
    let mut potential_laplacian = 0.0f64;
    let mut support_laplacian = 0.0f64;
    // ΔV_a = ∓ n V_a with the sign of the ambient curvature (n = 2);
    // flat charts have harmonic coordinates.
    let pot_coef = -2.0 * kappa;
    for &(u, v) in &interior_samples(patch) {
        let geo = ops.jet(u, v)?;
        let jac_pot = geo.jacobi_potential;
        for (k, phi) in phis.iter().enumerate() {
            let lap = ops.laplacian(&**phi, u, v)?;
            let res = lap + jac_pot * phi(u, v) - s_fac * geo.h_norm2 * pots[k](u, v);
            interior_jacobi = interior_jacobi.max(res.abs());

            let lapn = ops.laplacian(&*knorms[k], u, v)?;
            killing_normal_jacobi =
                killing_normal_jacobi.max((lapn + jac_pot * knorms[k](u, v)).abs());

            let lapv = ops.laplacian(&*pots[k], u, v)?;
            potential_laplacian =
                potential_laplacian.max((lapv - pot_coef * pots[k](u, v)).abs());
        }
        let laps = ops.laplacian(&pos_normal, u, v)?;
        support_laplacian =
            support_laplacian.max((laps + geo.h_norm2 * pos_normal(u, v)).abs());
    }

    let worst = [
        admissibility,
        boundary_value,
        boundary_robin,
        interior_jacobi,
        killing_normal_jacobi,
        potential_laplacian,
        support_boundary,
        support_laplacian,
        frame_identity,
        q_identity_gap,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    Ok(IdentityReport {
        family: imm.family.as_ref().map(|f| f.label()).unwrap_or_else(|| "custom".into()),
        space: space.kind.label().to_string(),
        contact_angle: theta,
        directions: axes.iter().map(|a| format!("e{}", a + 1)).collect(),
        admissibility,
        boundary_value,
        boundary_robin,
        interior_jacobi,
        killing_normal_jacobi,
        potential_laplacian,
        support_boundary,
        support_laplacian,
        frame_identity,
        q_values,
        q_identity_gap,
        worst,
    })
}

// ---------------------------------------------------------------------------
// Second variation by finite differences.
// ---------------------------------------------------------------------------

/// Knobs for the finite-difference second-variation audit.
#[derive(Debug, Clone)]
pub struct VariationOptions {
    /// Time steps of the central stencil, largest first.
    pub time_steps: [f64; 3],
    /// Angular quadrature nodes (periodic trapezoid).
    pub angular_nodes: usize,
    /// Simpson intervals per radial panel (the collar edge is a panel break).
    pub radial_panels: usize,
    /// Width of the boundary collar in normalised chart radius.
    pub collar: f64,
    /// Parameter step for the surface-tangent stencils.
    pub tangent_step: f64,
    /// Boundary grid density for the wall sweep.
    pub boundary_nodes: usize,
}

impl Default for VariationOptions {
    fn default() -> Self {
        VariationOptions {
            time_steps: [0.04, 0.02, 0.01],
            angular_nodes: 160,
            radial_panels: 48,
            collar: 0.2,
            tangent_step: 1e-4,
            boundary_nodes: 512,
        }
    }
}

/// One finite-difference second-variation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SecondVariationCase {
    pub label: String,
    /// Q(φ, φ) by smooth quadrature — the value the experiment must hit.
    pub q_smooth: f64,
    /// (Δt, central second difference of area) pairs, largest step first.
    pub fd_estimates: Vec<[f64; 2]>,
    /// Richardson extrapolation of the two finest estimates.
    pub fd_value: f64,
    /// Observed convergence order of the stencil sequence.
    pub observed_order: f64,
    /// max_t |wetted area(t) − wetted area(0)| over the stencil.
    pub wetting_drift: f64,
    /// ∮ φ ds — admissibility defect of the input.
    pub boundary_mean: f64,
    pub abs_error: f64,
}

/// Smoothstep collar profile: 0 below the collar, 1 at the wall, C² across.
fn collar_profile(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        // Quintic continuation above s = 1 keeps the profile analytic where
        // tangent stencils overshoot the chart edge.
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

struct SweepComponent {
    x: Vec<V3>,
    z: Vec<V3>,
    dx: Vec<V3>,
    dz: Vec<V3>,
    phi: Vec<f64>,
    sigma0: Vec<f64>,
    orient: f64,
}

struct Satellite {
    x: V3,
    z: V3,
    phi: f64,
    chi: f64,
    /// ⟨x̂, Z⟩ — radial rate of the transport (collar points only).
    lin: f64,
    xnorm: f64,
    beta: f64,
    comp: usize,
    phi_bd: f64,
}

struct AreaNode {
    weight: f64,
    /// 0 = centre, 1–4 radial offsets (−2δ,−δ,+δ,+2δ), 5–8 angular offsets.
    sats: Vec<Satellite>,
}

struct VariationEngine {
    ball: AmbientBall,
    rho_b: f64,
    sweeps: Vec<SweepComponent>,
    nodes: Vec<AreaNode>,
    n_beta: usize,
    tangent_step: f64,
}

fn simpson_weights(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + i as f64 * h, w * h / 3.0)
        })
        .collect()
}

impl VariationEngine {
    fn new(imm: &Immersion, phi: &dyn Fn(f64, f64) -> f64, opts: &VariationOptions) -> Result<Self> {
        let patch = require_patch(imm)?;
        let ball = imm.ambient;
        let space = &ball.space;
        let theta = contact_angle(imm)?;
        if theta.sin().abs() < 1e-14 {
            return Err(Error::geometry("contact angle degenerates"));
        }
        let cot = theta.cos() / theta.sin();
        let rho_b = ball.radius_model;
        let n_beta = opts.boundary_nodes;

        // Boundary sweep data per component.
        let mut sweeps = Vec::new();
        for comp in 0..patch.boundary_components() {
            let mut x = Vec::with_capacity(n_beta);
            let mut z = Vec::with_capacity(n_beta);
            let mut phi_b = Vec::with_capacity(n_beta);
            for j in 0..n_beta {
                let beta = 2.0 * PI * j as f64 / n_beta as f64;
                let fs = boundary_frame_at(&ball, patch, comp, beta)?;
                x.push(fs.point);
                z.push(fs.nu + fs.conormal * cot);
                let bp = patch.boundary_param(comp, beta);
                phi_b.push(phi(bp.p[0], bp.p[1]));
            }
            // Periodic fourth-order differences for the β-derivatives.
            let diff = |vals: &[V3]| -> Vec<V3> {
                let h = 2.0 * PI / n_beta as f64;
                (0..n_beta)
                    .map(|j| {
                        let g = |k: i64| vals[((j as i64 + k).rem_euclid(n_beta as i64)) as usize];
                        (g(-2) - g(2) + (g(1) - g(-1)) * 8.0) / (12.0 * h)
                    })
                    .collect()
            };
            let dx = diff(&x);
            let dz = diff(&z);
            // Orientation: the sweep density at s = 0 must equal the exact
            // contact-line rate (ds/dβ)/sin θ.
            let mut orient = 0.0f64;
            let mut sigma0 = vec![0.0; n_beta];
            for j in 0..n_beta {
                let ew = space.conformal_factor(&x[j]);
                let nhat = x[j] / x[j].norm();
                let raw = ew * ew * nhat.dot(&z[j].cross(&dx[j]));
                let target = ew * dx[j].norm() / theta.sin();
                if j == 0 {
                    orient = if raw >= 0.0 { 1.0 } else { -1.0 };
                }
                let s0 = orient * raw;
                if (s0 - target).abs() > 1e-6 * (1.0 + target.abs()) {
                    return Err(Error::numerical(format!(
                        "wall sweep density disagrees with the contact frame: {s0} vs {target}"
                    )));
                }
                sigma0[j] = s0;
            }
            sweeps.push(SweepComponent { x, z, dx, dz, phi: phi_b, sigma0, orient });
        }

        // Area quadrature nodes with tangent clusters.
        let collar_start = 1.0 - opts.collar;
        let delta = opts.tangent_step;
        let mut nodes = Vec::new();
        let domain = patch.domain();
        let (lines, angulars): (Vec<(f64, f64)>, usize) = match domain {
            DomainKind::UnitDisk => {
                let mut l = simpson_weights(opts.radial_panels, 0.0, collar_start);
                l.extend(simpson_weights(opts.radial_panels, collar_start, 1.0));
                (l, opts.angular_nodes)
            }
            DomainKind::PeriodicStrip { t_min, t_max } => {
                // Collar panels at both strip ends, normalised by |t|.
                let inner_lo = collar_start * t_min;
                let inner_hi = collar_start * t_max;
                let outer = (opts.radial_panels / 2).max(8);
                let mut l = simpson_weights(outer, t_min, inner_lo);
                l.extend(simpson_weights(2 * opts.radial_panels, inner_lo, inner_hi));
                l.extend(simpson_weights(outer, inner_hi, t_max));
                (l, opts.angular_nodes)
            }
        };
        let use_collar_transport = cot.abs() > 1e-13;
        for &(line, wline) in &lines {
            for j in 0..angulars {
                let ang = 2.0 * PI * j as f64 / angulars as f64;
                let w = wline * 2.0 * PI / angulars as f64;
                let mut sats = Vec::with_capacity(9);
                let offsets: [(f64, f64); 9] = [
                    (0.0, 0.0),
                    (-2.0 * delta, 0.0),
                    (-delta, 0.0),
                    (delta, 0.0),
                    (2.0 * delta, 0.0),
                    (0.0, -2.0 * delta),
                    (0.0, -delta),
                    (0.0, delta),
                    (0.0, 2.0 * delta),
                ];
                for (dl, da) in offsets {
                    let (ll, aa) = (line + dl, ang + da);
                    let (u, v, rho_norm, beta, comp) = match domain {
                        DomainKind::UnitDisk => {
                            (ll * aa.cos(), ll * aa.sin(), ll.abs(), aa, 0usize)
                        }
                        DomainKind::PeriodicStrip { t_min, t_max } => {
                            let comp = if (ll - t_max).abs() <= (ll - t_min).abs() { 0 } else { 1 };
                            let half = if comp == 0 { t_max } else { t_min };
                            (ll, aa, (ll / half).max(0.0), aa, comp)
                        }
                    };
                    let geo = geom_jet(space, &patch.jet2(u, v))?;
                    let chi = collar_profile((rho_norm - collar_start) / opts.collar);
                    let z = if use_collar_transport && chi > 0.0 {
                        let er = match domain {
                            DomainKind::UnitDisk => geo.xu * aa.cos() + geo.xv * aa.sin(),
                            DomainKind::PeriodicStrip { .. } => {
                                geo.xu * if comp == 0 { 1.0 } else { -1.0 }
                            }
                        };
                        let mu_ext = er / (geo.conformal * er.norm());
                        geo.nu + mu_ext * (chi * cot)
                    } else {
                        geo.nu
                    };
                    let xnorm = geo.x.norm();
                    let lin = if chi > 0.0 {
                        if xnorm < 1e-9 {
                            return Err(Error::geometry(
                                "collar passes through the chart origin",
                            ));
                        }
                        geo.x.dot(&z) / xnorm
                    } else {
                        0.0
                    };
                    let phi_bd = if chi > 0.0 {
                        let bp = patch.boundary_param(comp, beta);
                        phi(bp.p[0], bp.p[1])
                    } else {
                        0.0
                    };
                    sats.push(Satellite {
                        x: geo.x,
                        z,
                        phi: phi(u, v),
                        chi,
                        lin,
                        xnorm,
                        beta,
                        comp,
                        phi_bd,
                    });
                }
                nodes.push(AreaNode { weight: w, sats });
            }
        }
        Ok(VariationEngine { ball, rho_b, sweeps, nodes, n_beta, tangent_step: delta })
    }

    /// Signed sweep density σ(s, β_j) of component `comp`.
    fn sigma(&self, comp: usize, j: usize, s: f64) -> f64 {
        let sw = &self.sweeps[comp];
        let y = sw.x[j] + sw.z[j] * s;
        let yn = y.norm();
        let nhat = y / yn;
        let proj = |vec: V3| (vec - nhat * nhat.dot(&vec)) * (self.rho_b / yn);
        let dys = proj(sw.z[j]);
        let dyb = proj(sw.dx[j] + sw.dz[j] * s);
        let point = nhat * self.rho_b;
        let ew = self.ball.space.conformal_factor(&point);
        sw.orient * ew * ew * nhat.dot(&dys.cross(&dyb))
    }

    /// Integrate the wall-sliding reparametrisation u̇ = φ σ₀ / σ(u) with RK4,
    /// recording u at the requested times (all of one sign, ascending in |t|).
    fn sweep_profiles(&self, times: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let mut out = vec![Vec::new(); times.len()];
        let n_steps_unit = 640.0;
        for (ti, &t_target) in times.iter().enumerate() {
            let mut profiles = Vec::new();
            for (comp, sw) in self.sweeps.iter().enumerate() {
                let n = (n_steps_unit * t_target.abs()).ceil().max(8.0) as usize;
                let dt = t_target / n as f64;
                let mut u = vec![0.0f64; self.n_beta];
                for _ in 0..n {
                    for j in 0..self.n_beta {
                        let f = |uu: f64| sw.phi[j] * sw.sigma0[j] / self.sigma(comp, j, uu);
                        let k1 = f(u[j]);
                        let k2 = f(u[j] + 0.5 * dt * k1);
                        let k3 = f(u[j] + 0.5 * dt * k2);
                        let k4 = f(u[j] + dt * k3);
                        u[j] += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    }
                }
                profiles.push(u);
            }
            out[ti] = profiles;
        }
        out
    }

    /// Net wetted-area change of a sweep profile.
    fn wetted_change(&self, profiles: &[Vec<f64>]) -> f64 {
        let (gx, gw) = gauss_legendre(8);
        let mut total = 0.0;
        for (comp, u) in profiles.iter().enumerate() {
            for j in 0..self.n_beta {
                let len = u[j];
                let mut seg = 0.0;
                for (xi, wi) in gx.iter().zip(&gw) {
                    let s = 0.5 * len * (xi + 1.0);
                    seg += 0.5 * len * wi * self.sigma(comp, j, s);
                }
                total += seg * 2.0 * PI / self.n_beta as f64;
            }
        }
        total
    }

    /// Area of the deformed surface at time t given the sweep corrections
    /// per component (periodic cubic interpolation in β).
    fn area(&self, t: f64, corrections: Option<&[Vec<f64>]>) -> f64 {
        let interp = |comp: usize, beta: f64| -> f64 {
            let corr = match corrections {
                Some(c) => &c[comp],
                None => return 0.0,
            };
            let n = self.n_beta as f64;
            let pos = beta.rem_euclid(2.0 * PI) / (2.0 * PI) * n;
            let i1 = pos.floor() as usize % self.n_beta;
            let fr = pos - pos.floor();
            let at = |k: i64| corr[((i1 as i64 + k).rem_euclid(self.n_beta as i64)) as usize];
            let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
            // Catmull–Rom
            0.5 * ((2.0 * p1)
                + (-p0 + p2) * fr
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * fr * fr
                + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * fr * fr * fr)
        };
        let space = &self.ball.space;
        let mut total = 0.0;
        for node in &self.nodes {
            let mut pts = [V3::zeros(); 9];
            for (k, sat) in node.sats.iter().enumerate() {
                let u_amt = if sat.chi > 0.0 {
                    sat.phi * t + sat.chi * (interp(sat.comp, sat.beta) - sat.phi_bd * t)
                } else {
                    sat.phi * t
                };
                let y = sat.x + sat.z * u_amt;
                pts[k] = if sat.chi > 0.0 {
                    let yn = y.norm();
                    let r_lin = sat.xnorm + u_amt * sat.lin;
                    let r_target = (1.0 - sat.chi) * yn + sat.chi * r_lin;
                    y * (r_target / yn)
                } else {
                    y
                };
            }
            let c = [1.0, -8.0, 8.0, -1.0];
            let den = 12.0 * self.tangent_step;
            let f_line = (pts[1] * c[0] + pts[2] * c[1] + pts[3] * c[2] + pts[4] * c[3]) / den;
            let f_ang = (pts[5] * c[0] + pts[6] * c[1] + pts[7] * c[2] + pts[8] * c[3]) / den;
            let ew = space.conformal_factor(&pts[0]);
            total += node.weight * ew * ew * f_line.cross(&f_ang).norm();
        }
        total
    }
}

/// Run one second-variation experiment: flow the surface along a proper,
/// wetting-preserving deformation whose normal speed at time zero is φ·ν and
/// compare the finite-difference second derivative of area with Q(φ, φ).
pub fn second_variation_case(
    imm: &Immersion,
    phi: &dyn Fn(f64, f64) -> f64,
    label: &str,
    opts: &VariationOptions,
) -> Result<SecondVariationCase> {
    let engine = VariationEngine::new(imm, phi, opts)?;
    let q_smooth = quadratic_form_smooth(imm, phi, phi)?;
    let boundary_mean = integrate_boundary(imm, phi)?;

    let mut dts = opts.time_steps;
    dts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let times_pos: Vec<f64> = dts.iter().rev().cloned().collect(); // ascending
    let times_neg: Vec<f64> = times_pos.iter().map(|t| -t).collect();
    let prof_pos = engine.sweep_profiles(&times_pos);
    let prof_neg = engine.sweep_profiles(&times_neg);

    let a0 = engine.area(0.0, None);
    let mut wetting_drift = 0.0f64;
    let mut area_at = std::collections::HashMap::new();
    for (ti, &t) in times_pos.iter().enumerate() {
        wetting_drift = wetting_drift.max(engine.wetted_change(&prof_pos[ti]).abs());
        area_at.insert(ti as i64 + 1, engine.area(t, Some(&prof_pos[ti])));
    }
    for (ti, &t) in times_neg.iter().enumerate() {
        wetting_drift = wetting_drift.max(engine.wetted_change(&prof_neg[ti]).abs());
        area_at.insert(-(ti as i64 + 1), engine.area(t, Some(&prof_neg[ti])));
    }

    let mut fd_estimates = Vec::new();
    for (k, &dt) in dts.iter().enumerate() {
        let idx = (times_pos.len() - k) as i64;
        let ap = area_at[&idx];
        let am = area_at[&(-idx)];
        fd_estimates.push([dt, (ap - 2.0 * a0 + am) / (dt * dt)]);
    }
    let d_coarse = fd_estimates[0][1];
    let d_mid = fd_estimates[1][1];
    let d_fine = fd_estimates[2][1];
    let fd_value = (4.0 * d_fine - d_mid) / 3.0;
    let num = d_coarse - d_mid;
    let den = d_mid - d_fine;
    let observed_order = if den.abs() > 1e-12 && num / den > 0.0 {
        (num / den).log2()
    } else {
        f64::INFINITY // differences below noise: converged
    };
    Ok(SecondVariationCase {
        label: label.to_string(),
        q_smooth,
        fd_estimates,
        fd_value,
        observed_order,
        wetting_drift,
        boundary_mean,
        abs_error: (fd_value - q_smooth).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{build_family, SurfaceFamily};

    #[test]
    fn equatorial_disk_identities_are_exact() {
        let imm = build_family(&SurfaceFamily::FlatDisk { height: 0.0 }, 0).unwrap();
        let rep = verify_identities(&imm).unwrap();
        assert!(rep.worst < 1e-8, "worst residual {:.3e}", rep.worst);
        for q in &rep.q_values {
            assert!(q.abs() < 1e-9, "flat-disk test functions are neutral, got {q:.3e}");
        }
        assert!((rep.contact_angle - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn tilted_disk_identities_are_exact() {
        for height in [0.3, -0.5] {
            let imm = build_family(&SurfaceFamily::FlatDisk { height }, 0).unwrap();
            let rep = verify_identities(&imm).unwrap();
            assert!(rep.worst < 1e-8, "height {height}: worst residual {:.3e}", rep.worst);
        }
    }

    #[test]
    fn catenoid_identities_and_energy() {
        let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 0).unwrap();
        let rep = verify_identities(&imm).unwrap();
        assert!(rep.worst < 1e-7, "worst residual {:.3e}", rep.worst);
        assert_eq!(rep.directions.len(), 3);
        // Horizontal and vertical test functions all carry negative energy.
        for q in &rep.q_values {
            assert!(*q < -1e-2, "expected strict instability witness, got {q:.3e}");
        }
        // Closed form for the axis direction: Q = −∫|h|² z² dA.
        let c = crate::surface::critical_catenoid_waist();
        let t0 = crate::surface::critical_catenoid_parameter();
        let n = 4000;
        let mut integral = 0.0;
        for i in 0..n {
            let t = t0 * (i as f64 + 0.5) / n as f64;
            integral += (t0 / n as f64) * t * t / t.cosh().powi(2);
        }
        let closed = -8.0 * PI * c * c * integral;
        assert!(
            (rep.q_values[2] - closed).abs() < 1e-6 * closed.abs(),
            "axis energy {:.8} vs closed form {:.8}",
            rep.q_values[2],
            closed
        );
    }

    #[test]
    fn hyperbolic_cap_identities_are_exact() {
        for radius in [0.5, 2.0] {
            let imm = build_family(&SurfaceFamily::GeodesicDiskHyp { radius, offset: 0.0 }, 0).unwrap();
            let rep = verify_identities(&imm).unwrap();
            assert!(rep.worst < 1e-7, "R={radius}: worst residual {:.3e}", rep.worst);
            // Totally geodesic: the test functions are neutral directions.
            for q in &rep.q_values {
                assert!(q.abs() < 1e-7, "R={radius}: neutral energy violated: {q:.3e}");
            }
        }
    }

    #[test]
    fn spherical_cap_identities_are_exact() {
        for radius in [1.0, 2.5] {
            let imm = build_family(&SurfaceFamily::GeodesicDiskSph { radius, offset: 0.0 }, 0).unwrap();
            let rep = verify_identities(&imm).unwrap();
            assert!(rep.worst < 1e-7, "R={radius}: worst residual {:.3e}", rep.worst);
            for q in &rep.q_values {
                assert!(q.abs() < 1e-7, "R={radius}: neutral energy violated: {q:.3e}");
            }
        }
    }

    #[test]
    fn flat_disk_second_variation_matches_closed_forms() {
        let imm = build_family(&SurfaceFamily::FlatDisk { height: 0.0 }, 0).unwrap();
        let opts = VariationOptions::default();

        // Neutral direction: Q(x₁) = 0.
        let tilt = second_variation_case(&imm, &|u, _| u, "x1", &opts).unwrap();
        assert!(tilt.q_smooth.abs() < 1e-9);
        assert!(tilt.abs_error < 1e-4, "tilt fd {:.3e}", tilt.fd_value);
        assert!(tilt.wetting_drift < 1e-8, "drift {:.3e}", tilt.wetting_drift);

        // Q(x₁² − 1/2) = 3π/4.
        let bowl =
            second_variation_case(&imm, &|u, _| u * u - 0.5, "x1^2-1/2", &opts).unwrap();
        assert!((bowl.q_smooth - 0.75 * PI).abs() < 1e-8);
        assert!(
            bowl.abs_error < 0.01 * bowl.q_smooth.abs().max(1e-2),
            "bowl fd {:.6} vs {:.6} (estimates {:?})",
            bowl.fd_value,
            bowl.q_smooth,
            bowl.fd_estimates
        );

        // Q(x₁x₂) = π/4.
        let saddle = second_variation_case(&imm, &|u, v| u * v, "x1*x2", &opts).unwrap();
        assert!((saddle.q_smooth - 0.25 * PI).abs() < 1e-8);
        assert!(
            saddle.abs_error < 0.01 * saddle.q_smooth.abs(),
            "saddle fd {:.6} vs {:.6}",
            saddle.fd_value,
            saddle.q_smooth
        );
        assert!(
            saddle.observed_order > 1.8 || saddle.abs_error < 1e-6,
            "saddle order {:.2}",
            saddle.observed_order
        );
    }

    #[test]
    fn tilted_disk_second_variation_exercises_the_collar() {
        let imm = build_family(&SurfaceFamily::FlatDisk { height: 0.5 }, 0).unwrap();
        let phi = test_function_field(&imm, 0).unwrap();
        let case =
            second_variation_case(&imm, &*phi, "tilt test function", &VariationOptions::default())
                .unwrap();
        assert!(case.q_smooth.abs() < 1e-9, "q {:.3e}", case.q_smooth);
        assert!(case.abs_error < 1e-4, "fd {:.3e} (estimates {:?})", case.fd_value, case.fd_estimates);
        assert!(case.wetting_drift < 1e-8, "drift {:.3e}", case.wetting_drift);
        assert!(case.boundary_mean.abs() < 1e-10);
    }

    #[test]
    fn catenoid_height_variation_is_negative() {
        let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 0).unwrap();
        let phi = test_function_field(&imm, 2).unwrap();
        let case =
            second_variation_case(&imm, &*phi, "height", &VariationOptions::default()).unwrap();
        assert!(case.q_smooth < -1.0, "q {:.4}", case.q_smooth);
        assert!(
            case.abs_error < 0.01 * case.q_smooth.abs(),
            "fd {:.6} vs {:.6} (estimates {:?})",
            case.fd_value,
            case.q_smooth,
            case.fd_estimates
        );
        assert!(case.wetting_drift < 1e-8, "drift {:.3e}", case.wetting_drift);
        assert!(
            case.observed_order > 1.8 || case.abs_error < 1e-6,
            "order {:.2}",
            case.observed_order
        );
    }
}

