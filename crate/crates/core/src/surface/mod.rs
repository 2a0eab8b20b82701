//! Surfaces meeting a geodesic ball boundary: the shipped stationary
//! families, their meshes, pointwise geometry (metric, second fundamental
//! form), boundary frames with contact angles and Robin data, and discrete
//! Gauss–Bonnet accounting.

pub mod mesh;
pub mod patch;

pub use mesh::{ShapeEstimate, TriMesh};
pub use patch::{BoundaryParamJet, DomainKind, Patch, PatchJet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive_line_integral, gauss_legendre};
use crate::spaceform::{AmbientBall, AmbientSpace, SpaceKind, V3};

/// Contact angles closer than this to 0 or π are rejected: the conormal
/// frame and the Robin coefficient degenerate there.
pub const MIN_CONTACT_ANGLE: f64 = 0.05;

/// Stationarity tolerances (analytic sampling).
pub const TOL_MEAN_CURVATURE: f64 = 1e-8;
pub const TOL_CONTACT_ANGLE: f64 = 1e-6;

/// The parametric surface families the toolkit ships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SurfaceFamily {
    /// Flat disk at height c inside the unit Euclidean ball.
    FlatDisk { height: f64 },
    /// Rotational minimal annulus clipped by the unit Euclidean sphere;
    /// `waist: None` selects the free-boundary (orthogonal contact) member.
    Catenoid { waist: Option<f64> },
    /// Totally geodesic disk at distance `offset` from the centre of a
    /// hyperbolic ball of geodesic radius `radius`.
    GeodesicDiskHyp { radius: f64, offset: f64 },
    /// Totally geodesic disk at distance `offset` from the centre of a
    /// spherical ball of geodesic radius `radius` (radius < π).
    GeodesicDiskSph { radius: f64, offset: f64 },
}

impl SurfaceFamily {
    pub fn label(&self) -> String {
        match self {
            SurfaceFamily::FlatDisk { height } => format!("flat_disk(height={height})"),
            SurfaceFamily::Catenoid { waist: Some(c) } => format!("catenoid(waist={c})"),
            SurfaceFamily::Catenoid { waist: None } => "catenoid(critical)".to_string(),
            SurfaceFamily::GeodesicDiskHyp { radius, offset } => {
                format!("geodesic_disk_hyp(radius={radius}, offset={offset})")
            }
            SurfaceFamily::GeodesicDiskSph { radius, offset } => {
                format!("geodesic_disk_sph(radius={radius}, offset={offset})")
            }
        }
    }
}

/// Strict JSON parser for a family description: rejects unknown keys, which
/// the derived internally-tagged deserializer cannot do.
pub fn family_from_value(v: &serde_json::Value) -> Result<SurfaceFamily> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::config("surface description must be a JSON object"))?;
    let tag = obj
        .get("family")
        .and_then(|t| t.as_str())
        .ok_or_else(|| Error::config("surface description needs a string `family` tag"))?;
    let allowed: &[&str] = match tag {
        "flat_disk" => &["family", "height"],
        "catenoid" => &["family", "waist"],
        "geodesic_disk_hyp" | "geodesic_disk_sph" => &["family", "radius", "offset"],
        other => return Err(Error::config(format!("unknown surface family `{other}`"))),
    };
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(format!(
                "unknown field `{key}` for surface family `{tag}`"
            )));
        }
    }
    serde_json::from_value(v.clone()).map_err(Error::from)
}

/// A surface immersed in a geodesic ball: the ambient model, a triangle
/// mesh, and (for the shipped families) the exact chart it was sampled from.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub ambient: AmbientBall,
    pub mesh: TriMesh,
    pub patch: Option<Patch>,
    pub family: Option<SurfaceFamily>,
}

impl Immersion {
    pub fn space(&self) -> &AmbientSpace {
        &self.ambient.space
    }

    /// Structural invariants: oriented manifold mesh, closed boundary loops,
    /// vertices inside the closed ball with boundary vertices on ∂B and
    /// interior vertices strictly inside.
    pub fn validate(&self) -> Result<()> {
        self.mesh.check_manifold()?;
        let loops = self.mesh.boundary_loops()?;
        if loops.is_empty() {
            return Err(Error::geometry("surface has no boundary on the ball"));
        }
        let on_boundary = self.mesh.boundary_vertex_flags();
        let tol = 1e-9 + 1e-6 * self.mesh.max_edge_length();
        for (i, x) in self.mesh.vertices.iter().enumerate() {
            let gap = self.ambient.model_boundary_gap(x);
            if on_boundary[i] {
                if gap.abs() > tol.max(1e-7) {
                    return Err(Error::geometry(format!(
                        "boundary vertex {i} is off the ball boundary by {gap:.3e}"
                    )));
                }
            } else if gap > -1e-12 {
                return Err(Error::geometry(format!(
                    "interior vertex {i} is not strictly inside the ball (gap {gap:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Largest ambient edge length of the mesh.
    pub fn mesh_size(&self) -> f64 {
        let mut m = 0.0f64;
        for t in &self.mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m = m.max(geodesic_edge_length(
                    self.space(),
                    &self.mesh.vertices[a],
                    &self.mesh.vertices[b],
                ));
            }
        }
        m
    }
}

/// Exact geodesic distance between two chart points.
pub fn geodesic_edge_length(space: &AmbientSpace, a: &V3, b: &V3) -> f64 {
    let chord = (a - b).norm();
    match space.kind {
        SpaceKind::Euclidean => chord,
        SpaceKind::Hyperbolic => {
            let d = ((1.0 - a.norm_squared()) * (1.0 - b.norm_squared())).sqrt();
            2.0 * (chord / d).asinh()
        }
        SpaceKind::Spherical => {
            let d = ((1.0 + a.norm_squared()) * (1.0 + b.norm_squared())).sqrt();
            2.0 * (chord / d).min(1.0).asin()
        }
    }
}

/// Solution of t·tanh t = 1, the half-height parameter of the free-boundary
/// catenoid in the unit ball.
pub fn critical_catenoid_parameter() -> f64 {
    let (mut lo, mut hi) = (0.5_f64, 2.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tanh() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Waist of the free-boundary catenoid in the unit ball.
pub fn critical_catenoid_waist() -> f64 {
    let t0 = critical_catenoid_parameter();
    1.0 / (t0.cosh().powi(2) + t0 * t0).sqrt()
}

/// Half-height T with c²(cosh²T + T²) = 1: where the catenoid of waist c
/// meets the unit sphere.
pub fn catenoid_half_height(waist: f64) -> Result<f64> {
    if !(waist > 0.0 && waist < 1.0) {
        return Err(Error::argument(format!(
            "catenoid waist {waist} must lie in (0, 1) to reach the unit sphere"
        )));
    }
    let f = |t: f64| waist * waist * (t.cosh().powi(2) + t * t) - 1.0;
    let mut hi = 1.0_f64;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::numerical("catenoid clip bracket failed"));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn disk_rings_for_level(level: usize) -> Result<usize> {
    if level > 8 {
        return Err(Error::argument(format!("mesh level {level} too large (max 8)")));
    }
    Ok((16.0 * 2f64.powf(level as f64 / 2.0)).round() as usize)
}

/// Build a shipped family at a mesh refinement level (0 = coarsest; vertex
/// counts roughly double per level).
pub fn build_family(family: &SurfaceFamily, level: usize) -> Result<Immersion> {
    match *family {
        SurfaceFamily::FlatDisk { height } => {
            if !(height.abs() < 1.0) {
                return Err(Error::argument(format!(
                    "flat disk height {height} must satisfy |height| < 1"
                )));
            }
            let ambient = AmbientBall::new(SpaceKind::Euclidean, 1.0)?;
            let patch =
                Patch::PlanarDisk { radius: (1.0 - height * height).sqrt(), height };
            let m = mesh::mesh_disk_patch(&patch, disk_rings_for_level(level)?);
            Ok(Immersion { ambient, mesh: m, patch: Some(patch), family: Some(family.clone()) })
        }
        SurfaceFamily::Catenoid { waist } => {
            let c = match waist {
                Some(c) => c,
                None => critical_catenoid_waist(),
            };
            let half = catenoid_half_height(c)?;
            let ambient = AmbientBall::new(SpaceKind::Euclidean, 1.0)?;
            let patch = Patch::Catenoid { waist: c, half_height: half };
            if level > 8 {
                return Err(Error::argument(format!("mesh level {level} too large (max 8)")));
            }
            let m = mesh::mesh_strip_patch(&patch, 8 << level, 20 << level);
            Ok(Immersion { ambient, mesh: m, patch: Some(patch), family: Some(family.clone()) })
        }
        SurfaceFamily::GeodesicDiskHyp { radius, offset } => {
            let ambient = AmbientBall::new(SpaceKind::Hyperbolic, radius)?;
            if !(offset >= 0.0 && offset < radius) {
                return Err(Error::argument(format!(
                    "offset {offset} must satisfy 0 ≤ offset < radius {radius}"
                )));
            }
            let patch = if offset == 0.0 {
                Patch::PlanarDisk { radius: ambient.radius_model, height: 0.0 }
            } else {
                let rho0 = (0.5 * offset).tanh();
                let z_center = (1.0 + rho0 * rho0) / (2.0 * rho0);
                let sphere_radius = (1.0 - rho0 * rho0) / (2.0 * rho0);
                let rho_b = ambient.radius_model;
                let cos_amax = (1.0 + 2.0 * sphere_radius * sphere_radius - rho_b * rho_b)
                    / (2.0 * z_center * sphere_radius);
                if !(cos_amax.abs() < 1.0) {
                    return Err(Error::geometry(
                        "geodesic disk does not meet the ball boundary transversally",
                    ));
                }
                Patch::GeodesicCap {
                    z_center,
                    sphere_radius,
                    alpha_max: cos_amax.acos(),
                    dome: -1.0,
                }
            };
            let m = mesh::mesh_disk_patch(&patch, disk_rings_for_level(level)?);
            Ok(Immersion { ambient, mesh: m, patch: Some(patch), family: Some(family.clone()) })
        }
        SurfaceFamily::GeodesicDiskSph { radius, offset } => {
            let ambient = AmbientBall::new(SpaceKind::Spherical, radius)?;
            if !(offset >= 0.0 && offset < radius.min(std::f64::consts::FRAC_PI_2)) {
                return Err(Error::argument(format!(
                    "offset {offset} must satisfy 0 ≤ offset < min(radius, π/2)"
                )));
            }
            if radius + offset >= std::f64::consts::PI {
                return Err(Error::geometry(
                    "geodesic disk closes up inside the ball: need radius + offset < π",
                ));
            }
            let patch = if offset == 0.0 {
                Patch::PlanarDisk { radius: ambient.radius_model, height: 0.0 }
            } else {
                let z_center = -1.0 / offset.tan();
                let sphere_radius = 1.0 / offset.sin();
                let rho_b = ambient.radius_model;
                let cos_amax =
                    (rho_b * rho_b - z_center * z_center - sphere_radius * sphere_radius)
                        / (2.0 * z_center * sphere_radius);
                if !(cos_amax.abs() < 1.0) {
                    return Err(Error::geometry(
                        "geodesic disk does not meet the ball boundary transversally",
                    ));
                }
                Patch::GeodesicCap {
                    z_center,
                    sphere_radius,
                    alpha_max: cos_amax.acos(),
                    dome: 1.0,
                }
            };
            let m = mesh::mesh_disk_patch(&patch, disk_rings_for_level(level)?);
            Ok(Immersion { ambient, mesh: m, patch: Some(patch), family: Some(family.clone()) })
        }
    }
}

/// Pointwise surface geometry from an exact chart jet: ambient metric and
/// second fundamental form in the parameter basis, plus invariants.
#[derive(Debug, Clone, Copy)]
pub struct GeomJet {
    pub x: V3,
    pub xu: V3,
    pub xv: V3,
    /// Ambient first fundamental form ḡ_ab.
    pub metric: [[f64; 2]; 2],
    pub det_metric: f64,
    /// Euclidean unit normal of the chart (orientation x_u × x_v).
    pub nhat: V3,
    /// ḡ-unit normal ν = e^{−w} n̂.
    pub nu: V3,
    /// Second fundamental form h_ab = ḡ(∇̄_a ν, x_b).
    pub second_form: [[f64; 2]; 2],
    pub mean_curvature: f64,
    pub h_norm2: f64,
    pub gauss_curvature: f64,
    /// |h|² + Ric(ν, ν) — the zeroth-order coefficient of the stability form.
    pub jacobi_potential: f64,
    /// Conformal factor e^w at x.
    pub conformal: f64,
}

pub fn geom_jet(space: &AmbientSpace, jet: &patch::PatchJet) -> Result<GeomJet> {
    let x = jet.x;
    if !space.chart_ok(&x) {
        return Err(Error::geometry("point leaves the model chart"));
    }
    let ew = space.conformal_factor(&x);
    let dw = space.conformal_grad(&x);
    let ge = [[jet.xu.dot(&jet.xu), jet.xu.dot(&jet.xv)], [
        jet.xv.dot(&jet.xu),
        jet.xv.dot(&jet.xv),
    ]];
    let cross = jet.xu.cross(&jet.xv);
    let cn = cross.norm();
    let scale = ge[0][0].max(ge[1][1]);
    if cn * cn < 1e-24 * scale * scale {
        return Err(Error::geometry("degenerate chart point: x_u × x_v vanishes"));
    }
    let nhat = cross / cn;
    let e2 = ew * ew;
    let metric = [[e2 * ge[0][0], e2 * ge[0][1]], [e2 * ge[1][0], e2 * ge[1][1]]];
    let det_metric = metric[0][0] * metric[1][1] - metric[0][1] * metric[1][0];
    let dwn = dw.dot(&nhat);
    let xabs = [[jet.xuu, jet.xuv], [jet.xuv, jet.xvv]];
    let mut h = [[0.0f64; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h[a][b] = ew * (-nhat.dot(&xabs[a][b]) + dwn * ge[a][b]);
        }
    }
    let inv = [
        [metric[1][1] / det_metric, -metric[0][1] / det_metric],
        [-metric[1][0] / det_metric, metric[0][0] / det_metric],
    ];
    // Shape operator S^a_b = g^{ac} h_{cb}.
    let mut s = [[0.0f64; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            s[a][b] = inv[a][0] * h[0][b] + inv[a][1] * h[1][b];
        }
    }
    let mean = s[0][0] + s[1][1];
    let h_norm2 = s[0][0] * s[0][0] + 2.0 * s[0][1] * s[1][0] + s[1][1] * s[1][1];
    let kappa = space.kind.curvature();
    let det_h = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    GeomJet {
        x,
        xu: jet.xu,
        xv: jet.xv,
        metric,
        det_metric,
        nhat,
        nu: nhat / ew,
        second_form: h,
        mean_curvature: mean,
        h_norm2,
        gauss_curvature: kappa + det_h / det_metric,
        jacobi_potential: h_norm2 + 2.0 * kappa,
        conformal: ew,
    }
    .validated()
}

impl GeomJet {
    fn validated(self) -> Result<GeomJet> {
        if !self.det_metric.is_finite() || self.det_metric <= 0.0 {
            return Err(Error::geometry("chart metric is singular"));
        }
        Ok(self)
    }
}

/// Geometry at an interior parameter point of an analytic immersion.
pub fn geometry_at(imm: &Immersion, u: f64, v: f64) -> Result<GeomJet> {
    let patch = imm
        .patch
        .as_ref()
        .ok_or_else(|| Error::argument("analytic geometry requires a chart-backed surface"))?;
    geom_jet(imm.space(), &patch.jet2(u, v))
}

/// Full boundary frame at one boundary point.
#[derive(Debug, Clone, Copy)]
pub struct FrameSample {
    pub point: V3,
    pub param: [f64; 2],
    /// ḡ-unit tangent of the boundary curve.
    pub tangent: V3,
    /// Outward ḡ-unit conormal in TM.
    pub conormal: V3,
    /// ḡ-unit surface normal.
    pub nu: V3,
    /// Outward ḡ-unit normal of the ball boundary.
    pub ball_normal: V3,
    /// Outward ḡ-unit conormal of ∂M inside ∂B: ν̄ = (ν + cos θ N̄)/sin θ.
    pub wall_conormal: V3,
    pub contact_angle: f64,
    /// Robin coefficient q = p(R)/sin θ + cot θ · h(μ, μ).
    pub robin_coefficient: f64,
    pub h_conormal: f64,
    /// Geodesic curvature of ∂M in M (positive for a disk boundary).
    pub geodesic_curvature: f64,
    /// Geodesic curvature of ∂M inside the ball boundary ∂B.
    pub wall_geodesic_curvature: f64,
    /// ds/dτ of the analytic boundary parametrization (0 for mesh samples).
    pub speed: f64,
}

/// Evaluate the boundary frame of an analytic immersion at boundary
/// component `comp`, curve parameter τ.
pub fn boundary_frame_at(
    ball: &AmbientBall,
    patch: &Patch,
    comp: usize,
    tau: f64,
) -> Result<FrameSample> {
    let space = &ball.space;
    let bp = patch.boundary_param(comp, tau);
    let jet = patch.jet2(bp.p[0], bp.p[1]);
    let geo = geom_jet(space, &jet)?;
    let x = jet.x;
    let ew = geo.conformal;
    let dw = space.conformal_grad(&x);

    // Curve velocity and acceleration in the chart.
    let xp = jet.xu * bp.dp[0] + jet.xv * bp.dp[1];
    let xpp = jet.xuu * (bp.dp[0] * bp.dp[0])
        + jet.xuv * (2.0 * bp.dp[0] * bp.dp[1])
        + jet.xvv * (bp.dp[1] * bp.dp[1])
        + jet.xu * bp.ddp[0]
        + jet.xv * bp.ddp[1];
    let xp_norm = xp.norm();
    if xp_norm < 1e-14 {
        return Err(Error::geometry("boundary curve has a stationary point"));
    }
    let speed = ew * xp_norm;
    let speed_prime = ew * (dw.dot(&xp) * xp_norm + xp.dot(&xpp) / xp_norm);
    let tangent = xp / speed;

    // ∇̄_t̂ t̂ along the curve (arc-length acceleration).
    let gamma_xp = xp * (2.0 * dw.dot(&xp)) - dw * xp.dot(&xp);
    let acc = (xpp * speed - xp * speed_prime) / (speed * speed * speed)
        + gamma_xp / (speed * speed);

    // Outward conormal: push the outward parameter direction, remove the
    // tangential part, ḡ-normalize.
    let od = patch.outward_param_direction(bp.p);
    let e_out = jet.xu * od[0] + jet.xv * od[1];
    let mut mu = e_out - tangent * (ew * ew * e_out.dot(&tangent));
    let mu_norm = ew * mu.norm();
    if mu_norm < 1e-14 {
        return Err(Error::geometry("outward conormal degenerates on the boundary"));
    }
    mu /= mu_norm;

    let nbar = ball.outward_normal(&x);
    let inner = |a: &V3, b: &V3| ew * ew * a.dot(b);
    let cos_t = -inner(&geo.nu, &nbar);
    let sin_t = inner(&mu, &nbar);
    if sin_t <= 0.0 {
        return Err(Error::geometry(format!(
            "outward conormal points into the ball (ḡ(μ, N̄) = {sin_t:.3e}); surface is not transversal"
        )));
    }
    let theta = sin_t.atan2(cos_t);
    if !(MIN_CONTACT_ANGLE..=std::f64::consts::PI - MIN_CONTACT_ANGLE).contains(&theta) {
        return Err(Error::geometry(format!(
            "contact angle {theta:.4} is too close to tangential contact"
        )));
    }
    let wall_conormal = (geo.nu + nbar * cos_t) / sin_t;

    // h(μ, μ): conormal components in the parameter basis.
    let rhs = [inner(&mu, &jet.xu), inner(&mu, &jet.xv)];
    let g = geo.metric;
    let det = geo.det_metric;
    let mu_a = [
        (rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det,
        (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det,
    ];
    let h = geo.second_form;
    let h_conormal = h[0][0] * mu_a[0] * mu_a[0]
        + 2.0 * h[0][1] * mu_a[0] * mu_a[1]
        + h[1][1] * mu_a[1] * mu_a[1];

    let p_r = ball.boundary_principal_curvature();
    let robin = p_r / sin_t + (cos_t / sin_t) * h_conormal;

    Ok(FrameSample {
        point: x,
        param: bp.p,
        tangent,
        conormal: mu,
        nu: geo.nu,
        ball_normal: nbar,
        wall_conormal,
        contact_angle: theta,
        robin_coefficient: robin,
        h_conormal,
        geodesic_curvature: -inner(&acc, &mu),
        wall_geodesic_curvature: -inner(&acc, &wall_conormal),
        speed,
    })
}

/// Boundary frame of a whole immersion: one sample per boundary vertex, per
/// loop, plus constancy statistics for the contact angle and Robin data.
#[derive(Debug, Clone)]
pub struct BoundaryFrame {
    pub loops: Vec<Vec<FrameSample>>,
    pub contact_angle_mean: f64,
    pub contact_angle_dev: f64,
    pub robin_mean: f64,
    pub robin_dev: f64,
    pub analytic: bool,
}

/// Boundary parameter (component, τ) of a boundary vertex of an analytic
/// immersion.
pub fn boundary_parameter_of_vertex(imm: &Immersion, vertex: usize) -> Result<(usize, f64)> {
    let params = imm
        .mesh
        .params
        .as_ref()
        .ok_or_else(|| Error::argument("mesh carries no parameter coordinates"))?;
    let p = params[vertex];
    match imm.mesh.domain {
        Some(DomainKind::UnitDisk) => {
            let tau = p[1].atan2(p[0]).rem_euclid(2.0 * std::f64::consts::PI);
            Ok((0, tau))
        }
        Some(DomainKind::PeriodicStrip { t_min, t_max }) => {
            let comp = if (p[0] - t_max).abs() <= (p[0] - t_min).abs() { 0 } else { 1 };
            Ok((comp, p[1].rem_euclid(2.0 * std::f64::consts::PI)))
        }
        None => Err(Error::argument("mesh carries no domain tag")),
    }
}

pub fn boundary_frame(imm: &Immersion) -> Result<BoundaryFrame> {
    let loops_v = imm.mesh.boundary_loops()?;
    if loops_v.is_empty() {
        return Err(Error::geometry("surface has no boundary on the ball"));
    }
    let mut loops = Vec::with_capacity(loops_v.len());
    let analytic = imm.patch.is_some();
    if analytic {
        let patch = imm.patch.as_ref().unwrap();
        for lp in &loops_v {
            let mut samples = Vec::with_capacity(lp.len());
            for &v in lp {
                let (comp, tau) = boundary_parameter_of_vertex(imm, v)?;
                samples.push(boundary_frame_at(&imm.ambient, patch, comp, tau)?);
            }
            loops.push(samples);
        }
    } else {
        loops = mesh_boundary_frame(imm, &loops_v)?;
    }
    let mut angles = Vec::new();
    let mut robins = Vec::new();
    for lp in &loops {
        for s in lp {
            angles.push(s.contact_angle);
            robins.push(s.robin_coefficient);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let dev = |v: &[f64], m: f64| v.iter().map(|x| (x - m).abs()).fold(0.0f64, f64::max);
    let am = mean(&angles);
    let rm = mean(&robins);
    Ok(BoundaryFrame {
        contact_angle_mean: am,
        contact_angle_dev: dev(&angles, am),
        robin_mean: rm,
        robin_dev: dev(&robins, rm),
        loops,
        analytic,
    })
}

/// Discrete boundary frame for imported meshes: fitted normals, chord
/// tangents, and turning-angle curvature estimates.
fn mesh_boundary_frame(imm: &Immersion, loops_v: &[Vec<usize>]) -> Result<Vec<Vec<FrameSample>>> {
    let space = imm.space();
    let shapes = mesh::estimate_shape(&imm.mesh, space)?;
    let mut out = Vec::with_capacity(loops_v.len());
    for lp in loops_v {
        let n = lp.len();
        if n < 3 {
            return Err(Error::mesh("boundary loop with fewer than 3 vertices"));
        }
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let (vp, v, vn) = (lp[(i + n - 1) % n], lp[i], lp[(i + 1) % n]);
            let x = imm.mesh.vertices[v];
            let ew = space.conformal_factor(&x);
            let inner = |a: &V3, b: &V3| ew * ew * a.dot(b);
            let chord = imm.mesh.vertices[vn] - imm.mesh.vertices[vp];
            let tangent = chord / (ew * chord.norm());
            let est = &shapes[v];
            let nu = est.nu;
            // μ ∝ ν × t̂ up to sign; fix the sign by pointing out of the ball.
            let nbar = imm.ambient.outward_normal(&x);
            let mut mu = nu.cross(&tangent);
            mu /= ew * mu.norm();
            if inner(&mu, &nbar) < 0.0 {
                mu = -mu;
            }
            let cos_t = -inner(&nu, &nbar);
            let sin_t = inner(&mu, &nbar);
            if sin_t <= 0.0 {
                return Err(Error::geometry(format!(
                    "discrete conormal tangential to the ball at vertex {v}"
                )));
            }
            let theta = sin_t.atan2(cos_t);
            if !(MIN_CONTACT_ANGLE..=std::f64::consts::PI - MIN_CONTACT_ANGLE).contains(&theta) {
                return Err(Error::geometry(format!(
                    "contact angle {theta:.4} at vertex {v} is too close to tangential contact"
                )));
            }
            let wall_conormal = (nu + nbar * cos_t) / sin_t;
            let h_conormal = est.second_form(&mu);
            let p_r = imm.ambient.boundary_principal_curvature();
            let robin = p_r / sin_t + (cos_t / sin_t) * h_conormal;
            // Discrete curvature: change of the ḡ-unit chord tangents over
            // the dual length.
            let (xp, xc, xn) = (imm.mesh.vertices[vp], x, imm.mesh.vertices[vn]);
            let half = |a: &V3, b: &V3| {
                let mid = (a + b) * 0.5;
                let e = space.conformal_factor(&mid);
                (b - a) / (e * (b - a).norm())
            };
            let t_in = half(&xp, &xc);
            let t_out = half(&xc, &xn);
            let ds = 0.5
                * (geodesic_edge_length(space, &xp, &xc) + geodesic_edge_length(space, &xc, &xn));
            let acc = (t_out - t_in) / ds;
            samples.push(FrameSample {
                point: x,
                param: [0.0, 0.0],
                tangent,
                conormal: mu,
                nu,
                ball_normal: nbar,
                wall_conormal,
                contact_angle: theta,
                robin_coefficient: robin,
                h_conormal,
                geodesic_curvature: -inner(&acc, &mu),
                wall_geodesic_curvature: -inner(&acc, &wall_conormal),
                speed: 0.0,
            });
        }
        out.push(samples);
    }
    Ok(out)
}

/// Pointwise shape data over the whole mesh.
#[derive(Debug, Clone)]
pub struct ShapeSample {
    pub point: V3,
    pub nu: V3,
    pub mean_curvature: f64,
    pub h_norm2: f64,
    pub gauss_curvature: f64,
    pub jacobi_potential: f64,
}

#[derive(Debug, Clone)]
pub struct ShapeData {
    pub samples: Vec<ShapeSample>,
    pub max_abs_mean_curvature: f64,
    pub analytic: bool,
}

pub fn shape_data(imm: &Immersion) -> Result<ShapeData> {
    let mut samples = Vec::with_capacity(imm.mesh.vertex_count());
    let analytic = imm.patch.is_some();
    if let Some(patch) = &imm.patch {
        let params = imm
            .mesh
            .params
            .as_ref()
            .ok_or_else(|| Error::argument("chart-backed surface without parameters"))?;
        for p in params {
            let g = geom_jet(imm.space(), &patch.jet2(p[0], p[1]))?;
            samples.push(ShapeSample {
                point: g.x,
                nu: g.nu,
                mean_curvature: g.mean_curvature,
                h_norm2: g.h_norm2,
                gauss_curvature: g.gauss_curvature,
                jacobi_potential: g.jacobi_potential,
            });
        }
    } else {
        let kappa = imm.space().kind.curvature();
        for (v, est) in mesh::estimate_shape(&imm.mesh, imm.space())?.into_iter().enumerate() {
            // det S = (H² − |h|²)/2 recovers the Gauss equation term.
            let det_s = 0.5 * (est.mean_curvature * est.mean_curvature - est.h_norm2);
            samples.push(ShapeSample {
                point: imm.mesh.vertices[v],
                nu: est.nu,
                mean_curvature: est.mean_curvature,
                h_norm2: est.h_norm2,
                gauss_curvature: kappa + det_s,
                jacobi_potential: est.h_norm2 + 2.0 * kappa,
            });
        }
    }
    let max_h = samples.iter().map(|s| s.mean_curvature.abs()).fold(0.0f64, f64::max);
    Ok(ShapeData { samples, max_abs_mean_curvature: max_h, analytic })
}

/// Minimality and constant-contact-angle verdicts with the tolerances used.
#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    pub max_abs_mean_curvature: f64,
    pub contact_angle_mean: f64,
    pub contact_angle_dev: f64,
    pub robin_mean: f64,
    pub robin_dev: f64,
    pub tol_mean_curvature: f64,
    pub tol_contact_angle: f64,
    pub is_minimal: bool,
    pub is_constant_angle: bool,
    pub is_stationary: bool,
}

pub fn stationarity_report(imm: &Immersion) -> Result<StationarityReport> {
    let shape = shape_data(imm)?;
    let frame = boundary_frame(imm)?;
    let (tol_h, tol_a) = if shape.analytic {
        (TOL_MEAN_CURVATURE, TOL_CONTACT_ANGLE)
    } else {
        let h = imm.mesh_size();
        (20.0 * h, 20.0 * h)
    };
    let is_minimal = shape.max_abs_mean_curvature <= tol_h;
    let is_constant_angle = frame.contact_angle_dev <= tol_a;
    Ok(StationarityReport {
        max_abs_mean_curvature: shape.max_abs_mean_curvature,
        contact_angle_mean: frame.contact_angle_mean,
        contact_angle_dev: frame.contact_angle_dev,
        robin_mean: frame.robin_mean,
        robin_dev: frame.robin_dev,
        tol_mean_curvature: tol_h,
        tol_contact_angle: tol_a,
        is_minimal,
        is_constant_angle,
        is_stationary: is_minimal && is_constant_angle,
    })
}

/// Discrete Gauss–Bonnet accounting: combinatorial topology, converged area
/// and boundary length, angle-defect curvature totals, and the closure
/// residual of the discrete Gauss–Bonnet identity.
#[derive(Debug, Clone, Serialize)]
pub struct EulerData {
    pub euler_characteristic: i64,
    pub genus: usize,
    pub boundary_components: usize,
    pub area: f64,
    pub boundary_length: f64,
    /// Sum of interior angle defects ≈ ∫_M K dA.
    pub total_gauss_curvature: f64,
    /// Sum of boundary turning angles ≈ ∮_∂M κ_g ds.
    pub total_geodesic_curvature: f64,
    /// |defects + turnings − 2πχ|.
    pub gauss_bonnet_residual: f64,
}

/// Corner angles of the intrinsic cone metric: Euclidean law of cosines on
/// exact ambient geodesic edge lengths.
fn corner_angles(space: &AmbientSpace, a: &V3, b: &V3, c: &V3) -> [f64; 3] {
    let lab = geodesic_edge_length(space, a, b);
    let lbc = geodesic_edge_length(space, b, c);
    let lca = geodesic_edge_length(space, c, a);
    let ang = |adj1: f64, adj2: f64, opp: f64| {
        ((adj1 * adj1 + adj2 * adj2 - opp * opp) / (2.0 * adj1 * adj2)).clamp(-1.0, 1.0).acos()
    };
    [ang(lab, lca, lbc), ang(lab, lbc, lca), ang(lbc, lca, lab)]
}

pub fn euler_data(imm: &Immersion) -> Result<EulerData> {
    let mesh = &imm.mesh;
    let space = imm.space();
    let chi = mesh.euler_characteristic();
    let loops = mesh.boundary_loops()?;
    let genus = mesh.genus()?;

    let boundary = mesh.boundary_vertex_flags();
    let mut angle_sum = vec![0.0f64; mesh.vertex_count()];
    for t in &mesh.triangles {
        let ang = corner_angles(
            space,
            &mesh.vertices[t[0]],
            &mesh.vertices[t[1]],
            &mesh.vertices[t[2]],
        );
        for k in 0..3 {
            angle_sum[t[k]] += ang[k];
        }
    }
    let mut defects = 0.0;
    let mut turnings = 0.0;
    for v in 0..mesh.vertex_count() {
        if boundary[v] {
            turnings += std::f64::consts::PI - angle_sum[v];
        } else {
            defects += 2.0 * std::f64::consts::PI - angle_sum[v];
        }
    }
    let residual = (defects + turnings - 2.0 * std::f64::consts::PI * chi as f64).abs();

    let (area, boundary_length) = if let Some(patch) = &imm.patch {
        (patch_area(space, patch), patch_boundary_length(space, patch))
    } else {
        (cone_area(imm), cone_boundary_length(imm, &loops))
    };

    Ok(EulerData {
        euler_characteristic: chi,
        genus,
        boundary_components: loops.len(),
        area,
        boundary_length,
        total_gauss_curvature: defects,
        total_geodesic_curvature: turnings,
        gauss_bonnet_residual: residual,
    })
}

/// Ambient area of an analytic patch by parameter-domain quadrature
/// (Gauss–Legendre radially/axially, trapezoid in the periodic direction).
pub fn patch_area(space: &AmbientSpace, patch: &Patch) -> f64 {
    let density = |u: f64, v: f64| {
        let j = patch.jet2(u, v);
        let ew = space.conformal_factor(&j.x);
        ew * ew * j.xu.cross(&j.xv).norm()
    };
    let n_ang = 128usize;
    let (nodes, weights) = gauss_legendre(48);
    match patch.domain() {
        DomainKind::UnitDisk => {
            // Polar parametrization of the unit parameter disk.
            let mut total = 0.0;
            for (rho_n, rho_w) in nodes.iter().zip(&weights) {
                let rho = 0.5 * (rho_n + 1.0);
                let mut ring = 0.0;
                for j in 0..n_ang {
                    let beta = 2.0 * std::f64::consts::PI * j as f64 / n_ang as f64;
                    ring += density(rho * beta.cos(), rho * beta.sin());
                }
                ring *= 2.0 * std::f64::consts::PI / n_ang as f64;
                total += rho_w * 0.5 * rho * ring;
            }
            total
        }
        DomainKind::PeriodicStrip { t_min, t_max } => {
            let mut total = 0.0;
            for (t_n, t_w) in nodes.iter().zip(&weights) {
                let t = 0.5 * ((t_max - t_min) * t_n + (t_max + t_min));
                let mut ring = 0.0;
                for j in 0..n_ang {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / n_ang as f64;
                    ring += density(t, phi);
                }
                ring *= 2.0 * std::f64::consts::PI / n_ang as f64;
                total += t_w * 0.5 * (t_max - t_min) * ring;
            }
            total
        }
    }
}

/// Total ambient boundary length of an analytic patch.
pub fn patch_boundary_length(space: &AmbientSpace, patch: &Patch) -> f64 {
    let mut total = 0.0;
    for comp in 0..patch.boundary_components() {
        let speed = |tau: f64| {
            let bp = patch.boundary_param(comp, tau);
            let j = patch.jet2(bp.p[0], bp.p[1]);
            let xp = j.xu * bp.dp[0] + j.xv * bp.dp[1];
            space.conformal_factor(&j.x) * xp.norm()
        };
        total += adaptive_line_integral(&speed, 0.0, 2.0 * std::f64::consts::PI);
    }
    total
}

/// Cone-metric area: Heron's formula on geodesic edge lengths.
fn cone_area(imm: &Immersion) -> f64 {
    let mut total = 0.0;
    for t in &imm.mesh.triangles {
        let a = geodesic_edge_length(imm.space(), &imm.mesh.vertices[t[0]], &imm.mesh.vertices[t[1]]);
        let b = geodesic_edge_length(imm.space(), &imm.mesh.vertices[t[1]], &imm.mesh.vertices[t[2]]);
        let c = geodesic_edge_length(imm.space(), &imm.mesh.vertices[t[2]], &imm.mesh.vertices[t[0]]);
        let s = 0.5 * (a + b + c);
        total += (s * (s - a) * (s - b) * (s - c)).max(0.0).sqrt();
    }
    total
}

fn cone_boundary_length(imm: &Immersion, loops: &[Vec<usize>]) -> f64 {
    let mut total = 0.0;
    for lp in loops {
        let n = lp.len();
        for i in 0..n {
            total += geodesic_edge_length(
                imm.space(),
                &imm.mesh.vertices[lp[i]],
                &imm.mesh.vertices[lp[(i + 1) % n]],
            );
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn family_json_roundtrip_and_strict_keys() {
        let fams = [
            SurfaceFamily::FlatDisk { height: 0.5 },
            SurfaceFamily::Catenoid { waist: None },
            SurfaceFamily::Catenoid { waist: Some(0.5) },
            SurfaceFamily::GeodesicDiskHyp { radius: 1.0, offset: 0.4 },
            SurfaceFamily::GeodesicDiskSph { radius: 2.0, offset: 0.3 },
        ];
        for f in &fams {
            let v = serde_json::to_value(f).unwrap();
            assert_eq!(&family_from_value(&v).unwrap(), f);
        }
        let bad: serde_json::Value =
            serde_json::from_str(r#"{"family":"flat_disk","height":0.1,"radius":2}"#).unwrap();
        assert!(family_from_value(&bad).is_err());
        let unknown: serde_json::Value =
            serde_json::from_str(r#"{"family":"cone","height":0.1}"#).unwrap();
        assert!(family_from_value(&unknown).is_err());
    }

    #[test]
    fn critical_catenoid_constants() {
        let t0 = critical_catenoid_parameter();
        assert_relative_eq!(t0 * t0.tanh(), 1.0, epsilon = 1e-12);
        let c = critical_catenoid_waist();
        // Free-boundary contact: x ⊥ normal at the clip, i.e. the clip is
        // exactly the critical parameter.
        let half = catenoid_half_height(c).unwrap();
        assert_relative_eq!(half, t0, epsilon = 1e-9);
    }

    #[test]
    fn built_families_validate() {
        let fams = [
            SurfaceFamily::FlatDisk { height: 0.5 },
            SurfaceFamily::Catenoid { waist: None },
            SurfaceFamily::GeodesicDiskHyp { radius: 1.0, offset: 0.4 },
            SurfaceFamily::GeodesicDiskSph { radius: 2.0, offset: 0.3 },
            SurfaceFamily::GeodesicDiskSph { radius: 2.5, offset: 0.2 },
            SurfaceFamily::GeodesicDiskHyp { radius: 2.0, offset: 0.0 },
        ];
        for f in &fams {
            let imm = build_family(f, 1).unwrap();
            imm.validate().unwrap();
            assert!(imm.mesh.vertex_count() > 100);
        }
        assert!(build_family(&SurfaceFamily::FlatDisk { height: 1.2 }, 0).is_err());
        assert!(build_family(&SurfaceFamily::GeodesicDiskHyp { radius: 1.0, offset: 1.5 }, 0)
            .is_err());
        assert!(build_family(&SurfaceFamily::GeodesicDiskSph { radius: 3.0, offset: 0.5 }, 0)
            .is_err());
    }

    #[test]
    fn catenoid_geometry_matches_closed_forms() {
        let c = 0.46_f64;
        let imm = build_family(&SurfaceFamily::Catenoid { waist: Some(c) }, 0).unwrap();
        let patch = imm.patch.as_ref().unwrap();
        for (t, phi) in [(0.0f64, 0.3f64), (0.5, 1.0), (-0.9, 4.2)] {
            let g = geom_jet(imm.space(), &patch.jet2(t, phi)).unwrap();
            let gexp = c * c * t.cosh() * t.cosh();
            assert_relative_eq!(g.metric[0][0], gexp, epsilon = 1e-12);
            assert_relative_eq!(g.metric[1][1], gexp, epsilon = 1e-12);
            assert!(g.metric[0][1].abs() < 1e-12);
            assert!(g.mean_curvature.abs() < 1e-12);
            assert_relative_eq!(g.h_norm2, 2.0 / (c * c * t.cosh().powi(4)), epsilon = 1e-10);
            // K = −|h|²/2 for a minimal surface in flat space.
            assert_relative_eq!(g.gauss_curvature, -g.h_norm2 / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn geodesic_caps_are_totally_geodesic() {
        for f in [
            SurfaceFamily::GeodesicDiskHyp { radius: 2.0, offset: 0.7 },
            SurfaceFamily::GeodesicDiskSph { radius: 2.5, offset: 0.4 },
            SurfaceFamily::GeodesicDiskHyp { radius: 0.5, offset: 0.2 },
        ] {
            let imm = build_family(&f, 0).unwrap();
            let patch = imm.patch.as_ref().unwrap();
            for (u, v) in [(0.0f64, 0.0f64), (0.3, 0.2), (-0.7, 0.1), (0.05, -0.9)] {
                let g = geom_jet(imm.space(), &patch.jet2(u, v)).unwrap();
                assert!(g.h_norm2 < 1e-18, "{f:?}: |h|² = {}", g.h_norm2);
                // Intrinsic curvature equals the ambient sectional curvature.
                assert_relative_eq!(
                    g.gauss_curvature,
                    imm.space().kind.curvature(),
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn flat_disk_frame_matches_hand_values() {
        // Disk at height 1/2: contact angle 2π/3, q = 2/√3, κ_g = 1/√(3/4),
        // and the wall curvature −(1/2)/√(3/4).
        let imm = build_family(&SurfaceFamily::FlatDisk { height: 0.5 }, 0).unwrap();
        let patch = imm.patch.as_ref().unwrap();
        let a = (0.75f64).sqrt();
        for tau in [0.0, 1.1, 3.9] {
            let s = boundary_frame_at(&imm.ambient, patch, 0, tau).unwrap();
            assert_relative_eq!(s.contact_angle, 2.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
            assert_relative_eq!(s.robin_coefficient, 2.0 / 3f64.sqrt(), epsilon = 1e-12);
            assert_relative_eq!(s.geodesic_curvature, 1.0 / a, epsilon = 1e-10);
            assert_relative_eq!(s.wall_geodesic_curvature, -0.5 / a, epsilon = 1e-10);
            assert_relative_eq!(s.speed, a, epsilon = 1e-12);
            // ν̄ is tangent to ∂B and outward from the wetted cap.
            assert!(s.wall_conormal.dot(&s.point).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_identity_couples_curvatures() {
        // κ_g = cos θ κ̄_g + sin θ p(R) on every boundary of every family.
        let fams = [
            SurfaceFamily::FlatDisk { height: -0.3 },
            SurfaceFamily::Catenoid { waist: None },
            SurfaceFamily::Catenoid { waist: Some(0.6) },
            SurfaceFamily::GeodesicDiskHyp { radius: 1.5, offset: 0.5 },
            SurfaceFamily::GeodesicDiskSph { radius: 2.0, offset: 0.6 },
        ];
        for f in &fams {
            let imm = build_family(f, 0).unwrap();
            let patch = imm.patch.as_ref().unwrap();
            let p_r = imm.ambient.boundary_principal_curvature();
            for comp in 0..patch.boundary_components() {
                for tau in [0.0, 0.7, 2.2, 5.0] {
                    let s = boundary_frame_at(&imm.ambient, patch, comp, tau).unwrap();
                    let lhs = s.geodesic_curvature;
                    let rhs = s.contact_angle.cos() * s.wall_geodesic_curvature
                        + s.contact_angle.sin() * p_r;
                    assert_relative_eq!(lhs, rhs, epsilon = 1e-8, max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn critical_catenoid_is_orthogonal_and_stationary() {
        let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 1).unwrap();
        let rep = stationarity_report(&imm).unwrap();
        assert!(rep.is_minimal, "max |H| = {}", rep.max_abs_mean_curvature);
        assert!(rep.is_constant_angle, "dev = {}", rep.contact_angle_dev);
        assert!(rep.is_stationary);
        assert_relative_eq!(
            rep.contact_angle_mean,
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-9
        );
    }

    #[test]
    fn all_families_are_stationary() {
        for f in [
            SurfaceFamily::FlatDisk { height: 0.3 },
            SurfaceFamily::Catenoid { waist: Some(0.55) },
            SurfaceFamily::GeodesicDiskHyp { radius: 2.0, offset: 0.8 },
            SurfaceFamily::GeodesicDiskSph { radius: 1.0, offset: 0.3 },
        ] {
            let imm = build_family(&f, 0).unwrap();
            let rep = stationarity_report(&imm).unwrap();
            assert!(rep.is_stationary, "{f:?}: {rep:?}");
        }
    }

    #[test]
    fn euler_data_flat_disk() {
        let imm = build_family(&SurfaceFamily::FlatDisk { height: 0.5 }, 2).unwrap();
        let e = euler_data(&imm).unwrap();
        assert_eq!(e.euler_characteristic, 1);
        assert_eq!(e.genus, 0);
        assert_eq!(e.boundary_components, 1);
        // Flat cone metric: defects vanish and turnings close up to 2π.
        assert!(e.total_gauss_curvature.abs() < 1e-9);
        assert_relative_eq!(e.total_geodesic_curvature, 2.0 * std::f64::consts::PI, epsilon = 1e-9);
        assert!(e.gauss_bonnet_residual < 1e-9);
        let a = (0.75f64).sqrt();
        assert_relative_eq!(e.area, std::f64::consts::PI * a * a, epsilon = 1e-10);
        assert_relative_eq!(e.boundary_length, 2.0 * std::f64::consts::PI * a, epsilon = 1e-10);
    }

    #[test]
    fn euler_data_hyperbolic_disk_converges() {
        // Equatorial disk in a hyperbolic ball: area 2π(cosh R − 1), length
        // 2π sinh R, ∫K = −area, ∮κ_g = 2π cosh R.
        let r = 1.5f64;
        let f = SurfaceFamily::GeodesicDiskHyp { radius: r, offset: 0.0 };
        let area = 2.0 * std::f64::consts::PI * (r.cosh() - 1.0);
        let mut errs = Vec::new();
        for level in [0usize, 3] {
            let imm = build_family(&f, level).unwrap();
            let e = euler_data(&imm).unwrap();
            assert!(e.gauss_bonnet_residual < 1e-9, "residual {}", e.gauss_bonnet_residual);
            assert_relative_eq!(e.area, area, epsilon = 1e-8);
            assert_relative_eq!(
                e.boundary_length,
                2.0 * std::f64::consts::PI * r.sinh(),
                epsilon = 1e-8
            );
            errs.push((e.total_gauss_curvature + area).abs());
        }
        // The defect total converges to ∫K = −area at first order: the
        // curvature mass of the strip of triangles touching the boundary is
        // booked into the turning total instead.
        assert!(
            errs[1] < 0.5 * errs[0],
            "defect errors did not shrink: {errs:?}"
        );
        assert!(errs[1] < 0.1 * area);
    }

    #[test]
    fn euler_data_catenoid_annulus() {
        let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 2).unwrap();
        let e = euler_data(&imm).unwrap();
        assert_eq!(e.euler_characteristic, 0);
        assert_eq!(e.boundary_components, 2);
        assert!(e.gauss_bonnet_residual < 1e-9);
        // χ = 0: total turning balances total curvature.
        assert_relative_eq!(
            e.total_gauss_curvature,
            -e.total_geodesic_curvature,
            epsilon = 1e-9
        );
        assert!(e.total_gauss_curvature < -0.1);
    }

    #[test]
    fn mesh_shape_estimates_agree_with_charts() {
        // Strip the chart off a catenoid and compare fitted curvature to the
        // exact values at interior vertices.
        let imm = build_family(&SurfaceFamily::Catenoid { waist: Some(0.5) }, 2).unwrap();
        let exact = shape_data(&imm).unwrap();
        let bare = Immersion {
            ambient: imm.ambient,
            mesh: TriMesh { params: None, domain: None, ..imm.mesh.clone() },
            patch: None,
            family: None,
        };
        let est = shape_data(&bare).unwrap();
        let boundary = imm.mesh.boundary_vertex_flags();
        let mut worst: f64 = 0.0;
        for v in 0..imm.mesh.vertex_count() {
            if boundary[v] {
                continue;
            }
            let rel = (est.samples[v].h_norm2 - exact.samples[v].h_norm2).abs()
                / exact.samples[v].h_norm2.max(1e-12);
            worst = worst.max(rel);
        }
        assert!(worst < 0.08, "worst interior |h|² relative error {worst}");
    }

    #[test]
    fn geodesic_lengths_match_model_radii() {
        for kind in [SpaceKind::Hyperbolic, SpaceKind::Spherical] {
            let space = AmbientSpace::new(kind);
            for r in [0.3f64, 1.0, 2.2] {
                let rho = space.geodesic_to_model_radius(r).unwrap();
                let a = V3::new(rho, 0.0, 0.0);
                assert_relative_eq!(
                    geodesic_edge_length(&space, &V3::zeros(), &a),
                    r,
                    epsilon = 1e-12
                );
                // Numerically integrate the conformal factor along a chord
                // and compare with the closed form for a short step.
                let b = V3::new(rho * 0.99, 1e-3, 0.0);
                let mut num = 0.0;
                let n = 4000;
                for i in 0..n {
                    let s = (i as f64 + 0.5) / n as f64;
                    let p = a + (b - a) * s;
                    num += space.conformal_factor(&p) * (b - a).norm() / n as f64;
                }
                let exact = geodesic_edge_length(&space, &a, &b);
                assert!((num - exact).abs() < 5e-4 * exact.max(1e-6) + 1e-9);
            }
        }
    }
}
