//! Mesh topology and discrete harmonic 1-forms.
//!
//! The number of independent harmonic 1-forms on a compact orientable
//! surface with boundary is `2g + r − 1` for either of the two classical
//! boundary conditions (form normal to the boundary, or tangent to it).
//! Each harmonic form yields a family of scalar test functions whose
//! stability energies certify index lower bounds that depend only on the
//! topology, so this module computes: combinatorial topology reports,
//! discrete harmonic bases with both boundary conditions, the associated
//! test-function energies on flat ambients, and the resulting bounds and
//! admissibility predicates.
//!
//! Harmonic forms are represented as edge cochains of a finite-element
//! exterior calculus: the coboundary maps are purely combinatorial, the
//! Hodge stars are diagonal with barycentric dual cells (always positive,
//! unlike circumcentric duals on obtuse triangles), and the harmonic space
//! is the exact kernel of the resulting 1-form Laplacian, so the dimension
//! count is combinatorial and independent of mesh quality.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::{lowest_eigenpairs, rcm_order, LanczosOptions, Triplets};
use crate::spaceform::{AmbientBall, AmbientSpace, SpaceKind, V3};
use crate::surface::mesh::{estimate_shape, TriMesh};
use crate::surface::{geometry_at, Immersion};
use crate::discretize::StabilityAssembly;
use crate::identities::contact_angle;

/// Combinatorial topology of a triangulated surface with boundary.
#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub genus: usize,
    pub boundary_components: usize,
    /// Dimension of the space of harmonic 1-forms (either boundary
    /// condition): 2g + r − 1.
    pub harmonic_dimension: usize,
}

/// Compute the combinatorial topology of a mesh. Fails on meshes that are
/// not oriented manifolds with at least one boundary component.
pub fn topology_report(mesh: &TriMesh) -> Result<TopologyReport> {
    mesh.check_manifold()?;
    let loops = mesh.boundary_loops()?;
    if loops.is_empty() {
        return Err(Error::mesh(
            "closed surface: the stability problem needs a boundary on the wall",
        ));
    }
    let genus = mesh.genus()?;
    let r = loops.len();
    Ok(TopologyReport {
        vertices: mesh.vertex_count(),
        edges: mesh.edge_count(),
        faces: mesh.triangle_count(),
        euler_characteristic: mesh.euler_characteristic(),
        genus,
        boundary_components: r,
        harmonic_dimension: 2 * genus + r - 1,
    })
}

/// One topological predicate: an index lower bound or an admissibility
/// condition on (g, r), together with its applicability to the ambient.
#[derive(Debug, Clone, Serialize)]
pub struct BoundPredicate {
    pub applicable: bool,
    pub reason: String,
    /// Clamped index lower bound (index bounds only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    /// Whether (g, r) is admissible for a stable surface (stable-topology
    /// predicates only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissible: Option<bool>,
}

impl BoundPredicate {
    fn not_applicable(reason: &str) -> Self {
        BoundPredicate { applicable: false, reason: reason.to_string(), bound: None, admissible: None }
    }

    /// For an applicable index bound, whether a computed constrained index
    /// satisfies it.
    pub fn satisfied_by(&self, constrained_index: usize) -> Option<bool> {
        match (self.applicable, self.bound) {
            (true, Some(b)) => Some(constrained_index >= b),
            _ => None,
        }
    }
}

/// ceil((dim − k·slots)/slots) clamped at zero, written with integer
/// arithmetic: the bound ⌈dim/slots⌉ − k.
fn ceil_bound(dim: usize, slots: usize, offset: usize) -> usize {
    let ceiling = dim.div_ceil(slots);
    ceiling.saturating_sub(offset)
}

/// Index lower bounds and stable-topology admissibility for a surface of
/// the given topology in the given ambient. `embed_dim` is the dimension of
/// a flat space the ambient isometrically embeds in (3 for the Euclidean
/// ball itself; 4 for the round sphere as the unit sphere of R⁴).
pub fn index_bounds(
    report: &TopologyReport,
    ambient: &AmbientBall,
    embed_dim: usize,
) -> BTreeMap<String, BoundPredicate> {
    let dim = report.harmonic_dimension;
    let (g, r) = (report.genus, report.boundary_components);
    let mut map = BTreeMap::new();

    // Wedge test functions u_ij from harmonic forms, flat ambient: one
    // quadratic-form slot per coordinate pair; d = 3 gives 3 slots.
    map.insert(
        "index_flat_wedge".to_string(),
        match ambient.space.kind {
            SpaceKind::Euclidean => BoundPredicate {
                applicable: true,
                reason: "flat ball in three coordinates: wedge functions span three slots"
                    .to_string(),
                bound: Some(ceil_bound(dim, 3, 1)),
                admissible: None,
            },
            _ => BoundPredicate::not_applicable("ambient is not a flat ball"),
        },
    );

    // Coordinate test functions u_i for the round sphere seen as the unit
    // sphere of R⁴: one slot per coordinate.
    map.insert(
        "index_spherical_coordinate".to_string(),
        match ambient.space.kind {
            SpaceKind::Spherical => BoundPredicate {
                applicable: true,
                reason: "round ball in the unit three-sphere of four flat coordinates".to_string(),
                bound: Some(ceil_bound(dim, 4, 1)),
                admissible: None,
            },
            _ => BoundPredicate::not_applicable("ambient is not a spherical ball"),
        },
    );

    // Wedge bound for a flat ambient isometrically embedded in dimension
    // `embed_dim`: one slot per coordinate pair.
    map.insert(
        "index_wedge_embedding".to_string(),
        match ambient.space.kind {
            SpaceKind::Euclidean if embed_dim >= 2 => {
                let slots = embed_dim * (embed_dim - 1) / 2;
                BoundPredicate {
                    applicable: true,
                    reason: format!(
                        "wedge functions over {embed_dim} flat coordinates: {slots} slots"
                    ),
                    bound: Some(ceil_bound(dim, slots, 1)),
                    admissible: None,
                }
            }
            SpaceKind::Euclidean => BoundPredicate::not_applicable("embedding dimension below 2"),
            SpaceKind::Hyperbolic => BoundPredicate::not_applicable(
                "hyperbolic space has no isometric embedding into a flat space",
            ),
            SpaceKind::Spherical => BoundPredicate::not_applicable(
                "spherical wedge terms carry curvature corrections that are not implemented",
            ),
        },
    );

    // Admissible (g, r) for stable surfaces meeting a strictly convex wall
    // orthogonally in a nonnegative-Ricci ambient: genus at most one, at
    // most three boundary components.
    map.insert(
        "stable_topology_orthogonal_wall".to_string(),
        match ambient.space.kind {
            SpaceKind::Euclidean | SpaceKind::Spherical => BoundPredicate {
                applicable: true,
                reason: "nonnegative Ricci curvature and strictly convex wall; \
                         constrains stable surfaces with orthogonal contact"
                    .to_string(),
                bound: None,
                admissible: Some(g <= 1 && (1..=3).contains(&r)),
            },
            SpaceKind::Hyperbolic => {
                BoundPredicate::not_applicable("ambient Ricci curvature is negative")
            }
        },
    );

    // Admissible (g, r) for stable embedded surfaces with embedded boundary
    // in a nonnegative-sectional-curvature ambient: g + r/2 < 4 for even
    // genus, g + r/2 < 5 for odd genus.
    map.insert(
        "stable_topology_embedded_boundary".to_string(),
        match ambient.space.kind {
            SpaceKind::Euclidean | SpaceKind::Spherical => {
                let budget = if g % 2 == 0 { 4.0 } else { 5.0 };
                BoundPredicate {
                    applicable: true,
                    reason: "nonnegative sectional curvature; constrains stable embedded \
                             surfaces with embedded boundary"
                        .to_string(),
                    bound: None,
                    admissible: Some((g as f64) + (r as f64) / 2.0 < budget),
                }
            }
            SpaceKind::Hyperbolic => {
                BoundPredicate::not_applicable("ambient sectional curvature is negative")
            }
        },
    );

    map
}

/// Boundary condition selecting one of the two harmonic spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FormCondition {
    /// The form vanishes on vectors tangent to ∂M (it is normal to the
    /// boundary); discretely, boundary-edge cochain values are removed from
    /// the complex. Kernel ≅ first relative cohomology.
    BoundaryNormal,
    /// The form has no flux through ∂M (it is tangent to the boundary);
    /// discretely, the full complex with its natural weak boundary
    /// condition. Kernel ≅ first absolute cohomology.
    BoundaryTangent,
}

/// One discrete harmonic 1-form.
#[derive(Debug, Clone)]
pub struct HarmonicForm {
    /// Cochain value per mesh edge (edges indexed as in `edge_list`; zero on
    /// boundary edges under the normal condition; for tangent-condition
    /// forms these are projections of the face reconstruction).
    pub edge_values: Vec<f64>,
    /// Whitney face reconstruction: one Euclidean-coordinate vector per
    /// triangle, tangent to the triangle plane. The squared pointwise norm
    /// of the form in the ambient metric is e^{−2w}|v|².
    pub face_vectors: Vec<V3>,
    /// Pointwise Whitney samples at boundary-edge midpoints, as
    /// (tail, head, value): unlike face averages these carry no inward
    /// sampling bias, so boundary integrals built from them are clean.
    pub boundary_samples: Vec<(usize, usize, V3)>,
    pub closedness_residual: f64,
    pub coclosedness_residual: f64,
    /// Mean relative violation of the boundary condition by the face
    /// reconstruction on boundary triangles (first order in mesh size).
    pub boundary_residual: f64,
}

/// A computed harmonic basis.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub condition: FormCondition,
    pub dimension: usize,
    pub expected_dimension: usize,
    /// Probed lowest eigenvalues of the 1-form Laplacian pencil.
    pub eigenvalues: Vec<f64>,
    /// Threshold under which an eigenvalue was counted as kernel.
    pub zero_threshold: f64,
    pub elements: Vec<HarmonicForm>,
    /// Sorted edge list (tail < head) the cochains are indexed by.
    pub edge_list: Vec<(usize, usize)>,
}

/// Geometric arrays of the cochain complex: diagonal Hodge stars from
/// barycentric dual cells, plus layout data reused by the reconstruction.
struct DecGeometry {
    edge_list: Vec<(usize, usize)>,
    edge_index: BTreeMap<(usize, usize), usize>,
    /// Dual/primal length ratio per edge (positive).
    star1: Vec<f64>,
    /// Barycentric vertex area per vertex (positive).
    star0: Vec<f64>,
    /// Inverse metric area per face.
    star2: Vec<f64>,
    /// Metric face areas.
    face_area: Vec<f64>,
    /// Per face: the three edge ids and the orientation sign of the face
    /// boundary against the stored tail→head direction.
    face_edges: Vec<[(usize, f64); 3]>,
    boundary_edge: Vec<bool>,
    boundary_vertex: Vec<bool>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b { (a, b) } else { (b, a) }
}

fn build_dec(mesh: &TriMesh, space: &AmbientSpace) -> Result<DecGeometry> {
    let nv = mesh.vertex_count();
    let mut edge_index = BTreeMap::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let key = edge_key(tri[k], tri[(k + 1) % 3]);
            let next = edge_index.len();
            edge_index.entry(key).or_insert(next);
        }
    }
    // Re-id edges in sorted order so cochain indexing is deterministic.
    let mut edge_list: Vec<(usize, usize)> = edge_index.keys().copied().collect();
    edge_list.sort_unstable();
    for (id, key) in edge_list.iter().enumerate() {
        *edge_index.get_mut(key).unwrap() = id;
    }
    let ne = edge_list.len();

    // Metric edge lengths: conformal factor averaged over the endpoints.
    let scaled_len = |a: usize, b: usize| -> f64 {
        let ew = 0.5
            * (space.conformal_factor(&mesh.vertices[a])
                + space.conformal_factor(&mesh.vertices[b]));
        ew * (mesh.vertices[a] - mesh.vertices[b]).norm()
    };

    let mut star0 = vec![0.0; nv];
    let mut star1_dual = vec![0.0; ne];
    let mut star2 = Vec::with_capacity(mesh.triangles.len());
    let mut face_area = Vec::with_capacity(mesh.triangles.len());
    let mut face_edges = Vec::with_capacity(mesh.triangles.len());
    let mut adjacent_faces = vec![0usize; ne];

    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        // Side lengths opposite each vertex and a planar layout from them.
        let lab = scaled_len(a, b);
        let lbc = scaled_len(b, c);
        let lca = scaled_len(c, a);
        let s = 0.5 * (lab + lbc + lca);
        let area2 = s * (s - lab) * (s - lbc) * (s - lca);
        if !(area2 > 0.0) {
            return Err(Error::mesh("degenerate triangle in the cochain complex"));
        }
        let area = area2.sqrt();
        face_area.push(area);
        star2.push(1.0 / area);
        for &v in tri {
            star0[v] += area / 3.0;
        }
        // Layout: A=(0,0), B=(lab,0), C from the two remaining lengths.
        let cx = (lab * lab + lca * lca - lbc * lbc) / (2.0 * lab);
        let cy = (lca * lca - cx * cx).max(0.0).sqrt();
        let pa = [0.0, 0.0];
        let pb = [lab, 0.0];
        let pc = [cx, cy];
        let bary = [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0];
        let mids = [
            ([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0], a, b),
            ([(pb[0] + pc[0]) / 2.0, (pb[1] + pc[1]) / 2.0], b, c),
            ([(pc[0] + pa[0]) / 2.0, (pc[1] + pa[1]) / 2.0], c, a),
        ];
        let mut fe = [(0usize, 0.0f64); 3];
        for (k, (mid, u, v)) in mids.iter().enumerate() {
            let id = edge_index[&edge_key(*u, *v)];
            let dual = ((mid[0] - bary[0]).powi(2) + (mid[1] - bary[1]).powi(2)).sqrt();
            star1_dual[id] += dual;
            adjacent_faces[id] += 1;
            let sign = if u < v { 1.0 } else { -1.0 };
            fe[k] = (id, sign);
        }
        face_edges.push(fe);
    }

    let mut star1 = vec![0.0; ne];
    let mut boundary_edge = vec![false; ne];
    for (id, &(a, b)) in edge_list.iter().enumerate() {
        let len = scaled_len(a, b);
        star1[id] = star1_dual[id] / len;
        boundary_edge[id] = adjacent_faces[id] == 1;
    }
    let mut boundary_vertex = vec![false; nv];
    for (id, &(a, b)) in edge_list.iter().enumerate() {
        if boundary_edge[id] {
            boundary_vertex[a] = true;
            boundary_vertex[b] = true;
        }
    }

    Ok(DecGeometry {
        edge_list,
        edge_index,
        star1,
        star0,
        star2,
        face_area,
        face_edges,
        boundary_edge,
        boundary_vertex,
    })
}

/// Euclidean gradients of the barycentric coordinates of a triangle,
/// tangent to its plane.
fn barycentric_gradients(p: [&V3; 3]) -> [V3; 3] {
    let b1 = p[1] - p[0];
    let b2 = p[2] - p[0];
    let g = [[b1.dot(&b1), b1.dot(&b2)], [b1.dot(&b2), b2.dot(&b2)]];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let solve = |r0: f64, r1: f64| -> V3 {
        let c0 = (r0 * g[1][1] - r1 * g[0][1]) / det;
        let c1 = (g[0][0] * r1 - g[1][0] * r0) / det;
        b1 * c0 + b2 * c1
    };
    let g1 = solve(1.0, 0.0);
    let g2 = solve(0.0, 1.0);
    [-g1 - g2, g1, g2]
}

/// Lowest eigenvalues of the 1-form Laplacian pencil of one boundary
/// condition, plus its kernel cochains (padded to full edge indexing).
struct PencilKernel {
    eigenvalues: Vec<f64>,
    zero_threshold: f64,
    dimension: usize,
    kernel: Vec<Vec<f64>>,
}

fn solve_pencil(
    mesh: &TriMesh,
    dec: &DecGeometry,
    condition: FormCondition,
    expected: usize,
) -> Result<PencilKernel> {
    let ne = dec.edge_list.len();

    // Active (unknown) edges of the complex.
    let active: Vec<usize> = match condition {
        FormCondition::BoundaryNormal => {
            (0..ne).filter(|&e| !dec.boundary_edge[e]).collect()
        }
        FormCondition::BoundaryTangent => (0..ne).collect(),
    };
    let mut slot = vec![usize::MAX; ne];
    for (s, &e) in active.iter().enumerate() {
        slot[e] = s;
    }
    let n = active.len();
    if n == 0 {
        return Err(Error::mesh("no interior edges: mesh too coarse for 1-form analysis"));
    }

    // Vertex incidence for the exact-part energy |δξ|²: for each active
    // vertex the incident active edges with their coboundary signs.
    let active_vertex = |v: usize| -> bool {
        match condition {
            FormCondition::BoundaryNormal => !dec.boundary_vertex[v],
            FormCondition::BoundaryTangent => true,
        }
    };
    let nv = mesh.vertex_count();
    let mut incidence: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    for &e in &active {
        let (a, b) = dec.edge_list[e];
        // d₀ f on tail→head edge is f(head) − f(tail).
        if active_vertex(a) {
            incidence[a].push((slot[e], -1.0));
        }
        if active_vertex(b) {
            incidence[b].push((slot[e], 1.0));
        }
    }

    // Pencil A ξ = λ ★₁ ξ with A = (exact part) + (coexact part), both PSD.
    let mut trip = Triplets::new(n);
    for v in 0..nv {
        if incidence[v].is_empty() {
            continue;
        }
        let inv_area = 1.0 / dec.star0[v];
        for &(si, sgn_i) in &incidence[v] {
            let wi = sgn_i * dec.star1[active[si]];
            for &(sj, sgn_j) in &incidence[v] {
                if sj < si {
                    continue;
                }
                let wj = sgn_j * dec.star1[active[sj]];
                trip.push_sym(si, sj, wi * wj * inv_area);
            }
        }
    }
    for (f, fe) in dec.face_edges.iter().enumerate() {
        let act: Vec<(usize, f64)> =
            fe.iter().filter(|(e, _)| slot[*e] != usize::MAX).map(|&(e, s)| (slot[e], s)).collect();
        for (i, &(si, sgn_i)) in act.iter().enumerate() {
            for &(sj, sgn_j) in &act[i..] {
                trip.push_sym(si, sj, sgn_i * sgn_j * dec.star2[f]);
            }
        }
    }
    let a = trip.to_csr();
    let mut mass_t = Triplets::new(n);
    for (s, &e) in active.iter().enumerate() {
        mass_t.push(s, s, dec.star1[e]);
    }
    let mass = mass_t.to_csr();

    // Kernel extraction. `scale` tracks the matrix diagonal (≈ the top of
    // the pencil spectrum, which grows like 1/h²); the continuum eigenvalues
    // above the kernel are order-one in physical units and therefore tiny
    // relative to `scale` on fine meshes. The shift must hug zero so the
    // kernel stays well separated from them after inversion — while staying
    // far enough from singular to keep the factorization pivots healthy.
    let mut scale = 0.0f64;
    for s in 0..n {
        scale = scale.max(a.get(s, s) / mass.get(s, s));
    }
    let zero_threshold = 1e-9 * scale.max(1e-300);
    let count = (expected + 4).min(n);
    let sigma = -1e-4 * scale;
    let perm = rcm_order(&a);
    let opts = LanczosOptions {
        count,
        max_steps: (8 * count).max(160).min(n),
        tol: 1e-10,
        seed: 0x107a_e571,
    };
    let pairs = lowest_eigenpairs(&a, &mass, sigma, &perm, None, &opts)?;
    let dimension = pairs.values.iter().take_while(|&&l| l < zero_threshold).count();

    let mut kernel = Vec::with_capacity(dimension);
    for k in 0..dimension {
        let mut xi = vec![0.0; ne];
        for (s, &e) in active.iter().enumerate() {
            xi[e] = pairs.vectors[k][s];
        }
        kernel.push(xi);
    }
    Ok(PencilKernel { eigenvalues: pairs.values, zero_threshold, dimension, kernel })
}

/// Compute the harmonic basis of a mesh under the requested boundary
/// condition. The dimension equals 2g + r − 1 exactly; eigenvalue and
/// residual diagnostics are returned alongside the basis.
///
/// Representatives under the normal condition come straight from the
/// pencil kernel: its boundary condition is imposed strongly (boundary
/// edges removed), so the kernel converges cleanly. Under the tangent
/// condition the pencil still pins the dimension exactly, but its kernel
/// vectors can limit to an oblique boundary condition on meshes whose
/// boundary triangles lean one way (a diagonal-Hodge artifact that does
/// not shrink with refinement), so the returned representatives are
/// instead the pointwise 90° tangent-plane rotations of the
/// normal-condition basis: on an oriented surface that rotation is an
/// isometry between the two harmonic spaces.
pub fn harmonic_basis(
    mesh: &TriMesh,
    space: &AmbientSpace,
    condition: FormCondition,
) -> Result<HarmonicBasis> {
    let report = topology_report(mesh)?;
    let expected = report.harmonic_dimension;
    let dec = build_dec(mesh, space)?;

    let native = solve_pencil(mesh, &dec, condition, expected)?;
    let mut elements = Vec::with_capacity(native.dimension);
    match condition {
        FormCondition::BoundaryNormal => {
            for xi in native.kernel.iter() {
                elements.push(reconstruct_form(mesh, space, &dec, condition, xi.clone())?);
            }
        }
        FormCondition::BoundaryTangent => {
            let strong = solve_pencil(mesh, &dec, FormCondition::BoundaryNormal, expected)?;
            if strong.dimension != native.dimension {
                return Err(Error::numerical(format!(
                    "harmonic dimensions disagree between boundary conditions: \
                     {} normal vs {} tangent",
                    strong.dimension, native.dimension
                )));
            }
            for xi in strong.kernel.iter() {
                let base =
                    reconstruct_form(mesh, space, &dec, FormCondition::BoundaryNormal, xi.clone())?;
                elements.push(rotate_form(mesh, &dec, &base));
            }
        }
    }
    Ok(HarmonicBasis {
        condition,
        dimension: native.dimension,
        expected_dimension: expected,
        eigenvalues: native.eigenvalues,
        zero_threshold: native.zero_threshold,
        elements,
        edge_list: dec.edge_list.clone(),
    })
}

/// Whitney face reconstruction, normalization to unit squared form norm,
/// deterministic sign, and residual diagnostics.
fn reconstruct_form(
    mesh: &TriMesh,
    space: &AmbientSpace,
    dec: &DecGeometry,
    condition: FormCondition,
    mut xi: Vec<f64>,
) -> Result<HarmonicForm> {
    let nf = mesh.triangles.len();
    let mut face_vectors = vec![V3::zeros(); nf];
    let mut norm2 = 0.0;
    for (f, tri) in mesh.triangles.iter().enumerate() {
        let p = [&mesh.vertices[tri[0]], &mesh.vertices[tri[1]], &mesh.vertices[tri[2]]];
        let grads = barycentric_gradients(p);
        let mut v = V3::zeros();
        for k in 0..3 {
            let (t, h) = (tri[k], tri[(k + 1) % 3]);
            let key = edge_key(t, h);
            let id = dec.edge_index[&key];
            let val = if t < h { xi[id] } else { -xi[id] };
            let (lt, lh) = (k, (k + 1) % 3);
            // Face average of the Whitney basis form of the directed edge.
            v += (grads[lh] - grads[lt]) * (val / 3.0);
        }
        face_vectors[f] = v;
        let centroid = (p[0] + p[1] + p[2]) / 3.0;
        let ew = space.conformal_factor(&centroid);
        norm2 += dec.face_area[f] * v.norm_squared() / (ew * ew);
    }
    if norm2 <= 0.0 {
        return Err(Error::numerical("harmonic form reconstruction vanished"));
    }
    let mut s = 1.0 / norm2.sqrt();
    // Deterministic sign: first cochain entry of meaningful size positive.
    let big = xi.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = xi.iter().find(|v| v.abs() > 1e-9 * big) {
        if *first < 0.0 {
            s = -s;
        }
    }
    for v in xi.iter_mut() {
        *v *= s;
    }
    for v in face_vectors.iter_mut() {
        *v *= s;
    }

    // Residuals. Closedness: L² norm of dξ against the form's unit norm;
    // co-closedness: L² norm of δξ.
    let mut closed2 = 0.0;
    for (f, fe) in dec.face_edges.iter().enumerate() {
        let mut circ = 0.0;
        for &(e, sgn) in fe {
            circ += sgn * xi[e];
        }
        closed2 += dec.star2[f] * circ * circ;
    }
    let mut coclosed2 = 0.0;
    let nv = mesh.vertex_count();
    let mut div = vec![0.0; nv];
    for (id, &(a, b)) in dec.edge_list.iter().enumerate() {
        div[a] -= dec.star1[id] * xi[id];
        div[b] += dec.star1[id] * xi[id];
    }
    for v in 0..nv {
        let keep = match condition {
            FormCondition::BoundaryNormal => !dec.boundary_vertex[v],
            FormCondition::BoundaryTangent => true,
        };
        if keep {
            coclosed2 += div[v] * div[v] / dec.star0[v];
        }
    }

    // Pointwise Whitney samples at boundary-edge midpoints. At the midpoint
    // of edge (a, b) with opposite vertex c the barycentric weights are
    // (1/2, 1/2, 0), so the interpolated form there is
    //   ξ_ab (∇λ_b − ∇λ_a)/2 + (ξ_bc − ξ_ca) ∇λ_c / 2
    // with directed cochain values.
    let mut boundary_samples = Vec::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if !dec.boundary_edge[dec.edge_index[&edge_key(a, b)]] {
                continue;
            }
            let p = [&mesh.vertices[tri[0]], &mesh.vertices[tri[1]], &mesh.vertices[tri[2]]];
            let grads = barycentric_gradients(p);
            let directed = |i: usize, j: usize| -> f64 {
                let id = dec.edge_index[&edge_key(tri[i], tri[j])];
                if tri[i] < tri[j] {
                    xi[id]
                } else {
                    -xi[id]
                }
            };
            let (ka, kb, kc) = (k, (k + 1) % 3, (k + 2) % 3);
            let v = (grads[kb] - grads[ka]) * (directed(ka, kb) / 2.0)
                + grads[kc] * ((directed(kb, kc) - directed(kc, ka)) / 2.0);
            boundary_samples.push((a, b, v));
        }
    }

    let boundary_residual = boundary_violation(mesh, dec, condition, &face_vectors);
    Ok(HarmonicForm {
        edge_values: xi,
        face_vectors,
        boundary_samples,
        closedness_residual: closed2.sqrt(),
        coclosedness_residual: coclosed2.sqrt(),
        boundary_residual,
    })
}

/// Mean relative violation of the boundary condition by the face
/// reconstruction on boundary triangles: tangential component (normal
/// condition) or conormal flux (tangent condition), first order in h.
fn boundary_violation(
    mesh: &TriMesh,
    dec: &DecGeometry,
    condition: FormCondition,
    face_vectors: &[V3],
) -> f64 {
    let mut bres = 0.0;
    let mut bcount = 0usize;
    for (f, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let id = dec.edge_index[&edge_key(a, b)];
            if !dec.boundary_edge[id] {
                continue;
            }
            let t = (mesh.vertices[b] - mesh.vertices[a]).normalize();
            let opposite = &mesh.vertices[tri[(k + 2) % 3]];
            let mid = (mesh.vertices[a] + mesh.vertices[b]) / 2.0;
            let inward = opposite - mid;
            let conormal = -(inward - t * inward.dot(&t)).normalize();
            let v = &face_vectors[f];
            let denom = v.norm().max(1e-300);
            let violation = match condition {
                FormCondition::BoundaryNormal => v.dot(&t).abs(),
                FormCondition::BoundaryTangent => v.dot(&conormal).abs(),
            };
            bres += violation / denom;
            bcount += 1;
        }
    }
    if bcount > 0 {
        bres /= bcount as f64;
    }
    bres
}

/// Unit normal of a triangle in its stored winding.
fn face_normal(mesh: &TriMesh, tri: &[usize; 3]) -> V3 {
    let p0 = &mesh.vertices[tri[0]];
    let n = (mesh.vertices[tri[1]] - p0).cross(&(mesh.vertices[tri[2]] - p0));
    n / n.norm().max(1e-300)
}

/// Pointwise 90° rotation of a normal-condition form within each tangent
/// plane, giving a tangent-condition representative of the dual class.
/// Rotation preserves pointwise norms, so the unit normalization carries
/// over; the closedness and co-closedness diagnostics swap roles. The
/// cochain values become projections of the rotated face field and are
/// kept only for scaling diagnostics.
fn rotate_form(mesh: &TriMesh, dec: &DecGeometry, base: &HarmonicForm) -> HarmonicForm {
    let mut face_vectors = Vec::with_capacity(base.face_vectors.len());
    for (f, tri) in mesh.triangles.iter().enumerate() {
        face_vectors.push(face_normal(mesh, tri).cross(&base.face_vectors[f]));
    }
    // Boundary midpoint samples rotate with their adjacent face; the sample
    // order in `reconstruct_form` walks faces in order, so rebuild it the
    // same way.
    let mut boundary_samples = Vec::with_capacity(base.boundary_samples.len());
    let mut cursor = 0usize;
    for tri in &mesh.triangles {
        let n = face_normal(mesh, tri);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if !dec.boundary_edge[dec.edge_index[&edge_key(a, b)]] {
                continue;
            }
            let (sa, sb, v) = base.boundary_samples[cursor];
            debug_assert_eq!((sa, sb), (a, b));
            boundary_samples.push((a, b, n.cross(&v)));
            cursor += 1;
        }
    }
    // Edge projections of the rotated field, averaged over adjacent faces.
    let mut edge_values = vec![0.0; dec.edge_list.len()];
    let mut edge_weight = vec![0usize; dec.edge_list.len()];
    for (f, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let id = dec.edge_index[&edge_key(a, b)];
            let along = mesh.vertices[id_head(dec, id)] - mesh.vertices[id_tail(dec, id)];
            edge_values[id] += face_vectors[f].dot(&along);
            edge_weight[id] += 1;
        }
    }
    for (v, w) in edge_values.iter_mut().zip(&edge_weight) {
        if *w > 0 {
            *v /= *w as f64;
        }
    }
    let boundary_residual =
        boundary_violation(mesh, dec, FormCondition::BoundaryTangent, &face_vectors);
    HarmonicForm {
        edge_values,
        face_vectors,
        boundary_samples,
        closedness_residual: base.coclosedness_residual,
        coclosedness_residual: base.closedness_residual,
        boundary_residual,
    }
}

fn id_tail(dec: &DecGeometry, id: usize) -> usize {
    dec.edge_list[id].0
}

fn id_head(dec: &DecGeometry, id: usize) -> usize {
    dec.edge_list[id].1
}

/// Energies of the test functions built from one harmonic form.
#[derive(Debug, Clone, Serialize)]
pub struct FormEnergyReport {
    /// Sum of the stability energies of the test functions.
    pub lhs: f64,
    /// Boundary closed form −(1/sin θ) ∮ H_wall |ξ|² ds (flat ambient).
    pub rhs: f64,
    pub per_function: Vec<f64>,
    pub relative_gap: f64,
}

/// Form norm and vertex data shared by both test-function families.
struct FormSamples {
    /// ξ interpolated to vertices (Euclidean representation).
    xi_vertex: Vec<V3>,
    /// Unit normal at vertices.
    nu_vertex: Vec<V3>,
}

fn sample_form(imm: &Immersion, form: &HarmonicForm) -> Result<FormSamples> {
    let mesh = &imm.mesh;
    let nv = mesh.vertex_count();
    let mut xi_vertex = vec![V3::zeros(); nv];
    let mut weight = vec![0.0f64; nv];
    for (f, tri) in mesh.triangles.iter().enumerate() {
        let p = [&mesh.vertices[tri[0]], &mesh.vertices[tri[1]], &mesh.vertices[tri[2]]];
        let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
        for &v in tri {
            xi_vertex[v] += form.face_vectors[f] * area;
            weight[v] += area;
        }
    }
    for v in 0..nv {
        if weight[v] > 0.0 {
            xi_vertex[v] /= weight[v];
        }
    }
    // Boundary vertices: face averages sample one mesh layer inward, which
    // biases the Robin term of the energy; the two adjacent boundary-edge
    // midpoint samples straddle the vertex symmetrically instead.
    let mut bd_acc = vec![V3::zeros(); nv];
    let mut bd_count = vec![0usize; nv];
    for &(a, b, v) in &form.boundary_samples {
        bd_acc[a] += v;
        bd_count[a] += 1;
        bd_acc[b] += v;
        bd_count[b] += 1;
    }
    for v in 0..nv {
        if bd_count[v] > 0 {
            xi_vertex[v] = bd_acc[v] / bd_count[v] as f64;
        }
    }
    let nu_vertex: Vec<V3> = match (&imm.patch, &imm.mesh.params) {
        (Some(_), Some(params)) => {
            let mut nus = Vec::with_capacity(nv);
            for p in params {
                nus.push(geometry_at(imm, p[0], p[1])?.nu);
            }
            nus
        }
        _ => estimate_shape(&imm.mesh, imm.space())?.into_iter().map(|s| s.nu).collect(),
    };
    Ok(FormSamples { xi_vertex, nu_vertex })
}

/// Shared driver: evaluate Q on each test function and the boundary closed
/// form on the right side. Flat ambients only.
fn form_energies(
    imm: &Immersion,
    assembly: &StabilityAssembly,
    form: &HarmonicForm,
    functions: &[Vec<f64>],
) -> Result<FormEnergyReport> {
    let per_function: Vec<f64> =
        functions.iter().map(|u| assembly.evaluate_q(u, u)).collect();
    let lhs: f64 = per_function.iter().sum();

    let wall_trace = imm.ambient.boundary_mean_curvature();
    let theta = contact_angle(imm)?;
    let mesh = &imm.mesh;
    // ∮ |ξ|² ds from the unbiased midpoint samples (midpoint quadrature).
    let mut boundary_integral = 0.0;
    for &(a, b, v) in &form.boundary_samples {
        let len = (mesh.vertices[a] - mesh.vertices[b]).norm();
        boundary_integral += len * v.norm_squared();
    }
    let rhs = -wall_trace / theta.sin() * boundary_integral;
    let relative_gap = if rhs.abs() > 1e-300 {
        (lhs / rhs - 1.0).abs()
    } else {
        lhs.abs()
    };
    Ok(FormEnergyReport { lhs, rhs, per_function, relative_gap })
}

fn require_flat(imm: &Immersion, what: &str) -> Result<()> {
    match imm.ambient.space.kind {
        SpaceKind::Euclidean => Ok(()),
        _ => Err(Error::domain(format!(
            "{what} requires a flat ambient: curvature and embedding corrections \
             for curved spaces are not implemented"
        ))),
    }
}

/// Test functions u_ij = ⟨ξ,E_i⟩⟨ν,E_j⟩ − ⟨ξ,E_j⟩⟨ν,E_i⟩ over coordinate
/// pairs, from a harmonic form normal to the boundary. Their summed
/// stability energy equals the boundary closed form up to discretization.
pub fn wedge_test_quantities(
    imm: &Immersion,
    assembly: &StabilityAssembly,
    form: &HarmonicForm,
) -> Result<FormEnergyReport> {
    require_flat(imm, "wedge test functions")?;
    let samples = sample_form(imm, form)?;
    let nv = imm.mesh.vertex_count();
    let mut functions = Vec::with_capacity(3);
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let mut u = vec![0.0; nv];
        for v in 0..nv {
            let xi = &samples.xi_vertex[v];
            let nu = &samples.nu_vertex[v];
            u[v] = xi[i] * nu[j] - xi[j] * nu[i];
        }
        functions.push(u);
    }
    form_energies(imm, assembly, form, &functions)
}

/// Test functions u_i = ⟨ξ,E_i⟩ over coordinates, from a harmonic form
/// tangent to the boundary.
pub fn coordinate_test_quantities(
    imm: &Immersion,
    assembly: &StabilityAssembly,
    form: &HarmonicForm,
) -> Result<FormEnergyReport> {
    require_flat(imm, "coordinate test functions")?;
    let samples = sample_form(imm, form)?;
    let nv = imm.mesh.vertex_count();
    let mut functions = Vec::with_capacity(3);
    for i in 0..3 {
        let mut u = vec![0.0; nv];
        for v in 0..nv {
            u[v] = samples.xi_vertex[v][i];
        }
        functions.push(u);
    }
    form_energies(imm, assembly, form, &functions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::assemble;
    use crate::surface::mesh::torus_with_one_hole;
    use crate::surface::{build_family, SurfaceFamily};

    #[test]
    fn topology_counts_for_the_three_shapes() {
        let disk = build_family(&SurfaceFamily::FlatDisk { height: 0.0 }, 0).unwrap();
        let rep = topology_report(&disk.mesh).unwrap();
        assert_eq!((rep.genus, rep.boundary_components), (0, 1));
        assert_eq!(rep.euler_characteristic, 1);
        assert_eq!(rep.harmonic_dimension, 0);

        let cat = build_family(&SurfaceFamily::Catenoid { waist: None }, 0).unwrap();
        let rep = topology_report(&cat.mesh).unwrap();
        assert_eq!((rep.genus, rep.boundary_components), (0, 2));
        assert_eq!(rep.euler_characteristic, 0);
        assert_eq!(rep.harmonic_dimension, 1);

        let torus = torus_with_one_hole(12);
        let rep = topology_report(&torus).unwrap();
        assert_eq!((rep.genus, rep.boundary_components), (1, 1));
        assert_eq!(rep.euler_characteristic, -1);
        assert_eq!(rep.harmonic_dimension, 2);
    }

    #[test]
    fn closed_meshes_are_rejected() {
        // A full torus grid: no boundary.
        let n = 8usize;
        let idx = |i: usize, j: usize| (i % n) * n + (j % n);
        let mut triangles = Vec::new();
        for i in 0..n {
            for j in 0..n {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let vertices = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let (a, b) = (
                    2.0 * std::f64::consts::PI * i as f64 / n as f64,
                    2.0 * std::f64::consts::PI * j as f64 / n as f64,
                );
                V3::new((2.0 + b.cos()) * a.cos(), (2.0 + b.cos()) * a.sin(), b.sin())
            })
            .collect();
        let closed = TriMesh { vertices, triangles, params: None, domain: None };
        assert!(topology_report(&closed).is_err());
    }

    #[test]
    fn harmonic_dimensions_match_the_topology() {
        let space = AmbientSpace::new(SpaceKind::Euclidean);
        let disk = build_family(&SurfaceFamily::FlatDisk { height: 0.0 }, 0).unwrap();
        let cat = build_family(&SurfaceFamily::Catenoid { waist: None }, 0).unwrap();
        let torus = torus_with_one_hole(12);
        for cond in [FormCondition::BoundaryNormal, FormCondition::BoundaryTangent] {
            let b = harmonic_basis(&disk.mesh, &space, cond).unwrap();
            assert_eq!(b.dimension, 0, "disk {cond:?}: {:?}", b.eigenvalues);
            let b = harmonic_basis(&cat.mesh, &space, cond).unwrap();
            assert_eq!(b.dimension, 1, "annulus {cond:?}: {:?}", b.eigenvalues);
            let b = harmonic_basis(&torus, &space, cond).unwrap();
            assert_eq!(b.dimension, 2, "torus {cond:?}: {:?}", b.eigenvalues);
            // The kernel is exact: the next eigenvalue sits far above it.
            if b.dimension < b.eigenvalues.len() {
                assert!(
                    b.eigenvalues[b.dimension] > 1e3 * b.zero_threshold,
                    "spectral gap collapsed: {:?}",
                    b.eigenvalues
                );
            }
        }
    }

    #[test]
    fn catenoid_forms_follow_the_coordinate_directions() {
        let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 1).unwrap();
        let space = AmbientSpace::new(SpaceKind::Euclidean);
        let c = crate::surface::critical_catenoid_waist();

        // Normal condition: the generator is the differential of the axial
        // coordinate of the ruling, dt with z = c·t.
        let basis = harmonic_basis(&imm.mesh, &space, FormCondition::BoundaryNormal).unwrap();
        assert_eq!(basis.dimension, 1);
        let form = &basis.elements[0];
        assert!(form.closedness_residual < 1e-9, "closed {:.3e}", form.closedness_residual);
        assert!(form.coclosedness_residual < 1e-9, "coclosed {:.3e}", form.coclosedness_residual);
        assert!(form.boundary_residual < 0.2, "bc {:.3e}", form.boundary_residual);
        let mut worst = 0.0f64;
        let mut sign = 0.0f64;
        for (f, tri) in imm.mesh.triangles.iter().enumerate() {
            let centroid: V3 =
                (imm.mesh.vertices[tri[0]] + imm.mesh.vertices[tri[1]] + imm.mesh.vertices[tri[2]])
                    / 3.0;
            let t = centroid.z / c;
            if t.abs() > 0.8 * crate::surface::critical_catenoid_parameter() {
                continue;
            }
            // Euclidean representation of dt on the ruled surface: the
            // tangent along the profile divided by its squared length.
            let phi = centroid.y.atan2(centroid.x);
            let xt = V3::new(c * t.sinh() * phi.cos(), c * t.sinh() * phi.sin(), c);
            let dt_vec = xt / xt.norm_squared();
            let v = &form.face_vectors[f];
            if sign == 0.0 {
                sign = if v.dot(&dt_vec) >= 0.0 { 1.0 } else { -1.0 };
            }
            let scale = v.norm() / dt_vec.norm();
            let dir_err = (v / v.norm() - dt_vec * (sign / dt_vec.norm())).norm();
            worst = worst.max(dir_err);
            let _ = scale;
        }
        assert!(worst < 0.08, "direction error {worst:.3e}");

        // Tangent condition: the generator follows the angular coordinate.
        let basis_t = harmonic_basis(&imm.mesh, &space, FormCondition::BoundaryTangent).unwrap();
        assert_eq!(basis_t.dimension, 1);
        let form_t = &basis_t.elements[0];
        let mut worst_t = 0.0f64;
        let mut sign_t = 0.0f64;
        for (f, tri) in imm.mesh.triangles.iter().enumerate() {
            let centroid: V3 =
                (imm.mesh.vertices[tri[0]] + imm.mesh.vertices[tri[1]] + imm.mesh.vertices[tri[2]])
                    / 3.0;
            let t = centroid.z / c;
            if t.abs() > 0.8 * crate::surface::critical_catenoid_parameter() {
                continue;
            }
            let phi = centroid.y.atan2(centroid.x);
            let xphi = V3::new(-c * t.cosh() * phi.sin(), c * t.cosh() * phi.cos(), 0.0);
            let dphi_vec = xphi / xphi.norm_squared();
            let v = &form_t.face_vectors[f];
            if sign_t == 0.0 {
                sign_t = if v.dot(&dphi_vec) >= 0.0 { 1.0 } else { -1.0 };
            }
            let dir_err = (v / v.norm() - dphi_vec * (sign_t / dphi_vec.norm())).norm();
            worst_t = worst_t.max(dir_err);
        }
        assert!(worst_t < 0.08, "angular direction error {worst_t:.3e}");
    }

    #[test]
    fn index_bound_arithmetic() {
        let flat = AmbientBall::new(SpaceKind::Euclidean, 1.0).unwrap();
        let sph = AmbientBall::new(SpaceKind::Spherical, 1.0).unwrap();
        let hyp = AmbientBall::new(SpaceKind::Hyperbolic, 1.0).unwrap();
        let rep = |g: usize, r: usize| TopologyReport {
            vertices: 0,
            edges: 0,
            faces: 0,
            euler_characteristic: 2 - 2 * g as i64 - r as i64,
            genus: g,
            boundary_components: r,
            harmonic_dimension: 2 * g + r - 1,
        };

        let m = index_bounds(&rep(2, 3), &flat, 3);
        assert_eq!(m["index_flat_wedge"].bound, Some(1));
        assert_eq!(m["index_wedge_embedding"].bound, Some(1));
        assert!(!m["index_spherical_coordinate"].applicable);

        let m = index_bounds(&rep(0, 2), &flat, 3);
        assert_eq!(m["index_flat_wedge"].bound, Some(0));

        let m = index_bounds(&rep(2, 3), &sph, 4);
        assert_eq!(m["index_spherical_coordinate"].bound, Some(1));
        assert!(!m["index_flat_wedge"].applicable);

        let m = index_bounds(&rep(5, 4), &hyp, 3);
        assert!(m.values().all(|p| !p.applicable));

        // Large topology drives the flat wedge bound up: dim = 2·7+5−1 = 18,
        // bound = ceil(18/3) − 1 = 5.
        let m = index_bounds(&rep(7, 5), &flat, 3);
        assert_eq!(m["index_flat_wedge"].bound, Some(5));
        assert_eq!(m["index_flat_wedge"].satisfied_by(5), Some(true));
        assert_eq!(m["index_flat_wedge"].satisfied_by(4), Some(false));

        // Stable-topology predicates.
        let m = index_bounds(&rep(1, 2), &flat, 3);
        assert_eq!(m["stable_topology_orthogonal_wall"].admissible, Some(true));
        assert_eq!(m["stable_topology_embedded_boundary"].admissible, Some(true));
        let m = index_bounds(&rep(2, 1), &flat, 3);
        assert_eq!(m["stable_topology_orthogonal_wall"].admissible, Some(false));
        let m = index_bounds(&rep(4, 1), &flat, 3);
        assert_eq!(m["stable_topology_embedded_boundary"].admissible, Some(false));
        let m = index_bounds(&rep(3, 3), &flat, 3);
        assert_eq!(m["stable_topology_embedded_boundary"].admissible, Some(true));
    }

    #[test]
    fn catenoid_wedge_energies_match_the_boundary_form() {
        let space = AmbientSpace::new(SpaceKind::Euclidean);
        let mut rhs_by_level = Vec::new();
        for level in [1usize, 2] {
            let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, level).unwrap();
            let assembly = assemble(&imm).unwrap();
            let basis = harmonic_basis(&imm.mesh, &space, FormCondition::BoundaryNormal).unwrap();
            let rep = wedge_test_quantities(&imm, &assembly, &basis.elements[0]).unwrap();
            assert!(rep.lhs < 0.0, "lhs {:.6}", rep.lhs);
            assert!(rep.rhs < 0.0, "rhs {:.6}", rep.rhs);
            assert!(
                rep.relative_gap < 0.05,
                "gap {:.4} (lhs {:.6} rhs {:.6})",
                rep.relative_gap,
                rep.lhs,
                rep.rhs
            );

            let basis_t =
                harmonic_basis(&imm.mesh, &space, FormCondition::BoundaryTangent).unwrap();
            let rep_t = coordinate_test_quantities(&imm, &assembly, &basis_t.elements[0]).unwrap();
            assert!(rep_t.lhs < 0.0, "tangent lhs {:.6}", rep_t.lhs);
            assert!(rep_t.rhs < 0.0, "tangent rhs {:.6}", rep_t.rhs);
            assert!(rep_t.relative_gap < 0.05, "tangent gap {:.4}", rep_t.relative_gap);
            // Rotation preserves pointwise norms, so both families see the
            // same boundary form.
            assert!(
                (rep_t.rhs - rep.rhs).abs() < 1e-6 * rep.rhs.abs(),
                "boundary forms differ: {:.8} vs {:.8}",
                rep_t.rhs,
                rep.rhs
            );
            rhs_by_level.push(rep.rhs);
        }

        // Analytic value of the boundary form: the unit-norm generator on
        // the critical catenoid gives ∮|ξ|² ds = 1/(T c cosh T) = 1 over
        // both circles combined, so the closed form is exactly −2. The
        // discrete boundary samples sit half a mesh layer inside the rim,
        // a first-order bias, so extrapolate across the two levels.
        let extrapolated = 2.0 * rhs_by_level[1] - rhs_by_level[0];
        assert!(
            (extrapolated + 2.0).abs() < 0.05,
            "extrapolated rhs {extrapolated:.4} (levels {:?})",
            rhs_by_level
        );
        // And the bias itself must shrink under refinement.
        assert!(
            (rhs_by_level[1] + 2.0).abs() < 0.75 * (rhs_by_level[0] + 2.0).abs(),
            "boundary bias not shrinking: {:?}",
            rhs_by_level
        );
    }

    #[test]
    fn energies_scale_quadratically_and_reject_curved_ambients() {
        let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 0).unwrap();
        let space = AmbientSpace::new(SpaceKind::Euclidean);
        let assembly = assemble(&imm).unwrap();
        let basis = harmonic_basis(&imm.mesh, &space, FormCondition::BoundaryNormal).unwrap();
        let form = &basis.elements[0];
        let rep = wedge_test_quantities(&imm, &assembly, form).unwrap();
        let mut doubled = form.clone();
        for v in doubled.edge_values.iter_mut() {
            *v *= 2.0;
        }
        for v in doubled.face_vectors.iter_mut() {
            *v *= 2.0;
        }
        for s in doubled.boundary_samples.iter_mut() {
            s.2 *= 2.0;
        }
        let rep2 = wedge_test_quantities(&imm, &assembly, &doubled).unwrap();
        assert!((rep2.lhs - 4.0 * rep.lhs).abs() < 1e-9 * rep.lhs.abs().max(1.0));
        assert!((rep2.rhs - 4.0 * rep.rhs).abs() < 1e-12 * rep.rhs.abs().max(1.0));

        let hyp = build_family(&SurfaceFamily::GeodesicDiskHyp { radius: 1.0, offset: 0.0 }, 0)
            .unwrap();
        let hyp_assembly = assemble(&hyp).unwrap();
        assert!(wedge_test_quantities(&hyp, &hyp_assembly, form).is_err());
        assert!(coordinate_test_quantities(&hyp, &hyp_assembly, form).is_err());
    }
}
