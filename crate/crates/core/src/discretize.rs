//! Finite-element assembly of the stability quadratic form
//!
//!   Q(φ, ψ) = ∫_M ⟨∇φ, ∇ψ⟩ − (|h|² + Ric(ν,ν)) φψ dA − ∮_{∂M} q φψ ds
//!
//! over piecewise-linear vertex functions, together with the interior mass
//! matrix, boundary mass matrix, and the wetting constraint functional
//! c(φ) = ∮ φ ds.
//!
//! Chart-backed surfaces assemble in parameter space with the exact metric at
//! the quadrature nodes.  On unit-disk domains the ring of cells touching the
//! boundary is mapped onto the curved parameter boundary (a blended mapping
//! conforming with the interior cells and with the boundary-arc quadrature),
//! so the discrete space is a genuine subspace of H¹(M) and Rayleigh–Ritz
//! eigenvalues bound the continuous ones from above.  Imported meshes fall
//! back to the intrinsic cone metric (cotangent weights on geodesic edge
//! lengths) with vertex-sampled coefficients.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, triangle_rule_deg5};
use crate::sparse::{Csr, Triplets};
use crate::spaceform::V3;
use crate::surface::{
    boundary_frame, boundary_frame_at, boundary_parameter_of_vertex, geom_jet, DomainKind,
    Immersion,
};

/// Interior mass treatment for the imported-mesh path (the parametric path
/// always integrates the consistent mass exactly).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassModel {
    Consistent,
    Lumped,
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub mass: MassModel,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { mass: MassModel::Consistent }
    }
}

/// Assembled operators of the stability problem on vertex unknowns.
#[derive(Debug, Clone)]
pub struct StabilityAssembly {
    pub n: usize,
    /// Dirichlet energy ∫ ⟨∇φ_i, ∇φ_j⟩ dA.
    pub stiffness: Csr,
    /// Potential term ∫ (|h|² + Ric(ν,ν)) φ_i φ_j dA.
    pub potential: Csr,
    /// Robin boundary term ∮ q φ_i φ_j ds.
    pub robin: Csr,
    /// Interior mass ∫ φ_i φ_j dA.
    pub mass: Csr,
    /// Boundary mass ∮ φ_i φ_j ds.
    pub boundary_mass: Csr,
    /// Wetting constraint c_i = ∮ φ_i ds (row sums of the boundary mass).
    pub constraint: Vec<f64>,
    pub boundary_vertices: Vec<usize>,
    pub analytic: bool,
}

impl StabilityAssembly {
    /// Q(a, b) = aᵀ(K − P − B_q)b.
    pub fn evaluate_q(&self, a: &[f64], b: &[f64]) -> f64 {
        self.stiffness.quadratic(a, b) - self.potential.quadratic(a, b)
            - self.robin.quadratic(a, b)
    }

    /// Wetting constraint value c(a) = ∮ a ds.
    pub fn constraint_value(&self, a: &[f64]) -> f64 {
        self.constraint.iter().zip(a).map(|(c, x)| c * x).sum()
    }

    /// The full form matrix K − P − B_q.
    pub fn q_matrix(&self) -> Csr {
        Csr::linear_combination(&[(&self.stiffness, 1.0), (&self.potential, -1.0), (
            &self.robin,
            -1.0,
        )])
    }

    pub fn total_area(&self) -> f64 {
        let ones = vec![1.0; self.n];
        self.mass.quadratic(&ones, &ones)
    }

    pub fn total_boundary_length(&self) -> f64 {
        let ones = vec![1.0; self.n];
        self.boundary_mass.quadratic(&ones, &ones)
    }
}

pub fn assemble(imm: &Immersion) -> Result<StabilityAssembly> {
    assemble_with(imm, &AssemblyOptions::default())
}

pub fn assemble_with(imm: &Immersion, opts: &AssemblyOptions) -> Result<StabilityAssembly> {
    if imm.patch.is_some() && imm.mesh.params.is_some() {
        assemble_parametric(imm)
    } else {
        assemble_cone(imm, opts)
    }
}

/// Unwrap the periodic coordinate of a triangle's parameters so they are
/// contiguous (strip domains store φ in [0, 2π)).
fn unwrap_periodic(mut ps: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &ps {
        lo = lo.min(p[1]);
        hi = hi.max(p[1]);
    }
    if hi - lo > std::f64::consts::PI {
        for p in ps.iter_mut() {
            if p[1] < std::f64::consts::PI {
                p[1] += 2.0 * std::f64::consts::PI;
            }
        }
    }
    ps
}

fn assemble_parametric(imm: &Immersion) -> Result<StabilityAssembly> {
    let patch = imm.patch.as_ref().unwrap();
    let params = imm.mesh.params.as_ref().unwrap();
    let space = imm.space();
    let n = imm.mesh.vertex_count();
    let mut k_t = Triplets::new(n);
    let mut p_t = Triplets::new(n);
    let mut m_t = Triplets::new(n);

    let on_circle = |p: &[f64; 2]| p[0] * p[0] + p[1] * p[1] > 1.0 - 1e-9;
    let is_disk = matches!(imm.mesh.domain, Some(DomainKind::UnitDisk));
    let tri_rule = triangle_rule_deg5();
    let (g1, w1) = gauss_legendre(4);
    // Tensor Gauss on [0,1]².
    let unit: Vec<(f64, f64)> =
        g1.iter().zip(&w1).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();

    for tri in &imm.mesh.triangles {
        let mut idx = *tri;
        let mut ps = [params[idx[0]], params[idx[1]], params[idx[2]]];
        if matches!(imm.mesh.domain, Some(DomainKind::PeriodicStrip { .. })) {
            ps = unwrap_periodic(ps);
        }
        let n_bd = ps.iter().filter(|p| is_disk && on_circle(p)).count();
        if n_bd == 2 {
            // Rotate so the interior vertex is first.
            while on_circle(&ps[0]) {
                ps.rotate_left(1);
                idx.rotate_left(1);
            }
            assemble_blended_cell(imm, patch, &idx, &ps, &unit, &mut k_t, &mut p_t, &mut m_t)?;
        } else {
            assemble_straight_cell(imm, patch, &idx, &ps, &tri_rule, &mut k_t, &mut p_t, &mut m_t)?;
        }
        let _ = space;
    }

    // Boundary terms: exact arcs between consecutive boundary vertices.
    let loops = imm.mesh.boundary_loops()?;
    let mut bq_t = Triplets::new(n);
    let mut bm_t = Triplets::new(n);
    let (gb, wb) = gauss_legendre(8);
    let mut boundary_vertices = Vec::new();
    for lp in &loops {
        boundary_vertices.extend_from_slice(lp);
        let m = lp.len();
        for e in 0..m {
            let (vi, vj) = (lp[e], lp[(e + 1) % m]);
            let (ci, ti) = boundary_parameter_of_vertex(imm, vi)?;
            let (cj, tj) = boundary_parameter_of_vertex(imm, vj)?;
            if ci != cj {
                return Err(Error::mesh("boundary edge spans two components"));
            }
            // Principal-value gap τ_j − τ_i in (−π, π).
            let mut dt = tj - ti;
            while dt > std::f64::consts::PI {
                dt -= 2.0 * std::f64::consts::PI;
            }
            while dt < -std::f64::consts::PI {
                dt += 2.0 * std::f64::consts::PI;
            }
            if dt == 0.0 {
                return Err(Error::mesh("zero-length boundary arc"));
            }
            let mut eq = [[0.0f64; 2]; 2];
            let mut em = [[0.0f64; 2]; 2];
            for (xg, wg) in gb.iter().zip(&wb) {
                let x = 0.5 * (xg + 1.0);
                let w = 0.5 * wg * dt.abs();
                let s = boundary_frame_at(&imm.ambient, patch, ci, ti + x * dt)?;
                let basis = [1.0 - x, x];
                for a in 0..2 {
                    for b in 0..2 {
                        let nn = w * s.speed * basis[a] * basis[b];
                        em[a][b] += nn;
                        eq[a][b] += nn * s.robin_coefficient;
                    }
                }
            }
            let vv = [vi, vj];
            for a in 0..2 {
                for b in a..2 {
                    bq_t.push_sym(vv[a], vv[b], 0.5 * (eq[a][b] + eq[b][a]));
                    bm_t.push_sym(vv[a], vv[b], 0.5 * (em[a][b] + em[b][a]));
                }
            }
        }
    }
    boundary_vertices.sort_unstable();

    let boundary_mass = bm_t.to_csr();
    let constraint = boundary_mass.row_sums();
    Ok(StabilityAssembly {
        n,
        stiffness: k_t.to_csr(),
        potential: p_t.to_csr(),
        robin: bq_t.to_csr(),
        mass: m_t.to_csr(),
        boundary_mass,
        constraint,
        boundary_vertices,
        analytic: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble_straight_cell(
    imm: &Immersion,
    patch: &crate::surface::Patch,
    idx: &[usize; 3],
    ps: &[[f64; 2]; 3],
    rule: &[([f64; 3], f64)],
    k_t: &mut Triplets,
    p_t: &mut Triplets,
    m_t: &mut Triplets,
) -> Result<()> {
    let d1 = [ps[1][0] - ps[0][0], ps[1][1] - ps[0][1]];
    let d2 = [ps[2][0] - ps[0][0], ps[2][1] - ps[0][1]];
    let det = d1[0] * d2[1] - d1[1] * d2[0];
    if det <= 0.0 {
        return Err(Error::mesh("parameter triangle is degenerate or flipped"));
    }
    let area = 0.5 * det;
    // ∇ξ, ∇η rows of the inverse affine Jacobian.
    let gxi = [d2[1] / det, -d2[0] / det];
    let geta = [-d1[1] / det, d1[0] / det];
    let grads = [
        [-gxi[0] - geta[0], -gxi[1] - geta[1]],
        gxi,
        geta,
    ];
    let mut ke = [[0.0f64; 3]; 3];
    let mut pe = [[0.0f64; 3]; 3];
    let mut me = [[0.0f64; 3]; 3];
    for (bary, w) in rule {
        let (u, v) = (
            bary[0] * ps[0][0] + bary[1] * ps[1][0] + bary[2] * ps[2][0],
            bary[0] * ps[0][1] + bary[1] * ps[1][1] + bary[2] * ps[2][1],
        );
        let geo = geom_jet(imm.space(), &patch.jet2(u, v))?;
        let root = geo.det_metric.sqrt();
        let ginv = [
            [geo.metric[1][1] / geo.det_metric, -geo.metric[0][1] / geo.det_metric],
            [-geo.metric[1][0] / geo.det_metric, geo.metric[0][0] / geo.det_metric],
        ];
        let pot = geo.jacobi_potential;
        let coef = w * area * root;
        for a in 0..3 {
            for b in a..3 {
                let grad_pair = grads[a][0] * (ginv[0][0] * grads[b][0] + ginv[0][1] * grads[b][1])
                    + grads[a][1] * (ginv[1][0] * grads[b][0] + ginv[1][1] * grads[b][1]);
                ke[a][b] += coef * grad_pair;
                let nn = coef * bary[a] * bary[b];
                me[a][b] += nn;
                pe[a][b] += nn * pot;
            }
        }
    }
    for a in 0..3 {
        for b in a..3 {
            k_t.push_sym(idx[a], idx[b], ke[a][b]);
            p_t.push_sym(idx[a], idx[b], pe[a][b]);
            m_t.push_sym(idx[a], idx[b], me[a][b]);
        }
    }
    Ok(())
}

/// Boundary cell of a unit-disk domain: vertex 0 interior, vertices 1 and 2
/// consecutive on the parameter circle.  The cell is the image of
/// p(s, t) = v0 + s(c(t) − v0) with c(t) the circular arc from v1 to v2, and
/// carries the basis {1 − s, s(1 − t), s t}, which is linear along the two
/// straight edges (conforming with interior cells) and linear in arc angle
/// along the boundary (conforming with the boundary-arc quadrature).
#[allow(clippy::too_many_arguments)]
fn assemble_blended_cell(
    imm: &Immersion,
    patch: &crate::surface::Patch,
    idx: &[usize; 3],
    ps: &[[f64; 2]; 3],
    unit: &[(f64, f64)],
    k_t: &mut Triplets,
    p_t: &mut Triplets,
    m_t: &mut Triplets,
) -> Result<()> {
    let v0 = ps[0];
    let b1 = ps[1][1].atan2(ps[1][0]);
    let mut db = ps[2][1].atan2(ps[2][0]) - b1;
    db = db.rem_euclid(2.0 * std::f64::consts::PI);
    if !(db > 0.0 && db < std::f64::consts::FRAC_PI_2) {
        return Err(Error::mesh(format!("boundary cell arc spans {db:.3} rad")));
    }
    let mut ke = [[0.0f64; 3]; 3];
    let mut pe = [[0.0f64; 3]; 3];
    let mut me = [[0.0f64; 3]; 3];
    for &(t, wt) in unit {
        let beta = b1 + t * db;
        let c = [beta.cos(), beta.sin()];
        let cp = [-beta.sin() * db, beta.cos() * db];
        for &(s, ws) in unit {
            let u = v0[0] + s * (c[0] - v0[0]);
            let v = v0[1] + s * (c[1] - v0[1]);
            // Jacobian columns ∂p/∂s, ∂p/∂t.
            let js = [c[0] - v0[0], c[1] - v0[1]];
            let jt = [s * cp[0], s * cp[1]];
            let det = js[0] * jt[1] - js[1] * jt[0];
            if det <= 0.0 {
                return Err(Error::mesh("blended boundary cell folds over"));
            }
            // Reference gradients of {1−s, s(1−t), st} in (s,t).
            let gref = [[-1.0, 0.0], [1.0 - t, -s], [t, s]];
            // ∇_p N = J⁻ᵀ ∇_st N.
            let jinv_t = [[jt[1] / det, -js[1] / det], [-jt[0] / det, js[0] / det]];
            let mut gp = [[0.0f64; 2]; 3];
            for a in 0..3 {
                gp[a][0] = jinv_t[0][0] * gref[a][0] + jinv_t[0][1] * gref[a][1];
                gp[a][1] = jinv_t[1][0] * gref[a][0] + jinv_t[1][1] * gref[a][1];
            }
            let nvals = [1.0 - s, s * (1.0 - t), s * t];
            let geo = geom_jet(imm.space(), &patch.jet2(u, v))?;
            let root = geo.det_metric.sqrt();
            let ginv = [
                [geo.metric[1][1] / geo.det_metric, -geo.metric[0][1] / geo.det_metric],
                [-geo.metric[1][0] / geo.det_metric, geo.metric[0][0] / geo.det_metric],
            ];
            let coef = ws * wt * det * root;
            let pot = geo.jacobi_potential;
            for a in 0..3 {
                for b in a..3 {
                    let grad_pair = gp[a][0] * (ginv[0][0] * gp[b][0] + ginv[0][1] * gp[b][1])
                        + gp[a][1] * (ginv[1][0] * gp[b][0] + ginv[1][1] * gp[b][1]);
                    ke[a][b] += coef * grad_pair;
                    let nn = coef * nvals[a] * nvals[b];
                    me[a][b] += nn;
                    pe[a][b] += nn * pot;
                }
            }
        }
    }
    for a in 0..3 {
        for b in a..3 {
            k_t.push_sym(idx[a], idx[b], ke[a][b]);
            p_t.push_sym(idx[a], idx[b], pe[a][b]);
            m_t.push_sym(idx[a], idx[b], me[a][b]);
        }
    }
    Ok(())
}

/// Imported-mesh assembly: cotangent stiffness on the intrinsic cone metric,
/// vertex-sampled potential and Robin data, trapezoid boundary rule.
fn assemble_cone(imm: &Immersion, opts: &AssemblyOptions) -> Result<StabilityAssembly> {
    use crate::surface::geodesic_edge_length;
    let n = imm.mesh.vertex_count();
    let space = imm.space();
    let shape = crate::surface::shape_data(imm)?;
    let mut k_t = Triplets::new(n);
    let mut p_t = Triplets::new(n);
    let mut m_t = Triplets::new(n);
    let mut lumped = vec![0.0f64; n];
    for t in &imm.mesh.triangles {
        let xs = [
            &imm.mesh.vertices[t[0]],
            &imm.mesh.vertices[t[1]],
            &imm.mesh.vertices[t[2]],
        ];
        let l = [
            geodesic_edge_length(space, xs[1], xs[2]),
            geodesic_edge_length(space, xs[2], xs[0]),
            geodesic_edge_length(space, xs[0], xs[1]),
        ];
        let sp = 0.5 * (l[0] + l[1] + l[2]);
        let area2 = (sp * (sp - l[0]) * (sp - l[1]) * (sp - l[2])).max(1e-300);
        let area = area2.sqrt();
        // cot of the angle at vertex a (opposite edge a).
        let cot = |a: usize| {
            let (la, lb, lc) = (l[a], l[(a + 1) % 3], l[(a + 2) % 3]);
            (lb * lb + lc * lc - la * la) / (4.0 * area)
        };
        for a in 0..3 {
            let (i, j) = (t[(a + 1) % 3], t[(a + 2) % 3]);
            let w = 0.5 * cot(a);
            k_t.push_sym(i, j, -w);
            k_t.push(i, i, w);
            k_t.push(j, j, w);
        }
        for a in 0..3 {
            lumped[t[a]] += area / 3.0;
            match opts.mass {
                MassModel::Consistent => {
                    m_t.push(t[a], t[a], area / 6.0);
                    m_t.push_sym(t[a], t[(a + 1) % 3], area / 12.0);
                }
                MassModel::Lumped => m_t.push(t[a], t[a], area / 3.0),
            }
        }
    }
    for (v, s) in shape.samples.iter().enumerate() {
        p_t.push(v, v, s.jacobi_potential * lumped[v]);
    }

    let frame = boundary_frame(imm)?;
    let mut bq_t = Triplets::new(n);
    let mut bm_t = Triplets::new(n);
    let mut boundary_vertices = Vec::new();
    let loops = imm.mesh.boundary_loops()?;
    for (lp, samples) in loops.iter().zip(&frame.loops) {
        boundary_vertices.extend_from_slice(lp);
        let m = lp.len();
        for i in 0..m {
            let (vi, vj) = (lp[i], lp[(i + 1) % m]);
            let len = geodesic_edge_length(space, &imm.mesh.vertices[vi], &imm.mesh.vertices[vj]);
            for (v, s) in [(vi, &samples[i]), (vj, &samples[(i + 1) % m])] {
                bm_t.push(v, v, 0.5 * len);
                bq_t.push(v, v, 0.5 * len * s.robin_coefficient);
            }
        }
    }
    boundary_vertices.sort_unstable();
    let boundary_mass = bm_t.to_csr();
    let constraint = boundary_mass.row_sums();
    Ok(StabilityAssembly {
        n,
        stiffness: k_t.to_csr(),
        potential: p_t.to_csr(),
        robin: bq_t.to_csr(),
        mass: m_t.to_csr(),
        boundary_mass,
        constraint,
        boundary_vertices,
        analytic: false,
    })
}

/// Write a symmetric sparse matrix in Matrix Market coordinate format.
pub fn write_matrix_market(m: &Csr, path: &Path) -> Result<()> {
    if m.asymmetry() != 0.0 {
        return Err(Error::argument("matrix market export expects a symmetric matrix"));
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate real symmetric")?;
    let mut entries = Vec::new();
    for i in 0..m.n {
        for k in m.indptr[i]..m.indptr[i + 1] {
            let j = m.indices[k];
            if j <= i {
                entries.push((i + 1, j + 1, m.vals[k]));
            }
        }
    }
    writeln!(f, "{} {} {}", m.n, m.n, entries.len())?;
    for (i, j, v) in entries {
        writeln!(f, "{i} {j} {v:.17e}")?;
    }
    Ok(())
}

/// Sample an ambient-coordinate function at every vertex (convenience for
/// building test vectors for `evaluate_q`).
pub fn vertex_values(imm: &Immersion, f: impl Fn(&V3) -> f64) -> Vec<f64> {
    imm.mesh.vertices.iter().map(f).collect()
}
