//! Triangle meshes in model coordinates: structured meshers for the analytic
//! families, manifold/topology queries, OFF/OBJ exchange, and per-vertex
//! shape estimation for imported meshes.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spaceform::{AmbientSpace, V3};
use crate::surface::patch::{DomainKind, Patch};

/// Oriented triangle mesh with optional parameter coordinates (present when
/// the mesh was sampled from an analytic patch).
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<V3>,
    pub triangles: Vec<[usize; 3]>,
    /// Per-vertex parameter coordinates and the domain they live in.
    pub params: Option<Vec<[f64; 2]>>,
    pub domain: Option<DomainKind>,
}

impl TriMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Undirected edges with incident triangle counts, sorted.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *m.entry(key).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_counts().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }

    /// Directed boundary edges a→b (edges whose reverse never occurs).
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut directed = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        let mut out = Vec::new();
        for (&(a, b), _) in directed.iter() {
            if !directed.contains_key(&(b, a)) {
                out.push((a, b));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.vertex_count()];
        for (a, b) in self.boundary_edges() {
            f[a] = true;
            f[b] = true;
        }
        f
    }

    /// Ordered boundary loops, each a cyclic vertex list following the
    /// orientation induced by the triangles.
    pub fn boundary_loops(&self) -> Result<Vec<Vec<usize>>> {
        let edges = self.boundary_edges();
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &edges {
            if next.insert(a, b).is_some() {
                return Err(Error::mesh(format!("boundary branches at vertex {a}")));
            }
        }
        let mut seen: HashMap<usize, bool> = HashMap::new();
        let mut loops = Vec::new();
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        for s in starts {
            if *seen.get(&s).unwrap_or(&false) {
                continue;
            }
            let mut cycle = vec![s];
            seen.insert(s, true);
            let mut cur = next[&s];
            while cur != s {
                cycle.push(cur);
                seen.insert(cur, true);
                cur = *next
                    .get(&cur)
                    .ok_or_else(|| Error::mesh(format!("open boundary chain at vertex {cur}")))?;
            }
            loops.push(cycle);
        }
        Ok(loops)
    }

    /// Full manifold check: edge multiplicity ≤ 2, consistent orientation,
    /// no isolated vertices, single fan (or half-fan) per vertex.
    pub fn check_manifold(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::mesh("mesh has no triangles"));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::mesh(format!("triangle {i} is degenerate: {t:?}")));
            }
            for &v in t {
                if v >= self.vertex_count() {
                    return Err(Error::mesh(format!("triangle {i} references vertex {v}")));
                }
            }
        }
        let mut directed = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                *directed.entry(e).or_insert(0usize) += 1;
            }
        }
        for (&(a, b), &c) in directed.iter() {
            if c > 1 {
                return Err(Error::mesh(format!(
                    "directed edge ({a},{b}) in {c} triangles: inconsistent orientation or non-manifold edge"
                )));
            }
        }
        // Vertex fans: incident triangles must form one edge-connected component.
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertex_count()];
        for (i, t) in self.triangles.iter().enumerate() {
            for &v in t {
                incident[v].push(i);
            }
        }
        for (v, tris) in incident.iter().enumerate() {
            if tris.is_empty() {
                return Err(Error::mesh(format!("isolated vertex {v}")));
            }
            // Connect triangles sharing an edge through v.
            let mut comp = vec![usize::MAX; tris.len()];
            let other = |ti: usize| -> [usize; 2] {
                let t = self.triangles[ti];
                let mut o = [0usize; 2];
                let mut k = 0;
                for &w in &t {
                    if w != v {
                        o[k] = w;
                        k += 1;
                    }
                }
                o
            };
            let mut stack = vec![0usize];
            comp[0] = 0;
            while let Some(i) = stack.pop() {
                let oi = other(tris[i]);
                for j in 0..tris.len() {
                    if comp[j] == usize::MAX {
                        let oj = other(tris[j]);
                        if oi.iter().any(|a| oj.contains(a)) {
                            comp[j] = 0;
                            stack.push(j);
                        }
                    }
                }
            }
            if comp.iter().any(|&c| c == usize::MAX) {
                return Err(Error::mesh(format!("vertex {v} has a disconnected triangle fan")));
            }
        }
        Ok(())
    }

    /// Genus from χ = 2 − 2g − r for an orientable surface with r boundary
    /// components.
    pub fn genus(&self) -> Result<usize> {
        let r = self.boundary_loops()?.len();
        if r == 0 {
            return Err(Error::mesh("closed mesh: the toolkit analyses surfaces with boundary"));
        }
        let chi = self.euler_characteristic();
        let two_g = 2 - chi - r as i64;
        if two_g < 0 || two_g % 2 != 0 {
            return Err(Error::mesh(format!(
                "inconsistent topology: χ = {chi}, r = {r} gives 2g = {two_g}"
            )));
        }
        Ok((two_g / 2) as usize)
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m = 0.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m = m.max((self.vertices[a] - self.vertices[b]).norm());
            }
        }
        m
    }
}

/// Structured disk mesh: `rings` concentric hexagonal rings, ring k holding
/// 6k vertices at parameter radius k/rings; the outer ring lies exactly on
/// the unit parameter circle.  V = 1 + 3·rings·(rings+1).
pub fn disk_mesh_params(rings: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    assert!(rings >= 1);
    let mut params: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut start = vec![0usize; rings + 1]; // start index of each ring
    start[0] = 0;
    for k in 1..=rings {
        start[k] = params.len();
        let n = 6 * k;
        let rho = k as f64 / rings as f64;
        for j in 0..n {
            let beta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            params.push([rho * beta.cos(), rho * beta.sin()]);
        }
    }
    let mut tris = Vec::new();
    // Center fan.
    for j in 0..6usize {
        tris.push([0, start[1] + j, start[1] + (j + 1) % 6]);
    }
    // Ring k−1 (n1 vertices) to ring k (n2 = n1 + 6): two-pointer merge by
    // exact angle fractions (i+1)/n1 vs (j+1)/n2.
    for k in 2..=rings {
        let (n1, n2) = (6 * (k - 1), 6 * k);
        let (s1, s2) = (start[k - 1], start[k]);
        let (mut i, mut j) = (0usize, 0usize);
        while i < n1 || j < n2 {
            let adv_outer = if j >= n2 {
                false
            } else if i >= n1 {
                true
            } else {
                // Advance the pointer whose next vertex has the smaller angle.
                (j + 1) * n1 <= (i + 1) * n2
            };
            if adv_outer {
                tris.push([s1 + i % n1, s2 + j, s2 + (j + 1) % n2]);
                j += 1;
            } else {
                tris.push([s1 + i % n1, s2 + j % n2, s1 + (i + 1) % n1]);
                i += 1;
            }
        }
    }
    (params, tris)
}

/// Mesh an analytic patch with a unit-disk domain.
pub fn mesh_disk_patch(patch: &Patch, rings: usize) -> TriMesh {
    let (params, triangles) = disk_mesh_params(rings);
    let vertices = params.iter().map(|p| patch.position(p[0], p[1])).collect();
    TriMesh { vertices, triangles, params: Some(params), domain: Some(DomainKind::UnitDisk) }
}

/// Mesh a periodic-strip patch: n_t samples along t (endpoints on the two
/// boundary circles), n_phi around the period.
pub fn mesh_strip_patch(patch: &Patch, n_t: usize, n_phi: usize) -> TriMesh {
    assert!(n_t >= 2 && n_phi >= 3);
    let (t_min, t_max) = match patch.domain() {
        DomainKind::PeriodicStrip { t_min, t_max } => (t_min, t_max),
        _ => panic!("strip mesher needs a periodic-strip patch"),
    };
    let mut params = Vec::with_capacity(n_t * n_phi);
    for i in 0..n_t {
        let t = t_min + (t_max - t_min) * i as f64 / (n_t - 1) as f64;
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            params.push([t, phi]);
        }
    }
    let idx = |i: usize, j: usize| i * n_phi + (j % n_phi);
    let mut triangles = Vec::with_capacity(2 * (n_t - 1) * n_phi);
    for i in 0..(n_t - 1) {
        for j in 0..n_phi {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let vertices = params.iter().map(|p| patch.position(p[0], p[1])).collect();
    TriMesh {
        vertices,
        triangles,
        params: Some(params),
        domain: Some(DomainKind::PeriodicStrip { t_min, t_max }),
    }
}

/// Flat torus grid mesh with one vertex star removed: genus 1, one boundary
/// component, χ = −1.  Used as a topology test fixture.
pub fn torus_with_one_hole(n: usize) -> TriMesh {
    assert!(n >= 4);
    let idx = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut triangles = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let keep = |t: &[usize; 3]| !t.contains(&0);
            let t1 = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)];
            let t2 = [idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)];
            if keep(&t1) {
                triangles.push(t1);
            }
            if keep(&t2) {
                triangles.push(t2);
            }
        }
    }
    // Embed as a torus of radii (2, 1) — positions only matter for I/O tests.
    // Vertex 0 no longer appears; compact it away.
    let mut vertices = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            let (a, b) = (
                2.0 * std::f64::consts::PI * i as f64 / n as f64,
                2.0 * std::f64::consts::PI * j as f64 / n as f64,
            );
            vertices.push(V3::new(
                (2.0 + b.cos()) * a.cos(),
                (2.0 + b.cos()) * a.sin(),
                b.sin(),
            ));
        }
    }
    for t in triangles.iter_mut() {
        for v in t.iter_mut() {
            *v -= 1;
        }
    }
    TriMesh { vertices, triangles, params: None, domain: None }
}

/// Write OFF, optionally appending per-vertex scalar columns to vertex lines.
pub fn write_off(mesh: &TriMesh, path: &Path, scalar_columns: &[&[f64]]) -> Result<()> {
    for col in scalar_columns {
        if col.len() != mesh.vertex_count() {
            return Err(Error::argument("scalar column length does not match vertex count"));
        }
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "OFF")?;
    writeln!(f, "{} {} 0", mesh.vertex_count(), mesh.triangle_count())?;
    for (i, v) in mesh.vertices.iter().enumerate() {
        write!(f, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z)?;
        for col in scalar_columns {
            write!(f, " {:.17e}", col[i])?;
        }
        writeln!(f)?;
    }
    for t in &mesh.triangles {
        writeln!(f, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Read OFF; extra per-vertex floats come back as scalar columns.
pub fn read_off(path: &Path) -> Result<(TriMesh, Vec<Vec<f64>>)> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut tokens: Vec<String> = Vec::new();
    let mut vertex_lines: Vec<Vec<f64>> = Vec::new();
    let mut lines = f.lines();
    let mut header_seen = false;
    let (mut nv, mut nf) = (0usize, 0usize);
    let mut counts_seen = false;
    while let Some(line) = lines.next() {
        let line = line?;
        let s = line.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if !header_seen {
            if s != "OFF" {
                return Err(Error::mesh("not an OFF file (missing header)"));
            }
            header_seen = true;
            continue;
        }
        if !counts_seen {
            let c: Vec<&str> = s.split_whitespace().collect();
            if c.len() < 2 {
                return Err(Error::mesh("OFF counts line malformed"));
            }
            nv = c[0].parse().map_err(|_| Error::mesh("bad vertex count"))?;
            nf = c[1].parse().map_err(|_| Error::mesh("bad face count"))?;
            counts_seen = true;
            continue;
        }
        if vertex_lines.len() < nv {
            let vals: Result<Vec<f64>> = s
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::mesh(format!("bad vertex value {t}"))))
                .collect();
            let vals = vals?;
            if vals.len() < 3 {
                return Err(Error::mesh("vertex line has fewer than 3 coordinates"));
            }
            vertex_lines.push(vals);
            continue;
        }
        tokens.push(s.to_string());
        if tokens.len() == nf {
            break;
        }
    }
    if vertex_lines.len() != nv || tokens.len() != nf {
        return Err(Error::mesh("OFF file truncated"));
    }
    let n_extra = vertex_lines[0].len() - 3;
    let mut vertices = Vec::with_capacity(nv);
    let mut cols = vec![Vec::with_capacity(nv); n_extra];
    for vals in &vertex_lines {
        if vals.len() != 3 + n_extra {
            return Err(Error::mesh("inconsistent vertex attribute counts"));
        }
        vertices.push(V3::new(vals[0], vals[1], vals[2]));
        for (k, c) in cols.iter_mut().enumerate() {
            c.push(vals[3 + k]);
        }
    }
    let mut triangles = Vec::with_capacity(nf);
    for line in &tokens {
        let c: Vec<&str> = line.split_whitespace().collect();
        if c.is_empty() || c[0] != "3" || c.len() < 4 {
            return Err(Error::mesh("only triangle faces are supported"));
        }
        let parse = |t: &str| t.parse::<usize>().map_err(|_| Error::mesh("bad face index"));
        triangles.push([parse(c[1])?, parse(c[2])?, parse(c[3])?]);
    }
    Ok((TriMesh { vertices, triangles, params: None, domain: None }, cols))
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in &mesh.vertices {
        writeln!(f, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(f, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn read_obj(path: &Path) -> Result<TriMesh> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for line in f.lines() {
        let line = line?;
        let s = line.trim();
        let mut it = s.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut p = [0.0f64; 3];
                for c in p.iter_mut() {
                    *c = it
                        .next()
                        .ok_or_else(|| Error::mesh("short v line"))?
                        .parse()
                        .map_err(|_| Error::mesh("bad v value"))?;
                }
                vertices.push(V3::new(p[0], p[1], p[2]));
            }
            Some("f") => {
                let mut p = [0usize; 3];
                for c in p.iter_mut() {
                    let tok = it.next().ok_or_else(|| Error::mesh("short f line"))?;
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| Error::mesh("bad f index"))?;
                    if i < 1 {
                        return Err(Error::mesh("negative/zero OBJ indices unsupported"));
                    }
                    *c = (i - 1) as usize;
                }
                if it.next().is_some() {
                    return Err(Error::mesh("only triangle faces are supported"));
                }
                triangles.push(p);
            }
            _ => {}
        }
    }
    Ok(TriMesh { vertices, triangles, params: None, domain: None })
}

/// Per-vertex Euclidean normals (area-weighted incident-face average).
pub fn vertex_normals_euclidean(mesh: &TriMesh) -> Vec<V3> {
    let mut acc = vec![V3::zeros(); mesh.vertex_count()];
    for t in &mesh.triangles {
        let [a, b, c] = *t;
        let n = (mesh.vertices[b] - mesh.vertices[a]).cross(&(mesh.vertices[c] - mesh.vertices[a]));
        for &v in t {
            acc[v] += n;
        }
    }
    acc.iter()
        .map(|n| {
            let l = n.norm();
            if l < 1e-300 {
                V3::z()
            } else {
                n / l
            }
        })
        .collect()
}

/// Per-vertex shape estimate on an imported mesh: ḡ-unit normal, the ambient
/// metric and second fundamental form restricted to a fitted tangent basis,
/// and the derived invariants.
#[derive(Debug, Clone)]
pub struct ShapeEstimate {
    /// ḡ-unit normal on the side selected by the face orientation.
    pub nu: V3,
    /// Tangent basis of the fitted plane (Euclidean vectors, not orthonormal).
    pub basis: [V3; 2],
    /// Ambient metric ḡ on `basis`.
    pub g_basis: [[f64; 2]; 2],
    /// Ambient second fundamental form on `basis`.
    pub h_basis: [[f64; 2]; 2],
    pub h_norm2: f64,
    pub mean_curvature: f64,
}

impl ShapeEstimate {
    /// h(U, U) for a Euclidean tangent vector U (projected onto the fitted
    /// plane in the least-squares sense).
    pub fn second_form(&self, u: &V3) -> f64 {
        let b = &self.basis;
        // Solve the Euclidean Gram system for the basis coefficients of U.
        let gram = [[b[0].dot(&b[0]), b[0].dot(&b[1])], [b[1].dot(&b[0]), b[1].dot(&b[1])]];
        let rhs = [u.dot(&b[0]), u.dot(&b[1])];
        let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
        let c = [
            (rhs[0] * gram[1][1] - rhs[1] * gram[0][1]) / det,
            (gram[0][0] * rhs[1] - gram[1][0] * rhs[0]) / det,
        ];
        let h = &self.h_basis;
        c[0] * c[0] * h[0][0] + 2.0 * c[0] * c[1] * h[0][1] + c[1] * c[1] * h[1][1]
    }
}

/// Second-fundamental-form estimate at every vertex of an imported mesh:
/// quadratic least-squares fit over the 2-ring in a normal-aligned frame,
/// then the conformal correction to the ambient metric.
pub fn estimate_shape(mesh: &TriMesh, space: &AmbientSpace) -> Result<Vec<ShapeEstimate>> {
    let normals = vertex_normals_euclidean(mesh);
    let nv = mesh.vertex_count();
    let mut one_ring: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if !one_ring[a].contains(&b) {
                one_ring[a].push(b);
            }
            if !one_ring[b].contains(&a) {
                one_ring[b].push(a);
            }
        }
    }
    let mut out = Vec::with_capacity(nv);
    for v in 0..nv {
        // 2-ring sample set.
        let mut nb: Vec<usize> = Vec::new();
        for &u in &one_ring[v] {
            if !nb.contains(&u) {
                nb.push(u);
            }
            for &w in &one_ring[u] {
                if w != v && !nb.contains(&w) {
                    nb.push(w);
                }
            }
        }
        if nb.len() < 5 {
            return Err(Error::mesh(format!("vertex {v} has too few 2-ring neighbours to fit")));
        }
        let n = normals[v];
        // Frame (e1, e2, n).
        let mut e1 = if n.x.abs() < 0.9 { V3::x() } else { V3::y() };
        e1 = (e1 - n * e1.dot(&n)).normalize();
        let e2 = n.cross(&e1);
        let p0 = mesh.vertices[v];
        let m = nb.len();
        let mut a = nalgebra::DMatrix::<f64>::zeros(m, 5);
        let mut rhs = nalgebra::DVector::<f64>::zeros(m);
        for (row, &u) in nb.iter().enumerate() {
            let d = mesh.vertices[u] - p0;
            let (x, y, z) = (d.dot(&e1), d.dot(&e2), d.dot(&n));
            a[(row, 0)] = 0.5 * x * x;
            a[(row, 1)] = x * y;
            a[(row, 2)] = 0.5 * y * y;
            a[(row, 3)] = x;
            a[(row, 4)] = y;
            rhs[row] = z;
        }
        let svd = nalgebra::SVD::new(a, true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::numerical(format!("shape fit failed at vertex {v}: {e}")))?;
        let (fxx, fxy, fyy, fx, fy) = (sol[0], sol[1], sol[2], sol[3], sol[4]);
        let root = (1.0 + fx * fx + fy * fy).sqrt();
        // Graph normal on the fitted side of the frame normal.
        let nhat = (n - e1 * fx - e2 * fy) / root;
        // Euclidean first/second forms in the (e1,e2) graph frame; the sign
        // convention makes a sphere with outward normal positively curved.
        let ge = [[1.0 + fx * fx, fx * fy], [fx * fy, 1.0 + fy * fy]];
        let he_graph = [[-fxx / root, -fxy / root], [-fxy / root, -fyy / root]];
        // Conformal correction: h̄ = e^w(h_euc + (∇w·n̂) g_euc), ḡ = e^{2w} g_euc.
        let w = space.conformal_exponent(&p0);
        let dw = space.conformal_grad(&p0);
        let ew = w.exp();
        let dwn = dw.dot(&nhat);
        let mut hbar = [[0.0f64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hbar[i][j] = ew * (he_graph[i][j] + dwn * ge[i][j]);
            }
        }
        let gbar = [[ge[0][0] * ew * ew, ge[0][1] * ew * ew], [ge[1][0] * ew * ew, ge[1][1] * ew * ew]];
        let det = gbar[0][0] * gbar[1][1] - gbar[0][1] * gbar[1][0];
        let ginv = [[gbar[1][1] / det, -gbar[0][1] / det], [-gbar[1][0] / det, gbar[0][0] / det]];
        // Shape operator S = ḡ⁻¹ h̄.
        let mut s = [[0.0f64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] = ginv[i][0] * hbar[0][j] + ginv[i][1] * hbar[1][j];
            }
        }
        let mean = s[0][0] + s[1][1];
        let hn2 = s[0][0] * s[0][0] + 2.0 * s[0][1] * s[1][0] + s[1][1] * s[1][1];
        // Tangent basis of the fitted graph at the origin.
        let t1 = e1 + n * fx;
        let t2 = e2 + n * fy;
        out.push(ShapeEstimate {
            // ḡ-unit normal is e^{−w} times the Euclidean unit normal.
            nu: nhat * (-w).exp(),
            basis: [t1, t2],
            g_basis: gbar,
            h_basis: hbar,
            h_norm2: hn2,
            mean_curvature: mean,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaceform::SpaceKind;

    #[test]
    fn disk_mesh_counts_and_topology() {
        for rings in [1usize, 3, 8] {
            let (params, tris) = disk_mesh_params(rings);
            assert_eq!(params.len(), 1 + 3 * rings * (rings + 1));
            assert_eq!(tris.len(), 6 * rings * rings);
            let mesh = TriMesh {
                vertices: params.iter().map(|p| V3::new(p[0], p[1], 0.0)).collect(),
                triangles: tris,
                params: Some(params),
                domain: Some(DomainKind::UnitDisk),
            };
            mesh.check_manifold().unwrap();
            assert_eq!(mesh.euler_characteristic(), 1);
            let loops = mesh.boundary_loops().unwrap();
            assert_eq!(loops.len(), 1);
            assert_eq!(loops[0].len(), 6 * rings);
            assert_eq!(mesh.genus().unwrap(), 0);
            // All triangles positively oriented in parameter space.
            let p = mesh.params.as_ref().unwrap();
            for t in &mesh.triangles {
                let (a, b, c) = (p[t[0]], p[t[1]], p[t[2]]);
                let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                assert!(det > 0.0, "flipped triangle {t:?}");
            }
        }
    }

    #[test]
    fn strip_mesh_is_annulus() {
        let patch = Patch::Catenoid { waist: 0.5, half_height: 1.1 };
        let mesh = mesh_strip_patch(&patch, 8, 20);
        mesh.check_manifold().unwrap();
        assert_eq!(mesh.euler_characteristic(), 0);
        assert_eq!(mesh.boundary_loops().unwrap().len(), 2);
        assert_eq!(mesh.genus().unwrap(), 0);
    }

    #[test]
    fn torus_fixture_has_chi_minus_one() {
        let mesh = torus_with_one_hole(8);
        mesh.check_manifold().unwrap();
        assert_eq!(mesh.euler_characteristic(), -1);
        assert_eq!(mesh.boundary_loops().unwrap().len(), 1);
        assert_eq!(mesh.genus().unwrap(), 1);
    }

    #[test]
    fn off_roundtrip_with_scalars() {
        let mesh = torus_with_one_hole(6);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.off");
        let col: Vec<f64> = (0..mesh.vertex_count()).map(|i| i as f64 * 0.5).collect();
        write_off(&mesh, &path, &[&col]).unwrap();
        let (back, cols) = read_off(&path).unwrap();
        assert_eq!(back.vertex_count(), mesh.vertex_count());
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(cols.len(), 1);
        assert!(cols[0].iter().zip(&col).all(|(a, b)| (a - b).abs() < 1e-15));
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn obj_roundtrip() {
        let mesh = torus_with_one_hole(5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        write_obj(&mesh, &path).unwrap();
        let back = read_obj(&path).unwrap();
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.vertex_count(), mesh.vertex_count());
    }

    #[test]
    fn shape_estimate_recovers_sphere_curvature() {
        // Sample the unit sphere around the north pole as a graph mesh.
        let mut params = Vec::new();
        let mut vertices = Vec::new();
        let n = 24;
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (-0.4 + 0.8 * i as f64 / (n - 1) as f64, -0.4 + 0.8 * j as f64 / (n - 1) as f64);
                params.push([u, v]);
                vertices.push(V3::new(u, v, (1.0 - u * u - v * v).sqrt()));
            }
        }
        let mut triangles = Vec::new();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let id = |i: usize, j: usize| i * n + j;
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mesh = TriMesh { vertices, triangles, params: None, domain: None };
        let space = AmbientSpace::new(SpaceKind::Euclidean);
        let shapes = estimate_shape(&mesh, &space).unwrap();
        // Interior vertices only (the fit is poor at the sample-square rim).
        let mut checked = 0;
        for i in 5..n - 5 {
            for j in 5..n - 5 {
                let e = &shapes[i * n + j];
                // Outward normal (≈ position) and sphere curvature h = g.
                assert!((e.h_norm2 - 2.0).abs() < 0.05, "|h|² = {}", e.h_norm2);
                assert!((e.mean_curvature - 2.0).abs() < 0.05, "H = {}", e.mean_curvature);
                assert!(e.nu.dot(&mesh.vertices[i * n + j]) > 0.99);
                // On the unit sphere every tangent direction is principal
                // with h(û, û) = 1 for ḡ-unit û.
                let u = e.basis[0] / e.basis[0].norm();
                assert!((e.second_form(&u) - 1.0).abs() < 0.05);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}
