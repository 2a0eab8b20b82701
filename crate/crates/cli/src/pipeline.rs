//! The full analysis pipeline behind `analyze`: build the surface, check
//! stationarity, assemble the quadratic form, solve both eigenproblems,
//! compute the topology block, and aggregate everything into one report.
//!
//! On-disk artifacts: `report.json` always; `spectrum.csv` always;
//! `spectrum.svg` and `mode.svg` when figures are enabled; `modes.off`
//! when eigenfunction export is enabled.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use capstab_core::discretize::assemble;
use capstab_core::identities::{contact_angle, verify_identities};
use capstab_core::report::{RunReport, SurfaceSummary, TopologyBlock};
use capstab_core::spectrum::{robin_spectrum, SpectrumOptions, SpectrumReport, SpectrumSolution};
use capstab_core::surface::mesh::{read_obj, read_off, write_off};
use capstab_core::surface::{build_family, euler_data, stationarity_report};
use capstab_core::topology::{harmonic_basis, index_bounds, topology_report, FormCondition};
use capstab_core::{AmbientSpace, Error, Immersion, Result, SpaceKind};

use crate::config::{config_echo, RunConfig, SurfaceSpec};
use crate::figures;

/// Flat-embedding dimension used for the topological index bounds.
pub fn embed_dim(space: &AmbientSpace) -> usize {
    match space.kind {
        SpaceKind::Spherical => 4,
        _ => 3,
    }
}

/// Everything `analyze` produced, before any of it is written out.
pub struct AnalysisArtifacts {
    pub report: RunReport,
    pub imm: Immersion,
    pub solution: SpectrumSolution,
    pub label: String,
}

fn build_surface(cfg: &RunConfig) -> Result<Immersion> {
    match &cfg.surface {
        SurfaceSpec::Family(family) => build_family(family, cfg.mesh_level),
        SurfaceSpec::Mesh { path, ball } => {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let mesh = match ext {
                "off" => read_off(path)?.0,
                "obj" => read_obj(path)?,
                other => {
                    return Err(Error::config(format!(
                        "unsupported mesh format `.{other}` (expected .off or .obj)"
                    )))
                }
            };
            let imm = Immersion { ambient: *ball, mesh, patch: None, family: None };
            imm.validate()?;
            Ok(imm)
        }
    }
}

/// Run the whole pipeline for one configured surface.
pub fn run_analyze(cfg: &RunConfig) -> Result<AnalysisArtifacts> {
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut stage = |name: &str, t: Instant| {
        timings.insert(name.to_string(), t.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    let imm = build_surface(cfg)?;
    stage("build", t);
    let label = cfg.surface.label();
    log::info!(
        "built {label}: {} vertices, {} triangles",
        imm.mesh.vertex_count(),
        imm.mesh.triangle_count()
    );

    let t = Instant::now();
    let stationarity = stationarity_report(&imm)?;
    stage("stationarity", t);
    if !stationarity.is_stationary {
        log::warn!(
            "{label} is not stationary to tolerance: max |H| = {:.3e}, angle deviation = {:.3e}",
            stationarity.max_abs_mean_curvature,
            stationarity.contact_angle_dev
        );
    }

    let t = Instant::now();
    let asm = assemble(&imm)?;
    stage("assembly", t);

    let opts = SpectrumOptions {
        window: cfg.solver.window,
        dense_threshold: cfg.solver.dense_threshold,
        seed: cfg.solver.seed,
    };
    let t = Instant::now();
    let sol = robin_spectrum(&asm, &opts)?;
    stage("spectrum", t);
    log::info!(
        "{label}: verdict {:?}, constrained index {}, bracket {:?}",
        sol.report.verdict,
        sol.report.morse_index,
        sol.report.index_bracket
    );

    let t = Instant::now();
    let euler = euler_data(&imm)?;
    if euler.gauss_bonnet_residual > cfg.tolerances.gauss_bonnet {
        log::warn!(
            "{label}: discrete Gauss-Bonnet residual {:.3e} exceeds {:.1e}",
            euler.gauss_bonnet_residual,
            cfg.tolerances.gauss_bonnet
        );
    }
    let topo = topology_report(&imm.mesh)?;
    let dim = embed_dim(imm.space());
    let bounds = index_bounds(&topo, &imm.ambient, dim);
    let basis_n = harmonic_basis(&imm.mesh, imm.space(), FormCondition::BoundaryNormal)?;
    let basis_t = harmonic_basis(&imm.mesh, imm.space(), FormCondition::BoundaryTangent)?;
    stage("topology", t);

    // Pointwise identities need the analytic chart; mesh-file surfaces are
    // analyzed from curvature estimates and skip them.
    let identities = if imm.patch.is_some() {
        let t = Instant::now();
        let rep = verify_identities(&imm)?;
        stage("identities", t);
        vec![rep]
    } else {
        Vec::new()
    };

    let theta = if imm.patch.is_some() {
        contact_angle(&imm)?
    } else {
        stationarity.contact_angle_mean
    };

    let mut report = RunReport::new(config_echo(cfg));
    report.surface = Some(SurfaceSummary {
        family: label.clone(),
        space: imm.space().kind.label().to_string(),
        ball_radius: imm.ambient.radius,
        mesh_level: cfg.mesh_level,
        vertices: imm.mesh.vertex_count(),
        triangles: imm.mesh.triangle_count(),
        contact_angle: theta,
    });
    report.stationarity = Some(stationarity);
    report.gauss_bonnet = Some(euler);
    report.verdict = Some(sol.report.verdict);
    report.spectrum = Some(sol.report.clone());
    report.identities = identities;
    report.topology = Some(TopologyBlock {
        bounds,
        report: topo,
        embedding_dimension: dim,
        harmonic_dimension_normal: Some(basis_n.dimension),
        harmonic_dimension_tangent: Some(basis_t.dimension),
    });
    if cfg.output.timings {
        report.timings = Some(timings);
    }

    Ok(AnalysisArtifacts { report, imm, solution: sol, label })
}

/// The spectrum table: `index,eigenvalue,constrained` with the free
/// spectrum flagged 0 and the area-constrained spectrum flagged 1.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("index,eigenvalue,constrained\n");
    for (i, v) in report.unconstrained.values.iter().enumerate() {
        out.push_str(&format!("{i},{v},0\n"));
    }
    for (i, v) in report.constrained.values.iter().enumerate() {
        out.push_str(&format!("{i},{v},1\n"));
    }
    out
}

/// Write the configured artifacts; returns the paths written.
pub fn write_outputs(cfg: &RunConfig, artifacts: &AnalysisArtifacts) -> Result<Vec<PathBuf>> {
    let out_dir = cfg.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let mut written = Vec::new();

    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, artifacts.report.to_json()?)?;
    written.push(report_path);

    if let Some(spec) = &artifacts.report.spectrum {
        let csv_path = out_dir.join("spectrum.csv");
        std::fs::write(&csv_path, spectrum_csv(spec))?;
        written.push(csv_path);

        if cfg.output.figures {
            let svg_path = out_dir.join("spectrum.svg");
            std::fs::write(&svg_path, figures::spectrum_svg(spec, &artifacts.label))?;
            written.push(svg_path);

            let mode = artifacts
                .solution
                .constrained
                .vectors
                .first()
                .map(|v| v.as_slice())
                .unwrap_or(&[]);
            if !mode.is_empty() {
                if let Some(svg) = figures::heatmap_svg(
                    &artifacts.imm.mesh,
                    mode,
                    &format!("lowest constrained mode: {}", artifacts.label),
                ) {
                    let mode_path = out_dir.join("mode.svg");
                    std::fs::write(&mode_path, svg)?;
                    written.push(mode_path);
                } else {
                    log::info!("mesh carries no parameter chart; skipping the heat map");
                }
            }
        }
    }

    if cfg.output.eigenfunctions {
        let columns: Vec<&[f64]> = artifacts
            .solution
            .constrained
            .vectors
            .iter()
            .take(2)
            .chain(artifacts.solution.unconstrained.vectors.iter().take(2))
            .map(|v| v.as_slice())
            .collect();
        let off_path = out_dir.join("modes.off");
        write_off(&artifacts.imm.mesh, &off_path, &columns)?;
        written.push(off_path);
    }

    Ok(written)
}
