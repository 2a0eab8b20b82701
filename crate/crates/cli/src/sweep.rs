//! Parameter sweeps: one spectral analysis per grid point.
//!
//! Points run in the rayon worker pool; each job owns its surface and
//! assembly, so jobs share nothing mutable. A failed point is recorded in
//! its row and the sweep continues. Row order always follows the grid, so
//! the CSV is deterministic regardless of scheduling.

use capstab_core::discretize::assemble;
use capstab_core::identities::contact_angle;
use capstab_core::spectrum::{robin_spectrum, SpectrumOptions};
use capstab_core::surface::build_family;
use capstab_core::{Error, Result, SurfaceFamily};
use rayon::prelude::*;

use crate::config::{RunConfig, SurfaceSpec};

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub parameter: f64,
    pub theta: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub k_neg: Option<usize>,
    pub constrained_index: Option<usize>,
    /// `"ok"` or the error that stopped this point.
    pub status: String,
}

impl SweepRow {
    fn failed(parameter: f64, err: &Error) -> Self {
        SweepRow {
            parameter,
            theta: None,
            lambda1: None,
            lambda2: None,
            k_neg: None,
            constrained_index: None,
            status: format!("error: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    #[cfg(test)]
    pub fn ok_for_test(
        parameter: f64,
        theta: f64,
        lambda1: f64,
        lambda2: f64,
        k_neg: usize,
        constrained_index: usize,
    ) -> Self {
        SweepRow {
            parameter,
            theta: Some(theta),
            lambda1: Some(lambda1),
            lambda2: Some(lambda2),
            k_neg: Some(k_neg),
            constrained_index: Some(constrained_index),
            status: "ok".to_string(),
        }
    }

    #[cfg(test)]
    pub fn failed_for_test(parameter: f64, msg: &str) -> Self {
        SweepRow::failed(parameter, &Error::numerical(msg))
    }
}

/// The family with the swept parameter replaced by `value`.
pub fn family_at(template: &SurfaceFamily, parameter: &str, value: f64) -> Result<SurfaceFamily> {
    match (template, parameter) {
        (SurfaceFamily::FlatDisk { .. }, "height") => {
            Ok(SurfaceFamily::FlatDisk { height: value })
        }
        (SurfaceFamily::Catenoid { .. }, "waist") => {
            Ok(SurfaceFamily::Catenoid { waist: Some(value) })
        }
        (SurfaceFamily::GeodesicDiskHyp { offset, .. }, "radius") => {
            Ok(SurfaceFamily::GeodesicDiskHyp { radius: value, offset: *offset })
        }
        (SurfaceFamily::GeodesicDiskHyp { radius, .. }, "offset") => {
            Ok(SurfaceFamily::GeodesicDiskHyp { radius: *radius, offset: value })
        }
        (SurfaceFamily::GeodesicDiskSph { offset, .. }, "radius") => {
            Ok(SurfaceFamily::GeodesicDiskSph { radius: value, offset: *offset })
        }
        (SurfaceFamily::GeodesicDiskSph { radius, .. }, "offset") => {
            Ok(SurfaceFamily::GeodesicDiskSph { radius: *radius, offset: value })
        }
        _ => Err(Error::config(format!(
            "family `{}` has no sweep parameter `{parameter}`",
            template.label()
        ))),
    }
}

fn analyze_point(family: &SurfaceFamily, level: usize, opts: &SpectrumOptions) -> Result<SweepRow> {
    let imm = build_family(family, level)?;
    let theta = contact_angle(&imm)?;
    let asm = assemble(&imm)?;
    let sol = robin_spectrum(&asm, opts)?;
    let values = &sol.report.unconstrained.values;
    Ok(SweepRow {
        parameter: f64::NAN, // filled by the caller
        theta: Some(theta),
        lambda1: values.first().copied(),
        lambda2: values.get(1).copied(),
        k_neg: Some(sol.report.unconstrained.negative),
        constrained_index: Some(sol.report.morse_index),
        status: "ok".to_string(),
    })
}

/// Run every grid point; rows come back in grid order.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep runs need a `sweep` block in the config"))?;
    let template = match &cfg.surface {
        SurfaceSpec::Family(f) => f.clone(),
        SurfaceSpec::Mesh { .. } => {
            return Err(Error::config("sweeps need a parametric surface family, not a mesh file"))
        }
    };
    let opts = SpectrumOptions {
        window: cfg.solver.window,
        dense_threshold: cfg.solver.dense_threshold,
        seed: cfg.solver.seed,
    };
    let level = cfg.mesh_level;

    let rows: Vec<SweepRow> = spec
        .values
        .par_iter()
        .map(|&value| {
            let outcome = family_at(&template, &spec.parameter, value)
                .and_then(|fam| analyze_point(&fam, level, &opts));
            match outcome {
                Ok(mut row) => {
                    row.parameter = value;
                    log::info!(
                        "sweep {}={value}: lambda1 = {:?}, constrained index = {:?}",
                        spec.parameter,
                        row.lambda1,
                        row.constrained_index
                    );
                    row
                }
                Err(e) => {
                    log::warn!("sweep {}={value} failed: {e}", spec.parameter);
                    SweepRow::failed(value, &e)
                }
            }
        })
        .collect();
    Ok(rows)
}

/// CSV field that stays parseable when the value carries commas or quotes.
fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The sweep table: one row per grid point, failures included.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,theta,lambda1,lambda2,k_neg,constrained_index,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.parameter,
            opt_f64(r.theta),
            opt_f64(r.lambda1),
            opt_f64(r.lambda2),
            opt_usize(r.k_neg),
            opt_usize(r.constrained_index),
            csv_escape(&r.status),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_at_replaces_only_the_named_parameter() {
        let t = SurfaceFamily::GeodesicDiskHyp { radius: 1.0, offset: 0.25 };
        match family_at(&t, "radius", 2.0).unwrap() {
            SurfaceFamily::GeodesicDiskHyp { radius, offset } => {
                assert_eq!(radius, 2.0);
                assert_eq!(offset, 0.25);
            }
            _ => panic!("family changed shape"),
        }
        assert!(family_at(&t, "height", 0.0).is_err());
    }

    #[test]
    fn csv_records_failures_inline() {
        let rows = vec![
            SweepRow::ok_for_test(-0.2, 1.5707, 3.38, 3.39, 1, 0),
            SweepRow::failed_for_test(0.9, "waist out of range, no such catenoid"),
        ];
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "parameter,theta,lambda1,lambda2,k_neg,constrained_index,status");
        assert!(lines[1].ends_with(",ok"));
        assert!(lines[2].starts_with("0.9,,,,,,"));
        assert!(lines[2].contains("\"error: "));
    }

    #[test]
    fn csv_escapes_quotes() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_escape("plain"), "plain");
    }
}
