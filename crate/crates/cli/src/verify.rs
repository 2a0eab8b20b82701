//! Verification suites: the exact pointwise identities per ambient space,
//! and the finite-difference second-variation experiments.
//!
//! Each check is an independent job over one shipped surface, run in the
//! rayon pool; the report is assembled single-threaded afterwards in suite
//! order, so output and JSON are deterministic.

use capstab_core::identities::{
    second_variation_case, verify_identities, IdentityReport, SecondVariationCase,
    VariationOptions,
};
use capstab_core::report::RunReport;
use capstab_core::surface::build_family;
use capstab_core::{Result, SurfaceFamily};
use rayon::prelude::*;

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "lowercase")]
pub enum Suite {
    /// Flat-ball identities on the flat disks and the critical catenoid.
    Euclidean,
    /// Hyperbolic-ball identities on the geodesic disks.
    Hyperbolic,
    /// Spherical-ball identities on the geodesic disks.
    Spherical,
    /// Finite-difference second variation against the quadratic form.
    Appendix,
    /// Everything above.
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Euclidean => "euclidean",
            Suite::Hyperbolic => "hyperbolic",
            Suite::Spherical => "spherical",
            Suite::Appendix => "appendix",
            Suite::All => "all",
        }
    }
}

fn identity_families(suite: Suite) -> Vec<SurfaceFamily> {
    let mut fams = Vec::new();
    let euclidean = matches!(suite, Suite::Euclidean | Suite::All);
    let hyperbolic = matches!(suite, Suite::Hyperbolic | Suite::All);
    let spherical = matches!(suite, Suite::Spherical | Suite::All);
    if euclidean {
        for height in [0.0, 0.3, -0.3, 0.5, -0.5] {
            fams.push(SurfaceFamily::FlatDisk { height });
        }
        fams.push(SurfaceFamily::Catenoid { waist: None });
    }
    if hyperbolic {
        for radius in [0.5, 1.0, 2.0] {
            fams.push(SurfaceFamily::GeodesicDiskHyp { radius, offset: 0.0 });
        }
    }
    if spherical {
        for radius in [1.0, 2.0, 2.5] {
            fams.push(SurfaceFamily::GeodesicDiskSph { radius, offset: 0.0 });
        }
    }
    fams
}

/// Acceptance predicate for one finite-difference experiment: the stencil
/// must reproduce the quadratic form to 1% (floored at 1e-4 absolute) and
/// either converge at second order or land below 1e-6 outright.
fn variation_case_passes(case: &SecondVariationCase) -> bool {
    let tol = (0.01 * case.q_smooth.abs()).max(1e-4);
    case.abs_error <= tol && (case.observed_order >= 1.9 || case.abs_error < 1e-6)
}

/// One verification line, plus what it contributes to the report.
pub struct CheckOutcome {
    pub line: String,
    pub pass: bool,
    pub identity: Option<IdentityReport>,
    pub variation: Option<SecondVariationCase>,
}

fn identity_check(family: &SurfaceFamily, level: usize, tol: f64) -> CheckOutcome {
    let label = family.label();
    match build_family(family, level).and_then(|imm| verify_identities(&imm)) {
        Ok(rep) => {
            let pass = rep.worst <= tol;
            let status = if pass { "PASS" } else { "FAIL" };
            let line = format!(
                "VERIFY {label}: {status} - worst residual {:.2e} (tolerance {tol:.1e})",
                rep.worst
            );
            CheckOutcome { line, pass, identity: Some(rep), variation: None }
        }
        Err(e) => CheckOutcome {
            line: format!("VERIFY {label}: FAIL - {e}"),
            pass: false,
            identity: None,
            variation: None,
        },
    }
}

fn variation_checks(level: usize) -> Vec<CheckOutcome> {
    let imm = match build_family(&SurfaceFamily::FlatDisk { height: 0.0 }, level) {
        Ok(imm) => imm,
        Err(e) => {
            return vec![CheckOutcome {
                line: format!("VERIFY second_variation: FAIL - {e}"),
                pass: false,
                identity: None,
                variation: None,
            }]
        }
    };
    let opts = VariationOptions::default();
    let cases: [(&str, fn(f64, f64) -> f64); 3] =
        [("tilt", |u, _| u), ("bowl", |u, _| u * u - 0.5), ("saddle", |u, v| u * v)];
    cases
        .par_iter()
        .map(|(label, phi)| match second_variation_case(&imm, phi, label, &opts) {
            Ok(case) => {
                let pass = variation_case_passes(&case);
                let status = if pass { "PASS" } else { "FAIL" };
                let line = format!(
                    "VERIFY second_variation/{label}: {status} - |fd - Q| = {:.2e}, observed order {:.2}",
                    case.abs_error, case.observed_order
                );
                CheckOutcome { line, pass, identity: None, variation: Some(case) }
            }
            Err(e) => CheckOutcome {
                line: format!("VERIFY second_variation/{label}: FAIL - {e}"),
                pass: false,
                identity: None,
                variation: None,
            },
        })
        .collect()
}

/// Results of one suite run.
pub struct VerifyOutcome {
    pub report: RunReport,
    pub lines: Vec<String>,
    pub all_pass: bool,
}

/// Run the selected suite at the given mesh level.
pub fn run_verify(suite: Suite, mesh_level: usize, identity_tol: f64) -> Result<VerifyOutcome> {
    let families = identity_families(suite);
    let mut outcomes: Vec<CheckOutcome> = families
        .par_iter()
        .map(|family| identity_check(family, mesh_level, identity_tol))
        .collect();
    if matches!(suite, Suite::Appendix | Suite::All) {
        outcomes.extend(variation_checks(mesh_level));
    }

    let all_pass = outcomes.iter().all(|o| o.pass);
    let mut report = RunReport::new(serde_json::json!({
        "command": "verify",
        "suite": suite.name(),
        "mesh_level": mesh_level,
        "identity_tolerance": identity_tol,
    }));
    let mut lines = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        lines.push(o.line);
        if let Some(rep) = o.identity {
            report.identities.push(rep);
        }
        if let Some(case) = o.variation {
            report.variation.push(case);
        }
    }
    Ok(VerifyOutcome { report, lines, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_select_the_expected_surfaces() {
        assert_eq!(identity_families(Suite::Euclidean).len(), 6);
        assert_eq!(identity_families(Suite::Hyperbolic).len(), 3);
        assert_eq!(identity_families(Suite::Spherical).len(), 3);
        assert!(identity_families(Suite::Appendix).is_empty());
        assert_eq!(identity_families(Suite::All).len(), 12);
    }

    #[test]
    fn hyperbolic_suite_passes_at_default_tolerance() {
        let outcome = run_verify(Suite::Hyperbolic, 0, 1e-6).unwrap();
        assert!(outcome.all_pass, "lines: {:?}", outcome.lines);
        assert_eq!(outcome.report.identities.len(), 3);
        assert!(outcome.report.variation.is_empty());
        assert!(outcome.lines.iter().all(|l| l.contains("PASS")));
    }

    #[test]
    fn impossible_tolerance_fails_the_suite() {
        let outcome = run_verify(Suite::Spherical, 0, 1e-300).unwrap();
        assert!(!outcome.all_pass);
        assert!(outcome.lines.iter().any(|l| l.contains("FAIL")));
    }
}
