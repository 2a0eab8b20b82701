//! Aggregated run reports and their deterministic JSON form.
//!
//! A report collects the per-module results of one analysis: surface
//! summary, stationarity verdict, spectrum and stability verdict, identity
//! residuals, and the topology block. Serialization is byte-deterministic
//! for identical inputs: struct fields serialize in declaration order, maps
//! are ordered, solver seeds are fixed by the callers, and wall-clock
//! timings are opt-in precisely because they would break determinism.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::identities::{IdentityReport, SecondVariationCase};
use crate::spectrum::{SpectrumReport, StabilityVerdict};
use crate::surface::{EulerData, StationarityReport};
use crate::topology::{BoundPredicate, TopologyReport};

/// Version tag of the report layout.
pub const SCHEMA_VERSION: &str = "1";

/// What was analyzed, echoed in mesh terms.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSummary {
    pub family: String,
    pub space: String,
    pub ball_radius: f64,
    pub mesh_level: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub contact_angle: f64,
}

/// Topology results: counts, index bounds, and the harmonic dimensions
/// actually computed under each boundary condition.
#[derive(Debug, Clone, Serialize)]
pub struct TopologyBlock {
    pub report: TopologyReport,
    pub embedding_dimension: usize,
    pub bounds: BTreeMap<String, BoundPredicate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_dimension_normal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_dimension_tangent: Option<usize>,
}

/// Everything one run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: String,
    /// Echo of the configuration the run was launched with.
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<StationarityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauss_bonnet: Option<EulerData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<StabilityVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub identities: Vec<IdentityReport>,
    /// Finite-difference second-variation experiments, when the run included
    /// them.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variation: Vec<SecondVariationCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyBlock>,
    /// Wall-clock timings in seconds, keyed by stage. Opt-in: omitted
    /// reports are byte-identical across runs of the same build and config.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(config: serde_json::Value) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION.to_string(),
            config,
            surface: None,
            stationarity: None,
            gauss_bonnet: None,
            spectrum: None,
            verdict: None,
            identities: Vec::new(),
            variation: Vec::new(),
            topology: None,
            timings: None,
        }
    }

    /// Pretty JSON with a trailing newline; byte-deterministic for equal
    /// report values.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::numerical(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> RunReport {
        let mut rep = RunReport::new(serde_json::json!({
            "command": "analyze",
            "family": "flat_disk",
            "height": 0.25,
        }));
        rep.surface = Some(SurfaceSummary {
            family: "flat_disk(height=0.25)".to_string(),
            space: "euclidean".to_string(),
            ball_radius: 1.0,
            mesh_level: 2,
            vertices: 1234,
            triangles: 2400,
            contact_angle: 1.823476582,
        });
        rep.verdict = Some(StabilityVerdict::Stable);
        rep
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let a = sample_report().to_json().unwrap();
        let b = sample_report().to_json().unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"schema_version\": \"1\""));
        assert!(a.contains("\"verdict\": \"stable\""));
    }

    #[test]
    fn optional_blocks_are_omitted_when_empty() {
        let rep = RunReport::new(serde_json::json!({}));
        let s = rep.to_json().unwrap();
        assert!(!s.contains("timings"));
        assert!(!s.contains("identities"));
        assert!(!s.contains("spectrum"));
        let mut with = RunReport::new(serde_json::json!({}));
        with.timings = Some(BTreeMap::from([("assembly".to_string(), 0.5)]));
        assert!(with.to_json().unwrap().contains("timings"));
    }
}
