//! Strict run-configuration files.
//!
//! Configs are JSON objects. Every block rejects unknown keys so a typo
//! fails loudly instead of silently running with a default, and every
//! tolerance must be positive. The effective configuration (file contents
//! plus command-line overrides) is echoed verbatim into the run report, so
//! a report always names the run that produced it.

use std::path::{Path, PathBuf};

use capstab_core::surface::family_from_value;
use capstab_core::{AmbientBall, Error, Result, SpaceKind, SurfaceFamily};
use serde_json::Value;

/// How the surface under analysis is specified.
#[derive(Debug, Clone)]
pub enum SurfaceSpec {
    /// One of the shipped analytic families, refined to `mesh_level`.
    Family(SurfaceFamily),
    /// A triangle mesh from disk (OFF or OBJ), analyzed with estimated
    /// curvatures inside the given ambient ball.
    Mesh { path: PathBuf, ball: AmbientBall },
}

impl SurfaceSpec {
    pub fn label(&self) -> String {
        match self {
            SurfaceSpec::Family(f) => f.label(),
            SurfaceSpec::Mesh { path, .. } => format!("mesh({})", path.display()),
        }
    }
}

/// Solver knobs forwarded to the eigensolver.
#[derive(Debug, Clone, Copy)]
pub struct SolverOverrides {
    pub window: usize,
    pub dense_threshold: usize,
    pub seed: u64,
}

impl Default for SolverOverrides {
    fn default() -> Self {
        let d = capstab_core::spectrum::SpectrumOptions::default();
        SolverOverrides { window: d.window, dense_threshold: d.dense_threshold, seed: d.seed }
    }
}

/// Pass thresholds that a config may tighten or relax.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Maximum identity residual accepted by `verify`.
    pub identity: f64,
    /// Maximum discrete Gauss–Bonnet residual reported without a warning.
    pub gauss_bonnet: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-6, gauss_bonnet: 1e-2 }
    }
}

/// What to write besides the JSON report.
#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub out_dir: Option<PathBuf>,
    /// Emit SVG figures (spectrum plot; eigenfunction heat map when the
    /// mesh carries parameter coordinates).
    pub figures: bool,
    /// Attach the lowest eigenfunctions to an OFF file as vertex scalars.
    pub eigenfunctions: bool,
    /// Include wall-clock timings in the JSON report. Off by default
    /// because timings break byte-determinism of the report.
    pub timings: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { out_dir: None, figures: true, eigenfunctions: false, timings: false }
    }
}

/// A one-parameter grid for `sweep`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Which family parameter varies: `height`, `waist`, `radius`, or
    /// `offset`, matching the surface family in the config.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Optional `command` key; when present it must match the subcommand
    /// the config is passed to.
    pub command: Option<String>,
    pub surface: SurfaceSpec,
    pub mesh_level: usize,
    pub solver: SolverOverrides,
    pub tolerances: Tolerances,
    pub output: OutputOptions,
    pub sweep: Option<SweepSpec>,
}

fn object<'v>(v: &'v Value, what: &str) -> Result<&'v serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::config(format!("{what} must be a JSON object")))
}

fn check_keys(obj: &serde_json::Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(format!("unknown key `{key}` in {what}")));
        }
    }
    Ok(())
}

fn get_f64(obj: &serde_json::Map<String, Value>, key: &str, what: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::config(format!("`{key}` in {what} must be a number"))),
    }
}

fn get_usize(obj: &serde_json::Map<String, Value>, key: &str, what: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|u| Some(u as usize))
            .ok_or_else(|| Error::config(format!("`{key}` in {what} must be a non-negative integer"))),
    }
}

fn get_bool(obj: &serde_json::Map<String, Value>, key: &str, what: &str) -> Result<Option<bool>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_bool()
            .map(Some)
            .ok_or_else(|| Error::config(format!("`{key}` in {what} must be a boolean"))),
    }
}

fn parse_surface(v: &Value) -> Result<SurfaceSpec> {
    let obj = object(v, "the `surface` block")?;
    if obj.contains_key("family") {
        return Ok(SurfaceSpec::Family(family_from_value(v)?));
    }
    if obj.contains_key("mesh") {
        check_keys(obj, &["mesh", "space", "radius"], "the mesh surface block")?;
        let path = obj
            .get("mesh")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("`mesh` must be a file path string"))?;
        let space = obj
            .get("space")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("a mesh surface needs `space` (euclidean | hyperbolic | spherical)"))?;
        let kind = match space {
            "euclidean" => SpaceKind::Euclidean,
            "hyperbolic" => SpaceKind::Hyperbolic,
            "spherical" => SpaceKind::Spherical,
            other => return Err(Error::config(format!("unknown ambient space `{other}`"))),
        };
        let radius = get_f64(obj, "radius", "the mesh surface block")?
            .ok_or_else(|| Error::config("a mesh surface needs the ball `radius`"))?;
        let ball = AmbientBall::new(kind, radius)?;
        return Ok(SurfaceSpec::Mesh { path: PathBuf::from(path), ball });
    }
    Err(Error::config("the `surface` block needs either a `family` tag or a `mesh` path"))
}

fn parse_solver(v: &Value) -> Result<SolverOverrides> {
    let obj = object(v, "the `solver` block")?;
    check_keys(obj, &["window", "dense_threshold", "seed"], "the `solver` block")?;
    let mut solver = SolverOverrides::default();
    if let Some(w) = get_usize(obj, "window", "the `solver` block")? {
        if w == 0 {
            return Err(Error::config("`window` must be at least 1"));
        }
        solver.window = w;
    }
    if let Some(d) = get_usize(obj, "dense_threshold", "the `solver` block")? {
        solver.dense_threshold = d;
    }
    if let Some(s) = obj.get("seed") {
        solver.seed = s
            .as_u64()
            .ok_or_else(|| Error::config("`seed` in the `solver` block must be a non-negative integer"))?;
    }
    Ok(solver)
}

fn parse_tolerances(v: &Value) -> Result<Tolerances> {
    let obj = object(v, "the `tolerances` block")?;
    check_keys(obj, &["identity", "gauss_bonnet"], "the `tolerances` block")?;
    let mut tol = Tolerances::default();
    if let Some(t) = get_f64(obj, "identity", "the `tolerances` block")? {
        tol.identity = t;
    }
    if let Some(t) = get_f64(obj, "gauss_bonnet", "the `tolerances` block")? {
        tol.gauss_bonnet = t;
    }
    if !(tol.identity > 0.0) || !(tol.gauss_bonnet > 0.0) {
        return Err(Error::config("all tolerances must be positive"));
    }
    Ok(tol)
}

fn parse_output(v: &Value) -> Result<OutputOptions> {
    let obj = object(v, "the `output` block")?;
    check_keys(obj, &["out_dir", "figures", "eigenfunctions", "timings"], "the `output` block")?;
    let mut out = OutputOptions::default();
    if let Some(dir) = obj.get("out_dir") {
        let s = dir
            .as_str()
            .ok_or_else(|| Error::config("`out_dir` in the `output` block must be a string"))?;
        out.out_dir = Some(PathBuf::from(s));
    }
    if let Some(b) = get_bool(obj, "figures", "the `output` block")? {
        out.figures = b;
    }
    if let Some(b) = get_bool(obj, "eigenfunctions", "the `output` block")? {
        out.eigenfunctions = b;
    }
    if let Some(b) = get_bool(obj, "timings", "the `output` block")? {
        out.timings = b;
    }
    Ok(out)
}

fn parse_sweep(v: &Value, surface: &SurfaceSpec) -> Result<SweepSpec> {
    let obj = object(v, "the `sweep` block")?;
    check_keys(obj, &["parameter", "values", "start", "stop", "step"], "the `sweep` block")?;
    let parameter = obj
        .get("parameter")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::config("the `sweep` block needs a string `parameter`"))?
        .to_string();

    let family = match surface {
        SurfaceSpec::Family(f) => f,
        SurfaceSpec::Mesh { .. } => {
            return Err(Error::config("sweeps need a parametric surface family, not a mesh file"))
        }
    };
    let allowed: &[&str] = match family {
        SurfaceFamily::FlatDisk { .. } => &["height"],
        SurfaceFamily::Catenoid { .. } => &["waist"],
        SurfaceFamily::GeodesicDiskHyp { .. } | SurfaceFamily::GeodesicDiskSph { .. } => {
            &["radius", "offset"]
        }
    };
    if !allowed.contains(&parameter.as_str()) {
        return Err(Error::config(format!(
            "family `{}` has no sweep parameter `{parameter}` (expected one of {:?})",
            family.label(),
            allowed
        )));
    }

    let values: Vec<f64> = if let Some(vals) = obj.get("values") {
        if obj.contains_key("start") || obj.contains_key("stop") || obj.contains_key("step") {
            return Err(Error::config("give either `values` or `start`/`stop`/`step`, not both"));
        }
        let arr = vals
            .as_array()
            .ok_or_else(|| Error::config("`values` in the `sweep` block must be an array"))?;
        arr.iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::config("`values` entries must be numbers"))
            })
            .collect::<Result<_>>()?
    } else {
        let start = get_f64(obj, "start", "the `sweep` block")?
            .ok_or_else(|| Error::config("the `sweep` block needs `values` or `start`/`stop`/`step`"))?;
        let stop = get_f64(obj, "stop", "the `sweep` block")?
            .ok_or_else(|| Error::config("grid sweeps need `stop`"))?;
        let step = get_f64(obj, "step", "the `sweep` block")?
            .ok_or_else(|| Error::config("grid sweeps need `step`"))?;
        if !(step > 0.0) {
            return Err(Error::config("`step` must be positive"));
        }
        if stop < start {
            return Err(Error::config("`stop` must not be below `start`"));
        }
        let count = ((stop - start) / step + 1.5).floor() as usize;
        (0..count).map(|i| start + step * i as f64).filter(|v| *v <= stop + 1e-9 * step).collect()
    };
    if values.is_empty() {
        return Err(Error::config("the sweep grid is empty"));
    }
    Ok(SweepSpec { parameter, values })
}

/// Parse one config object; `path` is only used in error messages.
pub fn parse_config(v: &Value, path: &Path) -> Result<RunConfig> {
    let obj = object(v, &format!("config file {}", path.display()))?;
    check_keys(
        obj,
        &["command", "surface", "mesh_level", "solver", "tolerances", "output", "sweep"],
        &format!("config file {}", path.display()),
    )?;

    let command = match obj.get("command") {
        None => None,
        Some(c) => Some(
            c.as_str()
                .ok_or_else(|| Error::config("`command` must be a string"))?
                .to_string(),
        ),
    };
    let surface = parse_surface(
        obj.get("surface")
            .ok_or_else(|| Error::config("the config needs a `surface` block"))?,
    )?;
    let mesh_level = get_usize(obj, "mesh_level", "the config")?.unwrap_or(2);
    let solver = match obj.get("solver") {
        Some(v) => parse_solver(v)?,
        None => SolverOverrides::default(),
    };
    let tolerances = match obj.get("tolerances") {
        Some(v) => parse_tolerances(v)?,
        None => Tolerances::default(),
    };
    let output = match obj.get("output") {
        Some(v) => parse_output(v)?,
        None => OutputOptions::default(),
    };
    let sweep = match obj.get("sweep") {
        Some(v) => Some(parse_sweep(v, &surface)?),
        None => None,
    };

    Ok(RunConfig { command, surface, mesh_level, solver, tolerances, output, sweep })
}

/// Load and validate a config file for the named subcommand, applying the
/// command-line overrides.
pub fn load_config(
    path: &Path,
    command: &str,
    out_dir_flag: Option<&Path>,
    mesh_level_flag: Option<usize>,
) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let mut cfg = parse_config(&value, path)?;
    if let Some(cmd) = &cfg.command {
        if cmd != command {
            return Err(Error::config(format!(
                "config names command `{cmd}` but was passed to `{command}`"
            )));
        }
    }
    if let Some(dir) = out_dir_flag {
        cfg.output.out_dir = Some(dir.to_path_buf());
    }
    if let Some(level) = mesh_level_flag {
        cfg.mesh_level = level;
    }
    if cfg.command.is_none() {
        cfg.command = Some(command.to_string());
    }
    if command == "sweep" && cfg.sweep.is_none() {
        return Err(Error::config("sweep runs need a `sweep` block in the config"));
    }
    Ok(cfg)
}

/// Deterministic echo of the effective configuration for the run report.
pub fn config_echo(cfg: &RunConfig) -> Value {
    let surface = match &cfg.surface {
        SurfaceSpec::Family(f) => serde_json::to_value(f).unwrap_or(Value::Null),
        SurfaceSpec::Mesh { path, ball } => serde_json::json!({
            "mesh": path.display().to_string(),
            "space": ball.space.kind.label(),
            "radius": ball.radius,
        }),
    };
    let mut echo = serde_json::json!({
        "command": cfg.command.as_deref().unwrap_or(""),
        "surface": surface,
        "mesh_level": cfg.mesh_level,
        "solver": {
            "window": cfg.solver.window,
            "dense_threshold": cfg.solver.dense_threshold,
            "seed": cfg.solver.seed,
        },
        "tolerances": {
            "identity": cfg.tolerances.identity,
            "gauss_bonnet": cfg.tolerances.gauss_bonnet,
        },
        "output": {
            "out_dir": cfg.output.out_dir.as_ref().map(|p| p.display().to_string()),
            "figures": cfg.output.figures,
            "eigenfunctions": cfg.output.eigenfunctions,
            "timings": cfg.output.timings,
        },
    });
    if let Some(sweep) = &cfg.sweep {
        echo["sweep"] = serde_json::json!({
            "parameter": sweep.parameter,
            "values": sweep.values,
        });
    }
    echo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        let v: Value = serde_json::from_str(text).unwrap();
        parse_config(&v, Path::new("test.json"))
    }

    #[test]
    fn minimal_family_config_parses() {
        let cfg = parse(r#"{"surface": {"family": "flat_disk", "height": 0.25}}"#).unwrap();
        assert!(matches!(
            cfg.surface,
            SurfaceSpec::Family(SurfaceFamily::FlatDisk { height }) if height == 0.25
        ));
        assert_eq!(cfg.mesh_level, 2);
        assert!(cfg.output.figures);
        assert!(!cfg.output.timings);
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        assert!(parse(r#"{"surface": {"family": "flat_disk", "height": 0}, "extra": 1}"#).is_err());
        assert!(parse(r#"{"surface": {"family": "flat_disk", "height": 0, "waist": 1}}"#).is_err());
        assert!(parse(
            r#"{"surface": {"family": "flat_disk", "height": 0}, "solver": {"windows": 8}}"#
        )
        .is_err());
        assert!(parse(
            r#"{"surface": {"family": "flat_disk", "height": 0}, "output": {"figures": "yes"}}"#
        )
        .is_err());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let err = parse(
            r#"{"surface": {"family": "flat_disk", "height": 0}, "tolerances": {"identity": -1e-6}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("positive"));
    }

    #[test]
    fn sweep_grid_expands_inclusively() {
        let cfg = parse(
            r#"{
                "surface": {"family": "flat_disk", "height": 0.0},
                "sweep": {"parameter": "height", "start": -0.8, "stop": 0.8, "step": 0.2}
            }"#,
        )
        .unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.values.len(), 9);
        assert!((sweep.values[0] + 0.8).abs() < 1e-12);
        assert!((sweep.values[8] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sweep_parameter_must_match_family() {
        let err = parse(
            r#"{
                "surface": {"family": "catenoid"},
                "sweep": {"parameter": "height", "values": [0.1]}
            }"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sweep parameter"));
    }

    #[test]
    fn mesh_surface_block_parses() {
        let cfg = parse(
            r#"{"surface": {"mesh": "disk.off", "space": "euclidean", "radius": 1.0}}"#,
        )
        .unwrap();
        match cfg.surface {
            SurfaceSpec::Mesh { path, ball } => {
                assert_eq!(path, PathBuf::from("disk.off"));
                assert_eq!(ball.space.kind, SpaceKind::Euclidean);
            }
            SurfaceSpec::Family(_) => panic!("expected mesh surface"),
        }
    }

    #[test]
    fn echo_is_deterministic() {
        let cfg = parse(r#"{"surface": {"family": "flat_disk", "height": 0.25}}"#).unwrap();
        let a = serde_json::to_string(&config_echo(&cfg)).unwrap();
        let b = serde_json::to_string(&config_echo(&cfg)).unwrap();
        assert_eq!(a, b);
    }
}
