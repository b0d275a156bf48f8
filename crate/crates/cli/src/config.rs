//! Experiment configuration: JSON file -> defaults -> CLI flag overlay ->
//! validated `Config`. Unknown keys are rejected, every resolved field is
//! echoed into the report, and the echo hashes into a config fingerprint.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use roughwalk_core::walk::{IncrementDistribution, IncrementKind};
use roughwalk_core::Interpolation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FddClt,
    LevyArea,
    MomentScaling,
    HolderThreshold,
    WongZakai,
    StochasticIntegral,
    SymbolicAudit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FddClt => "fdd-clt",
            ExperimentKind::LevyArea => "levy-area",
            ExperimentKind::MomentScaling => "moment-scaling",
            ExperimentKind::HolderThreshold => "holder-threshold",
            ExperimentKind::WongZakai => "wong-zakai",
            ExperimentKind::StochasticIntegral => "stochastic-integral",
            ExperimentKind::SymbolicAudit => "symbolic-audit",
        }
    }

    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::FddClt,
        ExperimentKind::LevyArea,
        ExperimentKind::MomentScaling,
        ExperimentKind::HolderThreshold,
        ExperimentKind::WongZakai,
        ExperimentKind::StochasticIntegral,
        ExperimentKind::SymbolicAudit,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Rademacher,
    Gaussian,
    Uniform,
    StudentT,
    TwoPointAsymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationKind {
    Linear,
    LogLinear,
}

impl InterpolationKind {
    pub fn to_core(self) -> Interpolation {
        match self {
            InterpolationKind::Linear => Interpolation::LinearLift,
            InterpolationKind::LogLinear => Interpolation::LogLinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldSetKind {
    /// Rotation and axis stretch on the plane; the pair does not commute.
    PlanarRotation,
    /// One-dimensional V(y) = y, whose solution is the driver exponential.
    ScalarLinear,
    /// Bounded smooth tanh fields in the walk dimension.
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrandKind {
    /// phi(x) = x in one dimension; the integral is W^2/2 exactly.
    Identity,
    /// phi = (-x2, x1)/2 on the plane; the integral is the signed area.
    Area,
    /// phi = 1 in one dimension; the integral is the endpoint itself.
    Constant,
}

/// Raw file/flag layer: every field optional so the defaults can fill in.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<ExperimentKind>,
    pub dim: Option<usize>,
    pub depth: Option<usize>,
    pub distribution: Option<DistributionKind>,
    pub dof: Option<f64>,
    pub normalize: Option<bool>,
    pub scale: Option<f64>,
    pub offset: Option<f64>,
    pub interpolation: Option<InterpolationKind>,
    pub replicas: Option<u64>,
    pub n_schedule: Option<Vec<u64>>,
    pub alpha_schedule: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    pub quantile: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub oracle_replicas: Option<u64>,
    pub oracle_mesh: Option<u64>,
    pub moment_order: Option<u32>,
    pub substeps: Option<usize>,
    pub stat_tolerance_se: Option<f64>,
    pub algebra_tolerance: Option<f64>,
    pub slope_tolerance: Option<f64>,
    pub threads: Option<usize>,
    pub dump_paths: Option<bool>,
    pub holder_refinement: Option<u32>,
    pub field_set: Option<FieldSetKind>,
    pub integrand: Option<IntegrandKind>,
    pub y0: Option<Vec<f64>>,
    pub battery: Option<Vec<String>>,
}

/// CLI flag overlay; wins over both defaults and the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub out_dir: Option<String>,
    pub threads: Option<usize>,
}

/// Fully resolved configuration. Serialization order is the byte order of
/// the report echo, so keep the field list stable.
#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub experiment: ExperimentKind,
    pub dim: usize,
    pub depth: usize,
    pub distribution: DistributionKind,
    pub dof: Option<f64>,
    pub normalize: bool,
    pub scale: f64,
    pub offset: f64,
    pub interpolation: InterpolationKind,
    pub replicas: u64,
    pub n_schedule: Vec<u64>,
    pub alpha_schedule: Vec<f64>,
    pub p: f64,
    pub seed: u64,
    pub out_dir: String,
    pub quantile: f64,
    pub lambda_grid: Vec<f64>,
    pub oracle_replicas: u64,
    pub oracle_mesh: u64,
    pub moment_order: u32,
    pub substeps: usize,
    pub stat_tolerance_se: f64,
    pub algebra_tolerance: f64,
    pub slope_tolerance: f64,
    pub threads: usize,
    pub dump_paths: bool,
    pub holder_refinement: u32,
    pub field_set: FieldSetKind,
    pub integrand: IntegrandKind,
    pub y0: Option<Vec<f64>>,
    pub battery: Option<Vec<String>>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String, std::io::Error),
    Parse(String),
    ExperimentMismatch { file: &'static str, requested: &'static str },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(path, e) => write!(f, "cannot read config {path}: {e}"),
            ConfigError::Parse(e) => write!(f, "config is not valid JSON for this schema: {e}"),
            ConfigError::ExperimentMismatch { file, requested } => write!(
                f,
                "config file names experiment {file}, but {requested} was requested"
            ),
            ConfigError::Invalid(why) => write!(f, "invalid config: {why}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(why: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(why.into())
}

pub fn load_raw(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Per-experiment defaults; the file layer and flags override them.
fn defaults(kind: ExperimentKind) -> RawConfig {
    let mut d = RawConfig {
        dim: Some(2),
        depth: Some(2),
        distribution: Some(DistributionKind::Rademacher),
        normalize: Some(true),
        scale: Some(1.0),
        offset: Some(0.0),
        interpolation: Some(InterpolationKind::Linear),
        replicas: Some(10_000),
        n_schedule: Some(vec![64, 256, 1024]),
        alpha_schedule: Some(vec![0.45, 0.75]),
        p: Some(4.0),
        seed: Some(20_260_821),
        out_dir: Some("out".into()),
        quantile: Some(0.95),
        lambda_grid: Some(vec![0.0, 0.5, 1.0, 2.0]),
        oracle_replicas: Some(100_000),
        oracle_mesh: Some(4096),
        moment_order: Some(4),
        substeps: Some(1),
        stat_tolerance_se: Some(3.0),
        algebra_tolerance: Some(1e-10),
        slope_tolerance: Some(0.2),
        threads: Some(1),
        dump_paths: Some(false),
        holder_refinement: Some(0),
        field_set: Some(FieldSetKind::PlanarRotation),
        integrand: Some(IntegrandKind::Area),
        ..RawConfig::default()
    };
    match kind {
        ExperimentKind::FddClt => {
            d.dim = Some(1);
            d.n_schedule = Some(vec![4, 16, 64, 256]);
        }
        ExperimentKind::LevyArea => {
            d.n_schedule = Some(vec![1024]);
        }
        ExperimentKind::MomentScaling => {
            d.dim = Some(1);
            d.n_schedule = Some(vec![16, 32, 64, 128, 256]);
        }
        ExperimentKind::HolderThreshold => {
            d.dim = Some(1);
            d.distribution = Some(DistributionKind::Gaussian);
            d.replicas = Some(1000);
            d.n_schedule = Some(vec![64, 128, 256, 512, 1024, 2048, 4096]);
        }
        ExperimentKind::WongZakai => {
            d.oracle_mesh = Some(8192);
        }
        ExperimentKind::StochasticIntegral => {
            d.n_schedule = Some(vec![256, 1024]);
            d.oracle_replicas = Some(20_000);
        }
        ExperimentKind::SymbolicAudit => {
            d.replicas = Some(20_000);
        }
    }
    d
}

fn overlay(base: RawConfig, top: RawConfig) -> RawConfig {
    macro_rules! pick {
        ($field:ident) => {
            top.$field.or(base.$field)
        };
    }
    RawConfig {
        experiment: pick!(experiment),
        dim: pick!(dim),
        depth: pick!(depth),
        distribution: pick!(distribution),
        dof: pick!(dof),
        normalize: pick!(normalize),
        scale: pick!(scale),
        offset: pick!(offset),
        interpolation: pick!(interpolation),
        replicas: pick!(replicas),
        n_schedule: pick!(n_schedule),
        alpha_schedule: pick!(alpha_schedule),
        p: pick!(p),
        seed: pick!(seed),
        out_dir: pick!(out_dir),
        quantile: pick!(quantile),
        lambda_grid: pick!(lambda_grid),
        oracle_replicas: pick!(oracle_replicas),
        oracle_mesh: pick!(oracle_mesh),
        moment_order: pick!(moment_order),
        substeps: pick!(substeps),
        stat_tolerance_se: pick!(stat_tolerance_se),
        algebra_tolerance: pick!(algebra_tolerance),
        slope_tolerance: pick!(slope_tolerance),
        threads: pick!(threads),
        dump_paths: pick!(dump_paths),
        holder_refinement: pick!(holder_refinement),
        field_set: pick!(field_set),
        integrand: pick!(integrand),
        y0: pick!(y0),
        battery: pick!(battery),
    }
}

pub fn resolve(
    kind: ExperimentKind,
    file: Option<RawConfig>,
    flags: Overrides,
) -> Result<Config, ConfigError> {
    let file = file.unwrap_or_default();
    if let Some(declared) = file.experiment {
        if declared != kind {
            return Err(ConfigError::ExperimentMismatch {
                file: declared.name(),
                requested: kind.name(),
            });
        }
    }
    let mut merged = overlay(defaults(kind), file);
    if let Some(seed) = flags.seed {
        merged.seed = Some(seed);
    }
    if let Some(replicas) = flags.replicas {
        merged.replicas = Some(replicas);
    }
    if let Some(out_dir) = flags.out_dir {
        merged.out_dir = Some(out_dir);
    }
    if let Some(threads) = flags.threads {
        merged.threads = Some(threads);
    }

    let cfg = Config {
        experiment: kind,
        dim: merged.dim.unwrap(),
        depth: merged.depth.unwrap(),
        distribution: merged.distribution.unwrap(),
        dof: merged.dof,
        normalize: merged.normalize.unwrap(),
        scale: merged.scale.unwrap(),
        offset: merged.offset.unwrap(),
        interpolation: merged.interpolation.unwrap(),
        replicas: merged.replicas.unwrap(),
        n_schedule: merged.n_schedule.unwrap(),
        alpha_schedule: merged.alpha_schedule.unwrap(),
        p: merged.p.unwrap(),
        seed: merged.seed.unwrap(),
        out_dir: merged.out_dir.unwrap(),
        quantile: merged.quantile.unwrap(),
        lambda_grid: merged.lambda_grid.unwrap(),
        oracle_replicas: merged.oracle_replicas.unwrap(),
        oracle_mesh: merged.oracle_mesh.unwrap(),
        moment_order: merged.moment_order.unwrap(),
        substeps: merged.substeps.unwrap(),
        stat_tolerance_se: merged.stat_tolerance_se.unwrap(),
        algebra_tolerance: merged.algebra_tolerance.unwrap(),
        slope_tolerance: merged.slope_tolerance.unwrap(),
        threads: merged.threads.unwrap(),
        dump_paths: merged.dump_paths.unwrap(),
        holder_refinement: merged.holder_refinement.unwrap(),
        field_set: merged.field_set.unwrap(),
        integrand: merged.integrand.unwrap(),
        y0: merged.y0,
        battery: merged.battery,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &Config) -> Result<(), ConfigError> {
    if cfg.dim == 0 || cfg.dim > 8 {
        return Err(invalid(format!("dim must be in 1..=8, got {}", cfg.dim)));
    }
    if cfg.depth == 0 || cfg.depth > 8 {
        return Err(invalid(format!("depth must be in 1..=8, got {}", cfg.depth)));
    }
    if cfg.replicas == 0 {
        return Err(invalid("replicas must be >= 1"));
    }
    if cfg.n_schedule.is_empty() {
        return Err(invalid("n_schedule must be non-empty"));
    }
    if cfg.n_schedule.iter().any(|&n| n == 0) {
        return Err(invalid("n_schedule entries must be >= 1"));
    }
    if cfg.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n_schedule must be strictly increasing"));
    }
    if cfg.alpha_schedule.is_empty() {
        return Err(invalid("alpha_schedule must be non-empty"));
    }
    if cfg.alpha_schedule.iter().any(|a| !(a.is_finite() && *a > 0.0 && *a < 1.0)) {
        return Err(invalid("alpha_schedule entries must lie strictly in (0, 1)"));
    }
    if cfg.alpha_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("alpha_schedule must be strictly increasing"));
    }
    if !(cfg.p.is_finite() && cfg.p > 1.0) {
        return Err(invalid(format!("p must be finite and > 1, got {}", cfg.p)));
    }
    if !(cfg.quantile > 0.0 && cfg.quantile < 1.0) {
        return Err(invalid("quantile must lie strictly in (0, 1)"));
    }
    if cfg.lambda_grid.is_empty() || cfg.lambda_grid.iter().any(|l| !l.is_finite()) {
        return Err(invalid("lambda_grid must be non-empty and finite"));
    }
    if cfg.oracle_replicas == 0 {
        return Err(invalid("oracle_replicas must be >= 1"));
    }
    if cfg.oracle_mesh < 2 {
        return Err(invalid("oracle_mesh must be >= 2"));
    }
    if cfg.moment_order < 2 || cfg.moment_order % 2 != 0 {
        return Err(invalid(format!(
            "moment_order must be an even integer >= 2, got {}",
            cfg.moment_order
        )));
    }
    if cfg.substeps == 0 {
        return Err(invalid("substeps must be >= 1"));
    }
    if cfg.threads == 0 {
        return Err(invalid("threads must be >= 1"));
    }
    if !(cfg.stat_tolerance_se.is_finite() && cfg.stat_tolerance_se > 0.0) {
        return Err(invalid("stat_tolerance_se must be positive"));
    }
    if !(cfg.algebra_tolerance.is_finite() && cfg.algebra_tolerance > 0.0) {
        return Err(invalid("algebra_tolerance must be positive"));
    }
    if !(cfg.slope_tolerance.is_finite() && cfg.slope_tolerance > 0.0) {
        return Err(invalid("slope_tolerance must be positive"));
    }
    if cfg.holder_refinement > 16 {
        return Err(invalid("holder_refinement must be <= 16"));
    }
    match cfg.distribution {
        DistributionKind::StudentT => {
            let dof = cfg.dof.ok_or_else(|| invalid("student-t requires dof"))?;
            if !(dof.is_finite() && dof > 2.0) {
                return Err(invalid(format!(
                    "student-t dof must be finite and > 2 for unit variance, got {dof}"
                )));
            }
        }
        _ => {
            if cfg.dof.is_some() {
                return Err(invalid("dof is only meaningful for the student-t law"));
            }
        }
    }
    if cfg.normalize && (cfg.scale != 1.0 || cfg.offset != 0.0) {
        return Err(invalid("normalize: true conflicts with scale/offset"));
    }
    if !cfg.scale.is_finite() || !cfg.offset.is_finite() {
        return Err(invalid("scale and offset must be finite"));
    }
    if let Some(y0) = &cfg.y0 {
        if y0.is_empty() || y0.iter().any(|v| !v.is_finite()) {
            return Err(invalid("y0 must be non-empty and finite"));
        }
    }
    match cfg.experiment {
        ExperimentKind::LevyArea => {
            if cfg.dim != 2 {
                return Err(invalid("levy-area requires dim = 2"));
            }
            if cfg.depth < 2 {
                return Err(invalid("levy-area requires depth >= 2"));
            }
        }
        ExperimentKind::WongZakai => {
            let need = match cfg.field_set {
                FieldSetKind::PlanarRotation => Some(2),
                FieldSetKind::ScalarLinear => Some(1),
                FieldSetKind::Tanh => None,
            };
            if let Some(need) = need {
                if cfg.dim != need {
                    return Err(invalid(format!(
                        "field_set needs a {need}-dimensional driver, config has dim {}",
                        cfg.dim
                    )));
                }
            }
            if cfg.depth < 2 {
                return Err(invalid("wong-zakai requires depth >= 2"));
            }
            if let Some(y0) = &cfg.y0 {
                let state = state_dim(cfg);
                if y0.len() != state {
                    return Err(invalid(format!(
                        "y0 has {} entries, fields expect {state}",
                        y0.len()
                    )));
                }
            }
        }
        ExperimentKind::StochasticIntegral => {
            let need = match cfg.integrand {
                IntegrandKind::Identity | IntegrandKind::Constant => 1,
                IntegrandKind::Area => 2,
            };
            if cfg.dim != need {
                return Err(invalid(format!(
                    "integrand needs dim = {need}, config has dim {}",
                    cfg.dim
                )));
            }
            if cfg.depth < 2 {
                return Err(invalid("stochastic-integral requires depth >= 2"));
            }
            if cfg.interpolation != InterpolationKind::Linear {
                return Err(invalid(
                    "stochastic-integral integrates along chords; interpolation must be linear",
                ));
            }
        }
        ExperimentKind::HolderThreshold | ExperimentKind::FddClt => {
            if cfg.depth < 2 {
                return Err(invalid("this experiment requires depth >= 2"));
            }
        }
        _ => {}
    }
    if let Some(battery) = &cfg.battery {
        for name in battery {
            if !crate::experiments::symbolic_audit::BATTERY.contains(&name.as_str()) {
                return Err(invalid(format!(
                    "unknown battery case {name:?}; known cases: {}",
                    crate::experiments::symbolic_audit::BATTERY.join(", ")
                )));
            }
        }
    }
    Ok(())
}

/// State dimension of the configured vector fields.
pub fn state_dim(cfg: &Config) -> usize {
    match cfg.field_set {
        FieldSetKind::PlanarRotation => 2,
        FieldSetKind::ScalarLinear => 1,
        FieldSetKind::Tanh => cfg.dim,
    }
}

impl Config {
    pub fn increment_distribution(&self) -> IncrementDistribution {
        let kind = match self.distribution {
            DistributionKind::Rademacher => IncrementKind::Rademacher,
            DistributionKind::Gaussian => IncrementKind::Gaussian,
            DistributionKind::Uniform => IncrementKind::Uniform,
            DistributionKind::StudentT => IncrementKind::StudentT {
                dof: self.dof.expect("validated"),
            },
            DistributionKind::TwoPointAsymmetric => IncrementKind::TwoPointAsymmetric,
        };
        if self.normalize {
            IncrementDistribution::standardized(kind, self.dim).expect("validated")
        } else {
            IncrementDistribution::with_affine(kind, self.dim, self.scale, self.offset)
                .expect("validated")
        }
    }

    /// FNV-1a over the canonical JSON echo of the resolved config.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in text.bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_for_every_experiment() {
        for kind in ExperimentKind::ALL {
            let cfg = resolve(kind, None, Overrides::default()).unwrap();
            assert_eq!(cfg.experiment, kind);
            assert!(cfg.replicas >= 1);
        }
    }

    #[test]
    fn flags_override_file_overrides_defaults() {
        let file = RawConfig {
            seed: Some(7),
            replicas: Some(55),
            ..RawConfig::default()
        };
        let flags = Overrides { seed: Some(9), ..Overrides::default() };
        let cfg = resolve(ExperimentKind::LevyArea, Some(file), flags).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.replicas, 55);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RawConfig>(r#"{"replicas": 10, "repliacs": 2}"#);
        assert!(err.is_err());
    }

    #[test]
    fn experiment_mismatch_is_rejected() {
        let file = RawConfig {
            experiment: Some(ExperimentKind::FddClt),
            ..RawConfig::default()
        };
        assert!(matches!(
            resolve(ExperimentKind::LevyArea, Some(file), Overrides::default()),
            Err(ConfigError::ExperimentMismatch { .. })
        ));
    }

    #[test]
    fn validation_catches_shape_conflicts() {
        let bad_dim = RawConfig { dim: Some(3), ..RawConfig::default() };
        assert!(resolve(ExperimentKind::LevyArea, Some(bad_dim), Overrides::default()).is_err());

        let heavy = RawConfig {
            distribution: Some(DistributionKind::StudentT),
            dof: Some(1.5),
            ..RawConfig::default()
        };
        assert!(resolve(ExperimentKind::FddClt, Some(heavy), Overrides::default()).is_err());

        let conflict = RawConfig {
            normalize: Some(true),
            scale: Some(2.0),
            ..RawConfig::default()
        };
        assert!(resolve(ExperimentKind::FddClt, Some(conflict), Overrides::default()).is_err());

        let stray_dof = RawConfig { dof: Some(5.0), ..RawConfig::default() };
        assert!(resolve(ExperimentKind::FddClt, Some(stray_dof), Overrides::default()).is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = resolve(ExperimentKind::FddClt, None, Overrides::default()).unwrap();
        let b = resolve(ExperimentKind::FddClt, None, Overrides::default()).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = resolve(
            ExperimentKind::FddClt,
            None,
            Overrides { seed: Some(1), ..Overrides::default() },
        )
        .unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
