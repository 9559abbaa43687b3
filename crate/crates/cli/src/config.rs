//! Declarative experiment documents.

use crate::error::{CliError, CliResult};
use conewarp::cone_geom::{Fiber, FiberMeasure};
use conewarp::densities::{DensityKind, Kink};
use conewarp::transport::DiscreteMeasure;
use conewarp::verify::{
    CdconConfig, CellMeasure, HawkingConfig, NeedleConfig, Rect, SplittingConfig,
};
use conewarp::warp::{catalog, compute_eta};
use conewarp::{CatalogEntry, ConeSpec, DensityProfile, ModelTag, WarpingFunction};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub cone: ConeConfig,
    /// Run seed; per-verifier seeds are offsets from it.
    #[serde(default)]
    pub seed: u64,
    /// Default cells per side for grid-based verifiers.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    pub verifiers: Vec<VerifierConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_resolution() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Report directory, relative to the working directory.
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "reports".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WarperSpec {
    Catalog(CatalogEntry),
    Custom(WarpingFunction),
}

/// Closed-form fiber density; the dimension comes from the cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDensity {
    pub tag: ModelTag,
    pub domain: [f64; 2],
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kink: Option<Kink>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Model(ModelDensity),
    Profile(DensityProfile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    pub warper: WarperSpec,
    /// Curvature of the warper inequality; catalog rows supply their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(rename = "N")]
    pub n: f64,
    pub density: DensitySpec,
}

/// Resolved cone data shared by all verifiers.
#[derive(Debug, Clone)]
pub struct BuiltCone {
    pub spec: ConeSpec,
    pub density: DensityProfile,
    pub kappa: f64,
    pub eta: f64,
}

impl ConeConfig {
    pub fn build(&self) -> CliResult<BuiltCone> {
        let bad = |e: conewarp::Error| CliError::Config(e.to_string());
        let (warper, kappa) = match &self.warper {
            WarperSpec::Catalog(entry) => {
                let (w, budget) = catalog(*entry);
                (w, self.kappa.unwrap_or(budget.kappa))
            }
            WarperSpec::Custom(w) => {
                w.validate().map_err(bad)?;
                let kappa = self
                    .kappa
                    .ok_or_else(|| CliError::Config("a custom warper needs `kappa`".into()))?;
                (w.clone(), kappa)
            }
        };
        let density = match &self.density {
            DensitySpec::Model(m) => DensityProfile::new(
                m.domain,
                self.n,
                DensityKind::Model {
                    tag: m.tag,
                    scale: m.scale,
                    kink: m.kink,
                },
            )
            .map_err(bad)?,
            DensitySpec::Profile(p) => p.with_n(self.n).map_err(bad)?,
        };
        let fiber = Fiber::Interval {
            a: density.a(),
            b: density.b(),
        };
        let measure = FiberMeasure::Density {
            profile: density.clone(),
        };
        let spec = ConeSpec::new(warper, fiber, self.n, measure).map_err(bad)?;
        let eta = compute_eta(&spec.warper, kappa).eta;
        Ok(BuiltCone {
            spec,
            density,
            kappa,
            eta,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifierConfig {
    /// Warper inequality with the cone's `kappa`.
    Warper {
        #[serde(default = "warper_tol")]
        tolerance: f64,
    },
    /// Fiber density curvature; `eta` defaults to the warper's budget.
    Density {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default = "needle_tol")]
        tolerance: f64,
    },
    Needle(NeedleConfig),
    Contraction {
        #[serde(rename = "K")]
        k: f64,
        source: Rect,
        target: (f64, f64),
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cells: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        times: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Pointwise {
        #[serde(rename = "K")]
        k: f64,
        mu0: CellMeasure,
        mu1: CellMeasure,
        #[serde(default = "half")]
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Hawking(HawkingConfig),
    Volume {
        r0: f64,
    },
    Splitting(SplittingConfig),
    Cdcon {
        #[serde(rename = "K")]
        k: f64,
        #[serde(default = "half")]
        p: f64,
        #[serde(default)]
        settings: CdconConfig,
    },
    /// The perturbation family around the sine cone, with the cone's `N`.
    Converse(NeedleConfig),
}

fn warper_tol() -> f64 {
    1e-9
}

fn needle_tol() -> f64 {
    1e-6
}

fn half() -> f64 {
    0.5
}

impl VerifierConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            VerifierConfig::Warper { .. } => "warper",
            VerifierConfig::Density { .. } => "density",
            VerifierConfig::Needle(_) => "needle",
            VerifierConfig::Contraction { .. } => "contraction",
            VerifierConfig::Pointwise { .. } => "pointwise",
            VerifierConfig::Hawking(_) => "hawking",
            VerifierConfig::Volume { .. } => "volume",
            VerifierConfig::Splitting(_) => "splitting",
            VerifierConfig::Cdcon { .. } => "cdcon",
            VerifierConfig::Converse(_) => "converse",
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.verifiers.is_empty() {
            return Err(CliError::Config("no verifiers listed".into()));
        }
        if self.resolution == 0 {
            return Err(CliError::Config("resolution must be positive".into()));
        }
        self.cone.build()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Input of the `transport` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportInstance {
    pub schema_version: u32,
    pub cone: ConeConfig,
    pub mode: TransportMode,
    pub p: f64,
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    /// Lattice resolution for Riemannian distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    /// `W_p` with the cone distance.
    Metric,
    /// `l_p` with the time separation.
    Lorentz,
}

impl TransportInstance {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let inst: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        if inst.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported",
                inst.schema_version
            )));
        }
        for m in [&inst.mu, &inst.nu] {
            m.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(inst)
    }
}
