//! JSON run configuration: representation pair, truncation, solver and
//! oracle knobs. Parsing is lossless (round-trip tested) and the config hash
//! is taken over a canonicalized value, so key order in the file does not
//! matter.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use manhattan_core::coding::TruncationParams;
use manhattan_core::curve::SolveParams;
use manhattan_core::moebius::{BoundaryArc, Isometry, PlanePoint};
use manhattan_core::orbit::EnumerationBudget;
use manhattan_core::schottky::{GenKind, GeneratorSpec, RepPair, SchottkyRep};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub label: String,
    /// "hyperbolic" or "parabolic".
    pub kind: String,
    /// Row-major [m11, m12, m21, m22], determinant 1 up to rounding.
    pub matrix: [f64; 4],
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    pub label: String,
    #[serde(default)]
    pub inverse: bool,
    /// Counterclockwise angle interval in disk coordinates, radians.
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RepConfig {
    pub generators: Vec<GeneratorConfig>,
    /// Basepoint in the upper half-plane as [re, im]; defaults to i.
    #[serde(default = "default_basepoint")]
    pub basepoint: [f64; 2],
    /// Explicit ping-pong arcs; derived from isometric circles when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<ArcConfig>>,
}

fn default_basepoint() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub rho1: RepConfig,
    pub rho2: RepConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_max_power")]
    pub max_power: i32,
    /// Anchor cylinder as [label, exponent].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<(String, i32)>,
}

fn default_n_max() -> usize {
    TruncationParams::default().n_max
}
fn default_max_power() -> i32 {
    TruncationParams::default().max_power
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            n_max: default_n_max(),
            max_power: default_max_power(),
            anchor: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol_root")]
    pub tol_root: f64,
    #[serde(default = "default_rays")]
    pub rays: usize,
}

fn default_tol_root() -> f64 {
    1e-4
}
fn default_rays() -> usize {
    33
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_root: default_tol_root(),
            rays: default_rays(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_max_blocks")]
    pub max_blocks: usize,
    #[serde(default = "default_oracle_power")]
    pub max_power: i32,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
    /// Weight rays compared against Bowen roots.
    #[serde(default = "default_weights")]
    pub weights: Vec<(f64, f64)>,
    #[serde(default = "default_thurston_period")]
    pub thurston_period: usize,
    #[serde(default = "default_thurston_power")]
    pub thurston_power: i32,
    #[serde(default = "default_thurston_cap")]
    pub thurston_cap: f64,
}

fn default_max_blocks() -> usize {
    8
}
fn default_oracle_power() -> i32 {
    20
}
fn default_max_samples() -> usize {
    200_000
}
fn default_weights() -> Vec<(f64, f64)> {
    vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]
}
fn default_thurston_period() -> usize {
    3
}
fn default_thurston_power() -> i32 {
    6
}
fn default_thurston_cap() -> f64 {
    14.0
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_blocks: default_max_blocks(),
            max_power: default_oracle_power(),
            max_samples: default_max_samples(),
            weights: default_weights(),
            thurston_period: default_thurston_period(),
            thurston_power: default_thurston_power(),
            thurston_cap: default_thurston_cap(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pair: PairConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    7
}

/// Errors attributable to the configuration file itself.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}
impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    /// SHA-256 over the canonical (sorted-key) JSON serialization, so two
    /// files differing only in key order or whitespace hash identically.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("canonical form");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_rep(rep: &RepConfig) -> Result<SchottkyRep, ConfigError> {
        let mut generators = Vec::new();
        for g in &rep.generators {
            let kind = match g.kind.as_str() {
                "hyperbolic" => GenKind::Hyperbolic,
                "parabolic" => GenKind::Parabolic,
                other => {
                    return Err(ConfigError(format!(
                        "generator `{}`: unknown kind `{other}`",
                        g.label
                    )))
                }
            };
            let m = Isometry::new(g.matrix[0], g.matrix[1], g.matrix[2], g.matrix[3])
                .map_err(|e| ConfigError(format!("generator `{}`: {e}", g.label)))?;
            generators.push(GeneratorSpec {
                label: g.label.clone(),
                kind,
                matrix: m,
            });
        }
        let basepoint = PlanePoint::new(rep.basepoint[0], rep.basepoint[1])
            .map_err(|e| ConfigError(e.to_string()))?;
        match &rep.arcs {
            None => SchottkyRep::auto_arcs(generators, basepoint)
                .map_err(|e| ConfigError(e.to_string())),
            Some(arc_list) => {
                let mut arcs = BTreeMap::new();
                for a in arc_list {
                    let idx = generators
                        .iter()
                        .position(|g| g.label == a.label)
                        .ok_or_else(|| ConfigError(format!("arc references unknown label `{}`", a.label)))?;
                    let arc = BoundaryArc::from_endpoints_ccw(a.start, a.end)
                        .map_err(|e| ConfigError(format!("arc for `{}`: {e}", a.label)))?;
                    arcs.insert((idx, a.inverse), arc);
                }
                SchottkyRep::with_arcs(generators, arcs, basepoint)
                    .map_err(|e| ConfigError(e.to_string()))
            }
        }
    }

    pub fn build_pair(&self) -> Result<RepPair, ConfigError> {
        let rho1 = Self::build_rep(&self.pair.rho1)?;
        let rho2 = Self::build_rep(&self.pair.rho2)?;
        RepPair::new(rho1, rho2).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn truncation_params(&self, pair: &RepPair) -> Result<TruncationParams, ConfigError> {
        let anchor = match &self.truncation.anchor {
            None => TruncationParams::default().anchor,
            Some((label, m)) => {
                let idx = pair
                    .rho1
                    .letter_index(label)
                    .map_err(|e| ConfigError(e.to_string()))?;
                Some((idx, *m))
            }
        };
        let params = TruncationParams {
            n_max: self.truncation.n_max,
            max_power: self.truncation.max_power,
            anchor,
        };
        params.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(params)
    }

    pub fn solve_params(&self) -> SolveParams {
        SolveParams {
            tol_root: self.solver.tol_root,
            ..Default::default()
        }
    }

    pub fn budget(&self) -> EnumerationBudget {
        EnumerationBudget {
            max_blocks: self.oracle.max_blocks,
            max_power: self.oracle.max_power,
            max_samples: self.oracle.max_samples,
        }
    }
}
