//! TOML configuration files.
//!
//! One structured file describes a whole network: the switching
//! topologies as 1-based edge lists, the topology chain, the sensors, the
//! dither noise and the gain schedules. Defaults live at the table level;
//! `[[noise.edge]]` / `[[steps.edge]]` / `[[steps.sensor]]` rows override
//! individual edges and sensors.
//!
//! ```toml
//! [graph]
//! vertex_count = 8
//! [[graph.topology]]
//! edges = [[1, 2, 1.0], [3, 4, 1.0]]
//! [graph.chain]
//! transition = [[0.5, 0.5], [0.5, 0.5]]
//! initial = [0.5, 0.5]
//!
//! [algorithm]
//! dimension = 2
//! use_compression = true
//! threshold_default = 0.0
//!
//! [noise]
//! family = "gaussian"      # gaussian | laplace | cauchy
//! base_scale = 1.0
//! growth_exponent = 0.15
//!
//! [steps]
//! alpha_base = 3.0
//! gamma = 0.8
//! beta_base = 3.0
//! delta = 1.0
//! # k0 = 8                 # omitted: warmup formula
//!
//! [[sensor]]
//! mean_matrix = [[1.0, 0.0]]
//! active_matrix = [[2.0, 0.0]]
//! failure_probability = 0.5
//! obs_noise_std = 0.1
//!
//! [truth]
//! theta = [1.0, -1.0]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimator::{
    default_warmup, AlgorithmConfig, AlphaSchedule, BetaSchedule, StepSizeSchedule,
};
use crate::graph::{EdgeKey, MarkovChain, SwitchingGraphProcess, TopologyModel, TopologySet};
use crate::noise::{NoiseFamily, NoiseSchedule};
use crate::observation::SensorSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: GraphSection,
    pub algorithm: AlgorithmSection,
    pub noise: NoiseSection,
    pub steps: StepsSection,
    pub sensor: Vec<SensorSection>,
    pub truth: Option<TruthSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub vertex_count: usize,
    pub topology: Vec<TopologySection>,
    pub chain: ChainSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    /// `[i, j, weight]` rows, 1-based vertex ids.
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub transition: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub dimension: usize,
    #[serde(default = "default_true")]
    pub use_compression: bool,
    #[serde(default)]
    pub threshold_default: f64,
    /// Initial estimate applied to every sensor; zeros when omitted.
    #[serde(default)]
    pub initial_estimate: Option<Vec<f64>>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub family: NoiseFamily,
    pub base_scale: f64,
    pub growth_exponent: f64,
    #[serde(default)]
    pub edge: Vec<EdgeNoiseSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeNoiseSection {
    pub i: usize,
    pub j: usize,
    pub family: NoiseFamily,
    pub base_scale: f64,
    pub growth_exponent: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsSection {
    pub alpha_base: f64,
    pub gamma: f64,
    pub beta_base: f64,
    pub delta: f64,
    /// Innovation warmup; omitted applies the default formula.
    #[serde(default)]
    pub k0: Option<usize>,
    #[serde(default)]
    pub edge: Vec<EdgeStepsSection>,
    #[serde(default)]
    pub sensor: Vec<SensorStepsSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeStepsSection {
    pub i: usize,
    pub j: usize,
    pub alpha_base: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorStepsSection {
    /// 1-based sensor index.
    pub index: usize,
    pub beta_base: f64,
    pub delta: f64,
    #[serde(default)]
    pub k0: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    /// Row-major mean measurement matrix.
    pub mean_matrix: Vec<Vec<f64>>,
    pub active_matrix: Vec<Vec<f64>>,
    pub failure_probability: f64,
    pub obs_noise_std: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSection {
    pub theta: Vec<f64>,
}

/// A parsed file together with the validated runtime configuration.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub file: ConfigFile,
    pub algorithm: AlgorithmConfig,
    pub theta: Option<DVector<f64>>,
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let algorithm = build_algorithm(&file)?;
    let theta = file
        .truth
        .as_ref()
        .map(|t| DVector::from_column_slice(&t.theta));
    if let Some(theta) = &theta {
        if theta.len() != algorithm.dimension() {
            return Err(Error::Dimension(format!(
                "truth.theta has length {}, algorithm.dimension is {}",
                theta.len(),
                algorithm.dimension()
            )));
        }
    }
    Ok(LoadedConfig {
        file,
        algorithm,
        theta,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Parse(format!("{what} must have at least one row")));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("{what} rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn build_algorithm(file: &ConfigFile) -> Result<AlgorithmConfig> {
    let edge_lists: Vec<Vec<(usize, usize, f64)>> = file
        .graph
        .topology
        .iter()
        .map(|t| t.edges.clone())
        .collect();
    if edge_lists.is_empty() {
        return Err(Error::Parse(
            "graph needs at least one [[graph.topology]] table".into(),
        ));
    }
    let topologies = TopologySet::from_edge_lists(file.graph.vertex_count, &edge_lists)?;
    let chain = MarkovChain::from_rows(&file.graph.chain.transition, &file.graph.chain.initial)?;
    let process = SwitchingGraphProcess::new(topologies, chain)?;
    let topology = TopologyModel::Switching(process);

    let sensors: Vec<SensorSpec> = file
        .sensor
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let mean =
                matrix_from_rows(&s.mean_matrix, &format!("sensor {} mean_matrix", idx + 1))?;
            let active = matrix_from_rows(
                &s.active_matrix,
                &format!("sensor {} active_matrix", idx + 1),
            )?;
            SensorSpec::gaussian(mean, active, s.failure_probability, s.obs_noise_std)
        })
        .collect::<Result<_>>()?;

    let union_edges = topology.union_edges();
    let resolve_edge = |i: usize, j: usize, what: &str| -> Result<EdgeKey> {
        if i == 0 || j == 0 {
            return Err(Error::Parse(format!("{what}: vertex ids are 1-based")));
        }
        let key = EdgeKey::new(i - 1, j - 1)?;
        if !union_edges.contains(&key) {
            return Err(Error::Parse(format!(
                "{what}: edge ({i}, {j}) is not in the union graph"
            )));
        }
        Ok(key)
    };

    let default_noise = NoiseSchedule::new(
        file.noise.family,
        file.noise.base_scale,
        file.noise.growth_exponent,
    )?;
    let mut noise: BTreeMap<EdgeKey, NoiseSchedule> =
        union_edges.iter().map(|&e| (e, default_noise)).collect();
    for o in &file.noise.edge {
        let key = resolve_edge(o.i, o.j, "[[noise.edge]]")?;
        noise.insert(
            key,
            NoiseSchedule::new(o.family, o.base_scale, o.growth_exponent)?,
        );
    }

    let default_alpha = AlphaSchedule {
        base: file.steps.alpha_base,
        exponent: file.steps.gamma,
    };
    let mut edge_alpha: BTreeMap<EdgeKey, AlphaSchedule> =
        union_edges.iter().map(|&e| (e, default_alpha)).collect();
    for o in &file.steps.edge {
        let key = resolve_edge(o.i, o.j, "[[steps.edge]]")?;
        edge_alpha.insert(
            key,
            AlphaSchedule {
                base: o.alpha_base,
                exponent: o.gamma,
            },
        );
    }

    let default_beta = BetaSchedule {
        base: file.steps.beta_base,
        exponent: file.steps.delta,
        warmup: file
            .steps
            .k0
            .unwrap_or_else(|| default_warmup(file.steps.beta_base, file.steps.delta)),
    };
    let mut sensor_beta = vec![default_beta; sensors.len()];
    for o in &file.steps.sensor {
        if o.index == 0 || o.index > sensors.len() {
            return Err(Error::Parse(format!(
                "[[steps.sensor]]: index {} out of range (1..={})",
                o.index,
                sensors.len()
            )));
        }
        sensor_beta[o.index - 1] = BetaSchedule {
            base: o.beta_base,
            exponent: o.delta,
            warmup: o.k0.unwrap_or_else(|| default_warmup(o.beta_base, o.delta)),
        };
    }
    let steps = StepSizeSchedule::new(edge_alpha, sensor_beta)?;

    let thresholds: BTreeMap<EdgeKey, f64> = union_edges
        .iter()
        .map(|&e| (e, file.algorithm.threshold_default))
        .collect();

    let initial = file
        .algorithm
        .initial_estimate
        .as_ref()
        .map(|v| vec![DVector::from_column_slice(v); sensors.len()]);

    AlgorithmConfig::new(
        topology,
        sensors,
        file.algorithm.dimension,
        file.algorithm.use_compression,
        thresholds,
        noise,
        steps,
        initial,
    )
}
