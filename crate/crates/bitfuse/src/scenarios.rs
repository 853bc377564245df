//! Ready-made configurations for the shipped studies.
//!
//! The flagship setup is an eight-sensor network switching among four
//! topologies (each a strict subgraph, union connected) driven by a
//! cyclic-shift Markov chain whose stationary distribution is uniform.
//! Odd sensors observe the first coordinate and even sensors the second,
//! each failing half the time, with observation noise 0.1. Gains are
//! `alpha = 3/k^0.8` and `beta = 3/k` from step 8 on, threshold 0, and
//! dither scale `k^0.15` in the family of choice.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimator::{default_warmup, AlgorithmConfig, AlphaSchedule, BetaSchedule};
use crate::graph::{
    EdgeOnOffProcess, MarkovChain, SwitchingGraphProcess, TopologyModel, TopologySet,
};
use crate::noise::{NoiseFamily, NoiseSchedule};
use crate::observation::{ObservationNoise, SensorSpec};

/// Seed that fixes the high-dimensional true parameter draw.
pub const HIGHDIM_THETA_SEED: u64 = 2;

/// The four 8-vertex switching topologies. Edges are unit-weighted; most
/// union edges live in exactly one topology, edge (4, 8) in two.
pub fn reference_topologies() -> TopologySet {
    let lists: Vec<Vec<(usize, usize, f64)>> = vec![
        vec![(1, 2, 1.0), (3, 4, 1.0), (5, 6, 1.0), (7, 8, 1.0)],
        vec![(2, 3, 1.0), (4, 5, 1.0), (6, 7, 1.0), (1, 8, 1.0)],
        vec![(1, 3, 1.0), (5, 7, 1.0), (2, 6, 1.0), (4, 8, 1.0)],
        vec![(2, 4, 1.0), (6, 8, 1.0), (3, 7, 1.0), (4, 8, 1.0)],
    ];
    TopologySet::from_edge_lists(8, &lists).expect("fixture topologies are well-formed")
}

/// Cyclic-shift transition matrix with 1/2 on the diagonal; uniform
/// initial distribution, so the chain starts stationary.
pub fn reference_chain() -> MarkovChain {
    let rows = vec![
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.0, 0.5, 0.5, 0.0],
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.5, 0.0, 0.0, 0.5],
    ];
    MarkovChain::from_rows(&rows, &[0.25, 0.25, 0.25, 0.25]).expect("fixture chain is well-formed")
}

pub fn reference_graph_process() -> SwitchingGraphProcess {
    SwitchingGraphProcess::new(reference_topologies(), reference_chain())
        .expect("fixture process is well-formed")
}

/// True parameter of the two-dimensional studies.
pub fn reference_theta() -> DVector<f64> {
    DVector::from_column_slice(&[1.0, -1.0])
}

/// Eight sensors: odd ones (1-based) measure `[2 0]` when alive, even
/// ones `[0 2]`; each fails with probability 1/2, so the mean matrices
/// are `[1 0]` and `[0 1]`.
pub fn reference_sensors() -> Vec<SensorSpec> {
    (0..8)
        .map(|i| {
            let (mean, active) = if i % 2 == 0 {
                ([1.0, 0.0], [2.0, 0.0])
            } else {
                ([0.0, 1.0], [0.0, 2.0])
            };
            SensorSpec::gaussian(
                DMatrix::from_row_slice(1, 2, &mean),
                DMatrix::from_row_slice(1, 2, &active),
                0.5,
                0.1,
            )
            .expect("fixture sensors are well-formed")
        })
        .collect()
}

/// Knobs of the eight-sensor setup that the studies vary.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceVariant {
    pub family: NoiseFamily,
    pub noise_base: f64,
    pub noise_growth: f64,
    pub alpha_base: f64,
    pub gamma: f64,
    pub beta_base: f64,
    pub delta: f64,
    /// Innovation warmup; `None` applies the default formula.
    pub warmup: Option<usize>,
    pub use_compression: bool,
}

impl Default for ReferenceVariant {
    fn default() -> Self {
        ReferenceVariant {
            family: NoiseFamily::Gaussian,
            noise_base: 1.0,
            noise_growth: 0.15,
            alpha_base: 3.0,
            gamma: 0.8,
            beta_base: 3.0,
            delta: 1.0,
            warmup: None,
            use_compression: true,
        }
    }
}

pub fn reference_config_variant(v: &ReferenceVariant) -> AlgorithmConfig {
    let topology = TopologyModel::Switching(reference_graph_process());
    let warmup = v
        .warmup
        .unwrap_or_else(|| default_warmup(v.beta_base, v.delta));
    AlgorithmConfig::uniform(
        topology,
        reference_sensors(),
        2,
        v.use_compression,
        0.0,
        NoiseSchedule::new(v.family, v.noise_base, v.noise_growth)
            .expect("fixture noise is well-formed"),
        AlphaSchedule {
            base: v.alpha_base,
            exponent: v.gamma,
        },
        BetaSchedule {
            base: v.beta_base,
            exponent: v.delta,
            warmup,
        },
    )
    .expect("fixture config is well-formed")
}

/// The eight-sensor configuration with the given dither family.
pub fn reference_config(family: NoiseFamily) -> AlgorithmConfig {
    reference_config_variant(&ReferenceVariant {
        family,
        ..ReferenceVariant::default()
    })
}

pub fn reference_config_with_gamma(family: NoiseFamily, gamma: f64) -> AlgorithmConfig {
    reference_config_variant(&ReferenceVariant {
        family,
        gamma,
        ..ReferenceVariant::default()
    })
}

pub fn reference_config_with_growth(family: NoiseFamily, noise_growth: f64) -> AlgorithmConfig {
    reference_config_variant(&ReferenceVariant {
        family,
        noise_growth,
        ..ReferenceVariant::default()
    })
}

/// Same sensors and gains, but all four topologies emptied: the
/// no-communication baseline.
pub fn no_comm_config(family: NoiseFamily) -> AlgorithmConfig {
    let empty = TopologySet::new(8, vec![DMatrix::zeros(8, 8); 4])
        .expect("empty topology set is well-formed");
    let topology = TopologyModel::Switching(
        SwitchingGraphProcess::new(empty, reference_chain()).expect("well-formed"),
    );
    AlgorithmConfig::uniform(
        topology,
        reference_sensors(),
        2,
        true,
        0.0,
        NoiseSchedule::new(family, 1.0, 0.15).expect("well-formed"),
        AlphaSchedule {
            base: 3.0,
            exponent: 0.8,
        },
        BetaSchedule {
            base: 3.0,
            exponent: 1.0,
            warmup: 8,
        },
    )
    .expect("well-formed")
}

/// Twelve-dimensional variant: odd sensors observe the first six
/// coordinates, even ones the last six (`[I6 0]` / `[0 I6]` mean
/// matrices), same failures, gains and dither as the flagship setup.
pub fn highdim_config(use_compression: bool) -> AlgorithmConfig {
    let n = 12;
    let sensors: Vec<SensorSpec> = (0..8)
        .map(|i| {
            let mut mean = DMatrix::zeros(6, n);
            let offset = if i % 2 == 0 { 0 } else { 6 };
            for r in 0..6 {
                mean[(r, offset + r)] = 1.0;
            }
            let active = &mean * 2.0;
            SensorSpec::gaussian(mean, active, 0.5, 0.1).expect("well-formed")
        })
        .collect();
    let topology = TopologyModel::Switching(reference_graph_process());
    AlgorithmConfig::uniform(
        topology,
        sensors,
        n,
        use_compression,
        0.0,
        NoiseSchedule::new(NoiseFamily::Gaussian, 1.0, 0.15).expect("well-formed"),
        AlphaSchedule {
            base: 3.0,
            exponent: 0.8,
        },
        BetaSchedule {
            base: 3.0,
            exponent: 1.0,
            warmup: 8,
        },
    )
    .expect("well-formed")
}

/// The fixed high-dimensional true parameter, uniform on `[-1, 1]^12`.
pub fn highdim_theta() -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(HIGHDIM_THETA_SEED);
    DVector::from_fn(12, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

/// Event-rate study parameters.
#[derive(Debug, Clone, Copy)]
pub struct EventRateSetup {
    pub sensor_count: usize,
    pub participation: f64,
    /// Trade-off knob: dither scale grows like `k^{(chi-1)/2}` and the
    /// fusion gain decays like `k^{(2.9-chi)/2}`.
    pub chi: f64,
}

impl Default for EventRateSetup {
    fn default() -> Self {
        EventRateSetup {
            sensor_count: 20,
            participation: 0.7,
            chi: 1.3,
        }
    }
}

/// Scalar event-rate network: binary observations over a complete union
/// graph whose edges flip on/off independently (stay probability 0.7,
/// initial on-probability 0.5).
pub fn event_rate_config(setup: &EventRateSetup) -> AlgorithmConfig {
    let n = setup.sensor_count;
    let process = EdgeOnOffProcess::complete(n, 1.0, 0.5, 0.7, 0.7).expect("well-formed");
    let sensors: Vec<SensorSpec> = (0..n)
        .map(|_| {
            SensorSpec::new(
                DMatrix::from_row_slice(1, 1, &[setup.participation]),
                DMatrix::from_row_slice(1, 1, &[1.0]),
                1.0 - setup.participation,
                ObservationNoise::BernoulliEvent,
            )
            .expect("well-formed")
        })
        .collect();
    let beta_base = 0.4;
    AlgorithmConfig::uniform(
        TopologyModel::IndependentEdges(process),
        sensors,
        1,
        true,
        0.0,
        NoiseSchedule::new(NoiseFamily::Gaussian, 1.0, (setup.chi - 1.0) / 2.0)
            .expect("well-formed"),
        AlphaSchedule {
            base: 0.2,
            exponent: (2.9 - setup.chi) / 2.0,
        },
        BetaSchedule {
            base: beta_base,
            exponent: 1.0,
            warmup: default_warmup(beta_base, 1.0),
        },
    )
    .expect("well-formed")
}

/// Eight-sensor network tuned to one trade-off point: heavy-tailed
/// Cauchy dither growing like `k^eps`, fusion gain `3/k^gamma`, and the
/// synthesized innovation gain. The point must come from a
/// `lambda_min_plus = 1` synthesis, matching these sensors.
pub fn tradeoff_config(point: &crate::experiments::TradeoffPoint) -> AlgorithmConfig {
    reference_config_variant(&ReferenceVariant {
        family: NoiseFamily::Cauchy,
        noise_base: 1.0,
        noise_growth: point.eps,
        alpha_base: 3.0,
        gamma: point.gamma,
        beta_base: point.beta_base,
        delta: point.delta,
        warmup: Some(point.warmup),
        use_compression: true,
    })
}

/// Two fully observing sensors on one static edge: the smallest network
/// whose error decay exposes the fusion-noise-limited rate exponent.
pub fn rate_probe_config(beta_base: f64) -> AlgorithmConfig {
    let t = TopologySet::from_edge_lists(2, &[vec![(1, 2, 1.0)]]).expect("well-formed");
    let chain = MarkovChain::from_rows(&[vec![1.0]], &[1.0]).expect("well-formed");
    let topology = TopologyModel::Switching(SwitchingGraphProcess::new(t, chain).unwrap());
    let sensors: Vec<SensorSpec> = (0..2)
        .map(|_| {
            SensorSpec::gaussian(
                DMatrix::from_row_slice(1, 1, &[1.0]),
                DMatrix::from_row_slice(1, 1, &[1.0]),
                0.0,
                1.0,
            )
            .expect("well-formed")
        })
        .collect();
    AlgorithmConfig::uniform(
        topology,
        sensors,
        1,
        true,
        0.0,
        NoiseSchedule::new(NoiseFamily::Gaussian, 1.0, 0.0).expect("well-formed"),
        AlphaSchedule {
            base: 1.0,
            exponent: 0.8,
        },
        BetaSchedule {
            base: beta_base,
            exponent: 1.0,
            warmup: default_warmup(beta_base, 1.0),
        },
    )
    .expect("well-formed")
}
