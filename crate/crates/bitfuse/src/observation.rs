//! Sensor observation models.
//!
//! Each sensor observes `y = H theta + w` with a random measurement matrix
//! `H`: with the configured failure probability the sensor reads pure
//! noise (`H = 0`), otherwise it applies its active matrix. The estimation
//! recursion only ever consumes the mean `Hbar = E H`, so the Bernoulli
//! failure model is the whole story here.
//!
//! No single sensor needs to observe the full parameter; what matters is
//! cooperative observability: the summed Gram matrix `sum_i Hbar_i^T Hbar_i`
//! must have full rank.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const CONSISTENCY_TOL: f64 = 1e-12;
const RANK_REL_TOL: f64 = 1e-10;

/// Observation disturbance attached to a sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationNoise {
    /// `y = H theta + std * N(0, I)`, the default model.
    Gaussian { std: f64 },
    /// Each coordinate of `y` is an independent Bernoulli draw with
    /// success probability `(H theta)_m` (clamped to `[0, 1]`). Models the
    /// synthetic clinical event stream: `y = 1` iff a participant shows
    /// the event.
    BernoulliEvent,
}

/// One sensor's measurement model.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    mean: DMatrix<f64>,
    active: DMatrix<f64>,
    failure_probability: f64,
    noise: ObservationNoise,
}

/// Eigenstructure of the Gram matrix `Q = Hbar^T Hbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInfo {
    pub q: DMatrix<f64>,
    /// Smallest positive eigenvalue; `None` when `Q = 0` (rank 0).
    pub lambda_min_plus: Option<f64>,
    pub lambda_max: f64,
    pub rank: usize,
}

impl SensorSpec {
    /// `mean` must equal `(1 - failure_probability) * active` within 1e-12
    /// so that `E H` is really the mean of the Bernoulli failure model.
    pub fn new(
        mean: DMatrix<f64>,
        active: DMatrix<f64>,
        failure_probability: f64,
        noise: ObservationNoise,
    ) -> Result<Self> {
        if mean.shape() != active.shape() {
            return Err(Error::Dimension(format!(
                "mean is {:?}, active is {:?}",
                mean.shape(),
                active.shape()
            )));
        }
        if !(0.0..=1.0).contains(&failure_probability) {
            return Err(Error::InvalidConfig(format!(
                "failure_probability {failure_probability} outside [0, 1]"
            )));
        }
        if let ObservationNoise::Gaussian { std } = noise {
            if !(std >= 0.0 && std.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "obs_noise_std must be >= 0, got {std}"
                )));
            }
        }
        let expected = &active * (1.0 - failure_probability);
        let gap = (&mean - &expected).abs().max();
        if gap > CONSISTENCY_TOL {
            return Err(Error::InvalidConfig(format!(
                "mean_matrix differs from (1 - failure_probability) * active_matrix by {gap}; \
                 the failure model requires E H = mean"
            )));
        }
        Ok(SensorSpec {
            mean,
            active,
            failure_probability,
            noise,
        })
    }

    /// Gaussian-noise sensor, the standard constructor.
    pub fn gaussian(
        mean: DMatrix<f64>,
        active: DMatrix<f64>,
        failure_probability: f64,
        obs_noise_std: f64,
    ) -> Result<Self> {
        SensorSpec::new(
            mean,
            active,
            failure_probability,
            ObservationNoise::Gaussian { std: obs_noise_std },
        )
    }

    pub fn mean_matrix(&self) -> &DMatrix<f64> {
        &self.mean
    }

    pub fn active_matrix(&self) -> &DMatrix<f64> {
        &self.active
    }

    pub fn failure_probability(&self) -> f64 {
        self.failure_probability
    }

    pub fn noise(&self) -> ObservationNoise {
        self.noise
    }

    /// Observation dimension `m`.
    pub fn output_dim(&self) -> usize {
        self.mean.nrows()
    }

    /// Parameter dimension `n`.
    pub fn input_dim(&self) -> usize {
        self.mean.ncols()
    }

    /// Draw one observation. The failure indicator and the disturbance
    /// come from separate generators so either randomness source can be
    /// toggled without disturbing the other.
    pub fn observe<R: Rng + ?Sized, S: Rng + ?Sized>(
        &self,
        theta: &DVector<f64>,
        failure_rng: &mut R,
        noise_rng: &mut S,
    ) -> Result<DVector<f64>> {
        if theta.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "theta has length {}, sensor expects {}",
                theta.len(),
                self.input_dim()
            )));
        }
        let failed = failure_rng.random::<f64>() < self.failure_probability;
        let signal = if failed {
            DVector::zeros(self.output_dim())
        } else {
            &self.active * theta
        };
        let y = match self.noise {
            ObservationNoise::Gaussian { std } => {
                let mut y = signal;
                if std > 0.0 {
                    for v in y.iter_mut() {
                        let z: f64 = noise_rng.sample(StandardNormal);
                        *v += std * z;
                    }
                }
                y
            }
            ObservationNoise::BernoulliEvent => DVector::from_fn(self.output_dim(), |m, _| {
                let p = signal[m].clamp(0.0, 1.0);
                if noise_rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }),
        };
        Ok(y)
    }

    /// Symmetric eigendecomposition of `Q = Hbar^T Hbar`. Eigenvalues
    /// below `1e-10 * lambda_max` count as zero for the rank.
    pub fn spectral(&self) -> SpectralInfo {
        let q = self.mean.transpose() * &self.mean;
        spectral_of_gram(&q)
    }
}

/// Spectral info of an explicitly provided symmetric PSD Gram matrix.
pub fn spectral_of_gram(q: &DMatrix<f64>) -> SpectralInfo {
    let eigen = q.clone().symmetric_eigen();
    let lambda_max = eigen.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e));
    let tol = RANK_REL_TOL * lambda_max;
    let positive: Vec<f64> = eigen
        .eigenvalues
        .iter()
        .copied()
        .filter(|&e| e > tol && e > 0.0)
        .collect();
    let rank = positive.len();
    let lambda_min_plus = positive.iter().copied().fold(None, |acc: Option<f64>, e| {
        Some(acc.map_or(e, |m| m.min(e)))
    });
    SpectralInfo {
        q: q.clone(),
        lambda_min_plus,
        lambda_max,
        rank,
    }
}

/// Whether `sum_i Hbar_i^T Hbar_i` has full rank `n` (smallest eigenvalue
/// above `1e-10` times the largest).
pub fn cooperative_observability(specs: &[SensorSpec]) -> Result<bool> {
    let n = match specs.first() {
        Some(s) => s.input_dim(),
        None => return Err(Error::InvalidConfig("no sensors given".into())),
    };
    if specs.iter().any(|s| s.input_dim() != n) {
        return Err(Error::Dimension(
            "sensors disagree on the parameter dimension".into(),
        ));
    }
    let mut gram = DMatrix::zeros(n, n);
    for s in specs {
        gram += s.mean.transpose() * &s.mean;
    }
    let eigen = gram.symmetric_eigen();
    let max = eigen.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e));
    if max <= 0.0 {
        return Ok(false);
    }
    let min = eigen
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &e| m.min(e));
    Ok(min > RANK_REL_TOL * max)
}
