//! Dither/privacy noise families with time-varying scale.
//!
//! Each communication link draws its dither from a zero-location symmetric
//! law whose scale grows polynomially, `scale(k) = base * k^eps`. Three
//! families are supported: Gaussian, Laplace, and the heavy-tailed Cauchy
//! (infinite variance is fine; the quantizer bounds what actually travels).
//!
//! Two scalar constants drive the rest of the crate:
//!
//! - `eta(k)`: the supremum of `f^2 / (F (1-F))` for the step-`k` law. It is
//!   the per-bit Fisher information constant in the leakage bounds and has
//!   a closed form per family (`2/(pi sigma^2)`, `1/b^2`, `4/(pi^2 r^2)`).
//!   [`NoiseSchedule::eta_numeric`] evaluates the same supremum on a grid
//!   and exists only to cross-check the closed forms.
//! - `zeta(k) = base / scale(k) = k^{-eps}`: the density lower-bound rate
//!   used by the step-size divergence condition.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Gaussian,
    Laplace,
    Cauchy,
}

impl NoiseFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Laplace => "laplace",
            NoiseFamily::Cauchy => "cauchy",
        }
    }
}

/// Per-link dither law: `family(0, base_scale * k^growth_exponent)`.
///
/// One schedule object serves both directions of an edge; the two
/// directions draw independently from the same law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule {
    family: NoiseFamily,
    base_scale: f64,
    growth_exponent: f64,
}

/// The two scalar constants of a schedule at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyConstants {
    pub eta: f64,
    pub zeta: f64,
}

/// Grid supremum of `f^2 / (F(1-F))`, plus a flag when the grid is too
/// coarse to trust.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaEstimate {
    pub value: f64,
    pub grid_too_small: bool,
}

impl NoiseSchedule {
    pub fn new(family: NoiseFamily, base_scale: f64, growth_exponent: f64) -> Result<Self> {
        if !(base_scale > 0.0 && base_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise base_scale must be positive, got {base_scale}"
            )));
        }
        if !(growth_exponent >= 0.0 && growth_exponent.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise growth_exponent must be >= 0, got {growth_exponent}"
            )));
        }
        Ok(NoiseSchedule {
            family,
            base_scale,
            growth_exponent,
        })
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn base_scale(&self) -> f64 {
        self.base_scale
    }

    pub fn growth_exponent(&self) -> f64 {
        self.growth_exponent
    }

    /// Scale parameter at step `k >= 1`, evaluated lazily.
    pub fn scale(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        self.base_scale * (k as f64).powf(self.growth_exponent)
    }

    /// Density of the step-`k` law.
    pub fn density(&self, k: usize, x: f64) -> f64 {
        let s = self.scale(k);
        let z = x / s;
        match self.family {
            NoiseFamily::Gaussian => (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * s),
            NoiseFamily::Laplace => (-z.abs()).exp() / (2.0 * s),
            NoiseFamily::Cauchy => 1.0 / (PI * s * (1.0 + z * z)),
        }
    }

    /// Closed-form distribution function of the step-`k` law.
    pub fn cdf(&self, k: usize, x: f64) -> f64 {
        let s = self.scale(k);
        let z = x / s;
        match self.family {
            // erfc keeps the lower tail accurate where 1 + erf cancels.
            NoiseFamily::Gaussian => 0.5 * libm::erfc(-z * FRAC_1_SQRT_2),
            NoiseFamily::Laplace => {
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            NoiseFamily::Cauchy => 0.5 + z.atan() / PI,
        }
    }

    /// Survival function `1 - F`, computed on the side where it is small
    /// so the far upper tail does not round to zero.
    pub fn survival(&self, k: usize, x: f64) -> f64 {
        let s = self.scale(k);
        let z = x / s;
        match self.family {
            NoiseFamily::Gaussian => 0.5 * libm::erfc(z * FRAC_1_SQRT_2),
            NoiseFamily::Laplace => {
                if z > 0.0 {
                    0.5 * (-z).exp()
                } else {
                    1.0 - 0.5 * z.exp()
                }
            }
            NoiseFamily::Cauchy => {
                // atan(z) + atan(1/z) = pi/2 for z > 0.
                if z > 0.0 {
                    (1.0 / z).atan() / PI
                } else {
                    0.5 - z.atan() / PI
                }
            }
        }
    }

    /// Draw from the step-`k` law. Gaussian scales a standard-normal
    /// sample; Laplace and Cauchy invert the CDF so that each draw
    /// consumes exactly one uniform from the stream.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> f64 {
        self.sample_with_scale(self.scale(k), rng)
    }

    /// Same draw with the scale already evaluated; the step loop hoists
    /// the `k^eps` power out of the per-edge inner loop.
    pub(crate) fn sample_with_scale<R: Rng + ?Sized>(&self, s: f64, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                z * s
            }
            NoiseFamily::Laplace => {
                let u: f64 = rng.sample(rand::distr::Open01);
                let centered = u - 0.5;
                -s * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
            }
            NoiseFamily::Cauchy => {
                let u: f64 = rng.sample(rand::distr::Open01);
                s * (PI * (u - 0.5)).tan()
            }
        }
    }

    /// Closed-form `eta(k) = sup_x f^2 / (F(1-F))`.
    pub fn eta(&self, k: usize) -> f64 {
        let s = self.scale(k);
        match self.family {
            NoiseFamily::Gaussian => 2.0 / (PI * s * s),
            NoiseFamily::Laplace => 1.0 / (s * s),
            NoiseFamily::Cauchy => 4.0 / (PI * PI * s * s),
        }
    }

    /// Grid evaluation of the `eta` supremum over `[-halfwidth, halfwidth]`.
    ///
    /// Test oracle for [`NoiseSchedule::eta`]; it never exceeds the closed
    /// form beyond grid rounding. `F(1-F)` is clamped below `1e-300` so the
    /// far tails cannot blow up the ratio; the supremum of every supported
    /// family sits at the origin, far from the clamp.
    pub fn eta_numeric(&self, k: usize, grid_halfwidth: f64, grid_points: usize) -> EtaEstimate {
        let grid_too_small = grid_points < 1_000;
        let n = grid_points.max(2);
        let mut best = 0.0f64;
        for i in 0..n {
            let x = -grid_halfwidth + 2.0 * grid_halfwidth * (i as f64) / ((n - 1) as f64);
            let f = self.density(k, x);
            // F and 1-F each evaluated on the side where they are small;
            // the product stays meaningful deep into both tails.
            let denom = (self.cdf(k, x) * self.survival(k, x)).max(1e-300);
            best = best.max(f * f / denom);
        }
        EtaEstimate {
            value: best,
            grid_too_small,
        }
    }

    /// `zeta(k) = base_scale / scale(k) = k^{-eps}`.
    pub fn zeta(&self, k: usize) -> f64 {
        self.base_scale / self.scale(k)
    }

    pub fn privacy_constants(&self, k: usize) -> PrivacyConstants {
        PrivacyConstants {
            eta: self.eta(k),
            zeta: self.zeta(k),
        }
    }
}

/// Whether step-size sequences satisfying the divergence condition exist
/// for a polynomial noise growth exponent: true iff `eps <= 1/2`.
pub fn schedule_feasible(eps: f64) -> bool {
    eps <= 0.5
}
