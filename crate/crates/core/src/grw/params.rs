use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How `sigma_jump` is read when building the jump factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthConvention {
    /// `sigma_jump` is the standard deviation of the hit-center kernel `|j|²`.
    #[default]
    StdDev,
    /// `sigma_jump` is the full width at half maximum of `|j|²`.
    Fwhm,
}

/// How the region a hit centers on is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterSampling {
    /// Probability equal to the region's branch mass.
    #[default]
    Exact,
    /// Include the leakage of the other regions' mass through the jump
    /// factor's tail: weight `m + ε(1 − m)`.
    LeakageCorrected,
}

/// Collapse-model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrwParams {
    /// Hit rate per particle, s⁻¹.
    pub lambda_hit: f64,
    /// Jump-factor width (cm in CGS mode).
    pub sigma_jump: f64,
    pub width_convention: WidthConvention,
    /// Particles per marble or macroscopic pointer.
    pub particles_per_marble: f64,
    /// Multiplier applied to the squared mass of every disfavored branch.
    pub epsilon_leak: f64,
    /// Dominant-branch mass at which a collapse counts as effective.
    pub eta_collapse: f64,
    pub center_sampling: CenterSampling,
    /// Highest region mass a marble hit can produce; `None` lets tails
    /// shrink without bound.
    pub localization_ceiling: Option<f64>,
}

pub const DEFAULT_LAMBDA_HIT: f64 = 1e-15;
pub const DEFAULT_SIGMA_JUMP_CM: f64 = 1e-5;
pub const DEFAULT_PARTICLES_PER_MARBLE: f64 = 6e23;
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-12;
pub const DEFAULT_REGION_SEPARATION_CM: f64 = 1.0;
pub const DEFAULT_ETA_COLLAPSE: f64 = 1.0 - 1e-6;

/// Leakage multiplier for regions `separation` apart, `exp(−d²/(4σ²))`,
/// raised to `floor` when the geometric value is smaller.
pub fn derived_epsilon(separation: f64, sigma_jump: f64, floor: f64) -> f64 {
    let geometric = (-(separation * separation) / (4.0 * sigma_jump * sigma_jump)).exp();
    geometric.max(floor)
}

impl Default for GrwParams {
    fn default() -> Self {
        GrwParams {
            lambda_hit: DEFAULT_LAMBDA_HIT,
            sigma_jump: DEFAULT_SIGMA_JUMP_CM,
            width_convention: WidthConvention::StdDev,
            particles_per_marble: DEFAULT_PARTICLES_PER_MARBLE,
            epsilon_leak: derived_epsilon(
                DEFAULT_REGION_SEPARATION_CM,
                DEFAULT_SIGMA_JUMP_CM,
                DEFAULT_EPSILON_FLOOR,
            ),
            eta_collapse: DEFAULT_ETA_COLLAPSE,
            center_sampling: CenterSampling::Exact,
            localization_ceiling: None,
        }
    }
}

impl GrwParams {
    /// Unit jump width and unit hit rate, for lattice work with `ħ = 1`.
    pub fn dimensionless() -> Self {
        GrwParams {
            lambda_hit: 1.0,
            sigma_jump: 1.0,
            particles_per_marble: 1.0,
            ..Self::default()
        }
    }

    /// Standard deviation of the hit-center kernel `|j|²`.
    pub fn jump_std(&self) -> f64 {
        match self.width_convention {
            WidthConvention::StdDev => self.sigma_jump,
            WidthConvention::Fwhm => self.sigma_jump / (2.0 * (2.0 * 2f64.ln()).sqrt()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_hit > 0.0 && self.lambda_hit.is_finite()) {
            return Err(Error::invalid("lambda_hit must be > 0"));
        }
        if !(self.sigma_jump > 0.0 && self.sigma_jump.is_finite()) {
            return Err(Error::invalid("sigma_jump must be > 0"));
        }
        if !(self.particles_per_marble > 0.0 && self.particles_per_marble.is_finite()) {
            return Err(Error::invalid("particles_per_marble must be > 0"));
        }
        if !(self.epsilon_leak > 0.0 && self.epsilon_leak < 1.0) {
            return Err(Error::invalid("epsilon must lie in (0, 1)"));
        }
        if !(self.eta_collapse > 0.5 && self.eta_collapse < 1.0) {
            return Err(Error::invalid("eta must lie in (0.5, 1)"));
        }
        if let Some(c) = self.localization_ceiling {
            if !(c > 0.5 && c <= 1.0) {
                return Err(Error::invalid("localization_ceiling must lie in (0.5, 1]"));
            }
        }
        Ok(())
    }
}
