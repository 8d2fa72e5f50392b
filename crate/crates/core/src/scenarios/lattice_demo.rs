use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grw::GrwParams;
use crate::lattice::{Interval, LatticeWavefunction, SnapshotRow, UnitSystem, MIN_GRID_POINTS};

/// A particle split into two Gaussian bumps on a 1D lattice, spread freely
/// and then hit. Dimensionless units (`ħ = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDemoConfig {
    pub points: usize,
    pub dx: f64,
    /// Distance between the two bump centers.
    pub separation: f64,
    /// Density standard deviation of each bump.
    pub bump_std: f64,
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    pub hits: usize,
    /// Standard deviation of the hit-center kernel.
    pub sigma_jump: f64,
}

impl Default for LatticeDemoConfig {
    fn default() -> Self {
        LatticeDemoConfig {
            points: 512,
            dx: 0.125,
            separation: 16.0,
            bump_std: 1.0,
            mass: 1.0,
            dt: 0.01,
            steps: 100,
            hits: 1,
            sigma_jump: 1.0,
        }
    }
}

impl LatticeDemoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "points must be at least {MIN_GRID_POINTS}"
            )));
        }
        let positive = [
            ("dx", self.dx),
            ("bump_std", self.bump_std),
            ("mass", self.mass),
            ("sigma_jump", self.sigma_jump),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0")));
            }
        }
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be >= 0"));
        }
        if !(self.separation >= 0.0 && self.separation < self.points as f64 * self.dx) {
            return Err(Error::invalid(
                "separation must be >= 0 and fit on the grid",
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> GrwParams {
        GrwParams {
            sigma_jump: self.sigma_jump,
            ..GrwParams::dimensionless()
        }
    }

    /// The grid centered on 0 with the two bumps at `±separation / 2`.
    pub fn initial_state(&self) -> Result<LatticeWavefunction> {
        let origin = -0.5 * (self.points - 1) as f64 * self.dx;
        let half = 0.5 * self.separation;
        let s = self.bump_std;
        LatticeWavefunction::from_fn(self.points, self.dx, origin, |x| {
            let bump = |c: f64| (-(x - c) * (x - c) / (4.0 * s * s)).exp();
            Complex64::new(bump(-half) + bump(half), 0.0)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDemoResult {
    pub hit_centers: Vec<f64>,
    pub left_mass_before: f64,
    pub left_mass_after: f64,
    /// `|‖ψ‖ − 1|` after free evolution, before any hit.
    pub norm_drift: f64,
    pub variance_before: f64,
    pub variance_after: f64,
    /// `left` or `right`, whichever half holds more mass at the end.
    pub outcome: String,
    pub snapshot: Vec<SnapshotRow>,
}

pub fn run_lattice_demo<R: Rng + ?Sized>(
    cfg: &LatticeDemoConfig,
    rng: &mut R,
) -> Result<LatticeDemoResult> {
    cfg.validate()?;
    let params = cfg.params();
    let left = Interval::new(f64::NEG_INFINITY, 0.0);
    let mut psi = cfg.initial_state()?;
    for _ in 0..cfg.steps {
        psi = psi.free_evolve(cfg.dt, cfg.mass, UnitSystem::Dimensionless);
    }
    let norm_drift = (psi.norm() - 1.0).abs();
    let left_mass_before = psi.region_mass(left);
    let variance_before = psi.position_variance();
    let mut hit_centers = Vec::with_capacity(cfg.hits);
    for _ in 0..cfg.hits {
        let center = psi.sample_hit_center(rng, &params);
        psi = psi.apply_hit(center, &params)?;
        hit_centers.push(center);
    }
    let left_mass_after = psi.region_mass(left);
    Ok(LatticeDemoResult {
        hit_centers,
        left_mass_before,
        left_mass_after,
        norm_drift,
        variance_before,
        variance_after: psi.position_variance(),
        outcome: if left_mass_after >= 0.5 {
            "left"
        } else {
            "right"
        }
        .to_string(),
        snapshot: psi.snapshot(),
    })
}
