//! A single particle on a uniform 1D grid: Gaussian jump factors, the
//! hit-center distribution, and free Schrödinger evolution on a periodic grid.
//!
//! The jump factor is `j(d) = (2πs²)^(-1/4) · exp(−d²/(4s²))` with
//! `s = GrwParams::jump_std()`, so `|j|²` is a unit-mass normal density of
//! standard deviation `s`. Amplitudes are stored in log-polar form; the FFT
//! steps convert to ordinary complex numbers, where tails below `1e-308`
//! flush to zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::amplitude::{log_sum_exp, Amplitude};
use crate::error::{Error, Result};
use crate::grw::GrwParams;

/// Fewest grid points a wavefunction may have.
pub const MIN_GRID_POINTS: usize = 8;

/// Reduced Planck constant in erg·s.
pub const HBAR_CGS: f64 = 1.054_571_817e-27;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitSystem {
    /// `ħ = 1`.
    #[default]
    Dimensionless,
    /// Centimetres, grams, seconds.
    Cgs,
}

impl UnitSystem {
    pub fn hbar(&self) -> f64 {
        match self {
            UnitSystem::Dimensionless => 1.0,
            UnitSystem::Cgs => HBAR_CGS,
        }
    }
}

/// Half-open spatial interval `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    /// Overlap of two intervals; empty overlaps come back with `lo ≥ hi`.
    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }
}

/// `ψ(x)` sampled at `origin + i·dx`, normalized so that `Σ |ψ|² dx = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeWavefunction {
    amplitudes: Vec<Amplitude>,
    dx: f64,
    origin: f64,
}

/// `ln |j(d)|²` for kernel standard deviation `s`.
fn log_jump_sqr(d: f64, s: f64) -> f64 {
    -0.5 * (2.0 * PI * s * s).ln() - d * d / (2.0 * s * s)
}

impl LatticeWavefunction {
    /// Normalize the given samples into a wavefunction.
    pub fn new(amplitudes: Vec<Amplitude>, dx: f64, origin: f64) -> Result<Self> {
        if amplitudes.len() < MIN_GRID_POINTS {
            return Err(Error::shape(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {}",
                amplitudes.len()
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let raw = LatticeWavefunction {
            amplitudes,
            dx,
            origin,
        };
        raw.renormalized().ok_or(Error::DegenerateState)
    }

    /// Sample `f` on `n` points starting at `origin`, then normalize.
    pub fn from_fn<F>(n: usize, dx: f64, origin: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let amps = (0..n)
            .map(|i| Amplitude::from_complex(f(origin + i as f64 * dx)))
            .collect();
        Self::new(amps, dx, origin)
    }

    /// Real Gaussian whose density `|ψ|²` has the given mean and standard
    /// deviation. Built in log form, so far tails stay nonzero.
    pub fn gaussian(n: usize, dx: f64, origin: f64, mean: f64, std: f64) -> Result<Self> {
        let amps = (0..n)
            .map(|i| {
                let x = origin + i as f64 * dx;
                Amplitude::from_log_polar(-(x - mean).powi(2) / (4.0 * std * std), 0.0)
            })
            .collect();
        Self::new(amps, dx, origin)
    }

    fn renormalized(mut self) -> Option<Self> {
        let log_norm = self.log_norm();
        if log_norm == f64::NEG_INFINITY {
            return None;
        }
        for a in &mut self.amplitudes {
            *a = a.scale_log(-0.5 * log_norm);
        }
        Some(self)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x(i))
    }

    /// Grid extent `[x₀, x_{n−1}]`.
    pub fn extent(&self) -> (f64, f64) {
        (self.origin, self.x(self.len() - 1))
    }

    /// `|ψ(xᵢ)|²` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Amplitude::norm_sqr).collect()
    }

    /// `ln Σ |ψ|² dx`.
    pub fn log_norm(&self) -> f64 {
        log_sum_exp(self.amplitudes.iter().map(Amplitude::log_norm_sqr)) + self.dx.ln()
    }

    pub fn norm(&self) -> f64 {
        self.log_norm().exp()
    }

    /// `Σ_{x ∈ interval} |ψ(x)|² dx`.
    pub fn region_mass(&self, interval: Interval) -> f64 {
        let log_mass = log_sum_exp(
            self.amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| interval.contains(self.x(*i)))
                .map(|(_, a)| a.log_norm_sqr()),
        );
        (log_mass + self.dx.ln()).exp()
    }

    pub fn mean_position(&self) -> f64 {
        self.density()
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.x(i) * self.dx)
            .sum()
    }

    pub fn position_variance(&self) -> f64 {
        let mean = self.mean_position();
        self.density()
            .iter()
            .enumerate()
            .map(|(i, p)| p * (self.x(i) - mean).powi(2) * self.dx)
            .sum()
    }

    fn to_complex(&self) -> Vec<Complex64> {
        self.amplitudes.iter().map(Amplitude::to_complex).collect()
    }

    /// Angular wavenumber of FFT bin `m`.
    fn wavenumber(&self, m: usize) -> f64 {
        let n = self.len();
        let signed = if m < n.div_ceil(2) {
            m as f64
        } else {
            m as f64 - n as f64
        };
        2.0 * PI * signed / (n as f64 * self.dx)
    }

    /// Variance of the wavenumber distribution `|ψ̃(k)|²`.
    pub fn momentum_variance(&self) -> f64 {
        let mut buf = self.to_complex();
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
        let weights: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        let mean: f64 = weights
            .iter()
            .enumerate()
            .map(|(m, w)| w * self.wavenumber(m))
            .sum::<f64>()
            / total;
        weights
            .iter()
            .enumerate()
            .map(|(m, w)| w * (self.wavenumber(m) - mean).powi(2))
            .sum::<f64>()
            / total
    }

    /// Multiply by the jump factor centered at `center` and renormalize.
    pub fn apply_hit(&self, center: f64, params: &GrwParams) -> Result<Self> {
        let (lo, hi) = self.extent();
        if !(center >= lo && center <= hi) {
            return Err(Error::shape(format!(
                "hit center {center} outside grid extent [{lo}, {hi}]"
            )));
        }
        let s = params.jump_std();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.scale_log(0.5 * log_jump_sqr(center - self.x(i), s)))
            .collect();
        let hit = LatticeWavefunction {
            amplitudes,
            dx: self.dx,
            origin: self.origin,
        };
        hit.renormalized().ok_or(Error::DegenerateHit { center })
    }

    /// Probability density of the hit center at each grid point,
    /// `∫ |j(x − r)|² |ψ(r)|² dr`.
    ///
    /// The kernel is renormalized on the grid for every source point, so the
    /// result integrates to one exactly even when the jump width is below
    /// the grid spacing.
    pub fn hit_center_density(&self, params: &GrwParams) -> Vec<f64> {
        let n = self.len();
        let s = params.jump_std();
        let kernel: Vec<f64> = (0..n)
            .map(|m| {
                let d = m as f64 * self.dx;
                (-d * d / (2.0 * s * s)).exp()
            })
            .collect();
        let reach = kernel.iter().rposition(|&g| g > 0.0).unwrap_or(0);
        // prefix[m] = Σ_{0 ≤ i < m} kernel[i]
        let mut prefix = vec![0.0; n + 1];
        for m in 0..n {
            prefix[m + 1] = prefix[m] + kernel[m];
        }
        let mass: Vec<f64> = self.density().iter().map(|p| p * self.dx).collect();
        let mut out = vec![0.0; n];
        for (r, &w) in mass.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let left = r.min(reach);
            let right = (n - 1 - r).min(reach);
            let z = prefix[left + 1] + prefix[right + 1] - kernel[0];
            let scale = w / (z * self.dx);
            for k in (r - left)..=(r + right) {
                out[k] += scale * kernel[k.abs_diff(r)];
            }
        }
        out
    }

    /// Draw a hit center by inverting the cumulative hit-center
    /// distribution, linear within each grid cell.
    pub fn sample_hit_center<R: Rng + ?Sized>(&self, rng: &mut R, params: &GrwParams) -> f64 {
        let density = self.hit_center_density(params);
        let cdf = cell_cdf(&density, self.dx);
        let total = *cdf.last().expect("grid is nonempty");
        let u: f64 = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(density.len() - 1);
        let below = if k == 0 { 0.0 } else { cdf[k - 1] };
        let frac = if density[k] > 0.0 {
            ((u - below) / (density[k] * self.dx)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        self.x(k) - 0.5 * self.dx + frac * self.dx
    }

    /// Free evolution for time `dt` of a particle of the given mass, by the
    /// exact spectral propagator on the periodic grid.
    pub fn free_evolve(&self, dt: f64, mass: f64, units: UnitSystem) -> Self {
        assert!(dt >= 0.0, "negative time step {dt}");
        if dt == 0.0 {
            return self.clone();
        }
        let n = self.len();
        let hbar = units.hbar();
        let mut planner = FftPlanner::new();
        let mut buf = self.to_complex();
        planner.plan_fft_forward(n).process(&mut buf);
        for (m, z) in buf.iter_mut().enumerate() {
            let k = self.wavenumber(m);
            *z *= Complex64::from_polar(1.0 / n as f64, -hbar * k * k * dt / (2.0 * mass));
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        LatticeWavefunction {
            amplitudes: buf.into_iter().map(Amplitude::from_complex).collect(),
            dx: self.dx,
            origin: self.origin,
        }
    }

    /// Cyclic shift by `cells` grid points (periodic translation).
    pub fn translate_cells(&self, cells: isize) -> Self {
        let n = self.len() as isize;
        let shift = cells.rem_euclid(n) as usize;
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.rotate_right(shift);
        LatticeWavefunction {
            amplitudes,
            dx: self.dx,
            origin: self.origin,
        }
    }

    /// `(x, re ψ, im ψ, |ψ|²)` per grid point.
    pub fn snapshot(&self) -> Vec<SnapshotRow> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let z = a.to_complex();
                SnapshotRow {
                    x: self.x(i),
                    re: z.re,
                    im: z.im,
                    density: a.norm_sqr(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub x: f64,
    pub re: f64,
    pub im: f64,
    pub density: f64,
}

/// Cumulative mass at the right edge of each cell.
fn cell_cdf(density: &[f64], dx: f64) -> Vec<f64> {
    density
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p * dx;
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> GrwParams {
        GrwParams::dimensionless()
    }

    fn two_bumps(n: usize, dx: f64, sep: f64) -> LatticeWavefunction {
        let origin = -(n as f64) * dx / 2.0;
        LatticeWavefunction::from_fn(n, dx, origin, |x| {
            let g = |m: f64| (-(x - m).powi(2) / 4.0).exp();
            Complex64::new(g(-sep / 2.0) + g(sep / 2.0), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn too_small_grid_is_rejected() {
        assert!(LatticeWavefunction::new(vec![Amplitude::ONE; 7], 1.0, 0.0).is_err());
    }

    #[test]
    fn region_mass_extremes() {
        let psi = LatticeWavefunction::gaussian(256, 0.1, -12.8, 0.0, 1.0).unwrap();
        assert!((psi.region_mass(Interval::new(-100.0, 100.0)) - 1.0).abs() < 1e-12);
        assert_eq!(psi.region_mass(Interval::new(1.0, 1.0)), 0.0);
    }

    #[test]
    fn balanced_two_bump_state_puts_half_in_each_region() {
        let psi = two_bumps(1024, 0.1, 40.0);
        let left = psi.region_mass(Interval::new(f64::NEG_INFINITY, -0.05));
        assert!((left - 0.5).abs() < 1e-6, "{left}");
    }

    #[test]
    fn uniform_prior_hit_gives_jump_profile() {
        let psi = LatticeWavefunction::new(vec![Amplitude::ONE; 400], 0.05, -10.0).unwrap();
        let hit = psi.apply_hit(1.0, &params()).unwrap();
        assert!((hit.mean_position() - 1.0).abs() < 1e-9);
        assert!((hit.position_variance() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hit_outside_grid_is_rejected() {
        let psi = LatticeWavefunction::gaussian(64, 0.5, -16.0, 0.0, 1.0).unwrap();
        assert!(psi.apply_hit(100.0, &params()).is_err());
    }

    #[test]
    fn hit_density_of_a_spike_is_the_kernel() {
        let mut amps = vec![Amplitude::ZERO; 401];
        amps[200] = Amplitude::ONE;
        let psi = LatticeWavefunction::new(amps, 0.05, -10.0).unwrap();
        let dens = psi.hit_center_density(&params());
        let total: f64 = dens.iter().sum::<f64>() * psi.dx();
        assert!((total - 1.0).abs() < 1e-12);
        for (i, d) in dens.iter().enumerate() {
            let x = psi.x(i);
            let expected = (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
            assert!((d - expected).abs() < 1e-9, "at {x}: {d} vs {expected}");
        }
    }

    #[test]
    fn narrow_kernel_reproduces_born_density() {
        let psi = LatticeWavefunction::gaussian(200, 0.1, -10.0, 0.0, 2.0).unwrap();
        let narrow = GrwParams {
            sigma_jump: 1e-3,
            ..params()
        };
        let dens = psi.hit_center_density(&narrow);
        for (d, p) in dens.iter().zip(psi.density()) {
            assert!((d - p).abs() < 1e-12);
        }
    }

    #[test]
    fn free_evolution_at_zero_time_is_identity() {
        let psi = LatticeWavefunction::gaussian(128, 0.2, -12.8, 0.0, 1.0).unwrap();
        assert_eq!(psi.free_evolve(0.0, 1.0, UnitSystem::Dimensionless), psi);
    }

    #[test]
    fn sampled_centers_stay_near_a_spike() {
        let mut amps = vec![Amplitude::ZERO; 801];
        amps[400] = Amplitude::ONE;
        let psi = LatticeWavefunction::new(amps, 0.01, -4.0).unwrap();
        let p = GrwParams {
            sigma_jump: 0.1,
            ..params()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 10_000;
        let near = (0..draws)
            .filter(|_| psi.sample_hit_center(&mut rng, &p).abs() <= 0.4)
            .count();
        assert!(near as f64 / draws as f64 >= 0.9999);
    }

    #[test]
    fn symmetric_state_samples_center_on_axis() {
        let psi = two_bumps(512, 0.1, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| psi.sample_hit_center(&mut rng, &params()))
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        let se = (var / draws.len() as f64).sqrt();
        assert!(
            (mean - psi.mean_position()).abs() < 3.0 * se,
            "{mean} ± {se}"
        );
    }
}
