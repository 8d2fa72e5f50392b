//! The stochastic hit process and its action on marble and apparatus states.

mod collapse;
mod hits;
mod params;

pub use collapse::{effective_collapse_status, DominantBranch};
pub use hits::{
    apply_marble_hit, apply_sparse_hit, apply_sparse_hit_in_place, sample_next_hit, HitCenter,
    HitRecord,
};
pub use params::{
    derived_epsilon, CenterSampling, GrwParams, WidthConvention, DEFAULT_EPSILON_FLOOR,
    DEFAULT_ETA_COLLAPSE, DEFAULT_LAMBDA_HIT, DEFAULT_PARTICLES_PER_MARBLE,
    DEFAULT_REGION_SEPARATION_CM, DEFAULT_SIGMA_JUMP_CM,
};
