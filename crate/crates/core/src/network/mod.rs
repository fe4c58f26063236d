//! Critics with analytic per-sample parameter Jacobians.

mod critic;
mod features;
mod layout;

pub use critic::{grad_norm_bound, Architecture, Critic};
pub use features::{FeatureMap, FeatureSpec};
pub use layout::{Block, ParamLayout};
