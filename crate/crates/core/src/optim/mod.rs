//! Adam and the orthogonality-corrected variant with a per-block descent budget.
//!
//! The budget is enforced separately for every constrained block, which is
//! stricter than a single whole-parameter test.

mod adam;
mod adamo;
mod kappa;
mod orth;

pub use adam::{adam_direction, adam_step, AdamConfig, AdamState};
pub use adamo::{adamo_step, total_orth_potential, BlockReport, OrthConfig, StepReport};
pub use kappa::{degradation_bound, kappa_max_budgeted, kappa_max_conflict_free, onestep_eta_bound, KAPPA_CAP};
pub use orth::{budgeted_scale, orth_gradient, orth_potential, reference_step, BudgetedStep};
