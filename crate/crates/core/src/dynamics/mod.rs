//! Direct simulators for the frozen TD-error recurrence and the continuous-time
//! Adam/AdamO flows.

mod ode;
mod recurrence;

pub use ode::{
    adam_ode_rhs, adamo_ode_rhs, budget_integral_check, budget_term, dissipation, hamiltonian, integrate_hamiltonian,
    orth_correction, precond, rk4_integrate, rk4_step, HamiltonianPoint, HamiltonianTrace, Objective, OdeConfig,
    OdeDerivative, OdeState, Quadratic,
};
pub use recurrence::{
    decay_slope, decays, simulate_norms, step_first_order_ema, step_second_order, RecurrenceState, DECAY_SLOPE,
};
