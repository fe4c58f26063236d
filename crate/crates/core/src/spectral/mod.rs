//! Frozen linearized TD dynamics: the operator `S`, the momentum companion
//! matrix `A(η)`, spectral diagnostics and sufficient conditions for stability.

mod conditions;
mod operator;
mod report;

pub use conditions::{
    code_defect, code_statistics, end_to_end_condition, epsilon_bound, gram_factor_bound, near_ortho_condition,
    polar_defect_check, row_gram_condition, scale_bound, symmetric_part_test, FactorizationInputs,
};
pub use operator::{
    companion_from_eigenvalues, companion_matrix, companion_radius, companion_spectrum, precond_gram, td_operator,
    FrozenSnapshot,
};
pub use report::{classify, stability_report, stability_report_with, Margins, Stability, StabilityReport, MARGINAL_TOL};
