//! Operator norms, Grothendieck values and spin-glass ground states.

mod ascent;
mod closed;
mod oracle;
mod power;
mod problem;
mod spin;

pub use ascent::{
    grothendieck_value, grothendieck_value_seeded, lambda_max, multistart_ascent,
    multistart_ascent_seeded, spectral_norm, MAX_ITER, POLISH_KKT, SMOOTHING_EPS,
};
pub use closed::{
    ansatz_bounds, ansatz_grothendieck_bounds, ansatz_vectors, large_part_value, paired_grothendieck_closed_form,
    paired_norm_closed_form, rowsum_upper_bound,
};
pub use oracle::{oracle_grothendieck_small, oracle_norm_small, ORACLE_MAX_N};
pub use power::boyd_power_method;
pub use problem::{
    dual_exponent, dual_value, grothendieck_kkt_residual, kkt_residual, lp_norm, psi, psi_map,
    Method, NormCertificate, NormProblem,
};
pub use spin::{
    ground_state, ground_state_argmax, ground_state_split, grothendieck_lower_witness,
    hypercube_max, largest_off_diagonal, witness_vector, GroundSplit, EXACT_SPIN_LIMIT,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NormError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("oracle basins disagree: best {best}, runner-up {second}")]
    OracleDisagreement { best: f64, second: f64 },
}
