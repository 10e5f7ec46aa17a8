//! Decoherence functionals for occupation numbers of `N` identical,
//! non-interacting components.
//!
//! `D(n1, n2 | n1p)` is the functional for the history "`n1` components in
//! `y` at time 0, `n2` in `y` at time `t`" against the history with `n1p` at
//! time 0 and the same `n2`.

mod exact;
mod gaussian;
mod occupation;

pub use exact::{
    appendix_a_column, appendix_a_detailed, appendix_a_exact, fourier_slice, A13Value,
    ExactDFTable, DEFAULT_EXACT_CAP,
};
pub use gaussian::{
    collective_df_gaussian, collective_probabilities, decoherence_ratio, degree_of_decoherence,
    gaussian_coefficients, smeared_coefficients, DecoherenceDegree, GaussianCoefficients,
    SmearedCoefficients,
};
pub use occupation::{
    collective_df_tensor_oracle, occupation_projector_oracle, OccupationHistory, TensorOracle,
    DEFAULT_TENSOR_CAP,
};
