//! Decoherence functionals for histories of collective occupation numbers.
//!
//! A system of `N` weakly interacting components, each with a two-valued
//! alternative (`P` / `1 - P`), is probed at two times. The component-level
//! decoherence functional ([`ComponentDF`]) fixes everything about the
//! collective functional for occupation numbers: exactly through the
//! multi-binomial sum, and asymptotically through a Gaussian form whose
//! width sets the degree of decoherence.
//!
//! The concrete model is a periodic ferromagnetic chain restricted to one
//! down spin, coarse-grained by asking whether the down spin sits in the
//! first `M1` sites.

pub mod collective;
pub mod component;
pub mod conservation;
pub mod dd;
pub mod error;
pub mod linalg;
pub mod spectral;
pub mod spin_space;
pub mod sweep;
pub mod verify;

pub use collective::{
    appendix_a_exact, collective_df_gaussian, collective_df_tensor_oracle,
    collective_probabilities, decoherence_ratio, degree_of_decoherence, gaussian_coefficients,
    occupation_projector_oracle, smeared_coefficients, DecoherenceDegree, ExactDFTable,
    GaussianCoefficients, OccupationHistory, SmearedCoefficients,
};
pub use component::{
    component_df_generic, component_df_spin_chain, gamma_factor, ComponentDF, InitialPair,
};
pub use error::{Error, Result};
pub use linalg::C64;
pub use spectral::{
    d_kernel, dense_oracle, projector_matrix_element, propagator_column, spin_wave_energies,
    ChainConfig, ChainPropagator, PropagatorKernel, SpinWaveSpectrum,
};
pub use sweep::{m1_sweep, m1_sweep_range, PairRule, SweepRow};
