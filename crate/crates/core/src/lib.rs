//! Discrimination power of quantum detectors.
//!
//! Given a POVM, the library finds the pair of input states it tells apart
//! best, under single-shot error, the asymptotic Chernoff, Stein and
//! Hoeffding exponents, and finite-copy error probabilities with or without
//! adaptivity. Closed forms for covariant, noisy Stern-Gerlach and commuting
//! qubit detectors are included.

// `!(x >= 0.0)` is how range checks reject NaN here
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod channel;
pub mod closed_forms;
pub mod error;
pub mod finite;
pub mod grouping;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod sampling;
pub mod scalar;
pub mod state;

pub use channel::{
    chernoff_exponent, hoeffding_exponent, induced_distribution, phi, relative_entropy,
    ClassicalDistribution, ExponentValue,
};
pub use error::{Error, Result};
pub use grouping::GroupingMask;
pub use linalg::{eig_hermitian, ComplexMatrix, HermitianEigen, C64};
pub use optimizer::{
    optimize_state_pair, single_shot_power, zeta_chernoff, zeta_hoeffding, zeta_stein, Objective,
    PowerReport, SearchOptions, StatePair,
};
pub use state::{bloch_to_density, validate_povm, BlochVector, DensityMatrix, Povm, PovmRepr, ValidationReport};
pub use finite::{
    best_product_pair, brute_force_grouping, empirical_rate, ml_error_probability, sequence_distribution,
    sweep_x, GroupingOutcome, PatternSearch, ProductInput, SequenceDistribution, Sweep, SweepPoint,
};
pub use adaptive::{
    conditional_state, evaluate_strategy, optimal_adaptive, AdaptiveSearch, AdaptiveStrategy, Conditional,
    JointState, StrategyEvaluation,
};
pub use closed_forms::{
    c_functional, commuting_gamma, commuting_zeta, covariant_c_s, covariant_zeta_numeric, equivalent_sg_purity,
    hoeffding_mixing_upper, mix_povms, mixing_bounds, noisy_sg_povm, noisy_sg_zeta, stein_mixing_bounds,
    CovariantDiscretization, CovariantOptimum, MixingBounds,
};
