//! Interaction Morawetz functional: radial weights, the two-point functional
//! `M(t)`, the bulk terms of its time derivative, Galilean zeroing and
//! localized energies.

mod functional;
mod localized;
mod profile;
mod weights;

pub use functional::{interaction_morawetz, morawetz_rhs, morawetz_terms, MorawetzTerms};
pub use localized::{
    cascade_ratio, cascade_ratio_from, localized_energy, localized_kinetic, localized_momentum,
    optimal_galilean_shift,
};
pub use profile::chi;
pub use weights::{build_weights, MorawetzWeights};
