//! Laplace-functional curves `y ↦ L[f|y]` and translation fits between them.

pub mod checks;
pub mod curve;
pub mod fit;

pub use checks::{check_freezing, check_unique_support, freezing_window, FitRow, SupportReference};
pub use curve::{
    estimate_curve, estimate_curves, linear_grid, pava, Batch, LaplaceCurve, BATCHES, MIN_REPS,
};
pub use fit::{
    fit_gumbel, fit_to_reference, fit_translation, FnReference, GumbelReference, Reference,
    ShiftEstimate, BAND,
};
