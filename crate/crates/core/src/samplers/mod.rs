//! Exact samplers for exponential-intensity Poisson processes, decorations,
//! and their decorated and shifted versions.

pub mod decoration;
pub mod process;
pub mod shift;

pub use decoration::{sample_decoration, DecorationSpec};
pub use process::{
    sample_dppp, sample_ppp_exp, sample_sdppp, sample_zbeta_shift, zbeta_atom_low, AtomTail, Dppp,
    ProcessConfig, ProcessSample, Sampler, Sdppp, ZBetaShift, MAX_EXPECTED_ATOMS,
};
pub use shift::ShiftSpec;
