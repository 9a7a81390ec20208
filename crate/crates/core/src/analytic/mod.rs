//! Closed-form kernel: Gumbel functions, special functions, quadrature, and
//! the analytic shift constants.

pub mod gumbel;
pub mod quadrature;
pub mod scale;
pub mod shift_formula;
pub mod special;

pub use gumbel::{
    gum_conv_gumprime, gumbel_cdf, gumbel_convolution_cdf, gumbel_log_cdf, gumbel_pdf,
    gumbel_quantile, gumbel_sf, gumbel_sum_cdf, GumbelIdentity,
};
pub use quadrature::{integrate, integrate_pieces, integrate_range, Quadrature, QuadratureSpec};
pub use scale::{
    freezing_tau, gumbel_scale_relation, scale_tau_closed_form, scale_tau_quadrature, ScaleRelation,
};
pub use shift_formula::{converse_shift, converse_shift_for, ConverseShift};
pub use special::{
    bessel_k1, gamma, gamma_p, gamma_q, ln_gamma, normal_cdf, poisson_tail, scaled_bessel_k1,
};
