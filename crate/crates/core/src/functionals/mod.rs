//! Laplace transforms, moments and log-moments of exponential functionals
//! of Brownian motion.

mod kernel;
mod laplace;
mod moments;

pub use kernel::{
    kernel_g, kernel_g_derivatives, laplace_shifted_recip_general, psi, KernelContext, PsiTable,
};
pub use laplace::{
    conditional_a_given_perpetuity, expected_log_one_plus_beta_a, expected_recip_one_plus_beta_a,
    laplace_recip, laplace_recip_one_plus_beta_a, laplace_recip_radial_ou,
    mean_exponential_functional, path_mc_of_a, perpetuity_identity_mc, radial_ou_estimate,
    radial_ou_samples, random_time_call_value, random_time_log_moment, random_time_log_moment_mc,
    LaplaceRoute, PerpetuityConditional,
};
pub use moments::{
    gamma_moment_table, gamma_moments_at, gamma_path_mc, gmm_identity, laplace_gamma,
    laplace_gamma_series, p1_derivatives, p_minus_one, GammaLaplaceMethod, MomentTable,
    SeriesOutcome, MIN_MOMENT_INTERVALS, MOMENT_RESIDUAL_TOL, SERIES_TAIL_TOL, SERIES_TERMS,
};
