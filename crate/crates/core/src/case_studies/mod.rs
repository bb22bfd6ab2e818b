//! Three worked kernel families: the sphere limit, the three-dimensional
//! exponential kernels and the two-dimensional truncated Bessel kernel with its
//! momentum-space functionals θ_j.

mod bessel;
mod exponential;
mod sphere_limit;

pub use bessel::{theta, theta_uncapped, upsilon_hat, BesselKernel2D, Theta, THETA_ALPHA_CAP};
pub use exponential::{
    exp3d_alpha_c, exp3d_green, exp3d_omega_l2_norm, exp3d_phi, exp3d_phi_psi_quadrature, exp3d_psi, exp3d_r1,
    exp3d_r2, rho_alpha, ExpKernel3D, MIN_ALPHA,
};
pub use sphere_limit::{
    printed_sphere_limit_value_at_zero, sphere_kernel_profile, sphere_kernel_profile_1d, sphere_limit_value_at_zero,
    Profile1d, SphereLimitKernel,
};
