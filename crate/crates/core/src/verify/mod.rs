//! Monte-Carlo and finite-difference certification of the eigenvalue SDE,
//! its quadratic variations and the underlying derivative identities.

pub mod derivatives;
pub mod ensemble;
pub mod onestep;
pub mod qv;

pub use derivatives::{
    fd_convergence_order, gradient, verify_gradient_products, verify_implicit_derivatives,
    verify_laplacian, Coordinate,
};
pub use ensemble::{
    non_collision_report, simulate_ensemble, vandermonde_inverse, verify_vandermonde_martingale,
};
pub use onestep::{verify_drift, verify_martingale_term};
pub use qv::{all_targets, verify_qv, QVKind, QVTarget};
