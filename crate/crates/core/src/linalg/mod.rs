//! Dense complex linear algebra and determinant identities.

pub mod identities;
pub mod lu;
pub mod matrix;
pub mod schur;

pub use identities::{
    cauchy_binet_sum, char_poly, char_poly_from_spectrum, combinations, compound_det,
    elementary_symmetric, squared_minor_residual, triple_sum_residual, minor_det,
    principal_minor_sum, twice_cofactor_det, CharPolyEval, IdentityCheck, MinorIndex,
};
pub use lu::{det, Lu};
pub use matrix::{CMatrix, C64};
pub use schur::{eigenvalues, min_gap, schur, Schur};
