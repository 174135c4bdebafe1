//! Eigenvalues, biorthogonal eigenvectors, overlaps and eigenvalue paths.

pub mod frame;
pub mod matching;
pub mod trajectory;

pub use frame::{
    decompose, drift, fprime, martingale_coefficients, overlap_det, overlap_eigvec, SpectralFrame,
    DEGENERACY_GAP,
};
pub use matching::{hungarian, match_eigenvalues, match_paths, Matching};
pub use trajectory::{simulate_replica, simulate_trajectory, Trajectory};
