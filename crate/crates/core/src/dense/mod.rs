//! Dense real linear algebra kernels: products, Householder and pivoted QR,
//! one-sided Jacobi SVD, and the plain-text matrix format.

pub mod io;
pub mod matrix;
pub mod qr;
pub mod svd;

pub use matrix::{axpy, dot, fingerprint, matmul, norm2, scale_vec, sub_vec, tr_matmul, DenseMatrix};
pub use qr::{
    default_ls_eta, householder_qr, pivoted_least_squares, pivoted_least_squares_with, pivoted_qr,
    HouseholderQr, Reflector,
};
pub use svd::{
    condition_number, jacobi_svd, min_norm_least_squares, orthogonality_defect, singular_values,
    spectral_norm, RankTolerance, SvdFactors,
};
