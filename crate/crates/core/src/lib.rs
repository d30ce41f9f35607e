//! GMRES and range-restricted GMRES for singular, possibly inconsistent,
//! dense linear systems, together with the generalized-inverse and
//! principal-angle machinery that explains when the extended Hessenberg
//! least squares problem becomes ill-conditioned.

pub mod arnoldi;
pub mod dense;
pub mod error;
pub mod problems;
pub mod solvers;
pub mod subspaces;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
