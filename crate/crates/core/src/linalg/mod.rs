//! Sparse linear algebra: storage, vectorisation, KKT systems, factorisation
//! and scaling.

pub mod kkt;
pub mod ldl;
pub mod ordering;
pub mod ruiz;
pub mod sparse;
pub mod svec;

pub use kkt::kkt_assemble;
pub use ldl::{factor_with_permutation, ldl_factor, LdlFactors};
pub use ruiz::{ruiz_equilibrate, unscale, ScaledData, ScalingState};
pub use sparse::{dot, norm2, norm_inf, CscMatrix};
pub use svec::{smat, svec, svec_entry, svec_index, triangular_len, triangular_side};

/// Solves `K z = rhs` using a factorisation of `K`.
pub fn ldl_solve(factors: &LdlFactors, rhs: &[f64]) -> crate::error::Result<Vec<f64>> {
    factors.solve(rhs)
}
