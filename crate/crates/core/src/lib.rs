//! Finite truncations of three semi-infinite arithmetical matrix families,
//! structured O(N) / O(N log N) matrix-vector products, dense and Krylov
//! eigensolvers, two-sided identity checks and a boundedness region scanner.
//!
//! The families, for real `tau`, `rho` and (for `A`) a base `0 < q < 1`:
//!
//! * `A(tau, rho; q)_{n,m} = q^{tau |n-m| / 2} q^{rho (n+m) / 2}`, `n, m >= 0`
//! * `B(tau, rho)_{n,m} = (nm)^{tau/2} max(n,m)^{-tau} (nm)^{-rho/2}`, `n, m >= 1`
//! * `C(tau, rho)_{n,m} = (nm)^{tau/2} lcm(n,m)^{-tau} (nm)^{-rho/2}`, `n, m >= 1`
//!
//! Data-parallel loops (row fills, Jacobi rounds, harmonic sums, grid scans)
//! run on rayon when the `parallel` feature is enabled (the default) and fall
//! back to plain iterators otherwise.

// `!(x > 0.0)` is used on purpose throughout argument validation: it also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod error;
pub mod families;
pub mod fastops;
pub mod identities;
pub mod ntheory;
pub mod output;
pub mod par;
pub mod report;
pub mod spectra;

pub use error::{Error, Result};
pub use families::{DenseSymMatrix, Family, FamilyParams};
pub use report::IdentityReport;
