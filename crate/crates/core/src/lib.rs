//! Computation and certification of congruences modulo prime powers for the
//! two-color partition function `p_[1,p](n)`, whose generating function is
//! `prod (1 - q^n)^-1 (1 - q^(pn))^-1`.
//!
//! The pipeline: truncated q-series ([`qseries`]) build eta quotients
//! ([`etaquot`]) and the partition series ([`partitions`]); [`params`] fixes
//! the weights and offsets for a triple `(p, l, j)`; [`spaces`] builds bases of
//! `M_k(Gamma0(p))` and of the invariant subspace; [`hecke`] applies `T_{m^2}`;
//! [`certify`] turns the Hecke matrix into orders in `PGL`/`GL` over `Z/l^jZ`
//! and a certificate; [`verify`] reproduces published examples end to end.

pub mod arith;
pub mod certify;
pub mod error;
pub mod etaquot;
pub mod hecke;
pub mod matrix;
mod ntt;
pub mod params;
pub mod partitions;
pub mod qseries;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use qseries::{Modulus, QExpansion};
