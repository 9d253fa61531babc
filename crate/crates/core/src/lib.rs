//! Matrix elements `⟨Φ|P(1+A)|Ψ⟩` of the multiplicative extension of a
//! finite-rank-shifted single-particle operator between bosonic or fermionic
//! product states.
//!
//! The engine writes the matrix element as a Gaussian average of a product
//! of one small auxiliary polynomial per block: a commuting polynomial in
//! `z, z*` for bosons ([`poly`]), a Grassmann element for fermions
//! ([`grassmann`]). The [`oracle`] module provides brute-force references
//! on truncated Fock spaces that share none of that machinery.

pub mod engine;
pub mod factor;
pub mod generate;
pub mod grassmann;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod scaling;
pub mod verify;

pub use engine::{determinant_fast, expectation, permanent_rank_shifted, ComputationReport, EngineError};
pub use model::{
    validate_instance, FactorState, Instance, LowRankOperator, ModelError, ProductState, Statistics,
};

/// Explicit accumulator for elementary operations (complex multiply-adds).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    count: u64,
}

impl OpCounter {
    pub fn add(&mut self, n: u64) {
        self.count += n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn merge(&mut self, other: OpCounter) {
        self.count += other.count;
    }
}
