//! Exact census of abelian number fields ordered by parametric ramification invariants.
//!
//! The crate counts continuous homomorphisms `prod_p Z_p^* -> G` for a finite
//! abelian group `G`, ordered by a product of prime powers whose exponents are
//! attached to the power classes of `G`, and sliced by how many tame primes
//! ramify into a chosen subset `Omega`.

pub mod analysis;
pub mod arith;
pub mod config;
pub mod error;
pub mod group;
pub mod local;
pub mod primes;
pub mod profile;
pub mod run;
pub mod series;
pub mod structure;

pub use error::{CensusError, Result};
pub use group::{AbelianGroup, ElementSet, GroupData, OmegaSet, ParamVector, SubgroupId};
pub use profile::{enumerate_census, CensusQuery, CensusTable, IndexValue, Mode, RamificationProfile};
