//! Exact arithmetic for φ-components of abelian arithmetic invariants.

pub mod arith;
pub mod characters;
pub mod cyclo_ring;
pub mod error;
pub mod minus_part;
pub mod poly;
pub mod real_cubic;
pub mod stickelberger;

pub use error::{Error, Result};
