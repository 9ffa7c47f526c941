//! Exact entropy computations for banded endomorphisms.
//!
//! The discrete side works with locally finite groups `⊕_i B_i` (restricted
//! direct sums of finite blocks) and their endomorphisms; the compact side
//! with profinite groups `Π_i B_i` and continuous endomorphisms given by
//! finitely many coordinate dependencies. Both entropies are computed two
//! ways: from the growth of trajectory/cotrajectory indices, and from the
//! limit-free index formulas. Pontryagin duality links the two sides, and
//! for automorphisms of finite depth the entropy is the log of the depth.
//!
//! Every quantity is an exact integer or rational; floating point only
//! appears in display helpers.

pub mod blocks;
pub mod depth;
pub mod discrete;
pub mod duality;
pub mod entropy;
pub mod error;
pub mod finabel;
pub mod gengroup;
pub mod jobs;
pub mod profinite;

pub use entropy::{EntropyValue, Method, StabilizationPolicy};
pub use error::{Error, Result};
