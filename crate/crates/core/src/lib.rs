// SPDX-License-Identifier: Apache-2.0

//! Pairwise key predistribution in the style of Blom.
//!
//! Two public-matrix families are supported: the classic Vandermonde
//! construction and a truncated non-binary Sylvester Hadamard matrix whose
//! columns nodes regenerate on demand instead of storing. Around the scheme
//! sit an exact collusion analyzer and a unique-key sweep harness.

pub mod cli;
pub mod document;
pub mod error;
pub mod field;
pub mod matrices;
pub mod metrics;
pub mod resilience;
pub mod rng;
pub mod scheme;

pub use error::{Error, Result};
pub use field::{FieldMatrix, Prime};
pub use scheme::{example_network, provision, Network, NodeShare, PairwiseKey, SchemeParams, SecretMatrix, Variant};
