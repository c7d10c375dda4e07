//! Placement delivery arrays (PDAs) and the private coded multi-access
//! distributed computing scheme built on them.
//!
//! - [`pda`]: the array type, the A1/A2/A3 verifier, regularity and cyclic
//!   structure checks, and the canonical text format.
//! - [`combinatorics`]: lexicographic subset ranking and cyclic indexing.
//! - [`construct`]: the subset and cyclic PDA families and block extension.
//! - [`protocol`]: instances, queries, the coded shuffle, decoding and loads.
//! - [`privacy`]: exact and sampled audits of the query distribution.

pub mod combinatorics;
pub mod construct;
pub mod pda;
pub mod privacy;
pub mod protocol;

/// Exact non-negative fraction in lowest terms.
pub type Exact = num_rational::Ratio<u64>;

pub use construct::{
    construction1, construction2, cyclic_pda, extend_pda, man_pda, ConstructionError,
};
pub use pda::{
    analyze, check_l_cyclic, check_regularity, parse_pda_text, serialize_pda_text, transpose,
    verify_pda, ParseError, PdaArray, PdaEntry, PdaError, PdaParams,
};
pub use protocol::{InstanceConfig, Model, ProtocolError, ReducerSetup};
