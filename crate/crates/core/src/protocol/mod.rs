//! The private map/shuffle/reduce protocol for the alpha-connect and
//! alpha-cyclic partial private mapper assignment models.
//!
//! Mappers come in `K` blocks, one per reducer. Reducer `k` reaches every
//! mapper outside block `k` and a private subset inside it. Each reducer
//! impersonates one column of its block in the extended PDA, broadcasts a
//! permutation query hiding its function among all `Q`, and multicasts one
//! coded symbol per PDA label.

mod instance;
mod loads;
mod oracle;
mod query;
mod round;
mod shuffle;

use thiserror::Error;

pub use instance::{
    build_instance, BatchId, Connectivity, InstanceConfig, MadcInstance, Model, Reducer,
    ReducerSetup,
};
pub use loads::{load_formula, measure_loads, oracle_output, reduce_output, LoadReport};
pub use oracle::{to_hex, xor_into, Bits, IvOracle};
pub use query::{choice_space, generate_query, query_from_choices, Query};
pub use round::{random_setups, run_round, run_round_with_queries, RoundOutcome};
pub use shuffle::{
    coded_terms, decode_reducer, demand_table, packet_bits, shuffle_round, CodedSymbol, DecodedIvs,
    Demand, DemandKey, LocalView, PacketId, ShuffleTranscript,
};

use crate::construct::ConstructionError;
use crate::pda::PdaError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("{0}")]
    Param(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Pda(#[from] PdaError),
    #[error("Q = {given} contradicts the model, which fixes Q = {derived}")]
    FunctionCountMismatch { derived: usize, given: usize },
    #[error("eta * beta = {eta} * {beta} is not divisible by K - 1 = {}", .k - 1)]
    Divisibility { eta: usize, beta: usize, k: usize },
    #[error("expected {expected} reducer entries, got {found}")]
    SetupCount { expected: usize, found: usize },
    #[error("reducer {reducer}: demand {demand} outside [1, {q}]")]
    InvalidDemand {
        reducer: usize,
        demand: usize,
        q: usize,
    },
    #[error("reducer {reducer}: {reason}")]
    InvalidConnectivity { reducer: usize, reason: String },
    #[error("reducer {reducer}: accessible batches differ from the impersonated column's stars")]
    AccessMismatch { reducer: usize },
    #[error("reducer {reducer}: invalid query: {reason}")]
    InvalidQuery { reducer: usize, reason: String },
    #[error("reducer {reducer} cannot compute coded symbol for label {label}")]
    InfeasibleTransmission { reducer: usize, label: u32 },
    #[error("reducer {reducer} cannot decode label {label}; residual packets {residual:?}")]
    DecodeFailure {
        reducer: usize,
        label: u32,
        residual: Vec<PacketId>,
    },
    #[error("reducer {reducer} lacks IVs of files {missing:?}")]
    IncompleteInput { reducer: usize, missing: Vec<usize> },
    #[error("reducer {reducer} decoded a wrong IV for file {file}")]
    WrongIv { reducer: usize, file: usize },
    #[error("reducer {reducer} output differs from ground truth")]
    OutputMismatch { reducer: usize },
    #[error("transcript has {found} bits, expected {expected}")]
    TranscriptSize { expected: u64, found: u64 },
    #[error("measured loads differ from closed form: {0}")]
    LoadMismatch(LoadReport),
}
