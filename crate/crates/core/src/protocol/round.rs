use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{
    build_instance, Connectivity, InstanceConfig, MadcInstance, Model, ReducerSetup,
};
use super::loads::{measure_loads, oracle_output, reduce_output, LoadReport};
use super::oracle::{Bits, IvOracle};
use super::query::{generate_query, Query};
use super::shuffle::{decode_reducer, packet_bits, shuffle_round, ShuffleTranscript};
use super::ProtocolError;
use crate::combinatorics::{binomial, lex_unrank};

/// Result of a complete map/shuffle/reduce round.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub instance: MadcInstance,
    pub queries: Vec<Query>,
    pub transcript: ShuffleTranscript,
    /// Output bits of each reducer, index `k - 1`.
    pub outputs: Vec<Bits>,
    pub report: LoadReport,
}

/// Runs a round with queries drawn from a ChaCha8 stream seeded by `seed`.
/// The IV oracle is keyed by `config.seed`.
pub fn run_round(
    config: &InstanceConfig,
    setups: &[ReducerSetup],
    seed: u64,
) -> Result<RoundOutcome, ProtocolError> {
    let inst = build_instance(config, setups)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = inst.num_functions();
    let queries = inst
        .reducers()
        .iter()
        .enumerate()
        .map(|(i, r)| generate_query(i + 1, r.demand, r.column, q, &mut rng))
        .collect();
    execute(inst, queries)
}

/// Runs a round with fixed query permutations, one per reducer.
pub fn run_round_with_queries(
    config: &InstanceConfig,
    setups: &[ReducerSetup],
    perms: &[Vec<usize>],
) -> Result<RoundOutcome, ProtocolError> {
    let inst = build_instance(config, setups)?;
    if perms.len() != inst.k() {
        return Err(ProtocolError::SetupCount {
            expected: inst.k(),
            found: perms.len(),
        });
    }
    let queries = perms
        .iter()
        .zip(inst.reducers())
        .enumerate()
        .map(|(i, (p, r))| Query::new(i + 1, p.clone(), r.column, r.demand))
        .collect::<Result<Vec<_>, _>>()?;
    execute(inst, queries)
}

fn execute(inst: MadcInstance, queries: Vec<Query>) -> Result<RoundOutcome, ProtocolError> {
    let oracle = IvOracle::new(inst.config().seed, inst.config().beta);
    let transcript = shuffle_round(&inst, &queries, &oracle)?;

    let expected_bits = (inst.k() * inst.num_labels() as usize * packet_bits(&inst)) as u64;
    if transcript.total_bits != expected_bits {
        return Err(ProtocolError::TranscriptSize {
            expected: expected_bits,
            found: transcript.total_bits,
        });
    }

    let mut outputs = Vec::with_capacity(inst.k());
    for k in 1..=inst.k() {
        let decoded = decode_reducer(&inst, k, &transcript, &queries, &oracle)?;
        for (&n, v) in &decoded.ivs {
            if *v != oracle.iv(decoded.function, n) {
                return Err(ProtocolError::WrongIv {
                    reducer: k,
                    file: n,
                });
            }
        }
        let out = reduce_output(&inst, &decoded)?;
        if out != oracle_output(&inst, &oracle, decoded.function) {
            return Err(ProtocolError::OutputMismatch { reducer: k });
        }
        outputs.push(out);
    }

    let report = measure_loads(&inst, &transcript);
    if !report.matches() {
        return Err(ProtocolError::LoadMismatch(report));
    }
    Ok(RoundOutcome {
        instance: inst,
        queries,
        transcript,
        outputs,
        report,
    })
}

/// Uniformly random demands and private connectivity for every reducer.
pub fn random_setups<R: Rng + ?Sized>(config: &InstanceConfig, rng: &mut R) -> Vec<ReducerSetup> {
    let q = config.num_functions();
    (0..config.k)
        .map(|_| {
            let demand = rng.random_range(1..=q);
            let connectivity = match config.model {
                Model::Connect => {
                    let rank = rng.random_range(1..=binomial(config.inner, config.alpha));
                    Connectivity::Subset(
                        lex_unrank(rank, config.inner, config.alpha).expect("rank in range"),
                    )
                }
                Model::Cyclic => Connectivity::Start(rng.random_range(1..=config.inner)),
            };
            ReducerSetup {
                demand,
                connectivity,
            }
        })
        .collect()
}
