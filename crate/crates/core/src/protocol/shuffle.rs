//! Coded shuffle: demand bookkeeping, packetization, the multicast
//! transcript and per-reducer decoding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use super::instance::{BatchId, MadcInstance};
use super::oracle::{to_hex, xor_into, Bits, IvOracle};
use super::query::Query;
use super::ProtocolError;

/// Packet `U^{superscript}_{function, batch}`: the part of the aggregated
/// symbol of `function` over `batch` destined for coded symbols sent by
/// reducer `superscript`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketId {
    pub function: usize,
    pub batch: BatchId,
    pub superscript: usize,
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "U({},{}.{})^{}",
            self.function, self.batch.block, self.batch.index, self.superscript
        )
    }
}

/// Demand of an effective reducer for one integer entry of the PDA.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Demand {
    pub label: u32,
    pub function: usize,
    pub batch: BatchId,
}

/// Key `(column block j, column i, row f)` of a demand.
pub type DemandKey = (usize, usize, usize);

/// Every integer entry of the diagonal blocks, mapped to the aggregated
/// symbol `U_{y_j[i], B_j^f}` it stands for.
pub fn demand_table(inst: &MadcInstance, queries: &[Query]) -> BTreeMap<DemandKey, Demand> {
    let inner = inst.inner_pda();
    let mut out = BTreeMap::new();
    for j in 1..=inst.k() {
        for ((f, i), e) in inner.cells() {
            if let Some(label) = e.label() {
                out.insert(
                    (j, i, f),
                    Demand {
                        label,
                        function: queries[j - 1].at(i),
                        batch: BatchId::new(j, f),
                    },
                );
            }
        }
    }
    out
}

/// Packets XORed into the coded symbol reducer `sender` sends for `label`:
/// superscript-`sender` parts of every `label` demand outside block `sender`.
pub fn coded_terms(
    inst: &MadcInstance,
    queries: &[Query],
    sender: usize,
    label: u32,
) -> Vec<PacketId> {
    let cells = inst
        .inner_pda()
        .cells()
        .filter(|(_, e)| e.label() == Some(label))
        .map(|(cell, _)| cell)
        .collect::<Vec<_>>();
    (1..=inst.k())
        .filter(|&j| j != sender)
        .flat_map(|j| {
            cells.iter().map(move |&(f, i)| PacketId {
                function: queries[j - 1].at(i),
                batch: BatchId::new(j, f),
                superscript: sender,
            })
        })
        .collect()
}

/// What one reducer can compute on its own: IVs of every function over the
/// batches it is connected to, and nothing else.
pub struct LocalView<'a> {
    inst: &'a MadcInstance,
    oracle: &'a IvOracle,
    reducer: usize,
    accessible: BTreeSet<BatchId>,
}

impl<'a> LocalView<'a> {
    pub fn new(inst: &'a MadcInstance, oracle: &'a IvOracle, reducer: usize) -> Self {
        Self {
            inst,
            oracle,
            reducer,
            accessible: inst.accessible_batches(reducer),
        }
    }

    pub fn can_access(&self, batch: BatchId) -> bool {
        self.accessible.contains(&batch)
    }

    pub fn iv(&self, function: usize, file: usize) -> Option<Bits> {
        self.can_access(self.inst.batch_of_file(file))
            .then(|| self.oracle.iv(function, file))
    }

    /// Aggregated symbol: the batch's IVs for `function`, concatenated.
    pub fn aggregated(&self, function: usize, batch: BatchId) -> Option<Bits> {
        if !self.can_access(batch) {
            return None;
        }
        let mut out = Bits::new();
        for n in self.inst.batch_files(batch) {
            out.extend_from_bitslice(&self.oracle.iv(function, n));
        }
        Some(out)
    }

    pub fn packet(&self, id: PacketId) -> Option<Bits> {
        let symbol = self.aggregated(id.function, id.batch)?;
        let range = packet_range(self.inst, id.batch.block, id.superscript);
        Some(symbol[range].to_bitvec())
    }

    pub fn reducer(&self) -> usize {
        self.reducer
    }
}

/// Bits of one packet: `eta * beta / (K - 1)`.
pub fn packet_bits(inst: &MadcInstance) -> usize {
    let cfg = inst.config();
    cfg.eta * cfg.beta / (cfg.k - 1)
}

/// Position of the `superscript` part inside an aggregated symbol of block
/// `block`; parts are ordered by ascending superscript over `[K] \ {block}`.
fn packet_range(inst: &MadcInstance, block: usize, superscript: usize) -> std::ops::Range<usize> {
    assert_ne!(block, superscript, "no packet carries its own block index");
    let pos = if superscript < block {
        superscript - 1
    } else {
        superscript - 2
    };
    let len = packet_bits(inst);
    pos * len..(pos + 1) * len
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedSymbol {
    pub sender: usize,
    pub label: u32,
    pub terms: Vec<PacketId>,
    pub payload: Bits,
}

/// Everything broadcast during the shuffle, ordered by `(sender, label)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShuffleTranscript {
    symbols: Vec<CodedSymbol>,
    labels: u32,
    pub total_bits: u64,
}

impl ShuffleTranscript {
    pub fn symbols(&self) -> &[CodedSymbol] {
        &self.symbols
    }

    /// `X_sender^label`.
    pub fn get(&self, sender: usize, label: u32) -> &CodedSymbol {
        &self.symbols[(sender - 1) * self.labels as usize + (label as usize - 1)]
    }

    /// One tab-separated record per coded symbol:
    /// `sender  label  bits  hex-payload  packet-ids`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.symbols {
            let terms: Vec<String> = s.terms.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                s.sender,
                s.label,
                s.payload.len(),
                to_hex(&s.payload),
                terms.join(" ")
            );
        }
        out
    }
}

/// Every reducer XORs, for every label, the packets it owes and records the
/// result. Each packet is computed through the sender's [`LocalView`].
pub fn shuffle_round(
    inst: &MadcInstance,
    queries: &[Query],
    oracle: &IvOracle,
) -> Result<ShuffleTranscript, ProtocolError> {
    let s = inst.num_labels();
    let len = packet_bits(inst);
    let mut symbols = Vec::with_capacity(inst.k() * s as usize);
    let mut total_bits = 0u64;
    for sender in 1..=inst.k() {
        let view = LocalView::new(inst, oracle, sender);
        for label in 1..=s {
            let terms = coded_terms(inst, queries, sender, label);
            let mut payload = Bits::repeat(false, len);
            for &t in &terms {
                let packet = view
                    .packet(t)
                    .ok_or(ProtocolError::InfeasibleTransmission {
                        reducer: sender,
                        label,
                    })?;
                xor_into(&mut payload, &packet);
            }
            total_bits += payload.len() as u64;
            symbols.push(CodedSymbol {
                sender,
                label,
                terms,
                payload,
            });
        }
    }
    Ok(ShuffleTranscript {
        symbols,
        labels: s,
        total_bits,
    })
}

/// The IVs of one function as held by one reducer after decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedIvs {
    pub reducer: usize,
    pub function: usize,
    /// File index to IV.
    pub ivs: BTreeMap<usize, Bits>,
}

/// Recovers every IV of reducer `k`'s function: local IVs directly, missing
/// ones by cancelling locally computable packets from each `X_{k'}^t`.
pub fn decode_reducer(
    inst: &MadcInstance,
    k: usize,
    transcript: &ShuffleTranscript,
    queries: &[Query],
    oracle: &IvOracle,
) -> Result<DecodedIvs, ProtocolError> {
    let view = LocalView::new(inst, oracle, k);
    let reducer = inst.reducer(k);
    let function = reducer.demand;
    let beta = inst.config().beta;
    let mut ivs = BTreeMap::new();

    for n in 1..=inst.num_files() {
        if let Some(v) = view.iv(function, n) {
            ivs.insert(n, v);
        }
    }

    let packet_len = packet_bits(inst);
    for (f, label) in inst.inner_pda().labels_in_column(reducer.column) {
        let batch = BatchId::new(k, f);
        let mut symbol = Bits::repeat(false, packet_len * (inst.k() - 1));
        for sender in (1..=inst.k()).filter(|&s| s != k) {
            let wanted = PacketId {
                function,
                batch,
                superscript: sender,
            };
            let coded = transcript.get(sender, label);
            let mut acc = coded.payload.clone();
            let mut residual = Vec::new();
            let mut found = false;
            for term in coded_terms(inst, queries, sender, label) {
                if term == wanted {
                    found = true;
                    continue;
                }
                match view.packet(term) {
                    Some(p) => xor_into(&mut acc, &p),
                    None => residual.push(term),
                }
            }
            if !found || !residual.is_empty() {
                return Err(ProtocolError::DecodeFailure {
                    reducer: k,
                    label,
                    residual,
                });
            }
            symbol[packet_range(inst, k, sender)].copy_from_bitslice(&acc);
        }
        for (offset, n) in inst.batch_files(batch).enumerate() {
            ivs.insert(n, symbol[offset * beta..(offset + 1) * beta].to_bitvec());
        }
    }

    Ok(DecodedIvs {
        reducer: k,
        function,
        ivs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::instance::{build_instance, InstanceConfig, ReducerSetup};

    #[test]
    fn packet_ranges_partition_symbol() {
        let cfg = InstanceConfig::cyclic(4, 6, 2).beta(6);
        let setups: Vec<_> = (1..=4).map(|k| ReducerSetup::start(1, k)).collect();
        let inst = build_instance(&cfg, &setups).unwrap();
        assert_eq!(packet_bits(&inst), 2);
        for block in 1..=4 {
            let mut ranges: Vec<_> = (1..=4)
                .filter(|&s| s != block)
                .map(|s| packet_range(&inst, block, s))
                .collect();
            ranges.sort_by_key(|r| r.start);
            assert_eq!(ranges, vec![0..2, 2..4, 4..6]);
        }
    }

    #[test]
    fn two_reducers_send_whole_symbols() {
        let cfg = InstanceConfig::connect(2, 3, 1).beta(5);
        let setups = vec![ReducerSetup::subset(1, &[1]), ReducerSetup::subset(3, &[3])];
        let inst = build_instance(&cfg, &setups).unwrap();
        assert_eq!(packet_bits(&inst), 5);
        let queries = vec![
            Query::new(1, vec![1, 2, 3], 1, 1).unwrap(),
            Query::new(2, vec![2, 1, 3], 3, 3).unwrap(),
        ];
        let oracle = IvOracle::new(3, 5);
        let t = shuffle_round(&inst, &queries, &oracle).unwrap();
        // Each coded symbol XORs whole IVs of the other block.
        let x = t.get(1, 1);
        let mut expected = Bits::repeat(false, 5);
        for term in &x.terms {
            assert_eq!(term.batch.block, 2);
            let n = *inst.batch_files(term.batch).start();
            xor_into(&mut expected, &oracle.iv(term.function, n));
        }
        assert_eq!(x.payload, expected);
    }
}
