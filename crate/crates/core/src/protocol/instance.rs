use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::combinatorics::{binomial, cyclic_interval, lex_rank};
use crate::construct::{construction1, construction2, cyclic_pda, man_pda};
use crate::pda::{transpose, verify_pda, PdaArray, PdaParams};

/// Private-block connectivity pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Any alpha mappers of the private block.
    Connect,
    /// Alpha cyclically consecutive mappers of the private block.
    Cyclic,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Connect => "connect",
            Model::Cyclic => "cyclic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub model: Model,
    /// Number of reducers, which is also the number of mapper blocks.
    pub k: usize,
    /// Mappers per block: `F` for the connect model, `Q` for the cyclic one.
    pub inner: usize,
    pub alpha: usize,
    /// Explicit function count; must agree with the model when given.
    pub functions: Option<usize>,
    /// Files per batch.
    pub eta: usize,
    /// IV length in bits.
    pub beta: usize,
    /// Output length in bits.
    pub b_out: usize,
    /// File length in bits (files are never materialized).
    pub d_file: usize,
    /// Key of the IV oracle.
    pub seed: u64,
}

impl InstanceConfig {
    fn with_defaults(model: Model, k: usize, inner: usize, alpha: usize) -> Self {
        let beta = 8 * k.saturating_sub(1).max(1);
        Self {
            model,
            k,
            inner,
            alpha,
            functions: None,
            eta: 1,
            beta,
            b_out: beta,
            d_file: 64,
            seed: 0,
        }
    }

    pub fn connect(k: usize, f: usize, alpha: usize) -> Self {
        Self::with_defaults(Model::Connect, k, f, alpha)
    }

    pub fn cyclic(k: usize, q: usize, alpha: usize) -> Self {
        Self::with_defaults(Model::Cyclic, k, q, alpha)
    }

    pub fn eta(mut self, eta: usize) -> Self {
        self.eta = eta;
        self
    }

    /// Sets `beta` and, unless changed separately, the output length.
    pub fn beta(mut self, beta: usize) -> Self {
        self.beta = beta;
        self.b_out = beta;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of output functions `Q`.
    pub fn num_functions(&self) -> usize {
        match self.model {
            Model::Connect => binomial(self.inner, self.alpha),
            Model::Cyclic => self.inner,
        }
    }

    /// Checks every constraint that does not need the PDA.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.k < 2 {
            return Err(ProtocolError::Param(format!(
                "K >= 2 violated: K = {}",
                self.k
            )));
        }
        match self.model {
            Model::Connect => {
                man_pda(self.inner, self.alpha)?;
            }
            Model::Cyclic => {
                cyclic_pda(self.inner, self.alpha)?;
            }
        }
        let q = self.num_functions();
        if let Some(given) = self.functions {
            if given != q {
                return Err(ProtocolError::FunctionCountMismatch { derived: q, given });
            }
        }
        for (name, v) in [
            ("eta", self.eta),
            ("beta", self.beta),
            ("b_out", self.b_out),
        ] {
            if v == 0 {
                return Err(ProtocolError::Param(format!("{name} >= 1 violated")));
            }
        }
        if !(self.eta * self.beta).is_multiple_of(self.k - 1) {
            return Err(ProtocolError::Divisibility {
                eta: self.eta,
                beta: self.beta,
                k: self.k,
            });
        }
        Ok(())
    }
}

/// Private choice of one reducer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// Sorted alpha-subset of the private block (connect model).
    Subset(Vec<usize>),
    /// First mapper of the consecutive window (cyclic model).
    Start(usize),
}

/// What a reducer brings to the round: its function and its connectivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducerSetup {
    pub demand: usize,
    pub connectivity: Connectivity,
}

impl ReducerSetup {
    pub fn subset(demand: usize, subset: &[usize]) -> Self {
        Self {
            demand,
            connectivity: Connectivity::Subset(subset.to_vec()),
        }
    }

    pub fn start(demand: usize, start: usize) -> Self {
        Self {
            demand,
            connectivity: Connectivity::Start(start),
        }
    }
}

/// Batch `B_block^index`, stored by mapper `M_block^index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BatchId {
    pub block: usize,
    pub index: usize,
}

impl BatchId {
    pub fn new(block: usize, index: usize) -> Self {
        Self { block, index }
    }
}

impl fmt::Display for BatchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}^{}", self.block, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reducer {
    pub demand: usize,
    /// Impersonated column inside the reducer's own column block.
    pub column: usize,
    /// Connected mappers of the private block, ascending.
    pub connected: Vec<usize>,
}

/// A validated protocol instance with its PDAs and the private assignment.
#[derive(Clone, Debug)]
pub struct MadcInstance {
    config: InstanceConfig,
    inner: PdaArray,
    inner_params: PdaParams,
    pda: PdaArray,
    reducers: Vec<Reducer>,
}

/// Builds the PDAs, derives each reducer's impersonated column from its
/// connectivity and checks that it matches the PDA's star rows.
pub fn build_instance(
    config: &InstanceConfig,
    setups: &[ReducerSetup],
) -> Result<MadcInstance, ProtocolError> {
    config.validate()?;
    let (k, b, alpha) = (config.k, config.inner, config.alpha);
    let q = config.num_functions();
    if setups.len() != k {
        return Err(ProtocolError::SetupCount {
            expected: k,
            found: setups.len(),
        });
    }
    let (inner, pda) = match config.model {
        Model::Connect => (transpose(&man_pda(b, alpha)?), construction1(b, alpha, k)?),
        Model::Cyclic => (cyclic_pda(b, alpha)?, construction2(b, alpha, k)?),
    };
    let inner_params = verify_pda(&inner)?;

    let mut reducers = Vec::with_capacity(k);
    for (idx, setup) in setups.iter().enumerate() {
        let reducer = idx + 1;
        if !(1..=q).contains(&setup.demand) {
            return Err(ProtocolError::InvalidDemand {
                reducer,
                demand: setup.demand,
                q,
            });
        }
        let bad = |reason: String| ProtocolError::InvalidConnectivity { reducer, reason };
        let (column, connected) = match (&setup.connectivity, config.model) {
            (Connectivity::Subset(s), Model::Connect) => {
                if s.len() != alpha {
                    return Err(bad(format!("expected {alpha} mappers, got {}", s.len())));
                }
                let rank = lex_rank(s, b).map_err(|e| bad(e.to_string()))?;
                (rank, s.clone())
            }
            (Connectivity::Start(a), Model::Cyclic) => {
                if !(1..=q).contains(a) {
                    return Err(bad(format!("start {a} outside [1, {q}]")));
                }
                let mut window = cyclic_interval(*a as i64, alpha - 1, b);
                window.sort_unstable();
                (*a, window)
            }
            (c, m) => return Err(bad(format!("{c:?} does not fit the {m} model"))),
        };
        reducers.push(Reducer {
            demand: setup.demand,
            column,
            connected,
        });
    }

    let inst = MadcInstance {
        config: config.clone(),
        inner,
        inner_params,
        pda,
        reducers,
    };
    for reducer in 1..=k {
        if inst.accessible_batches(reducer) != inst.impersonated_star_batches(reducer) {
            return Err(ProtocolError::AccessMismatch { reducer });
        }
    }
    Ok(inst)
}

impl MadcInstance {
    pub fn config(&self) -> &InstanceConfig {
        &self.config
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    /// Batches (mappers) per block.
    pub fn batches_per_block(&self) -> usize {
        self.config.inner
    }

    pub fn num_functions(&self) -> usize {
        self.config.num_functions()
    }

    pub fn num_files(&self) -> usize {
        self.config.k * self.config.inner * self.config.eta
    }

    pub fn num_mappers(&self) -> usize {
        self.config.k * self.config.inner
    }

    /// The block-diagonal PDA (`P^(1)` or `P^(2)`).
    pub fn inner_pda(&self) -> &PdaArray {
        &self.inner
    }

    pub fn inner_params(&self) -> &PdaParams {
        &self.inner_params
    }

    /// The extended PDA.
    pub fn pda(&self) -> &PdaArray {
        &self.pda
    }

    /// Number of distinct labels `S`.
    pub fn num_labels(&self) -> u32 {
        self.inner_params.s
    }

    pub fn reducer(&self, k: usize) -> &Reducer {
        &self.reducers[k - 1]
    }

    pub fn reducers(&self) -> &[Reducer] {
        &self.reducers
    }

    /// File indices of a batch, 1-based.
    pub fn batch_files(&self, batch: BatchId) -> RangeInclusive<usize> {
        let eta = self.config.eta;
        let first = ((batch.block - 1) * self.config.inner + (batch.index - 1)) * eta + 1;
        first..=first + eta - 1
    }

    /// Batch holding file `n`.
    pub fn batch_of_file(&self, n: usize) -> BatchId {
        let mapper = (n - 1) / self.config.eta;
        BatchId::new(
            mapper / self.config.inner + 1,
            mapper % self.config.inner + 1,
        )
    }

    pub fn all_batches(&self) -> impl Iterator<Item = BatchId> + '_ {
        (1..=self.config.k)
            .flat_map(move |j| (1..=self.config.inner).map(move |f| BatchId::new(j, f)))
    }

    /// Batches reducer `k` reaches: all public blocks plus its connected
    /// mappers in block `k`.
    pub fn accessible_batches(&self, k: usize) -> BTreeSet<BatchId> {
        let reducer = self.reducer(k);
        self.all_batches()
            .filter(|b| b.block != k || reducer.connected.contains(&b.index))
            .collect()
    }

    /// Star rows of the impersonated column of the extended PDA, as batches.
    pub fn impersonated_star_batches(&self, k: usize) -> BTreeSet<BatchId> {
        let q = self.num_functions();
        let col = (k - 1) * q + self.reducer(k).column;
        self.pda
            .star_rows(col)
            .into_iter()
            .map(|row| {
                BatchId::new(
                    (row - 1) / self.config.inner + 1,
                    (row - 1) % self.config.inner + 1,
                )
            })
            .collect()
    }
}
