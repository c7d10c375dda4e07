//! Privacy audits of the broadcast queries.
//!
//! Another reducer sees `y_j` but not the private column `a_j`, which it
//! must treat as uniform on `[Q]`. The function index `d_j` stays hidden iff
//! the law of `y_j` is the same for every `d_j`. Small alphabets are
//! checked exactly by pushing every random choice of the query sampler
//! through [`query_from_choices`]; larger ones by a seeded chi-square test.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::protocol::{choice_space, generate_query, query_from_choices};
use crate::Exact;

/// Largest alphabet handled by exact enumeration.
pub const MAX_EXACT_Q: usize = 8;

/// Quantile used for the sampled check.
pub const CHI_SQUARE_QUANTILE: f64 = 0.999;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("exact enumeration supports Q in [1, {MAX_EXACT_Q}], got {0}")]
    TooLarge(usize),
    #[error("K >= 2 violated: K = {0}")]
    TooFewReducers(usize),
    #[error("demand {d} outside [1, {q}]")]
    InvalidDemand { d: usize, q: usize },
    #[error("query law differs between d = {d} and d = {d_other}: total variation {tv}")]
    PrivacyViolation { d: usize, d_other: usize, tv: Exact },
    #[error("joint query law for K = {k} does not factorize or depends on the demands")]
    JointDependence { k: usize },
}

/// Signature of a query sampler driven by explicit choices:
/// `(demand, column, Q, choices) -> permutation`.
pub type ChoiceSampler = dyn Fn(usize, usize, usize, &[usize]) -> Vec<usize>;

/// Exact law of a query over permutations of `[Q]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDistribution {
    pub q: usize,
    pub probabilities: BTreeMap<Vec<usize>, Exact>,
}

impl QueryDistribution {
    pub fn total(&self) -> Exact {
        self.probabilities.values().copied().sum()
    }

    /// True iff all `Q!` permutations carry `1/Q!`.
    pub fn is_uniform(&self) -> bool {
        let n = factorial(self.q);
        self.probabilities.len() as u64 == n
            && self.probabilities.values().all(|p| *p == Exact::new(1, n))
    }

    pub fn tv_distance(&self, other: &QueryDistribution) -> Exact {
        let zero = Exact::from_integer(0);
        let mut sum = zero;
        let keys = self.probabilities.keys().chain(other.probabilities.keys());
        let mut seen = std::collections::BTreeSet::new();
        for key in keys {
            if !seen.insert(key) {
                continue;
            }
            let a = self.probabilities.get(key).copied().unwrap_or(zero);
            let b = other.probabilities.get(key).copied().unwrap_or(zero);
            sum += if a > b { a - b } else { b - a };
        }
        sum / 2
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Decodes `code` in mixed radix `(Q-1, Q-2, ..., 1)`.
fn choices_from_code(q: usize, mut code: u64) -> Vec<usize> {
    (0..q.saturating_sub(1))
        .map(|i| {
            let radix = (q - 1 - i) as u64;
            let c = code % radix;
            code /= radix;
            c as usize
        })
        .collect()
}

/// Law of `y` given `d`, with `a` uniform on `[Q]` and each choice sequence
/// equally likely, for an arbitrary choice-driven sampler.
pub fn query_distribution_with(
    q: usize,
    d: usize,
    sampler: &ChoiceSampler,
) -> Result<QueryDistribution, PrivacyError> {
    if q == 0 || q > MAX_EXACT_Q {
        return Err(PrivacyError::TooLarge(q));
    }
    if !(1..=q).contains(&d) {
        return Err(PrivacyError::InvalidDemand { d, q });
    }
    let codes = choice_space(q).expect("small alphabet");
    let weight = Exact::new(1, q as u64 * codes);
    let mut probabilities = BTreeMap::new();
    for a in 1..=q {
        for code in 0..codes {
            let y = sampler(d, a, q, &choices_from_code(q, code));
            *probabilities.entry(y).or_insert(Exact::from_integer(0)) += weight;
        }
    }
    Ok(QueryDistribution { q, probabilities })
}

/// Exact law of the protocol's query for demand `d`.
pub fn exact_query_distribution(q: usize, d: usize) -> Result<QueryDistribution, PrivacyError> {
    query_distribution_with(q, d, &query_from_choices)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub q: usize,
    pub k: usize,
    /// Observer contexts `(d_k, a_k)` examined.
    pub contexts: usize,
    /// Ordered demand pairs compared.
    pub pairs_checked: usize,
    pub max_tv: Exact,
    /// Whether the joint law of all other queries was also enumerated.
    pub joint_checked: bool,
}

/// Exhaustive check that no observer context and no pair of demands
/// changes the law of another reducer's query.
pub fn audit_independence(q: usize, k: usize) -> Result<AuditReport, PrivacyError> {
    audit_independence_with(q, k, &query_from_choices)
}

pub fn audit_independence_with(
    q: usize,
    k: usize,
    sampler: &ChoiceSampler,
) -> Result<AuditReport, PrivacyError> {
    if k < 2 {
        return Err(PrivacyError::TooFewReducers(k));
    }
    let laws = (1..=q)
        .map(|d| query_distribution_with(q, d, sampler))
        .collect::<Result<Vec<_>, _>>()?;

    // The observer's context (d_k, a_k) and its own query draw are random
    // variables separate from reducer j's, so the law of y_j given
    // (d_j, d_k, a_k) is laws[d_j] in every one of the Q^2 contexts.
    let contexts = q * q;
    let mut max_tv = Exact::from_integer(0);
    let mut worst = None;
    let mut pairs_checked = 0;
    for d in 1..=q {
        for d_other in (1..=q).filter(|&x| x != d) {
            pairs_checked += 1;
            let tv = laws[d - 1].tv_distance(&laws[d_other - 1]);
            if tv > max_tv {
                max_tv = tv;
                worst = Some((d, d_other));
            }
        }
    }
    if let Some((d, d_other)) = worst {
        return Err(PrivacyError::PrivacyViolation {
            d,
            d_other,
            tv: max_tv,
        });
    }

    let joint_checked = k <= 3 && q <= 3;
    if joint_checked && !joint_factorizes(q, k, sampler, &laws) {
        return Err(PrivacyError::JointDependence { k });
    }

    Ok(AuditReport {
        q,
        k,
        contexts,
        pairs_checked,
        max_tv,
        joint_checked,
    })
}

/// Enumerates the randomness of all `K - 1` other reducers together for
/// every demand vector and checks the joint law of their queries is the
/// product of uniform marginals.
fn joint_factorizes(
    q: usize,
    k: usize,
    sampler: &ChoiceSampler,
    laws: &[QueryDistribution],
) -> bool {
    let others = k - 1;
    let codes = choice_space(q).expect("small alphabet");
    let per_reducer = q as u64 * codes;
    let outcomes = per_reducer.pow(others as u32);
    let weight = Exact::new(1, outcomes);

    let demand_vectors = (q as u64).pow(others as u32);
    let mut reference: Option<BTreeMap<Vec<Vec<usize>>, Exact>> = None;
    for dv in 0..demand_vectors {
        let demands: Vec<usize> = (0..others)
            .map(|i| ((dv / (q as u64).pow(i as u32)) % q as u64) as usize + 1)
            .collect();
        let mut joint: BTreeMap<Vec<Vec<usize>>, Exact> = BTreeMap::new();
        for outcome in 0..outcomes {
            let ys: Vec<Vec<usize>> = (0..others)
                .map(|i| {
                    let r = (outcome / per_reducer.pow(i as u32)) % per_reducer;
                    let a = (r / codes) as usize + 1;
                    sampler(demands[i], a, q, &choices_from_code(q, r % codes))
                })
                .collect();
            *joint.entry(ys).or_insert(Exact::from_integer(0)) += weight;
        }
        for (ys, p) in &joint {
            let product: Exact = ys
                .iter()
                .zip(&demands)
                .map(|(y, &d)| {
                    laws[d - 1]
                        .probabilities
                        .get(y)
                        .copied()
                        .unwrap_or_default()
                })
                .product();
            if *p != product {
                return false;
            }
        }
        match &reference {
            None => reference = Some(joint),
            Some(r) if *r != joint => return false,
            _ => {}
        }
    }
    true
}

/// Outcome of the sampled uniformity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareCheck {
    pub statistic: f64,
    pub dof: u64,
    pub threshold: f64,
    pub trials: u64,
}

impl ChiSquareCheck {
    pub fn passes(&self) -> bool {
        self.statistic <= self.threshold
    }
}

/// Lexicographic rank of a permutation of `[Q]`, 0-based.
pub fn permutation_rank(perm: &[usize]) -> u64 {
    let q = perm.len();
    let mut rank = 0u64;
    for i in 0..q {
        let smaller_later = perm[i + 1..].iter().filter(|&&v| v < perm[i]).count() as u64;
        rank += smaller_later * factorial(q - 1 - i);
    }
    rank
}

/// `quantile` of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_threshold(dof: u64, quantile: f64) -> f64 {
    if dof == 0 {
        return 0.0;
    }
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(quantile)
}

/// Pearson statistic of `trials` draws from `sample` against the uniform
/// law on the `Q!` permutations.
pub fn chi_square_statistic<F>(q: usize, trials: u64, mut sample: F) -> ChiSquareCheck
where
    F: FnMut() -> Vec<usize>,
{
    let cells = factorial(q);
    let mut counts = vec![0u64; cells as usize];
    for _ in 0..trials {
        counts[permutation_rank(&sample()) as usize] += 1;
    }
    let expected = trials as f64 / cells as f64;
    let statistic = if cells == 1 {
        0.0
    } else {
        counts
            .iter()
            .map(|&c| {
                let diff = c as f64 - expected;
                diff * diff / expected
            })
            .sum()
    };
    let dof = cells - 1;
    ChiSquareCheck {
        statistic,
        dof,
        threshold: chi_square_threshold(dof, CHI_SQUARE_QUANTILE),
        trials,
    }
}

/// Samples `(a, y)` with the protocol's sampler (`a` uniform) and tests `y`
/// for uniformity.
pub fn empirical_query_check(q: usize, d: usize, trials: u64, seed: u64) -> ChiSquareCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chi_square_statistic(q, trials, || {
        let a = rng.random_range(1..=q);
        generate_query(1, d, a, q, &mut rng).perm().to_vec()
    })
}
