use rand::Rng;

use super::ProtocolError;

/// The permutation a reducer broadcasts: slot `i` names the function of the
/// effective reducer in column `i` of its block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub owner: usize,
    perm: Vec<usize>,
}

impl Query {
    /// Validates that `perm` is a permutation of `[Q]` with `perm[column] = demand`.
    pub fn new(
        owner: usize,
        perm: Vec<usize>,
        column: usize,
        demand: usize,
    ) -> Result<Self, ProtocolError> {
        let q = perm.len();
        let bad = |reason: String| ProtocolError::InvalidQuery {
            reducer: owner,
            reason,
        };
        let mut seen = vec![false; q];
        for &v in &perm {
            if !(1..=q).contains(&v) || std::mem::replace(&mut seen[v - 1], true) {
                return Err(bad(format!("{perm:?} is not a permutation of [1, {q}]")));
            }
        }
        if column == 0 || column > q || perm[column - 1] != demand {
            return Err(bad(format!("slot {column} of {perm:?} is not {demand}")));
        }
        Ok(Self { owner, perm })
    }

    /// Function index at 1-based slot `i`.
    pub fn at(&self, i: usize) -> usize {
        self.perm[i - 1]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

/// Number of choice sequences for [`query_from_choices`]: `(q - 1)!`, if it
/// fits in a `u64`.
pub fn choice_space(q: usize) -> Option<u64> {
    (1..q as u64).try_fold(1u64, |acc, i| acc.checked_mul(i))
}

/// Deterministic map from a Lehmer-style choice sequence to an admissible
/// permutation: `choices[i] < q - 1 - i` picks, in order, which remaining
/// function fills the next free slot. Distinct sequences give distinct
/// permutations, so a uniform sequence gives a uniform admissible query.
pub fn query_from_choices(demand: usize, column: usize, q: usize, choices: &[usize]) -> Vec<usize> {
    assert_eq!(
        choices.len(),
        q.saturating_sub(1),
        "one choice per free slot"
    );
    let mut pool: Vec<usize> = (1..=q).filter(|&v| v != demand).collect();
    let mut picks = choices.iter().map(|&c| pool.remove(c));
    (1..=q)
        .map(|slot| {
            if slot == column {
                demand
            } else {
                picks.next().expect("enough choices")
            }
        })
        .collect()
}

/// Draws a uniformly random permutation of `[Q]` with `demand` at slot
/// `column`.
pub fn generate_query<R: Rng + ?Sized>(
    owner: usize,
    demand: usize,
    column: usize,
    q: usize,
    rng: &mut R,
) -> Query {
    let choices: Vec<usize> = (0..q.saturating_sub(1))
        .map(|i| rng.random_range(0..q - 1 - i))
        .collect();
    Query {
        owner,
        perm: query_from_choices(demand, column, q, &choices),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn query_validation() {
        assert!(Query::new(3, vec![2, 1, 3], 3, 3).is_ok());
        assert!(Query::new(3, vec![2, 1, 3], 1, 3).is_err());
        assert!(Query::new(3, vec![2, 2, 3], 3, 3).is_err());
        assert!(Query::new(3, vec![2, 4, 3], 3, 3).is_err());
    }

    #[test]
    fn single_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            assert_eq!(generate_query(1, 1, 1, 1, &mut rng).perm(), &[1]);
        }
    }

    #[test]
    fn pinned_slot_and_reachable_draw() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen_213 = false;
        for _ in 0..200 {
            let y = generate_query(3, 3, 3, 3, &mut rng);
            assert_eq!(y.at(3), 3);
            Query::new(3, y.perm().to_vec(), 3, 3).unwrap();
            seen_213 |= y.perm() == [2, 1, 3];
        }
        assert!(seen_213);
    }

    #[test]
    fn two_admissible_permutations_equally_often() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts
                .entry(generate_query(1, 1, 1, 3, &mut rng).perm().to_vec())
                .or_default() += 1;
        }
        let mut keys: Vec<_> = counts.keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, vec![vec![1, 2, 3], vec![1, 3, 2]]);
        // Binomial(10^4, 1/2) has sd 50; 4 sd.
        let c = counts[&vec![1, 2, 3]] as i64;
        assert!((c - 5000).abs() < 200, "count {c}");
    }

    #[test]
    fn choices_are_a_bijection() {
        for q in 1..=6usize {
            let total = choice_space(q).unwrap() as usize;
            for column in 1..=q {
                for demand in 1..=q {
                    let mut all = std::collections::HashSet::new();
                    for code in 0..total {
                        let mut rest = code;
                        let choices: Vec<usize> = (0..q - 1)
                            .map(|i| {
                                let radix = q - 1 - i;
                                let c = rest % radix;
                                rest /= radix;
                                c
                            })
                            .collect();
                        let p = query_from_choices(demand, column, q, &choices);
                        assert_eq!(p[column - 1], demand);
                        all.insert(p);
                    }
                    assert_eq!(all.len(), total);
                }
            }
        }
    }
}
