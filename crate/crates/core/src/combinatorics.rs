//! Subset ranking and the cyclic bracket arithmetic used by the constructions.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubsetError {
    #[error("subset {subset:?} is not a subset of [1, {ground}]")]
    OutOfRange { subset: Vec<usize>, ground: usize },
    #[error("subset must be non-empty")]
    Empty,
    #[error("subset {0:?} is not strictly increasing")]
    NotSorted(Vec<usize>),
    #[error("rank {rank} outside [1, {count}] for {size}-subsets of [1, {ground}]")]
    RankOutOfRange {
        rank: usize,
        count: usize,
        size: usize,
        ground: usize,
    },
}

/// `n choose k`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

/// 1-based position of a sorted subset of `[1, ground]` among all subsets
/// of the same size in lexicographic order.
pub fn lex_rank(subset: &[usize], ground: usize) -> Result<usize, SubsetError> {
    if subset.is_empty() {
        return Err(SubsetError::Empty);
    }
    if subset.iter().any(|&x| x == 0 || x > ground) {
        return Err(SubsetError::OutOfRange {
            subset: subset.to_vec(),
            ground,
        });
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SubsetError::NotSorted(subset.to_vec()));
    }
    let t = subset.len();
    let mut rank = 1;
    let mut prev = 0;
    for (i, &x) in subset.iter().enumerate() {
        // Subsets agreeing on the first i elements and using a smaller
        // element v at position i all precede this one.
        for v in prev + 1..x {
            rank += binomial(ground - v, t - i - 1);
        }
        prev = x;
    }
    Ok(rank)
}

/// Inverse of [`lex_rank`].
pub fn lex_unrank(rank: usize, ground: usize, size: usize) -> Result<Vec<usize>, SubsetError> {
    let count = binomial(ground, size);
    if size == 0 {
        return Err(SubsetError::Empty);
    }
    if rank == 0 || rank > count {
        return Err(SubsetError::RankOutOfRange {
            rank,
            count,
            size,
            ground,
        });
    }
    let mut remaining = rank - 1;
    let mut out = Vec::with_capacity(size);
    let mut v = 1;
    while out.len() < size {
        let left = size - out.len() - 1;
        let block = binomial(ground - v, left);
        if remaining < block {
            out.push(v);
        } else {
            remaining -= block;
        }
        v += 1;
    }
    Ok(out)
}

/// All `size`-subsets of `[1, ground]` in lexicographic order.
pub fn subsets_lex(ground: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(ground, size));
    if size == 0 || size > ground {
        return out;
    }
    let mut cur: Vec<usize> = (1..=size).collect();
    loop {
        out.push(cur.clone());
        // Rightmost position that can still be incremented.
        let Some(i) = (0..size).rev().find(|&i| cur[i] < ground - (size - 1 - i)) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..size {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The bracket `[a]_b`: `a` wrapped into `[1, b]`.
pub fn cyclic_index(a: i64, b: usize) -> usize {
    assert!(b >= 1, "modulus must be positive");
    ((a - 1).rem_euclid(b as i64) + 1) as usize
}

/// `[a]_b, [a+1]_b, ..., [a+c]_b` (that is, `c + 1` elements).
pub fn cyclic_interval(a: i64, c: usize, b: usize) -> Vec<usize> {
    (0..=c as i64).map(|i| cyclic_index(a + i, b)).collect()
}
