//! PDA families: the lexicographic subset array, the 1-cyclic 2-regular
//! array, block extension, and the two factories combining them.

use thiserror::Error;

use crate::combinatorics::{binomial, cyclic_index, lex_rank, subsets_lex};
use crate::pda::{transpose, verify_pda, PdaArray, PdaEntry, PdaError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("alpha in [1, F-1] violated: F = {f}, alpha = {alpha}")]
    SubsetAlpha { f: usize, alpha: usize },
    #[error("Q >= 2 violated: Q = {q}")]
    CyclicTooSmall { q: usize },
    #[error("alpha < Q/2 violated: Q = {q}, alpha = {alpha}")]
    CyclicAlphaRange { q: usize, alpha: usize },
    #[error("Q + alpha even violated: Q = {q}, alpha = {alpha}")]
    CyclicParity { q: usize, alpha: usize },
    #[error("K > 1 violated: K = {k}")]
    ExtensionFactor { k: usize },
    #[error("base array is not a PDA: {0}")]
    InvalidBase(#[from] PdaError),
}

fn label(n: usize) -> PdaEntry {
    PdaEntry::Label(u32::try_from(n).expect("label exceeds u32"))
}

/// `C(F, alpha) x F` array with rows indexed by alpha-subsets `T` (lex
/// order) and columns by `d` in `[F]`: a star when `d` is in `T`, otherwise
/// the lex rank of `T + {d}` among (alpha+1)-subsets.
pub fn man_pda(f: usize, alpha: usize) -> Result<PdaArray, ConstructionError> {
    if alpha == 0 || alpha >= f {
        return Err(ConstructionError::SubsetAlpha { f, alpha });
    }
    let rows = subsets_lex(f, alpha);
    let mut entries = Vec::with_capacity(rows.len() * f);
    for t in &rows {
        for d in 1..=f {
            if t.contains(&d) {
                entries.push(PdaEntry::Star);
            } else {
                let mut union = t.clone();
                let pos = union.partition_point(|&x| x < d);
                union.insert(pos, d);
                let rank = lex_rank(&union, f).expect("union is a sorted subset of [F]");
                entries.push(label(rank));
            }
        }
    }
    Ok(PdaArray::new(rows.len(), f, entries)?)
}

fn check_cyclic_params(q: usize, alpha: usize) -> Result<(), ConstructionError> {
    if q < 2 {
        return Err(ConstructionError::CyclicTooSmall { q });
    }
    if alpha == 0 || 2 * alpha >= q {
        return Err(ConstructionError::CyclicAlphaRange { q, alpha });
    }
    if !(q + alpha).is_multiple_of(2) {
        return Err(ConstructionError::CyclicParity { q, alpha });
    }
    Ok(())
}

/// The `(1,2)-(Q, Q, alpha, Q(Q-alpha)/2)` array.
///
/// Requires `0 < alpha < Q/2` and `Q + alpha` even.
pub fn cyclic_pda(q: usize, alpha: usize) -> Result<PdaArray, ConstructionError> {
    check_cyclic_params(q, alpha)?;
    let m = (q + alpha) / 2;
    let mut p = PdaArray::stars(q, q)?;

    // Rows alpha+1..=m hold consecutive runs of Q labels.
    for r in alpha + 1..=m {
        let start = (r - (alpha + 1)) * q + 1;
        for c in 1..=q {
            p.set(r, c, label(start + c - 1));
        }
    }

    // Rows m+1..=Q mirror rows m..=alpha+1, right-shifted by m - j.
    for j in 1..=m - alpha {
        let source = m - j + 1;
        let target = m + j;
        let shift = m - j;
        for c in 1..=q {
            let col = cyclic_index((c + shift) as i64, q);
            p.set(target, col, p.get(source, c));
        }
    }

    // Column c moves down by c - 1 with wrap-around.
    let mut shifted = PdaArray::stars(q, q)?;
    for col in 1..=q {
        for row in 1..=q {
            let new_row = cyclic_index((row + col - 1) as i64, q);
            shifted.set(new_row, col, p.get(row, col));
        }
    }
    Ok(shifted)
}

/// Places `base` on the block diagonal of a `K x K` block grid whose
/// off-diagonal blocks are all stars.
pub fn extend_pda(base: &PdaArray, k: usize) -> Result<PdaArray, ConstructionError> {
    if k <= 1 {
        return Err(ConstructionError::ExtensionFactor { k });
    }
    verify_pda(base)?;
    let (fb, qb) = (base.rows(), base.cols());
    let mut out = PdaArray::stars(k * fb, k * qb)?;
    for block in 0..k {
        for r in 1..=fb {
            for c in 1..=qb {
                out.set(block * fb + r, block * qb + c, base.get(r, c));
            }
        }
    }
    Ok(out)
}

/// Extension of the transposed subset array: a
/// `(K C(F,alpha), KF, (K-1)F + alpha, C(F,alpha+1))` PDA.
pub fn construction1(f: usize, alpha: usize, k: usize) -> Result<PdaArray, ConstructionError> {
    extend_pda(&transpose(&man_pda(f, alpha)?), k)
}

/// Extension of the cyclic array: a
/// `(KQ, KQ, (K-1)Q + alpha, Q(Q-alpha)/2)` PDA.
pub fn construction2(q: usize, alpha: usize, k: usize) -> Result<PdaArray, ConstructionError> {
    extend_pda(&cyclic_pda(q, alpha)?, k)
}

/// Closed-form `(K, F, Z, S)` of [`construction1`].
pub fn construction1_params(f: usize, alpha: usize, k: usize) -> (usize, usize, usize, u32) {
    (
        k * binomial(f, alpha),
        k * f,
        (k - 1) * f + alpha,
        binomial(f, alpha + 1) as u32,
    )
}

/// Closed-form `(K, F, Z, S)` of [`construction2`].
pub fn construction2_params(q: usize, alpha: usize, k: usize) -> (usize, usize, usize, u32) {
    (
        k * q,
        k * q,
        (k - 1) * q + alpha,
        (q * (q - alpha) / 2) as u32,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pda::{check_l_cyclic, check_regularity, parse_pda_text};

    fn grid(text: &str) -> PdaArray {
        parse_pda_text(text).unwrap()
    }

    #[test]
    fn man_pda_three_two_is_symmetric_example() {
        let p = man_pda(3, 2).unwrap();
        assert_eq!(p, grid("* * 1\n* 1 *\n1 * *"));
        assert_eq!(transpose(&p), p);
    }

    #[test]
    fn man_pda_four_one() {
        let p = man_pda(4, 1).unwrap();
        assert_eq!(p, grid("* 1 2 3\n1 * 4 5\n2 4 * 6\n3 5 6 *"));
        let params = verify_pda(&transpose(&p)).unwrap();
        assert_eq!(params.tuple(), (4, 4, 1, 6));
    }

    #[test]
    fn man_pda_rejects_alpha() {
        assert!(man_pda(3, 0).is_err());
        assert!(man_pda(3, 3).is_err());
    }

    #[test]
    fn cyclic_pda_six_two() {
        let expected = grid(
            "* 6 12 10 5 *
* * 1 7 11 6
1 * * 2 8 12
7 2 * * 3 9
10 8 3 * * 4
5 11 9 4 * *",
        );
        assert_eq!(cyclic_pda(6, 2).unwrap(), expected);
    }

    #[test]
    fn cyclic_pda_five_one() {
        // Frozen from an independent script that tracks each pre-shift
        // entry (R, c) to final row [R + c - 1]_Q.
        let expected = grid(
            "* 1 6 9 5
1 * 2 7 10
6 2 * 3 8
9 7 3 * 4
5 10 8 4 *",
        );
        let p = cyclic_pda(5, 1).unwrap();
        assert_eq!(p, expected);
        assert_eq!(verify_pda(&p).unwrap().tuple(), (5, 5, 1, 10));
        assert_eq!(check_regularity(&p), Some(2));
        assert!(check_l_cyclic(&p, 1));
    }

    #[test]
    fn cyclic_pda_rejects_params() {
        assert_eq!(
            cyclic_pda(4, 2),
            Err(ConstructionError::CyclicAlphaRange { q: 4, alpha: 2 })
        );
        assert!(cyclic_pda(4, 2)
            .unwrap_err()
            .to_string()
            .contains("alpha < Q/2 violated"));
        assert_eq!(
            cyclic_pda(7, 2),
            Err(ConstructionError::CyclicParity { q: 7, alpha: 2 })
        );
        assert!(cyclic_pda(6, 0).is_err());
        assert!(cyclic_pda(1, 1).is_err());
    }

    #[test]
    fn extend_trivial() {
        let base = grid("1");
        assert_eq!(extend_pda(&base, 2).unwrap(), grid("1 *\n* 1"));
        assert_eq!(
            extend_pda(&base, 1),
            Err(ConstructionError::ExtensionFactor { k: 1 })
        );
        assert!(matches!(
            extend_pda(&grid("1 1"), 2),
            Err(ConstructionError::InvalidBase(_))
        ));
    }

    #[test]
    fn construction1_example() {
        let p = construction1(3, 2, 3).unwrap();
        assert_eq!(verify_pda(&p).unwrap().tuple(), (9, 9, 8, 1));
        let p1 = grid("* * 1\n* 1 *\n1 * *");
        for br in 0..3 {
            for bc in 0..3 {
                for r in 1..=3 {
                    for c in 1..=3 {
                        let e = p.get(br * 3 + r, bc * 3 + c);
                        if br == bc {
                            assert_eq!(e, p1.get(r, c));
                        } else {
                            assert!(e.is_star());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn construction_params_by_verifier() {
        let p = construction1(4, 2, 2).unwrap();
        assert_eq!(verify_pda(&p).unwrap().tuple(), (12, 8, 6, 4));
        assert_eq!(construction1_params(4, 2, 2), (12, 8, 6, 4));
        let p = construction2(8, 2, 2).unwrap();
        assert_eq!(verify_pda(&p).unwrap().tuple(), (16, 16, 10, 24));
        assert_eq!(construction2_params(8, 2, 2), (16, 16, 10, 24));
        let p = construction2(6, 2, 6).unwrap();
        assert_eq!(verify_pda(&p).unwrap().tuple(), (36, 36, 32, 12));
    }
}
