//! Canonical enumeration of the subspaces of `F_q^n`.
//!
//! Each `rho`-dimensional column space of `F_q^n` gets exactly one
//! representative: the transpose of the reduced row echelon basis. These
//! canonical maps stand in for arbitrary full-column-rank matrices wherever a
//! property only depends on the column space.

use itertools::Itertools;

use crate::matrix::GroundMatrix;
use crate::{Error, Result};

/// Gaussian binomial coefficient: the number of `k`-dimensional subspaces of
/// `F_q^n`.
pub fn gaussian_binomial(n: usize, k: usize, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    let qp = |e: usize| (q as u128).pow(e as u32);
    for i in 0..k {
        num *= qp(n - i) - 1;
        den *= qp(k - i) - 1;
    }
    num / den
}

/// One full-column-rank `n x rho` representative per `rho`-dimensional
/// column space, in reduced column echelon form.
///
/// Deterministic order: pivot row sets ascending lexicographically, then free
/// entries in odometer order.
pub fn enumerate_subspaces(q: u64, n: usize, rho: usize) -> Result<Vec<GroundMatrix>> {
    if rho > n {
        return Err(Error::Dimension(format!(
            "cannot enumerate {rho}-dimensional subspaces of a {n}-dimensional space"
        )));
    }
    if rho == 0 {
        return Ok(vec![GroundMatrix::zeros(q, n, 0)]);
    }
    let mut out = Vec::new();
    for pivots in (0..n).combinations(rho) {
        // free entries of the row-echelon basis: (row i, col c) with
        // c > pivots[i] and c not itself a pivot column
        let mut free_slots: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for c in (p + 1)..n {
                if !pivots.contains(&c) {
                    free_slots.push((i, c));
                }
            }
        }
        let mut assignment = vec![0u64; free_slots.len()];
        loop {
            // basis in rows, then transposed so columns span the subspace
            let mut basis = GroundMatrix::zeros(q, rho, n);
            for (i, &p) in pivots.iter().enumerate() {
                basis.set(i, p, 1);
            }
            for (slot, &(i, c)) in free_slots.iter().enumerate() {
                basis.set(i, c, assignment[slot]);
            }
            out.push(basis.transpose());

            // odometer increment
            let mut k = 0usize;
            loop {
                if k == assignment.len() {
                    break;
                }
                assignment[k] += 1;
                if assignment[k] < q {
                    break;
                }
                assignment[k] = 0;
                k += 1;
            }
            if k == assignment.len() {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(2, 1, 2), 3);
        assert_eq!(gaussian_binomial(3, 2, 2), 7);
        assert_eq!(gaussian_binomial(4, 1, 2), 15);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(4, 2, 3), 130);
        assert_eq!(gaussian_binomial(5, 2, 2), 155);
    }

    #[test]
    fn counts_match_gaussian_binomial() {
        for &(n, rho, q) in &[(2usize, 1usize, 2u64), (3, 1, 2), (3, 2, 2), (4, 2, 2), (3, 2, 3)] {
            let reps = enumerate_subspaces(q, n, rho).unwrap();
            assert_eq!(reps.len() as u128, gaussian_binomial(n, rho, q));
            for r in &reps {
                assert_eq!(r.rows(), n);
                assert_eq!(r.cols(), rho);
                assert_eq!(r.rank(), rho);
            }
        }
        assert_eq!(enumerate_subspaces(2, 3, 0).unwrap().len(), 1);
        assert!(enumerate_subspaces(2, 2, 3).is_err());
    }

    /// Column-space signature: set of all vectors in the span.
    fn span_signature(m: &GroundMatrix) -> Vec<Vec<u64>> {
        let q = m.q();
        let rho = m.cols();
        let mut vectors = HashSet::new();
        let mut coeffs = vec![0u64; rho];
        loop {
            let v = m.mul_vec(&coeffs);
            vectors.insert(v);
            let mut k = 0;
            loop {
                if k == rho {
                    break;
                }
                coeffs[k] += 1;
                if coeffs[k] < q {
                    break;
                }
                coeffs[k] = 0;
                k += 1;
            }
            if k == rho {
                break;
            }
        }
        let mut sig: Vec<Vec<u64>> = vectors.into_iter().collect();
        sig.sort();
        sig
    }

    #[test]
    fn representatives_are_pairwise_distinct_spans() {
        let reps = enumerate_subspaces(2, 4, 2).unwrap();
        let mut seen = HashSet::new();
        for r in &reps {
            assert!(seen.insert(span_signature(r)), "duplicate column space");
        }
    }

    #[test]
    fn cross_check_by_exhaustive_dedup() {
        // every rank-2 4x2 matrix over F_2, deduplicated by column space
        let mut spans = HashSet::new();
        for bits in 0..(1u32 << 8) {
            let entries: Vec<u64> = (0..8).map(|i| ((bits >> i) & 1) as u64).collect();
            let m = GroundMatrix::from_rows(
                2,
                (0..4).map(|r| entries[2 * r..2 * r + 2].to_vec()).collect(),
            );
            if m.rank() == 2 {
                spans.insert(span_signature(&m));
            }
        }
        assert_eq!(spans.len(), 35);
    }
}
