//! Permutations of `0..n` stored as image vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation `τ` of `0..n`, stored by images: `images[j] = τ(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// The adjacent or distant transposition of `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(j, &i)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &i) in self.0.iter().enumerate() {
            inv[i] = j;
        }
        Self(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self(other.0.iter().map(|&j| self.0[j]).collect())
    }
}

pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// Lexicographic unranking through the factorial number system.
/// Rank 0 is the identity; ranks increase in lexicographic order of the
/// image sequence `(τ(0), …, τ(n−1))`.
pub fn unrank_lexicographic(n: usize, rank: u64) -> Result<Permutation> {
    let total = factorial(n).ok_or_else(|| Error::InvalidArgument(format!("{n}! overflows")))?;
    if rank >= total {
        return Err(Error::InvalidArgument(format!("rank {rank} out of range for S_{n}")));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut images = Vec::with_capacity(n);
    let mut rem = rank;
    for pos in 0..n {
        let radix = factorial(n - 1 - pos).expect("smaller factorial fits");
        let digit = (rem / radix) as usize;
        rem %= radix;
        images.push(pool.remove(digit));
    }
    Ok(Permutation(images))
}

/// Inverse of [`unrank_lexicographic`].
pub fn rank_lexicographic(p: &Permutation) -> u64 {
    let n = p.len();
    let mut pool: Vec<usize> = (0..n).collect();
    let mut rank = 0u64;
    for (pos, &img) in p.images().iter().enumerate() {
        let digit = pool.iter().position(|&x| x == img).expect("valid permutation");
        pool.remove(digit);
        rank += digit as u64 * factorial(n - 1 - pos).expect("fits");
    }
    rank
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let total = factorial(n).expect("small n");
    (0..total)
        .map(|r| unrank_lexicographic(n, r).expect("rank in range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_zero_is_identity() {
        for n in 0..6 {
            assert!(unrank_lexicographic(n, 0).unwrap().is_identity());
        }
    }

    #[test]
    fn unranking_is_lexicographic_and_invertible() {
        let perms = all_permutations(4);
        assert_eq!(perms.len(), 24);
        for w in perms.windows(2) {
            assert!(w[0].images() < w[1].images());
        }
        for (r, p) in perms.iter().enumerate() {
            assert_eq!(rank_lexicographic(p), r as u64);
        }
        assert_eq!(perms[1].images(), &[0, 1, 3, 2]);
        assert_eq!(perms[23].images(), &[3, 2, 1, 0]);
    }

    #[test]
    fn inverse_and_compose() {
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.inverse().compose(&p).is_identity());
        assert_eq!(p.compose(&p).images(), &[2, 0, 1]);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![2, 0]).is_err());
        assert!(unrank_lexicographic(3, 6).is_err());
    }
}
