//! Smallest-prime-factor sieve and the level sets of Ω.
//!
//! A linear sieve fills `spf[n]` for every `n ≤ N`; `Ω(n)`, the squarefree
//! flags and the prime list fall out of the same pass. [`CountTable`] groups
//! the integers by `Ω(n) = m` so that `#{n ≤ x : Ω(n) = m}` can be answered for
//! any `x ≤ N` with a binary search.

use serde::Serialize;

use crate::error::{LabError, Result};

/// Largest sieve limit accepted by [`FactorSieve::new`].
///
/// At this size the tables take roughly 600 MB (`u32` spf plus two byte tables).
pub const MAX_SIEVE_LIMIT: usize = 100_000_000;

#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: usize,
    spf: Vec<u32>,
    omega: Vec<u8>,
    squarefree: Vec<bool>,
    primes: Vec<u32>,
}

impl FactorSieve {
    /// Builds the sieve for `[1, limit]` with the default cap.
    pub fn new(limit: usize) -> Result<Self> {
        Self::with_cap(limit, MAX_SIEVE_LIMIT)
    }

    /// Builds the sieve, rejecting limits above `cap`.
    pub fn with_cap(limit: usize, cap: usize) -> Result<Self> {
        if limit == 0 {
            return Err(LabError::Capacity("sieve limit must be at least 1".into()));
        }
        if limit > cap {
            return Err(LabError::Capacity(format!(
                "sieve limit {limit} exceeds the configured cap {cap}"
            )));
        }

        let mut spf = vec![0u32; limit + 1];
        let mut omega = vec![0u8; limit + 1];
        let mut squarefree = vec![true; limit + 1];
        let mut primes: Vec<u32> = Vec::new();
        if limit >= 1 {
            spf[1] = 1;
        }

        // Linear sieve: every composite n = p * r is visited exactly once, with
        // p = spf(n) <= spf(r).
        for n in 2..=limit {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u32);
                omega[n] = 1;
            }
            let spf_n = spf[n];
            for &p in &primes {
                if p > spf_n {
                    break;
                }
                let composite = n * p as usize;
                if composite > limit {
                    break;
                }
                spf[composite] = p;
                omega[composite] = omega[n] + 1;
                squarefree[composite] = squarefree[n] && p != spf_n;
            }
        }

        Ok(Self {
            limit,
            spf,
            omega,
            squarefree,
            primes,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Smallest prime factor of `n`, with `spf(1) = 1`.
    pub fn spf(&self, n: usize) -> u32 {
        self.spf[n]
    }

    /// Ω(n): number of prime factors counted with multiplicity.
    pub fn omega(&self, n: usize) -> u32 {
        u32::from(self.omega[n])
    }

    pub fn is_squarefree(&self, n: usize) -> bool {
        self.squarefree[n]
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// All primes up to the limit, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Raw Ω table indexed by `n` (entry 0 is unused).
    pub fn omega_table(&self) -> &[u8] {
        &self.omega
    }

    /// Prime factors of `n` with multiplicity, ascending.
    pub fn factorize(&self, n: usize) -> Result<Vec<u32>> {
        if n == 0 || n > self.limit {
            return Err(LabError::Usage(format!(
                "cannot factorize {n}: sieve covers [1, {}]",
                self.limit
            )));
        }
        let mut factors = Vec::with_capacity(self.omega[n] as usize);
        let mut rest = n;
        while rest > 1 {
            let p = self.spf[rest];
            factors.push(p);
            rest /= p as usize;
        }
        Ok(factors)
    }

    /// Euler's totient for every `n ≤ limit`, derived from the spf table.
    pub fn totients(&self) -> Vec<u32> {
        let mut phi = vec![0u32; self.limit + 1];
        phi[1] = 1;
        for n in 2..=self.limit {
            let p = self.spf[n] as usize;
            let rest = n / p;
            phi[n] = if rest.is_multiple_of(p) {
                phi[rest] * p as u32
            } else {
                phi[rest] * (p as u32 - 1)
            };
        }
        phi
    }

    /// Groups `[1, limit]` into the level sets of Ω.
    pub fn count_table(&self) -> CountTable {
        CountTable::from_sieve(self)
    }
}

/// Exact sizes and members of the level sets `E_{N,m} = {n ≤ N : Ω(n) = m}`.
#[derive(Debug, Clone, Serialize)]
pub struct CountTable {
    limit: usize,
    counts: Vec<u64>,
    #[serde(skip)]
    members: Vec<Vec<u32>>,
}

impl CountTable {
    pub fn from_sieve(sieve: &FactorSieve) -> Self {
        let limit = sieve.limit();
        let max_m = floor_log2(limit) as usize;
        let mut counts = vec![0u64; max_m + 1];
        for n in 1..=limit {
            counts[sieve.omega[n] as usize] += 1;
        }
        let mut members: Vec<Vec<u32>> = counts
            .iter()
            .map(|&c| Vec::with_capacity(c as usize))
            .collect();
        for n in 1..=limit {
            members[sieve.omega[n] as usize].push(n as u32);
        }
        Self {
            limit,
            counts,
            members,
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// `counts[m] = |E_{N,m}|` for `m = 0..=⌊log₂ N⌋`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Largest level index held by the table.
    pub fn max_m(&self) -> usize {
        self.counts.len() - 1
    }

    /// Ascending members of `E_{N,m}`; empty past the last level.
    pub fn members(&self, m: usize) -> &[u32] {
        self.members.get(m).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Members of `E_{x,m}` for `x ≤ limit`.
    pub fn members_upto(&self, x: usize, m: usize) -> &[u32] {
        let all = self.members(m);
        &all[..all.partition_point(|&n| n as usize <= x)]
    }

    /// `|E_{x,m}|`, the number of `n ≤ x` with `Ω(n) = m`.
    pub fn e_count(&self, x: usize, m: usize) -> Result<u64> {
        if x > self.limit {
            return Err(LabError::Usage(format!(
                "count threshold {x} exceeds the table limit {}",
                self.limit
            )));
        }
        Ok(self.members_upto(x, m).len() as u64)
    }
}

/// `⌊log₂ n⌋` for `n ≥ 1`.
pub fn floor_log2(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(mut n: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            while n.is_multiple_of(d) {
                out.push(d as u32);
                n /= d;
            }
            d += 1;
        }
        if n > 1 {
            out.push(n as u32);
        }
        out
    }

    #[test]
    fn rejects_zero_and_oversized_limits() {
        assert!(matches!(FactorSieve::new(0), Err(LabError::Capacity(_))));
        assert!(matches!(
            FactorSieve::with_cap(1001, 1000),
            Err(LabError::Capacity(_))
        ));
        assert!(matches!(
            FactorSieve::new(MAX_SIEVE_LIMIT + 1),
            Err(LabError::Capacity(_))
        ));
    }

    #[test]
    fn limit_one() {
        let s = FactorSieve::new(1).unwrap();
        assert!(s.primes().is_empty());
        assert_eq!(s.omega(1), 0);
        assert!(s.is_squarefree(1));
        assert_eq!(s.count_table().counts(), &[1]);
    }

    #[test]
    fn limit_ten() {
        let s = FactorSieve::new(10).unwrap();
        assert_eq!(s.primes(), &[2, 3, 5, 7]);
        assert_eq!(s.omega(8), 3);
        assert_eq!(s.omega(9), 2);
        let sf: Vec<usize> = (1..=10).filter(|&n| s.is_squarefree(n)).collect();
        assert_eq!(sf, vec![1, 2, 3, 5, 6, 7, 10]);
    }

    #[test]
    fn prime_count_to_one_million() {
        let s = FactorSieve::new(1_000_000).unwrap();
        assert_eq!(s.primes().len(), 78_498);
    }

    #[test]
    fn factorize_examples() {
        let s = FactorSieve::new(100).unwrap();
        assert_eq!(s.factorize(12).unwrap(), vec![2, 2, 3]);
        assert!(s.factorize(1).unwrap().is_empty());
        assert_eq!(s.factorize(97).unwrap(), vec![97]);
        assert!(matches!(s.factorize(0), Err(LabError::Usage(_))));
        assert!(matches!(s.factorize(101), Err(LabError::Usage(_))));
    }

    #[test]
    fn factorize_agrees_with_trial_division() {
        let s = FactorSieve::new(200_000).unwrap();
        // fixed stride walk covering small and large n
        for n in (1..=200_000).step_by(197) {
            assert_eq!(s.factorize(n).unwrap(), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn totients_small() {
        let s = FactorSieve::new(12).unwrap();
        assert_eq!(&s.totients()[1..], &[1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]);
    }

    #[test]
    fn count_table_examples() {
        let t = FactorSieve::new(10).unwrap().count_table();
        assert_eq!(t.counts(), &[1, 4, 4, 1]);
        assert_eq!(t.members(2), &[4, 6, 9, 10]);
        assert_eq!(t.members(3), &[8]);

        let t = FactorSieve::new(2).unwrap().count_table();
        assert_eq!(t.counts(), &[1, 1]);
    }

    #[test]
    fn e_count_examples() {
        let t = FactorSieve::new(100).unwrap().count_table();
        assert_eq!(t.e_count(10, 2).unwrap(), 4);
        assert_eq!(t.e_count(1, 0).unwrap(), 1);
        assert_eq!(t.e_count(1, 1).unwrap(), 0);
        assert_eq!(t.e_count(0, 0).unwrap(), 0);
        assert_eq!(t.e_count(100, 1).unwrap(), 25);
        assert_eq!(t.e_count(100, 40).unwrap(), 0);
        assert!(matches!(t.e_count(101, 1), Err(LabError::Usage(_))));
    }

    #[test]
    fn floor_log2_values() {
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(2), 1);
        assert_eq!(floor_log2(10), 3);
        assert_eq!(floor_log2(1 << 20), 20);
    }
}
